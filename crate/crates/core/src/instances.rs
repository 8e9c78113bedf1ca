//! Named matroids used throughout the tests, examples and CLI.

use crate::matroid::{MatroidError, MatroidOracle};

/// Cycle matroid of the triangle: three edges, rank 2.
pub fn triangle() -> MatroidOracle {
    MatroidOracle::graphic(3, vec![(0, 1), (1, 2), (0, 2)]).expect("valid graph")
}

/// Triangle on vertices 0,1,2 plus the pendant edge (2,3). Elements 0..3
/// are the triangle, element 3 is the pendant.
pub fn triangle_with_pendant() -> MatroidOracle {
    MatroidOracle::graphic(4, vec![(0, 1), (1, 2), (0, 2), (2, 3)]).expect("valid graph")
}

/// Circulant graph on `vertices` vertices: vertex `i` is joined to
/// `i ± s` for every step `s`.
pub fn circulant(vertices: usize, steps: &[usize]) -> Result<MatroidOracle, MatroidError> {
    let mut edges = Vec::new();
    for i in 0..vertices {
        for &s in steps {
            edges.push((i, (i + s) % vertices));
        }
    }
    MatroidOracle::graphic(vertices, edges)
}

/// Partition matroid with consecutive blocks of the given sizes.
pub fn partition_by_sizes(sizes: &[usize], capacities: &[usize]) -> Result<MatroidOracle, MatroidError> {
    let mut next = 0;
    let blocks = sizes
        .iter()
        .map(|&s| {
            let b: Vec<usize> = (next..next + s).collect();
            next += s;
            b
        })
        .collect();
    MatroidOracle::partition(blocks, capacities.to_vec())
}

/// Rank-1 instance with `non_loops` parallel elements followed by `loops`
/// loops: one capacity-1 block and one capacity-0 block.
pub fn rank_one_with_loop_tail(non_loops: usize, loops: usize) -> MatroidOracle {
    partition_by_sizes(&[non_loops, loops], &[1, 0]).expect("valid partition")
}
