//! Cycle matroids of multigraphs.
//!
//! Rank is the size of a spanning forest of the chosen edges, computed per
//! query with a throwaway disjoint-set forest over the vertices.

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the components of `a` and `b`; false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

pub(crate) fn forest_size(vertices: usize, edges: &[(usize, usize)], chosen: impl IntoIterator<Item = usize>) -> usize {
    let mut dsu = DisjointSets::new(vertices);
    chosen.into_iter().filter(|&e| dsu.union(edges[e].0, edges[e].1)).count()
}

pub(crate) fn is_forest(vertices: usize, edges: &[(usize, usize)], chosen: &[usize]) -> bool {
    let mut dsu = DisjointSets::new(vertices);
    chosen.iter().all(|&e| dsu.union(edges[e].0, edges[e].1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_forest() {
        let edges = [(0, 1), (1, 2), (0, 2)];
        assert_eq!(forest_size(3, &edges, 0..3), 2);
        assert!(is_forest(3, &edges, &[0, 1]));
        assert!(!is_forest(3, &edges, &[0, 1, 2]));
    }

    #[test]
    fn self_loop_never_joins() {
        let edges = [(1, 1)];
        assert_eq!(forest_size(2, &edges, [0]), 0);
    }
}
