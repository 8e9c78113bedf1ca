//! Matroid oracles over a dense, indexed ground set.
//!
//! [`MatroidOracle`] covers the uniform, partition, graphic and explicit
//! (list-of-bases) families, plus minors of any of them. Every query takes
//! element sets as slices of [`ElementId`]; sets must not repeat elements.

mod graphic;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use graphic::DisjointSets;

pub type ElementId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatroidError {
    #[error("element {element} is outside the ground set of size {size}")]
    OutOfRange { element: ElementId, size: usize },
    #[error("element {0} appears more than once in a query set")]
    Duplicate(ElementId),
    #[error("element {0} has not arrived yet and cannot be queried")]
    UnseenElement(ElementId),
    #[error("contract and restrict sets both contain element {0}")]
    OverlappingMinor(ElementId),
    #[error("invalid matroid: {0}")]
    Invalid(String),
}

/// Rank-oracle access to a matroid.
///
/// Implementors only need `ground_size` and `rank_of`; everything else is
/// derived from the rank function.
pub trait Matroid: Send + Sync {
    fn ground_size(&self) -> usize;

    fn rank_of(&self, set: &[ElementId]) -> Result<usize, MatroidError>;

    fn is_independent(&self, set: &[ElementId]) -> Result<bool, MatroidError> {
        Ok(self.rank_of(set)? == set.len())
    }

    fn rank(&self) -> Result<usize, MatroidError> {
        let all: Vec<ElementId> = (0..self.ground_size()).collect();
        self.rank_of(&all)
    }

    /// `{ e : rank(set + e) = rank(set) }`, sorted.
    fn span_of(&self, set: &[ElementId]) -> Result<Vec<ElementId>, MatroidError> {
        let base = self.rank_of(set)?;
        let mut members = vec![false; self.ground_size()];
        for &e in set {
            members[e] = true;
        }
        let mut probe = set.to_vec();
        let mut out = Vec::new();
        for (e, &member) in members.iter().enumerate() {
            if member {
                out.push(e);
                continue;
            }
            probe.push(e);
            if self.rank_of(&probe)? == base {
                out.push(e);
            }
            probe.pop();
        }
        Ok(out)
    }

    fn is_loop(&self, e: ElementId) -> Result<bool, MatroidError> {
        Ok(self.rank_of(&[e])? == 0)
    }

    fn loops(&self) -> Result<Vec<ElementId>, MatroidError> {
        let mut out = Vec::new();
        for e in 0..self.ground_size() {
            if self.is_loop(e)? {
                out.push(e);
            }
        }
        Ok(out)
    }
}

/// Rejects out-of-range and repeated elements.
pub(crate) fn validate_set(set: &[ElementId], size: usize) -> Result<(), MatroidError> {
    let mut seen = vec![0u64; size.div_ceil(64)];
    for &e in set {
        if e >= size {
            return Err(MatroidError::OutOfRange { element: e, size });
        }
        let (word, bit) = (e / 64, 1u64 << (e % 64));
        if seen[word] & bit != 0 {
            return Err(MatroidError::Duplicate(e));
        }
        seen[word] |= bit;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Family {
    Uniform { n: usize, rank: usize },
    Partition { blocks: Vec<Vec<ElementId>>, capacities: Vec<usize>, block_of: Vec<usize> },
    Graphic { vertices: usize, edges: Vec<(usize, usize)> },
    Explicit { n: usize, bases: Vec<Vec<ElementId>>, masks: Vec<u64> },
}

impl Family {
    fn ground_size(&self) -> usize {
        match self {
            Family::Uniform { n, .. } | Family::Explicit { n, .. } => *n,
            Family::Partition { block_of, .. } => block_of.len(),
            Family::Graphic { edges, .. } => edges.len(),
        }
    }

    /// Rank of a validated set of base elements.
    fn rank_of(&self, set: &[ElementId]) -> usize {
        match self {
            Family::Uniform { rank, .. } => set.len().min(*rank),
            Family::Partition { capacities, block_of, .. } => {
                let mut counts = vec![0usize; capacities.len()];
                for &e in set {
                    counts[block_of[e]] += 1;
                }
                counts.iter().zip(capacities).map(|(&c, &cap)| c.min(cap)).sum()
            }
            Family::Graphic { vertices, edges } => graphic::forest_size(*vertices, edges, set.iter().copied()),
            Family::Explicit { masks, .. } => {
                let m = set.iter().fold(0u64, |acc, &e| acc | (1u64 << e));
                masks.iter().map(|b| (b & m).count_ones() as usize).max().unwrap_or(0)
            }
        }
    }

    fn is_independent(&self, set: &[ElementId]) -> bool {
        match self {
            Family::Uniform { rank, .. } => set.len() <= *rank,
            Family::Partition { capacities, block_of, .. } => {
                let mut counts = vec![0usize; capacities.len()];
                set.iter().all(|&e| {
                    let b = block_of[e];
                    counts[b] += 1;
                    counts[b] <= capacities[b]
                })
            }
            Family::Graphic { vertices, edges } => graphic::is_forest(*vertices, edges, set),
            Family::Explicit { masks, .. } => {
                let m = set.iter().fold(0u64, |acc, &e| acc | (1u64 << e));
                masks.iter().any(|b| b & m == m)
            }
        }
    }
}

/// A restriction/contraction applied on top of a base family. Element `i`
/// of the minor is base element `restrict[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct MinorView {
    restrict: Vec<ElementId>,
    contract: Vec<ElementId>,
    contract_rank: usize,
}

/// Which family an oracle (or the base of a minor) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Uniform,
    Partition,
    Graphic,
    Explicit,
}

/// Immutable matroid oracle. Cloning is cheap; clones share the family.
#[derive(Clone, PartialEq, Eq)]
pub struct MatroidOracle {
    family: Arc<Family>,
    view: Option<Arc<MinorView>>,
}

impl fmt::Debug for MatroidOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatroidOracle")
            .field("family", &self.kind())
            .field("ground_size", &self.ground_size())
            .field("is_minor", &self.view.is_some())
            .finish()
    }
}

impl MatroidOracle {
    fn from_family(family: Family) -> Self {
        Self { family: Arc::new(family), view: None }
    }

    pub fn uniform(n: usize, rank: usize) -> Result<Self, MatroidError> {
        if rank > n {
            return Err(MatroidError::Invalid(format!("uniform rank {rank} exceeds n = {n}")));
        }
        Ok(Self::from_family(Family::Uniform { n, rank }))
    }

    /// Blocks must partition `0..n` for some `n`. Zero-capacity blocks hold loops.
    pub fn partition(blocks: Vec<Vec<ElementId>>, capacities: Vec<usize>) -> Result<Self, MatroidError> {
        if blocks.len() != capacities.len() {
            return Err(MatroidError::Invalid(format!("{} blocks but {} capacities", blocks.len(), capacities.len())));
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= n {
                    return Err(MatroidError::OutOfRange { element: e, size: n });
                }
                if block_of[e] != usize::MAX {
                    return Err(MatroidError::Duplicate(e));
                }
                block_of[e] = b;
            }
        }
        Ok(Self::from_family(Family::Partition { blocks, capacities, block_of }))
    }

    /// Edge `i` of `edges` is element `i`. Self-loops are matroid loops.
    pub fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, MatroidError> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= vertices || v >= vertices) {
            return Err(MatroidError::Invalid(format!("edge ({u},{v}) references a vertex >= {vertices}")));
        }
        Ok(Self::from_family(Family::Graphic { vertices, edges }))
    }

    /// A matroid given by its bases. Limited to `n <= 64`; the basis
    /// exchange axiom is verified on construction.
    pub fn explicit(n: usize, bases: Vec<Vec<ElementId>>) -> Result<Self, MatroidError> {
        if n > 64 {
            return Err(MatroidError::Invalid(format!("explicit matroids support n <= 64, got {n}")));
        }
        if bases.is_empty() {
            return Err(MatroidError::Invalid("explicit matroid needs at least one basis".into()));
        }
        let mut masks = Vec::with_capacity(bases.len());
        for basis in &bases {
            validate_set(basis, n)?;
            if basis.len() != bases[0].len() {
                return Err(MatroidError::Invalid("bases have different sizes".into()));
            }
            masks.push(basis.iter().fold(0u64, |acc, &e| acc | (1u64 << e)));
        }
        masks.sort_unstable();
        masks.dedup();
        for &b1 in &masks {
            for &b2 in &masks {
                let mut only1 = b1 & !b2;
                while only1 != 0 {
                    let x = only1.trailing_zeros();
                    only1 &= only1 - 1;
                    let without = b1 & !(1u64 << x);
                    let mut only2 = b2 & !b1;
                    let mut ok = false;
                    while only2 != 0 {
                        let y = only2.trailing_zeros();
                        only2 &= only2 - 1;
                        if masks.binary_search(&(without | (1u64 << y))).is_ok() {
                            ok = true;
                            break;
                        }
                    }
                    if !ok {
                        return Err(MatroidError::Invalid(format!(
                            "bases violate the exchange axiom (dropping element {x})"
                        )));
                    }
                }
            }
        }
        Ok(Self::from_family(Family::Explicit { n, bases, masks }))
    }

    pub fn from_spec(spec: &MatroidSpec) -> Result<Self, MatroidError> {
        match spec {
            MatroidSpec::Uniform { n, r } => Self::uniform(*n, *r),
            MatroidSpec::Partition { blocks, capacities } => Self::partition(blocks.clone(), capacities.clone()),
            MatroidSpec::Graphic { vertices, edges } => {
                Self::graphic(*vertices, edges.iter().map(|&[u, v]| (u, v)).collect())
            }
            MatroidSpec::Explicit { n, bases } => Self::explicit(*n, bases.clone()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, MatroidError> {
        let spec: MatroidSpec =
            serde_json::from_str(text).map_err(|e| MatroidError::Invalid(format!("bad matroid JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    /// The JSON description of a base (non-minor) oracle.
    pub fn to_spec(&self) -> Option<MatroidSpec> {
        if self.view.is_some() {
            return None;
        }
        Some(match &*self.family {
            Family::Uniform { n, rank } => MatroidSpec::Uniform { n: *n, r: *rank },
            Family::Partition { blocks, capacities, .. } => {
                MatroidSpec::Partition { blocks: blocks.clone(), capacities: capacities.clone() }
            }
            Family::Graphic { vertices, edges } => {
                MatroidSpec::Graphic { vertices: *vertices, edges: edges.iter().map(|&(u, v)| [u, v]).collect() }
            }
            Family::Explicit { n, bases, .. } => MatroidSpec::Explicit { n: *n, bases: bases.clone() },
        })
    }

    pub fn kind(&self) -> FamilyKind {
        match &*self.family {
            Family::Uniform { .. } => FamilyKind::Uniform,
            Family::Partition { .. } => FamilyKind::Partition,
            Family::Graphic { .. } => FamilyKind::Graphic,
            Family::Explicit { .. } => FamilyKind::Explicit,
        }
    }

    pub fn is_minor(&self) -> bool {
        self.view.is_some()
    }

    fn to_base(&self, set: &[ElementId]) -> Vec<ElementId> {
        match &self.view {
            None => set.to_vec(),
            Some(v) => set.iter().map(|&e| v.restrict[e]).chain(v.contract.iter().copied()).collect(),
        }
    }

    /// The minor `(M / contract) | restrict`, re-indexed so element `i` of
    /// the result is `restrict[i]`.
    pub fn minor(&self, contract: &[ElementId], restrict: &[ElementId]) -> Result<MatroidOracle, MatroidError> {
        let n = self.ground_size();
        validate_set(contract, n)?;
        validate_set(restrict, n)?;
        let mut in_contract = vec![false; n];
        for &e in contract {
            in_contract[e] = true;
        }
        if let Some(&e) = restrict.iter().find(|&&e| in_contract[e]) {
            return Err(MatroidError::OverlappingMinor(e));
        }
        let (base_restrict, base_contract): (Vec<_>, Vec<_>) = match &self.view {
            None => (restrict.to_vec(), contract.to_vec()),
            Some(v) => (
                restrict.iter().map(|&e| v.restrict[e]).collect(),
                v.contract.iter().copied().chain(contract.iter().map(|&e| v.restrict[e])).collect(),
            ),
        };
        let contract_rank = self.family.rank_of(&base_contract);
        Ok(MatroidOracle {
            family: Arc::clone(&self.family),
            view: Some(Arc::new(MinorView { restrict: base_restrict, contract: base_contract, contract_rank })),
        })
    }

    pub fn restriction(&self, restrict: &[ElementId]) -> Result<MatroidOracle, MatroidError> {
        self.minor(&[], restrict)
    }

    /// Parameters `(n, r)` when this oracle is (a minor of) a uniform matroid.
    pub fn as_uniform(&self) -> Option<(usize, usize)> {
        let Family::Uniform { rank, .. } = &*self.family else { return None };
        match &self.view {
            None => Some((self.ground_size(), *rank)),
            Some(v) => {
                let left = rank - v.contract_rank;
                Some((v.restrict.len(), left.min(v.restrict.len())))
            }
        }
    }

    /// Blocks (in local ids) and capacities when this oracle is (a minor of)
    /// a partition matroid. Blocks with no local element are dropped.
    pub fn as_partition(&self) -> Option<(Vec<Vec<ElementId>>, Vec<usize>)> {
        let Family::Partition { capacities, block_of, .. } = &*self.family else { return None };
        let (restrict, contract): (Vec<ElementId>, &[ElementId]) = match &self.view {
            None => ((0..block_of.len()).collect(), &[]),
            Some(v) => (v.restrict.clone(), &v.contract),
        };
        let mut used = vec![0usize; capacities.len()];
        for &e in contract {
            used[block_of[e]] += 1;
        }
        let mut local: Vec<Vec<ElementId>> = vec![Vec::new(); capacities.len()];
        for (i, &e) in restrict.iter().enumerate() {
            local[block_of[e]].push(i);
        }
        let mut blocks = Vec::new();
        let mut caps = Vec::new();
        for (b, members) in local.into_iter().enumerate() {
            if !members.is_empty() {
                blocks.push(members);
                caps.push(capacities[b] - used[b].min(capacities[b]));
            }
        }
        Some((blocks, caps))
    }

    /// Vertex count and edge list (in local ids) when this oracle is (a
    /// minor of) a graphic matroid. Contracted edges merge their endpoints.
    pub fn as_graph(&self) -> Option<(usize, Vec<(usize, usize)>)> {
        let Family::Graphic { vertices, edges } = &*self.family else { return None };
        match &self.view {
            None => Some((*vertices, edges.clone())),
            Some(v) => {
                let mut dsu = DisjointSets::new(*vertices);
                for &e in &v.contract {
                    dsu.union(edges[e].0, edges[e].1);
                }
                let mut label = vec![usize::MAX; *vertices];
                let mut next = 0;
                for x in 0..*vertices {
                    let root = dsu.find(x);
                    if label[root] == usize::MAX {
                        label[root] = next;
                        next += 1;
                    }
                }
                let local =
                    v.restrict.iter().map(|&e| (label[dsu.find(edges[e].0)], label[dsu.find(edges[e].1)])).collect();
                Some((next, local))
            }
        }
    }
}

impl Matroid for MatroidOracle {
    fn ground_size(&self) -> usize {
        match &self.view {
            None => self.family.ground_size(),
            Some(v) => v.restrict.len(),
        }
    }

    fn rank_of(&self, set: &[ElementId]) -> Result<usize, MatroidError> {
        validate_set(set, self.ground_size())?;
        Ok(match &self.view {
            None => self.family.rank_of(set),
            Some(v) => self.family.rank_of(&self.to_base(set)) - v.contract_rank,
        })
    }

    fn is_independent(&self, set: &[ElementId]) -> Result<bool, MatroidError> {
        validate_set(set, self.ground_size())?;
        Ok(match &self.view {
            None => self.family.is_independent(set),
            Some(v) => self.family.rank_of(&self.to_base(set)) - v.contract_rank == set.len(),
        })
    }
}

/// Matroid file format. Element order in the file defines element ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MatroidSpec {
    Uniform { n: usize, r: usize },
    Partition { blocks: Vec<Vec<ElementId>>, capacities: Vec<usize> },
    Graphic { vertices: usize, edges: Vec<[usize; 2]> },
    Explicit { n: usize, bases: Vec<Vec<ElementId>> },
}

/// Oracle that only answers queries about elements that have already
/// arrived. Online policies without full matroid knowledge see the world
/// through this.
pub struct ArrivedOracle<'a> {
    inner: &'a dyn Matroid,
    arrived: Vec<bool>,
}

impl<'a> ArrivedOracle<'a> {
    pub fn new(inner: &'a dyn Matroid) -> Self {
        Self { arrived: vec![false; inner.ground_size()], inner }
    }

    pub fn mark_arrived(&mut self, e: ElementId) {
        self.arrived[e] = true;
    }

    pub fn has_arrived(&self, e: ElementId) -> bool {
        self.arrived.get(e).copied().unwrap_or(false)
    }
}

impl Matroid for ArrivedOracle<'_> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn rank_of(&self, set: &[ElementId]) -> Result<usize, MatroidError> {
        if let Some(&e) = set.iter().find(|&&e| !self.has_arrived(e)) {
            return Err(MatroidError::UnseenElement(e));
        }
        self.inner.rank_of(set)
    }

    fn is_independent(&self, set: &[ElementId]) -> Result<bool, MatroidError> {
        if let Some(&e) = set.iter().find(|&&e| !self.has_arrived(e)) {
            return Err(MatroidError::UnseenElement(e));
        }
        self.inner.is_independent(set)
    }
}
