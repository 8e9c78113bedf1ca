use crate::matroid::{ElementId, Matroid, MatroidOracle};
use crate::principal::{principal_minors, PrincipalDecomposition};
use crate::scalar::Scalar;

use super::{Alg1, Coins, OnlinePolicy, OracleMode, PolicyError};

/// [`Alg1`] run separately on every principal minor. Loops are never
/// accepted.
#[derive(Debug, Clone)]
pub struct Alg2<W> {
    decomposition: PrincipalDecomposition,
    /// `(part, local id)` for each element, `None` for loops.
    local: Vec<Option<(usize, ElementId)>>,
    subs: Vec<Alg1<W>>,
}

impl<W: Scalar> Alg2<W> {
    pub fn new(m: &MatroidOracle) -> Result<Self, PolicyError> {
        let decomposition = principal_minors(m)?;
        let mut local = vec![None; m.ground_size()];
        let mut subs = Vec::with_capacity(decomposition.parts.len());
        for (p, part) in decomposition.parts.iter().enumerate() {
            for (i, &e) in part.elements.iter().enumerate() {
                local[e] = Some((p, i));
            }
            subs.push(Alg1::new_unchecked(part.minor.clone())?);
        }
        Ok(Self { decomposition, local, subs })
    }

    pub fn decomposition(&self) -> &PrincipalDecomposition {
        &self.decomposition
    }

    /// Accepted elements of each part, as ids of the original matroid.
    pub fn accepted_by_part(&self) -> Vec<Vec<ElementId>> {
        self.subs
            .iter()
            .zip(&self.decomposition.parts)
            .map(|(s, part)| s.accepted().iter().map(|&i| part.elements[i]).collect())
            .collect()
    }
}

impl<W: Scalar> OnlinePolicy<W> for Alg2<W> {
    fn name(&self) -> &'static str {
        "alg2"
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Known
    }

    fn on_arrival(&mut self, _: &dyn Matroid, _: &mut dyn Coins, e: ElementId, w: &W) -> Result<bool, PolicyError> {
        match self.local[e] {
            Some((p, i)) => self.subs[p].step(i, w),
            None => Ok(false),
        }
    }
}
