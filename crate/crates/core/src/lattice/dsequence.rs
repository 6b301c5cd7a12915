use std::sync::Arc;

use super::element::{inf_finite, sup_finite, LatticeElement};
use super::regulator::Regulator;
use crate::error::{Error, Result};

/// A bounded double sequence whose rows are regulators.
#[derive(Clone)]
pub struct DSequence {
    rows: Arc<dyn Fn(u64) -> Regulator + Send + Sync>,
    bound: LatticeElement,
}

impl DSequence {
    pub fn new(rows: impl Fn(u64) -> Regulator + Send + Sync + 'static, bound: LatticeElement) -> Self {
        Self { rows: Arc::new(rows), bound }
    }

    pub fn row(&self, i: u64) -> Regulator {
        (self.rows)(i)
    }

    pub fn bound(&self) -> &LatticeElement {
        &self.bound
    }

    pub fn dim(&self) -> usize {
        self.bound.dim()
    }

    /// Checks the bound and the row invariants over `i, j <= depth`.
    pub fn check_bounded(&self, depth: u64) -> Result<()> {
        for i in 1..=depth {
            let row = self.row(i);
            row.validate()?;
            for j in 1..=depth {
                if !row.eval(j).le(&self.bound) {
                    return Err(Error::InvalidValue(format!("entry ({i},{j}) exceeds the bound {}", self.bound)));
                }
            }
        }
        Ok(())
    }
}

/// `⋁_{i <= depth_i} rows(i)(phi(i))`: a lower bound of the infinite domination.
pub fn domination(d: &DSequence, phi: &dyn Fn(u64) -> u64, depth_i: u64) -> Result<LatticeElement> {
    let terms: Vec<_> = (1..=depth_i.max(1)).map(|i| d.row(i).eval(phi(i))).collect();
    let v = sup_finite(&terms)?;
    v.check_dim(&d.bound)?;
    Ok(v)
}

/// Infimum of the sampled dominations.
pub fn weak_sigma_distributivity_probe(
    d: &DSequence,
    phis: &[&dyn Fn(u64) -> u64],
    depth_i: u64,
) -> Result<LatticeElement> {
    let doms = phis.iter().map(|phi| domination(d, phi, depth_i)).collect::<Result<Vec<_>>>()?;
    inf_finite(&doms)
}
