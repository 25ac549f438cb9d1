//! Overlap consistency: no-signalling for measurement models and preparation
//! compatibility (under a fixed extension family) for preparation models.

use serde_json::{json, Value};

use crate::incext::{extension, incidence, ExtensionFamily, IncextError};
use crate::models::{MeasurementModel, PreparationModel};
use crate::ratbool::rational::format_rational;
use crate::ratbool::RatMatrix;
use crate::scenario::Label;

/// Both sides of the overlap identity for one unordered context pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCheck {
    pub contexts: (usize, usize),
    pub pair: (Vec<Label>, Vec<Label>),
    pub overlap: Vec<Label>,
    pub lhs: RatMatrix,
    pub rhs: RatMatrix,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatReport {
    pub checks: Vec<PairCheck>,
    marginals: bool,
}

impl CompatReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.equal)
    }

    pub fn violations(&self) -> impl Iterator<Item = &PairCheck> {
        self.checks.iter().filter(|c| !c.equal)
    }

    pub fn first_violation(&self) -> Option<&PairCheck> {
        self.violations().next()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.checks.iter().map(|c| c.to_json(self.marginals)).collect())
    }
}

impl PairCheck {
    pub fn to_json(&self, as_vector: bool) -> Value {
        let side = |m: &RatMatrix| -> Value {
            if as_vector {
                json!(m.entries().iter().map(format_rational).collect::<Vec<_>>())
            } else {
                matrix_json(m)
            }
        };
        json!({
            "pair": [self.pair.0, self.pair.1],
            "lhs": side(&self.lhs),
            "rhs": side(&self.rhs),
            "equal": self.equal,
        })
    }
}

pub(crate) fn matrix_json(m: &RatMatrix) -> Value {
    json!((0..m.rows()).map(|r| m.row(r).iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// `M_{C∩C'|C} e_C = M_{C∩C'|C'} e_{C'}` for every context pair.
pub fn no_signalling(model: &MeasurementModel) -> Result<CompatReport, IncextError> {
    let scenario = model.scenario();
    let cover = scenario.cover();
    let mut checks = Vec::new();
    for (i, j) in cover.pairs() {
        let overlap = cover.overlap(i, j);
        let (ci, cj) = (&scenario.contexts()[i], &scenario.contexts()[j]);
        let marginal = |ctx: &[Label], c: usize| -> Result<RatMatrix, IncextError> {
            let m = incidence(&overlap, ctx, scenario.outcomes())?;
            Ok(RatMatrix::column_vector(m.mul_vec(model.table(c)).expect("incidence matches table")))
        };
        let lhs = marginal(ci, i)?;
        let rhs = marginal(cj, j)?;
        checks.push(PairCheck {
            contexts: (i, j),
            pair: (ci.clone(), cj.clone()),
            equal: lhs == rhs,
            overlap,
            lhs,
            rhs,
        });
    }
    Ok(CompatReport { checks, marginals: true })
}

/// `E_{m|Γ} S_{Γ|Γ∩Γ'} = E_{m|Γ'} S_{Γ'|Γ∩Γ'}` for every source-context pair.
/// Disjoint pairs compare the instance-averaged outcome distributions.
pub fn prep_compatible(model: &PreparationModel, fam: &ExtensionFamily) -> Result<CompatReport, IncextError> {
    let scenario = model.scenario();
    fam.check_against(scenario)?;
    let cover = scenario.cover();
    let mut checks = Vec::new();
    for (i, j) in cover.pairs() {
        let overlap = cover.overlap(i, j);
        let (gi, gj) = (&scenario.contexts()[i], &scenario.contexts()[j]);
        let induced = |ctx: &[Label], c: usize| -> Result<RatMatrix, IncextError> {
            let s = extension(ctx, &overlap, fam)?;
            Ok(model.table(c).mul(&s).expect("extension rows match table columns"))
        };
        let lhs = induced(gi, i)?;
        let rhs = induced(gj, j)?;
        checks.push(PairCheck {
            contexts: (i, j),
            pair: (gi.clone(), gj.clone()),
            equal: lhs == rhs,
            overlap,
            lhs,
            rhs,
        });
    }
    Ok(CompatReport { checks, marginals: false })
}
