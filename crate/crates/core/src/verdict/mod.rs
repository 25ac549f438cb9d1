//! Contextuality verdicts with witnesses and certificates.

mod measurement;
mod preparation;

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::compat::{matrix_json, PairCheck};
use crate::incext::{ExtensionFamily, IncextError};
use crate::models::ModelError;
use crate::ratbool::{format_rational, BoolMatrix, BooleanObstruction, RatBoolError, RatMatrix, Rational};
use crate::scenario::{Label, ScenarioError};

pub use measurement::{check_measurement, global_incidence};
pub use preparation::{
    check_preparation, forbidden_map, parity_profile, AssignmentReport, ForbiddenMap, PatternObstruction, PrepMode,
    PrepOptions, SupportPattern, DEFAULT_MAX_SWEEP,
};

#[derive(Debug, Error)]
pub enum VerdictError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Extension(#[from] IncextError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Solver(#[from] RatBoolError),
    #[error("support-pattern sweep needs {patterns} patterns, above the limit of {limit}")]
    SweepTooLarge { patterns: String, limit: usize },
    #[error("probabilistic preparation check needs at least one extension family")]
    NoFamilies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Noncontextual,
    Contextual,
    Incompatible,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Probabilistic,
    Possibilistic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Distribution over global sections reproducing every context table.
    GlobalDistribution(Vec<Rational>),
    /// Set of global sections whose restrictions are exactly the observed supports.
    GlobalSupport(Vec<bool>),
    /// Column-stochastic `D` with `E_m = D S_Y` under `mu`.
    Response { mu: ExtensionFamily, d: RatMatrix },
    /// Boolean `D̄` with nonempty columns and `Ē = D̄ S̄_Y` under the support pattern.
    SupportResponse { pattern: SupportPattern, d: BoolMatrix },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Farkas(Vec<Rational>),
    Boolean(BooleanObstruction),
    /// One obstruction per support pattern, in sweep order.
    Patterns(Vec<PatternObstruction>),
    /// A context pair whose overlap statistics disagree.
    Incompatible(PairCheck),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub patterns_checked: usize,
    pub lp_pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub mode: Mode,
    pub witness: Option<Witness>,
    pub certificate: Option<Certificate>,
    pub reason: Option<String>,
    pub stats: Stats,
}

fn rationals_json(v: &[Rational]) -> Value {
    json!(v.iter().map(format_rational).collect::<Vec<_>>())
}

fn bits_json(v: &[bool]) -> Value {
    json!(v.iter().map(|&b| u8::from(b)).collect::<Vec<_>>())
}

fn bool_matrix_json(m: &BoolMatrix) -> Value {
    json!((0..m.rows()).map(|r| bits_json(m.row(r))).collect::<Vec<_>>())
}

pub(crate) fn supports_json(s: &BTreeMap<Label, Vec<bool>>) -> Value {
    Value::Object(s.iter().map(|(k, v)| (k.clone(), bits_json(v))).collect())
}

impl Witness {
    pub fn to_json(&self) -> Value {
        match self {
            Witness::GlobalDistribution(d) => json!({ "mu": null, "D": rationals_json(d) }),
            Witness::GlobalSupport(d) => json!({ "mu": null, "D": bits_json(d) }),
            Witness::Response { mu, d } => json!({ "mu": mu.to_json()["mu"], "D": matrix_json(d) }),
            Witness::SupportResponse { pattern, d } => {
                json!({ "mu": supports_json(pattern.supports()), "D": bool_matrix_json(d) })
            }
        }
    }
}

impl Certificate {
    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Farkas(y) => json!({ "kind": "farkas", "y": rationals_json(y) }),
            Certificate::Boolean(o) => json!({ "kind": "boolean", "obstruction": o }),
            Certificate::Patterns(list) => json!({
                "kind": "support_patterns",
                "patterns": list.iter().map(PatternObstruction::to_json).collect::<Vec<_>>(),
            }),
            Certificate::Incompatible(pair) => {
                let mut v = pair.to_json(pair.lhs.cols() == 1);
                v["kind"] = json!("incompatible_pair");
                v
            }
        }
    }
}

impl Verdict {
    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status,
            "mode": self.mode,
            "witness": self.witness.as_ref().map(Witness::to_json),
            "certificate": self.certificate.as_ref().map(Certificate::to_json),
            "reason": self.reason,
            "stats": self.stats,
        })
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let status = serde_json::to_value(self.status).expect("status serialises");
        let mode = serde_json::to_value(self.mode).expect("mode serialises");
        let mut s = format!("{} ({})", status.as_str().unwrap_or_default(), mode.as_str().unwrap_or_default());
        match &self.certificate {
            Some(Certificate::Farkas(y)) => s += &format!(": Farkas certificate with {} entries", y.len()),
            Some(Certificate::Boolean(_)) => s += ": Boolean obstruction",
            Some(Certificate::Patterns(p)) => s += &format!(": all {} support patterns infeasible", p.len()),
            Some(Certificate::Incompatible(p)) => s += &format!(": pair {:?} / {:?} disagrees", p.pair.0, p.pair.1),
            None => {}
        }
        if let Some(r) = &self.reason {
            s += &format!(" [{r}]");
        }
        s
    }
}
