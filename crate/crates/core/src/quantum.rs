//! Born-rule generation of empirical models from small quantum setups,
//! exact rationalisation of the resulting probabilities, and the two built-in
//! models (a CHSH-type Bell table and a PBR-type preparation table).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_bigint::BigInt;
pub use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::models::{MeasurementModel, ModelError, PreparationModel};
use crate::ratbool::{RatMatrix, Rational};
use crate::scenario::{labels, Label, MeasurementScenario, PreparationScenario, ScenarioError};

pub const DEFAULT_MAX_DENOMINATOR: u64 = 64;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Largest total Hilbert-space dimension accepted.
pub const MAX_DIMENSION: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("{what}: {message}")]
    Invalid { what: String, message: String },
    #[error("{what} deviates from the required property by {deviation:e}")]
    Tolerance { what: String, deviation: f64 },
    #[error("no rational with denominator <= {max_denominator} lies within {tolerance:e} of {x}")]
    NoRational { x: f64, max_denominator: u64, tolerance: f64 },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("generated model is invalid: {0}")]
    Model(#[from] ModelError),
    #[error("invalid quantum setup file: {0}")]
    Json(String),
}

fn invalid(what: impl Into<String>, message: impl Into<String>) -> QuantumError {
    QuantumError::Invalid { what: what.into(), message: message.into() }
}

/// Dense complex matrix of `f64` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, QuantumError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("matrix", "ragged rows"));
        }
        let n = rows.len();
        let data: Vec<Complex64> = rows.into_iter().flatten().collect();
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix", "non-finite entry"));
        }
        Ok(Self { rows: n, cols, data })
    }

    /// Column vector `|v⟩`.
    pub fn ket(v: &[Complex64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        let mut out = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.data[(i * rhs.rows + k) * c + j * rhs.cols + l] = a * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "complex matrix shapes");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "complex matrix shapes");
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> ComplexMatrix {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self − rhs`.
    pub fn max_deviation(&self, rhs: &ComplexMatrix) -> f64 {
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity, or `None` if not square.
    fn hermitian_deviation(&self) -> Option<f64> {
        (self.rows == self.cols).then(|| self.max_deviation(&self.adjoint()))
    }

    /// Positive semidefinite within `tol`: Cholesky of `self + tol·I` succeeds.
    pub fn is_psd(&self, tol: f64) -> bool {
        match self.hermitian_deviation() {
            Some(d) if d <= tol => {}
            _ => return false,
        }
        let n = self.rows;
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut diag = self.get(j, j).re + tol;
            for k in 0..j {
                diag -= l[j * n + k].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let d = diag.sqrt();
            l[j * n + j] = Complex64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..self.rows).map(|r| (0..self.cols).map(|c| [self.get(r, c).re, self.get(r, c).im]).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows = rows.into_iter().map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()).collect();
        ComplexMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Best rational approximation of `x` with denominator at most
/// `max_denominator` (continued-fraction convergents and semiconvergents),
/// accepted only if it lies within `tolerance`.
pub fn rationalize(x: f64, max_denominator: u64, tolerance: f64) -> Result<Rational, QuantumError> {
    let fail = || QuantumError::NoRational { x, max_denominator, tolerance };
    if !x.is_finite() || tolerance <= 0.0 || max_denominator == 0 {
        return Err(fail());
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut frac = target;
    for _ in 0..64 {
        let a = frac.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_denominator {
            let k = (max_denominator - q0) / q1;
            let (ps, qs) = (k * p1 + p0, k * q1 + q0);
            let err = |p: u64, q: u64| (target - p as f64 / q as f64).abs();
            if qs > 0 && err(ps, qs) < err(p1, q1) {
                (p1, q1) = (ps, qs);
            }
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let rem = frac - a as f64;
        if rem <= f64::EPSILON * frac.max(1.0) {
            break;
        }
        frac = 1.0 / rem;
    }
    if q1 == 0 || (target - p1 as f64 / q1 as f64).abs() > tolerance {
        return Err(fail());
    }
    let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
    Ok(if negative { -r } else { r })
}

fn check_dims(site_dims: &[usize]) -> Result<usize, QuantumError> {
    if site_dims.is_empty() || site_dims.contains(&0) {
        return Err(invalid("site_dims", "every site needs a positive dimension"));
    }
    let total = site_dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d).filter(|&t| t <= MAX_DIMENSION));
    total.ok_or_else(|| invalid("site_dims", format!("total dimension exceeds {MAX_DIMENSION}")))
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// One projective measurement acting on one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub label: Label,
    pub site: usize,
    /// One basis vector per outcome, in outcome order.
    pub vectors: Vec<Vec<Complex64>>,
}

/// Pure state plus local projective measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumMeasurementSpec {
    pub site_dims: Vec<usize>,
    pub state: Vec<Complex64>,
    pub measurements: Vec<MeasurementBasis>,
    pub outcomes: Vec<Label>,
    pub cover: Vec<Vec<Label>>,
}

impl QuantumMeasurementSpec {
    fn check(&self) -> Result<(), QuantumError> {
        let total = check_dims(&self.site_dims)?;
        if self.state.len() != total {
            return Err(invalid("state", format!("{} amplitudes, expected {total}", self.state.len())));
        }
        let dev = (norm_sqr(&self.state) - 1.0).abs();
        if dev > DEFAULT_TOLERANCE {
            return Err(QuantumError::Tolerance { what: "state normalisation".into(), deviation: dev });
        }
        for m in &self.measurements {
            let what = format!("measurement {:?}", m.label);
            let dim = *self.site_dims.get(m.site).ok_or_else(|| invalid(&what, "unknown site"))?;
            if m.vectors.len() != self.outcomes.len() || m.vectors.len() != dim {
                return Err(invalid(&what, format!("needs {dim} basis vectors, one per outcome")));
            }
            if m.vectors.iter().any(|v| v.len() != dim) {
                return Err(invalid(&what, format!("basis vectors must have dimension {dim}")));
            }
            let mut dev: f64 = 0.0;
            for (i, a) in m.vectors.iter().enumerate() {
                for (j, b) in m.vectors.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    dev = dev.max((inner(a, b) - want).norm());
                }
            }
            if dev > DEFAULT_TOLERANCE {
                return Err(QuantumError::Tolerance { what: format!("{what} orthonormality"), deviation: dev });
            }
        }
        Ok(())
    }
}

/// Floating Born probabilities, one vector per context over its local sections.
pub fn born_measurement_raw(spec: &QuantumMeasurementSpec) -> Result<Vec<Vec<f64>>, QuantumError> {
    spec.check()?;
    let names: Vec<Label> = spec.measurements.iter().map(|m| m.label.clone()).collect();
    let scenario = MeasurementScenario::new(names, spec.outcomes.clone(), spec.cover.clone())?;
    let psi = ComplexMatrix::ket(&spec.state);
    let bra = psi.adjoint();
    let mut tables = Vec::new();
    for (c, ctx) in scenario.contexts().iter().enumerate() {
        let bases: Vec<&MeasurementBasis> = ctx
            .iter()
            .map(|l| spec.measurements.iter().find(|m| &m.label == l).expect("scenario labels come from the setup"))
            .collect();
        let mut sites: Vec<usize> = bases.iter().map(|b| b.site).collect();
        sites.sort_unstable();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid(format!("context {c}"), "two measurements act on the same site"));
        }
        let idx = scenario.cover().context_sections(c);
        let mut probs = Vec::with_capacity(idx.size());
        for s in idx.iter() {
            let op = spec.site_dims.iter().enumerate().fold(ComplexMatrix::identity(1), |acc, (site, &d)| {
                let factor = match bases.iter().position(|b| b.site == site) {
                    Some(pos) => ComplexMatrix::projector(&bases[pos].vectors[s[pos]]),
                    None => ComplexMatrix::identity(d),
                };
                acc.kron(&factor)
            });
            probs.push(bra.mul(&op).mul(&psi).get(0, 0).re);
        }
        tables.push(probs);
    }
    Ok(tables)
}

/// Born-rule measurement model, rationalised with the default bounds.
pub fn born_measurement(spec: &QuantumMeasurementSpec) -> Result<MeasurementModel, QuantumError> {
    let raw = born_measurement_raw(spec)?;
    let names: Vec<Label> = spec.measurements.iter().map(|m| m.label.clone()).collect();
    let scenario = MeasurementScenario::new(names, spec.outcomes.clone(), spec.cover.clone())?;
    let tables = raw
        .iter()
        .map(|t| t.iter().map(|&p| rationalize(p, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE)).collect())
        .collect::<Result<Vec<Vec<Rational>>, _>>()?;
    let model = MeasurementModel::new(scenario, tables)?;
    model.validate()?;
    Ok(model)
}

/// Instances of one source, all living on one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceStates {
    pub label: Label,
    pub site: usize,
    /// One density matrix per instance, in instance order.
    pub states: Vec<ComplexMatrix>,
}

/// Product preparations measured by one POVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumPrepSpec {
    pub site_dims: Vec<usize>,
    pub instances: Vec<Label>,
    pub sources: Vec<SourceStates>,
    pub outcomes: Vec<Label>,
    pub effects: Vec<ComplexMatrix>,
    pub cover: Vec<Vec<Label>>,
}

impl QuantumPrepSpec {
    pub fn parse(bytes: &[u8]) -> Result<Self, QuantumError> {
        serde_json::from_slice(bytes).map_err(|e| QuantumError::Json(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    /// Largest entrywise deviation of `Σ_k M_k` from the identity.
    pub fn completeness_deviation(&self) -> Result<f64, QuantumError> {
        let total = check_dims(&self.site_dims)?;
        let mut sum = ComplexMatrix::zeros(total, total);
        for (k, m) in self.effects.iter().enumerate() {
            if m.rows() != total || m.cols() != total {
                return Err(invalid(format!("effect {k}"), format!("must be {total}x{total}")));
            }
            sum = sum.add(m);
        }
        Ok(sum.max_deviation(&ComplexMatrix::identity(total)))
    }

    fn check(&self) -> Result<(), QuantumError> {
        check_dims(&self.site_dims)?;
        if self.effects.len() != self.outcomes.len() {
            return Err(invalid("effects", "one effect per outcome required"));
        }
        for (k, m) in self.effects.iter().enumerate() {
            if !m.is_psd(DEFAULT_TOLERANCE) {
                return Err(invalid(format!("effect {k}"), "not positive semidefinite"));
            }
        }
        let dev = self.completeness_deviation()?;
        if dev > DEFAULT_TOLERANCE {
            return Err(QuantumError::Tolerance { what: "POVM completeness".into(), deviation: dev });
        }
        for s in &self.sources {
            let dim =
                *self.site_dims.get(s.site).ok_or_else(|| invalid(format!("source {:?}", s.label), "unknown site"))?;
            if s.states.len() != self.instances.len() {
                return Err(invalid(format!("source {:?}", s.label), "one state per instance required"));
            }
            for (i, rho) in s.states.iter().enumerate() {
                let what = format!("source {:?} instance {i}", s.label);
                if rho.rows() != dim || rho.cols() != dim {
                    return Err(invalid(&what, format!("density matrix must be {dim}x{dim}")));
                }
                if !rho.is_psd(DEFAULT_TOLERANCE) {
                    return Err(invalid(&what, "density matrix not positive semidefinite"));
                }
                let dev = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
                if dev > DEFAULT_TOLERANCE {
                    return Err(QuantumError::Tolerance { what: format!("{what} trace"), deviation: dev });
                }
            }
        }
        Ok(())
    }

    fn scenario(&self) -> Result<PreparationScenario, QuantumError> {
        let names = self.sources.iter().map(|s| s.label.clone()).collect();
        Ok(PreparationScenario::new(names, self.instances.clone(), self.cover.clone(), self.outcomes.clone())?)
    }
}

/// Floating `Tr[M_k ρ^Γ_σ]` tables, one `|O| × |I|^|Γ|` table per context.
pub fn born_preparation_raw(spec: &QuantumPrepSpec) -> Result<Vec<Vec<Vec<f64>>>, QuantumError> {
    spec.check()?;
    let scenario = spec.scenario()?;
    let mut tables = Vec::new();
    for (c, ctx) in scenario.contexts().iter().enumerate() {
        let sources: Vec<&SourceStates> = ctx
            .iter()
            .map(|l| spec.sources.iter().find(|s| &s.label == l).expect("scenario labels come from the setup"))
            .collect();
        let mut order: Vec<usize> = (0..sources.len()).collect();
        order.sort_by_key(|&i| sources[i].site);
        let sites: Vec<usize> = order.iter().map(|&i| sources[i].site).collect();
        if sites != (0..spec.site_dims.len()).collect::<Vec<_>>() {
            return Err(invalid(format!("context {c}"), "a joint preparation needs exactly one source per site"));
        }
        let idx = scenario.cover().context_sections(c);
        let mut table = vec![vec![0.0; idx.size()]; spec.outcomes.len()];
        for (col, s) in idx.iter().enumerate() {
            let rho = order.iter().fold(ComplexMatrix::identity(1), |acc, &i| acc.kron(&sources[i].states[s[i]]));
            for (k, m) in spec.effects.iter().enumerate() {
                table[k][col] = m.mul(&rho).trace().re;
            }
        }
        tables.push(table);
    }
    Ok(tables)
}

/// Born-rule preparation model, rationalised with the default bounds.
pub fn born_preparation(spec: &QuantumPrepSpec) -> Result<PreparationModel, QuantumError> {
    let raw = born_preparation_raw(spec)?;
    let tables = raw
        .iter()
        .map(|t| {
            let rows = t
                .iter()
                .map(|row| row.iter().map(|&p| rationalize(p, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE)).collect())
                .collect::<Result<Vec<Vec<Rational>>, _>>()?;
            Ok(RatMatrix::from_rows(rows).expect("rectangular Born table"))
        })
        .collect::<Result<Vec<_>, QuantumError>>()?;
    let model = PreparationModel::new(spec.scenario()?, tables)?;
    model.validate()?;
    Ok(model)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn add_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let n = norm_sqr(&v).sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Two qubits in `|Φ+⟩`; `a, b` measure Z, `a'` and `b'` are rotated by `∓π/6`.
pub fn bell_spec() -> QuantumMeasurementSpec {
    let (co, si) = ((PI / 6.0).cos(), (PI / 6.0).sin());
    let z = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]];
    let basis = |label: &str, site, vectors| MeasurementBasis { label: label.into(), site, vectors };
    QuantumMeasurementSpec {
        site_dims: vec![2, 2],
        state: vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)],
        measurements: vec![
            basis("a", 0, z.clone()),
            basis("a'", 0, vec![vec![c(co), c(si)], vec![c(-si), c(co)]]),
            basis("b", 1, z),
            basis("b'", 1, vec![vec![c(co), c(-si)], vec![c(si), c(co)]]),
        ],
        outcomes: labels(["0", "1"]),
        cover: vec![labels(["a", "b"]), labels(["a'", "b"]), labels(["a", "b'"]), labels(["a'", "b'"])],
    }
}

/// Alice and Bob each hold a Z source (`a`, `b`) and an X source (`a'`, `b'`);
/// the joint measurement is the four-outcome PBR basis.
pub fn pbr_spec() -> QuantumPrepSpec {
    let zero = vec![c(1.0), c(0.0)];
    let one = vec![c(0.0), c(1.0)];
    let plus = vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)];
    let minus = vec![c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)];
    let z_states = vec![ComplexMatrix::projector(&zero), ComplexMatrix::projector(&one)];
    let x_states = vec![ComplexMatrix::projector(&plus), ComplexMatrix::projector(&minus)];
    let source = |label: &str, site, states| SourceStates { label: label.into(), site, states };
    let xi = [
        add_vec(&kron_vec(&zero, &one), &kron_vec(&one, &zero)),
        add_vec(&kron_vec(&zero, &minus), &kron_vec(&one, &plus)),
        add_vec(&kron_vec(&plus, &one), &kron_vec(&minus, &zero)),
        add_vec(&kron_vec(&plus, &minus), &kron_vec(&minus, &plus)),
    ];
    QuantumPrepSpec {
        site_dims: vec![2, 2],
        instances: labels(["0", "1"]),
        sources: vec![
            source("a", 0, z_states.clone()),
            source("b", 1, z_states),
            source("a'", 0, x_states.clone()),
            source("b'", 1, x_states),
        ],
        outcomes: labels(["1", "2", "3", "4"]),
        effects: xi.into_iter().map(|v| ComplexMatrix::projector(&normalized(v))).collect(),
        cover: vec![labels(["a", "b"]), labels(["a", "b'"]), labels(["a'", "b"]), labels(["a'", "b'"])],
    }
}

pub fn builtin_bell() -> MeasurementModel {
    born_measurement(&bell_spec()).expect("built-in Bell setup is valid")
}

pub fn builtin_pbr() -> PreparationModel {
    born_preparation(&pbr_spec()).expect("built-in PBR setup is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratbool::rational::{int, ratio};

    #[test]
    fn rationalize_examples() {
        assert_eq!(rationalize(0.375, 64, 1e-9).unwrap(), ratio(3, 8));
        assert_eq!(rationalize(0.0, 64, 1e-9).unwrap(), int(0));
        assert_eq!(rationalize(0.2499999999, 64, 1e-9).unwrap(), ratio(1, 4));
        assert_eq!(rationalize(-0.5, 64, 1e-9).unwrap(), ratio(-1, 2));
        assert_eq!(rationalize(1.0 / 3.0, 64, 1e-9).unwrap(), ratio(1, 3));
        assert_eq!(rationalize(1.0, 64, 1e-9).unwrap(), int(1));
        assert_eq!(rationalize(-1e-17, 64, 1e-9).unwrap(), int(0));
    }

    #[test]
    fn rationalize_reports_failure() {
        assert!(matches!(rationalize(std::f64::consts::PI, 64, 1e-9), Err(QuantumError::NoRational { .. })));
        assert!(rationalize(0.5, 64, 0.0).is_err());
        assert!(rationalize(f64::NAN, 64, 1e-9).is_err());
        // Wider bounds recover the value.
        assert_eq!(rationalize(1.0 / 97.0, 64, 1e-9).ok(), None);
        assert_eq!(rationalize(1.0 / 97.0, 100, 1e-9).unwrap(), ratio(1, 97));
    }

    #[test]
    fn product_state_gives_deterministic_columns() {
        let mut spec = bell_spec();
        spec.state = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
        let m = born_measurement(&spec).unwrap();
        assert_eq!(m.table(0), &[int(1), int(0), int(0), int(0)]);
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let mut spec = bell_spec();
        spec.measurements[0].vectors[1] = vec![c(1.0), c(0.0)];
        assert!(matches!(born_measurement(&spec), Err(QuantumError::Tolerance { .. })));
    }

    #[test]
    fn unnormalised_state_rejected() {
        let mut spec = bell_spec();
        spec.state[0] = c(1.0);
        assert!(born_measurement(&spec).is_err());
    }

    #[test]
    fn orthogonal_effect_gives_zero() {
        let spec = pbr_spec();
        let raw = born_preparation_raw(&spec).unwrap();
        assert!(raw[0][0][0].abs() < 1e-12);
    }

    #[test]
    fn trivial_povm_gives_uniform_columns() {
        let mut spec = pbr_spec();
        spec.effects = vec![ComplexMatrix::identity(4).scale(0.25); 4];
        let m = born_preparation(&spec).unwrap();
        for t in m.tables() {
            assert!(t.entries().iter().all(|v| *v == ratio(1, 4)));
        }
    }

    #[test]
    fn incomplete_povm_rejected() {
        let mut spec = pbr_spec();
        spec.effects[3] = ComplexMatrix::zeros(4, 4);
        assert!(matches!(born_preparation(&spec), Err(QuantumError::Tolerance { .. })));
    }

    #[test]
    fn non_psd_state_rejected() {
        let mut spec = pbr_spec();
        spec.sources[0].states[0] =
            ComplexMatrix::from_rows(vec![vec![c(1.5), c(0.0)], vec![c(0.0), c(-0.5)]]).unwrap();
        assert!(matches!(born_preparation(&spec), Err(QuantumError::Invalid { .. })));
    }

    #[test]
    fn oversized_dimension_rejected() {
        let mut spec = pbr_spec();
        spec.site_dims = vec![8, 16];
        assert!(born_preparation(&spec).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = pbr_spec();
        let back = QuantumPrepSpec::parse(spec.to_json_string().as_bytes()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn psd_check() {
        assert!(ComplexMatrix::identity(3).is_psd(1e-9));
        assert!(ComplexMatrix::projector(&[c(0.6), Complex64::new(0.0, 0.8)]).is_psd(1e-9));
        let off = ComplexMatrix::from_rows(vec![vec![c(1.0), c(2.0)], vec![c(2.0), c(1.0)]]).unwrap();
        assert!(!off.is_psd(1e-9));
    }
}
