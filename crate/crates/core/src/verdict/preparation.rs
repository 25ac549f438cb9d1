use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::{supports_json, Certificate, Mode, Stats, Status, Verdict, VerdictError, Witness};
use crate::compat::prep_compatible;
use crate::incext::{stacked_extension, stacked_support_extension, ExtensionFamily, IncextError};
use crate::models::{PossibilisticPreparation, PreparationModel};
use crate::ratbool::{
    solve_boolean_factor, solve_linear_feasibility, BoolMatrix, BooleanObstruction, Feasibility, RatMatrix, Rational,
};
use crate::scenario::{Label, PreparationScenario};

/// `3^8`: every pattern of eight binary sources.
pub const DEFAULT_MAX_SWEEP: usize = 6561;

const UNRESOLVED: &str = "bilinear μ–D search unresolved";

/// Nonempty support of each single-site distribution `μ_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPattern {
    supports: BTreeMap<Label, Vec<bool>>,
}

impl SupportPattern {
    pub fn new(supports: BTreeMap<Label, Vec<bool>>) -> Result<Self, IncextError> {
        let n = supports.values().next().map_or(0, Vec::len);
        for (label, s) in &supports {
            if s.len() != n {
                return Err(IncextError::BadDistribution { label: label.clone(), message: "length mismatch".into() });
            }
            if !s.contains(&true) {
                return Err(IncextError::BadDistribution { label: label.clone(), message: "empty support".into() });
            }
        }
        Ok(Self { supports })
    }

    pub fn full(sources: &[Label], instances: usize) -> Self {
        Self { supports: sources.iter().map(|p| (p.clone(), vec![true; instances])).collect() }
    }

    /// Every source supported on the single instance it takes in `assignment`.
    pub fn singleton(sources: &[Label], assignment: &[usize], instances: usize) -> Self {
        let supports = sources
            .iter()
            .zip(assignment)
            .map(|(p, &i)| {
                let mut s = vec![false; instances];
                s[i] = true;
                (p.clone(), s)
            })
            .collect();
        Self { supports }
    }

    pub fn of_family(fam: &ExtensionFamily) -> Self {
        Self { supports: fam.supports() }
    }

    pub fn supports(&self) -> &BTreeMap<Label, Vec<bool>> {
        &self.supports
    }

    /// Whether a global instance (indexed in `sources` order) is supported.
    pub fn contains(&self, sources: &[Label], global: &[usize]) -> bool {
        sources.iter().zip(global).all(|(p, &i)| self.supports.get(p).is_some_and(|s| s[i]))
    }

    /// `(2^|I| − 1)^|Y|`, or `None` on overflow.
    pub fn count(sources: usize, instances: usize) -> Option<u128> {
        let per = 1u128.checked_shl(u32::try_from(instances).ok()?)?.checked_sub(1)?;
        per.checked_pow(u32::try_from(sources).ok()?)
    }

    /// All patterns, first source most significant, supports ordered by bitmask.
    pub fn enumerate(sources: &[Label], instances: usize) -> impl Iterator<Item = SupportPattern> + '_ {
        let per = (1usize << instances) - 1;
        let total = Self::count(sources.len(), instances).and_then(|c| usize::try_from(c).ok()).unwrap_or(usize::MAX);
        (0..total).map(move |mut idx| {
            let mut masks = vec![0usize; sources.len()];
            for m in masks.iter_mut().rev() {
                *m = idx % per + 1;
                idx /= per;
            }
            let supports = sources
                .iter()
                .zip(masks)
                .map(|(p, m)| (p.clone(), (0..instances).map(|i| m >> i & 1 == 1).collect()))
                .collect();
            SupportPattern { supports }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternObstruction {
    pub pattern: SupportPattern,
    pub obstruction: BooleanObstruction,
}

impl PatternObstruction {
    pub fn to_json(&self) -> Value {
        json!({ "mu": supports_json(self.pattern.supports()), "obstruction": self.obstruction })
    }
}

/// Outcomes with zero probability, per stacked empirical column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenMap {
    forbidden: Vec<Vec<usize>>,
}

impl ForbiddenMap {
    pub fn from_support(ebar: &BoolMatrix) -> Self {
        let forbidden = (0..ebar.cols()).map(|j| (0..ebar.rows()).filter(|&o| !ebar.get(o, j)).collect()).collect();
        Self { forbidden }
    }

    pub fn columns(&self) -> usize {
        self.forbidden.len()
    }

    pub fn forbidden(&self, column: usize) -> &[usize] {
        &self.forbidden[column]
    }

    /// Every column has exactly one zero, so `φ` is a function.
    pub fn unique_zero(&self) -> bool {
        self.forbidden.iter().all(|f| f.len() == 1)
    }

    pub fn phi(&self, column: usize) -> Option<usize> {
        match self.forbidden[column].as_slice() {
            [o] => Some(*o),
            _ => None,
        }
    }

    /// Union of forbidden outcomes over a set of columns, sorted.
    pub fn phi_of(&self, columns: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = columns.iter().flat_map(|&j| self.forbidden[j].iter().copied()).collect();
        set.into_iter().collect()
    }
}

pub fn forbidden_map(pmodel: &PossibilisticPreparation) -> ForbiddenMap {
    ForbiddenMap::from_support(&pmodel.stack())
}

/// Forced-zero analysis of one supported global instance `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentReport {
    pub k: usize,
    pub assignment: Vec<usize>,
    /// `J(k)`: stacked empirical columns that `k` feeds.
    pub referenced: Vec<usize>,
    /// `φ(J(k))`.
    pub forbidden: Vec<usize>,
    /// Outcomes left for column `k` of `D̄`.
    pub allowed: Vec<usize>,
    /// Sum of the assignment mod 2, for binary instances.
    pub parity: Option<usize>,
}

pub fn parity_profile(
    pmodel: &PossibilisticPreparation,
    pattern: &SupportPattern,
) -> Result<Vec<AssignmentReport>, VerdictError> {
    let scenario = &pmodel.scenario;
    let sbar = stacked_support_extension(scenario, pattern.supports())?;
    let fmap = forbidden_map(pmodel);
    let outcomes = scenario.outcomes().len();
    let binary = scenario.instances().len() == 2;
    let global = scenario.cover().global_sections()?;
    let mut out = Vec::new();
    for (k, assignment) in global.iter().enumerate() {
        if !pattern.contains(scenario.sources(), &assignment) {
            continue;
        }
        let referenced: Vec<usize> = (0..sbar.cols()).filter(|&j| sbar.get(k, j)).collect();
        let forbidden = fmap.phi_of(&referenced);
        let allowed = (0..outcomes).filter(|o| !forbidden.contains(o)).collect();
        let parity = binary.then(|| assignment.iter().sum::<usize>() % 2);
        out.push(AssignmentReport { k, assignment, referenced, forbidden, allowed, parity });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrepMode {
    /// Possibilistic sweep, then explicit families if the sweep is inconclusive.
    Auto,
    Probabilistic,
    Possibilistic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepOptions {
    pub mode: PrepMode,
    /// Extension families to try in the probabilistic pass; auto mode
    /// prepends the uniform family.
    pub families: Vec<ExtensionFamily>,
    pub max_sweep: usize,
}

impl Default for PrepOptions {
    fn default() -> Self {
        Self { mode: PrepMode::Auto, families: Vec::new(), max_sweep: DEFAULT_MAX_SWEEP }
    }
}

enum Sweep {
    Feasible(SupportPattern, BoolMatrix),
    Infeasible(Vec<PatternObstruction>),
}

fn sweep(model: &PreparationModel, max_sweep: usize) -> Result<(Sweep, usize), VerdictError> {
    let scenario = model.scenario();
    let (sources, n) = (scenario.sources(), scenario.instances().len());
    match SupportPattern::count(sources.len(), n) {
        Some(c) if c <= max_sweep as u128 => {}
        c => {
            return Err(VerdictError::SweepTooLarge {
                patterns: c.map_or_else(|| "more than 2^128".into(), |c| c.to_string()),
                limit: max_sweep,
            })
        }
    }
    let ebar = model.possibilistic_reduce().stack();
    let mut obstructions = Vec::new();
    for pattern in SupportPattern::enumerate(sources, n) {
        let sbar = stacked_support_extension(scenario, pattern.supports())?;
        match solve_boolean_factor(&ebar, &sbar)? {
            Feasibility::Feasible(d) => {
                let checked = obstructions.len() + 1;
                return Ok((Sweep::Feasible(pattern, d), checked));
            }
            Feasibility::Infeasible(obstruction) => obstructions.push(PatternObstruction { pattern, obstruction }),
        }
    }
    let checked = obstructions.len();
    Ok((Sweep::Infeasible(obstructions), checked))
}

/// `E_m = D S_Y` with `D` column-stochastic, as `A x = b, x ≥ 0` over
/// `x[o·K + k] = D(o, k)`.
fn response_system(e: &RatMatrix, s: &RatMatrix) -> (RatMatrix, Vec<Rational>) {
    let (outcomes, cols, k_count) = (e.rows(), e.cols(), s.rows());
    let rows = outcomes * cols + k_count;
    let mut a = RatMatrix::zeros(rows, outcomes * k_count);
    let mut b = vec![Rational::zero(); rows];
    for o in 0..outcomes {
        for j in 0..cols {
            let r = o * cols + j;
            for k in 0..k_count {
                let v = s.get(k, j);
                if !v.is_zero() {
                    a.set(r, o * k_count + k, v.clone());
                }
            }
            b[r] = e.get(o, j).clone();
        }
    }
    for k in 0..k_count {
        let r = outcomes * cols + k;
        for o in 0..outcomes {
            a.set(r, o * k_count + k, Rational::one());
        }
        b[r] = Rational::one();
    }
    (a, b)
}

struct ProbPass {
    witness: Option<Witness>,
    attempts: Vec<String>,
    pivots: usize,
}

fn probabilistic_pass(model: &PreparationModel, families: &[ExtensionFamily]) -> Result<ProbPass, VerdictError> {
    let scenario: &PreparationScenario = model.scenario();
    let e = model.stack();
    let mut pass = ProbPass { witness: None, attempts: Vec::new(), pivots: 0 };
    for (i, fam) in families.iter().enumerate() {
        fam.check_against(scenario)?;
        let compat = prep_compatible(model, fam)?;
        if let Some(v) = compat.first_violation() {
            pass.attempts.push(format!("family {i}: incompatible on {:?} / {:?}", v.pair.0, v.pair.1));
            continue;
        }
        let s = stacked_extension(scenario, fam)?;
        let (a, b) = response_system(&e, &s);
        let report = solve_linear_feasibility(&a, &b, true)?;
        pass.pivots += report.pivots;
        match report.result {
            Feasibility::Feasible(x) => {
                let d = RatMatrix::from_vec(e.rows(), s.rows(), x)?;
                debug_assert_eq!(d.mul(&s).ok().as_ref(), Some(&e));
                pass.witness = Some(Witness::Response { mu: fam.clone(), d });
                return Ok(pass);
            }
            Feasibility::Infeasible(_) => pass.attempts.push(format!("family {i}: no column-stochastic D")),
        }
    }
    Ok(pass)
}

pub fn check_preparation(model: &PreparationModel, options: &PrepOptions) -> Result<Verdict, VerdictError> {
    model.validate()?;
    let scenario = model.scenario();
    match options.mode {
        PrepMode::Possibilistic => {
            let (result, checked) = sweep(model, options.max_sweep)?;
            Ok(sweep_verdict(result, checked, None))
        }
        PrepMode::Probabilistic => {
            if options.families.is_empty() {
                return Err(VerdictError::NoFamilies);
            }
            let pass = probabilistic_pass(model, &options.families)?;
            let reason = format!("no supplied extension family admits a response matrix: {}", pass.attempts.join("; "));
            Ok(prob_verdict(pass, Stats::default(), reason))
        }
        PrepMode::Auto => {
            let (result, checked) = sweep(model, options.max_sweep)?;
            if let Sweep::Infeasible(_) = result {
                let why = "possibilistic contextuality implies probabilistic contextuality";
                return Ok(sweep_verdict(result, checked, Some(why.into())));
            }
            let uniform = ExtensionFamily::uniform(scenario.sources(), scenario.instances().len());
            let mut families = vec![uniform];
            for f in &options.families {
                if !families.contains(f) {
                    families.push(f.clone());
                }
            }
            let pass = probabilistic_pass(model, &families)?;
            let stats = Stats { patterns_checked: checked, lp_pivots: 0 };
            Ok(prob_verdict(pass, stats, UNRESOLVED.into()))
        }
    }
}

fn sweep_verdict(result: Sweep, checked: usize, reason: Option<String>) -> Verdict {
    let stats = Stats { patterns_checked: checked, lp_pivots: 0 };
    match result {
        Sweep::Feasible(pattern, d) => Verdict {
            status: Status::Noncontextual,
            mode: Mode::Possibilistic,
            witness: Some(Witness::SupportResponse { pattern, d }),
            certificate: None,
            reason,
            stats,
        },
        Sweep::Infeasible(list) => Verdict {
            status: Status::Contextual,
            mode: Mode::Possibilistic,
            witness: None,
            certificate: Some(Certificate::Patterns(list)),
            reason,
            stats,
        },
    }
}

fn prob_verdict(pass: ProbPass, mut stats: Stats, reason: String) -> Verdict {
    stats.lp_pivots += pass.pivots;
    match pass.witness {
        Some(w) => Verdict {
            status: Status::Noncontextual,
            mode: Mode::Probabilistic,
            witness: Some(w),
            certificate: None,
            reason: None,
            stats,
        },
        None => Verdict {
            status: Status::Inconclusive,
            mode: Mode::Probabilistic,
            witness: None,
            certificate: None,
            reason: Some(reason),
            stats,
        },
    }
}
