//! Incidence matrices (restriction of sections) and product-form extension
//! matrices (stochastic lifting of preparation sections), plus the
//! constructive check that a family of extensions is a product family.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratbool::rational::{format_rational, is_distribution, parse_rational};
use crate::ratbool::{BoolMatrix, RatMatrix, Rational};
use crate::scenario::{
    difference, ensure_subset, projection, section_index, Label, PreparationScenario, ScenarioError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IncextError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("no single-site distribution for source {0:?}")]
    UnknownSource(Label),
    #[error("mu for source {label:?}: {message}")]
    BadDistribution { label: Label, message: String },
    #[error("extension {u:?}|{v:?}: {message}")]
    Dimension { u: Vec<Label>, v: Vec<Label>, message: String },
    #[error("source {0:?} is extended by the family but no single-source step isolates it")]
    MissingChain(Label),
    #[error("invalid extension family file: {0}")]
    Json(String),
}

/// `M_{sub|sup}(s_sub | s_sup) = 1[(s_sup)|sub = s_sub]`.
pub fn incidence(sub: &[Label], sup: &[Label], alphabet: &[Label]) -> Result<RatMatrix, IncextError> {
    incidence_n(sub, sup, alphabet.len())
}

pub(crate) fn incidence_n(sub: &[Label], sup: &[Label], alphabet: usize) -> Result<RatMatrix, IncextError> {
    ensure_subset(sub, sup)?;
    let rows = section_index(sub, alphabet)?;
    let cols = section_index(sup, alphabet)?;
    let proj = projection(sup, sub)?;
    let mut m = RatMatrix::zeros(rows.size(), cols.size());
    for c in 0..cols.size() {
        let s = cols.section(c);
        let r: Vec<usize> = proj.iter().map(|&p| s[p]).collect();
        m.set(rows.index(&r)?, c, Rational::one());
    }
    Ok(m)
}

/// Single-site distributions `μ_p` over the shared instance set, one per source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionFamily {
    mu: BTreeMap<Label, Vec<Rational>>,
    instances: usize,
}

impl ExtensionFamily {
    pub fn new(mu: BTreeMap<Label, Vec<Rational>>) -> Result<Self, IncextError> {
        let instances = mu.values().next().map_or(0, Vec::len);
        for (source, dist) in &mu {
            if dist.len() != instances {
                return Err(IncextError::BadDistribution {
                    label: source.clone(),
                    message: format!("{} entries, other sources have {instances}", dist.len()),
                });
            }
            if !is_distribution(dist) {
                return Err(IncextError::BadDistribution {
                    label: source.clone(),
                    message: "not a probability distribution".into(),
                });
            }
        }
        Ok(Self { mu, instances })
    }

    pub fn uniform(sources: &[Label], instances: usize) -> Self {
        let w = Rational::new(1.into(), instances.into());
        Self { mu: sources.iter().map(|s| (s.clone(), vec![w.clone(); instances])).collect(), instances }
    }

    pub fn mu(&self, source: &str) -> Option<&[Rational]> {
        self.mu.get(source).map(Vec::as_slice)
    }

    pub fn instances(&self) -> usize {
        self.instances
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Vec<Rational>)> {
        self.mu.iter()
    }

    /// Same family with `μ_source` replaced.
    pub fn with(&self, source: &str, dist: Vec<Rational>) -> Result<Self, IncextError> {
        let mut mu = self.mu.clone();
        mu.insert(source.to_string(), dist);
        Self::new(mu)
    }

    /// Supports of every `μ_p`.
    pub fn supports(&self) -> BTreeMap<Label, Vec<bool>> {
        self.mu.iter().map(|(k, v)| (k.clone(), v.iter().map(|x| !x.is_zero()).collect())).collect()
    }

    /// Checks that the family covers `scenario` with matching instance count.
    pub fn check_against(&self, scenario: &PreparationScenario) -> Result<(), IncextError> {
        for s in scenario.sources() {
            let dist = self.mu(s).ok_or_else(|| IncextError::UnknownSource(s.clone()))?;
            if dist.len() != scenario.instances().len() {
                return Err(IncextError::BadDistribution {
                    label: s.clone(),
                    message: format!(
                        "{} entries but the scenario has {} instances",
                        dist.len(),
                        scenario.instances().len()
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = FamilyFile {
            mu: self.mu.iter().map(|(k, v)| (k.clone(), v.iter().map(format_rational).collect())).collect(),
        };
        serde_json::to_value(file).expect("family serialises")
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, IncextError> {
        let file: FamilyFile = serde_json::from_slice(bytes).map_err(|e| IncextError::Json(e.to_string()))?;
        let mut mu = BTreeMap::new();
        for (source, entries) in file.mu {
            let dist = entries
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| IncextError::BadDistribution { label: source.clone(), message: e.to_string() })?;
            mu.insert(source, dist);
        }
        Self::new(mu)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    mu: BTreeMap<Label, Vec<String>>,
}

/// `S_{U|V}(σ_U | σ_V) = 1[(σ_U)|V = σ_V] ∏_{p ∈ U∖V} μ_p(σ_p)`.
pub fn extension(u: &[Label], v: &[Label], fam: &ExtensionFamily) -> Result<RatMatrix, IncextError> {
    ensure_subset(v, u)?;
    let n = fam.instances();
    let rows = section_index(u, n)?;
    let cols = section_index(v, n)?;
    let proj = projection(u, v)?;
    let free: Vec<(usize, &[Rational])> = difference(u, v)
        .iter()
        .map(|p| {
            let pos = u.iter().position(|l| l == p).expect("difference of u");
            fam.mu(p).map(|d| (pos, d)).ok_or_else(|| IncextError::UnknownSource(p.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut m = RatMatrix::zeros(rows.size(), cols.size());
    for r in 0..rows.size() {
        let s = rows.section(r);
        let sv: Vec<usize> = proj.iter().map(|&p| s[p]).collect();
        let weight = free.iter().fold(Rational::one(), |acc, (pos, d)| acc * &d[s[*pos]]);
        if !weight.is_zero() {
            m.set(r, cols.index(&sv)?, weight);
        }
    }
    Ok(m)
}

/// Boolean `S̄_{U|V}` built from supports alone: indicator AND every free site supported.
pub fn support_extension(
    u: &[Label],
    v: &[Label],
    supports: &BTreeMap<Label, Vec<bool>>,
    instances: usize,
) -> Result<BoolMatrix, IncextError> {
    ensure_subset(v, u)?;
    let rows = section_index(u, instances)?;
    let cols = section_index(v, instances)?;
    let proj = projection(u, v)?;
    let free: Vec<(usize, &[bool])> = difference(u, v)
        .iter()
        .map(|p| {
            let pos = u.iter().position(|l| l == p).expect("difference of u");
            supports.get(p).map(|d| (pos, d.as_slice())).ok_or_else(|| IncextError::UnknownSource(p.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut m = BoolMatrix::zeros(rows.size(), cols.size());
    for r in 0..rows.size() {
        let s = rows.section(r);
        if free.iter().all(|(pos, d)| d[s[*pos]]) {
            let sv: Vec<usize> = proj.iter().map(|&p| s[p]).collect();
            m.set(r, cols.index(&sv)?, true);
        }
    }
    Ok(m)
}

/// Stacked `S_Y`: rows are global preparation sections, one column block per source context.
pub fn stacked_extension(scenario: &PreparationScenario, fam: &ExtensionFamily) -> Result<RatMatrix, IncextError> {
    fam.check_against(scenario)?;
    let blocks =
        scenario.contexts().iter().map(|g| extension(scenario.sources(), g, fam)).collect::<Result<Vec<_>, _>>()?;
    Ok(RatMatrix::hstack(&blocks).expect("blocks share the global row count"))
}

/// Boolean stacked `S̄_Y` for a support pattern.
pub fn stacked_support_extension(
    scenario: &PreparationScenario,
    supports: &BTreeMap<Label, Vec<bool>>,
) -> Result<BoolMatrix, IncextError> {
    let n = scenario.instances().len();
    let blocks = scenario
        .contexts()
        .iter()
        .map(|g| support_extension(scenario.sources(), g, supports, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoolMatrix::hstack(&blocks).expect("blocks share the global row count"))
}

/// An extension matrix `S_{U|V}` of unknown structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawExtension {
    u: Vec<Label>,
    v: Vec<Label>,
    instances: usize,
    matrix: RatMatrix,
}

impl RawExtension {
    pub fn new(u: Vec<Label>, v: Vec<Label>, instances: usize, matrix: RatMatrix) -> Result<Self, IncextError> {
        ensure_subset(&v, &u)?;
        let rows = section_index(&u, instances)?.size();
        let cols = section_index(&v, instances)?.size();
        if matrix.rows() != rows || matrix.cols() != cols {
            return Err(IncextError::Dimension {
                u,
                v,
                message: format!("matrix is {}x{}, expected {rows}x{cols}", matrix.rows(), matrix.cols()),
            });
        }
        Ok(Self { u, v, instances, matrix })
    }

    pub fn u(&self) -> &[Label] {
        &self.u
    }

    pub fn v(&self) -> &[Label] {
        &self.v
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.matrix
    }

    /// Same map with both label lists re-sorted into `order`.
    fn reordered(&self, order: &[Label]) -> Result<RawExtension, IncextError> {
        let sort = |set: &[Label]| -> Vec<Label> { order.iter().filter(|l| set.contains(l)).cloned().collect() };
        let (u2, v2) = (sort(&self.u), sort(&self.v));
        if u2.len() != self.u.len() {
            return Err(IncextError::UnknownSource(difference(&self.u, order).remove(0)));
        }
        let n = self.instances;
        let (ri_old, ci_old) = (section_index(&self.u, n)?, section_index(&self.v, n)?);
        let (ri_new, ci_new) = (section_index(&u2, n)?, section_index(&v2, n)?);
        let (pu, pv) = (projection(&u2, &self.u)?, projection(&v2, &self.v)?);
        let mut m = RatMatrix::zeros(self.matrix.rows(), self.matrix.cols());
        for r in 0..ri_new.size() {
            let s = ri_new.section(r);
            let old_r = ri_old.index(&pu.iter().map(|&p| s[p]).collect::<Vec<_>>())?;
            for c in 0..ci_new.size() {
                let t = ci_new.section(c);
                let old_c = ci_old.index(&pv.iter().map(|&p| t[p]).collect::<Vec<_>>())?;
                m.set(r, c, self.matrix.get(old_r, old_c).clone());
            }
        }
        RawExtension::new(u2, v2, n, m)
    }
}

/// If `raw` has the form `1[(σ_U)|V = σ_V] μ((σ_U)|U∖V)`, returns that `μ`
/// as a joint table over sections of `U∖V` (in the order of `U`).
pub fn check_input_independence(raw: &RawExtension) -> Option<Vec<Rational>> {
    let n = raw.instances;
    let rest = difference(&raw.u, &raw.v);
    let rows = section_index(&raw.u, n).ok()?;
    let cols = section_index(&raw.v, n).ok()?;
    let rest_idx = section_index(&rest, n).ok()?;
    let pv = projection(&raw.u, &raw.v).ok()?;
    let pr = projection(&raw.u, &rest).ok()?;

    let mut mu: Vec<Option<Rational>> = vec![None; rest_idx.size()];
    for r in 0..rows.size() {
        let s = rows.section(r);
        let home = cols.index(&pv.iter().map(|&p| s[p]).collect::<Vec<_>>()).ok()?;
        let slot = rest_idx.index(&pr.iter().map(|&p| s[p]).collect::<Vec<_>>()).ok()?;
        for c in 0..cols.size() {
            let value = raw.matrix.get(r, c);
            if c != home {
                if !value.is_zero() {
                    return None;
                }
                continue;
            }
            match &mu[slot] {
                None => mu[slot] = Some(value.clone()),
                Some(seen) if seen != value => return None,
                Some(_) => {}
            }
        }
    }
    let mu: Vec<Rational> = mu.into_iter().collect::<Option<_>>()?;
    is_distribution(&mu).then_some(mu)
}

/// The first identity a candidate family breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "identity", rename_all = "snake_case")]
pub enum Violation {
    /// `S_{U|V}` is not of indicator-times-distribution form.
    InputIndependence { u: Vec<Label>, v: Vec<Label> },
    /// `S_{U|W} ≠ S_{U|V} S_{V|W}`.
    Compositionality { u: Vec<Label>, v: Vec<Label>, w: Vec<Label> },
    /// `S_{U|V}` differs from the product of the extracted single-site distributions.
    ProductForm { u: Vec<Label>, v: Vec<Label> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factorization {
    Product(ExtensionFamily),
    Rejected(Violation),
}

/// Recovers `{μ_p}` from a family of extension matrices, or names the first
/// violated identity. Sources never extended by any member get uniform `μ_p`.
pub fn factor_family(
    members: &[RawExtension],
    sources: &[Label],
    instances: usize,
) -> Result<Factorization, IncextError> {
    let members: Vec<RawExtension> = members.iter().map(|m| m.reordered(sources)).collect::<Result<_, _>>()?;

    let mut joints = Vec::with_capacity(members.len());
    for m in &members {
        if m.instances != instances {
            return Err(IncextError::Dimension {
                u: m.u.clone(),
                v: m.v.clone(),
                message: format!("built over {} instances, expected {instances}", m.instances),
            });
        }
        match check_input_independence(m) {
            Some(mu) => joints.push(mu),
            None => {
                return Ok(Factorization::Rejected(Violation::InputIndependence { u: m.u.clone(), v: m.v.clone() }))
            }
        }
    }

    let by_pair: HashMap<(&[Label], &[Label]), &RawExtension> =
        members.iter().map(|m| ((m.u.as_slice(), m.v.as_slice()), m)).collect();
    for outer in &members {
        for inner in members.iter().filter(|i| i.u == outer.v) {
            let Some(direct) = by_pair.get(&(outer.u.as_slice(), inner.v.as_slice())) else {
                continue;
            };
            let staged = outer.matrix.mul(&inner.matrix).expect("chained shapes agree");
            if staged != direct.matrix {
                return Ok(Factorization::Rejected(Violation::Compositionality {
                    u: outer.u.clone(),
                    v: outer.v.clone(),
                    w: inner.v.clone(),
                }));
            }
        }
    }

    let mut mu = BTreeMap::new();
    for p in sources {
        let step = members.iter().zip(&joints).find(|(m, _)| {
            let rest = difference(&m.u, &m.v);
            rest.len() == 1 && &rest[0] == p
        });
        let dist = match step {
            Some((_, joint)) => joint.clone(),
            None if members.iter().any(|m| difference(&m.u, &m.v).contains(p)) => {
                return Err(IncextError::MissingChain(p.clone()))
            }
            None => vec![Rational::new(1.into(), instances.into()); instances],
        };
        mu.insert(p.clone(), dist);
    }
    let fam = ExtensionFamily::new(mu)?;

    for m in &members {
        if extension(&m.u, &m.v, &fam)? != m.matrix {
            return Ok(Factorization::Rejected(Violation::ProductForm { u: m.u.clone(), v: m.v.clone() }));
        }
    }
    Ok(Factorization::Product(fam))
}

/// Every `(U, V)` with `V ⊆ U ⊆ sources`, built from `fam`.
pub fn full_family(sources: &[Label], fam: &ExtensionFamily) -> Result<Vec<RawExtension>, IncextError> {
    let subsets = subsets_of(sources);
    let mut out = Vec::new();
    for u in &subsets {
        for v in subsets.iter().filter(|v| v.iter().all(|l| u.contains(l))) {
            out.push(RawExtension::new(u.clone(), v.clone(), fam.instances(), extension(u, v, fam)?)?);
        }
    }
    Ok(out)
}

/// All subsets of `labels`, each in the order of `labels`.
pub fn subsets_of(labels: &[Label]) -> Vec<Vec<Label>> {
    (0..1usize << labels.len())
        .map(|mask| labels.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| l.clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratbool::rational::{int, ratio};
    use crate::scenario::labels;

    fn fam2(entries: &[(&str, [Rational; 2])]) -> ExtensionFamily {
        ExtensionFamily::new(entries.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect()).unwrap()
    }

    #[test]
    fn incidence_identity_and_marginal() {
        let bin = labels(["0", "1"]);
        let ab = labels(["a", "b"]);
        assert_eq!(incidence(&ab, &ab, &bin).unwrap(), RatMatrix::identity(4));
        let m = incidence(&labels(["a"]), &ab, &bin).unwrap();
        let want: Vec<Vec<Rational>> =
            [[1, 1, 0, 0], [0, 0, 1, 1]].iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        assert_eq!(m, RatMatrix::from_rows(want).unwrap());
        assert!(incidence(&labels(["c"]), &ab, &bin).is_err());
    }

    #[test]
    fn extension_examples() {
        let half = [ratio(1, 2), ratio(1, 2)];
        let fam = fam2(&[("a", half.clone()), ("b", half)]);
        let ab = labels(["a", "b"]);
        assert_eq!(extension(&ab, &ab, &fam).unwrap(), RatMatrix::identity(4));
        let m = extension(&ab, &labels(["a"]), &fam).unwrap();
        // rows (0,0),(0,1),(1,0),(1,1); columns a=0, a=1
        for (r, c) in [(0, 0), (1, 0), (2, 1), (3, 1)] {
            assert_eq!(m.get(r, c), &ratio(1, 2));
            assert_eq!(m.get(r, 1 - c), &int(0));
        }
        assert!(extension(&labels(["a"]), &ab, &fam).is_err());
    }

    #[test]
    fn input_independence_recovers_joint() {
        let fam =
            fam2(&[("a", [ratio(1, 3), ratio(2, 3)]), ("b", [ratio(1, 4), ratio(3, 4)]), ("c", [int(1), int(0)])]);
        let u = labels(["a", "b", "c"]);
        let v = labels(["b"]);
        let raw = RawExtension::new(u.clone(), v.clone(), 2, extension(&u, &v, &fam).unwrap()).unwrap();
        // joint over (a, c): a-major
        assert_eq!(check_input_independence(&raw).unwrap(), vec![ratio(1, 3), int(0), ratio(2, 3), int(0)]);
    }

    #[test]
    fn off_indicator_mass_rejected() {
        let u = labels(["a", "b"]);
        let v = labels(["a"]);
        let mut m = extension(&u, &v, &ExtensionFamily::uniform(&u, 2)).unwrap();
        m.set(2, 0, ratio(1, 4));
        m.set(0, 0, ratio(1, 4));
        let raw = RawExtension::new(u, v, 2, m).unwrap();
        assert_eq!(check_input_independence(&raw), None);
    }

    #[test]
    fn column_dependent_completion_rejected() {
        // Column a=0 completes b with (1/2,1/2), column a=1 with (1,0).
        let m = RatMatrix::from_rows(vec![
            vec![ratio(1, 2), int(0)],
            vec![ratio(1, 2), int(0)],
            vec![int(0), int(1)],
            vec![int(0), int(0)],
        ])
        .unwrap();
        let raw = RawExtension::new(labels(["a", "b"]), labels(["a"]), 2, m).unwrap();
        assert_eq!(check_input_independence(&raw), None);
    }

    #[test]
    fn family_round_trip() {
        let y = labels(["a", "b", "c"]);
        let fam =
            fam2(&[("a", [ratio(1, 3), ratio(2, 3)]), ("b", [ratio(1, 4), ratio(3, 4)]), ("c", [int(1), int(0)])]);
        let members = full_family(&y, &fam).unwrap();
        assert_eq!(factor_family(&members, &y, 2).unwrap(), Factorization::Product(fam));
    }

    #[test]
    fn shuffled_label_order_is_normalised() {
        let y = labels(["a", "b"]);
        let fam = fam2(&[("a", [ratio(1, 3), ratio(2, 3)]), ("b", [ratio(1, 4), ratio(3, 4)])]);
        let u = labels(["b", "a"]);
        let v = labels(["b"]);
        let single = RawExtension::new(u.clone(), v.clone(), 2, extension(&u, &v, &fam).unwrap()).unwrap();
        let Factorization::Product(got) = factor_family(&[single], &y, 2).unwrap() else { panic!() };
        assert_eq!(got.mu("a").unwrap(), fam.mu("a").unwrap());
    }

    #[test]
    fn correlated_completion_breaks_composition() {
        let y = labels(["a", "b", "c"]);
        let fam = ExtensionFamily::uniform(&y, 2);
        let mut members = full_family(&y, &fam).unwrap();
        // Replace S_{abc|a} by a perfectly correlated completion of (b, c).
        let idx = members.iter().position(|m| m.u() == y.as_slice() && m.v() == ["a"]).unwrap();
        let mut m = RatMatrix::zeros(8, 2);
        for (r, c) in [(0, 0), (3, 0), (4, 1), (7, 1)] {
            m.set(r, c, ratio(1, 2));
        }
        members[idx] = RawExtension::new(y.clone(), labels(["a"]), 2, m).unwrap();
        match factor_family(&members, &y, 2).unwrap() {
            Factorization::Rejected(Violation::Compositionality { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identities_only_default_to_uniform() {
        let y = labels(["a", "b"]);
        let id = RawExtension::new(y.clone(), y.clone(), 2, RatMatrix::identity(4)).unwrap();
        assert_eq!(factor_family(&[id], &y, 2).unwrap(), Factorization::Product(ExtensionFamily::uniform(&y, 2)));
    }

    #[test]
    fn missing_singleton_step_is_an_error() {
        let y = labels(["a", "b", "c"]);
        let fam = ExtensionFamily::uniform(&y, 2);
        let m = RawExtension::new(y.clone(), labels(["a"]), 2, extension(&y, &labels(["a"]), &fam).unwrap()).unwrap();
        assert!(matches!(factor_family(&[m], &y, 2), Err(IncextError::MissingChain(_))));
    }

    #[test]
    fn family_json_round_trip() {
        let fam = fam2(&[("a", [ratio(1, 3), ratio(2, 3)]), ("b'", [int(1), int(0)])]);
        let text = serde_json::to_vec(&fam.to_json()).unwrap();
        assert_eq!(ExtensionFamily::parse(&text).unwrap(), fam);
        assert!(ExtensionFamily::parse(br#"{"mu":{"a":["1/2","1/3"]}}"#).is_err());
    }
}
