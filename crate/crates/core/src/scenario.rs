//! Scenarios (measurement and preparation) and canonical section indexing.
//!
//! A section over an ordered label list is a tuple of alphabet indices, one
//! per label. Sections are ranked lexicographically with the leftmost label
//! most significant, so over `(a, b)` with alphabet `{0, 1}` the order is
//! `(0,0), (0,1), (1,0), (1,1)`.

use std::collections::HashSet;

use thiserror::Error;

pub type Label = String;

/// A section: one alphabet index per label of its base set.
pub type Section = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("duplicate label {0:?}")]
    DuplicateLabel(Label),
    #[error("label {0:?} is not part of the scenario")]
    UnknownLabel(Label),
    #[error("labels {missing:?} are not a subset of {of:?}")]
    NotSubset { missing: Vec<Label>, of: Vec<Label> },
    #[error("context {0} is empty")]
    EmptyContext(usize),
    #[error("cover leaves {0:?} uncovered")]
    Uncovered(Vec<Label>),
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("{alphabet}^{labels} sections do not fit in memory")]
    TooLarge { alphabet: usize, labels: usize },
    #[error("section {section:?} does not match {labels} labels over an alphabet of {alphabet}")]
    BadSection { section: Section, labels: usize, alphabet: usize },
}

fn check_unique(labels: &[Label]) -> Result<(), ScenarioError> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(ScenarioError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn position(labels: &[Label], label: &str) -> Option<usize> {
    labels.iter().position(|l| l == label)
}

/// Labels of `sub` that do not occur in `sup`.
pub fn missing_from(sub: &[Label], sup: &[Label]) -> Vec<Label> {
    sub.iter().filter(|l| position(sup, l).is_none()).cloned().collect()
}

pub fn ensure_subset(sub: &[Label], sup: &[Label]) -> Result<(), ScenarioError> {
    let missing = missing_from(sub, sup);
    if missing.is_empty() {
        Ok(())
    } else {
        Err(ScenarioError::NotSubset { missing, of: sup.to_vec() })
    }
}

/// Labels of `a` that also lie in `b`, in the order of `order`.
pub fn intersection_in(order: &[Label], a: &[Label], b: &[Label]) -> Vec<Label> {
    order.iter().filter(|l| position(a, l).is_some() && position(b, l).is_some()).cloned().collect()
}

/// Labels of `a` not in `b`, keeping the order of `a`.
pub fn difference(a: &[Label], b: &[Label]) -> Vec<Label> {
    a.iter().filter(|l| position(b, l).is_none()).cloned().collect()
}

/// Bijection between sections over `base` and `[0, size)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionIndex {
    base: Vec<Label>,
    alphabet: usize,
    size: usize,
}

impl SectionIndex {
    pub fn base(&self) -> &[Label] {
        &self.base
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn index(&self, section: &[usize]) -> Result<usize, ScenarioError> {
        if section.len() != self.base.len() || section.iter().any(|&s| s >= self.alphabet) {
            return Err(ScenarioError::BadSection {
                section: section.to_vec(),
                labels: self.base.len(),
                alphabet: self.alphabet,
            });
        }
        Ok(section.iter().fold(0, |acc, &s| acc * self.alphabet + s))
    }

    /// Inverse of [`index`](Self::index).
    pub fn section(&self, mut index: usize) -> Section {
        assert!(index < self.size, "section index {index} out of range {}", self.size);
        let mut out = vec![0; self.base.len()];
        for slot in out.iter_mut().rev() {
            *slot = index % self.alphabet;
            index /= self.alphabet;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Section> + '_ {
        (0..self.size).map(|i| self.section(i))
    }
}

pub fn sections_of(subset: &[Label], alphabet: &[Label]) -> Result<SectionIndex, ScenarioError> {
    check_unique(subset)?;
    section_index(subset, alphabet.len())
}

pub(crate) fn section_index(subset: &[Label], alphabet: usize) -> Result<SectionIndex, ScenarioError> {
    if alphabet == 0 {
        return Err(ScenarioError::EmptyAlphabet);
    }
    let too_large = || ScenarioError::TooLarge { alphabet, labels: subset.len() };
    let exp = u32::try_from(subset.len()).map_err(|_| too_large())?;
    let size = alphabet.checked_pow(exp).filter(|&s| s <= 1 << 24).ok_or_else(too_large)?;
    Ok(SectionIndex { base: subset.to_vec(), alphabet, size })
}

/// Restricts a section on `from` to the labels `to`.
pub fn restrict(section: &[usize], from: &[Label], to: &[Label]) -> Result<Section, ScenarioError> {
    if section.len() != from.len() {
        return Err(ScenarioError::BadSection { section: section.to_vec(), labels: from.len(), alphabet: usize::MAX });
    }
    to.iter()
        .map(|l| {
            position(from, l)
                .map(|p| section[p])
                .ok_or_else(|| ScenarioError::NotSubset { missing: missing_from(to, from), of: from.to_vec() })
        })
        .collect()
}

/// Positions of `to`'s labels inside `from`; the index form of [`restrict`].
pub fn projection(from: &[Label], to: &[Label]) -> Result<Vec<usize>, ScenarioError> {
    to.iter()
        .map(|l| {
            position(from, l)
                .ok_or_else(|| ScenarioError::NotSubset { missing: missing_from(to, from), of: from.to_vec() })
        })
        .collect()
}

/// A labelled ground set with a shared alphabet and a family of contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    labels: Vec<Label>,
    alphabet: Vec<Label>,
    contexts: Vec<Vec<Label>>,
}

impl Cover {
    /// Checks label uniqueness and that every context is a nonempty subset.
    /// Covering itself is checked by [`validate_cover`].
    pub fn new(labels: Vec<Label>, alphabet: Vec<Label>, contexts: Vec<Vec<Label>>) -> Result<Self, ScenarioError> {
        check_unique(&labels)?;
        check_unique(&alphabet)?;
        if alphabet.is_empty() {
            return Err(ScenarioError::EmptyAlphabet);
        }
        for (i, ctx) in contexts.iter().enumerate() {
            if ctx.is_empty() {
                return Err(ScenarioError::EmptyContext(i));
            }
            check_unique(ctx)?;
            if let Some(bad) = ctx.iter().find(|l| position(&labels, l).is_none()) {
                return Err(ScenarioError::UnknownLabel(bad.clone()));
            }
            section_index(ctx, alphabet.len())?;
        }
        Ok(Self { labels, alphabet, contexts })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn alphabet(&self) -> &[Label] {
        &self.alphabet
    }

    pub fn contexts(&self) -> &[Vec<Label>] {
        &self.contexts
    }

    pub fn label_position(&self, label: &str) -> Option<usize> {
        position(&self.labels, label)
    }

    pub fn context_sections(&self, i: usize) -> SectionIndex {
        section_index(&self.contexts[i], self.alphabet.len()).expect("context section count checked at construction")
    }

    pub fn global_sections(&self) -> Result<SectionIndex, ScenarioError> {
        section_index(&self.labels, self.alphabet.len())
    }

    /// Unordered context pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.contexts.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    /// Overlap of two contexts, in ground-set order.
    pub fn overlap(&self, i: usize, j: usize) -> Vec<Label> {
        intersection_in(&self.labels, &self.contexts[i], &self.contexts[j])
    }
}

/// Informational findings of a successful cover check.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverReport {
    /// `(i, j)`: context `i` is contained in context `j`.
    pub nested: Vec<(usize, usize)>,
}

pub fn validate_cover(cover: &Cover) -> Result<CoverReport, ScenarioError> {
    let uncovered: Vec<Label> =
        cover.labels.iter().filter(|l| !cover.contexts.iter().any(|c| position(c, l).is_some())).cloned().collect();
    if !uncovered.is_empty() {
        return Err(ScenarioError::Uncovered(uncovered));
    }
    let mut nested = Vec::new();
    for (i, a) in cover.contexts.iter().enumerate() {
        for (j, b) in cover.contexts.iter().enumerate() {
            if i != j && missing_from(a, b).is_empty() && (a.len() < b.len() || i < j) {
                nested.push((i, j));
            }
        }
    }
    Ok(CoverReport { nested })
}

/// Measurements `X`, outcomes `O` and a cover `𝒞` of jointly measurable contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementScenario {
    cover: Cover,
}

impl MeasurementScenario {
    pub fn new(
        measurements: Vec<Label>,
        outcomes: Vec<Label>,
        contexts: Vec<Vec<Label>>,
    ) -> Result<Self, ScenarioError> {
        Ok(Self { cover: Cover::new(measurements, outcomes, contexts)? })
    }

    pub fn measurements(&self) -> &[Label] {
        self.cover.labels()
    }

    pub fn outcomes(&self) -> &[Label] {
        self.cover.alphabet()
    }

    pub fn contexts(&self) -> &[Vec<Label>] {
        self.cover.contexts()
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }
}

/// Sources `Y` sharing instance set `I`, a cover of source contexts, and the
/// outcome set `O` of the single fixed measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationScenario {
    cover: Cover,
    outcomes: Vec<Label>,
}

impl PreparationScenario {
    pub fn new(
        sources: Vec<Label>,
        instances: Vec<Label>,
        contexts: Vec<Vec<Label>>,
        outcomes: Vec<Label>,
    ) -> Result<Self, ScenarioError> {
        check_unique(&outcomes)?;
        if outcomes.is_empty() {
            return Err(ScenarioError::EmptyAlphabet);
        }
        Ok(Self { cover: Cover::new(sources, instances, contexts)?, outcomes })
    }

    pub fn sources(&self) -> &[Label] {
        self.cover.labels()
    }

    pub fn instances(&self) -> &[Label] {
        self.cover.alphabet()
    }

    pub fn outcomes(&self) -> &[Label] {
        &self.outcomes
    }

    pub fn contexts(&self) -> &[Vec<Label>] {
        self.cover.contexts()
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }
}

pub(crate) fn labels<const N: usize>(names: [&str; N]) -> Vec<Label> {
    names.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_pair_order() {
        let idx = sections_of(&labels(["a", "b"]), &labels(["0", "1"])).unwrap();
        let all: Vec<_> = idx.iter().collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn empty_subset_has_one_section() {
        let idx = sections_of(&[], &labels(["0", "1"])).unwrap();
        assert_eq!(idx.size(), 1);
        assert_eq!(idx.section(0), Vec::<usize>::new());
        assert_eq!(idx.index(&[]).unwrap(), 0);
    }

    #[test]
    fn ternary_alphabet() {
        let idx = sections_of(&labels(["x"]), &labels(["u", "v", "w"])).unwrap();
        assert_eq!(idx.size(), 3);
        assert_eq!(idx.iter().collect::<Vec<_>>(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert_eq!(
            sections_of(&labels(["a", "a"]), &labels(["0", "1"])),
            Err(ScenarioError::DuplicateLabel("a".into()))
        );
    }

    #[test]
    fn restriction_examples() {
        let from = labels(["a", "b", "a'", "b'"]);
        assert_eq!(restrict(&[0, 1, 1, 0], &from, &labels(["a", "b"])).unwrap(), vec![0, 1]);
        assert_eq!(restrict(&[0, 1, 1, 0], &from, &from).unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(restrict(&[1, 0], &labels(["a", "b"]), &labels(["b"])).unwrap(), vec![0]);
        assert!(matches!(restrict(&[1, 0], &labels(["a", "b"]), &labels(["c"])), Err(ScenarioError::NotSubset { .. })));
    }

    #[test]
    fn bell_cover_is_valid() {
        let cover = Cover::new(
            labels(["a", "a'", "b", "b'"]),
            labels(["0", "1"]),
            vec![labels(["a", "b"]), labels(["a'", "b"]), labels(["a", "b'"]), labels(["a'", "b'"])],
        )
        .unwrap();
        assert_eq!(validate_cover(&cover).unwrap(), CoverReport::default());
    }

    #[test]
    fn pbr_source_cover_is_valid() {
        let s = PreparationScenario::new(
            labels(["a", "b", "a'", "b'"]),
            labels(["0", "1"]),
            vec![labels(["a", "b"]), labels(["a", "b'"]), labels(["a'", "b"]), labels(["a'", "b'"])],
            labels(["1", "2", "3", "4"]),
        )
        .unwrap();
        assert!(validate_cover(s.cover()).is_ok());
    }

    #[test]
    fn uncovered_label_named() {
        let cover = Cover::new(labels(["a", "b"]), labels(["0", "1"]), vec![labels(["a"])]).unwrap();
        assert_eq!(validate_cover(&cover), Err(ScenarioError::Uncovered(labels(["b"]))));
    }

    #[test]
    fn nested_contexts_flagged() {
        let cover =
            Cover::new(labels(["a", "b"]), labels(["0", "1"]), vec![labels(["a"]), labels(["a", "b"])]).unwrap();
        assert_eq!(validate_cover(&cover).unwrap().nested, vec![(0, 1)]);
    }

    #[test]
    fn malformed_contexts_rejected() {
        let l = labels(["a", "b"]);
        let al = labels(["0", "1"]);
        assert_eq!(Cover::new(l.clone(), al.clone(), vec![vec![]]), Err(ScenarioError::EmptyContext(0)));
        assert_eq!(
            Cover::new(l.clone(), al.clone(), vec![labels(["z"])]),
            Err(ScenarioError::UnknownLabel("z".into()))
        );
        assert!(Cover::new(l, vec![], vec![]).is_err());
    }

    fn subset_strategy() -> impl Strategy<Value = (Vec<Label>, Vec<bool>, usize)> {
        (1usize..=5, 1usize..=4).prop_flat_map(|(n, k)| {
            let names: Vec<Label> = (0..n).map(|i| format!("m{i}")).collect();
            (Just(names), proptest::collection::vec(any::<bool>(), n), Just(k))
        })
    }

    proptest! {
        #[test]
        fn restriction_lands_in_range((from, keep, k) in subset_strategy(), pick in any::<u64>()) {
            let to: Vec<Label> = from.iter().zip(&keep).filter(|(_, &k)| k).map(|(l, _)| l.clone()).collect();
            let big = section_index(&from, k).unwrap();
            let small = section_index(&to, k).unwrap();
            let s = big.section((pick % big.size() as u64) as usize);
            let r = restrict(&s, &from, &to).unwrap();
            prop_assert!(small.index(&r).unwrap() < small.size());
        }
    }

    #[test]
    fn indexing_round_trips_exhaustively() {
        for alphabet in 1..=4usize {
            for n in 0..=6usize {
                let names: Vec<Label> = (0..n).map(|i| format!("x{i}")).collect();
                let idx = section_index(&names, alphabet).unwrap();
                if idx.size() > 4096 {
                    continue;
                }
                for i in 0..idx.size() {
                    assert_eq!(idx.index(&idx.section(i)).unwrap(), i);
                }
            }
        }
    }
}
