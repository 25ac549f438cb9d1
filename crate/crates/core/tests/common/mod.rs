#![allow(dead_code)]

use std::collections::BTreeMap;

use contexture::incext::{stacked_extension, ExtensionFamily};
use contexture::models::PreparationModel;
use contexture::ratbool::{BoolMatrix, RatMatrix, Rational};
use contexture::scenario::PreparationScenario;
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn r(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rats(values: &[(i64, i64)]) -> Vec<Rational> {
    values.iter().map(|&(p, q)| r(p, q)).collect()
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random distribution with small integer weights; `full` forbids zeros.
pub fn dist(rng: &mut StdRng, n: usize, full: bool) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..n).map(|_| rng.gen_range(if full { 1 } else { 0 }..=3)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&x| r(x, total)).collect();
        }
    }
}

pub fn family(rng: &mut StdRng, sources: &[String], n: usize, full: bool) -> ExtensionFamily {
    ExtensionFamily::new(sources.iter().map(|p| (p.clone(), dist(rng, n, full))).collect()).unwrap()
}

pub fn stochastic(rng: &mut StdRng, rows: usize, cols: usize) -> RatMatrix {
    let columns: Vec<Vec<Rational>> = (0..cols).map(|_| dist(rng, rows, false)).collect();
    RatMatrix::from_rows((0..rows).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect()).unwrap()
}

/// Random preparation scenario with `sources` sources, every source covered.
pub fn scenario(rng: &mut StdRng, sources: usize, instances: usize, outcomes: usize) -> PreparationScenario {
    let ys = names("p", sources);
    let count = rng.gen_range(2..=3);
    let mut masks: Vec<usize> = (0..count).map(|_| rng.gen_range(1..1usize << sources)).collect();
    for p in 0..sources {
        if masks.iter().all(|m| m >> p & 1 == 0) {
            let i = rng.gen_range(0..count);
            masks[i] |= 1 << p;
        }
    }
    let contexts =
        masks.iter().map(|m| (0..sources).filter(|p| m >> p & 1 == 1).map(|p| ys[p].clone()).collect()).collect();
    PreparationScenario::new(ys, names("i", instances), contexts, names("o", outcomes)).unwrap()
}

/// Splits a stacked `|O| × N` matrix into per-context tables.
pub fn split(scenario: &PreparationScenario, e: &RatMatrix) -> Vec<RatMatrix> {
    let n = scenario.instances().len();
    let mut start = 0;
    scenario
        .contexts()
        .iter()
        .map(|c| {
            let width = n.pow(c.len() as u32);
            let rows = (0..e.rows()).map(|o| e.row(o)[start..start + width].to_vec()).collect();
            start += width;
            RatMatrix::from_rows(rows).unwrap()
        })
        .collect()
}

/// `E = D S_Y` for a random column-stochastic `D`.
pub fn constructed(rng: &mut StdRng, scenario: &PreparationScenario, fam: &ExtensionFamily) -> PreparationModel {
    let s = stacked_extension(scenario, fam).unwrap();
    let d = stochastic(rng, scenario.outcomes().len(), s.rows());
    let e = d.mul(&s).unwrap();
    PreparationModel::new(scenario.clone(), split(scenario, &e)).unwrap()
}

fn random_tables(rng: &mut StdRng, scenario: &PreparationScenario, deterministic: bool) -> PreparationModel {
    let (n, o) = (scenario.instances().len(), scenario.outcomes().len());
    let tables = scenario
        .contexts()
        .iter()
        .map(|c| {
            let cols = n.pow(c.len() as u32);
            if deterministic {
                let mut m = RatMatrix::zeros(o, cols);
                for j in 0..cols {
                    m.set(rng.gen_range(0..o), j, r(1, 1));
                }
                m
            } else {
                stochastic(rng, o, cols)
            }
        })
        .collect();
    PreparationModel::new(scenario.clone(), tables).unwrap()
}

pub struct Case {
    pub label: String,
    pub model: PreparationModel,
    /// Families handed to the probabilistic pass; the first one generated
    /// the model when `constructed` holds.
    pub families: Vec<ExtensionFamily>,
    pub constructed: bool,
}

fn shape(rng: &mut StdRng) -> (usize, usize, usize) {
    let sources = rng.gen_range(2..=4);
    let instances = if sources == 4 { 2 } else { rng.gen_range(2..=3) };
    (sources, instances, rng.gen_range(2..=3))
}

/// Randomised preparation corpus: models built as `D S_Y` (full and partial
/// supports), unconstrained random tables, deterministic tables, and the
/// built-in PBR model.
pub fn corpus(seed: u64) -> Vec<Case> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for i in 0..40 {
        let (y, n, o) = shape(&mut rng);
        let s = scenario(&mut rng, y, n, o);
        let full = i % 4 != 3;
        let fam = family(&mut rng, s.sources(), n, full);
        let model = constructed(&mut rng, &s, &fam);
        let other = family(&mut rng, s.sources(), n, true);
        let uniform = ExtensionFamily::uniform(s.sources(), n);
        out.push(Case {
            label: format!("constructed-{i}"),
            model,
            families: vec![fam, uniform, other],
            constructed: true,
        });
    }
    for i in 0..30 {
        let (y, n, o) = shape(&mut rng);
        let s = scenario(&mut rng, y, n, o);
        let model = random_tables(&mut rng, &s, i % 2 == 0);
        let uniform = ExtensionFamily::uniform(s.sources(), n);
        let other = family(&mut rng, s.sources(), n, i % 3 != 0);
        out.push(Case { label: format!("random-{i}"), model, families: vec![uniform, other], constructed: false });
    }
    let pbr = contexture::quantum::builtin_pbr();
    let uniform = ExtensionFamily::uniform(pbr.scenario().sources(), 2);
    out.push(Case { label: "pbr".into(), model: pbr, families: vec![uniform], constructed: false });
    out
}

/// Lexicographic sections of `k` sites over `n` symbols, leftmost slowest.
pub fn lex_sections(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|s| (0..n).map(move |v| [s.clone(), vec![v]].concat())).collect();
    }
    out
}

/// `S_{U|V}` straight from the product formula, independent of the library.
pub fn oracle_extension(u: &[String], v: &[String], mu: &BTreeMap<String, Vec<Rational>>, n: usize) -> RatMatrix {
    let rows = lex_sections(u.len(), n);
    let cols = lex_sections(v.len(), n);
    let mut m = RatMatrix::zeros(rows.len(), cols.len());
    for (ri, su) in rows.iter().enumerate() {
        let restricted: Vec<usize> = v.iter().map(|l| su[u.iter().position(|x| x == l).unwrap()]).collect();
        let ci = cols.iter().position(|c| *c == restricted).unwrap();
        let mut w = r(1, 1);
        for (pos, p) in u.iter().enumerate() {
            if !v.contains(p) {
                w *= mu[p][su[pos]].clone();
            }
        }
        m.set(ri, ci, w);
    }
    m
}

/// Whether some `D̄` with nonempty columns satisfies `Ē = D̄ S̄`, by exhaustion.
pub fn brute_force_boolean(ebar: &BoolMatrix, sbar: &BoolMatrix) -> bool {
    let (rows, k) = (ebar.rows(), sbar.rows());
    let bits = rows * k;
    assert!(bits <= 20, "oracle limited to 20 unknowns");
    'outer: for mask in 0u32..(1 << bits) {
        let d = |i: usize, kk: usize| mask >> (i * k + kk) & 1 == 1;
        for kk in 0..k {
            if !(0..rows).any(|i| d(i, kk)) {
                continue 'outer;
            }
        }
        for i in 0..rows {
            for j in 0..ebar.cols() {
                let v = (0..k).any(|kk| d(i, kk) && sbar.get(kk, j));
                if v != ebar.get(i, j) {
                    continue 'outer;
                }
            }
        }
        return true;
    }
    false
}

pub fn random_bool(rng: &mut StdRng, rows: usize, cols: usize, density: f64) -> BoolMatrix {
    BoolMatrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_bool(density)).collect()).unwrap()
}

pub fn shuffled<T: Clone>(rng: &mut StdRng, v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.shuffle(rng);
    v
}
