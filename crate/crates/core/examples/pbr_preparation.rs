//! Preparation contextuality of the PBR model: the forbidden-outcome map, the
//! parity structure of singleton supports and the full support sweep.

use contexture::quantum::builtin_pbr;
use contexture::verdict::{check_preparation, forbidden_map, parity_profile, PrepOptions, SupportPattern};

fn main() {
    let model = builtin_pbr();
    let pmodel = model.possibilistic_reduce();
    let outcomes = model.scenario().outcomes();
    let phi = forbidden_map(&pmodel);
    let forbidden: Vec<&str> = (0..phi.columns()).map(|j| outcomes[phi.phi(j).unwrap()].as_str()).collect();
    println!("forbidden outcome per column: {}", forbidden.join(" "));

    let sources = model.scenario().sources().to_vec();
    for sigma in [[0, 0, 0, 0], [0, 1, 0, 0], [1, 1, 0, 1], [1, 1, 1, 1]] {
        let pattern = SupportPattern::singleton(&sources, &sigma, 2);
        let report = &parity_profile(&pmodel, &pattern).unwrap()[0];
        let allowed: Vec<&str> = report.allowed.iter().map(|&o| outcomes[o].as_str()).collect();
        println!("sigma {sigma:?}: parity {:?}, allowed outcomes {:?}", report.parity.unwrap(), allowed);
    }

    let verdict = check_preparation(&model, &PrepOptions::default()).unwrap();
    println!("{}", verdict.summary());
    println!("patterns checked: {}", verdict.stats.patterns_checked);
}
