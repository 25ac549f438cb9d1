//! Empirical models from quantum states: Born-rule probabilities are
//! rationalised and fed to the exact checks.

use contexture::quantum::{bell_spec, born_measurement, rationalize, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE};
use contexture::ratbool::format_rational;
use contexture::verdict::{check_measurement, Mode};
use num_complex::Complex64;

fn main() {
    for x in [0.375, (std::f64::consts::PI / 8.0).cos().powi(2), 1.0 / 3.0] {
        match rationalize(x, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOLERANCE) {
            Ok(q) => println!("{x:.12} -> {}", format_rational(&q)),
            Err(e) => println!("{x:.12} -> {e}"),
        }
    }

    // Same settings on a product state: every context factorises.
    let mut spec = bell_spec();
    spec.state = [1.0, 0.0, 0.0, 0.0].map(|v| Complex64::new(v, 0.0)).to_vec();
    for (name, spec) in [("entangled", bell_spec()), ("product", spec)] {
        let model = born_measurement(&spec).unwrap();
        let verdict = check_measurement(&model, Mode::Probabilistic).unwrap();
        println!("{name}: {}", verdict.summary());
    }
}
