//! The CHSH-optimal Bell model: no-signalling holds, the probabilistic check
//! finds contextuality with a Farkas certificate, the possibilistic one does not.

use contexture::compat::no_signalling;
use contexture::quantum::builtin_bell;
use contexture::ratbool::format_rational;
use contexture::verdict::{check_measurement, Certificate, Mode};

fn main() {
    let model = builtin_bell();
    for (context, table) in model.scenario().contexts().iter().zip(model.tables()) {
        let row: Vec<String> = table.iter().map(format_rational).collect();
        println!("{:<10} {}", context.join(","), row.join("  "));
    }

    let ns = no_signalling(&model).unwrap();
    println!("no-signalling: {} over {} overlapping pairs", ns.passes(), ns.checks.len());

    let prob = check_measurement(&model, Mode::Probabilistic).unwrap();
    println!("{}", prob.summary());
    if let Some(Certificate::Farkas(y)) = &prob.certificate {
        let y: Vec<String> = y.iter().map(format_rational).collect();
        println!("certificate y = [{}]", y.join(", "));
    }
    println!("{}", check_measurement(&model, Mode::Possibilistic).unwrap().summary());
}
