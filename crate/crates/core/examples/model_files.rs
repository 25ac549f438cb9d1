//! Writing, reading and validating model files.

use contexture::models::{parse, serialize, EmpiricalModel, PreparationModel};
use contexture::ratbool::rational::ratio;
use contexture::ratbool::RatMatrix;
use contexture::scenario::PreparationScenario;
use contexture::verdict::{check_preparation, PrepOptions};

fn main() {
    let labels = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let scenario = PreparationScenario::new(
        labels(&["p", "q"]),
        labels(&["0", "1"]),
        vec![labels(&["p"]), labels(&["q"])],
        labels(&["yes", "no"]),
    )
    .unwrap();
    let table =
        |a, b| RatMatrix::from_rows(vec![vec![ratio(a, 4), ratio(b, 4)], vec![ratio(4 - a, 4), ratio(4 - b, 4)]]);
    let model = PreparationModel::new(scenario, vec![table(1, 3).unwrap(), table(2, 2).unwrap()]).unwrap();

    let text = serialize(&EmpiricalModel::Preparation(model));
    println!("{text}");
    let parsed = parse(text.as_bytes()).unwrap();
    let report = parsed.validate().unwrap();
    println!("{} model, {} contexts, {} columns", report.kind, report.contexts, report.columns);
    if let EmpiricalModel::Preparation(m) = &parsed {
        println!("{}", check_preparation(m, &PrepOptions::default()).unwrap().summary());
    }

    let broken = text.replacen("\"1/4\"", "\"1/2\"", 1);
    match parse(broken.as_bytes()).and_then(|m| m.validate().map(|_| ())) {
        Ok(()) => println!("unexpectedly valid"),
        Err(e) => println!("rejected at {}: {e}", e.path()),
    }
}
