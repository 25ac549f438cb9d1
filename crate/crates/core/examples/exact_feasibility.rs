//! Exact feasibility of `A x = b, x ≥ 0` over the rationals, with a Farkas
//! certificate whenever the system has no solution.

use contexture::ratbool::rational::ratio;
use contexture::ratbool::{format_rational, solve_linear_feasibility, Feasibility, RatMatrix};

fn show(label: &str, a: &RatMatrix, b: &[contexture::ratbool::Rational]) {
    let report = solve_linear_feasibility(a, b, true).expect("shapes agree");
    match &report.result {
        Feasibility::Feasible(x) => {
            let x: Vec<String> = x.iter().map(format_rational).collect();
            println!("{label}: feasible, x = [{}] after {} pivots", x.join(", "), report.pivots);
        }
        Feasibility::Infeasible(cert) => {
            let y: Vec<String> = cert.y.iter().map(format_rational).collect();
            println!("{label}: infeasible, y = [{}], verified = {}", y.join(", "), cert.verify(a, b, true));
        }
    }
}

fn main() {
    // Two coins whose marginals must agree with a joint table.
    let a = RatMatrix::from_rows(vec![
        vec![ratio(1, 1), ratio(1, 1), ratio(0, 1), ratio(0, 1)],
        vec![ratio(0, 1), ratio(0, 1), ratio(1, 1), ratio(1, 1)],
        vec![ratio(1, 1), ratio(0, 1), ratio(1, 1), ratio(0, 1)],
        vec![ratio(1, 1); 4],
    ])
    .unwrap();
    show("consistent marginals", &a, &[ratio(1, 3), ratio(2, 3), ratio(1, 2), ratio(1, 1)]);
    show("marginals exceeding one", &a, &[ratio(2, 3), ratio(2, 3), ratio(1, 2), ratio(1, 1)]);
}
