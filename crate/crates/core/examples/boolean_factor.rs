//! Boolean factorisation `Ē = D̄ S̄`: the largest candidate `D̄` either
//! reproduces `Ē` or exposes a column it cannot fill.

use contexture::ratbool::{maximal_candidate, solve_boolean_factor, BoolMatrix, Feasibility};

fn print(name: &str, m: &BoolMatrix) {
    println!("{name}:");
    for i in 0..m.rows() {
        let row: String = (0..m.cols()).map(|j| if m.get(i, j) { '1' } else { '.' }).collect();
        println!("  {row}");
    }
}

fn main() {
    let sbar = BoolMatrix::from_rows(vec![vec![true, true, false], vec![false, true, true]]).unwrap();
    let good = BoolMatrix::from_rows(vec![vec![true, true, false], vec![false, true, true]]).unwrap();
    let bad = BoolMatrix::from_rows(vec![vec![true, false, false], vec![false, true, true]]).unwrap();
    print("S", &sbar);
    for (name, ebar) in [("E1", good), ("E2", bad)] {
        print(name, &ebar);
        print("largest D", &maximal_candidate(&ebar, &sbar));
        match solve_boolean_factor(&ebar, &sbar).unwrap() {
            Feasibility::Feasible(_) => println!("{name} factors through S\n"),
            Feasibility::Infeasible(o) => println!("{name} does not factor: {o:?}\n"),
        }
    }
}
