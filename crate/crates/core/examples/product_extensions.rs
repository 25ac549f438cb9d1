//! Product-form extension matrices `S_{U|V}`: building them from single-site
//! distributions and recovering those distributions from a family.

use contexture::incext::{extension, factor_family, full_family, ExtensionFamily, Factorization, RawExtension};
use contexture::ratbool::format_rational;
use contexture::ratbool::rational::ratio;
use std::collections::BTreeMap;

fn main() {
    let sources: Vec<String> = ["x", "y", "z"].map(String::from).to_vec();
    let mu = BTreeMap::from([
        ("x".to_string(), vec![ratio(1, 2), ratio(1, 2)]),
        ("y".to_string(), vec![ratio(1, 3), ratio(2, 3)]),
        ("z".to_string(), vec![ratio(3, 4), ratio(1, 4)]),
    ]);
    let fam = ExtensionFamily::new(mu).unwrap();

    let s = extension(&sources, &sources[..1], &fam).unwrap();
    println!("S_{{xyz|x}} is {}x{}", s.rows(), s.cols());
    for i in 0..s.rows() {
        let row: Vec<String> = s.row(i).iter().map(format_rational).collect();
        println!("  {}", row.join("  "));
    }

    let members = full_family(&sources, &fam).unwrap();
    println!("family of {} matrices", members.len());
    match factor_family(&members, &sources, 2).unwrap() {
        Factorization::Product(found) => {
            let mu_y: Vec<String> = found.mu("y").unwrap().iter().map(format_rational).collect();
            println!("recovered mu_y = [{}]", mu_y.join(", "));
        }
        Factorization::Rejected(v) => println!("rejected: {v:?}"),
    }

    // Swap in a correlated extension for one pair.
    let mut tampered = members.clone();
    let pos = tampered.iter().position(|m| m.u().len() == 2 && m.v().is_empty()).unwrap();
    let m = &tampered[pos];
    let joint = vec![vec![ratio(1, 2)], vec![ratio(0, 1)], vec![ratio(0, 1)], vec![ratio(1, 2)]];
    let matrix = contexture::ratbool::RatMatrix::from_rows(joint).unwrap();
    tampered[pos] = RawExtension::new(m.u().to_vec(), m.v().to_vec(), 2, matrix).unwrap();
    match factor_family(&tampered, &sources, 2).unwrap() {
        Factorization::Product(_) => println!("tampered family still factors"),
        Factorization::Rejected(v) => println!("tampered family rejected: {v:?}"),
    }
}
