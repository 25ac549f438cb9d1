use num_traits::One;

use super::{Certificate, Mode, Stats, Status, Verdict, VerdictError, Witness};
use crate::compat::no_signalling;
use crate::incext::incidence;
use crate::models::MeasurementModel;
use crate::ratbool::{
    solve_boolean_factor_with, solve_linear_feasibility, BoolMatrix, ColumnRule, Feasibility, RatMatrix, Rational,
};

/// Stacked incidence `M_X`: one row block per context, one column per global section.
pub fn global_incidence(model: &MeasurementModel) -> Result<RatMatrix, VerdictError> {
    let s = model.scenario();
    let blocks =
        s.contexts().iter().map(|c| incidence(c, s.measurements(), s.outcomes())).collect::<Result<Vec<_>, _>>()?;
    Ok(RatMatrix::vstack(&blocks)?)
}

pub fn check_measurement(model: &MeasurementModel, mode: Mode) -> Result<Verdict, VerdictError> {
    model.validate()?;
    match mode {
        Mode::Probabilistic => probabilistic(model),
        Mode::Possibilistic => possibilistic(model),
    }
}

fn probabilistic(model: &MeasurementModel) -> Result<Verdict, VerdictError> {
    let ns = no_signalling(model)?;
    if let Some(pair) = ns.first_violation() {
        return Ok(Verdict {
            status: Status::Incompatible,
            mode: Mode::Probabilistic,
            witness: None,
            certificate: Some(Certificate::Incompatible(pair.clone())),
            reason: Some("no-signalling fails on a context overlap".into()),
            stats: Stats::default(),
        });
    }
    let mx = global_incidence(model)?;
    let ep: Vec<Rational> = model.stack().entries().to_vec();
    let n = mx.rows();
    let ones = RatMatrix::from_vec(1, mx.cols(), vec![Rational::one(); mx.cols()])?;
    let a = RatMatrix::vstack(&[mx.clone(), ones])?;
    let mut b = ep.clone();
    b.push(Rational::one());
    let report = solve_linear_feasibility(&a, &b, true)?;
    let stats = Stats { patterns_checked: 0, lp_pivots: report.pivots };
    Ok(match report.result {
        Feasibility::Feasible(d) => Verdict {
            status: Status::Noncontextual,
            mode: Mode::Probabilistic,
            witness: Some(Witness::GlobalDistribution(d)),
            certificate: None,
            reason: None,
            stats,
        },
        Feasibility::Infeasible(cert) => {
            // Fold the normalisation row back into the context rows: every
            // column of M_X has one 1 per context and E_p sums to the context
            // count, so the folded vector refutes M_X d = E_p, d ≥ 0 directly.
            let contexts = Rational::from_integer(model.scenario().contexts().len().into());
            let shift = &cert.y[n] / contexts;
            let y: Vec<Rational> = cert.y[..n].iter().map(|v| v + &shift).collect();
            debug_assert!(crate::ratbool::FarkasCertificate { y: y.clone() }.verify(&mx, &ep, true));
            Verdict {
                status: Status::Contextual,
                mode: Mode::Probabilistic,
                witness: None,
                certificate: Some(Certificate::Farkas(y)),
                reason: None,
                stats,
            }
        }
    })
}

fn possibilistic(model: &MeasurementModel) -> Result<Verdict, VerdictError> {
    let mx = global_incidence(model)?.support();
    let e = model.possibilistic_reduce().stack();
    let ebar = BoolMatrix::from_vec(1, e.len(), e)?;
    let result = solve_boolean_factor_with(&ebar, &mx.transpose(), ColumnRule::Unconstrained)?;
    Ok(match result {
        Feasibility::Feasible(d) => Verdict {
            status: Status::Noncontextual,
            mode: Mode::Possibilistic,
            witness: Some(Witness::GlobalSupport(d.row(0).to_vec())),
            certificate: None,
            reason: None,
            stats: Stats::default(),
        },
        Feasibility::Infeasible(o) => Verdict {
            status: Status::Contextual,
            mode: Mode::Possibilistic,
            witness: None,
            certificate: Some(Certificate::Boolean(o)),
            reason: None,
            stats: Stats::default(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::builtin_bell;
    use crate::ratbool::rational::{int, ratio};
    use crate::ratbool::FarkasCertificate;
    use crate::scenario::{labels, MeasurementScenario};

    fn triangle(tables: Vec<Vec<Rational>>) -> MeasurementModel {
        let s = MeasurementScenario::new(
            labels(["x", "y", "z"]),
            labels(["0", "1"]),
            vec![labels(["x", "y"]), labels(["y", "z"]), labels(["x", "z"])],
        )
        .unwrap();
        MeasurementModel::new(s, tables).unwrap()
    }

    #[test]
    fn bell_probabilistic_is_contextual() {
        let m = builtin_bell();
        let v = check_measurement(&m, Mode::Probabilistic).unwrap();
        assert_eq!(v.status, Status::Contextual);
        let Some(Certificate::Farkas(y)) = &v.certificate else { panic!("{v:?}") };
        let mx = global_incidence(&m).unwrap();
        assert!(FarkasCertificate { y: y.clone() }.verify(&mx, m.stack().entries(), true));
    }

    #[test]
    fn bell_possibilistic_is_noncontextual() {
        let v = check_measurement(&builtin_bell(), Mode::Possibilistic).unwrap();
        assert_eq!(v.status, Status::Noncontextual);
    }

    #[test]
    fn anticorrelated_triangle_is_possibilistically_contextual() {
        let anti = vec![int(0), ratio(1, 2), ratio(1, 2), int(0)];
        let m = triangle(vec![anti.clone(), anti.clone(), anti]);
        let v = check_measurement(&m, Mode::Possibilistic).unwrap();
        assert_eq!(v.status, Status::Contextual);
        let v = check_measurement(&m, Mode::Probabilistic).unwrap();
        assert_eq!(v.status, Status::Contextual);
    }

    #[test]
    fn signalling_model_is_incompatible() {
        let u = vec![ratio(1, 4); 4];
        let skew = vec![ratio(5, 8), ratio(1, 8), int(0), ratio(1, 4)];
        let m = triangle(vec![skew, u.clone(), u]);
        let v = check_measurement(&m, Mode::Probabilistic).unwrap();
        assert_eq!(v.status, Status::Incompatible);
        assert!(matches!(v.certificate, Some(Certificate::Incompatible(_))));
    }

    #[test]
    fn product_model_has_reproducing_witness() {
        let u = vec![ratio(1, 4); 4];
        let m = triangle(vec![u.clone(), u.clone(), u]);
        let v = check_measurement(&m, Mode::Probabilistic).unwrap();
        let Some(Witness::GlobalDistribution(d)) = &v.witness else { panic!() };
        let mx = global_incidence(&m).unwrap();
        assert_eq!(mx.mul_vec(d).unwrap(), m.stack().entries());
    }
}
