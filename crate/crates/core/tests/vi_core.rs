use approx::assert_relative_eq;
use proptest::prelude::*;

use vimarl::vi_core::{
    gd_step, jacobian_probe, la_solve, matrix_game_field, monotonicity_probe, ogd_step, solve, uniform_sampler,
    BaseMethod, Method, SoftmaxMatrixGame, SolverConfig, VectorField,
};

fn norm(z: &[f64]) -> f64 {
    z.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn gd_on_rotation_matches_recurrence() {
    let z = gd_step(&VectorField::rotation(), &[1.0, 0.0], 0.1).unwrap();
    assert_relative_eq!(z[0], 1.0, epsilon = 1e-15);
    assert_relative_eq!(z[1], 0.1, epsilon = 1e-15);
    assert_relative_eq!(norm(&z).powi(2), 1.01, epsilon = 1e-14);
}

#[test]
fn ogd_beats_gd_at_every_step_after_the_first() {
    let f = VectorField::rotation();
    let eta = 0.1;
    let gd = solve(&f, &[1.0, 1.0], &SolverConfig::new(Method::Gd, eta), 500).unwrap();
    let ogd = solve(&f, &[1.0, 1.0], &SolverConfig::new(Method::Ogd, eta), 500).unwrap();
    assert!(ogd.final_norm() < 2f64.sqrt());
    for t in 2..gd.len() {
        assert!(ogd.norms[t] < gd.norms[t], "t={t}");
    }
    // Equal previous gradient: the first optimistic step is plain GD.
    let (z, _) = ogd_step(&VectorField::identity(1), &[1.0], &[1.0], 0.1).unwrap();
    assert_relative_eq!(z[0], 0.9, epsilon = 1e-15);
}

#[test]
fn lookahead_tames_gd_on_rotation() {
    let f = VectorField::rotation();
    let cfg = SolverConfig::lookahead(BaseMethod::Gd, 0.3, &[5], 0.5);
    let la = la_solve(&f, &[1.0, 1.0], &cfg, 500).unwrap();
    let gd = solve(&f, &[1.0, 1.0], &SolverConfig::new(Method::Gd, 0.3), 500).unwrap();
    assert!(la.final_norm() < 2f64.sqrt());
    assert!(gd.final_norm() > 2f64.sqrt());
    // GD norm grows by sqrt(1 + eta^2) per step.
    assert_relative_eq!(gd.final_norm(), 1.09f64.powi(250) * 2f64.sqrt(), max_relative = 1e-9);
}

#[test]
fn unit_lookahead_is_the_base_method() {
    let f = VectorField::rotation();
    for base in [BaseMethod::Gd, BaseMethod::Eg, BaseMethod::Ogd] {
        let la = la_solve(&f, &[0.3, -1.2], &SolverConfig::lookahead(base, 0.2, &[1], 1.0), 50).unwrap();
        let plain = solve(&f, &[0.3, -1.2], &SolverConfig::new(base.into(), 0.2), 50).unwrap();
        assert_eq!(la.iterates, plain.iterates, "{base:?}");
    }
}

#[test]
fn lookahead_over_eg_contracts_at_least_as_fast() {
    let f = VectorField::rotation();
    let run = |b| la_solve(&f, &[1.0, 1.0], &SolverConfig::lookahead(b, 0.3, &[5], 0.5), 200).unwrap();
    let (gd, eg) = (run(BaseMethod::Gd), run(BaseMethod::Eg));
    assert!(gd.final_norm() < 2f64.sqrt() && eg.final_norm() < 2f64.sqrt());
    assert!(eg.final_norm() <= gd.final_norm());
}

#[test]
fn eg_on_identity_closed_form() {
    let t = solve(&VectorField::identity(1), &[1.0], &SolverConfig::new(Method::Eg, 0.5), 10).unwrap();
    assert_relative_eq!(t.last()[0], 0.75f64.powi(10), epsilon = 1e-15);
}

#[test]
fn rps_field_is_rotational_at_equilibrium() {
    let f = matrix_game_field(&SoftmaxMatrixGame::rock_paper_scissors()).unwrap();
    let r = jacobian_probe(&f, &[0.0; 6], 1e-5).unwrap();
    assert!(r.antisymmetric_norm > r.symmetric_norm);
    assert_eq!(r.has_rotation(), Some(true));
}

#[test]
fn bad_configs_are_rejected() {
    let f = VectorField::rotation();
    assert!(solve(&f, &[1.0, 0.0], &SolverConfig::lookahead(BaseMethod::Gd, 0.1, &[4, 6], 0.5), 10).is_err());
    assert!(solve(&f, &[1.0], &SolverConfig::new(Method::Gd, 0.1), 10).is_err());
}

proptest! {
    #[test]
    fn eval_has_field_dimension(z in prop::collection::vec(-3.0..3.0f64, 6)) {
        let f = matrix_game_field(&SoftmaxMatrixGame::rock_paper_scissors()).unwrap();
        let a = f.eval(&z).unwrap();
        prop_assert_eq!(a.len(), 6);
        prop_assert_eq!(a, f.eval(&z).unwrap());
    }

    #[test]
    fn trajectory_norms_are_nonnegative(x in -2.0..2.0f64, y in -2.0..2.0f64, steps in 0usize..50) {
        let t = solve(&VectorField::rotation(), &[x, y], &SolverConfig::new(Method::Eg, 0.2), steps).unwrap();
        prop_assert_eq!(t.norms.len(), t.iterates.len());
        prop_assert!(t.norms.iter().all(|n| *n >= 0.0));
    }

    #[test]
    fn identity_is_monotone_everywhere(seed in 0u64..1000) {
        let r = monotonicity_probe(&VectorField::identity(3), &mut uniform_sampler(3, seed), 20).unwrap();
        prop_assert!(r.min_inner_product >= 0.0);
        prop_assert!(r.violating_pair.is_none());
    }
}
