//! End-to-end runs through the public API: config parsing, fits against
//! cut-off oracles, and the derived checks away from their default settings.

mod common;

use bvzeta::builtins::{diagonal_g, green_g, interior_p, rational_p};
use bvzeta::config::Config;
use bvzeta::model::AuxiliaryModel;
use bvzeta::symbol::finite_part;
use bvzeta::zeta::{
    assemble, defect_scaling, fit_gq, fit_interior, residue_b, term_gq, term_interior, traciality_check, FitPlan,
    TracialB, TERM_TOL,
};
use bvzeta::Complex64 as C;
use common::{finite, re, rel};
use std::f64::consts::PI;

const DBAR2: f64 = 1.0 / (4.0 * PI * PI);
/// Sphere integrals of the degree 0, -1, -2 terms of the interior builtin.
const SPHERE_P: [f64; 3] = [2.5 * PI, 1.4 * PI, 1.2 * PI];

/// Canonical trace of the interior builtin by cut-off at |xi| = 3.
fn cutoff_trace() -> C {
    let p = interior_p().unwrap();
    let big_r: f64 = 3.0;
    let angular = |rho: f64| -> C {
        let k = 64;
        (0..k)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / k as f64;
                p.trace_at(&[rho * phi.cos(), rho * phi.sin()])
            })
            .sum::<C>()
            * (2.0 * PI / k as f64)
    };
    let inner: C = [0.0, 0.5, 1.0, 2.0, big_r].windows(2).map(|b| finite(|r| angular(r) * r, b[0], b[1])).sum();
    (inner - re(SPHERE_P[0] * big_r * big_r / 2.0 + SPHERE_P[1] * big_r + SPHERE_P[2] * big_r.ln())) * DBAR2
}

#[test]
fn finite_part_matches_cutoff() {
    let tr = cutoff_trace();
    let fp = finite_part(&interior_p().unwrap()).unwrap();
    assert!((fp - tr).norm() < 1e-9, "{fp} vs {tr}");
}

#[test]
fn interior_l0_picks_up_log_c() {
    let p = interior_p().unwrap();
    let res = SPHERE_P[2] * DBAR2;
    let plan = FitPlan::default();
    for (m, c) in [(2, 3.0), (4, 9.0), (2, 0.25)] {
        let model = AuxiliaryModel::new(m, c, 0.0).unwrap();
        let want = cutoff_trace() - re(c.ln() / m as f64 * res);
        let closed = term_interior(&p, &model).unwrap();
        assert!((closed - want).norm() < 1e-9, "closed m={m} c={c}");
        let fit = fit_interior(&p, &model, &plan).unwrap();
        assert!((fit.l0 - want).norm() < 1e-4, "fit m={m} c={c}: {} vs {}", fit.l0, want);
    }
}

#[test]
fn rotated_ray_gives_same_l0() {
    let g = green_g().unwrap();
    let plan = FitPlan::default();
    let closed = term_gq(&g, &AuxiliaryModel::default()).unwrap();
    for theta in [-0.8, 0.5] {
        let model = AuxiliaryModel::new(2, 1.0, theta).unwrap();
        let fit = fit_gq(&g, &model, &plan).unwrap();
        assert!(rel(fit.l0, closed) < 1e-4, "theta={theta}: {} vs {}", fit.l0, closed);
    }
}

#[test]
fn config_drives_assembly() {
    let cfg = Config::from_json(
        r#"{"model": {"m": 2, "c": 2.0},
            "zeta": {"p": {"family": "builtin"}, "g": {"family": "builtin"}}}"#,
    )
    .unwrap();
    let z = cfg.zeta.as_ref().unwrap();
    let rep = assemble(&z.p.build().unwrap(), &z.g.build().unwrap(), &cfg.model, &cfg.plan, TERM_TOL).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.terms.len(), 5);
    let sum: C = rep.terms.iter().map(|t| t.closed).sum();
    assert_eq!(sum, rep.total_closed);
    // byte-identical reports on a rerun
    let again = assemble(&z.p.build().unwrap(), &z.g.build().unwrap(), &cfg.model, &cfg.plan, TERM_TOL).unwrap();
    assert_eq!(serde_json::to_string(&rep).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn defect_at_other_scales() {
    let (p, g) = (rational_p().unwrap(), green_g().unwrap());
    let model = AuxiliaryModel::default();
    let plan = FitPlan::default();
    let res = residue_b(&p, &g).unwrap();
    for c in [0.5, 5.0] {
        let r = defect_scaling(&p, &g, c, &model, &plan).unwrap();
        let want = res * (-c.ln() / 2.0);
        assert!(rel(r.fitted, want) < 1e-3, "c={c}: {} vs {}", r.fitted, want);
    }
}

#[test]
fn traciality_for_diagonal_levels() {
    let model = AuxiliaryModel::default();
    let plan = FitPlan::default();
    for l in [1, 2] {
        let r = traciality_check(&TracialB::Green(diagonal_g(l, 0.6).unwrap()), 2, &model, &plan).unwrap();
        assert!(r.difference < 1e-3, "l={l}: {r:?}");
    }
}
