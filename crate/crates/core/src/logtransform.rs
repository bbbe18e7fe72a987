//! Log-transforms (i/2pi) \oint log(lambda) f(lambda) d lambda of resolvent
//! families, the log kernels G^log, and the log symbols built from them.

use crate::boundary::{compose_exact, gplus_of_p, trprime_compose, ExpTerm, Kernel, LaguerreSgo};
use crate::closed::laguerre_log_offdiag;
use crate::error::{Error, Result};
use crate::model::{gminus_q_kernel, AuxiliaryModel};
use crate::quad::{integrate_breaks, QuadOpts};
use crate::rational::{RationalSymbol, Side};
use crate::symbol::{bracket, norm, HomogeneousTerm, LogPolySymbol};
use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

type C = Complex64;

fn cz() -> C {
    C::new(0.0, 0.0)
}

/// Keyhole around the cut ray arg lambda = theta + pi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec {
    pub theta: f64,
    /// Radius of the small circle around the origin.
    pub r0: f64,
    pub tol: f64,
    /// Subtract s (1 - lambda)^{-1} before integrating. Its log-transform is
    /// log 1 = 0, so the value is unchanged while a 1/lambda tail is removed.
    pub subtract: Option<C>,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            theta: 0.0,
            r0: 1e-3,
            tol: 1e-12,
            subtract: None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContourResult {
    pub value: C,
    /// Bound on the neglected part of the legs beyond the truncation radius.
    pub tail: f64,
    pub radius: f64,
}

/// Picks the leg truncation radius from decay probes along the ray.
fn leg_radius<F: Fn(f64) -> C>(g: &F, tol: f64) -> Result<(f64, f64)> {
    let mut prev = g(10.0).norm();
    let mut t = 10.0;
    while t < 1e40 {
        let t2 = t * 10.0;
        let v = g(t2).norm();
        if v == 0.0 {
            return Ok((t2, 0.0));
        }
        if prev > 0.0 {
            let p = (prev / v).log10();
            if p > 1.05 {
                let tail = t2 * v / (p - 1.0);
                if tail <= tol {
                    return Ok((t2, tail));
                }
            }
        }
        prev = v;
        t = t2;
    }
    let v = g(1e40).norm();
    if v * 1e40 > 1e-3 {
        return Err(Error::Divergent(
            "family does not decay faster than 1/lambda along the cut".into(),
        ));
    }
    Err(Error::TailBound {
        bound: v * 1e40,
        tol,
    })
}

/// (i/2pi) \oint_C log(lambda) f(lambda) d lambda, C the keyhole around the
/// cut, oriented so that it encircles the spectrum counterclockwise.
pub fn contour_log<F: Fn(C) -> C>(f: F, spec: ContourSpec) -> Result<ContourResult> {
    if !(spec.theta.abs() < PI) {
        return Err(Error::Config("cut angle must lie in (-pi, pi)".into()));
    }
    if !(spec.r0 > 0.0 && spec.r0 < 1.0) {
        return Err(Error::Config(format!("keyhole radius {} outside (0, 1)", spec.r0)));
    }
    let sub = spec.subtract.unwrap_or(cz());
    let g = |lam: C| f(lam) - sub / (C::new(1.0, 0.0) - lam);
    // both legs see the same values of f; only the log branch differs by 2 pi i
    let omega = -C::from_polar(1.0, spec.theta);
    let along = |t: f64| g(omega * t);
    let (radius, tail) = leg_radius(&along, spec.tol)?;
    // t in [r0, 1] directly, beyond 1 in the variable v = ln t
    let q = QuadOpts::new(spec.tol * 1e-2, 1e-13);
    let near = integrate_breaks(&along, &[spec.r0, 1.0], q);
    let vmax = radius.ln();
    let mut vb = vec![0.0];
    let mut v = 2.0;
    while v < vmax {
        vb.push(v);
        v += 2.0;
    }
    vb.push(vmax);
    let far = integrate_breaks(
        |v| {
            let t = v.exp();
            along(t) * t
        },
        &vb,
        q,
    );
    let legs_value = near.value + far.value;
    let legs_error = near.error + far.error;
    // small circle, clockwise from theta + pi to theta - pi
    let circle = integrate_breaks(
        |phi| {
            let lam = C::from_polar(spec.r0, phi);
            C::new(spec.r0.ln(), phi) * g(lam) * lam * C::new(0.0, 1.0)
        },
        &[spec.theta - PI, spec.theta, spec.theta + PI],
        q,
    );
    if !near.converged || !far.converged || !circle.converged {
        return Err(Error::Quadrature("keyhole contour".into()));
    }
    let value = omega * legs_value - C::new(0.0, 1.0) / (2.0 * PI) * circle.value;
    Ok(ContourResult {
        value,
        tail: tail + legs_error + circle.error,
        radius,
    })
}

fn glog_terms(r: f64, sign: f64) -> Vec<ExpTerm> {
    vec![ExpTerm {
        coef: C::new(sign, 0.0),
        px: 0,
        py: 0,
        rate: C::new(r, 0.0),
        singular: true,
    }]
}

fn need_unit(xp: &[f64]) -> Result<f64> {
    let s = norm(xp);
    if s < 1.0 {
        return Err(Error::Unsupported(format!(
            "log kernels are exact only for |xi'| >= 1, got {s}"
        )));
    }
    Ok(bracket(s))
}

/// G^-(log P'_1): -(1/s) e^{-[xi'] s}, s = x_n + y_n.
pub fn glog_q_kernel(model: &AuxiliaryModel, xp: &[f64]) -> Result<Kernel> {
    model.validate()?;
    Kernel::from_exp(glog_terms(need_unit(xp)?, -1.0))
}

/// G_1^log of the Dirichlet realization: +(1/s) e^{-[xi'] s}.
pub fn glog_kernel(model: &AuxiliaryModel, xp: &[f64]) -> Result<Kernel> {
    if !model.dirichlet {
        return Err(Error::Unsupported("only the Dirichlet condition is implemented".into()));
    }
    Kernel::from_exp(glog_terms(need_unit(xp)?, 1.0))
}

/// Pointwise log-transform of the G^-(Q_lambda) kernel at (x, y).
pub fn glog_q_numeric(model: &AuxiliaryModel, xp: &[f64], x: f64, y: f64, spec: ContourSpec) -> Result<C> {
    let s = x + y;
    if !(s > 0.0) {
        return Err(Error::Pole("log kernel at x_n + y_n = 0".into()));
    }
    let r2 = norm(xp).powi(2);
    let c = model.c;
    let res = contour_log(
        |lam| {
            let k = (C::new(r2, 0.0) - lam / c).sqrt();
            (-k * s).exp() / (k * 2.0 * c)
        },
        spec,
    )?;
    Ok(res.value)
}

/// Symbol of log P_1 = c |xi|^m: m log[xi] + log c.
pub fn log_symbol(model: &AuxiliaryModel, n: usize) -> Result<LogPolySymbol> {
    model.validate()?;
    let lc = C::new(model.c.ln(), 0.0);
    let m = C::new(model.m as f64, 0.0);
    LogPolySymbol::new(
        n,
        vec![(
            HomogeneousTerm::scalar(0.0, move |_| lc),
            HomogeneousTerm::scalar(0.0, move |_| m),
        )],
    )
}

/// Adds (a, b) into the pair of equal degree, creating it if needed.
fn accumulate(acc: &mut Vec<(HomogeneousTerm, HomogeneousTerm)>, a: HomogeneousTerm, b: HomogeneousTerm) -> Result<()> {
    match acc.iter_mut().find(|(x, _)| (x.degree - a.degree).abs() < 1e-9) {
        Some(slot) => {
            slot.0 = slot.0.sum(&a)?;
            slot.1 = slot.1.sum(&b)?;
        }
        None => acc.push((a, b)),
    }
    Ok(())
}

/// tr_n L(P, log P'_1) = tr_n(G^+(P) G^-(log P'_1)) at |xi'| >= 1. Each plus
/// pole a [xi']^q (b[xi'] + i xi_n)^{-k} gives -a [xi']^{q-k} (b+1)^{-k};
/// there are no log terms.
pub fn ltrace_leftover(p: &RationalSymbol, model: &AuxiliaryModel) -> Result<LogPolySymbol> {
    model.validate()?;
    let bdim = p.dim - 1;
    let mut acc = Vec::new();
    for t in p.poles.iter().filter(|t| t.side == Side::Plus) {
        let t = t.clone();
        let d = t.degree() as f64;
        let f = -1.0 / (t.b + 1.0).powi(t.k as i32);
        let a = HomogeneousTerm::scalar(d, move |xp: &[f64]| {
            let s = norm(xp);
            let w: Vec<f64> = xp.iter().map(|x| x / s).collect();
            t.ang.eval(&w) * s.powi(t.degree()) * f
        });
        accumulate(&mut acc, a, HomogeneousTerm::zero(d, 1))?;
    }
    LogPolySymbol::new(bdim, acc)
}

/// The same quantity with the order of operations exchanged: compose
/// G^+(P) with G^-(Q_lambda) first, then take the log-transform in lambda.
pub fn ltrace_leftover_numeric(p: &RationalSymbol, model: &AuxiliaryModel, xp: &[f64], spec: ContourSpec) -> Result<C> {
    need_unit(xp)?;
    // the composition decays like kappa^{-3}, so no subtraction is needed
    let gp = gplus_of_p(&p.normal_part(), xp)?;
    let f = |lam: C| -> C {
        match gminus_q_kernel(model, xp, lam) {
            Ok(k) => compose_exact(&gp, &k).and_then(|v| v.ok()).unwrap_or(C::new(f64::NAN, 0.0)),
            Err(_) => C::new(f64::NAN, 0.0),
        }
    };
    let v = contour_log(f, spec)?;
    if !v.value.re.is_finite() {
        return Err(Error::Branch("resolvent kernel evaluated on the cut".into()));
    }
    Ok(v.value)
}

/// S_off = tr'_n(G_off (log P'_1)_+); with `with_diag` the diagonal part is
/// added through its closed form c_ll (log c + 2 log 2 + 2 log[xi']).
pub fn s_off_symbol(g: &LaguerreSgo, model: &AuxiliaryModel, with_diag: bool) -> Result<LogPolySymbol> {
    model.validate()?;
    let mut acc = Vec::new();
    for (l, m, s) in &g.entries {
        let (w0, w1) = if l == m {
            if !with_diag {
                continue;
            }
            (model.c.ln() + 2.0 * LN_2, 2.0)
        } else {
            (laguerre_log_offdiag(*l, *m), 0.0)
        };
        for t in &s.terms {
            accumulate(
                &mut acc,
                t.scaled(C::new(w0, 0.0)),
                t.scaled(C::new(w1, 0.0)),
            )?;
        }
    }
    LogPolySymbol::new(g.bdim, acc)
}

/// Direct quadrature of tr'_n(G (log P'_1)_+) at one xi'.
pub fn s_off_numeric(g: &LaguerreSgo, model: &AuxiliaryModel, xp: &[f64]) -> Result<C> {
    let r2 = norm(xp).powi(2);
    let c = model.c;
    trprime_compose(g, |t| C::new((c * (r2 + t * t)).ln(), 0.0), xp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::compose_kernel_trace;
    use crate::rational::{Angular, PoleTerm};
    use crate::symbol::{res_x0, InteriorSymbol};

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn resolvent_transforms_to_log() {
        for a in [0.3, 1.0, 7.5] {
            let spec = ContourSpec {
                subtract: Some(c(1.0)),
                ..Default::default()
            };
            let v = contour_log(|l| (c(a) - l).inv(), spec).unwrap();
            assert!((v.value - c(a.ln())).norm() < 1e-10, "a={a} {}", v.value);
        }
    }

    #[test]
    fn squared_resolvent() {
        for a in [0.5, 2.0] {
            let v = contour_log(|l| (c(a) - l).powi(-2), ContourSpec::default()).unwrap();
            assert!((v.value + c(1.0 / a)).norm() < 1e-10);
        }
    }

    #[test]
    fn rotated_cut() {
        let spec = ContourSpec {
            theta: 0.7,
            ..Default::default()
        };
        let v = contour_log(|l| (c(2.0) - l).powi(-2), spec).unwrap();
        assert!((v.value + c(0.5)).norm() < 1e-10);
    }

    #[test]
    fn keyhole_radius_independence() {
        let f = |l: C| (c(1.5) - l).powi(-3) * l;
        let a = contour_log(f, ContourSpec::default()).unwrap().value;
        let b = contour_log(
            f,
            ContourSpec {
                r0: 5e-4,
                ..Default::default()
            },
        )
        .unwrap()
        .value;
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn rejects_slow_decay() {
        assert!(contour_log(|l| (c(1.0) - l).inv(), ContourSpec::default()).is_err());
    }

    #[test]
    fn kernel_log_transform_matches_glog() {
        for cc in [1.0, 2.0] {
            let m = AuxiliaryModel { c: cc, ..Default::default() };
            for (xp, x, y) in [(1.0, 0.3, 0.4), (2.5, 0.05, 0.1), (1.3, 1.0, 0.2)] {
                let v = glog_q_numeric(&m, &[xp], x, y, ContourSpec::default()).unwrap();
                let k = glog_q_kernel(&m, &[xp]).unwrap().eval(x, y);
                assert!((v - k).norm() < 1e-8, "{xp} {x} {y}: {v} vs {k}");
                let d = glog_kernel(&m, &[xp]).unwrap().eval(x, y);
                assert!((d + k).norm() < 1e-15);
            }
        }
        assert!(glog_kernel(&AuxiliaryModel::default(), &[0.5]).is_err());
    }

    #[test]
    fn log_symbol_examples() {
        let m = AuxiliaryModel::default();
        let s = log_symbol(&m, 2).unwrap();
        assert!((s.trace_at(&[3.0, 4.0]) - c(2.0 * 5f64.ln())).norm() < 1e-14);
        let m2 = AuxiliaryModel { c: 2.0, ..m };
        let s2 = log_symbol(&m2, 2).unwrap();
        assert!((s2.trace_at(&[3.0, 4.0]) - c(2.0 * 5f64.ln() + LN_2)).norm() < 1e-14);
        // res_{x,0}(p log P1) = log c res_x(p) for p of degree -n
        let p = InteriorSymbol::from_terms(2, vec![HomogeneousTerm::radial(-2.0, c(1.0))], None).unwrap();
        let lp = s2.times(&p).unwrap();
        let r = res_x0(&lp).unwrap();
        assert!((r - c(LN_2 / (2.0 * PI))).norm() < 1e-14);
    }

    fn simple_pole(dim: usize) -> RationalSymbol {
        RationalSymbol::new(
            dim,
            vec![],
            vec![PoleTerm { ang: Angular::constant(1.0), side: Side::Plus, b: 1.0, k: 1, q: 0 }],
        )
        .unwrap()
    }

    #[test]
    fn leftover_closed_vs_order_exchange() {
        let m = AuxiliaryModel::default();
        let p = RationalSymbol::new(
            2,
            vec![],
            vec![
                PoleTerm { ang: Angular::constant(1.0), side: Side::Plus, b: 1.0, k: 1, q: 0 },
                PoleTerm { ang: Angular { a0: c(0.5), a: vec![c(0.25)] }, side: Side::Plus, b: 2.0, k: 2, q: 1 },
                PoleTerm { ang: Angular::constant(3.0), side: Side::Minus, b: 1.0, k: 1, q: 0 },
            ],
        )
        .unwrap();
        let s = ltrace_leftover(&p, &m).unwrap();
        for xp in [1.0, -1.0, 2.0] {
            let a = s.trace_at(&[xp]);
            let b = ltrace_leftover_numeric(&p, &m, &[xp], ContourSpec::default()).unwrap();
            assert!((a - b).norm() < 1e-7, "{xp}: {a} {b}");
        }
        // kernel-side order: compose with the log kernel directly
        let gp = gplus_of_p(&p.normal_part(), &[1.0]).unwrap();
        let gl = glog_q_kernel(&m, &[1.0]).unwrap();
        let k = compose_kernel_trace(&gp, &gl, QuadOpts::new(1e-14, 1e-12)).unwrap();
        assert!((k - s.trace_at(&[1.0])).norm() < 1e-9);
    }

    #[test]
    fn leftover_residue_example() {
        let s = ltrace_leftover(&simple_pole(2), &AuxiliaryModel::default()).unwrap();
        let r = res_x0(&s).unwrap();
        assert!((r * 0.5 - c(-1.0 / (4.0 * PI))).norm() < 1e-14);
        let z = ltrace_leftover(&RationalSymbol::zero(2), &AuxiliaryModel::default()).unwrap();
        assert!(z.terms.is_empty());
    }

    fn sgo(entries: Vec<(usize, usize, f64)>) -> LaguerreSgo {
        let e = entries
            .into_iter()
            .map(|(l, m, a)| {
                (l, m, InteriorSymbol::from_terms(1, vec![HomogeneousTerm::radial(-1.0, c(a))], None).unwrap())
            })
            .collect();
        LaguerreSgo::new(0.0, 1, e).unwrap()
    }

    #[test]
    fn s_off_closed_vs_quadrature() {
        let m = AuxiliaryModel::default();
        let g = sgo(vec![(0, 1, 0.7), (2, 1, -0.3), (3, 0, 0.2)]);
        let s = s_off_symbol(&g, &m, false).unwrap();
        for xp in [1.0, 1.7, 4.0] {
            let a = s.trace_at(&[xp]);
            let b = s_off_numeric(&g, &m, &[xp]).unwrap();
            assert!((a - b).norm() < 1e-8, "{xp}: {a} {b}");
        }
    }

    #[test]
    fn s_off_diagonal_closed_form() {
        let m = AuxiliaryModel { c: 3.0, ..Default::default() };
        let g = sgo(vec![(1, 1, 0.5), (0, 1, 0.4)]);
        let full = s_off_symbol(&g, &m, true).unwrap();
        for xp in [1.0, 2.5] {
            let b = s_off_numeric(&g, &m, &[xp]).unwrap();
            assert!((full.trace_at(&[xp]) - b).norm() < 1e-8);
        }
        let d = s_off_symbol(&sgo(vec![(2, 2, 1.0)]), &AuxiliaryModel::default(), true).unwrap();
        let xp: f64 = 3.0;
        let want = (1.0 / xp) * (2.0 * LN_2 + 2.0 * xp.ln());
        assert!((d.trace_at(&[xp]) - c(want)).norm() < 1e-14);
        assert!(s_off_symbol(&LaguerreSgo::zero(1), &m, true).unwrap().terms.is_empty());
    }
}
