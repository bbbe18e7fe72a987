//! lambda-dependent trace densities at a frozen base point, integrated over
//! all frequency variables with the d-bar normalization.

use crate::boundary::{kernel_trace, laguerre_at_imag_jet, laguerre_poly, LaguerreSgo};
use crate::closed::{s_pm_jet, Sign};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::model::{dirichlet_g_kernel_iter, kappa_jet, AuxiliaryModel};
use crate::quad::{gauss_laguerre, integrate, integrate_breaks, GaussRule, QuadOpts};
use std::sync::OnceLock;
use crate::rational::{Angular, RationalSymbol, Side};
use crate::symbol::{bracket, chi, sphere_rule, term_sphere_integral, InteriorSymbol, DEFAULT_SPHERE_ORDER};
use num_complex::Complex64;

type C = Complex64;

fn cz() -> C {
    C::new(0.0, 0.0)
}

fn quad() -> QuadOpts {
    QuadOpts::new(0.0, 1e-13)
}

/// Radial breakpoints: the excision zone, the frequency scale of lambda and
/// powers of 4 in between, then a mapped tail.
fn radial_breaks(start: f64, scale: f64) -> Vec<f64> {
    let mut b: Vec<f64> = [0.0, 0.5, 1.0].into_iter().filter(|x| *x >= start).collect();
    if b.first() != Some(&start) {
        b.insert(0, start);
    }
    let top = 4.0 * scale.max(1.0);
    let mut x = 4.0;
    while x < top {
        b.push(x);
        x *= 4.0;
    }
    if scale > 1.0 {
        b.push(scale);
        b.sort_by(f64::total_cmp);
        b.dedup();
    }
    b.push(f64::INFINITY);
    b
}

/// Frequency scale |lambda/c|^{1/m}.
fn lambda_scale(model: &AuxiliaryModel, lambda: C) -> f64 {
    (lambda.norm() / model.c).powf(1.0 / model.m as f64)
}

/// int_{R^d} tr s(xi) w(|xi|) d-bar xi for a polyhomogeneous s and a radial
/// weight w decaying like rho^{wdecay}.
pub fn weighted_integral<W: Fn(f64) -> C>(s: &InteriorSymbol, w: W, wdecay: f64, scale: f64) -> Result<C> {
    let d = s.dim;
    let mut acc = cz();
    for t in &s.terms {
        if t.degree + d as f64 + wdecay >= 0.0 {
            return Err(Error::Divergent(format!(
                "term of degree {} against a weight decaying like rho^{wdecay}",
                t.degree
            )));
        }
        let sph = term_sphere_integral(t, d)?;
        if sph == cz() {
            continue;
        }
        let e = t.degree + d as f64 - 1.0;
        let res = integrate_breaks(|r| w(r) * (chi(r) * r.powf(e)), &radial_breaks(0.5, scale), quad());
        if !res.converged {
            return Err(Error::Quadrature("radial integral of a homogeneous term".into()));
        }
        acc += sph * res.value;
    }
    if let Some(rem) = &s.remainder {
        let rule = sphere_rule(d, DEFAULT_SPHERE_ORDER)?;
        let mut x = vec![0.0; d];
        let mut breaks = radial_breaks(0.0, scale);
        if let Some(rs) = rem.support {
            breaks.retain(|b| *b < rs);
            breaks.push(rs);
        }
        let res = integrate_breaks(
            |r| {
                let v = rule.integrate(|u| {
                    for i in 0..d {
                        x[i] = r * u[i];
                    }
                    rem.trace(&x)
                });
                v * w(r) * r.powi(d as i32 - 1)
            },
            &breaks,
            quad(),
        );
        if !res.converged {
            return Err(Error::Quadrature("radial integral of the remainder".into()));
        }
        acc += res.value;
    }
    Ok(acc)
}

/// int over the unit sphere of R^{n-1} of a(w') w'^alpha.
fn angular_integral(a: &Angular, alpha: &[u32], bdim: usize) -> Result<C> {
    let rule = sphere_rule(bdim, DEFAULT_SPHERE_ORDER)?;
    Ok(rule.integrate(|w| {
        let mono: f64 = alpha.iter().zip(w).map(|(k, x)| x.powi(*k as i32)).product();
        a.eval(w) * mono
    }))
}

/// int_0^inf rho^{e} w(rho) d rho with the boundary breakpoints.
fn radial<W: Fn(f64) -> C>(w: W, e: i32, scale: f64) -> Result<C> {
    let res = integrate_breaks(|r| w(r) * r.powi(e), &radial_breaks(0.0, scale), quad());
    if !res.converged {
        return Err(Error::Quadrature("boundary radial integral".into()));
    }
    Ok(res.value)
}

fn check_power(model: &AuxiliaryModel, order: f64, n: usize, nn: u32) -> Result<()> {
    if nn == 0 {
        return Err(Error::Config("resolvent power N must be at least 1".into()));
    }
    if !(model.m as f64 * nn as f64 > order + n as f64) {
        return Err(Error::Divergent(format!(
            "N = {nn} too small for order {order} in dimension {n} (need N > (order+n)/m)"
        )));
    }
    Ok(())
}

fn kap(model: &AuxiliaryModel, rho: f64, lambda: C, nn: u32) -> Jet {
    kappa_jet(model, rho * rho, lambda, nn as usize)
}

/// int tr p(xi) (p1(xi) - lambda)^{-N} d-bar xi.
pub fn density_interior(p: &InteriorSymbol, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    model.validate()?;
    if p.is_zero() {
        return Ok(cz());
    }
    check_power(model, p.order, p.dim, nn)?;
    let m = model.m as i32;
    let c = model.c;
    let w = |r: f64| (C::new(c * r.powi(m), 0.0) - lambda).powi(-(nn as i32));
    weighted_integral(p, w, -(m as f64) * nn as f64, lambda_scale(model, lambda))
}

/// tr_n(G^+(P) G^-(Q^N_lambda)) at |xi'| = rho for one plus pole, without
/// the angular factor: [xi']^q k / (2 c kappa (b[xi'] + kappa)^{k+1}).
fn leftover_radial(b: f64, k: u32, q: i32, model: &AuxiliaryModel, rho: f64, lambda: C, nn: u32) -> C {
    let r = bracket(rho);
    let kj = kap(model, rho, lambda, nn);
    let den = &kj * &kj.add_const(C::new(b * r, 0.0)).powi(k as i32 + 1);
    den.recip().coeff(nn as usize - 1) * (r.powi(q) * k as f64 / (2.0 * model.c))
}

/// The same trace at a point xi', pole data included.
pub fn leftover_trace_at(p: &RationalSymbol, model: &AuxiliaryModel, xp: &[f64], lambda: C, nn: u32) -> C {
    let rho = crate::symbol::norm(xp);
    let w: Vec<f64> = xp.iter().map(|x| if rho > 0.0 { x / rho } else { 0.0 }).collect();
    p.poles
        .iter()
        .filter(|t| t.side == Side::Plus)
        .map(|t| t.ang.eval(&w) * leftover_radial(t.b, t.k, t.q, model, rho, lambda, nn))
        .sum()
}

/// int tr_n(G^+(P) G^-(Q^N_lambda)) d-bar xi'. The leftover L(P, Q^N) enters
/// the trace of P_+ Q^N_+ with a minus sign.
pub fn density_leftover(p: &RationalSymbol, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    model.validate()?;
    model_m2(model)?;
    let plus: Vec<_> = p.poles.iter().filter(|t| t.side == Side::Plus).collect();
    if plus.is_empty() {
        return Ok(cz());
    }
    let n = p.dim;
    check_power(model, p.order() as f64, n, nn)?;
    let scale = lambda_scale(model, lambda);
    let mut acc = cz();
    for t in plus {
        let a = angular_integral(&t.ang, &[], n - 1)?;
        if a == cz() {
            continue;
        }
        let v = radial(|r| leftover_radial(t.b, t.k, t.q, model, r, lambda, nn), n as i32 - 2, scale)?;
        acc += a * v;
    }
    Ok(acc)
}

fn model_m2(model: &AuxiliaryModel) -> Result<()> {
    if model.m != 2 {
        return Err(Error::Unsupported("boundary densities need the m = 2 model".into()));
    }
    Ok(())
}

/// int phi-hat_l conj phi-hat_m (p1 - lambda)^{-N} d-bar xi_n at |xi'| = rho,
/// from the closed forms s^+-.
pub fn gq_inner(l: usize, m: usize, model: &AuxiliaryModel, rho: f64, lambda: C, nn: u32) -> C {
    let r = bracket(rho);
    let kj = kap(model, rho, lambda, nn);
    let s = &s_pm_jet(Sign::Plus, l, m, r, &kj) + &s_pm_jet(Sign::Minus, l, m, r, &kj);
    (&s * &kj.recip()).coeff(nn as usize - 1) * (r / model.c)
}

/// int tr g(xi', xi_n, xi_n) (p1(xi) - lambda)^{-N} d-bar xi.
pub fn density_gq(g: &LaguerreSgo, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    model.validate()?;
    model_m2(model)?;
    if g.is_zero() {
        return Ok(cz());
    }
    check_power(model, g.order, g.bdim + 1, nn)?;
    let scale = lambda_scale(model, lambda);
    let mut acc = cz();
    for (l, m, s) in &g.entries {
        acc += weighted_integral(s, |r| gq_inner(*l, *m, model, r, lambda, nn), -2.0 * nn as f64, scale)?;
    }
    Ok(acc)
}

/// tr_n(P_+ G^{(N)}_lambda) at |xi'| = rho for the Dirichlet model, per term:
/// polynomial a xi'^alpha xi_n^j gives -(1/c) (i kappa)^j xi'^alpha/(4 kappa^2),
/// a pole term of either side gives -(1/c) a [xi']^q (b[xi'] + kappa)^{-k}/(4 kappa^2).
fn pg_poly_radial(alpha_n: u32, model: &AuxiliaryModel, rho: f64, lambda: C, nn: u32) -> C {
    let kj = kap(model, rho, lambda, nn);
    let ik = kj.scale(C::new(0.0, 1.0)).powi(alpha_n as i32);
    let v = &ik * &kj.powi(-2);
    v.coeff(nn as usize - 1) * (-0.25 / model.c)
}

fn pg_pole_radial(b: f64, k: u32, q: i32, model: &AuxiliaryModel, rho: f64, lambda: C, nn: u32) -> C {
    let r = bracket(rho);
    let kj = kap(model, rho, lambda, nn);
    let v = &kj.add_const(C::new(b * r, 0.0)).powi(-(k as i32)) * &kj.powi(-2);
    v.coeff(nn as usize - 1) * (-0.25 * r.powi(q) / model.c)
}

/// tr_n(P_+ G^{(N)}_lambda) at a point xi'.
pub fn pg_trace_at(p: &RationalSymbol, model: &AuxiliaryModel, xp: &[f64], lambda: C, nn: u32) -> C {
    let rho = crate::symbol::norm(xp);
    let w: Vec<f64> = xp.iter().map(|x| if rho > 0.0 { x / rho } else { 0.0 }).collect();
    let mut v = cz();
    for t in &p.poly {
        let mono: f64 = t.alpha.iter().zip(xp).map(|(k, x)| x.powi(*k as i32)).product();
        v += t.ang.eval(&w) * mono * pg_poly_radial(t.alpha_n, model, rho, lambda, nn);
    }
    for t in &p.poles {
        v += t.ang.eval(&w) * pg_pole_radial(t.b, t.k, t.q, model, rho, lambda, nn);
    }
    v
}

/// int tr_n(P_+ G^{(N)}_lambda) d-bar xi' for the Dirichlet model.
pub fn density_pg(p: &RationalSymbol, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    model.validate()?;
    model_m2(model)?;
    if !model.dirichlet {
        return Err(Error::Unsupported("only the Dirichlet condition is implemented".into()));
    }
    if p.is_zero() {
        return Ok(cz());
    }
    let n = p.dim;
    check_power(model, p.order() as f64, n, nn)?;
    let scale = lambda_scale(model, lambda);
    let mut acc = cz();
    for t in &p.poly {
        let a = angular_integral(&t.ang, &t.alpha, n - 1)?;
        if a == cz() {
            continue;
        }
        let e = n as i32 - 2 + t.alpha.iter().sum::<u32>() as i32;
        acc += a * radial(|r| pg_poly_radial(t.alpha_n, model, r, lambda, nn), e, scale)?;
    }
    for t in &p.poles {
        let a = angular_integral(&t.ang, &[], n - 1)?;
        if a == cz() {
            continue;
        }
        acc += a * radial(|r| pg_pole_radial(t.b, t.k, t.q, model, r, lambda, nn), n as i32 - 2, scale)?;
    }
    Ok(acc)
}

/// tr_n(phi_l phi_m-entry composed with G^{(N)}_lambda) at |xi'| = rho:
/// -(1/(2 c kappa)) phi-hat_l(-i kappa) phi-hat_m(-i kappa).
pub fn gg_inner(l: usize, m: usize, model: &AuxiliaryModel, rho: f64, lambda: C, nn: u32) -> C {
    let r = bracket(rho);
    let kj = kap(model, rho, lambda, nn);
    let v = &(&laguerre_at_imag_jet(l, r, &kj) * &laguerre_at_imag_jet(m, r, &kj)) * &kj.recip();
    v.coeff(nn as usize - 1) * (-0.5 / model.c)
}

/// int tr_n(G G^{(N)}_lambda) d-bar xi' for the Dirichlet model.
pub fn density_gg(g: &LaguerreSgo, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    model.validate()?;
    model_m2(model)?;
    if !model.dirichlet {
        return Err(Error::Unsupported("only the Dirichlet condition is implemented".into()));
    }
    if g.is_zero() {
        return Ok(cz());
    }
    check_power(model, g.order, g.bdim + 1, nn)?;
    let scale = lambda_scale(model, lambda);
    let mut acc = cz();
    for (l, m, s) in &g.entries {
        acc += weighted_integral(s, |r| gg_inner(*l, *m, model, r, lambda, nn), -2.0 * nn as f64 - 1.0, scale)?;
    }
    Ok(acc)
}

/// Gauss-Laguerre rule shared by the kernel-side compositions.
fn laguerre_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_laguerre(48))
}

/// phi_l(x) e^{r x}: the polynomial factor of the Laguerre function.
fn laguerre_poly_part(l: usize, r: f64, x: f64) -> f64 {
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (2.0 * r).sqrt() * laguerre_poly(l, 2.0 * r * x)
}

/// tr(Q^N_+ G) for one Laguerre entry at |xi'| = rho from the free
/// normal-variable kernel (1/(2 c kappa)) e^{-kappa |x - z|}. With u = |x - z|
/// the double integral runs over [0, inf)^2 with weights e^{-2 r z} and
/// e^{-(Re kappa + r) u}, and is done by a tensor Gauss-Laguerre rule.
pub fn qg_inner_kernel(l: usize, m: usize, model: &AuxiliaryModel, rho: f64, lambda: C, nn: u32) -> Result<C> {
    let r = bracket(rho);
    let kj = kap(model, rho, lambda, nn);
    let k0 = kj.value();
    if !(k0.re > 0.0) {
        return Err(Error::Branch(format!("Re kappa = {} at lambda = {lambda}", k0.re)));
    }
    let pre = kj.scale(C::new(2.0 * model.c, 0.0)).recip();
    let shifted = kj.add_const(C::new(-k0.re, 0.0));
    let len = nn as usize;
    let rule = laguerre_rule();
    let (az, au) = (2.0 * r, k0.re + r);
    let mut acc = cz();
    for (tu, wu) in rule.nodes.iter().zip(&rule.weights) {
        let u = tu / au;
        let q = (&pre * &shifted.scale(C::new(-u, 0.0)).exp()).coeff(len - 1);
        let mut inner = 0.0;
        for (tz, wz) in rule.nodes.iter().zip(&rule.weights) {
            let z = tz / az;
            inner += wz
                * (laguerre_poly_part(l, r, z) * laguerre_poly_part(m, r, z + u)
                    + laguerre_poly_part(l, r, z + u) * laguerre_poly_part(m, r, z));
        }
        acc += q * (wu * inner / az);
    }
    Ok(acc / au)
}

/// tr(G^{(N)}_lambda G) for one entry: the Dirichlet kernel is separable, so
/// the trace is -(1/(2 c kappa)) F_l F_m with F_l = int phi_l(x) e^{-kappa x} dx
/// computed by Gauss-Laguerre quadrature on jets.
pub fn gg_inner_kernel(l: usize, m: usize, model: &AuxiliaryModel, rho: f64, lambda: C, nn: u32) -> Result<C> {
    if !model.dirichlet {
        return Err(Error::Unsupported("only the Dirichlet condition is implemented".into()));
    }
    let r = bracket(rho);
    let kj = kap(model, rho, lambda, nn);
    let k0 = kj.value();
    if !(k0.re > 0.0) {
        return Err(Error::Branch(format!("Re kappa = {} at lambda = {lambda}", k0.re)));
    }
    let len = nn as usize;
    let a = k0.re + r;
    let shifted = kj.add_const(C::new(-k0.re, 0.0));
    let rule = laguerre_rule();
    let transform = |l: usize| {
        let mut f = Jet::constant(cz(), len);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = t / a;
            let e = shifted.scale(C::new(-x, 0.0)).exp();
            f = &f + &e.scale(C::new(w * laguerre_poly_part(l, r, x) / a, 0.0));
        }
        f
    };
    let v = &(&transform(l) * &transform(m)) * &kj.scale(C::new(2.0 * model.c, 0.0)).recip();
    Ok(-v.coeff(len - 1))
}

/// Right-side density tr(R^{(N)}_lambda G) = tr(Q^N_+ G) + tr(G^{(N)}_lambda G),
/// computed entirely from normal-variable kernels.
pub fn density_rg_kernel(g: &LaguerreSgo, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    model.validate()?;
    model_m2(model)?;
    if g.is_zero() {
        return Ok(cz());
    }
    check_power(model, g.order, g.bdim + 1, nn)?;
    let scale = lambda_scale(model, lambda);
    let mut acc = cz();
    for (l, m, s) in &g.entries {
        let err = std::cell::RefCell::new(None);
        let v = weighted_integral(
            s,
            |r| {
                let a = qg_inner_kernel(*l, *m, model, r, lambda, nn);
                let b = gg_inner_kernel(*l, *m, model, r, lambda, nn);
                match (a, b) {
                    (Ok(a), Ok(b)) => a + b,
                    (Err(e), _) | (_, Err(e)) => {
                        err.borrow_mut().get_or_insert(e);
                        cz()
                    }
                }
            },
            -2.0 * nn as f64,
            scale,
        )?;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        acc += v;
    }
    Ok(acc)
}

/// Left-side density tr(G R^{(N)}_lambda) from the closed forms.
pub fn density_gr(g: &LaguerreSgo, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    Ok(density_gq(g, model, lambda, nn)? + density_gg(g, model, lambda, nn)?)
}

/// Left-side density tr(P_+ R^{(N)}_lambda) for a multiplier a(w') that does
/// not depend on xi_n: interior part plus the P_+ G part.
pub fn density_pr(a: &Angular, n: usize, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    let p = RationalSymbol::new(
        n,
        vec![crate::rational::PolyTerm {
            ang: a.clone(),
            alpha: vec![],
            alpha_n: 0,
        }],
        vec![],
    )?;
    Ok(density_interior(&p.interior()?, model, lambda, nn)? + density_pg(&p, model, lambda, nn)?)
}

/// Right-side density tr(R^{(N)}_lambda P_+): the normal integral of the free
/// resolvent is done first in closed form and tr(G_lambda P_+) is the
/// numerical normal trace of the Dirichlet kernel times a(w').
pub fn density_rp(a: &Angular, n: usize, model: &AuxiliaryModel, lambda: C, nn: u32) -> Result<C> {
    model.validate()?;
    model_m2(model)?;
    check_power(model, 0.0, n, nn)?;
    let ang = angular_integral(a, &[], n - 1)?;
    let scale = lambda_scale(model, lambda);
    let err = std::cell::RefCell::new(None);
    let v = radial(
        |r| {
            let kj = kap(model, r, lambda, nn);
            let free = kj.scale(C::new(2.0 * model.c, 0.0)).recip().coeff(nn as usize - 1);
            let g = dirichlet_g_kernel_iter(model, &[r], lambda, nn).and_then(|k| kernel_trace(&k));
            match g {
                Ok(g) => free + g,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    cz()
                }
            }
        },
        n as i32 - 2,
        scale,
    )?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(ang * v)
}

/// Integral over the normal line used as the quadrature oracle for gq_inner.
pub fn gq_inner_quad(l: usize, m: usize, model: &AuxiliaryModel, rho: f64, lambda: C) -> Result<C> {
    let r = bracket(rho);
    let c = model.c;
    crate::boundary::line_integral(
        |t| {
            let a = crate::boundary::laguerre(l, r, t).unwrap() * crate::boundary::laguerre(m, r, t).unwrap().conj();
            a / (C::new(c * (rho * rho + t * t), 0.0) - lambda)
        },
        r,
    )
}

/// Plain 1-D integral helper shared by tests of the radial closed forms.
pub fn radial_quad<F: FnMut(f64) -> C>(f: F, a: f64, b: f64) -> C {
    integrate(f, a, b, QuadOpts::new(0.0, 1e-13)).value
}
