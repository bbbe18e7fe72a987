//! The five closed-form terms of the basic zeta coefficient C0(B, P1) at a
//! frozen base point, their fitted counterparts, and the derived checks
//! (defect scaling, power consistency, traciality).
//!
//! All values are pointwise densities: integrals over the manifold or its
//! boundary are replaced by the value at the frozen point.

use crate::boundary::{compose_kernel_trace, laguerre, line_integral, split_diag_off, LaguerreSgo};
use crate::closed::two_pi_log2_quad;
use crate::densities::{
    density_gg, density_gq, density_gr, density_interior, density_leftover, density_pg, density_pr, density_rg_kernel,
    density_rp,
};
use crate::error::{Error, Result};
use crate::fit::{extract_l0, fit_expansion, geometric_grid, ExpansionFit, FitSpec, RaySweep};
use crate::logtransform::{glog_kernel, log_symbol, ltrace_leftover, s_off_symbol};
use crate::model::AuxiliaryModel;
use crate::quad::QuadOpts;
use crate::rational::{Angular, RationalSymbol};
use crate::symbol::{
    finite_part, res_x, res_x0, sphere_integral, HomogeneousTerm, InteriorSymbol, Remainder, DEFAULT_SPHERE_ORDER,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C = Complex64;

fn cz() -> C {
    C::new(0.0, 0.0)
}

/// Grid, resolvent power and tail columns used for every fitted family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPlan {
    pub mu0: f64,
    pub ratio: f64,
    pub count: usize,
    /// Fits are made at N and N+1.
    pub power: u32,
    pub tail: usize,
    pub tail_log: bool,
    /// Allowed |l0(N) - l0(N+1)|.
    pub consistency: f64,
    #[serde(default = "one")]
    pub jobs: usize,
}

fn one() -> usize {
    1
}

impl Default for FitPlan {
    fn default() -> Self {
        FitPlan {
            mu0: 4.0,
            ratio: 1.35,
            count: 24,
            power: 2,
            tail: 4,
            tail_log: true,
            consistency: 1e-4,
            jobs: 1,
        }
    }
}

impl FitPlan {
    /// The mu grid for a model: the configured grid times c^{1/m}, so that
    /// |lambda/c| runs over the same values for every scale c.
    pub fn grid(&self, model: &AuxiliaryModel) -> Result<Vec<f64>> {
        let s = model.c.powf(1.0 / model.m as f64);
        Ok(geometric_grid(self.mu0, self.ratio, self.count)?.into_iter().map(|m| m * s).collect())
    }
}

/// Fits of one family at N and N+1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyFit {
    pub at_n: ExpansionFit,
    pub at_next: ExpansionFit,
    pub l0: C,
    pub consistency: f64,
    #[serde(skip)]
    pub sweeps: Vec<RaySweep>,
}

/// Samples `f(lambda, N)` at N and N+1 and extracts l0.
pub fn fit_family<F>(model: &AuxiliaryModel, plan: &FitPlan, sigma: f64, n: usize, f: F) -> Result<FamilyFit>
where
    F: Fn(C, u32) -> Result<C> + Sync,
{
    let mu = plan.grid(model)?;
    let spec = FitSpec::new(sigma, n).with_tail(plan.tail, plan.tail_log);
    let mut fits = Vec::with_capacity(2);
    let mut sweeps = Vec::with_capacity(2);
    for nn in [plan.power, plan.power + 1] {
        let s = RaySweep::sample(model, &mu, nn, plan.jobs, |lam| f(lam, nn))?;
        fits.push(fit_expansion(&s, &spec)?);
        sweeps.push(s);
    }
    let at_next = fits.pop().unwrap();
    let at_n = fits.pop().unwrap();
    let rep = extract_l0(&at_n, &at_next, plan.consistency)?;
    Ok(FamilyFit {
        l0: rep.l0,
        consistency: rep.difference,
        at_n,
        at_next,
        sweeps,
    })
}

/// Sum of the fiber traces of several symbols on the same space.
pub fn sum_symbols(dim: usize, syms: &[&InteriorSymbol]) -> Result<InteriorSymbol> {
    let mut terms = Vec::new();
    let mut rems: Vec<Remainder> = Vec::new();
    for s in syms {
        if s.dim != dim {
            return Err(Error::InvalidSymbol("dimension mismatch in a sum".into()));
        }
        for t in &s.terms {
            terms.push(HomogeneousTerm::scalar(t.degree, {
                let t = t.clone();
                move |xi: &[f64]| t.trace(xi)
            }));
        }
        if let Some(r) = &s.remainder {
            rems.push(r.clone());
        }
    }
    let remainder = match rems.len() {
        0 => None,
        1 => Some(rems.pop().unwrap()),
        _ => {
            let decay = rems.iter().map(|r| r.decay).try_fold(f64::MIN, |a, d| d.map(|d| a.max(d)));
            let bound = rems.iter().map(|r| r.bound).sum();
            let support = rems.iter().map(|r| r.support).try_fold(0.0f64, |a, s| s.map(|s| a.max(s)));
            let r = Remainder::scalar(decay, bound, move |xi: &[f64]| rems.iter().map(|r| r.trace(xi)).sum());
            Some(match support {
                Some(s) => r.with_support(s),
                None => r,
            })
        }
    };
    InteriorSymbol::from_terms(dim, terms, remainder)
}

/// tr_n g = sum_l c_ll as a symbol on R^{n-1}.
pub fn normal_trace_symbol(g: &LaguerreSgo) -> Result<InteriorSymbol> {
    let diag: Vec<&InteriorSymbol> = g.entries.iter().filter(|(l, m, _)| l == m).map(|e| &e.2).collect();
    if diag.is_empty() {
        return Ok(InteriorSymbol::zero(g.bdim));
    }
    sum_symbols(g.bdim, &diag)
}

/// TR_x p - (1/m) res_{x,0}(p log p1).
pub fn term_interior(p: &InteriorSymbol, model: &AuxiliaryModel) -> Result<C> {
    if p.is_zero() {
        return Ok(cz());
    }
    let lp = log_symbol(model, p.dim)?.times(p)?;
    Ok(finite_part(p)? - res_x0(&lp)? / model.m as f64)
}

/// (1/2) res_{x'} tr_n L(P, log P'_1).
pub fn term_leftover(p: &RationalSymbol, model: &AuxiliaryModel) -> Result<C> {
    if p.poles.is_empty() {
        return Ok(cz());
    }
    Ok(res_x0(&ltrace_leftover(p, model)?)? * 0.5)
}

/// Both routes to the G-term: the direct one, TR_{x'} tr_n g minus half the
/// residue of tr'_n(G (log P'_1)_+) with closed-form Laguerre log integrals,
/// and the split one, which takes log 2 from the quadrature of the logarithmic
/// integral over the real line and the off-diagonal weights from quadrature.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GqRoutes {
    pub direct: C,
    pub split: C,
}

pub fn term_gq_routes(g: &LaguerreSgo, model: &AuxiliaryModel) -> Result<GqRoutes> {
    model.validate()?;
    if g.is_zero() {
        return Ok(GqRoutes { direct: cz(), split: cz() });
    }
    let tr = normal_trace_symbol(g)?;
    let tr_fp = finite_part(&tr)?;
    let direct = tr_fp - res_x0(&s_off_symbol(g, model, true)?)? * 0.5;

    let (_, off) = split_diag_off(g);
    let ln2 = two_pi_log2_quad() / (2.0 * PI);
    let res_tr = res_x(&tr)?;
    let mut split = tr_fp - res_tr * (0.5 * model.c.ln() + ln2);
    for (l, m, s) in &off.entries {
        let res = res_x(s)?;
        if res == cz() {
            continue;
        }
        let w = line_integral(
            |t| laguerre(*l, 1.0, t).unwrap() * laguerre(*m, 1.0, t).unwrap().conj() * (1.0 + t * t).ln(),
            1.0,
        )?;
        split -= res * w * 0.5;
    }
    Ok(GqRoutes { direct, split })
}

/// Agreement required between the two G-term routes.
pub const GQ_ROUTE_TOL: f64 = 1e-6;

pub fn term_gq(g: &LaguerreSgo, model: &AuxiliaryModel) -> Result<C> {
    let r = term_gq_routes(g, model)?;
    let gap = (r.direct - r.split).norm();
    if gap > GQ_ROUTE_TOL {
        return Err(Error::Inconsistent(gap));
    }
    Ok(r.direct)
}

/// Symbol h(xi') = int p''(xi', xi_n) arctan(xi_n/[xi'])/xi_n d-bar xi_n of
/// the pole part at |xi'| = 1, restricted to the degree 1-n poles and
/// integrated over the unit sphere of R^{n-1}.
fn pg_residue(p: &RationalSymbol) -> Result<C> {
    let n = p.dim;
    let mut acc = cz();
    for t in p.poles.iter().filter(|t| t.degree() == 1 - n as i32) {
        let w: Vec<f64> = vec![0.0; n - 1];
        let mut unit = t.clone();
        unit.ang = Angular::constant(1.0);
        let h = line_integral(
            |x| {
                let a = if x == 0.0 { 1.0 } else { x.atan() / x };
                unit.eval_len(&w, 1.0, x) * a
            },
            1.0,
        )?;
        let ang = sphere_integral(|u| t.ang.eval(u), n - 1, DEFAULT_SPHERE_ORDER)?;
        acc += ang * h;
    }
    Ok(acc)
}

/// -(1/2) res tr(P_+ G_1^log) for the Dirichlet model. The polynomial part
/// has degree >= 0 and never reaches the residue.
pub fn term_pg(p: &RationalSymbol, model: &AuxiliaryModel) -> Result<C> {
    model.validate()?;
    if !model.dirichlet {
        return Err(Error::Unsupported("only the Dirichlet condition is implemented".into()));
    }
    Ok(pg_residue(p)? * -0.5)
}

/// Closed form of int (b + i t)^{-1} arctan(t)/t d-bar t.
pub fn pg_weight_k1(b: f64) -> f64 {
    (1.0 + b).ln() / (2.0 * b)
}

/// tr_n(phi_l phi_m-entry o G_1^log) for the Dirichlet model: independent of
/// [xi'], equal to (-1)^{l+m}/(l+m+1).
pub fn gg_weight(l: usize, m: usize) -> f64 {
    let s = if (l + m).is_multiple_of(2) { 1.0 } else { -1.0 };
    s / (l + m + 1) as f64
}

/// -(1/2) res tr_n(G G_1^log).
pub fn term_gg(g: &LaguerreSgo, model: &AuxiliaryModel) -> Result<C> {
    model.validate()?;
    if !model.dirichlet {
        return Err(Error::Unsupported("only the Dirichlet condition is implemented".into()));
    }
    let mut acc = cz();
    for (l, m, s) in &g.entries {
        acc += res_x(s)? * gg_weight(*l, *m);
    }
    Ok(acc * -0.5)
}

/// tr_n(G G_1^log) at xi' by quadrature of the kernel composition.
pub fn gg_trace_numeric(g: &LaguerreSgo, model: &AuxiliaryModel, xp: &[f64]) -> Result<C> {
    compose_kernel_trace(&glog_kernel(model, xp)?, &g.kernel_at(xp)?, QuadOpts::new(0.0, 1e-12))
}

/// res(B) = res_x(p) + res_{x'}(tr_n g).
pub fn residue_b(p: &RationalSymbol, g: &LaguerreSgo) -> Result<C> {
    let rp = if p.is_zero() { cz() } else { res_x(&p.interior()?)? };
    Ok(rp + res_x(&normal_trace_symbol(g)?)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermReport {
    pub name: String,
    pub closed: C,
    pub fitted: C,
    /// |l0(N) - l0(N+1)| of the fit.
    pub consistency: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl TermReport {
    fn new(name: &str, closed: C, fit: &FamilyFit, tol: f64, relative: bool) -> TermReport {
        let d = (closed - fit.l0).norm();
        let scale = if relative { closed.norm().max(1e-300) } else { 1.0 };
        let discrepancy = if relative && closed.norm() == 0.0 { d } else { d / scale };
        TermReport {
            name: name.into(),
            closed,
            fitted: fit.l0,
            consistency: fit.consistency,
            discrepancy,
            tolerance: tol,
            pass: discrepancy <= tol,
        }
    }
}

/// Per-term acceptance: relative for the G term, absolute otherwise.
pub const TERM_TOL: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZetaReport {
    pub model: AuxiliaryModel,
    pub terms: Vec<TermReport>,
    pub gq_routes: GqRoutes,
    pub total_closed: C,
    pub total_fitted: C,
    pub pass: bool,
}

/// Fitted family l0 of (P Q^N)_+ interior density.
pub fn fit_interior(p: &InteriorSymbol, model: &AuxiliaryModel, plan: &FitPlan) -> Result<FamilyFit> {
    fit_family(model, plan, p.order, p.dim, |l, nn| density_interior(p, model, l, nn))
}

/// Fitted l0 of -L(P, Q^N).
pub fn fit_leftover(p: &RationalSymbol, model: &AuxiliaryModel, plan: &FitPlan) -> Result<FamilyFit> {
    fit_family(model, plan, p.order() as f64, p.dim, |l, nn| {
        Ok(-density_leftover(p, model, l, nn)?)
    })
}

pub fn fit_gq(g: &LaguerreSgo, model: &AuxiliaryModel, plan: &FitPlan) -> Result<FamilyFit> {
    fit_family(model, plan, g.order, g.bdim + 1, |l, nn| density_gq(g, model, l, nn))
}

pub fn fit_pg(p: &RationalSymbol, model: &AuxiliaryModel, plan: &FitPlan) -> Result<FamilyFit> {
    fit_family(model, plan, p.order() as f64, p.dim, |l, nn| density_pg(p, model, l, nn))
}

pub fn fit_gg(g: &LaguerreSgo, model: &AuxiliaryModel, plan: &FitPlan) -> Result<FamilyFit> {
    fit_family(model, plan, g.order, g.bdim + 1, |l, nn| density_gg(g, model, l, nn))
}

/// Five closed-form terms against their fitted l0 values; `tol` is the
/// per-term acceptance (see `TERM_TOL`).
pub fn assemble(p: &RationalSymbol, g: &LaguerreSgo, model: &AuxiliaryModel, plan: &FitPlan, tol: f64) -> Result<ZetaReport> {
    model.validate()?;
    if p.dim != g.bdim + 1 {
        return Err(Error::Config("P and G live in different dimensions".into()));
    }
    let pi = p.interior()?;
    let routes = term_gq_routes(g, model)?;
    let mut terms = vec![
        TermReport::new("interior", term_interior(&pi, model)?, &fit_interior(&pi, model, plan)?, tol, false),
        TermReport::new("leftover", term_leftover(p, model)?, &fit_leftover(p, model, plan)?, tol, false),
        TermReport::new("singular_green", term_gq(g, model)?, &fit_gq(g, model, plan)?, tol, true),
        TermReport::new("p_glog", term_pg(p, model)?, &fit_pg(p, model, plan)?, tol, false),
        TermReport::new("g_glog", term_gg(g, model)?, &fit_gg(g, model, plan)?, tol, false),
    ];
    terms.iter_mut().for_each(|t| t.pass &= t.consistency <= plan.consistency);
    let total_closed = terms.iter().map(|t| t.closed).sum();
    let total_fitted = terms.iter().map(|t| t.fitted).sum();
    let pass = terms.iter().all(|t| t.pass) && (routes.direct - routes.split).norm() <= GQ_ROUTE_TOL;
    Ok(ZetaReport {
        model: *model,
        terms,
        gq_routes: routes,
        total_closed,
        total_fitted,
        pass,
    })
}

/// Fitted C0(B, P1) as the sum of the five family l0 values.
pub fn fitted_c0(p: &RationalSymbol, g: &LaguerreSgo, model: &AuxiliaryModel, plan: &FitPlan) -> Result<C> {
    let pi = p.interior()?;
    let mut acc = cz();
    if !p.is_zero() {
        acc += fit_interior(&pi, model, plan)?.l0;
        if p.poles.iter().any(|t| t.side == crate::rational::Side::Plus) {
            acc += fit_leftover(p, model, plan)?.l0;
        }
        acc += fit_pg(p, model, plan)?.l0;
    }
    if !g.is_zero() {
        acc += fit_gq(g, model, plan)?.l0 + fit_gg(g, model, plan)?.l0;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DefectReport {
    pub c: f64,
    pub fitted: C,
    pub closed: C,
    pub residue: C,
}

/// C0(B, c P1) - C0(B, P1) fitted, against -(log c/m) res(B).
pub fn defect_scaling(p: &RationalSymbol, g: &LaguerreSgo, c: f64, model: &AuxiliaryModel, plan: &FitPlan) -> Result<DefectReport> {
    let scaled = AuxiliaryModel { c: model.c * c, ..*model };
    scaled.validate()?;
    let fitted = fitted_c0(p, g, &scaled, plan)? - fitted_c0(p, g, model, plan)?;
    let residue = residue_b(p, g)?;
    Ok(DefectReport {
        c,
        fitted,
        closed: residue * (-c.ln() / model.m as f64),
        residue,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PowerReport {
    pub m2: C,
    pub m4: C,
    pub closed_m2: C,
    pub closed_m4: C,
}

/// Interior l0 with P1 = c|xi|^2 against P1^2 = c^2 |xi|^4.
pub fn power_consistency(p: &InteriorSymbol, c: f64, plan: &FitPlan) -> Result<PowerReport> {
    let m2 = AuxiliaryModel::new(2, c, 0.0)?;
    let m4 = AuxiliaryModel::new(4, c * c, 0.0)?;
    Ok(PowerReport {
        m2: fit_interior(p, &m2, plan)?.l0,
        m4: fit_interior(p, &m4, plan)?.l0,
        closed_m2: term_interior(p, &m2)?,
        closed_m4: term_interior(p, &m4)?,
    })
}

/// Order-0 operators B of the traciality suite.
#[derive(Clone, Debug)]
pub enum TracialB {
    Identity,
    /// Singular Green operator in Laguerre form.
    Green(LaguerreSgo),
    /// Multiplier a(w') independent of xi_n, acting as P_+.
    Multiplier(Angular),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceReport {
    pub left: C,
    pub right: C,
    pub difference: f64,
}

/// l0(B R_lambda) - l0(R_lambda B) for the Dirichlet realization R_lambda,
/// each side from its own density.
pub fn traciality_check(b: &TracialB, n: usize, model: &AuxiliaryModel, plan: &FitPlan) -> Result<TraceReport> {
    let (left, right) = match b {
        TracialB::Identity => {
            // B R and R B are the same family
            let f = fit_family(model, plan, 0.0, n, |l, nn| {
                density_pr(&Angular::constant(1.0), n, model, l, nn)
            })?;
            (f.l0, f.l0)
        }
        TracialB::Green(g) => {
            if g.bdim + 1 != n {
                return Err(Error::Config("G lives in another dimension".into()));
            }
            let a = fit_family(model, plan, g.order, n, |l, nn| density_gr(g, model, l, nn))?;
            let b = fit_family(model, plan, g.order, n, |l, nn| density_rg_kernel(g, model, l, nn))?;
            (a.l0, b.l0)
        }
        TracialB::Multiplier(a) => {
            let l = fit_family(model, plan, 0.0, n, |l, nn| density_pr(a, n, model, l, nn))?;
            let r = fit_family(model, plan, 0.0, n, |l, nn| density_rp(a, n, model, l, nn))?;
            (l.l0, r.l0)
        }
    };
    Ok(TraceReport {
        left,
        right,
        difference: (left - right).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{diagonal_g, green_g, interior_p, radial_power, rational_p};
    use crate::rational::{PoleTerm, Side};
    use std::f64::consts::LN_2;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    fn single_pole(b: f64, k: u32, q: i32, side: Side) -> RationalSymbol {
        RationalSymbol::new(2, vec![], vec![PoleTerm { ang: Angular::constant(1.0), side, b, k, q }]).unwrap()
    }

    #[test]
    fn interior_term_scaling() {
        let p = interior_p().unwrap();
        let m1 = AuxiliaryModel::default();
        let m2 = AuxiliaryModel::new(2, 2.0, 0.0).unwrap();
        assert!((term_interior(&p, &m1).unwrap() - finite_part(&p).unwrap()).norm() < 1e-15);
        let d = term_interior(&p, &m2).unwrap() - term_interior(&p, &m1).unwrap();
        assert!((d + res_x(&p).unwrap() * 0.5 * LN_2).norm() < 1e-14);
        // no degree -n term: the log part is absent
        let q = radial_power(2, 0.5, 1.0).unwrap();
        assert!((term_interior(&q, &m2).unwrap() - finite_part(&q).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn leftover_term_cases() {
        let m = AuxiliaryModel::default();
        assert_eq!(term_leftover(&RationalSymbol::zero(2), &m).unwrap(), cz());
        assert_eq!(term_leftover(&single_pole(1.0, 1, 0, Side::Minus), &m).unwrap(), cz());
        let v = term_leftover(&single_pole(1.0, 1, 0, Side::Plus), &m).unwrap();
        assert!((v + c(1.0 / (4.0 * PI))).norm() < 1e-14);
        // degree -2 poles do not reach the residue on R^1
        assert!(term_leftover(&single_pole(1.0, 2, 0, Side::Plus), &m).unwrap().norm() < 1e-15);
    }

    #[test]
    fn gq_routes_agree() {
        for cc in [1.0, 2.0, 5.0] {
            let m = AuxiliaryModel::new(2, cc, 0.0).unwrap();
            let r = term_gq_routes(&green_g().unwrap(), &m).unwrap();
            assert!((r.direct - r.split).norm() < 1e-9, "c={cc}");
        }
        let m = AuxiliaryModel::default();
        assert_eq!(term_gq(&LaguerreSgo::zero(1), &m).unwrap(), cz());
        // diagonal only: TR - log 2 res
        let g = diagonal_g(1, 0.7).unwrap();
        let tr = normal_trace_symbol(&g).unwrap();
        let want = finite_part(&tr).unwrap() - res_x(&tr).unwrap() * LN_2;
        assert!((term_gq(&g, &m).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn pg_weight_closed_form() {
        for b in [0.5, 1.0, 2.5] {
            let h = line_integral(
                |t| {
                    let a = if t == 0.0 { 1.0 } else { t.atan() / t };
                    C::new(b, t).inv() * a
                },
                1.0,
            )
            .unwrap();
            assert!((h - c(pg_weight_k1(b))).norm() < 1e-12, "b={b}");
        }
        let m = AuxiliaryModel::default();
        let v = term_pg(&single_pole(1.0, 1, 0, Side::Plus), &m).unwrap();
        assert!((v + c(LN_2 / (4.0 * PI))).norm() < 1e-12);
        // either side gives the same residue
        let w = term_pg(&single_pole(1.0, 1, 0, Side::Minus), &m).unwrap();
        assert!((v - w).norm() < 1e-12);
        assert_eq!(term_pg(&RationalSymbol::zero(2), &m).unwrap(), cz());
    }

    #[test]
    fn gg_weights_match_kernel_quadrature() {
        let m = AuxiliaryModel::default();
        for (l, mm) in [(0, 0), (0, 1), (1, 1), (2, 0), (1, 3)] {
            let g = LaguerreSgo::new(0.0, 1, vec![(l, mm, radial_power(1, 0.0, 1.0).unwrap())]).unwrap();
            let v = gg_trace_numeric(&g, &m, &[1.0]).unwrap();
            assert!((v - c(gg_weight(l, mm))).norm() < 1e-8, "{l},{mm}: {v}");
            // independent of |xi'|
            let v2 = gg_trace_numeric(&g, &m, &[2.5]).unwrap();
            assert!((v2 - c(gg_weight(l, mm))).norm() < 1e-8);
        }
        let g = diagonal_g(0, 0.9).unwrap();
        assert!((term_gg(&g, &m).unwrap() + c(0.9 / (2.0 * PI))).norm() < 1e-14);
        assert_eq!(term_gg(&LaguerreSgo::zero(1), &m).unwrap(), cz());
    }

    #[test]
    fn residue_of_b() {
        let r = residue_b(&RationalSymbol::zero(2), &diagonal_g(0, 1.0).unwrap()).unwrap();
        assert!((r - c(1.0 / PI)).norm() < 1e-14);
        let p = single_pole(1.0, 2, 0, Side::Plus);
        let rp = res_x(&p.interior().unwrap()).unwrap();
        assert!((residue_b(&p, &LaguerreSgo::zero(1)).unwrap() - rp).norm() < 1e-15);
    }

    #[test]
    fn gq_family_matches_prediction() {
        let m = AuxiliaryModel::default();
        let g = green_g().unwrap();
        let f = fit_gq(&g, &m, &FitPlan::default()).unwrap();
        assert!((f.l0 - term_gq(&g, &m).unwrap()).norm() < 1e-5);
    }

    #[test]
    fn trivial_defect_and_trace() {
        let m = AuxiliaryModel::default();
        let p = rational_p().unwrap();
        let d = defect_scaling(&p, &LaguerreSgo::zero(1), 1.0, &m, &FitPlan::default()).unwrap();
        assert_eq!(d.fitted, cz());
        assert_eq!(d.closed.norm(), 0.0);
        let t = traciality_check(&TracialB::Identity, 2, &m, &FitPlan::default()).unwrap();
        assert_eq!(t.difference, 0.0);
    }

    #[test]
    fn sums_of_symbols() {
        let a = radial_power(1, 1.0, 2.0).unwrap();
        let b = radial_power(1, 1.0, -0.5).unwrap();
        let s = sum_symbols(1, &[&a, &b]).unwrap();
        assert!((s.trace_at(&[3.0]) - c(0.5)).norm() < 1e-15);
        assert!(sum_symbols(2, &[&a]).is_err());
    }
}
