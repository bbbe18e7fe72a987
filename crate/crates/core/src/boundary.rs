//! Laguerre basis in the normal variable, class-0 singular Green symbols in
//! coefficient form and kernel form, normal traces and compositions.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quad::{gauss_laguerre, integrate, integrate_breaks, GaussRule, QuadOpts};
use crate::rational::{RationalSymbol, Side};
use crate::symbol::{bracket, norm, sphere_rule, InteriorSymbol, DEFAULT_SPHERE_ORDER};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

type C = Complex64;

fn cz() -> C {
    C::new(0.0, 0.0)
}

/// sum_{l,m} c_{lm} a_l b_m.
fn bilinear(c: &DMatrix<C>, a: &[C], b: &[C]) -> C {
    a.iter()
        .enumerate()
        .flat_map(|(l, al)| b.iter().enumerate().map(move |(m, bm)| c[(l, m)] * al * bm))
        .sum()
}

fn parity(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// phi-hat_l(r, xi_n) = (2r)^{1/2} (r - i xi_n)^l / (r + i xi_n)^{l+1}.
pub fn laguerre(l: usize, r: f64, xi_n: f64) -> Result<C> {
    if !(r > 0.0) {
        return Err(Error::Scale(r));
    }
    Ok(phi_hat(l, r, xi_n))
}

fn phi_hat(l: usize, r: f64, t: f64) -> C {
    let a = C::new(r, -t);
    let b = C::new(r, t);
    (a / b).powi(l as i32) / b * (2.0 * r).sqrt()
}

/// Laguerre polynomial L_l(t) by the three-term recurrence.
pub fn laguerre_poly(l: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, 1.0 - t);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0 - t) * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// The normal-variable function whose transform (with e^{-i x xi}) is
/// phi-hat_l: (-1)^l (2r)^{1/2} e^{-r x} L_l(2 r x).
pub fn laguerre_fn(l: usize, r: f64, x: f64) -> f64 {
    parity(l) * (2.0 * r).sqrt() * (-r * x).exp() * laguerre_poly(l, 2.0 * r * x)
}

/// phi-hat_l(r, -i kappa) = int_0^inf phi_l(x) e^{-kappa x} dx.
pub fn laguerre_at_imag(l: usize, r: f64, kappa: C) -> C {
    let rr = C::new(r, 0.0);
    (rr - kappa).powi(l as i32) / (rr + kappa).powi(l as i32 + 1) * (2.0 * r).sqrt()
}

pub fn laguerre_at_imag_jet(l: usize, r: f64, kappa: &Jet) -> Jet {
    let rr = C::new(r, 0.0);
    let a = (-kappa).add_const(rr);
    let b = kappa.add_const(rr);
    (a.powi(l as i32) * b.powi(-(l as i32) - 1)).scale(C::new((2.0 * r).sqrt(), 0.0))
}

type KernelFamily = Arc<dyn Fn(&[f64]) -> Result<Kernel> + Send + Sync>;

/// One exponential-family kernel term
/// coef x^px y^py e^{-rate (x+y)}, divided by (x+y) when `singular`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub coef: C,
    pub px: u32,
    pub py: u32,
    pub rate: C,
    pub singular: bool,
}

impl ExpTerm {
    pub fn eval(&self, x: f64, y: f64) -> C {
        let s = x + y;
        let mut v = self.coef * x.powi(self.px as i32) * y.powi(self.py as i32) * (-self.rate * s).exp();
        if self.singular {
            v /= s;
        }
        v
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Kernel g(x_n, y_n) at a fixed tangential frequency.
#[derive(Clone)]
pub struct Kernel {
    f: Arc<dyn Fn(f64, f64) -> C + Send + Sync>,
    /// Declared decay: |g| <= C e^{-rate (x+y)}.
    pub rate: f64,
    /// Integrable 1/(x+y) singularity at the corner.
    pub singular: bool,
    /// Exact exponential-family representation, when available.
    pub exp: Option<Vec<ExpTerm>>,
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Kernel(rate={}, singular={}, exp={:?})", self.rate, self.singular, self.exp)
    }
}

impl Kernel {
    pub fn new<F>(rate: f64, singular: bool, f: F) -> Result<Kernel>
    where
        F: Fn(f64, f64) -> C + Send + Sync + 'static,
    {
        if !(rate > 0.0) {
            return Err(Error::Divergent(format!("kernel decay rate {rate} is not positive")));
        }
        Ok(Kernel {
            f: Arc::new(f),
            rate,
            singular,
            exp: None,
        })
    }

    pub fn from_exp(terms: Vec<ExpTerm>) -> Result<Kernel> {
        if terms.is_empty() {
            return Ok(Kernel::zero());
        }
        let rate = terms.iter().map(|t| t.rate.re).fold(f64::INFINITY, f64::min);
        let singular = terms.iter().any(|t| t.singular);
        let t2 = terms.clone();
        let mut k = Kernel::new(rate, singular, move |x, y| t2.iter().map(|t| t.eval(x, y)).sum())?;
        k.exp = Some(terms);
        Ok(k)
    }

    pub fn zero() -> Kernel {
        Kernel {
            f: Arc::new(|_, _| cz()),
            rate: 1.0,
            singular: false,
            exp: Some(vec![]),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> C {
        (self.f)(x, y)
    }

    pub fn scaled(&self, s: C) -> Kernel {
        let f = self.f.clone();
        Kernel {
            f: Arc::new(move |x, y| f(x, y) * s),
            rate: self.rate,
            singular: self.singular,
            exp: self.exp.as_ref().map(|v| {
                v.iter()
                    .map(|t| ExpTerm {
                        coef: t.coef * s,
                        ..*t
                    })
                    .collect()
            }),
        }
    }

    /// Checks |g| <= bound e^{-rate (x+y)} (times 1/(x+y) if singular) on samples.
    pub fn check_decay(&self, bound: f64, samples: &[(f64, f64)]) -> bool {
        samples.iter().all(|&(x, y)| {
            let s = x + y;
            let mut env = bound * (-self.rate * s).exp();
            if self.singular {
                env /= s;
            }
            self.eval(x, y).norm() <= env * (1.0 + 1e-12)
        })
    }
}

/// Singular Green symbol given by its symbol-kernel, as a family in xi'.
#[derive(Clone)]
pub struct SymbolKernelSgo {
    pub order: f64,
    pub bdim: usize,
    family: KernelFamily,
}

impl std::fmt::Debug for SymbolKernelSgo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymbolKernelSgo(order={}, bdim={})", self.order, self.bdim)
    }
}

impl SymbolKernelSgo {
    pub fn new<F>(order: f64, bdim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Kernel> + Send + Sync + 'static,
    {
        SymbolKernelSgo {
            order,
            bdim,
            family: Arc::new(f),
        }
    }

    pub fn at(&self, xp: &[f64]) -> Result<Kernel> {
        (self.family)(xp)
    }
}

/// Coefficient-form singular Green symbol: sparse entries c_{lm}(xi'),
/// each a polyhomogeneous symbol on R^{n-1}, with Laguerre scale [xi'].
#[derive(Clone, Debug)]
pub struct LaguerreSgo {
    pub order: f64,
    pub bdim: usize,
    pub entries: Vec<(usize, usize, InteriorSymbol)>,
}

impl LaguerreSgo {
    pub fn new(order: f64, bdim: usize, entries: Vec<(usize, usize, InteriorSymbol)>) -> Result<Self> {
        if !(1..=2).contains(&bdim) {
            return Err(Error::Dimension(bdim + 1));
        }
        for (_, _, s) in &entries {
            if s.dim != bdim {
                return Err(Error::InvalidSymbol("coefficient dimension differs from n-1".into()));
            }
        }
        Ok(LaguerreSgo { order, bdim, entries })
    }

    pub fn zero(bdim: usize) -> Self {
        LaguerreSgo {
            order: 0.0,
            bdim,
            entries: vec![],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest Laguerre index in use.
    pub fn truncation(&self) -> usize {
        self.entries.iter().map(|(l, m, _)| (*l).max(*m)).max().unwrap_or(0)
    }

    pub fn scale(xp: &[f64]) -> f64 {
        bracket(norm(xp))
    }

    /// Dense coefficient matrix (fiber traces) at xi'.
    pub fn matrix_at(&self, xp: &[f64]) -> DMatrix<C> {
        let l = self.truncation();
        let mut m = DMatrix::from_element(l + 1, l + 1, cz());
        for (a, b, s) in &self.entries {
            m[(*a, *b)] += s.trace_at(xp);
        }
        m
    }

    /// g(xi', xi_n, eta_n) = sum c_{lm} phi-hat_l(xi_n) conj phi-hat_m(eta_n).
    pub fn symbol_at(&self, xp: &[f64], xi_n: f64, eta_n: f64) -> C {
        let r = Self::scale(xp);
        self.entries
            .iter()
            .map(|(l, m, s)| s.trace_at(xp) * phi_hat(*l, r, xi_n) * phi_hat(*m, r, eta_n).conj())
            .sum()
    }

    /// Symbol-kernel sum c_{lm} phi_l(x) phi_m(y).
    pub fn kernel_at(&self, xp: &[f64]) -> Result<Kernel> {
        let r = Self::scale(xp);
        let coeffs: Vec<(usize, usize, C)> = self.entries.iter().map(|(l, m, s)| (*l, *m, s.trace_at(xp))).collect();
        Kernel::new(r, false, move |x, y| {
            coeffs
                .iter()
                .map(|(l, m, c)| c * laguerre_fn(*l, r, x) * laguerre_fn(*m, r, y))
                .sum()
        })
    }

    /// Kernel-form family of the same symbol.
    pub fn to_kernel_sgo(&self) -> SymbolKernelSgo {
        let g = self.clone();
        SymbolKernelSgo::new(self.order, self.bdim, move |xp| g.kernel_at(xp))
    }

    /// Smallest C with max|c_{lm}| <= C (1+l+m)^{-k} on the unit sphere.
    pub fn decay_constant(&self, k: f64) -> Result<f64> {
        let rule = sphere_rule(self.bdim, DEFAULT_SPHERE_ORDER)?;
        let mut worst: f64 = 0.0;
        for (l, m, s) in &self.entries {
            let w = (1.0 + (*l + *m) as f64).powf(k);
            for p in &rule.points {
                worst = worst.max(s.trace_at(p).norm() * w);
            }
        }
        Ok(worst)
    }
}

/// Normal trace at a tangential frequency.
pub trait NormalTrace {
    fn tr_n(&self, xp: &[f64]) -> Result<C>;
}

impl NormalTrace for LaguerreSgo {
    /// sum_l c_{ll}(xi'); off-diagonal entries never enter.
    fn tr_n(&self, xp: &[f64]) -> Result<C> {
        Ok(self
            .entries
            .iter()
            .filter(|(l, m, _)| l == m)
            .map(|(_, _, s)| s.trace_at(xp))
            .sum())
    }
}

impl NormalTrace for SymbolKernelSgo {
    fn tr_n(&self, xp: &[f64]) -> Result<C> {
        kernel_trace(&self.at(xp)?)
    }
}

fn default_quad() -> QuadOpts {
    QuadOpts::new(1e-16, 1e-13)
}

fn scaled_breaks(rate: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut s = 0.25;
    while s <= 64.0 {
        b.push(s / rate);
        s *= 4.0;
    }
    b.push(f64::INFINITY);
    b
}

/// int_0^inf g(x, x) dx.
pub fn kernel_trace(k: &Kernel) -> Result<C> {
    if k.singular {
        return Err(Error::Divergent(
            "diagonal of a log-type kernel is not integrable; use a composed quantity".into(),
        ));
    }
    let res = integrate_breaks(|x| k.eval(x, x), &scaled_breaks(2.0 * k.rate), default_quad());
    if !res.converged {
        return Err(Error::Quadrature("normal trace".into()));
    }
    Ok(res.value)
}

/// Exact tr_n(G1 G2) = int int g1(x,y) g2(y,x) for exponential families.
pub fn compose_exact(k1: &Kernel, k2: &Kernel) -> Option<Result<C>> {
    let (a, b) = (k1.exp.as_ref()?, k2.exp.as_ref()?);
    let mut acc = cz();
    for t1 in a {
        for t2 in b {
            if t1.singular && t2.singular {
                return Some(Err(Error::Divergent("two singular kernels".into())));
            }
            let p = t1.px + t2.py;
            let q = t1.py + t2.px;
            let g = t1.rate + t2.rate;
            let num = t1.coef * t2.coef * factorial(p) * factorial(q);
            acc += if t1.singular || t2.singular {
                num / ((p + q + 1) as f64 * g.powi((p + q + 1) as i32))
            } else {
                num / g.powi((p + q + 2) as i32)
            };
        }
    }
    Some(Ok(acc))
}

/// Numerical tr_n(G1 G2) in coordinates s = x+y, u = x/s, which absorbs an
/// integrable 1/(x+y) singularity into the Jacobian.
pub fn compose_kernel_trace(k1: &Kernel, k2: &Kernel, opts: QuadOpts) -> Result<C> {
    if k1.singular && k2.singular {
        return Err(Error::Divergent("two singular kernels".into()));
    }
    let rate = k1.rate + k2.rate;
    let mut ok = true;
    let res = integrate_breaks(
        |s| {
            let inner = integrate(
                |u| k1.eval(u * s, (1.0 - u) * s) * k2.eval((1.0 - u) * s, u * s),
                0.0,
                1.0,
                opts,
            );
            ok &= inner.converged;
            inner.value * s
        },
        &scaled_breaks(rate),
        opts,
    );
    if !res.converged || !ok {
        return Err(Error::Quadrature("kernel composition".into()));
    }
    Ok(res.value)
}

/// tr_n(G1 G2)(xi') for two kernel-form symbols, by 2-D quadrature.
pub fn compose_sgo_trace(g1: &SymbolKernelSgo, g2: &SymbolKernelSgo, xp: &[f64]) -> Result<C> {
    compose_kernel_trace(&g1.at(xp)?, &g2.at(xp)?, default_quad())
}

/// Laguerre expansion of a kernel or symbol at one xi'.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub r: f64,
    pub coeffs: DMatrix<C>,
    /// Relative L2 reconstruction error at this truncation.
    pub recon_err: f64,
}

/// JSON fixture form of a coefficient matrix (nonzero entries only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffFixture {
    pub r: f64,
    pub size: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl Expansion {
    pub fn truncation(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    pub fn to_fixture(&self, drop_below: f64) -> CoeffFixture {
        let mut entries = vec![];
        for l in 0..self.coeffs.nrows() {
            for m in 0..self.coeffs.ncols() {
                let v = self.coeffs[(l, m)];
                if v.norm() > drop_below {
                    entries.push((l, m, v.re, v.im));
                }
            }
        }
        CoeffFixture {
            r: self.r,
            size: self.coeffs.nrows(),
            entries,
        }
    }

    pub fn from_fixture(f: &CoeffFixture) -> Expansion {
        let mut coeffs = DMatrix::from_element(f.size, f.size, cz());
        for &(l, m, re, im) in &f.entries {
            coeffs[(l, m)] = C::new(re, im);
        }
        Expansion {
            r: f.r,
            coeffs,
            recon_err: 0.0,
        }
    }

    /// Reconstructed symbol sum c_{lm} phi-hat_l(xi) conj phi-hat_m(eta).
    pub fn symbol(&self, xi_n: f64, eta_n: f64) -> C {
        let n = self.coeffs.nrows();
        let a: Vec<C> = (0..n).map(|l| phi_hat(l, self.r, xi_n)).collect();
        let b: Vec<C> = (0..n).map(|m| phi_hat(m, self.r, eta_n).conj()).collect();
        bilinear(&self.coeffs, &a, &b)
    }

    /// Reconstructed kernel sum c_{lm} phi_l(x) phi_m(y).
    pub fn kernel(&self, x: f64, y: f64) -> C {
        let n = self.coeffs.nrows();
        let a: Vec<C> = (0..n).map(|l| C::new(laguerre_fn(l, self.r, x), 0.0)).collect();
        let b: Vec<C> = (0..n).map(|m| C::new(laguerre_fn(m, self.r, y), 0.0)).collect();
        bilinear(&self.coeffs, &a, &b)
    }

    pub fn trace(&self) -> C {
        (0..self.coeffs.nrows()).map(|l| self.coeffs[(l, l)]).sum()
    }
}

fn laguerre_rule(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(gauss_laguerre(n))).clone()
}

/// Expansion of a kernel at fixed truncation via a Gauss–Laguerre product
/// rule in t = 2 r x.
pub fn expand_kernel(k: &Kernel, r: f64, l: usize) -> Result<Expansion> {
    if !(r > 0.0) {
        return Err(Error::Scale(r));
    }
    if k.singular {
        return Err(Error::Unsupported("Laguerre expansion of a singular kernel".into()));
    }
    let nq = (2 * l + 64).min(300);
    let rule = laguerre_rule(nq);
    let nb = l + 1;
    let xs: Vec<f64> = rule.nodes.iter().map(|t| t / (2.0 * r)).collect();
    // dx-measure weight w_i e^{t_i}/(2r), from the stable closed form
    // w_i e^{t_i} = t_i / ((n+1) e^{-t_i/2} L_{n+1}(t_i))^2
    let v: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&t| {
            let psi = laguerre_fn(nq + 1, 0.5, t) * parity(nq + 1);
            t / ((nq + 1) as f64 * psi).powi(2) / (2.0 * r)
        })
        .collect();
    let phi = DMatrix::from_fn(nq, nb, |i, j| laguerre_fn(j, r, xs[i]));
    let g = DMatrix::from_fn(nq, nq, |i, j| if v[i] == 0.0 || v[j] == 0.0 { cz() } else { k.eval(xs[i], xs[j]) });
    if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Divergent("kernel not finite at quadrature nodes".into()));
    }
    let a = DMatrix::from_fn(nq, nb, |i, j| C::new(v[i] * phi[(i, j)], 0.0));
    let coeffs = a.transpose() * &g * &a;
    let phic = phi.map(|x| C::new(x, 0.0));
    let rec = &phic * &coeffs * phic.transpose();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..nq {
        for j in 0..nq {
            let w = v[i] * v[j];
            if w == 0.0 {
                continue;
            }
            num += w * (g[(i, j)] - rec[(i, j)]).norm_sqr();
            den += w * g[(i, j)].norm_sqr();
        }
    }
    let recon_err = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    Ok(Expansion { r, coeffs, recon_err })
}

/// Truncation control for `expand_sgo`.
#[derive(Clone, Copy, Debug)]
pub struct ExpandOpts {
    pub start: usize,
    pub max: usize,
    pub tol: f64,
}

impl Default for ExpandOpts {
    fn default() -> Self {
        ExpandOpts {
            start: 24,
            max: 96,
            tol: 1e-8,
        }
    }
}

/// Expansion of a kernel-form symbol at xi' with scale [xi'], escalating
/// the truncation until the reconstruction error is below tolerance.
pub fn expand_sgo(g: &SymbolKernelSgo, xp: &[f64], opts: ExpandOpts) -> Result<Expansion> {
    let k = g.at(xp)?;
    let r = bracket(norm(xp));
    let mut l = opts.start;
    loop {
        let e = expand_kernel(&k, r, l)?;
        if e.recon_err < opts.tol {
            return Ok(e);
        }
        if l >= opts.max {
            return Err(Error::Reconstruction {
                err: e.recon_err,
                tol: opts.tol,
            });
        }
        l = (2 * l).min(opts.max);
    }
}

/// Expansion of a symbol g(xi_n, eta_n) given in frequency form. With
/// xi = r tan(theta) the inner products become Fourier coefficients,
/// evaluated by the midpoint rule.
pub fn expand_symbol<F>(g: F, r: f64, l: usize) -> Result<Expansion>
where
    F: Fn(f64, f64) -> C,
{
    if !(r > 0.0) {
        return Err(Error::Scale(r));
    }
    let nb = l + 1;
    let k = 4 * nb + 64;
    let h = PI / k as f64;
    let th: Vec<f64> = (0..k).map(|j| -PI / 2.0 + (j as f64 + 0.5) * h).collect();
    let pts: Vec<f64> = th.iter().map(|t| r * t.tan()).collect();
    let sec: Vec<f64> = th.iter().map(|t| 1.0 / t.cos()).collect();
    let gm = DMatrix::from_fn(k, k, |i, j| g(pts[i], pts[j]));
    if gm.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Divergent("symbol not finite at quadrature nodes".into()));
    }
    // c_{lm} = (2r/(2 pi)^2) h^2 sum g sec sec e^{i(2l+1)th} e^{-i(2m+1)th'}
    let pre = (2.0 * r).sqrt() / (2.0 * PI) * h;
    let a = DMatrix::from_fn(nb, k, |li, i| C::from_polar(pre * sec[i], (2 * li + 1) as f64 * th[i]));
    let b = DMatrix::from_fn(k, nb, |j, mi| C::from_polar(pre * sec[j], -((2 * mi + 1) as f64) * th[j]));
    let coeffs = &a * &gm * &b;
    // residual in L2(d-bar xi d-bar eta): measure (r/2pi) sec^2 h per axis
    let e = Expansion {
        r,
        coeffs,
        recon_err: 0.0,
    };
    let w: Vec<f64> = sec.iter().map(|s| r / (2.0 * PI) * s * s * h).collect();
    let pa = DMatrix::from_fn(k, nb, |i, li| phi_hat(li, r, pts[i]));
    let pb = DMatrix::from_fn(nb, k, |mi, j| phi_hat(mi, r, pts[j]).conj());
    let rec = &pa * &e.coeffs * &pb;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            num += w[i] * w[j] * (gm[(i, j)] - rec[(i, j)]).norm_sqr();
            den += w[i] * w[j] * gm[(i, j)].norm_sqr();
        }
    }
    Ok(Expansion {
        recon_err: if den > 0.0 { (num / den).sqrt() } else { 0.0 },
        ..e
    })
}

/// Splits off the diagonal entries.
pub fn split_diag_off(g: &LaguerreSgo) -> (LaguerreSgo, LaguerreSgo) {
    let (d, o): (Vec<_>, Vec<_>) = g.entries.iter().cloned().partition(|(l, m, _)| l == m);
    (
        LaguerreSgo {
            order: g.order,
            bdim: g.bdim,
            entries: d,
        },
        LaguerreSgo {
            order: g.order,
            bdim: g.bdim,
            entries: o,
        },
    )
}

fn check_line_decay<F: Fn(f64) -> C>(h: &F, scale: f64) -> Result<()> {
    let probe = |x: f64| (h(x).norm() + h(-x).norm()) * x;
    let (x1, x2) = (1e5 * scale, 1e7 * scale);
    let (a, b) = (probe(x1), probe(x2));
    if b > 1e-300 && b >= 0.5 * a {
        return Err(Error::Divergent("integrand does not decay faster than 1/xi_n".into()));
    }
    Ok(())
}

/// int_R h(t) d-bar t, folded to t >= 0 and mapped by t = scale tan(theta).
pub fn line_integral<F: Fn(f64) -> C>(h: F, scale: f64) -> Result<C> {
    check_line_decay(&h, scale)?;
    let res = integrate_breaks(
        |th| {
            let t = scale * th.tan();
            let c = th.cos();
            (h(t) + h(-t)) * (scale / (c * c))
        },
        &[0.0, PI / 4.0, PI / 2.0],
        QuadOpts::new(1e-15, 1e-13),
    );
    if !res.converged {
        return Err(Error::Quadrature("normal-frequency integral".into()));
    }
    Ok(res.value / (2.0 * PI))
}

/// tr'_n(g o_n r_+) = int g(xi', xi_n, xi_n) r(xi_n) d-bar xi_n. The mirror
/// composition r_+ o_n g has the same integrand at frozen coefficients.
pub fn trprime_compose<F: Fn(f64) -> C>(g: &LaguerreSgo, rf: F, xp: &[f64]) -> Result<C> {
    let r = LaguerreSgo::scale(xp);
    line_integral(|t| g.symbol_at(xp, t, t) * rf(t), r)
}

/// Orthogonal projection onto span{conj phi-hat_m(r, .), m <= L}.
#[derive(Clone, Debug)]
pub struct Projection {
    pub r: f64,
    pub coeffs: Vec<C>,
}

impl Projection {
    pub fn eval(&self, eta: f64) -> C {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, d)| d * phi_hat(k, self.r, eta).conj())
            .sum()
    }
}

/// Projection coefficients d_k = int f(eta) phi-hat_k(eta) d-bar eta,
/// computed in the variable theta with eta = r tan(theta).
pub fn project_hminus<F: Fn(f64) -> C>(f: F, r: f64, l: usize) -> Result<Projection> {
    if !(r > 0.0) {
        return Err(Error::Scale(r));
    }
    let pre = (2.0 * r).sqrt() / (2.0 * PI);
    let mut coeffs = Vec::with_capacity(l + 1);
    for k in 0..=l {
        let res = integrate(
            |th| f(r * th.tan()) * C::from_polar(pre / th.cos(), -((2 * k + 1) as f64) * th),
            -PI / 2.0,
            PI / 2.0,
            QuadOpts::new(1e-16, 1e-13),
        );
        coeffs.push(res.value);
    }
    Ok(Projection { r, coeffs })
}

/// Normal trace of g o_n r_+ with the projection onto H^- inserted, for a
/// multiplier r depending on xi_n only.
pub fn tr_n_projected<F: Fn(f64) -> C>(g: &LaguerreSgo, rf: F, xp: &[f64], l: usize) -> Result<C> {
    let r = LaguerreSgo::scale(xp);
    let mut acc = cz();
    for (a, b, s) in &g.entries {
        let c = s.trace_at(xp);
        let p = project_hminus(|t| phi_hat(*b, r, t).conj() * rf(t), r, l.max(*a))?;
        acc += c * p.coeffs[*a];
    }
    Ok(acc)
}

/// Exponential-family terms of g-plus(p) for the plus pole terms of p:
/// a r^q s^{k-1} e^{-b r s}/(k-1)!, s = x+y, expanded in x^i y^j.
pub fn gplus_terms(p: &RationalSymbol, xp: &[f64]) -> Result<Vec<ExpTerm>> {
    if !p.poly.is_empty() {
        return Err(Error::InvalidSymbol(
            "polynomial part must be split off before forming G+(P)".into(),
        ));
    }
    let r = bracket(norm(xp));
    let s = norm(xp);
    let w: Vec<f64> = xp.iter().map(|x| if s > 0.0 { x / s } else { 0.0 }).collect();
    let mut out = vec![];
    for t in p.poles.iter().filter(|t| t.side == Side::Plus) {
        let a = t.ang.eval(&w) * r.powi(t.q) / factorial(t.k - 1);
        for i in 0..t.k {
            let binom = factorial(t.k - 1) / (factorial(i) * factorial(t.k - 1 - i));
            out.push(ExpTerm {
                coef: a * binom,
                px: i,
                py: t.k - 1 - i,
                rate: C::new(t.b * r, 0.0),
                singular: false,
            });
        }
    }
    Ok(out)
}

/// Symbol-kernel of G+(P) at xi'.
pub fn gplus_of_p(p: &RationalSymbol, xp: &[f64]) -> Result<Kernel> {
    Kernel::from_exp(gplus_terms(p, xp)?)
}

/// Kernel-form family xi' -> g-plus(p).
pub fn gplus_sgo(p: &RationalSymbol) -> SymbolKernelSgo {
    let q = p.normal_part();
    SymbolKernelSgo::new(p.order() as f64 + 1.0, p.dim - 1, move |xp| gplus_of_p(&q, xp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{Angular, PoleTerm};
    use crate::symbol::HomogeneousTerm;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    fn const_sym(v: f64) -> InteriorSymbol {
        InteriorSymbol::from_terms(1, vec![HomogeneousTerm::radial(0.0, c(v))], None).unwrap()
    }

    #[test]
    fn laguerre_examples() {
        assert!((laguerre(0, 1.0, 0.0).unwrap() - c(2f64.sqrt())).norm() < 1e-15);
        assert!(laguerre(0, 0.0, 1.0).is_err());
        for l in 0..6 {
            let v = laguerre(l, 1.3, 0.7).unwrap();
            assert!((v.norm_sqr() - 2.6 / (1.69 + 0.49)).abs() < 1e-14);
        }
    }

    #[test]
    fn laguerre_fn_transform() {
        for l in 0..5 {
            let r = 0.8;
            let xi = 1.7;
            let res = integrate_breaks(
                |x| C::from_polar(laguerre_fn(l, r, x), -x * xi),
                &[0.0, 2.0, 10.0, f64::INFINITY],
                QuadOpts::new(1e-15, 1e-13),
            );
            assert!((res.value - phi_hat(l, r, xi)).norm() < 1e-11, "l={l}");
            let k = C::new(1.4, 0.0);
            let res = integrate_breaks(
                |x| c(laguerre_fn(l, r, x) * (-1.4 * x).exp()),
                &[0.0, 2.0, f64::INFINITY],
                QuadOpts::new(1e-15, 1e-13),
            );
            assert!((res.value - laguerre_at_imag(l, r, k)).norm() < 1e-12);
        }
    }

    #[test]
    fn orthonormal_small() {
        for r in [0.5, 1.0, 3.0] {
            for l in 0..4 {
                for m in 0..4 {
                    let v = line_integral(|t| phi_hat(l, r, t) * phi_hat(m, r, t).conj(), r).unwrap();
                    let want = if l == m { 1.0 } else { 0.0 };
                    assert!((v - c(want)).norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn trace_examples() {
        let r = 1.5;
        let k = Kernel::from_exp(vec![ExpTerm { coef: c(1.0), px: 0, py: 0, rate: c(r), singular: false }]).unwrap();
        assert!((kernel_trace(&k).unwrap() - c(1.0 / (2.0 * r))).norm() < 1e-14);
        let kap = 2.2;
        let q = Kernel::from_exp(vec![ExpTerm { coef: c(0.5 / kap), px: 0, py: 0, rate: c(kap), singular: false }]).unwrap();
        assert!((kernel_trace(&q).unwrap() - c(1.0 / (4.0 * kap * kap))).norm() < 1e-14);
        let sing = Kernel::from_exp(vec![ExpTerm { coef: c(1.0), px: 0, py: 0, rate: c(1.0), singular: true }]).unwrap();
        assert!(kernel_trace(&sing).is_err());
    }

    #[test]
    fn off_diagonal_has_zero_trace() {
        let g = LaguerreSgo::new(0.0, 1, vec![(0, 1, const_sym(3.0)), (2, 5, const_sym(-1.0))]).unwrap();
        assert_eq!(g.tr_n(&[2.0]).unwrap(), cz());
        let (d, o) = split_diag_off(&g);
        assert!(d.is_zero());
        assert_eq!(o.entries.len(), 2);
    }

    #[test]
    fn compose_examples() {
        let r = 1.2;
        let kap = 1.9;
        let e = Kernel::from_exp(vec![ExpTerm { coef: c(1.0), px: 0, py: 0, rate: c(r), singular: false }]).unwrap();
        let q = Kernel::from_exp(vec![ExpTerm { coef: c(0.5 / kap), px: 0, py: 0, rate: c(kap), singular: false }]).unwrap();
        let opts = QuadOpts::new(1e-16, 1e-12);
        let v = compose_kernel_trace(&e, &e, opts).unwrap();
        assert!((v - c(1.0 / (4.0 * r * r))).norm() < 1e-12);
        let want = 1.0 / (2.0 * kap * (r + kap).powi(2));
        assert!((compose_kernel_trace(&e, &q, opts).unwrap() - c(want)).norm() < 1e-12);
        assert!((compose_exact(&e, &q).unwrap().unwrap() - c(want)).norm() < 1e-15);
        assert_eq!(compose_kernel_trace(&Kernel::zero(), &q, opts).unwrap(), cz());
    }

    #[test]
    fn compose_singular_exact_vs_numeric() {
        let sing = Kernel::from_exp(vec![ExpTerm { coef: c(1.0), px: 0, py: 0, rate: c(1.0), singular: true }]).unwrap();
        let g = Kernel::from_exp(vec![
            ExpTerm { coef: c(2.0), px: 1, py: 0, rate: c(0.7), singular: false },
            ExpTerm { coef: c(-0.5), px: 0, py: 2, rate: c(1.3), singular: false },
        ])
        .unwrap();
        let a = compose_exact(&g, &sing).unwrap().unwrap();
        let b = compose_kernel_trace(&g, &sing, QuadOpts::new(1e-16, 1e-12)).unwrap();
        assert!((a - b).norm() < 1e-11, "{a} {b}");
        assert!(compose_exact(&sing, &sing).unwrap().is_err());
    }

    #[test]
    fn expand_pure_exponential() {
        let r = 1.3;
        let k = Kernel::from_exp(vec![ExpTerm { coef: c(1.0), px: 0, py: 0, rate: c(r), singular: false }]).unwrap();
        let e = expand_kernel(&k, r, 6).unwrap();
        assert!((e.coeffs[(0, 0)] - c(0.5 / r)).norm() < 1e-12);
        let rest: f64 = e.coeffs.iter().map(|z| z.norm()).sum::<f64>() - e.coeffs[(0, 0)].norm();
        assert!(rest < 1e-11, "{rest}");
        assert!(e.recon_err < 1e-10);
    }

    #[test]
    fn expand_slower_kernel_converges() {
        let r = 1.0;
        let k = Kernel::from_exp(vec![ExpTerm { coef: c(1.0), px: 0, py: 0, rate: c(2.0), singular: false }]).unwrap();
        let e8 = expand_kernel(&k, r, 8).unwrap();
        let e24 = expand_kernel(&k, r, 24).unwrap();
        assert!(e24.recon_err < e8.recon_err);
        assert!(e24.recon_err < 1e-8);
        assert!((e24.trace() - c(0.25)).norm() < 1e-9);
        // symmetry
        for l in 0..5 {
            for m in 0..5 {
                assert!((e24.coeffs[(l, m)] - e24.coeffs[(m, l)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn expand_symbol_unit_entry() {
        let r = 0.9;
        let e = expand_symbol(|a, b| phi_hat(2, r, a) * phi_hat(5, r, b).conj(), r, 8).unwrap();
        for l in 0..=8 {
            for m in 0..=8 {
                let want = if (l, m) == (2, 5) { 1.0 } else { 0.0 };
                assert!((e.coeffs[(l, m)] - c(want)).norm() < 1e-12, "{l} {m}");
            }
        }
        assert!(e.recon_err < 1e-12);
    }

    #[test]
    fn fixture_roundtrip() {
        let r = 1.0;
        let k = Kernel::from_exp(vec![ExpTerm { coef: c(1.0), px: 1, py: 0, rate: c(1.0), singular: false }]).unwrap();
        let e = expand_kernel(&k, r, 4).unwrap();
        let f = e.to_fixture(1e-14);
        let s = serde_json::to_string(&f).unwrap();
        let back: CoeffFixture = serde_json::from_str(&s).unwrap();
        let e2 = Expansion::from_fixture(&back);
        assert!((&e.coeffs - &e2.coeffs).norm() < 1e-13);
        assert!((e2.kernel(0.3, 0.4) - k.eval(0.3, 0.4)).norm() < 1e-12);
    }

    #[test]
    fn trprime_reduces_and_log_diag() {
        let g = LaguerreSgo::new(0.0, 1, vec![(2, 2, const_sym(1.0))]).unwrap();
        let xp = [1.0];
        let v = trprime_compose(&g, |_| c(1.0), &xp).unwrap();
        assert!((v - g.tr_n(&xp).unwrap()).norm() < 1e-12);
        let v = trprime_compose(&g, |t| c((1.0 + t * t).ln()), &xp).unwrap();
        assert!((v.re - crate::closed::laguerre_log_diag(1.0)).abs() < 1e-9);
        assert!(trprime_compose(&g, |t| c(t * t), &xp).is_err());
    }

    #[test]
    fn projection_examples() {
        let r = 1.1;
        let p = project_hminus(|t| phi_hat(3, r, t).conj(), r, 6).unwrap();
        for (k, d) in p.coeffs.iter().enumerate() {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((d - c(want)).norm() < 1e-10);
        }
        assert!((p.eval(0.4) - phi_hat(3, r, 0.4).conj()).norm() < 1e-10);
        let p = project_hminus(|t| phi_hat(3, r, t), r, 6).unwrap();
        assert!(p.coeffs.iter().all(|d| d.norm() < 1e-10));
    }

    #[test]
    fn projection_vs_plain() {
        let g = LaguerreSgo::new(0.0, 1, vec![(0, 0, const_sym(1.0)), (1, 0, const_sym(0.5)), (0, 2, const_sym(-0.3))]).unwrap();
        let xp = [1.4];
        let r = LaguerreSgo::scale(&xp);
        let mult = |t: f64| C::new(0.8 * r, t).inv() + C::new(2.0 * r, -t).inv() * 0.5;
        let plain = trprime_compose(&g, mult, &xp).unwrap();
        let proj = tr_n_projected(&g, mult, &xp, 2).unwrap();
        assert!((plain - proj).norm() < 1e-8, "{plain} {proj}");
    }

    #[test]
    fn gplus_simple_pole() {
        let p = RationalSymbol::new(
            2,
            vec![],
            vec![PoleTerm { ang: Angular::constant(1.0), side: Side::Plus, b: 1.0, k: 1, q: 0 }],
        )
        .unwrap();
        let xp = [1.7];
        let k = gplus_of_p(&p, &xp).unwrap();
        assert!((k.eval(0.3, 0.5) - c((-1.7f64 * 0.8).exp())).norm() < 1e-15);
        // forward transform of K(u) recovers the plus part
        for xi in [0.0, 0.9, -2.5] {
            let res = integrate_breaks(
                |u| k.eval(u, 0.0) * C::from_polar(1.0, -u * xi),
                &[0.0, 1.0, 5.0, f64::INFINITY],
                QuadOpts::new(1e-15, 1e-13),
            );
            assert!((res.value - p.eval(&xp, xi)).norm() < 1e-11);
        }
    }

    #[test]
    fn gplus_order_minus_two_bounded_and_symmetric() {
        let p = RationalSymbol::new(
            2,
            vec![],
            vec![
                PoleTerm { ang: Angular::constant(1.0), side: Side::Plus, b: 1.0, k: 2, q: 0 },
                PoleTerm { ang: Angular::constant(1.0), side: Side::Minus, b: 1.0, k: 2, q: 0 },
            ],
        )
        .unwrap();
        let k = gplus_of_p(&p, &[2.0]).unwrap();
        assert!(k.eval(1e-12, 1e-12).norm() < 1e-10);
        assert!((k.eval(0.2, 0.7) - k.eval(0.7, 0.2)).norm() < 1e-16);
        // transform of s e^{-2s} is 1/(2 + i xi)^2
        let xi = 1.3;
        let res = integrate_breaks(
            |u| k.eval(u, 0.0) * C::from_polar(1.0, -u * xi),
            &[0.0, 1.0, 5.0, f64::INFINITY],
            QuadOpts::new(1e-15, 1e-13),
        );
        assert!((res.value - C::new(2.0, xi).powi(-2)).norm() < 1e-11);
        assert!(gplus_of_p(&RationalSymbol::new(2, vec![crate::rational::PolyTerm { ang: Angular::constant(1.0), alpha: vec![], alpha_n: 1 }], vec![]).unwrap(), &[1.0]).is_err());
    }

    #[test]
    fn laguerre_kernel_roundtrip() {
        let g = LaguerreSgo::new(0.0, 1, vec![(0, 0, const_sym(1.0)), (1, 3, const_sym(0.25)), (2, 2, const_sym(-0.5))]).unwrap();
        let xp = [1.6];
        let k = g.kernel_at(&xp).unwrap();
        let e = expand_kernel(&k, LaguerreSgo::scale(&xp), 24).unwrap();
        let m = g.matrix_at(&xp);
        for l in 0..=3 {
            for mm in 0..=3 {
                assert!((e.coeffs[(l, mm)] - m[(l, mm)]).norm() < 1e-12);
            }
        }
        let kt = kernel_trace(&k).unwrap();
        assert!((kt - g.tr_n(&xp).unwrap()).norm() < 1e-12);
        let ks = g.to_kernel_sgo();
        assert!((ks.tr_n(&xp).unwrap() - kt).norm() < 1e-14);
        assert!(g.decay_constant(2.0).unwrap() > 0.0);
    }
}
