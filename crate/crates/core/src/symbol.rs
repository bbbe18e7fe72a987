//! Polyhomogeneous symbols at a frozen base point, sphere quadrature,
//! residue densities and finite-part integrals.

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, integrate_breaks, QuadOpts};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

pub type CMat = DMatrix<Complex64>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type MatFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;

const DEG_EPS: f64 = 1e-12;

/// Excision function: 0 below 1/2, 1 above 1, cubic blend in between.
pub fn chi(s: f64) -> f64 {
    if s <= 0.5 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let u = 2.0 * s - 1.0;
        u * u * (3.0 - 2.0 * u)
    }
}

/// The smoothed length [xi] as a function of |xi|: equal to |xi| from 1 on,
/// (1 + s^2)/2 below (C^1 at s = 1, even, bounded below by 1/2).
pub fn bracket(s: f64) -> f64 {
    if s >= 1.0 {
        s
    } else {
        0.5 * (1.0 + s * s)
    }
}

pub fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// A strictly homogeneous symbol term p^h of degree `degree`.
#[derive(Clone)]
pub struct HomogeneousTerm {
    pub degree: f64,
    pub fiber: usize,
    mat: MatFn,
    tr: ScalarFn,
}

impl std::fmt::Debug for HomogeneousTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HomogeneousTerm(degree={}, fiber={})", self.degree, self.fiber)
    }
}

impl HomogeneousTerm {
    pub fn scalar<F>(degree: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        let tr: ScalarFn = Arc::new(f);
        let t2 = tr.clone();
        HomogeneousTerm {
            degree,
            fiber: 1,
            mat: Arc::new(move |x| CMat::from_element(1, 1, t2(x))),
            tr,
        }
    }

    pub fn matrix<F>(degree: f64, fiber: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> CMat + Send + Sync + 'static,
    {
        let mat: MatFn = Arc::new(f);
        let m2 = mat.clone();
        HomogeneousTerm {
            degree,
            fiber,
            mat,
            tr: Arc::new(move |x| m2(x).trace()),
        }
    }

    pub fn zero(degree: f64, fiber: usize) -> Self {
        HomogeneousTerm {
            degree,
            fiber,
            mat: Arc::new(move |_| CMat::zeros(fiber, fiber)),
            tr: Arc::new(|_| c0()),
        }
    }

    /// |xi|^degree times a constant.
    pub fn radial(degree: f64, coeff: Complex64) -> Self {
        HomogeneousTerm::scalar(degree, move |x| coeff * norm(x).powf(degree))
    }

    pub fn eval(&self, xi: &[f64]) -> CMat {
        (self.mat)(xi)
    }

    pub fn trace(&self, xi: &[f64]) -> Complex64 {
        (self.tr)(xi)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let m = self.mat.clone();
        let t = self.tr.clone();
        HomogeneousTerm {
            degree: self.degree,
            fiber: self.fiber,
            mat: Arc::new(move |x| m(x) * s),
            tr: Arc::new(move |x| t(x) * s),
        }
    }

    /// Pointwise product; a fiber-1 factor acts as a scalar.
    pub fn product(&self, o: &HomogeneousTerm) -> Result<Self> {
        let fiber = match (self.fiber, o.fiber) {
            (a, b) if a == b => a,
            (1, b) => b,
            (a, 1) => a,
            (a, b) => {
                return Err(Error::InvalidSymbol(format!(
                    "fiber mismatch {a} vs {b}"
                )))
            }
        };
        let (m1, m2) = (self.mat.clone(), o.mat.clone());
        let (f1, f2) = (self.fiber, o.fiber);
        let mat: MatFn = Arc::new(move |x| {
            let a = m1(x);
            let b = m2(x);
            if f1 == 1 {
                b * a[(0, 0)]
            } else if f2 == 1 {
                a * b[(0, 0)]
            } else {
                a * b
            }
        });
        let tr: ScalarFn = if f1 == 1 && f2 == 1 {
            let (t1, t2) = (self.tr.clone(), o.tr.clone());
            Arc::new(move |x| t1(x) * t2(x))
        } else {
            let m = mat.clone();
            Arc::new(move |x| m(x).trace())
        };
        Ok(HomogeneousTerm {
            degree: self.degree + o.degree,
            fiber,
            mat,
            tr,
        })
    }

    pub fn sum(&self, o: &HomogeneousTerm) -> Result<Self> {
        if (self.degree - o.degree).abs() > DEG_EPS || self.fiber != o.fiber {
            return Err(Error::InvalidSymbol("sum of unlike terms".into()));
        }
        let (m1, m2) = (self.mat.clone(), o.mat.clone());
        let (t1, t2) = (self.tr.clone(), o.tr.clone());
        Ok(HomogeneousTerm {
            degree: self.degree,
            fiber: self.fiber,
            mat: Arc::new(move |x| m1(x) + m2(x)),
            tr: Arc::new(move |x| t1(x) + t2(x)),
        })
    }

    /// Largest relative homogeneity defect over the given samples.
    pub fn homogeneity_residual(&self, samples: &[(Vec<f64>, f64)]) -> f64 {
        let mut worst: f64 = 0.0;
        for (xi, t) in samples {
            let scaled: Vec<f64> = xi.iter().map(|v| v * t).collect();
            let a = self.eval(&scaled);
            let b = self.eval(xi) * Complex64::new(t.powf(self.degree), 0.0);
            let den = b.norm().max(f64::MIN_POSITIVE);
            worst = worst.max((a - &b).norm() / den);
        }
        worst
    }
}

/// Integrable remainder with declared bound |r(xi)| <= bound <xi>^decay.
#[derive(Clone)]
pub struct Remainder {
    pub decay: Option<f64>,
    pub bound: f64,
    pub fiber: usize,
    /// Radius outside which the remainder vanishes identically, if known.
    pub support: Option<f64>,
    mat: MatFn,
    tr: ScalarFn,
}

impl std::fmt::Debug for Remainder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Remainder(decay={:?}, bound={})", self.decay, self.bound)
    }
}

impl Remainder {
    pub fn scalar<F>(decay: Option<f64>, bound: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        let tr: ScalarFn = Arc::new(f);
        let t2 = tr.clone();
        Remainder {
            decay,
            bound,
            fiber: 1,
            support: None,
            mat: Arc::new(move |x| CMat::from_element(1, 1, t2(x))),
            tr,
        }
    }

    pub fn matrix<F>(decay: Option<f64>, bound: f64, fiber: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> CMat + Send + Sync + 'static,
    {
        let mat: MatFn = Arc::new(f);
        let m2 = mat.clone();
        Remainder {
            decay,
            bound,
            fiber,
            support: None,
            mat,
            tr: Arc::new(move |x| m2(x).trace()),
        }
    }

    /// Declares that the remainder vanishes for |xi| > radius.
    pub fn with_support(mut self, radius: f64) -> Self {
        self.support = Some(radius);
        self
    }

    pub fn eval(&self, xi: &[f64]) -> CMat {
        (self.mat)(xi)
    }

    pub fn trace(&self, xi: &[f64]) -> Complex64 {
        (self.tr)(xi)
    }
}

/// Polyhomogeneous interior symbol: sum of excised homogeneous terms of
/// degrees order, order-1, ... plus an integrable remainder.
#[derive(Clone, Debug)]
pub struct InteriorSymbol {
    pub order: f64,
    pub dim: usize,
    pub fiber: usize,
    pub terms: Vec<HomogeneousTerm>,
    pub remainder: Option<Remainder>,
}

impl InteriorSymbol {
    pub fn new(
        dim: usize,
        order: f64,
        terms: Vec<HomogeneousTerm>,
        remainder: Option<Remainder>,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        let fiber = terms
            .first()
            .map(|t| t.fiber)
            .or(remainder.as_ref().map(|r| r.fiber))
            .unwrap_or(1);
        for (j, t) in terms.iter().enumerate() {
            if (t.degree - (order - j as f64)).abs() > DEG_EPS {
                return Err(Error::InvalidSymbol(format!(
                    "term {j} has degree {} but {} expected",
                    t.degree,
                    order - j as f64
                )));
            }
            if t.fiber != fiber {
                return Err(Error::InvalidSymbol("fiber mismatch".into()));
            }
        }
        if let Some(r) = &remainder {
            if let Some(d) = r.decay {
                if d >= -(dim as f64) {
                    return Err(Error::InvalidSymbol(format!(
                        "remainder decay {d} not below -n = {}",
                        -(dim as f64)
                    )));
                }
            }
            if r.fiber != fiber {
                return Err(Error::InvalidSymbol("remainder fiber mismatch".into()));
            }
        }
        Ok(InteriorSymbol {
            order,
            dim,
            fiber,
            terms,
            remainder,
        })
    }

    /// Builds a symbol from terms of arbitrary (integer-spaced) degrees,
    /// merging equal degrees and filling gaps with zero terms.
    pub fn from_terms(
        dim: usize,
        terms: Vec<HomogeneousTerm>,
        remainder: Option<Remainder>,
    ) -> Result<Self> {
        if terms.is_empty() {
            let fiber = remainder.as_ref().map(|r| r.fiber).unwrap_or(1);
            let order = remainder
                .as_ref()
                .and_then(|r| r.decay)
                .unwrap_or(-(dim as f64) - 1.0);
            let mut s = InteriorSymbol::new(dim, order, vec![], remainder)?;
            s.fiber = fiber;
            return Ok(s);
        }
        let order = terms.iter().map(|t| t.degree).fold(f64::MIN, f64::max);
        let fiber = terms[0].fiber;
        let mut slots: Vec<Option<HomogeneousTerm>> = Vec::new();
        for t in terms {
            let j = order - t.degree;
            let ji = j.round();
            if (j - ji).abs() > DEG_EPS {
                return Err(Error::InvalidSymbol("degrees not integer-spaced".into()));
            }
            let ji = ji as usize;
            if slots.len() <= ji {
                slots.resize(ji + 1, None);
            }
            slots[ji] = Some(match slots[ji].take() {
                None => t,
                Some(prev) => prev.sum(&t)?,
            });
        }
        let terms = slots
            .into_iter()
            .enumerate()
            .map(|(j, t)| t.unwrap_or_else(|| HomogeneousTerm::zero(order - j as f64, fiber)))
            .collect();
        InteriorSymbol::new(dim, order, terms, remainder)
    }

    pub fn zero(dim: usize) -> Self {
        InteriorSymbol {
            order: -(dim as f64) - 1.0,
            dim,
            fiber: 1,
            terms: vec![],
            remainder: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.remainder.is_none()
    }

    /// The term of the given degree, if present.
    pub fn term_of_degree(&self, d: f64) -> Option<&HomogeneousTerm> {
        self.terms.iter().find(|t| (t.degree - d).abs() < DEG_EPS)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.terms = self.terms.iter().map(|t| t.scaled(s)).collect();
        out.remainder = self.remainder.as_ref().map(|r| {
            let m = r.mat.clone();
            let t = r.tr.clone();
            Remainder {
                decay: r.decay,
                bound: r.bound * s.norm(),
                fiber: r.fiber,
                support: r.support,
                mat: Arc::new(move |x| m(x) * s),
                tr: Arc::new(move |x| t(x) * s),
            }
        });
        out
    }

    /// Fiber trace of the realized symbol.
    pub fn trace_at(&self, xi: &[f64]) -> Complex64 {
        let s = norm(xi);
        let w = chi(s);
        let mut v = c0();
        if w > 0.0 {
            for t in &self.terms {
                v += t.trace(xi) * w;
            }
        }
        if let Some(r) = &self.remainder {
            v += r.trace(xi);
        }
        v
    }
}

/// Evaluates the realized symbol sum_j chi(|xi|) p_j(xi) + remainder(xi).
pub fn eval_symbol(sym: &InteriorSymbol, xi: &[f64]) -> CMat {
    let mut out = CMat::zeros(sym.fiber, sym.fiber);
    let w = chi(norm(xi));
    if w > 0.0 {
        for t in &sym.terms {
            out += t.eval(xi) * Complex64::new(w, 0.0);
        }
    }
    if let Some(r) = &sym.remainder {
        out += r.eval(xi);
    }
    out
}

/// Log-polyhomogeneous symbol: pairs (s_{d,0}, s_{d,1}) realized as
/// s_{d,0} + s_{d,1} log[xi].
#[derive(Clone, Debug)]
pub struct LogPolySymbol {
    pub order: f64,
    pub dim: usize,
    pub terms: Vec<(HomogeneousTerm, HomogeneousTerm)>,
}

impl LogPolySymbol {
    pub fn new(dim: usize, terms: Vec<(HomogeneousTerm, HomogeneousTerm)>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        for (a, b) in &terms {
            if (a.degree - b.degree).abs() > DEG_EPS {
                return Err(Error::InvalidSymbol("log pair with unequal degrees".into()));
            }
        }
        let order = terms.iter().map(|t| t.0.degree).fold(f64::MIN, f64::max);
        Ok(LogPolySymbol { order, dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        LogPolySymbol {
            order: f64::MIN,
            dim,
            terms: vec![],
        }
    }

    /// Value for |xi| >= 1.
    pub fn trace_at(&self, xi: &[f64]) -> Complex64 {
        let l = bracket(norm(xi)).ln();
        self.terms
            .iter()
            .map(|(a, b)| a.trace(xi) + b.trace(xi) * l)
            .sum()
    }

    /// Product with a classical symbol (no log factor on that side).
    pub fn times(&self, p: &InteriorSymbol) -> Result<LogPolySymbol> {
        let mut acc: Vec<(HomogeneousTerm, HomogeneousTerm)> = Vec::new();
        for (a, b) in &self.terms {
            for t in &p.terms {
                let pa = a.product(t)?;
                let pb = b.product(t)?;
                match acc
                    .iter_mut()
                    .find(|(x, _)| (x.degree - pa.degree).abs() < DEG_EPS)
                {
                    Some(slot) => {
                        slot.0 = slot.0.sum(&pa)?;
                        slot.1 = slot.1.sum(&pb)?;
                    }
                    None => acc.push((pa, pb)),
                }
            }
        }
        LogPolySymbol::new(self.dim, acc)
    }

    pub fn pair_of_degree(&self, d: f64) -> Option<&(HomogeneousTerm, HomogeneousTerm)> {
        self.terms.iter().find(|t| (t.0.degree - d).abs() < DEG_EPS)
    }
}

/// Quadrature nodes and weights on the unit sphere of R^n, with the
/// (2 pi)^{-n} normalization folded into the weights.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub const DEFAULT_SPHERE_ORDER: usize = 64;

pub fn sphere_rule(n: usize, order: usize) -> Result<SphereRule> {
    let norm_c = (2.0 * PI).powi(-(n as i32));
    match n {
        1 => Ok(SphereRule {
            dim: 1,
            points: vec![vec![1.0], vec![-1.0]],
            weights: vec![norm_c, norm_c],
        }),
        2 => {
            let k = order.max(4);
            let h = 2.0 * PI / k as f64;
            let points = (0..k)
                .map(|i| {
                    let t = h * i as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect();
            Ok(SphereRule {
                dim: 2,
                points,
                weights: vec![h * norm_c; k],
            })
        }
        3 => {
            let nt = (order / 2).max(4);
            let np = 2 * nt;
            let gl = gauss_legendre(nt);
            let h = 2.0 * PI / np as f64;
            let mut points = Vec::with_capacity(nt * np);
            let mut weights = Vec::with_capacity(nt * np);
            for (z, w) in gl.nodes.iter().zip(&gl.weights) {
                let s = (1.0 - z * z).sqrt();
                for j in 0..np {
                    let p = h * j as f64;
                    points.push(vec![s * p.cos(), s * p.sin(), *z]);
                    weights.push(w * h * norm_c);
                }
            }
            Ok(SphereRule {
                dim: 3,
                points,
                weights,
            })
        }
        _ => Err(Error::Dimension(n)),
    }
}

impl SphereRule {
    pub fn integrate<F: FnMut(&[f64]) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| f(p) * *w)
            .sum()
    }
}

/// int_{|xi|=1} f d-bar S with the given rule order.
pub fn sphere_integral<F: FnMut(&[f64]) -> Complex64>(f: F, n: usize, order: usize) -> Result<Complex64> {
    Ok(sphere_rule(n, order)?.integrate(f))
}

/// Matrix-valued variant.
pub fn sphere_integral_mat<F: FnMut(&[f64]) -> CMat>(mut f: F, n: usize, order: usize, fiber: usize) -> Result<CMat> {
    let rule = sphere_rule(n, order)?;
    let mut acc = CMat::zeros(fiber, fiber);
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        acc += f(p) * Complex64::new(*w, 0.0);
    }
    Ok(acc)
}

/// Sphere integral of the fiber trace of a homogeneous term.
pub fn term_sphere_integral(t: &HomogeneousTerm, n: usize) -> Result<Complex64> {
    sphere_integral(|w| t.trace(w), n, DEFAULT_SPHERE_ORDER)
}

/// Residue density: sphere integral of tr p_{-n}; zero when absent.
pub fn res_x(sym: &InteriorSymbol) -> Result<Complex64> {
    match sym.term_of_degree(-(sym.dim as f64)) {
        Some(t) => term_sphere_integral(t, sym.dim),
        None => Ok(c0()),
    }
}

/// Residue of the log-free member of degree -n.
pub fn res_x0(sym: &LogPolySymbol) -> Result<Complex64> {
    match sym.pair_of_degree(-(sym.dim as f64)) {
        Some((a, _)) => term_sphere_integral(a, sym.dim),
        None => Ok(c0()),
    }
}

/// Settings for the finite-part integral.
#[derive(Clone, Copy, Debug)]
pub struct FiniteOpts {
    pub quad: QuadOpts,
    pub tail_tol: f64,
    pub max_radius: f64,
}

impl Default for FiniteOpts {
    fn default() -> Self {
        FiniteOpts {
            quad: QuadOpts::new(1e-15, 1e-13),
            tail_tol: 1e-10,
            max_radius: 1e9,
        }
    }
}

fn unit_sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Radial factor of the finite part for a homogeneous term of degree d.
pub fn finite_part_radial(d: f64, n: usize, q: QuadOpts) -> f64 {
    let a = d + n as f64;
    if a.abs() < DEG_EPS {
        let (v, _) = crate::quad::integrate_real(|r| chi(r) / r, &[0.5, 1.0], q);
        v
    } else if a > 0.0 {
        let (v, _) = crate::quad::integrate_real(|r| (chi(r) - 1.0) * r.powf(a - 1.0), &[0.5, 1.0], q);
        v - 0.5f64.powf(a) / a
    } else {
        let (v, _) = crate::quad::integrate_real(|r| chi(r) * r.powf(a - 1.0), &[0.5, 1.0], q);
        v - 1.0 / a
    }
}

/// Integral of the remainder over R^n (fiber trace), radial x sphere.
pub fn remainder_integral(r: &Remainder, n: usize, opts: FiniteOpts) -> Result<(Complex64, f64)> {
    let decay = r.decay.ok_or(Error::MissingDecay)?;
    let a = decay + n as f64;
    let area = unit_sphere_area(n) * (2.0 * PI).powi(-(n as i32));
    let tail = |rr: f64| r.bound * area * rr.powf(a) / a.abs();
    let mut rmax = 1.0;
    if let Some(rs) = r.support {
        rmax = rs;
    }
    while r.support.is_none() && tail(rmax) > opts.tail_tol {
        rmax *= 2.0;
        if rmax > opts.max_radius {
            return Err(Error::TailBound {
                bound: tail(opts.max_radius),
                tol: opts.tail_tol,
            });
        }
    }
    let rule = sphere_rule(n, DEFAULT_SPHERE_ORDER)?;
    let mut breaks: Vec<f64> = [0.0, 0.5, 1.0].into_iter().filter(|b| *b < rmax).collect();
    let mut b = 2.0;
    while b < rmax {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(rmax);
    let mut x = vec![0.0; n];
    let res = integrate_breaks(
        |rho| {
            let s = rule.integrate(|w| {
                for i in 0..n {
                    x[i] = rho * w[i];
                }
                r.trace(&x)
            });
            s * rho.powi(n as i32 - 1)
        },
        &breaks,
        opts.quad,
    );
    if !res.converged {
        return Err(Error::Quadrature("remainder integral".into()));
    }
    let t = if r.support.is_some() { 0.0 } else { tail(rmax) };
    Ok((res.value, res.error + t))
}

/// Hadamard finite part TR_x of the realized symbol (fiber trace).
pub fn finite_part(sym: &InteriorSymbol) -> Result<Complex64> {
    finite_part_with(sym, FiniteOpts::default())
}

pub fn finite_part_with(sym: &InteriorSymbol, opts: FiniteOpts) -> Result<Complex64> {
    let n = sym.dim;
    let mut acc = c0();
    for t in &sym.terms {
        let s = term_sphere_integral(t, n)?;
        if s == c0() {
            continue;
        }
        acc += s * finite_part_radial(t.degree, n, opts.quad);
    }
    if let Some(r) = &sym.remainder {
        acc += remainder_integral(r, n, opts)?.0;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_real;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn excision_and_bracket() {
        assert_eq!(chi(0.4), 0.0);
        assert_eq!(chi(1.2), 1.0);
        assert!((chi(0.75) - 0.5).abs() < 1e-15);
        assert_eq!(bracket(2.0), 2.0);
        assert!((bracket(0.0) - 0.5).abs() < 1e-15);
        assert!(bracket(0.3) >= 0.5);
    }

    #[test]
    fn eval_examples() {
        let one = InteriorSymbol::new(2, 0.0, vec![HomogeneousTerm::radial(0.0, c(1.0))], None).unwrap();
        assert!((eval_symbol(&one, &[3.0, 4.0])[(0, 0)] - c(1.0)).norm() < 1e-15);
        let inv = InteriorSymbol::new(2, -1.0, vec![HomogeneousTerm::radial(-1.0, c(1.0))], None).unwrap();
        assert!((eval_symbol(&inv, &[0.0, 2.0])[(0, 0)] - c(0.5)).norm() < 1e-15);
        assert_eq!(eval_symbol(&inv, &[0.3, 0.2])[(0, 0)], c(0.0));
    }

    #[test]
    fn sphere_examples() {
        let v = sphere_integral(|_| c(1.0), 2, 64).unwrap();
        assert!((v.re - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let v = sphere_integral(|_| c(1.0), 3, 24).unwrap();
        assert!((v.re - 1.0 / (2.0 * PI * PI)).abs() < 1e-14);
        let v = sphere_integral(|w| c(w[0] * w[0]), 2, 64).unwrap();
        assert!((v.re - PI / (4.0 * PI * PI)).abs() < 1e-15);
        let v = sphere_integral(|w| c(w[0] * w[0]), 3, 24).unwrap();
        assert!((v.re - (4.0 * PI / 3.0) / (8.0 * PI.powi(3))).abs() < 1e-15);
        assert!(sphere_integral(|_| c(1.0), 4, 8).is_err());
    }

    #[test]
    fn sphere_order_doubling() {
        let f = |w: &[f64]| c((w[0] * 2.0).exp() * (1.0 + w[1] * w[1]).recip());
        for n in [2usize, 3] {
            let g = |w: &[f64]| if n == 2 { f(w) } else { f(w) * (1.0 + w[2]) };
            let a = sphere_integral(g, n, 32).unwrap();
            let b = sphere_integral(g, n, 64).unwrap();
            assert!((a - b).norm() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn residue_examples() {
        let none = InteriorSymbol::new(2, 0.0, vec![HomogeneousTerm::radial(0.0, c(1.0))], None).unwrap();
        assert_eq!(res_x(&none).unwrap(), c(0.0));
        let p = InteriorSymbol::from_terms(2, vec![HomogeneousTerm::radial(-2.0, c(1.0))], None).unwrap();
        assert!((res_x(&p).unwrap().re - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let q = InteriorSymbol::from_terms(
            2,
            vec![HomogeneousTerm::scalar(-2.0, |x| c(x[0] * x[0] / norm(x).powi(4)))],
            None,
        )
        .unwrap();
        assert!((res_x(&q).unwrap().re - 0.5 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn log_free_residue() {
        let unit = HomogeneousTerm::radial(-2.0, c(1.0));
        let z = HomogeneousTerm::zero(-2.0, 1);
        let pure_log = LogPolySymbol::new(2, vec![(z.clone(), unit.clone())]).unwrap();
        assert_eq!(res_x0(&pure_log).unwrap(), c(0.0));
        let free = LogPolySymbol::new(2, vec![(unit, z)]).unwrap();
        assert!((res_x0(&free).unwrap().re - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn finite_part_degree_minus_n() {
        let p = InteriorSymbol::from_terms(2, vec![HomogeneousTerm::radial(-2.0, c(1.0))], None).unwrap();
        let (rad, _) = integrate_real(|r| chi(r) / r, &[0.5, 1.0], QuadOpts::new(1e-16, 1e-15));
        let want = rad / (2.0 * PI);
        assert!((finite_part(&p).unwrap().re - want).abs() < 1e-14);
    }

    #[test]
    fn finite_part_convergent_term() {
        // degree -3 in n = 2: full integral of chi |xi|^{-3}
        let p = InteriorSymbol::from_terms(2, vec![HomogeneousTerm::radial(-3.0, c(1.0))], None).unwrap();
        let (v, _) = integrate_real(|r| chi(r) * r.powi(-2), &[0.5, 1.0, f64::INFINITY], QuadOpts::new(1e-16, 1e-14));
        assert!((finite_part(&p).unwrap().re - v / (2.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn remainder_requires_decay() {
        let r = Remainder::scalar(None, 1.0, |x| c((1.0 + norm(x).powi(2)).powi(-2)));
        let p = InteriorSymbol::new(2, 0.0, vec![], Some(r)).unwrap();
        assert!(matches!(finite_part(&p), Err(Error::MissingDecay)));
    }

    #[test]
    fn remainder_integral_value() {
        // int (1+|xi|^2)^{-2} d-bar xi over R^2 = 1/(4 pi)
        let r = Remainder::scalar(Some(-4.0), 1.0, |x| c((1.0 + norm(x).powi(2)).powi(-2)));
        let p = InteriorSymbol::new(2, 0.0, vec![], Some(r)).unwrap();
        let v = finite_part(&p).unwrap();
        assert!((v.re - 1.0 / (4.0 * PI)).abs() < 2e-10, "{v}");
    }

    #[test]
    fn degrees_must_step_by_one() {
        let bad = InteriorSymbol::new(
            2,
            0.0,
            vec![HomogeneousTerm::radial(0.0, c(1.0)), HomogeneousTerm::radial(-2.0, c(1.0))],
            None,
        );
        assert!(bad.is_err());
    }
}
