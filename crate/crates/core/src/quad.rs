//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (21 points)
//! on unions of finite and semi-infinite intervals, plus Gauss–Legendre and
//! Gauss–Laguerre rules from the Golub–Welsch eigenproblem.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208062780940,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Tolerances and budget for the adaptive integrators.
#[derive(Clone, Copy, Debug)]
pub struct QuadOpts {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts {
            abs: 1e-15,
            rel: 1e-13,
            max_segments: 4000,
        }
    }
}

impl QuadOpts {
    pub fn new(abs: f64, rel: f64) -> Self {
        QuadOpts {
            abs,
            rel,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Map {
    Id,
    /// x = a + t/(1-t), t in [0,1)
    Upper(f64),
}

#[derive(Clone, Copy, Debug)]
struct Seg {
    a: f64,
    b: f64,
    map: Map,
    val: Complex64,
    err: f64,
    mass: f64,
}

impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn eval_mapped<F: FnMut(f64) -> Complex64>(f: &mut F, map: Map, t: f64) -> Complex64 {
    match map {
        Map::Id => f(t),
        Map::Upper(a) => {
            if t >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let s = 1.0 - t;
            let x = a + t / s;
            let v = f(x);
            if v.re == 0.0 && v.im == 0.0 {
                v
            } else {
                v / (s * s)
            }
        }
    }
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64, map: Map) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = eval_mapped(f, map, c);
    let mut rk = fc * WGK[10];
    let mut rg = Complex64::new(0.0, 0.0);
    let mut resabs = fc.norm() * WGK[10];
    let mut fv = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = eval_mapped(f, map, c - dx);
        let f2 = eval_mapped(f, map, c + dx);
        fv[j] = (f1, f2);
        rk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            rg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = rk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j].0 - mean).norm() + (fv[j].1 - mean).norm());
    }
    let val = rk * h;
    resabs *= h.abs();
    resasc *= h.abs();
    let mut err = ((rk - rg) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (val, err, resabs)
}

/// Integrates `f` over the union of the consecutive intervals given by
/// `breaks`; a final break of `f64::INFINITY` adds a mapped tail.
pub fn integrate_breaks<F: FnMut(f64) -> Complex64>(
    mut f: F,
    breaks: &[f64],
    opts: QuadOpts,
) -> QuadResult {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (lo, hi, map) = if b.is_infinite() {
            (0.0, 1.0, Map::Upper(a))
        } else {
            (a, b, Map::Id)
        };
        let (val, err, mass) = kronrod(&mut f, lo, hi, map);
        evals += 21;
        heap.push(Seg {
            a: lo,
            b: hi,
            map,
            val,
            err,
            mass,
        });
    }
    let mut v: Complex64 = heap.iter().map(|s| s.val).sum();
    let mut e: f64 = heap.iter().map(|s| s.err).sum();
    let mut mass: f64 = heap.iter().map(|s| s.mass).sum();
    loop {
        // the last term accepts results limited by cancellation roundoff
        let tol = opts.abs.max(opts.rel * v.norm()).max(100.0 * f64::EPSILON * mass);
        if e <= tol || heap.len() >= opts.max_segments {
            let value: Complex64 = heap.iter().map(|s| s.val).sum();
            let error: f64 = heap.iter().map(|s| s.err).sum();
            return QuadResult {
                value,
                error,
                evals,
                converged: error <= tol,
            };
        }
        let s = heap.pop().unwrap();
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            e -= s.err;
            heap.push(Seg { err: 0.0, ..s });
            continue;
        }
        let (v1, e1, m1) = kronrod(&mut f, s.a, m, s.map);
        let (v2, e2, m2) = kronrod(&mut f, m, s.b, s.map);
        evals += 42;
        v += v1 + v2 - s.val;
        e += e1 + e2 - s.err;
        mass += m1 + m2 - s.mass;
        heap.push(Seg {
            a: s.a,
            b: m,
            map: s.map,
            val: v1,
            err: e1,
            mass: m1,
        });
        heap.push(Seg {
            a: m,
            b: s.b,
            map: s.map,
            val: v2,
            err: e2,
            mass: m2,
        });
    }
}

pub fn integrate<F: FnMut(f64) -> Complex64>(f: F, a: f64, b: f64, opts: QuadOpts) -> QuadResult {
    integrate_breaks(f, &[a, b], opts)
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], opts: QuadOpts) -> (f64, f64) {
    let r = integrate_breaks(|x| Complex64::new(f(x), 0.0), breaks, opts);
    (r.value.re, r.error)
}

/// Nodes and weights of a Gauss rule on a reference interval.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn golub_welsch(diag: Vec<f64>, off: Vec<f64>, mu0: f64) -> GaussRule {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Legendre rule on [-1, 1]; nodes polished by Newton steps.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let mut rule = golub_welsch(diag, off, 2.0);
    for i in 0..n {
        let mut x = rule.nodes[i];
        for _ in 0..3 {
            let (p, d) = legendre_pd(n, x);
            x -= p / d;
        }
        let (_, d) = legendre_pd(n, x);
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * d * d);
    }
    rule
}

fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Gauss–Laguerre rule for the weight e^{-t} on [0, inf).
pub fn gauss_laguerre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|k| k as f64).collect();
    let mut rule = golub_welsch(diag, off, 1.0);
    for i in 0..n {
        let mut t = rule.nodes[i];
        for _ in 0..3 {
            let (p, q) = scaled_laguerre_pair(n, t);
            t -= p * t / (n as f64 * (p - q));
        }
        let (p1, _) = scaled_laguerre_pair(n + 1, t);
        rule.nodes[i] = t;
        rule.weights[i] = (-t).exp() * t / ((n + 1) as f64 * p1).powi(2);
    }
    rule
}

/// (e^{-t/2} L_n(t), e^{-t/2} L_{n-1}(t)); bounded by 1 for t >= 0.
fn scaled_laguerre_pair(n: usize, t: f64) -> (f64, f64) {
    let e = (-0.5 * t).exp();
    let (mut p0, mut p1) = (e, (1.0 - t) * e);
    if n == 0 {
        return (p0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0 - t) * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}
