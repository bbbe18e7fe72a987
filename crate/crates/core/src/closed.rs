//! Exact formulas for the normal-variable integrals of Laguerre products,
//! with companion quadratures used as oracles.

use crate::jet::Jet;
use crate::quad::{integrate_breaks, integrate_real, QuadOpts};
use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// s^{+-}_{l,m}(r, kappa) = int (r-i t)^l/(r+i t)^{l+1} (r+i t)^m/(r-i t)^{m+1}
/// (kappa +- i t)^{-1} d-bar t.
pub fn s_pm(sign: Sign, l: usize, m: usize, r: f64, kappa: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let rr = Complex64::new(r, 0.0);
    if l == m {
        return one / ((kappa + rr) * (2.0 * r));
    }
    let (active, k) = if l > m {
        (Sign::Minus, l - m)
    } else {
        (Sign::Plus, m - l)
    };
    if sign != active {
        return Complex64::new(0.0, 0.0);
    }
    (rr - kappa).powi(k as i32 - 1) / (rr + kappa).powi(k as i32 + 1)
}

/// Same as `s_pm` with kappa a jet in lambda.
pub fn s_pm_jet(sign: Sign, l: usize, m: usize, r: f64, kappa: &Jet) -> Jet {
    let n = kappa.len();
    let rr = Complex64::new(r, 0.0);
    if l == m {
        return (kappa.add_const(rr).scale(Complex64::new(2.0 * r, 0.0))).recip();
    }
    let (active, k) = if l > m {
        (Sign::Minus, l - m)
    } else {
        (Sign::Plus, m - l)
    };
    if sign != active {
        return Jet::real(0.0, n);
    }
    let a = (-kappa).add_const(rr);
    let b = kappa.add_const(rr);
    a.powi(k as i32 - 1) * b.powi(-(k as i32) - 1)
}

/// Direct quadrature of the defining integral of `s_pm`.
pub fn s_pm_quad(sign: Sign, l: usize, m: usize, r: f64, kappa: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let sg = if sign == Sign::Plus { 1.0 } else { -1.0 };
    let f = |t: f64| {
        let a = Complex64::new(r, -t);
        let b = Complex64::new(r, t);
        a.powi(l as i32) / b.powi(l as i32 + 1) * b.powi(m as i32) / a.powi(m as i32 + 1) / (kappa + i * (sg * t))
    };
    let res = integrate_breaks(|t| f(t) + f(-t), &[0.0, 1.0, 4.0, f64::INFINITY], QuadOpts::new(1e-15, 1e-13));
    res.value / (2.0 * PI)
}

/// a^{-2}(log(sqrt(1+a^2)+1) - log 2), evaluated without cancellation.
pub fn int_log_tail(a: f64) -> f64 {
    let a2 = a * a;
    (a2 / (2.0 * ((1.0 + a2).sqrt() + 1.0))).ln_1p() / a2
}

/// Quadrature of int_1^inf dr / (r k (k + r)), k = sqrt(r^2 + a^2).
pub fn int_log_tail_quad(a: f64) -> f64 {
    let f = |r: f64| {
        let k = (r * r + a * a).sqrt();
        1.0 / (r * k * (k + r))
    };
    integrate_real(f, &[1.0, 1.0 + a, f64::INFINITY], QuadOpts::new(1e-18, 1e-14)).0
}

/// (2j)^{-1} a^{-2} (sqrt(1 + a^{-2}) - a^{-1})^{2j}.
pub fn int_power_tail(a: f64, j: u32) -> f64 {
    let u = 1.0 / ((1.0 + 1.0 / (a * a)).sqrt() + 1.0 / a);
    u.powi(2 * j as i32) / (2.0 * j as f64 * a * a)
}

/// Quadrature of int_1^inf (k - r)^{j-1} / (k (k + r)^{j+1}) dr.
pub fn int_power_tail_quad(a: f64, j: u32) -> f64 {
    let f = |r: f64| {
        let k = (r * r + a * a).sqrt();
        let d = a * a / (k + r);
        d.powi(j as i32 - 1) / (k * (k + r).powi(j as i32 + 1))
    };
    integrate_real(f, &[1.0, 1.0 + a, f64::INFINITY], QuadOpts::new(1e-20, 1e-14)).0
}

/// 2 pi log 2.
pub fn two_pi_log2() -> f64 {
    2.0 * PI * LN_2
}

/// Quadrature of int_R log(1+s^2)/(1+s^2) ds (even integrand, doubled).
pub fn two_pi_log2_quad() -> f64 {
    let f = |s: f64| (s * s).ln_1p() / (1.0 + s * s);
    2.0 * integrate_real(f, &[0.0, 1.0, f64::INFINITY], QuadOpts::new(1e-15, 1e-14)).0
}

/// int |phi_l(r, t)|^2 log(r^2 + t^2) d-bar t = 2 log 2 + log r^2.
pub fn laguerre_log_diag(r: f64) -> f64 {
    2.0 * LN_2 + (r * r).ln()
}

/// int phi_l(r,t) conj(phi_m(r,t)) log(r^2 + t^2) d-bar t for l != m,
/// which equals (-1)^{l-m}/|l-m| independently of r.
pub fn laguerre_log_offdiag(l: usize, m: usize) -> f64 {
    assert!(l != m);
    let k = l.abs_diff(m);
    let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    s / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spm_examples() {
        let k = Complex64::new(2f64.sqrt(), 0.0);
        let v = s_pm(Sign::Plus, 3, 3, 1.0, k);
        assert!((v.re - 1.0 / (2.0 * (1.0 + 2f64.sqrt()))).abs() < 1e-15);
        assert_eq!(s_pm(Sign::Plus, 2, 1, 1.0, k), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn spm_vs_quadrature() {
        for mu in [0.5f64, 2.0] {
            let k = Complex64::new((1.0 + mu * mu).sqrt(), 0.0);
            for l in 0..=4 {
                for m in 0..=4 {
                    for sg in [Sign::Plus, Sign::Minus] {
                        let a = s_pm(sg, l, m, 1.0, k);
                        let b = s_pm_quad(sg, l, m, 1.0, k);
                        assert!((a - b).norm() < 1e-10, "{l} {m} {sg:?} {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn spm_jet_value_matches() {
        let lam = Jet::var(Complex64::new(-3.0, 0.0), 3);
        let kap = (-&lam).add_const(Complex64::new(1.0, 0.0)).sqrt();
        for (l, m) in [(0, 0), (3, 1), (1, 4)] {
            for sg in [Sign::Plus, Sign::Minus] {
                let j = s_pm_jet(sg, l, m, 1.0, &kap);
                let v = s_pm(sg, l, m, 1.0, kap.value());
                assert!((j.value() - v).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tails_closed_vs_quad() {
        for a in [0.5, 1.0, 2.0, 10.0] {
            let (x, y) = (int_log_tail(a), int_log_tail_quad(a));
            assert!(((x - y) / x).abs() < 1e-10, "a={a}");
            for j in 1..=3 {
                let (x, y) = (int_power_tail(a, j), int_power_tail_quad(a, j));
                assert!(((x - y) / x).abs() < 1e-10, "a={a} j={j}");
            }
        }
        assert!((int_log_tail(1.0) - ((1.0 + 2f64.sqrt()) / 2.0).ln()).abs() < 1e-15);
        assert!((int_power_tail(1.0, 1) - 0.5 * (2f64.sqrt() - 1.0).powi(2)).abs() < 1e-15);
        assert!(int_power_tail(2.0, 2) < int_power_tail(2.0, 1));
    }

    #[test]
    fn two_pi_log2_value() {
        assert!((two_pi_log2_quad() - two_pi_log2()).abs() < 1e-10);
        assert!((two_pi_log2() - 4.3551721).abs() < 1e-7);
    }

    #[test]
    fn log_diag_and_offdiag() {
        let phi2 = |l: usize, m: usize, r: f64, t: f64| {
            let a = Complex64::new(r, -t);
            let b = Complex64::new(r, t);
            a.powi(l as i32) / b.powi(l as i32 + 1) * b.powi(m as i32) / a.powi(m as i32 + 1) * (2.0 * r)
        };
        for r in [0.7, 1.0, 2.5] {
            for (l, m) in [(2usize, 2usize), (1, 0), (0, 2), (4, 1)] {
                let f = |t: f64| (phi2(l, m, r, t) + phi2(l, m, r, -t)) * (r * r + t * t).ln();
                let q = integrate_breaks(f, &[0.0, r, 8.0 * r, f64::INFINITY], QuadOpts::new(1e-15, 1e-14)).value / (2.0 * PI);
                let want = if l == m { laguerre_log_diag(r) } else { laguerre_log_offdiag(l, m) };
                assert!((q.re - want).abs() < 1e-9 && q.im.abs() < 1e-9, "{l} {m} {r} {q}");
            }
        }
    }
}
