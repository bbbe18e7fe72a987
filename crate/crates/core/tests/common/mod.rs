//! Double-exponential quadrature used as an oracle. It shares no code with
//! the adaptive Gauss–Kronrod integrator in the library.
#![allow(dead_code)]

use bvzeta::Complex64 as C;
use std::f64::consts::FRAC_PI_2;

fn de_sum<M, F>(map: M, f: F, tmax: f64) -> C
where
    M: Fn(f64) -> (f64, f64),
    F: Fn(f64) -> C,
{
    let node = |t: f64| -> C {
        let (x, w) = map(t);
        if w == 0.0 || !w.is_finite() {
            return C::new(0.0, 0.0);
        }
        let v = f(x) * w;
        if v.re.is_finite() && v.im.is_finite() {
            v
        } else {
            C::new(0.0, 0.0)
        }
    };
    let mut h = 0.5;
    let n = (tmax / h) as i64;
    let mut sum: C = (-n..=n).map(|k| node(k as f64 * h)).sum();
    let mut est = sum * h;
    for level in 0..10 {
        h /= 2.0;
        let n = (tmax / h) as i64;
        let odd: C = (-n..=n).filter(|k| k % 2 != 0).map(|k| node(k as f64 * h)).sum();
        sum += odd;
        let next = sum * h;
        let done = level >= 2 && (next - est).norm() <= 1e-15 * next.norm().max(1e-300);
        est = next;
        if done {
            break;
        }
    }
    est
}

/// int_a^b f by the tanh-sinh rule; f is never evaluated at an endpoint.
pub fn finite<F: Fn(f64) -> C>(f: F, a: f64, b: f64) -> C {
    let half = 0.5 * (b - a);
    de_sum(
        |t| {
            let u = FRAC_PI_2 * t.sinh();
            let ch = u.cosh();
            // distance to the nearer endpoint without cancellation
            let gap = half * 2.0 / ((2.0 * u.abs()).exp() + 1.0);
            let x = if u >= 0.0 { b - gap } else { a + gap };
            (x, half * FRAC_PI_2 * t.cosh() / (ch * ch))
        },
        f,
        3.5,
    )
}

/// int_a^inf f by the exp-sinh rule.
pub fn half_line<F: Fn(f64) -> C>(f: F, a: f64) -> C {
    de_sum(
        |t| {
            let e = (FRAC_PI_2 * t.sinh()).exp();
            (a + e, FRAC_PI_2 * t.cosh() * e)
        },
        f,
        4.5,
    )
}

/// int_R f by the sinh-sinh rule.
pub fn real_line<F: Fn(f64) -> C>(f: F) -> C {
    de_sum(
        |t| {
            let u = FRAC_PI_2 * t.sinh();
            (u.sinh(), FRAC_PI_2 * t.cosh() * u.cosh())
        },
        f,
        4.5,
    )
}

pub fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Relative distance with a floor on the denominator.
pub fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn oracle_sanity() {
    use std::f64::consts::PI;
    assert!((finite(|x| re(x.sqrt().ln()), 0.0, 1.0).re + 0.5).abs() < 1e-14);
    assert!((half_line(|x| re(1.0 / (x * x)), 1.0).re - 1.0).abs() < 1e-14);
    assert!((real_line(|x| re(1.0 / (1.0 + x * x))).re - PI).abs() < 1e-14);
}
