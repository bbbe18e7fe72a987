//! Symbols that are rational in the normal frequency: a polynomial part plus
//! pole terms a(w') [xi']^q / (b [xi'] +- i xi_n)^k. The polynomial part is
//! the differential piece, the pole terms have normal order <= -1.

use crate::closed::Sign;
use crate::error::{Error, Result};
use crate::symbol::{bracket, norm, HomogeneousTerm, InteriorSymbol, Remainder};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;

/// Angular factor a0 + sum_i a_i w'_i on the unit sphere of R^{n-1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angular {
    pub a0: C,
    #[serde(default)]
    pub a: Vec<C>,
}

impl Angular {
    pub fn constant(v: f64) -> Angular {
        Angular {
            a0: C::new(v, 0.0),
            a: vec![],
        }
    }

    pub fn eval(&self, w: &[f64]) -> C {
        let mut v = self.a0;
        for (ai, wi) in self.a.iter().zip(w) {
            v += ai * wi;
        }
        v
    }

    fn sup(&self) -> f64 {
        self.a0.norm() + self.a.iter().map(|x| x.norm()).sum::<f64>()
    }
}

/// ang(w') xi'^alpha xi_n^alpha_n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub ang: Angular,
    #[serde(default)]
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub alpha_n: u32,
}

impl PolyTerm {
    pub fn degree(&self) -> i32 {
        (self.alpha.iter().sum::<u32>() + self.alpha_n) as i32
    }

    fn tangential(&self, xp: &[f64]) -> f64 {
        self.alpha
            .iter()
            .zip(xp)
            .map(|(a, x)| x.powi(*a as i32))
            .product()
    }
}

/// ang(w') [xi']^q / (b [xi'] + i xi_n)^k  (Plus)  or with - i xi_n (Minus).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub ang: Angular,
    pub side: Side,
    pub b: f64,
    pub k: u32,
    pub q: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl From<Side> for Sign {
    fn from(s: Side) -> Sign {
        match s {
            Side::Plus => Sign::Plus,
            Side::Minus => Sign::Minus,
        }
    }
}

impl PoleTerm {
    pub fn degree(&self) -> i32 {
        self.q - self.k as i32
    }

    fn sign(&self) -> f64 {
        match self.side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    /// Value with a given tangential length (|xi'| or [xi']).
    pub fn eval_len(&self, w: &[f64], len: f64, xi_n: f64) -> C {
        let den = C::new(self.b * len, self.sign() * xi_n).powi(self.k as i32);
        self.ang.eval(w) * len.powi(self.q) / den
    }
}

/// Symbol rational in xi_n, in the split form polynomial + pole terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalSymbol {
    pub dim: usize,
    #[serde(default)]
    pub poly: Vec<PolyTerm>,
    #[serde(default)]
    pub poles: Vec<PoleTerm>,
}

fn unit(xp: &[f64]) -> Vec<f64> {
    let s = norm(xp);
    if s == 0.0 {
        vec![0.0; xp.len()]
    } else {
        xp.iter().map(|x| x / s).collect()
    }
}

impl RationalSymbol {
    pub fn new(dim: usize, poly: Vec<PolyTerm>, poles: Vec<PoleTerm>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        for t in &poly {
            if t.alpha.len() > dim - 1 || t.ang.a.len() > dim - 1 {
                return Err(Error::InvalidSymbol("tangential index length exceeds n-1".into()));
            }
        }
        for t in &poles {
            if t.k == 0 || !(t.b > 0.0) {
                return Err(Error::InvalidSymbol("pole term needs k >= 1 and b > 0".into()));
            }
            if t.ang.a.len() > dim - 1 {
                return Err(Error::InvalidSymbol("angular length exceeds n-1".into()));
            }
        }
        Ok(RationalSymbol { dim, poly, poles })
    }

    pub fn zero(dim: usize) -> Self {
        RationalSymbol {
            dim,
            poly: vec![],
            poles: vec![],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_empty() && self.poles.is_empty()
    }

    /// Highest homogeneity degree (integer order).
    pub fn order(&self) -> i32 {
        self.poly
            .iter()
            .map(|t| t.degree())
            .chain(self.poles.iter().map(|t| t.degree()))
            .max()
            .unwrap_or(i32::MIN)
    }

    /// The normal-order <= -1 part (pole terms only).
    pub fn normal_part(&self) -> RationalSymbol {
        RationalSymbol {
            dim: self.dim,
            poly: vec![],
            poles: self.poles.clone(),
        }
    }

    /// The polynomial (differential) part.
    pub fn polynomial_part(&self) -> RationalSymbol {
        RationalSymbol {
            dim: self.dim,
            poly: self.poly.clone(),
            poles: vec![],
        }
    }

    /// Boundary-side value at (xi', xi_n), using [xi'] in the pole terms.
    pub fn eval(&self, xp: &[f64], xi_n: f64) -> C {
        let w = unit(xp);
        let r = bracket(norm(xp));
        let mut v = C::new(0.0, 0.0);
        for t in &self.poly {
            v += t.ang.eval(&w) * t.tangential(xp) * xi_n.powi(t.alpha_n as i32);
        }
        for t in &self.poles {
            v += t.eval_len(&w, r, xi_n);
        }
        v
    }

    /// Strictly homogeneous value at xi = (xi', xi_n) != 0, using |xi'|.
    pub fn eval_homogeneous(&self, xi: &[f64]) -> C {
        let n = self.dim;
        let xp = &xi[..n - 1];
        let xn = xi[n - 1];
        let w = unit(xp);
        let s = norm(xp);
        let mut v = C::new(0.0, 0.0);
        for t in &self.poly {
            v += t.ang.eval(&w) * t.tangential(xp) * xn.powi(t.alpha_n as i32);
        }
        for t in &self.poles {
            v += t.eval_len(&w, s, xn);
        }
        v
    }

    /// Interior view: homogeneous terms grouped by degree, excised near 0;
    /// the polynomial part is restored exactly below |xi| = 1 by a compactly
    /// supported remainder.
    pub fn interior(&self) -> Result<InteriorSymbol> {
        let n = self.dim;
        let mut terms = Vec::new();
        for t in self.poly.clone() {
            let d = t.degree() as f64;
            terms.push(HomogeneousTerm::scalar(d, move |xi: &[f64]| {
                let xp = &xi[..n - 1];
                t.ang.eval(&unit(xp)) * t.tangential(xp) * xi[n - 1].powi(t.alpha_n as i32)
            }));
        }
        for t in self.poles.clone() {
            let d = t.degree() as f64;
            terms.push(HomogeneousTerm::scalar(d, move |xi: &[f64]| {
                let xp = &xi[..n - 1];
                t.eval_len(&unit(xp), norm(xp), xi[n - 1])
            }));
        }
        let remainder = if self.poly.is_empty() {
            None
        } else {
            let poly = self.polynomial_part();
            let sup: f64 = self.poly.iter().map(|t| t.ang.sup()).sum();
            let decay = -(n as f64) - 1.0;
            let bound = sup * 2f64.powf((n as f64 + 1.0) / 2.0);
            Some(
                Remainder::scalar(Some(decay), bound, move |xi: &[f64]| {
                    let w = 1.0 - crate::symbol::chi(norm(xi));
                    if w == 0.0 {
                        C::new(0.0, 0.0)
                    } else {
                        poly.eval_homogeneous(xi) * w
                    }
                })
                .with_support(1.0),
            )
        };
        InteriorSymbol::from_terms(n, terms, remainder)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{eval_symbol, res_x};
    use std::f64::consts::PI;

    fn inverse_square(dim: usize) -> RationalSymbol {
        // |xi|^{-2} split into two pole terms of normal order -1
        let half = Angular::constant(0.5);
        RationalSymbol::new(
            dim,
            vec![],
            vec![
                PoleTerm { ang: half.clone(), side: Side::Plus, b: 1.0, k: 1, q: -1 },
                PoleTerm { ang: half, side: Side::Minus, b: 1.0, k: 1, q: -1 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn split_reproduces_inverse_square() {
        let p = inverse_square(2);
        for xi in [[0.3, 1.7], [2.0, -0.5], [-1.5, 0.0]] {
            let v = p.eval_homogeneous(&xi);
            assert!((v.re - 1.0 / (xi[0] * xi[0] + xi[1] * xi[1])).abs() < 1e-14);
            assert!(v.im.abs() < 1e-14);
        }
        let s = p.interior().unwrap();
        assert!((res_x(&s).unwrap().re - 1.0 / (2.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn boundary_and_homogeneous_agree_outside_unit_ball() {
        let p = RationalSymbol::new(
            2,
            vec![PolyTerm { ang: Angular::constant(2.0), alpha: vec![1], alpha_n: 1 }],
            vec![PoleTerm { ang: Angular { a0: C::new(1.0, 0.0), a: vec![C::new(0.5, 0.0)] }, side: Side::Plus, b: 2.0, k: 2, q: 1 }],
        )
        .unwrap();
        for xi in [[1.2, 0.4], [-3.0, 2.0]] {
            let a = p.eval(&xi[..1], xi[1]);
            let b = p.eval_homogeneous(&xi);
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(p.order(), 2);
    }

    #[test]
    fn interior_view_restores_polynomial() {
        let p = RationalSymbol::new(
            2,
            vec![PolyTerm { ang: Angular::constant(1.0), alpha: vec![], alpha_n: 2 }],
            vec![],
        )
        .unwrap();
        let s = p.interior().unwrap();
        for xi in [[0.1, 0.2], [0.5, 0.6], [2.0, 3.0]] {
            let v = eval_symbol(&s, &xi)[(0, 0)];
            assert!((v.re - xi[1] * xi[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_poles() {
        let bad = RationalSymbol::new(
            2,
            vec![],
            vec![PoleTerm { ang: Angular::constant(1.0), side: Side::Plus, b: 0.0, k: 1, q: 0 }],
        );
        assert!(bad.is_err());
        assert!(RationalSymbol::new(1, vec![], vec![]).is_err());
    }
}
