//! Builtin symbol families used by the acceptance suite and the CLI.

use crate::boundary::LaguerreSgo;
use crate::error::Result;
use crate::rational::{Angular, PoleTerm, PolyTerm, RationalSymbol, Side};
use crate::symbol::{norm, HomogeneousTerm, InteriorSymbol, Remainder};
use num_complex::Complex64;

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// Scalar symbol on R^2 with terms of degree 0, -1, -2 and a compactly
/// supported remainder.
pub fn interior_p() -> Result<InteriorSymbol> {
    let t0 = HomogeneousTerm::scalar(0.0, |xi: &[f64]| {
        let s = norm(xi);
        c(1.0 + 0.5 * (xi[0] / s).powi(2))
    });
    let t1 = HomogeneousTerm::scalar(-1.0, |xi: &[f64]| {
        let s = norm(xi);
        c(0.7 / s + 0.2 * xi[0] / (s * s))
    });
    let t2 = HomogeneousTerm::scalar(-2.0, |xi: &[f64]| {
        let s2 = xi[0] * xi[0] + xi[1] * xi[1];
        c(0.4 * (1.0 + xi[1] * xi[1] / s2) / s2)
    });
    let rem = Remainder::scalar(Some(-3.0), 0.25, |xi: &[f64]| {
        let u = 1.0 - (xi[0] * xi[0] + xi[1] * xi[1]) / 4.0;
        if u > 0.0 {
            c(0.25 * u * u)
        } else {
            c(0.0)
        }
    })
    .with_support(2.0);
    InteriorSymbol::new(2, 0.0, vec![t0, t1, t2], Some(rem))
}

/// |xi|^{-k} on R^n realized as one homogeneous term.
pub fn radial_power(n: usize, k: f64, coeff: f64) -> Result<InteriorSymbol> {
    InteriorSymbol::from_terms(n, vec![HomogeneousTerm::radial(-k, c(coeff))], None)
}

/// Order-0 symbol on R^2 rational in xi_n: a constant plus plus- and
/// minus-side poles of degrees -1 and -2.
pub fn rational_p() -> Result<RationalSymbol> {
    RationalSymbol::new(
        2,
        vec![PolyTerm { ang: Angular::constant(1.0), alpha: vec![], alpha_n: 0 }],
        vec![
            PoleTerm { ang: Angular::constant(1.0), side: Side::Plus, b: 1.0, k: 1, q: 0 },
            PoleTerm { ang: Angular { a0: c(0.5), a: vec![c(0.3)] }, side: Side::Plus, b: 2.0, k: 2, q: 1 },
            PoleTerm { ang: Angular::constant(0.8), side: Side::Minus, b: 1.5, k: 1, q: 0 },
            PoleTerm { ang: Angular::constant(0.4), side: Side::Plus, b: 1.0, k: 2, q: 0 },
        ],
    )
}

fn entry(t0: f64, t1: f64, odd: f64) -> Result<InteriorSymbol> {
    InteriorSymbol::new(
        1,
        0.0,
        vec![
            HomogeneousTerm::scalar(0.0, move |_| c(t0)),
            HomogeneousTerm::scalar(-1.0, move |xp: &[f64]| {
                let s = norm(xp);
                c((t1 + odd * xp[0] / s) / s)
            }),
        ],
        None,
    )
}

/// Order-0 singular Green operator on R^2_+: diagonal entries at l = 0, 1
/// and the off-diagonal pair (0, 1), (1, 0).
pub fn green_g() -> Result<LaguerreSgo> {
    LaguerreSgo::new(
        0.0,
        1,
        vec![
            (0, 0, entry(1.0, 0.5, 0.1)?),
            (1, 1, entry(-0.4, 0.3, 0.0)?),
            (0, 1, entry(0.2, 0.25, 0.0)?),
            (1, 0, entry(0.0, -0.15, 0.05)?),
        ],
    )
}

/// Diagonal singular Green operator with a single strictly homogeneous
/// coefficient a/|xi'| at (l, l).
pub fn diagonal_g(l: usize, a: f64) -> Result<LaguerreSgo> {
    let s = InteriorSymbol::from_terms(1, vec![HomogeneousTerm::radial(-1.0, c(a))], None)?;
    LaguerreSgo::new(-1.0, 1, vec![(l, l, s)])
}

/// Residue-free variant of `green_g`: the degree -1 coefficients are odd.
pub fn green_g_residue_free() -> Result<LaguerreSgo> {
    LaguerreSgo::new(
        0.0,
        1,
        vec![
            (0, 0, entry(1.0, 0.0, 0.5)?),
            (1, 1, entry(-0.4, 0.0, 0.2)?),
            (0, 1, entry(0.2, 0.0, 0.3)?),
        ],
    )
}
