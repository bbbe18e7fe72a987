//! The auxiliary operator c|xi|^m with the Dirichlet condition: resolvent
//! symbols, kappa, boundary kernels and iterated resolvent powers.

use crate::boundary::{ExpTerm, Kernel};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::symbol::norm;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryModel {
    /// Order m (even).
    pub m: u32,
    /// Scale: p1(xi) = c |xi|^m.
    pub c: f64,
    /// Ray angle: lambda = -mu^m e^{i theta}.
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "yes")]
    pub dirichlet: bool,
}

fn yes() -> bool {
    true
}

impl Default for AuxiliaryModel {
    fn default() -> Self {
        AuxiliaryModel {
            m: 2,
            c: 1.0,
            theta: 0.0,
            dirichlet: true,
        }
    }
}

impl AuxiliaryModel {
    pub fn new(m: u32, c: f64, theta: f64) -> Result<Self> {
        let mdl = AuxiliaryModel {
            m,
            c,
            theta,
            dirichlet: true,
        };
        mdl.validate()?;
        Ok(mdl)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || !self.m.is_multiple_of(2) {
            return Err(Error::Config(format!("order m = {} must be even and positive", self.m)));
        }
        if !(self.c > 0.0) {
            return Err(Error::Config(format!("scale c = {} must be positive", self.c)));
        }
        if !(self.theta.abs() < PI) {
            return Err(Error::Config("cut angle must lie in (-pi, pi)".into()));
        }
        Ok(())
    }

    /// Point on the ray: -mu^m e^{i theta}.
    pub fn lambda(&self, mu: f64) -> C {
        -C::from_polar(mu.powi(self.m as i32), self.theta)
    }

    pub fn p1(&self, xi: &[f64]) -> f64 {
        self.c * norm(xi).powi(self.m as i32)
    }

    fn need_m2(&self) -> Result<()> {
        if self.m != 2 {
            return Err(Error::Unsupported(format!("boundary kernels need m = 2, got m = {}", self.m)));
        }
        Ok(())
    }
}

/// (p1(xi) - lambda)^{-N}.
pub fn q_symbol(model: &AuxiliaryModel, xi: &[f64], lambda: C, n: u32) -> Result<C> {
    let d = C::new(model.p1(xi), 0.0) - lambda;
    if d.norm() < 1e-300 {
        return Err(Error::Pole(format!("p1(xi) = lambda = {lambda}")));
    }
    Ok(d.powi(-(n as i32)))
}

/// kappa = (|xi'|^2 - lambda/c)^{1/2}, principal branch.
pub fn kappa(model: &AuxiliaryModel, xp: &[f64], lambda: C) -> Result<C> {
    model.need_m2()?;
    let k = (C::new(norm(xp).powi(2), 0.0) - lambda / model.c).sqrt();
    if !(k.re > 0.0) {
        return Err(Error::Branch(format!("Re kappa = {} at lambda = {lambda}", k.re)));
    }
    Ok(k)
}

/// kappa as a jet in lambda, expanded at `lambda` with `len` coefficients.
pub fn kappa_jet(model: &AuxiliaryModel, rho2: f64, lambda: C, len: usize) -> Jet {
    let lam = Jet::var(lambda, len);
    (-lam.scale(C::new(1.0 / model.c, 0.0))).add_const(C::new(rho2, 0.0)).sqrt()
}

/// Symbol-kernel of G^-(Q_lambda): (1/(2 c kappa)) e^{-kappa (x+y)}.
pub fn gminus_q_kernel(model: &AuxiliaryModel, xp: &[f64], lambda: C) -> Result<Kernel> {
    let k = kappa(model, xp, lambda)?;
    Kernel::from_exp(vec![ExpTerm {
        coef: (k * 2.0 * model.c).inv(),
        px: 0,
        py: 0,
        rate: k,
        singular: false,
    }])
}

/// Symbol-kernel of the Dirichlet G_lambda (method of images).
pub fn dirichlet_g_kernel(model: &AuxiliaryModel, xp: &[f64], lambda: C) -> Result<Kernel> {
    if !model.dirichlet {
        return Err(Error::Unsupported("only the Dirichlet condition is implemented".into()));
    }
    Ok(gminus_q_kernel(model, xp, lambda)?.scaled(C::new(-1.0, 0.0)))
}

/// N-th iterate d^{N-1}/d lambda^{N-1}/(N-1)! of +-(1/(2c kappa)) e^{-kappa s}
/// as a kernel, evaluated through jets.
fn iterated_kernel(model: &AuxiliaryModel, xp: &[f64], lambda: C, n: u32, sign: f64) -> Result<Kernel> {
    let k0 = kappa(model, xp, lambda)?;
    let len = n as usize;
    let kj = kappa_jet(model, norm(xp).powi(2), lambda, len);
    let pre = kj.scale(C::new(2.0 * model.c * sign, 0.0)).recip();
    Kernel::new(k0.re, false, move |x, y| {
        let e = kj.scale(C::new(-(x + y), 0.0)).exp();
        (&pre * &e).coeff(len - 1)
    })
}

pub fn gminus_q_kernel_iter(model: &AuxiliaryModel, xp: &[f64], lambda: C, n: u32) -> Result<Kernel> {
    iterated_kernel(model, xp, lambda, n, 1.0)
}

pub fn dirichlet_g_kernel_iter(model: &AuxiliaryModel, xp: &[f64], lambda: C, n: u32) -> Result<Kernel> {
    if !model.dirichlet {
        return Err(Error::Unsupported("only the Dirichlet condition is implemented".into()));
    }
    iterated_kernel(model, xp, lambda, n, -1.0)
}

/// Exact iterate: f is given on jets; returns f^{(N-1)}(lambda)/(N-1)!.
pub fn iterate_lambda<F: Fn(&Jet) -> Jet>(f: F, lambda: C, n: u32) -> C {
    f(&Jet::var(lambda, n as usize)).coeff(n as usize - 1)
}

/// Numerical iterate by the Cauchy integral on a circle of radius `radius`
/// around lambda (trapezoid rule, doubled until two passes agree).
pub fn iterate_lambda_numeric<F: Fn(C) -> C>(f: F, lambda: C, n: u32, radius: f64) -> Result<C> {
    let k = n as i32 - 1;
    let pass = |pts: usize| -> C {
        let mut acc = C::new(0.0, 0.0);
        for j in 0..pts {
            let phi = 2.0 * PI * (j as f64 + 0.5) / pts as f64;
            let z = C::from_polar(1.0, phi);
            acc += f(lambda + z * radius) * z.powi(-k);
        }
        acc / (pts as f64 * radius.powi(k))
    };
    let mut pts = 32;
    let mut prev = pass(pts);
    while pts < 4096 {
        pts *= 2;
        let cur = pass(pts);
        if (cur - prev).norm() <= 1e-13 * cur.norm().max(1e-300) + 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Unsupported("family does not look analytic on the Cauchy circle".into()))
}
