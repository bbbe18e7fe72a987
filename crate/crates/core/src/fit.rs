//! Least-squares fits of lambda-sweeps against the resolvent trace expansion
//! sum_j a_j (-lambda)^{e_j} + (a' log(-lambda) + a'') (-lambda)^{-N} and the
//! extraction of l0 = a'' + alpha_N a'.

use crate::error::{Error, Result};
use crate::model::AuxiliaryModel;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;

/// alpha_N = sum_{1 <= j < N} 1/j.
pub fn harmonic(n: u32) -> f64 {
    (1..n).map(|j| 1.0 / j as f64).sum()
}

/// Samples of a lambda-family along lambda = -mu^m e^{i theta}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySweep {
    pub theta: f64,
    pub m: u32,
    pub power: u32,
    pub mu: Vec<f64>,
    pub values: Vec<C>,
}

/// mu_k = mu0 ratio^k, k < count.
pub fn geometric_grid(mu0: f64, ratio: f64, count: usize) -> Result<Vec<f64>> {
    if !(mu0 > 0.0 && ratio > 1.0) || count == 0 {
        return Err(Error::Config("grid needs mu0 > 0, ratio > 1 and at least one point".into()));
    }
    Ok((0..count).map(|k| mu0 * ratio.powi(k as i32)).collect())
}

impl RaySweep {
    /// Samples `f(lambda)` on the grid, spreading the points over `jobs`
    /// threads. The result does not depend on the schedule.
    pub fn sample<F>(model: &AuxiliaryModel, mu: &[f64], power: u32, jobs: usize, f: F) -> Result<RaySweep>
    where
        F: Fn(C) -> Result<C> + Sync,
    {
        if power == 0 {
            return Err(Error::Config("resolvent power N must be at least 1".into()));
        }
        if mu.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("mu grid must be strictly increasing".into()));
        }
        let jobs = jobs.max(1).min(mu.len().max(1));
        let mut out: Vec<Option<Result<C>>> = (0..mu.len()).map(|_| None).collect();
        std::thread::scope(|sc| {
            let f = &f;
            let chunks: Vec<_> = out.chunks_mut(mu.len().div_ceil(jobs)).enumerate().collect();
            let size = mu.len().div_ceil(jobs);
            for (ci, chunk) in chunks {
                sc.spawn(move || {
                    for (k, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(f(model.lambda(mu[ci * size + k])));
                    }
                });
            }
        });
        let values = out.into_iter().map(|v| v.unwrap()).collect::<Result<Vec<_>>>()?;
        Ok(RaySweep {
            theta: model.theta,
            m: model.m,
            power,
            mu: mu.to_vec(),
            values,
        })
    }

    /// Same samples with negated values.
    pub fn negated(&self) -> RaySweep {
        RaySweep {
            values: self.values.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }
}

/// Which columns to fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    /// Order of the operator family.
    pub sigma: f64,
    /// Dimension n of the manifold.
    pub n: usize,
    pub with_log: bool,
    /// Extra power columns (-lambda)^{-N - t/m}, t = 1..=tail, absorbing the
    /// remainder of the expansion.
    #[serde(default)]
    pub tail: usize,
    /// Log companions (-lambda)^{-N-k} log(-lambda) for the integer tail steps.
    #[serde(default)]
    pub tail_log: bool,
    #[serde(default = "default_condition")]
    pub max_condition: f64,
    #[serde(default = "default_residual")]
    pub residual_tol: f64,
}

fn default_condition() -> f64 {
    1e10
}

fn default_residual() -> f64 {
    1e-6
}

impl FitSpec {
    pub fn new(sigma: f64, n: usize) -> FitSpec {
        FitSpec {
            sigma,
            n,
            with_log: true,
            tail: 0,
            tail_log: false,
            max_condition: default_condition(),
            residual_tol: default_residual(),
        }
    }

    pub fn with_tail(self, tail: usize, tail_log: bool) -> FitSpec {
        FitSpec { tail, tail_log, ..self }
    }

    pub fn without_log(self) -> FitSpec {
        FitSpec { with_log: false, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Column {
    /// (-lambda)^e
    Power(f64),
    /// (-lambda)^e log(-lambda)
    Log(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub power: u32,
    pub columns: Vec<Column>,
    pub coeffs: Vec<C>,
    /// Coefficients of the leading powers (-lambda)^{e_j}, 0 <= j < n + sigma.
    pub a: Vec<C>,
    /// Coefficient of (-lambda)^{-N} log(-lambda).
    pub a_log: C,
    /// Coefficient of (-lambda)^{-N}.
    pub a_const: C,
    pub l0: C,
    pub residual: f64,
    pub condition: f64,
}

fn is_close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

/// Leading exponents (n + sigma - j)/m - N for 0 <= j < n + sigma.
pub fn leading_exponents(sigma: f64, n: usize, m: u32, power: u32) -> Vec<f64> {
    let top = n as f64 + sigma;
    let mut out = vec![];
    let mut j = 0.0;
    while j < top - 1e-9 {
        out.push((top - j) / m as f64 - power as f64);
        j += 1.0;
    }
    out
}

fn columns(spec: &FitSpec, m: u32, power: u32) -> Vec<Column> {
    let nn = power as f64;
    let mut cols: Vec<Column> = leading_exponents(spec.sigma, spec.n, m, power)
        .into_iter()
        .map(Column::Power)
        .collect();
    let integral = is_close(spec.sigma.round(), spec.sigma);
    if spec.with_log && integral {
        cols.push(Column::Log(-nn));
    }
    cols.push(Column::Power(-nn));
    for t in 1..=spec.tail {
        let e = -nn - t as f64 / m as f64;
        if !cols.iter().any(|c| matches!(c, Column::Power(x) if is_close(*x, e))) {
            cols.push(Column::Power(e));
        }
        if spec.tail_log && t % m as usize == 0 {
            cols.push(Column::Log(e));
        }
    }
    cols
}

/// (-lambda) for lambda = -mu^m e^{i theta}, with its principal log.
fn minus_lambda(mu: f64, m: u32, theta: f64) -> (C, C) {
    let lg = C::new(m as f64 * mu.ln(), theta);
    (lg.exp(), lg)
}

fn column_value(col: Column, lg: C) -> C {
    match col {
        Column::Power(e) => (lg * e).exp(),
        Column::Log(e) => (lg * e).exp() * lg,
    }
}

/// Weighted linear least squares in the known-exponent basis.
pub fn fit_expansion(sweep: &RaySweep, spec: &FitSpec) -> Result<ExpansionFit> {
    let cols = columns(spec, sweep.m, sweep.power);
    let (rows, k) = (sweep.mu.len(), cols.len());
    if rows < 2 * k {
        return Err(Error::Fit(format!("{rows} samples for {k} unknowns; need at least twice as many")));
    }
    let span = sweep.mu[rows - 1] / sweep.mu[0];
    if span < 100.0 {
        return Err(Error::Fit(format!("mu range spans only {span:.1}x; need two decades")));
    }
    let nn = sweep.power as f64;
    let mut a = DMatrix::<C>::zeros(rows, k);
    let mut b = DVector::<C>::zeros(rows);
    for (i, (&mu, &v)) in sweep.mu.iter().zip(&sweep.values).enumerate() {
        let (_, lg) = minus_lambda(mu, sweep.m, sweep.theta);
        // weight (-lambda)^N equalizes the target scale
        let w = (lg * nn).exp();
        for (j, &c) in cols.iter().enumerate() {
            a[(i, j)] = column_value(c, lg) * w;
        }
        b[i] = v * w;
    }
    let scales: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    if scales.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::Fit("degenerate column".into()));
    }
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let sv = a.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= spec.max_condition) {
        return Err(Error::Condition(condition));
    }
    let qr = a.clone().qr();
    let qtb = qr.q().adjoint() * &b;
    let x = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Fit("rank-deficient design matrix".into()))?;
    let resid = (&a * &x - &b).norm();
    let bn = b.norm();
    let residual = if bn > 0.0 { resid / bn } else { resid };
    if !(residual <= spec.residual_tol) {
        return Err(Error::Fit(format!(
            "relative residual {residual:e} above {:e}: the model lacks a term or the mu range is too small",
            spec.residual_tol
        )));
    }
    let coeffs: Vec<C> = x.iter().zip(&scales).map(|(v, s)| v / s).collect();
    let lead = leading_exponents(spec.sigma, spec.n, sweep.m, sweep.power).len();
    let find = |want: Column| {
        cols.iter()
            .position(|c| match (c, want) {
                (Column::Power(x), Column::Power(y)) | (Column::Log(x), Column::Log(y)) => is_close(*x, y),
                _ => false,
            })
            .map(|i| coeffs[i])
            .unwrap_or(C::new(0.0, 0.0))
    };
    let a_log = find(Column::Log(-nn));
    let a_const = find(Column::Power(-nn));
    Ok(ExpansionFit {
        power: sweep.power,
        columns: cols.clone(),
        a: coeffs[..lead].to_vec(),
        a_log,
        a_const,
        l0: a_const + a_log * harmonic(sweep.power),
        residual,
        condition,
        coeffs,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct L0Report {
    pub l0: C,
    pub l0_next: C,
    pub difference: f64,
}

/// l0 from the fits at N and N+1, with their discrepancy.
pub fn extract_l0(at_n: &ExpansionFit, at_next: &ExpansionFit, tol: f64) -> Result<L0Report> {
    if at_next.power != at_n.power + 1 {
        return Err(Error::Config("second fit must use power N+1".into()));
    }
    let difference = (at_n.l0 - at_next.l0).norm();
    if !(difference <= tol) {
        return Err(Error::Inconsistent(difference));
    }
    Ok(L0Report {
        l0: at_n.l0,
        l0_next: at_next.l0,
        difference,
    })
}
