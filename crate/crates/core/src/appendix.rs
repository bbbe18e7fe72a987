//! Closed forms of the Laguerre integrals confronted with their quadratures.

use crate::boundary::{laguerre, line_integral};
use crate::closed::{
    int_log_tail, int_log_tail_quad, int_power_tail, int_power_tail_quad, laguerre_log_diag, laguerre_log_offdiag, two_pi_log2,
    two_pi_log2_quad, s_pm, s_pm_quad, Sign,
};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Groups of checks that can be selected by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckGroup {
    /// 2 pi log 2 against the quadrature of log(1+s^2)/(1+s^2).
    LogConstant,
    /// a^{-2}(log(sqrt(1+a^2)+1) - log 2).
    LogTail,
    /// (2j)^{-1} a^{-2}(sqrt(1+a^{-2}) - a^{-1})^{2j}.
    PowerTail,
    /// s^{+-}_{l,m} for l, m <= 4.
    SPm,
    /// Laguerre log integrals, diagonal and off-diagonal.
    LaguerreLog,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 5] = [
        CheckGroup::LogConstant,
        CheckGroup::LogTail,
        CheckGroup::PowerTail,
        CheckGroup::SPm,
        CheckGroup::LaguerreLog,
    ];

    /// Default tolerance and whether it is relative.
    pub fn tolerance(self) -> (f64, bool) {
        match self {
            CheckGroup::LogConstant => (1e-10, false),
            CheckGroup::LogTail | CheckGroup::PowerTail => (1e-10, true),
            CheckGroup::SPm => (1e-8, false),
            CheckGroup::LaguerreLog => (1e-9, false),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub group: CheckGroup,
    pub label: String,
    pub closed: Complex64,
    pub numeric: Complex64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(group: CheckGroup, label: String, closed: Complex64, numeric: Complex64, tol: Option<f64>, scale: f64) -> Check {
    let (t0, relative) = group.tolerance();
    let tolerance = tol.unwrap_or(t0) * scale;
    let d = (closed - numeric).norm();
    let error = if relative { d / closed.norm().max(f64::MIN_POSITIVE) } else { d };
    Check {
        group,
        label,
        closed,
        numeric,
        error,
        tolerance,
        pass: error <= tolerance,
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Runs the selected groups. `tol` overrides every default tolerance and
/// `scale` multiplies the result.
pub fn run_checks(groups: &[CheckGroup], tol: Option<f64>, scale: f64) -> Result<Vec<Check>> {
    if !(scale > 0.0) || tol.is_some_and(|t| !(t >= 0.0)) {
        return Err(Error::Config("tolerances must be positive".into()));
    }
    let mut out = Vec::new();
    for &g in groups {
        match g {
            CheckGroup::LogConstant => {
                out.push(check(g, "2pi log 2".into(), re(two_pi_log2()), re(two_pi_log2_quad()), tol, scale));
            }
            CheckGroup::LogTail => {
                for a in [0.5, 1.0, 2.0, 10.0] {
                    out.push(check(g, format!("a={a}"), re(int_log_tail(a)), re(int_log_tail_quad(a)), tol, scale));
                }
            }
            CheckGroup::PowerTail => {
                for a in [0.5, 1.0, 2.0, 10.0] {
                    for j in 1..=3 {
                        out.push(check(g, format!("a={a} j={j}"), re(int_power_tail(a, j)), re(int_power_tail_quad(a, j)), tol, scale));
                    }
                }
            }
            CheckGroup::SPm => {
                let r = 1.0;
                for mu in [0.5f64, 2.0] {
                    let kappa = re((r * r + mu * mu).sqrt());
                    for l in 0..=4 {
                        for m in 0..=4 {
                            for (s, name) in [(Sign::Plus, "+"), (Sign::Minus, "-")] {
                                out.push(check(
                                    g,
                                    format!("s{name} l={l} m={m} mu={mu}"),
                                    s_pm(s, l, m, r, kappa),
                                    s_pm_quad(s, l, m, r, kappa),
                                    tol,
                                    scale,
                                ));
                            }
                        }
                    }
                }
            }
            CheckGroup::LaguerreLog => {
                for r in [0.5, 1.0, 3.0] {
                    for l in 0..=3 {
                        for m in 0..=3 {
                            let closed = if l == m { laguerre_log_diag(r) } else { laguerre_log_offdiag(l, m) };
                            let numeric = line_integral(
                                |t| laguerre(l, r, t).unwrap() * laguerre(m, r, t).unwrap().conj() * (r * r + t * t).ln(),
                                r,
                            )?;
                            out.push(check(g, format!("l={l} m={m} r={r}"), re(closed), numeric, tol, scale));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let all = run_checks(&CheckGroup::ALL, None, 1.0).unwrap();
        assert_eq!(all.len(), 1 + 4 + 12 + 100 + 48);
        for c in &all {
            assert!(c.pass, "{} {}: {:e}", serde_json::to_string(&c.group).unwrap(), c.label, c.error);
        }
    }

    #[test]
    fn absurd_tolerance_fails() {
        let all = run_checks(&[CheckGroup::SPm], Some(1e-20), 1.0).unwrap();
        assert!(all.iter().any(|c| !c.pass));
    }

    #[test]
    fn empty_selection() {
        assert!(run_checks(&[], None, 1.0).unwrap().is_empty());
        assert!(run_checks(&[], None, 0.0).is_err());
    }
}
