//! Declarative run configuration (JSON): symbol families with parameters,
//! the auxiliary model, fit grids and tolerances.

use crate::appendix::CheckGroup;
use crate::boundary::LaguerreSgo;
use crate::builtins;
use crate::error::{Error, Result};
use crate::model::AuxiliaryModel;
use crate::rational::{Angular, RationalSymbol};
use crate::symbol::{norm, HomogeneousTerm, InteriorSymbol};
use crate::zeta::{FitPlan, TracialB};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;

/// Interior symbol on R^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InteriorSpec {
    /// The three-term builtin on R^2.
    Builtin,
    /// coeff |xi|^{-k}.
    RadialPower { n: usize, k: f64, coeff: f64 },
    /// coeff xi^alpha |xi|^{-|alpha|-k}: angular monomial of degree -k.
    Monomial { n: usize, alpha: Vec<u32>, k: f64, coeff: f64 },
    /// Interior view of a rational symbol.
    Rational(RationalSymbol),
    /// Sum of several families.
    Sum { parts: Vec<InteriorSpec> },
}

impl InteriorSpec {
    pub fn build(&self) -> Result<InteriorSymbol> {
        match self {
            InteriorSpec::Builtin => builtins::interior_p(),
            InteriorSpec::RadialPower { n, k, coeff } => builtins::radial_power(*n, *k, *coeff),
            InteriorSpec::Monomial { n, alpha, k, coeff } => {
                if alpha.len() > *n {
                    return Err(Error::Config("monomial index longer than n".into()));
                }
                let (alpha, coeff, k) = (alpha.clone(), *coeff, *k);
                let t = HomogeneousTerm::scalar(-k, move |xi: &[f64]| {
                    let s = norm(xi);
                    let mono: f64 = alpha.iter().zip(xi).map(|(a, x)| (x / s).powi(*a as i32)).product();
                    C::new(coeff * mono * s.powf(-k), 0.0)
                });
                InteriorSymbol::from_terms(*n, vec![t], None)
            }
            InteriorSpec::Rational(p) => p.interior(),
            InteriorSpec::Sum { parts } => {
                let built = parts.iter().map(|p| p.build()).collect::<Result<Vec<_>>>()?;
                let dim = built.first().map(|s| s.dim).ok_or_else(|| Error::Config("empty sum".into()))?;
                crate::zeta::sum_symbols(dim, &built.iter().collect::<Vec<_>>())
            }
        }
    }
}

/// Symbol rational in xi_n, acting as P_+.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RationalSpec {
    Builtin,
    Zero { n: usize },
    Explicit(RationalSymbol),
}

impl RationalSpec {
    pub fn build(&self) -> Result<RationalSymbol> {
        match self {
            RationalSpec::Builtin => builtins::rational_p(),
            RationalSpec::Zero { n } => Ok(RationalSymbol::zero(*n)),
            RationalSpec::Explicit(p) => RationalSymbol::new(p.dim, p.poly.clone(), p.poles.clone()),
        }
    }
}

/// One homogeneous piece of a Laguerre coefficient on R^{n-1}:
/// (coeff + odd w'_1) |xi'|^degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffTerm {
    pub degree: f64,
    pub coeff: f64,
    #[serde(default)]
    pub odd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntrySpec {
    pub l: usize,
    pub m: usize,
    pub terms: Vec<CoeffTerm>,
}

/// Singular Green operator in Laguerre form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GreenSpec {
    Builtin,
    ResidueFree,
    Zero { n: usize },
    /// a |xi'|^{-1} at (l, l).
    Diagonal { l: usize, a: f64 },
    Entries { n: usize, order: f64, entries: Vec<EntrySpec> },
}

impl GreenSpec {
    pub fn build(&self) -> Result<LaguerreSgo> {
        match self {
            GreenSpec::Builtin => builtins::green_g(),
            GreenSpec::ResidueFree => builtins::green_g_residue_free(),
            GreenSpec::Zero { n } => {
                if !(2..=3).contains(n) {
                    return Err(Error::Dimension(*n));
                }
                Ok(LaguerreSgo::zero(n - 1))
            }
            GreenSpec::Diagonal { l, a } => builtins::diagonal_g(*l, *a),
            GreenSpec::Entries { n, order, entries } => {
                if !(2..=3).contains(n) {
                    return Err(Error::Dimension(*n));
                }
                let bdim = n - 1;
                let mut out = Vec::new();
                for e in entries {
                    let terms = e
                        .terms
                        .iter()
                        .map(|t| {
                            let t = *t;
                            HomogeneousTerm::scalar(t.degree, move |xp: &[f64]| {
                                let s = norm(xp);
                                C::new((t.coeff + t.odd * xp[0] / s) * s.powf(t.degree), 0.0)
                            })
                        })
                        .collect();
                    out.push((e.l, e.m, InteriorSymbol::from_terms(bdim, terms, None)?));
                }
                LaguerreSgo::new(*order, bdim, out)
            }
        }
    }
}

/// Order-0 operator for the traciality suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TracialSpec {
    Identity,
    Green { g: GreenSpec },
    Multiplier { a: Angular },
}

impl TracialSpec {
    pub fn build(&self) -> Result<TracialB> {
        Ok(match self {
            TracialSpec::Identity => TracialB::Identity,
            TracialSpec::Green { g } => TracialB::Green(g.build()?),
            TracialSpec::Multiplier { a } => TracialB::Multiplier(a.clone()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Interior,
    Leftover,
    SingularGreen,
    PGlog,
    GGlog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixConfig {
    #[serde(default = "all_groups")]
    pub checks: Vec<CheckGroup>,
    /// Overrides every default tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn all_groups() -> Vec<CheckGroup> {
    CheckGroup::ALL.to_vec()
}

impl Default for AppendixConfig {
    fn default() -> Self {
        AppendixConfig {
            checks: all_groups(),
            tolerance: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub family: Family,
    #[serde(default)]
    pub interior: Option<InteriorSpec>,
    #[serde(default)]
    pub p: Option<RationalSpec>,
    #[serde(default)]
    pub g: Option<GreenSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaConfig {
    pub p: RationalSpec,
    pub g: GreenSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectConfig {
    pub p: RationalSpec,
    pub g: GreenSpec,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub p: InteriorSpec,
    #[serde(default = "unit")]
    pub c: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracialityConfig {
    pub n: usize,
    pub suite: Vec<TracialSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Closed form against fitted l0, per term.
    pub term: f64,
    /// Relative tolerance of the defect for res(B) != 0.
    pub defect_rel: f64,
    /// Absolute tolerance of the defect for res(B) = 0.
    pub defect_abs: f64,
    pub power: f64,
    pub traciality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            term: 1e-3,
            defect_rel: 1e-3,
            defect_abs: 1e-6,
            power: 1e-3,
            traciality: 1e-3,
        }
    }
}

/// Whole run configuration; sections not needed by a subcommand may be
/// omitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub model: AuxiliaryModel,
    #[serde(default)]
    pub plan: FitPlan,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub appendix: Option<AppendixConfig>,
    #[serde(default)]
    pub fit: Option<FitConfig>,
    #[serde(default)]
    pub zeta: Option<ZetaConfig>,
    #[serde(default)]
    pub defect: Option<DefectConfig>,
    #[serde(default)]
    pub power: Option<PowerConfig>,
    #[serde(default)]
    pub traciality: Option<TracialityConfig>,
}

impl Config {
    pub fn from_json(s: &str) -> Result<Config> {
        let c: Config = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.model.validate()?;
        c.plan.grid(&c.model)?;
        Ok(c)
    }
}
