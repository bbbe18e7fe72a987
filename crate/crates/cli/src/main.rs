//! `bvzeta`: runs the appendix checks, single-family fits, the zeta
//! assembly and the defect experiments from a JSON config.

use bvzeta::appendix::{run_checks, Check, CheckGroup};
use bvzeta::config::{Config, Family, FitConfig};
use bvzeta::zeta::{self, FamilyFit, ZetaReport};
use bvzeta::{Complex64, Error};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bvzeta", version, about = "Zeta-value experiments for boundary value problems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads for the mu sweeps (overrides plan.jobs).
    #[arg(long, global = true, value_name = "K")]
    jobs: Option<usize>,
    /// Multiplies every acceptance tolerance.
    #[arg(long, global = true, value_name = "FACTOR", default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed forms of the Laguerre integrals against quadrature.
    VerifyAppendix,
    /// Sweeps one family along the ray and fits its expansion.
    Fit,
    /// Assembles the five terms and compares them with their fits.
    Zeta,
    /// Scaling defect, power consistency and traciality, as configured.
    Defect,
}

enum Failure {
    /// Bad input: exit code 2.
    Config(String),
    /// Numerical failure: exit code 1.
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Dimension(_)
            | Error::InvalidSymbol(_)
            | Error::Unsupported(_)
            | Error::MissingDecay
            | Error::Scale(_) => Failure::Config(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Numeric(format!("{}: {e}", path.display()))
}

type Run = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numeric(m)) => {
            eprintln!("bvzeta: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("bvzeta: {m}");
            ExitCode::from(2)
        }
    }
}

fn load(common: &Common) -> Result<Config, Failure> {
    let text = match &common.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        None => "{}".to_string(),
    };
    let mut cfg = Config::from_json(&text)?;
    if let Some(j) = common.jobs {
        if j == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        cfg.plan.jobs = j;
    }
    let s = common.tolerance_scale;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Failure::Config("--tolerance-scale must be positive".into()));
    }
    let t = &mut cfg.tolerances;
    t.term *= s;
    t.defect_rel *= s;
    t.defect_abs *= s;
    t.power *= s;
    t.traciality *= s;
    Ok(cfg)
}

fn run(cli: &Cli) -> Run {
    let cfg = load(&cli.common)?;
    let out = &cli.common.out;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    match cli.cmd {
        Cmd::VerifyAppendix => cmd_verify_appendix(&cfg, cli.common.tolerance_scale, out),
        Cmd::Fit => cmd_fit(&cfg, out),
        Cmd::Zeta => cmd_zeta(&cfg, out),
        Cmd::Defect => cmd_defect(&cfg, out),
    }
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| io_err(path, e))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| io_err(path, e))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn cx(z: Complex64) -> [String; 2] {
    [z.re.to_string(), z.im.to_string()]
}

fn group_name(g: CheckGroup) -> String {
    serde_json::to_value(g).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn cmd_verify_appendix(cfg: &Config, scale: f64, out: &Path) -> Run {
    let a = cfg.appendix.clone().unwrap_or_default();
    if a.checks.is_empty() {
        eprintln!("warning: no checks selected");
    }
    let checks: Vec<Check> = run_checks(&a.checks, a.tolerance, scale)?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            let [cr, ci] = cx(c.closed);
            let [nr, ni] = cx(c.numeric);
            vec![group_name(c.group), c.label.clone(), cr, ci, nr, ni, c.error.to_string(), c.tolerance.to_string(), c.pass.to_string()]
        })
        .collect();
    write_csv(
        &out.join("appendix.csv"),
        &["group", "label", "closed_re", "closed_im", "numeric_re", "numeric_im", "error", "tolerance", "pass"],
        &rows,
    )?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    write_json(&out.join("appendix.json"), &json!({ "checks": checks, "failed": failed }))?;
    for c in checks.iter().filter(|c| !c.pass) {
        println!("FAIL {} {}: error {:e} > {:e}", group_name(c.group), c.label, c.error, c.tolerance);
    }
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(failed == 0)
}

fn need<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, Failure> {
    v.as_ref().ok_or_else(|| Failure::Config(format!("missing {what}")))
}

/// Fit and closed-form prediction of the configured family.
fn fit_configured(cfg: &Config, f: &FitConfig) -> Result<(FamilyFit, Complex64), Failure> {
    let (model, plan) = (&cfg.model, &cfg.plan);
    let p = || -> Result<_, Failure> { Ok(need(&f.p, "fit.p")?.build()?) };
    let g = || -> Result<_, Failure> { Ok(need(&f.g, "fit.g")?.build()?) };
    Ok(match f.family {
        Family::Interior => {
            let s = match (&f.interior, &f.p) {
                (Some(s), _) => s.build()?,
                (None, Some(p)) => p.build()?.interior()?,
                (None, None) => return Err(Failure::Config("missing fit.interior or fit.p".into())),
            };
            (zeta::fit_interior(&s, model, plan)?, zeta::term_interior(&s, model)?)
        }
        Family::Leftover => {
            let p = p()?;
            (zeta::fit_leftover(&p, model, plan)?, zeta::term_leftover(&p, model)?)
        }
        Family::SingularGreen => {
            let g = g()?;
            (zeta::fit_gq(&g, model, plan)?, zeta::term_gq(&g, model)?)
        }
        Family::PGlog => {
            let p = p()?;
            (zeta::fit_pg(&p, model, plan)?, zeta::term_pg(&p, model)?)
        }
        Family::GGlog => {
            let g = g()?;
            (zeta::fit_gg(&g, model, plan)?, zeta::term_gg(&g, model)?)
        }
    })
}

fn cmd_fit(cfg: &Config, out: &Path) -> Run {
    let f = need(&cfg.fit, "fit section")?;
    let (fit, closed) = fit_configured(cfg, f)?;
    for s in &fit.sweeps {
        let rows: Vec<Vec<String>> = s
            .mu
            .iter()
            .zip(&s.values)
            .map(|(mu, v)| {
                let [re, im] = cx(*v);
                vec![mu.to_string(), re, im]
            })
            .collect();
        write_csv(&out.join(format!("sweep_N{}.csv", s.power)), &["mu", "re", "im"], &rows)?;
    }
    let discrepancy = (fit.l0 - closed).norm();
    let pass = discrepancy <= cfg.tolerances.term;
    write_json(
        &out.join("fit.json"),
        &json!({
            "family": f.family,
            "model": cfg.model,
            "plan": cfg.plan,
            "fit": fit,
            "closed": closed,
            "discrepancy": discrepancy,
            "tolerance": cfg.tolerances.term,
            "pass": pass,
        }),
    )?;
    println!("l0 fitted   {} {:+}i", fit.l0.re, fit.l0.im);
    println!("l0 closed   {} {:+}i", closed.re, closed.im);
    println!("|N - (N+1)| {:e}", fit.consistency);
    println!("discrepancy {:e} ({})", discrepancy, if pass { "pass" } else { "FAIL" });
    Ok(pass)
}

fn print_table(r: &ZetaReport) {
    println!("{:<16} {:>24} {:>24} {:>12} {:>6}", "term", "closed", "fitted", "discrepancy", "");
    for t in &r.terms {
        println!(
            "{:<16} {:>24.15e} {:>24.15e} {:>12.3e} {:>6}",
            t.name,
            t.closed.re,
            t.fitted.re,
            t.discrepancy,
            if t.pass { "ok" } else { "FAIL" }
        );
    }
    println!("{:<16} {:>24.15e} {:>24.15e}", "total", r.total_closed.re, r.total_fitted.re);
    println!("singular_green routes differ by {:e}", (r.gq_routes.direct - r.gq_routes.split).norm());
}

fn cmd_zeta(cfg: &Config, out: &Path) -> Run {
    let z = need(&cfg.zeta, "zeta section")?;
    let (p, g) = (z.p.build()?, z.g.build()?);
    let report = zeta::assemble(&p, &g, &cfg.model, &cfg.plan, cfg.tolerances.term)?;
    write_json(&out.join("zeta.json"), &report)?;
    let rows: Vec<Vec<String>> = report
        .terms
        .iter()
        .map(|t| {
            let [cr, ci] = cx(t.closed);
            let [fr, fi] = cx(t.fitted);
            vec![t.name.clone(), cr, ci, fr, fi, t.discrepancy.to_string()]
        })
        .collect();
    write_csv(
        &out.join("zeta_terms.csv"),
        &["term", "predicted_re", "predicted_im", "fitted_re", "fitted_im", "discrepancy"],
        &rows,
    )?;
    print_table(&report);
    Ok(report.pass)
}

fn cmd_defect(cfg: &Config, out: &Path) -> Run {
    if cfg.defect.is_none() && cfg.power.is_none() && cfg.traciality.is_none() {
        return Err(Failure::Config("defect needs a defect, power or traciality section".into()));
    }
    let tol = &cfg.tolerances;
    let mut pass = true;
    let mut doc = serde_json::Map::new();
    if let Some(d) = &cfg.defect {
        let (p, g) = (d.p.build()?, d.g.build()?);
        let mut rows = Vec::new();
        for &c in &d.c {
            let r = zeta::defect_scaling(&p, &g, c, &cfg.model, &cfg.plan)?;
            let err = (r.fitted - r.closed).norm();
            let (error, limit) = if r.closed.norm() > 0.0 { (err / r.closed.norm(), tol.defect_rel) } else { (err, tol.defect_abs) };
            let ok = error <= limit;
            pass &= ok;
            println!("defect c={c}: fitted {:.12e} closed {:.12e} error {:.3e} {}", r.fitted.re, r.closed.re, error, verdict(ok));
            rows.push(json!({ "report": r, "error": error, "tolerance": limit, "pass": ok }));
        }
        doc.insert("defect".into(), rows.into());
    }
    if let Some(pc) = &cfg.power {
        let p = pc.p.build()?;
        let r = zeta::power_consistency(&p, pc.c, &cfg.plan)?;
        let error = (r.m2 - r.m4).norm();
        let ok = error <= tol.power;
        pass &= ok;
        println!("power m=2 {:.12e} m=4 {:.12e} difference {:.3e} {}", r.m2.re, r.m4.re, error, verdict(ok));
        doc.insert("power".into(), json!({ "report": r, "error": error, "tolerance": tol.power, "pass": ok }));
    }
    if let Some(t) = &cfg.traciality {
        let mut rows = Vec::new();
        for (i, b) in t.suite.iter().enumerate() {
            let r = zeta::traciality_check(&b.build()?, t.n, &cfg.model, &cfg.plan)?;
            let ok = r.difference <= tol.traciality;
            pass &= ok;
            println!("traciality #{i}: BR {:.12e} RB {:.12e} difference {:.3e} {}", r.left.re, r.right.re, r.difference, verdict(ok));
            rows.push(json!({ "operator": b, "report": r, "tolerance": tol.traciality, "pass": ok }));
        }
        doc.insert("traciality".into(), rows.into());
    }
    doc.insert("pass".into(), pass.into());
    write_json(&out.join("defect.json"), &doc)?;
    Ok(pass)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}
