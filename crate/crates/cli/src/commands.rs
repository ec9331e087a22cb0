use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use bernstein_mle::simulate::{presets as all_presets, run_study, SimReport, TestDistribution};
use bernstein_mle::{
    choose_support, em_fit, lower_bound_mb, select_degree as select, BernsteinModel, DegreeGrid,
    DegreeSelection, FitConfig, MixtureWeights, SupportMap,
};
use serde::{Deserialize, Serialize};

use crate::input::read_values;
use crate::json::to_string_pretty;
use crate::{CliError, DegreeArg, ModelOpts};

/// Version of the fit JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct SupportOut {
    a: f64,
    b: f64,
}

#[derive(Serialize)]
struct GridOut {
    m0: usize,
    k: usize,
}

#[derive(Serialize)]
struct DegreeOut {
    mode: &'static str,
    m_hat: usize,
    grid: Option<GridOut>,
    profile_loglik: Option<Vec<f64>>,
    #[serde(rename = "R")]
    r: Option<Vec<f64>>,
    tau_hat: Option<usize>,
    m_b: Option<usize>,
}

#[derive(Serialize)]
struct FitOut {
    version: u32,
    n: usize,
    support: SupportOut,
    degree: DegreeOut,
    weights: Vec<f64>,
    loglik: f64,
    n_iter: usize,
    converged: bool,
    mean_estimate: f64,
}

#[derive(Serialize)]
struct SelectOut {
    profile: Vec<f64>,
    increments: Vec<f64>,
    #[serde(rename = "R")]
    r: Vec<f64>,
    tau_hat: usize,
    m_hat: usize,
    m_b: Option<usize>,
}

#[derive(Deserialize)]
struct ModelIn {
    support: SupportMap,
    weights: MixtureWeights,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to standard output: {e}"))),
    }
}

/// Loaded sample mapped onto [0, 1] plus the fit settings on that scale.
struct Prepared {
    n: usize,
    support: SupportMap,
    unit: Vec<f64>,
    cfg: FitConfig,
    m_b: Option<usize>,
}

fn prepare(opts: &ModelOpts) -> Result<Prepared, CliError> {
    let data = read_values(&opts.input)?;
    if data.is_empty() {
        return Err(CliError::Numeric(format!("{} contains no values", opts.input.display())));
    }
    let support = choose_support(&data, opts.support.0)?;
    let unit = support.to_unit(&data)?;
    // densities on the raw scale become (b - a) times larger on [0, 1]
    let w = support.width();
    let cfg = FitConfig {
        max_iter: opts.max_iter,
        tol: opts.tol,
        init: opts.init.into(),
        boundary_f0: opts.f0.map(|c| c * w),
        boundary_f1: opts.f1.map(|c| c * w),
        symmetric: opts.symmetric,
        ..FitConfig::default()
    };
    let m_b = lower_bound_mb(&unit, true).ok();
    Ok(Prepared { n: data.len(), support, unit, cfg, m_b })
}

fn selection(opts: &ModelOpts, p: &Prepared) -> Result<DegreeSelection, CliError> {
    if p.n < 2 {
        return Err(CliError::Numeric("degree selection needs at least two values".into()));
    }
    let grid = match (opts.m0, opts.k, p.m_b) {
        (None, None, Some(_)) => None,
        (Some(m0), Some(k), _) => Some(DegreeGrid::new(m0, k)?),
        (m0, k, Some(mb)) => {
            let d = DegreeGrid::from_lower_bound(mb);
            Some(DegreeGrid::new(m0.unwrap_or(d.m0()), k.unwrap_or(d.k()))?)
        }
        _ => {
            return Err(CliError::Numeric(
                "cannot estimate a lower bound for the degree from this sample; pass --m0 and --k".into(),
            ))
        }
    };
    let sel = select(&p.unit, &p.cfg, grid)?;
    if sel.flat {
        return Err(CliError::Numeric(
            "profile log-likelihood is flat over the grid; no change point to select".into(),
        ));
    }
    Ok(sel)
}

pub fn fit(opts: &ModelOpts, degree: DegreeArg) -> Result<(), CliError> {
    let p = prepare(opts)?;
    let (fit, degree_out) = match degree {
        DegreeArg::Fixed(m) => {
            let fit = em_fit(&p.unit, m, &p.cfg)?;
            let d = DegreeOut {
                mode: "fixed",
                m_hat: m,
                grid: None,
                profile_loglik: None,
                r: None,
                tau_hat: None,
                m_b: p.m_b,
            };
            (fit, d)
        }
        DegreeArg::Auto => {
            let sel = selection(opts, &p)?;
            let d = DegreeOut {
                mode: "auto",
                m_hat: sel.m_hat,
                grid: Some(GridOut { m0: sel.grid.m0(), k: sel.grid.k() }),
                profile_loglik: Some(sel.profile.clone()),
                r: Some(sel.r.clone()),
                tau_hat: Some(sel.tau_hat),
                m_b: p.m_b,
            };
            (sel.fit, d)
        }
    };
    let model = BernsteinModel::new(fit.weights.clone(), p.support);
    let out = FitOut {
        version: SCHEMA_VERSION,
        n: p.n,
        support: SupportOut { a: p.support.a(), b: p.support.b() },
        degree: degree_out,
        weights: fit.weights.into_vec(),
        loglik: fit.loglik,
        n_iter: fit.n_iter,
        converged: fit.converged,
        mean_estimate: model.mean_estimate(),
    };
    write_output(opts.out.as_deref(), &to_string_pretty(&out))
}

pub fn select_degree(opts: &ModelOpts) -> Result<(), CliError> {
    let p = prepare(opts)?;
    let sel = selection(opts, &p)?;
    let out = SelectOut {
        profile: sel.profile,
        increments: sel.increments,
        r: sel.r,
        tau_hat: sel.tau_hat,
        m_hat: sel.m_hat,
        m_b: p.m_b,
    };
    write_output(opts.out.as_deref(), &to_string_pretty(&out))
}

pub fn eval(
    model_path: &Path,
    from: Option<f64>,
    to: Option<f64>,
    points: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(model_path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", model_path.display())))?;
    let m: ModelIn = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: invalid model JSON: {e}", model_path.display())))?;
    let model = BernsteinModel::new(m.weights, m.support);
    let from = from.unwrap_or(model.support.a());
    let to = to.unwrap_or(model.support.b());
    if points == 0 || !(from.is_finite() && to.is_finite()) || (points > 1 && to <= from) {
        return Err(CliError::Numeric(format!("invalid grid: from {from}, to {to}, {points} points")));
    }
    let mut csv = String::from("x,pdf,cdf\n");
    for i in 0..points {
        let x = if points == 1 {
            from
        } else if i == points - 1 {
            to
        } else {
            from + (to - from) * i as f64 / (points - 1) as f64
        };
        writeln!(csv, "{x},{},{}", model.pdf(x), model.cdf(x)).expect("write to string");
    }
    write_output(out, &csv)
}

fn report_table(label: &str, r: &SimReport) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:<16} {:>5} {:>5} {:>8} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>6}",
        "dist", "n", "runs", "E(m)", "Var(m)", "MISE(fP)", "MISE(fB)", "MISE(fK)", "MSE(muP)",
        "MSE(muB)", "MSE(xbar)", "failed"
    )
    .unwrap();
    writeln!(
        s,
        "{:<16} {:>5} {:>5} {:>8.2} {:>8.2} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>6}",
        label,
        r.n,
        r.runs,
        r.mean_mhat,
        r.var_mhat,
        r.mise_fp,
        r.mise_fb,
        r.mise_fk,
        r.mse_mu_p,
        r.mse_mu_b,
        r.mse_xbar,
        r.failed_runs
    )
    .unwrap();
    s
}

fn pointwise_csv(r: &SimReport) -> String {
    let p = &r.pointwise_mse;
    let mut s = String::from("x,pdf_bernstein,pdf_parametric,pdf_kernel,cdf_bernstein,cdf_parametric,cdf_empirical\n");
    for i in 0..p.x.len() {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.x[i],
            p.pdf_bernstein[i],
            p.pdf_parametric[i],
            p.pdf_kernel[i],
            p.cdf_bernstein[i],
            p.cdf_parametric[i],
            p.cdf_empirical[i]
        )
        .unwrap();
    }
    s
}

pub fn simulate(
    dist: &str,
    n: usize,
    runs: usize,
    seed: u64,
    out: Option<&Path>,
    csv: Option<&Path>,
    strict: bool,
) -> Result<(), CliError> {
    let d: TestDistribution = dist.parse().map_err(|e| CliError::Parse(format!("{e}")))?;
    let label = all_presets()
        .into_iter()
        .find(|p| p.dist == d)
        .map(|p| p.label.to_string())
        .unwrap_or_else(|| d.to_string());
    let report = run_study(&d, n, runs, seed)?;
    let json = to_string_pretty(&report);
    let table = report_table(&label, &report);
    match out {
        Some(_) => {
            write_output(out, &json)?;
            print!("{table}");
        }
        None => {
            write_output(None, &json)?;
            eprint!("{table}");
        }
    }
    if let Some(path) = csv {
        write_output(Some(path), &pointwise_csv(&report))?;
    }
    if strict && report.failed_runs > 0 {
        return Err(CliError::Numeric(format!("{} of {} runs failed", report.failed_runs, runs)));
    }
    Ok(())
}

pub fn presets() -> Result<(), CliError> {
    let mut s = String::new();
    for p in all_presets() {
        let (lo, hi) = p.dist.support();
        writeln!(s, "{:<16} {:<10} {:<36} [{lo}, {hi}]", p.name, p.label, p.dist.to_string()).unwrap();
    }
    write_output(None, &s)
}
