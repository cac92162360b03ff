use std::path::{Path, PathBuf};

use mimarkov::benchmark::{self, Estimator, Manifest, Settings};
use mimarkov::gaussian::{simulate_ar, simulate_var, ClassicalVarParams};
use mimarkov::mcle::{fisher_scoring, ScoringConfig};
use mimarkov::params::ModelParams;
use mimarkov::ple::{
    aic_pic, fit_bipartition, fit_naive, fit_naive_with_margin, fit_online_sgd, PleResult, SCHEMA_VERSION,
};
use mimarkov::verify::{run_all, VerifyConfig};
use mimarkov::{kron_spec, ColumnKind, DependenceSpec, Error, Result, TimeSeries};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{BenchmarkArgs, FitArgs, HyperArgs, SelectArgs, SimulateArgs, VerifyArgs};
use crate::output::{align, emit, to_json, write_text};

/// MCLE runs at or beyond these sizes are known to take hours.
const MCLE_SLOW_N: usize = 1000;
const MCLE_SLOW_ORDER: usize = 2;

fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let s = TimeSeries::read_csv(std::fs::File::open(path)?, None)?;
    Ok(DMatrix::from_fn(s.len(), s.dim(), |i, j| s.get(i, j)))
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    s.into()
}

pub fn simulate(a: SimulateArgs) -> Result<u8> {
    let params = if let Some(phi) = &a.ar {
        ModelParams::Ar(mimarkov::gaussian::ClassicalArParams::new(phi.clone(), require(a.sigma2, "--sigma2")?)?)
    } else if let Some(theta) = &a.theta {
        ModelParams::MinInfoAr(mimarkov::gaussian::MinInfoArParams::new(theta.clone(), require(a.tau2, "--tau2")?)?)
    } else if let Some(files) = &a.var1 {
        ModelParams::Var(ClassicalVarParams::new(vec![read_matrix(&files[0])?], read_matrix(&files[1])?)?)
    } else if let Some(path) = &a.params {
        ModelParams::load(path)?
    } else {
        return Err(Error::Config("give one of --ar, --theta, --var1 or --params".into()));
    };
    let classical = params.to_classical()?;
    let series = match &classical {
        ModelParams::Ar(c) => simulate_ar(c, a.n, a.burn_in, a.seed)?,
        ModelParams::Var(c) => simulate_var(c, a.n, a.burn_in, a.seed)?,
        _ => return Err(Error::Internal("conversion left minimum-information parameters".into())),
    };
    write_text(&a.out, &series.to_csv_string())?;
    let meta = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "params": params.to_string(),
        "classical_params": classical.to_string(),
        "n": a.n,
        "dim": series.dim(),
        "seed": a.seed,
        "burn_in": a.burn_in,
    });
    write_text(&sidecar(&a.out), &to_json(&meta)?)?;
    Ok(0)
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("{flag} is required")))
}

/// Values a `--config` TOML file may supply.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    estimator: Option<Estimator>,
    seed: Option<u64>,
    time_limit_s: Option<f64>,
    standardize: Option<bool>,
    eta: Option<f64>,
    iters: Option<usize>,
    lr0: Option<f64>,
    decay: Option<f64>,
    burn_in: Option<usize>,
    samples: Option<usize>,
}

impl FileConfig {
    fn settings(&self) -> Settings {
        Settings {
            eta: self.eta,
            iters: self.iters,
            lr0: self.lr0,
            decay: self.decay,
            burn_in: self.burn_in,
            samples: self.samples,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => toml::from_str(&std::fs::read_to_string(p)?).map_err(|e| Error::Parse(format!("{}: {e}", p.display()))),
    }
}

/// Flags over file values over defaults.
#[derive(Debug, Clone, Serialize)]
struct Effective {
    estimator: Estimator,
    seed: u64,
    time_limit_s: Option<f64>,
    standardize: bool,
    settings: Settings,
}

fn effective(
    file: FileConfig,
    estimator: Option<Estimator>,
    seed: Option<u64>,
    time_limit_s: Option<f64>,
    standardize: bool,
    hyper: &HyperArgs,
) -> Result<Effective> {
    let e = Effective {
        estimator: estimator.or(file.estimator).unwrap_or(Estimator::PleNaive),
        seed: seed.or(file.seed).unwrap_or(0),
        time_limit_s: time_limit_s.or(file.time_limit_s),
        standardize: standardize || file.standardize.unwrap_or(false),
        settings: file.settings().overlay(&hyper.settings()),
    };
    if e.time_limit_s.is_some_and(|t| !(t > 0.0)) {
        return Err(Error::Config("--time-limit-s must be positive".into()));
    }
    let s = &e.settings;
    if s.eta.is_some_and(|v| !(v > 0.0)) || s.lr0.is_some_and(|v| !(v > 0.0)) || s.decay.is_some_and(|v| !(v >= 0.0)) {
        return Err(Error::Config("need eta > 0, lr0 > 0 and decay ≥ 0".into()));
    }
    if s.iters == Some(0) || s.samples == Some(0) {
        return Err(Error::Config("iters and samples must be positive".into()));
    }
    let sgd_only = s.eta.is_some() || s.iters.is_some();
    let gd_only = s.lr0.is_some() || s.decay.is_some();
    let mcle_only = s.burn_in.is_some() || s.samples.is_some();
    let (sgd, gd, mcle) = match e.estimator {
        Estimator::PleSgd => (true, false, false),
        Estimator::PleNaive | Estimator::PleBipartition => (false, true, false),
        Estimator::Mcle => (false, false, true),
        Estimator::Mle => (false, false, false),
    };
    if (sgd_only && !sgd) || (gd_only && !gd) || (mcle_only && !mcle) {
        return Err(Error::Config(format!("hyperparameters given do not apply to estimator {}", e.estimator)));
    }
    Ok(e)
}

fn load_spec(arg: &str, dim: usize) -> Result<DependenceSpec> {
    if let Some(d) = arg.strip_prefix("ar:") {
        let d: usize = d.parse().map_err(|_| Error::Config(format!("bad AR order in `{arg}`")))?;
        return DependenceSpec::ar(d);
    }
    if arg == "var1" {
        return kron_spec(dim, &[(1, 1, 1)]);
    }
    DependenceSpec::load(Path::new(arg))
}

fn load_data(path: &Path, standardize: bool) -> Result<TimeSeries> {
    let s = TimeSeries::load_csv(path)?;
    if standardize {
        s.standard_scale()
    } else {
        Ok(s)
    }
}

fn check_compatible(spec: &DependenceSpec, series: &TimeSeries) -> Result<()> {
    if spec.dim() != series.dim() {
        return Err(Error::Shape(format!("spec expects {} columns, data has {}", spec.dim(), series.dim())));
    }
    for t in spec.terms() {
        for f in t.factors() {
            if series.kinds()[f.component] == ColumnKind::Binary && f.exponent > 1 {
                eprintln!(
                    "warning: term `{t}` raises binary column {} to power {}; this equals power 1",
                    f.component, f.exponent
                );
            }
        }
    }
    Ok(())
}

fn ple_fit(
    estimator: Estimator,
    spec: &DependenceSpec,
    series: &TimeSeries,
    cfg: &Effective,
    margin: Option<usize>,
) -> Result<PleResult> {
    let gd = cfg.settings.gd(cfg.time_limit_s);
    match (estimator, margin) {
        (Estimator::PleNaive, None) => fit_naive(spec, series, &gd),
        (Estimator::PleNaive, Some(m)) => fit_naive_with_margin(spec, series, m, &gd),
        (Estimator::PleBipartition, None) => fit_bipartition(spec, series, cfg.seed, &gd),
        (Estimator::PleSgd, None) => fit_online_sgd(spec, series, &cfg.settings.sgd(cfg.seed)),
        (e, Some(_)) if e != Estimator::PleNaive => {
            Err(Error::Config("--common-margin is only supported with ple-naive".into()))
        }
        (e, _) => Err(Error::Config(format!("{e} is not a pseudo-likelihood estimator"))),
    }
}

pub fn fit(a: FitArgs) -> Result<u8> {
    let cfg = effective(load_config(a.config.as_deref())?, a.estimator, a.seed, a.time_limit_s, a.standardize, &a.hyper)?;
    if a.diagnostics.is_some() && cfg.estimator != Estimator::Mcle {
        return Err(Error::Config("--diagnostics is only available for mcle".into()));
    }
    let series = load_data(&a.data, cfg.standardize)?;
    let spec = load_spec(&a.spec, series.dim())?;
    check_compatible(&spec, &series)?;
    let (n, d) = (series.len(), spec.order());

    let result = match cfg.estimator {
        Estimator::Mle => {
            let (theta, secs) = benchmark::estimate(Estimator::Mle, &spec, &series, &cfg.settings, cfg.seed, None)?;
            json!({ "theta": theta, "wall_time_s": secs })
        }
        Estimator::Mcle => {
            if d >= MCLE_SLOW_ORDER && n >= MCLE_SLOW_N {
                eprintln!(
                    "warning: mcle with order {d} on {n} observations is expected to run for hours; \
                     consider --time-limit-s or a pseudo-likelihood estimator"
                );
            }
            let scoring = ScoringConfig { time_limit_s: cfg.time_limit_s, ..Default::default() };
            let r = fisher_scoring(&spec, &series, &vec![0.0; spec.k()], &cfg.settings.exchange(cfg.seed), &scoring)?;
            if let Some(p) = &a.diagnostics {
                let mut buf = Vec::new();
                r.write_diagnostics(&mut buf)?;
                write_text(p, &String::from_utf8_lossy(&buf))?;
            }
            json!({
                "theta": r.theta_hat,
                "iterations": r.iterations,
                "converged": r.converged,
                "final_acceptance_rate": r.final_acceptance_rate,
                "wall_time_s": r.wall_time,
            })
        }
        e => {
            let r = ple_fit(e, &spec, &series, &cfg, None)?;
            if r.separated {
                eprintln!("warning: ‖θ‖ reached the separation cap; the pseudo-likelihood may be unbounded");
            }
            let rep = r.report(n, d)?;
            json!({
                "theta": rep.theta,
                "log_pl": rep.log_pl,
                "log_pl_pairs": r.log_pl_pairs,
                "aic": rep.aic,
                "pic": rep.pic,
                "n_pairs_used": rep.n_pairs_used,
                "wall_time_s": rep.wall_time_s,
                "converged": rep.converged,
                "separated": rep.separated,
                "epochs": r.epochs,
            })
        }
    };
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "config": {
            "data": a.data,
            "spec": a.spec,
            "spec_text": spec.to_string(),
            "estimator": cfg.estimator,
            "seed": cfg.seed,
            "time_limit_s": cfg.time_limit_s,
            "standardize": cfg.standardize,
            "settings": cfg.settings,
        },
        "n": n,
        "dim": series.dim(),
        "result": result,
    });
    emit(a.out.as_deref(), &to_json(&doc)?)?;
    Ok(0)
}

#[derive(Debug, Clone, Serialize)]
struct SelectRow {
    spec: String,
    k: usize,
    d: usize,
    theta: Option<Vec<f64>>,
    log_pl: Option<f64>,
    aic: Option<f64>,
    pic: Option<f64>,
    best_aic: bool,
    best_pic: bool,
    error: Option<String>,
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "--".into(), |v| format!("{v:.2}"))
}

pub fn select(a: SelectArgs) -> Result<u8> {
    if a.spec.len() < 2 {
        return Err(Error::Config("select needs at least two --spec values".into()));
    }
    let cfg = effective(load_config(a.config.as_deref())?, a.estimator, a.seed, a.time_limit_s, a.standardize, &a.hyper)?;
    if !matches!(cfg.estimator, Estimator::PleNaive | Estimator::PleBipartition | Estimator::PleSgd) {
        return Err(Error::Config("select ranks pseudo-likelihood fits; use a ple-* estimator".into()));
    }
    let series = load_data(&a.data, cfg.standardize)?;
    let specs: Vec<Result<DependenceSpec>> = a.spec.iter().map(|s| load_spec(s, series.dim())).collect();
    let margin = a
        .common_margin
        .then(|| specs.iter().filter_map(|s| s.as_ref().ok()).map(DependenceSpec::order).max().unwrap_or(1));

    let mut rows: Vec<SelectRow> = a
        .spec
        .iter()
        .zip(specs)
        .map(|(name, spec)| {
            let mut row = SelectRow {
                spec: name.clone(),
                k: 0,
                d: 0,
                theta: None,
                log_pl: None,
                aic: None,
                pic: None,
                best_aic: false,
                best_pic: false,
                error: None,
            };
            let outcome = spec.and_then(|spec| {
                row.k = spec.k();
                row.d = margin.unwrap_or(spec.order());
                check_compatible(&spec, &series)?;
                let r = ple_fit(cfg.estimator, &spec, &series, &cfg, margin)?;
                let (aic, pic) = aic_pic(r.log_pl, spec.k(), series.len(), row.d)?;
                Ok((r, aic, pic))
            });
            match outcome {
                Ok((r, aic, pic)) => {
                    row.log_pl = Some(r.log_pl);
                    row.aic = Some(aic);
                    row.pic = Some(pic);
                    row.theta = Some(r.theta_hat);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();

    let argmin = |f: fn(&SelectRow) -> Option<f64>, rows: &[SelectRow]| {
        rows.iter().enumerate().filter_map(|(i, r)| f(r).map(|v| (i, v))).min_by(|x, y| x.1.total_cmp(&y.1)).map(|x| x.0)
    };
    let Some(best_aic) = argmin(|r| r.aic, &rows) else {
        let first = rows.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(Error::NoSolution(format!("every fit failed; first error: {first}")));
    };
    rows[best_aic].best_aic = true;
    if let Some(i) = argmin(|r| r.pic, &rows) {
        rows[i].best_pic = true;
    }
    // Successful fits ranked by AIC, failures last in input order.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| match (rows[i].aic, rows[j].aic) {
        (Some(x), Some(y)) => x.total_cmp(&y).then(i.cmp(&j)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => i.cmp(&j),
    });
    let ranked: Vec<SelectRow> = order.into_iter().map(|i| rows[i].clone()).collect();

    let table: Vec<Vec<String>> = ranked
        .iter()
        .enumerate()
        .map(|(rank, r)| {
            let mark = |b: bool| if b { "*" } else { "" };
            vec![
                if r.error.is_some() { "-".into() } else { (rank + 1).to_string() },
                r.spec.clone(),
                r.k.to_string(),
                num(r.log_pl),
                format!("{}{}", num(r.aic), mark(r.best_aic)),
                format!("{}{}", num(r.pic), mark(r.best_pic)),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let text = align(&["rank", "spec", "K", "log_pl", "aic", "pic", "error"], &table);

    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "select",
        "config": {
            "data": a.data,
            "specs": a.spec,
            "estimator": cfg.estimator,
            "seed": cfg.seed,
            "time_limit_s": cfg.time_limit_s,
            "standardize": cfg.standardize,
            "common_margin": a.common_margin,
            "settings": cfg.settings,
        },
        "n": series.len(),
        "rows": ranked,
    });
    print!("{text}");
    if let Some(prefix) = &a.out {
        let with = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        let mut csv = String::from("rank,spec,k,d,log_pl,aic,pic,best_aic,best_pic,error\n");
        for (rank, r) in ranked.iter().enumerate() {
            let f = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:?}"));
            csv += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                if r.error.is_some() { String::new() } else { (rank + 1).to_string() },
                quote(&r.spec),
                r.k,
                r.d,
                f(r.log_pl),
                f(r.aic),
                f(r.pic),
                r.best_aic,
                r.best_pic,
                quote(r.error.as_deref().unwrap_or("")),
            );
        }
        write_text(&with(".csv"), &csv)?;
        write_text(&with(".txt"), &text)?;
        write_text(&with(".json"), &to_json(&doc)?)?;
    }
    Ok(0)
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn benchmark(a: BenchmarkArgs) -> Result<u8> {
    let mut manifest = match (&a.preset, &a.manifest) {
        (Some(p), None) => p.manifest(),
        (None, Some(path)) => Manifest::parse(&std::fs::read_to_string(path)?)?,
        _ => return Err(Error::Config("give exactly one of --preset or --manifest".into())),
    };
    if let Some(r) = a.reps {
        manifest = manifest.with_reps(r);
    }
    if let Some(s) = a.seed {
        manifest.seed = s;
    }
    if let Some(t) = a.time_limit_s {
        manifest.time_limit_s = t;
    }
    manifest = manifest.with_settings(&a.hyper.settings());
    manifest.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let report = pool.install(|| benchmark::run(&manifest))?;

    std::fs::create_dir_all(&a.out)?;
    let text = report.to_text();
    write_text(&a.out.join("results.csv"), &report.to_csv()?)?;
    write_text(&a.out.join("results.txt"), &text)?;
    write_text(&a.out.join("curves.csv"), &report.curves_csv()?)?;
    write_text(&a.out.join("report.json"), &to_json(&report)?)?;
    write_text(&a.out.join("manifest.toml"), &manifest.to_toml()?)?;
    print!("{text}");
    Ok(0)
}

pub fn verify(a: VerifyArgs) -> Result<u8> {
    let mut cfg = VerifyConfig::default();
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.riccati_tol {
        if !(t > 0.0) {
            return Err(Error::Config("--riccati-tol must be positive".into()));
        }
        cfg.riccati_tol = t;
    }
    let report = run_all(&cfg)?;
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                if c.passed { "PASS" } else { "FAIL" }.into(),
                c.name.clone(),
                format!("{:.3e}", c.measured),
                format!("{:.1e}", c.tolerance),
                c.detail.clone(),
            ]
        })
        .collect();
    print!("{}", align(&["status", "check", "measured", "tolerance", "detail"], &rows));
    let failed = report.failures().count();
    println!("{} checks, {} failed, {:.2} s", report.checks.len(), failed, report.seconds);
    if let Some(p) = &a.out {
        write_text(p, &to_json(&report)?)?;
    }
    Ok(if failed == 0 { 0 } else { 3 })
}
