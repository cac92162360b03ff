//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use mimarkov::benchmark::{self, BenchmarkReport, BenchmarkRow, Cell, Estimator, Manifest, Settings, TrueModel};
use mimarkov::gaussian::{ar1_to_mininfo, ar2_to_mininfo, ard_to_mininfo, simulate_ar, var1_to_mininfo};
use mimarkov::gaussian::{ClassicalArParams, ClassicalVarParams};
use mimarkov::mcle::{enumerate_statistics, fisher_scoring_with, MomentSource, ScoringConfig};
use mimarkov::numeric::log_sum_exp;
use mimarkov::oracle::{exact_cle, EnumerationBudget};
use mimarkov::ple::{aic_pic, fit_naive, GdConfig};
use mimarkov::spec::MonomialTerm;
use mimarkov::verify::{self, VerifyReport};
use mimarkov::{kron_spec, total_statistic, ColumnKind, DependenceSpec, Error, TimeSeries};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `(passed, detail)`, plus the criterion's own runtime when it was
/// measured elsewhere.
type Outcome = Result<(bool, String, Option<f64>), String>;

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ar1_model() -> TrueModel {
    TrueModel::Ar { phi: vec![0.5], sigma2: 0.5 }
}

fn cell(label: &str, n: usize, estimators: Vec<Estimator>, reps: usize, settings: Settings) -> Cell {
    Cell { label: label.into(), model: ar1_model(), n: vec![n], estimators, reps, settings }
}

fn manifest(name: &str, time_limit_s: f64, cells: Vec<Cell>) -> Manifest {
    Manifest { name: name.into(), seed: 0, time_limit_s, cells }
}

/// Rows tag some estimators with their settings, e.g. `ple-sgd(eta=..)`.
fn row<'a>(r: &'a BenchmarkReport, label: &str, e: Estimator) -> Option<&'a BenchmarkRow> {
    r.rows.iter().find(|row| row.label == label && row.estimator.split('(').next() == Some(e.name()))
}

/// `None` for timed-out or failed cells.
fn mean_error(r: &BenchmarkReport, label: &str, e: Estimator) -> Option<f64> {
    row(r, label, e).and_then(|row| row.mean_error)
}

fn mean_time(r: &BenchmarkReport, label: &str, e: Estimator) -> Option<(f64, bool)> {
    row(r, label, e).map(|row| (row.mean_time_s.unwrap_or(f64::INFINITY), row.timed_out))
}

fn within(x: Option<f64>, lo: f64, hi: f64) -> bool {
    x.is_some_and(|x| (lo..=hi).contains(&x))
}

fn fmt(x: Option<f64>) -> String {
    x.map_or("--".into(), |x| format!("{x:.4}"))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn c1_transforms() -> Outcome {
    let tol = 1e-12;
    let ar = |phi: Vec<f64>| ClassicalArParams::new(phi, 0.5).map_err(s);
    let e1 = (ar1_to_mininfo(&ar(vec![0.5])?).map_err(s)?.theta()[0] - 1.0).abs();
    let e2 = max_diff(ar2_to_mininfo(&ar(vec![0.5, 0.3])?).map_err(s)?.theta(), &[0.7, 0.6]);
    let e3 = max_diff(ard_to_mininfo(&ar(vec![0.5, 0.3, 0.1])?).map_err(s)?.theta(), &[0.64, 0.5, 0.2]);
    let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.5]);
    let var = ClassicalVarParams::new(vec![a], DMatrix::identity(2, 2) * 0.5).map_err(s)?;
    let want = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]);
    let e4 = (var1_to_mininfo(&var).map_err(s)?.theta() - want).abs().max();
    let worst = e1.max(e2).max(e3).max(e4);
    Ok((worst <= tol, format!("max |Δθ| = {worst:.1e} (AR1 {e1:.1e}, AR2 {e2:.1e}, AR3 {e3:.1e}, VAR1 {e4:.1e})"), None))
}

/// Passes when every named check passed.
fn from_verify(report: &VerifyReport, names: &[&str]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut seconds = 0.0;
    for name in names {
        let c = report.checks.iter().find(|c| c.name == *name).ok_or(format!("missing check {name}"))?;
        ok &= c.passed;
        seconds += c.seconds;
        parts.push(format!("{name} {:.1e} ≤ {:.0e}", c.measured, c.tolerance));
    }
    Ok((ok, parts.join(", "), Some(seconds)))
}

/// Maximizes the exact conditional log-likelihood of a scalar θ by a coarse
/// grid followed by golden-section refinement.
fn grid_search_cle(all: &[Vec<f64>], h_obs: f64) -> f64 {
    let f = |t: f64| {
        let logw: Vec<f64> = all.iter().map(|h| t * h[0]).collect();
        t * h_obs - log_sum_exp(&logw)
    };
    let grid: Vec<f64> = (0..=2000).map(|i| -10.0 + 0.01 * i as f64).collect();
    let best = grid.iter().copied().fold(grid[0], |b, t| if f(t) > f(b) { t } else { b });
    let (mut lo, mut hi) = (best - 0.01, best + 0.01);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) > f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

fn c5_exact_oracles(report: &VerifyReport) -> Outcome {
    let spec = DependenceSpec::ar(1).map_err(s)?;
    let params = ClassicalArParams::new(vec![0.5], 0.5).map_err(s)?;
    let (mut worst, mut compared, mut unbounded) = (0.0f64, 0, 0);
    for seed in 0..10 {
        let series = simulate_ar(&params, 8, 0, 7000 + seed).map_err(s)?;
        let oracle = match exact_cle(&spec, &series, EnumerationBudget::default()) {
            Ok(t) => t[0],
            Err(Error::Unbounded { .. }) => {
                unbounded += 1;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let all = enumerate_statistics(&spec, &series, 8).map_err(s)?;
        let grid = grid_search_cle(&all, total_statistic(&spec, &series).map_err(s)?[0]);
        let cfg = ScoringConfig { grad_tol: 1e-12, max_iters: 200, ..Default::default() };
        let scored = fisher_scoring_with(&spec, &series, &[0.0], &MomentSource::Exact { max_interior: 8 }, &cfg)
            .map_err(s)?
            .theta_hat[0];
        worst = worst.max((scored - oracle).abs()).max((scored - grid).abs()).max((oracle - grid).abs());
        compared += 1;
    }
    let (vok, vdetail, _) = from_verify(report, &["mcle.normalization", "mcle.exact_scoring_vs_exact_cle"])?;
    let ok = vok && compared > 0 && worst <= 1e-3;
    Ok((ok, format!("scoring/exact_cle/grid max gap {worst:.1e} over {compared} datasets ({unbounded} unbounded); {vdetail}"), None))
}

fn c6_accuracy() -> Outcome {
    use Estimator::*;
    let m = manifest(
        "acceptance-accuracy",
        900.0,
        vec![
            cell("n100", 100, vec![PleNaive, Mcle], 30, Settings::default()),
            cell("n1000", 1000, vec![PleNaive, Mle], 30, Settings::default()),
        ],
    );
    let r = benchmark::run(&m).map_err(s)?;
    let ple100 = mean_error(&r, "n100", PleNaive);
    let ple1000 = mean_error(&r, "n1000", PleNaive);
    let mle1000 = mean_error(&r, "n1000", Mle);
    let mcle100 = mean_error(&r, "n100", Mcle);
    let ok = within(ple100, 0.1, 0.4)
        && within(ple1000, 0.03, 0.15)
        && within(mle1000, 0.03, 0.12)
        && within(mcle100, 0.15, 0.6);
    Ok((
        ok,
        format!(
            "PLE n=100 {} in [0.1,0.4]; PLE n=1000 {} in [0.03,0.15]; MLE n=1000 {} in [0.03,0.12]; MCLE n=100 {} in [0.15,0.6]",
            fmt(ple100),
            fmt(ple1000),
            fmt(mle1000),
            fmt(mcle100)
        ),
        None,
    ))
}

fn c7_sgd_budgets() -> Outcome {
    let sgd = |eta: f64, iters: usize| Settings { eta: Some(eta), iters: Some(iters), ..Default::default() };
    let mut cells: Vec<Cell> = [1_000, 10_000, 100_000]
        .into_iter()
        .map(|it| cell(&format!("eta0.001-{it}"), 1000, vec![Estimator::PleSgd], 30, sgd(0.001, it)))
        .collect();
    cells.push(cell("eta0.01-10000", 1000, vec![Estimator::PleSgd], 30, sgd(0.01, 10_000)));
    let r = benchmark::run(&manifest("acceptance-sgd", 900.0, cells)).map_err(s)?;
    let e = |l: &str| mean_error(&r, l, Estimator::PleSgd);
    let (a, b, c, d) = (e("eta0.001-1000"), e("eta0.001-10000"), e("eta0.001-100000"), e("eta0.01-10000"));
    let decreasing = matches!((a, b, c), (Some(a), Some(b), Some(c)) if a > b && b > c);
    let ok = decreasing && d.is_some_and(|d| d <= 0.2);
    Ok((
        ok,
        format!("η=0.001: {} > {} > {}; η=0.01 10⁴ iters {} ≤ 0.2", fmt(a), fmt(b), fmt(c), fmt(d)),
        None,
    ))
}

fn c8_bipartition_scaling() -> Outcome {
    let bip = benchmark::run(&manifest(
        "acceptance-bipartition",
        900.0,
        vec![cell("n10000", 10_000, vec![Estimator::PleBipartition], 30, Settings::default())],
    ))
    .map_err(s)?;
    // One naive run suffices for the ordering; a timeout counts as slower.
    let naive_limit = 300.0;
    let naive = benchmark::run(&manifest(
        "acceptance-naive",
        naive_limit,
        vec![cell("n10000", 10_000, vec![Estimator::PleNaive], 1, Settings::default())],
    ))
    .map_err(s)?;
    let err = mean_error(&bip, "n10000", Estimator::PleBipartition);
    let (tb, _) = mean_time(&bip, "n10000", Estimator::PleBipartition).ok_or("missing bipartition row")?;
    let (tn, timed_out) = mean_time(&naive, "n10000", Estimator::PleNaive).ok_or("missing naive row")?;
    let tn = if timed_out { naive_limit } else { tn };
    let ok = tb < tn && err.is_some_and(|e| e <= 0.07);
    let naive_desc = if timed_out { format!("> {naive_limit:.0}s (time limit)") } else { format!("{tn:.1}s") };
    Ok((ok, format!("bipartition {tb:.3}s vs naive {naive_desc}; bipartition error {} ≤ 0.07", fmt(err)), None))
}

fn c9_selection() -> Outcome {
    let (aic, pic) = aic_pic(-343262.87, 1, 1000, 1).map_err(s)?;
    let formula_ok = (aic - 686527.75).abs() <= 0.015 && (pic - 686538.85).abs() <= 0.015;

    let ar1 = DependenceSpec::ar(1).map_err(s)?;
    let terms: Vec<MonomialTerm> =
        ["0:0^1*1:0^1", "0:0^1*2:0^1"].iter().map(|t| t.parse()).collect::<Result<_, _>>().map_err(s)?;
    let ar2_type = DependenceSpec::new(2, 1, terms).map_err(s)?;
    let params = ClassicalArParams::new(vec![0.5], 0.5).map_err(s)?;
    let cfg = GdConfig::default();
    let reps = 20;
    let mut wins = 0;
    for rep in 0..reps {
        let x = simulate_ar(&params, 1000, 0, 9000 + rep).map_err(s)?;
        let a = fit_naive(&ar1, &x, &cfg).map_err(s)?;
        let b = fit_naive(&ar2_type, &x, &cfg).map_err(s)?;
        let (aic_a, _) = aic_pic(a.log_pl, ar1.k(), 1000, ar1.order()).map_err(s)?;
        let (aic_b, _) = aic_pic(b.log_pl, ar2_type.k(), 1000, ar2_type.order()).map_err(s)?;
        if aic_a < aic_b {
            wins += 1;
        }
    }
    let rate = wins as f64 / reps as f64;
    Ok((
        formula_ok && rate >= 0.8,
        format!("AIC {aic:.2}, PIC {pic:.2} (formula {}); AR(1) selected in {wins}/{reps} (need ≥ 80%)", if formula_ok { "ok" } else { "off" }),
        None,
    ))
}

/// Bivariate (binary, real) series: the real column is AR(1) and the binary
/// column switches on the lagged real value.
fn bivariate_series(n: usize, seed: u64) -> Result<TimeSeries, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = 0.0f64;
    let mut data = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let e: f64 = rng.sample(StandardNormal);
        let b = if 0.8 * z + rng.sample::<f64, _>(StandardNormal) > 0.0 { 1.0 } else { 0.0 };
        z = 0.6 * z + 0.3 * b + e;
        data.extend([b, z]);
    }
    TimeSeries::new(data, 2, vec![ColumnKind::Binary, ColumnKind::Real]).map_err(s)?.standard_scale().map_err(s)
}

fn smoke_bivariate() -> Outcome {
    let series = bivariate_series(300, 42)?;
    let lag_sets: [&[(usize, u32, u32)]; 4] =
        [&[(1, 1, 1)], &[(1, 1, 1), (1, 1, 2)], &[(1, 1, 1), (1, 2, 1)], &[(1, 1, 1), (1, 1, 2), (1, 2, 1), (1, 2, 2)]];
    let mut scores = Vec::new();
    for lags in lag_sets {
        let spec = kron_spec(2, lags).map_err(s)?;
        let fit = fit_naive(&spec, &series, &GdConfig::default()).map_err(s)?;
        let (aic, pic) = aic_pic(fit.log_pl, spec.k(), series.len(), spec.order()).map_err(s)?;
        scores.push((spec.k(), aic, pic));
    }
    let finite = scores.iter().all(|(_, a, p)| a.is_finite() && p.is_finite());
    let mut ranked = scores.clone();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    let desc: Vec<String> = ranked.iter().map(|(k, a, p)| format!("K={k} AIC {a:.1} PIC {p:.1}")).collect();
    Ok((finite, desc.join("; "), None))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report_line = |label: &str, limit_s: Option<f64>, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = f();
        let elapsed = t.elapsed().as_secs_f64();
        let (ok, detail, secs) = match outcome {
            Ok((ok, d, own)) => (ok, d, own.unwrap_or(elapsed)),
            Err(e) => (false, format!("error: {e}"), elapsed),
        };
        let in_time = limit_s.is_none_or(|l| secs < l);
        let ok = ok && in_time;
        let limit = limit_s.map_or(String::new(), |l| format!(", limit {l:.0}s"));
        println!("{label}: {} ({secs:.1}s{limit}) {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    };

    report_line("criterion 1 transforms", Some(1.0), &mut c1_transforms);

    let t = Instant::now();
    let report = verify::run_all(&verify::VerifyConfig::default()).expect("verify suite runs");
    let verify_secs = t.elapsed().as_secs_f64();
    report_line("criterion 2 round trips", Some(10.0), &mut || {
        from_verify(&report, &["roundtrip.ar1", "roundtrip.ar2", "roundtrip.var1", "riccati.residual"])
    });
    report_line("criterion 3 fisher information", Some(10.0), &mut || {
        from_verify(&report, &["fisher.closed_form_vs_quadrature", "fisher.orthogonality"])
    });
    report_line("criterion 4 pythagorean identity", Some(5.0), &mut || {
        from_verify(&report, &["divergence.pythagorean"])
    });
    report_line("criterion 5 exact oracles", Some(30.0), &mut || c5_exact_oracles(&report));
    report_line("criterion 6 estimator accuracy", None, &mut c6_accuracy);
    report_line("criterion 7 sgd budgets", Some(600.0), &mut c7_sgd_budgets);
    report_line("criterion 8 bipartition scaling", None, &mut c8_bipartition_scaling);
    report_line("criterion 9 information criteria", None, &mut c9_selection);
    report_line("criterion 10 verify gate", None, &mut || {
        let (ok, detail, _) = from_verify(
            &report,
            &[
                "stats.kappa_delta_permutation_invariance",
                "stats.swap_delta_vs_recompute",
                "ple.gradient_finite_differences",
                "mcle.zero_theta_acceptance",
                "ple.log_pl_at_zero",
            ],
        )?;
        let all = report.passed();
        let fast = verify_secs < 120.0;
        Ok((ok && all && fast, format!("{detail}; all {} checks pass: {all}; full suite {verify_secs:.1}s < 120s", report.checks.len()), Some(verify_secs)))
    });
    report_line("smoke bivariate specs", None, &mut smoke_bivariate);

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
