//! Experiment pipelines and the building blocks they share with the
//! verification suites.
//!
//! One-dimensional domains `[lo, hi]` enter the dispersion formulas with
//! `R = hi - lo`: a ball of radius `w <= R` around any point of the domain
//! keeps at least `w` of its length inside, so the volume ratio in the
//! regret and utility arguments is at least `w / R`. Net sizes use the
//! radius of the enclosing ball, `(hi - lo) / 2`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adversary::{adversary_smoothed, Stream};
use super::config::{Pipeline, Validated};
use super::report::{emit_report, table_csv, trajectory_csv, Check, DispersionRow, RunSummary, Summary, TrajectoryRow};
use crate::dispersion::{bucketed_kappa_check, empirical_profile, DispersionProfile};
use crate::error::{Error, Result};
use crate::online::{
    build_net, compute_regret, lambda_full_info, Exp3, Forecaster, Region, RegretLedger, DEFAULT_NET_CAP,
};
use crate::piecewise::{PiecewiseFn1D, UtilityCurve};
use crate::private::{exp_mech_1d, utility_bound};
use crate::rademacher::{empirical_rademacher, rademacher_bound};
use crate::stats::median;

/// RNG driving instance generation for `seed`.
pub fn stream_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of the learner's own randomness, decorrelated from the stream.
pub fn learner_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

/// Geometric grid of radii from `len * 1e-4` to `len / 4`.
pub fn default_ws(len: f64) -> Vec<f64> {
    let steps = 16;
    (0..steps)
        .map(|i| len * 1e-4 * (2500.0f64).powf(i as f64 / (steps - 1) as f64))
        .collect()
}

#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub ledger: RegretLedger,
    pub trajectory: Vec<TrajectoryRow>,
    pub lambda: f64,
    /// `ln` of the final total weight `W_{T+1}`.
    pub log_weight: f64,
}

/// Runs a forecaster over the stream. With `track` set, the per-round
/// regret against the best fixed parameter so far is recorded.
pub fn run_forecaster(stream: &Stream, mut f: Forecaster, track: bool) -> Result<OnlineRun> {
    let mut plays = Vec::with_capacity(stream.curves.len());
    let mut trajectory = Vec::new();
    let mut realized = 0.0;
    for (t, c) in stream.curves.iter().enumerate() {
        let rho = f.play()?;
        let u = c.eval(rho)?;
        f.update(c)?;
        if track {
            realized += u;
            trajectory.push(TrajectoryRow {
                t: t + 1,
                rho,
                u_t: u,
                cum_regret: f.cumulative().argmax().1 - realized,
            });
        }
        plays.push(rho);
    }
    Ok(OnlineRun {
        ledger: compute_regret(&stream.curves, &plays)?,
        trajectory,
        lambda: f.lambda(),
        log_weight: f.log_weight()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRatio {
    /// `ln(W_{T+1} / W_1)`.
    pub lhs: f64,
    /// Largest floor `ln(w/R) + lambda (OPT - H k - L T w)` over the profile.
    pub rhs: f64,
    /// The `(w, k)` attaining that floor.
    pub w: f64,
    pub k: usize,
    pub pass: bool,
}

pub const WEIGHT_RATIO_SLACK: f64 = 1e-6;

/// Lower bound on the weight growth used in the regret argument, checked at
/// every `(w, k)` of the stream's empirical dispersion profile with `w < R`:
/// parameters within `w` of the optimum earn at least `OPT - H k - L T w`,
/// and that ball keeps at least `w` of the domain's length `R`.
pub fn weight_ratio(stream: &Stream, run: &OnlineRun, ws: &[f64]) -> WeightRatio {
    let len = stream.domain.len();
    let t = stream.curves.len() as f64;
    let lhs = run.log_weight - len.ln();
    let mut worst = WeightRatio {
        lhs,
        rhs: f64::NEG_INFINITY,
        w: f64::NAN,
        k: 0,
        pass: true,
    };
    for (w, k) in empirical_profile(&stream.curves, ws).iter().filter(|&(w, _)| w < len) {
        let rhs = (w / len).ln() + run.lambda * (run.ledger.opt - stream.h_bound * k as f64 - stream.lipschitz * t * w);
        if rhs > worst.rhs {
            worst.rhs = rhs;
            worst.w = w;
            worst.k = k;
        }
    }
    worst.pass = lhs >= worst.rhs - WEIGHT_RATIO_SLACK;
    worst
}

/// Radius the forecaster is tuned with: `1/(kappa' sqrt T)` when the
/// stream's breakpoints have a known density bound `kappa'`, otherwise
/// `len / sqrt T`; capped at half the domain.
pub fn stream_w(stream: &Stream, t: usize) -> f64 {
    let len = stream.domain.len();
    let root = (t as f64).sqrt().max(2.0);
    let w = if stream.kappa_prime.is_finite() && stream.kappa_prime > 0.0 {
        1.0 / (stream.kappa_prime * root)
    } else {
        len / root
    };
    w.min(len / 2.0)
}

/// Full-information forecaster tuned with `lambda = sqrt(ln(R/w)/T)/H`.
pub fn full_info_forecaster(stream: &Stream, w: f64, seed: u64) -> Result<Forecaster> {
    let len = stream.domain.len();
    let lambda = lambda_full_info(1, len, w, stream.curves.len().max(1), stream.h_bound)?;
    Forecaster::new(stream.domain, lambda, stream.h_bound, learner_seed(seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditRun {
    pub plays: Vec<usize>,
    pub payoffs: Vec<f64>,
    pub best_arm: usize,
    pub best_total: f64,
    pub regret: f64,
}

/// Evenly spaced one-dimensional net with exactly `k` cell-centered points.
pub fn net_with_arms(stream: &Stream, k: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    let d = stream.domain;
    // slightly above len / 2k so rounding cannot add a cell
    let w = d.len() / (2.0 * k as f64) * (1.0 + 1e-9);
    Ok((build_net(&Region::Box(vec![(d.lo, d.hi)]), w, DEFAULT_NET_CAP)?, w))
}

/// Exp3 on the net; regret is against the best single arm in hindsight.
pub fn run_exp3(stream: &Stream, arms: Vec<Vec<f64>>, seed: u64) -> Result<BanditRun> {
    let mut learner = Exp3::new(arms.clone(), stream.h_bound, stream.curves.len(), learner_seed(seed))?;
    let mut plays = Vec::with_capacity(stream.curves.len());
    let mut payoffs = Vec::with_capacity(stream.curves.len());
    for c in &stream.curves {
        let (arm, pay) = learner.round(|x| c.func.eval_unchecked(x[0]))?;
        plays.push(arm);
        payoffs.push(pay);
    }
    let totals: Vec<f64> = arms
        .iter()
        .map(|a| stream.curves.iter().map(|c| c.func.eval_unchecked(a[0])).sum())
        .collect();
    let (best_arm, best_total) =
        totals.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );
    let realized: f64 = payoffs.iter().sum();
    Ok(BanditRun {
        plays,
        payoffs,
        best_arm,
        best_total,
        regret: best_total - realized,
    })
}

/// `3 H sqrt(T K ln K)`.
pub fn exp3_regret_bound(h: f64, t: usize, k: usize) -> f64 {
    let kf = k as f64;
    3.0 * h * (t as f64 * kf * kf.ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchTrial {
    pub rho: f64,
    pub opt: f64,
    pub achieved: f64,
    /// `(OPT - U(rho)) / N`.
    pub subopt: f64,
    pub bound: f64,
    pub w: f64,
    pub k: usize,
}

/// Smallest value of `f(w, k)` over a profile, with its argument.
fn best_over_profile<F>(profile: &DispersionProfile, len: f64, f: F) -> Result<(f64, f64, usize)>
where
    F: Fn(f64, usize) -> Result<f64>,
{
    let mut best = (f64::INFINITY, f64::NAN, 0);
    for (w, k) in profile.iter().filter(|&(w, _)| w < len) {
        let b = f(w, k)?;
        if b < best.0 {
            best = (b, w, k);
        }
    }
    if best.0.is_infinite() {
        return Err(Error::BadParams("no radius below the domain length".into()));
    }
    Ok(best)
}

/// One draw of the exact exponential mechanism on the summed curves,
/// compared with the utility guarantee at the best measured `(w, k)`.
pub fn private_batch_trial(
    stream: &Stream,
    eps: f64,
    zeta: f64,
    ws: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<BatchTrial> {
    let curves = &stream.curves;
    let n = curves.len();
    let refs: Vec<&PiecewiseFn1D> = curves.iter().map(|c| &c.func).collect();
    let total = PiecewiseFn1D::sum(stream.domain, &refs)?;
    let (_, opt) = total.argmax();
    let rho = exp_mech_1d(curves, eps, stream.h_bound, rng)?;
    let achieved = total.eval(rho)?;
    let len = stream.domain.len();
    let profile = empirical_profile(curves, ws);
    let (bound, w, k) = best_over_profile(&profile, len, |w, k| {
        utility_bound(eps, zeta, stream.h_bound, 1, len, w, k, stream.lipschitz, n)
    })?;
    Ok(BatchTrial {
        rho,
        opt,
        achieved,
        subopt: (opt - achieved) / n as f64,
        bound,
        w,
        k,
    })
}

/// Curves rescaled into `[0, 1]`.
pub fn normalized(stream: &Stream) -> Result<Vec<UtilityCurve>> {
    stream
        .curves
        .iter()
        .map(|c| UtilityCurve::new(c.func.scaled(1.0 / stream.h_bound), 1.0, c.instance_tag.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherPoint {
    pub n: usize,
    pub estimate: f64,
    pub se: f64,
    pub bound: f64,
}

/// Rademacher estimate of the normalized stream and the envelope at the
/// best measured `(w, k)`.
pub fn rademacher_point(stream: &Stream, n_sigma: usize, ws: &[f64], rng: &mut ChaCha8Rng) -> Result<RademacherPoint> {
    let curves = normalized(stream)?;
    let (estimate, se) = empirical_rademacher(&curves, n_sigma, rng)?;
    let len = stream.domain.len();
    let profile = empirical_profile(&curves, ws);
    let l = stream.lipschitz / stream.h_bound;
    let (bound, _, _) = best_over_profile(&profile, len, |w, k| {
        rademacher_bound(1, len, w, l, k, curves.len(), None)
    })?;
    Ok(RademacherPoint {
        n: curves.len(),
        estimate,
        se,
        bound,
    })
}

/// Number of sequences that fail to be non-increasing.
pub fn count_inversions(series: &[Vec<f64>]) -> usize {
    series.iter().filter(|s| s.windows(2).any(|p| p[1] > p[0])).count()
}

fn empty_summary(v: &Validated) -> Summary {
    Summary {
        pipeline: v.pipeline.name().into(),
        family: v.family.name().into(),
        rounds: v.raw.rounds,
        seeds: v.raw.seeds.clone(),
        runs: Vec::new(),
        median_regret: None,
        dispersion: Vec::new(),
        bounds: BTreeMap::new(),
        checks: Vec::new(),
        all_pass: true,
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

/// Runs a validated configuration in memory, returning the summary and the
/// CSV tables to write next to it.
pub fn execute(v: &Validated) -> Result<(Summary, Vec<(String, String)>)> {
    let cfg = &v.raw;
    let t = cfg.rounds;
    let mut summary = empty_summary(v);
    let mut tables = Vec::new();
    let stream_for = |seed: u64, len: usize| adversary_smoothed(v.family, len, &cfg.instance, &mut stream_rng(seed));

    match v.pipeline {
        Pipeline::OnlineFullInfo | Pipeline::OnlinePrivate => {
            let mut all_ratio_ok = true;
            for &seed in &cfg.seeds {
                let stream = stream_for(seed, t)?;
                let w = cfg.w.unwrap_or_else(|| stream_w(&stream, t));
                let f = if v.pipeline == Pipeline::OnlineFullInfo {
                    full_info_forecaster(&stream, w, seed)?
                } else {
                    Forecaster::private(
                        stream.domain,
                        cfg.epsilon.unwrap_or_default(),
                        cfg.delta.unwrap_or_default(),
                        t,
                        stream.h_bound,
                        learner_seed(seed),
                    )?
                };
                let run = run_forecaster(&stream, f, true)?;
                let mut ws = cfg.ws.clone().unwrap_or_else(|| default_ws(stream.domain.len()));
                ws.push(w);
                let ratio = weight_ratio(&stream, &run, &ws);
                all_ratio_ok &= ratio.pass;
                let mut extra = BTreeMap::from([
                    ("lambda".to_string(), run.lambda),
                    ("h_bound".to_string(), stream.h_bound),
                    ("w".to_string(), w),
                    ("floor_w".to_string(), ratio.w),
                    ("floor_k".to_string(), ratio.k as f64),
                    ("log_weight_ratio".to_string(), ratio.lhs),
                    ("log_weight_ratio_floor".to_string(), ratio.rhs),
                ]);
                if v.pipeline == Pipeline::OnlinePrivate {
                    extra.insert(
                        "per_round_epsilon".into(),
                        crate::online::per_round_epsilon(run.lambda, stream.h_bound),
                    );
                }
                summary.runs.push(RunSummary {
                    seed,
                    opt: run.ledger.opt,
                    realized: run.ledger.realized_total(),
                    regret: run.ledger.regret,
                    extra,
                });
                tables.push((format!("trajectory_seed{seed}.csv"), trajectory_csv(&run.trajectory)));
            }
            summary.checks.push(Check::new(
                "weight_ratio",
                all_ratio_ok,
                format!("ln(W_T+1/W_1) >= floor - {WEIGHT_RATIO_SLACK} at every profiled (w, k) on every seed"),
            ));
        }
        Pipeline::Bandit => {
            let k = cfg.arms.unwrap_or(32);
            let mut regrets = Vec::new();
            let mut h = 0.0;
            let mut net_ok = true;
            for &seed in &cfg.seeds {
                let stream = stream_for(seed, t)?;
                h = stream.h_bound;
                let (net, w) = match cfg.w {
                    Some(w) => {
                        let d = stream.domain;
                        (build_net(&Region::Box(vec![(d.lo, d.hi)]), w, DEFAULT_NET_CAP)?, w)
                    }
                    None => net_with_arms(&stream, k)?,
                };
                let size_cap = 3.0 * (stream.domain.len() / 2.0) / w;
                net_ok &= net.len() as f64 <= size_cap;
                let arms = net.len();
                let run = run_exp3(&stream, net.clone(), seed)?;
                regrets.push(run.regret);
                let mut rows = vec![];
                let mut realized = 0.0;
                for (i, (&a, &p)) in run.plays.iter().zip(&run.payoffs).enumerate() {
                    realized += p;
                    rows.push(TrajectoryRow {
                        t: i + 1,
                        rho: net[a][0],
                        u_t: p,
                        cum_regret: f64::NAN,
                    });
                }
                // regret against the best arm of the whole horizon
                let mut best_prefix = vec![0.0; arms];
                let mut paid = 0.0;
                for (row, c) in rows.iter_mut().zip(&stream.curves) {
                    for (b, x) in best_prefix.iter_mut().zip(&net) {
                        *b += c.func.eval_unchecked(x[0]);
                    }
                    paid += row.u_t;
                    row.cum_regret = best_prefix.iter().copied().fold(f64::NEG_INFINITY, f64::max) - paid;
                }
                debug_assert!((paid - realized).abs() <= 1e-9 * paid.abs().max(1.0));
                summary.runs.push(RunSummary {
                    seed,
                    opt: run.best_total,
                    realized: run.payoffs.iter().sum(),
                    regret: run.regret,
                    extra: BTreeMap::from([
                        ("arms".to_string(), arms as f64),
                        ("w".to_string(), w),
                        ("best_arm".to_string(), net[run.best_arm][0]),
                    ]),
                });
                tables.push((format!("trajectory_seed{seed}.csv"), trajectory_csv(&rows)));
            }
            let med = median(&regrets);
            summary.median_regret = Some(med);
            let bound = exp3_regret_bound(h, t, k);
            summary.bounds.insert("exp3_regret".into(), bound);
            summary.checks.push(Check::new(
                "exp3_regret",
                med <= bound,
                format!("median regret {med} <= {bound}"),
            ));
            summary
                .checks
                .push(Check::new("net_size", net_ok, "net cardinality <= (3R/w)^d"));
        }
        Pipeline::PrivateBatch => {
            let eps = cfg.epsilon.unwrap_or(1.0);
            let mut within = 0;
            let mut rows = Vec::new();
            for &seed in &cfg.seeds {
                let stream = stream_for(seed, t)?;
                let ws = cfg.ws.clone().unwrap_or_else(|| default_ws(stream.domain.len()));
                let mut rng = ChaCha8Rng::seed_from_u64(learner_seed(seed));
                let trial = private_batch_trial(&stream, eps, cfg.zeta, &ws, &mut rng)?;
                within += usize::from(trial.subopt <= trial.bound);
                rows.push(vec![
                    seed.to_string(),
                    fmt(trial.rho),
                    fmt(trial.subopt),
                    fmt(trial.bound),
                    fmt(trial.w),
                    trial.k.to_string(),
                ]);
                summary.runs.push(RunSummary {
                    seed,
                    opt: trial.opt,
                    realized: trial.achieved,
                    regret: trial.opt - trial.achieved,
                    extra: BTreeMap::from([
                        ("subopt_avg".to_string(), trial.subopt),
                        ("utility_bound".to_string(), trial.bound),
                        ("rho".to_string(), trial.rho),
                    ]),
                });
            }
            let need = ((1.0 - cfg.zeta) * cfg.seeds.len() as f64).ceil() as usize;
            summary.checks.push(Check::new(
                "utility_bound",
                within >= need,
                format!("{within}/{} trials within the bound (need {need})", cfg.seeds.len()),
            ));
            tables.push((
                "trials.csv".into(),
                table_csv(&["seed", "rho", "subopt", "bound", "w", "k"], &rows),
            ));
        }
        Pipeline::DispersionAudit => {
            let mut passes = 0;
            let mut rows = Vec::new();
            for &seed in &cfg.seeds {
                let stream = stream_for(seed, t)?;
                let ws = cfg.ws.clone().unwrap_or_else(|| default_ws(stream.domain.len()));
                let profile = empirical_profile(&stream.curves, &ws);
                for (w, k) in profile.iter() {
                    summary.dispersion.push(DispersionRow { seed, w, k });
                    rows.push(vec![seed.to_string(), fmt(w), k.to_string()]);
                }
                let w = 1.0 / (stream.kappa_prime * (t as f64).sqrt());
                let rep = bucketed_kappa_check(
                    &stream.breakpoints(),
                    stream.buckets,
                    t,
                    stream.kappa_prime,
                    w,
                    cfg.zeta,
                );
                passes += usize::from(rep.pass);
                summary.runs.push(RunSummary {
                    seed,
                    opt: 0.0,
                    realized: 0.0,
                    regret: 0.0,
                    extra: BTreeMap::from([
                        ("kappa_w".to_string(), w),
                        ("observed_k".to_string(), rep.observed_k as f64),
                        ("bound_k".to_string(), rep.bound_k),
                    ]),
                });
            }
            let need = ((1.0 - cfg.zeta) * cfg.seeds.len() as f64).ceil() as usize;
            summary.checks.push(Check::new(
                "kappa_check",
                passes >= need,
                format!(
                    "{passes}/{} seeds within the concentration bound (need {need})",
                    cfg.seeds.len()
                ),
            ));
            tables.push(("profile.csv".into(), table_csv(&["seed", "w", "k"], &rows)));
        }
        Pipeline::RademacherAudit => {
            let sizes = cfg.sample_sizes.clone().unwrap_or_else(|| vec![50, 200, 800]);
            let n_sigma = cfg.n_sigma.unwrap_or(50);
            let mut below = true;
            let mut series = Vec::new();
            let mut rows = Vec::new();
            for &seed in &cfg.seeds {
                let mut rng = stream_rng(seed);
                let mut est = Vec::new();
                for &n in &sizes {
                    let stream = adversary_smoothed(v.family, n, &cfg.instance, &mut rng)?;
                    let ws = cfg.ws.clone().unwrap_or_else(|| default_ws(stream.domain.len()));
                    let pt = rademacher_point(&stream, n_sigma, &ws, &mut rng)?;
                    below &= pt.estimate <= pt.bound;
                    est.push(pt.estimate);
                    rows.push(vec![
                        seed.to_string(),
                        n.to_string(),
                        fmt(pt.estimate),
                        fmt(pt.se),
                        fmt(pt.bound),
                    ]);
                }
                summary.runs.push(RunSummary {
                    seed,
                    opt: 0.0,
                    realized: 0.0,
                    regret: 0.0,
                    extra: sizes
                        .iter()
                        .zip(&est)
                        .map(|(n, e)| (format!("estimate_n{n}"), *e))
                        .collect(),
                });
                series.push(est);
            }
            let inversions = count_inversions(&series);
            let allowed = (cfg.seeds.len() / 20).max(1);
            summary.checks.push(Check::new(
                "below_envelope",
                below,
                "estimate <= envelope at every size",
            ));
            summary.checks.push(Check::new(
                "decreasing_in_n",
                inversions <= allowed,
                format!(
                    "{inversions} of {} seeds not decreasing (allowed {allowed})",
                    cfg.seeds.len()
                ),
            ));
            tables.push((
                "rademacher.csv".into(),
                table_csv(&["seed", "n", "estimate", "se", "bound"], &rows),
            ));
        }
    }
    if matches!(v.pipeline, Pipeline::OnlineFullInfo | Pipeline::OnlinePrivate) {
        let regrets: Vec<f64> = summary.runs.iter().map(|r| r.regret).collect();
        summary.median_regret = Some(median(&regrets));
    }
    Ok((summary.finalize(), tables))
}

/// Executes the configuration and writes its report into `dir`.
pub fn run_experiment(v: &Validated, dir: &Path) -> Result<Summary> {
    let (summary, tables) = execute(v)?;
    emit_report(dir, &summary, &tables)?;
    Ok(summary)
}
