//! Online learning of piecewise utilities.
//!
//! [`Forecaster`] is the full-information exponentially weighted forecaster:
//! each round it samples `rho` with density proportional to
//! `exp(lambda * U_t(rho))`, where `U_t` is the sum of all curves seen so
//! far. The cumulative sum is stored without `lambda`, which is applied only
//! at sampling time. The private variant is the same learner run with
//! [`lambda_private`].
//!
//! [`Exp3`] handles bandit feedback over a finite net of parameters built by
//! [`build_net`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::{Domain, PiecewiseFn1D, UtilityCurve};

/// `sqrt(d ln(R/w) / T) / H`.
pub fn lambda_full_info(d: usize, r: f64, w: f64, t: usize, h: f64) -> Result<f64> {
    if !(w > 0.0 && r > w) {
        return Err(Error::BadGeometry { r, w });
    }
    if t == 0 || !(h > 0.0) {
        return Err(Error::BadParams(format!("need T >= 1 and H > 0 (T = {t}, H = {h})")));
    }
    Ok((d as f64 * (r / w).ln() / t as f64).sqrt() / h)
}

/// `eps / (4 H sqrt(2 T ln(1/delta)))`.
pub fn lambda_private(eps: f64, delta: f64, t: usize, h: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadPrivacyParams(format!("epsilon {eps} not in (0,1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadPrivacyParams(format!("delta {delta} not in (0,1)")));
    }
    if t == 0 || !(h > 0.0) {
        return Err(Error::BadParams(format!("need T >= 1 and H > 0 (T = {t}, H = {h})")));
    }
    Ok(eps / (4.0 * h * (2.0 * t as f64 * (1.0 / delta).ln()).sqrt()))
}

/// Per-round privacy loss of the private forecaster, `2 lambda H`.
pub fn per_round_epsilon(lambda: f64, h: f64) -> f64 {
    2.0 * lambda * h
}

/// Exponentially weighted forecaster over a one-dimensional domain.
#[derive(Debug, Clone)]
pub struct Forecaster {
    domain: Domain,
    lambda: f64,
    h_bound: f64,
    cum: PiecewiseFn1D,
    t: usize,
    rng: ChaCha8Rng,
}

impl Forecaster {
    /// Requires `lambda` in `(0, 1/H]`.
    pub fn new(domain: Domain, lambda: f64, h_bound: f64, seed: u64) -> Result<Self> {
        if !(h_bound > 0.0) {
            return Err(Error::BadParams(format!("H must be positive (got {h_bound})")));
        }
        if !(lambda > 0.0 && lambda <= 1.0 / h_bound) {
            return Err(Error::BadParams(format!(
                "lambda {lambda} not in (0, 1/H] with H = {h_bound}"
            )));
        }
        Ok(Forecaster {
            domain,
            lambda,
            h_bound,
            cum: PiecewiseFn1D::zero(domain),
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Forecaster tuned for `(eps, delta)`-differential privacy over `horizon` rounds.
    pub fn private(domain: Domain, eps: f64, delta: f64, horizon: usize, h_bound: f64, seed: u64) -> Result<Self> {
        let lambda = lambda_private(eps, delta, horizon, h_bound)?;
        Self::new(domain, lambda, h_bound, seed)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn h_bound(&self) -> f64 {
        self.h_bound
    }

    /// `U_t`, the sum of all curves observed so far.
    pub fn cumulative(&self) -> &PiecewiseFn1D {
        &self.cum
    }

    pub fn rounds(&self) -> usize {
        self.t
    }

    /// Samples this round's parameter.
    pub fn play(&mut self) -> Result<f64> {
        self.cum.sample_exp(self.lambda, &mut self.rng)
    }

    /// Adds the observed curve to the cumulative sum.
    pub fn update(&mut self, curve: &UtilityCurve) -> Result<()> {
        if curve.domain() != self.domain {
            return Err(Error::DomainMismatch);
        }
        let (lo, hi) = curve.func.value_range();
        let slack = 1e-12 * self.h_bound;
        if lo < -slack || hi > self.h_bound + slack {
            return Err(Error::RangeViolation {
                value: if lo < -slack { lo } else { hi },
                bound: self.h_bound,
            });
        }
        self.cum = self.cum.add(&curve.func)?;
        self.t += 1;
        Ok(())
    }

    /// `ln W_{t+1} = ln ∫ exp(lambda U_{t+1})`.
    pub fn log_weight(&self) -> Result<f64> {
        self.cum.log_exp_integral(self.lambda, self.domain.lo, self.domain.hi)
    }
}

/// Region to cover with a net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Axis-aligned box, one `(lo, hi)` per dimension.
    Box(Vec<(f64, f64)>),
    /// Euclidean ball; covered through its bounding box.
    Ball { center: Vec<f64>, radius: f64 },
}

pub const DEFAULT_NET_CAP: usize = 1_000_000;

/// Grid net with per-axis spacing at most `2w / sqrt(d)` and cell-centered
/// points, so every point of the region is within `w` of the net.
pub fn build_net(region: &Region, w: f64, cap: usize) -> Result<Vec<Vec<f64>>> {
    if !(w > 0.0) {
        return Err(Error::BadParams(format!("net radius must be positive (got {w})")));
    }
    let sides: Vec<(f64, f64)> = match region {
        Region::Box(b) => b.clone(),
        Region::Ball { center, radius } => center.iter().map(|c| (c - radius, c + radius)).collect(),
    };
    let d = sides.len();
    if d == 0 || sides.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::BadParams("region must have positive extent".into()));
    }
    let spacing = 2.0 * w / (d as f64).sqrt();
    let counts: Vec<usize> = sides
        .iter()
        .map(|(lo, hi)| ((hi - lo) / spacing).ceil().max(1.0) as usize)
        .collect();
    let total = counts
        .iter()
        .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
        .unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(Error::NetTooLarge { count: total, cap });
    }
    let axes: Vec<Vec<f64>> = sides
        .iter()
        .zip(&counts)
        .map(|(&(lo, hi), &c)| {
            let step = (hi - lo) / c as f64;
            (0..c).map(|i| lo + step * (i as f64 + 0.5)).collect()
        })
        .collect();
    let mut points = vec![Vec::with_capacity(d)];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Exp3 over a finite set of arms with exploration mixing.
#[derive(Debug, Clone)]
pub struct Exp3 {
    arms: Vec<Vec<f64>>,
    log_weights: Vec<f64>,
    eta: f64,
    gamma: f64,
    h_bound: f64,
    t: usize,
    rng: ChaCha8Rng,
}

impl Exp3 {
    /// Standard tuning for a known horizon:
    /// `eta = sqrt(ln K / (T K))`, `gamma = min(1, sqrt(K ln K / ((e - 1) T)))`.
    pub fn new(arms: Vec<Vec<f64>>, h_bound: f64, horizon: usize, seed: u64) -> Result<Self> {
        let k = arms.len() as f64;
        let t = horizon.max(1) as f64;
        let ln_k = k.ln().max(0.0);
        let eta = (ln_k / (t * k)).sqrt();
        let gamma = (k * ln_k / ((std::f64::consts::E - 1.0) * t)).sqrt().min(1.0);
        Self::with_params(arms, h_bound, eta, gamma, seed)
    }

    pub fn with_params(arms: Vec<Vec<f64>>, h_bound: f64, eta: f64, gamma: f64, seed: u64) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::EmptyNet);
        }
        if !(h_bound > 0.0 && eta >= 0.0 && (0.0..=1.0).contains(&gamma)) {
            return Err(Error::BadParams(format!(
                "Exp3 needs H > 0, eta >= 0, gamma in [0,1] (H = {h_bound}, eta = {eta}, gamma = {gamma})"
            )));
        }
        Ok(Exp3 {
            log_weights: vec![0.0; arms.len()],
            arms,
            eta,
            gamma,
            h_bound,
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn arms(&self) -> &[Vec<f64>] {
        &self.arms
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rounds(&self) -> usize {
        self.t
    }

    /// Weights normalized so the largest is 1.
    pub fn weights(&self) -> Vec<f64> {
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.log_weights.iter().map(|l| (l - max).exp()).collect()
    }

    /// `(1 - gamma) w_i / sum(w) + gamma / K`.
    pub fn probabilities(&self) -> Vec<f64> {
        let w = self.weights();
        let total: f64 = w.iter().sum();
        let k = w.len() as f64;
        w.iter()
            .map(|x| (1.0 - self.gamma) * x / total + self.gamma / k)
            .collect()
    }

    /// Plays one round: samples an arm, observes only its payoff, and applies
    /// the importance-weighted update. Returns the arm index and payoff.
    pub fn round<F>(&mut self, mut payoff: F) -> Result<(usize, f64)>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let probs = self.probabilities();
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut arm = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                arm = i;
                break;
            }
        }
        let value = payoff(&self.arms[arm]);
        if !(value >= 0.0 && value <= self.h_bound) {
            return Err(Error::PayoffOutOfRange {
                value,
                bound: self.h_bound,
            });
        }
        let estimate = value / self.h_bound / probs[arm];
        self.log_weights[arm] += self.eta * estimate;
        self.t += 1;
        Ok((arm, value))
    }
}

/// Per-round plays and payoffs against the hindsight optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretLedger {
    pub plays: Vec<f64>,
    pub realized: Vec<f64>,
    pub opt: f64,
    pub opt_rho: f64,
    pub regret: f64,
}

impl RegretLedger {
    pub fn realized_total(&self) -> f64 {
        self.realized.iter().sum()
    }
}

/// Regret of `plays` against `max_rho sum_t u_t(rho)`.
pub fn compute_regret(curves: &[UtilityCurve], plays: &[f64]) -> Result<RegretLedger> {
    if curves.len() != plays.len() {
        return Err(Error::LengthMismatch {
            left: curves.len(),
            right: plays.len(),
        });
    }
    let Some(first) = curves.first() else {
        return Ok(RegretLedger {
            plays: Vec::new(),
            realized: Vec::new(),
            opt: 0.0,
            opt_rho: f64::NAN,
            regret: 0.0,
        });
    };
    let domain = first.domain();
    let refs: Vec<&PiecewiseFn1D> = curves.iter().map(|c| &c.func).collect();
    let total = PiecewiseFn1D::sum(domain, &refs)?;
    let (opt_rho, opt) = total.argmax();
    let realized = curves
        .iter()
        .zip(plays)
        .map(|(c, &p)| c.eval(p))
        .collect::<Result<Vec<f64>>>()?;
    let regret = opt - realized.iter().sum::<f64>();
    Ok(RegretLedger {
        plays: plays.to_vec(),
        realized,
        opt,
        opt_rho,
        regret,
    })
}
