//! Exponential mechanism for private optimization of averaged utilities.
//!
//! Sensitivity of the average of `n` utilities in `[0, H]` is at most `H/n`,
//! so the mechanism samples with density proportional to
//! `exp(eps * sum_i u_i(rho) / (2H))`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::piecewise::{log_sum_exp, PiecewiseFn1D, UtilityCurve};

/// Exponent scale `eps / (2H)` applied to the summed utility.
pub fn mechanism_lambda(eps: f64, h: f64) -> f64 {
    eps / (2.0 * h)
}

fn check_eps_h(eps: f64, h: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadPrivacyParams(format!("epsilon must be positive (got {eps})")));
    }
    if !(h > 0.0) {
        return Err(Error::BadParams(format!("H must be positive (got {h})")));
    }
    Ok(())
}

fn total(curves: &[UtilityCurve]) -> Result<PiecewiseFn1D> {
    let first = curves
        .first()
        .ok_or_else(|| Error::BadParams("need at least one curve".into()))?;
    let refs: Vec<&PiecewiseFn1D> = curves.iter().map(|c| &c.func).collect();
    PiecewiseFn1D::sum(first.domain(), &refs)
}

/// Exact one-dimensional exponential mechanism.
pub fn exp_mech_1d<R: Rng + ?Sized>(curves: &[UtilityCurve], eps: f64, h: f64, rng: &mut R) -> Result<f64> {
    check_eps_h(eps, h)?;
    total(curves)?.sample_exp(mechanism_lambda(eps, h), rng)
}

/// Finite exponential mechanism over a net: picks point `i` with probability
/// proportional to `exp(eps * n * avg_utility(x_i) / (2H))`. Returns its index.
pub fn exp_mech_grid<F, R>(avg_utility: F, net: &[Vec<f64>], eps: f64, h: f64, n: usize, rng: &mut R) -> Result<usize>
where
    F: Fn(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    check_eps_h(eps, h)?;
    if net.is_empty() {
        return Err(Error::EmptyNet);
    }
    let scale = eps * n as f64 / (2.0 * h);
    let logits: Vec<f64> = net.iter().map(|p| scale * avg_utility(p)).collect();
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFiniteMass);
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * sum;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Ok(i);
        }
    }
    Ok(net.len() - 1)
}

/// High-probability suboptimality of the mechanism's output (in average utility):
/// `(2H / (n eps)) (d ln(R/w) + ln(1/zeta)) + L w + H k / n`.
#[allow(clippy::too_many_arguments)]
pub fn utility_bound(eps: f64, zeta: f64, h: f64, d: usize, r: f64, w: f64, k: usize, l: f64, n: usize) -> Result<f64> {
    if !(w > 0.0 && r >= w) {
        return Err(Error::BadGeometry { r, w });
    }
    if !(eps > 0.0 && zeta > 0.0 && zeta < 1.0 && h > 0.0 && l >= 0.0 && n > 0) {
        return Err(Error::BadParams(
            "utility bound needs eps, H, n > 0, L >= 0, zeta in (0,1)".into(),
        ));
    }
    let n = n as f64;
    Ok(2.0 * h / (n * eps) * (d as f64 * (r / w).ln() + (1.0 / zeta).ln()) + l * w + h * k as f64 / n)
}

/// `max_j |ln P_A(piece_j) - ln P_B(piece_j)|` for the densities proportional
/// to `exp(lambda f_a)` and `exp(lambda f_b)`, over the common refinement of
/// both functions' pieces.
pub fn max_log_ratio(f_a: &PiecewiseFn1D, f_b: &PiecewiseFn1D, lambda: f64) -> Result<f64> {
    let d = f_a.domain();
    if f_b.domain() != d {
        return Err(Error::DomainMismatch);
    }
    let z_a = f_a.log_exp_integral(lambda, d.lo, d.hi)?;
    let z_b = f_b.log_exp_integral(lambda, d.lo, d.hi)?;
    let mut cuts: Vec<f64> = f_a.breakpoints().iter().chain(f_b.breakpoints()).copied().collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.insert(0, d.lo);
    cuts.push(d.hi);
    let mut worst: f64 = 0.0;
    for win in cuts.windows(2) {
        let la = f_a.log_exp_integral(lambda, win[0], win[1])? - z_a;
        let lb = f_b.log_exp_integral(lambda, win[0], win[1])? - z_b;
        worst = worst.max((la - lb).abs());
    }
    Ok(worst)
}

/// True when the multisets differ by adding, removing or replacing one curve.
pub fn are_neighbors(a: &[UtilityCurve], b: &[UtilityCurve]) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if large.len() - small.len() > 1 {
        return false;
    }
    let mut used = vec![false; large.len()];
    let mut unmatched = 0;
    for c in small {
        match (0..large.len()).find(|&j| !used[j] && large[j].func == c.func) {
            Some(j) => used[j] = true,
            None => unmatched += 1,
        }
    }
    if large.len() == small.len() {
        unmatched <= 1
    } else {
        unmatched == 0
    }
}

/// Worst log probability ratio of the mechanism's output distributions on two
/// neighboring curve multisets. Bounded by `eps` for the mechanism above.
pub fn privacy_ratio_check(curves_a: &[UtilityCurve], curves_b: &[UtilityCurve], eps: f64, h: f64) -> Result<f64> {
    check_eps_h(eps, h)?;
    if !are_neighbors(curves_a, curves_b) {
        return Err(Error::NotNeighbors);
    }
    let domain = curves_a
        .first()
        .or(curves_b.first())
        .ok_or_else(|| Error::BadParams("both multisets are empty".into()))?
        .domain();
    let sum = |cs: &[UtilityCurve]| -> Result<PiecewiseFn1D> {
        let refs: Vec<&PiecewiseFn1D> = cs.iter().map(|c| &c.func).collect();
        PiecewiseFn1D::sum(domain, &refs)
    };
    max_log_ratio(&sum(curves_a)?, &sum(curves_b)?, mechanism_lambda(eps, h))
}

/// Probability of each piece of `sum(curves)` under the 1-d mechanism.
pub fn piece_probabilities(curves: &[UtilityCurve], eps: f64, h: f64) -> Result<Vec<f64>> {
    check_eps_h(eps, h)?;
    let logs = total(curves)?.log_piece_masses(mechanism_lambda(eps, h))?;
    let z = log_sum_exp(logs.iter().copied());
    Ok(logs.iter().map(|l| (l - z).exp()).collect())
}
