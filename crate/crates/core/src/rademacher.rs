//! Empirical Rademacher complexity of a sample of one-dimensional curves, and
//! the dispersion-based envelope it is compared against.

use rand::Rng;

use crate::error::{Error, Result};
use crate::piecewise::{PiecewiseFn1D, UtilityCurve};
use crate::stats::mean_se;

/// Monte-Carlo estimate of `E_sigma sup_rho (1/N) sum_i sigma_i u_i(rho)`
/// over `n_sigma` sign draws, as `(mean, standard error)`. Each supremum is
/// taken exactly on the signed sum.
///
/// Every curve is first shifted by its value at the domain midpoint. The
/// shift adds `sum_i sigma_i c_i`, which has mean zero, so the expectation is
/// unchanged; each draw's supremum becomes nonnegative and the dominant
/// source of variance disappears.
pub fn empirical_rademacher<R: Rng + ?Sized>(
    curves: &[UtilityCurve],
    n_sigma: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if n_sigma == 0 {
        return Err(Error::BadParams("need at least one sign draw".into()));
    }
    let Some(first) = curves.first() else {
        return Ok((0.0, 0.0));
    };
    let domain = first.domain();
    let mid = domain.midpoint();
    let n = curves.len() as f64;
    let mut centered = Vec::with_capacity(curves.len());
    for c in curves {
        let shift = PiecewiseFn1D::constant(domain, -c.func.eval(mid)?);
        centered.push(c.func.add(&shift)?);
    }
    let negated: Vec<PiecewiseFn1D> = centered.iter().map(|f| f.scaled(-1.0)).collect();
    let mut sups = Vec::with_capacity(n_sigma);
    for _ in 0..n_sigma {
        let signed: Vec<&PiecewiseFn1D> = centered
            .iter()
            .zip(&negated)
            .map(|(f, neg)| if rng.random::<bool>() { f } else { neg })
            .collect();
        let total = PiecewiseFn1D::sum(domain, &signed)?;
        // the midpoint attains zero up to rounding in affine pieces
        sups.push((total.argmax().1 / n).max(0.0));
    }
    Ok(mean_se(&sups))
}

/// `min(sqrt(d ln(R/w) / N) + L w + k / N, sqrt(pdim / N))`, each term with
/// constant 1. An order-of-magnitude envelope, not a proven bound.
pub fn rademacher_bound(d: usize, r: f64, w: f64, l: f64, k: usize, n: usize, pdim: Option<f64>) -> Result<f64> {
    if !(w > 0.0 && r > w) {
        return Err(Error::BadGeometry { r, w });
    }
    if d == 0 || n == 0 || !(l >= 0.0) {
        return Err(Error::BadParams("need d, N >= 1 and L >= 0".into()));
    }
    let nf = n as f64;
    let dispersion = (d as f64 * (r / w).ln() / nf).sqrt() + l * w + k as f64 / nf;
    Ok(match pdim {
        Some(p) => dispersion.min((p / nf).sqrt()),
        None => dispersion,
    })
}
