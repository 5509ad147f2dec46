//! Measuring (w, k)-dispersion of collections of one-dimensional curves.
//!
//! In one dimension a partition splits a ball iff one of its boundaries lies
//! inside it, so everything here reduces to counting breakpoints in closed
//! windows. Balls are closed: a breakpoint on the boundary counts.

use serde::{Deserialize, Serialize};

use crate::piecewise::UtilityCurve;

/// Constant multiplying the deviation term of the concentration bound.
pub const CONCENTRATION_CONSTANT: f64 = 5.0;

/// `ks[i]` is the largest number of curves split by any ball of radius `ws[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionProfile {
    pub ws: Vec<f64>,
    pub ks: Vec<usize>,
}

impl DispersionProfile {
    pub fn iter(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.ws.iter().copied().zip(self.ks.iter().copied())
    }
}

/// All breakpoints of all curves with the index of the curve they came from,
/// sorted by location (ties by curve index).
pub fn collect_breakpoints(curves: &[UtilityCurve]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = curves
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.func.breakpoints().iter().map(move |&b| (b, i)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

/// Maximum number of points in any closed interval of width `w`.
pub fn max_interval_count(points: &[f64], w: f64) -> usize {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = 0;
    let mut right = 0;
    for (left, &p) in sorted.iter().enumerate() {
        if right < left {
            right = left;
        }
        while right < sorted.len() && sorted[right] <= p + w {
            right += 1;
        }
        best = best.max(right - left);
    }
    best
}

/// Number of curves with at least one breakpoint in `[rho0 - w, rho0 + w]`.
pub fn dispersion_at(curves: &[UtilityCurve], rho0: f64, w: f64) -> usize {
    let (lo, hi) = (rho0 - w, rho0 + w);
    curves
        .iter()
        .filter(|c| {
            let bps = c.func.breakpoints();
            let i = bps.partition_point(|&b| b < lo);
            i < bps.len() && bps[i] <= hi
        })
        .count()
}

/// Largest number of distinct curves split by a radius-`w` ball, for every `w`.
///
/// The maximizing ball can always be slid right until its left end touches a
/// breakpoint, so only windows `[b, b + 2w]` anchored at breakpoints are scanned.
pub fn empirical_profile(curves: &[UtilityCurve], ws: &[f64]) -> DispersionProfile {
    let bps = collect_breakpoints(curves);
    let ks = ws
        .iter()
        .map(|&w| max_distinct_in_window(&bps, curves.len(), 2.0 * w))
        .collect();
    DispersionProfile { ws: ws.to_vec(), ks }
}

fn max_distinct_in_window(bps: &[(f64, usize)], n_curves: usize, width: f64) -> usize {
    let mut counts = vec![0usize; n_curves];
    let mut distinct = 0;
    let mut best = 0;
    let mut right = 0;
    for left in 0..bps.len() {
        let anchor = bps[left].0;
        while right < bps.len() && bps[right].0 <= anchor + width {
            let c = bps[right].1;
            if counts[c] == 0 {
                distinct += 1;
            }
            counts[c] += 1;
            right += 1;
        }
        best = best.max(distinct);
        let c = bps[left].1;
        counts[c] -= 1;
        if counts[c] == 0 {
            distinct -= 1;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub observed_k: usize,
    pub bound_k: f64,
    pub pass: bool,
}

/// Compares the densest width-`w` window of `samples` against
/// `r w kappa + 5 sqrt(r ln(1/zeta))`.
pub fn kappa_check(samples: &[f64], kappa: f64, w: f64, zeta: f64) -> KappaReport {
    let r = samples.len() as f64;
    let observed_k = max_interval_count(samples, w);
    let bound_k = r * w * kappa + CONCENTRATION_CONSTANT * (r * (1.0 / zeta).ln()).sqrt();
    KappaReport {
        observed_k,
        bound_k,
        pass: observed_k as f64 <= bound_k,
    }
}

/// Bucketed form of [`kappa_check`]: the samples split into `buckets` groups
/// of at most `bucket_size` independent `kappa`-bounded draws each (draws in
/// different groups may be dependent). The bound is the sum of the per-group
/// bounds at confidence `zeta / buckets`.
pub fn bucketed_kappa_check(
    samples: &[f64],
    buckets: usize,
    bucket_size: usize,
    kappa: f64,
    w: f64,
    zeta: f64,
) -> KappaReport {
    let observed_k = max_interval_count(samples, w);
    let p = buckets.max(1) as f64;
    let m = bucket_size as f64;
    let bound_k = p * (m * w * kappa + CONCENTRATION_CONSTANT * (m * (p / zeta).ln()).sqrt());
    KappaReport {
        observed_k,
        bound_k,
        pass: observed_k as f64 <= bound_k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{Domain, PieceForm, PiecewiseFn1D};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn curve(bps: &[f64]) -> UtilityCurve {
        let d = Domain::new(0.0, 1.0).unwrap();
        let forms = (0..=bps.len()).map(|i| PieceForm::Constant((i % 2) as f64)).collect();
        UtilityCurve::new(PiecewiseFn1D::new(d, bps.to_vec(), forms).unwrap(), 1.0, "t").unwrap()
    }

    fn random_curves(rng: &mut ChaCha8Rng, n: usize, max_bps: usize) -> Vec<UtilityCurve> {
        (0..n)
            .map(|_| {
                let k = rng.random_range(0..=max_bps);
                let mut b: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..0.99)).collect();
                b.sort_by(f64::total_cmp);
                b.dedup();
                curve(&b)
            })
            .collect()
    }

    fn brute_interval(points: &[f64], w: f64) -> usize {
        points
            .iter()
            .map(|&p| points.iter().filter(|&&q| q >= p && q <= p + w).count())
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn collect_examples() {
        assert!(collect_breakpoints(&[curve(&[]), curve(&[])]).is_empty());
        let got = collect_breakpoints(&[curve(&[0.3]), curve(&[0.3, 0.7])]);
        assert_eq!(got, vec![(0.3, 0), (0.3, 1), (0.7, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cs = random_curves(&mut rng, 100, 5);
        let total: usize = cs.iter().map(|c| c.func.breakpoints().len()).sum();
        assert_eq!(collect_breakpoints(&cs).len(), total);
    }

    #[test]
    fn max_interval_examples() {
        assert_eq!(max_interval_count(&[], 0.5), 0);
        assert_eq!(max_interval_count(&[0.1, 0.2, 0.9], 0.3), 2);
        let n = 20;
        let pts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        assert_eq!(max_interval_count(&pts, 1.0), n + 1);
    }

    #[test]
    fn dispersion_at_examples() {
        assert_eq!(dispersion_at(&[curve(&[0.25])], 0.5, 0.25), 1);
        assert_eq!(dispersion_at(&[curve(&[0.1]), curve(&[0.9])], 0.5, 0.2), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cs = random_curves(&mut rng, 50, 4);
        for _ in 0..200 {
            let r0 = rng.random_range(0.0..1.0);
            let w = rng.random_range(0.0..0.2);
            let brute = cs
                .iter()
                .filter(|c| c.func.breakpoints().iter().any(|&b| (b - r0).abs() <= w))
                .count();
            assert_eq!(dispersion_at(&cs, r0, w), brute);
        }
    }

    #[test]
    fn profile_examples() {
        let p = empirical_profile(&[curve(&[]), curve(&[])], &[0.1, 0.2]);
        assert_eq!(p.ks, vec![0, 0]);
        let copies: Vec<UtilityCurve> = (0..7).map(|_| curve(&[0.4])).collect();
        let p = empirical_profile(&copies, &[1e-6, 0.1, 0.5]);
        assert_eq!(p.ks, vec![7, 7, 7]);
    }

    #[test]
    fn smoothed_profile_is_small() {
        let t = 400;
        let w = 1.0 / (t as f64).sqrt();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cs: Vec<UtilityCurve> = (0..t).map(|_| curve(&[rng.random_range(0.0..1.0)])).collect();
            let p = empirical_profile(&cs, &[w]);
            assert!(p.ks[0] as f64 <= 5.0 * (t as f64).sqrt());
        }
    }

    #[test]
    fn kappa_examples() {
        let r = kappa_check(&[], 1.0, 0.1, 0.05);
        assert_eq!(r.observed_k, 0);
        assert!(r.pass);

        let r = 2500;
        let w = 1.0 / (r as f64).sqrt();
        let passes = (0..50)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s: Vec<f64> = (0..r).map(|_| rng.random_range(0.0..1.0)).collect();
                kappa_check(&s, 1.0, w, 0.05).pass
            })
            .count();
        assert!(passes >= 49);

        let same = vec![0.5; 2500];
        let rep = kappa_check(&same, 1.0, 1e-4, 0.05);
        assert_eq!(rep.observed_k, 2500);
        assert!(!rep.pass);
    }

    #[test]
    fn bucketed_reduces_to_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s: Vec<f64> = (0..400).map(|_| rng.random_range(0.0..1.0)).collect();
        let a = kappa_check(&s, 1.0, 0.05, 0.05);
        let b = bucketed_kappa_check(&s, 1, 400, 1.0, 0.05, 0.05);
        assert_eq!(a, b);
        // two dependent copies of one independent sample
        let mut twice = s.clone();
        twice.extend(&s);
        let r = bucketed_kappa_check(&twice, 2, 400, 1.0, 0.05, 0.05);
        assert_eq!(r.observed_k, 2 * a.observed_k);
        assert!(r.pass);
    }

    proptest! {
        #[test]
        fn interval_count_matches_brute_force(pts in prop::collection::vec(0.0f64..1.0, 0..50), w in 0.0f64..0.5) {
            prop_assert_eq!(max_interval_count(&pts, w), brute_interval(&pts, w));
        }

        #[test]
        fn profile_monotone_and_dominates(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cs = random_curves(&mut rng, 30, 4);
            let ws = [0.001, 0.01, 0.05, 0.1, 0.3];
            let p = empirical_profile(&cs, &ws);
            for pair in p.ks.windows(2) {
                prop_assert!(pair[0] <= pair[1]);
            }
            for _ in 0..50 {
                let r0 = rng.random_range(-0.2..1.2);
                for (w, k) in p.iter() {
                    prop_assert!(dispersion_at(&cs, r0, w) <= k);
                }
            }
        }
    }
}
