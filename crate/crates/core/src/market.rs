//! Posted-price mechanisms and second-price item auctions with anonymous
//! reserves, and their revenue and welfare as functions of the prices.
//!
//! Willingness to buy and clearing the reserve both use weak inequalities
//! (`v >= price`, `bid >= reserve`). Curves are right-continuous, so exactly
//! at a valuation coordinate the curve takes the value just above it; this
//! only matters on a measure-zero set of prices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::{Domain, PieceForm, PiecewiseFn1D, UtilityCurve};

pub const MAX_GENERAL_ITEMS: usize = 10;
/// Bundles are `u32` bitmasks.
pub const MAX_ITEMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationModel {
    Additive,
    UnitDemand,
    General,
}

/// Buyer valuations. For additive and unit-demand buyers `values[j][i]` is
/// buyer `j`'s value for item `i`; for general buyers `values[j][b]` is the
/// value of the bundle whose bitmask is `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationProfile {
    pub model: ValuationModel,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "W")]
    pub w: f64,
    pub values: Vec<Vec<f64>>,
}

impl ValuationProfile {
    pub fn new(model: ValuationModel, m: usize, w: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        let p = ValuationProfile {
            model,
            n: values.len(),
            m,
            w,
            values,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: self.values.len(),
            });
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::BadParams("W must be positive".into()));
        }
        let width = match self.model {
            ValuationModel::General => {
                if self.m > MAX_GENERAL_ITEMS {
                    return Err(Error::TooLarge {
                        n: self.m,
                        max: MAX_GENERAL_ITEMS,
                    });
                }
                1usize << self.m
            }
            _ if self.m > MAX_ITEMS => {
                return Err(Error::TooLarge {
                    n: self.m,
                    max: MAX_ITEMS,
                })
            }
            _ => self.m,
        };
        for row in &self.values {
            if row.len() != width {
                return Err(Error::LengthMismatch {
                    left: width,
                    right: row.len(),
                });
            }
            if row.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::BadParams("valuations must be finite and nonnegative".into()));
            }
            if self.model == ValuationModel::General {
                if row[0] != 0.0 {
                    return Err(Error::BadParams("empty bundle must have value 0".into()));
                }
                for b in 0..width {
                    for i in 0..self.m {
                        if b & (1 << i) != 0 && row[b ^ (1 << i)] > row[b] {
                            return Err(Error::BadParams("general valuations must be monotone".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Buyer `j`'s value for the bundle with bitmask `bundle`.
    pub fn value(&self, j: usize, bundle: u32) -> f64 {
        let row = &self.values[j];
        let items = (0..self.m).filter(|&i| bundle & (1 << i) != 0);
        match self.model {
            ValuationModel::Additive => items.map(|i| row[i]).sum(),
            ValuationModel::UnitDemand => items.map(|i| row[i]).fold(0.0, f64::max),
            ValuationModel::General => row[bundle as usize],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    /// Buyer receiving each item, if sold.
    pub allocation: Vec<Option<usize>>,
    pub payments: Vec<f64>,
    pub revenue: f64,
    pub welfare: f64,
}

fn check_prices(profile: &ValuationProfile, prices: &[f64]) -> Result<()> {
    if prices.len() != profile.m {
        return Err(Error::PriceCountMismatch {
            expected: profile.m,
            got: prices.len(),
        });
    }
    if prices.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::BadParams("prices must be nonnegative".into()));
    }
    Ok(())
}

fn bundle_items(mask: u32, m: usize) -> impl Iterator<Item = usize> {
    (0..m).filter(move |&i| mask & (1 << i) != 0)
}

/// True when bundle `a` precedes `b` comparing their sorted item lists.
fn lex_less(a: u32, b: u32, m: usize) -> bool {
    bundle_items(a, m).lt(bundle_items(b, m))
}

fn choose_bundle(profile: &ValuationProfile, j: usize, prices: &[f64], remaining: u32) -> u32 {
    let m = profile.m;
    match profile.model {
        ValuationModel::Additive => bundle_items(remaining, m)
            .filter(|&i| profile.values[j][i] >= prices[i])
            .fold(0, |acc, i| acc | (1 << i)),
        ValuationModel::UnitDemand => {
            let mut best: Option<(usize, f64)> = None;
            for i in bundle_items(remaining, m) {
                let u = profile.values[j][i] - prices[i];
                if u >= 0.0 && best.is_none_or(|(_, bu)| u > bu) {
                    best = Some((i, u));
                }
            }
            best.map_or(0, |(i, _)| 1 << i)
        }
        ValuationModel::General => {
            let mut best: Option<(u32, f64)> = None;
            // enumerate the nonempty subsets of `remaining`
            let mut b = remaining;
            while b != 0 {
                let u = profile.value(j, b) - bundle_items(b, m).map(|i| prices[i]).sum::<f64>();
                let better = match best {
                    None => true,
                    Some((bb, bu)) => u > bu || (u == bu && lex_less(b, bb, m)),
                };
                if better {
                    best = Some((b, u));
                }
                b = (b - 1) & remaining;
            }
            match best {
                Some((b, u)) if u >= 0.0 => b,
                _ => 0,
            }
        }
    }
}

/// Buyers arrive in `order` (index order when `None`) and each buys a
/// utility-maximizing bundle of the remaining items at the posted prices.
pub fn posted_price_run(profile: &ValuationProfile, prices: &[f64], order: Option<&[usize]>) -> Result<AuctionOutcome> {
    check_prices(profile, prices)?;
    let default: Vec<usize> = (0..profile.n).collect();
    let order = order.unwrap_or(&default);
    let mut seen = vec![false; profile.n];
    if order.len() != profile.n
        || order
            .iter()
            .any(|&j| j >= profile.n || std::mem::replace(&mut seen[j], true))
    {
        return Err(Error::BadParams("ordering must be a permutation of the buyers".into()));
    }
    let m = profile.m;
    let mut remaining: u32 = if m == 0 { 0 } else { u32::MAX >> (32 - m) };
    let mut allocation = vec![None; m];
    let mut payments = vec![0.0; profile.n];
    let mut welfare = 0.0;
    for &j in order {
        let b = choose_bundle(profile, j, prices, remaining);
        if b == 0 {
            continue;
        }
        for i in bundle_items(b, m) {
            allocation[i] = Some(j);
            payments[j] += prices[i];
        }
        welfare += profile.value(j, b);
        remaining &= !b;
    }
    let revenue = (0..m).filter(|&i| allocation[i].is_some()).map(|i| prices[i]).sum();
    Ok(AuctionOutcome {
        allocation,
        payments,
        revenue,
        welfare,
    })
}

/// Highest and second-highest bid on `item`, with the winner's index
/// (lowest index on ties). The second bid is 0 with a single bidder.
fn top_two(profile: &ValuationProfile, item: usize) -> Option<(usize, f64, f64)> {
    let mut top: Option<(usize, f64)> = None;
    let mut second = 0.0f64;
    for j in 0..profile.n {
        let b = profile.values[j][item];
        match top {
            Some((_, t)) if b <= t => second = second.max(b),
            Some((_, t)) => {
                second = second.max(t);
                top = Some((j, b));
            }
            None => top = Some((j, b)),
        }
    }
    top.map(|(j, t)| (j, t, second))
}

/// Independent second-price auction per item with reserves `reserves`.
pub fn second_price_run(profile: &ValuationProfile, reserves: &[f64]) -> Result<AuctionOutcome> {
    if profile.model != ValuationModel::Additive {
        return Err(Error::NonAdditive);
    }
    check_prices(profile, reserves)?;
    let m = profile.m;
    let mut allocation = vec![None; m];
    let mut payments = vec![0.0; profile.n];
    let mut item_pay = vec![0.0; m];
    let mut welfare = 0.0;
    for i in 0..m {
        if let Some((j, top, second)) = top_two(profile, i) {
            if top >= reserves[i] {
                allocation[i] = Some(j);
                item_pay[i] = second.max(reserves[i]);
                payments[j] += item_pay[i];
                welfare += top;
            }
        }
    }
    let revenue = (0..m).filter(|&i| allocation[i].is_some()).map(|i| item_pay[i]).sum();
    Ok(AuctionOutcome {
        allocation,
        payments,
        revenue,
        welfare,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    PostedPrice,
    SecondPrice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Revenue,
    Welfare,
}

/// Which prices move with the curve parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceAxis {
    /// Item `index` gets the parameter; the others keep `base`.
    Item { index: usize, base: Vec<f64> },
    /// Every item gets the parameter.
    Uniform,
}

impl PriceAxis {
    pub fn prices(&self, m: usize, rho: f64) -> Vec<f64> {
        match self {
            PriceAxis::Item { index, base } => {
                let mut p = base.clone();
                p[*index] = rho;
                p
            }
            PriceAxis::Uniform => vec![rho; m],
        }
    }

    fn moves(&self, item: usize) -> bool {
        match self {
            PriceAxis::Item { index, .. } => *index == item,
            PriceAxis::Uniform => true,
        }
    }
}

pub fn simulate(profile: &ValuationProfile, mechanism: Mechanism, prices: &[f64]) -> Result<AuctionOutcome> {
    match mechanism {
        Mechanism::PostedPrice => posted_price_run(profile, prices, None),
        Mechanism::SecondPrice => second_price_run(profile, prices),
    }
}

/// Revenue or welfare of `mechanism` on `profile` as a function of the
/// prices selected by `axis`, over `[0, w_max]`. Welfare pieces are constant;
/// revenue pieces are affine with slope equal to the number of items sold at
/// the moving price. The range bound is `m` times the larger of `w_max` and
/// the largest valuation.
pub fn curve_1d(
    profile: &ValuationProfile,
    mechanism: Mechanism,
    which: Objective,
    axis: &PriceAxis,
    w_max: f64,
) -> Result<UtilityCurve> {
    if profile.model != ValuationModel::Additive {
        return Err(Error::UnsupportedCombination(format!(
            "{mechanism:?} curves need additive buyers, got {:?}",
            profile.model
        )));
    }
    let m = profile.m;
    if let PriceAxis::Item { index, base } = axis {
        if *index >= m {
            return Err(Error::BadParams(format!("item {index} out of range")));
        }
        check_prices(profile, base)?;
    }
    let domain = Domain::new(0.0, w_max)?;
    let moving: Vec<usize> = (0..m).filter(|&i| axis.moves(i)).collect();
    let mut bps: Vec<f64> = Vec::new();
    for &i in &moving {
        match mechanism {
            Mechanism::PostedPrice => bps.extend(profile.values.iter().map(|row| row[i])),
            Mechanism::SecondPrice => {
                if let Some((_, top, second)) = top_two(profile, i) {
                    bps.push(top);
                    bps.push(second);
                }
            }
        }
    }
    bps.retain(|&b| b > 0.0 && b < w_max);
    bps.sort_by(f64::total_cmp);
    bps.dedup();

    let forms = (0..=bps.len())
        .map(|k| {
            let lo = if k == 0 { 0.0 } else { bps[k - 1] };
            let hi = if k == bps.len() { w_max } else { bps[k] };
            let mid = 0.5 * (lo + hi);
            let prices = axis.prices(m, mid);
            let out = simulate(profile, mechanism, &prices)?;
            Ok(match which {
                Objective::Welfare => PieceForm::Constant(out.welfare),
                Objective::Revenue => {
                    let mut slope = 0usize;
                    let mut intercept = 0.0;
                    for i in (0..m).filter(|&i| out.allocation[i].is_some()) {
                        let second = top_two(profile, i).map_or(0.0, |(_, _, s)| s);
                        let (pay, at_moving_price) = match mechanism {
                            Mechanism::PostedPrice => (prices[i], axis.moves(i)),
                            Mechanism::SecondPrice => (second.max(prices[i]), axis.moves(i) && second < mid),
                        };
                        if at_moving_price {
                            slope += 1;
                        } else {
                            intercept += pay;
                        }
                    }
                    if slope == 0 {
                        PieceForm::Constant(intercept)
                    } else {
                        PieceForm::Affine {
                            slope: slope as f64,
                            intercept,
                        }
                    }
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let top = profile.values.iter().flatten().fold(w_max, |a, &b| a.max(b));
    let h = (m as f64 * top).max(f64::MIN_POSITIVE);
    UtilityCurve::new(PiecewiseFn1D::from_parts(domain, bps, forms), h, "pricing")
}

/// Per-item sorted lists of every buyer's value for that item, across all
/// instances: the axis-aligned boundaries of posted-price utilities.
pub fn additive_breakpoints(instances: &[ValuationProfile]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = instances.first() else {
        return Ok(Vec::new());
    };
    let m = first.m;
    let mut axes = vec![Vec::new(); m];
    for p in instances {
        if p.model != ValuationModel::Additive {
            return Err(Error::NonAdditive);
        }
        if p.m != m {
            return Err(Error::LengthMismatch { left: m, right: p.m });
        }
        for row in &p.values {
            for (i, &v) in row.iter().enumerate() {
                axes[i].push(v);
            }
        }
    }
    for a in &mut axes {
        a.sort_by(f64::total_cmp);
    }
    Ok(axes)
}

fn window_draw<R: Rng + ?Sized>(w: f64, width: f64, rng: &mut R) -> f64 {
    let anchor = rng.random::<f64>() * (w - width);
    anchor + width * rng.random::<f64>()
}

/// Smoothed valuations with densities bounded by `kappa`.
///
/// Additive and unit-demand buyers draw each item value uniformly from its
/// own window of width `1/kappa` inside `[0, w]`. General buyers start from
/// such item values, give every nonempty bundle the sum of its items plus an
/// independent uniform jitter on `[0, 1/kappa]`, then take the running
/// maximum over sub-bundles so the result is monotone.
pub fn gen_valuations<R: Rng + ?Sized>(
    model: ValuationModel,
    n: usize,
    m: usize,
    kappa: f64,
    w: f64,
    rng: &mut R,
) -> Result<ValuationProfile> {
    if !(kappa > 0.0 && w > 0.0 && kappa * w >= 1.0) {
        return Err(Error::BadParams("need kappa * W >= 1".into()));
    }
    if model == ValuationModel::General && m > MAX_GENERAL_ITEMS {
        return Err(Error::TooLarge {
            n: m,
            max: MAX_GENERAL_ITEMS,
        });
    }
    let width = 1.0 / kappa;
    let values = (0..n)
        .map(|_| {
            let items: Vec<f64> = (0..m).map(|_| window_draw(w, width, rng)).collect();
            match model {
                ValuationModel::General => {
                    let size = 1usize << m;
                    let mut v = vec![0.0; size];
                    for b in 1..size {
                        let raw =
                            bundle_items(b as u32, m).map(|i| items[i]).sum::<f64>() + width * rng.random::<f64>();
                        let sub = bundle_items(b as u32, m).map(|i| v[b ^ (1 << i)]).fold(0.0, f64::max);
                        v[b] = raw.max(sub);
                    }
                    v
                }
                _ => items,
            }
        })
        .collect();
    ValuationProfile::new(model, m, w, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn additive(values: Vec<Vec<f64>>) -> ValuationProfile {
        let m = values.first().map_or(1, Vec::len);
        ValuationProfile::new(ValuationModel::Additive, m, 1.0, values).unwrap()
    }

    #[test]
    fn posted_price_examples() {
        let p = additive(vec![vec![0.6, 0.4], vec![0.7, 0.9]]);
        let out = posted_price_run(&p, &[0.5, 0.5], None).unwrap();
        assert_eq!(out.allocation, vec![Some(0), Some(1)]);
        assert_eq!(out.revenue, 1.0);
        assert!((out.welfare - 1.5).abs() < 1e-15);

        let none = posted_price_run(&p, &[1.1, 1.1], None).unwrap();
        assert_eq!((none.revenue, none.welfare), (0.0, 0.0));
        assert_eq!(
            posted_price_run(&p, &[0.5], None),
            Err(Error::PriceCountMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn general_buyer_picks_best_bundle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = gen_valuations(ValuationModel::General, 1, 2, 2.0, 1.0, &mut rng).unwrap();
            let prices = [rng.random::<f64>(), rng.random::<f64>()];
            let out = posted_price_run(&p, &prices, None).unwrap();
            let bought: u32 = (0..2)
                .filter(|&i| out.allocation[i].is_some())
                .fold(0, |a, i| a | (1 << i));
            let util = |b: u32| {
                p.values[0][b as usize] - (0..2).filter(|&i| b & (1 << i) != 0).map(|i| prices[i]).sum::<f64>()
            };
            let best = (0..4u32).map(util).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(util(bought), best);
        }
    }

    #[test]
    fn second_price_examples() {
        let p = additive(vec![vec![0.5], vec![0.8]]);
        let out = second_price_run(&p, &[0.6]).unwrap();
        assert_eq!(out.allocation, vec![Some(1)]);
        assert_eq!((out.revenue, out.welfare), (0.6, 0.8));
        assert_eq!(second_price_run(&p, &[0.9]).unwrap().revenue, 0.0);
        assert_eq!(second_price_run(&p, &[0.0]).unwrap().revenue, 0.5);
        let single = additive(vec![vec![0.4]]);
        assert_eq!(second_price_run(&single, &[0.1]).unwrap().revenue, 0.1);
        let ud = ValuationProfile::new(ValuationModel::UnitDemand, 1, 1.0, vec![vec![0.5]]).unwrap();
        assert_eq!(second_price_run(&ud, &[0.1]), Err(Error::NonAdditive));
    }

    #[test]
    fn single_buyer_curves() {
        let v = 0.37;
        let p = additive(vec![vec![v]]);
        let axis = PriceAxis::Item {
            index: 0,
            base: vec![0.0],
        };
        let wel = curve_1d(&p, Mechanism::PostedPrice, Objective::Welfare, &axis, 1.0).unwrap();
        let rev = curve_1d(&p, Mechanism::PostedPrice, Objective::Revenue, &axis, 1.0).unwrap();
        for k in 0..1000 {
            let r = k as f64 / 999.0;
            assert_eq!(wel.eval(r).unwrap(), if r < v { v } else { 0.0 });
            assert_eq!(rev.eval(r).unwrap(), if r < v { r } else { 0.0 });
        }
        assert!(wel
            .func
            .pieces()
            .iter()
            .all(|pc| matches!(pc.form, PieceForm::Constant(_))));

        let empty = ValuationProfile::new(ValuationModel::Additive, 1, 1.0, vec![]).unwrap();
        let c = curve_1d(
            &empty,
            Mechanism::PostedPrice,
            Objective::Revenue,
            &PriceAxis::Uniform,
            1.0,
        )
        .unwrap();
        assert_eq!(c.func.pieces().len(), 1);
        assert_eq!(c.eval(0.5).unwrap(), 0.0);

        let ud = ValuationProfile::new(ValuationModel::UnitDemand, 1, 1.0, vec![vec![0.5]]).unwrap();
        assert!(matches!(
            curve_1d(
                &ud,
                Mechanism::PostedPrice,
                Objective::Revenue,
                &PriceAxis::Uniform,
                1.0
            ),
            Err(Error::UnsupportedCombination(_))
        ));
    }

    #[test]
    fn curves_match_simulation_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let p = gen_valuations(ValuationModel::Additive, 4, 3, 2.0, 1.0, &mut rng).unwrap();
            let base: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            for mech in [Mechanism::PostedPrice, Mechanism::SecondPrice] {
                for axis in [
                    PriceAxis::Uniform,
                    PriceAxis::Item {
                        index: 1,
                        base: base.clone(),
                    },
                ] {
                    let wel = curve_1d(&p, mech, Objective::Welfare, &axis, 1.0).unwrap();
                    let rev = curve_1d(&p, mech, Objective::Revenue, &axis, 1.0).unwrap();
                    for (k, pc) in rev.func.pieces().iter().enumerate() {
                        if let PieceForm::Affine { slope, .. } = pc.form {
                            assert!((1.0..=3.0).contains(&slope) && slope.fract() == 0.0, "piece {k}");
                        }
                    }
                    for k in 0..1000 {
                        let r = k as f64 / 999.0;
                        let out = simulate(&p, mech, &axis.prices(3, r)).unwrap();
                        assert_eq!(wel.eval(r).unwrap(), out.welfare);
                        assert!((rev.eval(r).unwrap() - out.revenue).abs() <= 1e-12);
                        assert!(out.revenue <= out.welfare + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn breakpoint_axes() {
        let p = additive(vec![vec![0.3, 0.7]]);
        assert_eq!(additive_breakpoints(&[p]).unwrap(), vec![vec![0.3], vec![0.7]]);
        assert!(additive_breakpoints(&[]).unwrap().is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ps: Vec<_> = (0..5)
            .map(|_| gen_valuations(ValuationModel::Additive, 4, 2, 1.0, 1.0, &mut rng).unwrap())
            .collect();
        assert!(additive_breakpoints(&ps).unwrap().iter().all(|a| a.len() == 20));
    }

    #[test]
    fn generator_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = gen_valuations(ValuationModel::General, 2, 3, 2.0, 1.0, &mut rng).unwrap();
        assert!(g.values.iter().all(|r| r.len() == 8 && r[0] == 0.0));
        let draws = 100_000;
        let kappa = 4.0;
        let mut hist = [0usize; 100];
        for _ in 0..draws / 10 {
            let p = gen_valuations(ValuationModel::Additive, 10, 1, kappa, 1.0, &mut rng).unwrap();
            for row in &p.values {
                hist[((row[0] * 100.0) as usize).min(99)] += 1;
            }
        }
        let sup = hist
            .iter()
            .map(|&c| c as f64 / draws as f64 * 100.0)
            .fold(0.0, f64::max);
        // pooled over buyers the mixture density is at most kappa
        assert!(sup <= kappa * 1.1, "{sup}");
        assert!(gen_valuations(ValuationModel::Additive, 1, 1, 0.5, 1.0, &mut rng).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn second_price_payment_ignores_winning_bid(seed in 0u64..1_000_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = gen_valuations(ValuationModel::Additive, 3, 2, 1.0, 1.0, &mut rng).unwrap();
            let reserves = [rng.random::<f64>() * 0.5, rng.random::<f64>() * 0.5];
            let out = second_price_run(&p, &reserves).unwrap();
            for i in 0..2 {
                if let Some(j) = out.allocation[i] {
                    let mut raised = p.clone();
                    raised.values[j][i] += rng.random::<f64>();
                    let again = second_price_run(&raised, &reserves).unwrap();
                    prop_assert_eq!(again.allocation[i], Some(j));
                    prop_assert_eq!(out.payments[j], again.payments[j]);
                }
            }
        }

        #[test]
        fn revenue_at_most_welfare(seed in 0u64..1_000_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for model in [ValuationModel::Additive, ValuationModel::UnitDemand, ValuationModel::General] {
                let p = gen_valuations(model, 3, 3, 1.0, 1.0, &mut rng).unwrap();
                let prices: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
                let out = posted_price_run(&p, &prices, None).unwrap();
                prop_assert!(out.revenue <= out.welfare + 1e-12);
                if model == ValuationModel::Additive {
                    let sp = second_price_run(&p, &prices).unwrap();
                    prop_assert!(sp.revenue <= sp.welfare + 1e-12);
                }
            }
        }
    }
}
