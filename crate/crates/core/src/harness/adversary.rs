//! Streams of utility curves for experiments.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::{gen_knapsack, gen_mwis, knapsack_curve, mwis_curve, DegreeMode, SmoothedConfig};
use crate::iqp::{gaussian_vector, owr_curve, sdp_embed, IqpInstance};
use crate::market::{curve_1d, gen_valuations, Mechanism, Objective, PriceAxis, ValuationModel};
use crate::piecewise::{Domain, PiecewiseFn1D, UtilityCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Knapsack,
    Mwis,
    Owr,
    #[serde(rename = "pricing_1d")]
    Pricing1d,
    #[serde(rename = "second_price_1d")]
    SecondPrice1d,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Knapsack,
        Family::Mwis,
        Family::Owr,
        Family::Pricing1d,
        Family::SecondPrice1d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Knapsack => "knapsack",
            Family::Mwis => "mwis",
            Family::Owr => "owr",
            Family::Pricing1d => "pricing_1d",
            Family::SecondPrice1d => "second_price_1d",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Instance-generation knobs shared by all families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyParams {
    /// Items (knapsack), vertices (MWIS, max-cut) or buyers (pricing).
    pub n: usize,
    pub kappa: f64,
    /// Upper end of the parameter domain for the greedy families.
    pub b: f64,
    pub max_size: f64,
    pub capacity_fraction: f64,
    pub edge_prob: f64,
    pub degree_mode: DegreeMode,
    /// Largest valuation for the pricing families.
    pub max_value: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        let s = SmoothedConfig::default();
        FamilyParams {
            n: 10,
            kappa: 2.0,
            b: 10.0,
            max_size: s.max_size,
            capacity_fraction: s.capacity_fraction,
            edge_prob: s.edge_prob,
            degree_mode: DegreeMode::Residual,
            max_value: 1.0,
        }
    }
}

impl FamilyParams {
    fn smoothed(&self) -> SmoothedConfig {
        SmoothedConfig {
            max_size: self.max_size,
            capacity_fraction: self.capacity_fraction,
            edge_prob: self.edge_prob,
            anchors: None,
        }
    }
}

/// A stream of curves together with what is known about it a priori.
#[derive(Debug, Clone)]
pub struct Stream {
    pub family: Family,
    pub curves: Vec<UtilityCurve>,
    pub domain: Domain,
    /// Uniform range bound of every curve.
    pub h_bound: f64,
    /// Lipschitz constant of every piece.
    pub lipschitz: f64,
    /// Density bound of each breakpoint bucket.
    pub kappa_prime: f64,
    /// Number of breakpoint buckets with independent draws inside each.
    pub buckets: usize,
}

impl Stream {
    pub fn breakpoints(&self) -> Vec<f64> {
        self.curves
            .iter()
            .flat_map(|c| c.func.breakpoints().iter().copied())
            .collect()
    }
}

/// Domain and range bound of a family's curves under `p`.
pub fn family_shape(family: Family, p: &FamilyParams) -> Result<(Domain, f64)> {
    Ok(match family {
        Family::Knapsack | Family::Mwis => (Domain::new(0.0, p.b)?, p.n.max(1) as f64),
        // the max-cut scale depends on the sampled graph; callers read it off the stream
        Family::Owr => (Domain::new(0.0, FRAC_PI_2)?, f64::NAN),
        Family::Pricing1d | Family::SecondPrice1d => (Domain::new(0.0, p.max_value)?, p.max_value),
    })
}

/// `t` curves from a smoothed adversary. Outward rotation fixes one random
/// max-cut instance and its embedding, and draws fresh Gaussians each round.
pub fn adversary_smoothed<R: Rng + ?Sized>(family: Family, t: usize, p: &FamilyParams, rng: &mut R) -> Result<Stream> {
    let (domain, h) = family_shape(family, p)?;
    let n = p.n;
    let cfg = p.smoothed();
    let mut curves = Vec::with_capacity(t);
    let (h_bound, lipschitz, kappa_prime, buckets) = match family {
        Family::Knapsack => {
            for _ in 0..t {
                curves.push(knapsack_curve(&gen_knapsack(n, p.kappa, &cfg, rng)?, p.b)?);
            }
            // log-value differences have density at most kappa; dividing by a
            // log-size difference of magnitude at most ln W scales it by ln W
            (h, 0.0, p.kappa * p.max_size.ln().max(1.0), n * n.saturating_sub(1) / 2)
        }
        Family::Mwis => {
            for _ in 0..t {
                curves.push(mwis_curve(&gen_mwis(n, p.kappa, &cfg, rng)?, p.b, p.degree_mode)?);
            }
            let nf = n.max(2) as f64;
            (h, 0.0, p.kappa * nf.ln().max(1.0), n * n * n * n / 2)
        }
        Family::Owr => {
            let inst = IqpInstance::random_max_cut(n.max(2), p.edge_prob, rng)?;
            let emb = sdp_embed(&inst, inst.n(), 500, 1e-9, rng)?;
            for _ in 0..t {
                let z = gaussian_vector(2 * inst.n(), rng);
                curves.push(owr_curve(&inst, &emb, &z)?);
            }
            // each coordinate's angle is uniform on (-pi/2, pi/2)
            (2.0 * inst.abs_sum(), 0.0, 1.0 / std::f64::consts::PI, inst.n())
        }
        Family::Pricing1d => {
            let axis = PriceAxis::Item {
                index: 0,
                base: vec![0.0],
            };
            for _ in 0..t {
                let prof = gen_valuations(ValuationModel::Additive, n, 1, p.kappa, p.max_value, rng)?;
                curves.push(curve_1d(
                    &prof,
                    Mechanism::PostedPrice,
                    Objective::Revenue,
                    &axis,
                    p.max_value,
                )?);
            }
            (h, 1.0, p.kappa, n)
        }
        Family::SecondPrice1d => {
            let axis = PriceAxis::Item {
                index: 0,
                base: vec![0.0],
            };
            for _ in 0..t {
                let prof = gen_valuations(ValuationModel::Additive, n, 1, p.kappa, p.max_value, rng)?;
                curves.push(curve_1d(
                    &prof,
                    Mechanism::SecondPrice,
                    Objective::Revenue,
                    &axis,
                    p.max_value,
                )?);
            }
            // the top two of n bids each have density at most n kappa
            (h, 1.0, n as f64 * p.kappa, 2)
        }
    };
    for c in &mut curves {
        c.h_bound = h_bound;
    }
    Ok(Stream {
        family,
        curves,
        domain,
        h_bound,
        lipschitz,
        kappa_prime,
        buckets: buckets.max(1),
    })
}

pub const WEED_MIN_ROUNDS: usize = 16;

/// Which of the two biased adversaries to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeedSide {
    /// Favors the curve that is high above 1/2.
    Upper,
    /// Favors the curve that is low above 1/2.
    Lower,
}

/// The two threshold curves on `[0, 1]`: both are 1/2 below 1/2; above it
/// the first is 0 and the second is 1.
pub fn weed_pair() -> (UtilityCurve, UtilityCurve) {
    let d = Domain::new(0.0, 1.0).expect("unit domain");
    let mk = |above| {
        UtilityCurve::new(
            PiecewiseFn1D::threshold(d, 0.5, 0.5, above).expect("threshold"),
            1.0,
            "weed",
        )
        .expect("range")
    };
    (mk(0.0), mk(1.0))
}

/// `t` i.i.d. draws from the lower-bound adversary pair. The upper side picks
/// the high curve with probability `1/2 + 1/(8 sqrt T)`, the lower side with
/// `1/2 - 1/(8 sqrt T)`.
pub fn adversary_weed<R: Rng + ?Sized>(t: usize, side: WeedSide, rng: &mut R) -> Result<Stream> {
    if t < WEED_MIN_ROUNDS {
        return Err(Error::TooShort(t));
    }
    let bias = 1.0 / (8.0 * (t as f64).sqrt());
    let p_high = match side {
        WeedSide::Upper => 0.5 + bias,
        WeedSide::Lower => 0.5 - bias,
    };
    let (low, high) = weed_pair();
    let curves = (0..t)
        .map(|_| {
            if rng.random::<f64>() < p_high {
                high.clone()
            } else {
                low.clone()
            }
        })
        .collect();
    Ok(Stream {
        family: Family::Pricing1d,
        curves,
        domain: low.domain(),
        h_bound: 1.0,
        lipschitz: 0.0,
        kappa_prime: f64::INFINITY,
        buckets: 1,
    })
}
