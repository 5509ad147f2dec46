//! One-dimensional piecewise constant / affine functions.
//!
//! A [`PiecewiseFn1D`] tiles a closed interval `[lo, hi]` with half-open
//! pieces `[b_i, b_{i+1})`; the last piece is closed. Evaluation is
//! right-continuous: at a breakpoint the piece starting there is used.
//!
//! Besides pointwise algebra the type supports exact integration of
//! `exp(lambda * f)` and exact two-stage sampling from the density
//! proportional to it (piece selection by mass, then closed-form inverse CDF
//! inside the piece). Both subtract the maximum exponent before
//! exponentiating, so `lambda * f` may be arbitrarily large.

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::EmptyDomain { lo, hi });
        }
        Ok(Domain { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        Domain::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Closed form of a function on one piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceForm {
    Constant(f64),
    Affine { slope: f64, intercept: f64 },
}

impl PieceForm {
    #[inline]
    pub fn value(&self, rho: f64) -> f64 {
        match *self {
            PieceForm::Constant(c) => c,
            PieceForm::Affine { slope, intercept } => slope * rho + intercept,
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            PieceForm::Constant(c) => c.is_finite(),
            PieceForm::Affine { slope, intercept } => slope.is_finite() && intercept.is_finite(),
        }
    }

    fn add(self, other: PieceForm) -> PieceForm {
        match (self, other) {
            (PieceForm::Constant(a), PieceForm::Constant(b)) => PieceForm::Constant(a + b),
            (a, b) => {
                let (sa, ia) = a.coefficients();
                let (sb, ib) = b.coefficients();
                PieceForm::Affine {
                    slope: sa + sb,
                    intercept: ia + ib,
                }
            }
        }
    }

    fn scale(self, c: f64) -> PieceForm {
        match self {
            PieceForm::Constant(v) => PieceForm::Constant(c * v),
            PieceForm::Affine { slope, intercept } => PieceForm::Affine {
                slope: c * slope,
                intercept: c * intercept,
            },
        }
    }

    /// `(slope, intercept)`.
    pub fn coefficients(&self) -> (f64, f64) {
        match *self {
            PieceForm::Constant(c) => (0.0, c),
            PieceForm::Affine { slope, intercept } => (slope, intercept),
        }
    }
}

/// One piece `[lo, hi)` of a piecewise function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub form: PieceForm,
}

impl Piece {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Piecewise constant/affine function on a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn1D {
    domain: Domain,
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewiseFn1D {
    /// Validates and builds a function from its breakpoints and per-piece forms.
    pub fn new(domain: Domain, breakpoints: Vec<f64>, forms: Vec<PieceForm>) -> Result<Self> {
        if forms.len() != breakpoints.len() + 1 {
            return Err(Error::PieceCountMismatch {
                expected: breakpoints.len() + 1,
                got: forms.len(),
            });
        }
        for (i, &b) in breakpoints.iter().enumerate() {
            if !(b > domain.lo && b < domain.hi) {
                return Err(Error::BreakpointOutsideDomain { value: b });
            }
            if i > 0 && breakpoints[i - 1] >= b {
                return Err(Error::UnsortedBreakpoints { index: i });
            }
        }
        if forms.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFinitePiece);
        }
        Ok(Self::from_parts(domain, breakpoints, forms))
    }

    // Callers guarantee the invariants checked by `new`.
    pub(crate) fn from_parts(domain: Domain, breakpoints: Vec<f64>, forms: Vec<PieceForm>) -> Self {
        debug_assert_eq!(forms.len(), breakpoints.len() + 1);
        let pieces = forms
            .into_iter()
            .enumerate()
            .map(|(i, form)| Piece {
                lo: if i == 0 { domain.lo } else { breakpoints[i - 1] },
                hi: if i == breakpoints.len() {
                    domain.hi
                } else {
                    breakpoints[i]
                },
                form,
            })
            .collect();
        PiecewiseFn1D {
            domain,
            breakpoints,
            pieces,
        }
    }

    pub fn constant(domain: Domain, c: f64) -> Self {
        Self::from_parts(domain, Vec::new(), vec![PieceForm::Constant(c)])
    }

    pub fn zero(domain: Domain) -> Self {
        Self::constant(domain, 0.0)
    }

    /// Step function: `below` on `[lo, at)`, `above` on `[at, hi]`.
    pub fn threshold(domain: Domain, at: f64, below: f64, above: f64) -> Result<Self> {
        Self::new(
            domain,
            vec![at],
            vec![PieceForm::Constant(below), PieceForm::Constant(above)],
        )
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Index of the piece containing `rho` (right-continuous).
    pub fn piece_index(&self, rho: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= rho)
    }

    pub fn eval(&self, rho: f64) -> Result<f64> {
        if !self.domain.contains(rho) {
            return Err(Error::OutOfDomain {
                rho,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        Ok(self.eval_unchecked(rho))
    }

    #[inline]
    pub fn eval_unchecked(&self, rho: f64) -> f64 {
        self.pieces[self.piece_index(rho)].form.value(rho)
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p.form, PieceForm::Constant(_)))
    }

    /// Pointwise `c * f`.
    pub fn scaled(&self, c: f64) -> Self {
        let forms = self.pieces.iter().map(|p| p.form.scale(c)).collect();
        Self::from_parts(self.domain, self.breakpoints.clone(), forms)
    }

    /// Smallest and largest value attained (or approached) on the domain.
    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.pieces {
            for v in [p.form.value(p.lo), p.form.value(p.hi)] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Leftmost maximizer and the maximum.
    ///
    /// Constant pieces are represented by their midpoint. An increasing affine
    /// piece that is not the last one is half-open, so its supremum is
    /// approached at the largest float below its right end; that point and
    /// its value are reported.
    pub fn argmax(&self) -> (f64, f64) {
        let last = self.pieces.len() - 1;
        let mut best = (f64::NAN, f64::NEG_INFINITY);
        for (i, p) in self.pieces.iter().enumerate() {
            let rho = match p.form {
                PieceForm::Constant(_) => p.midpoint(),
                PieceForm::Affine { slope, .. } if slope > 0.0 => {
                    if i == last {
                        p.hi
                    } else {
                        p.hi.next_down().max(p.lo)
                    }
                }
                PieceForm::Affine { slope, .. } if slope < 0.0 => p.lo,
                PieceForm::Affine { .. } => p.midpoint(),
            };
            let v = p.form.value(rho);
            if v > best.1 {
                best = (rho, v);
            }
        }
        best
    }

    /// Natural log of `∫_a^b exp(lambda * f)`.
    pub fn log_exp_integral(&self, lambda: f64, a: f64, b: f64) -> Result<f64> {
        if !(self.domain.contains(a) && self.domain.contains(b) && a <= b) {
            return Err(Error::IntervalOutOfDomain { a, b });
        }
        if a == b {
            return Ok(f64::NEG_INFINITY);
        }
        let logs = self.clipped_log_masses(lambda, a, b)?;
        Ok(log_sum_exp(logs.iter().map(|&(_, l)| l)))
    }

    /// `∫_a^b exp(lambda * f)`. Overflows to infinity only when the true value does.
    pub fn exp_integral(&self, lambda: f64, a: f64, b: f64) -> Result<f64> {
        Ok(self.log_exp_integral(lambda, a, b)?.exp())
    }

    /// Per-piece log masses `ln Z_i` over the whole domain.
    pub fn log_piece_masses(&self, lambda: f64) -> Result<Vec<f64>> {
        Ok(self
            .clipped_log_masses(lambda, self.domain.lo, self.domain.hi)?
            .into_iter()
            .map(|(_, l)| l)
            .collect())
    }

    fn clipped_log_masses(&self, lambda: f64, a: f64, b: f64) -> Result<Vec<(usize, f64)>> {
        let first = self.piece_index(a);
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate().skip(first) {
            if p.lo >= b {
                break;
            }
            let lo = p.lo.max(a);
            let hi = p.hi.min(b);
            if hi <= lo {
                continue;
            }
            let l = log_piece_mass(&p.form, lambda, lo, hi);
            if l.is_nan() || l == f64::INFINITY {
                return Err(Error::NonFiniteMass);
            }
            out.push((i, l));
        }
        Ok(out)
    }

    /// Exact draw from the density proportional to `exp(lambda * f)`.
    pub fn sample_exp<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> Result<f64> {
        let logs = self.log_piece_masses(lambda)?;
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::NonFiniteMass);
        }
        let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                chosen = i;
                break;
            }
        }
        let piece = &self.pieces[chosen];
        Ok(sample_within(piece, lambda, rng.random::<f64>()))
    }

    /// Sum of functions sharing a domain. An empty list sums to zero on `domain`.
    pub fn sum(domain: Domain, fns: &[&PiecewiseFn1D]) -> Result<Self> {
        if fns.iter().any(|f| f.domain != domain) {
            return Err(Error::DomainMismatch);
        }
        if fns.is_empty() {
            return Ok(Self::zero(domain));
        }
        // pairwise reduction keeps the cost near total pieces times log(count)
        if fns.len() > 4 {
            let (left, right) = fns.split_at(fns.len() / 2);
            let (l, r) = (Self::sum(domain, left)?, Self::sum(domain, right)?);
            return Ok(Self::merge(domain, &[&l, &r]));
        }
        Ok(Self::merge(domain, fns))
    }

    fn merge(domain: Domain, fns: &[&PiecewiseFn1D]) -> Self {
        let mut bps: Vec<f64> = fns.iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();

        let mut cursors = vec![0usize; fns.len()];
        let mut forms = Vec::with_capacity(bps.len() + 1);
        for j in 0..=bps.len() {
            let start = if j == 0 { domain.lo } else { bps[j - 1] };
            let mut acc: Option<PieceForm> = None;
            for (f, cur) in fns.iter().zip(cursors.iter_mut()) {
                while *cur < f.breakpoints.len() && f.breakpoints[*cur] <= start {
                    *cur += 1;
                }
                let form = f.pieces[*cur].form;
                acc = Some(match acc {
                    None => form,
                    Some(a) => a.add(form),
                });
            }
            forms.push(acc.expect("non-empty"));
        }
        Self::from_parts(domain, bps, forms)
    }

    /// `self + other`.
    pub fn add(&self, other: &PiecewiseFn1D) -> Result<Self> {
        Self::sum(self.domain, &[self, other])
    }
}

/// `ln ∫_lo^hi exp(lambda * form)`.
fn log_piece_mass(form: &PieceForm, lambda: f64, lo: f64, hi: f64) -> f64 {
    let len = hi - lo;
    match *form {
        PieceForm::Constant(c) => lambda * c + len.ln(),
        PieceForm::Affine { slope, intercept } => {
            let g_lo = lambda * (slope * lo + intercept);
            let g_hi = lambda * (slope * hi + intercept);
            let delta = lambda * slope * len;
            if delta == 0.0 {
                0.5 * (g_lo + g_hi) + len.ln()
            } else if delta > 0.0 {
                // len * e^{g_hi} * (1 - e^{-delta}) / delta
                g_hi + len.ln() + (-(-delta).exp_m1() / delta).ln()
            } else {
                g_lo + len.ln() + ((delta).exp_m1() / delta).ln()
            }
        }
    }
}

/// Inverse CDF of the density proportional to `exp(lambda * form)` on a piece.
fn sample_within(piece: &Piece, lambda: f64, u: f64) -> f64 {
    let len = piece.len();
    let offset = match piece.form {
        PieceForm::Constant(_) => u * len,
        PieceForm::Affine { slope, .. } => {
            let rate = lambda * slope;
            let delta = rate * len;
            if delta == 0.0 {
                u * len
            } else if delta <= 1.0 {
                (u * delta.exp_m1()).ln_1p() / rate
            } else {
                (delta + (u + (1.0 - u) * (-delta).exp()).ln()) / rate
            }
        }
    };
    let x = piece.lo + offset;
    if x >= piece.hi {
        piece.hi.next_down().max(piece.lo)
    } else {
        x.max(piece.lo)
    }
}

pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let v: Vec<f64> = it.into_iter().collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// A utility function of one parameter together with its range bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityCurve {
    #[serde(rename = "fn")]
    pub func: PiecewiseFn1D,
    pub h_bound: f64,
    pub instance_tag: String,
}

impl UtilityCurve {
    /// Checks that every value lies in `[0, h_bound]`.
    pub fn new(func: PiecewiseFn1D, h_bound: f64, instance_tag: impl Into<String>) -> Result<Self> {
        let (lo, hi) = func.value_range();
        let slack = 1e-12 * h_bound.max(1.0);
        if lo < -slack {
            return Err(Error::RangeViolation {
                value: lo,
                bound: h_bound,
            });
        }
        if hi > h_bound + slack {
            return Err(Error::RangeViolation {
                value: hi,
                bound: h_bound,
            });
        }
        Ok(UtilityCurve {
            func,
            h_bound,
            instance_tag: instance_tag.into(),
        })
    }

    pub fn domain(&self) -> Domain {
        self.func.domain()
    }

    pub fn eval(&self, rho: f64) -> Result<f64> {
        self.func.eval(rho)
    }
}

// JSON record: {domain, breakpoints, pieces: [{lo, hi, form, params}]}.

#[derive(Serialize, Deserialize)]
struct PieceRecord {
    lo: f64,
    hi: f64,
    form: String,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PiecewiseRecord {
    domain: Domain,
    breakpoints: Vec<f64>,
    pieces: Vec<PieceRecord>,
}

impl Serialize for PiecewiseFn1D {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let record = PiecewiseRecord {
            domain: self.domain,
            breakpoints: self.breakpoints.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    let (form, params) = match p.form {
                        PieceForm::Constant(c) => ("constant", vec![c]),
                        PieceForm::Affine { slope, intercept } => ("affine", vec![slope, intercept]),
                    };
                    PieceRecord {
                        lo: p.lo,
                        hi: p.hi,
                        form: form.to_string(),
                        params,
                    }
                })
                .collect(),
        };
        record.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiecewiseFn1D {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let record = PiecewiseRecord::deserialize(d)?;
        let forms = record
            .pieces
            .iter()
            .map(|p| match (p.form.as_str(), p.params.as_slice()) {
                ("constant", [c]) => Ok(PieceForm::Constant(*c)),
                ("affine", [a, b]) => Ok(PieceForm::Affine {
                    slope: *a,
                    intercept: *b,
                }),
                (f, params) => Err(D::Error::custom(format!(
                    "bad piece form `{f}` with {} params",
                    params.len()
                ))),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let f = PiecewiseFn1D::new(record.domain, record.breakpoints, forms).map_err(D::Error::custom)?;
        for (p, r) in f.pieces.iter().zip(&record.pieces) {
            if p.lo != r.lo || p.hi != r.hi {
                return Err(D::Error::custom("piece bounds disagree with breakpoints"));
            }
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> Domain {
        Domain::new(0.0, 1.0).unwrap()
    }

    fn random_fn(rng: &mut ChaCha8Rng, domain: Domain, max_bps: usize, affine: bool) -> PiecewiseFn1D {
        let k = rng.random_range(0..=max_bps);
        let mut bps: Vec<f64> = (0..k)
            .map(|_| domain.lo + domain.len() * rng.random_range(0.001..0.999))
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let forms = (0..=bps.len())
            .map(|_| {
                if affine && rng.random_bool(0.5) {
                    PieceForm::Affine {
                        slope: rng.random_range(-2.0..2.0),
                        intercept: rng.random_range(0.0..3.0),
                    }
                } else {
                    PieceForm::Constant(rng.random_range(0.0..2.0))
                }
            })
            .collect();
        PiecewiseFn1D::new(domain, bps, forms).unwrap()
    }

    // Independent oracle: adaptive Simpson on a smooth integrand.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn s(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let l = s(f, a, m);
            let r = s(f, m, b);
            if depth == 0 || (l + r - whole).abs() <= 15.0 * tol * (l + r).abs() {
                l + r + (l + r - whole) / 15.0
            } else {
                rec(f, a, m, l, tol, depth - 1) + rec(f, m, b, r, tol, depth - 1)
            }
        }
        rec(f, a, b, s(f, a, b), tol, depth)
    }

    // Quadrature of exp(lambda f) split at breakpoints; pieces are evaluated by
    // their own formula so the integrand is smooth on each sub-interval.
    fn quadrature(f: &PiecewiseFn1D, lambda: f64) -> f64 {
        let d = f.domain();
        let mut cuts = vec![d.lo];
        cuts.extend_from_slice(f.breakpoints());
        cuts.push(d.hi);
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let form = f.pieces()[f.piece_index(mid)].form;
                simpson(&|x| (lambda * form.value(x)).exp(), w[0], w[1], 1e-11, 30)
            })
            .sum()
    }

    #[test]
    fn make_piecewise_examples() {
        let c = PiecewiseFn1D::new(unit(), vec![], vec![PieceForm::Constant(1.0)]).unwrap();
        assert_eq!(c.eval(0.3).unwrap(), 1.0);
        let t = PiecewiseFn1D::threshold(unit(), 0.5, 0.0, 1.0).unwrap();
        assert_eq!(t.eval(0.49).unwrap(), 0.0);
        assert_eq!(t.eval(0.5).unwrap(), 1.0);
        let err = PiecewiseFn1D::new(unit(), vec![0.5, 0.3], vec![PieceForm::Constant(0.0); 3]);
        assert!(matches!(err, Err(Error::UnsortedBreakpoints { .. })));
        assert!(matches!(
            PiecewiseFn1D::new(unit(), vec![0.5], vec![PieceForm::Constant(0.0)]),
            Err(Error::PieceCountMismatch { .. })
        ));
        assert!(matches!(Domain::new(1.0, 1.0), Err(Error::EmptyDomain { .. })));
        assert!(matches!(
            PiecewiseFn1D::new(unit(), vec![1.0], vec![PieceForm::Constant(0.0); 2]),
            Err(Error::BreakpointOutsideDomain { .. })
        ));
    }

    #[test]
    fn sum_examples() {
        let a = PiecewiseFn1D::constant(unit(), 1.0);
        let b = PiecewiseFn1D::constant(unit(), 2.0);
        let s = PiecewiseFn1D::sum(unit(), &[&a, &b]).unwrap();
        assert_eq!(s.breakpoints().len(), 0);
        assert_eq!(s.eval(0.7).unwrap(), 3.0);

        let empty = PiecewiseFn1D::sum(unit(), &[]).unwrap();
        assert_eq!(empty, PiecewiseFn1D::zero(unit()));

        let t1 = PiecewiseFn1D::threshold(unit(), 0.3, 0.0, 1.0).unwrap();
        let t2 = PiecewiseFn1D::threshold(unit(), 0.6, 0.5, 0.25).unwrap();
        let s = PiecewiseFn1D::sum(unit(), &[&t1, &t2]).unwrap();
        assert_eq!(s.breakpoints(), &[0.3, 0.6]);
        for i in 0..1000 {
            let x = i as f64 / 999.0;
            let direct = t1.eval(x).unwrap() + t2.eval(x).unwrap();
            assert_eq!(s.eval(x).unwrap(), direct);
        }

        let other = PiecewiseFn1D::zero(Domain::new(0.0, 2.0).unwrap());
        assert_eq!(PiecewiseFn1D::sum(unit(), &[&a, &other]), Err(Error::DomainMismatch));
    }

    #[test]
    fn eval_examples() {
        let t = PiecewiseFn1D::threshold(unit(), 0.5, 0.0, 1.0).unwrap();
        assert_eq!(t.eval(0.5).unwrap(), 1.0);
        assert!(matches!(t.eval(1.5), Err(Error::OutOfDomain { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_fn(&mut rng, unit(), 12, true);
        for i in 0..1000 {
            let x = i as f64 / 999.0;
            // direct formula: locate the piece by linear scan
            let p = f
                .pieces()
                .iter()
                .rposition(|p| p.lo <= x)
                .map(|i| f.pieces()[i])
                .unwrap();
            assert_eq!(f.eval(x).unwrap(), p.form.value(x));
        }
    }

    #[test]
    fn argmax_examples() {
        let c = PiecewiseFn1D::constant(unit(), 1.0);
        assert_eq!(c.argmax(), (0.5, 1.0));
        let t = PiecewiseFn1D::threshold(unit(), 0.5, 0.0, 1.0).unwrap();
        assert_eq!(t.argmax(), (0.75, 1.0));
        let a = PiecewiseFn1D::new(
            unit(),
            vec![],
            vec![PieceForm::Affine {
                slope: -1.0,
                intercept: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(a.argmax(), (0.0, 1.0));
        // increasing piece followed by a drop: sup approached from the left
        let r = PiecewiseFn1D::new(
            unit(),
            vec![0.6],
            vec![
                PieceForm::Affine {
                    slope: 1.0,
                    intercept: 0.0,
                },
                PieceForm::Constant(0.0),
            ],
        )
        .unwrap();
        let (x, v) = r.argmax();
        assert!(x < 0.6 && 0.6 - x < 1e-15);
        assert_eq!(r.eval(x).unwrap(), v);
    }

    #[test]
    fn exp_integral_examples() {
        let c = PiecewiseFn1D::constant(unit(), 1.0);
        assert_eq!(c.exp_integral(0.0, 0.0, 1.0).unwrap(), 1.0);
        let c = PiecewiseFn1D::constant(Domain::new(-1.0, 3.0).unwrap(), 0.7);
        let got = c.exp_integral(2.0, 0.5, 2.5).unwrap();
        assert!((got - 2.0 * (1.4f64).exp()).abs() < 1e-14 * got);

        // frozen from quadrature: 0.5 + 0.5 e
        let t = PiecewiseFn1D::threshold(unit(), 0.5, 0.0, 1.0).unwrap();
        let oracle = quadrature(&t, 1.0);
        let frozen = 0.5 + 0.5 * std::f64::consts::E;
        assert!((oracle - frozen).abs() < 1e-10 * frozen);
        let got = t.exp_integral(1.0, 0.0, 1.0).unwrap();
        assert!((got - frozen).abs() < 1e-10 * frozen);

        assert!(matches!(
            t.exp_integral(1.0, -0.1, 0.5),
            Err(Error::IntervalOutOfDomain { .. })
        ));
    }

    #[test]
    fn exp_integral_matches_quadrature_on_random_fns() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let f = random_fn(&mut rng, Domain::new(-1.0, 2.0).unwrap(), 8, true);
            let lambda = rng.random_range(-3.0..3.0);
            let exact = f.exp_integral(lambda, -1.0, 2.0).unwrap();
            let q = quadrature(&f, lambda);
            assert!((exact - q).abs() <= 1e-8 * q, "{exact} vs {q}");
        }
    }

    #[test]
    fn huge_exponents_do_not_overflow() {
        let t = PiecewiseFn1D::threshold(unit(), 0.5, 0.0, 1.0).unwrap();
        let l = t.log_exp_integral(5000.0, 0.0, 1.0).unwrap();
        assert!((l - (5000.0 + 0.5f64.ln())).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(t.sample_exp(5000.0, &mut rng).unwrap() >= 0.5);
        }
        let a = PiecewiseFn1D::new(
            unit(),
            vec![],
            vec![PieceForm::Affine {
                slope: 1.0,
                intercept: 0.0,
            }],
        )
        .unwrap();
        for _ in 0..100 {
            let x = a.sample_exp(1e6, &mut rng).unwrap();
            assert!(x > 0.99 && x <= 1.0);
        }
        assert_eq!(t.sample_exp(f64::NAN, &mut rng), Err(Error::NonFiniteMass));
    }

    fn ks_uniform(mut xs: Vec<f64>, lo: f64, hi: f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = (x - lo) / (hi - lo);
                (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn sample_exp_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = PiecewiseFn1D::threshold(unit(), 0.5, 0.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| t.sample_exp(0.0, &mut rng).unwrap()).collect();
        assert!(ks_uniform(xs, 0.0, 1.0) < 0.05);

        let lambda = 9f64.ln();
        let hits = (0..10_000)
            .filter(|_| t.sample_exp(lambda, &mut rng).unwrap() >= 0.5)
            .count();
        assert!((hits as f64 / 1e4 - 0.9).abs() < 0.02);

        // affine piece: within-piece CDF of density ∝ e^{2x} on [0,1]
        let a = PiecewiseFn1D::new(
            unit(),
            vec![],
            vec![PieceForm::Affine {
                slope: 2.0,
                intercept: 0.0,
            }],
        )
        .unwrap();
        let mut xs: Vec<f64> = (0..20_000).map(|_| a.sample_exp(1.0, &mut rng).unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let cdf = |x: f64| (2.0 * x).exp_m1() / 2f64.exp_m1();
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (cdf(x) - i as f64 / n).abs())
            .fold(0.0, f64::max);
        assert!(d < 0.02, "ks {d}");
    }

    #[test]
    fn equal_mass_pieces_are_hit_equally() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // [0,0.25) at 2, [0.25,0.75) at 2 - ln2, [0.75,1] at 2: masses 0.25e^2 each
        let f = PiecewiseFn1D::new(
            unit(),
            vec![0.25, 0.75],
            vec![
                PieceForm::Constant(2.0),
                PieceForm::Constant(2.0 - 2f64.ln()),
                PieceForm::Constant(2.0),
            ],
        )
        .unwrap();
        let mut counts = [0usize; 3];
        let draws = 10_000;
        for _ in 0..draws {
            counts[f.piece_index(f.sample_exp(1.0, &mut rng).unwrap())] += 1;
        }
        let p = 1.0 / 3.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn piece_histogram_matches_masses() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = random_fn(&mut rng, unit(), 6, true);
        let lambda = 1.3;
        let logs = f.log_piece_masses(lambda).unwrap();
        let total = log_sum_exp(logs.iter().copied());
        let draws = 10_000;
        let mut counts = vec![0usize; f.pieces().len()];
        for _ in 0..draws {
            counts[f.piece_index(f.sample_exp(lambda, &mut rng).unwrap())] += 1;
        }
        for (c, l) in counts.iter().zip(&logs) {
            let p = (l - total).exp();
            let sd = (draws as f64 * p * (1.0 - p)).sqrt().max(1e-9);
            assert!((*c as f64 - draws as f64 * p).abs() <= 3.0 * sd + 1.0);
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_fn(&mut rng, Domain::new(0.0, 10.0).unwrap(), 10, true);
        let s = serde_json::to_string(&f).unwrap();
        let back: PiecewiseFn1D = serde_json::from_str(&s).unwrap();
        assert_eq!(f, back);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v["pieces"][0]["form"].is_string());
        assert!(serde_json::from_str::<PiecewiseFn1D>(
            r#"{"domain":[0,1],"breakpoints":[],"pieces":[{"lo":0,"hi":1,"form":"cubic","params":[1]}]}"#
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn sum_is_pointwise(seed in 0u64..10_000, count in 0usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = unit();
            let fns: Vec<PiecewiseFn1D> = (0..count).map(|_| random_fn(&mut rng, d, 6, true)).collect();
            let refs: Vec<&PiecewiseFn1D> = fns.iter().collect();
            let s = PiecewiseFn1D::sum(d, &refs).unwrap();
            for i in 0..1000 {
                let x = i as f64 / 999.0;
                let direct: f64 = fns.iter().map(|f| f.eval(x).unwrap()).sum();
                let got = s.eval(x).unwrap();
                prop_assert!((got - direct).abs() <= 1e-12 * direct.abs().max(1.0));
            }
        }

        #[test]
        fn exp_integral_is_additive(seed in 0u64..10_000, b in 0.01f64..0.99, lambda in -4.0f64..4.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_fn(&mut rng, unit(), 8, true);
            let left = f.exp_integral(lambda, 0.0, b).unwrap();
            let right = f.exp_integral(lambda, b, 1.0).unwrap();
            let whole = f.exp_integral(lambda, 0.0, 1.0).unwrap();
            prop_assert!((left + right - whole).abs() <= 1e-12 * whole);
        }

        #[test]
        fn argmax_dominates_grid(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_fn(&mut rng, unit(), 8, true);
            let (x, v) = f.argmax();
            prop_assert!(unit().contains(x));
            for i in 0..1000 {
                prop_assert!(v >= f.eval(i as f64 / 999.0).unwrap());
            }
        }

        #[test]
        fn json_is_bit_faithful(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_fn(&mut rng, Domain::new(-3.3, 7.1).unwrap(), 10, true);
            let back: PiecewiseFn1D = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
            prop_assert_eq!(f, back);
        }
    }
}
