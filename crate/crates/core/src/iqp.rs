//! Rounding configurations for integer quadratic programs
//! `max z^T A z` over `z in {-1, 1}^n`.
//!
//! The relaxation is solved approximately by low-rank projected gradient
//! ascent over unit vectors. Two rounding families are provided: outward
//! rotation by an angle in `[0, pi/2]` (exact piecewise-constant curves), and
//! s-linear rounding with a clipped linear map of slope `1/s` (evaluated
//! pointwise, its pieces are not exp-integrable in closed form).
//!
//! The constant term of the s-linear utility is `sum_i a_ii`, the exact
//! expectation of `sum_i a_ii z_i^2`; some statements of this utility write
//! the squared diagonal instead.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::piecewise::{Domain, PieceForm, PiecewiseFn1D, UtilityCurve};

const SYMMETRY_TOL: f64 = 1e-12;
pub const IQP_BRUTE_FORCE_MAX: usize = 18;

/// Symmetric coefficient matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IqpInstance {
    n: usize,
    a: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct IqpRecord {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl Serialize for IqpInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IqpRecord {
            n: self.n,
            rows: self.rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IqpInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = IqpRecord::deserialize(d)?;
        if rec.rows.len() != rec.n {
            return Err(serde::de::Error::custom("row count differs from n"));
        }
        IqpInstance::from_rows(rec.rows).map_err(serde::de::Error::custom)
    }
}

impl IqpInstance {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                left: n,
                right: r.len(),
            });
        }
        let a: Vec<f64> = rows.into_iter().flatten().collect();
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadParams("matrix entries must be finite".into()));
        }
        for i in 0..n {
            if a[i * n + i] < 0.0 {
                return Err(Error::BadParams(format!("negative diagonal entry at {i}")));
            }
            for j in i + 1..n {
                if (a[i * n + j] - a[j * n + i]).abs() > SYMMETRY_TOL {
                    return Err(Error::NonSymmetric);
                }
            }
        }
        Ok(IqpInstance { n, a })
    }

    /// `A = L / 4` for the graph Laplacian `L`, so `z^T A z` is the cut size.
    pub fn max_cut(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut rows = vec![vec![0.0; n]; n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::BadParams(format!("bad edge ({u}, {v})")));
            }
            rows[u][u] += 0.25;
            rows[v][v] += 0.25;
            rows[u][v] -= 0.25;
            rows[v][u] -= 0.25;
        }
        Self::from_rows(rows)
    }

    /// Erdős–Rényi max-cut instance; resamples until at least one edge exists.
    pub fn random_max_cut<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadParams("max-cut needs at least two vertices".into()));
        }
        loop {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            if !edges.is_empty() {
                return Self::max_cut(n, &edges);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    /// `sum_ij |a_ij|`, the scale that bounds every rounding utility in absolute value.
    pub fn abs_sum(&self) -> f64 {
        self.a.iter().map(|x| x.abs()).sum()
    }

    /// `sum_i sum_j a_ij x_i x_j`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self.a[i * n + j] * (x[i] * x[j]);
            }
        }
        total
    }

    fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for x in &self.a {
            h.update(x.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Unit vectors `u_1..u_n` in `R^rank` and their relaxation objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vectors: Vec<Vec<f64>>,
    pub sdp_objective: f64,
}

impl Embedding {
    pub fn rank(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    /// Projections `<u_i, z[..rank]>`.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|u| u.iter().zip(z).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Cache key for an embedding of `inst` computed at `rank` with `seed`.
    pub fn cache_key(inst: &IqpInstance, rank: usize, seed: u64) -> String {
        format!("{}-r{rank}-s{seed}", &inst.hash_hex()[..16])
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Io(e.to_string()))
    }
}

fn gram_objective(inst: &IqpInstance, u: &[Vec<f64>]) -> f64 {
    let n = inst.n;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = u[i].iter().zip(&u[j]).map(|(a, b)| a * b).sum();
            total += inst.get(i, j) * dot;
        }
    }
    total
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    } else {
        v[0] = 1.0;
    }
}

/// Projected gradient ascent on `sum_ij a_ij <u_i, u_j>` over unit vectors in
/// `R^rank`, renormalizing rows after each step. Step sizes backtrack until
/// the objective does not decrease; stops after `iters` steps or when the
/// relative gain of an accepted step falls below `tol`.
pub fn sdp_embed<R: Rng + ?Sized>(
    inst: &IqpInstance,
    rank: usize,
    iters: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Embedding> {
    if rank < 2 {
        return Err(Error::BadParams("embedding rank must be at least 2".into()));
    }
    let n = inst.n;
    let mut u: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut v: Vec<f64> = (0..rank).map(|_| rng.sample(StandardNormal)).collect();
            normalize(&mut v);
            v
        })
        .collect();
    let mut obj = gram_objective(inst, &u);
    let max_row = (0..n)
        .map(|i| (0..n).map(|j| inst.get(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if max_row == 0.0 {
        return Ok(Embedding {
            vectors: u,
            sdp_objective: obj,
        });
    }
    let mut step = 1.0 / max_row;
    for _ in 0..iters {
        let grad: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..rank)
                    .map(|c| 2.0 * (0..n).map(|j| inst.get(i, j) * u[j][c]).sum::<f64>())
                    .collect()
            })
            .collect();
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<Vec<f64>> = u
                .iter()
                .zip(&grad)
                .map(|(ui, gi)| {
                    let mut v: Vec<f64> = ui.iter().zip(gi).map(|(a, g)| a + step * g).collect();
                    normalize(&mut v);
                    v
                })
                .collect();
            let cand_obj = gram_objective(inst, &cand);
            if cand_obj >= obj {
                accepted = Some((cand, cand_obj));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cand_obj)) = accepted else { break };
        let gain = cand_obj - obj;
        u = cand;
        obj = cand_obj;
        step *= 1.5;
        if gain <= tol * obj.abs().max(1.0) {
            break;
        }
    }
    Ok(Embedding {
        vectors: u,
        sdp_objective: obj,
    })
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn check_z(inst: &IqpInstance, emb: &Embedding, z: &[f64], len: usize) -> Result<()> {
    if emb.vectors.len() != inst.n {
        return Err(Error::LengthMismatch {
            left: inst.n,
            right: emb.vectors.len(),
        });
    }
    if z.len() != len {
        return Err(Error::LengthMismatch {
            left: len,
            right: z.len(),
        });
    }
    if emb.rank() > inst.n {
        return Err(Error::BadParams("embedding rank exceeds n".into()));
    }
    Ok(())
}

/// Outward-rotation utility: sign-rounds `cos(g) <u_i, z[..n]> + sin(g) z[n + i]`.
/// `sign(0)` is `+1`.
pub fn uowr_value(inst: &IqpInstance, emb: &Embedding, z: &[f64], gamma: f64) -> Result<f64> {
    let n = inst.n;
    check_z(inst, emb, z, 2 * n)?;
    if !(0.0..=FRAC_PI_2).contains(&gamma) {
        return Err(Error::OutOfDomain {
            rho: gamma,
            lo: 0.0,
            hi: FRAC_PI_2,
        });
    }
    let proj = emb.project(&z[..n]);
    let (c, s) = (gamma.cos(), gamma.sin());
    let signs: Vec<f64> = (0..n).map(|i| sign(c * proj[i] + s * z[n + i])).collect();
    Ok(inst.quad_form(&signs))
}

/// Angles in `(-pi/2, pi/2)` where each rotated coordinate changes sign.
pub fn owr_angles(inst: &IqpInstance, emb: &Embedding, z: &[f64]) -> Result<Vec<f64>> {
    let n = inst.n;
    check_z(inst, emb, z, 2 * n)?;
    let proj = emb.project(&z[..n]);
    (0..n)
        .map(|i| {
            if z[n + i] == 0.0 {
                Err(Error::DegenerateZ(i))
            } else {
                Ok((-proj[i] / z[n + i]).atan())
            }
        })
        .collect()
}

/// Outward-rotation utility over `gamma in [0, pi/2]`, shifted up by
/// `sum |a_ij|` so that it is nonnegative; the range bound is twice that sum.
pub fn owr_curve(inst: &IqpInstance, emb: &Embedding, z: &[f64]) -> Result<UtilityCurve> {
    let mut bps: Vec<f64> = owr_angles(inst, emb, z)?
        .into_iter()
        .filter(|&g| g > 0.0 && g < FRAC_PI_2)
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let shift = inst.abs_sum();
    let domain = Domain::new(0.0, FRAC_PI_2)?;
    let forms = (0..=bps.len())
        .map(|i| {
            let lo = if i == 0 { 0.0 } else { bps[i - 1] };
            let hi = if i == bps.len() { FRAC_PI_2 } else { bps[i] };
            uowr_value(inst, emb, z, 0.5 * (lo + hi)).map(|v| PieceForm::Constant(v + shift))
        })
        .collect::<Result<Vec<_>>>()?;
    UtilityCurve::new(
        PiecewiseFn1D::from_parts(domain, bps, forms),
        (2.0 * shift).max(f64::MIN_POSITIVE),
        "owr",
    )
}

/// Clipped linear rounding map: `y / s` on `[-s, s]`, `sign(y)` outside.
pub fn phi(s: f64, y: f64) -> f64 {
    if y > s {
        1.0
    } else if y < -s {
        -1.0
    } else {
        y / s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlinMode {
    Expected,
    Sampled,
}

/// s-linear utility. `Expected` returns the exact expectation over the
/// randomized rounding; `Sampled` draws the signs from `rng`.
pub fn uslin_value<R: Rng + ?Sized>(
    inst: &IqpInstance,
    emb: &Embedding,
    z: &[f64],
    s: f64,
    mode: SlinMode,
    rng: &mut R,
) -> Result<f64> {
    let n = inst.n;
    check_z(inst, emb, z, n)?;
    if !(s > 0.0) {
        return Err(Error::NonPositiveS(s));
    }
    let p: Vec<f64> = emb.project(z).into_iter().map(|v| phi(s, v)).collect();
    match mode {
        SlinMode::Expected => {
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    total += if i == j {
                        inst.get(i, i)
                    } else {
                        inst.get(i, j) * (p[i] * p[j])
                    };
                }
            }
            Ok(total)
        }
        SlinMode::Sampled => {
            let signs: Vec<f64> = p
                .iter()
                .map(|&x| {
                    if rng.random::<f64>() < 0.5 * (1.0 + x) {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect();
            Ok(inst.quad_form(&signs))
        }
    }
}

/// `|<u_i, z>|` values in `(0, s_max]`, sorted and deduplicated. Between
/// them the expected s-linear utility has the form `a/s^2 + b/s + c`.
pub fn slin_breakpoints(emb: &Embedding, z: &[f64], s_max: f64) -> Vec<f64> {
    let mut out: Vec<f64> = emb
        .project(z)
        .into_iter()
        .map(f64::abs)
        .filter(|&v| v > 0.0 && v <= s_max)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// High-probability upper end of the search interval for `s`:
/// `sqrt(2 ln(sqrt(8/pi) * 2 n T / zeta))`.
pub fn slin_search_bound(n: usize, t: usize, zeta: f64) -> Result<f64> {
    let arg = (8.0 / PI).sqrt() * 2.0 * n as f64 * t as f64 / zeta;
    if n == 0 || t == 0 || !(zeta > 0.0) || !(arg >= 1.0) {
        return Err(Error::BadParams(
            "need n, T >= 1 and zeta small enough for a real bound".into(),
        ));
    }
    Ok((2.0 * arg.ln()).sqrt())
}

/// Exact optimum of `z^T A z` by enumeration.
pub fn brute_force_iqp(inst: &IqpInstance) -> Result<f64> {
    let n = inst.n;
    if n > IQP_BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            n,
            max: IQP_BRUTE_FORCE_MAX,
        });
    }
    let mut best = f64::NEG_INFINITY;
    let mut z = vec![0.0; n];
    for mask in 0u32..(1u32 << n) {
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = if mask & (1 << i) != 0 { -1.0 } else { 1.0 };
        }
        best = best.max(inst.quad_form(&z));
    }
    Ok(if n == 0 { 0.0 } else { best })
}

/// Standard normal vector of length `len`.
pub fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}
