//! Parameterized greedy heuristics for knapsack and maximum-weight
//! independent set, and their exact utility curves in the parameter.
//!
//! Both heuristics order items by a score whose logarithm is affine in the
//! parameter, so the utility can only change where two scores cross. Curves
//! are built from that candidate crossing set and evaluated at piece
//! midpoints by running the heuristic itself.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::{Domain, PieceForm, PiecewiseFn1D, UtilityCurve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub values: Vec<f64>,
    pub sizes: Vec<f64>,
    pub capacity: f64,
}

impl KnapsackInstance {
    pub fn new(values: Vec<f64>, sizes: Vec<f64>, capacity: f64) -> Result<Self> {
        if values.len() != sizes.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: sizes.len(),
            });
        }
        if values.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::BadParams("knapsack values must lie in (0, 1]".into()));
        }
        if sizes.iter().any(|&s| !(s >= 1.0 && s.is_finite())) {
            return Err(Error::BadParams("knapsack sizes must be finite and >= 1".into()));
        }
        if !(capacity > 0.0) {
            return Err(Error::BadParams("capacity must be positive".into()));
        }
        Ok(KnapsackInstance {
            values,
            sizes,
            capacity,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwisInstance {
    pub weights: Vec<f64>,
    /// Sorted neighbor lists.
    pub adjacency: Vec<Vec<usize>>,
}

impl MwisInstance {
    pub fn new(weights: Vec<f64>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = weights.len();
        if weights.iter().any(|&w| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::BadParams("vertex weights must lie in (0, 1]".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::BadParams(format!("bad edge ({a}, {b})")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(MwisInstance { weights, adjacency })
    }

    pub fn from_adjacency(weights: Vec<f64>, adjacency: Vec<Vec<usize>>) -> Result<Self> {
        if adjacency.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: adjacency.len(),
            });
        }
        let edges: Vec<(usize, usize)> = adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, l)| l.iter().map(move |&b| (a, b)))
            .collect();
        Self::new(weights, &edges)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn pack(inst: &KnapsackInstance, order: &[usize]) -> (Vec<usize>, f64) {
    let mut room = inst.capacity;
    let mut taken = Vec::new();
    let mut value = 0.0;
    for &i in order {
        if inst.sizes[i] <= room {
            room -= inst.sizes[i];
            value += inst.values[i];
            taken.push(i);
        }
    }
    (taken, value)
}

/// Better of greedy-by-value and greedy-by-`v / s^rho`; ties in either order
/// go to the lower index, ties between the two solutions to the value order.
pub fn knapsack_greedy(inst: &KnapsackInstance, rho: f64) -> (Vec<usize>, f64) {
    let n = inst.len();
    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|&a, &b| inst.values[b].total_cmp(&inst.values[a]).then(a.cmp(&b)));
    let score: Vec<f64> = (0..n).map(|i| inst.values[i].ln() - rho * inst.sizes[i].ln()).collect();
    let mut by_ratio: Vec<usize> = (0..n).collect();
    by_ratio.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    let first = pack(inst, &by_value);
    let second = pack(inst, &by_ratio);
    if second.1 > first.1 {
        second
    } else {
        first
    }
}

/// Sorted, deduplicated `(ln v_i - ln v_j) / (ln s_i - ln s_j)` inside `(0, b)`.
pub fn knapsack_breakpoints(inst: &KnapsackInstance, b: f64) -> Vec<f64> {
    let n = inst.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if inst.sizes[i] == inst.sizes[j] {
                continue;
            }
            let x = (inst.values[i].ln() - inst.values[j].ln()) / (inst.sizes[i].ln() - inst.sizes[j].ln());
            if x > 0.0 && x < b {
                out.push(x);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn curve_from_breakpoints<F>(bps: Vec<f64>, domain: Domain, eval: F) -> PiecewiseFn1D
where
    F: Fn(f64) -> f64,
{
    let forms = (0..=bps.len())
        .map(|i| {
            let lo = if i == 0 { domain.lo } else { bps[i - 1] };
            let hi = if i == bps.len() { domain.hi } else { bps[i] };
            PieceForm::Constant(eval(0.5 * (lo + hi)))
        })
        .collect();
    PiecewiseFn1D::from_parts(domain, bps, forms)
}

/// Utility of [`knapsack_greedy`] as a function of `rho` on `[0, b]`, with
/// range bound `n`.
pub fn knapsack_curve(inst: &KnapsackInstance, b: f64) -> Result<UtilityCurve> {
    let domain = Domain::new(0.0, b)?;
    let f = curve_from_breakpoints(knapsack_breakpoints(inst, b), domain, |r| knapsack_greedy(inst, r).1);
    UtilityCurve::new(f, inst.len().max(1) as f64, "knapsack")
}

/// How the MWIS score counts degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeMode {
    /// Degree in the graph that remains after earlier deletions.
    #[default]
    Residual,
    /// Degree in the input graph.
    Original,
}

/// Repeatedly takes the vertex maximizing `w(v) / (1 + deg(v))^rho`, then
/// deletes it and its neighbors.
pub fn mwis_greedy(inst: &MwisInstance, rho: f64, mode: DegreeMode) -> (Vec<usize>, f64) {
    let n = inst.len();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = inst.adjacency.iter().map(Vec::len).collect();
    let log_w: Vec<f64> = inst.weights.iter().map(|w| w.ln()).collect();
    let mut chosen = Vec::new();
    let mut total = 0.0;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            let s = log_w[v] - rho * ((1 + degree[v]) as f64).ln();
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((v, s));
            }
        }
        let Some((v, _)) = best else { break };
        chosen.push(v);
        total += inst.weights[v];
        let mut removed = vec![v];
        removed.extend(inst.adjacency[v].iter().copied().filter(|&u| alive[u]));
        for &u in &removed {
            alive[u] = false;
        }
        if mode == DegreeMode::Residual {
            for &u in &removed {
                for &x in &inst.adjacency[u] {
                    if alive[x] {
                        degree[x] -= 1;
                    }
                }
            }
        }
    }
    (chosen, total)
}

/// Candidate crossings `(ln w_i - ln w_j) / (ln d1 - ln d2)` over all vertex
/// pairs and all `d1 != d2` in `1..=n`, restricted to `(0, b)`.
pub fn mwis_breakpoints(inst: &MwisInstance, b: f64) -> Vec<f64> {
    let n = inst.len();
    let log_d: Vec<f64> = (1..=n).map(|d| (d as f64).ln()).collect();
    let log_w: Vec<f64> = inst.weights.iter().map(|w| w.ln()).collect();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let num = log_w[i] - log_w[j];
            for d1 in 0..n {
                for d2 in 0..n {
                    if d1 == d2 {
                        continue;
                    }
                    let x = num / (log_d[d1] - log_d[d2]);
                    if x > 0.0 && x < b {
                        out.push(x);
                    }
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Utility of [`mwis_greedy`] on `[0, b]`, with range bound `n`.
pub fn mwis_curve(inst: &MwisInstance, b: f64, mode: DegreeMode) -> Result<UtilityCurve> {
    let domain = Domain::new(0.0, b)?;
    let f = curve_from_breakpoints(mwis_breakpoints(inst, b), domain, |r| mwis_greedy(inst, r, mode).1);
    UtilityCurve::new(f, inst.len().max(1) as f64, "mwis")
}

pub const KNAPSACK_BRUTE_FORCE_MAX: usize = 22;
pub const MWIS_BRUTE_FORCE_MAX: usize = 18;

/// Exact knapsack optimum by depth-first enumeration.
pub fn brute_force_knapsack(inst: &KnapsackInstance) -> Result<f64> {
    if inst.len() > KNAPSACK_BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            n: inst.len(),
            max: KNAPSACK_BRUTE_FORCE_MAX,
        });
    }
    fn go(inst: &KnapsackInstance, i: usize, room: f64, value: f64, best: &mut f64) {
        if i == inst.len() {
            *best = best.max(value);
            return;
        }
        if inst.sizes[i] <= room {
            go(inst, i + 1, room - inst.sizes[i], value + inst.values[i], best);
        }
        go(inst, i + 1, room, value, best);
    }
    let mut best = 0.0;
    go(inst, 0, inst.capacity, 0.0, &mut best);
    Ok(best)
}

/// Exact maximum-weight independent set by subset enumeration.
pub fn brute_force_mwis(inst: &MwisInstance) -> Result<f64> {
    let n = inst.len();
    if n > MWIS_BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            n,
            max: MWIS_BRUTE_FORCE_MAX,
        });
    }
    let masks: Vec<u32> = inst
        .adjacency
        .iter()
        .map(|l| l.iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let mut best: f64 = 0.0;
    for set in 0u32..(1u32 << n) {
        let mut ok = true;
        let mut w = 0.0;
        for (v, mask) in masks.iter().enumerate() {
            if set & (1 << v) != 0 {
                if mask & set != 0 {
                    ok = false;
                    break;
                }
                w += inst.weights[v];
            }
        }
        if ok {
            best = best.max(w);
        }
    }
    Ok(best)
}

/// Knobs for the smoothed instance generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothedConfig {
    /// Largest knapsack item size; sizes are uniform on `[1, max_size]`.
    pub max_size: f64,
    /// Capacity as a fraction of the total item size.
    pub capacity_fraction: f64,
    /// Edge probability of the Erdős–Rényi graph.
    pub edge_prob: f64,
    /// Left ends of the per-item value windows; drawn uniformly when absent.
    pub anchors: Option<Vec<f64>>,
}

impl Default for SmoothedConfig {
    fn default() -> Self {
        SmoothedConfig {
            max_size: 10.0,
            capacity_fraction: 0.4,
            edge_prob: 0.3,
            anchors: None,
        }
    }
}

/// Values uniform on `(a_i, a_i + 1/kappa]`, a density bounded by `kappa`.
pub fn smoothed_values<R: Rng + ?Sized>(
    n: usize,
    kappa: f64,
    anchors: Option<&[f64]>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::BadKappa(kappa));
    }
    let width = 1.0 / kappa;
    if let Some(a) = anchors {
        if a.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: a.len(),
            });
        }
        if a.iter().any(|&x| !(0.0..=1.0 - width).contains(&x)) {
            return Err(Error::BadParams("anchors must lie in [0, 1 - 1/kappa]".into()));
        }
    }
    Ok((0..n)
        .map(|i| {
            let anchor = match anchors {
                Some(a) => a[i],
                None => rng.random::<f64>() * (1.0 - width),
            };
            anchor + width * (1.0 - rng.random::<f64>())
        })
        .collect())
}

pub fn gen_knapsack<R: Rng + ?Sized>(
    n: usize,
    kappa: f64,
    cfg: &SmoothedConfig,
    rng: &mut R,
) -> Result<KnapsackInstance> {
    let values = smoothed_values(n, kappa, cfg.anchors.as_deref(), rng)?;
    if !(cfg.max_size >= 1.0) {
        return Err(Error::BadParams("max_size must be >= 1".into()));
    }
    let sizes: Vec<f64> = (0..n)
        .map(|_| 1.0 + (cfg.max_size - 1.0) * rng.random::<f64>())
        .collect();
    let capacity = (cfg.capacity_fraction * sizes.iter().sum::<f64>()).max(1.0);
    KnapsackInstance::new(values, sizes, capacity)
}

pub fn gen_mwis<R: Rng + ?Sized>(n: usize, kappa: f64, cfg: &SmoothedConfig, rng: &mut R) -> Result<MwisInstance> {
    let weights = smoothed_values(n, kappa, cfg.anchors.as_deref(), rng)?;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < cfg.edge_prob {
                edges.push((a, b));
            }
        }
    }
    MwisInstance::new(weights, &edges)
}

/// Instance file record: `{family, n, values, sizes | adjacency, capacity?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub family: String,
    pub n: usize,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
}

impl From<&KnapsackInstance> for InstanceRecord {
    fn from(k: &KnapsackInstance) -> Self {
        InstanceRecord {
            family: "knapsack".into(),
            n: k.len(),
            values: k.values.clone(),
            sizes: Some(k.sizes.clone()),
            adjacency: None,
            capacity: Some(k.capacity),
        }
    }
}

impl From<&MwisInstance> for InstanceRecord {
    fn from(m: &MwisInstance) -> Self {
        InstanceRecord {
            family: "mwis".into(),
            n: m.len(),
            values: m.weights.clone(),
            sizes: None,
            adjacency: Some(m.adjacency.clone()),
            capacity: None,
        }
    }
}

impl InstanceRecord {
    fn check_n(&self) -> Result<()> {
        if self.values.len() != self.n {
            return Err(Error::Config {
                field: "values".into(),
                message: format!("expected {} entries, got {}", self.n, self.values.len()),
            });
        }
        Ok(())
    }

    pub fn to_knapsack(&self) -> Result<KnapsackInstance> {
        self.check_n()?;
        let missing = |f: &str| Error::Config {
            field: f.into(),
            message: "required for knapsack instances".into(),
        };
        let sizes = self.sizes.clone().ok_or_else(|| missing("sizes"))?;
        let capacity = self.capacity.ok_or_else(|| missing("capacity"))?;
        KnapsackInstance::new(self.values.clone(), sizes, capacity)
    }

    pub fn to_mwis(&self) -> Result<MwisInstance> {
        self.check_n()?;
        let adjacency = self.adjacency.clone().ok_or_else(|| Error::Config {
            field: "adjacency".into(),
            message: "required for mwis instances".into(),
        })?;
        MwisInstance::from_adjacency(self.values.clone(), adjacency)
    }
}
