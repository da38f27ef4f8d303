//! Discrete-time random walk `P(x, y) = b(x, y) / deg(x)` on a window with
//! absorbing exterior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::{restrict, RestrictedOperator, SolverConfig};
use crate::graph::{Graph, Window};
use crate::heat::{heat_green_quadrature, QuadratureConfig, QuadratureResult};

/// Generator used by [`simulate`], reported alongside its output so that a
/// seed can be replayed against the same stream definition.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), stream = trial index";

fn require_no_potential<V: Clone + Eq + std::hash::Hash + Ord + std::fmt::Debug>(
    op: &RestrictedOperator<V>,
) -> Result<()> {
    match op.potential().iter().position(|&c| c != 0.0) {
        Some(i) => Err(Error::PotentialPresent(format!("{:?}", op.window().vertex(i)))),
        None => Ok(()),
    }
}

fn require_unit_measure<V: Clone + Eq + std::hash::Hash + Ord + std::fmt::Debug>(
    op: &RestrictedOperator<V>,
) -> Result<()> {
    match op.measure().iter().position(|&m| m != 1.0) {
        Some(i) => Err(Error::NonUnitMeasure(format!("{:?}", op.window().vertex(i)))),
        None => Ok(()),
    }
}

fn step<V: Clone + Eq + std::hash::Hash + Ord>(op: &RestrictedOperator<V>, u: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let deg = op.degree(i);
        *o = if deg > 0.0 { op.neighbors(i).iter().map(|&(j, w)| w * u[j]).sum::<f64>() / deg } else { 0.0 };
    }
}

/// `(P_K u)(x) = sum_{y in K} b(x, y) u(y) / deg(x)`, with `deg` summed over
/// the whole graph so that steps leaving `K` are lost.
pub fn transition_apply<V: Clone + Eq + std::hash::Hash + Ord + std::fmt::Debug>(
    op: &RestrictedOperator<V>,
    u: &[f64],
) -> Result<Vec<f64>> {
    require_no_potential(op)?;
    if u.len() != op.len() {
        return Err(Error::InvalidConfig(format!("vector of length {} on a window of {}", u.len(), op.len())));
    }
    let mut out = vec![0.0; op.len()];
    step(op, u, &mut out);
    Ok(out)
}

/// Row sums of `P_K`: 1 on the interior, below 1 on the boundary.
pub fn row_sums<V: Clone + Eq + std::hash::Hash + Ord + std::fmt::Debug>(
    op: &RestrictedOperator<V>,
) -> Result<Vec<f64>> {
    transition_apply(op, &vec![1.0; op.len()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenSeries {
    /// `(1/deg(x)) sum_{n <= N} P^n(x, y)` for `N = 0, 1, ...`.
    pub partial_sums: Vec<f64>,
    pub value: f64,
    pub steps: usize,
    /// Estimated remainder of the normalized series.
    pub tail_estimate: f64,
    /// Set when the remainder was still above the tolerance at the step cap.
    pub tail_flag: bool,
}

/// Visit-count series `(1/deg(x)) sum_n (P_K^n delta_x)(y)`.
///
/// `(P^n delta_x)(y)` is `P^n(y, x)`, the expected visits to `x` at time `n`
/// from `y`; with this reading the sum equals `(L_K)^{-1} delta_x (y)` for
/// any degrees (the transposed reading needs `deg(x) = deg(y)`).
///
/// `P_K` is self-adjoint in `l^2(K, deg)`, so with `rho` the ratio of
/// successive `deg`-norms (which increases to the spectral radius) the
/// remainder after `n` is estimated by
/// `|P^n delta_x|_deg rho / ((1 - rho) sqrt(deg(y)) deg(x))`.
pub fn green_series<V: Clone + Eq + std::hash::Hash + Ord + std::fmt::Debug>(
    op: &RestrictedOperator<V>,
    x: usize,
    y: usize,
    max_steps: usize,
    tol: f64,
) -> Result<GreenSeries> {
    require_no_potential(op)?;
    require_unit_measure(op)?;
    if x >= op.len() || y >= op.len() {
        return Err(Error::UnknownVertex(format!("window index {}", x.max(y))));
    }
    if max_steps == 0 {
        return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
    }
    let n = op.len();
    let deg: Vec<f64> = (0..n).map(|i| op.degree(i)).collect();
    let deg_x = deg[x];
    let sqrt_deg_y = deg[y].sqrt();
    let deg_norm = |u: &[f64]| u.iter().zip(&deg).map(|(a, d)| a * a * d).sum::<f64>().sqrt();

    let mut u = vec![0.0; n];
    u[x] = 1.0;
    let mut next = vec![0.0; n];
    let mut sum = u[y];
    let mut partial_sums = vec![sum / deg_x];
    let mut norm = deg_norm(&u);
    let mut tail_estimate = f64::INFINITY;
    for _ in 0..max_steps {
        step(op, &u, &mut next);
        std::mem::swap(&mut u, &mut next);
        sum += u[y];
        partial_sums.push(sum / deg_x);
        let new_norm = deg_norm(&u);
        if new_norm == 0.0 {
            tail_estimate = 0.0;
            break;
        }
        let rho = new_norm / norm;
        norm = new_norm;
        tail_estimate = if rho < 1.0 { new_norm * rho / ((1.0 - rho) * sqrt_deg_y * deg_x) } else { f64::INFINITY };
        if tail_estimate <= tol {
            break;
        }
    }
    let steps = partial_sums.len() - 1;
    Ok(GreenSeries { value: sum / deg_x, partial_sums, steps, tail_estimate, tail_flag: tail_estimate > tol })
}

#[derive(Debug, Clone)]
pub struct WalkConfig<V> {
    pub start: V,
    pub window: Window<V>,
    /// Steps per trajectory; visits are counted at times `0..=max_steps`.
    pub max_steps: usize,
    pub trials: u64,
    pub seed: u64,
}

impl<V> WalkConfig<V> {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitStat {
    pub vertex: String,
    pub mean: f64,
    /// 95% normal-approximation half-width `1.96 sd / sqrt(trials)`.
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    /// Window vertices in window order.
    pub visits: Vec<VisitStat>,
    pub trials: u64,
    /// Trajectories that left the window before `max_steps`.
    pub absorbed: u64,
    /// Mean number of steps taken inside the window.
    pub mean_lifetime: f64,
    pub rng: String,
    pub seed: u64,
}

#[derive(Clone)]
struct Tally {
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
    absorbed: u64,
    lifetime: u64,
    counts: Vec<u32>,
    touched: Vec<usize>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally { sum: vec![0; n], sum_sq: vec![0; n], absorbed: 0, lifetime: 0, counts: vec![0; n], touched: Vec::new() }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.sum_sq.iter_mut().zip(&other.sum_sq).for_each(|(a, b)| *a += b);
        self.absorbed += other.absorbed;
        self.lifetime += other.lifetime;
        self
    }
}

/// Independent trajectories from `cfg.start`, each killed on leaving the
/// window or after `max_steps` steps.
///
/// Trial `t` draws from its own stream `(seed, t)`, and all tallies are
/// integers, so the report does not depend on thread count or scheduling.
pub fn simulate<G: Graph>(g: &G, cfg: &WalkConfig<G::Vertex>) -> Result<SimulationReport> {
    cfg.validate()?;
    let op = restrict(g, &cfg.window)?;
    require_no_potential(&op)?;
    let start = op
        .window()
        .index_of(&cfg.start)
        .ok_or_else(|| Error::UnknownVertex(format!("start {} is outside the window", g.encode(&cfg.start))))?;
    let n = op.len();
    // cumulative weights per vertex: in-window neighbors, then the exterior
    let cumulative: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            let mut c: Vec<f64> = op.neighbors(i).iter().map(|&(_, w)| { acc += w; acc }).collect();
            c.push(acc + op.exterior_weight(i));
            c
        })
        .collect();

    let tally = (0..cfg.trials)
        .into_par_iter()
        .fold(
            || Tally::new(n),
            |mut t, trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(trial);
                let mut at = start;
                t.counts[at] += 1;
                t.touched.push(at);
                let mut steps = 0;
                let mut absorbed = false;
                while steps < cfg.max_steps {
                    let cum = &cumulative[at];
                    let total = cum[cum.len() - 1];
                    let r = rng.random::<f64>() * total;
                    let k = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
                    steps += 1;
                    if k + 1 == cum.len() {
                        absorbed = true;
                        break;
                    }
                    at = op.neighbors(at)[k].0;
                    if t.counts[at] == 0 {
                        t.touched.push(at);
                    }
                    t.counts[at] += 1;
                }
                t.absorbed += absorbed as u64;
                t.lifetime += steps as u64 - absorbed as u64;
                let Tally { sum, sum_sq, counts, touched, .. } = &mut t;
                for &v in touched.iter() {
                    let c = counts[v] as u64;
                    sum[v] += c;
                    sum_sq[v] += c * c;
                    counts[v] = 0;
                }
                touched.clear();
                t
            },
        )
        .reduce(|| Tally::new(n), Tally::merge);

    let trials = cfg.trials as f64;
    let visits = (0..n)
        .map(|i| {
            let mean = tally.sum[i] as f64 / trials;
            let var = if cfg.trials > 1 {
                ((tally.sum_sq[i] as f64 - trials * mean * mean) / (trials - 1.0)).max(0.0)
            } else {
                0.0
            };
            VisitStat { vertex: g.encode(op.window().vertex(i)), mean, half_width: 1.96 * (var / trials).sqrt() }
        })
        .collect();
    Ok(SimulationReport {
        visits,
        trials: cfg.trials,
        absorbed: tally.absorbed,
        mean_lifetime: tally.lifetime as f64 / trials,
        rng: RNG_NAME.to_string(),
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub heat: QuadratureResult,
    pub series: GreenSeries,
    /// `|heat - series|`.
    pub residual: f64,
}

/// Compares the time integral of the heat kernel with the visit-count series
/// on one window. Both need `m = 1` and `c = 0`.
pub fn bridge_residual<V: Clone + Eq + std::hash::Hash + Ord + std::fmt::Debug>(
    op: &RestrictedOperator<V>,
    x: usize,
    y: usize,
    max_steps: usize,
    qcfg: &QuadratureConfig,
    cfg: &SolverConfig,
) -> Result<BridgeReport> {
    require_no_potential(op)?;
    require_unit_measure(op)?;
    let series = green_series(op, x, y, max_steps, qcfg.tol)?;
    let heat = heat_green_quadrature(op, x, y, qcfg, cfg)?;
    let residual = (heat.value - series.value).abs();
    Ok(BridgeReport { heat, series, residual })
}
