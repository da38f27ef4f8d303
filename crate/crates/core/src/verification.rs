//! Randomized checks of the identities the library relies on.
//!
//! Each group draws its instances from its own ChaCha stream, so a group's
//! outcome depends only on the seed and its instance count.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exhaustion::{
    exhaust, neumann_series_resolvent, perturbed_resolvent, restrict, solve_resolvent, SolverConfig,
};
use crate::forms::{contract, energy, greens_formula_residual, path_constant, Contraction};
use crate::graph::{
    key_unit_hash, BirthDeath, FiniteGraph, FiniteGraphBuilder, Graph, GraphFunction, GraphKind, Lattice,
    LatticePoint, RegularTree, Remeasured, Window,
};
use crate::heat::{
    completeness_probe, heat_green_quadrature, integral_defect, semigroup_apply, CompletenessConfig,
    CompletenessVerdict, QuadratureConfig,
};
use crate::potential::{classify, equilibrium_potential, ClassifierConfig, TypeVerdict};
use crate::random_walk::bridge_residual;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub name: String,
    pub claim: String,
    pub instances: usize,
    pub failures: usize,
    /// Largest error statistic seen; failures are instances above `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
}

impl GroupReport {
    fn new(name: &str, claim: &str, tolerance: f64) -> Self {
        GroupReport { name: name.into(), claim: claim.into(), instances: 0, failures: 0, worst: 0.0, tolerance }
    }

    fn record(&mut self, error: f64) {
        self.instances += 1;
        // NaN counts as a failure
        if !(error <= self.tolerance) {
            self.failures += 1;
        }
        if error.is_nan() || error > self.worst {
            self.worst = error;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.instances > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub groups: Vec<GroupReport>,
    pub passed: bool,
}

/// Instance counts per group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub form_instances: usize,
    pub solver_instances: usize,
    pub quadrature_instances: usize,
    pub max_window: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 42, form_instances: 1000, solver_instances: 100, quadrature_instances: 50, max_window: 150 }
    }
}

pub const GROUPS: [&str; 12] = [
    "contraction",
    "greens_formula",
    "path_bound",
    "perturbed_resolvent",
    "neumann_series",
    "heat_quadrature",
    "walk_bridge",
    "capacity_monotonicity",
    "integral_defect",
    "markov_bounds",
    "recurrence_completeness",
    "measure_covariance",
];

/// Runs all twelve groups.
pub fn verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let s = cfg.seed;
    let solver = SolverConfig::default();
    let groups = vec![
        contraction_group(s, cfg.form_instances),
        greens_formula_group(s, cfg.form_instances),
        path_bound_group(s, cfg.form_instances)?,
        perturbed_resolvent_group(s, cfg.solver_instances / 2, cfg.max_window, &solver)?,
        neumann_group(s, cfg.solver_instances, cfg.max_window, &solver)?,
        quadrature_group(s, cfg.quadrature_instances, cfg.max_window, &solver)?,
        bridge_group(s, cfg.quadrature_instances / 2, cfg.max_window, &solver)?,
        capacity_monotonicity_group(s, cfg.solver_instances / 4, &solver)?,
        integral_defect_group(s, cfg.solver_instances, cfg.max_window),
        markov_group(s, cfg.solver_instances / 2, cfg.max_window, &solver)?,
        recurrence_completeness_group(s, &solver)?,
        measure_covariance_group(s, cfg.solver_instances / 2, cfg.max_window, &solver)?,
    ];
    let passed = groups.iter().all(GroupReport::passed);
    Ok(VerifyReport { seed: s, groups, passed })
}

fn stream(seed: u64, group: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(GROUPS.iter().position(|g| *g == group).expect("known group") as u64);
    rng
}

/// Connected random graph on 2..=`max_n` vertices: a random spanning tree
/// plus extra edges, weights in `[0.1, 5)`, measure in `[0.2, 3)` unless
/// `unit_measure`, and a potential on about a third of the vertices unless
/// `no_potential`.
pub fn random_finite_graph(rng: &mut ChaCha8Rng, max_n: usize, unit_measure: bool, no_potential: bool) -> FiniteGraph {
    let n = rng.random_range(2..=max_n.max(2));
    let mut b = FiniteGraphBuilder::new();
    let mut present = HashSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        b.edge(&i.to_string(), &j.to_string(), rng.random_range(0.1..5.0)).expect("valid edge");
        present.insert((j, i));
    }
    for _ in 0..rng.random_range(0..=n) {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        let key = (i.min(j), i.max(j));
        if i != j && present.insert(key) {
            b.edge(&i.to_string(), &j.to_string(), rng.random_range(0.1..5.0)).expect("valid edge");
        }
    }
    for i in 0..n {
        if !unit_measure {
            b.measure(&i.to_string(), rng.random_range(0.2..3.0)).expect("positive");
        }
        if !no_potential && rng.random_bool(1.0 / 3.0) {
            b.potential(&i.to_string(), rng.random_range(0.0..2.0)).expect("nonnegative");
        }
    }
    b.build()
}

/// Connected window of at most `size` vertices grown from `root` by adding
/// uniformly chosen boundary edges.
pub fn random_window<G: Graph>(g: &G, root: &G::Vertex, size: usize, rng: &mut ChaCha8Rng) -> Window<G::Vertex> {
    let mut inside = vec![root.clone()];
    let mut seen: HashSet<G::Vertex> = HashSet::from([root.clone()]);
    let mut candidates: Vec<G::Vertex> = g.neighbors(root).into_iter().map(|(y, _)| y).collect();
    while inside.len() < size && !candidates.is_empty() {
        let y = candidates.swap_remove(rng.random_range(0..candidates.len()));
        if !seen.insert(y.clone()) {
            continue;
        }
        candidates.extend(g.neighbors(&y).into_iter().map(|(z, _)| z).filter(|z| !seen.contains(z)));
        inside.push(y);
    }
    Window::new(inside)
}

/// The window together with its exterior neighbours as an explicit graph.
/// Window vertices keep their full degree, so restricting the result to the
/// returned window gives the same operator as restricting `g`.
pub fn materialize<G: Graph>(g: &G, window: &Window<G::Vertex>) -> (FiniteGraph, Window<usize>) {
    let mut b = FiniteGraphBuilder::new();
    for x in window.iter() {
        let key = g.encode(x);
        b.vertex(&key);
        b.measure(&key, g.measure(x)).expect("valid measure");
        if g.potential(x) > 0.0 {
            b.potential(&key, g.potential(x)).expect("valid potential");
        }
    }
    for x in window.iter() {
        for (y, w) in g.neighbors(x) {
            // each in-window edge once; exterior edges from the window side
            if !window.contains(&y) || x < &y {
                b.edge(&g.encode(x), &g.encode(&y), w).expect("valid edge");
            }
        }
    }
    let f = b.build();
    let w = Window::new(window.iter().map(|x| f.vertex(&g.encode(x)).expect("interned")));
    (f, w)
}

/// A random window of a randomly chosen family, materialized.
#[derive(Debug, Clone)]
pub struct Instance {
    pub family: String,
    pub graph: FiniteGraph,
    pub window: Window<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct InstanceSpec {
    pub max_window: usize,
    pub unit_measure: bool,
    pub no_potential: bool,
    /// Whether the birth-death chain (large degrees) may be drawn.
    pub birth_death: bool,
}

pub fn random_instance(rng: &mut ChaCha8Rng, spec: InstanceSpec) -> Instance {
    let size = rng.random_range(1..=spec.max_window.max(1));
    let choices = if spec.birth_death { 7 } else { 6 };
    let (family, graph, window) = match rng.random_range(0..choices) {
        k @ 0..=2 => {
            let g = Lattice::new(k + 1).expect("dimension");
            let o = LatticePoint::origin(k + 1);
            let w = random_window(&g, &o, size, rng);
            let (f, w) = materialize(&g, &w);
            (format!("lattice:{}", k + 1), f, w)
        }
        k @ 3..=4 => {
            let g = RegularTree::new(k as u64 - 1).expect("branching");
            let w = random_window(&g, &0, size, rng);
            let (f, w) = materialize(&g, &w);
            (format!("tree:{}", k - 1), f, w)
        }
        5 => {
            let g = random_finite_graph(rng, 14, spec.unit_measure, spec.no_potential);
            let n = g.len();
            let root = rng.random_range(0..n);
            // proper subset, so the exterior absorbs
            let w = random_window(&g, &root, size.min(n - 1).max(1), rng);
            if n == 1 || w.len() == n {
                return random_instance(rng, spec);
            }
            let (f, w) = materialize(&g, &w);
            ("finite".to_string(), f, w)
        }
        _ => {
            let g = BirthDeath::new(1.0).expect("beta");
            let w = random_window(&g, &0, size, rng);
            let (f, w) = materialize(&g, &w);
            ("bd:1".to_string(), f, w)
        }
    };
    // lattice and tree windows get random measure and potential on request
    let graph = if family != "finite" && (!spec.unit_measure || !spec.no_potential) {
        let mut b = FiniteGraphBuilder::new();
        for x in graph.vertices() {
            let key = graph.encode(&x);
            b.vertex(&key);
            if !spec.unit_measure {
                b.measure(&key, rng.random_range(0.2..3.0)).expect("positive");
            }
            if !spec.no_potential && rng.random_bool(0.2) {
                b.potential(&key, rng.random_range(0.0..1.0)).expect("nonnegative");
            }
        }
        for (x, y, w) in graph.edges() {
            b.edge(&graph.encode(&x), &graph.encode(&y), w).expect("valid edge");
        }
        b.build()
    } else {
        graph
    };
    Instance { family, graph, window }
}

fn random_function<V: Ord + Clone>(
    rng: &mut ChaCha8Rng,
    vertices: impl Iterator<Item = V>,
    density: f64,
) -> GraphFunction<V> {
    let mut u = GraphFunction::zero();
    for x in vertices {
        if rng.random_bool(density) {
            u.set(x, rng.random_range(-2.0..2.0));
        }
    }
    u
}

/// `Q(C u) <= Q(u)` for normal contractions.
pub fn contraction_group(seed: u64, instances: usize) -> GroupReport {
    let mut rng = stream(seed, "contraction");
    let mut report = GroupReport::new("contraction", "Q(Cu) <= Q(u) for |.| and clamps", 1e-12);
    for _ in 0..instances {
        let g = random_finite_graph(&mut rng, 12, false, false);
        let u = random_function(&mut rng, g.vertices(), 0.8);
        let kind = if rng.random_bool(0.5) {
            Contraction::Abs
        } else {
            Contraction::Clamp { lo: -rng.random_range(0.0..1.0), hi: rng.random_range(0.0..1.0) }
        };
        let cu = contract(&u, kind).expect("valid clamp");
        report.record((energy(&g, &cu).value - energy(&g, &u).value).max(0.0));
    }
    report
}

/// `Q(u, v) = sum_x (L u)(x) v(x) m(x)` for finitely supported `v`.
pub fn greens_formula_group(seed: u64, instances: usize) -> GroupReport {
    let mut rng = stream(seed, "greens_formula");
    let mut report = GroupReport::new("greens_formula", "Q(u,v) = <Lu, v>_m for finitely supported v", 1e-12);
    let z2 = Lattice::new(2).expect("dimension");
    for k in 0..instances {
        if k % 4 == 3 {
            // an infinite graph: functions supported near the origin
            let ball: Vec<LatticePoint> =
                exhaust(&z2, LatticePoint::origin(2), &[3]).expect("radius").vertices(0).to_vec();
            let u = random_function(&mut rng, ball.iter().cloned(), 0.7);
            let v = random_function(&mut rng, ball.iter().cloned(), 0.5);
            report.record(greens_formula_residual(&z2, &u, &v).abs());
        } else {
            let g = random_finite_graph(&mut rng, 12, false, false);
            let u = random_function(&mut rng, g.vertices(), 0.8);
            let v = random_function(&mut rng, g.vertices(), 0.6);
            report.record(greens_formula_residual(&g, &u, &v).abs());
        }
    }
    report
}

/// `|u(x) - u(y)| <= K(x, y) Q(u)^{1/2}`.
pub fn path_bound_group(seed: u64, instances: usize) -> Result<GroupReport> {
    let mut rng = stream(seed, "path_bound");
    let mut report = GroupReport::new("path_bound", "|u(x)-u(y)| <= K(x,y) Q(u)^(1/2)", 1e-10);
    for _ in 0..instances {
        let g = random_finite_graph(&mut rng, 12, false, false);
        let u = random_function(&mut rng, g.vertices(), 0.8);
        let n = g.len();
        let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
        let k = path_constant(&g, &x, &y, &Window::new(g.vertices()))?;
        let excess = (u.get(&x) - u.get(&y)).abs() - k * energy(&g, &u).value.sqrt();
        report.record(excess.max(0.0));
    }
    Ok(report)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `(L^g + a)^{-1} f = (L + a)^{-1} [f - g (L^g + a)^{-1} f]`.
pub fn perturbed_resolvent_group(
    seed: u64,
    instances: usize,
    max_window: usize,
    cfg: &SolverConfig,
) -> Result<GroupReport> {
    let mut rng = stream(seed, "perturbed_resolvent");
    let mut report = GroupReport::new("perturbed_resolvent", "resolvent identity for L + g", 1e-9);
    let spec = InstanceSpec { max_window, unit_measure: false, no_potential: false, birth_death: true };
    for _ in 0..instances {
        let inst = random_instance(&mut rng, spec);
        let op = restrict(&inst.graph, &inst.window)?;
        let g_fn: Vec<f64> = (0..op.len()).map(|_| rng.random_range(0.1..3.0)).collect();
        let alpha = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..2.0) };
        let f: Vec<f64> = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = perturbed_resolvent(&op, &g_fn, alpha, &f, cfg)?;
        let rhs: Vec<f64> = f.iter().zip(&g_fn).zip(&u).map(|((f, g), u)| f - g * u).collect();
        let v = solve_resolvent(&op, alpha, &rhs, cfg)?;
        let scale = u.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        report.record(max_abs_diff(&u, &v) / scale);
    }
    Ok(report)
}

/// Neumann series of `(D + a M)^{-1} A` against the direct solve, for
/// `a` in {0.1, 1, 10}.
pub fn neumann_group(seed: u64, instances: usize, max_window: usize, cfg: &SolverConfig) -> Result<GroupReport> {
    let mut rng = stream(seed, "neumann_series");
    let mut report = GroupReport::new("neumann_series", "Neumann series = (L + a)^{-1} delta_x", 1e-9);
    let spec = InstanceSpec { max_window, unit_measure: false, no_potential: false, birth_death: false };
    for _ in 0..instances {
        let inst = random_instance(&mut rng, spec);
        let op = restrict(&inst.graph, &inst.window)?;
        let x = rng.random_range(0..op.len());
        let mut worst: f64 = 0.0;
        for alpha in [0.1, 1.0, 10.0] {
            let series = neumann_series_resolvent(&op, alpha, x, 1e-12)?;
            let direct = solve_resolvent(&op, alpha, &op.delta(x), cfg)?;
            worst = worst.max(max_abs_diff(&series.values, &direct));
        }
        report.record(worst);
    }
    Ok(report)
}

/// `int_0^inf exp(-t L_K) delta_x (y) dt = (L_K)^{-1} delta_x (y)`.
pub fn quadrature_group(seed: u64, instances: usize, max_window: usize, cfg: &SolverConfig) -> Result<GroupReport> {
    let mut rng = stream(seed, "heat_quadrature");
    let mut report = GroupReport::new("heat_quadrature", "time integral of the heat kernel = Green function", 1e-6);
    let spec = InstanceSpec { max_window, unit_measure: false, no_potential: false, birth_death: false };
    let qcfg = QuadratureConfig::default();
    for _ in 0..instances {
        let inst = random_instance(&mut rng, spec);
        let op = restrict(&inst.graph, &inst.window)?;
        let (x, y) = (rng.random_range(0..op.len()), rng.random_range(0..op.len()));
        let q = heat_green_quadrature(&op, x, y, &qcfg, cfg)?;
        let d = solve_resolvent(&op, 0.0, &op.delta(x), cfg)?[y];
        report.record((q.value - d).abs());
    }
    Ok(report)
}

/// Heat-kernel time integral against the visit-count series, `m = 1`,
/// `c = 0`.
pub fn bridge_group(seed: u64, instances: usize, max_window: usize, cfg: &SolverConfig) -> Result<GroupReport> {
    let mut rng = stream(seed, "walk_bridge");
    let mut report = GroupReport::new("walk_bridge", "heat integral = visit series / deg(x)", 1e-6);
    let spec = InstanceSpec { max_window, unit_measure: true, no_potential: true, birth_death: false };
    for _ in 0..instances {
        let inst = random_instance(&mut rng, spec);
        let op = restrict(&inst.graph, &inst.window)?;
        let (x, y) = (rng.random_range(0..op.len()), rng.random_range(0..op.len()));
        let b = bridge_residual(&op, x, y, 10_000_000, &QuadratureConfig::default(), cfg)?;
        report.record(if b.series.tail_flag { f64::INFINITY } else { b.residual });
    }
    Ok(report)
}

fn window_capacities<G: Graph>(g: &G, o: &G::Vertex, radii: &[usize], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let ex = exhaust(g, o.clone(), radii)?;
    (0..ex.len()).map(|n| Ok(equilibrium_potential(g, &ex.window(n), o, cfg)?.capacity)).collect()
}

/// Capacity along nested windows never increases.
pub fn capacity_monotonicity_group(seed: u64, instances: usize, cfg: &SolverConfig) -> Result<GroupReport> {
    let mut rng = stream(seed, "capacity_monotonicity");
    let mut report = GroupReport::new("capacity_monotonicity", "cap_{K_n}(o) nonincreasing in n", 1e-12);
    for _ in 0..instances.max(1) {
        let mut radii: Vec<usize> = (0..4).map(|_| rng.random_range(1..12)).collect();
        radii.sort_unstable();
        radii.dedup();
        let caps = match rng.random_range(0..5) {
            d @ 0..=2 => {
                let g = Lattice::new(d + 1)?;
                window_capacities(&g, &LatticePoint::origin(d + 1), &radii, cfg)?
            }
            3 => window_capacities(&RegularTree::new(rng.random_range(2..4))?, &0, &radii, cfg)?,
            _ => window_capacities(&BirthDeath::new(rng.random_range(0.0..3.0))?, &0, &radii, cfg)?,
        };
        report.record(caps.windows(2).map(|p| (p[1] - p[0]) / p[0]).fold(0.0, f64::max));
    }
    Ok(report)
}

/// Interior sum of `L u m`, killing and boundary flux telescope to zero.
pub fn integral_defect_group(seed: u64, instances: usize, max_window: usize) -> GroupReport {
    let mut rng = stream(seed, "integral_defect");
    let mut report = GroupReport::new("integral_defect", "sum_int (Lu) m - sum_int c u + flux = 0", 1e-10);
    let spec = InstanceSpec { max_window, unit_measure: false, no_potential: false, birth_death: true };
    for _ in 0..instances {
        let inst = random_instance(&mut rng, spec);
        let u = random_function(&mut rng, inst.graph.vertices(), 0.9);
        let d = integral_defect(&inst.graph, &u, &inst.window);
        report.record(d.telescoping_residual.abs());
    }
    report
}

/// `0 <= f <= 1` implies `0 <= exp(-tL_K) f <= 1` and `0 <= a (L_K + a)^{-1} f <= 1`.
pub fn markov_group(seed: u64, instances: usize, max_window: usize, cfg: &SolverConfig) -> Result<GroupReport> {
    let mut rng = stream(seed, "markov_bounds");
    let mut report = GroupReport::new("markov_bounds", "semigroup and resolvent map [0,1] into [0,1]", 1e-12);
    let spec = InstanceSpec { max_window, unit_measure: false, no_potential: false, birth_death: true };
    for _ in 0..instances {
        let inst = random_instance(&mut rng, spec);
        let op = restrict(&inst.graph, &inst.window)?;
        let f: Vec<f64> = (0..op.len()).map(|_| rng.random_range(0.0..=1.0)).collect();
        let t = rng.random_range(0.01..5.0);
        let alpha = rng.random_range(0.01..10.0);
        let gamma = (0..op.len()).map(|i| op.diagonal(i)).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        if gamma * t <= 1e6 {
            let u = semigroup_apply(&op, t, &f, 1e-15, 1e6)?;
            worst = u.iter().map(|v| (-v).max(v - 1.0)).fold(worst, f64::max);
        }
        let w = solve_resolvent(&op, alpha, &f, cfg)?;
        worst = w.iter().map(|v| (-alpha * v).max(alpha * v - 1.0)).fold(worst, f64::max);
        report.record(worst.max(0.0));
    }
    Ok(report)
}

/// Edge weights inside a finite ball multiplied by `1 + h` with `h` a
/// deterministic hash of the edge in `[0, 1)`.
pub struct EdgePerturbed<'a, G: Graph> {
    inner: &'a G,
    ball: HashSet<G::Vertex>,
    salt: u64,
}

impl<'a, G: Graph> EdgePerturbed<'a, G> {
    pub fn new(inner: &'a G, ball: impl IntoIterator<Item = G::Vertex>, salt: u64) -> Self {
        EdgePerturbed { inner, ball: ball.into_iter().collect(), salt }
    }

    fn factor(&self, x: &G::Vertex, y: &G::Vertex) -> f64 {
        if !(self.ball.contains(x) && self.ball.contains(y)) {
            return 1.0;
        }
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        1.0 + key_unit_hash(&format!("{}|{}", self.inner.encode(a), self.inner.encode(b)), self.salt)
    }
}

impl<G: Graph> Graph for EdgePerturbed<'_, G> {
    type Vertex = G::Vertex;

    fn kind(&self) -> GraphKind {
        GraphKind::Custom
    }
    fn contains(&self, x: &Self::Vertex) -> bool {
        self.inner.contains(x)
    }
    fn neighbors(&self, x: &Self::Vertex) -> Vec<(Self::Vertex, f64)> {
        let mut nb = self.inner.neighbors(x);
        for (y, w) in nb.iter_mut() {
            *w *= self.factor(x, y);
        }
        nb
    }
    fn potential(&self, x: &Self::Vertex) -> f64 {
        self.inner.potential(x)
    }
    fn measure(&self, x: &Self::Vertex) -> f64 {
        self.inner.measure(x)
    }
    fn encode(&self, x: &Self::Vertex) -> String {
        self.inner.encode(x)
    }
    fn decode(&self, key: &str) -> Result<Self::Vertex> {
        self.inner.decode(key)
    }
}

fn recurrent_and_incomplete<G: Graph>(g: &G, root: G::Vertex, radii: &[usize], cfg: &SolverConfig) -> Result<f64> {
    let ex = exhaust(g, root.clone(), radii)?;
    let ccfg = ClassifierConfig { solver: *cfg, ..ClassifierConfig::default() };
    let class = classify(g, &root, &ex, &ccfg)?;
    let heat = completeness_probe(g, &ex, &[root], &CompletenessConfig { solver: *cfg, ..CompletenessConfig::default() })?;
    let bad = class.verdict == TypeVerdict::Recurrent && heat.verdict == CompletenessVerdict::Incomplete;
    Ok(if bad { 1.0 } else { 0.0 })
}

/// A recurrent verdict never comes with an incomplete one.
pub fn recurrence_completeness_group(seed: u64, cfg: &SolverConfig) -> Result<GroupReport> {
    let mut report = GroupReport::new("recurrence_completeness", "never (recurrent, incomplete)", 0.0);
    let lattice_radii = [4, 8, 16, 32];
    for d in 1..=3 {
        let g = Lattice::new(d)?;
        let radii: &[usize] = if d == 3 { &lattice_radii[..3] } else { &lattice_radii };
        report.record(recurrent_and_incomplete(&g, LatticePoint::origin(d), radii, cfg)?);
    }
    let tree = RegularTree::new(2)?;
    report.record(recurrent_and_incomplete(&tree, 0, &[3, 5, 7, 9], cfg)?);
    for beta in [0.0, 1.0, 3.0] {
        let g = BirthDeath::new(beta)?;
        report.record(recurrent_and_incomplete(&g, 0, &[10, 20, 40, 80], cfg)?);
    }
    // random weight changes on a finite ball
    for salt in 0..3u64 {
        let salt = seed.wrapping_add(salt);
        for d in 1..=2 {
            let g = Lattice::new(d)?;
            let o = LatticePoint::origin(d);
            let ball = exhaust(&g, o.clone(), &[3])?.vertices(0).to_vec();
            let p = EdgePerturbed::new(&g, ball, salt);
            report.record(recurrent_and_incomplete(&p, o, &lattice_radii, cfg)?);
        }
        let ball = exhaust(&tree, 0, &[3])?.vertices(0).to_vec();
        let p = EdgePerturbed::new(&tree, ball, salt);
        report.record(recurrent_and_incomplete(&p, 0, &[3, 5, 7, 9], cfg)?);
    }
    Ok(report)
}

/// Capacities ignore the measure bit for bit; the Green function picks up
/// `m'(x) / m(x)`.
pub fn measure_covariance_group(seed: u64, instances: usize, max_window: usize, cfg: &SolverConfig) -> Result<GroupReport> {
    let mut rng = stream(seed, "measure_covariance");
    let mut report = GroupReport::new(
        "measure_covariance",
        "capacity bitwise invariant, G'(x,y) = G(x,y) m'(x)/m(x)",
        1e-10,
    );
    let spec = InstanceSpec { max_window, unit_measure: false, no_potential: false, birth_death: true };
    for _ in 0..instances {
        let inst = random_instance(&mut rng, spec);
        let salt = rng.random::<u64>();
        let scale = rng.random_range(0.1..10.0);
        let g = &inst.graph;
        let h = Remeasured::new(g, move |x: &usize| scale * (0.05 + 2.0 * key_unit_hash(&x.to_string(), salt)));
        let o = *inst.window.vertex(0);
        let a = equilibrium_potential(g, &inst.window, &o, cfg)?.capacity;
        let b = equilibrium_potential(&h, &inst.window, &o, cfg)?.capacity;
        let mut worst = if a.to_bits() == b.to_bits() { 0.0 } else { f64::INFINITY };

        let op = restrict(g, &inst.window)?;
        let op2 = restrict(&h, &inst.window)?;
        let x = rng.random_range(0..op.len());
        let u = solve_resolvent(&op, 0.0, &op.delta(x), cfg)?;
        let v = solve_resolvent(&op2, 0.0, &op2.delta(x), cfg)?;
        let ratio = op2.measure()[x] / op.measure()[x];
        for (gu, gv) in u.iter().zip(&v) {
            let expected = gu * ratio;
            worst = f64::max(worst, (gv - expected).abs() / expected.abs().max(f64::MIN_POSITIVE));
        }
        report.record(worst);
    }
    Ok(report)
}
