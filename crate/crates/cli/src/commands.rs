use std::time::Instant;

use graphpot::exhaustion::{restrict, Exhaustion, GeometricRadii, Verdict};
use graphpot::forms::boundary_term_sequence;
use graphpot::graph::{io, GraphFunction};
use graphpot::heat::completeness_probe;
use graphpot::potential::{
    capacity_sequence, classify, equilibrium_potential, green_estimate, monopole_solve,
};
use graphpot::random_walk::{bridge_residual, green_series, simulate, WalkConfig};
use graphpot::verification::verify;
use serde_json::json;

use crate::args::{BoundaryFunction, ClassifierArgs, Command, GraphArgs, LimitArgs};
use crate::config::Settings;
use crate::graphs::{build, with_graph, DefaultRoot};
use crate::report::{Phase, RunReport, Sequence, Timings};
use crate::CliError;

/// What a subcommand produced: a report, or raw text (edge lists).
pub enum Output {
    Report(Box<RunReport>),
    Text(String),
}

struct Clock {
    start: Instant,
    last: Instant,
    phases: Vec<Phase>,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Clock { start: now, last: now, phases: Vec::new() }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.phases.push(Phase { name: name.into(), seconds: (now - self.last).as_secs_f64() });
        self.last = now;
    }

    fn finish(self) -> Timings {
        Timings { total_seconds: self.start.elapsed().as_secs_f64(), phases: self.phases }
    }
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Converged { .. } => "converged",
        Verdict::Diverging => "diverging",
        Verdict::Undetermined => "undetermined",
    }
}

fn apply_graph_flags(settings: &mut Settings, g: &GraphArgs) {
    if let Some(v) = g.max_vertices {
        settings.exhaustion.max_vertices = v;
    }
    if let Some(v) = g.direct_threshold {
        settings.solver.direct_threshold = v;
    }
    if let Some(v) = g.solver_tol {
        settings.solver.tol = v;
    }
}

fn apply_limit_flags(settings: &mut Settings, l: &LimitArgs) {
    if let Some(v) = l.tol {
        settings.limits.tol = v;
    }
    if let Some(v) = l.threshold {
        settings.limits.threshold = v;
    }
}

fn apply_classifier_flags(settings: &mut Settings, c: &ClassifierArgs, heat: bool) {
    if heat {
        if let Some(v) = c.ceiling {
            settings.completeness.ceiling = v;
        }
        if let Some(v) = c.floor {
            settings.completeness.floor = v;
        }
        if let Some(v) = c.cauchy_tol {
            settings.completeness.cauchy_tol = v;
        }
    } else {
        if let Some(v) = c.ceiling {
            settings.classifier.recurrence_ceiling = v;
        }
        if let Some(v) = c.floor {
            settings.classifier.transience_floor = v;
        }
        if let Some(v) = c.cauchy_tol {
            settings.classifier.cauchy_tol = v;
        }
    }
}

fn graph_args(cmd: &Command) -> Option<&GraphArgs> {
    match cmd {
        Command::Classify { graph, .. }
        | Command::Capacity { graph, .. }
        | Command::Green { graph, .. }
        | Command::Monopole { graph, .. }
        | Command::Heatmass { graph, .. }
        | Command::Walk { graph, .. }
        | Command::Bridge { graph, .. }
        | Command::Boundary { graph, .. }
        | Command::Gen { graph, .. } => Some(graph),
        Command::Verify { .. } => None,
    }
}

/// Applies flags over `settings` (already holding defaults and the config
/// file) and runs the subcommand.
pub fn execute(cmd: &Command, mut settings: Settings) -> Result<Output, CliError> {
    if let Some(g) = graph_args(cmd) {
        apply_graph_flags(&mut settings, g);
    }
    match cmd {
        Command::Capacity { limits, .. } | Command::Green { limits, .. } | Command::Monopole { limits, .. } => {
            apply_limit_flags(&mut settings, limits)
        }
        Command::Classify { classifier, .. } => apply_classifier_flags(&mut settings, classifier, false),
        Command::Heatmass { classifier, .. } => apply_classifier_flags(&mut settings, classifier, true),
        Command::Walk { steps, trials, seed, .. } => {
            if let Some(v) = steps {
                settings.walk.steps = *v;
            }
            if let Some(v) = trials {
                settings.walk.trials = *v;
            }
            if let Some(v) = seed {
                settings.walk.seed = *v;
            }
        }
        Command::Bridge { tol: Some(v), .. } => settings.quadrature.tol = *v,
        Command::Verify { seed, form_instances, solver_instances, quadrature_instances, max_window } => {
            let v = &mut settings.verify;
            v.seed = seed.unwrap_or(v.seed);
            v.form_instances = form_instances.unwrap_or(v.form_instances);
            v.solver_instances = solver_instances.unwrap_or(v.solver_instances);
            v.quadrature_instances = quadrature_instances.unwrap_or(v.quadrature_instances);
            v.max_window = max_window.unwrap_or(v.max_window);
        }
        _ => {}
    }
    let settings = settings.finish();

    if let Command::Verify { .. } = cmd {
        let mut clock = Clock::new();
        let r = verify(&settings.verify)?;
        clock.lap("verify");
        let mut report = RunReport::new("verify", json!({ "settings": settings }));
        report.verdict("verify", if r.passed { "passed" } else { "failed" });
        for g in &r.groups {
            report.verdict(&format!("group.{}", g.name), if g.passed() { "passed" } else { "failed" });
        }
        report.result = serde_json::to_value(&r).expect("serializable");
        report.timings = Some(clock.finish());
        return Ok(Output::Report(Box::new(report)));
    }

    let g_args = graph_args(cmd).expect("graph subcommand");
    let graph = build(&g_args.graph, g_args.measure, g_args.potential)?;
    with_graph!(&graph, g => run_on(g, cmd, g_args, &settings))
}

fn exhaustion_for<G: DefaultRoot>(
    g: &G,
    root: &G::Vertex,
    args: &GraphArgs,
    settings: &Settings,
) -> Result<Exhaustion<G::Vertex>, CliError> {
    Ok(match &args.radii {
        Some(r) => Exhaustion::new(g, root.clone(), r)?,
        None => Exhaustion::geometric(
            g,
            root.clone(),
            GeometricRadii { start: settings.exhaustion.start_radius, max_vertices: settings.exhaustion.max_vertices },
        )?,
    })
}

fn base_config<G: DefaultRoot>(
    g: &G,
    root: &G::Vertex,
    args: &GraphArgs,
    settings: &Settings,
    ex: Option<&Exhaustion<G::Vertex>>,
) -> serde_json::Value {
    let mut c = json!({
        "graph": args.graph.to_string(),
        "measure": args.measure,
        "potential": args.potential,
        "root": g.encode(root),
        "settings": settings,
    });
    if let Some(ex) = ex {
        c["radii"] = json!(ex.radii());
        c["window_sizes"] = json!((0..ex.len()).map(|n| ex.size(n)).collect::<Vec<_>>());
    }
    c
}

fn run_on<G: DefaultRoot>(g: &G, cmd: &Command, args: &GraphArgs, s: &Settings) -> Result<Output, CliError> {
    let mut clock = Clock::new();
    let root = g.vertex_arg(&args.root)?;
    let cfg = &s.solver;

    // window-radius subcommands and gen do not use an exhaustion
    let ball = |radius: usize| -> Result<Exhaustion<G::Vertex>, CliError> {
        if radius == 0 {
            return Err(CliError::Usage("--radius must be at least 1".into()));
        }
        Ok(Exhaustion::new(g, root.clone(), &[radius])?)
    };

    let mut report = match cmd {
        Command::Gen { radius, out, .. } => {
            let ex = ball(*radius)?;
            let text = io::serialize(g, &ex.window(0));
            let Some(path) = out else {
                return Ok(Output::Text(text));
            };
            std::fs::write(path, &text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            let mut r = RunReport::new("gen", base_config(g, &root, args, s, Some(&ex)));
            r.config["radius"] = json!(radius);
            r.result = json!({
                "path": path.display().to_string(),
                "vertices": ex.size(0),
                "edges": text.lines().filter(|l| l.starts_with("e ")).count(),
            });
            r
        }
        Command::Walk { x, y, radius, .. } => {
            let ex = ball(*radius)?;
            clock.lap("window");
            let start = g.vertex_arg(x)?;
            let target = match y {
                Some(y) => g.vertex_arg(y)?,
                None => start.clone(),
            };
            let window = ex.window(0);
            let op = restrict(g, &window)?;
            let (Some(xi), Some(yi)) = (window.index_of(&start), window.index_of(&target)) else {
                return Err(graphpot::Error::UnknownVertex("walk endpoints must lie in the window".into()).into());
            };
            let w = &s.walk;
            let sim = simulate(g, &WalkConfig { start, window, max_steps: w.steps, trials: w.trials, seed: w.seed })?;
            clock.lap("simulate");
            // expected visits to y from x: sum_n P^n(x, y) = deg(y) * series(y -> x)
            let series = green_series(&op, yi, xi, w.steps, 0.0)?;
            clock.lap("series");
            let expected = series.partial_sums[series.steps] * op.degree(yi);
            let visit = &sim.visits[yi];
            let deviation = (visit.mean - expected).abs();
            let within = deviation <= 3.0 * visit.half_width + 1e-12 * expected.abs();
            let mut r = RunReport::new("walk", base_config(g, &root, args, s, Some(&ex)));
            r.config["x"] = json!(g.encode(op.window().vertex(xi)));
            r.config["y"] = json!(visit.vertex);
            r.config["radius"] = json!(radius);
            r.verdict("monte_carlo", if within { "consistent" } else { "inconsistent" });
            r.result = json!({
                "mean_visits": visit.mean,
                "half_width": visit.half_width,
                "series_expected_visits": expected,
                "deviation": deviation,
                "deviation_in_half_widths": if visit.half_width > 0.0 { deviation / visit.half_width } else { 0.0 },
                "absorbed": sim.absorbed,
                "trials": sim.trials,
                "mean_lifetime": sim.mean_lifetime,
                "rng": sim.rng,
                "seed": sim.seed,
                "window_size": op.len(),
            });
            r
        }
        Command::Bridge { x, y, radius, .. } => {
            let ex = ball(*radius)?;
            let xv = g.vertex_arg(x)?;
            let yv = g.vertex_arg(y)?;
            let window = ex.window(0);
            let op = restrict(g, &window)?;
            let (Some(xi), Some(yi)) = (window.index_of(&xv), window.index_of(&yv)) else {
                return Err(graphpot::Error::UnknownVertex("bridge endpoints must lie in the window".into()).into());
            };
            clock.lap("window");
            let b = bridge_residual(&op, xi, yi, s.walk.series_steps, &s.quadrature, cfg)?;
            clock.lap("bridge");
            let mut r = RunReport::new("bridge", base_config(g, &root, args, s, Some(&ex)));
            r.config["x"] = json!(g.encode(&xv));
            r.config["y"] = json!(g.encode(&yv));
            r.config["radius"] = json!(radius);
            let tolerance = 1e3 * s.quadrature.tol;
            r.verdict(
                "bridge",
                if b.series.tail_flag {
                    "inconclusive"
                } else if b.residual <= tolerance {
                    "agree"
                } else {
                    "disagree"
                },
            );
            r.result = json!({
                "heat_integral": b.heat.value,
                "heat_method": b.heat.method,
                "heat_horizon": b.heat.horizon,
                "heat_tail_bound": b.heat.tail_bound,
                "gap": b.heat.gap,
                "series_value": b.series.value,
                "series_steps": b.series.steps,
                "series_tail_estimate": b.series.tail_estimate,
                "series_tail_flag": b.series.tail_flag,
                "residual": b.residual,
                "tolerance": tolerance,
                "window_size": op.len(),
            });
            r
        }
        _ => {
            let ex = exhaustion_for(g, &root, args, s)?;
            clock.lap("exhaustion");
            let radii = ex.radii().to_vec();
            let mut r = RunReport::new(cmd.name(), base_config(g, &root, args, s, Some(&ex)));
            match cmd {
                Command::Classify { .. } => {
                    let c = classify(g, &root, &ex, &s.classifier)?;
                    clock.lap("classify");
                    r.sequences.push(Sequence::new("capacity", &radii, &c.capacity.values));
                    r.sequences.push(Sequence::new("green_diagonal", &radii, &c.green_diagonal.values));
                    r.sequences.push(Sequence::new("monopole_energy", &radii, &c.monopole_energy.values));
                    r.verdict("type", c.verdict);
                    r.verdict("capacity", verdict_name(&c.capacity.verdict));
                    r.verdict("green_diagonal", verdict_name(&c.green_diagonal.verdict));
                    r.verdict(
                        "measure_independence",
                        if c.measure_independence.bitwise_equal { "bitwise_equal" } else { "differs" },
                    );
                    r.result = serde_json::to_value(&c).expect("serializable");
                }
                Command::Capacity { .. } => {
                    let c = capacity_sequence(g, &root, &ex, s.limits.tol, 1.0 / s.limits.threshold, cfg)?;
                    clock.lap("capacity");
                    r.sequences.push(Sequence::new("capacity", &radii, &c.values));
                    r.verdict("capacity", verdict_name(&c.verdict));
                    r.result = serde_json::to_value(&c).expect("serializable");
                }
                Command::Green { x, y, .. } => {
                    let xv = g.vertex_arg(x)?;
                    let yv = g.vertex_arg(y)?;
                    r.config["x"] = json!(g.encode(&xv));
                    r.config["y"] = json!(g.encode(&yv));
                    let c = green_estimate(g, &xv, &yv, &ex, s.limits.tol, s.limits.threshold, cfg)?;
                    clock.lap("green");
                    r.sequences.push(Sequence::new("green", &radii, &c.values));
                    r.verdict("green", verdict_name(&c.verdict));
                    r.result = serde_json::to_value(&c).expect("serializable");
                }
                Command::Monopole { .. } => {
                    let m = monopole_solve(g, &root, &ex, s.limits.tol, s.limits.threshold, cfg)?;
                    clock.lap("monopole");
                    let identity = m
                        .energy
                        .values
                        .iter()
                        .zip(&m.green_times_measure)
                        .map(|(e, gm)| (e - gm).abs() / gm.abs().max(1.0))
                        .fold(0.0, f64::max);
                    r.sequences.push(Sequence::new("monopole_energy", &radii, &m.energy.values));
                    r.sequences.push(Sequence::new("green_times_measure", &radii, &m.green_times_measure));
                    r.sequences.push(Sequence::new("interior_residual", &radii, &m.interior_residual));
                    r.verdict("energy", verdict_name(&m.energy.verdict));
                    r.result = json!({
                        "energy": m.energy,
                        "green_times_measure": m.green_times_measure,
                        "interior_residual": m.interior_residual,
                        "max_identity_error": identity,
                    });
                }
                Command::Heatmass { probe, .. } => {
                    let probes = if probe.is_empty() {
                        vec![root.clone()]
                    } else {
                        probe.iter().map(|p| g.vertex_arg(p)).collect::<Result<Vec<_>, _>>()?
                    };
                    let h = completeness_probe(g, &ex, &probes, &s.completeness)?;
                    clock.lap("heatmass");
                    for p in &h.probes {
                        r.sequences.push(Sequence::new(&format!("mass[{}]", p.vertex), &radii, &p.mass.values));
                        r.verdict(&format!("completeness[{}]", p.vertex), p.verdict);
                    }
                    r.verdict("completeness", h.verdict);
                    r.result = serde_json::to_value(&h).expect("serializable");
                }
                Command::Boundary { u, v, .. } => {
                    let vv = g.vertex_arg(v)?;
                    r.config["u"] = json!(format!("{u:?}").to_lowercase());
                    r.config["v"] = json!(g.encode(&vv));
                    let delta = GraphFunction::delta(vv);
                    let entries = match u {
                        BoundaryFunction::One => boundary_term_sequence(g, &|_: &G::Vertex| 1.0, &delta, &ex)?,
                        BoundaryFunction::Monopole => {
                            let last = Exhaustion::new(g, root.clone(), &radii[radii.len() - 1..])?;
                            let m = monopole_solve(g, &root, &last, s.limits.tol, s.limits.threshold, cfg)?;
                            boundary_term_sequence(g, &m.solutions[0], &delta, &ex)?
                        }
                        BoundaryFunction::Equilibrium => {
                            let e = equilibrium_potential(g, &ex.largest(), &root, cfg)?;
                            boundary_term_sequence(g, &e.potential, &delta, &ex)?
                        }
                    };
                    clock.lap("boundary");
                    let col = |f: fn(&graphpot::forms::BoundaryTermEntry) -> f64| -> Vec<f64> {
                        entries.iter().map(f).collect()
                    };
                    r.sequences.push(Sequence::new("boundary_term", &radii, &col(|e| e.boundary_term)));
                    r.sequences.push(Sequence::new("window_energy", &radii, &col(|e| e.window_energy)));
                    r.sequences.push(Sequence::new("interior_pairing", &radii, &col(|e| e.interior_pairing)));
                    r.result = serde_json::to_value(&entries).expect("serializable");
                }
                _ => unreachable!("handled above"),
            }
            r
        }
    };
    report.timings = Some(clock.finish());
    Ok(Output::Report(Box::new(report)))
}
