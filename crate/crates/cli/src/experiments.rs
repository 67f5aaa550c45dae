//! One function per experiment kind, each turning a config into tables
//! and a JSON summary.

use qgibbs::adiabatic::{
    find_ta, scaling_fit, AdiabaticProblem, EvolutionOptions, IsingRoute, ParameterPath, ScheduleOptions, TaOptions,
    TaReport,
};
use qgibbs::fit::{linear_fit, LineFit};
use qgibbs::gibbs::{gibbs_distribution, star_critical_beta, star_thermo, ClassicalModel};
use qgibbs::graphs::{build_cycle, build_path, build_star, Graph, DEFAULT_BASIS_CAP};
use qgibbs::indepset::{
    build_is_parent, order_parameter_scan, star_sector_state, star_two_state_model, Boundary, IsParentParams,
};
use qgibbs::ising::phase_diagram_scan;
use qgibbs::markov::{
    glauber_chain, metropolis_is_chain, mixing_time, MixingOptions, MixingReport, MixingTime, StartDistribution, TransitionMatrix,
};
use qgibbs::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{BoundarySpec, ExperimentConfig, ExperimentKind, ModelSpec, Tolerances};
use crate::output::{num, opt, Table};
use crate::schema;

/// Tables in the order of [`ExperimentKind::files`], plus a summary for
/// the manifest.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub summary: Value,
}

pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput> {
    match cfg.kind {
        ExperimentKind::IsingPhaseDiagram => ising_phase_diagram(cfg),
        ExperimentKind::IsingTaScaling => ising_ta_scaling(cfg),
        ExperimentKind::IsChainOrder => is_chain_order(cfg),
        ExperimentKind::IsChainTa => is_chain_ta(cfg),
        ExperimentKind::StarThermo => star_thermo_scan(cfg),
        ExperimentKind::StarSpeedup => star_speedup(cfg),
        ExperimentKind::MixingBound => mixing_bound(cfg, seed),
    }
}

fn sizes_or(cfg: &ExperimentConfig, default: &[usize]) -> Vec<usize> {
    cfg.sizes.as_ref().map(|s| s.values()).unwrap_or_else(|| default.to_vec())
}

fn grid_or(grid: &Option<crate::config::Grid>, start: f64, stop: f64, points: usize) -> Vec<f64> {
    grid.as_ref().map(|g| g.values()).unwrap_or_else(|| {
        crate::config::Grid::Linspace { start, stop, points }.values()
    })
}

fn int(x: Option<u64>) -> String {
    x.map(|t| t.to_string()).unwrap_or_default()
}

/// Mixing steps, `None` when the step cap was hit.
fn steps(r: &MixingReport) -> Option<u64> {
    match r.t_mix {
        MixingTime::Steps(t) => Some(t),
        MixingTime::CapExceeded(_) => None,
    }
}

fn fit_json(fit: &LineFit) -> Value {
    json!({ "slope": fit.slope, "slope_stderr": fit.slope_stderr, "intercept": fit.intercept })
}

pub fn ta_options(t: &Tolerances) -> TaOptions {
    let mut o = TaOptions::default();
    if let Some(f) = t.target_fidelity {
        o.target_fidelity = f;
    }
    if let Some(r) = t.bisection_rel_tol {
        o.rel_tol = r;
    }
    if let Some(m) = t.max_time {
        o.max_time = m;
    }
    o
}

pub fn evolution_options(t: &Tolerances) -> EvolutionOptions {
    let mut o = EvolutionOptions::default();
    if let Some(s) = t.step_tol {
        o.step_tol = s;
    }
    o
}

pub fn mixing_options(t: &Tolerances) -> MixingOptions {
    let mut o = MixingOptions::default();
    if let Some(x) = t.tv_threshold {
        o.threshold = x;
    }
    if let Some(w) = t.worst_case_limit {
        o.worst_case_limit = w;
    }
    o
}

fn cap(t: &Tolerances) -> usize {
    t.basis_cap.unwrap_or(DEFAULT_BASIS_CAP)
}

fn ising_phase_diagram(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let xs = grid_or(&cfg.x, 0.0, 3.0, 31);
    let ys = grid_or(&cfg.y, -1.5, 2.5, 41);
    let grid: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let mut table = Table::new("ising_phase.csv", schema::ISING_PHASE);
    for n in sizes_or(cfg, &[200]) {
        for p in phase_diagram_scan(&grid, n)? {
            table.push(vec![
                num(p.j1_over_h),
                num(p.j2_over_h),
                p.n.to_string(),
                num(p.gap),
                p.phase.label().to_string(),
            ]);
        }
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        summary: json!({ "points": grid.len() }),
    })
}

/// `t_a` search along each path and size, with per-run and summary tables
/// and power-law fits of `t_a` against size.
fn ta_scan<F>(cfg: &ExperimentConfig, files: [&str; 2], labels: &[String], sizes: &[usize], path_for: F) -> Result<ExperimentOutput>
where
    F: Fn(&str, usize) -> Result<ParameterPath>,
{
    let (ta_opts, evo) = (ta_options(&cfg.tolerances), evolution_options(&cfg.tolerances));
    let mut runs = Table::new(files[0], schema::TA_RUNS);
    let mut summary = Table::new(files[1], schema::TA_SUMMARY);
    let mut fits = serde_json::Map::new();
    let mut reports = serde_json::Map::new();
    for label in labels {
        let (mut ns, mut ts) = (Vec::new(), Vec::new());
        let mut per_size = Vec::new();
        for &n in sizes {
            let path = path_for(label, n)?;
            let family = path.family().label();
            let path_label = path.label.clone();
            let problem = AdiabaticProblem::with_cap(path, cap(&cfg.tolerances))?;
            let report: TaReport = find_ta(&problem, &ScheduleOptions::default(), &ta_opts, &evo)?;
            for e in report.sorted_evaluations() {
                runs.push(vec![
                    family.to_string(),
                    path_label.clone(),
                    n.to_string(),
                    num(e.epsilon),
                    num(e.t_tot),
                    num(e.fidelity),
                    num(e.norm_drift),
                ]);
            }
            summary.push(vec![path_label.clone(), n.to_string(), opt(report.t_a())]);
            if let Some(t) = report.t_a() {
                ns.push(n as f64);
                ts.push(t);
            }
            per_size.push(json!({
                "n": n,
                "t_a": report.t_a(),
                "unit_time": report.unit_time,
                "min_gap": report.min_gap,
                "fidelity_monotone": report.fidelity_is_monotone(),
            }));
        }
        let key = path_for(label, sizes[0])?.label;
        if ns.len() >= 4 {
            fits.insert(key.clone(), fit_json(&scaling_fit(&ns, &ts)?));
        }
        reports.insert(key, Value::Array(per_size));
    }
    Ok(ExperimentOutput {
        tables: vec![runs, summary],
        summary: json!({ "exponent_fits": fits, "runs": reports }),
    })
}

fn ising_ta_scaling(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let labels = cfg
        .paths
        .clone()
        .unwrap_or_else(|| IsingRoute::ALL.iter().map(|r| r.label().to_string()).collect());
    let sizes = sizes_or(cfg, &[6, 8, 10, 12]);
    ta_scan(cfg, ["ising_ta_runs.csv", "ising_ta.csv"], &labels, &sizes, |label, n| {
        let route = IsingRoute::from_label(label).ok_or_else(|| Error::Domain(format!("unknown Ising path `{label}`")))?;
        ParameterPath::ising(route, n)
    })
}

/// The chain's two paths, accepted as `i`/`ii` or by their full labels.
pub fn chain_path(label: &str, n: usize) -> Result<ParameterPath> {
    match label {
        "i" | "is-path-i" => Ok(ParameterPath::chain_beta(n)),
        "ii" | "is-path-ii" => Ok(ParameterPath::chain_crystal(n)),
        _ => Err(Error::Domain(format!("unknown chain path `{label}`"))),
    }
}

fn is_chain_ta(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let labels = cfg.paths.clone().unwrap_or_else(|| vec!["i".into(), "ii".into()]);
    let sizes = sizes_or(cfg, &[9, 11, 13, 15]);
    ta_scan(cfg, ["is_ta_runs.csv", "is_ta.csv"], &labels, &sizes, chain_path)
}

pub fn star_path(label: &str, b: usize) -> Result<ParameterPath> {
    match label {
        "beta" | "star-beta" => Ok(ParameterPath::star_beta(b)),
        "speedup" | "star-speedup" => Ok(ParameterPath::star_speedup(b)),
        _ => Err(Error::Domain(format!("unknown star path `{label}`"))),
    }
}

fn is_chain_order(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let omegas = grid_or(&cfg.x, 0.05, 1.5, 30);
    let ves = grid_or(&cfg.y, -6.0, 2.0, 33);
    let grid: Vec<(f64, f64)> = ves.iter().flat_map(|&v| omegas.iter().map(move |&o| (o, v))).collect();
    let boundary = match cfg.boundary.unwrap_or(BoundarySpec::Open) {
        BoundarySpec::Open => Boundary::Open,
        BoundarySpec::Periodic => Boundary::Periodic,
    };
    let mut table = Table::new("is_order.csv", schema::IS_ORDER);
    let mut counts = serde_json::Map::new();
    for n in sizes_or(cfg, &[16]) {
        for p in order_parameter_scan(n, &grid, boundary)? {
            let c = counts.entry(p.phase.label()).or_insert(json!(0));
            *c = json!(c.as_u64().unwrap_or(0) + 1);
            table.push(vec![
                num(p.omega_over_vg),
                num(p.ve_over_vg),
                p.n.to_string(),
                num(p.order_parameter()),
                num(p.gap),
                num(p.m2),
                num(p.m3),
                p.phase.label().to_string(),
            ]);
        }
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        summary: json!({ "points_per_size": grid.len(), "phase_counts": counts }),
    })
}

fn star_thermo_scan(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let betas = grid_or(&cfg.betas, 0.0, 1.5, 301);
    let mut table = Table::new("star_entropy.csv", schema::STAR_ENTROPY);
    for b in sizes_or(cfg, &[2, 4, 8, 16, 32]) {
        if b == 0 {
            return Err(Error::InvalidSize {
                what: "star branch count",
                value: b,
            });
        }
        for &beta in &betas {
            let t = star_thermo(b, beta);
            table.push(vec![
                b.to_string(),
                num(beta),
                num(t.entropy / b as f64),
                num(t.center_occupation),
            ]);
        }
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        summary: json!({ "critical_beta": star_critical_beta() }),
    })
}

/// `⟨ψ₀|H|ψ₁⟩` of the star parent on the full basis, center tunnelling 1.
pub fn star_full_coupling(b: usize, beta: f64) -> Result<f64> {
    let g = build_star(b)?;
    let mut params = IsParentParams::from_beta(&g, beta)?;
    params.omega[0] = 1.0;
    let h = build_is_parent(&g, &params)?;
    let (_, psi0) = star_sector_state(b, beta, false)?;
    let (_, psi1) = star_sector_state(b, beta, true)?;
    let h1 = h.matrix().matvec(&psi1);
    Ok(-psi0.iter().zip(&h1).map(|(a, b)| a * b).sum::<f64>())
}

fn star_speedup(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let sizes = sizes_or(cfg, &[2, 3, 4, 5, 6]);
    let labels = cfg.paths.clone().unwrap_or_else(|| vec!["beta".into(), "speedup".into()]);
    let mut out = ta_scan(cfg, ["star_ta_runs.csv", "star_ta.csv"], &labels, &sizes, star_path)?;
    let betas = cfg.betas.as_ref().map(|g| g.values()).unwrap_or_else(|| vec![star_critical_beta()]);
    let mopts = mixing_options(&cfg.tolerances);
    let mut classical = Table::new("star_classical.csv", schema::STAR_CLASSICAL);
    let mut mixing_fits = serde_json::Map::new();
    for &beta in &betas {
        let (mut bs, mut ln_t) = (Vec::new(), Vec::new());
        for &b in &sizes {
            let model = ClassicalModel::independent_set(build_star(b)?, cap(&cfg.tolerances))?;
            let chain = metropolis_is_chain(&model, beta)?;
            let p = gibbs_distribution(&model, beta)?;
            let report = mixing_time(&chain, &p, &StartDistribution::WorstCase, &mopts)?;
            let steps = steps(&report);
            if let Some(t) = steps.filter(|&t| t > 0) {
                bs.push(b as f64);
                ln_t.push((t as f64).ln());
            }
            classical.push(vec![
                b.to_string(),
                num(beta),
                int(steps),
                opt(report.t_m()),
                num(report.parent_gap),
                num(star_two_state_model(b, beta, 1.0)?.coupling()),
                num(star_full_coupling(b, beta)?),
            ]);
        }
        if bs.len() >= 2 {
            mixing_fits.insert(num(beta), fit_json(&linear_fit(&bs, &ln_t)?));
        }
    }
    out.tables.push(classical);
    // log-linear slopes in b, for comparing quantum and classical growth rates
    let mut ta_slopes = serde_json::Map::new();
    let summary_table = &out.tables[1];
    for label in &labels {
        let key = star_path(label, sizes[0])?.label;
        let (bs, lt): (Vec<f64>, Vec<f64>) = summary_table
            .rows
            .iter()
            .filter(|r| r[0] == key && !r[2].is_empty())
            .map(|r| (r[1].parse::<f64>().unwrap_or(f64::NAN), r[2].parse::<f64>().unwrap_or(f64::NAN).ln()))
            .unzip();
        if bs.len() >= 2 {
            ta_slopes.insert(key, fit_json(&linear_fit(&bs, &lt)?));
        }
    }
    if let Value::Object(m) = &mut out.summary {
        m.insert("log_ta_vs_b".into(), Value::Object(ta_slopes));
        m.insert("log_tmix_vs_b".into(), Value::Object(mixing_fits));
    }
    Ok(out)
}

/// Classical model and its chain: Glauber on the Ising ring, Metropolis
/// for independent sets. Random graphs are drawn from `seed`.
pub fn build_instance(model: ModelSpec, n: usize, beta: f64, seed: u64, basis_cap: usize) -> Result<(ClassicalModel, TransitionMatrix)> {
    let m = match model {
        ModelSpec::Ising => ClassicalModel::ising(build_cycle(n)?, basis_cap)?,
        ModelSpec::IsChain => ClassicalModel::independent_set(build_path(n)?, basis_cap)?,
        ModelSpec::Star => ClassicalModel::independent_set(build_star(n)?, basis_cap)?,
        ModelSpec::RandomIs => ClassicalModel::independent_set(random_graph(n, 0.4, seed)?, basis_cap)?,
    };
    let chain = match model {
        ModelSpec::Ising => glauber_chain(&m, beta)?,
        _ => metropolis_is_chain(&m, beta)?,
    };
    Ok((m, chain))
}

/// Erdős–Rényi graph with weights uniform in `[0.5, 1.5)`.
pub fn random_graph(n: usize, edge_probability: f64, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < edge_probability {
                edges.push((u, v));
            }
        }
    }
    let weights = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    Graph::new(n, &edges, weights)
}

fn mixing_bound(cfg: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput> {
    let models = cfg
        .models
        .clone()
        .unwrap_or_else(|| vec![ModelSpec::Ising, ModelSpec::IsChain, ModelSpec::Star, ModelSpec::RandomIs]);
    let sizes = sizes_or(cfg, &[3, 4, 5, 6]);
    let betas = grid_or(&cfg.betas, 0.0, 0.0, 0);
    let betas = if betas.is_empty() { vec![0.0, 0.3, 0.5, 1.0, 2.0, 3.0] } else { betas };
    let samples = cfg.samples.unwrap_or(2).max(1);
    let p_edge = cfg.edge_probability.unwrap_or(0.4);
    let mopts = mixing_options(&cfg.tolerances);
    let mut table = Table::new("mixing_bound.csv", schema::MIXING_BOUND);
    let (mut checked, mut violations) = (0usize, 0usize);
    for &model in &models {
        for &n in &sizes {
            let draws = if model == ModelSpec::RandomIs { samples } else { 1 };
            for k in 0..draws {
                let instance_seed = seed ^ ((n as u64) << 32) ^ k as u64;
                let graph = match model {
                    ModelSpec::Ising => build_cycle(n)?,
                    ModelSpec::IsChain => build_path(n)?,
                    ModelSpec::Star => build_star(n)?,
                    ModelSpec::RandomIs => random_graph(n, p_edge, instance_seed)?,
                };
                let instance = if model == ModelSpec::RandomIs {
                    format!("seed-{instance_seed}")
                } else {
                    model.label().to_string()
                };
                let m = match model {
                    ModelSpec::Ising => ClassicalModel::ising(graph, cap(&cfg.tolerances))?,
                    _ => ClassicalModel::independent_set(graph, cap(&cfg.tolerances))?,
                };
                for &beta in &betas {
                    let chain = match model {
                        ModelSpec::Ising => glauber_chain(&m, beta)?,
                        _ => metropolis_is_chain(&m, beta)?,
                    };
                    let p = gibbs_distribution(&m, beta)?;
                    let r = mixing_time(&chain, &p, &StartDistribution::WorstCase, &mopts)?;
                    let holds = r.bound_holds();
                    checked += 1;
                    violations += usize::from(holds == Some(false));
                    table.push(vec![
                        model.label().to_string(),
                        instance.clone(),
                        m.sites().to_string(),
                        num(beta),
                        m.basis().len().to_string(),
                        num(r.parent_gap),
                        int(steps(&r)),
                        opt(r.t_m()),
                        num(r.lower_bound()),
                        holds.map(|h| h.to_string()).unwrap_or_default(),
                    ]);
                }
            }
        }
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        summary: json!({
            "instances": checked,
            "violations": violations,
            "tv_threshold": mopts.threshold,
        }),
    })
}
