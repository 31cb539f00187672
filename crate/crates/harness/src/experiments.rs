//! Experiment runners. Each returns typed rows; all randomness flows from the config seed.
//!
//! Seed layout: the main sample stream is `seed.derive(0)`, further derived by `n`-grid
//! index, `λ`-grid index and replicate. Auxiliary `ρ̂` curves use `seed.derive(1)` (on the
//! experiment's own `λ` grid) and `seed.derive(2)` (on the coarse grid that locates `λ̂*`).
//! Experiments with a single model draw replicate `r` from `seed.derive(r)`.

use std::time::Instant;

use cerlab::admissibility::{check_admissible, default_constants, AdmissibilityConstants, Condition, Status};
use cerlab::density::{densest_subgraph_exact, rho_curve, rho_inverse, LambdaStar, RhoCurve};
use cerlab::inference::posterior::posterior_w_argmax;
use cerlab::inference::{
    exact_posterior, map_estimator, reasonable_candidate_check, reasonable_candidate_search, tv_exact, tv_mc,
    EstimatorConfig,
};
use cerlab::model::{overlap, sample_correlated, sample_gnp};
use cerlab::moments::{orbit_moment_routes, simulate_orbit_edges, OrbitClass};
use cerlab::orbits::orbit_census;
use cerlab::stats::monte_carlo_mean;
use cerlab::{par, Bijection, CorrelatedSample, ModelParams, RandomSeed};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::HarnessError;
use crate::records::*;

/// `|z|` above which a Monte Carlo comparison counts as failed.
pub const Z_FAIL: f64 = 4.0;
/// Largest relative disagreement allowed between two closed-form routes.
pub const ROUTE_TOL: f64 = 1e-9;
/// Grid on which `ρ̂` is inverted to place an automatic sweep grid.
pub const COARSE_LAMBDA_GRID: [f64; 15] = [
    1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0,
];
/// Default partial-recovery fraction when none is configured.
pub const DEFAULT_DELTA: f64 = 0.1;

/// Result of a run: the output document plus human-readable summary lines and an
/// optional failed statistical check.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub body: String,
    pub summary: Vec<String>,
    pub failed_check: Option<String>,
}

fn main_stream(seed: u64) -> RandomSeed {
    RandomSeed(seed).derive(0)
}

fn sample_seed(config: &ExperimentConfig, n_idx: usize, l_idx: usize, r: usize) -> RandomSeed {
    main_stream(config.seed)
        .derive(n_idx as u64)
        .derive(l_idx as u64)
        .derive(r as u64)
}

fn model(config: &ExperimentConfig) -> Result<ModelParams, HarnessError> {
    config
        .model
        .ok_or_else(|| HarnessError::Config("model parameters required".into()))
}

fn grid<T: Clone>(g: &Option<Vec<T>>, name: &str) -> Result<Vec<T>, HarnessError> {
    g.clone()
        .ok_or_else(|| HarnessError::Config(format!("{name} required")))
}

fn alpha(config: &ExperimentConfig) -> Result<f64, HarnessError> {
    config
        .alpha
        .ok_or_else(|| HarnessError::Config("alpha required".into()))
}

/// Runs `f(flat)` for each `(λ index, replicate)` pair, in parallel, returning results in order.
fn over_grid<T: Send>(lambdas: usize, replicates: usize, f: impl Fn(usize, usize) -> T + Sync + Send) -> Vec<T> {
    par::map_indexed(lambdas * replicates, |i| f(i / replicates, i % replicates))
}

#[derive(Serialize)]
struct SampleDocument<'a> {
    params: &'a ModelParams,
    lambda: f64,
    pi_star: &'a Bijection,
    g_edges: Vec<(usize, usize)>,
    g_bar_edges: Vec<(usize, usize)>,
}

pub fn sample_document(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let params = model(config)?;
    let s = sample_correlated(&params, RandomSeed(config.seed)).map_err(HarnessError::run)?;
    let doc = SampleDocument {
        params: &params,
        lambda: params.lambda(),
        pi_star: &s.pi_star,
        g_edges: s.g.edges().collect(),
        g_bar_edges: s.g_bar.edges().collect(),
    };
    Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
}

/// Edge-orbit census of `φ = π⁻¹∘π*` on all pairs, for a uniform `π*` and a uniform `π`.
pub fn run_orbits(config: &ExperimentConfig) -> Result<Vec<OrbitRecord>, HarnessError> {
    let n = model(config)?.n;
    let all: Vec<usize> = (0..n).collect();
    let per_rep = par::map_indexed(config.replicates, |r| {
        let mut rng = RandomSeed(config.seed).derive(r as u64).rng();
        let pi_star = Bijection::random(n, &mut rng);
        let pi = Bijection::random(n, &mut rng);
        orbit_census(&pi_star, &pi, &all).map(|c| (r, c))
    });
    let mut rows = Vec::new();
    for rep in per_rep {
        let (r, census) = rep.map_err(HarnessError::run)?;
        rows.extend(census.rows().into_iter().map(|row| OrbitRecord {
            replicate: r,
            length: row.length,
            kind: row.kind.as_str(),
            special: row.special,
            count: row.count,
        }));
    }
    Ok(rows)
}

/// Closed-form orbit moments against Monte Carlo (`replicates` draws per cell), plus the
/// agreement of the two closed-form routes. Cell `j` of the grid draws from `seed.derive(j)`.
pub fn run_moment_verification(config: &ExperimentConfig) -> Result<Vec<MomentRecord>, HarnessError> {
    let ks = grid(&config.k_grid, "k_grid")?;
    let ps = grid(&config.p_grid, "p_grid")?;
    let ss = grid(&config.s_grid, "s_grid")?;
    let thetas = grid(&config.theta_grid, "theta_grid")?;
    let mut cells = Vec::new();
    for class in [OrbitClass::Cycle, OrbitClass::Chain] {
        for &k in &ks {
            for &p in &ps {
                for &s in &ss {
                    for &theta in &thetas {
                        cells.push((class, k, p, s, theta));
                    }
                }
            }
        }
    }
    let seed = RandomSeed(config.seed);
    let mut rows = Vec::with_capacity(cells.len());
    for (j, &(class, k, p, s, theta)) in cells.iter().enumerate() {
        let (ln_closed, ln_other) = orbit_moment_routes(class, k, theta, p, s).map_err(HarnessError::run)?;
        let closed = ln_closed.exp();
        let acc = monte_carlo_mean(config.replicates as u64, seed.derive(j as u64), |rng| {
            (theta * simulate_orbit_edges(class, k, p, s, rng) as f64).exp()
        });
        let (mean, se) = (acc.mean(), acc.stderr());
        let z = if se > 0.0 {
            (mean - closed) / se
        } else if (mean - closed).abs() <= 1e-12 * closed {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(MomentRecord {
            class: class.as_str(),
            k,
            p,
            s,
            theta,
            closed_form: closed,
            mc_mean: mean,
            mc_stderr: se,
            z,
            route_rel_diff: (ln_closed - ln_other).exp_m1().abs(),
        });
    }
    Ok(rows)
}

pub fn moment_failures(rows: &[MomentRecord]) -> Vec<String> {
    rows.iter()
        .filter(|r| !(r.z.abs() <= Z_FAIL) || r.route_rel_diff > ROUTE_TOL)
        .map(|r| {
            format!(
                "{} k={} p={} s={} theta={}: z={:.3}, route diff={:.2e}",
                r.class, r.k, r.p, r.s, r.theta, r.z, r.route_rel_diff
            )
        })
        .collect()
}

/// Densest-subgraph density and size of `G(n, λ/n)` for every grid point and replicate.
/// Replicates share seeds with [`run_rho_curve`].
pub fn run_density(config: &ExperimentConfig) -> Result<Vec<DensityRecord>, HarnessError> {
    let lambdas = grid(&config.lambda_grid, "lambda_grid")?;
    let mut rows = Vec::new();
    for (a, &n) in grid(&config.n_grid, "n_grid")?.iter().enumerate() {
        let curve_seed = main_stream(config.seed).derive(a as u64);
        let results = over_grid(lambdas.len(), config.replicates, |j, r| {
            let lambda = lambdas[j];
            let g = sample_gnp(
                n,
                lambda / n as f64,
                &mut curve_seed.derive(j as u64).derive(r as u64).rng(),
            );
            densest_subgraph_exact(&g).map(|d| DensityRecord {
                n,
                lambda,
                replicate: r,
                density: d.density_f64(),
                size: d.best_subset.len(),
            })
        });
        for row in results {
            rows.push(row.map_err(HarnessError::run)?);
        }
    }
    Ok(rows)
}

/// `ρ̂` curves, one per `n` in the grid, on the main stream.
pub fn rho_curves(config: &ExperimentConfig) -> Result<Vec<RhoCurve>, HarnessError> {
    let lambdas = grid(&config.lambda_grid, "lambda_grid")?;
    grid(&config.n_grid, "n_grid")?
        .iter()
        .enumerate()
        .map(|(a, &n)| {
            rho_curve(
                &lambdas,
                n,
                config.replicates,
                main_stream(config.seed).derive(a as u64),
            )
            .map_err(HarnessError::run)
        })
        .collect()
}

pub fn rho_rows(curves: &[RhoCurve]) -> Vec<RhoRecord> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().enumerate().map(move |(j, pt)| RhoRecord {
                n: pt.n,
                lambda: pt.lambda,
                replicates: pt.replicates,
                rho_raw: c.rho_raw[j],
                rho_hat: c.rho_hat[j],
                stderr: pt.stderr,
                size_q05: pt.size_q05,
                size_q50: pt.size_q50,
            })
        })
        .collect()
}

pub fn run_rho_curve(config: &ExperimentConfig) -> Result<Vec<RhoRecord>, HarnessError> {
    Ok(rho_rows(&rho_curves(config)?))
}

/// `λ̂* = ρ̂⁻¹(1/α)` from a curve on [`COARSE_LAMBDA_GRID`].
pub fn estimate_lambda_star(
    alpha: f64,
    n: usize,
    replicates: usize,
    seed: RandomSeed,
) -> Result<LambdaStar, HarnessError> {
    let grid: Vec<f64> = COARSE_LAMBDA_GRID.iter().copied().filter(|&l| l < n as f64).collect();
    let curve = rho_curve(&grid, n, replicates, seed).map_err(HarnessError::run)?;
    rho_inverse(1.0 / alpha, &curve).map_err(HarnessError::run)
}

/// `points` evenly spaced values on `[max(1.2, λ̂*−1), λ̂*+1.5]`.
pub fn sweep_grid(lambda_star: f64, points: usize) -> Vec<f64> {
    let lo = (lambda_star - 1.0).max(1.2);
    let hi = lambda_star + 1.5;
    if points <= 1 {
        return vec![hi];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Estimator configuration from overrides, with `ρ̂`, `ĉ_λ`, `η` supplied by the caller when
/// the overrides leave them unset.
pub fn estimator_config(config: &ExperimentConfig, rho_hat: f64, c_hat: f64, eta: f64, seed: u64) -> EstimatorConfig {
    let o = &config.estimator;
    let mut e = EstimatorConfig::new(
        o.rho_hat.unwrap_or(rho_hat),
        o.c_lambda_hat.unwrap_or(c_hat),
        o.eta.unwrap_or(eta),
    );
    e.delta = o.delta.unwrap_or(DEFAULT_DELTA);
    if let Some(s) = o.strategy {
        e.strategy = s;
    }
    if let Some(b) = o.budget {
        e.budget = b;
    }
    if let Some(r) = o.restarts {
        e.restarts = r;
    }
    e.seed = seed;
    e
}

/// `η = (ρ̂ − 1/α)/8`, half of the largest admissible value, or `None` when `ρ̂ ≤ 1/α`
/// and the admissible range is empty.
pub fn default_eta(rho_hat: f64, alpha: f64) -> Option<f64> {
    let gap = rho_hat - 1.0 / alpha;
    (gap > 0.0).then_some(gap / 8.0)
}

fn overlap_fraction(a: &Bijection, b: &Bijection) -> f64 {
    overlap(a, b).expect("same size") as f64 / a.n() as f64
}

/// MAP (and, when `ρ̂`, `ĉ_λ`, `η` are configured, the reasonable-candidate search) on
/// `replicates` correlated samples.
pub fn run_estimate(config: &ExperimentConfig) -> Result<Vec<EstimateRecord>, HarnessError> {
    let params = model(config)?;
    let o = &config.estimator;
    let with_candidate = o.rho_hat.is_some() && o.c_lambda_hat.is_some() && o.eta.is_some();
    let per_rep = par::map_indexed(config.replicates, |r| -> Result<Vec<EstimateRecord>, HarnessError> {
        let seed = RandomSeed(config.seed).derive(r as u64);
        let s = sample_correlated(&params, seed).map_err(HarnessError::run)?;
        let ec = estimator_config(config, 1.0, 1.0, 0.0, seed.derive(1).0);
        let map = map_estimator(&s.g, &s.g_bar, &params, &ec).map_err(HarnessError::run)?;
        let accepted = if with_candidate {
            Some(
                reasonable_candidate_check(&map.pi, &s.g, &s.g_bar, &ec)
                    .map_err(HarnessError::run)?
                    .accepted,
            )
        } else {
            None
        };
        let mut rows = vec![EstimateRecord {
            replicate: r,
            n: params.n,
            estimator: "map",
            overlap_fraction: overlap_fraction(&map.pi, &s.pi_star),
            common_edges: map.common_edges,
            exhaustive: map.exhaustive,
            budget_exhausted: map.budget_exhausted,
            accepted,
        }];
        if with_candidate {
            let found = reasonable_candidate_search(&s.g, &s.g_bar, &ec).map_err(HarnessError::run)?;
            let (ov, common, exhaustive) = match &found {
                Some(c) => (
                    overlap_fraction(&c.pi, &s.pi_star),
                    cerlab::model::common_edges(&s.g, &s.g_bar, &c.pi),
                    c.exhaustive,
                ),
                None => (0.0, 0, params.n <= cerlab::inference::estimators::EXHAUSTIVE_MAX_N),
            };
            rows.push(EstimateRecord {
                replicate: r,
                n: params.n,
                estimator: "candidate",
                overlap_fraction: ov,
                common_edges: common,
                exhaustive,
                budget_exhausted: false,
                accepted: Some(found.is_some()),
            });
        }
        Ok(rows)
    });
    let mut rows = Vec::new();
    for rep in per_rep {
        rows.extend(rep?);
    }
    Ok(rows)
}

/// Exact posterior summaries (`n ≤ 7`) on `replicates` correlated samples.
pub fn run_posterior_study(config: &ExperimentConfig) -> Result<Vec<PosteriorRecord>, HarnessError> {
    let params = model(config)?;
    let delta = config.estimator.delta.unwrap_or(DEFAULT_DELTA);
    let per_rep = par::map_indexed(config.replicates, |r| -> Result<PosteriorRecord, HarnessError> {
        let s = sample_correlated(&params, RandomSeed(config.seed).derive(r as u64)).map_err(HarnessError::run)?;
        let table = exact_posterior(&s.g, &s.g_bar, &params).map_err(HarnessError::run)?;
        let (w, _) = posterior_w_argmax(&table, delta);
        let mode = table
            .entries
            .iter()
            .fold(None::<&(Bijection, f64)>, |best, e| match best {
                Some(b) if b.1 >= e.1 => Some(b),
                _ => Some(e),
            })
            .expect("nonempty table");
        Ok(PosteriorRecord {
            replicate: r,
            n: params.n,
            posterior_at_truth: table.prob(&s.pi_star),
            max_atom: table.max_atom(),
            w,
            mode_overlap: overlap_fraction(&mode.0, &s.pi_star),
        })
    });
    per_rep.into_iter().collect()
}

/// Monte Carlo TV (`n ≤ 7`) and, for `n ≤ 4`, the exact value. Returns the rows and a
/// failure message when both are available and disagree by more than [`Z_FAIL`] stderr.
pub fn run_tv(config: &ExperimentConfig) -> Result<(Vec<TvRecord>, Option<String>), HarnessError> {
    let params = model(config)?;
    let mc = tv_mc(&params, config.replicates, RandomSeed(config.seed)).map_err(HarnessError::run)?;
    let mut rows = vec![TvRecord {
        n: params.n,
        p: params.p,
        s: params.s,
        method: "monte_carlo",
        estimate: mc.estimate,
        stderr: mc.stderr,
        replicates: mc.replicates,
    }];
    let mut failure = None;
    if params.n <= cerlab::inference::tv::TV_EXACT_MAX_N {
        let exact = tv_exact(&params).map_err(HarnessError::run)?;
        rows.insert(
            0,
            TvRecord {
                n: params.n,
                p: params.p,
                s: params.s,
                method: "exact",
                estimate: exact,
                stderr: 0.0,
                replicates: 0,
            },
        );
        let gap = (exact - mc.estimate).abs();
        if gap > Z_FAIL * mc.stderr {
            failure = Some(format!(
                "exact TV {exact} vs Monte Carlo {} ± {}",
                mc.estimate, mc.stderr
            ));
        }
    }
    Ok((rows, failure))
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Undecided => "undecided",
    }
}

/// Admissibility constants for `(α, ρ̂, n)` with the configured overrides applied.
pub fn admissibility_constants(
    config: &ExperimentConfig,
    alpha: f64,
    rho_hat: f64,
    n: usize,
) -> Result<AdmissibilityConstants, HarnessError> {
    let o = &config.admissibility;
    let mut c = default_constants(alpha, o.rho_hat.unwrap_or(rho_hat), n).map_err(HarnessError::run)?;
    if let Some(v) = o.degree_cap {
        c.degree_cap = v;
    }
    if let Some(v) = o.small_set_cap {
        c.small_set_cap = v;
    }
    if let Some(v) = o.tiny_component_cap {
        c.tiny_component_cap = v;
    }
    if let Some(v) = o.cycle_len_cap {
        c.cycle_len_cap = v;
    }
    if let Some(v) = o.search_budget {
        c.search_budget = v;
    }
    c.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(c)
}

/// `ρ̂` on the experiment's own `λ` grid from the auxiliary stream, unless overridden.
pub fn aux_curve(config: &ExperimentConfig, lambdas: &[f64], n_idx: usize, n: usize) -> Result<RhoCurve, HarnessError> {
    let seed = RandomSeed(config.seed).derive(1).derive(n_idx as u64);
    rho_curve(lambdas, n, config.rho_replicates(), seed).map_err(HarnessError::run)
}

/// The event `𝒢` on `G(n, λ/n)` samples with default constants at `(α, ρ̂(λ), n)`.
pub fn run_admissibility(config: &ExperimentConfig) -> Result<Vec<AdmissibilityRecord>, HarnessError> {
    let alpha = alpha(config)?;
    let lambdas = grid(&config.lambda_grid, "lambda_grid")?;
    let mut rows = Vec::new();
    for (a, &n) in grid(&config.n_grid, "n_grid")?.iter().enumerate() {
        let rho_hats = match config.admissibility.rho_hat {
            Some(r) => vec![r; lambdas.len()],
            None => aux_curve(config, &lambdas, a, n)?.rho_hat,
        };
        let consts = rho_hats
            .iter()
            .map(|&r| admissibility_constants(config, alpha, r.max(1.0), n))
            .collect::<Result<Vec<_>, _>>()?;
        let results = over_grid(lambdas.len(), config.replicates, |j, r| {
            let seed = sample_seed(config, a, j, r);
            let h = sample_gnp(n, lambdas[j] / n as f64, &mut seed.rng());
            let report = check_admissible(&h, &consts[j]);
            let st = |c: Condition| status_str(report.get(c).status);
            AdmissibilityRecord {
                n,
                lambda: lambdas[j],
                replicate: r,
                seed: seed.0,
                admissible: match report.admissible() {
                    Some(true) => "pass",
                    Some(false) => "fail",
                    None => "undecided",
                },
                global_density: st(Condition::GlobalDensity),
                small_set_density: st(Condition::SmallSetDensity),
                max_degree: st(Condition::MaxDegree),
                local_unicyclic: st(Condition::LocalUnicyclic),
                cycle_counts: st(Condition::CycleCounts),
                observed_max_degree: h.max_degree(),
                witnesses_ok: report.witnesses_revalidate(&h, &consts[j]),
            }
        });
        rows.extend(results);
    }
    Ok(rows)
}

/// The sweep's `λ` grid for size `n` (index `n_idx`): the configured grid, or
/// `sweep_points` values around `λ̂*` located on the coarse grid.
pub fn sweep_lambdas(config: &ExperimentConfig, n_idx: usize, n: usize) -> Result<Vec<f64>, HarnessError> {
    if let Some(g) = &config.lambda_grid {
        return Ok(g.clone());
    }
    let points = config
        .sweep_points
        .ok_or_else(|| HarnessError::Config("threshold-sweep needs lambda_grid or sweep_points".into()))?;
    let seed = RandomSeed(config.seed).derive(2).derive(n_idx as u64);
    let star = estimate_lambda_star(alpha(config)?, n, config.rho_replicates(), seed)?;
    Ok(sweep_grid(star.estimate, points))
}

fn sweep_replicate(
    config: &ExperimentConfig,
    sample: &CorrelatedSample,
    estimator: &'static str,
    ec: Option<&EstimatorConfig>,
) -> Result<(f64, bool), HarnessError> {
    let (g, g_bar) = (&sample.g, &sample.g_bar);
    let pi = match estimator {
        "truth" => sample.pi_star.clone(),
        "map" => {
            let base = estimator_config(config, 1.0, 1.0, 0.0, 0);
            let ec = ec.unwrap_or(&base);
            map_estimator(g, g_bar, &sample.params, ec)
                .map_err(HarnessError::run)?
                .pi
        }
        other => return Err(HarnessError::Config(format!("unknown estimator {other}"))),
    };
    let accepted = match ec {
        Some(ec) => {
            reasonable_candidate_check(&pi, g, g_bar, ec)
                .map_err(HarnessError::run)?
                .accepted
        }
        None => false,
    };
    Ok((overlap_fraction(&pi, &sample.pi_star), accepted))
}

/// Finite-`n` threshold sweep: per `(λ, n, replicate)`, a correlated sample with
/// `p = n^{-α}`, each configured estimator, and its reasonable-candidate verdict with
/// `ρ̂(λ)`, `ĉ_λ` from an auxiliary curve at the same `n`. Failed replicates are reported
/// in the second return value and skipped.
pub fn run_threshold_sweep(config: &ExperimentConfig) -> Result<(Vec<SweepRecord>, Vec<String>), HarnessError> {
    let alpha = alpha(config)?;
    let names: Vec<&'static str> = match &config.estimator.estimators {
        Some(list) => list.iter().map(|n| if n == "map" { "map" } else { "truth" }).collect(),
        None => vec!["truth"],
    };
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (a, &n) in grid(&config.n_grid, "n_grid")?.iter().enumerate() {
        let lambdas = sweep_lambdas(config, a, n)?;
        let curve = aux_curve(config, &lambdas, a, n)?;
        let configs: Vec<Option<EstimatorConfig>> = lambdas
            .iter()
            .enumerate()
            .map(|(j, &l)| {
                let rho = curve.rho_hat[j];
                let eta = config.estimator.eta.or_else(|| default_eta(rho, alpha))?;
                Some(estimator_config(config, rho, curve.c_lambda(l), eta, 0))
            })
            .collect();
        let results = over_grid(lambdas.len(), config.replicates, |j, r| {
            let seed = sample_seed(config, a, j, r);
            let params = ModelParams::from_lambda_alpha(n, lambdas[j], alpha).map_err(HarnessError::run)?;
            let start = Instant::now();
            let sample = sample_correlated(&params, seed).map_err(HarnessError::run)?;
            let mut out = Vec::new();
            for &name in &names {
                let ec = configs[j].clone().map(|mut ec| {
                    ec.seed = seed.derive(1).0;
                    ec
                });
                let (ov, accepted) = sweep_replicate(config, &sample, name, ec.as_ref())?;
                out.push(SweepRecord {
                    lambda: lambdas[j],
                    n,
                    replicate: r,
                    seed: seed.0,
                    estimator: name,
                    overlap_fraction: ov,
                    accepted,
                    eta: ec.as_ref().map(|e| e.eta),
                    wall_time_ms: config.record_wall_time.then(|| start.elapsed().as_secs_f64() * 1e3),
                });
            }
            Ok::<_, HarnessError>(out)
        });
        for (i, res) in results.into_iter().enumerate() {
            match res {
                Ok(recs) => rows.extend(recs),
                Err(e) => errors.push(format!(
                    "n={n} lambda={} replicate={}: {e}",
                    lambdas[i / config.replicates],
                    i % config.replicates
                )),
            }
        }
    }
    Ok((rows, errors))
}

/// Acceptance rate per `(n, λ, estimator)` in grid order.
pub fn acceptance_rates(rows: &[SweepRecord]) -> Vec<(usize, f64, &'static str, f64)> {
    let mut out: Vec<(usize, f64, &'static str, usize, usize)> = Vec::new();
    for r in rows {
        match out
            .iter_mut()
            .find(|o| o.0 == r.n && o.1 == r.lambda && o.2 == r.estimator)
        {
            Some(o) => {
                o.3 += r.accepted as usize;
                o.4 += 1;
            }
            None => out.push((r.n, r.lambda, r.estimator, r.accepted as usize, 1)),
        }
    }
    out.into_iter()
        .map(|(n, l, e, a, t)| (n, l, e, a as f64 / t as f64))
        .collect()
}

/// Runs the configured experiment and renders its output.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    config.validate()?;
    let mut summary = Vec::new();
    let mut failed_check = None;
    let body = match config.experiment {
        ExperimentKind::Sample => sample_document(config)?,
        ExperimentKind::Orbits => csv_string(&run_orbits(config)?)?,
        ExperimentKind::MomentsCheck => {
            let rows = run_moment_verification(config)?;
            let failures = moment_failures(&rows);
            summary.push(format!("{} cells, {} failed", rows.len(), failures.len()));
            if !failures.is_empty() {
                failed_check = Some(failures.join("; "));
            }
            csv_string(&rows)?
        }
        ExperimentKind::Density => csv_string(&run_density(config)?)?,
        ExperimentKind::RhoCurve => {
            let curves = rho_curves(config)?;
            if let Some(alpha) = config.alpha {
                for c in &curves {
                    match rho_inverse(1.0 / alpha, c) {
                        Ok(ls) => summary.push(format!(
                            "n={}: lambda* ≈ {:.4} [{:.4}, {:.4}]",
                            c.n_used, ls.estimate, ls.lower, ls.upper
                        )),
                        Err(e) => summary.push(format!("n={}: lambda* unavailable: {e}", c.n_used)),
                    }
                }
            }
            csv_string(&rho_rows(&curves))?
        }
        ExperimentKind::Estimate => csv_string(&run_estimate(config)?)?,
        ExperimentKind::Posterior => {
            let rows = run_posterior_study(config)?;
            let mean = rows.iter().map(|r| r.posterior_at_truth).sum::<f64>() / rows.len() as f64;
            summary.push(format!("mean posterior at truth {mean:.6}"));
            csv_string(&rows)?
        }
        ExperimentKind::Tv => {
            let (rows, failure) = run_tv(config)?;
            failed_check = failure;
            csv_string(&rows)?
        }
        ExperimentKind::Admissibility => {
            let rows = run_admissibility(config)?;
            let pass = rows.iter().filter(|r| r.admissible == "pass").count();
            summary.push(format!("admissible in {pass}/{} samples", rows.len()));
            csv_string(&rows)?
        }
        ExperimentKind::ThresholdSweep => {
            let (rows, errors) = run_threshold_sweep(config)?;
            summary.extend(errors.into_iter().map(|e| format!("replicate failed: {e}")));
            for (n, l, e, rate) in acceptance_rates(&rows) {
                summary.push(format!("n={n} lambda={l:.4} {e}: acceptance {rate:.3}"));
            }
            csv_string(&rows)?
        }
    };
    Ok(RunOutput {
        body,
        summary,
        failed_check,
    })
}
