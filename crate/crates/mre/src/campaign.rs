//! Randomized verification campaigns comparing the numerical minimizer with
//! the closed-form collapse rules.
//!
//! Trial `t` of a campaign seeded with `s` draws everything from the
//! sub-seed `s + t`, so trials are independent of each other and of the
//! number of worker threads.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use log::{debug, info};
use mre_core::bayes::{bayes_update, maxent_update, quantum_classical_consistency, DiscreteDistribution, LikelihoodModel};
use mre_core::collapse::strong_limit_trace;
use mre_core::entropy::{kl_divergence, relative_entropy, ExtendedReal};
use mre_core::optimize::{minimize, ConstraintSet, MinimizeOptions};
use mre_core::state::{random_density_with, random_pvm_with, seeded_rng, SeededRng};
use mre_core::{trace_distance, BlockProbabilities, DensityOperator, ProjectiveDecomposition};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::json::JsonReal;

#[derive(Clone, Debug, PartialEq)]
pub enum CampaignKind {
    Weak,
    /// Fixed block targets, or `None` for fresh targets (each at least 0.05)
    /// in every trial.
    Jeffrey(Option<Vec<f64>>),
    /// Block `k` (0-based) and the sequence of weights `p₁` put on it.
    StrongLimit { k: usize, p1_sequence: Vec<f64> },
    /// Classical correspondence checks; the optional vector is the cell target.
    BayesDemo(Option<Vec<f64>>),
}

impl CampaignKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Weak => "weak",
            Self::Jeffrey(_) => "jeffrey",
            Self::StrongLimit { .. } => "strong-limit",
            Self::BayesDemo(_) => "bayes-demo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CampaignTolerances {
    pub trace_distance: f64,
    pub objective_gap: f64,
    /// Classical checks: Bayes against indicator-constrained maxent.
    pub classical: f64,
    /// Classical checks: diagonal quantum Jeffrey against classical Jeffrey.
    pub consistency: f64,
}

impl Default for CampaignTolerances {
    fn default() -> Self {
        Self { trace_distance: 1e-6, objective_gap: 1e-8, classical: 1e-12, consistency: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub dim: usize,
    /// `None` draws a fresh block structure for every trial.
    pub block_ranks: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    /// Rank of the random prior state.
    pub rank: usize,
    pub tol: CampaignTolerances,
    pub kind: CampaignKind,
    /// Fixed prior state used by every trial instead of a random one.
    pub state: Option<DensityOperator>,
    /// Fixed decomposition used by every trial instead of a random one.
    pub decomposition: Option<ProjectiveDecomposition>,
}

impl CampaignConfig {
    pub fn new(dim: usize, kind: CampaignKind) -> Self {
        Self {
            dim,
            block_ranks: None,
            trials: 100,
            seed: 0,
            rank: dim,
            tol: CampaignTolerances::default(),
            kind,
            state: None,
            decomposition: None,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.dim == 0 {
            return bad("dimension must be positive".into());
        }
        if self.trials == 0 {
            return bad("at least one trial is required".into());
        }
        if self.rank == 0 || self.rank > self.dim {
            return bad(format!("state rank must lie in 1..={}", self.dim));
        }
        if let Some(ranks) = &self.block_ranks {
            if ranks.contains(&0) || ranks.iter().sum::<usize>() != self.dim {
                return bad(format!("block ranks {ranks:?} must be positive and sum to {}", self.dim));
            }
        }
        if let Some(s) = &self.state {
            if s.dim() != self.dim {
                return bad(format!("state has dimension {}, expected {}", s.dim(), self.dim));
            }
        }
        if let Some(p) = &self.decomposition {
            if p.dim() != self.dim {
                return bad(format!("decomposition has dimension {}, expected {}", p.dim(), self.dim));
            }
        }
        let blocks = self.decomposition.as_ref().map(|p| p.len()).or(self.block_ranks.as_ref().map(Vec::len));
        match &self.kind {
            CampaignKind::Weak => {}
            CampaignKind::Jeffrey(Some(p)) | CampaignKind::BayesDemo(Some(p)) => {
                BlockProbabilities::new(p.clone()).map_err(|e| CliError::Config(e.to_string()))?;
                match blocks {
                    Some(n) if n != p.len() => return bad(format!("{} probabilities for {n} blocks", p.len())),
                    None => return bad("probabilities need a fixed block structure".into()),
                    _ => {}
                }
            }
            CampaignKind::Jeffrey(None) | CampaignKind::BayesDemo(None) => {}
            CampaignKind::StrongLimit { k, p1_sequence } => {
                if let Some(n) = blocks {
                    if *k >= n {
                        return bad(format!("block {} does not exist (have {n})", k + 1));
                    }
                }
                if p1_sequence.is_empty() || p1_sequence.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return bad("p1 values must lie in [0, 1]".into());
                }
            }
        }
        Ok(())
    }

    /// The random inputs of trial `t`.
    pub fn instance(&self, t: usize) -> CliResult<Instance> {
        let seed = self.seed.wrapping_add(t as u64);
        let mut rng = seeded_rng(seed);
        let ranks = match &self.block_ranks {
            Some(r) => r.clone(),
            None => random_block_ranks(self.dim, &mut rng),
        };
        let pvm = match &self.decomposition {
            Some(p) => p.clone(),
            None => random_pvm_with(self.dim, &ranks, &mut rng)?,
        };
        let state = match &self.state {
            Some(s) => s.clone(),
            None => random_density_with(self.dim, self.rank, &mut rng)?,
        };
        Ok(Instance { trial: t, seed, state, pvm, rng })
    }
}

/// Inputs of one trial; `rng` continues the trial's random stream.
pub struct Instance {
    pub trial: usize,
    pub seed: u64,
    pub state: DensityOperator,
    pub pvm: ProjectiveDecomposition,
    pub rng: SeededRng,
}

/// A random composition of `dim` into between 1 and `dim` positive parts.
pub fn random_block_ranks<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<usize> {
    let blocks = rng.random_range(1..=dim);
    let mut ranks = vec![1; blocks];
    for _ in blocks..dim {
        ranks[rng.random_range(0..blocks)] += 1;
    }
    ranks
}

/// Flat-Dirichlet weights squeezed so every entry is at least `floor`
/// (requires `floor · n ≤ 1`).
pub fn random_probabilities<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    if s <= 0.0 {
        return vec![1.0 / n as f64; n];
    }
    let free = 1.0 - floor * n as f64;
    let p: Vec<f64> = raw.iter().map(|x| floor + free * x / s).collect();
    let total: f64 = p.iter().sum();
    p.iter().map(|x| x / total).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    /// Distance between the numerical and analytic answers (weak, Jeffrey),
    /// the final Jeffrey-to-strong distance (strong limit), or the quantum /
    /// classical distance (bayes demo).
    pub trace_distance: f64,
    /// `D(ρ, numerical minimizer)` in nats (weak, Jeffrey).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<JsonReal>,
    /// `|D(ρ, numerical) − D(ρ, analytic)|`, or the Bayes/maxent deviation.
    pub objective_gap: Option<JsonReal>,
    /// Most negative directional derivative at the numerical minimizer, or
    /// the smallest KL margin of the classical update over random feasible
    /// competitors.
    pub min_directional_derivative: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_distances: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub trials: usize,
    pub failures: usize,
    pub max_trace_distance: f64,
    pub max_objective_gap: Option<JsonReal>,
    pub min_directional_derivative: Option<f64>,
    pub all_converged: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub dim: usize,
    pub block_ranks: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub rank: usize,
    pub probabilities: Option<Vec<f64>>,
    /// 1-based, as on the command line.
    pub block: Option<usize>,
    pub p1_sequence: Option<Vec<f64>>,
    pub fixed_state: bool,
    pub fixed_decomposition: bool,
    pub tolerances: CampaignTolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Header {
    pub generated_unix_seconds: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    /// The only field that varies between identical runs.
    pub header: Header,
    pub campaign: &'static str,
    pub config: ConfigEcho,
    pub records: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.aggregate.passed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per trial; absent values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "seed", "trace_distance", "objective_gap", "min_directional_derivative", "iterations", "converged", "passed", "limit_distances"])
            .expect("in-memory write");
        for r in &self.records {
            let gap = r.objective_gap.map(|g| g.0.to_string()).unwrap_or_default();
            let dd = r.min_directional_derivative.map(|d| d.to_string()).unwrap_or_default();
            let limits = r.limit_distances.as_ref().map(|v| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")).unwrap_or_default();
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                r.trace_distance.to_string(),
                gap,
                dd,
                r.iterations.to_string(),
                r.converged.to_string(),
                r.passed.to_string(),
                limits,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
    }

    pub fn write(&self, out: Option<&Path>, csv: Option<&Path>) -> CliResult<()> {
        match out {
            Some(p) => crate::json::write_file(p, &(self.to_json() + "\n"))?,
            None => println!("{}", self.to_json()),
        }
        if let Some(p) = csv {
            crate::json::write_file(p, &self.to_csv())?;
        }
        Ok(())
    }
}

fn gap(numerical: ExtendedReal, analytic: ExtendedReal) -> f64 {
    match (numerical, analytic) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs(),
        (ExtendedReal::Infinite, ExtendedReal::Infinite) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Lower bound on randomly drawn Jeffrey targets.
pub const TARGET_FLOOR: f64 = 0.05;

fn optimizer_trial(config: &CampaignConfig, mut inst: Instance) -> CliResult<TrialRecord> {
    let cset = match &config.kind {
        CampaignKind::Jeffrey(fixed) => {
            let p = fixed.clone().unwrap_or_else(|| random_probabilities(inst.pvm.len(), TARGET_FLOOR, &mut inst.rng));
            ConstraintSet::jeffrey(inst.pvm, BlockProbabilities::new(p)?)?
        }
        _ => ConstraintSet::weak(inst.pvm),
    };
    let analytic = cset.analytic_minimizer(&inst.state)?;
    let res = minimize(&inst.state, &cset, &MinimizeOptions { seed: inst.seed, ..Default::default() })?;
    let distance = trace_distance(res.minimizer.matrix(), analytic.matrix())?;
    let gap = gap(res.objective, relative_entropy(&inst.state, &analytic)?);
    debug!("trial {}: distance {distance:e}, gap {gap:e}, {} iterations", inst.trial, res.iterations);
    Ok(TrialRecord {
        trial: inst.trial,
        seed: inst.seed,
        trace_distance: distance,
        objective: Some(JsonReal(res.objective.to_f64())),
        objective_gap: Some(JsonReal(gap)),
        min_directional_derivative: Some(res.max_negative_directional_derivative),
        iterations: res.iterations,
        converged: res.converged,
        passed: distance <= config.tol.trace_distance && gap <= config.tol.objective_gap,
        limit_distances: None,
    })
}

fn strong_limit_trial(inst: Instance, k: usize, p1_sequence: &[f64]) -> CliResult<TrialRecord> {
    let trace = strong_limit_trace(&inst.state, &inst.pvm, k, p1_sequence)?;
    let distances: Vec<f64> = trace.iter().map(|&(_, d)| d).collect();
    let monotone = distances.windows(2).all(|w| w[1] <= w[0]);
    let bounded = trace.iter().all(|&(p1, d)| d <= 2.0 * (1.0 - p1));
    Ok(TrialRecord {
        trial: inst.trial,
        seed: inst.seed,
        trace_distance: *distances.last().expect("nonempty sequence"),
        objective: None,
        objective_gap: None,
        min_directional_derivative: None,
        iterations: 0,
        converged: true,
        passed: monotone && bounded,
        limit_distances: Some(distances),
    })
}

/// Number of random feasible competitors checked against the classical update.
pub const COMPETITORS: usize = 1000;

fn bayes_trial(config: &CampaignConfig, mut inst: Instance, target: Option<&[f64]>) -> CliResult<TrialRecord> {
    let n = config.dim;
    let rng = &mut inst.rng;
    let prior_weights = random_probabilities(n, 0.0, rng);
    let prior = DiscreteDistribution::new(prior_weights.clone())?;

    // cells of consecutive outcomes after a random relabeling
    let ranks = inst.pvm.ranks();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cells = Vec::with_capacity(ranks.len());
    let mut next = 0;
    for r in ranks {
        cells.push(order[next..next + r].to_vec());
        next += r;
    }

    // Bayes with an indicator likelihood against maxent with a 0/1 target
    let chosen = rng.random_range(0..cells.len());
    let posterior = bayes_update(&prior, &LikelihoodModel::indicator(n, &cells[chosen])?)?;
    let mut indicator = vec![0.0; cells.len()];
    indicator[chosen] = 1.0;
    let conditioned = maxent_update(&prior, &cells, &BlockProbabilities::new(indicator)?)?;
    let deviation = posterior.weights().iter().zip(conditioned.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    // soft evidence: quantum Jeffrey on the diagonal embedding
    let p = target.map_or_else(|| random_probabilities(cells.len(), 0.05, rng), <[f64]>::to_vec);
    let p = BlockProbabilities::new(p)?;
    let pvm = ProjectiveDecomposition::diagonal_cells(n, &cells)?;
    let rho = DensityOperator::from_diagonal(&prior_weights)?;
    let distance = quantum_classical_consistency(&rho, &pvm, &p)?;

    // Monte-Carlo minimality among distributions with the same cell masses
    let q = maxent_update(&prior, &cells, &p)?;
    let best = kl_divergence(prior.weights(), q.weights())?.to_f64();
    let mut margin = f64::INFINITY;
    for _ in 0..COMPETITORS {
        let mut w = vec![0.0; n];
        for (cell, &mass) in cells.iter().zip(p.as_slice()) {
            let split = random_probabilities(cell.len(), 0.0, rng);
            for (&x, s) in cell.iter().zip(split) {
                w[x] = mass * s;
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        margin = margin.min(kl_divergence(prior.weights(), &w)?.to_f64() - best);
    }

    Ok(TrialRecord {
        trial: inst.trial,
        seed: inst.seed,
        trace_distance: distance,
        objective: None,
        objective_gap: Some(JsonReal(deviation)),
        min_directional_derivative: Some(margin),
        iterations: 0,
        converged: true,
        passed: deviation <= config.tol.classical && distance <= config.tol.consistency && margin >= -config.tol.classical,
        limit_distances: None,
    })
}

fn run_trial(config: &CampaignConfig, t: usize) -> CliResult<TrialRecord> {
    let inst = config.instance(t)?;
    match &config.kind {
        CampaignKind::Weak | CampaignKind::Jeffrey(_) => optimizer_trial(config, inst),
        CampaignKind::StrongLimit { k, p1_sequence } => strong_limit_trial(inst, *k, p1_sequence),
        CampaignKind::BayesDemo(target) => bayes_trial(config, inst, target.as_deref()),
    }
}

/// Runs every trial (in parallel) and assembles the report.
pub fn run_verify(config: &CampaignConfig) -> CliResult<CampaignReport> {
    config.validate()?;
    info!("{} campaign: dim {}, {} trials, seed {}", config.kind.name(), config.dim, config.trials, config.seed);
    let mut records = (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect::<CliResult<Vec<_>>>()?;
    records.sort_by_key(|r| r.trial);

    let failures = records.iter().filter(|r| !r.passed).count();
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.objective_gap.map(|g| g.0)).collect();
    let derivatives: Vec<f64> = records.iter().filter_map(|r| r.min_directional_derivative).collect();
    let aggregate = Aggregate {
        trials: records.len(),
        failures,
        max_trace_distance: records.iter().map(|r| r.trace_distance).fold(0.0, f64::max),
        max_objective_gap: (!gaps.is_empty()).then(|| JsonReal(gaps.iter().copied().fold(0.0, f64::max))),
        min_directional_derivative: (!derivatives.is_empty()).then(|| derivatives.iter().copied().fold(f64::INFINITY, f64::min)),
        all_converged: records.iter().all(|r| r.converged),
        passed: failures == 0,
    };
    info!("{} of {} trials passed", records.len() - failures, records.len());

    let (probabilities, block, p1_sequence) = match &config.kind {
        CampaignKind::Jeffrey(Some(p)) | CampaignKind::BayesDemo(Some(p)) => (Some(p.clone()), None, None),
        CampaignKind::StrongLimit { k, p1_sequence } => (None, Some(k + 1), Some(p1_sequence.clone())),
        _ => (None, None, None),
    };
    Ok(CampaignReport {
        header: Header { generated_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()) },
        campaign: config.kind.name(),
        config: ConfigEcho {
            dim: config.dim,
            block_ranks: config.block_ranks.clone(),
            trials: config.trials,
            seed: config.seed,
            rank: config.rank,
            probabilities,
            block,
            p1_sequence,
            fixed_state: config.state.is_some(),
            fixed_decomposition: config.decomposition.is_some(),
            tolerances: config.tol,
        },
        records,
        aggregate,
    })
}
