//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::process::ExitCode;

use mre::campaign::{random_probabilities, run_verify, CampaignConfig, CampaignKind, TARGET_FLOOR};
use mre_core::collapse::{jeffrey_collapse, strong_collapse, weak_collapse};
use mre_core::entropy::{relative_entropy, von_neumann_entropy};
use mre_core::optimize::{check_first_order, minimize, objective_gradient, ConstraintSet, MinimizeOptions};
use mre_core::state::{random_block_unitary_with, random_hermitian};
use mre_core::{
    matrix_function, random_density, random_pvm, trace_distance, BlockProbabilities, ComplexMatrix, DensityOperator, Error,
    ZeroPolicy,
};
use rayon::prelude::*;

const DIMS: [usize; 5] = [2, 3, 4, 6, 8];
const TRIALS: usize = 100;
const DISTANCE_TOL: f64 = 1e-6;
const GAP_TOL: f64 = 1e-8;
const CERTIFICATE_TOL: f64 = 1e-8;
const WITNESS_TOL: f64 = 1e-6;
const DIRECTIONS: usize = 200;
const PERTURBED: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn campaign(kind: CampaignKind, dim: usize, rank: usize, seed: u64) -> CampaignConfig {
    let mut c = CampaignConfig::new(dim, kind);
    c.trials = TRIALS;
    c.seed = seed;
    c.rank = rank;
    c.tol.trace_distance = DISTANCE_TOL;
    c.tol.objective_gap = GAP_TOL;
    c
}

fn weak_campaigns(rank: impl Fn(usize) -> usize) -> Vec<CampaignConfig> {
    DIMS.iter().map(|&d| campaign(CampaignKind::Weak, d, rank(d), 1000 * d as u64)).collect()
}

fn jeffrey_campaigns(rank: impl Fn(usize) -> usize) -> Vec<CampaignConfig> {
    DIMS.iter().map(|&d| campaign(CampaignKind::Jeffrey(None), d, rank(d), 2000 * d as u64 + 7)).collect()
}

/// Criteria 1 and 2: minimizer matches the closed form in every trial.
fn minimality(configs: &[CampaignConfig]) -> Outcome {
    let mut worst_d: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut failures = 0;
    let mut total = 0;
    for c in configs {
        let report = match run_verify(c) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("dim {}: {e}", c.dim)),
        };
        total += report.records.len();
        failures += report.aggregate.failures;
        worst_d = worst_d.max(report.aggregate.max_trace_distance);
        worst_gap = worst_gap.max(report.aggregate.max_objective_gap.map_or(0.0, |g| g.0));
    }
    outcome(failures == 0, format!("{total} trials, {failures} failures, max distance {worst_d:.1e}, max gap {worst_gap:.1e}"))
}

/// The constraint set a campaign trial optimizes over, with its instance.
fn trial_problem(c: &CampaignConfig, t: usize) -> Result<(DensityOperator, ConstraintSet, u64, mre_core::state::SeededRng), String> {
    let mut inst = c.instance(t).map_err(|e| e.to_string())?;
    let cset = match &c.kind {
        CampaignKind::Jeffrey(fixed) => {
            let p = fixed.clone().unwrap_or_else(|| random_probabilities(inst.pvm.len(), TARGET_FLOOR, &mut inst.rng));
            ConstraintSet::jeffrey(inst.pvm, BlockProbabilities::new(p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?
        }
        _ => ConstraintSet::weak(inst.pvm),
    };
    Ok((inst.state, cset, inst.seed, inst.rng))
}

struct CertificateStats {
    min_at_optimum: f64,
    perturbed: usize,
    witnessed: usize,
}

fn certificates(c: &CampaignConfig) -> Result<CertificateStats, String> {
    let mut stats = CertificateStats { min_at_optimum: f64::INFINITY, perturbed: 0, witnessed: 0 };
    for t in 0..c.trials {
        let (rho, cset, seed, mut rng) = trial_problem(c, t)?;
        let sigma = cset.analytic_minimizer(&rho).map_err(|e| e.to_string())?;
        let report = check_first_order(&rho, &sigma, &cset, DIRECTIONS, seed).map_err(|e| e.to_string())?;
        stats.min_at_optimum = stats.min_at_optimum.min(report.min_derivative);

        if stats.perturbed == PERTURBED {
            continue;
        }
        // a feasible point away from the minimizer: rotate within blocks and
        // mix toward the blockwise uniform point
        let v = random_block_unitary_with(&cset.pvm, &mut rng);
        let rotated = sigma.conjugated_by(&v).map_err(|e| e.to_string())?;
        let moved = rotated.mix(&cset.blockwise_uniform(), 0.2).map_err(|e| e.to_string())?;
        if trace_distance(moved.matrix(), sigma.matrix()).map_err(|e| e.to_string())? < 1e-6 {
            // the feasible set is a single point
            continue;
        }
        stats.perturbed += 1;
        let report = check_first_order(&rho, &moved, &cset, DIRECTIONS, seed ^ 0x5eed).map_err(|e| e.to_string())?;
        if report.min_derivative < -WITNESS_TOL {
            stats.witnessed += 1;
        }
    }
    Ok(stats)
}

/// Criterion 3 (and its boundary variant in criterion 9).
fn first_order(configs: &[CampaignConfig]) -> Outcome {
    let results: Vec<_> = configs.par_iter().map(|c| (c.dim, c.kind.name(), certificates(c))).collect();
    let mut pass = true;
    let mut min_opt = f64::INFINITY;
    let mut notes = Vec::new();
    for (dim, name, r) in results {
        match r {
            Err(e) => {
                pass = false;
                notes.push(format!("{name} dim {dim}: {e}"));
            }
            Ok(s) => {
                min_opt = min_opt.min(s.min_at_optimum);
                if s.min_at_optimum < -CERTIFICATE_TOL || s.perturbed < PERTURBED || s.witnessed < s.perturbed {
                    pass = false;
                    notes.push(format!("{name} dim {dim}: {} of {} perturbed points witnessed", s.witnessed, s.perturbed));
                }
            }
        }
    }
    let mut detail = format!("min derivative at minimizers {min_opt:.1e}, {PERTURBED} witnessed non-minimizers per campaign");
    if !notes.is_empty() {
        detail = format!("{detail}; {}", notes.join("; "));
    }
    outcome(pass, detail)
}

fn strong_limit() -> Outcome {
    let mut c = CampaignConfig::new(4, CampaignKind::StrongLimit { k: 1, p1_sequence: vec![0.9, 0.99, 0.999, 1.0 - 1e-6] });
    c.block_ranks = Some(vec![1, 2, 1]);
    c.trials = 25;
    c.seed = 404;
    match run_verify(&c) {
        Ok(r) => outcome(r.passed(), format!("{} instances, {} failures, final distance ≤ {:.1e}", r.records.len(), r.aggregate.failures, r.aggregate.max_trace_distance)),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn repetition() -> Outcome {
    let mut worst_mass: f64 = 0.0;
    let mut worst_repeat: f64 = 0.0;
    let mut collapses = 0;
    for seed in 0..100u64 {
        let dim = DIMS[seed as usize % DIMS.len()];
        let ranks = if dim == 2 { vec![1, 1] } else { vec![1, dim - 1] };
        let rho = random_density(dim, dim, 5000 + seed).unwrap();
        let pvm = random_pvm(dim, &ranks, 6000 + seed).unwrap();
        for k in 0..pvm.len() {
            let once = strong_collapse(&rho, &pvm, k).unwrap().post_state;
            let twice = strong_collapse(&once, &pvm, k).unwrap().post_state;
            worst_mass = worst_mass.max((pvm.projector(k).trace_product(once.matrix()).re - 1.0).abs());
            worst_repeat = worst_repeat.max((twice.matrix() - once.matrix()).max_abs());
            collapses += 1;
        }
    }
    outcome(
        worst_mass <= 1e-10 && worst_repeat <= 1e-12,
        format!("{collapses} collapses, |tr(P_k σ') − 1| ≤ {worst_mass:.1e}, repeat change ≤ {worst_repeat:.1e}"),
    )
}

fn entropy_identities(weak: &[CampaignConfig]) -> Outcome {
    let mut min_d = f64::INFINITY;
    let mut worst_identity: f64 = 0.0;
    for i in 0..500u64 {
        let dim = DIMS[i as usize % DIMS.len()];
        let rank = if i % 3 == 0 { (dim / 2).max(1) } else { dim };
        let rho = random_density(dim, rank, 10_000 + i).unwrap();
        let sigma = random_density(dim, dim, 20_000 + i).unwrap();
        min_d = min_d.min(relative_entropy(&rho, &sigma).unwrap().to_f64());
        let mixed = DensityOperator::maximally_mixed(dim);
        let identity = von_neumann_entropy(&rho) - (-relative_entropy(&rho, &mixed).unwrap().to_f64() + (dim as f64).ln());
        worst_identity = worst_identity.max(identity.abs());
    }
    let mut min_increase = f64::INFINITY;
    for c in weak {
        for t in 0..c.trials {
            let inst = c.instance(t).unwrap();
            let pinched = weak_collapse(&inst.state, &inst.pvm).unwrap().post_state;
            min_increase = min_increase.min(von_neumann_entropy(&pinched) - von_neumann_entropy(&inst.state));
        }
    }
    outcome(
        min_d >= 0.0 && worst_identity <= 1e-10 && min_increase >= -1e-10,
        format!("min D {min_d:.2e} over 500 pairs, entropy identity error {worst_identity:.1e}, min pinching increase {min_increase:.1e}"),
    )
}

/// `d/dt −tr(ρ ln(σ + tH))` at 0 from central differences, extrapolated.
fn central_difference(rho: &DensityOperator, sigma: &DensityOperator, h: &ComplexMatrix) -> f64 {
    let f = |t: f64| {
        let l = matrix_function(&(sigma.matrix() + &h.scaled(t)), f64::ln, ZeroPolicy::Strict).unwrap();
        -rho.matrix().trace_product(&l).re
    };
    let eps = 1e-2 * sigma.eig().eigenvalues[0] / h.frobenius_norm();
    let central = |e: f64| (f(e) - f(-e)) / (2.0 * e);
    (4.0 * central(eps / 2.0) - central(eps)) / 3.0
}

fn gradient_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let dim = DIMS[i as usize % DIMS.len()];
        let rho = random_density(dim, dim, 30_000 + i).unwrap();
        let sigma = random_density(dim, dim, 40_000 + i).unwrap();
        let g = objective_gradient(&rho, &sigma).unwrap();
        let h = random_hermitian(dim, 50_000 + i);
        let an = g.trace_product(&h).re;
        let fd = central_difference(&rho, &sigma, &h);
        worst = worst.max((fd - an).abs() / an.abs());
    }
    outcome(worst <= 1e-6, format!("50 instances, max relative error {worst:.1e}"))
}

fn classical() -> Outcome {
    let mut c = CampaignConfig::new(6, CampaignKind::BayesDemo(None));
    c.trials = 100;
    c.seed = 808;
    match run_verify(&c) {
        Ok(r) => outcome(
            r.passed(),
            format!(
                "100 instances, bayes/maxent deviation ≤ {:.1e}, quantum/classical distance ≤ {:.1e}, min KL margin over 1000 competitors {:.1e}",
                r.aggregate.max_objective_gap.map_or(0.0, |g| g.0),
                r.aggregate.max_trace_distance,
                r.aggregate.min_directional_derivative.unwrap_or(f64::NAN)
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn boundary() -> Outcome {
    let half = |d: usize| (d / 2).max(1);
    let (weak, jeffrey) = (weak_campaigns(half), jeffrey_campaigns(half));
    let all: Vec<_> = weak.into_iter().chain(jeffrey).collect();
    let min = minimality(&all);
    let cert = first_order(&all);

    // ρ supported inside block 0: block 1 is unreachable but gets positive weight
    let mut degenerate_ok = true;
    for seed in 0..20u64 {
        let pvm = random_pvm(4, &[2, 2], 70_000 + seed).unwrap();
        let psi = pvm.block_bases()[0][0].clone();
        let rho = DensityOperator::pure(&psi).unwrap();
        let p = BlockProbabilities::new(vec![0.6, 0.4]).unwrap();
        let cset = ConstraintSet::jeffrey(pvm.clone(), p.clone()).unwrap();
        degenerate_ok &= matches!(jeffrey_collapse(&rho, &pvm, &p), Err(Error::DegenerateConstraint(1)));
        degenerate_ok &= matches!(minimize(&rho, &cset, &MinimizeOptions::default()), Err(Error::DegenerateConstraint(1)));
    }
    outcome(
        min.pass && cert.pass && degenerate_ok,
        format!("rank dim/2: [{}] [{}]; degenerate constraint rejected: {degenerate_ok}", min.detail, cert.detail),
    )
}

fn main() -> ExitCode {
    let full = |d: usize| d;
    let weak = weak_campaigns(full);
    let jeffrey = jeffrey_campaigns(full);
    let both: Vec<_> = weak.iter().chain(&jeffrey).cloned().collect();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 weak-collapse minimality", Box::new(|| minimality(&weak))),
        ("2 jeffrey minimality", Box::new(|| minimality(&jeffrey))),
        ("3 first-order certificates", Box::new(|| first_order(&both))),
        ("4 strong-collapse limit", Box::new(strong_limit)),
        ("5 repetition invariance", Box::new(repetition)),
        ("6 entropy identities", Box::new(|| entropy_identities(&weak))),
        ("7 gradient check", Box::new(gradient_check)),
        ("8 classical correspondence", Box::new(classical)),
        ("9 boundary cases", Box::new(boundary)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
