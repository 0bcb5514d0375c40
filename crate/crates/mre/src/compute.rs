//! Single computations behind the `entropy`, `collapse` and `bayes`
//! subcommands. Each returns the JSON document printed on stdout.

use mre_core::bayes::{bayes_update, DiscreteDistribution, LikelihoodModel};
use mre_core::collapse::{jeffrey_collapse, strong_collapse, weak_collapse};
use mre_core::entropy::{relative_entropy, von_neumann_entropy};
use mre_core::{BlockProbabilities, DensityOperator, ProjectiveDecomposition};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::json::{to_spaced_string, JsonReal, MatrixFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Weak,
    Strong,
    Jeffrey,
}

#[derive(Serialize)]
struct RelativeEntropy {
    relative_entropy: JsonReal,
}

#[derive(Serialize)]
struct VonNeumann {
    von_neumann_entropy: f64,
}

#[derive(Serialize)]
struct Posterior {
    posterior: Vec<f64>,
}

/// `D(ρ, σ)` when `sigma` is given, otherwise the von Neumann entropy of `ρ`.
pub fn entropy(rho: &DensityOperator, sigma: Option<&DensityOperator>) -> CliResult<String> {
    Ok(match sigma {
        Some(sigma) => to_spaced_string(&RelativeEntropy { relative_entropy: JsonReal(relative_entropy(rho, sigma)?.to_f64()) }),
        None => to_spaced_string(&VonNeumann { von_neumann_entropy: von_neumann_entropy(rho) }),
    })
}

/// The post-collapse state as a matrix document. `k` is 1-based.
pub fn collapse(rho: &DensityOperator, pvm: &ProjectiveDecomposition, rule: Rule, k: Option<usize>, probs: Option<&[f64]>) -> CliResult<String> {
    let outcome = match rule {
        Rule::Weak => weak_collapse(rho, pvm)?,
        Rule::Strong => {
            let k = k.ok_or_else(|| CliError::Config("--k is required for the strong rule".into()))?;
            if k == 0 {
                return Err(CliError::Config("--k counts blocks from 1".into()));
            }
            strong_collapse(rho, pvm, k - 1)?
        }
        Rule::Jeffrey => {
            let p = probs.ok_or_else(|| CliError::Config("--probs is required for the jeffrey rule".into()))?;
            jeffrey_collapse(rho, pvm, &BlockProbabilities::new(p.to_vec())?)?
        }
    };
    log::info!("outcome probabilities {:?}", outcome.outcome_probabilities);
    Ok(to_spaced_string(&MatrixFile::from_matrix(outcome.post_state.matrix())))
}

pub fn bayes(prior: &[f64], likelihood: &[f64]) -> CliResult<String> {
    let posterior = bayes_update(&DiscreteDistribution::new(prior.to_vec())?, &LikelihoodModel::new(likelihood.to_vec())?)?;
    Ok(to_spaced_string(&Posterior { posterior: posterior.into_weights() }))
}
