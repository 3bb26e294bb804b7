//! Online Mirror Descent with productive / non-productive step switching.
//!
//! On every step the constraint is checked at the current iterate. If
//! `g(x^k) ≤ ε` the step is productive: the next objective `f_i` is queried
//! once and the iterate moves along its subgradient. Otherwise the step is
//! non-productive and moves along a constraint subgradient. A run stops
//! right after the N-th productive step.
//!
//! Step sizes:
//!
//! * [`Algorithm::NonAdaptive`]: `h = ε / M²` with the global Lipschitz bound.
//! * [`Algorithm::Adaptive`] and [`Algorithm::AdaptiveMulti`]:
//!   `h_k = Θ₀ (Σ_{t≤k} M_t²)^{-1/2}` where `M_t` is the dual norm of the
//!   subgradient used on step t. `AdaptiveMulti` steps along the first
//!   violated constraint component instead of the max-aggregate.

mod bounds;
mod certificate;
mod comparator;
mod report;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::oracles::FirstOrderAnswer;

pub use bounds::{check_bounds, induction_sum, longest_nonproductive_run, BoundCheck};
pub use certificate::certificate;
pub use comparator::{
    offline_comparator, offline_comparator_over, regret, Comparator, ComparatorDomain,
    COMPARATOR_TOLERANCE,
};
pub use report::TraceFile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    NonAdaptive,
    Adaptive,
    AdaptiveMulti,
}

impl Algorithm {
    /// Numbering used on the command line (1, 2, 3).
    pub fn number(self) -> u8 {
        match self {
            Algorithm::NonAdaptive => 1,
            Algorithm::Adaptive => 2,
            Algorithm::AdaptiveMulti => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Algorithm::NonAdaptive),
            2 => Some(Algorithm::Adaptive),
            3 => Some(Algorithm::AdaptiveMulti),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Required number of productive steps N.
    pub n: usize,
    pub eps: f64,
    pub algorithm: Algorithm,
    /// Safety cap on total steps; `None` uses [`default_step_cap`].
    #[serde(default)]
    pub max_total_steps: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn new(n: usize, eps: f64, algorithm: Algorithm) -> Result<Self> {
        let cfg = RunConfig {
            n,
            eps,
            algorithm,
            max_total_steps: None,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// ε = C / √N.
    pub fn with_accuracy_constant(n: usize, c: f64, algorithm: Algorithm) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidInput(format!("C must be > 0, got {c}")));
        }
        Self::new(n, c / (n as f64).sqrt(), algorithm)
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_total_steps(mut self, cap: usize) -> Self {
        self.max_total_steps = Some(cap);
        self
    }

    /// The constant C with ε = C / √N.
    pub fn accuracy_constant(&self) -> f64 {
        self.eps * (self.n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "eps must be > 0, got {}",
                self.eps
            )));
        }
        if let Some(cap) = self.max_total_steps {
            if cap < self.n {
                return Err(Error::InvalidInput(format!(
                    "max_total_steps {cap} is below N = {}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// `N·(1 + ⌈2M²Θ₀²/ε²⌉) + 1`: the worst-case non-productive count plus slack.
pub fn default_step_cap(n: usize, eps: f64, lipschitz: f64, theta0: f64) -> usize {
    let per = (2.0 * lipschitz * lipschitz * theta0 * theta0 / (eps * eps)).ceil();
    let per = if per.is_finite() && per < (usize::MAX / 4) as f64 {
        per as usize
    } else {
        usize::MAX / 4
    };
    n.saturating_mul(per.saturating_add(1)).saturating_add(1)
}

/// One iteration of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub productive: bool,
    /// 0-based index i of the objective queried on a productive step.
    #[serde(rename = "i", default, skip_serializing_if = "Option::is_none")]
    pub objective_index: Option<usize>,
    /// 0-based constraint component used on a non-productive step.
    #[serde(rename = "m", default, skip_serializing_if = "Option::is_none")]
    pub constraint_index: Option<usize>,
    pub m_k: f64,
    pub h_k: f64,
    #[serde(rename = "g")]
    pub constraint_value: f64,
    /// x^k, the point at which the step was taken.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterate: Vec<f64>,
}

/// The outcome of a run: full trace plus summary counts and the
/// guaranteed-accuracy certificate δ.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub config: RunConfig,
    pub theta0: f64,
    pub lipschitz: f64,
    pub setup: crate::prox::ProxSetup,
    pub trace: Vec<StepRecord>,
    pub n: usize,
    pub n_j: usize,
    pub total_steps: usize,
    pub delta: f64,
    pub elapsed_secs: f64,
    /// Filled in once a comparator is available.
    pub regret: Option<f64>,
}

impl RunReport {
    /// (objective index, iterate) for each productive step, in order.
    pub fn productive_iterates(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.trace
            .iter()
            .filter_map(|s| s.objective_index.map(|i| (i, s.iterate.as_slice())))
    }

    pub fn recompute_delta(&self) -> Result<f64> {
        certificate(
            &self.trace,
            self.config.algorithm,
            self.config.eps,
            self.theta0,
            self.lipschitz,
            self.config.n,
        )
    }
}

pub fn run(instance: &ProblemInstance, config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    if instance.objectives().len() < config.n {
        return Err(Error::InvalidInput(format!(
            "instance has {} objectives, run needs N = {}",
            instance.objectives().len(),
            config.n
        )));
    }
    let m = instance.lipschitz();
    let theta0 = instance.theta0();
    let eps = config.eps;
    if config.algorithm == Algorithm::NonAdaptive && !(m > 0.0) {
        return Err(Error::InvalidInput(
            "non-adaptive step needs a positive Lipschitz bound".into(),
        ));
    }
    let cap = config
        .max_total_steps
        .unwrap_or_else(|| default_step_cap(config.n, eps, m, theta0));

    let setup = instance.setup();
    let constraint = instance.constraint();
    let fixed_step = eps / (m * m);

    let started = Instant::now();
    let mut x = setup.prepare_start(instance.x0())?;
    let mut trace = Vec::with_capacity(config.n * 2);
    let mut produced = 0usize;
    let mut sum_sq = 0.0_f64;

    let finish = |trace: Vec<StepRecord>, produced: usize, started: Instant| {
        let total = trace.len();
        RunReport {
            config: config.clone(),
            theta0,
            lipschitz: m,
            setup: setup.clone(),
            trace,
            n: produced,
            n_j: total - produced,
            total_steps: total,
            delta: f64::NAN,
            elapsed_secs: started.elapsed().as_secs_f64(),
            regret: None,
        }
    };

    while produced < config.n {
        let k = trace.len();
        if k >= cap {
            let partial = finish(trace, produced, started);
            return Err(Error::BudgetExhausted {
                limit: cap,
                productive: produced,
                partial: Box::new(partial),
            });
        }

        let (g_value, g_arg) = constraint.value_and_argmax(&x)?;
        let productive = g_value <= eps;

        let (direction, objective_index, constraint_index) = if productive {
            let FirstOrderAnswer { subgradient, .. } = instance.objectives()[produced].eval(&x)?;
            (subgradient, Some(produced), None)
        } else if config.algorithm == Algorithm::AdaptiveMulti {
            let (idx, ans) = constraint.eval_violated_component(&x, eps)?;
            (ans.subgradient, None, Some(idx))
        } else {
            (constraint.rows()[g_arg].clone(), None, Some(g_arg))
        };

        let (m_k, h_k) = match config.algorithm {
            Algorithm::NonAdaptive => (m, fixed_step),
            Algorithm::Adaptive | Algorithm::AdaptiveMulti => {
                let m_k = setup.dual_norm(&direction)?;
                sum_sq += m_k * m_k;
                // all-zero prefix: stand still
                let h = if sum_sq > 0.0 {
                    theta0 / sum_sq.sqrt()
                } else {
                    0.0
                };
                (m_k, h)
            }
        };

        let next = if h_k > 0.0 {
            Some(setup.mirror_step(&x, &direction, h_k)?)
        } else {
            None
        };

        trace.push(StepRecord {
            k,
            productive,
            objective_index,
            constraint_index,
            m_k,
            h_k,
            constraint_value: g_value,
            iterate: x.clone(),
        });
        if productive {
            produced += 1;
        }
        if let Some(z) = next {
            x = z;
        }
    }

    let mut report = finish(trace, produced, started);
    report.delta = certificate(&report.trace, config.algorithm, eps, theta0, m, config.n)?;
    Ok(report)
}

fn run_as(
    instance: &ProblemInstance,
    config: &RunConfig,
    expected: Algorithm,
) -> Result<RunReport> {
    if config.algorithm != expected {
        return Err(Error::InvalidInput(format!(
            "config selects {:?}, expected {expected:?}",
            config.algorithm
        )));
    }
    run(instance, config)
}

/// Fixed step `h = ε / M²`.
pub fn run_nonadaptive(instance: &ProblemInstance, config: &RunConfig) -> Result<RunReport> {
    run_as(instance, config, Algorithm::NonAdaptive)
}

/// Adaptive step; non-productive steps follow the max-aggregate constraint.
pub fn run_adaptive(instance: &ProblemInstance, config: &RunConfig) -> Result<RunReport> {
    run_as(instance, config, Algorithm::Adaptive)
}

/// Adaptive step; non-productive steps follow the first violated component.
pub fn run_adaptive_multi(instance: &ProblemInstance, config: &RunConfig) -> Result<RunReport> {
    run_as(instance, config, Algorithm::AdaptiveMulti)
}
