use crate::error::{Error, Result};
use crate::instance::ProblemInstance;

use super::RunReport;

/// Accuracy target of [`offline_comparator`] on desk-scale instances; added
/// to the regret side of bound checks.
pub const COMPARATOR_TOLERANCE: f64 = 1e-4;

const STAGES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparatorDomain {
    /// `{x ∈ Q : g(x) ≤ 0}`
    Constrained,
    /// All of Q, ignoring the functional constraint.
    WholeSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparator {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Best fixed point in hindsight for the average of all objectives,
/// subject to `g(x) ≤ 0`.
pub fn offline_comparator(instance: &ProblemInstance, iterations: usize) -> Result<Comparator> {
    offline_comparator_over(instance, iterations, ComparatorDomain::Constrained)
}

/// Offline switching-subgradient mirror descent.
///
/// Iterations are split into stages; each stage restarts from the best
/// feasible point so far with half the previous step scale, and inside a
/// stage the step is `r / (‖s‖_* √(t+1))`. Feasible steps follow a
/// subgradient of the average objective, infeasible ones the max-aggregate
/// constraint. Returns the best feasible point visited.
pub fn offline_comparator_over(
    instance: &ProblemInstance,
    iterations: usize,
    domain: ComparatorDomain,
) -> Result<Comparator> {
    let objectives = instance.objectives();
    if objectives.is_empty() {
        return Err(Error::InvalidInput("instance has no objectives".into()));
    }
    let setup = instance.setup();
    let constraint = instance.constraint();
    let inv_n = 1.0 / objectives.len() as f64;
    let dim = instance.dimension();

    let stages = STAGES.min(iterations.max(1));
    let per_stage = (iterations / stages).max(1);
    let mut scale = 2.0 * setup.suggested_theta0();

    let mut x = setup.prepare_start(instance.x0())?;
    let mut best: Option<Comparator> = None;

    for _ in 0..stages {
        if let Some(b) = &best {
            x = b.x.clone();
        }
        for t in 0..per_stage {
            let feasible = match domain {
                ComparatorDomain::Constrained => constraint.value(&x)? <= 0.0,
                ComparatorDomain::WholeSet => true,
            };
            let direction = if feasible {
                let mut value = 0.0;
                let mut grad = vec![0.0; dim];
                for f in objectives {
                    let ans = f.eval(&x)?;
                    value += ans.value;
                    grad.iter_mut()
                        .zip(&ans.subgradient)
                        .for_each(|(g, s)| *g += s);
                }
                value *= inv_n;
                grad.iter_mut().for_each(|v| *v *= inv_n);
                if best.as_ref().is_none_or(|b| value < b.value) {
                    best = Some(Comparator {
                        x: x.clone(),
                        value,
                    });
                }
                grad
            } else {
                constraint.eval(&x)?.subgradient
            };
            let norm = setup.dual_norm(&direction)?;
            if norm == 0.0 {
                // zero objective subgradient: x minimizes the average over
                // all of R^n; zero constraint subgradient: g is constant.
                break;
            }
            let h = scale / (norm * ((t + 1) as f64).sqrt());
            x = setup.mirror_step(&x, &direction, h)?;
        }
        scale *= 0.5;
    }

    best.ok_or(Error::Infeasible { iterations })
}

/// `(1/N) Σ_productive f_i(x^k) − comparator_value`, with each f_i evaluated
/// at the iterate where its subgradient was queried.
pub fn regret(
    report: &RunReport,
    instance: &ProblemInstance,
    comparator_value: f64,
) -> Result<f64> {
    if instance.objectives().len() != report.n {
        return Err(Error::InvalidInput(format!(
            "comparator averages {} objectives but the run consumed {}",
            instance.objectives().len(),
            report.n
        )));
    }
    let mut total = 0.0;
    for (i, x) in report.productive_iterates() {
        if x.is_empty() {
            return Err(Error::IncompleteTrace(
                "trace was stored without iterates".into(),
            ));
        }
        total += instance.objectives()[i].value(x)?;
    }
    Ok(total / report.n as f64 - comparator_value)
}
