use crate::error::{Error, Result};

use super::{Algorithm, StepRecord};

/// Guaranteed accuracy δ recomputed from a complete trace.
///
/// Non-adaptive: `ε/2 + M²Θ₀²/(εN) − ε N_J/(2N)`.
/// Adaptive variants: `(2Θ₀/N) (Σ_k M_k²)^{1/2} − ε N_J/N`, summing the
/// logged `M_k` in step order. The value is not clamped at zero.
pub fn certificate(
    trace: &[StepRecord],
    algorithm: Algorithm,
    eps: f64,
    theta0: f64,
    lipschitz: f64,
    n: usize,
) -> Result<f64> {
    let productive = trace.iter().filter(|s| s.productive).count();
    if productive != n {
        return Err(Error::IncompleteTrace(format!(
            "{productive} productive steps, expected {n}"
        )));
    }
    if n == 0 || !trace.last().is_some_and(|s| s.productive) {
        return Err(Error::IncompleteTrace(
            "trace must end with a productive step".into(),
        ));
    }
    let nf = n as f64;
    let n_j = (trace.len() - productive) as f64;
    Ok(match algorithm {
        Algorithm::NonAdaptive => {
            eps / 2.0 + lipschitz * lipschitz * theta0 * theta0 / (eps * nf)
                - eps * n_j / (2.0 * nf)
        }
        Algorithm::Adaptive | Algorithm::AdaptiveMulti => {
            let mut sum_sq = 0.0_f64;
            for s in trace {
                sum_sq += s.m_k * s.m_k;
            }
            2.0 * theta0 / nf * sum_sq.sqrt() - eps * n_j / nf
        }
    })
}
