use serde::{Deserialize, Serialize};

use super::{RunReport, StepRecord, COMPARATOR_TOLERANCE};

/// Pass/fail flags for the theoretical guarantees of a finished run, with
/// the quantities they compare.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub regret: f64,
    pub delta: f64,
    /// regret ≤ δ (+ comparator tolerance).
    pub regret_within_delta: bool,
    /// N (1 + 2M²Θ₀²/C²) with C = ε√N.
    pub linear_nonproductive_bound: f64,
    /// N_J ≤ the linear bound; only binding when regret ≥ 0.
    pub linear_nonproductive_ok: bool,
    pub longest_nonproductive_run: usize,
    /// 2M²Θ₀²/ε² + 1
    pub run_length_bound: f64,
    pub run_length_ok: bool,
    /// (2M²Θ₀²/ε²) N
    pub quadratic_nonproductive_bound: f64,
    pub quadratic_nonproductive_ok: bool,
}

impl BoundCheck {
    pub fn all_passed(&self) -> bool {
        self.regret_within_delta
            && self.linear_nonproductive_ok
            && self.run_length_ok
            && self.quadratic_nonproductive_ok
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.regret_within_delta {
            out.push("regret exceeds delta");
        }
        if !self.linear_nonproductive_ok {
            out.push("non-productive count exceeds N(1 + 2M^2 Theta0^2 / C^2)");
        }
        if !self.run_length_ok {
            out.push("non-productive run exceeds 2M^2 Theta0^2 / eps^2 + 1");
        }
        if !self.quadratic_nonproductive_ok {
            out.push("non-productive count exceeds (2M^2 Theta0^2 / eps^2) N");
        }
        out
    }
}

pub fn longest_nonproductive_run(trace: &[StepRecord]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for s in trace {
        if s.productive {
            cur = 0;
        } else {
            cur += 1;
            best = best.max(cur);
        }
    }
    best
}

pub fn check_bounds(report: &RunReport, regret: f64) -> BoundCheck {
    let eps = report.config.eps;
    let n = report.config.n as f64;
    let c = report.config.accuracy_constant();
    let mt = report.lipschitz * report.lipschitz * report.theta0 * report.theta0;
    let n_j = report.n_j as f64;

    let linear = n * (1.0 + 2.0 * mt / (c * c));
    let ratio = 2.0 * mt / (eps * eps);
    let longest = longest_nonproductive_run(&report.trace);

    BoundCheck {
        regret,
        delta: report.delta,
        regret_within_delta: regret <= report.delta + COMPARATOR_TOLERANCE,
        linear_nonproductive_bound: linear,
        linear_nonproductive_ok: regret < 0.0 || n_j <= linear,
        longest_nonproductive_run: longest,
        run_length_bound: ratio + 1.0,
        run_length_ok: (longest as f64) < ratio + 1.0,
        quadratic_nonproductive_bound: ratio * n,
        quadratic_nonproductive_ok: n_j <= ratio * n,
    }
}

/// Left and right sides of `Σ_i M_i² / (Σ_{j≤i} M_j²)^{1/2} ≤ 2 (Σ_i M_i²)^{1/2}`,
/// given the squares `M_i²`. Terms with a zero prefix sum contribute nothing.
pub fn induction_sum(squares: &[f64]) -> (f64, f64) {
    let mut prefix = 0.0_f64;
    let mut lhs = 0.0_f64;
    for &s in squares {
        prefix += s;
        if prefix > 0.0 {
            lhs += s / prefix.sqrt();
        }
    }
    (lhs, 2.0 * prefix.sqrt())
}
