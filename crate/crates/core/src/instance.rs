use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{lipschitz_bound, MaxAffineConstraint, Objective};
use crate::prox::{ProxSetup, FEASIBILITY_TOL};

/// An online problem: the ordered objective sequence, the functional
/// constraint, the feasible set with its prox geometry, a starting point,
/// and the Lipschitz bound M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRaw")]
pub struct ProblemInstance {
    objectives: Vec<Objective>,
    constraint: MaxAffineConstraint,
    setup: ProxSetup,
    x0: Vec<f64>,
    lipschitz: f64,
}

#[derive(Deserialize)]
struct InstanceRaw {
    objectives: Vec<Objective>,
    constraint: MaxAffineConstraint,
    setup: ProxSetup,
    x0: Vec<f64>,
    lipschitz: Option<f64>,
}

impl TryFrom<InstanceRaw> for ProblemInstance {
    type Error = Error;
    fn try_from(raw: InstanceRaw) -> Result<Self> {
        let inst = ProblemInstance::new(raw.objectives, raw.constraint, raw.setup, raw.x0)?;
        match raw.lipschitz {
            Some(m) => inst.with_lipschitz(m),
            None => Ok(inst),
        }
    }
}

impl ProblemInstance {
    /// Builds an instance and computes M analytically from the families.
    pub fn new(
        objectives: Vec<Objective>,
        constraint: MaxAffineConstraint,
        setup: ProxSetup,
        x0: Vec<f64>,
    ) -> Result<Self> {
        let n = setup.dimension();
        if constraint.dimension() != n {
            return Err(Error::InvalidInput(format!(
                "constraint has dimension {}, setup has {n}",
                constraint.dimension()
            )));
        }
        if let Some(f) = objectives.iter().find(|f| f.dimension() != n) {
            return Err(Error::InvalidInput(format!(
                "objective has dimension {}, setup has {n}",
                f.dimension()
            )));
        }
        if !setup.is_feasible(&x0, FEASIBILITY_TOL) {
            return Err(Error::Domain("starting point is infeasible".into()));
        }
        let lipschitz = lipschitz_bound(&objectives, &constraint, &setup)?;
        Ok(ProblemInstance {
            objectives,
            constraint,
            setup,
            x0,
            lipschitz,
        })
    }

    /// Replaces the computed Lipschitz bound.
    pub fn with_lipschitz(mut self, m: f64) -> Result<Self> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Lipschitz bound must be finite and >= 0, got {m}"
            )));
        }
        self.lipschitz = m;
        Ok(self)
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn constraint(&self) -> &MaxAffineConstraint {
        &self.constraint
    }

    pub fn setup(&self) -> &ProxSetup {
        &self.setup
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn theta0(&self) -> f64 {
        self.setup.theta0()
    }

    pub fn dimension(&self) -> usize {
        self.setup.dimension()
    }

    /// Average of all objectives at `x`.
    pub fn average_objective(&self, x: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for f in &self.objectives {
            s += f.value(x)?;
        }
        Ok(s / self.objectives.len() as f64)
    }
}
