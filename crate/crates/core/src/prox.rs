//! Proximal geometry: norms, distance generating functions, Bregman
//! divergences and the mirror (proximal mapping) step.
//!
//! Three setups are supported:
//!
//! | kind             | feasible set         | norm   | d(x)                      |
//! |------------------|----------------------|--------|---------------------------|
//! | `EuclideanBall`  | unit ℓ₂ ball         | ℓ₂     | ½‖x‖₂²                    |
//! | `EntropySimplex` | unit simplex S_n(1)  | ℓ₁     | ln n + Σ x_k ln x_k       |
//! | `PNormBall`      | unit ℓ_p ball        | ℓ_p    | ‖x‖_p² / (2(p−1))         |
//!
//! Each d is 1-strongly convex with respect to the listed norm. The Bregman
//! divergence uses the convention `V(center, target) = d(target) − d(center)
//! − ⟨∇d(center), target − center⟩`, so the mirror step from `x` along `p` is
//! `argmin_u ⟨h·p, u⟩ + V(x, u)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_finite, Error, Result};
use crate::vector::{dot, lp_norm};

/// Membership tolerance for the feasible set.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Weight of the uniform distribution mixed into simplex starting points.
pub const SIMPLEX_INTERIOR_MIX: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProxKind {
    EuclideanBall,
    EntropySimplex,
    /// Unit ℓ_p ball with `p ∈ (1, 2]`.
    PNormBall {
        p: f64,
    },
}

impl ProxKind {
    /// Exponent of the primal norm.
    pub fn primal_exponent(&self) -> f64 {
        match *self {
            ProxKind::EuclideanBall => 2.0,
            ProxKind::EntropySimplex => 1.0,
            ProxKind::PNormBall { p } => p,
        }
    }

    /// Exponent q of the dual norm, 1/p + 1/q = 1.
    pub fn dual_exponent(&self) -> f64 {
        match *self {
            ProxKind::EuclideanBall => 2.0,
            ProxKind::EntropySimplex => f64::INFINITY,
            ProxKind::PNormBall { p } => p / (p - 1.0),
        }
    }
}

/// A proximal setup for one problem dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProxConfig", into = "ProxConfig")]
pub struct ProxSetup {
    kind: ProxKind,
    dimension: usize,
    theta0: f64,
}

/// Serialized form of a [`ProxSetup`].
///
/// `theta0` defaults to [`ProxSetup::suggested_theta0`]. For `pnorm_ball`
/// a missing `p` selects the exponent `a = 2 ln n / (2 ln n − 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxConfig {
    pub kind: ProxKindTag,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxKindTag {
    EuclideanBall,
    EntropySimplex,
    PnormBall,
}

impl TryFrom<ProxConfig> for ProxSetup {
    type Error = Error;

    fn try_from(cfg: ProxConfig) -> Result<Self> {
        let setup = match (cfg.kind, cfg.p) {
            (ProxKindTag::EuclideanBall, None) => ProxSetup::euclidean_ball(cfg.dimension)?,
            (ProxKindTag::EntropySimplex, None) => ProxSetup::entropy_simplex(cfg.dimension)?,
            (ProxKindTag::PnormBall, Some(p)) => ProxSetup::pnorm_ball(cfg.dimension, p)?,
            (ProxKindTag::PnormBall, None) => ProxSetup::pnorm_ball_log_exponent(cfg.dimension)?,
            (kind, Some(_)) => {
                return Err(Error::InvalidInput(format!(
                    "exponent p is only valid for pnorm_ball, not {kind:?}"
                )))
            }
        };
        match cfg.theta0 {
            Some(t) => setup.with_theta0(t),
            None => Ok(setup),
        }
    }
}

impl From<ProxSetup> for ProxConfig {
    fn from(s: ProxSetup) -> Self {
        let (kind, p) = match s.kind {
            ProxKind::EuclideanBall => (ProxKindTag::EuclideanBall, None),
            ProxKind::EntropySimplex => (ProxKindTag::EntropySimplex, None),
            ProxKind::PNormBall { p } => (ProxKindTag::PnormBall, Some(p)),
        };
        ProxConfig {
            kind,
            dimension: s.dimension,
            theta0: Some(s.theta0),
            p,
        }
    }
}

impl ProxSetup {
    pub fn euclidean_ball(dimension: usize) -> Result<Self> {
        Self::build(ProxKind::EuclideanBall, dimension)
    }

    pub fn entropy_simplex(dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidInput(
                "entropy simplex needs dimension >= 2".into(),
            ));
        }
        Self::build(ProxKind::EntropySimplex, dimension)
    }

    pub fn pnorm_ball(dimension: usize, p: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidInput(format!(
                "p-norm exponent must lie in (1, 2], got {p}"
            )));
        }
        Self::build(ProxKind::PNormBall { p }, dimension)
    }

    /// ℓ_a ball with `a = 2 ln n / (2 ln n − 1)`, the choice for large dual
    /// exponents. Needs `n ≥ 3` so that `a ≤ 2`.
    pub fn pnorm_ball_log_exponent(dimension: usize) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::InvalidInput(
                "log-exponent p-norm setup needs dimension >= 3".into(),
            ));
        }
        Self::pnorm_ball(dimension, log_exponent(dimension))
    }

    fn build(kind: ProxKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        let theta0 = suggested_theta0_for(kind, dimension);
        Ok(ProxSetup {
            kind,
            dimension,
            theta0,
        })
    }

    pub fn with_theta0(mut self, theta0: f64) -> Result<Self> {
        if !(theta0 > 0.0 && theta0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "theta0 must be > 0, got {theta0}"
            )));
        }
        self.theta0 = theta0;
        Ok(self)
    }

    pub fn kind(&self) -> ProxKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Default Θ₀ = √(max_Q d).
    ///
    /// Euclidean ball: √½. Entropy simplex: √(ln n). ℓ_p ball:
    /// √(1 / (2(p−1))), which for the log exponent equals √(ln n − ½) and so
    /// stays below √(ln n).
    pub fn suggested_theta0(&self) -> f64 {
        suggested_theta0_for(self.kind, self.dimension)
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension, x.len())?;
        Ok(lp_norm(x, self.kind.primal_exponent()))
    }

    pub fn dual_norm(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dimension, y.len())?;
        Ok(lp_norm(y, self.kind.dual_exponent()))
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dimension || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.kind {
            ProxKind::EntropySimplex => {
                let s: f64 = x.iter().sum();
                x.iter().all(|&v| v >= -tol) && (s - 1.0).abs() <= tol
            }
            kind => lp_norm(x, kind.primal_exponent()) <= 1.0 + tol,
        }
    }

    fn require_feasible(&self, x: &[f64], what: &str) -> Result<()> {
        check_dim(self.dimension, x.len())?;
        if self.is_feasible(x, FEASIBILITY_TOL) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} is outside the feasible set")))
        }
    }

    pub fn dgf_value(&self, x: &[f64]) -> Result<f64> {
        self.require_feasible(x, "point")?;
        Ok(match self.kind {
            ProxKind::EuclideanBall => 0.5 * dot(x, x),
            ProxKind::EntropySimplex => {
                (self.dimension as f64).ln() + x.iter().map(|&v| xlogx(v)).sum::<f64>()
            }
            ProxKind::PNormBall { p } => {
                let n = lp_norm(x, p);
                n * n / (2.0 * (p - 1.0))
            }
        })
    }

    pub fn dgf_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_feasible(x, "point")?;
        match self.kind {
            ProxKind::EuclideanBall => Ok(x.to_vec()),
            ProxKind::EntropySimplex => {
                if x.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain(
                        "entropy gradient needs a strictly positive point".into(),
                    ));
                }
                Ok(x.iter().map(|&v| v.ln() + 1.0).collect())
            }
            ProxKind::PNormBall { p } => Ok(pnorm_dgf_gradient(x, p)),
        }
    }

    /// Bregman divergence `V(center, target)`.
    pub fn bregman(&self, center: &[f64], target: &[f64]) -> Result<f64> {
        self.require_feasible(center, "center")?;
        self.require_feasible(target, "target")?;
        let v = match self.kind {
            ProxKind::EuclideanBall => {
                0.5 * center
                    .iter()
                    .zip(target)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            }
            ProxKind::EntropySimplex => {
                if center.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain(
                        "entropy divergence needs a strictly positive center".into(),
                    ));
                }
                // Σ y ln(y/x) + x − y; the last two terms vanish on the simplex.
                center
                    .iter()
                    .zip(target)
                    .map(|(&x, &y)| {
                        let kl = if y > 0.0 { y * (y / x).ln() } else { 0.0 };
                        kl + x - y
                    })
                    .sum()
            }
            ProxKind::PNormBall { p } => {
                let grad = pnorm_dgf_gradient(center, p);
                let dc = lp_norm(center, p).powi(2) / (2.0 * (p - 1.0));
                let dt = lp_norm(target, p).powi(2) / (2.0 * (p - 1.0));
                let lin: f64 = grad
                    .iter()
                    .zip(target.iter().zip(center))
                    .map(|(g, (t, c))| g * (t - c))
                    .sum();
                dt - dc - lin
            }
        };
        Ok(v.max(0.0))
    }

    /// Proximal mapping `argmin_{u ∈ Q} ⟨h·p, u⟩ + V(x, u)`.
    pub fn mirror_step(&self, x: &[f64], p: &[f64], h: f64) -> Result<Vec<f64>> {
        self.require_feasible(x, "mirror center")?;
        check_dim(self.dimension, p.len())?;
        check_finite(p, "direction")?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "step size must be > 0, got {h}"
            )));
        }
        let z = match self.kind {
            ProxKind::EuclideanBall => {
                let mut y: Vec<f64> = x.iter().zip(p).map(|(a, g)| a - h * g).collect();
                let n = lp_norm(&y, 2.0);
                if n > 1.0 {
                    y.iter_mut().for_each(|v| *v /= n);
                }
                y
            }
            ProxKind::EntropySimplex => entropy_step(x, p, h),
            ProxKind::PNormBall { p: exp } => {
                let mut c = pnorm_dgf_gradient(x, exp);
                c.iter_mut().zip(p).for_each(|(ci, gi)| *ci -= h * gi);
                pnorm_prox(&c, exp)
            }
        };
        if z.iter().all(|v| v.is_finite()) {
            Ok(z)
        } else {
            Err(Error::Computation(
                "mirror step produced non-finite entries".into(),
            ))
        }
    }

    /// Validates a starting point and, for the simplex, pulls it into the
    /// relative interior so multiplicative updates can move every coordinate.
    pub fn prepare_start(&self, x0: &[f64]) -> Result<Vec<f64>> {
        self.require_feasible(x0, "starting point")?;
        Ok(match self.kind {
            ProxKind::EntropySimplex => {
                let u = 1.0 / self.dimension as f64;
                let s: f64 = x0.iter().map(|v| v.max(0.0)).sum();
                x0.iter()
                    .map(|v| {
                        (1.0 - SIMPLEX_INTERIOR_MIX) * v.max(0.0) / s + SIMPLEX_INTERIOR_MIX * u
                    })
                    .collect()
            }
            _ => x0.to_vec(),
        })
    }
}

/// `a = 2 ln n / (2 ln n − 1)`.
pub fn log_exponent(n: usize) -> f64 {
    let l = 2.0 * (n as f64).ln();
    l / (l - 1.0)
}

fn suggested_theta0_for(kind: ProxKind, n: usize) -> f64 {
    match kind {
        ProxKind::EuclideanBall => 0.5_f64.sqrt(),
        ProxKind::EntropySimplex => (n as f64).ln().sqrt(),
        ProxKind::PNormBall { p } => (0.5 / (p - 1.0)).sqrt(),
    }
}

fn xlogx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// ∇(‖x‖_p² / (2(p−1))) = ‖x‖_p^{2−p} sign(x)|x|^{p−1} / (p−1).
fn pnorm_dgf_gradient(x: &[f64], p: f64) -> Vec<f64> {
    let n = lp_norm(x, p);
    if n == 0.0 {
        return vec![0.0; x.len()];
    }
    x.iter()
        .map(|&v| n * v.signum() * (v.abs() / n).powf(p - 1.0) / (p - 1.0))
        .collect()
}

/// argmin over the unit ℓ_p ball of `‖u‖_p² / (2(p−1)) − ⟨c, u⟩`.
///
/// The minimizer points along the ℓ_q-dual direction of `c` with radius
/// `min(1, (p−1)‖c‖_q)`.
fn pnorm_prox(c: &[f64], p: f64) -> Vec<f64> {
    let q = p / (p - 1.0);
    let cq = lp_norm(c, q);
    if cq == 0.0 {
        return vec![0.0; c.len()];
    }
    let radius = ((p - 1.0) * cq).min(1.0);
    c.iter()
        .map(|&v| radius * v.signum() * (v.abs() / cq).powf(q - 1.0))
        .collect()
}

/// Exponentiated-gradient update z_k ∝ x_k exp(−h p_k), evaluated in the
/// log domain with the maximum subtracted before exponentiation.
fn entropy_step(x: &[f64], p: &[f64], h: f64) -> Vec<f64> {
    let logits: Vec<f64> = x
        .iter()
        .zip(p)
        .map(|(&xi, &pi)| {
            if xi > 0.0 {
                xi.ln() - h * pi
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|&l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}
