//! First-order oracles for the objective and constraint families.
//!
//! Subgradient choices at non-differentiable points are fixed so runs are
//! reproducible: `sign(0) = 0` for `|⟨a,x⟩ − b|`, the zero vector at the
//! origin of `√(xᵀQx)`, and the smallest active index for a max of affine
//! functions.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::prox::{ProxKind, ProxSetup};
use crate::vector::dot;

/// Value and subgradient at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderAnswer {
    pub value: f64,
    pub subgradient: Vec<f64>,
}

/// f(x) = |⟨a, x⟩ − b|
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineAbsObjective {
    pub a: Vec<f64>,
    pub b: f64,
}

impl AffineAbsObjective {
    pub fn new(a: Vec<f64>, b: f64) -> Result<Self> {
        if a.is_empty() || !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "affine-abs coefficients must be finite and non-empty".into(),
            ));
        }
        Ok(AffineAbsObjective { a, b })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.a.len(), x.len())?;
        Ok((dot(&self.a, x) - self.b).abs())
    }

    pub fn eval(&self, x: &[f64]) -> Result<FirstOrderAnswer> {
        check_dim(self.a.len(), x.len())?;
        let r = dot(&self.a, x) - self.b;
        let s = if r > 0.0 {
            1.0
        } else if r < 0.0 {
            -1.0
        } else {
            0.0
        };
        Ok(FirstOrderAnswer {
            value: r.abs(),
            subgradient: self.a.iter().map(|v| s * v).collect(),
        })
    }

    pub fn lipschitz(&self, setup: &ProxSetup) -> Result<f64> {
        setup.dual_norm(&self.a)
    }
}

/// g(x) = max_m (⟨α_m, x⟩ + offset_m)
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaxAffineRaw")]
pub struct MaxAffineConstraint {
    rows: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

#[derive(Deserialize)]
struct MaxAffineRaw {
    rows: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl TryFrom<MaxAffineRaw> for MaxAffineConstraint {
    type Error = Error;
    fn try_from(raw: MaxAffineRaw) -> Result<Self> {
        MaxAffineConstraint::new(raw.rows, raw.offsets)
    }
}

impl MaxAffineConstraint {
    pub fn new(rows: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidInput(
                "constraint needs at least one row".into(),
            ));
        };
        let n = first.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "constraint rows must share a positive dimension".into(),
            ));
        }
        if offsets.len() != rows.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} offsets",
                rows.len(),
                offsets.len()
            )));
        }
        if rows
            .iter()
            .flatten()
            .chain(&offsets)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput(
                "constraint coefficients must be finite".into(),
            ));
        }
        Ok(MaxAffineConstraint { rows, offsets })
    }

    /// A single affine constraint ⟨α, x⟩ + offset ≤ 0.
    pub fn single(row: Vec<f64>, offset: f64) -> Result<Self> {
        Self::new(vec![row], vec![offset])
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn num_components(&self) -> usize {
        self.rows.len()
    }

    pub fn dimension(&self) -> usize {
        self.rows[0].len()
    }

    pub fn component_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dimension(), x.len())?;
        Ok(self
            .rows
            .iter()
            .zip(&self.offsets)
            .map(|(r, o)| dot(r, x) + o)
            .collect())
    }

    /// Value of the max and the (0-based) index of the first maximizing component.
    pub fn value_and_argmax(&self, x: &[f64]) -> Result<(f64, usize)> {
        let vals = self.component_values(x)?;
        let mut best = 0;
        for (m, v) in vals.iter().enumerate() {
            if *v > vals[best] {
                best = m;
            }
        }
        Ok((vals[best], best))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.value_and_argmax(x).map(|(v, _)| v)
    }

    pub fn eval(&self, x: &[f64]) -> Result<FirstOrderAnswer> {
        self.eval_indexed(x).map(|(_, ans)| ans)
    }

    pub fn eval_indexed(&self, x: &[f64]) -> Result<(usize, FirstOrderAnswer)> {
        let (value, m) = self.value_and_argmax(x)?;
        Ok((
            m,
            FirstOrderAnswer {
                value,
                subgradient: self.rows[m].clone(),
            },
        ))
    }

    /// The first (0-based) component with `g_m(x) > eps`, with its value and gradient.
    pub fn eval_violated_component(
        &self,
        x: &[f64],
        eps: f64,
    ) -> Result<(usize, FirstOrderAnswer)> {
        let vals = self.component_values(x)?;
        match vals.iter().position(|&v| v > eps) {
            Some(m) => Ok((
                m,
                FirstOrderAnswer {
                    value: vals[m],
                    subgradient: self.rows[m].clone(),
                },
            )),
            None => Err(Error::NoViolatedComponent {
                eps,
                max_value: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }),
        }
    }

    pub fn component_lipschitz(&self, m: usize, setup: &ProxSetup) -> Result<f64> {
        setup.dual_norm(&self.rows[m])
    }

    pub fn lipschitz(&self, setup: &ProxSetup) -> Result<f64> {
        (0..self.rows.len()).try_fold(0.0_f64, |acc, m| {
            Ok(acc.max(self.component_lipschitz(m, setup)?))
        })
    }
}

/// f(x) = √(xᵀQx) for a symmetric positive semidefinite Q.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SqrtQuadraticRaw", into = "SqrtQuadraticRaw")]
pub struct SqrtQuadraticObjective {
    form: Vec<Vec<f64>>,
    max_eigenvalue: f64,
}

#[derive(Serialize, Deserialize)]
struct SqrtQuadraticRaw {
    form: Vec<Vec<f64>>,
}

impl TryFrom<SqrtQuadraticRaw> for SqrtQuadraticObjective {
    type Error = Error;
    fn try_from(raw: SqrtQuadraticRaw) -> Result<Self> {
        SqrtQuadraticObjective::new(raw.form)
    }
}

impl From<SqrtQuadraticObjective> for SqrtQuadraticRaw {
    fn from(o: SqrtQuadraticObjective) -> Self {
        SqrtQuadraticRaw { form: o.form }
    }
}

const PSD_TOL: f64 = 1e-12;

impl SqrtQuadraticObjective {
    pub fn new(form: Vec<Vec<f64>>) -> Result<Self> {
        let n = form.len();
        if n == 0 || form.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "quadratic form must be a non-empty square matrix".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                if !form[i][j].is_finite() || form[i][j] != form[j][i] {
                    return Err(Error::InvalidInput(
                        "quadratic form must be finite and symmetric".into(),
                    ));
                }
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| form[i][j]);
        let eig = SymmetricEigen::new(m).eigenvalues;
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo < -PSD_TOL * hi.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "quadratic form is not positive semidefinite (min eigenvalue {lo})"
            )));
        }
        Ok(SqrtQuadraticObjective {
            form,
            max_eigenvalue: hi.max(0.0),
        })
    }

    /// √(Σ_{i<n} (x_i + x_{i+1})²)
    pub fn neighbour_sum(n: usize) -> Result<Self> {
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n.saturating_sub(1) {
            q[i][i] += 1.0;
            q[i + 1][i + 1] += 1.0;
            q[i][i + 1] += 1.0;
            q[i + 1][i] += 1.0;
        }
        Self::new(q)
    }

    /// √(0.1 (Σ x_i² + Σ_{i<n} x_i x_{i+1}))
    pub fn damped_chain(n: usize) -> Result<Self> {
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            q[i][i] = 0.1;
            if i + 1 < n {
                q[i][i + 1] = 0.05;
                q[i + 1][i] = 0.05;
            }
        }
        Self::new(q)
    }

    /// The Euclidean norm √(Σ x_i²).
    pub fn euclidean_norm(n: usize) -> Result<Self> {
        let q = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(q)
    }

    pub fn form(&self) -> &[Vec<f64>] {
        &self.form
    }

    pub fn dimension(&self) -> usize {
        self.form.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.form.iter().map(|row| dot(row, x)).collect()
    }

    fn root(&self, quad: f64) -> Result<f64> {
        if quad < -PSD_TOL {
            return Err(Error::Computation(format!(
                "quadratic form evaluated to {quad}"
            )));
        }
        Ok(quad.max(0.0).sqrt())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dimension(), x.len())?;
        self.root(dot(&self.apply(x), x))
    }

    pub fn eval(&self, x: &[f64]) -> Result<FirstOrderAnswer> {
        check_dim(self.dimension(), x.len())?;
        let qx = self.apply(x);
        let value = self.root(dot(&qx, x))?;
        let subgradient = if value > 0.0 {
            qx.iter().map(|v| v / value).collect()
        } else {
            vec![0.0; x.len()]
        };
        Ok(FirstOrderAnswer { value, subgradient })
    }

    /// sup over the setup's unit ball of √(uᵀQu).
    ///
    /// For the ℓ₁ ball the supremum sits at a vertex ±e_i, giving √max Q_ii.
    /// For ℓ_p with p ≤ 2 the ℓ_p ball lies inside the ℓ₂ ball, so the
    /// spectral bound √λ_max applies.
    pub fn lipschitz(&self, setup: &ProxSetup) -> Result<f64> {
        check_dim(setup.dimension(), self.dimension())?;
        Ok(match setup.kind() {
            ProxKind::EntropySimplex => (0..self.dimension())
                .map(|i| self.form[i][i])
                .fold(0.0_f64, f64::max)
                .sqrt(),
            ProxKind::EuclideanBall | ProxKind::PNormBall { .. } => self.max_eigenvalue.sqrt(),
        })
    }
}

/// One objective f_i of the online sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Objective {
    AffineAbs(AffineAbsObjective),
    SqrtQuadratic(SqrtQuadraticObjective),
}

impl Objective {
    pub fn dimension(&self) -> usize {
        match self {
            Objective::AffineAbs(o) => o.a.len(),
            Objective::SqrtQuadratic(o) => o.dimension(),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Objective::AffineAbs(o) => o.value(x),
            Objective::SqrtQuadratic(o) => o.value(x),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<FirstOrderAnswer> {
        match self {
            Objective::AffineAbs(o) => o.eval(x),
            Objective::SqrtQuadratic(o) => o.eval(x),
        }
    }

    pub fn lipschitz(&self, setup: &ProxSetup) -> Result<f64> {
        match self {
            Objective::AffineAbs(o) => o.lipschitz(setup),
            Objective::SqrtQuadratic(o) => o.lipschitz(setup),
        }
    }
}

impl From<AffineAbsObjective> for Objective {
    fn from(o: AffineAbsObjective) -> Self {
        Objective::AffineAbs(o)
    }
}

impl From<SqrtQuadraticObjective> for Objective {
    fn from(o: SqrtQuadraticObjective) -> Self {
        Objective::SqrtQuadratic(o)
    }
}

/// Uniform bound M on the dual norms of every objective and constraint subgradient.
pub fn lipschitz_bound(
    objectives: &[Objective],
    constraint: &MaxAffineConstraint,
    setup: &ProxSetup,
) -> Result<f64> {
    objectives
        .iter()
        .try_fold(constraint.lipschitz(setup)?, |acc, f| {
            Ok(acc.max(f.lipschitz(setup)?))
        })
}
