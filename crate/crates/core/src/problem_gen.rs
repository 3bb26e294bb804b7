//! Seeded construction of the benchmark instances.
//!
//! The four random families draw a matrix `A ∈ R^{N×(n+1)}` row by row; row
//! i gives the objective `|⟨a_i, x⟩ − b_i|` with `a_i` the first n entries
//! and `b_i` the last. All share the constraint `g(x) = max_m ⟨α_m, x⟩`,
//! the unit Euclidean ball, `x⁰ = (1,…,1)/√n` and `Θ₀ = 3`.
//!
//! Random numbers come from ChaCha8 seeded with `seed_from_u64(seed)`. A
//! uniform draw is `(next_u64 >> 11) · 2⁻⁵³ ∈ [0, 1)`; the other
//! distributions are explicit transforms of it:
//!
//! * normal: Box–Muller on `(1 − u₁, u₂)`, both outputs used in order;
//! * exponential: `−ln(1 − u)`;
//! * Gumbel(μ, β): `μ − β ln(−ln u)` with u drawn from the open interval
//!   `((k + ½) · 2⁻⁵³)`.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;
use crate::oracles::{AffineAbsObjective, MaxAffineConstraint, Objective, SqrtQuadraticObjective};
use crate::prox::ProxSetup;

pub const DEFAULT_DIMENSION: usize = 10;
pub const THETA0: f64 = 3.0;
pub const REMARK4_N: usize = 3;
pub const REMARK4_EPS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Normal, mean 0, standard deviation 1.
    Normal01,
    /// Uniform on [0, 1).
    Uniform01,
    /// Exponential with scale 1.
    Exponential1,
    /// Gumbel with location 1 and scale 2.
    Gumbel,
    /// The deterministic three-objective, three-constraint instance.
    Remark4,
}

impl Family {
    pub const RANDOM: [Family; 4] = [
        Family::Normal01,
        Family::Uniform01,
        Family::Exponential1,
        Family::Gumbel,
    ];

    /// Parses the command-line example name: `1`..`4` or `remark4`.
    pub fn from_example(name: &str) -> Option<Self> {
        match name.trim() {
            "1" => Some(Family::Normal01),
            "2" => Some(Family::Uniform01),
            "3" => Some(Family::Exponential1),
            "4" => Some(Family::Gumbel),
            "remark4" | "5" => Some(Family::Remark4),
            _ => None,
        }
    }

    pub fn example_label(self) -> &'static str {
        match self {
            Family::Normal01 => "ex. 1",
            Family::Uniform01 => "ex. 2",
            Family::Exponential1 => "ex. 3",
            Family::Gumbel => "ex. 4",
            Family::Remark4 => "remark4",
        }
    }

    /// Reference N for this family.
    pub fn reference_n(self) -> usize {
        match self {
            Family::Normal01 => 3000,
            Family::Uniform01 => 6000,
            Family::Exponential1 => 7000,
            Family::Gumbel => 10000,
            Family::Remark4 => REMARK4_N,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub dimension: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            family,
            n,
            dimension: DEFAULT_DIMENSION,
            seed,
        }
    }

    pub fn with_dimension(mut self, dimension: usize) -> Self {
        self.dimension = dimension;
        self
    }

    /// N actually used: Remark4 always has three objectives.
    pub fn effective_n(&self) -> usize {
        match self.family {
            Family::Remark4 => REMARK4_N,
            _ => self.n,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 && self.family != Family::Remark4 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        if self.dimension == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        Ok(())
    }
}

/// N and ε for a family: ε = 1/√N for the random families, ε = 0.5 with
/// N = 3 for Remark4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunParams {
    pub n: usize,
    pub eps: f64,
}

impl RunParams {
    pub fn config(&self, algorithm: crate::solver::Algorithm) -> Result<crate::solver::RunConfig> {
        crate::solver::RunConfig::new(self.n, self.eps, algorithm)
    }
}

pub fn default_run_params(spec: &GeneratorSpec) -> RunParams {
    match spec.family {
        Family::Remark4 => RunParams {
            n: REMARK4_N,
            eps: REMARK4_EPS,
        },
        _ => RunParams {
            n: spec.n,
            eps: 1.0 / (spec.n as f64).sqrt(),
        },
    }
}

/// Rows: all ones; `1, 2, …, n`; `1, 2, 4, 6, …, 2(n−1)`.
pub fn constraint_matrix(dimension: usize) -> Vec<Vec<f64>> {
    let ones = vec![1.0; dimension];
    let ramp = (1..=dimension).map(|j| j as f64).collect();
    let doubled = (1..=dimension)
        .map(|j| if j == 1 { 1.0 } else { 2.0 * (j - 1) as f64 })
        .collect();
    vec![ones, ramp, doubled]
}

fn start_point(dimension: usize) -> Vec<f64> {
    vec![1.0 / (dimension as f64).sqrt(); dimension]
}

fn euclidean_setup(dimension: usize) -> Result<ProxSetup> {
    ProxSetup::euclidean_ball(dimension)?.with_theta0(THETA0)
}

pub fn generate(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let dim = spec.dimension;
    if spec.family == Family::Remark4 {
        return remark4_instance(dim);
    }
    let mut sampler = Sampler::new(spec.seed);
    let mut objectives = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let row: Vec<f64> = (0..=dim).map(|_| sampler.draw(spec.family)).collect();
        let (a, b) = row.split_at(dim);
        objectives.push(Objective::from(AffineAbsObjective::new(a.to_vec(), b[0])?));
    }
    let constraint = MaxAffineConstraint::new(constraint_matrix(dim), vec![0.0; 3])?;
    ProblemInstance::new(
        objectives,
        constraint,
        euclidean_setup(dim)?,
        start_point(dim),
    )
}

/// Objectives √Σ(x_i + x_{i+1})², √(0.1(Σx_i² + Σx_i x_{i+1})), ‖x‖₂ and
/// constraints Σ i·x_i + 1, Σ 10i·x_i, Σ 50i·x_i.
pub fn remark4_instance(dimension: usize) -> Result<ProblemInstance> {
    let objectives = vec![
        SqrtQuadraticObjective::neighbour_sum(dimension)?.into(),
        SqrtQuadraticObjective::damped_chain(dimension)?.into(),
        SqrtQuadraticObjective::euclidean_norm(dimension)?.into(),
    ];
    let rows = [1.0, 10.0, 50.0]
        .iter()
        .map(|s| (1..=dimension).map(|i| s * i as f64).collect())
        .collect();
    let constraint = MaxAffineConstraint::new(rows, vec![1.0, 0.0, 0.0])?;
    ProblemInstance::new(
        objectives,
        constraint,
        euclidean_setup(dimension)?,
        start_point(dimension),
    )
}

struct Sampler {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// [0, 1)
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// (0, 1)
    fn uniform_open(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    fn draw(&mut self, family: Family) -> f64 {
        match family {
            Family::Normal01 => self.normal(),
            Family::Uniform01 => self.uniform(),
            Family::Exponential1 => -(1.0 - self.uniform()).ln(),
            Family::Gumbel => 1.0 - 2.0 * (-self.uniform_open().ln()).ln(),
            Family::Remark4 => unreachable!("Remark4 is deterministic"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::Objective;

    #[test]
    fn constraint_matrix_matches_literal() {
        let m = constraint_matrix(10);
        assert_eq!(m[0], vec![1.0; 10]);
        assert_eq!(
            m[1],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
        );
        assert_eq!(
            m[2],
            vec![1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0]
        );
    }

    #[test]
    fn generation_is_deterministic() {
        for fam in Family::RANDOM {
            let spec = GeneratorSpec::new(fam, 40, 17);
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
            let other = GeneratorSpec::new(fam, 40, 18);
            assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
        }
    }

    fn matrix(spec: &GeneratorSpec) -> Vec<Vec<f64>> {
        generate(spec)
            .unwrap()
            .objectives()
            .iter()
            .map(|f| match f {
                Objective::AffineAbs(o) => {
                    let mut r = o.a.clone();
                    r.push(o.b);
                    r
                }
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn normal_column_means_are_sane() {
        let a = matrix(&GeneratorSpec::new(Family::Normal01, 5, 3));
        for j in 0..11 {
            let mean: f64 = a.iter().map(|r| r[j]).sum::<f64>() / 5.0;
            assert!(mean.abs() <= 1.5, "column {j} mean {mean}");
        }
    }

    #[test]
    fn family_supports() {
        let u = matrix(&GeneratorSpec::new(Family::Uniform01, 200, 1));
        assert!(u.iter().flatten().all(|&v| (0.0..1.0).contains(&v)));
        let e = matrix(&GeneratorSpec::new(Family::Exponential1, 200, 1));
        assert!(e.iter().flatten().all(|&v| v >= 0.0));
        let g = matrix(&GeneratorSpec::new(Family::Gumbel, 200, 1));
        assert!(g.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn sample_moments_match_families() {
        // 2200 draws each; bands are ~5 standard errors wide
        let moments = |fam| {
            let v: Vec<f64> = matrix(&GeneratorSpec::new(fam, 200, 99)).concat();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (mean, var)
        };
        let (m, v) = moments(Family::Normal01);
        assert!(m.abs() < 0.11 && (v - 1.0).abs() < 0.15, "{m} {v}");
        let (m, v) = moments(Family::Uniform01);
        assert!(
            (m - 0.5).abs() < 0.031 && (v - 1.0 / 12.0).abs() < 0.01,
            "{m} {v}"
        );
        let (m, v) = moments(Family::Exponential1);
        assert!((m - 1.0).abs() < 0.11 && (v - 1.0).abs() < 0.3, "{m} {v}");
        // Gumbel(1, 2): mean 1 + 2γ, variance π²·4/6
        let (m, v) = moments(Family::Gumbel);
        let gamma = 0.577_215_664_901_532_9;
        assert!((m - (1.0 + 2.0 * gamma)).abs() < 0.28, "{m}");
        assert!((v - PI * PI * 4.0 / 6.0).abs() < 1.6, "{v}");
    }

    #[test]
    fn random_instances_share_fixed_parameters() {
        let inst = generate(&GeneratorSpec::new(Family::Normal01, 7, 0)).unwrap();
        assert_eq!(inst.objectives().len(), 7);
        assert_eq!(inst.theta0(), 3.0);
        assert_eq!(inst.x0(), &vec![1.0 / 10f64.sqrt(); 10][..]);
        assert_eq!(inst.constraint().rows(), &constraint_matrix(10)[..]);
        assert_eq!(inst.constraint().offsets(), &[0.0, 0.0, 0.0]);
        assert!(inst.lipschitz() >= 1141f64.sqrt());
    }

    #[test]
    fn remark4_instance_shape() {
        let inst = generate(&GeneratorSpec::new(Family::Remark4, 999, 5)).unwrap();
        assert_eq!(inst, remark4_instance(10).unwrap());
        assert_eq!(inst.objectives().len(), 3);
        assert_eq!(inst.constraint().offsets(), &[1.0, 0.0, 0.0]);
        assert_eq!(inst.constraint().rows()[2][9], 500.0);
        let x0 = inst.x0().to_vec();
        let g = inst.constraint().component_values(&x0).unwrap();
        let s = 10f64.sqrt();
        assert!((g[0] - (55.0 / s + 1.0)).abs() < 1e-12);
        assert!((g[1] - 550.0 / s).abs() < 1e-12);
        assert!((g[2] - 2750.0 / s).abs() < 1e-12);
    }

    #[test]
    fn default_params() {
        let p = default_run_params(&GeneratorSpec::new(Family::Normal01, 3000, 0));
        assert_eq!(p.n, 3000);
        assert!((p.eps - 0.018257).abs() < 1e-6);
        let p = default_run_params(&GeneratorSpec::new(Family::Remark4, 3000, 0));
        assert_eq!((p.n, p.eps), (3, 0.5));
        let p = default_run_params(&GeneratorSpec::new(Family::Gumbel, 1, 0));
        assert_eq!(p.eps, 1.0);
    }

    #[test]
    fn example_names() {
        assert_eq!(Family::from_example("1"), Some(Family::Normal01));
        assert_eq!(Family::from_example("remark4"), Some(Family::Remark4));
        assert_eq!(Family::from_example("6"), None);
        assert!(generate(&GeneratorSpec::new(Family::Normal01, 0, 0)).is_err());
    }
}
