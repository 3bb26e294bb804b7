#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use omd_core::oracles::{
    AffineAbsObjective, MaxAffineConstraint, Objective, SqrtQuadraticObjective,
};
use omd_core::prox::{ProxKind, ProxSetup};
use omd_core::ProblemInstance;

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }
}

pub fn lp(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Random setup of dimension `lo..=hi`.
pub fn random_setup(rng: &mut TestRng, lo: usize, hi: usize) -> ProxSetup {
    let n = lo + rng.index(hi - lo + 1);
    match rng.index(4) {
        0 => ProxSetup::euclidean_ball(n).unwrap(),
        1 => ProxSetup::entropy_simplex(n).unwrap(),
        2 => ProxSetup::pnorm_ball(n, rng.range(1.1, 2.0)).unwrap(),
        _ if n >= 3 => ProxSetup::pnorm_ball_log_exponent(n).unwrap(),
        _ => ProxSetup::pnorm_ball(n, 1.5).unwrap(),
    }
}

/// Random feasible point; simplex points are strictly positive. About one
/// in five ball points lies on the boundary.
pub fn random_point(setup: &ProxSetup, rng: &mut TestRng) -> Vec<f64> {
    let n = setup.dimension();
    match setup.kind() {
        ProxKind::EntropySimplex => {
            let spread = rng.range(0.1, 8.0);
            let w: Vec<f64> = (0..n).map(|_| (spread * rng.normal()).exp()).collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|v| v / s).collect()
        }
        kind => {
            let p = kind.primal_exponent();
            let v = rng.normal_vec(n);
            let r = if rng.index(5) == 0 {
                1.0
            } else {
                rng.uniform().powf(1.0 / n as f64)
            };
            let norm = lp(&v, p);
            v.iter().map(|x| r * x / norm).collect()
        }
    }
}

// Distance generating functions written out independently of the library.

pub fn dgf(kind: ProxKind, u: &[f64]) -> f64 {
    match kind {
        ProxKind::EuclideanBall => 0.5 * dot(u, u),
        ProxKind::EntropySimplex => u
            .iter()
            .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
            .sum(),
        ProxKind::PNormBall { p } => lp(u, p).powi(2) / (2.0 * (p - 1.0)),
    }
}

pub fn dgf_grad(kind: ProxKind, u: &[f64]) -> Vec<f64> {
    match kind {
        ProxKind::EuclideanBall => u.to_vec(),
        ProxKind::EntropySimplex => u.iter().map(|v| 1.0 + v.ln()).collect(),
        ProxKind::PNormBall { p } => {
            let nrm = lp(u, p);
            if nrm == 0.0 {
                return vec![0.0; u.len()];
            }
            u.iter()
                .map(|&v| nrm.powf(2.0 - p) * v.abs().powf(p - 1.0) * v.signum() / (p - 1.0))
                .collect()
        }
    }
}

pub fn bregman(kind: ProxKind, x: &[f64], u: &[f64]) -> f64 {
    let g = dgf_grad(kind, x);
    dgf(kind, u) - dgf(kind, x) - dot(&g, u) + dot(&g, x)
}

/// Damped Newton with a finite-difference Hessian of an analytic gradient.
/// Falls back to steepest descent when the Newton direction is not a
/// descent direction. A step is accepted if it passes an Armijo test on `f`
/// or, once `f` no longer resolves the change, if it shrinks the gradient.
pub fn newton(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    start: Vec<f64>,
) -> Vec<f64> {
    let n = start.len();
    let mut z = start;
    let mut fz = f(&z);
    let mut g = grad(&z);
    for _ in 0..500 {
        let gnorm = lp(&g, f64::INFINITY);
        if gnorm < 1e-15 {
            break;
        }
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let step = 1e-6 * z[j].abs().max(1e-3);
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += step;
            zm[j] -= step;
            let (gp, gm) = (grad(&zp), grad(&zm));
            for i in 0..n {
                hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let steepest: Vec<f64> = g.iter().map(|v| -v).collect();
        let dir = match hess.lu().solve(&DVector::from_column_slice(&g)) {
            Some(d) if d.iter().all(|v| v.is_finite()) && dot(d.as_slice(), &g) > 0.0 => {
                d.iter().map(|v| -v).collect()
            }
            _ => steepest,
        };
        let slope = dot(&dir, &g);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..80 {
            let cand: Vec<f64> = z.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let fc = f(&cand);
            let gc = grad(&cand);
            let armijo = fc <= fz + 1e-4 * t * slope && fc < fz;
            let flat =
                (fc - fz).abs() <= 1e-15 * (1.0 + fz.abs()) && lp(&gc, f64::INFINITY) < gnorm;
            if fc.is_finite() && (armijo || flat) {
                z = cand;
                fz = fc;
                g = gc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    z
}

/// Numeric `argmin_{u ∈ Q} ⟨h p, u⟩ + V(x, u)`.
///
/// Balls: with `c = ∇d(x) − h p`, minimize `d(u) − ⟨c, u⟩ + λ ‖u‖_r² / 2`
/// by Newton and bisect on λ ≥ 0 until the minimizer has norm 1 (or take
/// λ = 0 if that minimizer is already inside). Simplex: minimize over a
/// softmax parametrization with the last logit pinned to 0.
pub fn numeric_prox(setup: &ProxSetup, x: &[f64], p: &[f64], h: f64) -> Vec<f64> {
    let kind = setup.kind();
    match kind {
        ProxKind::EntropySimplex => simplex_prox(x, p, h),
        _ => {
            let r = kind.primal_exponent();
            let gx = dgf_grad(kind, x);
            let c: Vec<f64> = gx.iter().zip(p).map(|(g, q)| g - h * q).collect();
            let solve = |lambda: f64, start: Vec<f64>| {
                let value = |u: &[f64]| dgf(kind, u) - dot(&c, u) + lambda * lp(u, r).powi(2) / 2.0;
                let gradient = |u: &[f64]| {
                    let gd = dgf_grad(kind, u);
                    // ∇(‖u‖_r² / 2) = ‖u‖_r^{2−r} |u|^{r−1} sign(u)
                    let nrm = lp(u, r);
                    (0..u.len())
                        .map(|i| {
                            let gn = if nrm == 0.0 {
                                0.0
                            } else {
                                nrm.powf(2.0 - r) * u[i].abs().powf(r - 1.0) * u[i].signum()
                            };
                            gd[i] - c[i] + lambda * gn
                        })
                        .collect::<Vec<f64>>()
                };
                newton(value, gradient, start)
            };
            let start: Vec<f64> = x
                .iter()
                .map(|v| if *v == 0.0 { 1e-3 } else { *v })
                .collect();
            let free = solve(0.0, start);
            if lp(&free, r) <= 1.0 {
                return free;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            let mut u_hi = solve(hi, free.clone());
            while lp(&u_hi, r) > 1.0 {
                lo = hi;
                hi *= 2.0;
                u_hi = solve(hi, u_hi);
            }
            let mut u = u_hi;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                u = solve(mid, u);
                if lp(&u, r) > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            u
        }
    }
}

/// For a multiplier μ on `Σ u = 1`, each coordinate minimizes the 1-D
/// convex function `u (h p_j + ln(u / x_j)) + μ u`; that minimizer is found
/// by bisection on the sign of the derivative over `ln u ∈ [−745, 0]`.
/// An outer bisection on μ drives the total mass to 1.
fn simplex_prox(x: &[f64], p: &[f64], h: f64) -> Vec<f64> {
    let coordinate = |j: usize, mu: f64| {
        let slope = |t: f64| h * p[j] + t - x[j].ln() + 1.0 + mu;
        let (mut lo, mut hi) = (-745.0_f64, 0.0_f64);
        if slope(hi) <= 0.0 {
            return 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    };
    let mass = |mu: f64| (0..x.len()).map(|j| coordinate(j, mu)).sum::<f64>();
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    while mass(lo) < 1.0 {
        lo *= 2.0;
    }
    while mass(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    (0..x.len()).map(|j| coordinate(j, mu)).collect()
}

/// Random desk-scale instance: dimension ≤ 10, N ≤ 200 objectives, 1–3
/// constraint components with a strictly feasible point, and Θ₀ chosen so
/// that `V(x⁰, u) ≤ Θ₀²` on all of Q.
pub struct DeskInstance {
    pub instance: ProblemInstance,
    pub n: usize,
    pub eps: f64,
}

pub fn desk_instance(rng: &mut TestRng) -> DeskInstance {
    let n_dim = 2 + rng.index(9);
    let setup = match rng.index(3) {
        0 => ProxSetup::euclidean_ball(n_dim).unwrap(),
        1 => ProxSetup::entropy_simplex(n_dim).unwrap(),
        _ => ProxSetup::pnorm_ball(n_dim, rng.range(1.2, 2.0)).unwrap(),
    };
    let (x0, theta0) = match setup.kind() {
        ProxKind::EuclideanBall => {
            let x0: Vec<f64> = random_point(&setup, rng).iter().map(|v| 0.5 * v).collect();
            let t = (1.0 + lp(&x0, 2.0)) / 2f64.sqrt();
            (x0, t)
        }
        ProxKind::EntropySimplex => (vec![1.0 / n_dim as f64; n_dim], (n_dim as f64).ln().sqrt()),
        ProxKind::PNormBall { .. } => (vec![0.0; n_dim], setup.suggested_theta0()),
    };
    let setup = setup.with_theta0(theta0).unwrap();

    let n = 10 + rng.index(191);
    let objectives: Vec<Objective> = (0..n)
        .map(|_| match rng.index(4) {
            0 => SqrtQuadraticObjective::neighbour_sum(n_dim).unwrap().into(),
            1 => {
                let a = rng.normal_vec(n_dim);
                let b = rng.normal();
                AffineAbsObjective::new(a, b).unwrap().into()
            }
            _ => {
                let a: Vec<f64> = (0..n_dim).map(|_| rng.range(0.0, 1.0)).collect();
                let b = rng.range(0.0, 1.0);
                AffineAbsObjective::new(a, b).unwrap().into()
            }
        })
        .collect();

    let inner = random_point(&setup, rng);
    let centre: Vec<f64> = match setup.kind() {
        ProxKind::EntropySimplex => inner,
        _ => inner.iter().map(|v| 0.7 * v).collect(),
    };
    let k = 1 + rng.index(3);
    let rows: Vec<Vec<f64>> = (0..k).map(|_| rng.normal_vec(n_dim)).collect();
    let offsets: Vec<f64> = rows
        .iter()
        .map(|a| -dot(a, &centre) - rng.range(0.05, 0.5))
        .collect();
    let constraint = MaxAffineConstraint::new(rows, offsets).unwrap();

    let instance = ProblemInstance::new(objectives, constraint, setup, x0).unwrap();
    let eps = rng.range(0.5, 2.0) / (n as f64).sqrt();
    DeskInstance { instance, n, eps }
}
