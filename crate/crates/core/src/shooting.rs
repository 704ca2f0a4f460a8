//! Geodesic distance on SE(3) by shooting on the initial momentum, and an
//! independent discrete-energy oracle.
//!
//! Geodesics are parametrised on `[0, 1]`, so the length of the geodesic with
//! initial momentum `λ₀` is its speed `√(2h(λ₀))`.
//!
//! Shooting only finds stationary geodesics. Global minimality is supported by
//! multi-start consensus (and the oracle), not certified. Only normal
//! extremals are reached in sub-Riemannian mode.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{Matrix6, Owned, Vector6, U6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::flow::{flow_endpoint, hamiltonian, integrate, PhaseState, Trajectory};
use crate::metric::{algebra_norm, MetricMode, MetricParams};
use crate::optim::{lbfgs, nelder_mead};
use crate::se3::{exp_se3, log_se3, AlgebraVector, RigidMotion};

/// Solver settings. JSON layout:
/// `{"tol":1e-8,"restarts":8,"steps":1000,"maxRho":3.0,"seed":0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct ShootingConfig {
    /// Endpoint tolerance on ‖log(γ(1)⁻¹·target)‖₂.
    pub tol: f64,
    /// Random starts in addition to the exponential-curve seed.
    pub restarts: usize,
    /// Integration steps on [0, 1].
    pub steps: usize,
    /// Largest admissible ρ of the target.
    pub max_rho: f64,
    pub seed: u64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig { tol: 1e-8, restarts: 8, steps: 1000, max_rho: 3.0, seed: 0 }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.steps < 1 || !(self.max_rho > 0.0) {
            return Err(GeoError::InvalidArgument(format!("invalid shooting config {self:?}")));
        }
        Ok(())
    }
}

/// One converged (or best-effort) solution of the boundary-value problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Candidate {
    pub distance: f64,
    #[serde(serialize_with = "ser_vec6")]
    pub lam0: Vector6<f64>,
    pub endpoint_error: f64,
}

fn ser_vec6<S: serde::Serializer>(v: &Vector6<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.as_slice().serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShootingResult {
    pub distance: f64,
    #[serde(serialize_with = "ser_vec6")]
    pub lam0: Vector6<f64>,
    pub endpoint_error: f64,
    pub converged: bool,
    #[serde(skip)]
    pub trajectory: Trajectory,
    /// Other converged geodesics, shortest first.
    pub alternatives: Vec<Candidate>,
}

impl ShootingResult {
    /// Alternatives whose length ties the winner within `slack`.
    pub fn ties(&self, slack: f64) -> Vec<Candidate> {
        self.alternatives.iter().copied().filter(|c| c.distance - self.distance <= slack).collect()
    }
}

/// Length of the unit-time geodesic with initial momentum `lam0`.
pub fn momentum_length(lam0: &Vector6<f64>, m: &MetricParams) -> f64 {
    (2.0 * hamiltonian(lam0, m)).max(0.0).sqrt()
}

/// Finite stand-in used for reach and seeding in sub-Riemannian mode, where
/// the translational A₁, A₂ weight is infinite.
fn finite_surrogate(m: &MetricParams) -> MetricParams {
    match m.mode() {
        MetricMode::SubRiemannian => MetricParams::riemannian(m.g33(), m.g33(), m.g44(), m.g66())
            .expect("components of a valid metric are positive"),
        _ => *m,
    }
}

/// ‖log target‖ measured by the metric (or its finite surrogate in SR mode).
pub fn reach_measure(target: &RigidMotion, m: &MetricParams) -> Result<f64> {
    algebra_norm(&log_se3(target)?, &finite_surrogate(m))
}

/// Momentum of the exponential curve `t ↦ exp(t·log target)`, restricted to
/// the directions the flow can use.
pub fn exp_seed(target: &RigidMotion, m: &MetricParams) -> Result<Vector6<f64>> {
    let c = log_se3(target)?;
    let mut lam = finite_surrogate(m).lower(&c);
    match m.mode() {
        MetricMode::SubRiemannian => {
            lam[0] = 0.0;
            lam[1] = 0.0;
            lam[5] = 0.0;
        }
        MetricMode::GaugeInvariant => lam[5] = 0.0,
        MetricMode::Riemannian => {}
    }
    Ok(lam)
}

fn endpoint_residual(lam: &Vector6<f64>, target: &RigidMotion, m: &MetricParams, steps: usize) -> Option<Vector6<f64>> {
    let end = flow_endpoint(lam, m, 1.0, steps).ok()?;
    let r = log_se3(&end.g.inverse().compose(target)).ok()?.0;
    r.iter().all(|v| v.is_finite()).then_some(r)
}

struct EndpointProblem<'a> {
    lam: Vector6<f64>,
    residual: Option<Vector6<f64>>,
    target: &'a RigidMotion,
    m: &'a MetricParams,
    steps: usize,
}

impl<'a> EndpointProblem<'a> {
    fn new(lam: Vector6<f64>, target: &'a RigidMotion, m: &'a MetricParams, steps: usize) -> Self {
        let residual = endpoint_residual(&lam, target, m, steps);
        EndpointProblem { lam, residual, target, m, steps }
    }
}

impl LeastSquaresProblem<f64, U6, U6> for EndpointProblem<'_> {
    type ResidualStorage = Owned<f64, U6>;
    type JacobianStorage = Owned<f64, U6, U6>;
    type ParameterStorage = Owned<f64, U6>;

    fn set_params(&mut self, x: &Vector6<f64>) {
        self.lam = *x;
        self.residual = endpoint_residual(x, self.target, self.m, self.steps);
    }

    fn params(&self) -> Vector6<f64> {
        self.lam
    }

    fn residuals(&self) -> Option<Vector6<f64>> {
        self.residual
    }

    fn jacobian(&self) -> Option<Matrix6<f64>> {
        let r0 = self.residual?;
        let mut jac = Matrix6::zeros();
        for i in 0..6 {
            let h = 1e-7 * self.lam[i].abs().max(1.0);
            let mut lam = self.lam;
            lam[i] += h;
            let r = endpoint_residual(&lam, self.target, self.m, self.steps)?;
            jac.set_column(i, &((r - r0) / h));
        }
        Some(jac)
    }
}

fn candidate(lam: Vector6<f64>, target: &RigidMotion, m: &MetricParams, steps: usize) -> Option<Candidate> {
    let r = endpoint_residual(&lam, target, m, steps)?;
    Some(Candidate { distance: momentum_length(&lam, m), lam0: lam, endpoint_error: r.norm() })
}

fn levenberg_marquardt(start: Vector6<f64>, target: &RigidMotion, m: &MetricParams, steps: usize) -> Option<Candidate> {
    let problem = EndpointProblem::new(start, target, m, steps);
    problem.residual?;
    let (solved, _report) = LevenbergMarquardt::new().with_patience(30).minimize(problem);
    let mut lam = solved.lam;
    if m.mode() == MetricMode::GaugeInvariant {
        lam[5] = 0.0;
    }
    candidate(lam, target, m, steps)
}

/// Solves the boundary-value problem from one start. Levenberg–Marquardt on
/// the endpoint residual does the work; when it stalls above `tol`, a simplex
/// pass on ‖residual‖ relocates the start and Levenberg–Marquardt runs again.
fn solve_from(start: Vector6<f64>, target: &RigidMotion, m: &MetricParams, cfg: &ShootingConfig) -> Option<Candidate> {
    let first = levenberg_marquardt(start, target, m, cfg.steps);
    if first.is_some_and(|c| c.endpoint_error <= cfg.tol) {
        return first;
    }
    let from = first.map_or(start, |c| c.lam0);
    let f = |x: &[f64]| {
        endpoint_residual(&Vector6::from_column_slice(x), target, m, cfg.steps).map_or(f64::INFINITY, |r| r.norm())
    };
    let step = 0.2 * from.norm().max(0.5);
    let (x, _) = nelder_mead(f, from.as_slice(), step, 1e-12, 300).ok()?;
    let second = levenberg_marquardt(Vector6::from_column_slice(&x), target, m, cfg.steps);
    match (first, second) {
        (Some(a), Some(b)) => Some(if b.endpoint_error < a.endpoint_error { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// Geodesic distance d(target, e) by multi-start shooting.
pub fn shoot_distance(target: &RigidMotion, m: &MetricParams, cfg: &ShootingConfig) -> Result<ShootingResult> {
    shoot_distance_with_guess(target, m, cfg, &[])
}

/// As [`shoot_distance`], with extra starting momenta tried right after the
/// exponential-curve seed (used for warm starts along a family of targets).
///
/// Gauge-invariant metrics are not distances on SE(3) and are rejected; use
/// [`MetricParams::with_g66`] to pick a fiber weight.
pub fn shoot_distance_with_guess(
    target: &RigidMotion,
    m: &MetricParams,
    cfg: &ShootingConfig,
    guesses: &[Vector6<f64>],
) -> Result<ShootingResult> {
    let seed = checked_seed(target, m, cfg)?;
    let mut starts = vec![seed];
    starts.extend_from_slice(guesses);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = 0.5 * seed.norm().max(0.2);
    for _ in 0..cfg.restarts {
        let mut lam = seed + Vector6::from_fn(|_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        });
        if m.mode() == MetricMode::SubRiemannian {
            // λ₁, λ₂, λ₆ only enter through the momentum equation; keep them modest
            for i in [0, 1, 5] {
                lam[i] *= 0.5;
            }
        }
        starts.push(lam);
    }
    shoot_from_starts(target, m, cfg, &starts)
}

fn checked_seed(target: &RigidMotion, m: &MetricParams, cfg: &ShootingConfig) -> Result<Vector6<f64>> {
    cfg.validate()?;
    if m.mode() == MetricMode::GaugeInvariant {
        return Err(GeoError::InvalidArgument(
            "shooting needs a positive fiber weight g66; gauge-invariant metrics only define distances on the quotient"
                .into(),
        ));
    }
    let rho = reach_measure(target, m)?;
    if rho > cfg.max_rho {
        return Err(GeoError::OutOfReach { rho, max_rho: cfg.max_rho });
    }
    exp_seed(target, m)
}

/// Shooting from exactly the given starting momenta (no seed, no random
/// restarts); `cfg.restarts` and `cfg.seed` are ignored.
pub fn shoot_from_starts(
    target: &RigidMotion,
    m: &MetricParams,
    cfg: &ShootingConfig,
    starts: &[Vector6<f64>],
) -> Result<ShootingResult> {
    checked_seed(target, m, cfg)?;
    let mut found: Vec<Candidate> = Vec::new();
    let mut best_effort: Option<Candidate> = None;
    for &start in starts {
        let Some(c) = solve_from(start, target, m, cfg) else { continue };
        if c.endpoint_error <= cfg.tol {
            let duplicate = found
                .iter()
                .any(|f| (f.lam0 - c.lam0).norm() <= 1e-6 * c.lam0.norm().max(1.0));
            if !duplicate {
                found.push(c);
            }
        } else if best_effort.is_none_or(|b| c.endpoint_error < b.endpoint_error) {
            best_effort = Some(c);
        }
    }
    found.sort_by(|a, b| a.distance.total_cmp(&b.distance));

    let Some(best) = found.first().copied() else {
        return Err(GeoError::NoConvergence {
            best_error: best_effort.map_or(f64::INFINITY, |c| c.endpoint_error),
        });
    };
    let trajectory = integrate(&PhaseState::at_identity(best.lam0), m, 1.0, cfg.steps)?;
    Ok(ShootingResult {
        distance: best.distance,
        lam0: best.lam0,
        endpoint_error: best.endpoint_error,
        converged: true,
        trajectory,
        alternatives: found[1..].to_vec(),
    })
}

/// Length of the shortest curve from `e` to `target` made of `segments`
/// exponential pieces, found by minimising the discrete energy
/// `N·Σ‖cᵢ‖²` with L-BFGS from the straight-log initialisation.
///
/// Independent of the Hamiltonian machinery; used to cross-check
/// [`shoot_distance`]. Requires a finite metric (Riemannian or
/// gauge-invariant).
pub fn energy_oracle_distance(target: &RigidMotion, m: &MetricParams, segments: usize) -> Result<f64> {
    if segments < 8 {
        return Err(GeoError::InvalidArgument(format!("need at least 8 segments, got {segments}")));
    }
    if m.mode() == MetricMode::SubRiemannian {
        return Err(GeoError::InvalidArgument("the energy oracle needs a finite metric".into()));
    }
    let c = log_se3(target)?;
    if c.norm() == 0.0 {
        return Ok(0.0);
    }
    let n = segments;
    let g = m.diagonal();
    // interior points gᵢ = gᵢ⁰·exp(δᵢ), i = 1..N−1
    let base: Vec<RigidMotion> = (0..=n).map(|i| exp_se3(&((i as f64 / n as f64) * c))).collect();
    let point = |x: &[f64], i: usize| -> RigidMotion {
        if i == 0 || i == n {
            return base[i];
        }
        let d = &x[6 * (i - 1)..6 * i];
        base[i].compose(&exp_se3(&AlgebraVector::new([d[0], d[1], d[2], d[3], d[4], d[5]])))
    };
    let sq_norm = |a: &RigidMotion, b: &RigidMotion| -> f64 {
        match log_se3(&a.inverse().compose(b)) {
            Ok(v) => (0..6).map(|k| g[k] * v[k] * v[k]).sum(),
            Err(_) => f64::INFINITY,
        }
    };
    let energy = |x: &[f64]| -> f64 {
        let pts: Vec<RigidMotion> = (0..=n).map(|i| point(x, i)).collect();
        n as f64 * pts.windows(2).map(|w| sq_norm(&w[0], &w[1])).sum::<f64>()
    };
    // each δᵢ only touches the two segments meeting at gᵢ
    let gradient = |x: &[f64]| -> Vec<f64> {
        let pts: Vec<RigidMotion> = (0..=n).map(|i| point(x, i)).collect();
        let mut y = x.to_vec();
        let mut grad = vec![0.0; x.len()];
        let h = 1e-6;
        for i in 1..n {
            for k in 0..6 {
                let j = 6 * (i - 1) + k;
                let local = |y: &[f64]| {
                    let p = point(y, i);
                    sq_norm(&pts[i - 1], &p) + sq_norm(&p, &pts[i + 1])
                };
                let xj = y[j];
                y[j] = xj + h;
                let fp = local(&y);
                y[j] = xj - h;
                let fm = local(&y);
                y[j] = xj;
                grad[j] = n as f64 * (fp - fm) / (2.0 * h);
            }
        }
        grad
    };
    let x0 = vec![0.0; 6 * (n - 1)];
    let e0 = energy(&x0);
    let (x, e, _) = lbfgs(energy, gradient, x0, 1e-9 * e0.max(1e-12), 2000)?;
    let gnorm = gradient(&x).iter().map(|v| v * v).sum::<f64>().sqrt();
    if !e.is_finite() || gnorm > 1e-4 * e0.sqrt().max(1e-3) {
        return Err(GeoError::NoConvergence { best_error: gnorm });
    }
    let pts: Vec<RigidMotion> = (0..=n).map(|i| point(&x, i)).collect();
    Ok(pts.windows(2).map(|w| sq_norm(&w[0], &w[1]).sqrt()).sum())
}
