//! Left-invariant Hamiltonian geodesic flows on SE(3).
//!
//! The state is `(γ, λ)` with `λ` in left-invariant dual-frame coordinates.
//! The flow is
//!
//! ```text
//! γ̇ = γ · u,   u = 𝒢⁻¹λ   (u = 𝒢⁻¹P_Δ*λ in the sub-Riemannian case)
//! λ̇ = coad_u(λ)
//! ```
//!
//! with Hamiltonian `h = ½⟨λ, 𝒢⁻¹λ⟩`. Momentum is advanced with classical
//! RK4; the configuration with the Munthe-Kaas variant of RK4 so that every
//! step is an exact group element `γ_{k+1} = γ_k · exp(θ_k)`.

use std::io::{self, Write};

use nalgebra::{Vector3, Vector6};

use crate::error::{GeoError, Result};
use crate::metric::{MetricMode, MetricParams};
use crate::se3::{exp_se3, AlgebraVector, RigidMotion};
use crate::tolerances::HAMILTONIAN_BUDGET;

/// A point of the cotangent bundle in left-trivialised coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub g: RigidMotion,
    pub lam: Vector6<f64>,
}

impl PhaseState {
    pub fn new(g: RigidMotion, lam: Vector6<f64>) -> Self {
        PhaseState { g, lam }
    }

    pub fn at_identity(lam: Vector6<f64>) -> Self {
        PhaseState { g: RigidMotion::identity(), lam }
    }
}

/// Sampled geodesic on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub velocities: Vec<AlgebraVector>,
    pub metric: MetricParams,
}

/// ½ Σ gⁱⁱ λ_i², where the sum runs over the directions the flow can move in.
pub fn hamiltonian(lam: &Vector6<f64>, m: &MetricParams) -> f64 {
    let inv = m.inverse_diagonal();
    0.5 * (0..6).map(|i| inv[i] * lam[i] * lam[i]).sum::<f64>()
}

/// u = 𝒢⁻¹λ (with the dual projection applied in SR mode).
pub fn velocity(lam: &Vector6<f64>, m: &MetricParams) -> AlgebraVector {
    let inv = m.inverse_diagonal();
    AlgebraVector(Vector6::from_fn(|i, _| inv[i] * lam[i]))
}

/// Closed form of coad_u(λ) on se(3).
///
/// With u = (v, ω) and λ = (p, l) split into translational and rotational
/// parts, `[u, w] = (ω_u × v_w − ω_w × v_u, ω_u × ω_w)` gives
/// `coad_u(λ) = (p × ω, p × v + l × ω)`.
#[inline]
pub fn coad_fast(u: &AlgebraVector, lam: &Vector6<f64>) -> Vector6<f64> {
    let v = Vector3::new(u[0], u[1], u[2]);
    let w = Vector3::new(u[3], u[4], u[5]);
    let p = Vector3::new(lam[0], lam[1], lam[2]);
    let l = Vector3::new(lam[3], lam[4], lam[5]);
    let a = p.cross(&w);
    let b = p.cross(&v) + l.cross(&w);
    Vector6::new(a.x, a.y, a.z, b.x, b.y, b.z)
}

#[inline]
fn bracket_fast(a: &AlgebraVector, b: &AlgebraVector) -> AlgebraVector {
    let va = Vector3::new(a[0], a[1], a[2]);
    let wa = Vector3::new(a[3], a[4], a[5]);
    let vb = Vector3::new(b[0], b[1], b[2]);
    let wb = Vector3::new(b[3], b[4], b[5]);
    AlgebraVector::from_parts(wa.cross(&vb) - wb.cross(&va), wa.cross(&wb))
}

/// Inverse of the left-trivialised derivative of exp, truncated at the order
/// needed for a fourth-order method. For `γ = γ₀·exp(θ)` and `γ̇ = γu` this is
/// θ̇ = u + ½[θ,u] + (1/12)[θ,[θ,u]] + O(θ⁴).
#[inline]
fn dexp_inv(theta: &AlgebraVector, u: &AlgebraVector) -> AlgebraVector {
    let tu = bracket_fast(theta, u);
    let ttu = bracket_fast(theta, &tu);
    *u + 0.5 * tu + (1.0 / 12.0) * ttu
}

/// Right-hand side of the flow: the velocity and λ̇.
pub fn flow_rhs(s: &PhaseState, m: &MetricParams) -> (AlgebraVector, Vector6<f64>) {
    let lam = prepare_momentum(&s.lam, m);
    let u = velocity(&lam, m);
    (u, coad_fast(&u, &lam))
}

/// In gauge-invariant mode λ₆ = g₆₆u⁶ = 0 is a constraint of the flow.
fn prepare_momentum(lam: &Vector6<f64>, m: &MetricParams) -> Vector6<f64> {
    let mut lam = *lam;
    if m.mode() == MetricMode::GaugeInvariant {
        lam[5] = 0.0;
    }
    lam
}

/// One RK4 / RKMK4 step.
#[inline]
fn step(g: &RigidMotion, lam: &Vector6<f64>, dt: f64, inv: &[f64; 6]) -> (RigidMotion, Vector6<f64>) {
    let vel = |l: &Vector6<f64>| AlgebraVector(Vector6::from_fn(|i, _| inv[i] * l[i]));

    let u1 = vel(lam);
    let k1 = coad_fast(&u1, lam);
    let l2 = lam + k1 * (0.5 * dt);
    let u2 = vel(&l2);
    let k2 = coad_fast(&u2, &l2);
    let l3 = lam + k2 * (0.5 * dt);
    let u3 = vel(&l3);
    let k3 = coad_fast(&u3, &l3);
    let l4 = lam + k3 * dt;
    let u4 = vel(&l4);
    let k4 = coad_fast(&u4, &l4);
    let lam_next = lam + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);

    let f1 = u1;
    let f2 = dexp_inv(&((0.5 * dt) * f1), &u2);
    let f3 = dexp_inv(&((0.5 * dt) * f2), &u3);
    let f4 = dexp_inv(&(dt * f3), &u4);
    let theta = (dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    (g.compose(&exp_se3(&theta)), lam_next)
}

fn check_args(t_final: f64, steps: usize) -> Result<()> {
    if steps < 1 {
        return Err(GeoError::InvalidArgument("steps must be at least 1".into()));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(GeoError::InvalidArgument(format!("final time must be positive, got {t_final}")));
    }
    Ok(())
}

/// Integrates the geodesic flow on `[0, t_final]` with `steps` uniform steps.
///
/// Fails with [`GeoError::StepCountTooSmall`] when the Hamiltonian drifts by
/// more than 1e-6·max(1, h₀).
pub fn integrate(s0: &PhaseState, m: &MetricParams, t_final: f64, steps: usize) -> Result<Trajectory> {
    check_args(t_final, steps)?;
    let inv = m.inverse_diagonal();
    let dt = t_final / steps as f64;
    let mut lam = prepare_momentum(&s0.lam, m);
    let mut g = s0.g;
    let h0 = hamiltonian(&lam, m);
    let budget = HAMILTONIAN_BUDGET * h0.max(1.0);

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut velocities = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(PhaseState::new(g, lam));
    velocities.push(velocity(&lam, m));
    for k in 1..=steps {
        (g, lam) = step(&g, &lam, dt, &inv);
        let drift = (hamiltonian(&lam, m) - h0).abs();
        if !(drift <= budget) {
            return Err(GeoError::StepCountTooSmall { drift });
        }
        times.push(if k == steps { t_final } else { k as f64 * dt });
        states.push(PhaseState::new(g, lam));
        velocities.push(velocity(&lam, m));
    }
    Ok(Trajectory { times, states, velocities, metric: *m })
}

/// End point of the flow from the identity, without storing the path.
pub fn flow_endpoint(lam0: &Vector6<f64>, m: &MetricParams, t_final: f64, steps: usize) -> Result<PhaseState> {
    check_args(t_final, steps)?;
    let inv = m.inverse_diagonal();
    let dt = t_final / steps as f64;
    let mut lam = prepare_momentum(lam0, m);
    let mut g = RigidMotion::identity();
    for _ in 0..steps {
        (g, lam) = step(&g, &lam, dt, &inv);
    }
    Ok(PhaseState::new(g, lam))
}

/// Maximum deviations of λ₆, h and u⁶ from their initial values.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MomentumDiagnostics {
    pub max_lam6_drift: f64,
    pub max_ham_drift: f64,
    pub max_u6_drift: f64,
}

pub fn momentum_diagnostics(tr: &Trajectory) -> Result<MomentumDiagnostics> {
    let first = tr
        .states
        .first()
        .ok_or_else(|| GeoError::InvalidArgument("empty trajectory".into()))?;
    let lam6 = first.lam[5];
    let h0 = hamiltonian(&first.lam, &tr.metric);
    let u6 = tr.velocities[0][5];
    let mut d = MomentumDiagnostics { max_lam6_drift: 0.0, max_ham_drift: 0.0, max_u6_drift: 0.0 };
    for (s, u) in tr.states.iter().zip(&tr.velocities) {
        d.max_lam6_drift = d.max_lam6_drift.max((s.lam[5] - lam6).abs());
        d.max_ham_drift = d.max_ham_drift.max((hamiltonian(&s.lam, &tr.metric) - h0).abs());
        d.max_u6_drift = d.max_u6_drift.max((u[5] - u6).abs());
    }
    Ok(d)
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Trajectory {
    pub const CSV_HEADER: &'static str =
        "t,x,y,z,R11,R12,R13,R21,R22,R23,R31,R32,R33,lam1,lam2,lam3,lam4,lam5,lam6,u1,u2,u3,u4,u5,u6";

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn end(&self) -> &PhaseState {
        self.states.last().expect("trajectory is never empty")
    }

    /// Writes the CSV body (header and one row per sample).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for ((t, s), u) in self.times.iter().zip(&self.states).zip(&self.velocities) {
            let mut fields = vec![fmt_f64(*t)];
            fields.extend(s.g.to_array().iter().map(|v| fmt_f64(*v)));
            fields.extend(s.lam.iter().map(|v| fmt_f64(*v)));
            fields.extend(u.0.iter().map(|v| fmt_f64(*v)));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}
