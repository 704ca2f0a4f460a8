//! The quotient SE(3)/SO(2) of positions and orientations, its fibers and
//! three sections.
//!
//! `H = {(0, R_z(α))}` stabilises `a = e_z`, so a coset `gH` is a pair
//! `(x, n = R·e_z)`. Every coset is parametrised by
//! `α ↦ σ([g])·(0, R_z(α))`, where `σ` is the closed-form section with
//! Euler angle condition `α = −γ`.
//!
//! * `σ`   – closed form,
//! * `σ_ρ` – minimises the logarithmic norm `ρ_𝒢 = ‖log ·‖_𝒢` over the fiber,
//! * `σ_d` – minimises the geodesic distance to `e` over the fiber.
//!
//! Fiber minimisation always starts from a global grid scan: the profile
//! `α ↦ ρ` can change a minimum at `α = 0` into a maximum away from `e`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::flow::fmt_f64;
use crate::metric::{log_norm, MetricMode, MetricParams};
use crate::optim::{brent_root, golden_section, periodic_minima};
use crate::se3::{log_se3, rot_y, rot_z, RigidMotion, Rotation};
use crate::shooting::{shoot_distance_with_guess, shoot_from_starts, ShootingConfig, ShootingResult};
use crate::tolerances::FIBER_DEGENERACY_TOL;

/// Point `(x, n)` of SE(3)/SO(2) with `‖n‖ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoset")]
pub struct CosetPoint {
    pub x: Vector3<f64>,
    pub n: Vector3<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoset {
    x: Vector3<f64>,
    n: Vector3<f64>,
}

impl TryFrom<RawCoset> for CosetPoint {
    type Error = GeoError;

    fn try_from(r: RawCoset) -> Result<Self> {
        CosetPoint::new(r.x, r.n)
    }
}

impl CosetPoint {
    /// Normalises `n`; rejects orientations that are far from unit length.
    pub fn new(x: Vector3<f64>, n: Vector3<f64>) -> Result<Self> {
        let len = n.norm();
        if !x.iter().all(|v| v.is_finite()) || !len.is_finite() || (len - 1.0).abs() > 1e-6 {
            return Err(GeoError::InvalidArgument(format!("orientation must be a unit vector, |n| = {len}")));
        }
        Ok(CosetPoint { x, n: n / len })
    }

    /// `[x, y, z, nx, ny, nz]`.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 6 {
            return Err(GeoError::InvalidArgument(format!("a coset needs 6 numbers, got {}", v.len())));
        }
        CosetPoint::new(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]))
    }

    /// The coset of the identity, `(0, e_z)`.
    pub fn origin() -> Self {
        CosetPoint { x: Vector3::zeros(), n: Vector3::z() }
    }

    /// `n = ±e_z`: the Euler angle γ is undefined.
    pub fn is_degenerate(&self) -> bool {
        (self.n - Vector3::z()).norm() <= FIBER_DEGENERACY_TOL || (self.n + Vector3::z()).norm() <= FIBER_DEGENERACY_TOL
    }

    /// Spherical coordinates `(γ, β)` of `n`, with γ = 0 when undefined.
    pub fn spherical(&self) -> (f64, f64) {
        let beta = self.n.z.clamp(-1.0, 1.0).acos();
        let gamma = if self.is_degenerate() { 0.0 } else { self.n.y.atan2(self.n.x) };
        (gamma, beta)
    }
}

/// `π(g) = (x, R·e_z)`.
pub fn project(g: &RigidMotion) -> CosetPoint {
    CosetPoint { x: g.translation, n: g.rotation.matrix().column(2).into_owned() }
}

fn sigma_rotation(p: &CosetPoint) -> Rotation {
    let (gamma, beta) = p.spherical();
    rot_z(gamma).compose(&rot_y(beta)).compose(&rot_z(-gamma))
}

/// `σ(x, n) = (x, R_z(γ)R_y(β)R_z(−γ))`.
pub fn section_sigma(p: &CosetPoint) -> Result<RigidMotion> {
    if (p.n + Vector3::z()).norm() <= FIBER_DEGENERACY_TOL {
        return Err(GeoError::DegenerateFiber);
    }
    Ok(RigidMotion::new(p.x, sigma_rotation(p)))
}

/// `σ(p)·(0, R_z(α))`. At `n = −e_z` the convention γ = 0 is used (every
/// element is then a half turn); see [`CosetPoint::is_degenerate`].
pub fn fiber_element(p: &CosetPoint, alpha: f64) -> RigidMotion {
    RigidMotion::new(p.x, sigma_rotation(p).compose(&rot_z(alpha)))
}

/// `det(x | n | e_z)`.
pub fn coplanarity(p: &CosetPoint) -> f64 {
    p.x.x * p.n.y - p.x.y * p.n.x
}

/// Minimiser of a function over a fiber.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FiberMinimum {
    pub element: RigidMotion,
    pub alpha: f64,
    pub value: f64,
    /// Other fiber angles whose value ties the minimum.
    pub ties: Vec<f64>,
    /// Grid samples skipped because they sit at the cut locus.
    pub excluded: usize,
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect()
}

/// Maps an angle to `[−π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Global 1-D minimisation over the fiber: grid scan, then golden-section
/// refinement of each competitive grid minimum.
fn fiber_minimize<F>(p: &CosetPoint, f: F, samples: usize, tol: f64, tie: f64) -> Result<FiberMinimum>
where
    F: Fn(f64) -> Result<f64>,
{
    let alphas = grid(samples);
    let mut first_error = None;
    let values: Vec<f64> = alphas
        .iter()
        .map(|&a| match f(a) {
            Ok(v) => v,
            Err(e) => {
                first_error.get_or_insert(e);
                f64::INFINITY
            }
        })
        .collect();
    let excluded = values.iter().filter(|v| v.is_infinite()).count();
    if excluded == samples {
        return Err(match first_error {
            Some(GeoError::AngleAtCutLocus { .. }) | None => GeoError::AllAtCutLocus,
            Some(e) => e,
        });
    }
    let h = 2.0 * PI / samples as f64;
    let best_grid = values.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 1e-3 * best_grid.max(1.0) + 1e-12;
    let g = |a: f64| f(a).unwrap_or(f64::INFINITY);

    let mut refined: Vec<(f64, f64)> = Vec::new();
    for k in periodic_minima(&values, slack).into_iter().take(4) {
        let (a, v) = golden_section(&g, alphas[k] - h, alphas[k] + h, tol)?;
        let (a, v) = if values[k] <= v { (alphas[k], values[k]) } else { (a, v) };
        refined.push((wrap_angle(a), v));
    }
    refined.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (alpha, value) = refined[0];
    let ties = refined[1..]
        .iter()
        .filter(|(a, v)| v - value <= tie && circular_gap(*a, alpha) > 1e-6)
        .map(|(a, _)| *a)
        .collect();
    Ok(FiberMinimum { element: fiber_element(p, alpha), alpha, value, ties, excluded })
}

/// `σ_ρ`: minimiser of `α ↦ ρ_𝒢(fiber_element(p, α))` (256-point scan,
/// golden section to 1e-10).
pub fn section_sigma_rho(p: &CosetPoint, m: &MetricParams) -> Result<FiberMinimum> {
    section_sigma(p)?;
    fiber_minimize(p, |a| log_norm(&fiber_element(p, a), m), 256, 1e-10, 1e-9)
}

/// `Error_𝒢 = ρ(σ) − ρ(σ_ρ)`.
pub fn error_g(p: &CosetPoint, m: &MetricParams) -> Result<f64> {
    let at_sigma = log_norm(&section_sigma(p)?, m)?;
    Ok(at_sigma - section_sigma_rho(p, m)?.value)
}

/// Checks that `σ` minimises the rotational part
/// `√(g₄₄(c₄² + c₅²) + g₆₆c₆²)` of the logarithm over the fiber.
pub fn angular_velocity_min_check(p: &CosetPoint, m: &MetricParams) -> Result<bool> {
    section_sigma(p)?;
    let d = m.diagonal();
    let rot_norm = |a: f64| -> Result<f64> {
        let c = log_se3(&fiber_element(p, a))?;
        Ok((d[3] * (c[3] * c[3] + c[4] * c[4]) + d[5] * c[5] * c[5]).sqrt())
    };
    let at_zero = rot_norm(0.0)?;
    let best = fiber_minimize(p, rot_norm, 256, 1e-10, 1e-9)?;
    Ok(best.alpha.abs() <= 1e-6 || at_zero - best.value <= 1e-9)
}

/// The metric used for distances: gauge-invariant metrics get the fiber
/// weight `g₆₆ := g₄₄`, which does not change fiber minima (their geodesics
/// are horizontal and horizontal lengths ignore `g₆₆`).
pub fn distance_metric(m: &MetricParams) -> Result<MetricParams> {
    if m.mode() == MetricMode::GaugeInvariant {
        m.with_g66(m.g44())
    } else {
        Ok(*m)
    }
}

/// Winner of the distance minimisation over a fiber.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DistanceMinimum {
    pub element: RigidMotion,
    pub alpha: f64,
    pub distance: f64,
    #[serde(skip)]
    pub shot: ShootingResult,
    pub ties: Vec<f64>,
}

impl DistanceMinimum {
    /// `|λ₆(0)| / ‖λ(0)‖` of the winning geodesic (0 for the trivial one).
    pub fn horizontality_defect(&self) -> f64 {
        let n = self.shot.lam0.norm();
        if n == 0.0 {
            0.0
        } else {
            self.shot.lam0[5].abs() / n
        }
    }
}

/// Distance evaluations along one fiber, warm-started from the closest
/// angle already solved.
struct FiberDistance<'a> {
    p: &'a CosetPoint,
    m: MetricParams,
    cfg: ShootingConfig,
    solved: RefCell<Vec<(f64, Vector6<f64>)>>,
}

impl<'a> FiberDistance<'a> {
    fn nearest(&self, alpha: f64) -> Option<Vector6<f64>> {
        let solved = self.solved.borrow();
        solved
            .iter()
            .min_by(|a, b| circular_gap(a.0, alpha).total_cmp(&circular_gap(b.0, alpha)))
            .map(|s| s.1)
    }

    /// Warm-started single-start solve; falls back to a full multi-start.
    fn quick(&self, alpha: f64) -> Result<ShootingResult> {
        let target = fiber_element(self.p, alpha);
        let res = match self.nearest(alpha) {
            Some(lam) => shoot_from_starts(&target, &self.m, &self.cfg, &[lam])
                .or_else(|_| shoot_distance_with_guess(&target, &self.m, &self.cfg, &[])),
            None => shoot_distance_with_guess(&target, &self.m, &ShootingConfig { restarts: 0, ..self.cfg }, &[])
                .or_else(|_| shoot_distance_with_guess(&target, &self.m, &self.cfg, &[])),
        }?;
        self.solved.borrow_mut().push((alpha, res.lam0));
        Ok(res)
    }

    /// Multi-start solve that also tries the nearest warm start.
    fn certified(&self, alpha: f64) -> Result<ShootingResult> {
        let target = fiber_element(self.p, alpha);
        let guesses: Vec<_> = self.nearest(alpha).into_iter().collect();
        let res = shoot_distance_with_guess(&target, &self.m, &self.cfg, &guesses)?;
        self.solved.borrow_mut().push((alpha, res.lam0));
        Ok(res)
    }

    fn forget(&self) {
        self.solved.borrow_mut().clear();
    }
}

/// `σ_d`: minimiser of `α ↦ d_𝒢(fiber_element(p, α), e)`.
///
/// A warm-started 32-point scan locates candidate minima. Each candidate is
/// re-solved with `restarts` random starts and then refined. Along the fiber
/// `d′(α) = λ₆/d`, so refinement solves `λ₆(α) = 0` by Brent's method
/// (golden section on `d` where λ₆ does not change sign).
pub fn section_sigma_d(p: &CosetPoint, m: &MetricParams, cfg: &ShootingConfig) -> Result<DistanceMinimum> {
    section_sigma(p)?;
    let fd = FiberDistance { p, m: distance_metric(m)?, cfg: *cfg, solved: RefCell::new(Vec::new()) };
    let samples = 32;
    let h = 2.0 * PI / samples as f64;
    let alphas = grid(samples);

    // start the scan at α = 0 where the exponential seed is best
    let mut dist = vec![f64::INFINITY; samples];
    let mut last_error = None;
    for k in (0..samples).map(|i| (i + samples / 2) % samples) {
        match fd.quick(alphas[k]) {
            Ok(r) => dist[k] = r.distance,
            Err(e) => last_error = Some(e),
        }
    }
    if dist.iter().all(|d| d.is_infinite()) {
        return Err(last_error.unwrap_or(GeoError::NoConvergence { best_error: f64::INFINITY }));
    }
    let best_grid = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 0.05 * best_grid.max(0.1);

    let mut refined: Vec<(f64, ShootingResult)> = Vec::new();
    for k in periodic_minima(&dist, slack).into_iter().take(3) {
        let a0 = alphas[k];
        let centre = fd.certified(a0)?;
        if centre.distance <= 1e-12 {
            refined.push((a0, centre));
            continue;
        }
        // keep only the branch of the certified centre for warm starts
        fd.forget();
        fd.solved.borrow_mut().push((a0, centre.lam0));
        let lam6 = |a: f64| fd.quick(a).map(|r| r.lam0[5]);
        let (left, right) = (lam6(a0 - h), lam6(a0 + h));
        let mid = centre.lam0[5];
        let root_bracket = match (left, right) {
            (Ok(l), _) if l <= 0.0 && mid >= 0.0 => Some((a0 - h, a0, l, mid)),
            (_, Ok(r)) if mid <= 0.0 && r >= 0.0 => Some((a0, a0 + h, mid, r)),
            _ => None,
        };
        let failure = RefCell::new(None);
        let alpha = match root_bracket {
            Some(_) if mid == 0.0 => a0,
            Some((lo, hi, f_lo, f_hi)) => brent_root(
                // re-solving at the ends can flip the sign of a tiny λ₆
                |a| {
                    if a == lo {
                        return f_lo;
                    }
                    if a == hi {
                        return f_hi;
                    }
                    lam6(a).unwrap_or_else(|e| {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    })
                },
                lo,
                hi,
                1e-13,
                100,
            )?,
            None => {
                golden_section(
                    |a| {
                        fd.quick(a).map(|r| r.distance).unwrap_or_else(|e| {
                            failure.borrow_mut().get_or_insert(e);
                            f64::INFINITY
                        })
                    },
                    a0 - h,
                    a0 + h,
                    1e-6,
                )?
                .0
            }
        };
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let shot = fd.certified(alpha)?;
        let best = if shot.distance <= centre.distance { (alpha, shot) } else { (a0, centre) };
        refined.push((wrap_angle(best.0), best.1));
    }
    refined.sort_by(|a, b| a.1.distance.total_cmp(&b.1.distance));
    let (alpha, shot) = refined.swap_remove(0);
    let ties = refined
        .iter()
        .filter(|(a, r)| r.distance - shot.distance <= 1e-6 && circular_gap(*a, alpha) > 1e-6)
        .map(|(a, _)| *a)
        .collect();
    Ok(DistanceMinimum { element: fiber_element(p, alpha), alpha, distance: shot.distance, shot, ties })
}

/// The three sections of one coset.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SectionResult {
    pub base: CosetPoint,
    pub sigma: RigidMotion,
    pub sigma_rho: RigidMotion,
    pub sigma_d: Option<RigidMotion>,
    pub rho_at_sigma: f64,
    pub rho_at_sigma_rho: f64,
    pub dist_at_sigma_d: Option<f64>,
    pub error_g: f64,
    pub alpha_rho: f64,
    pub alpha_d: Option<f64>,
    pub rho_ties: Vec<f64>,
    pub dist_ties: Vec<f64>,
    /// `|λ₆(0)|/‖λ(0)‖` of the σ_d geodesic.
    pub horizontality_defect: Option<f64>,
}

/// Computes `σ`, `σ_ρ` and (when `cfg` is given) `σ_d`.
pub fn compute_sections(p: &CosetPoint, m: &MetricParams, cfg: Option<&ShootingConfig>) -> Result<SectionResult> {
    let sigma = section_sigma(p)?;
    let rho_at_sigma = log_norm(&sigma, m)?;
    let rho = section_sigma_rho(p, m)?;
    let d = cfg.map(|c| section_sigma_d(p, m, c)).transpose()?;
    Ok(SectionResult {
        base: *p,
        sigma,
        sigma_rho: rho.element,
        sigma_d: d.as_ref().map(|d| d.element),
        rho_at_sigma,
        rho_at_sigma_rho: rho.value,
        dist_at_sigma_d: d.as_ref().map(|d| d.distance),
        error_g: rho_at_sigma - rho.value,
        alpha_rho: rho.alpha,
        alpha_d: d.as_ref().map(|d| d.alpha),
        rho_ties: rho.ties,
        dist_ties: d.as_ref().map(|d| d.ties.clone()).unwrap_or_default(),
        horizontality_defect: d.as_ref().map(|d| d.horizontality_defect()),
    })
}

/// Tabulated fiber profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FiberSweep {
    pub base: CosetPoint,
    pub metric: MetricParams,
    pub alphas: Vec<f64>,
    pub rho: Vec<Option<f64>>,
    pub dist: Option<Vec<Option<f64>>>,
    pub argmin_rho: f64,
    pub argmin_dist: Option<f64>,
    /// Central difference `E″(0)` of `α ↦ ρ` with the grid step.
    pub rho_second_derivative: f64,
}

/// Samples `ρ` (and optionally `d`) over `nsamples` fiber angles in `[−π, π)`.
pub fn fiber_sweep(
    p: &CosetPoint,
    m: &MetricParams,
    nsamples: usize,
    with_dist: bool,
    cfg: &ShootingConfig,
) -> Result<FiberSweep> {
    if nsamples < 16 {
        return Err(GeoError::InvalidArgument(format!("a sweep needs at least 16 samples, got {nsamples}")));
    }
    section_sigma(p)?;
    let alphas = grid(nsamples);
    let rho_at = |a: f64| log_norm(&fiber_element(p, a), m).ok();
    let rho: Vec<Option<f64>> = alphas.iter().map(|&a| rho_at(a)).collect();
    let argmin_rho = section_sigma_rho(p, m)?.alpha;

    let h = 2.0 * PI / nsamples as f64;
    let rho_second_derivative = match (rho_at(-h), rho_at(0.0), rho_at(h)) {
        (Some(l), Some(c), Some(r)) => (l - 2.0 * c + r) / (h * h),
        _ => f64::NAN,
    };

    let (dist, argmin_dist) = if with_dist {
        let fd = FiberDistance { p, m: distance_metric(m)?, cfg: *cfg, solved: RefCell::new(Vec::new()) };
        let order = (0..nsamples).map(|i| (i + nsamples / 2) % nsamples);
        let mut dist = vec![None; nsamples];
        for k in order {
            let target = fiber_element(p, alphas[k]);
            let guesses: Vec<_> = fd.nearest(alphas[k]).into_iter().collect();
            if let Ok(r) = shoot_distance_with_guess(&target, &fd.m, cfg, &guesses) {
                fd.solved.borrow_mut().push((alphas[k], r.lam0));
                dist[k] = Some(r.distance);
            }
        }
        let arg = section_sigma_d(p, m, cfg).ok().map(|d| d.alpha);
        (Some(dist), arg)
    } else {
        (None, None)
    };

    Ok(FiberSweep { base: *p, metric: *m, alphas, rho, dist, argmin_rho, argmin_dist, rho_second_derivative })
}

impl FiberSweep {
    /// `max_α |ρ(α) − ρ(−α)|` over the grid.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.alphas.len();
        (0..n)
            .filter_map(|k| match (self.rho[k], self.rho[(n - k) % n]) {
                (Some(a), Some(b)) => Some((a - b).abs()),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# metric={}", self.metric)?;
        writeln!(w, "# base={}", serde_json::to_string(&self.base).map_err(io::Error::other)?)?;
        writeln!(w, "alpha,rho,dist")?;
        let cell = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        for (k, a) in self.alphas.iter().enumerate() {
            let d = self.dist.as_ref().and_then(|d| d[k]);
            writeln!(w, "{},{},{}", fmt_f64(*a), cell(self.rho[k]), cell(d))?;
        }
        Ok(())
    }
}
