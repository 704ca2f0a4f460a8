//! Legal left-invariant metrics on SE(3):
//!
//! 𝒢 = g₁₁(ω¹⊗ω¹ + ω²⊗ω²) + g₃₃ ω³⊗ω³ + g₄₄(ω⁴⊗ω⁴ + ω⁵⊗ω⁵) + g₆₆ ω⁶⊗ω⁶
//!
//! in the three flavours Riemannian, sub-Riemannian (g₁₁ = ∞, motion
//! restricted to Δ = span{A₃, A₄, A₅}) and gauge invariant (g₆₆ = 0).

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix6, SymmetricEigen, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GeoError, Result};
use crate::se3::{ad, adjoint_matrix, log_se3, rot_z, AlgebraVector, RigidMotion};
use crate::tolerances::{HORIZONTAL_TOL, LEGALITY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricMode {
    #[serde(rename = "R")]
    Riemannian,
    #[serde(rename = "SR")]
    SubRiemannian,
    #[serde(rename = "GI")]
    GaugeInvariant,
}

/// Coefficients (g₁₁, g₃₃, g₄₄, g₆₆) of a legal diagonal metric.
///
/// In sub-Riemannian mode g₁₁ is infinite; it is carried as
/// `f64::INFINITY` and never enters arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    g11: f64,
    g33: f64,
    g44: f64,
    g66: f64,
    mode: MetricMode,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(GeoError::InvalidMetric(format!("{name} must be finite and positive, got {v}")))
    }
}

impl MetricParams {
    pub fn riemannian(g11: f64, g33: f64, g44: f64, g66: f64) -> Result<Self> {
        positive("g11", g11)?;
        positive("g33", g33)?;
        positive("g44", g44)?;
        positive("g66", g66)?;
        Ok(MetricParams { g11, g33, g44, g66, mode: MetricMode::Riemannian })
    }

    pub fn sub_riemannian(g33: f64, g44: f64, g66: f64) -> Result<Self> {
        positive("g33", g33)?;
        positive("g44", g44)?;
        positive("g66", g66)?;
        Ok(MetricParams { g11: f64::INFINITY, g33, g44, g66, mode: MetricMode::SubRiemannian })
    }

    pub fn gauge_invariant(g11: f64, g33: f64, g44: f64) -> Result<Self> {
        positive("g11", g11)?;
        positive("g33", g33)?;
        positive("g44", g44)?;
        Ok(MetricParams { g11, g33, g44, g66: 0.0, mode: MetricMode::GaugeInvariant })
    }

    /// Validating constructor used by deserialisation.
    pub fn new(g11: f64, g33: f64, g44: f64, g66: f64, mode: MetricMode) -> Result<Self> {
        match mode {
            MetricMode::Riemannian => Self::riemannian(g11, g33, g44, g66),
            MetricMode::SubRiemannian => {
                if g11 != f64::INFINITY {
                    return Err(GeoError::InvalidMetric("SR mode requires g11 = inf".into()));
                }
                Self::sub_riemannian(g33, g44, g66)
            }
            MetricMode::GaugeInvariant => {
                if g66 != 0.0 {
                    return Err(GeoError::InvalidMetric("GI mode requires g66 = 0".into()));
                }
                Self::gauge_invariant(g11, g33, g44)
            }
        }
    }

    /// Riemannian metric from the six diagonal entries, or gauge invariant
    /// when the last entry is zero. Entries must respect the isotropy pairs.
    pub fn from_diagonal(d: [f64; 6]) -> Result<Self> {
        if d[0] != d[1] || d[3] != d[4] {
            return Err(GeoError::InvalidMetric(format!(
                "diagonal {d:?} is not isotropic in the (1,2) and (4,5) pairs"
            )));
        }
        if d[5] == 0.0 {
            Self::gauge_invariant(d[0], d[2], d[3])
        } else {
            Self::riemannian(d[0], d[2], d[3], d[5])
        }
    }

    /// Same metric with a different fiber cost (mode preserved except that
    /// g₆₆ = 0 produces gauge-invariant mode and vice versa).
    pub fn with_g66(&self, g66: f64) -> Result<Self> {
        match self.mode {
            MetricMode::SubRiemannian => Self::sub_riemannian(self.g33, self.g44, g66),
            _ if g66 == 0.0 => Self::gauge_invariant(self.g11, self.g33, self.g44),
            _ => Self::riemannian(self.g11, self.g33, self.g44, g66),
        }
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }
    pub fn g11(&self) -> f64 {
        self.g11
    }
    pub fn g33(&self) -> f64 {
        self.g33
    }
    pub fn g44(&self) -> f64 {
        self.g44
    }
    pub fn g66(&self) -> f64 {
        self.g66
    }

    /// (g₁₁, g₁₁, g₃₃, g₄₄, g₄₄, g₆₆); g₁₁ = ∞ in SR mode.
    pub fn diagonal(&self) -> [f64; 6] {
        [self.g11, self.g11, self.g33, self.g44, self.g44, self.g66]
    }

    /// Diagonal of the (co)metric used by the geodesic flow: gⁱⁱ = 1/gᵢᵢ,
    /// with zeros on the directions the flow never moves in (1, 2, 6 in SR
    /// mode, 6 in GI mode).
    pub fn inverse_diagonal(&self) -> [f64; 6] {
        let inv = |g: f64| 1.0 / g;
        match self.mode {
            MetricMode::Riemannian => [
                inv(self.g11), inv(self.g11), inv(self.g33), inv(self.g44), inv(self.g44), inv(self.g66),
            ],
            MetricMode::SubRiemannian => [0.0, 0.0, inv(self.g33), inv(self.g44), inv(self.g44), 0.0],
            MetricMode::GaugeInvariant => [
                inv(self.g11), inv(self.g11), inv(self.g33), inv(self.g44), inv(self.g44), 0.0,
            ],
        }
    }

    /// G·c for a finite metric; SR mode lowers only the Δ components.
    pub fn lower(&self, c: &AlgebraVector) -> Vector6<f64> {
        let d = self.diagonal();
        Vector6::from_fn(|i, _| if d[i].is_finite() { d[i] * c[i] } else { 0.0 })
    }

    /// The 6×6 matrix of the inner product (not defined in SR mode).
    pub fn inner_product(&self) -> Option<GeneralInnerProduct> {
        if self.mode == MetricMode::SubRiemannian {
            return None;
        }
        Some(GeneralInnerProduct { m: Matrix6::from_diagonal(&Vector6::from(self.diagonal())) })
    }
}

impl fmt::Display for MetricParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum G11Repr {
    Num(f64),
    Str(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricRepr {
    g11: G11Repr,
    g33: f64,
    g44: f64,
    g66: f64,
    mode: MetricMode,
}

impl Serialize for MetricParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let g11 = if self.g11.is_infinite() { G11Repr::Str("inf".into()) } else { G11Repr::Num(self.g11) };
        MetricRepr { g11, g33: self.g33, g44: self.g44, g66: self.g66, mode: self.mode }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MetricParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MetricRepr::deserialize(d)?;
        let g11 = match r.g11 {
            G11Repr::Num(v) => v,
            G11Repr::Str(s) if s == "inf" => f64::INFINITY,
            G11Repr::Str(s) => return Err(D::Error::custom(format!("g11 must be a number or \"inf\", got {s:?}"))),
        };
        MetricParams::new(g11, r.g33, r.g44, r.g66, r.mode).map_err(D::Error::custom)
    }
}

/// ‖c‖_𝒢. In SR mode `c` must lie in Δ.
pub fn algebra_norm(c: &AlgebraVector, m: &MetricParams) -> Result<f64> {
    let g = m.diagonal();
    if m.mode() == MetricMode::SubRiemannian {
        let defect = c[0].abs().max(c[1].abs()).max(c[5].abs());
        if defect > HORIZONTAL_TOL * c.norm().max(1.0) {
            return Err(GeoError::NotHorizontal { defect });
        }
        return Ok((g[2] * c[2] * c[2] + g[3] * (c[3] * c[3] + c[4] * c[4])).sqrt());
    }
    let s: f64 = (0..6).map(|i| g[i] * c[i] * c[i]).sum();
    Ok(s.sqrt())
}

/// ρ_𝒢(g) = ‖log g‖_𝒢.
pub fn log_norm(g: &RigidMotion, m: &MetricParams) -> Result<f64> {
    algebra_norm(&log_se3(g)?, m)
}

/// Symmetric positive-semidefinite inner product on the Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralInnerProduct {
    m: Matrix6<f64>,
}

impl GeneralInnerProduct {
    pub fn new(m: Matrix6<f64>) -> Result<Self> {
        let asym = (m - m.transpose()).amax();
        if asym > 1e-12 {
            return Err(GeoError::InvalidArgument(format!("inner product not symmetric (defect {asym:e})")));
        }
        let eig = SymmetricEigen::new(m);
        let min = eig.eigenvalues.min();
        if min < -1e-12 {
            return Err(GeoError::InvalidArgument(format!("inner product not PSD (eigenvalue {min:e})")));
        }
        Ok(GeneralInnerProduct { m })
    }

    pub fn from_diagonal(d: [f64; 6]) -> Result<Self> {
        Self::new(Matrix6::from_diagonal(&Vector6::from(d)))
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.m
    }

    pub fn pairing(&self, a: &AlgebraVector, b: &AlgebraVector) -> f64 {
        (a.0.transpose() * self.m * b.0)[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub max_violation: f64,
}

/// Ad(H)-invariance of `ip` over a uniform α-grid of `samples` points plus
/// 16 seeded random angles.
pub fn legality_check(ip: &GeneralInnerProduct, samples: usize) -> Result<CheckReport> {
    if samples < 8 {
        return Err(GeoError::InvalidArgument(format!("legality check needs at least 8 samples, got {samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e6a1);
    let grid = (0..samples).map(|k| 2.0 * PI * k as f64 / samples as f64);
    let random: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let mut worst: f64 = 0.0;
    for a in grid.chain(random) {
        let adm = adjoint_matrix(&RigidMotion::from_rotation(rot_z(a)));
        let pulled = adm.transpose() * ip.m * adm;
        worst = worst.max((pulled - ip.m).amax());
    }
    Ok(CheckReport { passed: worst <= LEGALITY_TOL, max_violation: worst })
}

/// Outcome of [`reductive_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReductiveReport {
    pub passed: bool,
    pub max_violation: f64,
    /// Orthonormal (Euclidean) basis of the complement 𝔪 = 𝔥^⊥.
    pub complement: Vec<AlgebraVector>,
}

/// Builds 𝔥 = span{A₆}, its orthogonal complement 𝔪 w.r.t. `ip`, and checks
/// Ad(h_α)𝔪 ⊆ 𝔪 and [𝔥, 𝔪] ⊆ 𝔪.
///
/// When `ip` is degenerate along A₆ (gauge-invariant case) every vector is
/// orthogonal to 𝔥 and the Euclidean complement is used instead.
pub fn reductive_check(ip: &GeneralInnerProduct) -> Result<ReductiveReport> {
    let legal = legality_check(ip, 64)?;
    if !legal.passed {
        return Err(GeoError::NotLegal { violation: legal.max_violation });
    }
    let a6 = AlgebraVector::basis(6);
    let mut normal = ip.m * a6.0;
    if normal.norm() < 1e-12 {
        normal = a6.0;
    }
    let normal = normal.normalize();

    // complement basis: Gram-Schmidt of the coordinate basis projected off `normal`
    let mut basis: Vec<Vector6<f64>> = Vec::new();
    for i in 0..6 {
        let mut v = Vector6::zeros();
        v[i] = 1.0;
        v -= normal * normal.dot(&v);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        if v.norm() > 1e-8 {
            basis.push(v.normalize());
        }
    }
    let complement: Vec<AlgebraVector> = basis.iter().map(|v| AlgebraVector(*v)).collect();

    let mut worst: f64 = 0.0;
    for k in 0..64 {
        let a = 2.0 * PI * k as f64 / 64.0;
        let adm = adjoint_matrix(&RigidMotion::from_rotation(rot_z(a)));
        for b in &complement {
            worst = worst.max(normal.dot(&(adm * b.0)).abs());
        }
    }
    for b in &complement {
        worst = worst.max(normal.dot(&ad(&a6, b).0).abs());
    }
    Ok(ReductiveReport { passed: worst <= LEGALITY_TOL, max_violation: worst, complement })
}

/// Projections onto the vertical, horizontal and SR-horizontal subbundles in
/// left-invariant coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbundleProjections {
    pub p_h: Matrix6<f64>,
    pub p_v: Matrix6<f64>,
    pub p_delta: Matrix6<f64>,
}

pub fn projections(_m: &MetricParams) -> SubbundleProjections {
    // For the diagonal family the vertical direction A₆ is 𝒢-orthogonal to
    // A₁..A₅, so the splits are coordinate projections for every mode.
    let p_v = Matrix6::from_diagonal(&Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0));
    let p_h = Matrix6::identity() - p_v;
    let p_delta = Matrix6::from_diagonal(&Vector6::new(0.0, 0.0, 1.0, 1.0, 1.0, 0.0));
    SubbundleProjections { p_h, p_v, p_delta }
}
