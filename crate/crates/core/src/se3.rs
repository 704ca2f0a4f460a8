//! SE(3) = R³ ⋊ SO(3) and its Lie algebra.
//!
//! Algebra coordinates `c = (c¹..c⁶)` are taken w.r.t. the basis
//! `A₁, A₂, A₃` (translations along e_x, e_y, e_z) and `A₄, A₅, A₆`
//! (infinitesimal rotations about e_x, e_y, e_z). The rotational part
//! `(c⁴, c⁵, c⁶)` is therefore the usual rotation vector.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GeoError, Result};
use crate::tolerances::{
    CUT_LOCUS_TOL, F_SERIES_THRESHOLD, REORTHONORMALIZE_TOL, RODRIGUES_SERIES_THRESHOLD,
    ROTATION_INPUT_TOL,
};

const TWO_PI: f64 = 2.0 * PI;

#[inline]
pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

#[inline]
fn vee3(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Elementary rotation about e_x.
pub fn rot_x(angle: f64) -> Rotation {
    let (s, c) = angle.sin_cos();
    Rotation(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
}

/// Elementary rotation about e_y.
pub fn rot_y(angle: f64) -> Rotation {
    let (s, c) = angle.sin_cos();
    Rotation(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
}

/// Elementary rotation about e_z.
pub fn rot_z(angle: f64) -> Rotation {
    let (s, c) = angle.sin_cos();
    Rotation(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

/// An element of SO(3) stored as a 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Builds a rotation from a matrix that is orthonormal up to
    /// [`ROTATION_INPUT_TOL`]; small defects are removed by polar projection.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let defect = orthonormality_defect(&m);
        if !defect.is_finite() || defect > ROTATION_INPUT_TOL {
            return Err(GeoError::NotARotation { defect });
        }
        if defect > REORTHONORMALIZE_TOL {
            return Ok(Rotation(polar_project(&m)));
        }
        Ok(Rotation(m))
    }

    /// Wraps a matrix without checking. Callers guarantee orthonormality.
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    /// Max-norm defect of `RᵀR − I` together with `|det R − 1|`.
    pub fn defect(&self) -> f64 {
        orthonormality_defect(&self.0)
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Rotation angle in [0, π].
    pub fn angle(&self) -> f64 {
        let m = &self.0;
        let c = 0.5 * (m.trace() - 1.0);
        let s = 0.5 * vee3(&(m - m.transpose())).norm();
        s.atan2(c)
    }

    /// Product with drift control.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let m = self.0 * other.0;
        if orthonormality_defect(&m) > REORTHONORMALIZE_TOL {
            Rotation(polar_project(&m))
        } else {
            Rotation(m)
        }
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

fn orthonormality_defect(m: &Matrix3<f64>) -> f64 {
    let gram = m.transpose() * m - Matrix3::identity();
    gram.amax().max((m.determinant() - 1.0).abs())
}

/// Nearest rotation in Frobenius norm.
fn polar_project(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    r
}

// ---------------------------------------------------------------------------
// RigidMotion
// ---------------------------------------------------------------------------

/// g = (x, R) ∈ SE(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub translation: Vector3<f64>,
    pub rotation: Rotation,
}

impl RigidMotion {
    pub fn new(translation: Vector3<f64>, rotation: Rotation) -> Self {
        RigidMotion { translation, rotation }
    }

    pub fn identity() -> Self {
        RigidMotion::new(Vector3::zeros(), Rotation::identity())
    }

    pub fn from_translation(x: Vector3<f64>) -> Self {
        RigidMotion::new(x, Rotation::identity())
    }

    pub fn from_rotation(r: Rotation) -> Self {
        RigidMotion::new(Vector3::zeros(), r)
    }

    /// (x₁ + R₁x₂, R₁R₂).
    pub fn compose(&self, other: &RigidMotion) -> RigidMotion {
        RigidMotion {
            translation: self.translation + self.rotation.apply(&other.translation),
            rotation: self.rotation.compose(&other.rotation),
        }
    }

    /// (−Rᵀx, Rᵀ).
    pub fn inverse(&self) -> RigidMotion {
        let rt = self.rotation.transpose();
        RigidMotion {
            translation: -rt.apply(&self.translation),
            rotation: rt,
        }
    }

    /// 4×4 homogeneous matrix.
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        h
    }

    pub fn from_homogeneous(h: &Matrix4<f64>) -> Result<RigidMotion> {
        let r = Rotation::from_matrix(h.fixed_view::<3, 3>(0, 0).into_owned())?;
        Ok(RigidMotion::new(h.fixed_view::<3, 1>(0, 3).into_owned(), r))
    }

    /// Componentwise max-norm difference of translations and rotation matrices.
    pub fn distance_max(&self, other: &RigidMotion) -> f64 {
        (self.translation - other.translation)
            .amax()
            .max((self.rotation.matrix() - other.rotation.matrix()).amax())
    }

    /// Flat layout `[x, y, z, R11, R12, R13, R21, .., R33]`.
    pub fn to_array(&self) -> [f64; 12] {
        let r = self.rotation.matrix();
        let x = &self.translation;
        [
            x.x, x.y, x.z,
            r[(0, 0)], r[(0, 1)], r[(0, 2)],
            r[(1, 0)], r[(1, 1)], r[(1, 2)],
            r[(2, 0)], r[(2, 1)], r[(2, 2)],
        ]
    }

    pub fn from_slice(a: &[f64]) -> Result<RigidMotion> {
        if a.len() != 12 {
            return Err(GeoError::InvalidArgument(format!(
                "rigid motion needs 12 numbers, got {}",
                a.len()
            )));
        }
        let r = Matrix3::new(a[3], a[4], a[5], a[6], a[7], a[8], a[9], a[10], a[11]);
        Ok(RigidMotion::new(
            Vector3::new(a[0], a[1], a[2]),
            Rotation::from_matrix(r)?,
        ))
    }
}

impl Mul for RigidMotion {
    type Output = RigidMotion;
    fn mul(self, rhs: RigidMotion) -> RigidMotion {
        self.compose(&rhs)
    }
}

impl fmt::Display for RigidMotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.translation;
        write!(f, "(x=[{:.6}, {:.6}, {:.6}], angle={:.6})", t.x, t.y, t.z, self.rotation.angle())
    }
}

impl Serialize for RigidMotion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RigidMotion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        RigidMotion::from_slice(&v).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Euler angles
// ---------------------------------------------------------------------------

/// R = R_{e_z,γ} R_{e_y,β} R_{e_z,α}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZYZ {
    pub gamma: f64,
    pub beta: f64,
    pub alpha: f64,
    /// β ∈ {0, π}: only α+γ (resp. α−γ) is determined and γ = 0 is reported.
    pub degenerate: bool,
}

fn wrap_2pi(a: f64) -> f64 {
    let r = a.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

pub fn euler_zyz(r: &Rotation) -> EulerZYZ {
    let m = r.matrix();
    let sin_beta = m[(0, 2)].hypot(m[(1, 2)]);
    let beta = sin_beta.atan2(m[(2, 2)]);
    if sin_beta < 1e-12 {
        let alpha = if m[(2, 2)] > 0.0 {
            // R = R_z(α + γ)
            m[(1, 0)].atan2(m[(0, 0)])
        } else {
            // R = R_y(π) R_z(α)
            m[(1, 0)].atan2(m[(1, 1)])
        };
        return EulerZYZ {
            gamma: 0.0,
            beta: if m[(2, 2)] > 0.0 { 0.0 } else { PI },
            alpha: wrap_2pi(alpha),
            degenerate: true,
        };
    }
    EulerZYZ {
        gamma: wrap_2pi(m[(1, 2)].atan2(m[(0, 2)])),
        beta,
        alpha: wrap_2pi(m[(2, 1)].atan2(-m[(2, 0)])),
        degenerate: false,
    }
}

pub fn rotation_from_euler(a: &EulerZYZ) -> Rotation {
    let m = rot_z(a.gamma).matrix() * rot_y(a.beta).matrix() * rot_z(a.alpha).matrix();
    Rotation::from_matrix_unchecked(m)
}

// ---------------------------------------------------------------------------
// Algebra vectors
// ---------------------------------------------------------------------------

/// Coordinates (c¹..c⁶) of a Lie-algebra element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraVector(pub Vector6<f64>);

impl AlgebraVector {
    pub fn new(c: [f64; 6]) -> Self {
        AlgebraVector(Vector6::from(c))
    }

    pub fn zero() -> Self {
        AlgebraVector(Vector6::zeros())
    }

    /// The basis vector A_i, 1-based.
    pub fn basis(i: usize) -> Self {
        assert!((1..=6).contains(&i), "basis index {i} out of 1..=6");
        let mut v = Vector6::zeros();
        v[i - 1] = 1.0;
        AlgebraVector(v)
    }

    pub fn from_parts(translation: Vector3<f64>, rotation: Vector3<f64>) -> Self {
        AlgebraVector(Vector6::new(
            translation.x, translation.y, translation.z, rotation.x, rotation.y, rotation.z,
        ))
    }

    /// (c¹, c², c³): spatial velocity.
    pub fn translation(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    /// (c⁴, c⁵, c⁶): angular velocity.
    pub fn rotation(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    /// q = |(c⁴, c⁵, c⁶)|.
    pub fn angle(&self) -> f64 {
        self.rotation().norm()
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.0.into()
    }

    pub fn dot(&self, other: &AlgebraVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// 4×4 matrix representation Σ cⁱ A_i.
    pub fn hat(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&self.rotation()));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation());
        m
    }

    /// Inverse of [`AlgebraVector::hat`]; ignores the non-algebra part.
    pub fn vee(m: &Matrix4<f64>) -> Self {
        AlgebraVector(Vector6::new(
            m[(0, 3)],
            m[(1, 3)],
            m[(2, 3)],
            m[(2, 1)],
            m[(0, 2)],
            m[(1, 0)],
        ))
    }
}

impl Index<usize> for AlgebraVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: Self) -> Self {
        AlgebraVector(self.0 + rhs.0)
    }
}

impl Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: Self) -> Self {
        AlgebraVector(self.0 - rhs.0)
    }
}

impl Neg for AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> Self {
        AlgebraVector(-self.0)
    }
}

impl Mul<AlgebraVector> for f64 {
    type Output = AlgebraVector;
    fn mul(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector(rhs.0 * self)
    }
}

impl Serialize for AlgebraVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[f64; 6]>::deserialize(d)?;
        Ok(AlgebraVector::new(v))
    }
}

// ---------------------------------------------------------------------------
// exp / log
// ---------------------------------------------------------------------------

/// sin(q)/q and (1 − cos q)/q².
fn rodrigues_coefficients(q: f64) -> (f64, f64) {
    if q < RODRIGUES_SERIES_THRESHOLD {
        let q2 = q * q;
        (1.0 - q2 / 6.0 + q2 * q2 / 120.0, 0.5 - q2 / 24.0 + q2 * q2 / 720.0)
    } else {
        (q.sin() / q, (1.0 - q.cos()) / (q * q))
    }
}

/// (q − sin q)/q³.
fn third_coefficient(q: f64) -> f64 {
    if q < 1e-3 {
        let q2 = q * q;
        1.0 / 6.0 - q2 / 120.0 + q2 * q2 / 5040.0
    } else {
        (q - q.sin()) / (q * q * q)
    }
}

/// Rodrigues' formula.
pub fn exp_so3(w: &Vector3<f64>) -> Rotation {
    let q = w.norm();
    let (a, b) = rodrigues_coefficients(q);
    let k = skew(w);
    Rotation::from_matrix_unchecked(Matrix3::identity() + k * a + k * k * b)
}

/// Rotation vector of `r`, the inverse of [`exp_so3`] for angles below π.
pub fn log_so3(r: &Rotation) -> Result<Vector3<f64>> {
    let m = r.matrix();
    let antisym = 0.5 * vee3(&(m - m.transpose()));
    let s = antisym.norm();
    let c = 0.5 * (m.trace() - 1.0);
    let q = s.atan2(c);
    if (PI - q) <= CUT_LOCUS_TOL {
        return Err(GeoError::AngleAtCutLocus { angle: q });
    }
    if q < RODRIGUES_SERIES_THRESHOLD {
        // q / sin q ≈ 1 + q²/6 + 7q⁴/360
        let q2 = q * q;
        return Ok(antisym * (1.0 + q2 / 6.0 + 7.0 * q2 * q2 / 360.0));
    }
    if q < PI - 1e-2 {
        return Ok(antisym * (q / s));
    }
    // Near π the antisymmetric part is small; recover the axis from the
    // symmetric part R + Rᵀ = 2cos q I + 2(1 − cos q) u uᵀ.
    let one_minus_c = 1.0 - c;
    let sym = (m + m.transpose()) * 0.5 - Matrix3::identity() * c;
    let diag = Vector3::new(sym[(0, 0)], sym[(1, 1)], sym[(2, 2)]);
    let k = diag.imax();
    let mut axis = sym.column(k).into_owned() / (diag[k] * one_minus_c).sqrt();
    axis /= axis.norm();
    if axis.dot(&antisym) < 0.0 {
        axis = -axis;
    }
    Ok(axis * q)
}

/// f(q) = (1 − (q/2)·cot(q/2)) / q², defined on [0, 2π).
pub fn f_coefficient(q: f64) -> Result<f64> {
    if !(0.0..TWO_PI).contains(&q) {
        return Err(GeoError::Domain { what: "f_coefficient", value: q });
    }
    if q < F_SERIES_THRESHOLD {
        let q2 = q * q;
        return Ok(1.0 / 12.0
            + q2 * (1.0 / 720.0
                + q2 * (1.0 / 30240.0
                    + q2 * (1.0 / 1_209_600.0 + q2 * (1.0 / 47_900_160.0 + q2 * 691.0 / 1_307_674_368_000.0)))));
    }
    let half = 0.5 * q;
    Ok((1.0 - half / half.tan()) / (q * q))
}

pub fn exp_se3(c: &AlgebraVector) -> RigidMotion {
    let w = c.rotation();
    let v = c.translation();
    let q = w.norm();
    let (_, b) = rodrigues_coefficients(q);
    let k = skew(&w);
    let kv = k * v;
    let x = v + kv * b + k * kv * third_coefficient(q);
    RigidMotion::new(x, exp_so3(&w))
}

/// Group logarithm; the translational part uses
/// c⁽¹⁾ = x − ½ c⁽²⁾×x + f(q) c⁽²⁾×(c⁽²⁾×x).
pub fn log_se3(g: &RigidMotion) -> Result<AlgebraVector> {
    let w = log_so3(&g.rotation)?;
    let q = w.norm();
    let x = &g.translation;
    let wx = w.cross(x);
    let f = f_coefficient(q)?;
    let v = x - wx * 0.5 + w.cross(&wx) * f;
    Ok(AlgebraVector::from_parts(v, w))
}

/// sin(q)/q with sinc(0) = 1.
pub fn sinc(q: f64) -> f64 {
    rodrigues_coefficients(q.abs()).0
}

// ---------------------------------------------------------------------------
// Structure constants, ad, coad, Ad
// ---------------------------------------------------------------------------

/// `[A_i, A_j] = Σ_k c^k_{ij} A_k`, computed from the 4×4 generators.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    table: [[[f64; 6]; 6]; 6],
}

impl StructureConstants {
    /// c^k_{ij} with 1-based indices following the basis numbering.
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.table[k - 1][i - 1][j - 1]
    }

    /// 0-based access.
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.table[k][i][j]
    }

    /// Max |c^k_{ij} + c^k_{ji}|.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    worst = worst.max((self.table[k][i][j] + self.table[k][j][i]).abs());
                }
            }
        }
        worst
    }

    /// Max over (i, j, l, m) of the Jacobi sum
    /// Σ_k (c^k_{ij} c^m_{kl} + c^k_{jl} c^m_{ki} + c^k_{li} c^m_{kj}).
    pub fn jacobi_defect(&self) -> f64 {
        let t = &self.table;
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                for l in 0..6 {
                    for m in 0..6 {
                        let mut s = 0.0;
                        for k in 0..6 {
                            s += t[k][i][j] * t[m][k][l]
                                + t[k][j][l] * t[m][k][i]
                                + t[k][l][i] * t[m][k][j];
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

fn compute_structure_constants() -> StructureConstants {
    let gens: Vec<Matrix4<f64>> = (1..=6).map(|i| AlgebraVector::basis(i).hat()).collect();
    let mut table = [[[0.0; 6]; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            let bracket = gens[i] * gens[j] - gens[j] * gens[i];
            let coords = AlgebraVector::vee(&bracket);
            for (k, row) in table.iter_mut().enumerate() {
                row[i][j] = coords[k];
            }
        }
    }
    StructureConstants { table }
}

static STRUCTURE_CONSTANTS: OnceLock<StructureConstants> = OnceLock::new();

pub fn structure_constants() -> &'static StructureConstants {
    STRUCTURE_CONSTANTS.get_or_init(compute_structure_constants)
}

/// Matrix of ad(v): `ad(v) w = ad_matrix(v) · w`.
pub fn ad_matrix(v: &AlgebraVector) -> Matrix6<f64> {
    let sc = structure_constants();
    let mut m = Matrix6::zeros();
    for k in 0..6 {
        for j in 0..6 {
            let mut s = 0.0;
            for i in 0..6 {
                let c = sc.get(k, i, j);
                if c != 0.0 {
                    s += c * v[i];
                }
            }
            m[(k, j)] = s;
        }
    }
    m
}

/// [v, w].
pub fn ad(v: &AlgebraVector, w: &AlgebraVector) -> AlgebraVector {
    AlgebraVector(ad_matrix(v) * w.0)
}

/// (coad_v μ)_j = Σ_{k,i} c^k_{ij} vⁱ μ_k, the dual of ad(v).
pub fn coad(v: &AlgebraVector, mu: &Vector6<f64>) -> Vector6<f64> {
    let sc = structure_constants();
    let mut out = Vector6::zeros();
    for j in 0..6 {
        let mut s = 0.0;
        for k in 0..6 {
            if mu[k] == 0.0 {
                continue;
            }
            for i in 0..6 {
                let c = sc.get(k, i, j);
                if c != 0.0 {
                    s += c * v[i] * mu[k];
                }
            }
        }
        out[j] = s;
    }
    out
}

/// Ad(h) v = h V h⁻¹ in matrix form, re-expressed in the basis.
pub fn adjoint_action(h: &RigidMotion, v: &AlgebraVector) -> AlgebraVector {
    let hm = h.to_homogeneous();
    let hinv = h.inverse().to_homogeneous();
    AlgebraVector::vee(&(hm * v.hat() * hinv))
}

/// 6×6 matrix of Ad(h), assembled column by column from [`adjoint_action`].
pub fn adjoint_matrix(h: &RigidMotion) -> Matrix6<f64> {
    let mut m = Matrix6::zeros();
    for i in 1..=6 {
        m.set_column(i - 1, &adjoint_action(h, &AlgebraVector::basis(i)).0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec3(rng: &mut impl Rng, scale: f64) -> Vector3<f64> {
        Vector3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }

    fn random_rotation(rng: &mut impl Rng) -> Rotation {
        let mut w = random_vec3(rng, 1.0);
        w *= rng.random_range(0.0..PI - 0.05) / w.norm();
        exp_so3(&w)
    }

    fn random_motion(rng: &mut impl Rng) -> RigidMotion {
        RigidMotion::new(random_vec3(rng, 2.0), random_rotation(rng))
    }

    #[test]
    fn compose_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = RigidMotion::identity();
        for _ in 0..20 {
            let g = random_motion(&mut rng);
            assert!(e.compose(&g).distance_max(&g) < 1e-15);
            assert!(g.compose(&g.inverse()).distance_max(&e) < 1e-14);
        }
        let a = RigidMotion::from_translation(Vector3::new(1.0, 0.0, 0.0));
        let b = RigidMotion::from_rotation(rot_z(PI / 2.0));
        let ab = a.compose(&b);
        assert_eq!(ab.translation, Vector3::new(1.0, 0.0, 0.0));
        assert!((ab.rotation.matrix() - rot_z(PI / 2.0).matrix()).amax() < 1e-16);
    }

    #[test]
    fn associativity_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (a, b, c) = (random_motion(&mut rng), random_motion(&mut rng), random_motion(&mut rng));
            let lhs = a.compose(&b).compose(&c);
            let rhs = a.compose(&b.compose(&c));
            assert!(lhs.distance_max(&rhs) < 1e-12);
            assert!(a.inverse().inverse().distance_max(&a) < 1e-14);
        }
        assert_eq!(RigidMotion::identity().inverse(), RigidMotion::identity());
        let x = Vector3::new(1.0, -2.0, 3.0);
        assert_eq!(RigidMotion::from_translation(x).inverse(), RigidMotion::from_translation(-x));
    }

    #[test]
    fn rotation_input_validation() {
        let bad = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(matches!(Rotation::from_matrix(bad), Err(GeoError::NotARotation { .. })));
        let near = rot_z(0.3).matrix() + Matrix3::repeat(1e-8);
        let r = Rotation::from_matrix(near).unwrap();
        assert!(r.defect() < 1e-14);
    }

    #[test]
    fn euler_examples() {
        let id = euler_zyz(&Rotation::identity());
        assert_eq!((id.gamma, id.beta, id.alpha, id.degenerate), (0.0, 0.0, 0.0, true));

        let e = euler_zyz(&rot_y(PI / 2.0));
        assert!(!e.degenerate);
        assert!(e.gamma.abs() < 1e-15 && (e.beta - PI / 2.0).abs() < 1e-15 && e.alpha.abs() < 1e-15);

        let r = rotation_from_euler(&EulerZYZ { gamma: 0.0, beta: 0.0, alpha: 0.0, degenerate: false });
        assert_eq!(*r.matrix(), Matrix3::identity());
        let g = 1.234;
        let r = rotation_from_euler(&EulerZYZ { gamma: g, beta: 0.0, alpha: -g, degenerate: true });
        assert!((r.matrix() - Matrix3::identity()).amax() < 1e-15);
    }

    #[test]
    fn euler_from_explicit_product() {
        // Brute-force product of hand-written elementary matrices.
        let (g, b, a) = (PI / 4.0, PI / 3.0, PI / 5.0);
        let rz = |t: f64| Matrix3::new(t.cos(), -t.sin(), 0.0, t.sin(), t.cos(), 0.0, 0.0, 0.0, 1.0);
        let ry = |t: f64| Matrix3::new(t.cos(), 0.0, t.sin(), 0.0, 1.0, 0.0, -t.sin(), 0.0, t.cos());
        let expected = rz(g) * ry(b) * rz(a);
        let r = rotation_from_euler(&EulerZYZ { gamma: g, beta: b, alpha: a, degenerate: false });
        assert!((r.matrix() - expected).amax() < 1e-15);
        let back = euler_zyz(&r);
        assert!((back.gamma - g).abs() < 1e-12 && (back.beta - b).abs() < 1e-12 && (back.alpha - a).abs() < 1e-12);
    }

    #[test]
    fn euler_degenerate_at_pi() {
        let r = rot_y(PI).compose(&rot_z(0.7));
        let e = euler_zyz(&r);
        assert!(e.degenerate);
        assert_eq!(e.beta, PI);
        assert!((rotation_from_euler(&e).matrix() - r.matrix()).amax() < 1e-12);
    }

    #[test]
    fn euler_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let e = EulerZYZ {
                gamma: rng.random_range(0.0..TWO_PI),
                beta: rng.random_range(0.01..PI - 0.01),
                alpha: rng.random_range(0.0..TWO_PI),
                degenerate: false,
            };
            let r = rotation_from_euler(&e);
            let back = rotation_from_euler(&euler_zyz(&r));
            assert!((back.matrix() - r.matrix()).amax() < 1e-10);
        }
    }

    #[test]
    fn exp_so3_examples() {
        assert_eq!(*exp_so3(&Vector3::zeros()).matrix(), Matrix3::identity());
        let r = exp_so3(&Vector3::new(0.0, 0.0, 0.8));
        assert!((r.matrix() - rot_z(0.8).matrix()).amax() < 1e-15);
    }

    #[test]
    fn so3_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let mut w = random_vec3(&mut rng, 1.0);
            w *= rng.random_range(0.0..PI - 0.1) / w.norm();
            let back = log_so3(&exp_so3(&w)).unwrap();
            assert!((back - w).norm() <= 1e-10, "{w} -> {back}");
        }
        for q in [1e-9, 1e-7, 5e-7, 2e-6, PI - 5e-3, PI - 1e-6] {
            let w = Vector3::new(0.3, -0.5, 0.81).normalize() * q;
            let back = log_so3(&exp_so3(&w)).unwrap();
            assert!((back - w).norm() <= 1e-8 * q.max(1e-3), "q={q}: {}", (back - w).norm());
        }
    }

    #[test]
    fn log_rejects_cut_locus() {
        let r = rot_x(PI);
        assert!(matches!(log_so3(&r), Err(GeoError::AngleAtCutLocus { .. })));
        let g = RigidMotion::new(Vector3::new(1.0, 2.0, 3.0), rot_y(PI));
        assert!(matches!(log_se3(&g), Err(GeoError::AngleAtCutLocus { .. })));
    }

    #[test]
    fn se3_exp_log_examples() {
        assert_eq!(log_se3(&RigidMotion::identity()).unwrap(), AlgebraVector::zero());
        let t = 2.5;
        let g = exp_se3(&(t * AlgebraVector::basis(3)));
        assert_eq!(g.translation, Vector3::new(0.0, 0.0, t));
        assert_eq!(*g.rotation.matrix(), Matrix3::identity());
        let x = Vector3::new(0.3, -1.0, 2.0);
        let c = log_se3(&RigidMotion::from_translation(x)).unwrap();
        assert_eq!(c, AlgebraVector::from_parts(x, Vector3::zeros()));
    }

    #[test]
    fn se3_exp_matches_matrix_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let c = AlgebraVector::from_parts(random_vec3(&mut rng, 2.0), random_vec3(&mut rng, 1.5));
            // Taylor series of the 4×4 matrix exponential with scaling and squaring.
            let m = c.hat() / 1024.0;
            let mut term = Matrix4::identity();
            let mut sum = Matrix4::identity();
            for n in 1..20 {
                term = term * m / n as f64;
                sum += term;
            }
            for _ in 0..10 {
                sum = sum * sum;
            }
            let g = exp_se3(&c);
            assert!((g.to_homogeneous() - sum).amax() < 1e-11);
        }
    }

    #[test]
    fn se3_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let mut w = random_vec3(&mut rng, 1.0);
            w *= rng.random_range(0.0..PI - 0.1) / w.norm();
            let c = AlgebraVector::from_parts(random_vec3(&mut rng, 3.0), w);
            let back = log_se3(&exp_se3(&c)).unwrap();
            assert!((back - c).norm() <= 1e-10);
            let g = random_motion(&mut rng);
            let g2 = exp_se3(&log_se3(&g).unwrap());
            assert!(g2.distance_max(&g) <= 1e-10);
        }
    }

    #[test]
    fn c6_identity_on_euler_grid() {
        // c⁶ = sin(α+γ) cos²(β/2) / sinc(q)
        let n = 50;
        let x = Vector3::new(0.4, -0.2, 1.1);
        for a in 0..n {
            let sum = -PI + TWO_PI * (a as f64 + 0.5) / n as f64;
            for b in 0..n {
                let beta = 0.02 + (PI - 0.04) * b as f64 / (n - 1) as f64;
                let gamma = 0.3;
                let alpha = sum - gamma;
                let r = rotation_from_euler(&EulerZYZ { gamma, beta, alpha, degenerate: false });
                let Ok(c) = log_se3(&RigidMotion::new(x, r)) else { continue };
                let q = c.angle();
                let expected = sum.sin() * (beta / 2.0).cos().powi(2) / sinc(q);
                assert!((c[5] - expected).abs() <= 1e-9, "sum={sum} beta={beta}");
            }
            // α = −γ ⇒ c⁶ = 0
            let r = rotation_from_euler(&EulerZYZ { gamma: sum, beta: 1.0, alpha: -sum, degenerate: false });
            assert!(log_se3(&RigidMotion::new(x, r)).unwrap()[5].abs() < 1e-14);
        }
    }

    #[test]
    fn f_coefficient_values() {
        assert_eq!(f_coefficient(0.0).unwrap(), 1.0 / 12.0);
        // f(π/2) = (1 − π/4)·4/π², evaluated with mpmath at 40 digits.
        let expected = 0.086_974_848_385_560_414;
        assert!((f_coefficient(PI / 2.0).unwrap() - expected).abs() < 1e-16);
        assert!(matches!(f_coefficient(TWO_PI), Err(GeoError::Domain { .. })));
        assert!(f_coefficient(-0.1).is_err());
        // both sides of the series switch against 30-digit mpmath values
        let below = f_coefficient(F_SERIES_THRESHOLD * 0.999_999).unwrap();
        let above = f_coefficient(F_SERIES_THRESHOLD * 1.000_001).unwrap();
        assert!((below - 0.083_420_268_091_848_707_42).abs() < 2e-16);
        assert!((above - 0.083_420_268_440_106_756_25).abs() < 5e-15);
    }

    #[test]
    fn f_coefficient_monotone_and_bounded() {
        let n = 2000;
        let mut prev = f_coefficient(0.0).unwrap();
        for i in 1..n {
            let q = PI * i as f64 / n as f64;
            let f = f_coefficient(q).unwrap();
            assert!(f >= 0.0);
            assert!(f > prev, "f not increasing at {q}");
            assert!(1.0 - q * q * f >= 0.0);
            prev = f;
        }
    }

    #[test]
    fn structure_constant_examples() {
        let sc = structure_constants();
        assert_eq!(sc.c(6, 4, 5), 1.0);
        assert_eq!(sc.c(2, 6, 1), 1.0);
        for k in 1..=6 {
            for i in 1..=6 {
                assert_eq!(sc.c(k, i, i), 0.0);
            }
        }
        assert_eq!(sc.antisymmetry_defect(), 0.0);
        assert!(sc.jacobi_defect() <= 1e-12);
    }

    #[test]
    fn structure_constants_match_commutators() {
        let sc = structure_constants();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let v = AlgebraVector(Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0)));
            let w = AlgebraVector(Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0)));
            let brute = AlgebraVector::vee(&(v.hat() * w.hat() - w.hat() * v.hat()));
            assert!((ad(&v, &w) - brute).norm() < 1e-12);
        }
        let _ = sc;
    }

    #[test]
    fn ad_coad_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let v = AlgebraVector(Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0)));
            let w = AlgebraVector(Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0)));
            let mu = Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0));
            assert!(ad(&v, &v).norm() < 1e-15);
            let lhs = coad(&v, &mu).dot(&w.0);
            let rhs = mu.dot(&ad(&v, &w).0);
            assert!((lhs - rhs).abs() <= 1e-12);
        }
        // translations commute: coad along A₃ of a translational covector
        let mu = Vector6::new(0.3, -1.2, 0.7, 0.0, 0.0, 0.0);
        let out = coad(&AlgebraVector::basis(3), &mu);
        assert_eq!(out.fixed_rows::<3>(0).into_owned(), Vector3::zeros());
    }

    #[test]
    fn adjoint_action_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = AlgebraVector::new([0.3, -0.1, 0.5, 1.0, -0.4, 0.2]);
        assert!((adjoint_action(&RigidMotion::identity(), &v) - v).norm() < 1e-16);
        for a in [0.1, 1.0, 2.5, -3.0] {
            let h = RigidMotion::from_rotation(rot_z(a));
            let out = adjoint_action(&h, &AlgebraVector::basis(6));
            assert!((out - AlgebraVector::basis(6)).norm() < 1e-15);
        }
        // derivative at the identity is ad(A₆, ·)
        let eps = 1e-6;
        let hp = RigidMotion::from_rotation(rot_z(eps));
        let hm = RigidMotion::from_rotation(rot_z(-eps));
        let fd = (1.0 / (2.0 * eps)) * (adjoint_action(&hp, &v) - adjoint_action(&hm, &v));
        assert!((fd - ad(&AlgebraVector::basis(6), &v)).norm() < 1e-6);
        // homomorphism
        for _ in 0..50 {
            let a = random_motion(&mut rng);
            let b = random_motion(&mut rng);
            let lhs = adjoint_matrix(&a.compose(&b));
            let rhs = adjoint_matrix(&a) * adjoint_matrix(&b);
            assert!((lhs - rhs).amax() < 1e-12);
        }
    }

    #[test]
    fn json_layouts() {
        let g = RigidMotion::new(Vector3::new(1.0, 2.0, 3.0), rot_z(0.5));
        let s = serde_json::to_string(&g).unwrap();
        let back: RigidMotion = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert_eq!(serde_json::to_string(&AlgebraVector::basis(2)).unwrap(), "[0.0,1.0,0.0,0.0,0.0,0.0]");
        assert!(serde_json::from_str::<RigidMotion>("[1,2,3]").is_err());
    }
}
