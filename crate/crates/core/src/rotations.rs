//! Rotation algebra in the Rodrigues (vector) representation.
//!
//! A rotation by angle `α` about the unit axis `e` is represented by the
//! vector `a = tan(α/2) e`. The identity is the origin and π-turns sit at
//! infinity, so every finite vector is a rotation and π-turns are rejected
//! when converting from matrices.
//!
//! Given an axis `e`, every rotation `R(a)` factors uniquely as
//! `R(a) = R(a2) R(a1)` with `a1 ∥ e` and `a2 ⊥ e` ([`split_about_axis`]).
//! With `e` the reference normal, `a1` is the drilling content and `a2` the
//! bending content of the rotation.

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::{Error, Mat3, Result, Vec3};

/// Threshold on `1 + tr R` below which a rotation is treated as a π-turn.
pub const PI_TURN_EPS: f64 = 1e-9;

/// Orthogonality defect accepted as-is.
const EXACT_DEFECT: f64 = 1e-12;
/// Orthogonality defect repaired by projecting onto SO(3).
const REPAIRABLE_DEFECT: f64 = 1e-8;

/// Skew tensor `W(a)` with `W(a) v = a × v`.
pub fn skew(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Projector `I − e⊗e` onto the plane orthogonal to the unit vector `e`.
pub fn projector(e: &Vec3) -> Mat3 {
    Mat3::identity() - e * e.transpose()
}

/// Axial vector of the skew tensor `m − mᵀ`, i.e. `w` with `(m − mᵀ) v = w × v`.
pub fn axial_of_difference(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)])
}

/// A proper orthogonal 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    /// Validates `m` as a rotation.
    ///
    /// Matrices within `1e-12` of SO(3) (Frobenius defect of `mᵀm − I`, and
    /// `det − 1`) are accepted unchanged. Defects up to `1e-8` are repaired by
    /// polar projection onto SO(3); anything worse is rejected.
    pub fn new(m: Mat3) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("rotation matrix has non-finite entries".into()));
        }
        let defect = (m.transpose() * m - Mat3::identity()).norm();
        let det = m.determinant();
        if defect <= EXACT_DEFECT && (det - 1.0).abs() <= EXACT_DEFECT {
            return Ok(Self(m));
        }
        if defect <= REPAIRABLE_DEFECT && det > 0.0 {
            let svd = SVD::new(m, true, true);
            let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
            return Ok(Self(u * v_t));
        }
        Err(Error::NotARotation { defect, det })
    }

    pub(crate) fn from_raw(m: Mat3) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Product `self · rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }

    /// Frobenius distance to another rotation.
    pub fn distance(&self, other: &RotationMatrix) -> f64 {
        (self.0 - other.0).norm()
    }
}

/// Rodrigues vector `a = tan(α/2) e` of a rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RodriguesVector(Vec3);

impl RodriguesVector {
    pub fn new(a: Vec3) -> Result<Self> {
        if a.iter().all(|x| x.is_finite()) {
            Ok(Self(a))
        } else {
            Err(Error::InvalidInput("Rodrigues vector has non-finite components".into()))
        }
    }

    pub fn zero() -> Self {
        Self(Vec3::zeros())
    }

    pub fn vector(&self) -> &Vec3 {
        &self.0
    }

    /// Rotation angle in `[0, π)`.
    pub fn angle(&self) -> f64 {
        2.0 * self.0.norm().atan()
    }

    pub fn to_matrix(&self) -> RotationMatrix {
        matrix_from_rodrigues(self)
    }
}

/// Anticlockwise rotation about the unit axis `e` by `alpha ∈ [−π, π]`.
pub fn rotation_from_axis_angle(e: &Vec3, alpha: f64) -> Result<RotationMatrix> {
    if (e.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("axis is not a unit vector (|e| = {})", e.norm())));
    }
    if alpha.is_nan() || alpha.abs() > std::f64::consts::PI + 1e-12 {
        return Err(Error::InvalidInput(format!("angle {alpha} outside [-pi, pi]")));
    }
    let w = skew(e);
    Ok(RotationMatrix::from_raw(
        Mat3::identity() + w * alpha.sin() + w * w * (1.0 - alpha.cos()),
    ))
}

/// Rodrigues vector of `r`, from `W(a) = (R − Rᵀ)/(1 + tr R)`.
pub fn rodrigues_from_matrix(r: &RotationMatrix) -> Result<RodriguesVector> {
    let denom = 1.0 + r.trace();
    if denom <= PI_TURN_EPS {
        return Err(Error::PiTurn(denom));
    }
    Ok(RodriguesVector(axial_of_difference(r.matrix()) / denom))
}

/// Rodrigues' formula `R(a) = {(1 − a²) I + 2 a⊗a + 2 W(a)} / (1 + a²)`.
pub fn matrix_from_rodrigues(a: &RodriguesVector) -> RotationMatrix {
    let v = a.0;
    let a2 = v.norm_squared();
    let m = (Mat3::identity() * (1.0 - a2) + v * v.transpose() * 2.0 + skew(&v) * 2.0) / (1.0 + a2);
    RotationMatrix::from_raw(m)
}

/// Rodrigues vector of `R(a2) R(a1)` (apply `a1` first).
pub fn compose(a2: &RodriguesVector, a1: &RodriguesVector) -> Result<RodriguesVector> {
    let (p, q) = (a1.0, a2.0);
    let denom = 1.0 - p.dot(&q);
    if denom.abs() <= PI_TURN_EPS {
        return Err(Error::PiTurn(denom));
    }
    RodriguesVector::new((p + q + q.cross(&p)) / denom)
}

/// Factors of a rotation along and across an axis: `R(a) = R(a2) R(a1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSplit {
    /// Component parallel to the axis (drilling when the axis is the normal).
    pub a1: RodriguesVector,
    /// Component orthogonal to the axis (bending when the axis is the normal).
    pub a2: RodriguesVector,
}

impl AxisSplit {
    pub fn recompose(&self) -> Result<RodriguesVector> {
        compose(&self.a2, &self.a1)
    }
}

/// Unique split of `R(a)` into a rotation about `e` followed by one about an
/// axis orthogonal to `e`:
///
/// `a1 = (a·e) e`, `a2 = {I + (a·e) W(e)} P(e) a / (1 + (a·e)²)`.
pub fn split_about_axis(a: &RodriguesVector, e: &Vec3) -> Result<AxisSplit> {
    if (e.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("axis is not a unit vector (|e| = {})", e.norm())));
    }
    let v = a.0;
    if v.cross(e).norm() == 0.0 {
        return Ok(AxisSplit { a1: *a, a2: RodriguesVector::zero() });
    }
    let u = v.dot(e);
    let pa = projector(e) * v;
    let a2 = (pa + e.cross(&pa) * u) / (1.0 + u * u);
    Ok(AxisSplit { a1: RodriguesVector(e * u), a2: RodriguesVector(a2) })
}

/// The factor `a2` of [`split_about_axis`] computed from the matrix: the
/// smallest rotation taking `e` to `R e`, `a2 = e × Re / (1 + e·Re)`. It
/// stays finite when the drilling factor is a π-turn and `a` is not.
pub fn bending_factor(r: &RotationMatrix, e: &Vec3) -> Result<RodriguesVector> {
    let re = r.matrix() * e;
    let c = 1.0 + e.dot(&re);
    if c <= PI_TURN_EPS {
        return Err(Error::PiTurn(c));
    }
    Ok(RodriguesVector(e.cross(&re) / c))
}

/// Squared Frobenius distance `d(u) = |R(a) − R(u e)|²` on each grid value.
///
/// The closest rotation about `e` sits at `u = a·e` and the farthest at
/// `u = −1/(a·e)`; this profile is the independent numeric check of that.
pub fn axis_distance_profile(a: &RodriguesVector, e: &Vec3, u_grid: &[f64]) -> Vec<f64> {
    let target = *matrix_from_rodrigues(a).matrix();
    u_grid
        .iter()
        .map(|&u| {
            let r = matrix_from_rodrigues(&RodriguesVector(e * u));
            (target - r.matrix()).norm_squared()
        })
        .collect()
}

/// Closed form of [`axis_distance_profile`] at a single `u`.
pub fn axis_distance_closed_form(a: &RodriguesVector, e: &Vec3, u: f64) -> f64 {
    let a2 = a.0.norm_squared();
    let s = a.0.dot(e);
    6.0 + 2.0 / ((1.0 + a2) * (1.0 + u * u))
        * ((1.0 + a2 - 4.0 * s * s) * u * u - 8.0 * s * u + a2 - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rv(x: f64, y: f64, z: f64) -> RodriguesVector {
        RodriguesVector::new(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn axis_angle_examples() {
        let e3 = Vec3::z();
        let r = rotation_from_axis_angle(&e3, 0.0).unwrap();
        assert!((r.matrix() - Mat3::identity()).norm() < 1e-15);

        let r = rotation_from_axis_angle(&e3, FRAC_PI_2).unwrap();
        assert!((r.matrix() * Vec3::x() - Vec3::y()).norm() < 1e-15);
        assert!((r.matrix() * Vec3::y() + Vec3::x()).norm() < 1e-15);

        let r = rotation_from_axis_angle(&Vec3::x(), PI).unwrap();
        let expected = Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0));
        assert!((r.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn axis_angle_rejects_bad_input() {
        assert!(matches!(
            rotation_from_axis_angle(&Vec3::new(1.0, 1.0, 0.0), 0.3),
            Err(Error::InvalidInput(_))
        ));
        assert!(rotation_from_axis_angle(&Vec3::z(), 4.0).is_err());
    }

    #[test]
    fn rodrigues_examples() {
        let a = rodrigues_from_matrix(&RotationMatrix::identity()).unwrap();
        assert_eq!(*a.vector(), Vec3::zeros());

        let r = rotation_from_axis_angle(&Vec3::z(), FRAC_PI_2).unwrap();
        let a = rodrigues_from_matrix(&r).unwrap();
        assert!((a.vector() - Vec3::z()).norm() < 1e-15);

        let half_turn = RotationMatrix::new(Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0))).unwrap();
        assert!(matches!(rodrigues_from_matrix(&half_turn), Err(Error::PiTurn(_))));
    }

    #[test]
    fn rodrigues_magnitude_matches_trace() {
        let r = rotation_from_axis_angle(&Vec3::new(0.6, 0.0, 0.8), 2.1).unwrap();
        let a = rodrigues_from_matrix(&r).unwrap();
        let tr = r.trace();
        assert!((a.vector().norm_squared() - (3.0 - tr) / (1.0 + tr)).abs() < 1e-10);
    }

    #[test]
    fn matrix_from_rodrigues_examples() {
        assert!((matrix_from_rodrigues(&RodriguesVector::zero()).matrix() - Mat3::identity()).norm() < 1e-15);
        let expected = rotation_from_axis_angle(&Vec3::z(), FRAC_PI_2).unwrap();
        assert!(matrix_from_rodrigues(&rv(0.0, 0.0, 1.0)).distance(&expected) < 1e-15);
    }

    #[test]
    fn compose_examples() {
        let a1 = rv(0.3, -1.2, 0.7);
        assert_eq!(compose(&RodriguesVector::zero(), &a1).unwrap(), a1);

        // Hand evaluation: a1 + a2 = (0.5, 0.5, 1), a2 × a1 = (0.5, −0.5, 0), a1·a2 = 0.
        let a = compose(&rv(0.5, 0.5, 0.0), &rv(0.0, 0.0, 1.0)).unwrap();
        assert!((a.vector() - Vec3::new(1.0, 0.0, 1.0)).norm() < 1e-15);
        let product = matrix_from_rodrigues(&rv(0.5, 0.5, 0.0))
            .then_after(&matrix_from_rodrigues(&rv(0.0, 0.0, 1.0)));
        assert!(matrix_from_rodrigues(&a).distance(&product) < 1e-14);

        // a1·a2 = 1 lies on the π-turn cone.
        assert!(matches!(
            compose(&rv(1.0, 0.0, 1.0), &rv(0.0, 0.0, 1.0)),
            Err(Error::PiTurn(_))
        ));
    }

    #[test]
    fn split_examples() {
        let s = split_about_axis(&rv(0.0, 0.0, 2.0), &Vec3::z()).unwrap();
        assert_eq!(*s.a1.vector(), Vec3::new(0.0, 0.0, 2.0));
        assert_eq!(*s.a2.vector(), Vec3::zeros());

        let s = split_about_axis(&rv(1.0, 0.0, 1.0), &Vec3::z()).unwrap();
        assert!((s.a1.vector() - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
        assert!((s.a2.vector() - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
        assert!((s.a2.vector().norm_squared() - 0.5).abs() < 1e-15);
        let back = s.recompose().unwrap();
        assert!((back.vector() - Vec3::new(1.0, 0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn bending_factor_matches_split_and_survives_drilling_pi_turns() {
        let a = rv(1.0, 0.0, 1.0);
        let b = bending_factor(&matrix_from_rodrigues(&a), &Vec3::z()).unwrap();
        assert!((b.vector() - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);

        // R = R(b) R_z(π): the Rodrigues vector of R is undefined-free but a1 is not
        let bend = rv(0.3, -0.2, 0.0);
        let r = matrix_from_rodrigues(&bend).then_after(&rotation_from_axis_angle(&Vec3::z(), PI).unwrap());
        let b = bending_factor(&r, &Vec3::z()).unwrap();
        assert!((b.vector() - bend.vector()).norm() < 1e-15);
    }

    #[test]
    fn distance_profile_examples() {
        let e3 = Vec3::z();
        let d = axis_distance_profile(&rv(0.0, 0.0, 1.0), &e3, &[1.0]);
        assert!(d[0].abs() < 1e-15);

        let a = rv(1.0, 0.0, 1.0);
        let grid: Vec<f64> = (0..=20_000).map(|k| -10.0 + 1e-3 * k as f64).collect();
        let d = axis_distance_profile(&a, &e3, &grid);
        let (imin, _) = d.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap();
        let (imax, _) = d.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap();
        assert!((grid[imin] - 1.0).abs() <= 1e-3);
        assert!((grid[imax] + 1.0).abs() <= 1e-3);

        for (u, dv) in grid.iter().zip(&d).step_by(997) {
            assert!((axis_distance_closed_form(&a, &e3, *u) - dv).abs() < 1e-12);
        }
    }

    #[test]
    fn nearly_orthogonal_matrices_are_repaired() {
        let r = rotation_from_axis_angle(&Vec3::new(0.0, 0.6, 0.8), 0.9).unwrap();
        let perturbed = r.matrix() + Mat3::from_element(1e-10);
        let fixed = RotationMatrix::new(perturbed).unwrap();
        assert!((fixed.matrix().transpose() * fixed.matrix() - Mat3::identity()).norm() < 1e-13);
        assert!(RotationMatrix::new(r.matrix() + Mat3::from_element(1e-6)).is_err());
        assert!(RotationMatrix::new(-Mat3::identity()).is_err());
    }
}
