//! Bending-neutral deformations.
//!
//! A deformation is bending-neutral when the rotation factor of its surface
//! gradient is a pure drilling about the normal. Between two minimal surfaces
//! with the same spherical image (data `F`, `F*` on the same Ω) it reads
//!
//! ```text
//! ∇ₛy = μ R_ν(α) P(ν),   μ = e^{Φ* − Φ},  α = χ* − χ,
//! ```
//!
//! with `R_ν(α) = I + sin α W(ν) − (1 − cos α) P(ν)`. This module evaluates
//! such fields together with the checkers for their compatibility and
//! integrability, and the frame-dependent bending/drilling contents of the
//! map Ω → S against the fixed frame `(e1, e2, e3)` of the parameter plane.

use serde::{Deserialize, Serialize};

use crate::grid::{interior_max, Field, Grid, Scheme};
use crate::rotations::{bending_factor, projector, rodrigues_from_matrix, skew, split_about_axis, RotationMatrix};
use crate::surfcalc::{ConnectorField, CurvatureData, Frame, PathOrder, SurfacePatch};
use crate::weierstrass::{metric_vectors, normal, Domain, WPoint, WeierstrassSurface};
use crate::{Error, Mat3, Result, Vec3};

/// Samples with `|sin(χ/2 + φ)|` below this are treated as poles of the
/// drilling content and masked.
pub const DRILLING_POLE_EPS: f64 = 1e-3;

/// Largest interior `|Δₛφ| / |∇ₛ∇ₛφ|` (maxima over the interior) accepted
/// as harmonic by [`alpha_from_phi`].
pub const HARMONIC_TOL: f64 = 1e-2;

/// `R_ν(α) = I + sin α W(ν) − (1 − cos α) P(ν)`.
pub fn drilling_rotation(nu: &Vec3, alpha: f64) -> Mat3 {
    Mat3::identity() + skew(nu) * alpha.sin() - projector(nu) * (1.0 - alpha.cos())
}

/// Deformation gradient and its factors at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationSample {
    pub grad: Mat3,
    pub mu: f64,
    pub alpha: f64,
    pub nu: Vec3,
    /// Drilling rotation `R_ν(α)`.
    pub rotation: Mat3,
    /// Surface stretching tensor `μ P(ν)`.
    pub stretch: Mat3,
}

#[derive(Debug, Clone)]
pub struct DeformationField {
    pub grid: Grid,
    pub samples: Field<DeformationSample>,
}

impl DeformationField {
    pub fn mu(&self) -> Field<f64> {
        self.samples.map(|s| s.mu)
    }

    pub fn alpha(&self) -> Field<f64> {
        self.samples.map(|s| s.alpha)
    }
}

fn same_sampling(s: &WeierstrassSurface, s_star: &WeierstrassSurface) -> Result<()> {
    if s.domain() != s_star.domain() || s.grid() != s_star.grid() {
        return Err(Error::InvalidInput("surfaces are not sampled on the same domain grid".into()));
    }
    Ok(())
}

/// Deformation `S → S*` between two surfaces generated on the same Ω grid.
pub fn deformation_between(s: &WeierstrassSurface, s_star: &WeierstrassSurface) -> Result<DeformationField> {
    same_sampling(s, s_star)?;
    let samples = s.points().map(|p| {
        let (big_phi, chi) = s.datum().eval(p);
        let (big_phi_star, chi_star) = s_star.datum().eval(p);
        let mu = (big_phi_star - big_phi).exp();
        let alpha = chi_star - chi;
        let nu = normal(p);
        let rotation = drilling_rotation(&nu, alpha);
        let stretch = projector(&nu) * mu;
        DeformationSample { grad: rotation * stretch, mu, alpha, nu, rotation, stretch }
    });
    Ok(DeformationField { grid: *s.grid(), samples })
}

/// Interior maximum of `|(∇ₛy) r_s − r*_s|` and `|(∇ₛy) r_t − r*_t|`, with
/// the tangents of both surfaces taken by finite differences.
pub fn chain_rule_residual(
    s: &WeierstrassSurface,
    s_star: &WeierstrassSurface,
    field: &DeformationField,
    scheme: Scheme,
) -> Result<f64> {
    same_sampling(s, s_star)?;
    let g = s.grid();
    let (a_s, a_t) = (s.positions().d_ds(g, scheme), s.positions().d_dt(g, scheme));
    let (b_s, b_t) = (s_star.positions().d_ds(g, scheme), s_star.positions().d_dt(g, scheme));
    Ok(interior_max(g, &field.samples, scheme.margin(), |i, j, d| {
        let es = (d.grad * a_s.at(i, j) - b_s.at(i, j)).norm();
        let et = (d.grad * a_t.at(i, j) - b_t.at(i, j)).norm();
        Some(es.max(et))
    }))
}

/// Pointwise residuals of the two integrability equations for `(λ, α)`;
/// `None` marks excluded (umbilic or non-hyperbolic) samples.
#[derive(Debug, Clone)]
pub struct IntegrabilityResiduals {
    pub first: Field<Option<f64>>,
    pub second: Field<Option<f64>>,
    pub excluded: usize,
}

impl IntegrabilityResiduals {
    /// Largest `|residual|` of either equation over interior samples.
    pub fn interior_max(&self, grid: &Grid, margin: usize) -> f64 {
        interior_max(grid, &self.first, margin, |i, j, a| {
            let b = self.second.get(i, j);
            match (a, b) {
                (Some(a), Some(b)) => Some(a.abs().max(b.abs())),
                _ => None,
            }
        })
    }
}

/// Evaluates, with `c` the connector of the frame `(n1, n2)`,
///
/// ```text
/// ∇(λκ1 cos α)·n2 − ∇(λκ2 sin α)·n1 − λ(κ1 + κ2)(cos α c·n1 + sin α c·n2)
/// ∇(λκ1 sin α)·n2 + ∇(λκ2 cos α)·n1 − λ(κ1 + κ2)(sin α c·n1 − cos α c·n2)
/// ```
///
/// Both vanish exactly when `U = λ(κ1 n1⊗n1 − κ2 n2⊗n2)` and `R_ν(α)`
/// assemble into the gradient of a bending-neutral deformation.
pub fn integrability_residual_general(
    patch: &SurfacePatch,
    curvature: &Field<CurvatureData>,
    connector: &ConnectorField,
    lambda: &Field<f64>,
    alpha: &Field<f64>,
) -> Result<IntegrabilityResiduals> {
    let g = patch.grid();
    if !(curvature.matches(g) && connector.c.matches(g) && lambda.matches(g) && alpha.matches(g)) {
        return Err(Error::GridMismatch("integrability inputs do not share the patch grid".into()));
    }
    let product = |k: fn(&CurvatureData) -> f64, trig: fn(f64) -> f64| {
        Field::from_index_fn(g, |i, j| lambda.at(i, j) * k(curvature.get(i, j)) * trig(alpha.at(i, j)))
    };
    let k1 = |c: &CurvatureData| c.kappa1;
    let k2 = |c: &CurvatureData| c.kappa2;
    let grad_a = patch.gradient(&product(k1, f64::cos))?;
    let grad_b = patch.gradient(&product(k2, f64::sin))?;
    let grad_c = patch.gradient(&product(k1, f64::sin))?;
    let grad_d = patch.gradient(&product(k2, f64::cos))?;

    let excluded_at = |i: usize, j: usize| {
        let c = curvature.get(i, j);
        c.umbilic || c.kappa1 * c.kappa2 >= 0.0
    };
    let eval = |i: usize, j: usize| -> Option<(f64, f64)> {
        if excluded_at(i, j) {
            return None;
        }
        let cd = curvature.get(i, j);
        let (n1, n2, c) = (connector.n1.at(i, j), connector.n2.at(i, j), connector.c.at(i, j));
        let (sin, cos) = alpha.at(i, j).sin_cos();
        let trace = lambda.at(i, j) * (cd.kappa1 + cd.kappa2);
        let (c1, c2) = (c.dot(&n1), c.dot(&n2));
        let first = grad_a.at(i, j).dot(&n2) - grad_b.at(i, j).dot(&n1) - trace * (cos * c1 + sin * c2);
        let second = grad_c.at(i, j).dot(&n2) + grad_d.at(i, j).dot(&n1) - trace * (sin * c1 - cos * c2);
        Some((first, second))
    };
    let both = Field::from_index_fn(g, eval);
    let excluded = both.values().iter().filter(|x| x.is_none()).count();
    Ok(IntegrabilityResiduals {
        first: both.map(|x| x.map(|p| p.0)),
        second: both.map(|x| x.map(|p| p.1)),
        excluded,
    })
}

/// Drilling angle with `∇ₛα = ν × ∇ₛφ` and `α(base) = alpha0`, after
/// checking that `φ` is surface harmonic relative to its second gradient.
pub fn alpha_from_phi(patch: &SurfacePatch, phi: &Field<f64>, alpha0: f64, base: (usize, usize)) -> Result<Field<f64>> {
    let hessian = patch.second_gradient(phi)?;
    let margin = patch.margin();
    let laplacian = interior_max(patch.grid(), &hessian, margin, |_, _, h| Some(h.trace().abs()));
    let size = interior_max(patch.grid(), &hessian, margin, |_, _, h| Some(h.norm()));
    let residual = if size > 0.0 { laplacian / size } else { 0.0 };
    if residual.is_nan() || residual >= HARMONIC_TOL {
        return Err(Error::IntegrabilityViolation(residual));
    }
    alpha_from_phi_unchecked(patch, phi, alpha0, base)
}

/// As [`alpha_from_phi`] without the harmonicity guard; the result depends
/// on the integration path when `φ` is not harmonic.
pub fn alpha_from_phi_unchecked(
    patch: &SurfacePatch,
    phi: &Field<f64>,
    alpha0: f64,
    base: (usize, usize),
) -> Result<Field<f64>> {
    let grad = patch.gradient(phi)?;
    let h = patch.normals().zip_map(&grad, |nu, g| nu.cross(g));
    Ok(patch.path_integrate(&h, base, PathOrder::SFirst)?.map(|a| a + alpha0))
}

/// Stretch ratio `μ2/μ1` required for compatibility of a bending-neutral
/// deformation with stretch axes at angle `β` from `n1` and drilling `α`:
///
/// `μ2/μ1 = 1 − (κ1 + κ2) sin α / (κ2 sin α + (κ1 − κ2) cos β sin(α + β))`.
pub fn compatibility_ratio(kappa1: f64, kappa2: f64, alpha: f64, beta: f64) -> Result<f64> {
    let num = (kappa1 + kappa2) * alpha.sin();
    let den = kappa2 * alpha.sin() + (kappa1 - kappa2) * beta.cos() * (alpha + beta).sin();
    let scale = kappa1.abs() + kappa2.abs();
    if den.abs() <= 1e-14 * scale {
        if num.abs() <= 1e-14 * scale {
            // sin α = 0 with a degenerate denominator: no drilling, no constraint
            return Ok(1.0);
        }
        return Err(Error::UndefinedRatio);
    }
    Ok(1.0 - num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    /// `μ2/μ1` of the supplied stretch.
    pub ratio_lhs: f64,
    /// Ratio prescribed by [`compatibility_ratio`].
    pub ratio_rhs: f64,
    /// `|skw(∇ₛν*)|` in the principal frame, with
    /// `∇ₛν* = K U⁻¹ Rᵀ`, `U = Q(β) diag(μ1, μ2) Q(β)ᵀ`, `R = Q(α)`.
    pub symmetry_residual: f64,
}

/// Checks a candidate stretch `(μ1, μ2)` two ways: against the scalar
/// ratio and through the symmetry of the image curvature tensor.
pub fn compatibility_report(
    kappa1: f64,
    kappa2: f64,
    alpha: f64,
    beta: f64,
    mu1: f64,
    mu2: f64,
) -> Result<CompatibilityReport> {
    if !(mu1 > 0.0 && mu2 > 0.0) {
        return Err(Error::InvalidInput("stretches must be positive".into()));
    }
    let ratio_rhs = compatibility_ratio(kappa1, kappa2, alpha, beta)?;
    let q = |a: f64| nalgebra::Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos());
    let k = nalgebra::Matrix2::new(kappa1, 0.0, 0.0, kappa2);
    let u_inv = q(beta) * nalgebra::Matrix2::new(1.0 / mu1, 0.0, 0.0, 1.0 / mu2) * q(beta).transpose();
    let image = k * u_inv * q(alpha).transpose();
    Ok(CompatibilityReport {
        ratio_lhs: mu2 / mu1,
        ratio_rhs,
        symmetry_residual: (image[(0, 1)] - image[(1, 0)]).abs(),
    })
}

/// `|tr ∇ₛν*|` for the hyperbolic reduced stretch
/// `U = λ(κ1 n1⊗n1 − κ2 n2⊗n2)` and drilling `R_ν(α)`, where
/// `∇ₛν* = (∇ₛν) U⁻¹ Rᵀ` on the tangent plane. The frame supplies
/// `(n1, n2, ν) = (e_u, e_v, nu)`. Vanishes identically: the image is minimal.
pub fn image_mean_curvature_check(kappa1: f64, kappa2: f64, lambda: f64, alpha: f64, frame: &Frame) -> f64 {
    let (n1, n2) = (frame.e_u, frame.e_v);
    let p1 = n1 * n1.transpose();
    let p2 = n2 * n2.transpose();
    let curvature = p1 * kappa1 + p2 * kappa2;
    let (mu1, mu2) = (lambda * kappa1, -lambda * kappa2);
    let u_inv = p1 / mu1 + p2 / mu2;
    let image = curvature * u_inv * drilling_rotation(&frame.nu, alpha).transpose();
    image.trace().abs()
}

/// Bending and drilling contents at one sample, closed form and from the
/// Rodrigues split of `R_r = e_u⊗e1 + e_v⊗e2 + ν⊗e3` about `e3`. Masked
/// entries are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendingSample {
    /// `(1/ρ) e_φ`.
    pub b: Option<Vec3>,
    /// `−cot(χ/2 + φ) e3`.
    pub d: Option<Vec3>,
    pub b_split: Option<Vec3>,
    pub d_split: Option<Vec3>,
}

#[derive(Debug, Clone)]
pub struct BendingContent {
    pub samples: Field<BendingSample>,
    pub masked: usize,
}

impl BendingContent {
    /// Largest closed-form vs split discrepancy over unmasked samples,
    /// relative to `max(1, |·|)` since `d` grows unbounded near poles.
    pub fn split_discrepancy(&self) -> f64 {
        let rel = |x: Vec3, y: Vec3| (x - y).norm() / x.norm().max(1.0);
        self.samples
            .values()
            .iter()
            .filter_map(|s| match (s.b, s.b_split, s.d, s.d_split) {
                (Some(b), Some(bs), Some(d), Some(ds)) => Some(rel(b, bs).max(rel(d, ds))),
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

/// Contents of the map Ω → S at `p`, masking `ρ = 0` and drilling poles.
pub fn bending_sample(surface: &WeierstrassSurface, p: &WPoint) -> BendingSample {
    let masked = BendingSample { b: None, d: None, b_split: None, d_split: None };
    if p.rho <= 0.0 {
        return masked;
    }
    let b = Vec3::new(-p.v, p.u, 0.0) / (p.rho * p.rho);
    let (_, chi) = surface.datum().eval(p);
    let angle = 0.5 * chi + p.phi;
    let (r_u, r_v) = metric_vectors(surface.datum(), p);
    let Ok(r) = RotationMatrix::new(Mat3::from_columns(&[r_u.normalize(), r_v.normalize(), normal(p)])) else {
        return BendingSample { b: Some(b), ..masked };
    };
    // at a drilling pole R_r has no Rodrigues vector, but its bending factor does
    let b_split = bending_factor(&r, &Vec3::z()).ok().map(|a| *a.vector());
    if angle.sin().abs() < DRILLING_POLE_EPS {
        return BendingSample { b: Some(b), b_split, ..masked };
    }
    let d = Vec3::new(0.0, 0.0, -angle.cos() / angle.sin());
    match rodrigues_from_matrix(&r).and_then(|a| split_about_axis(&a, &Vec3::z())) {
        Ok(s) => BendingSample { b: Some(b), d: Some(d), b_split: Some(*s.a2.vector()), d_split: Some(*s.a1.vector()) },
        Err(_) => BendingSample { b: Some(b), d: Some(d), b_split, d_split: None },
    }
}

pub fn bending_drilling_field(surface: &WeierstrassSurface) -> BendingContent {
    let samples = surface.points().map(|p| bending_sample(surface, p));
    let masked = samples.values().iter().filter(|s| s.d_split.is_none()).count();
    BendingContent { samples, masked }
}

/// `A = 4/(ρ² + 1)² P(e3)`.
pub fn pure_bending_closed_form(p: &WPoint) -> Mat3 {
    let d = p.rho * p.rho + 1.0;
    projector(&Vec3::z()) * (4.0 / (d * d))
}

/// `A = (∇ν)ᵀ(∇ν)` from the closed-form partials of
/// `ν = (2u, 2v, ρ² − 1)/(ρ² + 1)`.
pub fn pure_bending_measure(surface: &WeierstrassSurface) -> Field<Mat3> {
    surface.points().map(|p| {
        let (u, v) = (p.u, p.v);
        let d = u * u + v * v + 1.0;
        let d2 = d * d;
        let nu_u = Vec3::new(2.0 / d - 4.0 * u * u / d2, -4.0 * u * v / d2, 4.0 * u / d2);
        let nu_v = Vec3::new(-4.0 * u * v / d2, 2.0 / d - 4.0 * v * v / d2, 4.0 * v / d2);
        from_partials(&nu_u, &nu_v)
    })
}

/// `A` from finite-difference normals of the integrated surface.
pub fn pure_bending_measure_fd(surface: &WeierstrassSurface, scheme: Scheme) -> Result<Field<Mat3>> {
    let patch = surface.fd_patch(scheme)?;
    let g = surface.grid();
    let (nu_s, nu_t) = (patch.normals().d_ds(g, scheme), patch.normals().d_dt(g, scheme));
    let domain = *surface.domain();
    Ok(Field::from_index_fn(g, |i, j| {
        let (s, t) = g.coords(i, j);
        let (nu_u, nu_v) = to_cartesian_partials(&domain, s, t, nu_s.at(i, j), nu_t.at(i, j));
        from_partials(&nu_u, &nu_v)
    }))
}

fn from_partials(nu_u: &Vec3, nu_v: &Vec3) -> Mat3 {
    let grad = Mat3::from_columns(&[*nu_u, *nu_v, Vec3::zeros()]);
    grad.transpose() * grad
}

/// Chain rule from grid derivatives to `(∂/∂u, ∂/∂v)`.
fn to_cartesian_partials(domain: &Domain, s: f64, t: f64, ds: Vec3, dt: Vec3) -> (Vec3, Vec3) {
    match domain {
        Domain::Annulus { .. } => {
            let (sin, cos) = t.sin_cos();
            (ds * cos - dt * (sin / s), ds * sin + dt * (cos / s))
        }
        Domain::Rectangle { .. } => (ds, dt),
    }
}
