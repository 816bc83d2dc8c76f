//! Surface differential operators on sampled parametric patches.
//!
//! A [`SurfacePatch`] holds positions `r(s, t)` on a uniform grid together
//! with the tangents `r_s`, `r_t` (finite differences or supplied
//! analytically), the unit normal `ν = r_s × r_t / |r_s × r_t|` and the dual
//! tangent basis `a^s`, `a^t` (`a^α · r_β = δ^α_β`). Every surface operator is
//! then coordinate-free:
//!
//! - `∇ₛφ = φ_s a^s + φ_t a^t`
//! - `∇ₛh = h_s ⊗ a^s + h_t ⊗ a^t`, so `∇ₛh = (∇h) P(ν)`
//! - `curlₛ h` is the axial vector of `∇ₛh − (∇ₛh)ᵀ`
//! - `Δₛφ = divₛ ∇ₛφ`
//!
//! With this sign convention an outward-parameterized sphere of radius `R`
//! has `∇ₛν = P(ν)/R`, i.e. both principal curvatures equal `+1/R`.

use serde::{Deserialize, Serialize};

use crate::grid::{diff1, Field, Grid, Scheme};
use crate::rotations::axial_of_difference;
use crate::{Error, Mat3, Result, Vec3};

/// Orthonormal right-handed frame `(e_u, e_v, ν)` at a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub e_u: Vec3,
    pub e_v: Vec3,
    pub nu: Vec3,
}

impl Frame {
    /// Frame from a first tangent and the unit normal; `e_v = ν × e_u`.
    pub fn from_tangent(tangent: &Vec3, nu: &Vec3) -> Self {
        let e_u = tangent.normalize();
        Self { e_u, e_v: nu.cross(&e_u), nu: *nu }
    }

    pub fn handedness_residual(&self) -> f64 {
        (self.e_u.cross(&self.e_v) - self.nu).norm()
    }
}

/// Curvature at a sample: the curvature tensor `∇ₛν` and its spectral data
/// on the tangent plane, `κ1 ≥ κ2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData {
    pub shape_operator: Mat3,
    pub kappa1: f64,
    pub kappa2: f64,
    pub n1: Vec3,
    pub n2: Vec3,
    /// Mean curvature `(κ1 + κ2)/2`.
    pub mean: f64,
    /// Gaussian curvature `κ1 κ2`.
    pub gauss: f64,
    /// Principal directions are not unique here.
    pub umbilic: bool,
    /// `|M12 − M21|` of the tangent-plane restriction before symmetrization.
    pub asymmetry: f64,
}

impl CurvatureData {
    /// Spectral data of a curvature tensor given the frame it lives in.
    ///
    /// `length_scale` enters the umbilic test
    /// `|κ1 − κ2| < 1e-8 · max(|κ1|, |κ2|, 1/L)`.
    pub fn from_tensor(shape_operator: Mat3, frame: &Frame, length_scale: f64) -> Self {
        let (eu, ev) = (frame.e_u, frame.e_v);
        let m11 = eu.dot(&(shape_operator * eu));
        let m12 = eu.dot(&(shape_operator * ev));
        let m21 = ev.dot(&(shape_operator * eu));
        let m22 = ev.dot(&(shape_operator * ev));
        let off = 0.5 * (m12 + m21);
        let mean = 0.5 * (m11 + m22);
        let half_gap = (0.25 * (m11 - m22).powi(2) + off * off).sqrt();
        let (kappa1, kappa2) = (mean + half_gap, mean - half_gap);
        let theta = 0.5 * (2.0 * off).atan2(m11 - m22);
        let n1 = eu * theta.cos() + ev * theta.sin();
        let n2 = frame.nu.cross(&n1);
        let scale = kappa1.abs().max(kappa2.abs()).max(1.0 / length_scale);
        Self {
            shape_operator,
            kappa1,
            kappa2,
            n1,
            n2,
            mean,
            gauss: kappa1 * kappa2,
            umbilic: 2.0 * half_gap < 1e-8 * scale,
            asymmetry: (m12 - m21).abs(),
        }
    }
}

/// Connector `c = (∇ₛn1)ᵀ n2` together with the oriented principal frame it
/// was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectorField {
    pub n1: Field<Vec3>,
    pub n2: Field<Vec3>,
    /// `(∇ₛn1)ᵀ n2`.
    pub c: Field<Vec3>,
    /// `−(∇ₛn2)ᵀ n1`, equal to `c` in the continuum.
    pub c_alt: Field<Vec3>,
}

/// Order of the two legs in [`SurfacePatch::path_integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOrder {
    /// Along `s` on the base row, then along `t`.
    SFirst,
    /// Along `t` on the base column, then along `s`.
    TFirst,
}

/// Closed contour on grid lines, as a list of nodes joined by unit steps.
#[derive(Debug, Clone, PartialEq)]
pub struct GridContour {
    nodes: Vec<(usize, usize)>,
}

impl GridContour {
    /// Validates that consecutive nodes are grid neighbours and that the
    /// contour closes on itself.
    pub fn from_nodes(nodes: Vec<(usize, usize)>) -> Result<Self> {
        if nodes.len() < 5 {
            return Err(Error::InvalidInput("contour needs at least four edges".into()));
        }
        if nodes.first() != nodes.last() {
            return Err(Error::InvalidInput("contour is not closed".into()));
        }
        for w in nodes.windows(2) {
            let di = w[0].0.abs_diff(w[1].0);
            let dj = w[0].1.abs_diff(w[1].1);
            if di + dj != 1 {
                return Err(Error::InvalidInput(format!(
                    "contour step {:?} -> {:?} is not a unit grid step",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// Boundary of the index rectangle `[i0, i1] × [j0, j1]`, anticlockwise
    /// in `(s, t)`.
    pub fn rectangle(i0: usize, i1: usize, j0: usize, j1: usize) -> Result<Self> {
        if i1 <= i0 || j1 <= j0 {
            return Err(Error::InvalidInput("empty contour rectangle".into()));
        }
        let mut nodes = Vec::new();
        nodes.extend((i0..i1).map(|i| (i, j0)));
        nodes.extend((j0..j1).map(|j| (i1, j)));
        nodes.extend((i0 + 1..=i1).rev().map(|i| (i, j1)));
        nodes.extend((j0 + 1..=j1).rev().map(|j| (i0, j)));
        nodes.push((i0, j0));
        Self::from_nodes(nodes)
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    /// Winding number of the contour around the centre of cell `(ic, jc)`.
    fn winding(&self, ic: usize, jc: usize) -> i32 {
        self.nodes
            .windows(2)
            .filter(|w| w[0].0 == w[1].0 && w[0].0 > ic && w[0].1.min(w[1].1) == jc)
            .map(|w| if w[1].1 > w[0].1 { 1 } else { -1 })
            .sum()
    }
}

/// Sampled parametric patch with its first-order differential geometry.
#[derive(Debug, Clone)]
pub struct SurfacePatch {
    grid: Grid,
    scheme: Scheme,
    positions: Field<Vec3>,
    r_s: Field<Vec3>,
    r_t: Field<Vec3>,
    normals: Field<Vec3>,
    dual_s: Field<Vec3>,
    dual_t: Field<Vec3>,
    area_density: Field<f64>,
    diameter: f64,
}

impl SurfacePatch {
    /// Patch whose tangents come from finite differences of the samples.
    pub fn from_samples(grid: Grid, positions: Field<Vec3>, scheme: Scheme) -> Result<Self> {
        if !positions.matches(&grid) {
            return Err(Error::GridMismatch("positions do not match the grid".into()));
        }
        let r_s = positions.d_ds(&grid, scheme);
        let r_t = positions.d_dt(&grid, scheme);
        Self::assemble(grid, scheme, positions, r_s, r_t)
    }

    /// Samples `r(s, t)` and differentiates numerically.
    pub fn from_fn(grid: Grid, scheme: Scheme, r: impl Fn(f64, f64) -> Vec3 + Sync) -> Result<Self> {
        let positions = grid.sample(r);
        Self::from_samples(grid, positions, scheme)
    }

    /// Patch with analytically supplied tangents `r_s`, `r_t`.
    pub fn with_tangents(
        grid: Grid,
        positions: Field<Vec3>,
        r_s: Field<Vec3>,
        r_t: Field<Vec3>,
        scheme: Scheme,
    ) -> Result<Self> {
        if !(positions.matches(&grid) && r_s.matches(&grid) && r_t.matches(&grid)) {
            return Err(Error::GridMismatch("tangent fields do not match the grid".into()));
        }
        Self::assemble(grid, scheme, positions, r_s, r_t)
    }

    fn assemble(
        grid: Grid,
        scheme: Scheme,
        positions: Field<Vec3>,
        r_s: Field<Vec3>,
        r_t: Field<Vec3>,
    ) -> Result<Self> {
        let (ns, nt) = grid.dims();
        for j in 0..nt {
            for i in 0..ns {
                let (a, b) = (r_s.at(i, j), r_t.at(i, j));
                let cross = a.cross(&b).norm();
                if !(cross.is_finite() && cross > 1e-12 * a.norm() * b.norm()) {
                    return Err(Error::SingularPoint { i, j });
                }
            }
        }
        let normals = r_s.zip_map(&r_t, |a, b| a.cross(b).normalize());
        let area_density = r_s.zip_map(&r_t, |a, b| a.cross(b).norm());
        let duals = r_s.zip_map(&r_t, |a, b| {
            let (e, f, g) = (a.dot(a), a.dot(b), b.dot(b));
            let det = e * g - f * f;
            ((a * g - b * f) / det, (b * e - a * f) / det)
        });
        let dual_s = duals.map(|d| d.0);
        let dual_t = duals.map(|d| d.1);

        let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
        for p in positions.values() {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let diameter = (hi - lo).norm().max(f64::MIN_POSITIVE);

        Ok(Self { grid, scheme, positions, r_s, r_t, normals, dual_s, dual_t, area_density, diameter })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Nodes far enough from the edges for identity statistics.
    pub fn margin(&self) -> usize {
        self.scheme.margin()
    }

    pub fn positions(&self) -> &Field<Vec3> {
        &self.positions
    }

    pub fn tangent_s(&self) -> &Field<Vec3> {
        &self.r_s
    }

    pub fn tangent_t(&self) -> &Field<Vec3> {
        &self.r_t
    }

    pub fn normals(&self) -> &Field<Vec3> {
        &self.normals
    }

    /// `|r_s × r_t|`.
    pub fn area_density(&self) -> &Field<f64> {
        &self.area_density
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn frames(&self) -> Field<Frame> {
        self.r_s.zip_map(&self.normals, Frame::from_tangent)
    }

    fn check<T>(&self, f: &Field<T>) -> Result<()> {
        if f.matches(&self.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("field does not match the patch grid".into()))
        }
    }

    /// Surface gradient `∇ₛφ` of a sampled scalar field.
    pub fn gradient(&self, phi: &Field<f64>) -> Result<Field<Vec3>> {
        self.check(phi)?;
        let phi_s = phi.d_ds(&self.grid, self.scheme);
        let phi_t = phi.d_dt(&self.grid, self.scheme);
        Ok(Field::from_index_fn(&self.grid, |i, j| {
            self.dual_s.at(i, j) * phi_s.at(i, j) + self.dual_t.at(i, j) * phi_t.at(i, j)
        }))
    }

    /// Surface gradient `∇ₛh = (∇h) P(ν)` of a sampled vector field.
    pub fn vector_gradient(&self, h: &Field<Vec3>) -> Result<Field<Mat3>> {
        self.check(h)?;
        let h_s = h.d_ds(&self.grid, self.scheme);
        let h_t = h.d_dt(&self.grid, self.scheme);
        Ok(Field::from_index_fn(&self.grid, |i, j| {
            h_s.at(i, j) * self.dual_s.at(i, j).transpose()
                + h_t.at(i, j) * self.dual_t.at(i, j).transpose()
        }))
    }

    /// Second surface gradient `∇ₛ(∇ₛφ)`.
    pub fn second_gradient(&self, phi: &Field<f64>) -> Result<Field<Mat3>> {
        self.vector_gradient(&self.gradient(phi)?)
    }

    pub fn divergence(&self, h: &Field<Vec3>) -> Result<Field<f64>> {
        Ok(self.vector_gradient(h)?.map(|g| g.trace()))
    }

    /// Surface Laplacian `Δₛφ = divₛ ∇ₛφ`.
    pub fn laplacian(&self, phi: &Field<f64>) -> Result<Field<f64>> {
        self.divergence(&self.gradient(phi)?)
    }

    /// Surface curl: axial vector of `∇ₛh − (∇ₛh)ᵀ`.
    pub fn curl(&self, h: &Field<Vec3>) -> Result<Field<Vec3>> {
        Ok(self.vector_gradient(h)?.map(axial_of_difference))
    }

    /// Curvature tensor `∇ₛν` and its spectral data at every sample.
    pub fn shape_operator(&self) -> Field<CurvatureData> {
        let grad = self
            .vector_gradient(&self.normals)
            .expect("normals share the patch grid");
        let frames = self.frames();
        let scale = self.diameter;
        grad.zip_map(&frames, |s, f| CurvatureData::from_tensor(*s, f, scale))
    }

    /// Principal directions with signs propagated across the grid so that
    /// `n1` varies continuously; `n2 = ν × n1`.
    pub fn principal_directions(&self, curvature: &Field<CurvatureData>) -> Result<(Field<Vec3>, Field<Vec3>)> {
        self.check(curvature)?;
        let (ns, nt) = self.grid.dims();
        let mut n1 = Vec::with_capacity(ns * nt);
        for j in 0..nt {
            for i in 0..ns {
                let cd = curvature.get(i, j);
                if cd.umbilic {
                    return Err(Error::Umbilic { i, j });
                }
                let reference: Option<Vec3> = if i > 0 {
                    Some(n1[j * ns + i - 1])
                } else if j > 0 {
                    Some(n1[(j - 1) * ns])
                } else {
                    None
                };
                let mut d = cd.n1;
                if reference.is_some_and(|r| d.dot(&r) < 0.0) {
                    d = -d;
                }
                n1.push(d);
            }
        }
        let n1 = Field::from_vec(&self.grid, n1)?;
        let n2 = self.normals.zip_map(&n1, |nu, d| nu.cross(d));
        Ok((n1, n2))
    }

    /// Connector field of the principal frame derived from `curvature`.
    pub fn connector(&self, curvature: &Field<CurvatureData>) -> Result<ConnectorField> {
        let (n1, n2) = self.principal_directions(curvature)?;
        self.connector_from_directions(n1, n2)
    }

    /// Connector field of an explicitly supplied tangent frame `(n1, n2)`.
    pub fn connector_from_directions(&self, n1: Field<Vec3>, n2: Field<Vec3>) -> Result<ConnectorField> {
        let g1 = self.vector_gradient(&n1)?;
        let g2 = self.vector_gradient(&n2)?;
        let c = g1.zip_map(&n2, |g, d| g.transpose() * d);
        let c_alt = g2.zip_map(&n1, |g, d| -(g.transpose() * d));
        Ok(ConnectorField { n1, n2, c, c_alt })
    }

    /// Line and area sides of the circulation theorem
    /// `∮ h·t ds = ∫ curlₛh·ν dA` over the region enclosed by `contour`.
    ///
    /// Both sides use the trapezoidal rule (per edge and per cell), so each
    /// carries an `O(h²)` quadrature error.
    pub fn circulation(&self, h: &Field<Vec3>, contour: &GridContour) -> Result<(f64, f64)> {
        self.check(h)?;
        let (ns, nt) = self.grid.dims();
        if contour.nodes().iter().any(|&(i, j)| i >= ns || j >= nt) {
            return Err(Error::InvalidInput("contour leaves the grid".into()));
        }
        let (ds, dt) = (self.grid.s.step(), self.grid.t.step());

        let mut line = 0.0;
        for w in contour.nodes().windows(2) {
            let ((ia, ja), (ib, jb)) = (w[0], w[1]);
            let (tangent, step, sign) = if ja == jb {
                (&self.r_s, ds, if ib > ia { 1.0 } else { -1.0 })
            } else {
                (&self.r_t, dt, if jb > ja { 1.0 } else { -1.0 })
            };
            let fa = h.at(ia, ja).dot(&tangent.at(ia, ja));
            let fb = h.at(ib, jb).dot(&tangent.at(ib, jb));
            line += sign * 0.5 * step * (fa + fb);
        }

        let curl = self.curl(h)?;
        let flux = Field::from_index_fn(&self.grid, |i, j| {
            curl.at(i, j).dot(&self.normals.at(i, j)) * self.area_density.at(i, j)
        });
        let (imin, imax) = contour.nodes().iter().fold((usize::MAX, 0), |(a, b), n| (a.min(n.0), b.max(n.0)));
        let (jmin, jmax) = contour.nodes().iter().fold((usize::MAX, 0), |(a, b), n| (a.min(n.1), b.max(n.1)));
        let mut area = 0.0;
        for jc in jmin..jmax {
            for ic in imin..imax {
                let wn = contour.winding(ic, jc);
                if wn != 0 {
                    let corners = flux.at(ic, jc) + flux.at(ic + 1, jc) + flux.at(ic, jc + 1) + flux.at(ic + 1, jc + 1);
                    area += wn as f64 * 0.25 * corners * ds * dt;
                }
            }
        }
        Ok((line, area))
    }

    /// `|line − area|` of the circulation theorem on `contour`.
    pub fn circulation_check(&self, h: &Field<Vec3>, contour: &GridContour) -> Result<f64> {
        let (line, area) = self.circulation(h, contour)?;
        Ok((line - area).abs())
    }

    /// Potential `ψ` with `∇ₛψ ≈ h`, by integration of `h·dr` along grid
    /// lines from `base` (where `ψ = 0`). The trapezoid rule carries the
    /// Euler–Maclaurin end correction `−Δ²/12 (f′(k) − f′(k0))`, making each
    /// leg fourth-order accurate.
    pub fn path_integrate(&self, h: &Field<Vec3>, base: (usize, usize), order: PathOrder) -> Result<Field<f64>> {
        self.check(h)?;
        let (ns, nt) = self.grid.dims();
        let (i0, j0) = base;
        if i0 >= ns || j0 >= nt {
            return Err(Error::InvalidInput("base node outside the grid".into()));
        }
        let (ds, dt) = (self.grid.s.step(), self.grid.t.step());
        let fs = |i: usize, j: usize| h.at(i, j).dot(&self.r_s.at(i, j));
        let ft = |i: usize, j: usize| h.at(i, j).dot(&self.r_t.at(i, j));

        let scheme = self.scheme;
        // corrected cumulative trapezoid along a line of n nodes from k0
        let sweep = |n: usize, k0: usize, start: f64, step: f64, f: &dyn Fn(usize) -> f64| {
            let mut out = vec![0.0; n];
            out[k0] = start;
            for k in k0 + 1..n {
                out[k] = out[k - 1] + 0.5 * step * (f(k - 1) + f(k));
            }
            for k in (0..k0).rev() {
                out[k] = out[k + 1] - 0.5 * step * (f(k + 1) + f(k));
            }
            let slope = |k: usize| diff1(f, n, k, step, scheme);
            let s0 = slope(k0);
            for (k, v) in out.iter_mut().enumerate() {
                *v -= step * step / 12.0 * (slope(k) - s0);
            }
            out
        };

        let mut psi = vec![0.0; ns * nt];
        match order {
            PathOrder::SFirst => {
                let row = sweep(ns, i0, 0.0, ds, &|k| fs(k, j0));
                for (i, &start) in row.iter().enumerate() {
                    let col = sweep(nt, j0, start, dt, &|k| ft(i, k));
                    for (j, v) in col.into_iter().enumerate() {
                        psi[j * ns + i] = v;
                    }
                }
            }
            PathOrder::TFirst => {
                let col = sweep(nt, j0, 0.0, dt, &|k| ft(i0, k));
                for (j, &start) in col.iter().enumerate() {
                    let row = sweep(ns, i0, start, ds, &|k| fs(k, j));
                    psi[j * ns..(j + 1) * ns].copy_from_slice(&row);
                }
            }
        }
        Field::from_vec(&self.grid, psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{interior_max, Axis};

    fn flat(n: usize) -> SurfacePatch {
        let g = Grid::new(Axis::new(-1.0, 1.0, n).unwrap(), Axis::new(-0.5, 1.5, n).unwrap());
        SurfacePatch::from_fn(g, Scheme::Central, |u, v| Vec3::new(u, v, 0.0)).unwrap()
    }

    /// Unit sphere band in (polar angle, azimuth), outward normal.
    fn sphere(n: usize, radius: f64) -> SurfacePatch {
        let g = Grid::new(Axis::new(0.6, 2.5, n).unwrap(), Axis::new(-1.0, 1.5, n).unwrap());
        SurfacePatch::from_fn(g, Scheme::Central, move |th, ph| {
            Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()) * radius
        })
        .unwrap()
    }

    #[test]
    fn gradient_of_constant_and_linear() {
        let p = flat(11);
        let g = *p.grid();
        let c = g.sample(|_, _| 3.5);
        let grad = p.gradient(&c).unwrap();
        assert!(grad.values().iter().all(|v| v.norm() < 1e-14));

        let lin = g.sample(|u, _| u);
        let grad = p.gradient(&lin).unwrap();
        assert!(grad.values().iter().all(|v| (v - Vec3::x()).norm() < 1e-12));
    }

    #[test]
    fn sphere_gradient_of_height() {
        let p = sphere(201, 1.0);
        let g = *p.grid();
        let z = p.positions().map(|r| r.z);
        let grad = p.gradient(&z).unwrap();
        let err = interior_max(&g, &grad, 1, |i, j, v| {
            let nu = p.normals().at(i, j);
            let expected = Vec3::z() - nu * nu.z;
            Some((v - expected).norm() + v.dot(&nu).abs())
        });
        assert!(err < 1e-3, "err {err}");
        // node at the equator on the azimuth 0 meridian
        let k = (0..g.s.n)
            .min_by(|a, b| (g.s.value(*a) - std::f64::consts::FRAC_PI_2).abs().total_cmp(&(g.s.value(*b) - std::f64::consts::FRAC_PI_2).abs()))
            .unwrap();
        let m = (0..g.t.n).min_by(|a, b| g.t.value(*a).abs().total_cmp(&g.t.value(*b).abs())).unwrap();
        let nu = p.normals().at(k, m);
        let expected = Vec3::z() - nu * nu.z;
        assert!((grad.at(k, m) - expected).norm() < 1e-3);
    }

    #[test]
    fn flat_shape_operator_vanishes() {
        let p = flat(9);
        for cd in p.shape_operator().values() {
            assert!(cd.shape_operator.norm() < 1e-14);
            assert!(cd.umbilic);
        }
    }

    #[test]
    fn sphere_curvature_sign_convention() {
        let radius = 2.0;
        let p = sphere(81, radius);
        let g = *p.grid();
        let curv = p.shape_operator();
        let err = interior_max(&g, &curv, 2, |_, _, cd| {
            Some((cd.kappa1 - 1.0 / radius).abs() + (cd.kappa2 - 1.0 / radius).abs())
        });
        assert!(err < 1e-10, "err {err}");
        assert!(g.interior(2).all(|(i, j)| curv.get(i, j).umbilic));
    }

    #[test]
    fn flat_laplacian_examples() {
        let p = flat(21);
        let g = *p.grid();
        let harmonic = g.sample(|u, v| u * u - v * v);
        let lap = p.laplacian(&harmonic).unwrap();
        assert!(interior_max(&g, &lap, 2, |_, _, x| Some(x.abs())) < 1e-10);
        let quad = g.sample(|u, _| u * u);
        let lap = p.laplacian(&quad).unwrap();
        assert!(interior_max(&g, &lap, 2, |_, _, x| Some((x - 2.0).abs())) < 1e-10);
        let c = g.sample(|_, _| -1.0);
        assert!(p.laplacian(&c).unwrap().values().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn flat_curl_of_gradient_vanishes() {
        let p = flat(21);
        let g = *p.grid();
        let phi = g.sample(|u, v| (u * v).sin() + u * u * u);
        let grad = p.gradient(&phi).unwrap();
        let curl = p.curl(&grad).unwrap();
        assert!(interior_max(&g, &curl, 2, |_, _, c| Some(c.norm())) < 1e-12);
    }

    #[test]
    fn sphere_curl_of_gradient_matches_identity() {
        let p = sphere(161, 1.0);
        let g = *p.grid();
        let phi = p.positions().map(|r| r.z);
        let grad = p.gradient(&phi).unwrap();
        let curl = p.curl(&grad).unwrap();
        let curv = p.shape_operator();
        let err = interior_max(&g, &curl, 2, |i, j, c| {
            let nu = p.normals().at(i, j);
            let expected = nu.cross(&(curv.get(i, j).shape_operator * grad.at(i, j)));
            Some((c - expected).norm())
        });
        assert!(err < 1e-4, "err {err}");
    }

    #[test]
    fn circulation_on_flat_patch() {
        let p = flat(31);
        let g = *p.grid();
        let contour = GridContour::rectangle(3, 25, 4, 20).unwrap();
        let constant = g.sample(|_, _| Vec3::new(0.3, -1.1, 0.2));
        assert!(p.circulation_check(&constant, &contour).unwrap() < 1e-10);
        let phi = g.sample(|u, v| u * v + v * v * 0.5);
        let grad = p.gradient(&phi).unwrap();
        assert!(p.circulation_check(&grad, &contour).unwrap() < 1e-10);

        // rotational field: both sides equal twice the enclosed area
        let swirl = g.sample(|u, v| Vec3::new(-v, u, 0.0));
        let (line, area) = p.circulation(&swirl, &contour).unwrap();
        let enclosed = 22.0 * g.s.step() * 16.0 * g.t.step();
        assert!((line - 2.0 * enclosed).abs() < 1e-10);
        assert!((area - 2.0 * enclosed).abs() < 1e-10);
    }

    #[test]
    fn contour_validation() {
        assert!(GridContour::from_nodes(vec![(0, 0), (1, 0), (1, 1), (0, 1)]).is_err());
        assert!(GridContour::from_nodes(vec![(0, 0), (2, 0), (2, 1), (0, 1), (0, 0)]).is_err());
        let ok = GridContour::from_nodes(vec![(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]).unwrap();
        assert_eq!(ok.winding(0, 0), 1);
        let cw = GridContour::from_nodes(vec![(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)]).unwrap();
        assert_eq!(cw.winding(0, 0), -1);
    }

    #[test]
    fn flat_connector_vanishes_for_constant_frame() {
        let p = flat(9);
        let g = *p.grid();
        let n1 = g.sample(|_, _| Vec3::new(0.6, 0.8, 0.0));
        let n2 = g.sample(|_, _| Vec3::new(-0.8, 0.6, 0.0));
        let c = p.connector_from_directions(n1, n2).unwrap();
        assert!(c.c.values().iter().all(|v| v.norm() < 1e-14));
        assert!(matches!(p.connector(&p.shape_operator()), Err(Error::Umbilic { .. })));
    }

    #[test]
    fn path_integration_recovers_potential() {
        let p = sphere(121, 1.0);
        let g = *p.grid();
        let phi = p.positions().map(|r| r.x * r.y + r.z);
        let grad = p.gradient(&phi).unwrap();
        let base = (60, 60);
        let psi_a = p.path_integrate(&grad, base, PathOrder::SFirst).unwrap();
        let psi_b = p.path_integrate(&grad, base, PathOrder::TFirst).unwrap();
        let offset = phi.at(base.0, base.1);
        let err = interior_max(&g, &psi_a, 0, |i, j, v| Some((v + offset - phi.at(i, j)).abs()));
        assert!(err < 1e-3, "err {err}");
        let spread = interior_max(&g, &psi_a, 0, |i, j, v| Some((v - psi_b.at(i, j)).abs()));
        assert!(spread < 1e-3, "spread {spread}");
    }

    #[test]
    fn singular_parameterization_is_rejected() {
        let g = Grid::new(Axis::new(0.0, 1.0, 5).unwrap(), Axis::new(0.0, 1.0, 5).unwrap());
        let err = SurfacePatch::from_fn(g, Scheme::Central, |s, t| Vec3::new(s + t, s + t, 0.0)).unwrap_err();
        assert!(matches!(err, Error::SingularPoint { .. }));
    }
}
