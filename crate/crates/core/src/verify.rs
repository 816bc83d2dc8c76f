//! Verification suite: every closed-form identity of the library checked
//! numerically, one [`CheckRecord`] per check.
//!
//! Finite-difference checks run on the rectangle `u ∈ [0.5, 1]`,
//! `v ∈ [−¼, ¼]` (isothermal Cartesian grid, away from `w = 0`); contents
//! of the map Ω → S are sampled on the annulus `0.5 ≤ ρ ≤ 1.5`. Order-2
//! convergence is judged by the error ratio between consecutive grids;
//! absolute finite-difference tolerances are stated at 256² and scale with
//! `h²` on coarser grids (see [`fd_tolerance`]). Reports contain no timings so that repeated runs are bit-identical.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bendneutral::{
    alpha_from_phi, alpha_from_phi_unchecked, bending_drilling_field, chain_rule_residual, compatibility_ratio,
    compatibility_report, deformation_between, image_mean_curvature_check, integrability_residual_general,
    pure_bending_closed_form, pure_bending_measure, pure_bending_measure_fd,
};
use crate::families::{family_frames, family_member, FamilyKind, FamilySpec};
use crate::grid::{interior_max, Field, Scheme};
use crate::mesh::{mesh_surface, MeshArtifact};
use crate::rotations::{
    axis_distance_profile, matrix_from_rodrigues, rodrigues_from_matrix, rotation_from_axis_angle,
    split_about_axis, RodriguesVector,
};
use crate::surfcalc::{Frame, GridContour};
use crate::weierstrass::{
    curvature_closed_form, metric_vectors, normal, Domain, HolomorphicDatum, Method, WPoint, WeierstrassSurface,
};
use crate::{Error, Result, Vec3};

/// Catalog surfaces exercised by the surface checks.
pub const CATALOG: [&str; 5] = ["enneper", "bour:m=3", "catenoid", "helicoid", "scherk2:theta=pi/4"];

/// Check identifiers in report order.
pub const CHECK_IDS: [&str; 12] = [
    "rotation-split",
    "variational-axis",
    "weierstrass-identities",
    "minimality",
    "gaussian-curvature",
    "universality",
    "bending-neutral",
    "integrability",
    "image-minimality",
    "bonnet-isometry",
    "circulation",
    "determinism-io",
];

/// Accepted error ratio between consecutive grids for order-2 convergence.
pub const ORDER2_RATIO: (f64, f64) = (3.4, 4.6);

/// Grid at which finite-difference tolerances are stated.
pub const REFERENCE_GRID: usize = 256;

/// Finite-difference tolerance `base` (stated at 256²) on `size`: scaled
/// by `(h/h₂₅₆)²` on coarser grids, unchanged on finer ones.
pub fn fd_tolerance(base: f64, size: GridSize) -> f64 {
    let n = size.ns.min(size.nt) as f64;
    base * ((REFERENCE_GRID as f64 - 1.0) / (n - 1.0)).powi(2).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSize {
    pub ns: usize,
    pub nt: usize,
}

impl GridSize {
    pub fn square(n: usize) -> Self {
        Self { ns: n, nt: n }
    }

    /// Parses `NxM`.
    pub fn parse(text: &str) -> Result<Self> {
        let (a, b) = text
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::InvalidInput(format!("grid must read NxM, got {text:?}")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 5)
                .ok_or_else(|| Error::InvalidInput(format!("bad grid size {text:?} (need at least 5 per side)")))
        };
        Ok(Self { ns: parse(a)?, nt: parse(b)? })
    }

    pub fn label(&self) -> String {
        format!("{}x{}", self.ns, self.nt)
    }

    /// The same grid with spacing halved.
    pub fn refined(&self) -> Self {
        Self { ns: 2 * self.ns - 1, nt: 2 * self.nt - 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Grids in increasing resolution; convergence is measured between
    /// consecutive entries and absolute tolerances apply to the last one.
    pub grids: Vec<GridSize>,
    /// Restrict the run to these check ids (all when `None`).
    #[serde(default)]
    pub checks: Option<Vec<String>>,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { grids: vec![GridSize::square(128), GridSize::square(256)], checks: None, seed: 0x5eed_2024 }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grids.is_empty() {
            return Err(Error::InvalidInput("at least one grid is required".into()));
        }
        if let Some(ids) = &self.checks {
            for id in ids {
                if !CHECK_IDS.contains(&id.as_str()) {
                    return Err(Error::InvalidInput(format!("unknown check {id:?}")));
                }
            }
        }
        Ok(())
    }

    fn finest(&self) -> GridSize {
        *self.grids.last().expect("validated")
    }

    fn wants(&self, id: &str) -> bool {
        self.checks.as_ref().is_none_or(|ids| ids.iter().any(|x| x == id))
    }
}

/// One bounded quantity. `pass` iff `lower < value < upper` for the bounds
/// present; NaN never passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detail {
    pub label: String,
    pub surface: String,
    pub grid: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Detail {
    fn new(label: &str, surface: &str, grid: &str, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let pass = !value.is_nan() && lower.is_none_or(|l| value > l) && upper.is_none_or(|u| value < u);
        Self { label: label.into(), surface: surface.into(), grid: grid.into(), value, lower, upper, pass }
    }

    pub fn below(label: &str, surface: &str, grid: &str, value: f64, tolerance: f64) -> Self {
        Self::new(label, surface, grid, value, None, Some(tolerance))
    }

    pub fn above(label: &str, surface: &str, grid: &str, value: f64, floor: f64) -> Self {
        Self::new(label, surface, grid, value, Some(floor), None)
    }

    pub fn within(label: &str, surface: &str, grid: &str, value: f64, range: (f64, f64)) -> Self {
        Self::new(label, surface, grid, value, Some(range.0), Some(range.1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub surfaces: Vec<String>,
    pub grids: Vec<String>,
    /// Worst residual relative to its tolerance among upper-bounded details.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: Vec<Detail>,
}

impl CheckRecord {
    pub fn from_details(check_id: &str, details: Vec<Detail>) -> Self {
        let surfaces: BTreeSet<String> = details.iter().filter(|d| !d.surface.is_empty()).map(|d| d.surface.clone()).collect();
        let grids: BTreeSet<String> = details.iter().filter(|d| !d.grid.is_empty()).map(|d| d.grid.clone()).collect();
        let worst = details
            .iter()
            .filter(|d| d.lower.is_none())
            .filter_map(|d| d.upper.map(|u| (d.value, u)))
            .max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)));
        let (max_residual, tolerance) = worst.unwrap_or((0.0, 0.0));
        Self {
            check_id: check_id.into(),
            surfaces: surfaces.into_iter().collect(),
            grids: grids.into_iter().collect(),
            max_residual,
            tolerance,
            pass: !details.is_empty() && details.iter().all(|d| d.pass),
            details,
        }
    }

    fn failed(check_id: &str, error: &Error) -> Self {
        let mut r = Self::from_details(check_id, vec![]);
        r.details.push(Detail { label: format!("error: {error}"), surface: String::new(), grid: String::new(), value: f64::NAN, lower: None, upper: None, pass: false });
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check_id == id)
    }
}

/// Runs the selected checks in report order.
pub fn run(config: &VerifyConfig) -> Result<VerificationReport> {
    config.validate()?;
    let checks: Vec<CheckRecord> = CHECK_IDS
        .iter()
        .filter(|id| config.wants(id))
        .map(|id| run_check(id, config).unwrap_or_else(|e| CheckRecord::failed(id, &e)))
        .collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed, all_passed: passed == checks.len() };
    Ok(VerificationReport { config: config.clone(), checks, summary })
}

pub fn run_check(id: &str, config: &VerifyConfig) -> Result<CheckRecord> {
    let details = match id {
        "rotation-split" => rotation_split(config.seed, 1000, 10)?,
        "variational-axis" => variational_axis(config.seed, 100)?,
        "weierstrass-identities" => weierstrass_identities(config)?,
        "minimality" => minimality(config)?,
        "gaussian-curvature" => gaussian_curvature(config)?,
        "universality" => universality(config)?,
        "bending-neutral" => bending_neutral(config)?,
        "integrability" => integrability(config)?,
        "image-minimality" => image_minimality(config.seed, 1000)?,
        "bonnet-isometry" => bonnet_isometry(config, 30)?,
        "circulation" => circulation(config)?,
        "determinism-io" => determinism_io()?,
        other => return Err(Error::InvalidInput(format!("unknown check {other:?}"))),
    };
    Ok(CheckRecord::from_details(id, details))
}

/// Rectangle used by the finite-difference checks.
pub fn fd_domain() -> Domain {
    Domain::Rectangle { u_min: 0.5, u_max: 1.0, v_min: -0.25, v_max: 0.25 }
}

/// Annulus used for the contents of Ω → S.
pub fn content_domain() -> Domain {
    Domain::Annulus { rho_min: 0.5, rho_max: 1.5 }
}

fn catalog_surface(spec: &str, domain: &Domain, size: GridSize) -> Result<WeierstrassSurface> {
    let datum = HolomorphicDatum::parse(spec)?;
    WeierstrassSurface::integrate(&datum, domain, &domain.grid(size.ns, size.nt)?)
}

/// Order-2 ratios between consecutive grids. Errors already below `floor`
/// on both grids are roundoff (the scheme is exact for the data) and are
/// bounded instead of compared.
fn ratio_details(label: &str, surface: &str, grids: &[GridSize], errors: &[f64], floor: f64) -> Vec<Detail> {
    grids
        .windows(2)
        .zip(errors.windows(2))
        .map(|(g, e)| {
            let grid = format!("{}->{}", g[0].label(), g[1].label());
            if e[0] < floor && e[1] < floor {
                Detail::below(&format!("{label}: error at roundoff floor"), surface, &grid, e[0].max(e[1]), floor)
            } else {
                Detail::within(label, surface, &grid, e[0] / e[1], ORDER2_RATIO)
            }
        })
        .collect()
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn rotation_split(seed: u64, rotations: usize, axes: usize) -> Result<Vec<Detail>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut recompose, mut parallel, mut orthogonal, mut magnitude) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut skipped = 0usize;
    for _ in 0..rotations {
        let r = rotation_from_axis_angle(&unit_vector(&mut rng), rng.gen_range(-PI..PI))?;
        let Ok(a) = rodrigues_from_matrix(&r) else {
            skipped += 1;
            continue;
        };
        let scale = a.vector().norm().max(1.0);
        for _ in 0..axes {
            let e = unit_vector(&mut rng);
            let split = split_about_axis(&a, &e)?;
            let product = matrix_from_rodrigues(&split.a2).then_after(&matrix_from_rodrigues(&split.a1));
            recompose = recompose.max((product.matrix() - r.matrix()).norm());
            parallel = parallel.max(split.a1.vector().cross(&e).norm() / scale);
            orthogonal = orthogonal.max(split.a2.vector().dot(&e).abs() / scale);
            let (aa, a1) = (a.vector().norm_squared(), split.a1.vector().norm_squared());
            let expected = (aa - a1) / (1.0 + a1);
            magnitude = magnitude.max((split.a2.vector().norm_squared() - expected).abs() / expected.max(1.0));
        }
    }
    let n = format!("{}x{}", rotations, axes);
    Ok(vec![
        Detail::below("recomposition frobenius", &n, "", recompose, 1e-10),
        Detail::below("|a1 x e| / max(1, |a|)", &n, "", parallel, 1e-12),
        Detail::below("|a2 . e| / max(1, |a|)", &n, "", orthogonal, 1e-12),
        Detail::below("a2^2 magnitude identity (relative)", &n, "", magnitude, 1e-10),
        Detail::below("pi-turn samples skipped", &n, "", skipped as f64, 1.5),
    ])
}

fn variational_axis(seed: u64, samples: usize) -> Result<Vec<Detail>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11);
    let points = 20_000usize;
    let (mut argmin_err, mut argmax_err, mut min_violation) = (0.0f64, 0.0f64, 0.0f64);
    let mut worst_resolution = 0.0f64;
    let mut k = 0;
    while k < samples {
        let e = unit_vector(&mut rng);
        let a = unit_vector(&mut rng) * rng.gen_range(0.05..3.0);
        let s = a.dot(&e);
        // both extremes must be well inside a grid of bounded extent
        if s.abs() < 0.1 {
            continue;
        }
        k += 1;
        let a = RodriguesVector::new(a)?;
        let (lo, hi) = (s.min(-1.0 / s) - 1.0, s.max(-1.0 / s) + 1.0);
        let step = (hi - lo) / (points - 1) as f64;
        let grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
        let d = axis_distance_profile(&a, &e, &grid);
        let argmin = (0..points).min_by(|x, y| d[*x].total_cmp(&d[*y])).expect("non-empty");
        let argmax = (0..points).max_by(|x, y| d[*x].total_cmp(&d[*y])).expect("non-empty");
        argmin_err = argmin_err.max((grid[argmin] - s).abs() / step);
        argmax_err = argmax_err.max((grid[argmax] + 1.0 / s).abs() / step);
        let at_s = axis_distance_profile(&a, &e, &[s])[0];
        min_violation = min_violation.max(d.iter().map(|x| at_s - x).fold(0.0, f64::max));
        worst_resolution = worst_resolution.max(step);
    }
    let n = format!("{samples} samples, {points} points");
    Ok(vec![
        Detail::below("argmin distance to a.e (grid steps)", &n, "", argmin_err, 1.0 + 1e-9),
        Detail::below("argmax distance to -1/(a.e) (grid steps)", &n, "", argmax_err, 1.0 + 1e-9),
        Detail::below("max over grid of d(a.e) - d(u)", &n, "", min_violation, 1e-12),
        Detail::below("grid step", &n, "", worst_resolution, 1e-2),
    ])
}

fn weierstrass_identities(config: &VerifyConfig) -> Result<Vec<Detail>> {
    let domain = fd_domain();
    let finest = config.finest();
    let per_surface: Vec<Result<Vec<Detail>>> = CATALOG
        .par_iter()
        .map(|spec| {
            let mut details = Vec::new();
            let mut laplace = Vec::new();
            for size in &config.grids {
                let s = catalog_surface(spec, &domain, *size)?;
                let g = s.grid();
                if *size == finest {
                    let (r_u, r_v) = s.metric_vectors();
                    let mut iso = 0.0f64;
                    let mut ortho = 0.0f64;
                    for (a, b) in r_u.values().iter().zip(r_v.values()) {
                        iso = iso.max((a.norm() - b.norm()).abs() / a.norm());
                        ortho = ortho.max(a.dot(b).abs() / (a.norm() * b.norm()));
                    }
                    details.push(Detail::below("(|r_u| - |r_v|)/|r_u|", spec, &size.label(), iso, 1e-8));
                    details.push(Detail::below("r_u.r_v/(|r_u||r_v|)", spec, &size.label(), ortho, 1e-8));
                    let exact = s.points().map(|p| {
                        let (big_phi, _) = s.datum().eval(p);
                        0.5 * big_phi.exp() * (p.rho * p.rho + 1.0)
                    });
                    let metric = interior_max(g, &r_u, 0, |i, j, r| Some((r.norm() - exact.at(i, j)).abs() / exact.at(i, j)));
                    details.push(Detail::below("|r_u| vs e^Phi(rho^2+1)/2", spec, &size.label(), metric, 1e-12));
                }
                let lap = s.positions().d2_ds2(g, Scheme::Central).zip_map(&s.positions().d2_dt2(g, Scheme::Central), |a, b| a + b);
                laplace.push(interior_max(g, &lap, 1, |_, _, x| Some(x.norm())));
            }
            details.push(Detail::below("max |r_uu + r_vv| (finest)", spec, &finest.label(), *laplace.last().expect("grids"), fd_tolerance(1e-3, finest)));
            details.extend(ratio_details("r_uu + r_vv error ratio", spec, &config.grids, &laplace, 1e-8));
            Ok(details)
        })
        .collect();
    let mut details = Vec::new();
    for d in per_surface {
        details.extend(d?);
    }

    // closed-form antiderivative against quadrature along two paths
    let size = config.grids[0];
    let enneper = HolomorphicDatum::enneper();
    let annulus = content_domain();
    let grid = annulus.grid(size.ns.min(128), size.nt.min(128))?;
    let exact = WeierstrassSurface::integrate(&enneper, &annulus, &grid)?;
    let quad = WeierstrassSurface::integrate_with(&enneper, &annulus, &grid, Method::Quadrature)?;
    let gap = exact.positions().values().iter().zip(quad.positions().values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let label = format!("{}x{}", grid.s.n, grid.t.n);
    details.push(Detail::below("closed form vs quadrature", "enneper", &label, gap, 1e-10));
    if let crate::weierstrass::Integration::Quadrature { path_residual } = quad.integration() {
        details.push(Detail::below("quadrature path independence", "enneper", &label, path_residual, 1e-9));
    }
    Ok(details)
}

fn minimality(config: &VerifyConfig) -> Result<Vec<Detail>> {
    let domain = fd_domain();
    let size = config.finest();
    let per_surface: Vec<Result<Vec<Detail>>> = CATALOG
        .par_iter()
        .map(|spec| {
            let s = catalog_surface(spec, &domain, size)?;
            let exact = s.curvature();
            let patch = s.fd_patch(Scheme::Richardson)?;
            let fd = patch.shape_operator();
            // ∇ₛν differentiates FD normals: two stencil layers
            let h = interior_max(s.grid(), &fd, 2 * patch.margin(), |i, j, c| Some(c.mean.abs() / exact.at(i, j).kappa1.abs()));
            let trace = exact.values().iter().map(|c| c.shape_operator.trace().abs() / c.kappa1).fold(0.0, f64::max);
            Ok(vec![
                Detail::below("FD |H|/|kappa1|", spec, &size.label(), h, fd_tolerance(1e-5, size)),
                Detail::below("closed-form |tr grad_s nu|/kappa1", spec, &size.label(), trace, 1e-12),
            ])
        })
        .collect();
    per_surface.into_iter().try_fold(Vec::new(), |mut acc, d| {
        acc.extend(d?);
        Ok(acc)
    })
}

fn gaussian_curvature(config: &VerifyConfig) -> Result<Vec<Detail>> {
    let domain = fd_domain();
    let finest = config.finest();
    let per_surface: Vec<Result<Vec<Detail>>> = CATALOG
        .par_iter()
        .map(|spec| {
            let mut errors = Vec::new();
            for size in &config.grids {
                let s = catalog_surface(spec, &domain, *size)?;
                let exact = s.curvature();
                let fd = s.fd_patch(Scheme::Central)?.shape_operator();
                errors.push(interior_max(s.grid(), &fd, 2, |i, j, c| {
                    let k = exact.at(i, j).gauss;
                    Some((c.gauss - k).abs() / k.abs())
                }));
            }
            let mut d = vec![Detail::below("FD K relative error", spec, &finest.label(), *errors.last().expect("grids"), fd_tolerance(1e-4, finest))];
            d.extend(ratio_details("FD K error ratio", spec, &config.grids, &errors, 1e-10));
            Ok(d)
        })
        .collect();
    let mut details = Vec::new();
    for d in per_surface {
        details.extend(d?);
    }

    let enneper = HolomorphicDatum::enneper();
    let k = curvature_closed_form(&enneper, &WPoint::cartesian(0.5, 0.0)).gauss;
    details.push(Detail::below("|K(enneper, w=0.5) + 6.5536|", "enneper", "", (k + 6.5536).abs(), 1e-6));
    // FD oracle: node (64, 64) of a 129x129 grid centred on w = 0.5
    let local = Domain::Rectangle { u_min: 0.4, u_max: 0.6, v_min: -0.1, v_max: 0.1 };
    let s = WeierstrassSurface::integrate(&enneper, &local, &local.grid(129, 129)?)?;
    let fd = s.fd_patch(Scheme::Central)?.shape_operator().at(64, 64).gauss;
    details.push(Detail::below("|K_FD(enneper, w=0.5) + 6.5536| / 6.5536", "enneper", "129x129", (fd + 6.5536).abs() / 6.5536, 1e-4));
    Ok(details)
}

fn universality(config: &VerifyConfig) -> Result<Vec<Detail>> {
    let size = config.finest();
    let annulus = content_domain();
    let surfaces: Vec<WeierstrassSurface> =
        CATALOG.iter().map(|spec| catalog_surface(spec, &annulus, size)).collect::<Result<_>>()?;
    let mut details = Vec::new();

    let contents: Vec<_> = surfaces.par_iter().map(bending_drilling_field).collect();
    for (s, c) in surfaces.iter().zip(&contents) {
        let label = &s.datum().label;
        let mut b_err = 0.0f64;
        for (sample, p) in c.samples.values().iter().zip(s.points().values()) {
            if let Some(b) = sample.b_split {
                let e_phi = Vec3::new(-p.phi.sin(), p.phi.cos(), 0.0);
                b_err = b_err.max((b - e_phi / p.rho).norm());
            }
        }
        details.push(Detail::below("split b vs (1/rho) e_phi", label, &size.label(), b_err, 1e-9));
        details.push(Detail::below("closed form vs split (b, d)", label, &size.label(), c.split_discrepancy(), 1e-9));
        // drilling poles only mask d; b must be resolved everywhere off ρ = 0
        let unresolved = c.samples.values().iter().filter(|x| x.b_split.is_none()).count();
        details.push(Detail::below("samples without split b", label, &size.label(), unresolved as f64, 0.5));
    }
    let mut pair_b = 0.0f64;
    for x in 0..contents.len() {
        for y in x + 1..contents.len() {
            for (a, b) in contents[x].samples.values().iter().zip(contents[y].samples.values()) {
                if let (Some(a), Some(b)) = (a.b_split, b.b_split) {
                    pair_b = pair_b.max((a - b).norm());
                }
            }
        }
    }
    details.push(Detail::below("pairwise split b", "catalog", &size.label(), pair_b, 1e-9));

    let mut a_exact = 0.0f64;
    for s in &surfaces {
        let a = pure_bending_measure(s);
        let points = s.points();
        for (m, p) in a.values().iter().zip(points.values()) {
            a_exact = a_exact.max((m - pure_bending_closed_form(p)).norm());
        }
    }
    details.push(Detail::below("A from partials vs 4/(rho^2+1)^2 P(e3)", "catalog", &size.label(), a_exact, 1e-9));

    // finite-difference path on the Cartesian patch
    let rect = fd_domain();
    let fd: Vec<(Field<crate::Mat3>, WeierstrassSurface)> = CATALOG
        .par_iter()
        .map(|spec| {
            let s = catalog_surface(spec, &rect, size)?;
            Ok((pure_bending_measure_fd(&s, Scheme::Richardson)?, s))
        })
        .collect::<Result<_>>()?;
    let g = *fd[0].1.grid();
    let mut pair_a = 0.0f64;
    let mut a_fd = 0.0f64;
    for x in 0..fd.len() {
        let exact = pure_bending_measure(&fd[x].1);
        a_fd = a_fd.max(interior_max(&g, &fd[x].0, 4, |i, j, m| Some((m - exact.at(i, j)).norm())));
        for y in x + 1..fd.len() {
            pair_a = pair_a.max(interior_max(&g, &fd[x].0, 4, |i, j, m| Some((m - fd[y].0.at(i, j)).norm())));
        }
    }
    details.push(Detail::below("FD A vs closed form", "catalog", &size.label(), a_fd, fd_tolerance(1e-5, size)));
    details.push(Detail::below("pairwise FD A", "catalog", &size.label(), pair_a, fd_tolerance(1e-5, size)));
    Ok(details)
}

fn bending_neutral(config: &VerifyConfig) -> Result<Vec<Detail>> {
    let domain = fd_domain();
    let finest = config.finest();
    let pairs: Vec<(&str, &str)> =
        CATALOG.iter().flat_map(|&a| CATALOG.iter().filter(move |&&b| b != a).map(move |&b| (a, b))).collect();
    let per_pair: Vec<Result<Vec<Detail>>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let label = format!("{a} -> {b}");
            let mut details = Vec::new();
            let mut chain = Vec::new();
            for size in &config.grids {
                let (s, t) = (catalog_surface(a, &domain, *size)?, catalog_surface(b, &domain, *size)?);
                let field = deformation_between(&s, &t)?;
                chain.push(chain_rule_residual(&s, &t, &field, Scheme::Central)?);
                if *size != finest {
                    continue;
                }
                // μ and α against the metric vectors of both surfaces
                let (mut mu_err, mut alpha_err, mut grad_err, mut normal_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
                for (d, p) in field.samples.values().iter().zip(s.points().values()) {
                    let (r_u, _) = metric_vectors(s.datum(), p);
                    let (q_u, _) = metric_vectors(t.datum(), p);
                    let nu = normal(p);
                    mu_err = mu_err.max((d.mu - q_u.norm() / r_u.norm()).abs() / d.mu);
                    let turn = r_u.cross(&q_u).dot(&nu).atan2(r_u.dot(&q_u));
                    let wrapped = (d.alpha - turn).rem_euclid(2.0 * PI);
                    alpha_err = alpha_err.max(wrapped.min(2.0 * PI - wrapped));
                    grad_err = grad_err.max((d.grad * r_u - q_u).norm() / q_u.norm());
                    normal_err = normal_err.max((d.nu - nu).norm());
                }
                details.push(Detail::below("mu vs |r*_u|/|r_u|", &label, &size.label(), mu_err, 1e-12));
                details.push(Detail::below("alpha vs turn of r_u about nu", &label, &size.label(), alpha_err, 1e-12));
                details.push(Detail::below("grad r_u vs r*_u (relative)", &label, &size.label(), grad_err, 1e-12));
                details.push(Detail::below("nu* - nu (closed form)", &label, &size.label(), normal_err, 1e-15));
                // Φ* − Φ and χ* − χ are harmonic on S
                let patch = s.analytic_patch(Scheme::Richardson)?;
                for (name, f) in [("Laplacian of Phi* - Phi", field.mu().map(|m| m.ln())), ("Laplacian of chi* - chi", field.alpha())] {
                    let lap = patch.laplacian(&f)?;
                    let value = interior_max(s.grid(), &lap, patch.margin(), |_, _, x| Some(x.abs()));
                    details.push(Detail::below(name, &label, &size.label(), value, fd_tolerance(1e-5, *size)));
                }
                let (ps, pt) = (s.fd_patch(Scheme::Central)?, t.fd_patch(Scheme::Central)?);
                let fd_normals = interior_max(s.grid(), ps.normals(), 1, |i, j, n| Some((n - pt.normals().at(i, j)).norm()));
                details.push(Detail::below("FD normals of S and S*", &label, &size.label(), fd_normals, fd_tolerance(1e-4, *size)));
            }
            details.extend(ratio_details("chain-rule residual ratio", &label, &config.grids, &chain, 1e-10));
            Ok(details)
        })
        .collect();
    per_pair.into_iter().try_fold(Vec::new(), |mut acc, d| {
        acc.extend(d?);
        Ok(acc)
    })
}

fn integrability(config: &VerifyConfig) -> Result<Vec<Detail>> {
    let domain = fd_domain();
    let finest = config.finest();
    let mut details = Vec::new();
    let mut control = Vec::new();
    for size in &config.grids {
        let label = size.label();
        let scheme = Scheme::Richardson;

        // (i) Bonnet constants on the catenoid
        let s = catalog_surface("catenoid", &domain, *size)?;
        let patch = s.analytic_patch(scheme)?;
        let curvature = s.curvature();
        let connector = patch.connector_from_directions(curvature.map(|c| c.n1), curvature.map(|c| c.n2))?;
        let lambda = curvature.map(|c| 1.3 / c.kappa1);
        let alpha = curvature.map(|_| 0.8);
        let res = integrability_residual_general(&patch, &curvature, &connector, &lambda, &alpha)?;
        if *size == finest {
            details.push(Detail::below("Bonnet constants residual", "catenoid", &label, res.interior_max(s.grid(), patch.margin()), 1e-5));
            details.push(Detail::below("excluded samples", "catenoid", &label, res.excluded as f64, 0.5));
        }

        // (ii) μ = ρᵗ on Enneper with α reconstructed from ∇ₛα = ν × ∇ₛφ
        let t = 0.5;
        let s = catalog_surface("enneper", &domain, *size)?;
        let patch = s.analytic_patch(scheme)?;
        let curvature = s.curvature();
        let connector = patch.connector_from_directions(curvature.map(|c| c.n1), curvature.map(|c| c.n2))?;
        let phi = s.points().map(|p| t * p.rho.ln());
        let base = (size.ns / 2, size.nt / 2);
        let alpha = alpha_from_phi(&patch, &phi, t * s.point(base.0, base.1).phi, base)?;
        let lambda = phi.zip_map(&curvature, |f, c| f.exp() / c.kappa1);
        let res = integrability_residual_general(&patch, &curvature, &connector, &lambda, &alpha)?;
        if *size == finest {
            details.push(Detail::below("Bour phi = t ln rho residual", "enneper", &label, res.interior_max(s.grid(), patch.margin()), fd_tolerance(1e-5, *size)));
            let exact = interior_max(s.grid(), &alpha, 0, |i, j, a| Some((a - t * s.point(i, j).phi).abs()));
            details.push(Detail::below("reconstructed alpha vs t phi", "enneper", &label, exact, fd_tolerance(1e-5, *size)));
        }

        // negative control: φ = u² is not harmonic
        let phi = s.points().map(|p| p.u * p.u);
        let alpha = alpha_from_phi_unchecked(&patch, &phi, 0.0, base)?;
        let lambda = phi.zip_map(&curvature, |f, c| f.exp() / c.kappa1);
        let res = integrability_residual_general(&patch, &curvature, &connector, &lambda, &alpha)?;
        let value = res.interior_max(s.grid(), patch.margin());
        details.push(Detail::above("negative control phi = u^2", "enneper", &label, value, 1e-2));
        control.push(value);
    }
    for (g, c) in config.grids.windows(2).zip(control.windows(2)) {
        let grid = format!("{}->{}", g[0].label(), g[1].label());
        details.push(Detail::above("negative control refinement ratio (non-vanishing)", "enneper", &grid, c[1] / c[0], 0.5));
    }
    Ok(details)
}

fn image_minimality(seed: u64, samples: usize) -> Result<Vec<Detail>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a6e);
    let (mut trace, mut ratio_err, mut tensor) = (0.0f64, 0.0f64, 0.0f64);
    let mut skipped = 0usize;
    for _ in 0..samples {
        let k1 = rng.gen_range(0.01..10.0);
        let k2 = -rng.gen_range(0.01..10.0);
        let lambda = rng.gen_range(0.01..10.0);
        let alpha = rng.gen_range(-PI..PI);
        let nu = unit_vector(&mut rng);
        let tangent = unit_vector(&mut rng);
        let tangent = tangent - nu * nu.dot(&tangent);
        if tangent.norm() < 1e-3 {
            skipped += 1;
            continue;
        }
        let frame = Frame::from_tangent(&tangent, &nu);
        trace = trace.max(image_mean_curvature_check(k1, k2, lambda, alpha, &frame));

        match compatibility_ratio(k1, k2, alpha, 0.0) {
            Ok(r) => ratio_err = ratio_err.max((r + k2 / k1).abs() / (k2 / k1).abs()),
            Err(Error::UndefinedRatio) => skipped += 1,
            Err(e) => return Err(e),
        }
        let beta = rng.gen_range(-PI / 2.0..PI / 2.0);
        if let Ok(r) = compatibility_ratio(k1, k2, alpha, beta) {
            if r > 0.0 {
                let report = compatibility_report(k1, k2, alpha, beta, 1.0, r)?;
                tensor = tensor.max(report.symmetry_residual / (k1.abs() + k2.abs()));
            }
        }
    }
    let n = format!("{samples} samples");
    Ok(vec![
        Detail::below("|tr grad_s nu*|", &n, "", trace, 1e-12),
        Detail::below("beta = 0 ratio vs -kappa2/kappa1 (relative)", &n, "", ratio_err, 1e-12),
        Detail::below("compatible stretch: skw of image curvature (relative)", &n, "", tensor, 1e-12),
        Detail::below("degenerate samples skipped", &n, "", skipped as f64, 10.0),
    ])
}

fn bonnet_isometry(config: &VerifyConfig, frames: usize) -> Result<Vec<Detail>> {
    let size = config.finest();
    let domain = content_domain();
    let grid = domain.grid(size.ns, size.nt)?;
    let mut spec = FamilySpec::new(FamilyKind::CatenoidHelicoid);
    spec.frames = frames;
    let family = family_frames(&spec, &domain, &grid)?;
    let base = &family[0].surface;
    let (base_u, _) = base.metric_vectors();
    let (mut metric, mut mu, mut fd_metric) = (0.0f64, 0.0f64, 0.0f64);
    let base_fd = base.positions().d_ds(&grid, Scheme::Central);
    for frame in &family {
        let (r_u, _) = frame.surface.metric_vectors();
        for (a, b) in r_u.values().iter().zip(base_u.values()) {
            metric = metric.max((a.norm() - b.norm()).abs() / b.norm());
        }
        let field = deformation_between(base, &frame.surface)?;
        mu = mu.max(field.samples.values().iter().map(|d| (d.mu - 1.0).abs()).fold(0.0, f64::max));
        let fd = frame.surface.positions().d_ds(&grid, Scheme::Central);
        fd_metric = fd_metric.max(interior_max(&grid, &fd, 1, |i, j, x| {
            let y = base_fd.at(i, j);
            Some((x.norm() - y.norm()).abs() / y.norm())
        }));
    }
    let first = family_member(&spec, 0.0)?;
    let label = format!("{} ({} frames)", first.label, family.len());
    Ok(vec![
        Detail::below("|r_u| spread across theta (relative)", &label, &size.label(), metric, 1e-10),
        Detail::below("|mu - 1|", &label, &size.label(), mu, 1e-12),
        Detail::below("FD |r_rho| spread across theta (relative)", &label, &size.label(), fd_metric, fd_tolerance(1e-3, size)),
        Detail::within("frame count", &label, "", family.len() as f64, (frames as f64 - 0.5, frames as f64 + 0.5)),
    ])
}

fn circulation(config: &VerifyConfig) -> Result<Vec<Detail>> {
    let domain = fd_domain();
    let mut residuals = Vec::new();
    let mut details = Vec::new();
    for size in &config.grids {
        let s = catalog_surface("enneper", &domain, *size)?;
        let patch = s.analytic_patch(Scheme::Richardson)?;
        let phi = s.points().map(|p| p.rho.ln());
        let grad = patch.gradient(&phi)?;
        let h = patch.normals().zip_map(&grad, |nu, g| nu.cross(g));
        let m = patch.margin();
        let contour = GridContour::rectangle(m, size.ns - 1 - m, m, size.nt - 1 - m)?;
        let (line, area) = patch.circulation(&h, &contour)?;
        residuals.push((line - area).abs());
        if *size == config.finest() {
            details.push(Detail::below("|line - area|", "enneper", &size.label(), (line - area).abs(), fd_tolerance(1e-5, *size)));
        }
    }
    details.extend(ratio_details("circulation residual ratio", "enneper", &config.grids, &residuals, 1e-10));
    Ok(details)
}

/// Output of a small `gen` run and a report fragment, used to compare
/// thread counts.
fn deterministic_artifacts() -> Result<(String, String)> {
    let datum = HolomorphicDatum::parse("bour:m=3")?;
    let domain = Domain::annulus(0.05, 1.0)?;
    let (surface, periodic) = mesh_surface(&datum, &domain, 48, 64)?;
    let mesh = MeshArtifact::from_surface(&surface, &HolomorphicDatum::enneper(), periodic);
    let custom = HolomorphicDatum::parse("custom:(0.5*ln(rho), 0.5*phi)")?;
    let quad = WeierstrassSurface::integrate(&custom, &domain, &domain.grid(24, 24)?)?;
    let cfg = VerifyConfig { grids: vec![GridSize::square(17), GridSize::square(33)], checks: None, seed: 7 };
    let fragment = serde_json::to_string(&(weierstrass_identities(&cfg)?, quad.positions().values()))
        .map_err(|e| Error::Io(e.to_string()))?;
    Ok((mesh.to_obj(), fragment))
}

fn determinism_io() -> Result<Vec<Detail>> {
    let mut outputs = Vec::new();
    for threads in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        outputs.push(pool.install(deterministic_artifacts)?);
    }
    let differing = outputs.iter().filter(|o| **o != outputs[0]).count();
    let mesh = MeshArtifact::from_obj(&outputs[0].0)?;
    let again = MeshArtifact::from_obj(&mesh.to_obj())?;
    let datum = HolomorphicDatum::parse("bour:m=3")?;
    let domain = Domain::annulus(0.05, 1.0)?;
    let (surface, periodic) = mesh_surface(&datum, &domain, 48, 64)?;
    let original = MeshArtifact::from_surface(&surface, &HolomorphicDatum::enneper(), periodic);
    let exact = original.vertices == mesh.vertices && original.normals == mesh.normals && original.faces == mesh.faces && again == mesh;
    Ok(vec![
        Detail::below("outputs differing across 1/2/8 threads", "bour:m=3", "48x64", differing as f64, 0.5),
        Detail::below("OBJ round-trip mismatch", "bour:m=3", "48x64", if exact { 0.0 } else { 1.0 }, 0.5),
    ])
}
