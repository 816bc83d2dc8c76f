//! One-parameter families of minimal surfaces sharing a spherical image.
//!
//! All families act on the datum additively in `(Φ, χ)`:
//!
//! | kind                | member at `t`                         |
//! |---------------------|---------------------------------------|
//! | `bonnet`            | `(Φ, χ + t θ_max)`                    |
//! | `bour-t`            | `(Φ + t ln ρ, χ + t φ)`, i.e. `wᵗ F`  |
//! | `catenoid-helicoid` | `(ln c − 2 ln ρ, −2φ + tπ/2)`         |
//! | `general`           | `(Φ + t φ, χ + t ϑ)`, `φ + iϑ` holomorphic |

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::grid::Grid;
use crate::weierstrass::{validate_holomorphy, Domain, HolomorphicDatum, WeierstrassSurface};
use crate::{Error, Result};

/// Bound on the harmonicity residuals of a `general` modulation pair.
pub const GENERAL_HARMONIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Bonnet,
    General,
    BourT,
    CatenoidHelicoid,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bonnet" => Ok(Self::Bonnet),
            "general" => Ok(Self::General),
            "bour-t" => Ok(Self::BourT),
            "catenoid-helicoid" => Ok(Self::CatenoidHelicoid),
            other => Err(Error::InvalidInput(format!("unknown family {other:?}"))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bonnet => "bonnet",
            Self::General => "general",
            Self::BourT => "bour-t",
            Self::CatenoidHelicoid => "catenoid-helicoid",
        })
    }
}

fn default_t1() -> f64 {
    1.0
}

fn default_frames() -> usize {
    5
}

fn default_theta_max() -> f64 {
    FRAC_PI_2
}

fn default_c() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    /// Catalog specification of the base datum; `enneper` when absent.
    /// Ignored by `catenoid-helicoid`, whose base is `c/w²`.
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default = "default_frames")]
    pub frames: usize,
    /// Bonnet angle reached at `t = 1`.
    #[serde(default = "default_theta_max")]
    pub theta_max: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Harmonic pair for `general`.
    #[serde(default)]
    pub phi: Option<Expr>,
    #[serde(default)]
    pub vartheta: Option<Expr>,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Self {
        Self {
            kind,
            base: None,
            t0: 0.0,
            t1: default_t1(),
            frames: default_frames(),
            theta_max: default_theta_max(),
            c: default_c(),
            phi: None,
            vartheta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames < 2 {
            return Err(Error::InvalidInput("a family needs at least two frames".into()));
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t0 <= self.t1) {
            return Err(Error::InvalidInput(format!("bad parameter range [{}, {}]", self.t0, self.t1)));
        }
        if self.kind == FamilyKind::General && (self.phi.is_none() || self.vartheta.is_none()) {
            return Err(Error::InvalidInput("general family needs the harmonic pair phi, vartheta".into()));
        }
        Ok(())
    }

    pub fn base_datum(&self) -> Result<HolomorphicDatum> {
        match self.kind {
            FamilyKind::CatenoidHelicoid => HolomorphicDatum::catenoid(self.c),
            _ => HolomorphicDatum::parse(self.base.as_deref().unwrap_or("enneper")),
        }
    }

    /// Uniform parameters `t0 … t1`, one per frame.
    pub fn parameters(&self) -> Vec<f64> {
        let n = self.frames.max(2);
        (0..n)
            .map(|k| if k + 1 == n { self.t1 } else { self.t0 + (self.t1 - self.t0) * k as f64 / (n - 1) as f64 })
            .collect()
    }

    /// Rejects a `general` pair whose harmonicity residual on `grid`
    /// exceeds [`GENERAL_HARMONIC_TOL`].
    pub fn check_harmonic_pair(&self, domain: &Domain, grid: &Grid) -> Result<()> {
        if let (FamilyKind::General, Some(phi), Some(vartheta)) = (self.kind, &self.phi, &self.vartheta) {
            let pair = HolomorphicDatum::custom(phi.clone(), vartheta.clone());
            let report = validate_holomorphy(&pair, domain, grid);
            if !report.passes(GENERAL_HARMONIC_TOL) {
                return Err(Error::InvalidInput(format!(
                    "general family pair ({phi}, {vartheta}) is not harmonic: residual {:e}",
                    report.max()
                )));
            }
        }
        Ok(())
    }
}

/// Datum of the family at parameter `t ∈ [t0, t1]`.
pub fn family_member(spec: &FamilySpec, t: f64) -> Result<HolomorphicDatum> {
    spec.validate()?;
    if !(t >= spec.t0 && t <= spec.t1) {
        return Err(Error::ParameterOutOfRange { t, t0: spec.t0, t1: spec.t1 });
    }
    let base = spec.base_datum()?;
    let member = match spec.kind {
        FamilyKind::Bonnet => base.rotated(t * spec.theta_max),
        FamilyKind::BourT => base.times_power(t),
        FamilyKind::CatenoidHelicoid => base.rotated(t * FRAC_PI_2),
        FamilyKind::General => base.modulated(
            spec.phi.clone().expect("validated"),
            spec.vartheta.clone().expect("validated"),
            t,
        ),
    };
    Ok(member.with_label(format!("{}:t={t}@{}", spec.kind, base.label)))
}

/// Scherk's second surface as the catenoid–helicoid member at `θ`.
pub fn scherk_midpoint(theta: f64, c: f64) -> Result<HolomorphicDatum> {
    HolomorphicDatum::scherk2(theta, c)
}

#[derive(Debug, Clone)]
pub struct FamilyFrame {
    pub index: usize,
    pub t: f64,
    pub surface: WeierstrassSurface,
    /// `|r_t(R)|`: distance from the base point to the image of the outer
    /// reference point (`w = ρ_max` on an annulus).
    pub scale: f64,
}

/// Outer reference point in grid coordinates.
pub fn reference_coords(domain: &Domain) -> (f64, f64) {
    match *domain {
        Domain::Annulus { rho_max, .. } => (rho_max, 0.0),
        Domain::Rectangle { u_max, v_min, v_max, .. } => (u_max, 0.5 * (v_min + v_max)),
    }
}

/// Integrates every frame of the family; frames are independent and built
/// in parallel, returned in parameter order.
pub fn family_frames(spec: &FamilySpec, domain: &Domain, grid: &Grid) -> Result<Vec<FamilyFrame>> {
    spec.validate()?;
    spec.check_harmonic_pair(domain, grid)?;
    let (rs, rt) = reference_coords(domain);
    spec.parameters()
        .into_par_iter()
        .enumerate()
        .map(|(index, t)| {
            let datum = family_member(spec, t)?;
            let surface = WeierstrassSurface::integrate(&datum, domain, grid)?;
            let scale = surface.position_at(rs, rt).norm();
            Ok(FamilyFrame { index, t, surface, scale })
        })
        .collect()
}
