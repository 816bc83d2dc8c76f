//! Minimal surfaces from holomorphic Weierstrass data.
//!
//! A datum `F = e^{Φ + iχ}` on a planar domain Ω generates the immersion
//!
//! ```text
//! r(w) = Re ∫_{w0}^{w} I(w') dw',   I = ((1 − w²)F/2, i(1 + w²)F/2, wF)
//! ```
//!
//! so that `r_u = Re I` and `r_v = Re(iI)`. The parameter `w` is the
//! stereographic projection of the normal, `ν = (2u, 2v, ρ² − 1)/(ρ² + 1)`,
//! and the coordinates are isothermal with `|r_u| = |r_v| = ½e^Φ(ρ² + 1)`.
//!
//! Data are kept in additive `(Φ, χ)` form with an explicit (unwrapped) polar
//! angle, so the branch cut of non-integer powers sits at `φ = ±π` and
//! family arithmetic is exact.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expr::{Expr, Vars};
use crate::grid::{Axis, Field, Grid, Scheme};
use crate::surfcalc::{CurvatureData, Frame, SurfacePatch};
use crate::{Error, Mat3, Result, Vec3};

/// Point of the parameter plane with an explicit polar angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WPoint {
    pub u: f64,
    pub v: f64,
    pub rho: f64,
    pub phi: f64,
}

impl WPoint {
    /// The angle is kept as given, so `polar(1, π)` and `polar(1, −π)` are
    /// different points for multivalued data.
    pub fn polar(rho: f64, phi: f64) -> Self {
        Self { u: rho * phi.cos(), v: rho * phi.sin(), rho, phi }
    }

    /// Principal angle in `(−π, π]`.
    pub fn cartesian(u: f64, v: f64) -> Self {
        Self { u, v, rho: u.hypot(v), phi: v.atan2(u) }
    }

    pub fn w(&self) -> Complex64 {
        Complex64::new(self.u, self.v)
    }

    fn vars(&self) -> Vars {
        Vars { rho: self.rho, phi: self.phi, u: self.u, v: self.v }
    }
}

/// Parameter domain Ω. Annuli are sampled in `(s, t) = (ρ, φ)`, rectangles
/// in `(s, t) = (u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Domain {
    Annulus { rho_min: f64, rho_max: f64 },
    Rectangle { u_min: f64, u_max: f64, v_min: f64, v_max: f64 },
}

impl Domain {
    pub fn annulus(rho_min: f64, rho_max: f64) -> Result<Self> {
        if !(rho_min >= 0.0 && rho_max > rho_min && rho_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "annulus needs 0 <= rho_min < rho_max, got [{rho_min}, {rho_max}]"
            )));
        }
        Ok(Domain::Annulus { rho_min, rho_max })
    }

    pub fn rectangle(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        if !(u_max > u_min && v_max > v_min && u_min.is_finite() && v_min.is_finite() && u_max.is_finite() && v_max.is_finite()) {
            return Err(Error::InvalidInput("rectangle needs u_min < u_max and v_min < v_max".into()));
        }
        Ok(Domain::Rectangle { u_min, u_max, v_min, v_max })
    }

    /// Closed sampling grid; for annuli `φ ∈ [−π, π]`.
    pub fn grid(&self, ns: usize, nt: usize) -> Result<Grid> {
        Ok(match *self {
            Domain::Annulus { rho_min, rho_max } => {
                Grid::new(Axis::new(rho_min, rho_max, ns)?, Axis::new(-PI, PI, nt)?)
            }
            Domain::Rectangle { u_min, u_max, v_min, v_max } => {
                Grid::new(Axis::new(u_min, u_max, ns)?, Axis::new(v_min, v_max, nt)?)
            }
        })
    }

    /// Annulus grid with `φ ∈ [−π, π)`, for meshes closed across the seam.
    pub fn periodic_grid(&self, ns: usize, nt: usize) -> Result<Grid> {
        match *self {
            Domain::Annulus { rho_min, rho_max } => {
                let end = PI - 2.0 * PI / nt as f64;
                Ok(Grid::new(Axis::new(rho_min, rho_max, ns)?, Axis::new(-PI, end, nt)?))
            }
            Domain::Rectangle { .. } => Err(Error::InvalidInput("rectangles have no angular seam".into())),
        }
    }

    pub fn point(&self, s: f64, t: f64) -> WPoint {
        match self {
            Domain::Annulus { .. } => WPoint::polar(s, t),
            Domain::Rectangle { .. } => WPoint::cartesian(s, t),
        }
    }

    /// `∂w/∂s` and `∂w/∂t` at grid coordinates `(s, t)`.
    pub fn dw(&self, s: f64, t: f64) -> (Complex64, Complex64) {
        match self {
            Domain::Annulus { .. } => {
                let e = Complex64::from_polar(1.0, t);
                (e, Complex64::i() * s * e)
            }
            Domain::Rectangle { .. } => (Complex64::new(1.0, 0.0), Complex64::i()),
        }
    }

    /// Grid coordinates of the base point `w0`, where `r = 0`.
    pub fn base_coords(&self) -> (f64, f64) {
        match *self {
            Domain::Annulus { rho_min, rho_max } => (0.5 * (rho_min + rho_max), 0.0),
            Domain::Rectangle { u_min, u_max, v_min, v_max } => (0.5 * (u_min + u_max), 0.5 * (v_min + v_max)),
        }
    }

    pub fn contains_origin(&self) -> bool {
        match *self {
            Domain::Annulus { rho_min, .. } => rho_min <= 0.0,
            Domain::Rectangle { u_min, u_max, v_min, v_max } => {
                u_min <= 0.0 && u_max >= 0.0 && v_min <= 0.0 && v_max >= 0.0
            }
        }
    }
}

/// Underlying function before constant factors and modulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Base {
    /// `F = w^k`.
    Power { exponent: f64 },
    /// `F = exp(Φ + iχ)` with both parts given as expressions.
    Custom { big_phi: Expr, chi: Expr },
}

/// Multiplicative factor `exp(weight·(φ + iϑ))` for a harmonic pair `(φ, ϑ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub phi: Expr,
    pub vartheta: Expr,
    pub weight: f64,
}

/// Weierstrass datum `F = e^{log_scale + i·phase} · base · Π modulations`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolomorphicDatum {
    pub label: String,
    pub base: Base,
    pub log_scale: f64,
    pub phase: f64,
    #[serde(default)]
    pub modulations: Vec<Modulation>,
}

impl HolomorphicDatum {
    /// `F = c·e^{iθ}·w^k` with `c > 0`.
    pub fn power(label: impl Into<String>, exponent: f64, c: f64, theta: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && exponent.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidInput(format!("bad power datum c = {c}, k = {exponent}, theta = {theta}")));
        }
        Ok(Self { label: label.into(), base: Base::Power { exponent }, log_scale: c.ln(), phase: theta, modulations: vec![] })
    }

    /// `F ≡ 1`.
    pub fn enneper() -> Self {
        Self::power("enneper", 0.0, 1.0, 0.0).expect("valid constants")
    }

    /// Bour surface of index `m`: `F = w^{m−2}`.
    pub fn bour(m: f64) -> Result<Self> {
        Self::power(format!("bour:m={m}"), m - 2.0, 1.0, 0.0)
    }

    /// `F = c/w²`.
    pub fn catenoid(c: f64) -> Result<Self> {
        Self::power(label_with_c("catenoid", c), -2.0, c, 0.0)
    }

    /// `F = ic/w²`.
    pub fn helicoid(c: f64) -> Result<Self> {
        Self::power(label_with_c("helicoid", c), -2.0, c, PI / 2.0)
    }

    /// Intermediate catenoid–helicoid associate `F = c e^{iθ}/w²`,
    /// `0 < θ < π/2`.
    pub fn scherk2(theta: f64, c: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < PI / 2.0) {
            return Err(Error::NotScherk(theta));
        }
        Self::power(format!("scherk2:theta={theta}"), -2.0, c, theta)
    }

    pub fn custom(big_phi: Expr, chi: Expr) -> Self {
        let label = format!("custom:({big_phi},{chi})");
        Self { label, base: Base::Custom { big_phi, chi }, log_scale: 0.0, phase: 0.0, modulations: vec![] }
    }

    /// Bonnet associate `e^{iθ}F`.
    pub fn rotated(&self, theta: f64) -> Self {
        let mut out = self.clone();
        out.phase += theta;
        out
    }

    /// `w^t F`, i.e. `(Φ + t ln ρ, χ + tφ)`.
    pub fn times_power(&self, t: f64) -> Self {
        let mut out = self.clone();
        match &mut out.base {
            Base::Power { exponent } => *exponent += t,
            Base::Custom { .. } => out.modulations.push(Modulation {
                phi: Expr::parse("ln(rho)").expect("literal"),
                vartheta: Expr::parse("phi").expect("literal"),
                weight: t,
            }),
        }
        out
    }

    /// `e^{t(φ + iϑ)} F`.
    pub fn modulated(&self, phi: Expr, vartheta: Expr, weight: f64) -> Self {
        let mut out = self.clone();
        out.modulations.push(Modulation { phi, vartheta, weight });
        out
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Parses a catalog specification:
    ///
    /// `enneper`, `bour:m=<m>`, `catenoid[:c=<c>]`, `helicoid[:c=<c>]`,
    /// `scherk2:theta=<rad>[,c=<c>]`, `bonnet:theta=<rad>[@<base spec>]`
    /// (base defaults to `enneper`) and `custom:(<Φ expr>,<χ expr>)`.
    /// Numeric values may be constant expressions such as `pi/4`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let datum = match name {
            "enneper" => {
                params(rest, &[])?;
                Self::enneper()
            }
            "bour" => {
                let p = params(rest, &["m", "c"])?;
                let m = p.get("m").ok_or_else(|| Error::InvalidInput("bour needs m=<real>".into()))?;
                Self::power(spec, m - 2.0, p.get("c").unwrap_or(1.0), 0.0)?
            }
            "catenoid" => Self::catenoid(params(rest, &["c"])?.get("c").unwrap_or(1.0))?,
            "helicoid" => Self::helicoid(params(rest, &["c"])?.get("c").unwrap_or(1.0))?,
            "scherk2" => {
                let p = params(rest, &["theta", "c"])?;
                let theta = p.get("theta").ok_or_else(|| Error::InvalidInput("scherk2 needs theta=<rad>".into()))?;
                Self::scherk2(theta, p.get("c").unwrap_or(1.0))?
            }
            "bonnet" => {
                let (args, base) = rest.split_once('@').unwrap_or((rest, "enneper"));
                let theta = params(args, &["theta"])?
                    .get("theta")
                    .ok_or_else(|| Error::InvalidInput("bonnet needs theta=<rad>".into()))?;
                Self::parse(base)?.rotated(theta)
            }
            "custom" => {
                let inner = rest
                    .trim()
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::InvalidInput("custom datum must read custom:(<Φ>,<χ>)".into()))?;
                let (a, b) = split_top_level_comma(inner)
                    .ok_or_else(|| Error::InvalidInput("custom datum needs two expressions".into()))?;
                Self::custom(Expr::parse(a)?, Expr::parse(b)?)
            }
            other => return Err(Error::InvalidInput(format!("unknown surface {other:?}"))),
        };
        Ok(datum.with_label(spec))
    }

    /// `(Φ, χ)` at `p`.
    pub fn eval(&self, p: &WPoint) -> (f64, f64) {
        let (mut big_phi, mut chi) = match &self.base {
            Base::Power { exponent } if *exponent == 0.0 => (0.0, 0.0),
            Base::Power { exponent } => (exponent * p.rho.ln(), exponent * p.phi),
            Base::Custom { big_phi, chi } => {
                let x = p.vars();
                (big_phi.eval(&x), chi.eval(&x))
            }
        };
        big_phi += self.log_scale;
        chi += self.phase;
        if !self.modulations.is_empty() {
            let x = p.vars();
            for m in &self.modulations {
                big_phi += m.weight * m.phi.eval(&x);
                chi += m.weight * m.vartheta.eval(&x);
            }
        }
        (big_phi, chi)
    }

    pub fn f(&self, p: &WPoint) -> Complex64 {
        let (big_phi, chi) = self.eval(p);
        Complex64::from_polar(big_phi.exp(), chi)
    }

    /// Integrand `I(w)` of the representation.
    pub fn integrand(&self, p: &WPoint) -> [Complex64; 3] {
        let w = p.w();
        let f = self.f(p);
        let w2 = w * w;
        [(1.0 - w2) * f * 0.5, Complex64::i() * (1.0 + w2) * f * 0.5, w * f]
    }

    /// Exponent `k` when the datum is `c e^{iθ} w^k` and has closed-form
    /// antiderivatives.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.base {
            Base::Power { exponent } if self.modulations.is_empty() => Some(exponent),
            _ => None,
        }
    }

    /// Antiderivative `G` of `I` for power data.
    fn antiderivative(&self, p: &WPoint) -> Option<[Complex64; 3]> {
        let k = self.power_exponent()?;
        let c = Complex64::from_polar(self.log_scale.exp(), self.phase);
        let pk = power_primitive(k, p);
        let pk1 = power_primitive(k + 1.0, p);
        let pk2 = power_primitive(k + 2.0, p);
        Some([c * 0.5 * (pk - pk2), Complex64::i() * c * 0.5 * (pk + pk2), c * pk1])
    }
}

fn label_with_c(name: &str, c: f64) -> String {
    if c == 1.0 {
        name.to_string()
    } else {
        format!("{name}:c={c}")
    }
}

/// Primitive of `w^n`: `w^{n+1}/(n+1)`, or `ln w` for `n = −1`, on the
/// branch fixed by the explicit polar angle.
fn power_primitive(n: f64, p: &WPoint) -> Complex64 {
    if (n + 1.0).abs() < 1e-12 {
        Complex64::new(p.rho.ln(), p.phi)
    } else if p.rho == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::from_polar(p.rho.powf(n + 1.0), (n + 1.0) * p.phi) / (n + 1.0)
    }
}

struct Params(Vec<(String, f64)>);

impl Params {
    fn get(&self, key: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

fn params(text: &str, allowed: &[&str]) -> Result<Params> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("expected key=value, got {item:?}")))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(Error::InvalidInput(format!("unknown parameter {key:?}")));
        }
        let value = Expr::parse(value)?.eval(&Vars { rho: f64::NAN, phi: f64::NAN, u: f64::NAN, v: f64::NAN });
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!("parameter {key} must be a finite constant")));
        }
        out.push((key.to_string(), value));
    }
    Ok(Params(out))
}

fn split_top_level_comma(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (k, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..k], &s[k + 1..])),
            _ => {}
        }
    }
    None
}

const GL16_NODES: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_09,
];

type C3 = [Complex64; 3];

fn c3_add(a: C3, b: C3) -> C3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn c3_re(a: &C3) -> Vec3 {
    Vec3::new(a[0].re, a[1].re, a[2].re)
}

/// 16-point Gauss–Legendre rule on `[a, b]`, subdivided into pieces no
/// longer than 0.1.
fn gauss_legendre(a: f64, b: f64, f: &impl Fn(f64) -> C3) -> C3 {
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = [zero; 3];
    if a == b {
        return acc;
    }
    let pieces = ((b - a).abs() / 0.1).ceil().max(1.0) as usize;
    let h = (b - a) / pieces as f64;
    for p in 0..pieces {
        let (lo, hi) = (a + h * p as f64, a + h * (p + 1) as f64);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, w) in GL16_NODES.iter().zip(GL16_WEIGHTS) {
            let fp = f(mid + half * x);
            let fm = f(mid - half * x);
            for c in 0..3 {
                acc[c] += (fp[c] + fm[c]) * (w * half);
            }
        }
    }
    acc
}

/// `∫_{x0}^{x_k} f` at every node `x_k` (sorted ascending), accumulated
/// outward from `x0` cell by cell.
fn cumulative(nodes: &[f64], x0: f64, f: &impl Fn(f64) -> C3) -> Vec<C3> {
    let zero = [Complex64::new(0.0, 0.0); 3];
    let mut out = vec![zero; nodes.len()];
    let split = nodes.partition_point(|&x| x < x0);
    let mut acc = zero;
    let mut prev = x0;
    for k in split..nodes.len() {
        acc = c3_add(acc, gauss_legendre(prev, nodes[k], f));
        out[k] = acc;
        prev = nodes[k];
    }
    let (mut acc, mut prev) = (zero, x0);
    for k in (0..split).rev() {
        acc = c3_add(acc, gauss_legendre(prev, nodes[k], f));
        out[k] = acc;
        prev = nodes[k];
    }
    out
}

/// How positions were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integration {
    ClosedForm,
    /// Quadrature, with the max deviation between the two integration
    /// paths (s then t, t then s) over the grid.
    Quadrature { path_residual: f64 },
}

/// Requested integration method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed form where available, quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
}

/// Sampled minimal immersion generated by a datum.
#[derive(Debug, Clone)]
pub struct WeierstrassSurface {
    datum: HolomorphicDatum,
    domain: Domain,
    grid: Grid,
    positions: Field<Vec3>,
    integration: Integration,
}

impl WeierstrassSurface {
    pub fn integrate(datum: &HolomorphicDatum, domain: &Domain, grid: &Grid) -> Result<Self> {
        Self::integrate_with(datum, domain, grid, Method::Auto)
    }

    pub fn integrate_with(datum: &HolomorphicDatum, domain: &Domain, grid: &Grid, method: Method) -> Result<Self> {
        check_datum_on(datum, domain, grid)?;
        let (s0, t0) = domain.base_coords();
        let (positions, integration) = match (method, datum.power_exponent()) {
            (Method::Auto, Some(_)) => {
                let g0 = datum.antiderivative(&domain.point(s0, t0)).expect("power datum");
                let positions = grid.sample(|s, t| {
                    let g = datum.antiderivative(&domain.point(s, t)).expect("power datum");
                    Vec3::new((g[0] - g0[0]).re, (g[1] - g0[1]).re, (g[2] - g0[2]).re)
                });
                (positions, Integration::ClosedForm)
            }
            _ => {
                let a = quadrature_s_then_t(datum, domain, grid);
                let b = quadrature_t_then_s(datum, domain, grid);
                let path_residual = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                (a, Integration::Quadrature { path_residual })
            }
        };
        Ok(Self { datum: datum.clone(), domain: *domain, grid: *grid, positions, integration })
    }

    pub fn datum(&self) -> &HolomorphicDatum {
        &self.datum
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn positions(&self) -> &Field<Vec3> {
        &self.positions
    }

    pub fn integration(&self) -> Integration {
        self.integration
    }

    pub fn point(&self, i: usize, j: usize) -> WPoint {
        let (s, t) = self.grid.coords(i, j);
        self.domain.point(s, t)
    }

    pub fn points(&self) -> Field<WPoint> {
        Field::from_index_fn(&self.grid, |i, j| self.point(i, j))
    }

    /// Position at arbitrary grid coordinates `(s, t)`, by the same method
    /// as the sampled positions (closed form or the s-then-t path).
    pub fn position_at(&self, s: f64, t: f64) -> Vec3 {
        let (s0, t0) = self.domain.base_coords();
        match self.integration {
            Integration::ClosedForm => {
                let g0 = self.datum.antiderivative(&self.domain.point(s0, t0)).expect("power datum");
                let g = self.datum.antiderivative(&self.domain.point(s, t)).expect("power datum");
                Vec3::new((g[0] - g0[0]).re, (g[1] - g0[1]).re, (g[2] - g0[2]).re)
            }
            Integration::Quadrature { .. } => {
                let leg_s = cumulative(&[s], s0, &|x| along_s(&self.datum, &self.domain, x, t0))[0];
                let leg_t = cumulative(&[t], t0, &|y| along_t(&self.datum, &self.domain, s, y))[0];
                c3_re(&c3_add(leg_s, leg_t))
            }
        }
    }

    /// Closed-form `(r_u, r_v)` at every sample.
    pub fn metric_vectors(&self) -> (Field<Vec3>, Field<Vec3>) {
        let mv = self.points().map(|p| metric_vectors(&self.datum, p));
        (mv.map(|m| m.0), mv.map(|m| m.1))
    }

    /// Closed-form tangents along the grid coordinates, `(r_s, r_t)`.
    pub fn grid_tangents(&self) -> (Field<Vec3>, Field<Vec3>) {
        let tangents = Field::from_index_fn(&self.grid, |i, j| {
            let (s, t) = self.grid.coords(i, j);
            let integrand = self.datum.integrand(&self.domain.point(s, t));
            let (ws, wt) = self.domain.dw(s, t);
            let re = |dw: Complex64| Vec3::new((integrand[0] * dw).re, (integrand[1] * dw).re, (integrand[2] * dw).re);
            (re(ws), re(wt))
        });
        (tangents.map(|x| x.0), tangents.map(|x| x.1))
    }

    pub fn normals(&self) -> Field<Vec3> {
        self.points().map(normal)
    }

    pub fn frames(&self) -> Field<Frame> {
        self.points().map(|p| frame(&self.datum, p))
    }

    pub fn curvature(&self) -> Field<CurvatureData> {
        self.points().map(|p| curvature_closed_form(&self.datum, p))
    }

    /// Patch with tangents from finite differences of the sampled positions.
    pub fn fd_patch(&self, scheme: Scheme) -> Result<SurfacePatch> {
        SurfacePatch::from_samples(self.grid, self.positions.clone(), scheme)
    }

    /// Patch with closed-form tangents; higher derivatives still use
    /// finite differences.
    pub fn analytic_patch(&self, scheme: Scheme) -> Result<SurfacePatch> {
        let (r_s, r_t) = self.grid_tangents();
        SurfacePatch::with_tangents(self.grid, self.positions.clone(), r_s, r_t, scheme)
    }
}

fn check_datum_on(datum: &HolomorphicDatum, domain: &Domain, grid: &Grid) -> Result<()> {
    if domain.contains_origin() {
        let (big_phi, chi) = datum.eval(&WPoint::polar(0.0, 0.0));
        if !(big_phi.is_finite() && chi.is_finite()) {
            return Err(Error::DomainExclusion(format!(
                "{} is singular or vanishes at w = 0; use a positive inner radius",
                datum.label
            )));
        }
    }
    let (ns, nt) = grid.dims();
    for j in 0..nt {
        for i in 0..ns {
            let (s, t) = grid.coords(i, j);
            let (big_phi, chi) = datum.eval(&domain.point(s, t));
            if !(big_phi.is_finite() && chi.is_finite()) {
                return Err(Error::DomainExclusion(format!(
                    "{} is not finite at grid node ({i}, {j})",
                    datum.label
                )));
            }
        }
    }
    Ok(())
}

fn along_s(datum: &HolomorphicDatum, domain: &Domain, s: f64, t: f64) -> C3 {
    let i = datum.integrand(&domain.point(s, t));
    let dw = domain.dw(s, t).0;
    [i[0] * dw, i[1] * dw, i[2] * dw]
}

fn along_t(datum: &HolomorphicDatum, domain: &Domain, s: f64, t: f64) -> C3 {
    let i = datum.integrand(&domain.point(s, t));
    let dw = domain.dw(s, t).1;
    [i[0] * dw, i[1] * dw, i[2] * dw]
}

/// Along `s` on the base line `t = t0`, then along `t`; parallel over `s`
/// nodes, each angular/vertical sweep accumulated serially.
fn quadrature_s_then_t(datum: &HolomorphicDatum, domain: &Domain, grid: &Grid) -> Field<Vec3> {
    let (s0, t0) = domain.base_coords();
    let (s_nodes, t_nodes) = (grid.s.values(), grid.t.values());
    let first = cumulative(&s_nodes, s0, &|s| along_s(datum, domain, s, t0));
    let columns: Vec<Vec<Vec3>> = s_nodes
        .par_iter()
        .zip(first.par_iter())
        .map(|(&s, head)| {
            cumulative(&t_nodes, t0, &|t| along_t(datum, domain, s, t))
                .iter()
                .map(|tail| c3_re(&c3_add(*head, *tail)))
                .collect()
        })
        .collect();
    Field::from_index_fn(grid, |i, j| columns[i][j])
}

fn quadrature_t_then_s(datum: &HolomorphicDatum, domain: &Domain, grid: &Grid) -> Field<Vec3> {
    let (s0, t0) = domain.base_coords();
    let (s_nodes, t_nodes) = (grid.s.values(), grid.t.values());
    let first = cumulative(&t_nodes, t0, &|t| along_t(datum, domain, s0, t));
    let rows: Vec<Vec<Vec3>> = t_nodes
        .par_iter()
        .zip(first.par_iter())
        .map(|(&t, head)| {
            cumulative(&s_nodes, s0, &|s| along_s(datum, domain, s, t))
                .iter()
                .map(|tail| c3_re(&c3_add(*head, *tail)))
                .collect()
        })
        .collect();
    Field::from_index_fn(grid, |i, j| rows[j][i])
}

/// Convenience wrapper: integrate `datum` on the default closed grid of
/// `domain`.
pub fn integrate_representation(datum: &HolomorphicDatum, domain: &Domain, ns: usize, nt: usize) -> Result<WeierstrassSurface> {
    WeierstrassSurface::integrate(datum, domain, &domain.grid(ns, nt)?)
}

/// Closed-form `(r_u, r_v) = (Re I, Re iI)`.
pub fn metric_vectors(datum: &HolomorphicDatum, p: &WPoint) -> (Vec3, Vec3) {
    let i = datum.integrand(p);
    (Vec3::new(i[0].re, i[1].re, i[2].re), Vec3::new(-i[0].im, -i[1].im, -i[2].im))
}

/// `ν = (2u, 2v, ρ² − 1)/(ρ² + 1)`, the same for every datum.
pub fn normal(p: &WPoint) -> Vec3 {
    let d = p.u * p.u + p.v * p.v + 1.0;
    Vec3::new(2.0 * p.u, 2.0 * p.v, d - 2.0) / d
}

/// `(e_u, e_v, ν)` from the closed-form metric vectors.
pub fn frame(datum: &HolomorphicDatum, p: &WPoint) -> Frame {
    let (r_u, r_v) = metric_vectors(datum, p);
    Frame { e_u: r_u.normalize(), e_v: r_v.normalize(), nu: normal(p) }
}

/// Closed-form curvature: `κ1 = −κ2 = 4/(e^Φ(ρ² + 1)²)`, principal
/// directions `n1 = cos(χ/2)e_u − sin(χ/2)e_v`, `n2 = ν × n1`.
pub fn curvature_closed_form(datum: &HolomorphicDatum, p: &WPoint) -> CurvatureData {
    let (big_phi, chi) = datum.eval(p);
    let f = frame(datum, p);
    let d = p.u * p.u + p.v * p.v + 1.0;
    let kappa = 4.0 / (big_phi.exp() * d * d);
    let (sin, cos) = (0.5 * chi).sin_cos();
    let n1 = f.e_u * cos - f.e_v * sin;
    let n2 = f.nu.cross(&n1);
    let shape_operator: Mat3 = (n1 * n1.transpose() - n2 * n2.transpose()) * kappa;
    CurvatureData {
        shape_operator,
        kappa1: kappa,
        kappa2: -kappa,
        n1,
        n2,
        mean: 0.0,
        gauss: -16.0 / ((2.0 * big_phi).exp() * d.powi(4)),
        umbilic: false,
        asymmetry: 0.0,
    }
}

/// Worst-case Cauchy–Riemann and harmonicity residuals of `(Φ, χ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyReport {
    pub cauchy_riemann: f64,
    pub harmonic_big_phi: f64,
    pub harmonic_chi: f64,
}

impl HolomorphyReport {
    pub fn max(&self) -> f64 {
        self.cauchy_riemann.max(self.harmonic_big_phi).max(self.harmonic_chi)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max() < tolerance
    }
}

/// Probes `(Φ, χ)` around every grid node with fourth-order differences in
/// polar coordinates (steps `4·10⁻³ρ` and `4·10⁻³`), so the branch cut is
/// never crossed. Residuals are the scale-free polar forms
/// `|ρΦ_ρ − χ_φ| + |Φ_φ + ρχ_ρ|` and `|ρ²Δf|`. Nodes at `ρ = 0` are skipped.
pub fn validate_holomorphy(datum: &HolomorphicDatum, domain: &Domain, grid: &Grid) -> HolomorphyReport {
    let per_node = Field::from_index_fn(grid, |i, j| {
        let (s, t) = grid.coords(i, j);
        let p = domain.point(s, t);
        if p.rho <= 0.0 {
            return [0.0; 3];
        }
        let (dr, dp) = (4e-3 * p.rho, 4e-3);
        let at = |a: f64, b: f64| datum.eval(&WPoint::polar(p.rho + a * dr, p.phi + b * dp));
        let centre = at(0.0, 0.0);
        let r = [at(-2.0, 0.0), at(-1.0, 0.0), at(1.0, 0.0), at(2.0, 0.0)];
        let a = [at(0.0, -2.0), at(0.0, -1.0), at(0.0, 1.0), at(0.0, 2.0)];
        // stencils act on offsets from the centre so constants give exact zeros
        let d1 = |f: [f64; 4], h: f64| ((f[2] - f[1]) * 8.0 - (f[3] - f[0])) / (12.0 * h);
        let d2 = |f: [f64; 4], h: f64| ((f[1] + f[2]) * 16.0 - (f[0] + f[3])) / (12.0 * h * h);
        let big = |q: [(f64, f64); 4]| q.map(|x| x.0 - centre.0);
        let small = |q: [(f64, f64); 4]| q.map(|x| x.1 - centre.1);
        let (phi_r, phi_a) = (d1(big(r), dr), d1(big(a), dp));
        let (chi_r, chi_a) = (d1(small(r), dr), d1(small(a), dp));
        let cr = (p.rho * phi_r - chi_a).abs() + (phi_a + p.rho * chi_r).abs();
        let lap = |fr: [f64; 4], fa: [f64; 4], first: f64| {
            (p.rho * p.rho * d2(fr, dr) + p.rho * first + d2(fa, dp)).abs()
        };
        [cr, lap(big(r), big(a), phi_r), lap(small(r), small(a), chi_r)]
    });
    let max = |k: usize| per_node.values().iter().map(|x| x[k]).fold(0.0, f64::max);
    HolomorphyReport { cauchy_riemann: max(0), harmonic_big_phi: max(1), harmonic_chi: max(2) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::interior_max;

    fn rect() -> Domain {
        Domain::rectangle(0.5, 1.0, -0.25, 0.25).unwrap()
    }

    #[test]
    fn metric_vectors_at_origin() {
        let (r_u, r_v) = metric_vectors(&HolomorphicDatum::enneper(), &WPoint::polar(0.0, 0.0));
        assert!((r_u - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
        assert!((r_v - Vec3::new(0.0, -0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn isothermal_closed_form() {
        let data = ["enneper", "bour:m=3", "catenoid", "helicoid", "scherk2:theta=pi/4", "custom:(0.3*ln(rho), 0.3*phi)"];
        for spec in data {
            let d = HolomorphicDatum::parse(spec).unwrap();
            for p in [WPoint::polar(0.7, 0.3), WPoint::polar(1.3, -2.9), WPoint::cartesian(0.2, 0.9)] {
                let (r_u, r_v) = metric_vectors(&d, &p);
                let (big_phi, _) = d.eval(&p);
                let expected = 0.5 * big_phi.exp() * (p.rho * p.rho + 1.0);
                assert!((r_u.norm() - expected).abs() < 1e-12 * expected, "{spec}");
                assert!((r_v.norm() - expected).abs() < 1e-12 * expected, "{spec}");
                assert!(r_u.dot(&r_v).abs() < 1e-12 * expected * expected, "{spec}");
                let nu = r_u.cross(&r_v).normalize();
                assert!((nu - normal(&p)).norm() < 1e-12, "{spec}");
            }
        }
    }

    #[test]
    fn normal_examples() {
        assert!((normal(&WPoint::polar(0.0, 0.0)) - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
        assert!((normal(&WPoint::cartesian(0.5, 0.0)) - Vec3::new(0.8, 0.0, -0.6)).norm() < 1e-15);
        assert!(normal(&WPoint::polar(1.0, 2.1)).z.abs() < 1e-15);
    }

    #[test]
    fn curvature_examples() {
        let d = HolomorphicDatum::enneper();
        let c = curvature_closed_form(&d, &WPoint::polar(0.0, 0.0));
        assert_eq!((c.kappa1, c.kappa2, c.gauss), (4.0, -4.0, -16.0));
        let c = curvature_closed_form(&d, &WPoint::cartesian(0.5, 0.0));
        assert!((c.gauss + 6.5536).abs() < 1e-12);
        let d = HolomorphicDatum::parse("scherk2:theta=0.4").unwrap();
        let c = curvature_closed_form(&d, &WPoint::polar(0.8, 1.1));
        assert!(c.shape_operator.trace().abs() < 1e-12);
        assert!((c.shape_operator * normal(&WPoint::polar(0.8, 1.1))).norm() < 1e-12);
        assert!((c.shape_operator * c.n1 - c.n1 * c.kappa1).norm() < 1e-12);
    }

    #[test]
    fn catalog_parsing() {
        let d = HolomorphicDatum::parse("bonnet:theta=0.25@bour:m=3").unwrap();
        assert_eq!(d.power_exponent(), Some(1.0));
        assert_eq!(d.phase, 0.25);
        assert_eq!(d.label, "bonnet:theta=0.25@bour:m=3");
        assert_eq!(HolomorphicDatum::parse("bonnet:theta=1").unwrap().power_exponent(), Some(0.0));
        let h = HolomorphicDatum::parse("helicoid:c=2").unwrap();
        assert!((h.log_scale - 2f64.ln()).abs() < 1e-15 && h.phase == PI / 2.0);
        assert!(matches!(HolomorphicDatum::parse("scherk2:theta=0"), Err(Error::NotScherk(_))));
        assert!(HolomorphicDatum::parse("torus").is_err());
        assert!(HolomorphicDatum::parse("bour").is_err());
        assert!(HolomorphicDatum::parse("catenoid:k=2").is_err());
        let c = HolomorphicDatum::parse("custom:(pow(rho, 2)*cos(2*phi), 0)").unwrap();
        assert_eq!(c.power_exponent(), None);
    }

    #[test]
    fn enneper_quadrature_matches_closed_form() {
        let d = HolomorphicDatum::enneper();
        let domain = Domain::annulus(0.0, 1.2).unwrap();
        let g = domain.grid(17, 25).unwrap();
        let exact = WeierstrassSurface::integrate(&d, &domain, &g).unwrap();
        let quad = WeierstrassSurface::integrate_with(&d, &domain, &g, Method::Quadrature).unwrap();
        assert_eq!(exact.integration(), Integration::ClosedForm);
        let Integration::Quadrature { path_residual } = quad.integration() else { panic!() };
        assert!(path_residual < 1e-12, "{path_residual}");
        let err = exact
            .positions()
            .values()
            .iter()
            .zip(quad.positions().values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        // Enneper in closed form along the real axis
        for &u in &[0.3, 0.8, 1.2] {
            let r = exact.position_at(u, 0.0) - exact.position_at(0.6, 0.0);
            let f = |x: f64| Vec3::new(0.5 * (x - x * x * x / 3.0), 0.0, 0.5 * x * x);
            assert!((r - (f(u) - f(0.6))).norm() < 1e-14);
        }
    }

    #[test]
    fn catenoid_is_a_surface_of_revolution() {
        let d = HolomorphicDatum::catenoid(1.0).unwrap();
        let domain = Domain::annulus(0.4, 1.6).unwrap();
        let s = integrate_representation(&d, &domain, 13, 33).unwrap();
        // the translation fixed at w0 moves the axis off the origin
        let axis = (0..32).map(|j| s.positions().at(0, j).xy()).sum::<nalgebra::Vector2<f64>>() / 32.0;
        for i in 0..13 {
            let radii: Vec<f64> = (0..33).map(|j| (s.positions().at(i, j).xy() - axis).norm()).collect();
            let spread = radii.iter().fold(0.0f64, |m, r| m.max((r - radii[0]).abs()));
            assert!(spread < 1e-12, "{spread}");
        }
    }

    #[test]
    fn custom_quadrature_is_path_independent() {
        let d = HolomorphicDatum::parse("custom:(0.5*ln(rho) + u, 0.5*phi + v)").unwrap();
        let domain = Domain::annulus(0.3, 1.1).unwrap();
        let s = integrate_representation(&d, &domain, 15, 21).unwrap();
        let Integration::Quadrature { path_residual } = s.integration() else { panic!() };
        assert!(path_residual < 1e-9, "{path_residual}");
        // closed-form tangents must match differences of the integrated positions
        let (r_s, _) = s.grid_tangents();
        let fd = s.positions().d_ds(s.grid(), Scheme::Richardson);
        let err = interior_max(s.grid(), &fd, 2, |i, j, v| Some((v - r_s.at(i, j)).norm()));
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn singular_data_need_a_hole() {
        let disk = Domain::annulus(0.0, 1.0).unwrap();
        for spec in ["catenoid", "bour:m=3", "helicoid"] {
            let d = HolomorphicDatum::parse(spec).unwrap();
            assert!(matches!(integrate_representation(&d, &disk, 9, 9), Err(Error::DomainExclusion(_))));
        }
        assert!(integrate_representation(&HolomorphicDatum::enneper(), &disk, 9, 9).is_ok());
        let d = HolomorphicDatum::parse("bour:m=3").unwrap();
        assert!(integrate_representation(&d, &Domain::annulus(0.05, 1.0).unwrap(), 9, 9).is_ok());
    }

    #[test]
    fn fd_tangents_converge_to_closed_form() {
        let d = HolomorphicDatum::parse("bour:m=3").unwrap();
        let err = |n: usize| {
            let s = WeierstrassSurface::integrate(&d, &rect(), &rect().grid(n, n).unwrap()).unwrap();
            let (r_u, r_v) = s.metric_vectors();
            let p = s.fd_patch(Scheme::Central).unwrap();
            interior_max(s.grid(), p.tangent_s(), 1, |i, j, t| {
                Some((t - r_u.at(i, j)).norm().max((p.tangent_t().at(i, j) - r_v.at(i, j)).norm()))
            })
        };
        let ratio = err(33) / err(65);
        assert!((3.4..4.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn fd_curvature_matches_closed_form() {
        let d = HolomorphicDatum::enneper();
        let s = WeierstrassSurface::integrate(&d, &rect(), &rect().grid(65, 65).unwrap()).unwrap();
        let fd = s.fd_patch(Scheme::Central).unwrap().shape_operator();
        let exact = s.curvature();
        let err = interior_max(s.grid(), &fd, 2, |i, j, c| {
            Some((c.gauss - exact.at(i, j).gauss).abs() / exact.at(i, j).gauss.abs())
        });
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn holomorphy_validation() {
        let domain = Domain::annulus(0.2, 1.5).unwrap();
        let g = domain.grid(9, 17).unwrap();
        let bour = HolomorphicDatum::custom(Expr::parse("0.7*ln(rho)").unwrap(), Expr::parse("0.7*phi").unwrap());
        let rep = validate_holomorphy(&bour, &domain, &g);
        assert!(rep.passes(1e-8), "{rep:?}");
        let flat = HolomorphicDatum::custom(Expr::constant(0.0), Expr::constant(1.3));
        assert_eq!(validate_holomorphy(&flat, &domain, &g).max(), 0.0);
        let broken = HolomorphicDatum::custom(Expr::parse("u^2").unwrap(), Expr::constant(0.0));
        assert!(validate_holomorphy(&broken, &domain, &g).max() > 1.0);
    }

    #[test]
    fn bour_inversion_symmetry() {
        // r_m(1/z) = diag(1, −1, −1) r_{−m}(z) + const
        let m = 2.5;
        let domain = Domain::annulus(0.5, 2.0).unwrap();
        let g = domain.grid(5, 5).unwrap();
        let sm = WeierstrassSurface::integrate(&HolomorphicDatum::bour(m).unwrap(), &domain, &g).unwrap();
        let sn = WeierstrassSurface::integrate(&HolomorphicDatum::bour(-m).unwrap(), &domain, &g).unwrap();
        let flip = Vec3::new(1.0, -1.0, -1.0);
        let diff = |rho: f64, phi: f64| {
            sm.position_at(1.0 / rho, -phi) - sn.position_at(rho, phi).component_mul(&flip)
        };
        let c = diff(1.0, 0.0);
        for (rho, phi) in [(0.6, 0.3), (1.7, -2.0), (0.9, 2.8)] {
            assert!((diff(rho, phi) - c).norm() < 1e-12);
        }
    }
}
