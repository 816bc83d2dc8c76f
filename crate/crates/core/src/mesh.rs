//! Grid meshes of sampled surfaces: OBJ geometry plus a PLY sidecar with
//! per-vertex attribute channels.
//!
//! Vertex `(i, j)` of the grid is stored at index `j·ns + i`. Quads are
//! wound `(i, j) → (i+1, j) → (i+1, j+1) → (i, j+1)`, so face normals follow
//! `r_s × r_t`, i.e. the surface normal. On a disk (`ρ_min = 0`) the first
//! ring collapses to the centre and its cells become triangles. Meshes of
//! single-valued data on annuli are sampled with `φ ∈ [−π, π)` and closed
//! across the seam; multivalued data keep `φ ∈ [−π, π]` and an open seam.

use std::fmt::Write as _;
use std::path::Path;

use crate::weierstrass::{curvature_closed_form, normal, Domain, HolomorphicDatum, WeierstrassSurface};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct MeshArtifact {
    pub vertices: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    /// Zero-based vertex indices, three or four per face.
    pub faces: Vec<Vec<usize>>,
    /// Named per-vertex scalar channels.
    pub channels: Vec<(String, Vec<f64>)>,
}

/// Whether the surface of `datum` closes up across `φ = ±π` on an annulus.
pub fn is_single_valued(datum: &HolomorphicDatum, domain: &Domain) -> Result<bool> {
    let Domain::Annulus { .. } = domain else { return Ok(false) };
    let probe = WeierstrassSurface::integrate(datum, domain, &domain.grid(5, 5)?)?;
    let (ns, nt) = probe.grid().dims();
    let scale = 1.0 + probe.positions().values().iter().map(|p| p.norm()).fold(0.0, f64::max);
    Ok((0..ns).all(|i| {
        let (a, b) = (probe.point(i, 0), probe.point(i, nt - 1));
        let df = (datum.f(&a) - datum.f(&b)).norm() / (1.0 + datum.f(&a).norm());
        let dr = (probe.positions().at(i, 0) - probe.positions().at(i, nt - 1)).norm() / scale;
        df < 1e-12 && dr < 1e-9
    }))
}

/// Integrates `datum` on the mesh grid of `domain` (periodic when the
/// surface is single-valued).
pub fn mesh_surface(datum: &HolomorphicDatum, domain: &Domain, ns: usize, nt: usize) -> Result<(WeierstrassSurface, bool)> {
    let periodic = is_single_valued(datum, domain)?;
    let grid = if periodic { domain.periodic_grid(ns, nt)? } else { domain.grid(ns, nt)? };
    Ok((WeierstrassSurface::integrate(datum, domain, &grid)?, periodic))
}

impl MeshArtifact {
    /// Mesh of `surface` with channels `K`, `mu`, `alpha` (deformation from
    /// `reference` to the surface's datum) and `b_norm = 1/ρ`.
    pub fn from_surface(surface: &WeierstrassSurface, reference: &HolomorphicDatum, periodic: bool) -> Self {
        let (ns, nt) = surface.grid().dims();
        let points = surface.points();
        let pts = points.values();
        let vertices = surface.positions().values().to_vec();
        let normals = pts.iter().map(normal).collect();
        let datum = surface.datum();
        let gauss = pts.iter().map(|p| curvature_closed_form(datum, p).gauss).collect();
        let (mut mu, mut alpha) = (Vec::with_capacity(pts.len()), Vec::with_capacity(pts.len()));
        for p in pts {
            let (big_phi, chi) = datum.eval(p);
            let (big_phi0, chi0) = reference.eval(p);
            mu.push((big_phi - big_phi0).exp());
            alpha.push(chi - chi0);
        }
        let b_norm = pts.iter().map(|p| if p.rho > 0.0 { 1.0 / p.rho } else { f64::NAN }).collect();

        let collapsed = matches!(surface.domain(), Domain::Annulus { rho_min, .. } if *rho_min == 0.0);
        let strips = if periodic { nt } else { nt - 1 };
        let id = |i: usize, j: usize| (j % nt) * ns + i;
        let mut faces = Vec::with_capacity(strips * (ns - 1));
        for j in 0..strips {
            for i in 0..ns - 1 {
                if i == 0 && collapsed {
                    faces.push(vec![id(0, j), id(1, j), id(1, j + 1)]);
                } else {
                    faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
        }
        Self {
            vertices,
            normals,
            faces,
            channels: vec![
                ("K".into(), gauss),
                ("mu".into(), mu),
                ("alpha".into(), alpha),
                ("b_norm".into(), b_norm),
            ],
        }
    }

    /// Checks index ranges and returns the smallest cosine between a face
    /// normal and the mean vertex normal over non-degenerate faces.
    pub fn validate(&self) -> Result<f64> {
        let n = self.vertices.len();
        if self.normals.len() != n || self.channels.iter().any(|(_, c)| c.len() != n) {
            return Err(Error::InvalidInput("attribute length differs from vertex count".into()));
        }
        let mut worst = 1.0f64;
        for f in &self.faces {
            if f.len() < 3 || f.iter().any(|&k| k >= n) {
                return Err(Error::InvalidInput(format!("face {f:?} out of range")));
            }
            let p: Vec<Vec3> = f.iter().map(|&k| self.vertices[k]).collect();
            // Newell normal, robust for quads
            let mut face_normal = Vec3::zeros();
            for k in 0..p.len() {
                face_normal += p[k].cross(&p[(k + 1) % p.len()]);
            }
            let mean: Vec3 = f.iter().map(|&k| self.normals[k]).sum();
            if face_normal.norm() > 1e-14 && mean.norm() > 0.0 {
                worst = worst.min(face_normal.normalize().dot(&mean.normalize()));
            }
        }
        Ok(worst)
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::with_capacity(self.vertices.len() * 120);
        out.push_str("# minsurf grid mesh\n");
        for v in &self.vertices {
            let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
        }
        for n in &self.normals {
            let _ = writeln!(out, "vn {:.16e} {:.16e} {:.16e}", n.x, n.y, n.z);
        }
        for f in &self.faces {
            out.push('f');
            for &k in f {
                let _ = write!(out, " {0}//{0}", k + 1);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the subset of OBJ written by [`MeshArtifact::to_obj`].
    pub fn from_obj(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::InvalidInput(format!("malformed OBJ line {line:?}"));
        let (mut vertices, mut normals, mut faces) = (Vec::new(), Vec::new(), Vec::new());
        for line in text.lines() {
            let mut parts = line.split_whitespace();
            let tag = parts.next();
            let triple = |parts: std::str::SplitWhitespace| -> Result<Vec3> {
                let xs: Vec<f64> = parts.map(|x| x.parse::<f64>().map_err(|_| bad(line))).collect::<Result<_>>()?;
                if xs.len() != 3 {
                    return Err(bad(line));
                }
                Ok(Vec3::new(xs[0], xs[1], xs[2]))
            };
            match tag {
                Some("v") => vertices.push(triple(parts)?),
                Some("vn") => normals.push(triple(parts)?),
                Some("f") => {
                    let face = parts
                        .map(|item| {
                            let index = item.split('/').next().unwrap_or("");
                            index.parse::<usize>().ok().filter(|&k| k > 0).map(|k| k - 1).ok_or_else(|| bad(line))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    faces.push(face);
                }
                _ => {}
            }
        }
        Ok(Self { vertices, normals, faces, channels: vec![] })
    }

    /// ASCII PLY with positions, normals and every channel.
    pub fn to_ply(&self) -> String {
        let mut out = String::new();
        out.push_str("ply\nformat ascii 1.0\ncomment minsurf attribute channels\n");
        let _ = writeln!(out, "element vertex {}", self.vertices.len());
        for name in ["x", "y", "z", "nx", "ny", "nz"] {
            let _ = writeln!(out, "property double {name}");
        }
        for (name, _) in &self.channels {
            let _ = writeln!(out, "property double {name}");
        }
        let _ = writeln!(out, "element face {}", self.faces.len());
        out.push_str("property list uchar int vertex_indices\nend_header\n");
        for (k, (v, n)) in self.vertices.iter().zip(&self.normals).enumerate() {
            let _ = write!(out, "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z, n.x, n.y, n.z);
            for (_, c) in &self.channels {
                let _ = write!(out, " {:.16e}", c[k]);
            }
            out.push('\n');
        }
        for f in &self.faces {
            let _ = write!(out, "{}", f.len());
            for k in f {
                let _ = write!(out, " {k}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_obj(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_obj())?;
        Ok(())
    }

    pub fn write_ply(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ply())?;
        Ok(())
    }
}
