use minsurf::grid::{interior_max, Axis, Field, Grid, Scheme};
use minsurf::surfcalc::{GridContour, SurfacePatch};
use minsurf::weierstrass::{Domain, HolomorphicDatum, WeierstrassSurface};
use minsurf::{Error, Vec3};

fn grid(s: (f64, f64), t: (f64, f64), n: usize) -> Grid {
    Grid::new(Axis::new(s.0, s.1, n).unwrap(), Axis::new(t.0, t.1, n).unwrap())
}

fn flat(n: usize) -> SurfacePatch {
    SurfacePatch::from_fn(grid((-1.0, 1.0), (-1.0, 1.0), n), Scheme::Central, |u, v| Vec3::new(u, v, 0.0)).unwrap()
}

fn sphere(radius: f64, n: usize, scheme: Scheme) -> SurfacePatch {
    SurfacePatch::from_fn(grid((0.4, 2.7), (-1.0, 1.0), n), scheme, move |th, ph| {
        Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()) * radius
    })
    .unwrap()
}

fn max_norm(patch: &SurfacePatch, f: &Field<Vec3>) -> f64 {
    interior_max(patch.grid(), f, patch.margin(), |_, _, x| Some(x.norm()))
}

#[test]
fn flat_gradient_and_laplacian() {
    let p = flat(21);
    let g = *p.grid();
    let constant = g.sample(|_, _| 3.0);
    assert!(max_norm(&p, &p.gradient(&constant).unwrap()) < 1e-12);

    let u = g.sample(|u, _| u);
    let grad = p.gradient(&u).unwrap();
    assert!(interior_max(&g, &grad, 0, |_, _, x| Some((x - Vec3::x()).norm())) < 1e-12);

    let saddle = g.sample(|u, v| u * u - v * v);
    assert!(interior_max(&g, &p.laplacian(&saddle).unwrap(), 2, |_, _, x| Some(x.abs())) < 1e-10);
    let bowl = g.sample(|u, _| u * u);
    assert!(interior_max(&g, &p.laplacian(&bowl).unwrap(), 2, |_, _, x| Some((x - 2.0).abs())) < 1e-10);
}

#[test]
fn flat_shape_operator_and_curl() {
    let p = flat(17);
    for c in p.shape_operator().values() {
        assert!(c.shape_operator.norm() < 1e-12);
    }
    let g = *p.grid();
    let grad = p.gradient(&g.sample(|u, v| u * v + v * v * v)).unwrap();
    assert!(max_norm(&p, &p.curl(&grad).unwrap()) < 1e-10);
}

#[test]
fn flat_circulation_is_exact() {
    let p = flat(21);
    let g = *p.grid();
    let contour = GridContour::rectangle(2, 18, 3, 15).unwrap();
    let constant = g.sample(|_, _| Vec3::new(0.3, -1.2, 0.7));
    assert!(p.circulation_check(&constant, &contour).unwrap() < 1e-10);
    let grad = p.gradient(&g.sample(|u, v| u * u - 3.0 * v)).unwrap();
    assert!(p.circulation_check(&grad, &contour).unwrap() < 1e-10);
}

#[test]
fn open_contours_are_rejected() {
    assert!(matches!(GridContour::from_nodes(vec![(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]), Err(Error::InvalidInput(_))));
}

#[test]
fn sphere_gradient_and_curvature() {
    let radius = 2.0;
    let p = sphere(radius, 129, Scheme::Richardson);
    let g = *p.grid();
    // φ = z has ∇ₛφ = P(ν) e3
    let z = p.positions().map(|r| r.z);
    let grad = p.gradient(&z).unwrap();
    let err = interior_max(&g, &grad, p.margin(), |i, j, x| {
        let nu = p.normals().at(i, j);
        Some((x - (Vec3::z() - nu * nu.z)).norm())
    });
    assert!(err < 1e-8, "{err}");

    let curvature = p.shape_operator();
    let err = interior_max(&g, &curvature, 2 * p.margin(), |_, _, c| {
        Some((c.kappa1 - 1.0 / radius).abs().max((c.kappa2 - 1.0 / radius).abs()))
    });
    assert!(err < 1e-8, "{err}");
    for (i, j) in g.interior(2 * p.margin()) {
        assert!(curvature.at(i, j).umbilic);
    }
}

#[test]
fn sphere_gradient_at_equator() {
    // node (64, 64) of a 129² grid is θ = π/2, φ = 0: the point (1, 0, 0)
    let p = SurfacePatch::from_fn(grid((1.0, 2.141_592_653_589_793), (-0.5, 0.5), 129), Scheme::Richardson, |th, ph| {
        Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos())
    })
    .unwrap();
    assert!((p.positions().at(64, 64) - Vec3::x()).norm() < 1e-15);
    let grad = p.gradient(&p.positions().map(|r| r.z)).unwrap();
    assert!((grad.at(64, 64) - Vec3::z()).norm() < 1e-9);
}

#[test]
fn sphere_curl_of_a_gradient() {
    // curlₛ∇ₛφ = ν × (∇ₛν)∇ₛφ, here (1/R) ν × ∇ₛφ
    let p = sphere(1.5, 129, Scheme::Richardson);
    let grad = p.gradient(&p.positions().map(|r| r.z)).unwrap();
    let curl = p.curl(&grad).unwrap();
    let shape = p.shape_operator();
    let err = interior_max(p.grid(), &curl, 2 * p.margin(), |i, j, c| {
        let expected = p.normals().at(i, j).cross(&(shape.at(i, j).shape_operator * grad.at(i, j)));
        Some((c - expected).norm())
    });
    assert!(err < 1e-7, "{err}");
}

#[test]
fn catenoid_connector_matches_closed_form() {
    // r = (cosh z cos θ, cosh z sin θ, z): along the parallels the meridian
    // direction turns at rate tanh z / cosh z
    let p = SurfacePatch::from_fn(grid((0.2, 1.0), (-1.0, 1.0), 129), Scheme::Richardson, |z, th| {
        Vec3::new(z.cosh() * th.cos(), z.cosh() * th.sin(), z)
    })
    .unwrap();
    let curvature = p.shape_operator();
    let connector = p.connector(&curvature).unwrap();
    let g = *p.grid();
    let m = 3 * p.margin();
    let err = interior_max(&g, &connector.c, m, |i, j, c| {
        let (z, _) = g.coords(i, j);
        Some((c.norm() - z.tanh() / z.cosh()).abs())
    });
    assert!(err < 1e-6, "{err}");
    let dual = interior_max(&g, &connector.c, m, |i, j, c| Some((c - connector.c_alt.at(i, j)).norm()));
    assert!(dual < 1e-6, "{dual}");
}

#[test]
fn flat_plane_connector_vanishes() {
    let p = flat(17);
    let g = *p.grid();
    let n1 = g.sample(|_, _| Vec3::x());
    let n2 = g.sample(|_, _| Vec3::y());
    let c = p.connector_from_directions(n1, n2).unwrap();
    assert!(max_norm(&p, &c.c) < 1e-14);
}

#[test]
fn enneper_curvature_at_half() {
    // node (64, 64) of a 129² grid over [0.4, 0.6] × [−0.1, 0.1] is w = 0.5
    let domain = Domain::rectangle(0.4, 0.6, -0.1, 0.1).unwrap();
    let s = WeierstrassSurface::integrate(&HolomorphicDatum::enneper(), &domain, &domain.grid(129, 129).unwrap()).unwrap();
    let c = s.analytic_patch(Scheme::Richardson).unwrap().shape_operator().at(64, 64);
    assert!(c.mean.abs() < 1e-8, "{}", c.mean);
    assert!((c.gauss + 6.5536).abs() < 1e-6, "{}", c.gauss);
}

#[test]
fn harmonic_rotated_gradient_is_curl_free_on_enneper() {
    let domain = Domain::rectangle(0.5, 1.0, -0.25, 0.25).unwrap();
    let s = WeierstrassSurface::integrate(&HolomorphicDatum::enneper(), &domain, &domain.grid(129, 129).unwrap()).unwrap();
    let p = s.analytic_patch(Scheme::Richardson).unwrap();
    let grad = p.gradient(&s.points().map(|w| w.rho.ln())).unwrap();
    let h = p.normals().zip_map(&grad, |nu, g| nu.cross(g));
    let curl = p.curl(&h).unwrap();
    let err = interior_max(p.grid(), &curl, 2 * p.margin(), |i, j, c| Some(c.dot(&p.normals().at(i, j)).abs()));
    assert!(err < 1e-6, "{err}");
}

#[test]
fn degenerate_patches_are_rejected() {
    let g = grid((0.0, 1.0), (0.0, 1.0), 9);
    let line = SurfacePatch::from_fn(g, Scheme::Central, |u, _| Vec3::new(u, 0.0, 0.0));
    assert!(matches!(line, Err(Error::SingularPoint { .. })));
}
