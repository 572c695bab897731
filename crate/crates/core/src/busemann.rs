//! Busemann functions along geodesic rays.
//!
//! For a unit-speed ray γ starting at `z` and passing through `x`, the
//! Busemann function is `b(y) = lim_{t→∞} [d(y, γ(t)) − t]`. On the two flat
//! manifolds here it has the closed form
//!
//! ```text
//! b(y) = ⟨u_x − u_z, u_z − u_y⟩ / ‖u_x − u_z‖
//! ```
//!
//! in chart coordinates `u = chart(·)` (componentwise `ln` on the log
//! orthant). Working in the chart avoids catastrophic cancellation for
//! nearby points. The pairing `d(x,z)·b(y)` equals
//! `−⟨log_z(x), log_z(y)⟩` exactly on zero-curvature manifolds, which is the
//! identity the resolvents and the verification suites lean on.

use std::fmt;

use crate::manifold::{GeometryError, ManifoldKind, Point};
use crate::numeric::{dot, norm};

/// Rays whose endpoints are closer than this are rejected as degenerate.
pub const DEGENERATE_RAY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum BusemannError {
    /// Origin and through-point coincide; the ray direction is undefined.
    DegenerateRay,
    /// Finite-ray parameter must be strictly positive.
    NonPositiveParameter(f64),
    Geometry(GeometryError),
}

impl fmt::Display for BusemannError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BusemannError::DegenerateRay => write!(f, "degenerate ray: origin equals through-point"),
            BusemannError::NonPositiveParameter(t) => {
                write!(f, "ray parameter must be positive, got {t}")
            }
            BusemannError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BusemannError {}

impl From<GeometryError> for BusemannError {
    fn from(e: GeometryError) -> Self {
        BusemannError::Geometry(e)
    }
}

/// The unit-speed geodesic ray from `origin` through `through`.
#[derive(Debug, Clone)]
pub struct GeodesicRay {
    manifold: ManifoldKind,
    origin: Point,
    through: Point,
    /// Chart coordinates of the origin.
    chart_origin: Vec<f64>,
    /// Unit direction in chart coordinates.
    direction: Vec<f64>,
    /// Chart distance from origin to through-point.
    span: f64,
}

impl GeodesicRay {
    pub fn new(m: ManifoldKind, origin: Point, through: Point) -> Result<Self, BusemannError> {
        let uz = m.chart(&origin)?;
        let ux = m.chart(&through)?;
        let diff: Vec<f64> = ux.iter().zip(&uz).map(|(a, b)| a - b).collect();
        let span = norm(&diff);
        if span < DEGENERATE_RAY_TOL {
            return Err(BusemannError::DegenerateRay);
        }
        let direction = diff.iter().map(|d| d / span).collect();
        Ok(GeodesicRay {
            manifold: m,
            origin,
            through,
            chart_origin: uz,
            direction,
            span,
        })
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn through(&self) -> &Point {
        &self.through
    }

    /// Arc-length distance between the defining points.
    pub fn span(&self) -> f64 {
        self.span
    }

    /// The ray point at arc length `t ≥ 0`.
    pub fn point_at(&self, t: f64) -> Result<Point, BusemannError> {
        if !t.is_finite() || t < 0.0 {
            return Err(BusemannError::NonPositiveParameter(t));
        }
        let u: Vec<f64> = self
            .chart_origin
            .iter()
            .zip(&self.direction)
            .map(|(z, d)| z + t * d)
            .collect();
        Ok(self.manifold.unchart(&u)?)
    }

    /// Closed-form Busemann value at `y`.
    ///
    /// Satisfies `b(origin) = 0`, `b(γ(t)) = −t`, and is 1-Lipschitz in `y`.
    pub fn busemann_closed(&self, y: &Point) -> Result<f64, BusemannError> {
        let uy = self.manifold.chart(y)?;
        let rel: Vec<f64> = self
            .chart_origin
            .iter()
            .zip(&uy)
            .map(|(z, w)| z - w)
            .collect();
        Ok(dot(&self.direction, &rel))
    }

    /// Finite-ray approximation `d(y, γ(t)) − t` for `t > 0`.
    ///
    /// Nonincreasing in `t` and converges to [`GeodesicRay::busemann_closed`]
    /// from above, with error at most `d²(origin, y) / (2t)`.
    pub fn busemann_finite_t(&self, y: &Point, t: f64) -> Result<f64, BusemannError> {
        if !t.is_finite() || t <= 0.0 {
            return Err(BusemannError::NonPositiveParameter(t));
        }
        let gamma_t = self.point_at(t)?;
        Ok(self.manifold.dist(y, &gamma_t)? - t)
    }
}

/// The pairing `d(x, z) · b_{γ_{z,x}}(y)`.
///
/// On the two implemented flat manifolds this equals
/// `−⟨log_z(x), log_z(y)⟩`; in general it only dominates that value.
pub fn busemann_pairing(
    m: ManifoldKind,
    z: &Point,
    x: &Point,
    y: &Point,
) -> Result<f64, BusemannError> {
    let ray = GeodesicRay::new(m, z.clone(), x.clone())?;
    Ok(ray.span() * ray.busemann_closed(y)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    fn pt(m: &ManifoldKind, coords: &[f64]) -> Point {
        m.point(coords.to_vec()).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn closed_form_values() {
        let m = ManifoldKind::LogOrthant(2);
        let z = pt(&m, &[1.0, 1.0]);
        let x = pt(&m, &[E, 1.0]);
        let ray = GeodesicRay::new(m, z.clone(), x.clone()).unwrap();

        // At the ray origin.
        assert_eq!(ray.busemann_closed(&z).unwrap(), 0.0);
        // Along the ray: b(γ(t)) = −t with t = d(z, x) = 1 here.
        assert_close(ray.busemann_closed(&x).unwrap(), -1.0, 1e-12);
        // Orthogonal chart direction.
        let y = pt(&m, &[1.0, E]);
        assert_close(ray.busemann_closed(&y).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn finite_t_values_and_monotonicity() {
        let m = ManifoldKind::LogOrthant(2);
        let z = pt(&m, &[1.0, 1.0]);
        let x = pt(&m, &[E, 1.0]);
        let ray = GeodesicRay::new(m, z.clone(), x).unwrap();

        // y = z: d(z, γ(t)) − t = 0 for every t.
        for t in [0.5, 3.0, 50.0] {
            assert_close(ray.busemann_finite_t(&z, t).unwrap(), 0.0, 1e-12);
        }

        let y = pt(&m, &[1.0, E]);
        let b10 = ray.busemann_finite_t(&y, 10.0).unwrap();
        assert_close(b10, 101f64.sqrt() - 10.0, 1e-12);
        let b100 = ray.busemann_finite_t(&y, 100.0).unwrap();
        assert_close(b100, 10001f64.sqrt() - 100.0, 1e-12);
        assert!(b100 < b10);

        // Converges to the closed form from above.
        let limit = ray.busemann_closed(&y).unwrap();
        assert!(b100 >= limit);
        let d2 = ManifoldKind::LogOrthant(2).dist_sq(&z, &y).unwrap();
        assert!(b100 - limit <= d2 / 200.0 + 1e-9);
    }

    #[test]
    fn pairing_matches_log_inner_product() {
        let m = ManifoldKind::LogOrthant(2);
        let z = pt(&m, &[1.0, 1.0]);
        let x = pt(&m, &[E, 1.0]);
        let y = pt(&m, &[E, E]);
        let p = busemann_pairing(m, &z, &x, &y).unwrap();
        assert_close(p, -1.0, 1e-12);
        let lx = m.log_map(&z, &x).unwrap();
        let ly = m.log_map(&z, &y).unwrap();
        let ip = m.inner(&z, lx.vec(), ly.vec()).unwrap();
        assert_close(p, -ip, 1e-12);

        let m3 = ManifoldKind::LogOrthant(3);
        let z3 = pt(&m3, &[1.0, 1.0, 1.0]);
        let x3 = pt(&m3, &[E, 1.0, 1.0]);
        let y3 = pt(&m3, &[1.0, 1.0, E]);
        assert_close(busemann_pairing(m3, &z3, &x3, &y3).unwrap(), 0.0, 1e-12);

        // y = z gives zero on both sides.
        assert_eq!(busemann_pairing(m, &z, &x, &z).unwrap(), 0.0);
    }

    #[test]
    fn ray_normalization() {
        let m = ManifoldKind::LogOrthant(3);
        let z = pt(&m, &[2.0, 0.5, 1.0]);
        let x = pt(&m, &[3.0, 1.5, 0.25]);
        let ray = GeodesicRay::new(m, z, x).unwrap();
        for t in [0.1, 1.0, 7.5, 40.0] {
            let gamma_t = ray.point_at(t).unwrap();
            assert_close(ray.busemann_closed(&gamma_t).unwrap(), -t, 1e-10 * (1.0 + t));
        }
    }

    #[test]
    fn degenerate_ray_is_an_error() {
        let m = ManifoldKind::LogOrthant(2);
        let z = pt(&m, &[1.5, 2.5]);
        assert!(matches!(
            GeodesicRay::new(m, z.clone(), z.clone()),
            Err(BusemannError::DegenerateRay)
        ));
        let y = pt(&m, &[1.0, 1.0]);
        assert!(matches!(
            busemann_pairing(m, &z, &z, &y),
            Err(BusemannError::DegenerateRay)
        ));
    }

    #[test]
    fn euclidean_closed_form() {
        let m = ManifoldKind::Euclidean(2);
        let z = pt(&m, &[0.0, 0.0]);
        let x = pt(&m, &[2.0, 0.0]);
        let ray = GeodesicRay::new(m, z, x).unwrap();
        let y = pt(&m, &[3.0, 4.0]);
        // b(y) = ⟨x − z, z − y⟩ / ‖x − z‖ = (2·(−3)) / 2 = −3.
        assert_close(ray.busemann_closed(&y).unwrap(), -3.0, 1e-12);
    }
}
