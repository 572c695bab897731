//! Flat Hadamard-manifold primitives.
//!
//! Two zero-curvature manifolds are supported behind one interface:
//!
//! * [`ManifoldKind::LogOrthant`] — the positive orthant `R^N_{++}` with the
//!   metric `G(x) = diag(x_1^{-2}, …, x_N^{-2})`, so that
//!   `d(x, y) = (Σ_i ln²(x_i / y_i))^{1/2}`. The componentwise logarithm is a
//!   global isometry onto `R^N`, which yields closed forms for the
//!   exponential and logarithm maps.
//! * [`ManifoldKind::Euclidean`] — plain `R^N`, kept for cross-checking the
//!   zero-curvature identities.

use std::fmt;

use crate::numeric::kahan_sum;

/// Coordinates outside this open interval are rejected on the log orthant so
/// that componentwise logarithms stay far from overflow.
pub const LOG_ORTHANT_MIN: f64 = 1e-300;
/// Upper coordinate bound on the log orthant (exclusive).
pub const LOG_ORTHANT_MAX: f64 = 1e300;

/// Errors from geometric operations.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// A vector had the wrong length for the manifold.
    DimensionMismatch { expected: usize, actual: usize },
    /// A coordinate was nonpositive, non-finite, or outside the valid range.
    InvalidCoordinate { index: usize, value: f64 },
    /// A parameter (e.g. a geodesic time) was not finite.
    InvalidParameter { name: &'static str, value: f64 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            GeometryError::InvalidCoordinate { index, value } => {
                write!(f, "invalid coordinate at index {index}: {value}")
            }
            GeometryError::InvalidParameter { name, value } => {
                write!(f, "invalid parameter {name}: {value}")
            }
        }
    }
}

impl std::error::Error for GeometryError {}

/// A point on a manifold, stored as a coordinate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Builds a point validated against `m`.
    pub fn new(m: &ManifoldKind, coords: Vec<f64>) -> Result<Self, GeometryError> {
        m.check_coords(&coords)?;
        Ok(Point { coords })
    }

    /// Builds a point without manifold validation. Operations re-validate
    /// dimensions, so this is only a footgun for range violations.
    pub fn from_coords(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// A tangent vector together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    base: Point,
    vec: Vec<f64>,
}

impl Tangent {
    pub fn new(base: Point, vec: Vec<f64>) -> Result<Self, GeometryError> {
        if base.len() != vec.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: base.len(),
                actual: vec.len(),
            });
        }
        if let Some(i) = vec.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidCoordinate {
                index: i,
                value: vec[i],
            });
        }
        Ok(Tangent { base, vec })
    }

    pub fn zero(base: Point) -> Self {
        let n = base.len();
        Tangent {
            base,
            vec: vec![0.0; n],
        }
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }
}

/// The supported manifolds, each parametrized by its dimension `N ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    /// Positive orthant with the `diag(x_i^{-2})` metric.
    LogOrthant(usize),
    /// Flat `R^N` with the standard inner product.
    Euclidean(usize),
}

impl ManifoldKind {
    pub fn dim(&self) -> usize {
        match *self {
            ManifoldKind::LogOrthant(n) | ManifoldKind::Euclidean(n) => n,
        }
    }

    fn check_coords(&self, coords: &[f64]) -> Result<(), GeometryError> {
        let n = self.dim();
        if n == 0 {
            return Err(GeometryError::DimensionMismatch {
                expected: 1,
                actual: 0,
            });
        }
        if coords.len() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                actual: coords.len(),
            });
        }
        for (i, &c) in coords.iter().enumerate() {
            let ok = match self {
                ManifoldKind::LogOrthant(_) => {
                    c.is_finite() && c > LOG_ORTHANT_MIN && c < LOG_ORTHANT_MAX
                }
                ManifoldKind::Euclidean(_) => c.is_finite(),
            };
            if !ok {
                return Err(GeometryError::InvalidCoordinate { index: i, value: c });
            }
        }
        Ok(())
    }

    /// Validates that `p` is a well-formed point of this manifold.
    pub fn check_point(&self, p: &Point) -> Result<(), GeometryError> {
        self.check_coords(&p.coords)
    }

    /// Validated point constructor; see [`Point::new`].
    pub fn point(&self, coords: Vec<f64>) -> Result<Point, GeometryError> {
        Point::new(self, coords)
    }

    /// Riemannian distance.
    ///
    /// On the log orthant: `(Σ_i ln²(x_i / y_i))^{1/2}`. Symmetric, and zero
    /// exactly when the coordinate logarithms coincide.
    pub fn dist(&self, x: &Point, y: &Point) -> Result<f64, GeometryError> {
        Ok(self.dist_sq(x, y)?.sqrt())
    }

    /// Squared Riemannian distance, accumulated with compensated summation.
    pub fn dist_sq(&self, x: &Point, y: &Point) -> Result<f64, GeometryError> {
        self.check_point(x)?;
        self.check_point(y)?;
        let terms = x.coords.iter().zip(&y.coords).map(|(&a, &b)| match self {
            ManifoldKind::LogOrthant(_) => {
                let t = (a / b).ln();
                t * t
            }
            ManifoldKind::Euclidean(_) => {
                let t = a - b;
                t * t
            }
        });
        Ok(kahan_sum(terms))
    }

    /// Inverse exponential map `log_x(y)`.
    ///
    /// On the log orthant component `i` is `x_i · ln(y_i / x_i)`; the norm of
    /// the result under [`ManifoldKind::inner`] equals `dist(x, y)`.
    pub fn log_map(&self, x: &Point, y: &Point) -> Result<Tangent, GeometryError> {
        self.check_point(x)?;
        self.check_point(y)?;
        let vec = x
            .coords
            .iter()
            .zip(&y.coords)
            .map(|(&a, &b)| match self {
                ManifoldKind::LogOrthant(_) => a * (b / a).ln(),
                ManifoldKind::Euclidean(_) => b - a,
            })
            .collect();
        Ok(Tangent {
            base: x.clone(),
            vec,
        })
    }

    /// Exponential map: follows the geodesic from the tangent's base with the
    /// tangent's velocity for unit time.
    ///
    /// On the log orthant component `i` is `x_i · e^{v_i / x_i}`.
    pub fn exp_map(&self, v: &Tangent) -> Result<Point, GeometryError> {
        self.check_point(&v.base)?;
        if v.vec.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                actual: v.vec.len(),
            });
        }
        let coords: Vec<f64> = v
            .base
            .coords
            .iter()
            .zip(&v.vec)
            .map(|(&x, &t)| match self {
                ManifoldKind::LogOrthant(_) => x * (t / x).exp(),
                ManifoldKind::Euclidean(_) => x + t,
            })
            .collect();
        self.point(coords)
    }

    /// Riemannian inner product of two tangent vectors at `x`.
    ///
    /// On the log orthant: `Σ_i u_i v_i / x_i²`.
    pub fn inner(&self, x: &Point, u: &[f64], v: &[f64]) -> Result<f64, GeometryError> {
        self.check_point(x)?;
        let n = self.dim();
        if u.len() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                actual: u.len(),
            });
        }
        if v.len() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                actual: v.len(),
            });
        }
        let terms = (0..n).map(|i| match self {
            ManifoldKind::LogOrthant(_) => u[i] * v[i] / (x.coords[i] * x.coords[i]),
            ManifoldKind::Euclidean(_) => u[i] * v[i],
        });
        Ok(kahan_sum(terms))
    }

    /// Point on the minimal geodesic through `x` and `y`, parametrized so
    /// that `t = 0` gives `x` and `t = 1` gives `y`. Values of `t` outside
    /// `[0, 1]` extrapolate the geodesic (used for Busemann rays).
    pub fn geodesic(&self, x: &Point, y: &Point, t: f64) -> Result<Point, GeometryError> {
        self.check_point(x)?;
        self.check_point(y)?;
        if !t.is_finite() {
            return Err(GeometryError::InvalidParameter { name: "t", value: t });
        }
        let coords: Vec<f64> = x
            .coords
            .iter()
            .zip(&y.coords)
            .map(|(&a, &b)| match self {
                // Log-linear interpolation: exp((1-t) ln a + t ln b).
                ManifoldKind::LogOrthant(_) => a * (t * (b / a).ln()).exp(),
                ManifoldKind::Euclidean(_) => a + t * (b - a),
            })
            .collect();
        self.point(coords)
    }

    /// Componentwise chart to flat coordinates: `ln` on the log orthant, the
    /// identity on Euclidean space. The chart is a global isometry.
    pub fn chart(&self, p: &Point) -> Result<Vec<f64>, GeometryError> {
        self.check_point(p)?;
        Ok(match self {
            ManifoldKind::LogOrthant(_) => p.coords.iter().map(|c| c.ln()).collect(),
            ManifoldKind::Euclidean(_) => p.coords.clone(),
        })
    }

    /// Inverse of [`ManifoldKind::chart`].
    pub fn unchart(&self, u: &[f64]) -> Result<Point, GeometryError> {
        let coords = match self {
            ManifoldKind::LogOrthant(_) => u.iter().map(|c| c.exp()).collect(),
            ManifoldKind::Euclidean(_) => u.to_vec(),
        };
        self.point(coords)
    }

}
