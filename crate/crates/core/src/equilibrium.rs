//! Log-affine bifunctions, their regularized resolvents, and the proximal
//! step used by the extragradient iterations.
//!
//! A log-affine bifunction on the log orthant is
//!
//! ```text
//! F(x, y) = ⟨A·u, w − u⟩,   u = ln x,  w = ln y  (componentwise),
//! ```
//!
//! for a square matrix `A`. Both benchmark problems have this shape: the
//! `example51` problem is `A = 3ccᵀ` with `c = (1, 1, −1)` and the
//! `example52` problem is `A = I`. Because `F` is affine in the chart
//! coordinate of its second argument, both regularized resolvents reduce to
//! linear solves and no inner iteration is needed:
//!
//! * Busemann-regularized: the defining inequality
//!   `λF(z, y) + d(z, x)·b_{γ_{z,x}}(y) ≥ 0 ∀y` holds exactly when
//!   `(I + λA)·v = u_x` with `v = ln z`;
//! * squared-distance-regularized: `λF(z, y) + d²(y, x) − d²(z, x) ≥ 0 ∀y`
//!   holds exactly when `(I + (λ/2)A)·v = u_x`, i.e. it is the Busemann
//!   resolvent at parameter `λ/2`.
//!
//! Rank-one systems are solved by the Sherman–Morrison shortcut and
//! cross-checked against the dense factorization in the tests.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::manifold::{GeometryError, ManifoldKind, Point};
use crate::numeric::{dot, kahan_sum};

#[derive(Debug, Clone, PartialEq)]
pub enum EquilibriumError {
    /// Regularization parameter must be strictly positive.
    NonPositiveLambda(f64),
    /// The shifted system `I + λA` was numerically singular.
    SingularSystem,
    /// The paper-literal variant was requested for a bifunction other than
    /// the `example51` problem.
    VariantMismatch,
    /// Probe trial counts must be at least one.
    NoTrials,
    Geometry(GeometryError),
}

impl fmt::Display for EquilibriumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquilibriumError::NonPositiveLambda(l) => {
                write!(f, "regularization parameter must be positive, got {l}")
            }
            EquilibriumError::SingularSystem => write!(f, "shifted linear system is singular"),
            EquilibriumError::VariantMismatch => write!(
                f,
                "paper-literal resolvent is only defined for the example51 bifunction"
            ),
            EquilibriumError::NoTrials => write!(f, "probe needs at least one trial"),
            EquilibriumError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EquilibriumError {}

impl From<GeometryError> for EquilibriumError {
    fn from(e: GeometryError) -> Self {
        EquilibriumError::Geometry(e)
    }
}

/// Structure of the coefficient matrix, kept explicit so the common
/// benchmark shapes get O(N) solves instead of dense factorizations.
#[derive(Debug, Clone, PartialEq)]
enum CoefficientForm {
    Identity,
    RankOne { alpha: f64, direction: Vec<f64> },
    Dense(DMatrix<f64>),
}

/// Which closed form the resolvents use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventVariant {
    /// Solve the defining inequality exactly via the shifted linear system.
    Characterization,
    /// The alternative closed form shipped for the `example51` problem. It
    /// disagrees with the characterization: its unique fixed point is
    /// `(1, 1, 1)` even though the problem's solution set is the whole
    /// surface `x₁x₂ = x₃`. Kept selectable because its iteration counts are
    /// the ones the benchmark tables are calibrated against.
    PaperLiteralEx51,
}

/// Report from a sampling-based monotonicity probe.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    /// Trials sampled.
    pub trials: usize,
    /// Trials that satisfied the probe's precondition (always `trials` for
    /// the plain monotonicity probe).
    pub applicable: usize,
    /// Largest observed value of the probed expression.
    pub max_value: f64,
    /// Pair realizing `max_value`, if any trial was applicable.
    pub witness: Option<(Point, Point)>,
    /// Tolerance the verdict was taken at.
    pub tol: f64,
    pub pass: bool,
}

/// A bifunction `F(x, y) = ⟨A·ln x, ln y − ln x⟩` on the log orthant.
#[derive(Debug, Clone)]
pub struct LogAffineBifunction {
    dim: usize,
    form: CoefficientForm,
    example51: bool,
}

impl LogAffineBifunction {
    /// The rank-one three-dimensional benchmark problem:
    /// `F(x, y) = 3·ln(x₁x₂/x₃)·(ln(y₁/x₁) + ln(y₂/x₂) − ln(y₃/x₃))`,
    /// i.e. `A = 3ccᵀ` with `c = (1, 1, −1)`.
    pub fn example51() -> Self {
        LogAffineBifunction {
            dim: 3,
            form: CoefficientForm::RankOne {
                alpha: 3.0,
                direction: vec![1.0, 1.0, -1.0],
            },
            example51: true,
        }
    }

    /// The separable benchmark problem
    /// `F(x, y) = Σ_i ln x_i · ln(y_i/x_i)`, i.e. `A = I`.
    pub fn example52(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        LogAffineBifunction {
            dim,
            form: CoefficientForm::Identity,
            example51: false,
        }
    }

    /// A general coefficient matrix, row-major.
    pub fn from_matrix(dim: usize, rows: Vec<f64>) -> Result<Self, EquilibriumError> {
        if dim == 0 || rows.len() != dim * dim {
            return Err(EquilibriumError::Geometry(GeometryError::DimensionMismatch {
                expected: dim * dim,
                actual: rows.len(),
            }));
        }
        if let Some(i) = rows.iter().position(|v| !v.is_finite()) {
            return Err(EquilibriumError::Geometry(GeometryError::InvalidCoordinate {
                index: i,
                value: rows[i],
            }));
        }
        Ok(LogAffineBifunction {
            dim,
            form: CoefficientForm::Dense(DMatrix::from_row_slice(dim, dim, &rows)),
            example51: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether this is the rank-one `example51` instance (the only one the
    /// paper-literal variant is defined for).
    pub fn is_example51(&self) -> bool {
        self.example51
    }

    /// The manifold this bifunction lives on.
    pub fn manifold(&self) -> ManifoldKind {
        ManifoldKind::LogOrthant(self.dim)
    }

    /// `A·u`.
    pub fn apply_matrix(&self, u: &[f64]) -> Vec<f64> {
        match &self.form {
            CoefficientForm::Identity => u.to_vec(),
            CoefficientForm::RankOne { alpha, direction } => {
                let s = alpha * dot(direction, u);
                direction.iter().map(|c| c * s).collect()
            }
            CoefficientForm::Dense(a) => {
                let v = a * DVector::from_column_slice(u);
                v.as_slice().to_vec()
            }
        }
    }

    /// `F` in chart coordinates: `⟨A·u, w − u⟩`.
    pub fn eval_log(&self, u: &[f64], w: &[f64]) -> f64 {
        let au = self.apply_matrix(u);
        kahan_sum(au.iter().zip(u.iter().zip(w)).map(|(a, (ui, wi))| a * (wi - ui)))
    }

    /// `F(x, y)`; zero when `x == y`.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64, EquilibriumError> {
        let m = self.manifold();
        let u = m.chart(x)?;
        let w = m.chart(y)?;
        Ok(self.eval_log(&u, &w))
    }

    /// Solves `(I + μA)·v = rhs` for `μ > 0`.
    fn solve_shifted(&self, mu: f64, rhs: &[f64]) -> Result<Vec<f64>, EquilibriumError> {
        match &self.form {
            CoefficientForm::Identity => Ok(rhs.iter().map(|r| r / (1.0 + mu)).collect()),
            CoefficientForm::RankOne { alpha, direction } => {
                // Sherman–Morrison for I + μα·ccᵀ.
                let c2 = dot(direction, direction);
                let denom = 1.0 + mu * alpha * c2;
                if denom.abs() < 1e-300 {
                    return Err(EquilibriumError::SingularSystem);
                }
                let s = mu * alpha * dot(direction, rhs) / denom;
                Ok(rhs
                    .iter()
                    .zip(direction)
                    .map(|(r, c)| r - s * c)
                    .collect())
            }
            CoefficientForm::Dense(a) => {
                let shifted = DMatrix::identity(self.dim, self.dim) + a * mu;
                let rhs_v = DVector::from_column_slice(rhs);
                match shifted.lu().solve(&rhs_v) {
                    Some(v) => Ok(v.as_slice().to_vec()),
                    None => Err(EquilibriumError::SingularSystem),
                }
            }
        }
    }

    fn check_lambda(lambda: f64) -> Result<(), EquilibriumError> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(EquilibriumError::NonPositiveLambda(lambda));
        }
        Ok(())
    }

    /// Chart-coordinate kernel of the Busemann resolvent (`effective`
    /// regularization parameter already applied).
    pub fn resolvent_log(
        &self,
        lambda: f64,
        u: &[f64],
        variant: ResolventVariant,
    ) -> Result<Vec<f64>, EquilibriumError> {
        Self::check_lambda(lambda)?;
        match variant {
            ResolventVariant::Characterization => self.solve_shifted(lambda, u),
            ResolventVariant::PaperLiteralEx51 => {
                if !self.example51 {
                    return Err(EquilibriumError::VariantMismatch);
                }
                Ok(literal_resolvent_log(lambda, u))
            }
        }
    }

    /// Busemann-regularized resolvent: the unique `z` with
    /// `λF(z, y) + d(z, x)·b_{γ_{z,x}}(y) ≥ 0` for all `y`.
    pub fn resolvent_busemann(
        &self,
        lambda: f64,
        x: &Point,
        variant: ResolventVariant,
    ) -> Result<Point, EquilibriumError> {
        let m = self.manifold();
        let u = m.chart(x)?;
        let v = self.resolvent_log(lambda, &u, variant)?;
        Ok(m.unchart(&v)?)
    }

    /// Squared-distance-regularized resolvent: the unique `z` with
    /// `λF(z, y) + (d²(y, x) − d²(z, x)) ≥ 0` for all `y`.
    ///
    /// For log-affine bifunctions this is exactly the Busemann resolvent at
    /// parameter `λ/2`, for both variants.
    pub fn resolvent_distsq(
        &self,
        lambda: f64,
        x: &Point,
        variant: ResolventVariant,
    ) -> Result<Point, EquilibriumError> {
        Self::check_lambda(lambda)?;
        self.resolvent_busemann(lambda / 2.0, x, variant)
    }

    /// Chart-coordinate proximal kernel: minimizer of
    /// `⟨A·v, w − v⟩ + ‖w − u‖²/(2λ)` over `w`, namely `w = u − λ·A·v`.
    pub fn prox_log(&self, lambda: f64, u: &[f64], v: &[f64]) -> Result<Vec<f64>, EquilibriumError> {
        Self::check_lambda(lambda)?;
        let av = self.apply_matrix(v);
        Ok(u.iter().zip(&av).map(|(ui, a)| ui - lambda * a).collect())
    }

    /// Proximal step `argmin_y { F(anchor, y) + d²(center, y)/(2λ) }`.
    pub fn prox_step(
        &self,
        lambda: f64,
        center: &Point,
        anchor: &Point,
    ) -> Result<Point, EquilibriumError> {
        let m = self.manifold();
        let u = m.chart(center)?;
        let v = m.chart(anchor)?;
        let w = self.prox_log(lambda, &u, &v)?;
        Ok(m.unchart(&w)?)
    }

    /// Samples point pairs and reports the largest observed
    /// `F(x, y) + F(y, x)`; monotone bifunctions keep it nonpositive.
    pub fn probe_monotone(
        &self,
        mut sampler: impl FnMut() -> Point,
        trials: usize,
    ) -> Result<ProbeReport, EquilibriumError> {
        if trials == 0 {
            return Err(EquilibriumError::NoTrials);
        }
        let tol = 1e-12;
        let mut max_value = f64::NEG_INFINITY;
        let mut witness = None;
        for _ in 0..trials {
            let x = sampler();
            let y = sampler();
            let s = self.eval(&x, &y)? + self.eval(&y, &x)?;
            if s > max_value {
                max_value = s;
                witness = Some((x, y));
            }
        }
        Ok(ProbeReport {
            trials,
            applicable: trials,
            max_value,
            witness,
            tol,
            pass: max_value <= tol,
        })
    }

    /// Over sampled pairs with `F(x, y) ≥ 0`, reports the largest
    /// `F(y, x) + β·d²(x, y)`; β-strong pseudomonotonicity keeps it
    /// nonpositive.
    pub fn probe_strong_pseudomonotone(
        &self,
        beta: f64,
        mut sampler: impl FnMut() -> Point,
        trials: usize,
    ) -> Result<ProbeReport, EquilibriumError> {
        if trials == 0 {
            return Err(EquilibriumError::NoTrials);
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(EquilibriumError::NonPositiveLambda(beta));
        }
        let m = self.manifold();
        let tol = 1e-12;
        let mut max_value = f64::NEG_INFINITY;
        let mut witness = None;
        let mut applicable = 0;
        for _ in 0..trials {
            let x = sampler();
            let y = sampler();
            if self.eval(&x, &y)? < 0.0 {
                continue;
            }
            applicable += 1;
            let s = self.eval(&y, &x)? + beta * m.dist_sq(&x, &y)?;
            if s > max_value {
                max_value = s;
                witness = Some((x, y));
            }
        }
        let max_value = if applicable == 0 { 0.0 } else { max_value };
        Ok(ProbeReport {
            trials,
            applicable,
            max_value,
            witness,
            tol,
            pass: max_value <= tol,
        })
    }

    /// Smallest eigenvalue of the symmetric part of `A`.
    pub fn symmetric_part_min_eigenvalue(&self) -> f64 {
        match &self.form {
            CoefficientForm::Identity => 1.0,
            CoefficientForm::RankOne { alpha, direction } => {
                let c2 = dot(direction, direction);
                let spike = alpha * c2;
                if self.dim == 1 {
                    spike
                } else {
                    spike.min(0.0)
                }
            }
            CoefficientForm::Dense(a) => {
                let sym = (a + a.transpose()) * 0.5;
                sym.symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Strong-monotonicity modulus: the smallest eigenvalue of the symmetric
    /// part when it is positive.
    pub fn strong_monotonicity_modulus(&self) -> Option<f64> {
        let lam = self.symmetric_part_min_eigenvalue();
        (lam > 0.0).then_some(lam)
    }

    /// Whether `F(x, y) + F(y, x) ≤ 0` holds identically, i.e. whether the
    /// symmetric part of `A` is positive semidefinite.
    pub fn is_monotone(&self) -> bool {
        self.symmetric_part_min_eigenvalue() >= -1e-12
    }

    /// For the structured forms, the equilibrium point nearest to `x0` in
    /// chart coordinates — which is also the limit of the characterization
    /// iterations started at `x0`. `None` for dense matrices.
    pub fn nearest_solution(&self, x0: &Point) -> Result<Option<Point>, EquilibriumError> {
        let m = self.manifold();
        let u = m.chart(x0)?;
        let proj = match &self.form {
            CoefficientForm::Identity => vec![0.0; self.dim],
            CoefficientForm::RankOne { direction, .. } => {
                let c2 = dot(direction, direction);
                let s = dot(direction, &u) / c2;
                u.iter().zip(direction).map(|(ui, c)| ui - s * c).collect()
            }
            CoefficientForm::Dense(_) => return Ok(None),
        };
        Ok(Some(m.unchart(&proj)?))
    }
}

/// The alternative closed form for the `example51` resolvent, rewritten in
/// chart coordinates:
///
/// ```text
/// z = ( (x₁ x₂^{3λ} x₃^{3λ})^{1/(1+3λ)},
///       (x₁^{3λ} x₂^{−1} x₃^{3λ})^{1/(1+3λ)},
///       (x₁^{3λ} x₂^{3λ} x₃^{1+6λ})^{1/(1+3λ)} )
/// ```
fn literal_resolvent_log(lambda: f64, u: &[f64]) -> Vec<f64> {
    let a = 3.0 * lambda;
    let denom = 1.0 + a;
    vec![
        (u[0] + a * (u[1] + u[2])) / denom,
        (a * (u[0] + u[2]) - u[1]) / denom,
        (a * (u[0] + u[1]) + (1.0 + 2.0 * a) * u[2]) / denom,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    fn pt(coords: &[f64]) -> Point {
        Point::from_coords(coords.to_vec())
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn assert_point_close(p: &Point, expected: &[f64], tol: f64) {
        assert_eq!(p.len(), expected.len());
        for (a, b) in p.coords().iter().zip(expected) {
            assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{p:?} vs {expected:?}");
        }
    }

    #[test]
    fn eval_examples() {
        let f52 = LogAffineBifunction::example52(2);
        let x = pt(&[E, E]);
        assert_eq!(f52.eval(&x, &x).unwrap(), 0.0);
        let y = pt(&[E * E, E * E]);
        assert_close(f52.eval(&x, &y).unwrap(), 2.0, 1e-12);

        let f51 = LogAffineBifunction::example51();
        let x3 = pt(&[E, E, E]);
        let y3 = pt(&[E * E, E, E]);
        assert_close(f51.eval(&x3, &y3).unwrap(), 3.0, 1e-12);
        assert_eq!(f51.eval(&x3, &x3).unwrap(), 0.0);
    }

    #[test]
    fn resolvent_closed_forms() {
        // example52: J_λ(x) = (x_i^{1/(1+λ)}).
        let f = LogAffineBifunction::example52(4);
        let x = pt(&[E * E; 4]);
        let z = f
            .resolvent_busemann(1.0, &x, ResolventVariant::Characterization)
            .unwrap();
        assert_point_close(&z, &[E; 4], 1e-12);

        // Fixed point at the all-ones solution.
        let ones = pt(&[1.0; 4]);
        let z1 = f
            .resolvent_busemann(0.7, &ones, ResolventVariant::Characterization)
            .unwrap();
        assert_point_close(&z1, &[1.0; 4], 1e-15);

        // example51 characterization via the rank-one solve.
        let f51 = LogAffineBifunction::example51();
        let x3 = pt(&[E, E, E]);
        let z3 = f51
            .resolvent_busemann(1.0 / 3.0, &x3, ResolventVariant::Characterization)
            .unwrap();
        assert_point_close(
            &z3,
            &[(0.75f64).exp(), (0.75f64).exp(), (1.25f64).exp()],
            1e-12,
        );

        // example51 paper-literal closed form.
        let zl = f51
            .resolvent_busemann(1.0 / 3.0, &x3, ResolventVariant::PaperLiteralEx51)
            .unwrap();
        assert_point_close(&zl, &[(1.5f64).exp(), (0.5f64).exp(), (2.5f64).exp()], 1e-12);
    }

    #[test]
    fn literal_matches_power_product_form() {
        // Cross-check the chart-coordinate implementation against a direct
        // evaluation of the product-of-powers expression.
        let f = LogAffineBifunction::example51();
        let lambda = 0.17;
        let x = [1.3, 4.2, 0.8];
        let z = f
            .resolvent_busemann(lambda, &pt(&x), ResolventVariant::PaperLiteralEx51)
            .unwrap();
        let a = 3.0 * lambda;
        let e = 1.0 / (1.0 + a);
        let expect = [
            (x[0] * x[1].powf(a) * x[2].powf(a)).powf(e),
            (x[0].powf(a) * x[1].powf(-1.0) * x[2].powf(a)).powf(e),
            (x[0].powf(a) * x[1].powf(a) * x[2].powf(1.0 + 2.0 * a)).powf(e),
        ];
        assert_point_close(&z, &expect, 1e-12);
    }

    #[test]
    fn literal_variant_requires_example51() {
        let f = LogAffineBifunction::example52(3);
        let x = pt(&[2.0, 2.0, 2.0]);
        assert!(matches!(
            f.resolvent_busemann(0.1, &x, ResolventVariant::PaperLiteralEx51),
            Err(EquilibriumError::VariantMismatch)
        ));
    }

    #[test]
    fn distsq_resolvent_is_half_parameter_reduction() {
        // example52: K_x = (x_i^{1/(1+λ/2)}).
        let f = LogAffineBifunction::example52(3);
        let x = pt(&[E * E, E * E, E * E]);
        let z = f
            .resolvent_distsq(2.0, &x, ResolventVariant::Characterization)
            .unwrap();
        assert_point_close(&z, &[E, E, E], 1e-12);

        // Same output as the Busemann resolvent at λ/2, bit for bit.
        let f51 = LogAffineBifunction::example51();
        let x3 = pt(&[E, E, E]);
        let a = f51
            .resolvent_distsq(2.0 / 3.0, &x3, ResolventVariant::Characterization)
            .unwrap();
        let b = f51
            .resolvent_busemann(1.0 / 3.0, &x3, ResolventVariant::Characterization)
            .unwrap();
        assert_eq!(a, b);
        assert_point_close(
            &a,
            &[(0.75f64).exp(), (0.75f64).exp(), (1.25f64).exp()],
            1e-12,
        );
    }

    #[test]
    fn sherman_morrison_matches_dense_solve() {
        let c = [1.0, 1.0, -1.0];
        let mut rows = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                rows[3 * i + j] = 3.0 * c[i] * c[j];
            }
        }
        let dense = LogAffineBifunction::from_matrix(3, rows).unwrap();
        let rank_one = LogAffineBifunction::example51();
        let u = [0.3, -1.2, 2.5];
        for lambda in [0.03, 0.3, 1.7] {
            let a = rank_one.solve_shifted(lambda, &u).unwrap();
            let b = dense.solve_shifted(lambda, &u).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_close(*x, *y, 1e-12);
            }
        }
    }

    #[test]
    fn prox_step_closed_form() {
        // Anchor at the identity leaves the center unchanged.
        let f = LogAffineBifunction::example52(2);
        let x = pt(&[3.0, 0.4]);
        let anchor = pt(&[1.0, 1.0]);
        let out = f.prox_step(0.8, &x, &anchor).unwrap();
        assert_point_close(&out, &[3.0, 0.4], 1e-15);

        // w = u − λ·v.
        let xn = pt(&[E, E]);
        let yn = pt(&[(0.8f64).exp(), (0.8f64).exp()]);
        let out = f.prox_step(0.5, &xn, &yn).unwrap();
        assert_point_close(&out, &[(0.6f64).exp(), (0.6f64).exp()], 1e-12);

        let f51 = LogAffineBifunction::example51();
        let e3 = pt(&[E, E, E]);
        let out = f51.prox_step(0.1, &e3, &e3).unwrap();
        assert_point_close(
            &out,
            &[(0.7f64).exp(), (0.7f64).exp(), (1.3f64).exp()],
            1e-12,
        );
    }

    /// Independent oracle for the prox closed form: numerically minimize the
    /// chart-coordinate objective with finite-difference gradient descent.
    fn numeric_prox_oracle(f: &LogAffineBifunction, lambda: f64, u: &[f64], v: &[f64]) -> Vec<f64> {
        let objective = |w: &[f64]| -> f64 {
            let fval = f.eval_log(v, w);
            let mut q = 0.0;
            for (wi, ui) in w.iter().zip(u) {
                q += (wi - ui) * (wi - ui);
            }
            fval + q / (2.0 * lambda)
        };
        let n = u.len();
        let mut w = u.to_vec();
        let h = 1e-6;
        // The objective is strongly convex with Hessian I/λ; step λ/2 is safe.
        let step = lambda / 2.0;
        for _ in 0..20_000 {
            let mut grad = vec![0.0; n];
            for i in 0..n {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[i] += h;
                wm[i] -= h;
                grad[i] = (objective(&wp) - objective(&wm)) / (2.0 * h);
            }
            let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            for i in 0..n {
                w[i] -= step * grad[i];
            }
            if gnorm < 1e-11 {
                break;
            }
        }
        w
    }

    #[test]
    fn prox_agrees_with_numeric_minimizer() {
        let f51 = LogAffineBifunction::example51();
        let u = [1.0, 1.0, 1.0];
        let v = [1.0, 1.0, 1.0];
        let w = f51.prox_log(0.1, &u, &v).unwrap();
        let oracle = numeric_prox_oracle(&f51, 0.1, &u, &v);
        for (a, b) in w.iter().zip(&oracle) {
            assert_close(*a, *b, 1e-8);
        }

        let f52 = LogAffineBifunction::example52(2);
        let u2 = [1.0, 1.0];
        let v2 = [0.8, 0.8];
        let w2 = f52.prox_log(0.5, &u2, &v2).unwrap();
        let oracle2 = numeric_prox_oracle(&f52, 0.5, &u2, &v2);
        for (a, b) in w2.iter().zip(&oracle2) {
            assert_close(*a, *b, 1e-8);
        }
    }

    #[test]
    fn monotonicity_probes() {
        // Deterministic low-discrepancy-ish sampler, good enough for probes.
        fn sampler(dim: usize) -> impl FnMut() -> Point {
            let mut state = 0x9e3779b97f4a7c15u64;
            move || {
                let coords = (0..dim)
                    .map(|_| {
                        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                        // Coordinates in about [0.2, 5.0].
                        0.2 + 4.8 * ((state >> 11) as f64 / (1u64 << 53) as f64)
                    })
                    .collect();
                Point::from_coords(coords)
            }
        }

        let f52 = LogAffineBifunction::example52(3);
        let rep = f52.probe_monotone(sampler(3), 500).unwrap();
        assert!(rep.pass, "max violation {}", rep.max_value);

        let f51 = LogAffineBifunction::example51();
        let rep = f51.probe_monotone(sampler(3), 500).unwrap();
        assert!(rep.pass, "max violation {}", rep.max_value);

        // Negated identity fails with a positive witness.
        let neg = LogAffineBifunction::from_matrix(
            2,
            vec![-1.0, 0.0, 0.0, -1.0],
        )
        .unwrap();
        let rep = neg.probe_monotone(sampler(2), 200).unwrap();
        assert!(!rep.pass);
        assert!(rep.max_value > 0.0);
        assert!(rep.witness.is_some());

        // example52 is strongly pseudomonotone with modulus 1 but not 2.
        let f52 = LogAffineBifunction::example52(3);
        let rep = f52
            .probe_strong_pseudomonotone(1.0, sampler(3), 2000)
            .unwrap();
        assert!(rep.pass, "max {} over {} applicable", rep.max_value, rep.applicable);
        assert!(rep.applicable > 0);
        let rep = f52
            .probe_strong_pseudomonotone(2.0, sampler(3), 2000)
            .unwrap();
        assert!(!rep.pass);

        // The rank-one problem fails for every β: pairs in the kernel of A
        // keep both values at zero while the distance is positive.
        let rep = f51
            .probe_strong_pseudomonotone(0.05, sampler(3), 2000)
            .unwrap();
        assert!(!rep.pass, "max {}", rep.max_value);
    }

    #[test]
    fn modulus_and_monotonicity_flags() {
        assert_eq!(
            LogAffineBifunction::example52(5).strong_monotonicity_modulus(),
            Some(1.0)
        );
        let f51 = LogAffineBifunction::example51();
        assert_eq!(f51.strong_monotonicity_modulus(), None);
        assert!(f51.is_monotone());
        assert_close(f51.symmetric_part_min_eigenvalue(), 0.0, 1e-15);

        let neg = LogAffineBifunction::from_matrix(2, vec![-1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(!neg.is_monotone());

        // Dense skew part does not affect the modulus.
        let skewed = LogAffineBifunction::from_matrix(2, vec![2.0, 1.0, -1.0, 3.0]).unwrap();
        assert_close(skewed.symmetric_part_min_eigenvalue(), 2.0, 1e-12);
    }

    #[test]
    fn nearest_solution_projection() {
        let f52 = LogAffineBifunction::example52(3);
        let x0 = pt(&[4.0, 9.0, 0.25]);
        let sol = f52.nearest_solution(&x0).unwrap().unwrap();
        assert_point_close(&sol, &[1.0, 1.0, 1.0], 1e-15);

        let f51 = LogAffineBifunction::example51();
        let x0 = pt(&[2.0, 3.0, 6.0]);
        // Already on the solution surface x₁x₂ = x₃.
        let sol = f51.nearest_solution(&x0).unwrap().unwrap();
        assert_point_close(&sol, &[2.0, 3.0, 6.0], 1e-12);
        assert!(f51.eval(&sol, &pt(&[1.0, 5.0, 2.0])).unwrap().abs() <= 1e-12);

        let x1 = pt(&[E, E, E]);
        let sol1 = f51.nearest_solution(&x1).unwrap().unwrap();
        // Projection along c = (1,1,−1): u = (1,1,1) − (1/3)(1,1,−1).
        assert_point_close(
            &sol1,
            &[
                (2.0f64 / 3.0).exp(),
                (2.0f64 / 3.0).exp(),
                (4.0f64 / 3.0).exp(),
            ],
            1e-12,
        );
    }

    #[test]
    fn invalid_lambda_rejected() {
        let f = LogAffineBifunction::example52(2);
        let x = pt(&[2.0, 2.0]);
        for bad in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                f.resolvent_busemann(bad, &x, ResolventVariant::Characterization),
                Err(EquilibriumError::NonPositiveLambda(_))
            ));
            assert!(f.prox_step(bad, &x, &x).is_err());
            assert!(f.resolvent_distsq(bad, &x, ResolventVariant::Characterization).is_err());
        }
    }
}
