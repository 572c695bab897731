//! The two regularized extragradient iterations.
//!
//! Both loops share the same shape: from the current iterate `x_n`, compute
//! the extrapolation point `y_n` with a regularized resolvent, then take the
//! proximal step anchored at `y_n`:
//!
//! ```text
//! y_n     = J_{λ_n}(x_n)                        (Busemann or squared-distance form)
//! x_{n+1} = argmin_y { F(y_n, y) + d²(x_n, y) / (2λ_n) }
//! ```
//!
//! The REMB method uses the Busemann-regularized resolvent; REMD uses the
//! squared-distance one (equivalently, the Busemann resolvent at `λ_n/2`).
//! The loop runs in chart coordinates — on the log orthant the chart is a
//! global isometry, so `Er(n) = d(x_{n+1}, x_n)` is the chart-space norm of
//! the update. Iteration stops at the first `n` with `Er(n) ≤ tol`.
//!
//! At `tol = 1e-16` the stop is dominated by floating-point stagnation, so
//! the loop also watches the iterate bitwise: a fixed point ends the run as
//! [`TerminalStatus::Converged`] (the update is exactly zero there), and a
//! period-2 rounding cycle — the iterate returning to its position two
//! steps earlier, which does occur for the paper-literal variant at larger
//! steps — ends it as [`TerminalStatus::Stalled`], since no further
//! progress is possible.
//!
//! Iteration-count convention: `IterateTrace::iteration_count()` is the
//! index `n` of the row that triggered the stop — so a start at an
//! equilibrium point counts as zero iterations even though one
//! resolvent/prox pair is evaluated to detect it. Rows record every pair
//! computed, including the triggering one.

use std::fmt;
use std::io::{self, Write};
use std::time::Instant;

use crate::equilibrium::{EquilibriumError, LogAffineBifunction, ResolventVariant};
use crate::manifold::{GeometryError, ManifoldKind, Point};
use crate::numeric::norm;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// Step sizes must satisfy `λ_n ≥ λ̃ > 0`.
    InvalidSchedule(String),
    /// Stopping tolerance must be positive and max_iter at least one.
    InvalidConfig(String),
    /// An iterate left the representable domain.
    NonFiniteIterate { iteration: usize },
    /// The extragradient loops are defined on the log orthant only.
    UnsupportedManifold,
    /// The analytic iteration-count oracle only covers the separable
    /// `example52` problem.
    WrongBifunction,
    Equilibrium(EquilibriumError),
    Geometry(GeometryError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::InvalidSchedule(msg) => write!(f, "invalid step schedule: {msg}"),
            SolverError::InvalidConfig(msg) => write!(f, "invalid solver config: {msg}"),
            SolverError::NonFiniteIterate { iteration } => {
                write!(f, "iterate became non-finite at iteration {iteration}")
            }
            SolverError::UnsupportedManifold => {
                write!(f, "extragradient solvers require the log-orthant manifold")
            }
            SolverError::WrongBifunction => {
                write!(f, "iteration-count oracle requires the example52 bifunction")
            }
            SolverError::Equilibrium(e) => write!(f, "{e}"),
            SolverError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<EquilibriumError> for SolverError {
    fn from(e: EquilibriumError) -> Self {
        SolverError::Equilibrium(e)
    }
}

impl From<GeometryError> for SolverError {
    fn from(e: GeometryError) -> Self {
        SolverError::Geometry(e)
    }
}

/// Which extragradient method to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Remb,
    Remd,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Remb => "remb",
            Method::Remd => "remd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ScheduleMode {
    Constant(f64),
    /// Explicit prefix; the last value repeats once the list is exhausted.
    Sequence(Vec<f64>),
}

/// The step-size sequence `{λ_n}` together with its lower bound `λ̃` and the
/// limsup parameter `λ` from the convergence hypothesis
/// `limsup 1/λ_n ≥ 1/λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    mode: ScheduleMode,
    lower_bound: f64,
    limsup_param: f64,
}

impl StepSchedule {
    /// Constant schedule `λ_n = λ`, which satisfies the limsup condition
    /// with parameter `λ` by construction. The lower bound defaults to `λ`
    /// itself (see [`StepSchedule::with_lower_bound`]).
    pub fn constant(lambda: f64) -> Result<Self, SolverError> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(SolverError::InvalidSchedule(format!(
                "constant step must be positive, got {lambda}"
            )));
        }
        Ok(StepSchedule {
            mode: ScheduleMode::Constant(lambda),
            lower_bound: lambda,
            limsup_param: lambda,
        })
    }

    /// Explicit sequence; after the list is exhausted the last value
    /// repeats. The limsup parameter is taken as the final value.
    pub fn sequence(values: Vec<f64>) -> Result<Self, SolverError> {
        if values.is_empty() {
            return Err(SolverError::InvalidSchedule("empty sequence".into()));
        }
        let mut min = f64::INFINITY;
        for &v in &values {
            if !v.is_finite() || v <= 0.0 {
                return Err(SolverError::InvalidSchedule(format!(
                    "all steps must be positive, got {v}"
                )));
            }
            min = min.min(v);
        }
        let last = *values.last().unwrap();
        Ok(StepSchedule {
            mode: ScheduleMode::Sequence(values),
            lower_bound: min,
            limsup_param: last,
        })
    }

    /// Overrides the lower bound `λ̃`; every step must satisfy `λ_n ≥ λ̃`.
    pub fn with_lower_bound(mut self, lambda_tilde: f64) -> Result<Self, SolverError> {
        if !lambda_tilde.is_finite() || lambda_tilde <= 0.0 {
            return Err(SolverError::InvalidSchedule(format!(
                "lower bound must be positive, got {lambda_tilde}"
            )));
        }
        let min = match &self.mode {
            ScheduleMode::Constant(l) => *l,
            ScheduleMode::Sequence(vs) => vs.iter().cloned().fold(f64::INFINITY, f64::min),
        };
        if min < lambda_tilde {
            return Err(SolverError::InvalidSchedule(format!(
                "step {min} lies below the lower bound {lambda_tilde}"
            )));
        }
        self.lower_bound = lambda_tilde;
        Ok(self)
    }

    pub fn value_at(&self, n: usize) -> f64 {
        match &self.mode {
            ScheduleMode::Constant(l) => *l,
            ScheduleMode::Sequence(vs) => vs[n.min(vs.len() - 1)],
        }
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn limsup_param(&self) -> f64 {
        self.limsup_param
    }
}

/// Stopping threshold, iteration cap, resolvent variant, and whether the
/// trace keeps the iterate points (scalar columns are always kept).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub variant: ResolventVariant,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 1_000_000,
            variant: ResolventVariant::Characterization,
            record_trace: true,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolverError> {
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(SolverError::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    /// `Er(n) ≤ tol`, or the iterate reached a bitwise fixed point.
    Converged,
    /// The iterate entered an exact period-2 rounding cycle with `Er` still
    /// above `tol`; the loop can make no further progress.
    Stalled,
    MaxIterReached,
}

/// Scalar record of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub lambda: f64,
    /// `d(x_n, y_n)`.
    pub dxy: f64,
    /// `Er(n) = d(x_{n+1}, x_n)`.
    pub er: f64,
    /// Wall-clock duration of this iteration in seconds. Excluded from all
    /// determinism guarantees.
    pub elapsed_s: f64,
}

/// Full record of a solver run.
#[derive(Debug, Clone)]
pub struct IterateTrace {
    rows: Vec<TraceRow>,
    /// `(x_n, y_n)` per row, present when the run recorded points.
    points: Option<Vec<(Point, Point)>>,
    final_point: Point,
    status: TerminalStatus,
}

impl IterateTrace {
    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    /// `(x_n, y_n)` pairs, if the run was configured to record them.
    pub fn points(&self) -> Option<&[(Point, Point)]> {
        self.points.as_deref()
    }

    /// The last accepted iterate.
    pub fn final_point(&self) -> &Point {
        &self.final_point
    }

    pub fn status(&self) -> TerminalStatus {
        self.status
    }

    /// Number of resolvent/prox pairs evaluated (= recorded rows).
    pub fn pairs_computed(&self) -> usize {
        self.rows.len()
    }

    /// Iteration count under the table convention: the index of the row
    /// whose `Er` triggered the stop, or `max_iter` when the cap was hit.
    pub fn iteration_count(&self) -> usize {
        match self.status {
            TerminalStatus::Converged | TerminalStatus::Stalled => self.rows.len() - 1,
            TerminalStatus::MaxIterReached => self.rows.len(),
        }
    }

    /// The `x_n` for row `n`; `n == rows.len()` yields the final point.
    pub fn x_at(&self, n: usize) -> Option<&Point> {
        if n == self.rows.len() {
            return Some(&self.final_point);
        }
        self.points.as_ref().and_then(|p| p.get(n).map(|(x, _)| x))
    }

    /// The `y_n` for row `n`.
    pub fn y_at(&self, n: usize) -> Option<&Point> {
        self.points.as_ref().and_then(|p| p.get(n).map(|(_, y)| y))
    }
}

/// Runs the Busemann-regularized method (REMB).
pub fn solve_remb(
    f: &LogAffineBifunction,
    m: ManifoldKind,
    x0: &Point,
    sched: &StepSchedule,
    cfg: &SolverConfig,
) -> Result<(Point, IterateTrace), SolverError> {
    solve(Method::Remb, f, m, x0, sched, cfg)
}

/// Runs the squared-distance-regularized method (REMD).
pub fn solve_remd(
    f: &LogAffineBifunction,
    m: ManifoldKind,
    x0: &Point,
    sched: &StepSchedule,
    cfg: &SolverConfig,
) -> Result<(Point, IterateTrace), SolverError> {
    solve(Method::Remd, f, m, x0, sched, cfg)
}

/// Shared loop; the two methods differ only in the resolvent's effective
/// regularization parameter.
pub fn solve(
    method: Method,
    f: &LogAffineBifunction,
    m: ManifoldKind,
    x0: &Point,
    sched: &StepSchedule,
    cfg: &SolverConfig,
) -> Result<(Point, IterateTrace), SolverError> {
    cfg.validate()?;
    if !matches!(m, ManifoldKind::LogOrthant(_)) {
        return Err(SolverError::UnsupportedManifold);
    }
    if m.dim() != f.dim() {
        return Err(SolverError::Geometry(GeometryError::DimensionMismatch {
            expected: f.dim(),
            actual: m.dim(),
        }));
    }
    m.check_point(x0)?;

    let mut u = m.chart(x0)?;
    let mut u_prev: Option<Vec<f64>> = None;
    let mut rows = Vec::new();
    let mut points = cfg.record_trace.then(Vec::new);
    let mut status = TerminalStatus::MaxIterReached;

    for n in 0..cfg.max_iter {
        let start = Instant::now();
        let lambda = sched.value_at(n);
        if lambda < sched.lower_bound() {
            return Err(SolverError::InvalidSchedule(format!(
                "step {lambda} at iteration {n} lies below the lower bound {}",
                sched.lower_bound()
            )));
        }
        let effective = match method {
            Method::Remb => lambda,
            Method::Remd => lambda / 2.0,
        };
        let v = f.resolvent_log(effective, &u, cfg.variant)?;
        let w = f.prox_log(lambda, &u, &v)?;
        if v.iter().chain(&w).any(|t| !t.is_finite()) {
            return Err(SolverError::NonFiniteIterate { iteration: n });
        }

        let dxy = norm(&diff(&u, &v));
        let er = norm(&diff(&w, &u));
        let fixed = w == u;
        let cycling = u_prev.as_deref() == Some(w.as_slice());

        if let Some(pts) = points.as_mut() {
            pts.push((m.unchart(&u)?, m.unchart(&v)?));
        }
        rows.push(TraceRow {
            n,
            lambda,
            dxy,
            er,
            elapsed_s: start.elapsed().as_secs_f64(),
        });

        u_prev = Some(std::mem::replace(&mut u, w));
        if er <= cfg.tol || fixed {
            status = TerminalStatus::Converged;
            break;
        }
        if cycling {
            status = TerminalStatus::Stalled;
            break;
        }
    }

    let final_point = m.unchart(&u)?;
    let trace = IterateTrace {
        rows,
        points,
        final_point: final_point.clone(),
        status,
    };
    Ok((final_point, trace))
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Analytic iteration count for the separable `example52` problem under a
/// constant schedule.
///
/// In chart coordinates the update is a pure scaling, so
/// `Er(n) = ρ·‖u₀‖·qⁿ` with `q = 1/(1+λ)`, `ρ = λ/(1+λ)` for REMB and
/// `q = (1−λ/2)/(1+λ/2)`, `ρ = λ/(1+λ/2)` for REMD. Returns the smallest
/// `n ≥ 0` with `Er(n) ≤ tol`.
pub fn iteration_count_oracle(
    f: &LogAffineBifunction,
    method: Method,
    lambda: f64,
    x0: &Point,
    tol: f64,
) -> Result<usize, SolverError> {
    if f.strong_monotonicity_modulus() != Some(1.0) || f.is_example51() {
        // Only the identity coefficient matrix has the scalar recursion.
        return Err(SolverError::WrongBifunction);
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(SolverError::InvalidSchedule(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(SolverError::InvalidConfig(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let m = f.manifold();
    let u0 = m.chart(x0)?;
    let u0_norm = norm(&u0);
    let (q, rho) = match method {
        Method::Remb => (1.0 / (1.0 + lambda), lambda / (1.0 + lambda)),
        Method::Remd => (
            (1.0 - lambda / 2.0) / (1.0 + lambda / 2.0),
            lambda / (1.0 + lambda / 2.0),
        ),
    };
    let q = q.abs();
    let r0 = rho * u0_norm;
    if r0 <= tol {
        return Ok(0);
    }
    if q == 0.0 {
        return Ok(1);
    }
    // Float estimate, then settle the boundary exactly in f64 arithmetic.
    let mut n = ((r0 / tol).ln() / (1.0 / q).ln()).ceil().max(0.0) as usize;
    while n > 0 && r0 * q.powi(n as i32 - 1) <= tol {
        n -= 1;
    }
    while r0 * q.powi(n as i32) > tol {
        n += 1;
    }
    Ok(n)
}

/// Writes the per-iteration trace as CSV: header `n,lambda,dxy,er,elapsed_s`,
/// one row per iteration with 17-significant-digit floats, then the final
/// point as a separate `solution` record.
pub fn write_trace_csv<W: Write>(trace: &IterateTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "n,lambda,dxy,er,elapsed_s")?;
    for row in &trace.rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.n, row.lambda, row.dxy, row.er, row.elapsed_s
        )?;
    }
    write!(out, "solution")?;
    for c in trace.final_point.coords() {
        write!(out, ",{c:.16e}")?;
    }
    writeln!(out)
}
