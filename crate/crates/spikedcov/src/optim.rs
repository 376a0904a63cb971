//! Riemannian solvers over the quotient geometry.
//!
//! Two generic solvers are provided for objectives defined through the
//! [`Objective`] trait: gradient descent with Armijo backtracking
//! ([`solve_rgd`]) and a trust-region method with a Steihaug-Toint truncated
//! conjugate-gradient inner solve ([`solve_rtr`]). Both operate on horizontal
//! representatives, retract with the manifold's second-order retraction and
//! re-orthonormalize the frame periodically to arrest drift.

use std::time::{Duration, Instant};

use crate::error::{CoreError, Result};
use crate::manifold::{
    inner, norm, project_horizontal, reorthonormalize, retract, ManifoldPoint, MetricParams,
    TangentVector,
};

/// A smooth gauge-invariant cost on the quotient manifold.
pub trait Objective {
    fn cost(&self, point: &ManifoldPoint) -> Result<f64>;

    /// Horizontal Riemannian gradient.
    fn rgrad(&self, point: &ManifoldPoint) -> Result<TangentVector>;

    /// Horizontal Riemannian Hessian-vector product, when available.
    /// Solvers fall back to finite differences (if enabled in config) when
    /// this returns `None`.
    fn rhess(&self, point: &ManifoldPoint, xi: &TangentVector) -> Option<Result<TangentVector>> {
        let _ = (point, xi);
        None
    }
}

/// Armijo backtracking parameters.
#[derive(Clone, Copy, Debug)]
pub struct ArmijoConfig {
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Step contraction factor per backtrack.
    pub backtrack: f64,
    /// Backtracks before giving up.
    pub max_backtracks: usize,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            backtrack: 0.5,
            max_backtracks: 50,
        }
    }
}

/// Trust-region parameters (radii are measured in the Riemannian norm).
#[derive(Clone, Copy, Debug)]
pub struct TrustRegionConfig {
    pub initial_radius: f64,
    pub max_radius: f64,
    /// Steps with ρ above this ratio are accepted.
    pub accept_ratio: f64,
    /// ρ below this shrinks the radius by `shrink_factor`.
    pub shrink_threshold: f64,
    /// ρ above this (with a boundary-hitting step) grows the radius.
    pub grow_threshold: f64,
    pub shrink_factor: f64,
    pub grow_factor: f64,
    /// Truncated-CG relative residual target κ.
    pub cg_kappa: f64,
    /// Truncated-CG superlinear exponent θ.
    pub cg_theta: f64,
    /// Inner iteration cap; `None` uses the horizontal-space dimension.
    pub max_inner: Option<usize>,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            initial_radius: 1.0,
            max_radius: 100.0,
            accept_ratio: 0.1,
            shrink_threshold: 0.25,
            grow_threshold: 0.75,
            shrink_factor: 0.25,
            grow_factor: 2.0,
            cg_kappa: 0.1,
            cg_theta: 1.0,
            max_inner: None,
        }
    }
}

/// Shared solver configuration.
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Absolute tolerance on the Riemannian gradient norm.
    pub grad_tol: f64,
    pub armijo: ArmijoConfig,
    pub tr: TrustRegionConfig,
    /// Use a finite-difference Hessian-vector product even when the
    /// objective does not implement `rhess`.
    pub fd_hessian: bool,
    /// Step used by the finite-difference Hessian.
    pub fd_step: f64,
    /// Re-orthonormalize the frame every this many iterations.
    pub reorth_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: 1e-6,
            armijo: ArmijoConfig::default(),
            tr: TrustRegionConfig::default(),
            fd_hessian: false,
            fd_step: 1e-6,
            reorth_every: 50,
        }
    }
}

impl SolverConfig {
    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }

    pub fn with_fd_hessian(mut self, enabled: bool) -> Self {
        self.fd_hessian = enabled;
        self
    }
}

/// Termination condition of a solver run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Gradient norm fell below `grad_tol`.
    Converged,
    /// Iteration budget exhausted.
    MaxIters,
    /// Armijo search exhausted its backtracks.
    LineSearchFailure,
    /// Non-finite values or a non-positive trust-region model decrease.
    NumericalBreakdown,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::LineSearchFailure => "line_search_failure",
            SolveStatus::NumericalBreakdown => "numerical_breakdown",
        }
    }
}

/// Outcome of a solver run.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub point: ManifoldPoint,
    /// Cost at the start point followed by the cost after each accepted step.
    pub cost_trace: Vec<f64>,
    /// Gradient norm at each outer iteration (including the final iterate).
    pub grad_norm_trace: Vec<f64>,
    pub status: SolveStatus,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Line-search evaluations (RGD) or truncated-CG iterations (RTR).
    pub inner_iterations: usize,
    pub wall_time: Duration,
}

/// One line of the optional per-iteration trace.
#[derive(Clone, Copy, Debug)]
pub struct IterTrace {
    pub iteration: usize,
    pub cost: f64,
    pub grad_norm: f64,
    /// Accepted Armijo step (RGD) or current trust radius (RTR).
    pub step_or_radius: f64,
}

/// Caller-supplied sink receiving one record per outer iteration.
pub type TraceSink<'a> = &'a mut dyn FnMut(&IterTrace);

/// Result of one accepted Armijo step.
#[derive(Clone, Debug)]
pub struct LineSearchOutcome {
    pub step: f64,
    pub cost: f64,
    pub point: ManifoldPoint,
    /// Cost evaluations consumed.
    pub evals: usize,
}

/// Armijo backtracking along `direction` from `point`.
///
/// `slope` must be the (negative) directional derivative
/// `⟨grad, direction⟩`; `initial_step` seeds the backtracking.
pub fn armijo_linesearch<O: Objective + ?Sized>(
    objective: &O,
    params: &MetricParams,
    point: &ManifoldPoint,
    direction: &TangentVector,
    slope: f64,
    config: &ArmijoConfig,
    initial_step: f64,
) -> Result<LineSearchOutcome> {
    if !(slope < 0.0) {
        return Err(CoreError::InvalidParam(format!(
            "armijo_linesearch requires a descent direction (slope {slope:.3e} >= 0)"
        )));
    }
    if !(initial_step > 0.0) {
        return Err(CoreError::InvalidParam(format!(
            "armijo_linesearch initial step must be positive, got {initial_step:.3e}"
        )));
    }
    let f0 = objective.cost(point)?;
    let mut step = initial_step;
    let mut evals = 0usize;
    for _ in 0..=config.max_backtracks {
        // A pathologically long step can make the retraction or the cost
        // fail; treat that exactly like an insufficient decrease.
        let attempt = retract(params, point, &direction.scale(step))
            .and_then(|candidate| objective.cost(&candidate).map(|f| (candidate, f)));
        evals += 1;
        if let Ok((candidate, f_new)) = attempt {
            if f_new.is_finite() && f_new <= f0 + config.c1 * step * slope {
                return Ok(LineSearchOutcome {
                    step,
                    cost: f_new,
                    point: candidate,
                    evals,
                });
            }
        }
        step *= config.backtrack;
    }
    Err(CoreError::LineSearchFailure {
        backtracks: config.max_backtracks,
    })
}

/// Riemannian gradient descent with Armijo line search.
pub fn solve_rgd<O: Objective + ?Sized>(
    objective: &O,
    start: &ManifoldPoint,
    params: &MetricParams,
    config: &SolverConfig,
) -> Result<SolveResult> {
    solve_rgd_traced(objective, start, params, config, None)
}

/// [`solve_rgd`] with an optional per-iteration trace sink.
pub fn solve_rgd_traced<O: Objective + ?Sized>(
    objective: &O,
    start: &ManifoldPoint,
    params: &MetricParams,
    config: &SolverConfig,
    mut sink: Option<TraceSink<'_>>,
) -> Result<SolveResult> {
    start.validate()?;
    let clock = Instant::now();
    let mut point = start.clone();
    let mut cost_trace = Vec::new();
    let mut grad_norm_trace = Vec::new();
    let mut inner_iterations = 0usize;
    let mut iterations = 0usize;
    let mut prev_step: Option<f64> = None;

    let mut current_cost = match objective.cost(&point) {
        Ok(f) if f.is_finite() => f,
        _ => {
            return Ok(breakdown_result(
                point,
                cost_trace,
                grad_norm_trace,
                iterations,
                inner_iterations,
                clock,
            ))
        }
    };
    cost_trace.push(current_cost);

    let status = loop {
        let grad = match objective.rgrad(&point) {
            Ok(g) => g,
            Err(_) => break SolveStatus::NumericalBreakdown,
        };
        let grad_norm = norm(params, &point, &grad);
        grad_norm_trace.push(grad_norm);
        if !grad_norm.is_finite() {
            break SolveStatus::NumericalBreakdown;
        }
        if let Some(sink) = sink.as_mut() {
            sink(&IterTrace {
                iteration: iterations,
                cost: current_cost,
                grad_norm,
                step_or_radius: prev_step.unwrap_or(0.0),
            });
        }
        if grad_norm < config.grad_tol {
            break SolveStatus::Converged;
        }
        if iterations >= config.max_iters {
            break SolveStatus::MaxIters;
        }

        let direction = grad.scale(-1.0);
        let slope = -grad_norm * grad_norm;
        let initial_step = match prev_step {
            Some(s) => 2.0 * s,
            None => 1.0 / grad_norm,
        };
        match armijo_linesearch(
            objective,
            params,
            &point,
            &direction,
            slope,
            &config.armijo,
            initial_step,
        ) {
            Ok(outcome) => {
                inner_iterations += outcome.evals;
                prev_step = Some(outcome.step);
                point = outcome.point;
                current_cost = outcome.cost;
                cost_trace.push(current_cost);
                iterations += 1;
            }
            Err(CoreError::LineSearchFailure { .. }) => break SolveStatus::LineSearchFailure,
            Err(_) => break SolveStatus::NumericalBreakdown,
        }

        if iterations % config.reorth_every == 0 {
            match reorthonormalize(&point) {
                Ok(clean) => point = clean,
                Err(_) => break SolveStatus::NumericalBreakdown,
            }
        }
    };

    Ok(SolveResult {
        point,
        cost_trace,
        grad_norm_trace,
        status,
        iterations,
        inner_iterations,
        wall_time: clock.elapsed(),
    })
}

fn breakdown_result(
    point: ManifoldPoint,
    cost_trace: Vec<f64>,
    grad_norm_trace: Vec<f64>,
    iterations: usize,
    inner_iterations: usize,
    clock: Instant,
) -> SolveResult {
    SolveResult {
        point,
        cost_trace,
        grad_norm_trace,
        status: SolveStatus::NumericalBreakdown,
        iterations,
        inner_iterations,
        wall_time: clock.elapsed(),
    }
}

/// Hessian-vector product: analytic when the objective provides one,
/// otherwise a horizontal finite difference of the gradient field.
fn hessian_vec<O: Objective + ?Sized>(
    objective: &O,
    params: &MetricParams,
    point: &ManifoldPoint,
    grad: &TangentVector,
    xi: &TangentVector,
    config: &SolverConfig,
) -> Result<TangentVector> {
    if !config.fd_hessian {
        return match objective.rhess(point, xi) {
            Some(result) => result,
            None => Err(CoreError::InvalidParam(
                "objective provides no rhess; enable fd_hessian in SolverConfig".into(),
            )),
        };
    }
    let scale = norm(params, point, xi);
    if scale == 0.0 {
        return Ok(TangentVector::zeros(params.p, params.k));
    }
    let h = config.fd_step / scale.max(1.0);
    let shifted = retract(params, point, &xi.scale(h))?;
    let grad_shifted = objective.rgrad(&shifted)?;
    // Naive transport: compare representative components directly.
    let diff = TangentVector::new(
        (&grad_shifted.xi_u - &grad.xi_u).scale(1.0 / h),
        (&grad_shifted.xi_sigma - &grad.xi_sigma).scale(1.0 / h),
    );
    project_horizontal(params, point, &diff)
}

struct TcgOutcome {
    step: TangentVector,
    model_decrease: f64,
    hit_boundary: bool,
    inner_count: usize,
}

/// Steihaug-Toint truncated CG on the trust-region subproblem.
fn truncated_cg<O: Objective + ?Sized>(
    objective: &O,
    params: &MetricParams,
    point: &ManifoldPoint,
    grad: &TangentVector,
    radius: f64,
    config: &SolverConfig,
) -> Result<TcgOutcome> {
    let dim = 2 * params.p * params.k - params.k * params.k;
    let max_inner = config.tr.max_inner.unwrap_or(dim);
    let grad_norm = norm(params, point, grad);
    let stop_tol = grad_norm * config.tr.cg_kappa.min(grad_norm.powf(config.tr.cg_theta));

    let mut eta = TangentVector::zeros(params.p, params.k);
    let mut h_eta = TangentVector::zeros(params.p, params.k);
    let mut residual = grad.clone();
    let mut direction = grad.scale(-1.0);
    let mut rr = grad_norm * grad_norm;
    let mut inner_count = 0usize;

    let model_decrease = |eta: &TangentVector, h_eta: &TangentVector| {
        -(inner(params, point, grad, eta) + 0.5 * inner(params, point, eta, h_eta))
    };

    // Walks to the trust-region boundary along `direction` from `eta`.
    let to_boundary = |eta: &TangentVector,
                       h_eta: &TangentVector,
                       direction: &TangentVector,
                       h_dir: &TangentVector,
                       inner_count: usize| {
        let dd = inner(params, point, direction, direction);
        let ed = inner(params, point, eta, direction);
        let ee = inner(params, point, eta, eta);
        let disc = (ed * ed + dd * (radius * radius - ee)).max(0.0);
        let tau = if dd > 0.0 { (-ed + disc.sqrt()) / dd } else { 0.0 };
        let step = eta.add_scaled(tau, direction);
        let h_step = h_eta.add_scaled(tau, h_dir);
        TcgOutcome {
            model_decrease: model_decrease(&step, &h_step),
            step,
            hit_boundary: true,
            inner_count,
        }
    };

    for _ in 0..max_inner {
        let h_dir = hessian_vec(objective, params, point, grad, &direction, config)?;
        inner_count += 1;
        let curvature = inner(params, point, &direction, &h_dir);
        if curvature <= 0.0 {
            return Ok(to_boundary(&eta, &h_eta, &direction, &h_dir, inner_count));
        }
        let alpha = rr / curvature;
        let eta_next = eta.add_scaled(alpha, &direction);
        if norm(params, point, &eta_next) >= radius {
            return Ok(to_boundary(&eta, &h_eta, &direction, &h_dir, inner_count));
        }
        eta = eta_next;
        h_eta = h_eta.add_scaled(alpha, &h_dir);
        residual = residual.add_scaled(alpha, &h_dir);
        let rr_next = inner(params, point, &residual, &residual);
        if rr_next.sqrt() <= stop_tol {
            return Ok(TcgOutcome {
                model_decrease: model_decrease(&eta, &h_eta),
                step: eta,
                hit_boundary: false,
                inner_count,
            });
        }
        let beta = rr_next / rr;
        direction = residual.scale(-1.0).add_scaled(beta, &direction);
        rr = rr_next;
    }
    Ok(TcgOutcome {
        model_decrease: model_decrease(&eta, &h_eta),
        step: eta,
        hit_boundary: false,
        inner_count,
    })
}

/// Riemannian trust-region solver.
pub fn solve_rtr<O: Objective + ?Sized>(
    objective: &O,
    start: &ManifoldPoint,
    params: &MetricParams,
    config: &SolverConfig,
) -> Result<SolveResult> {
    solve_rtr_traced(objective, start, params, config, None)
}

/// [`solve_rtr`] with an optional per-iteration trace sink.
pub fn solve_rtr_traced<O: Objective + ?Sized>(
    objective: &O,
    start: &ManifoldPoint,
    params: &MetricParams,
    config: &SolverConfig,
    mut sink: Option<TraceSink<'_>>,
) -> Result<SolveResult> {
    start.validate()?;
    let clock = Instant::now();
    let mut point = start.clone();
    let mut radius = config.tr.initial_radius;
    let mut cost_trace = Vec::new();
    let mut grad_norm_trace = Vec::new();
    let mut iterations = 0usize;
    let mut inner_iterations = 0usize;

    let mut current_cost = match objective.cost(&point) {
        Ok(f) if f.is_finite() => f,
        _ => {
            return Ok(breakdown_result(
                point,
                cost_trace,
                grad_norm_trace,
                iterations,
                inner_iterations,
                clock,
            ))
        }
    };
    cost_trace.push(current_cost);

    let status = loop {
        let grad = match objective.rgrad(&point) {
            Ok(g) => g,
            Err(_) => break SolveStatus::NumericalBreakdown,
        };
        let grad_norm = norm(params, &point, &grad);
        grad_norm_trace.push(grad_norm);
        if !grad_norm.is_finite() {
            break SolveStatus::NumericalBreakdown;
        }
        if let Some(sink) = sink.as_mut() {
            sink(&IterTrace {
                iteration: iterations,
                cost: current_cost,
                grad_norm,
                step_or_radius: radius,
            });
        }
        if grad_norm < config.grad_tol {
            break SolveStatus::Converged;
        }
        if iterations >= config.max_iters {
            break SolveStatus::MaxIters;
        }
        iterations += 1;

        let tcg = match truncated_cg(objective, params, &point, &grad, radius, config) {
            Ok(t) => t,
            // A missing Hessian without the finite-difference flag is a
            // configuration error, not a numerical event.
            Err(e @ CoreError::InvalidParam(_)) => return Err(e),
            Err(_) => break SolveStatus::NumericalBreakdown,
        };
        inner_iterations += tcg.inner_count;

        // A failed retraction or cost evaluation is treated as a rejected
        // step with a radius shrink.
        let candidate = retract(params, &point, &tcg.step)
            .and_then(|cand| objective.cost(&cand).map(|f| (cand, f)));
        let (candidate, candidate_cost) = match candidate {
            Ok((cand, f)) if f.is_finite() => (cand, f),
            _ => {
                radius *= config.tr.shrink_factor;
                cost_trace.push(current_cost);
                continue;
            }
        };

        if tcg.model_decrease <= 0.0 {
            break SolveStatus::NumericalBreakdown;
        }
        let rho = (current_cost - candidate_cost) / tcg.model_decrease;

        if rho < config.tr.shrink_threshold {
            radius *= config.tr.shrink_factor;
        } else if rho > config.tr.grow_threshold && tcg.hit_boundary {
            radius = (radius * config.tr.grow_factor).min(config.tr.max_radius);
        }
        if rho > config.tr.accept_ratio {
            point = candidate;
            current_cost = candidate_cost;
        }
        cost_trace.push(current_cost);

        if iterations % config.reorth_every == 0 {
            match reorthonormalize(&point) {
                Ok(clean) => point = clean,
                Err(_) => break SolveStatus::NumericalBreakdown,
            }
        }
    };

    Ok(SolveResult {
        point,
        cost_trace,
        grad_norm_trace,
        status,
        iterations,
        inner_iterations,
        wall_time: clock.elapsed(),
    })
}
