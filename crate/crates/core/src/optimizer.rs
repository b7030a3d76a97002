//! Bound-constrained minimization of the learning objective.
//!
//! The solver is a limited-memory quasi-Newton method with gradient
//! projection: each iteration minimizes a quadratic model along the
//! projected steepest-descent path to find the generalized Cauchy point,
//! refines the free (not-at-bound) coordinates by minimizing the same model
//! over the subspace they span, and runs an Armijo backtracking search along
//! the resulting direction. The weight vectors here are small, so the
//! quadratic model keeps an explicit dense matrix: the stored curvature
//! pairs are applied as BFGS updates to a scaled identity, which is the same
//! model the classical compact limited-memory representation encodes. A
//! failed line search falls back to one projected-gradient step before
//! giving up. Accepted iterates are feasible and their objective values are
//! monotone nonincreasing.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::datasets::Dataset;
use crate::grammar::{DerivationGraph, WeightVector};
use crate::objective::{
    objective, objective_and_gradient, ObjectiveError, ObjectiveValue, ObservedDistribution,
    RegularizationConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Lower bound applied to every weight; there is no upper bound.
    pub lower_bound: f64,
    /// Number of curvature pairs retained.
    pub memory: usize,
    pub max_iterations: usize,
    /// Infinity-norm threshold on the projected gradient.
    pub gradient_tolerance: f64,
    /// Relative objective-change threshold between accepted iterates.
    pub objective_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            lower_bound: 0.0,
            memory: 10,
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            objective_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientConverged,
    ObjectiveConverged,
    MaxIterations,
    LineSearchFailure,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Termination::GradientConverged => "gradient_converged",
            Termination::ObjectiveConverged => "objective_converged",
            Termination::MaxIterations => "max_iterations",
            Termination::LineSearchFailure => "line_search_failure",
        };
        f.write_str(name)
    }
}

/// Anything the generic solver can minimize subject to a lower bound.
pub trait BoundedProblem {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }
}

/// Solver output on a plain coordinate vector.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Accepted objective values, starting with the initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Result of fitting weights to a dataset.
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub initial_weights: WeightVector,
    pub final_weights: WeightVector,
    pub initial_objective: ObjectiveValue,
    pub final_objective: ObjectiveValue,
    /// Accepted objective totals, starting with the initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Elementwise max with the lower bound.
pub fn project_to_bounds(weights: &WeightVector, lower_bound: f64) -> WeightVector {
    let flat = weights
        .as_flat()
        .iter()
        .map(|w| w.max(lower_bound))
        .collect();
    WeightVector::new(weights.strata(), weights.constraints(), flat)
        .expect("projection preserves shape")
}

fn project_slice(x: &mut [f64], lower_bound: f64) {
    for v in x {
        *v = v.max(lower_bound);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `||P(x - g) - x||_inf`: zero exactly at a first-order stationary point of
/// the bound-constrained problem.
fn projected_gradient_norm(x: &[f64], g: &[f64], lower_bound: f64) -> f64 {
    x.iter()
        .zip(g)
        .map(|(xi, gi)| ((xi - gi).max(lower_bound) - xi).abs())
        .fold(0.0, f64::max)
}

fn mat_vec(b: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    b.iter().map(|row| dot(row, v)).collect()
}

/// Dense Hessian model: the stored curvature pairs applied as BFGS updates
/// to `theta * I`, where `theta = y'y / s'y` of the most recent pair. Pairs
/// that would break positive definiteness are skipped.
fn dense_hessian_model(history: &VecDeque<(Vec<f64>, Vec<f64>)>, n: usize) -> Vec<Vec<f64>> {
    let theta = history
        .back()
        .map(|(s, y)| {
            let sy = dot(s, y);
            if sy > 0.0 {
                dot(y, y) / sy
            } else {
                1.0
            }
        })
        .unwrap_or(1.0);
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = theta;
            row
        })
        .collect();
    for (s, y) in history {
        let bs = mat_vec(&b, s);
        let sbs = dot(s, &bs);
        let sy = dot(s, y);
        if !(sbs > 0.0) || !(sy > 0.0) {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                b[i][j] += y[i] * y[j] / sy - bs[i] * bs[j] / sbs;
            }
        }
    }
    b
}

/// Where the quadratic model `f + g'(z-x) + (z-x)'B(z-x)/2` attains its
/// first local minimum along the projected steepest-descent path
/// `P(x - t g)`, plus which coordinates sit at the bound there.
struct CauchyPoint {
    z: Vec<f64>,
    at_bound: Vec<bool>,
}

fn cauchy_point(x: &[f64], g: &[f64], b: &[Vec<f64>], lower_bound: f64) -> CauchyPoint {
    let n = x.len();
    // Time at which each coordinate of the descent path hits the bound.
    let mut breakpoints = Vec::new();
    let mut d = vec![0.0; n];
    let mut at_bound = vec![false; n];
    for i in 0..n {
        if g[i] > 0.0 {
            let t = (x[i] - lower_bound) / g[i];
            if t > 0.0 {
                d[i] = -g[i];
                breakpoints.push((t, i));
            } else {
                at_bound[i] = true;
            }
        } else if g[i] < 0.0 {
            d[i] = -g[i];
        } else if x[i] <= lower_bound {
            at_bound[i] = true;
        }
    }
    breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("breakpoints are finite"));

    let mut z = x.to_vec();
    let mut t_old = 0.0;
    let mut pending = breakpoints.into_iter().peekable();
    loop {
        let u: Vec<f64> = z.iter().zip(x).map(|(zi, xi)| zi - xi).collect();
        let slope = dot(g, &d) + dot(&d, &mat_vec(b, &u));
        if slope >= 0.0 {
            break;
        }
        let curvature = dot(&d, &mat_vec(b, &d));
        let dt_star = if curvature > 0.0 {
            -slope / curvature
        } else {
            f64::INFINITY
        };
        match pending.peek().copied() {
            Some((t_next, _)) if dt_star >= t_next - t_old => {
                // Advance to the breakpoint and clamp every coordinate that
                // reaches the bound there.
                for (zi, di) in z.iter_mut().zip(&d) {
                    *zi += (t_next - t_old) * di;
                }
                while let Some(&(t, i)) = pending.peek() {
                    if t > t_next {
                        break;
                    }
                    z[i] = lower_bound;
                    d[i] = 0.0;
                    at_bound[i] = true;
                    pending.next();
                }
                t_old = t_next;
            }
            _ => {
                if dt_star.is_finite() {
                    for (zi, di) in z.iter_mut().zip(&d) {
                        *zi += dt_star * di;
                    }
                }
                break;
            }
        }
    }
    for i in 0..n {
        if z[i] <= lower_bound {
            z[i] = z[i].max(lower_bound);
            at_bound[i] = true;
        }
    }
    CauchyPoint { z, at_bound }
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("pivot comparison")
        })?;
        if a[pivot][col].abs() <= f64::EPSILON {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Minimize the quadratic model over the coordinates free at the Cauchy
/// point, holding the bound coordinates fixed, then truncate the move to
/// stay feasible. Returns the refined trial point.
fn subspace_step(
    x: &[f64],
    g: &[f64],
    b: &[Vec<f64>],
    cp: &CauchyPoint,
    lower_bound: f64,
) -> Vec<f64> {
    let free: Vec<usize> = (0..x.len()).filter(|&i| !cp.at_bound[i]).collect();
    if free.is_empty() {
        return cp.z.clone();
    }
    let offset: Vec<f64> = cp.z.iter().zip(x).map(|(zi, xi)| zi - xi).collect();
    let model_gradient: Vec<f64> = g
        .iter()
        .zip(mat_vec(b, &offset))
        .map(|(gi, bi)| gi + bi)
        .collect();
    let a: Vec<Vec<f64>> = free
        .iter()
        .map(|&i| free.iter().map(|&j| b[i][j]).collect())
        .collect();
    let rhs: Vec<f64> = free.iter().map(|&i| -model_gradient[i]).collect();
    let Some(delta) = solve_dense(a, rhs) else {
        return cp.z.clone();
    };
    // Largest fraction of the subspace move that stays feasible.
    let mut alpha = 1.0_f64;
    for (&i, &di) in free.iter().zip(&delta) {
        if di < 0.0 {
            alpha = alpha.min((lower_bound - cp.z[i]) / di);
        }
    }
    alpha = alpha.clamp(0.0, 1.0);
    let mut trial = cp.z.clone();
    for (&i, &di) in free.iter().zip(&delta) {
        trial[i] += alpha * di;
    }
    project_slice(&mut trial, lower_bound);
    trial
}

/// Wolfe line search along the ray `x + alpha d`, capped at the feasible
/// boundary. Starts at the unit step, extrapolates while the slope stays
/// steeply negative, and interpolates by bisection once a bracket forms.
/// When the curvature condition cannot be met before the boundary, the
/// boundary point is accepted as long as it decreases sufficiently, so steps
/// may land exactly on the bound. Returns the accepted point with its value
/// and gradient; `None` when no acceptable decrease is found.
fn line_search(
    problem: &dyn BoundedProblem,
    x: &[f64],
    f: f64,
    g: &[f64],
    d: &[f64],
    lower_bound: f64,
) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    const FTOL: f64 = 1e-3;
    const GTOL: f64 = 0.9;
    const MAX_TRIALS: usize = 40;
    let slope0 = dot(g, d);
    if !(slope0 < 0.0) {
        return None;
    }
    let mut step_max = f64::INFINITY;
    for (xi, di) in x.iter().zip(d) {
        if *di < 0.0 {
            step_max = step_max.min((lower_bound - xi) / di);
        }
    }
    if !(step_max > 0.0) {
        return None;
    }

    let evaluate = |alpha: f64| {
        let mut candidate: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        project_slice(&mut candidate, lower_bound);
        let (value, gradient) = problem.value_and_gradient(&candidate);
        let slope = dot(&gradient, d);
        (candidate, value, gradient, slope)
    };

    let mut low = 0.0;
    let mut f_low = f;
    let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    let mut high: Option<f64> = None;
    let mut alpha = 1.0_f64.min(step_max);
    for _ in 0..MAX_TRIALS {
        let (candidate, value, gradient, slope) = evaluate(alpha);
        let sufficient = value.is_finite() && value <= f + FTOL * alpha * slope0;
        if !sufficient || value >= f_low {
            // Too far (or no improvement over the low end): bracket above.
            high = Some(alpha);
            alpha = 0.5 * (low + alpha);
            if alpha <= f64::EPSILON {
                break;
            }
            continue;
        }
        if slope.abs() <= GTOL * slope0.abs() {
            return Some((candidate, value, gradient));
        }
        if slope < 0.0 && alpha >= step_max {
            // Still descending at the feasible boundary: take it.
            return Some((candidate, value, gradient));
        }
        low = alpha;
        f_low = value;
        best = Some((candidate, value, gradient));
        if slope < 0.0 {
            alpha = match high {
                // Still descending with room ahead: extrapolate.
                None => (2.0 * alpha).min(step_max),
                Some(h) => 0.5 * (alpha + h),
            };
        } else {
            // Positive slope: the minimum lies below.
            high = Some(alpha);
            alpha = 0.5 * (low + alpha);
        }
        if let Some(h) = high {
            if (h - low) <= 1e-12 * h.max(1.0) {
                break;
            }
        }
    }
    // Curvature never settled; the best sufficient-decrease point still
    // makes progress.
    best
}

/// Projected quasi-Newton descent from `init`, which is projected onto the
/// feasible set first. Deterministic: identical inputs give identical output.
pub fn minimize_problem(
    problem: &dyn BoundedProblem,
    init: &[f64],
    config: &OptimizerConfig,
) -> Solution {
    let lb = config.lower_bound;
    let mut x = init.to_vec();
    project_slice(&mut x, lb);
    let (mut f, mut g) = problem.value_and_gradient(&x);
    let mut trace = vec![f];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    for _ in 0..config.max_iterations {
        if projected_gradient_norm(&x, &g, lb) <= config.gradient_tolerance {
            termination = Termination::GradientConverged;
            break;
        }

        let b = dense_hessian_model(&history, x.len());
        let cp = cauchy_point(&x, &g, &b, lb);
        let trial = subspace_step(&x, &g, &b, &cp, lb);
        let mut d: Vec<f64> = trial.iter().zip(&x).map(|(ti, xi)| ti - xi).collect();
        let mut used_steepest = history.is_empty();
        let descent = dot(&d, &g);
        if !(descent < -1e-12 * norm2(&d) * norm2(&g)) {
            history.clear();
            d = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| {
                    if *xi <= lb && *gi > 0.0 {
                        0.0
                    } else {
                        -gi
                    }
                })
                .collect();
            used_steepest = true;
        }

        let mut accepted = line_search(problem, &x, f, &g, &d, lb);
        if accepted.is_none() && !used_steepest {
            // One projected-gradient restart before giving up.
            history.clear();
            let fallback: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| {
                    if *xi <= lb && *gi > 0.0 {
                        0.0
                    } else {
                        -gi
                    }
                })
                .collect();
            accepted = line_search(problem, &x, f, &g, &fallback, lb);
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            termination = Termination::LineSearchFailure;
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm2(&s) * norm2(&y) {
            if history.len() == config.memory {
                history.pop_front();
            }
            history.push_back((s, y));
        }

        let relative_change = (f - f_new).abs() / f.abs().max(1.0);
        x = x_new;
        f = f_new;
        g = g_new;
        trace.push(f);
        iterations += 1;
        if relative_change <= config.objective_tolerance {
            termination = Termination::ObjectiveConverged;
            break;
        }
    }

    Solution {
        x,
        value: f,
        trace,
        iterations,
        termination,
    }
}

struct GraphProblem<'a> {
    graphs: &'a [DerivationGraph],
    observed: &'a ObservedDistribution,
    strata: usize,
    constraints: usize,
    regularization: RegularizationConfig,
}

impl GraphProblem<'_> {
    fn weights(&self, x: &[f64]) -> WeightVector {
        WeightVector::new(self.strata, self.constraints, x.to_vec())
            .expect("solver preserves dimension")
    }
}

impl BoundedProblem for GraphProblem<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        objective(self.graphs, self.observed, &self.weights(x), &self.regularization)
            .expect("inputs validated before optimization")
            .total
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (_, grad) = objective_and_gradient(
            self.graphs,
            self.observed,
            &self.weights(x),
            &self.regularization,
        )
        .expect("inputs validated before optimization");
        grad.as_flat().to_vec()
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (value, grad) = objective_and_gradient(
            self.graphs,
            self.observed,
            &self.weights(x),
            &self.regularization,
        )
        .expect("inputs validated before optimization");
        (value.total, grad.as_flat().to_vec())
    }
}

/// Fits weights to explicit graphs and observations.
pub fn minimize_graphs(
    graphs: &[DerivationGraph],
    observed: &ObservedDistribution,
    init: &WeightVector,
    regularization: &RegularizationConfig,
    config: &OptimizerConfig,
) -> Result<OptimizeResult, ObjectiveError> {
    let initial_weights = project_to_bounds(init, config.lower_bound);
    // One full evaluation up front surfaces any structural problem as an
    // error; the solver's own evaluations can then safely unwrap.
    let initial_objective = objective(graphs, observed, &initial_weights, regularization)?;
    let problem = GraphProblem {
        graphs,
        observed,
        strata: init.strata(),
        constraints: init.constraints(),
        regularization: *regularization,
    };
    let solution = minimize_problem(&problem, initial_weights.as_flat(), config);
    let final_weights = WeightVector::new(init.strata(), init.constraints(), solution.x)
        .expect("solver preserves dimension");
    let final_objective = objective(graphs, observed, &final_weights, regularization)?;
    Ok(OptimizeResult {
        initial_weights,
        final_weights,
        initial_objective,
        final_objective,
        trace: solution.trace,
        iterations: solution.iterations,
        termination: solution.termination,
    })
}

/// Fits weights to a dataset's graphs and observed distribution.
pub fn minimize(
    dataset: &Dataset,
    init: &WeightVector,
    regularization: &RegularizationConfig,
    config: &OptimizerConfig,
) -> Result<OptimizeResult, ObjectiveError> {
    minimize_graphs(
        dataset.graphs(),
        dataset.observed(),
        init,
        regularization,
        config,
    )
}
