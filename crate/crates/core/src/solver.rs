//! Classical and decoupled Nyström systems, their solution and the
//! Nyström interpolant.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernel::{Field, Kernel};
use crate::linalg::{DenseMatrix, LuFactors};
use crate::nodes::NodeSet;
use crate::quadrature::QuadratureRule;
use crate::reconstruction::ReconstructionOperator;

/// Systems up to this size get an exact `cond_∞`; larger ones an estimate.
pub const DEFAULT_COND_EXACT_LIMIT: usize = 2000;
pub const DEFAULT_NEWTON_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_NEWTON_MAXIT: usize = 50;

/// A source term `g(u, x)`.
pub type Source = Arc<dyn Fn(f64, Point) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Classical,
    Decoupled,
}

/// Right-hand side of `λu − Ku = ·`.
#[derive(Clone)]
pub enum RightHandSide {
    Linear(Field),
    /// `source(u, x)` together with its derivative in `u`.
    Nonlinear { source: Source, source_du: Source },
}

impl std::fmt::Debug for RightHandSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Linear(_) => f.write_str("Linear"),
            Self::Nonlinear { .. } => f.write_str("Nonlinear"),
        }
    }
}

/// Dense Nyström system `A û = rhs`.
///
/// Classical: `A = λI − K∘W` on the quadrature nodes. Decoupled:
/// `A = λI − K W R` on the solution nodes of `recon`.
#[derive(Clone)]
pub struct NystromSystem {
    pub variant: Variant,
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub lambda: f64,
    pub kernel: Kernel,
    pub f: Field,
    pub rule: QuadratureRule,
    pub recon: Option<ReconstructionOperator>,
}

impl std::fmt::Debug for NystromSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NystromSystem")
            .field("variant", &self.variant)
            .field("size", &self.size())
            .field("lambda", &self.lambda)
            .field("kernel", &self.kernel)
            .finish_non_exhaustive()
    }
}

impl NystromSystem {
    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn solution_nodes(&self) -> &NodeSet {
        solution_nodes(&self.rule, self.recon.as_ref())
    }
}

fn solution_nodes<'a>(rule: &'a QuadratureRule, recon: Option<&'a ReconstructionOperator>) -> &'a NodeSet {
    recon.map_or(&rule.nodes, |r| &r.x)
}

pub fn assemble_classical(lambda: f64, k: &Kernel, f: &Field, rule: &QuadratureRule) -> Result<NystromSystem> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let y = rule.points();
    let n = y.len();
    let mut a = DenseMatrix::zeros(n, n);
    for (i, &yi) in y.iter().enumerate() {
        let row = a.row_mut(i);
        for ((r, &yj), w) in row.iter_mut().zip(y).zip(&rule.weights) {
            *r = -(k.eval(yi, yj) * w);
        }
        row[i] += lambda;
    }
    Ok(NystromSystem {
        variant: Variant::Classical,
        matrix: a,
        rhs: y.iter().map(|&p| f(p)).collect(),
        lambda,
        kernel: k.clone(),
        f: f.clone(),
        rule: rule.clone(),
        recon: None,
    })
}

pub fn assemble_decoupled(
    lambda: f64,
    k: &Kernel,
    f: &Field,
    rule: &QuadratureRule,
    recon: &ReconstructionOperator,
) -> Result<NystromSystem> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    if recon.y.points != rule.nodes.points {
        return Err(Error::NodeMismatch);
    }
    let x = &recon.x.points;
    let mut a = kwr_matrix(k, rule, recon);
    for i in 0..x.len() {
        a[(i, i)] += lambda;
    }
    Ok(NystromSystem {
        variant: Variant::Decoupled,
        matrix: a,
        rhs: x.iter().map(|&p| f(p)).collect(),
        lambda,
        kernel: k.clone(),
        f: f.clone(),
        rule: rule.clone(),
        recon: Some(recon.clone()),
    })
}

/// `−K W R`, built row by row: `(K W)` row entries scattered through the
/// sparse rows of `R`. Cost `O(|X| |Y| nnz_row)`.
fn kwr_matrix(k: &Kernel, rule: &QuadratureRule, recon: &ReconstructionOperator) -> DenseMatrix {
    let x = &recon.x.points;
    let y = rule.points();
    let n = x.len();
    let mut a = DenseMatrix::zeros(n, n);
    for (i, &xi) in x.iter().enumerate() {
        let row = a.row_mut(i);
        for (j, (&yj, w)) in y.iter().zip(&rule.weights).enumerate() {
            let c = k.eval(xi, yj) * w;
            if c == 0.0 {
                continue;
            }
            let (cols, vals) = recon.row(j);
            for (&col, r) in cols.iter().zip(vals) {
                row[col] -= c * r;
            }
        }
    }
    a
}

/// `−K∘W` on the rule nodes, or `−K W R` when a reconstruction is given.
fn operator_matrix(k: &Kernel, rule: &QuadratureRule, recon: Option<&ReconstructionOperator>) -> Result<DenseMatrix> {
    match recon {
        Some(r) => {
            if r.y.points != rule.nodes.points {
                return Err(Error::NodeMismatch);
            }
            Ok(kwr_matrix(k, rule, r))
        }
        None => {
            let y = rule.points();
            Ok(DenseMatrix::from_fn(y.len(), y.len(), |i, j| -(k.eval(y[i], y[j]) * rule.weights[j])))
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    /// `û` at the solution nodes (`Y` for classical, `X` for decoupled).
    pub values: Vec<f64>,
    pub lambda: f64,
    pub kernel: Kernel,
    pub rule: QuadratureRule,
    pub recon: Option<ReconstructionOperator>,
    pub rhs: RightHandSide,
    pub cond_inf: f64,
    pub variant: Variant,
    /// Final `‖A û − rhs‖_∞` (linear) or `‖F(û)‖_∞` (nonlinear).
    pub residual: f64,
    /// Newton steps taken; 0 for a direct linear solve.
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// `W R û`, the quadrature-node data of the interpolant.
    weighted: Vec<f64>,
}

impl DiscreteSolution {
    pub fn solution_nodes(&self) -> &NodeSet {
        solution_nodes(&self.rule, self.recon.as_ref())
    }

    fn integral_term(&self, x: Point) -> f64 {
        self.rule
            .points()
            .iter()
            .zip(&self.weighted)
            .map(|(&y, v)| self.kernel.eval(x, y) * v)
            .sum()
    }
}

fn weighted_values(rule: &QuadratureRule, recon: Option<&ReconstructionOperator>, values: &[f64]) -> Result<Vec<f64>> {
    let at_y = match recon {
        Some(r) => r.apply(values)?,
        None => values.to_vec(),
    };
    Ok(at_y.iter().zip(&rule.weights).map(|(v, w)| v * w).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub cond_exact_limit: usize,
    pub compute_cond: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            cond_exact_limit: DEFAULT_COND_EXACT_LIMIT,
            compute_cond: true,
        }
    }
}

pub fn solve_linear(system: &NystromSystem) -> Result<DiscreteSolution> {
    solve_linear_with(system, SolveOptions::default())
}

pub fn solve_linear_with(system: &NystromSystem, options: SolveOptions) -> Result<DiscreteSolution> {
    let lu = LuFactors::factor(system.matrix.clone())?;
    let mut u = lu.solve(&system.rhs);
    let residual_of = |u: &[f64]| -> Vec<f64> {
        system
            .matrix
            .mul_vec(u)
            .iter()
            .zip(&system.rhs)
            .map(|(a, b)| a - b)
            .collect()
    };
    let bound = |u: &[f64]| 1e-10 * (lu.matrix_norm_inf() * max_abs(u) + max_abs(&system.rhs));
    let mut r = residual_of(&u);
    if max_abs(&r) > bound(&u) {
        // One step of iterative refinement before giving up.
        let d = lu.solve(&r);
        for (ui, di) in u.iter_mut().zip(d) {
            *ui -= di;
        }
        r = residual_of(&u);
        if max_abs(&r) > bound(&u) {
            return Err(Error::NoConvergence {
                iterations: 1,
                residual: max_abs(&r),
            });
        }
    }
    let cond_inf = if options.compute_cond {
        lu.cond_inf(options.cond_exact_limit)
    } else {
        f64::NAN
    };
    let weighted = weighted_values(&system.rule, system.recon.as_ref(), &u)?;
    Ok(DiscreteSolution {
        values: u,
        lambda: system.lambda,
        kernel: system.kernel.clone(),
        rule: system.rule.clone(),
        recon: system.recon.clone(),
        rhs: RightHandSide::Linear(system.f.clone()),
        cond_inf,
        variant: system.variant,
        residual: max_abs(&r),
        iterations: 0,
        residual_history: vec![max_abs(&r)],
        weighted,
    })
}

/// Nyström interpolant `u_h(x)`.
///
/// Linear: `(k(x, Y)ᵀ W R û + f(x)) / λ`. Nonlinear: the root of
/// `λu − k(x, Y)ᵀ W R û − g(u, x)`, by scalar Newton started from the value
/// at the nearest solution node.
pub fn interpolate(sol: &DiscreteSolution, x: Point) -> f64 {
    let integral = sol.integral_term(x);
    match &sol.rhs {
        RightHandSide::Linear(f) => (integral + f(x)) / sol.lambda,
        RightHandSide::Nonlinear { source, source_du } => {
            let nodes = &sol.solution_nodes().points;
            let nearest = nodes
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.dist2(x).total_cmp(&b.1.dist2(x)))
                .map_or(0, |(i, _)| i);
            let mut u = sol.values[nearest];
            for _ in 0..50 {
                let g = sol.lambda * u - integral - source(u, x);
                let dg = sol.lambda - source_du(u, x);
                if dg == 0.0 {
                    break;
                }
                let step = g / dg;
                u -= step;
                if step.abs() <= 1e-15 * (1.0 + u.abs()) {
                    break;
                }
            }
            u
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub maxit: usize,
    pub cond_exact_limit: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_NEWTON_TOLERANCE,
            maxit: DEFAULT_NEWTON_MAXIT,
            cond_exact_limit: DEFAULT_COND_EXACT_LIMIT,
        }
    }
}

/// Damped Newton for `F(û) = λû − K W R û − g(û, X) = 0`.
#[allow(clippy::too_many_arguments)]
pub fn solve_nonlinear(
    lambda: f64,
    k: &Kernel,
    source: &Source,
    source_du: &Source,
    rule: &QuadratureRule,
    recon: Option<&ReconstructionOperator>,
    init: &Field,
    options: NewtonOptions,
) -> Result<DiscreteSolution> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let nodes = solution_nodes(rule, recon).points.clone();
    let n = nodes.len();
    let b = operator_matrix(k, rule, recon)?;
    let residual = |u: &[f64]| -> Vec<f64> {
        let bu = b.mul_vec(u);
        (0..n).map(|i| lambda * u[i] + bu[i] - source(u[i], nodes[i])).collect()
    };
    let mut u: Vec<f64> = nodes.iter().map(|&p| init(p)).collect();
    let mut f = residual(&u);
    let mut norm = max_abs(&f);
    let mut history = vec![norm];
    let mut iterations = 0;
    let mut last_lu = None;
    while norm > options.tol * (1.0 + max_abs(&u)) {
        if iterations == options.maxit {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        let mut jac = b.clone();
        for i in 0..n {
            jac[(i, i)] += lambda - source_du(u[i], nodes[i]);
        }
        let lu = LuFactors::factor(jac).map_err(|_| Error::SingularJacobian)?;
        let delta = lu.solve(&f);
        let mut t = 1.0;
        let (next, next_f, next_norm) = loop {
            let cand: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a - t * d).collect();
            let cf = residual(&cand);
            let cn = max_abs(&cf);
            if cn <= (1.0 - 1e-4 * t) * norm || t < 1.0 / 1024.0 {
                break (cand, cf, cn);
            }
            t *= 0.5;
        };
        u = next;
        f = next_f;
        norm = next_norm;
        history.push(norm);
        iterations += 1;
        last_lu = Some(lu);
    }
    let cond_inf = match last_lu {
        Some(lu) => lu.cond_inf(options.cond_exact_limit),
        None => {
            let mut jac = b.clone();
            for i in 0..n {
                jac[(i, i)] += lambda - source_du(u[i], nodes[i]);
            }
            LuFactors::factor(jac).map_or(f64::INFINITY, |lu| lu.cond_inf(options.cond_exact_limit))
        }
    };
    let weighted = weighted_values(rule, recon, &u)?;
    Ok(DiscreteSolution {
        values: u,
        lambda,
        kernel: k.clone(),
        rule: rule.clone(),
        recon: recon.cloned(),
        rhs: RightHandSide::Nonlinear {
            source: source.clone(),
            source_du: source_du.clone(),
        },
        cond_inf,
        variant: if recon.is_some() {
            Variant::Decoupled
        } else {
            Variant::Classical
        },
        residual: norm,
        iterations,
        residual_history: history,
        weighted,
    })
}

/// Logistic source `r(x) u (a(x) − u)` and its derivative in `u`.
pub fn logistic_source(r: Field, a: Field) -> (Source, Source) {
    let (r2, a2) = (r.clone(), a.clone());
    (
        Arc::new(move |u, x| r(x) * u * (a(x) - u)),
        Arc::new(move |u, x| r2(x) * (a2(x) - 2.0 * u)),
    )
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
