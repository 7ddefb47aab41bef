//! Problem builders: the generic equation `λu − Ku = f`, the stationary
//! nonlocal diffusion forms reduced to it, and manufactured solutions.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::kernel::{effective_support_radius, Field, Kernel};
use crate::quadrature::{compensated_sum, gauss_legendre_interval, QuadratureRule};
use crate::reconstruction::ReconstructionOperator;
use crate::solver::{
    assemble_classical, assemble_decoupled, logistic_source, solve_linear_with, solve_nonlinear, DiscreteSolution,
    NewtonOptions, RightHandSide, SolveOptions,
};

/// Truncation tolerance for the exterior boundary source.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;
const POSITIVITY_SAMPLES: usize = 1000;
const POSITIVITY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Generic,
    Static,
    Dirichlet,
    Neumann,
    Manufactured,
}

/// `λu(x) − ∫_Ω k(x, y) u(y) dy = f(x)`, or `= g(u(x), x)`.
#[derive(Clone)]
pub struct FredholmProblem {
    pub lambda: f64,
    pub kernel: Kernel,
    pub rhs: RightHandSide,
    pub domain: Domain,
    pub meta: ProblemKind,
    /// Starting guess for nonlinear sources.
    pub init: Option<Field>,
}

impl std::fmt::Debug for FredholmProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FredholmProblem")
            .field("lambda", &self.lambda)
            .field("kernel", &self.kernel)
            .field("rhs", &self.rhs)
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

impl FredholmProblem {
    pub fn new(lambda: f64, kernel: Kernel, f: Field, domain: Domain) -> Result<Self> {
        if lambda == 0.0 {
            return Err(Error::ZeroLambda);
        }
        Ok(Self {
            lambda,
            kernel,
            rhs: RightHandSide::Linear(f),
            domain,
            meta: ProblemKind::Generic,
            init: None,
        })
    }

    pub fn rhs_field(&self) -> Option<&Field> {
        match &self.rhs {
            RightHandSide::Linear(f) => Some(f),
            RightHandSide::Nonlinear { .. } => None,
        }
    }

    /// Classical Nyström when `recon` is `None`, decoupled otherwise.
    pub fn solve(
        &self,
        rule: &QuadratureRule,
        recon: Option<&ReconstructionOperator>,
        solve: SolveOptions,
        newton: NewtonOptions,
    ) -> Result<DiscreteSolution> {
        match &self.rhs {
            RightHandSide::Linear(f) => {
                let system = match recon {
                    None => assemble_classical(self.lambda, &self.kernel, f, rule)?,
                    Some(r) => assemble_decoupled(self.lambda, &self.kernel, f, rule, r)?,
                };
                solve_linear_with(&system, solve)
            }
            RightHandSide::Nonlinear { source, source_du } => {
                let zero: Field = Arc::new(|_| 0.0);
                let init = self.init.as_ref().unwrap_or(&zero);
                solve_nonlinear(self.lambda, &self.kernel, source, source_du, rule, recon, init, newton)
            }
        }
    }
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("problem", &self.problem)
            .field("reference_nodes", &self.reference_rule.len())
            .finish_non_exhaustive()
    }
}

/// A problem with known solution `u_exact`.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub problem: FredholmProblem,
    pub u_exact: Field,
    pub reference_rule: QuadratureRule,
}

/// Caches `f` per evaluation point; safe to share across threads.
pub fn memoize(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Field {
    let cache: RwLock<HashMap<(u64, u64), f64>> = RwLock::new(HashMap::new());
    Arc::new(move |p: Point| {
        let key = (p.x.to_bits(), p.y.to_bits());
        if let Some(v) = cache.read().expect("cache lock").get(&key) {
            return *v;
        }
        let v = f(p);
        cache.write().expect("cache lock").insert(key, v);
        v
    })
}

/// Seeded sample of points in the closed domain.
fn domain_samples(domain: &Domain, count: usize, seed: u64) -> Vec<Point> {
    let bb = domain.bounding_box;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = Point::new(rng.gen_range(bb.min.x..=bb.max.x), rng.gen_range(bb.min.y..=bb.max.y));
        if domain.contains_closed(p) {
            out.push(p);
        }
    }
    out
}

/// `s u − ∫ J u = f` divided through by `s`: `λ = 1`, `k = J/s`, rhs `f/s`.
pub fn normalize_static(s: Field, j: &Kernel, f: Field, domain: &Domain) -> Result<FredholmProblem> {
    let min = domain_samples(domain, POSITIVITY_SAMPLES, 0x5_u64)
        .into_iter()
        .map(|p| s(p))
        .fold(f64::INFINITY, f64::min);
    if !(min > POSITIVITY_FLOOR) {
        return Err(Error::NonpositiveS { min });
    }
    let s2 = s.clone();
    Ok(FredholmProblem {
        lambda: 1.0,
        kernel: j.divided_by(s),
        rhs: RightHandSide::Linear(Arc::new(move |x| f(x) / s2(x))),
        domain: domain.clone(),
        meta: ProblemKind::Static,
        init: None,
    })
}

/// Nodes and weights of a masked tensor Gauss grid covering
/// `(bbox ⊕ radius) \ Ω`, aligned with the bounding box.
fn collar_rule(domain: &Domain, radius: f64, resolution: usize) -> (Vec<Point>, Vec<f64>) {
    let bb = domain.bounding_box;
    let side = bb.width().max(bb.height());
    let nx = ((resolution as f64 * bb.width() / side).round() as usize).max(1);
    let ny = ((resolution as f64 * bb.height() / side).round() as usize).max(1);
    let (dx, dy) = (bb.width() / nx as f64, bb.height() / ny as f64);
    let (mx, my) = ((radius / dx).ceil() as i64, (radius / dy).ceil() as i64);
    let (gx, gw) = gauss_legendre_interval(2, 0.0, 1.0);
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for j in -my..ny as i64 + my {
        for i in -mx..nx as i64 + mx {
            let x0 = bb.min.x + i as f64 * dx;
            let y0 = bb.min.y + j as f64 * dy;
            for (a, wa) in gx.iter().zip(&gw) {
                for (b, wb) in gx.iter().zip(&gw) {
                    let p = Point::new(x0 + a * dx, y0 + b * dy);
                    if !domain.contains_closed(p) {
                        pts.push(p);
                        wts.push(wa * wb * dx * dy);
                    }
                }
            }
        }
    }
    (pts, wts)
}

/// `u − ∫_Ω J u = f + ∫_{ℝ²∖Ω} J(x − y) g(y) dy`.
pub fn build_dirichlet(j: &Kernel, g: Field, f: Field, domain: &Domain, exterior_resolution: usize) -> Result<FredholmProblem> {
    let radius = effective_support_radius(j, SUPPORT_TOLERANCE)?;
    let (pts, wts) = collar_rule(domain, radius, exterior_resolution.max(1));
    let gw: Vec<f64> = pts.iter().zip(&wts).map(|(&p, w)| w * g(p)).collect();
    let kernel = j.clone();
    let boundary = memoize(move |x| {
        compensated_sum(
            pts.iter()
                .zip(&gw)
                .filter(|(p, _)| p.dist(x) <= radius)
                .map(|(&p, v)| kernel.eval(x, p) * v),
        )
    });
    Ok(FredholmProblem {
        lambda: 1.0,
        kernel: j.clone(),
        rhs: RightHandSide::Linear(Arc::new(move |x| f(x) + boundary(x))),
        domain: domain.clone(),
        meta: ProblemKind::Dirichlet,
        init: None,
    })
}

/// `s(x) = Σ_i w_i J(x − y_i)` on the production rule.
pub fn neumann_s(j: &Kernel, rule: &QuadratureRule) -> Field {
    let kernel = j.clone();
    let pts = rule.points().to_vec();
    let wts = rule.weights.clone();
    memoize(move |x| compensated_sum(pts.iter().zip(&wts).map(|(&y, w)| w * kernel.eval(x, y))))
}

/// `s(x) u − ∫_Ω J u = f` with `s` computed on `rule`.
pub fn build_neumann(j: &Kernel, f: Field, domain: &Domain, rule: &QuadratureRule) -> Result<FredholmProblem> {
    build_neumann_absorbing(j, f, domain, rule, 0.0)
}

/// Neumann form with an extra absorption `μ u`: `(s + μ) u − ∫_Ω J u = f`.
/// Constants span the null space when `μ = 0`.
pub fn build_neumann_absorbing(
    j: &Kernel,
    f: Field,
    domain: &Domain,
    rule: &QuadratureRule,
    absorption: f64,
) -> Result<FredholmProblem> {
    let s = neumann_s(j, rule);
    let s: Field = if absorption == 0.0 {
        s
    } else {
        Arc::new(move |x| s(x) + absorption)
    };
    let mut p = normalize_static(s, j, f, domain)?;
    p.meta = ProblemKind::Neumann;
    Ok(p)
}

/// Picks `f = λu* − Q_ref[k(x, ·) u*]` so that `u*` solves the problem up
/// to the reference rule's accuracy.
pub fn manufacture(u_exact: Field, lambda: f64, k: &Kernel, domain: &Domain, reference_rule: &QuadratureRule) -> Result<ManufacturedCase> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let pts = reference_rule.points().to_vec();
    let wu: Vec<f64> = pts
        .iter()
        .zip(&reference_rule.weights)
        .map(|(&y, w)| w * u_exact(y))
        .collect();
    let kernel = k.clone();
    let u = u_exact.clone();
    let f = memoize(move |x| lambda * u(x) - compensated_sum(pts.iter().zip(&wu).map(|(&y, v)| kernel.eval(x, y) * v)));
    let mut problem = FredholmProblem::new(lambda, k.clone(), f, domain.clone())?;
    problem.meta = ProblemKind::Manufactured;
    Ok(ManufacturedCase {
        problem,
        u_exact,
        reference_rule: reference_rule.clone(),
    })
}

/// Smooth non-polynomial exact solution used by the studies.
pub fn smooth_solution() -> Field {
    Arc::new(|p: Point| (0.5 * p.x).exp() * (1.3 * p.y).cos() + 0.25 * (2.0 * p.x * p.y).sin())
}

/// Gaussian manufactured case with [`smooth_solution`].
pub fn manufactured_smooth(domain: &Domain, sigma: f64, lambda: f64, reference_resolution: usize) -> Result<ManufacturedCase> {
    let k = Kernel::gaussian(sigma)?;
    let reference = crate::quadrature::reference_rule(domain, reference_resolution)?;
    manufacture(smooth_solution(), lambda, &k, domain, &reference)
}

/// Unit square, Gaussian `J`, exterior datum `g(y) = 1 + y₁/2`, `f = 0`.
pub fn dirichlet_square(sigma: f64, exterior_resolution: usize) -> Result<FredholmProblem> {
    let j = Kernel::gaussian(sigma)?;
    build_dirichlet(
        &j,
        Arc::new(|p: Point| 1.0 + 0.5 * p.x),
        Arc::new(|_| 0.0),
        &Domain::unit_square(),
        exterior_resolution,
    )
}

/// Unit disk, Gaussian `J`, `f(x) = x₁`, absorption `μ`.
pub fn neumann_disk(sigma: f64, rule: &QuadratureRule, absorption: f64) -> Result<FredholmProblem> {
    let j = Kernel::gaussian(sigma)?;
    build_neumann_absorbing(&j, Arc::new(|p: Point| p.x), &Domain::unit_disk(), rule, absorption)
}

/// Unit disk with a lethal exterior and logistic growth `r u (a − u)`:
/// `u − ∫_Ω J u = r u (a − u)`, started from the carrying capacity `a`.
pub fn logistic_disk(sigma: f64, r: Field, a: Field) -> Result<FredholmProblem> {
    let j = Kernel::gaussian(sigma)?;
    let (source, source_du) = logistic_source(r, a.clone());
    Ok(FredholmProblem {
        lambda: 1.0,
        kernel: j,
        rhs: RightHandSide::Nonlinear { source, source_du },
        domain: Domain::unit_disk(),
        meta: ProblemKind::Generic,
        init: Some(a),
    })
}

/// `P(|Z| ≤ t)` for a standard normal `Z`, by Gauss–Legendre on `[0, t]`.
/// Used as an oracle for Gaussian masses on rectangles.
pub fn normal_central_mass(t: f64) -> f64 {
    let mut total = 0.0;
    let cells = 64;
    for c in 0..cells {
        let a = t * c as f64 / cells as f64;
        let b = t * (c + 1) as f64 / cells as f64;
        let (x, w) = gauss_legendre_interval(10, a, b);
        total += x.iter().zip(&w).map(|(x, w)| w * (-0.5 * x * x).exp()).sum::<f64>();
    }
    2.0 * total / (2.0 * std::f64::consts::PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::quadrature::{reference_rule, tensor_gauss_composite};
    use crate::solver::solve_linear;

    fn field(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Field {
        Arc::new(f)
    }

    #[test]
    fn unit_s_keeps_problem() {
        let j = Kernel::gaussian(0.3).unwrap();
        let f = field(|p| p.x * p.y + 1.0);
        let p = normalize_static(field(|_| 1.0), &j, f.clone(), &Domain::unit_square()).unwrap();
        assert_eq!(p.lambda, 1.0);
        assert_eq!(p.meta, ProblemKind::Static);
        for q in [Point::new(0.1, 0.2), Point::new(0.9, 0.4)] {
            assert_eq!(p.kernel.eval(q, Point::new(0.5, 0.5)), j.eval(q, Point::new(0.5, 0.5)));
            assert_eq!(p.rhs_field().unwrap()(q), f(q));
        }
    }

    #[test]
    fn constant_s_solutions_coincide() {
        let dom = Domain::unit_square();
        let rule = tensor_gauss_composite(&Rect::unit(), 4, 3).unwrap();
        let j = Kernel::gaussian(0.3).unwrap();
        let f = field(|p| 1.0 + p.x);
        let norm = normalize_static(field(|_| 2.0), &j, f.clone(), &dom).unwrap();
        let a = solve_linear(&assemble_classical(2.0, &j, &f, &rule).unwrap()).unwrap();
        let b = norm.solve(&rule, None, SolveOptions::default(), NewtonOptions::default()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn vanishing_s_rejected() {
        let j = Kernel::gaussian(0.3).unwrap();
        let r = normalize_static(field(|p| p.x - 0.5), &j, field(|_| 1.0), &Domain::unit_square());
        assert!(matches!(r, Err(Error::NonpositiveS { .. })));
    }

    #[test]
    fn dirichlet_zero_datum_and_deep_points() {
        let j = Kernel::gaussian(0.05).unwrap();
        let f = field(|p| p.x);
        let p = build_dirichlet(&j, field(|_| 0.0), f.clone(), &Domain::unit_square(), 40).unwrap();
        let rhs = p.rhs_field().unwrap();
        let q = Point::new(0.3, 0.7);
        assert_eq!(rhs(q), f(q));
        let p = build_dirichlet(&j, field(|_| 1.0), field(|_| 0.0), &Domain::unit_square(), 40).unwrap();
        // Support radius of σ = 0.05 at 1e-12 is about 0.37.
        assert!(p.rhs_field().unwrap()(Point::new(0.5, 0.5)) <= 1e-12);
    }

    #[test]
    fn dirichlet_edge_mass() {
        let sigma = 0.2;
        let j = Kernel::gaussian(sigma).unwrap();
        let p = build_dirichlet(&j, field(|_| 1.0), field(|_| 0.0), &Domain::unit_square(), 100).unwrap();
        let b = p.rhs_field().unwrap()(Point::new(0.5, 0.0));
        // Exterior mass: half-plane plus the lateral strips beyond x = 0, 1.
        let oracle = 1.0 - 0.5 * normal_central_mass(0.5 / sigma);
        assert!((b - oracle).abs() < 2e-3, "{b} vs {oracle}");
    }

    #[test]
    fn neumann_masses() {
        let dom = Domain::unit_square();
        let rule = tensor_gauss_composite(&Rect::unit(), 40, 6).unwrap();
        let j = Kernel::gaussian(0.05).unwrap();
        let s = neumann_s(&j, &rule);
        assert!((s(Point::new(0.5, 0.5)) - 1.0).abs() < 1e-8);
        assert!((s(Point::new(0.0, 0.5)) - 0.5).abs() < 1e-3);
        let p = build_neumann(&j, field(|_| 1.0), &dom, &rule).unwrap();
        assert_eq!(p.meta, ProblemKind::Neumann);
        let zero = build_neumann(&Kernel::zero(), field(|_| 1.0), &dom, &rule);
        assert!(matches!(zero, Err(Error::NonpositiveS { .. })));
    }

    #[test]
    fn neumann_s_mass_bound() {
        let rule = reference_rule(&Domain::unit_disk(), 4).unwrap();
        let s = neumann_s(&Kernel::gaussian(0.2).unwrap(), &rule);
        for p in domain_samples(&Domain::unit_disk(), 200, 3) {
            let v = s(p);
            assert!(v > 0.0 && v <= 1.0 + 1e-8, "{v}");
        }
    }

    #[test]
    fn manufactured_cases() {
        let dom = Domain::unit_square();
        let rule = tensor_gauss_composite(&Rect::unit(), 8, 6).unwrap();
        let c = manufacture(field(|_| 1.0), 2.0, &Kernel::zero(), &dom, &rule).unwrap();
        assert_eq!(c.problem.rhs_field().unwrap()(Point::new(0.3, 0.3)), 2.0);

        let sigma = 0.5;
        let k = Kernel::gaussian(sigma).unwrap();
        let c = manufacture(field(|_| 1.0), 1.0, &k, &dom, &rule).unwrap();
        let m = normal_central_mass(0.5 / sigma).powi(2);
        let fc = c.problem.rhs_field().unwrap()(Point::new(0.5, 0.5));
        assert!((fc - (1.0 - m)).abs() < 1e-12, "{fc} vs {}", 1.0 - m);

        let c = manufactured_smooth(&dom, 0.3, 1.0, 8).unwrap();
        let f = c.problem.rhs_field().unwrap();
        for x in domain_samples(&dom, 20, 9) {
            let q = compensated_sum(
                c.reference_rule
                    .points()
                    .iter()
                    .zip(&c.reference_rule.weights)
                    .map(|(&y, w)| w * c.problem.kernel.eval(x, y) * (c.u_exact)(y)),
            );
            assert!((c.problem.lambda * (c.u_exact)(x) - q - f(x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn memoized_field_is_stable() {
        let f = memoize(|p: Point| p.x.sin() + p.y);
        let p = Point::new(0.25, 0.5);
        assert_eq!(f(p), f(p));
        assert_eq!(f(p), 0.25f64.sin() + 0.5);
    }

    #[test]
    fn normal_mass_oracle() {
        assert!((normal_central_mass(1.0) - 0.682_689_492_137_086).abs() < 1e-13);
        assert!((normal_central_mass(2.5) - 0.987_580_669_348_448).abs() < 1e-13);
    }
}
