//! Moving least squares reconstruction from solution nodes `X` to
//! quadrature nodes `Y`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernel::Field;
use crate::nodes::{NodeSet, PointGrid};
use crate::quadrature::monomial_count;

/// Local Gram condition estimate above which the support radius doubles.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;
const MAX_RADIUS_DOUBLINGS: usize = 3;

/// Wendland C² function `(1 − t)⁴ (4t + 1)` on `[0, 1]`.
pub fn wendland_c2(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t;
        s * s * s * s * (4.0 * t + 1.0)
    }
}

/// Sparse `|Y| × |X|` matrix with `v|Y ≈ R v|X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionOperator {
    pub x: NodeSet,
    pub y: NodeSet,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    pub degree: usize,
    pub radius_factor: f64,
    pub nominal_order: usize,
    /// Support radius used for each row (0 for coincident rows).
    pub radii: Vec<f64>,
}

impl ReconstructionOperator {
    /// `R = I` on a single node set.
    pub fn identity(nodes: &NodeSet) -> Self {
        let n = nodes.len();
        Self {
            x: nodes.clone(),
            y: nodes.clone(),
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![1.0; n],
            degree: 0,
            radius_factor: 1.0,
            nominal_order: usize::MAX,
            radii: vec![0.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.x.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and coefficients of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn apply(&self, values_at_x: &[f64]) -> Result<Vec<f64>> {
        if values_at_x.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: values_at_x.len(),
            });
        }
        Ok((0..self.rows())
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, r)| r * values_at_x[j]).sum()
            })
            .collect())
    }

    /// `max_i Σ_j |R_ij|`.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows())
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `‖f|Y − R f|X‖_∞`.
    pub fn reconstruction_error(&self, f: &Field) -> f64 {
        let fx: Vec<f64> = self.x.points.iter().map(|&p| f(p)).collect();
        let rf = self.apply(&fx).expect("sizes agree by construction");
        self.y
            .points
            .iter()
            .zip(&rf)
            .map(|(&p, r)| (f(p) - r).abs())
            .fold(0.0, f64::max)
    }

    /// Rows whose support radius had to grow past the nominal value.
    pub fn grown_rows(&self) -> usize {
        let nominal = self.radius_factor * self.x.spacing_h * (self.degree + 1) as f64;
        self.radii.iter().filter(|r| **r > nominal * (1.0 + 1e-12)).count()
    }
}

/// MLS shape functions of degree `degree` with Wendland C² weights and
/// support radius `radius_factor · h_X · (degree + 1)`.
pub fn build_mls(x: &NodeSet, y: &NodeSet, degree: usize, radius_factor: f64) -> Result<ReconstructionOperator> {
    let m = monomial_count(degree);
    if x.len() < m {
        return Err(Error::InvalidParameter {
            name: "X",
            reason: format!("{} nodes cannot support degree {degree}", x.len()),
        });
    }
    if !(radius_factor >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "radius_factor",
            reason: format!("must be at least 1, got {radius_factor}"),
        });
    }
    let rho0 = radius_factor * x.spacing_h * (degree + 1) as f64;
    let grid = PointGrid::new(&x.points, rho0);
    let mut extent = x.points.iter().chain(&y.points);
    let diam = {
        let first = *extent.next().expect("X is nonempty");
        let (mut lo, mut hi) = (first, first);
        for p in extent {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        lo.dist(hi)
    };
    let coincide = 1e-12 * diam;

    let mut row_ptr = Vec::with_capacity(y.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut radii = Vec::with_capacity(y.len());
    row_ptr.push(0);
    let mut scratch = LocalFit::new(degree);
    for &yp in &y.points {
        if let Some((j, d)) = grid.nearest(yp) {
            if d < coincide {
                cols.push(j);
                vals.push(1.0);
                radii.push(0.0);
                row_ptr.push(cols.len());
                continue;
            }
        }
        let mut rho = rho0;
        let mut done = false;
        for _ in 0..=MAX_RADIUS_DOUBLINGS {
            let mut nbrs = grid.within(yp, rho);
            nbrs.retain(|&j| x.points[j].dist(yp) < rho);
            nbrs.sort_unstable();
            if nbrs.len() >= m {
                if let Some(coef) = scratch.shape_values(yp, rho, &nbrs, &x.points) {
                    cols.extend_from_slice(&nbrs);
                    vals.extend(coef);
                    radii.push(rho);
                    row_ptr.push(cols.len());
                    done = true;
                    break;
                }
            }
            rho *= 2.0;
        }
        if !done {
            return Err(Error::InsufficientLocalNodes {
                x: yp.x,
                y: yp.y,
                degree,
            });
        }
    }
    Ok(ReconstructionOperator {
        x: x.clone(),
        y: y.clone(),
        row_ptr,
        cols,
        vals,
        degree,
        radius_factor,
        nominal_order: degree + 1,
        radii,
    })
}

struct LocalFit {
    degree: usize,
    basis: Vec<f64>,
}

impl LocalFit {
    fn new(degree: usize) -> Self {
        Self {
            degree,
            basis: Vec::new(),
        }
    }

    fn monomials(&mut self, u: f64, v: f64) -> &[f64] {
        self.basis.clear();
        for t in 0..=self.degree {
            for b in 0..=t {
                self.basis.push(u.powi((t - b) as i32) * v.powi(b as i32));
            }
        }
        &self.basis
    }

    /// Shape function values `ψ_j(y) = w_j p(x_j)ᵀ G⁻¹ p(y)` in the local
    /// frame centred at `y` and scaled by `rho`; `None` when the weighted
    /// Gram matrix is too ill-conditioned.
    fn shape_values(&mut self, y: Point, rho: f64, nbrs: &[usize], xs: &[Point]) -> Option<Vec<f64>> {
        let m = monomial_count(self.degree);
        let n = nbrs.len();
        let mut p = DMatrix::zeros(n, m);
        let mut w = Vec::with_capacity(n);
        for (r, &j) in nbrs.iter().enumerate() {
            let d = xs[j] - y;
            w.push(wendland_c2(d.norm() / rho));
            let row = self.monomials(d.x / rho, d.y / rho);
            for (c, v) in row.iter().enumerate() {
                p[(r, c)] = *v;
            }
        }
        let mut gram = DMatrix::zeros(m, m);
        for r in 0..n {
            for a in 0..m {
                let pa = w[r] * p[(r, a)];
                for b in 0..m {
                    gram[(a, b)] += pa * p[(r, b)];
                }
            }
        }
        let eig = SymmetricEigen::new(gram.clone());
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |a: f64, b: &f64| a.max(b.abs()));
        let lmin = eig.eigenvalues.iter().fold(f64::INFINITY, |a: f64, b: &f64| a.min(*b));
        if !(lmin > 0.0) || lmax / lmin > GRAM_CONDITION_LIMIT {
            return None;
        }
        let mut rhs = DVector::zeros(m);
        rhs[0] = 1.0;
        let a = gram.cholesky()?.solve(&rhs);
        Some(
            (0..n)
                .map(|r| w[r] * (0..m).map(|c| p[(r, c)] * a[c]).sum::<f64>())
                .collect(),
        )
    }
}
