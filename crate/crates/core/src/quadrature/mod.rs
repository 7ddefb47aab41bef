//! Quadrature rules on the domain and on `[0, 1]`.

mod fit;
mod gauss;
mod meshless;
mod moments;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Disk, Domain, Point, Rect, Shape};
use crate::nodes::NodeSet;

pub use fit::{moment_fit_weights, moment_residual, nnls, FitMode, MOMENT_TOLERANCE};
pub use gauss::{gauss_legendre, gauss_legendre_interval};
pub use meshless::{meshless_rule, MeshlessOptions};
pub use moments::{
    adaptive_integrate, compute_moments, compute_moments_in_frame, domain_area, eval_monomials,
    monomial_count, monomial_exponents, Frame, MomentTable, DEFAULT_REFINEMENT, MAX_MOMENT_DEGREE,
};

/// Common interface of 1D and 2D rules.
pub trait Quadrature {
    type Node: Copy;

    fn node_list(&self) -> Vec<Self::Node>;
    fn weights(&self) -> &[f64];

    /// `Σ w_i f(y_i)`.
    fn apply(&self, f: impl Fn(Self::Node) -> f64) -> f64 {
        compensated_sum(self.node_list().into_iter().zip(self.weights()).map(|(y, w)| w * f(y)))
    }

    /// `‖w‖₁`.
    fn stability_l1(&self) -> f64 {
        compensated_sum(self.weights().iter().map(|w| w.abs()))
    }
}

/// Nodes and weights on a planar domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: NodeSet,
    pub weights: Vec<f64>,
    pub nominal_order: usize,
    pub domain_tag: String,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.nodes.points
    }

    /// One `x y w` line per node, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(72 * self.len());
        for (p, w) in self.nodes.points.iter().zip(&self.weights) {
            let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p.x, p.y, w);
        }
        s
    }
}

impl Quadrature for QuadratureRule {
    type Node = Point;

    fn node_list(&self) -> Vec<Point> {
        self.nodes.points.clone()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn apply(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.nodes
            .points
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * f(*y))
            .sum()
    }
}

/// Neumaier summation; weights of mixed sign and large `‖w‖₁` otherwise
/// lose digits to cancellation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `Σ w_i f(y_i)`.
pub fn apply_rule<Q: Quadrature>(rule: &Q, f: impl Fn(Q::Node) -> f64) -> f64 {
    rule.apply(f)
}

/// `Σ |w_i|`.
pub fn stability_l1<Q: Quadrature>(rule: &Q) -> f64 {
    rule.stability_l1()
}

/// A rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub nominal_order: usize,
}

impl Quadrature for Rule1d {
    type Node = f64;

    fn node_list(&self) -> Vec<f64> {
        self.nodes.clone()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Right rectangle rule: nodes `i/N`, weights `1/N`, order 1.
pub fn rectangle_rule_1d(n: usize) -> Result<Rule1d> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            reason: "must be at least 1".into(),
        });
    }
    let nf = n as f64;
    Ok(Rule1d {
        nodes: (1..=n).map(|i| i as f64 / nf).collect(),
        weights: vec![1.0 / nf; n],
        nominal_order: 1,
    })
}

/// The rectangle rule with every node duplicated at `i/N − 1/N²`: weights
/// `1 + 1/N` on the original nodes and `−1` on the copies. Still first
/// order on `C¹`, but `‖w‖₁ = 2N + 1` grows without bound.
pub fn unstable_rectangle_rule_1d(n: usize) -> Result<Rule1d> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "N",
            reason: "must be at least 1".into(),
        });
    }
    let nf = n as f64;
    let mut nodes: Vec<f64> = (1..=n).map(|i| i as f64 / nf).collect();
    nodes.extend((1..=n).map(|i| i as f64 / nf - 1.0 / (nf * nf)));
    let mut weights = vec![1.0 + 1.0 / nf; n];
    weights.extend(std::iter::repeat_n(-1.0, n));
    Ok(Rule1d {
        nodes,
        weights,
        nominal_order: 1,
    })
}

pub(crate) fn domain_tag(domain: &Domain) -> String {
    fn tag(s: &Shape) -> String {
        match s {
            Shape::Rect(r) => format!("rect({},{},{},{})", r.min.x, r.min.y, r.max.x, r.max.y),
            Shape::Disk(d) => format!("disk({},{},{})", d.center.x, d.center.y, d.radius),
            Shape::Union(a, b) => format!("union({},{})", tag(a), tag(b)),
            Shape::Intersection(a, b) => format!("intersect({},{})", tag(a), tag(b)),
            Shape::Difference(a, b) => format!("diff({},{})", tag(a), tag(b)),
        }
    }
    tag(&domain.shape)
}

fn tagged_rule(points: Vec<Point>, weights: Vec<f64>, spacing: f64, order: usize, tag: String) -> QuadratureRule {
    QuadratureRule {
        nodes: NodeSet::from_points(points, spacing),
        weights,
        nominal_order: order,
        domain_tag: tag,
    }
}

/// Tensor Gauss–Legendre rule with `points_per_axis²` nodes, exact for
/// polynomials of degree `2·points_per_axis − 1` in each variable.
pub fn tensor_gauss(rect: &Rect, points_per_axis: usize) -> Result<QuadratureRule> {
    tensor_gauss_composite(rect, 1, points_per_axis)
}

/// Tensor Gauss rule repeated on a `cells × cells` subdivision.
pub fn tensor_gauss_composite(rect: &Rect, cells: usize, points_per_axis: usize) -> Result<QuadratureRule> {
    if points_per_axis == 0 || cells == 0 {
        return Err(Error::InvalidParameter {
            name: "points_per_axis",
            reason: "must be at least 1".into(),
        });
    }
    let (p, w) = gauss::tensor_points(rect, cells, points_per_axis);
    let spacing = rect.width().max(rect.height()) / (cells * points_per_axis) as f64;
    Ok(tagged_rule(
        p,
        w,
        spacing,
        2 * points_per_axis,
        domain_tag(&Domain::rectangle(*rect)),
    ))
}

/// Polar product rule on a disk.
pub fn disk_polar_rule(disk: &Disk, n_radial: usize, n_angular: usize) -> Result<QuadratureRule> {
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::InvalidParameter {
            name: "n_radial",
            reason: "must be at least 1".into(),
        });
    }
    let (p, w) = gauss::disk_polar_points(disk, n_radial, n_angular);
    let spacing = disk.radius / n_radial as f64;
    Ok(tagged_rule(
        p,
        w,
        spacing,
        2 * n_radial,
        domain_tag(&Domain::disk(disk.center, disk.radius)),
    ))
}

/// Globally moment-fitted rule on `nodes` (one fit over the whole domain).
pub fn global_fit_rule(domain: &Domain, nodes: &NodeSet, degree: usize, mode: FitMode) -> Result<QuadratureRule> {
    let frame = Frame::for_rect(&domain.bounding_box);
    let table = compute_moments_in_frame(domain, degree, DEFAULT_REFINEMENT, frame)?;
    let weights = moment_fit_weights(&nodes.points, &table, mode)?;
    Ok(QuadratureRule {
        nodes: nodes.clone(),
        weights,
        nominal_order: degree + 1,
        domain_tag: domain_tag(domain),
    })
}

/// A high-accuracy rule for reference integrals: composite Gauss on
/// rectangles, polar Gauss on disks, a dense fitted rule otherwise.
pub fn reference_rule(domain: &Domain, resolution: usize) -> Result<QuadratureRule> {
    let resolution = resolution.max(1);
    if let Some(r) = domain.as_rect() {
        return tensor_gauss_composite(&r, resolution, 8);
    }
    if let Some(d) = domain.as_disk() {
        return disk_polar_rule(&d, 4 * resolution, 16 * resolution);
    }
    let h = domain.diameter() / (8.0 * resolution as f64);
    let nodes = crate::nodes::generate_nodes(domain, h, 0x5eed, true)?;
    meshless_rule(domain, &nodes, 6, FitMode::Nonnegative, MeshlessOptions::default())
}

/// Errors of a rule family against `exact` and the resulting EOC sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderMeasurement {
    pub hs: Vec<f64>,
    pub errors: Vec<f64>,
    pub l1: Vec<f64>,
    pub eoc: Vec<f64>,
}

/// `EOC_i = log(e_i/e_{i+1}) / log(h_i/h_{i+1})` over a refinement ladder.
pub fn measure_order<Q: Quadrature>(
    family: impl Fn(f64) -> Result<Q>,
    f: impl Fn(Q::Node) -> f64,
    exact: f64,
    hs: &[f64],
) -> Result<OrderMeasurement> {
    if hs.len() < 3 {
        return Err(Error::TooFewLevels {
            needed: 3,
            got: hs.len(),
        });
    }
    let mut errors = Vec::with_capacity(hs.len());
    let mut l1 = Vec::with_capacity(hs.len());
    for (level, &h) in hs.iter().enumerate() {
        let rule = family(h)?;
        let e = (rule.apply(&f) - exact).abs();
        if e < 1e-14 {
            return Err(Error::ZeroError { level, error: e });
        }
        errors.push(e);
        l1.push(rule.stability_l1());
    }
    let eoc = crate::study::estimate_eoc(&errors, hs)?;
    Ok(OrderMeasurement {
        hs: hs.to_vec(),
        errors,
        l1,
        eoc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn tensor_gauss_examples() {
        let r = tensor_gauss(&Rect::unit(), 1).unwrap();
        assert_eq!(r.points(), &[Point::new(0.5, 0.5)]);
        assert_eq!(r.weights, vec![1.0]);

        let r = tensor_gauss(&Rect::unit(), 2).unwrap();
        let v = r.apply(|p| p.x.powi(3) * p.y.powi(3));
        assert!((v - 1.0 / 16.0).abs() < 1e-14);
        assert!(r.weights.iter().all(|w| *w > 0.0));

        let r = tensor_gauss(&Rect::unit(), 5).unwrap();
        let v = r.apply(|p| (p.x + p.y).exp());
        assert!((v - (E - 1.0).powi(2)).abs() < 1e-10);
        assert!((r.stability_l1() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_unit_mass_on_40_point_rule() {
        let sigma: f64 = 1.0;
        let box8 = Rect::new(-8.0 * sigma, -8.0 * sigma, 8.0 * sigma, 8.0 * sigma);
        let r = tensor_gauss(&box8, 40).unwrap();
        let norm = 1.0 / (2.0 * PI * sigma * sigma);
        let v = r.apply(|p| norm * (-(p.x * p.x + p.y * p.y) / (2.0 * sigma * sigma)).exp());
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn rectangle_rules() {
        let r = rectangle_rule_1d(2).unwrap();
        assert_eq!(r.nodes, vec![0.5, 1.0]);
        assert_eq!(r.weights, vec![0.5, 0.5]);
        assert!((r.apply(|x| x) - 0.75).abs() < 1e-15);
        for n in 1..20 {
            let r = rectangle_rule_1d(n).unwrap();
            assert!((r.apply(|_| 1.0) - 1.0).abs() < 1e-14);
        }
        let u = unstable_rectangle_rule_1d(2).unwrap();
        assert_eq!(u.nodes, vec![0.5, 1.0, 0.25, 0.75]);
        assert_eq!(u.weights, vec![1.5, 1.5, -1.0, -1.0]);
        assert_eq!(u.apply(|x| x), 1.25);
        assert_eq!(apply_rule(&u, |x| x), 1.25);
        assert!(rectangle_rule_1d(0).is_err());
    }

    #[test]
    fn unstable_fixture_integrates_constants() {
        for n in 1..=64 {
            let u = unstable_rectangle_rule_1d(n).unwrap();
            assert!((u.apply(|_| 1.0) - 1.0).abs() < 1e-13, "N={n}");
        }
    }

    #[test]
    fn zero_integrand() {
        let r = tensor_gauss(&Rect::unit(), 3).unwrap();
        assert_eq!(apply_rule(&r, |_| 0.0), 0.0);
    }

    #[test]
    fn eoc_of_rectangle_rules() {
        let hs = [0.25, 0.125, 0.0625, 0.03125];
        let family = |h: f64| rectangle_rule_1d((1.0 / h).round() as usize);
        let m = measure_order(family, |x| x, 0.5, &hs).unwrap();
        for e in &m.eoc {
            assert!((e - 1.0).abs() < 0.05);
        }
        let family = |h: f64| unstable_rectangle_rule_1d((1.0 / h).round() as usize);
        let m = measure_order(family, |x| x, 0.5, &hs).unwrap();
        assert!((m.eoc.last().unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn exact_rule_order_not_measurable() {
        let hs = [0.5, 0.25, 0.125];
        let family = |_h: f64| tensor_gauss(&Rect::unit(), 3);
        assert!(matches!(
            measure_order(family, |p: Point| p.x * p.y, 0.25, &hs),
            Err(Error::ZeroError { .. })
        ));
        assert!(matches!(
            measure_order(|_h: f64| tensor_gauss(&Rect::unit(), 3), |p: Point| p.x, 0.5, &hs[..2]),
            Err(Error::TooFewLevels { .. })
        ));
    }
}
