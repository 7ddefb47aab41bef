//! Monomial moments of domains and adaptive integration over them.
//!
//! Rectangles, disks and their intersections with a cell are integrated
//! exactly, as are differences whose hole lies inside the outer shape. Other
//! composites use a quadtree: cells certainly inside are integrated exactly,
//! cells certainly outside are dropped, and boundary cells are split down to
//! a fixed depth, where the domain is replaced by the polygon obtained by
//! clipping the cell at the boundary crossings of its edges.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Disk, Domain, Point, Rect, Shape};

use super::gauss::{gauss_legendre_interval, tensor_points, triangle_points};

pub const MAX_MOMENT_DEGREE: usize = 20;
pub const DEFAULT_REFINEMENT: usize = 12;

/// Affine frame `ξ = (x − cx)/sx`, `η = (y − cy)/sy` in which monomials
/// are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub center: Point,
    pub scale_x: f64,
    pub scale_y: f64,
}

impl Frame {
    pub fn identity() -> Self {
        Self {
            center: Point::new(0.0, 0.0),
            scale_x: 1.0,
            scale_y: 1.0,
        }
    }

    /// Maps `rect` onto `[-1, 1]²`.
    pub fn for_rect(rect: &Rect) -> Self {
        Self {
            center: rect.center(),
            scale_x: 0.5 * rect.width(),
            scale_y: 0.5 * rect.height(),
        }
    }

    #[inline]
    pub fn local(&self, p: Point) -> (f64, f64) {
        (
            (p.x - self.center.x) / self.scale_x,
            (p.y - self.center.y) / self.scale_y,
        )
    }

    fn jacobian(&self) -> f64 {
        self.scale_x * self.scale_y
    }
}

/// Exponents `(a, b)` of all monomials `x^a y^b` with `a + b ≤ degree`,
/// ordered by total degree, then by decreasing power of `x`.
pub fn monomial_exponents(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(monomial_count(degree));
    for t in 0..=degree {
        for b in 0..=t {
            out.push((t - b, b));
        }
    }
    out
}

pub fn monomial_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// All scaled monomials at `p`, in [`monomial_exponents`] order.
pub fn eval_monomials(frame: &Frame, degree: usize, p: Point, out: &mut Vec<f64>) {
    let (u, v) = frame.local(p);
    eval_monomials_local(degree, u, v, out);
}

fn eval_monomials_local(degree: usize, u: f64, v: f64, out: &mut Vec<f64>) {
    out.clear();
    let mut pu = [1.0; MAX_MOMENT_DEGREE + 2];
    let mut pv = [1.0; MAX_MOMENT_DEGREE + 2];
    for k in 1..=degree {
        pu[k] = pu[k - 1] * u;
        pv[k] = pv[k - 1] * v;
    }
    for t in 0..=degree {
        for b in 0..=t {
            out.push(pu[t - b] * pv[b]);
        }
    }
}

/// Integrals of the scaled monomials over a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub degree: usize,
    pub frame: Frame,
    pub values: Vec<f64>,
}

impl MomentTable {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        let t = a + b;
        assert!(t <= self.degree, "monomial ({a},{b}) beyond table degree");
        self.values[t * (t + 1) / 2 + b]
    }

    /// `∫ 1`, which is the area in every frame.
    pub fn area(&self) -> f64 {
        self.values[0]
    }

    pub fn add_assign(&mut self, other: &MomentTable) {
        debug_assert_eq!(self.degree, other.degree);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }
}

/// Raw moments `∫_Ω x^a y^b dx dy`.
pub fn compute_moments(domain: &Domain, degree: usize, refinement: usize) -> Result<MomentTable> {
    compute_moments_in_frame(domain, degree, refinement, Frame::identity())
}

pub fn compute_moments_in_frame(
    domain: &Domain,
    degree: usize,
    refinement: usize,
    frame: Frame,
) -> Result<MomentTable> {
    if degree > MAX_MOMENT_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree,
            max: MAX_MOMENT_DEGREE,
        });
    }
    let values = region_moments(&domain.shape, &domain.bounding_box, &frame, degree, refinement);
    Ok(MomentTable {
        degree,
        frame,
        values,
    })
}

/// Moments of `shape ∩ region`, quadtree depth counted from `region`.
pub(crate) fn region_moments(
    shape: &Shape,
    region: &Rect,
    frame: &Frame,
    degree: usize,
    depth: usize,
) -> Vec<f64> {
    let n = monomial_count(degree);
    match shape {
        Shape::Rect(r) => match r.intersection(region) {
            Some(cell) => rect_moments(&cell, frame, degree),
            None => vec![0.0; n],
        },
        Shape::Disk(d) if region.contains(d.bbox().min) && region.contains(d.bbox().max) => {
            disk_moments(d.center, d.radius, frame, degree)
        }
        Shape::Disk(d) => disk_rect_moments(d, region, frame, degree),
        // A hole strictly inside its outer shape: subtract exactly.
        Shape::Difference(outer, hole) if outer.contains_rect(&hole.bbox()) => {
            let mut acc = region_moments(outer, region, frame, degree, depth);
            for (a, v) in acc.iter_mut().zip(region_moments(hole, region, frame, degree, depth)) {
                *a -= v;
            }
            acc
        }
        _ => {
            let mut acc = vec![0.0; n];
            quadtree(shape, region, frame, degree, depth, &mut acc);
            acc
        }
    }
}

fn quadtree(shape: &Shape, cell: &Rect, frame: &Frame, degree: usize, depth: usize, acc: &mut [f64]) {
    if shape.excludes_rect(cell) {
        return;
    }
    if shape.contains_rect(cell) {
        for (a, v) in acc.iter_mut().zip(rect_moments(cell, frame, degree)) {
            *a += v;
        }
        return;
    }
    if depth == 0 {
        let poly = clip_cell(shape, cell);
        if poly.len() >= 3 {
            let local: Vec<(f64, f64)> = poly.iter().map(|&p| frame.local(p)).collect();
            let jac = frame.jacobian();
            for (a, v) in acc.iter_mut().zip(polygon_moments_local(&local, degree)) {
                *a += jac * v;
            }
        }
        return;
    }
    for sub in split4(cell) {
        quadtree(shape, &sub, frame, degree, depth - 1, acc);
    }
}

pub(crate) fn split4(cell: &Rect) -> [Rect; 4] {
    let c = cell.center();
    [
        Rect::new(cell.min.x, cell.min.y, c.x, c.y),
        Rect::new(c.x, cell.min.y, cell.max.x, c.y),
        Rect::new(cell.min.x, c.y, c.x, cell.max.y),
        Rect::new(c.x, c.y, cell.max.x, cell.max.y),
    ]
}

/// Counter-clockwise polygon approximating `shape ∩ cell`: inside corners
/// plus the boundary crossings located on the cell edges by bisection.
fn clip_cell(shape: &Shape, cell: &Rect) -> Vec<Point> {
    let corners = cell.corners();
    let sd: Vec<f64> = corners.iter().map(|&c| shape.signed_distance(c)).collect();
    let mut poly = Vec::with_capacity(8);
    for k in 0..4 {
        let (p, q) = (corners[k], corners[(k + 1) % 4]);
        let (sp, sq) = (sd[k], sd[(k + 1) % 4]);
        if sp <= 0.0 {
            poly.push(p);
        }
        if (sp <= 0.0) != (sq <= 0.0) {
            poly.push(bisect_crossing(shape, p, q, sp));
        }
    }
    poly
}

fn bisect_crossing(shape: &Shape, p: Point, q: Point, sp: f64) -> Point {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let at = |t: f64| Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y));
    let inside_at_lo = sp <= 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (shape.signed_distance(at(mid)) <= 0.0) == inside_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// `∫ ξ^a η^b dξ dη` over a counter-clockwise polygon, by the divergence
/// theorem: `∮ ξ^{a+1}/(a+1) η^b dη`.
pub(crate) fn polygon_moments_local(poly: &[(f64, f64)], degree: usize) -> Vec<f64> {
    let mut out = vec![0.0; monomial_count(degree)];
    for k in 0..poly.len() {
        segment_flux(poly[k], poly[(k + 1) % poly.len()], degree, &mut out);
    }
    out
}

/// Adds `∫ ξ^{a+1}/(a+1) η^b dη` along a straight segment, exactly.
fn segment_flux((x0, y0): (f64, f64), (x1, y1): (f64, f64), degree: usize, out: &mut [f64]) {
    let dy = y1 - y0;
    if dy == 0.0 {
        return;
    }
    let (gt, gw) = gauss_legendre_interval(degree / 2 + 2, 0.0, 1.0);
    for (&t, &w) in gt.iter().zip(&gw) {
        flux_term(x0 + t * (x1 - x0), y0 + t * dy, w * dy, degree, out);
    }
}

#[inline]
fn flux_term(u: f64, v: f64, w_dv: f64, degree: usize, out: &mut [f64]) {
    let mut pu = [0.0; MAX_MOMENT_DEGREE + 2];
    let mut pv = [0.0; MAX_MOMENT_DEGREE + 2];
    pu[0] = 1.0;
    pv[0] = 1.0;
    for i in 1..=degree + 1 {
        pu[i] = pu[i - 1] * u;
        pv[i] = pv[i - 1] * v;
    }
    let mut idx = 0;
    for tdeg in 0..=degree {
        for b in 0..=tdeg {
            let a = tdeg - b;
            out[idx] += w_dv * pu[a + 1] / (a as f64 + 1.0) * pv[b];
            idx += 1;
        }
    }
}

/// Moments of `disk ∩ rect` from the flux through its boundary: the parts
/// of the rectangle edges inside the disk and the arcs inside the rectangle.
/// Arcs use composite Gauss–Legendre in the angle, accurate to rounding.
fn disk_rect_moments(d: &Disk, rect: &Rect, frame: &Frame, degree: usize) -> Vec<f64> {
    let (c, r) = (d.center, d.radius);
    let on_circle = |t: f64| Point::new(c.x + r * t.cos(), c.y + r * t.sin());
    let slack = 1e-12 * r;
    let mut angles = Vec::with_capacity(8);
    for (line, vertical) in [(rect.min.x, true), (rect.max.x, true), (rect.min.y, false), (rect.max.y, false)] {
        let off = if vertical { line - c.x } else { line - c.y };
        // Near-tangent lines only graze the circle; their crossings are noise.
        if off.abs() >= r - slack {
            continue;
        }
        let cand = if vertical {
            let t = (off / r).acos();
            [t, -t]
        } else {
            let t = (off / r).asin();
            [t, PI - t]
        };
        for t in cand {
            if rect.inflate(slack).contains(on_circle(t)) {
                angles.push(t.rem_euclid(2.0 * PI));
            }
        }
    }
    if angles.is_empty() {
        let inside = |p: Point| p.dist(c) <= r;
        return if rect.corners().iter().all(|&p| inside(p)) {
            rect_moments(rect, frame, degree)
        } else if rect.contains(c) {
            disk_moments(c, r, frame, degree)
        } else {
            vec![0.0; monomial_count(degree)]
        };
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let mut out = vec![0.0; monomial_count(degree)];
    // Straight pieces, counter-clockwise around the rectangle.
    let corners = rect.corners();
    for k in 0..4 {
        let (p, q) = (corners[k], corners[(k + 1) % 4]);
        let (dx, dy) = (q.x - p.x, q.y - p.y);
        let (fx, fy) = (p.x - c.x, p.y - c.y);
        if (if dx == 0.0 { fx } else { fy }).abs() >= r - slack {
            continue;
        }
        let a = dx * dx + dy * dy;
        let b = 2.0 * (fx * dx + fy * dy);
        let disc = b * b - 4.0 * a * (fx * fx + fy * fy - r * r);
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let t0 = ((-b - sq) / (2.0 * a)).max(0.0);
        let t1 = ((-b + sq) / (2.0 * a)).min(1.0);
        if t1 > t0 {
            let at = |t: f64| frame.local(Point::new(p.x + t * dx, p.y + t * dy));
            segment_flux(at(t0), at(t1), degree, &mut out);
        }
    }
    // Arcs, counter-clockwise in the angle.
    let n = angles.len();
    for k in 0..n {
        let t0 = angles[k];
        let t1 = if k + 1 < n { angles[k + 1] } else { angles[0] + 2.0 * PI };
        if !rect.inflate(slack).contains(on_circle(0.5 * (t0 + t1))) {
            continue;
        }
        let pieces = ((t1 - t0) / (PI / 8.0)).ceil().max(1.0) as usize;
        let width = (t1 - t0) / pieces as f64;
        for j in 0..pieces {
            let a = t0 + j as f64 * width;
            let (gt, gw) = gauss_legendre_interval(degree + 8, a, a + width);
            for (&t, &w) in gt.iter().zip(&gw) {
                let (u, v) = frame.local(on_circle(t));
                flux_term(u, v, w * r * t.cos() / frame.scale_y, degree, &mut out);
            }
        }
    }
    let jac = frame.jacobian();
    out.iter_mut().for_each(|v| *v *= jac);
    out
}

/// Closed-form moments of an axis-aligned rectangle.
pub(crate) fn rect_moments(rect: &Rect, frame: &Frame, degree: usize) -> Vec<f64> {
    let (u0, v0) = frame.local(rect.min);
    let (u1, v1) = frame.local(rect.max);
    let ix = antiderivative_diffs(u0, u1, degree, frame.scale_x);
    let iy = antiderivative_diffs(v0, v1, degree, frame.scale_y);
    let mut out = Vec::with_capacity(monomial_count(degree));
    for t in 0..=degree {
        for b in 0..=t {
            out.push(ix[t - b] * iy[b]);
        }
    }
    out
}

/// `s · ∫_{u0}^{u1} u^a du` for `a = 0..=degree`.
fn antiderivative_diffs(u0: f64, u1: f64, degree: usize, s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    let (mut p0, mut p1) = (u0, u1);
    for a in 0..=degree {
        out.push(s * (p1 - p0) / (a as f64 + 1.0));
        p0 *= u0;
        p1 *= u1;
    }
    out
}

/// `Γ(n/2)` for a positive integer `n`.
fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `∫_{unit disk} u^i v^j du dv`.
fn unit_disk_moment(i: usize, j: usize) -> f64 {
    if i % 2 == 1 || j % 2 == 1 {
        return 0.0;
    }
    2.0 * gamma_half(i + 1) * gamma_half(j + 1) / ((i + j + 2) as f64 * gamma_half(i + j + 2))
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i as f64 + 1.0);
    }
    c
}

/// Closed-form moments of a disk in an arbitrary frame, expanding
/// `ξ = α + β u` around the disk center.
pub(crate) fn disk_moments(center: Point, radius: f64, frame: &Frame, degree: usize) -> Vec<f64> {
    let (alpha, gamma) = frame.local(center);
    let beta = radius / frame.scale_x;
    let delta = radius / frame.scale_y;
    let mut out = Vec::with_capacity(monomial_count(degree));
    for t in 0..=degree {
        for b in 0..=t {
            let a = t - b;
            let mut s = 0.0;
            for i in (0..=a).step_by(1) {
                let ci = binomial(a, i) * alpha.powi((a - i) as i32) * beta.powi(i as i32);
                if ci == 0.0 {
                    continue;
                }
                for j in 0..=b {
                    let m = unit_disk_moment(i, j);
                    if m == 0.0 {
                        continue;
                    }
                    s += ci * binomial(b, j) * gamma.powi((b - j) as i32) * delta.powi(j as i32) * m;
                }
            }
            out.push(radius * radius * s);
        }
    }
    out
}

/// Area of the domain: the closed form when known, otherwise the quadtree
/// estimate at the default refinement.
pub fn domain_area(domain: &Domain) -> f64 {
    if let Some(a) = domain.area_hint {
        return a;
    }
    region_moments(
        &domain.shape,
        &domain.bounding_box,
        &Frame::for_rect(&domain.bounding_box),
        0,
        DEFAULT_REFINEMENT,
    )[0]
}

/// Adaptive quadtree integration of a general field over the domain:
/// interior cells get a tensor Gauss rule, boundary leaves a Gauss rule on
/// the fan triangulation of the clipped polygon.
pub fn adaptive_integrate(domain: &Domain, f: &dyn Fn(Point) -> f64, refinement: usize, order: usize) -> f64 {
    fn walk(
        shape: &Shape,
        cell: &Rect,
        depth: usize,
        order: usize,
        f: &dyn Fn(Point) -> f64,
        acc: &mut f64,
    ) {
        if shape.excludes_rect(cell) {
            return;
        }
        if shape.contains_rect(cell) {
            let (p, w) = tensor_points(cell, 1, order);
            *acc += p.iter().zip(&w).map(|(p, w)| w * f(*p)).sum::<f64>();
            return;
        }
        if depth == 0 {
            let poly = clip_cell(shape, cell);
            for k in 1..poly.len().saturating_sub(1) {
                let (p, w) = triangle_points(poly[0], poly[k], poly[k + 1], order);
                *acc += p.iter().zip(&w).map(|(p, w)| w * f(*p)).sum::<f64>();
            }
            return;
        }
        for sub in split4(cell) {
            walk(shape, &sub, depth - 1, order, f, acc);
        }
    }
    let mut acc = 0.0;
    walk(&domain.shape, &domain.bounding_box, refinement, order, f, &mut acc);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_on_its_own_grid() {
        // Grid lines through the center and tangent to the circle.
        let d = Disk::new(Point::new(0.0, 0.0), 1.0);
        let frame = Frame::identity();
        let whole = disk_moments(d.center, d.radius, &frame, 4);
        for cells in 1..=40usize {
            let side = 2.0 / cells as f64;
            let mut acc = vec![0.0; whole.len()];
            for i in 0..cells {
                for j in 0..cells {
                    let (x0, y0) = (-1.0 + i as f64 * side, -1.0 + j as f64 * side);
                    let cell = Rect::new(x0, y0, x0 + side, y0 + side);
                    let m = disk_rect_moments(&d, &cell, &frame, 4);
                    acc.iter_mut().zip(&m).for_each(|(a, v)| *a += v);
                }
            }
            for (a, w) in acc.iter().zip(&whole) {
                assert!((a - w).abs() < 1e-13, "cells {cells}: {a} vs {w}");
            }
        }
    }

    #[test]
    fn disk_cut_into_cells_keeps_its_moments() {
        let d = Disk::new(Point::new(0.1, -0.2), 0.9);
        let frame = Frame::identity();
        let whole = disk_moments(d.center, d.radius, &frame, 4);
        for cells in [2usize, 3, 5, 7, 8, 13, 16, 24] {
            for shift in [0.0, 0.013, 0.25] {
                let bb = d.bbox().inflate(0.05);
                let side = (bb.width() + shift) / cells as f64;
                let mut acc = vec![0.0; whole.len()];
                for i in 0..cells {
                    for j in 0..cells {
                        let x0 = bb.min.x - shift + i as f64 * side;
                        let y0 = bb.min.y - shift + j as f64 * side;
                        let cell = Rect::new(x0, y0, x0 + side, y0 + side);
                        let m = disk_rect_moments(&d, &cell, &frame, 4);
                        acc.iter_mut().zip(&m).for_each(|(a, v)| *a += v);
                        // Area is frame independent.
                        let local = disk_rect_moments(&d, &cell, &Frame::for_rect(&cell), 4);
                        assert!((local[0] - m[0]).abs() < 1e-15, "cell {cell:?}: {} vs {}", local[0], m[0]);
                    }
                }
                for (a, w) in acc.iter().zip(&whole) {
                    assert!((a - w).abs() < 1e-13, "cells {cells} shift {shift}: {a} vs {w}");
                }
            }
        }
    }

    use crate::geometry::{Disk, Shape};

    #[test]
    fn unit_square_moments() {
        let m = compute_moments(&Domain::unit_square(), 4, 8).unwrap();
        assert!((m.get(1, 1) - 0.25).abs() < 1e-15);
        assert!((m.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((m.get(3, 1) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn unit_disk_moments() {
        let m = compute_moments(&Domain::unit_disk(), 6, 8).unwrap();
        assert!((m.get(0, 0) - PI).abs() < 1e-14);
        assert!((m.get(2, 0) - PI / 4.0).abs() < 1e-14);
        assert!((m.get(2, 2) - PI / 24.0).abs() < 1e-14);
        assert!((m.get(4, 0) - PI / 8.0).abs() < 1e-14);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn shifted_disk_in_frame_matches_polar_rule() {
        let d = Disk::new(Point::new(0.3, -0.2), 0.7);
        let frame = Frame::for_rect(&Rect::new(-1.0, -1.0, 2.0, 1.5));
        let m = disk_moments(d.center, d.radius, &frame, 6);
        let (p, w) = super::super::gauss::disk_polar_points(&d, 12, 40);
        let mut buf = Vec::new();
        let mut q = vec![0.0; m.len()];
        for (p, w) in p.iter().zip(&w) {
            eval_monomials(&frame, 6, *p, &mut buf);
            for (q, b) in q.iter_mut().zip(&buf) {
                *q += w * b;
            }
        }
        for (a, b) in m.iter().zip(&q) {
            assert!((a - b).abs() < 1e-13, "{a} {b}");
        }
    }

    #[test]
    fn annulus_area_by_quadtree() {
        let dom = Domain::new(
            Shape::Disk(Disk::new(Point::new(0.0, 0.0), 1.0))
                .subtract(Shape::Disk(Disk::new(Point::new(0.0, 0.0), 0.5))),
        )
        .unwrap();
        assert!(dom.area_hint.is_none());
        let m = compute_moments(&dom, 0, DEFAULT_REFINEMENT).unwrap();
        let exact = 0.75 * PI;
        assert!(((m.get(0, 0) - exact) / exact).abs() < 1e-6, "{}", m.get(0, 0));
    }

    #[test]
    fn quadtree_matches_closed_form_on_composite() {
        // square minus disk: rect moments minus disk moments
        let disk = Disk::new(Point::new(0.4, 0.55), 0.3);
        let dom = Domain::new(Shape::Rect(Rect::unit()).subtract(Shape::Disk(disk))).unwrap();
        let frame = Frame::for_rect(&dom.bounding_box);
        let got = compute_moments_in_frame(&dom, 5, DEFAULT_REFINEMENT, frame).unwrap();
        let r = rect_moments(&Rect::unit(), &frame, 5);
        let d = disk_moments(disk.center, disk.radius, &frame, 5);
        for k in 0..r.len() {
            let exact = r[k] - d[k];
            assert!((got.values[k] - exact).abs() < 2e-7, "k={k} {} {exact}", got.values[k]);
        }
    }

    #[test]
    fn degree_limit() {
        assert!(matches!(
            compute_moments(&Domain::unit_square(), 21, 4),
            Err(Error::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn polygon_moments_square() {
        let sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let m = polygon_moments_local(&sq, 3);
        assert!((m[0] - 1.0).abs() < 1e-15);
        // (1,1) sits at index 4 in the graded order (2,0),(1,1),(0,2)
        assert!((m[4] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn adaptive_integrate_disk() {
        let v = adaptive_integrate(&Domain::unit_disk(), &|p: Point| p.x * p.x, 10, 6);
        assert!((v - PI / 4.0).abs() < 1e-5, "{v}");
    }
}
