//! Planar domains built from rectangles and disks.
//!
//! A [`Shape`] is a constructive-solid-geometry tree whose leaves are
//! axis-aligned rectangles and disks. Membership is decided by the sign of a
//! signed distance (negative inside), combined with `min`/`max` at the CSG
//! nodes. A [`Domain`] wraps a shape together with its bounding box and the
//! exact boundary as a list of straight segments and circular arcs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Axis-aligned rectangle `[min.x, max.x] × [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            min: Point::new(x0.min(x1), y0.min(y1)),
            max: Point::new(x0.max(x1), y0.max(y1)),
        }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn inflate(&self, margin: f64) -> Rect {
        Rect::new(
            self.min.x - margin,
            self.min.y - margin,
            self.max.x + margin,
            self.max.y + margin,
        )
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.min.x.min(other.min.x),
            self.min.y.min(other.min.y),
            self.max.x.max(other.max.x),
            self.max.y.max(other.max.y),
        )
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.min.x.max(other.min.x);
        let y0 = self.min.y.max(other.min.y);
        let x1 = self.max.x.min(other.max.x);
        let y1 = self.max.y.min(other.max.y);
        (x0 < x1 && y0 < y1).then(|| Rect::new(x0, y0, x1, y1))
    }

    /// Exact Euclidean signed distance.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let c = self.center();
        let hx = 0.5 * self.width();
        let hy = 0.5 * self.height();
        let qx = (p.x - c.x).abs() - hx;
        let qy = (p.y - c.y).abs() - hy;
        let outside = qx.max(0.0).hypot(qy.max(0.0));
        outside + qx.max(qy).min(0.0)
    }

    /// Squared distance from `p` to the closest point of the rectangle.
    fn dist2_to(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx * dx + dy * dy
    }

    /// The four edges, counter-clockwise.
    pub fn edges(&self) -> [Curve; 4] {
        let c = self.corners();
        [
            Curve::Segment { a: c[0], b: c[1] },
            Curve::Segment { a: c[1], b: c[2] },
            Curve::Segment { a: c[2], b: c[3] },
            Curve::Segment { a: c[3], b: c[0] },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        p.dist(self.center) - self.radius
    }

    pub fn bbox(&self) -> Rect {
        Rect::new(
            self.center.x - self.radius,
            self.center.y - self.radius,
            self.center.x + self.radius,
            self.center.y + self.radius,
        )
    }

    pub fn circle(&self) -> Curve {
        Curve::Arc {
            center: self.center,
            radius: self.radius,
            start: 0.0,
            sweep: 2.0 * PI,
        }
    }
}

/// Constructive-solid-geometry tree over rectangles and disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Rect(Rect),
    Disk(Disk),
    Union(Box<Shape>, Box<Shape>),
    Intersection(Box<Shape>, Box<Shape>),
    Difference(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn union(self, other: Shape) -> Shape {
        Shape::Union(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: Shape) -> Shape {
        Shape::Intersection(Box::new(self), Box::new(other))
    }

    pub fn subtract(self, other: Shape) -> Shape {
        Shape::Difference(Box::new(self), Box::new(other))
    }

    /// Signed distance for the leaves, combined with min/max at CSG nodes.
    /// Exact for single primitives; a distance bound with the correct sign
    /// for composites.
    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            Shape::Rect(r) => r.signed_distance(p),
            Shape::Disk(d) => d.signed_distance(p),
            Shape::Union(a, b) => a.signed_distance(p).min(b.signed_distance(p)),
            Shape::Intersection(a, b) => a.signed_distance(p).max(b.signed_distance(p)),
            Shape::Difference(a, b) => a.signed_distance(p).max(-b.signed_distance(p)),
        }
    }

    pub fn bbox(&self) -> Rect {
        match self {
            Shape::Rect(r) => *r,
            Shape::Disk(d) => d.bbox(),
            Shape::Union(a, b) => a.bbox().union(&b.bbox()),
            Shape::Intersection(a, b) => a
                .bbox()
                .intersection(&b.bbox())
                .unwrap_or_else(|| Rect::new(0.0, 0.0, 0.0, 0.0)),
            Shape::Difference(a, _) => a.bbox(),
        }
    }

    /// `true` only if the closed rectangle is certainly inside the shape.
    pub fn contains_rect(&self, cell: &Rect) -> bool {
        match self {
            Shape::Rect(r) => r.contains(cell.min) && r.contains(cell.max),
            Shape::Disk(d) => cell
                .corners()
                .iter()
                .all(|&c| c.dist2(d.center) <= d.radius * d.radius),
            Shape::Union(a, b) => a.contains_rect(cell) || b.contains_rect(cell),
            Shape::Intersection(a, b) => a.contains_rect(cell) && b.contains_rect(cell),
            Shape::Difference(a, b) => a.contains_rect(cell) && b.excludes_rect(cell),
        }
    }

    /// `true` only if the open interior of the rectangle certainly misses
    /// the shape.
    pub fn excludes_rect(&self, cell: &Rect) -> bool {
        match self {
            Shape::Rect(r) => r.intersection(cell).is_none(),
            Shape::Disk(d) => cell.dist2_to(d.center) >= d.radius * d.radius,
            Shape::Union(a, b) => a.excludes_rect(cell) && b.excludes_rect(cell),
            Shape::Intersection(a, b) => a.excludes_rect(cell) || b.excludes_rect(cell),
            Shape::Difference(a, b) => a.excludes_rect(cell) || b.contains_rect(cell),
        }
    }

    fn collect_curves(&self, out: &mut Vec<Curve>) {
        match self {
            Shape::Rect(r) => out.extend(r.edges()),
            Shape::Disk(d) => out.push(d.circle()),
            Shape::Union(a, b) | Shape::Intersection(a, b) | Shape::Difference(a, b) => {
                a.collect_curves(out);
                b.collect_curves(out);
            }
        }
    }

    /// Exact area when the shape is a single primitive.
    pub fn primitive_area(&self) -> Option<f64> {
        match self {
            Shape::Rect(r) => Some(r.area()),
            Shape::Disk(d) => Some(PI * d.radius * d.radius),
            _ => None,
        }
    }
}

/// A straight segment or a counter-clockwise circular arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    Segment {
        a: Point,
        b: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Curve {
    /// Point at normalized parameter `t ∈ [0, 1]` (proportional to arclength).
    pub fn point_at(&self, t: f64) -> Point {
        match *self {
            Curve::Segment { a, b } => a.lerp(b, t),
            Curve::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let th = start + t * sweep;
                Point::new(center.x + radius * th.cos(), center.y + radius * th.sin())
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Curve::Segment { a, b } => a.dist(b),
            Curve::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(*self, Curve::Arc { sweep, .. } if (sweep.abs() - 2.0 * PI).abs() < 1e-15)
    }

    fn sub(&self, t0: f64, t1: f64) -> Curve {
        match *self {
            Curve::Segment { .. } => Curve::Segment {
                a: self.point_at(t0),
                b: self.point_at(t1),
            },
            Curve::Arc {
                center,
                radius,
                start,
                sweep,
            } => Curve::Arc {
                center,
                radius,
                start: start + t0 * sweep,
                sweep: (t1 - t0) * sweep,
            },
        }
    }

    /// Parameters in `(0, 1)` where this curve crosses `other`.
    fn crossings(&self, other: &Curve) -> Vec<f64> {
        let mut hits = Vec::new();
        match (*self, *other) {
            (Curve::Segment { a, b }, Curve::Segment { a: c, b: d }) => {
                let r = b - a;
                let s = d - c;
                let den = r.x * s.y - r.y * s.x;
                let q = c - a;
                if den.abs() > 1e-14 * r.norm() * s.norm() {
                    let t = (q.x * s.y - q.y * s.x) / den;
                    let u = (q.x * r.y - q.y * r.x) / den;
                    if (0.0..=1.0).contains(&u) {
                        hits.push(t);
                    }
                } else if (q.x * r.y - q.y * r.x).abs() <= 1e-14 * r.norm() * (q.norm() + r.norm()) {
                    // Collinear: split at the other segment's endpoints.
                    let rr = r.x * r.x + r.y * r.y;
                    for e in [c, d] {
                        let v = e - a;
                        hits.push((v.x * r.x + v.y * r.y) / rr);
                    }
                }
            }
            (Curve::Segment { a, b }, Curve::Arc { center, radius, .. }) => {
                for (t, p) in segment_circle(a, b, center, radius) {
                    if other.arc_contains(p) {
                        hits.push(t);
                    }
                }
            }
            (Curve::Arc { center, radius, .. }, Curve::Segment { a, b }) => {
                for (_, p) in segment_circle(a, b, center, radius) {
                    if let Some(t) = self.arc_param(p) {
                        hits.push(t);
                    }
                }
            }
            (
                Curve::Arc {
                    center: c0,
                    radius: r0,
                    ..
                },
                Curve::Arc {
                    center: c1,
                    radius: r1,
                    ..
                },
            ) => {
                for p in circle_circle(c0, r0, c1, r1) {
                    if other.arc_contains(p) {
                        if let Some(t) = self.arc_param(p) {
                            hits.push(t);
                        }
                    }
                }
            }
        }
        hits.retain(|t| *t > 1e-12 && *t < 1.0 - 1e-12);
        hits
    }

    fn arc_param(&self, p: Point) -> Option<f64> {
        let Curve::Arc {
            center,
            start,
            sweep,
            ..
        } = *self
        else {
            return None;
        };
        let th = (p.y - center.y).atan2(p.x - center.x);
        let rel = (th - start).rem_euclid(2.0 * PI);
        let t = rel / sweep;
        (0.0..=1.0).contains(&t).then_some(t)
    }

    fn arc_contains(&self, p: Point) -> bool {
        self.arc_param(p).is_some()
    }
}

fn segment_circle(a: Point, b: Point, c: Point, r: f64) -> Vec<(f64, Point)> {
    let d = b - a;
    let f = a - c;
    let qa = d.x * d.x + d.y * d.y;
    let qb = 2.0 * (f.x * d.x + f.y * d.y);
    let qc = f.x * f.x + f.y * f.y - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .map(|t| (t, a.lerp(b, t)))
        .collect()
}

fn circle_circle(c0: Point, r0: f64, c1: Point, r1: f64) -> Vec<Point> {
    let d = c0.dist(c1);
    if d == 0.0 || d > r0 + r1 || d < (r0 - r1).abs() {
        return Vec::new();
    }
    let a = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
    let h = (r0 * r0 - a * a).max(0.0).sqrt();
    let ex = (c1.x - c0.x) / d;
    let ey = (c1.y - c0.y) / d;
    let m = Point::new(c0.x + a * ex, c0.y + a * ey);
    vec![
        Point::new(m.x - h * ey, m.y + h * ex),
        Point::new(m.x + h * ey, m.y - h * ex),
    ]
}

/// A bounded planar region with its exact boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub shape: Shape,
    pub bounding_box: Rect,
    pub boundary_curves: Vec<Curve>,
    /// Exact area when known in closed form.
    pub area_hint: Option<f64>,
}

impl Domain {
    pub fn new(shape: Shape) -> Result<Self> {
        let bbox = shape.bbox();
        if bbox.width() <= 0.0 || bbox.height() <= 0.0 {
            return Err(Error::EmptyDomain);
        }
        let area_hint = shape.primitive_area();
        let boundary_curves = boundary_pieces(&shape, bbox.diagonal());
        Ok(Self {
            shape,
            bounding_box: bbox,
            boundary_curves,
            area_hint,
        })
    }

    pub fn with_area_hint(mut self, area: f64) -> Self {
        self.area_hint = Some(area);
        self
    }

    pub fn rectangle(rect: Rect) -> Self {
        Self::new(Shape::Rect(rect)).expect("non-degenerate rectangle")
    }

    pub fn disk(center: Point, radius: f64) -> Self {
        Self::new(Shape::Disk(Disk::new(center, radius))).expect("positive radius")
    }

    pub fn unit_square() -> Self {
        Self::rectangle(Rect::unit())
    }

    pub fn unit_disk() -> Self {
        Self::disk(Point::new(0.0, 0.0), 1.0)
    }

    /// `r_inner ≤ |x − center| ≤ r_outer`.
    pub fn annulus(center: Point, r_inner: f64, r_outer: f64) -> Self {
        let shape = Shape::Disk(Disk::new(center, r_outer))
            .subtract(Shape::Disk(Disk::new(center, r_inner)));
        Self::new(shape)
            .expect("non-degenerate annulus")
            .with_area_hint(PI * (r_outer * r_outer - r_inner * r_inner))
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        self.shape.signed_distance(p)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.signed_distance(p) <= 0.0
    }

    /// Inside or within `1e-12 · diameter` of the boundary.
    pub fn contains_closed(&self, p: Point) -> bool {
        self.signed_distance(p) <= 1e-12 * self.diameter()
    }

    pub fn diameter(&self) -> f64 {
        self.bounding_box.diagonal()
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary_curves.iter().map(Curve::length).sum()
    }

    /// Single-primitive shape, if any.
    pub fn as_rect(&self) -> Option<Rect> {
        match self.shape {
            Shape::Rect(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_disk(&self) -> Option<Disk> {
        match self.shape {
            Shape::Disk(d) => Some(d),
            _ => None,
        }
    }
}

/// Splits every primitive curve at its crossings with the others and keeps
/// the pieces lying on the composite boundary.
fn boundary_pieces(shape: &Shape, diameter: f64) -> Vec<Curve> {
    let mut prims = Vec::new();
    shape.collect_curves(&mut prims);
    let tol = 1e-9 * diameter;
    let mut out = Vec::new();
    for (i, curve) in prims.iter().enumerate() {
        let mut ts = vec![0.0, 1.0];
        for (j, other) in prims.iter().enumerate() {
            if i != j {
                ts.extend(curve.crossings(other));
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let whole = ts.len() == 2;
        for w in ts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            let probe = [0.5, 0.25, 0.75]
                .iter()
                .all(|&s| shape.signed_distance(curve.point_at(t0 + s * (t1 - t0))).abs() < tol);
            if probe {
                let piece = if whole { *curve } else { curve.sub(t0, t1) };
                // Overlapping primitive edges yield the same piece twice.
                let mid = piece.point_at(0.5);
                let len = piece.length();
                let seen = out
                    .iter()
                    .any(|c: &Curve| c.point_at(0.5).dist(mid) < tol && (c.length() - len).abs() < tol);
                if !seen {
                    out.push(piece);
                }
            }
        }
    }
    out
}
