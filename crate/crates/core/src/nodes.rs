//! Quasi-uniform scattered node generation and node-set diagnostics.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point, Rect};

/// Minimum pairwise distance of generated nodes, relative to the spacing.
pub const SEPARATION_FACTOR: f64 = 0.7;
pub const DEFAULT_FILL_RESOLUTION: usize = 400;

const DART_ATTEMPTS: usize = 30;
const SEED_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub points: Vec<Point>,
    pub spacing_h: f64,
    pub boundary_flags: Vec<bool>,
    pub rng_seed: u64,
}

impl NodeSet {
    /// Wraps an explicit point list (all flagged interior).
    pub fn from_points(points: Vec<Point>, spacing_h: f64) -> Self {
        let n = points.len();
        Self {
            points,
            spacing_h,
            boundary_flags: vec![false; n],
            rng_seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.boundary_flags.iter().filter(|b| !**b).count()
    }

    pub fn min_separation(&self) -> f64 {
        if self.points.len() < 2 {
            return f64::INFINITY;
        }
        let grid = PointGrid::new(&self.points, self.spacing_h.max(1e-300));
        let mut best = f64::INFINITY;
        for (i, &p) in self.points.iter().enumerate() {
            if let Some((_, d)) = grid.nearest_excluding(p, i) {
                best = best.min(d);
            }
        }
        best
    }

    /// One `x y flag` line per node, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(48 * self.len());
        for (p, b) in self.points.iter().zip(&self.boundary_flags) {
            let _ = writeln!(s, "{:.16e} {:.16e} {}", p.x, p.y, u8::from(*b));
        }
        s
    }

    pub fn from_text(text: &str, spacing_h: f64) -> Result<Self> {
        let mut points = Vec::new();
        let mut flags = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let mut it = line.split_whitespace();
            let mut next = |name: &'static str| {
                it.next().ok_or_else(|| Error::InvalidParameter {
                    name,
                    reason: format!("missing column in `{line}`"),
                })
            };
            let parse = |name: &'static str, s: &str| {
                s.parse::<f64>().map_err(|e| Error::InvalidParameter {
                    name,
                    reason: e.to_string(),
                })
            };
            let x = parse("x", next("x")?)?;
            let y = parse("y", next("y")?)?;
            let flag = next("boundary_flag")? == "1";
            points.push(Point::new(x, y));
            flags.push(flag);
        }
        Ok(Self {
            points,
            spacing_h,
            boundary_flags: flags,
            rng_seed: 0,
        })
    }
}

/// Uniform bucket grid for fixed-radius and nearest-neighbour queries.
#[derive(Debug, Clone)]
pub struct PointGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
    points: Vec<Point>,
}

impl PointGrid {
    pub fn new(points: &[Point], cell: f64) -> Self {
        let bbox = bounding_rect(points);
        Self::with_bounds(bbox, cell, points)
    }

    pub fn with_bounds(bbox: Rect, cell: f64, points: &[Point]) -> Self {
        let nx = ((bbox.width() / cell).floor() as usize + 1).min(1 << 14);
        let ny = ((bbox.height() / cell).floor() as usize + 1).min(1 << 14);
        let mut grid = Self {
            origin: bbox.min,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
            points: Vec::with_capacity(points.len()),
        };
        for &p in points {
            grid.insert(p);
        }
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let i = ((p.x - self.origin.x) / self.cell).floor();
        let j = ((p.y - self.origin.y) / self.cell).floor();
        (
            (i.max(0.0) as usize).min(self.nx - 1),
            (j.max(0.0) as usize).min(self.ny - 1),
        )
    }

    pub fn insert(&mut self, p: Point) -> usize {
        let idx = self.points.len();
        self.points.push(p);
        let (i, j) = self.cell_of(p);
        self.buckets[j * self.nx + i].push(idx);
        idx
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of all points with `|p − q| ≤ radius`.
    pub fn within(&self, p: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(p, radius, |i, _| out.push(i));
        out
    }

    pub fn for_each_within(&self, p: Point, radius: f64, mut f: impl FnMut(usize, f64)) {
        let r2 = radius * radius;
        let lo = self.cell_of(Point::new(p.x - radius, p.y - radius));
        let hi = self.cell_of(Point::new(p.x + radius, p.y + radius));
        for j in lo.1..=hi.1 {
            for i in lo.0..=hi.0 {
                for &k in &self.buckets[j * self.nx + i] {
                    let d2 = self.points[k].dist2(p);
                    if d2 <= r2 {
                        f(k, d2);
                    }
                }
            }
        }
    }

    pub fn any_within(&self, p: Point, radius: f64) -> bool {
        let mut hit = false;
        self.for_each_within(p, radius, |_, _| hit = true);
        hit
    }

    pub fn nearest(&self, p: Point) -> Option<(usize, f64)> {
        self.nearest_filtered(p, usize::MAX)
    }

    fn nearest_excluding(&self, p: Point, skip: usize) -> Option<(usize, f64)> {
        self.nearest_filtered(p, skip)
    }

    fn nearest_filtered(&self, p: Point, skip: usize) -> Option<(usize, f64)> {
        if self.points.len() <= usize::from(skip < self.points.len()) {
            return None;
        }
        let (ci, cj) = self.cell_of(p);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let i0 = ci.saturating_sub(ring);
            let i1 = (ci + ring).min(self.nx - 1);
            let j0 = cj.saturating_sub(ring);
            let j1 = (cj + ring).min(self.ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let on_ring = i == i0 || i == i1 || j == j0 || j == j1;
                    if !on_ring && ring > 0 {
                        continue;
                    }
                    let di = i.abs_diff(ci);
                    let dj = j.abs_diff(cj);
                    if di != ring && dj != ring {
                        continue;
                    }
                    for &k in &self.buckets[j * self.nx + i] {
                        if k == skip {
                            continue;
                        }
                        let d2 = self.points[k].dist2(p);
                        if best.is_none_or(|(_, b)| d2 < b) {
                            best = Some((k, d2));
                        }
                    }
                }
            }
            // Anything in ring r+1 is at least r·cell away from p.
            if let Some((_, b)) = best {
                let reach = ring as f64 * self.cell;
                if b <= reach * reach {
                    break;
                }
            }
        }
        best.map(|(k, d2)| (k, d2.sqrt()))
    }
}

fn bounding_rect(points: &[Point]) -> Rect {
    let mut r = Rect::new(0.0, 0.0, 0.0, 0.0);
    if let Some(&p0) = points.first() {
        r = Rect { min: p0, max: p0 };
        for p in points {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
    }
    r
}

/// Poisson-disk node generation.
///
/// Boundary nodes come first, placed by equal-arclength sampling of each
/// boundary curve and thinned to the minimum separation. Interior nodes are
/// added by dart throwing in annuli around active nodes; interior pairs keep
/// distance `h`, interior-to-boundary pairs keep `0.7 h`. A final lattice
/// sweep at spacing `h/2` restarts the process in any uncovered pocket, so
/// holes and disconnected components are filled too.
pub fn generate_nodes(domain: &Domain, h: f64, seed: u64, include_boundary: bool) -> Result<NodeSet> {
    if !(h > 0.0 && h < domain.diameter()) {
        return Err(Error::InvalidSpacing { h });
    }
    let min_sep = SEPARATION_FACTOR * h;
    let bbox = domain.bounding_box;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = PointGrid::with_bounds(bbox, h, &[]);
    let mut flags: Vec<bool> = Vec::new();

    let mut seed_point = None;
    for _ in 0..SEED_ATTEMPTS {
        let p = Point::new(
            rng.gen_range(bbox.min.x..=bbox.max.x),
            rng.gen_range(bbox.min.y..=bbox.max.y),
        );
        if domain.signed_distance(p) < 0.0 {
            seed_point = Some(p);
            break;
        }
    }
    let Some(seed_point) = seed_point else {
        return Err(Error::EmptyDomain);
    };

    if include_boundary {
        for curve in &domain.boundary_curves {
            let len = curve.length();
            let n = ((len / h).ceil() as usize).max(1);
            let last = if curve.is_closed() { n - 1 } else { n };
            for k in 0..=last {
                let p = curve.point_at(k as f64 / n as f64);
                if !grid.any_within(p, min_sep * (1.0 - 1e-12)) {
                    grid.insert(p);
                    flags.push(true);
                }
            }
        }
    }

    // Interior nodes are tested against interior neighbours at distance h and
    // boundary neighbours at 0.7 h.
    let admissible = |grid: &PointGrid, flags: &[bool], p: Point| -> bool {
        if domain.signed_distance(p) >= 0.0 {
            return false;
        }
        let mut ok = true;
        grid.for_each_within(p, h, |k, d2| {
            let limit = if flags[k] { min_sep } else { h };
            if d2 < limit * limit {
                ok = false;
            }
        });
        ok
    };

    let mut active: Vec<usize> = (0..grid.len()).collect();
    if admissible(&grid, &flags, seed_point) {
        active.push(grid.insert(seed_point));
        flags.push(false);
    }

    let lattice = 0.5 * h;
    let lx = (bbox.width() / lattice).floor() as usize + 1;
    let ly = (bbox.height() / lattice).floor() as usize + 1;
    let mut sweep = 0usize;
    loop {
        while !active.is_empty() {
            let slot = rng.gen_range(0..active.len());
            let center = grid.points[active[slot]];
            let mut placed = false;
            for _ in 0..DART_ATTEMPTS {
                // Uniform by area in the annulus [h, 2h].
                let r = h * (1.0 + 3.0 * rng.gen::<f64>()).sqrt();
                let th = rng.gen_range(0.0..std::f64::consts::TAU);
                let p = Point::new(center.x + r * th.cos(), center.y + r * th.sin());
                if admissible(&grid, &flags, p) {
                    active.push(grid.insert(p));
                    flags.push(false);
                    placed = true;
                    break;
                }
            }
            if !placed {
                active.swap_remove(slot);
            }
        }
        let mut found = None;
        while sweep < lx * ly {
            let (i, j) = (sweep % lx, sweep / lx);
            sweep += 1;
            let p = Point::new(
                bbox.min.x + (i as f64 + 0.5) * lattice,
                bbox.min.y + (j as f64 + 0.5) * lattice,
            );
            if admissible(&grid, &flags, p) {
                found = Some(p);
                break;
            }
        }
        match found {
            Some(p) => {
                active.push(grid.insert(p));
                flags.push(false);
            }
            None => break,
        }
    }

    let nodes = NodeSet {
        points: grid.points,
        spacing_h: h,
        boundary_flags: flags,
        rng_seed: seed,
    };
    if nodes.interior_count() == 0 {
        return Err(Error::SpacingTooLarge { h });
    }
    Ok(nodes)
}

/// Grid estimate of the fill distance: the largest distance from a sample
/// point of the closed domain to its nearest node. Samples form a
/// `resolution × resolution` lattice over the bounding box, endpoints
/// included; the estimate is a lower bound that tightens as the resolution
/// grows.
pub fn fill_distance(nodes: &NodeSet, domain: &Domain, resolution: usize) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let res = resolution.max(2);
    let bbox = domain.bounding_box;
    let cell = (nodes.spacing_h.max(domain.diameter() / 200.0)).max(1e-12);
    let grid = PointGrid::with_bounds(bbox.union(&bounding_rect(&nodes.points)), cell, &nodes.points);
    let mut worst: f64 = 0.0;
    for j in 0..res {
        let y = bbox.min.y + bbox.height() * j as f64 / (res - 1) as f64;
        for i in 0..res {
            let x = bbox.min.x + bbox.width() * i as f64 / (res - 1) as f64;
            let p = Point::new(x, y);
            if !domain.contains_closed(p) {
                continue;
            }
            if let Some((_, d)) = grid.nearest(p) {
                worst = worst.max(d);
            }
        }
    }
    Ok(worst)
}

/// `(|Ω| / |nodes|)^(1/2)`.
pub fn packing_distance(nodes: &NodeSet, domain: &Domain) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let area = crate::quadrature::domain_area(domain);
    Ok((area / nodes.len() as f64).sqrt())
}
