//! Composite moment-fitted rules on scattered nodes.
//!
//! The bounding box is tiled by square cells sized to hold a fixed multiple
//! of the monomial count. Each cell (merged with neighbours when it holds too
//! few nodes or its fit fails) receives weights matching the exact moments of
//! `cell ∩ Ω` in a frame local to that cell group. Local exactness up to
//! degree `m` on cells of size `O(h)` gives an `O(h^{m+1})` rule; with
//! nonnegative weights the rule is also stable, `‖w‖₁ = |Ω|`.

use crate::error::{Error, Result};
use crate::geometry::{Domain, Rect};
use crate::nodes::NodeSet;

use super::fit::{moment_fit_weights, FitMode};
use super::moments::{monomial_count, region_moments, Frame, MomentTable, MAX_MOMENT_DEGREE};
use super::QuadratureRule;

/// Options for [`meshless_rule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshlessOptions {
    /// Target number of nodes per cell, as a multiple of the monomial count.
    pub nodes_per_monomial: f64,
    /// Quadtree refinement, counted from the domain bounding box, used for
    /// the moments of cells cut by the boundary.
    pub refinement: usize,
}

impl Default for MeshlessOptions {
    fn default() -> Self {
        Self {
            nodes_per_monomial: 2.0,
            refinement: super::moments::DEFAULT_REFINEMENT,
        }
    }
}

struct Cell {
    rect: Rect,
    nodes: Vec<usize>,
}

struct Groups {
    parent: Vec<usize>,
}

impl Groups {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }
}

/// Builds a composite moment-fitted rule of polynomial degree `degree` on
/// `nodes` (nominal order `degree + 1`).
pub fn meshless_rule(
    domain: &Domain,
    nodes: &NodeSet,
    degree: usize,
    mode: FitMode,
    options: MeshlessOptions,
) -> Result<QuadratureRule> {
    if degree > MAX_MOMENT_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree,
            max: MAX_MOMENT_DEGREE,
        });
    }
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let m = monomial_count(degree);
    let bbox = domain.bounding_box;
    let area = super::domain_area(domain);
    let target = (options.nodes_per_monomial * m as f64).max(4.0);
    let side = (target * area / nodes.len() as f64).sqrt();
    let ncx = ((bbox.width() / side).round() as usize).max(1);
    let ncy = ((bbox.height() / side).round() as usize).max(1);
    let dx = bbox.width() / ncx as f64;
    let dy = bbox.height() / ncy as f64;

    let mut cells: Vec<Option<Cell>> = Vec::with_capacity(ncx * ncy);
    for j in 0..ncy {
        for i in 0..ncx {
            let rect = Rect::new(
                bbox.min.x + i as f64 * dx,
                bbox.min.y + j as f64 * dy,
                bbox.min.x + (i + 1) as f64 * dx,
                bbox.min.y + (j + 1) as f64 * dy,
            );
            let active = !domain.shape.excludes_rect(&rect);
            cells.push(active.then(|| Cell {
                rect,
                nodes: Vec::new(),
            }));
        }
    }
    for (k, p) in nodes.points.iter().enumerate() {
        let i = (((p.x - bbox.min.x) / dx).floor().max(0.0) as usize).min(ncx - 1);
        let j = (((p.y - bbox.min.y) / dy).floor().max(0.0) as usize).min(ncy - 1);
        let idx = j * ncx + i;
        if cells[idx].is_none() {
            // A node on the boundary of an excluded cell: reopen it.
            cells[idx] = Some(Cell {
                rect: Rect::new(
                    bbox.min.x + i as f64 * dx,
                    bbox.min.y + j as f64 * dy,
                    bbox.min.x + (i + 1) as f64 * dx,
                    bbox.min.y + (j + 1) as f64 * dy,
                ),
                nodes: Vec::new(),
            });
        }
        cells[idx].as_mut().expect("cell just opened").nodes.push(k);
    }

    let neighbours = |idx: usize| -> Vec<usize> {
        let (i, j) = (idx % ncx, idx / ncx);
        let mut out = Vec::with_capacity(4);
        if i > 0 {
            out.push(idx - 1);
        }
        if i + 1 < ncx {
            out.push(idx + 1);
        }
        if j > 0 {
            out.push(idx - ncx);
        }
        if j + 1 < ncy {
            out.push(idx + ncx);
        }
        out
    };

    let mut groups = Groups::new(cells.len());
    let min_count = m + m.div_ceil(2);
    let group_count = |groups: &mut Groups, cells: &[Option<Cell>]| -> Vec<usize> {
        let mut count = vec![0usize; cells.len()];
        for (idx, c) in cells.iter().enumerate() {
            if let Some(c) = c {
                let r = groups.find(idx);
                count[r] += c.nodes.len();
            }
        }
        count
    };

    // Merge under-populated groups into their best-populated neighbour.
    loop {
        let count = group_count(&mut groups, &cells);
        let mut changed = false;
        for idx in 0..cells.len() {
            if cells[idx].is_none() {
                continue;
            }
            let r = groups.find(idx);
            if count[r] >= min_count {
                continue;
            }
            if let Some(best) = best_neighbour(r, &cells, &mut groups, &count, &neighbours) {
                groups.union(best, r);
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }

    let leaf = bbox.width().max(bbox.height()) / (1u64 << options.refinement.min(40)) as f64;
    let depth = (dx.max(dy) / leaf).log2().ceil().max(0.0) as usize;

    let mut weights = vec![0.0; nodes.len()];
    let mut done: std::collections::HashSet<Vec<usize>> = Default::default();
    loop {
        let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for idx in 0..cells.len() {
            if cells[idx].is_some() {
                members.entry(groups.find(idx)).or_default().push(idx);
            }
        }
        let mut failed = None;
        for (&root, cell_ids) in &members {
            if done.contains(cell_ids) {
                continue;
            }
            let mut group_rect = cells[cell_ids[0]].as_ref().expect("active").rect;
            for &c in cell_ids {
                group_rect = group_rect.union(&cells[c].as_ref().expect("active").rect);
            }
            let group_rect = group_rect.intersection(&bbox).unwrap_or(group_rect);
            let frame = Frame::for_rect(&group_rect);
            let mut table = MomentTable {
                degree,
                frame,
                values: vec![0.0; m],
            };
            let mut idxs = Vec::new();
            for &c in cell_ids {
                let cell = cells[c].as_ref().expect("active");
                let vals = region_moments(&domain.shape, &cell.rect, &frame, degree, depth);
                for (a, v) in table.values.iter_mut().zip(vals) {
                    *a += v;
                }
                idxs.extend_from_slice(&cell.nodes);
            }
            if table.area().abs() <= 1e-14 * area && idxs.is_empty() {
                continue;
            }
            let pts: Vec<_> = idxs.iter().map(|&k| nodes.points[k]).collect();
            match moment_fit_weights(&pts, &table, mode) {
                Ok(w) => {
                    for (&k, wk) in idxs.iter().zip(w) {
                        weights[k] = wk;
                    }
                    done.insert(cell_ids.clone());
                }
                Err(e) => {
                    failed = Some((root, e));
                    break;
                }
            }
        }
        match failed {
            None => break,
            Some((root, err)) => {
                let count = group_count(&mut groups, &cells);
                match best_neighbour(root, &cells, &mut groups, &count, &neighbours) {
                    Some(b) => groups.union(b, root),
                    None => return Err(err),
                }
            }
        }
    }

    Ok(QuadratureRule {
        nodes: nodes.clone(),
        weights,
        nominal_order: degree + 1,
        domain_tag: super::domain_tag(domain),
    })
}

/// Root of the most populated group adjacent to any cell of group `root`.
fn best_neighbour(
    root: usize,
    cells: &[Option<Cell>],
    groups: &mut Groups,
    count: &[usize],
    neighbours: &dyn Fn(usize) -> Vec<usize>,
) -> Option<usize> {
    let members: Vec<usize> = (0..cells.len())
        .filter(|&c| cells[c].is_some() && groups.find(c) == root)
        .collect();
    let mut best: Option<(usize, usize)> = None;
    for c in members {
        for nb in neighbours(c) {
            if cells[nb].is_none() {
                continue;
            }
            let r = groups.find(nb);
            if r == root {
                continue;
            }
            if best.is_none_or(|(_, n)| count[r] > n) {
                best = Some((r, count[r]));
            }
        }
    }
    best.map(|(r, _)| r)
}
