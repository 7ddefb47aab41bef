//! Convergence studies over refinement ladders `h_X = C_X h`, `h_Y = C_Y h`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::nodes::generate_nodes;
use crate::problems::ManufacturedCase;
use crate::quadrature::{meshless_rule, FitMode, MeshlessOptions, Quadrature};
use crate::reconstruction::build_mls;
use crate::solver::{interpolate, NewtonOptions, SolveOptions, Variant, DEFAULT_COND_EXACT_LIMIT};

pub const DEFAULT_EVAL_RESOLUTION: usize = 2000;
pub const SEED_STRIDE: u64 = 1000;

/// `eoc_i = log(e_{i-1}/e_i) / log(h_{i-1}/h_i)` for `i ≥ 1`.
pub fn estimate_eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() {
        return Err(Error::DimensionMismatch {
            expected: hs.len(),
            got: errors.len(),
        });
    }
    if errors.len() < 2 {
        return Err(Error::TooFewLevels {
            needed: 2,
            got: errors.len(),
        });
    }
    if errors.iter().chain(hs).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::NonpositiveInput);
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub h_ladder: Vec<f64>,
    pub c_x: f64,
    pub c_y: f64,
    pub mls_degree: usize,
    pub fit_degree: usize,
    pub radius_factor: f64,
    pub eval_resolution: usize,
    /// Seeds for the `X` and `Y` node sets.
    pub seed_x: u64,
    pub seed_y: u64,
    /// Independent node realizations per level; realization `r` shifts both
    /// seeds by `r * SEED_STRIDE`. Errors and norms keep the worst case.
    pub realizations: usize,
    pub variant: Variant,
    pub fit_mode: FitMode,
    pub nodes_per_monomial: f64,
    pub cond_exact_limit: usize,
    pub expected_order_quadrature: Option<f64>,
    pub expected_order_reconstruction: Option<f64>,
    /// Smoothness `q` of the data; informational only.
    pub assumed_smoothness: Option<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            h_ladder: vec![0.2, 0.1, 0.05, 0.025],
            c_x: 1.0,
            c_y: 0.5,
            mls_degree: 2,
            fit_degree: 3,
            radius_factor: 1.0,
            eval_resolution: DEFAULT_EVAL_RESOLUTION,
            seed_x: 1,
            seed_y: 2,
            realizations: 1,
            variant: Variant::Decoupled,
            fit_mode: FitMode::Nonnegative,
            nodes_per_monomial: MeshlessOptions::default().nodes_per_monomial,
            cond_exact_limit: DEFAULT_COND_EXACT_LIMIT,
            expected_order_quadrature: None,
            expected_order_reconstruction: None,
            assumed_smoothness: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.h_ladder.len() < 3 {
            return Err(Error::TooFewLevels {
                needed: 3,
                got: self.h_ladder.len(),
            });
        }
        if self.h_ladder.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return bad("h_ladder", "entries must be positive");
        }
        if self.h_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return bad("h_ladder", "must be strictly decreasing");
        }
        if !(self.c_x > 0.0) || !self.c_x.is_finite() {
            return bad("c_x", "must be positive");
        }
        if !(self.c_y > 0.0) || !self.c_y.is_finite() {
            return bad("c_y", "must be positive");
        }
        if !(self.radius_factor >= 1.0) {
            return bad("radius_factor", "must be at least 1");
        }
        if self.realizations == 0 {
            return bad("realizations", "must be at least 1");
        }
        if self.eval_resolution == 0 {
            return bad("eval_resolution", "must be positive");
        }
        if !(self.nodes_per_monomial >= 1.0) {
            return bad("nodes_per_monomial", "must be at least 1");
        }
        Ok(())
    }

    /// Predicted rate `min(q_w, q_R)`, from the nominal orders unless given.
    pub fn predicted_order(&self) -> f64 {
        let qw = self.expected_order_quadrature.unwrap_or((self.fit_degree + 1) as f64);
        match self.variant {
            Variant::Classical => qw,
            Variant::Decoupled => qw.min(
                self.expected_order_reconstruction
                    .unwrap_or((self.mls_degree + 1) as f64),
            ),
        }
    }
}

/// One rung of the ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub h: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub err_sup: Option<f64>,
    pub eoc: Option<f64>,
    pub cond_inf: Option<f64>,
    pub w_l1: Option<f64>,
    pub r_inf: Option<f64>,
    /// MLS rows whose support radius had to grow.
    pub mls_grown_rows: usize,
    pub assemble_seconds: f64,
    pub solve_seconds: f64,
    /// `ok`, or the error that ended the level.
    pub status: String,
}

impl LevelReport {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    /// Unknowns in the linear system.
    pub fn system_size(&self) -> usize {
        self.n_x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelReport>,
    pub predicted_order: f64,
}

impl ConvergenceReport {
    /// EOC between the last two successful levels.
    pub fn terminal_eoc(&self) -> Option<f64> {
        self.levels.iter().rev().find(|l| l.ok()).and_then(|l| l.eoc)
    }

    pub fn cond_values(&self) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.cond_inf).collect()
    }
}

/// Quasi-random interior points from the Halton sequence in bases 2 and 3.
pub fn evaluation_points(domain: &Domain, count: usize) -> Vec<Point> {
    fn radical_inverse(mut i: u64, base: u64) -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    let bb = domain.bounding_box;
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let p = Point::new(
            bb.min.x + bb.width() * radical_inverse(i, 2),
            bb.min.y + bb.height() * radical_inverse(i, 3),
        );
        if domain.contains(p) {
            out.push(p);
        }
        i += 1;
    }
    out
}

pub fn run_study(case: &ManufacturedCase, config: &StudyConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let eval = evaluation_points(&case.problem.domain, config.eval_resolution);
    let exact: Vec<f64> = eval.iter().map(|&p| (case.u_exact)(p)).collect();
    let mut levels: Vec<LevelReport> = config
        .h_ladder
        .iter()
        .enumerate()
        .map(|(i, &h)| run_level(case, config, i, h, &eval, &exact))
        .collect();
    let mut prev: Option<(f64, f64)> = None;
    for l in levels.iter_mut() {
        if let Some(e) = l.err_sup.filter(|e| *e > 0.0) {
            if let Some((he, ee)) = prev {
                l.eoc = estimate_eoc(&[ee, e], &[he, l.h]).ok().map(|v| v[0]);
            }
            prev = Some((l.h, e));
        }
    }
    Ok(ConvergenceReport {
        levels,
        predicted_order: config.predicted_order(),
    })
}

fn run_level(
    case: &ManufacturedCase,
    config: &StudyConfig,
    level: usize,
    h: f64,
    eval: &[Point],
    exact: &[f64],
) -> LevelReport {
    let classical = config.variant == Variant::Classical;
    let h_y = config.c_y * h;
    let h_x = if classical { h_y } else { config.c_x * h };
    let mut report = LevelReport {
        level,
        h,
        h_x,
        h_y,
        n_x: 0,
        n_y: 0,
        err_sup: None,
        eoc: None,
        cond_inf: None,
        w_l1: None,
        r_inf: None,
        mls_grown_rows: 0,
        assemble_seconds: 0.0,
        solve_seconds: 0.0,
        status: "ok".into(),
    };
    for r in 0..config.realizations {
        let stride = SEED_STRIDE * r as u64;
        let seeds = (config.seed_x + stride, config.seed_y + stride);
        let mut one = report.clone();
        if let Err(e) = fill_level(case, config, seeds, &mut one, eval, exact) {
            report.status = e.to_string();
            return report;
        }
        if r == 0 {
            report = one;
            continue;
        }
        let worst = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a.max(b));
        report.err_sup = worst(report.err_sup, one.err_sup);
        report.cond_inf = worst(report.cond_inf, one.cond_inf);
        report.w_l1 = worst(report.w_l1, one.w_l1);
        report.r_inf = worst(report.r_inf, one.r_inf);
        report.mls_grown_rows += one.mls_grown_rows;
        report.assemble_seconds += one.assemble_seconds;
        report.solve_seconds += one.solve_seconds;
    }
    report
}

fn fill_level(
    case: &ManufacturedCase,
    config: &StudyConfig,
    (seed_x, seed_y): (u64, u64),
    report: &mut LevelReport,
    eval: &[Point],
    exact: &[f64],
) -> Result<()> {
    let domain = &case.problem.domain;
    let start = Instant::now();
    let y = generate_nodes(domain, report.h_y, seed_y, true)?;
    report.n_y = y.len();
    let options = MeshlessOptions {
        nodes_per_monomial: config.nodes_per_monomial,
        ..MeshlessOptions::default()
    };
    let rule = meshless_rule(domain, &y, config.fit_degree, config.fit_mode, options)?;
    report.w_l1 = Some(rule.stability_l1());
    let recon = if config.variant == Variant::Classical {
        report.n_x = report.n_y;
        report.r_inf = Some(1.0);
        None
    } else {
        let x = generate_nodes(domain, report.h_x, seed_x, true)?;
        report.n_x = x.len();
        let r = build_mls(&x, &rule.nodes, config.mls_degree, config.radius_factor)?;
        report.r_inf = Some(r.inf_norm());
        report.mls_grown_rows = r.grown_rows();
        Some(r)
    };
    report.assemble_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let solve = SolveOptions {
        cond_exact_limit: config.cond_exact_limit,
        compute_cond: true,
    };
    let newton = NewtonOptions {
        cond_exact_limit: config.cond_exact_limit,
        ..NewtonOptions::default()
    };
    let sol = case.problem.solve(&rule, recon.as_ref(), solve, newton)?;
    report.solve_seconds = start.elapsed().as_secs_f64();
    report.cond_inf = Some(sol.cond_inf);
    let err = eval
        .iter()
        .zip(exact)
        .map(|(&p, u)| (interpolate(&sol, p) - u).abs())
        .fold(0.0, f64::max);
    report.err_sup = Some(err);
    Ok(())
}

/// One row of a classical versus decoupled comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub variant: Variant,
    pub level: usize,
    pub h: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub system_size: usize,
    pub err_sup: Option<f64>,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
    /// Finest successful classical error.
    pub classical_target: Option<f64>,
    /// Smallest decoupled system reaching the target, divided by the
    /// classical system that set it.
    pub size_ratio: Option<f64>,
}

pub fn cost_comparison(
    case: &ManufacturedCase,
    h_ladder: &[f64],
    decoupled: &StudyConfig,
    classical: &StudyConfig,
) -> Result<CompareTable> {
    let mut d = decoupled.clone();
    d.variant = Variant::Decoupled;
    d.h_ladder = h_ladder.to_vec();
    let mut c = classical.clone();
    c.variant = Variant::Classical;
    c.h_ladder = h_ladder.to_vec();
    let rc = run_study(case, &c)?;
    let rd = run_study(case, &d)?;
    fn rows_of(r: &ConvergenceReport, variant: Variant) -> impl Iterator<Item = CompareRow> + '_ {
        r.levels.iter().map(move |l| CompareRow {
            variant,
            level: l.level,
            h: l.h,
            n_x: l.n_x,
            n_y: l.n_y,
            system_size: l.system_size(),
            err_sup: l.err_sup,
            solve_seconds: l.solve_seconds,
        })
    }
    let rows: Vec<CompareRow> = rows_of(&rc, Variant::Classical)
        .chain(rows_of(&rd, Variant::Decoupled))
        .collect();
    let finest = rc.levels.iter().rev().find(|l| l.ok() && l.err_sup.is_some());
    let classical_target = finest.and_then(|l| l.err_sup);
    let size_ratio = finest.and_then(|f| {
        let target = f.err_sup?;
        rd.levels
            .iter()
            .filter(|l| l.ok() && l.err_sup.is_some_and(|e| e <= target))
            .map(|l| l.system_size())
            .min()
            .map(|n| n as f64 / f.system_size() as f64)
    });
    Ok(CompareTable {
        rows,
        classical_target,
        size_ratio,
    })
}
