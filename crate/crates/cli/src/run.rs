use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use fredholm2d::problems::{
    dirichlet_square, logistic_disk, manufacture, neumann_disk, smooth_solution, FredholmProblem, ManufacturedCase,
};
use fredholm2d::quadrature::{meshless_rule, reference_rule, MeshlessOptions, Quadrature};
use fredholm2d::solver::{interpolate, DiscreteSolution, NewtonOptions, SolveOptions, Variant};
use fredholm2d::study::{cost_comparison, estimate_eoc, evaluation_points, run_study, LevelReport};
use fredholm2d::{build_mls, generate_nodes, Domain, Field, Kernel, Point, QuadratureRule, Rect, Shape};

use crate::config::{Command, DomainName, KernelName, Params, Preset, RunConfig};
use crate::CliError;

/// A file to be written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub contents: String,
}

/// Runs the command and writes its artifacts; nothing is written on failure.
pub fn execute(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let artifacts = produce(config)?;
    let dir = &config.params.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    artifacts
        .into_iter()
        .map(|a| {
            let path = dir.join(a.name);
            std::fs::write(&path, a.contents).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}

/// Runs the command and returns its artifacts without touching the disk.
pub fn produce(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let p = &config.params;
    match config.command {
        Command::Nodes => nodes(config, p),
        Command::Quadtest => quadtest(config, p),
        Command::Solve => solve(config, p),
        Command::SolveNonlinear => solve_nonlinear(config, p),
        Command::Study => study(config, p),
        Command::Compare => compare(config, p),
    }
}

pub fn build_domain(name: DomainName) -> Result<Domain, CliError> {
    Ok(match name {
        DomainName::UnitSquare => Domain::unit_square(),
        DomainName::UnitDisk => Domain::unit_disk(),
        DomainName::Annulus => Domain::annulus(Point::new(0.0, 0.0), 0.4, 1.0),
        DomainName::LShape => {
            let shape = Shape::Rect(Rect::new(0.0, 0.0, 1.0, 0.5)).union(Shape::Rect(Rect::new(0.0, 0.0, 0.5, 1.0)));
            Domain::new(shape)?.with_area_hint(0.75)
        }
    })
}

pub fn build_kernel(p: &Params) -> Result<Kernel, CliError> {
    Ok(match p.kernel {
        KernelName::Gaussian => Kernel::gaussian(p.sigma)?,
        KernelName::PolyDecay => Kernel::poly_decay(p.sigma)?,
        KernelName::Oscillatory => Kernel::oscillatory(p.sigma)?,
        KernelName::Constant => Kernel::constant(1.0),
        KernelName::Zero => Kernel::zero(),
    })
}

fn fit_rule(domain: &Domain, h: f64, seed: u64, p: &Params) -> Result<QuadratureRule, CliError> {
    let nodes = generate_nodes(domain, h, seed, true)?;
    let options = MeshlessOptions {
        nodes_per_monomial: p.nodes_per_monomial,
        ..MeshlessOptions::default()
    };
    Ok(meshless_rule(domain, &nodes, p.fit_degree, p.fit_mode, options)?)
}

fn manufactured(p: &Params, domain: &Domain) -> Result<ManufacturedCase, CliError> {
    let k = build_kernel(p)?;
    let reference = reference_rule(domain, p.reference_resolution)?;
    Ok(manufacture(smooth_solution(), p.lambda, &k, domain, &reference)?)
}

fn summary(config: &RunConfig, results: serde_json::Value) -> Artifact {
    let doc = json!({ "command": config.command, "config": config.params, "results": results });
    let mut contents = serde_json::to_string_pretty(&doc).expect("summary serializes");
    contents.push('\n');
    Artifact {
        name: "summary.json",
        contents,
    }
}

fn csv_of<R: Serialize>(name: &'static str, rows: impl IntoIterator<Item = R>) -> Result<Artifact, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io {
            path: name.to_string(),
            source: e.into(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: name.to_string(),
        source: e.into_error(),
    })?;
    Ok(Artifact {
        name,
        contents: String::from_utf8(bytes).expect("csv output is UTF-8"),
    })
}

fn nodes(config: &RunConfig, p: &Params) -> Result<Vec<Artifact>, CliError> {
    let domain = build_domain(p.domain)?;
    let set = generate_nodes(&domain, p.h, p.seed_y, p.include_boundary)?;
    let results = json!({
        "count": set.len(),
        "interior": set.interior_count(),
        "boundary": set.len() - set.interior_count(),
        "min_separation": set.min_separation(),
    });
    Ok(vec![
        Artifact {
            name: "nodes.txt",
            contents: set.to_text(),
        },
        summary(config, results),
    ])
}

/// Test integrand for `quadtest`; smooth and not a polynomial.
fn quad_integrand(p: Point) -> f64 {
    p.x.exp() * p.y.cos()
}

#[derive(Serialize)]
struct QuadRow {
    level: usize,
    h: f64,
    n: usize,
    error: f64,
    w_l1: f64,
    eoc: Option<f64>,
}

fn quadtest(config: &RunConfig, p: &Params) -> Result<Vec<Artifact>, CliError> {
    let domain = build_domain(p.domain)?;
    let exact = reference_rule(&domain, p.reference_resolution)?.apply(quad_integrand);
    let rule = fit_rule(&domain, p.h, p.seed_y, p)?;
    let mut rows = Vec::new();
    for (level, &h) in p.h_ladder.iter().enumerate() {
        let r = fit_rule(&domain, h, p.seed_y, p)?;
        rows.push(QuadRow {
            level,
            h,
            n: r.len(),
            error: (r.apply(quad_integrand) - exact).abs(),
            w_l1: r.stability_l1(),
            eoc: None,
        });
    }
    for i in 1..rows.len() {
        rows[i].eoc = estimate_eoc(&[rows[i - 1].error, rows[i].error], &[rows[i - 1].h, rows[i].h])
            .ok()
            .map(|v| v[0]);
    }
    let results = json!({
        "exact": exact,
        "rule_nodes": rule.len(),
        "rule_integral": rule.apply(quad_integrand),
        "rule_w_l1": rule.stability_l1(),
        "nominal_order": rule.nominal_order,
        "levels": rows.len(),
    });
    Ok(vec![
        Artifact {
            name: "rule.txt",
            contents: rule.to_text(),
        },
        csv_of("quadtest.csv", rows)?,
        summary(config, results),
    ])
}

#[derive(Serialize)]
struct SolutionRow {
    x: f64,
    y: f64,
    u_h: f64,
}

fn solution_csv(sol: &DiscreteSolution) -> Result<Artifact, CliError> {
    csv_of(
        "solution.csv",
        sol.solution_nodes()
            .points
            .iter()
            .zip(&sol.values)
            .map(|(q, &u)| SolutionRow { x: q.x, y: q.y, u_h: u }),
    )
}

fn solve_options(p: &Params) -> (SolveOptions, NewtonOptions) {
    (
        SolveOptions {
            cond_exact_limit: p.cond_exact_limit,
            compute_cond: true,
        },
        NewtonOptions {
            tol: p.tol,
            maxit: p.maxit,
            cond_exact_limit: p.cond_exact_limit,
        },
    )
}

/// Quadrature rule on `Y` and, for the decoupled variant, MLS from `X`.
fn discretize(
    domain: &Domain,
    p: &Params,
) -> Result<(QuadratureRule, Option<fredholm2d::ReconstructionOperator>), CliError> {
    let rule = fit_rule(domain, p.h, p.seed_y, p)?;
    let recon = match p.variant {
        Variant::Classical => None,
        Variant::Decoupled => {
            let x = generate_nodes(domain, p.h_x, p.seed_x, true)?;
            Some(build_mls(&x, &rule.nodes, p.mls_degree, p.radius_factor)?)
        }
    };
    Ok((rule, recon))
}

fn value_range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn solve(config: &RunConfig, p: &Params) -> Result<Vec<Artifact>, CliError> {
    let domain = build_domain(p.domain)?;
    let (rule, recon) = discretize(&domain, p)?;
    let (problem, exact): (FredholmProblem, Option<Field>) = match p.problem {
        Preset::ManufacturedSmooth => {
            let case = manufactured(p, &domain)?;
            (case.problem, Some(case.u_exact))
        }
        Preset::DirichletSquare => (dirichlet_square(p.sigma, p.exterior_resolution)?, None),
        Preset::NeumannDisk => (neumann_disk(p.sigma, &rule, p.absorption)?, None),
        Preset::LogisticDisk => unreachable!("rejected by validation"),
    };
    let (so, no) = solve_options(p);
    let sol = problem.solve(&rule, recon.as_ref(), so, no)?;
    let err_sup = exact.map(|u| {
        evaluation_points(&domain, p.eval_resolution)
            .into_iter()
            .map(|q| (interpolate(&sol, q) - u(q)).abs())
            .fold(0.0, f64::max)
    });
    let (u_min, u_max) = value_range(&sol.values);
    let results = json!({
        "variant": sol.variant,
        "lambda": problem.lambda,
        "n_x": sol.values.len(),
        "n_y": rule.len(),
        "cond_inf": sol.cond_inf,
        "residual": sol.residual,
        "w_l1": rule.stability_l1(),
        "r_inf": recon.as_ref().map(|r| r.inf_norm()),
        "err_sup": err_sup,
        "u_min": u_min,
        "u_max": u_max,
    });
    Ok(vec![solution_csv(&sol)?, summary(config, results)])
}

fn solve_nonlinear(config: &RunConfig, p: &Params) -> Result<Vec<Artifact>, CliError> {
    let domain = build_domain(p.domain)?;
    let (rule, recon) = discretize(&domain, p)?;
    let (r, a) = (p.growth_rate, p.capacity);
    let mut problem = logistic_disk(p.sigma, Arc::new(move |_| r), Arc::new(move |_| a))?;
    if p.kernel == KernelName::Zero {
        problem.kernel = Kernel::zero();
    }
    let (so, no) = solve_options(p);
    let sol = problem.solve(&rule, recon.as_ref(), so, no)?;
    let (u_min, u_max) = value_range(&sol.values);
    let results = json!({
        "variant": sol.variant,
        "n_x": sol.values.len(),
        "n_y": rule.len(),
        "iterations": sol.iterations,
        "residual": sol.residual,
        "residual_history": sol.residual_history,
        "cond_inf": sol.cond_inf,
        "u_min": u_min,
        "u_max": u_max,
    });
    Ok(vec![solution_csv(&sol)?, summary(config, results)])
}

#[derive(Serialize)]
struct ReportRow<'a> {
    level: usize,
    h: f64,
    h_x: f64,
    h_y: f64,
    n_x: usize,
    n_y: usize,
    err_sup: Option<f64>,
    eoc: Option<f64>,
    cond_inf: Option<f64>,
    w_l1: Option<f64>,
    r_inf: Option<f64>,
    mls_grown_rows: usize,
    status: &'a str,
}

impl<'a> From<&'a LevelReport> for ReportRow<'a> {
    fn from(l: &'a LevelReport) -> Self {
        Self {
            level: l.level,
            h: l.h,
            h_x: l.h_x,
            h_y: l.h_y,
            n_x: l.n_x,
            n_y: l.n_y,
            err_sup: l.err_sup,
            eoc: l.eoc,
            cond_inf: l.cond_inf,
            w_l1: l.w_l1,
            r_inf: l.r_inf,
            mls_grown_rows: l.mls_grown_rows,
            status: &l.status,
        }
    }
}

#[derive(Serialize)]
struct TimingRow {
    level: usize,
    assemble_seconds: f64,
    solve_seconds: f64,
}

fn study(config: &RunConfig, p: &Params) -> Result<Vec<Artifact>, CliError> {
    let domain = build_domain(p.domain)?;
    let case = manufactured(p, &domain)?;
    let report = run_study(&case, &p.study_config())?;
    let rows: Vec<ReportRow> = report.levels.iter().map(ReportRow::from).collect();
    let results = json!({
        "predicted_order": report.predicted_order,
        "terminal_eoc": report.terminal_eoc(),
        "levels": rows,
    });
    Ok(vec![
        csv_of("report.csv", &rows)?,
        csv_of(
            "timings.csv",
            report.levels.iter().map(|l| TimingRow {
                level: l.level,
                assemble_seconds: l.assemble_seconds,
                solve_seconds: l.solve_seconds,
            }),
        )?,
        summary(config, results),
    ])
}

fn compare(config: &RunConfig, p: &Params) -> Result<Vec<Artifact>, CliError> {
    let domain = build_domain(p.domain)?;
    let case = manufactured(p, &domain)?;
    let base = p.study_config();
    let table = cost_comparison(&case, &p.h_ladder, &base, &base)?;
    let results = json!({
        "classical_target": table.classical_target,
        "size_ratio": table.size_ratio,
        "rows": table.rows.len(),
    });
    Ok(vec![csv_of("compare.csv", &table.rows)?, summary(config, results)])
}
