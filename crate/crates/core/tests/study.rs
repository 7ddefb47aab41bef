use fredholm2d::problems::manufactured_smooth;
use fredholm2d::solver::Variant;
use fredholm2d::study::{cost_comparison, run_study, StudyConfig};
use fredholm2d::*;

fn small_case() -> fredholm2d::problems::ManufacturedCase {
    manufactured_smooth(&Domain::unit_square(), 0.5, 1.0, 8).unwrap()
}

#[test]
fn coincident_nodes_make_both_variants_the_same_system() {
    // Equal spacing and seeds: every Y node is an X node, so R = I.
    let config = StudyConfig {
        h_ladder: vec![0.2, 0.1, 0.05],
        c_x: 0.5,
        c_y: 0.5,
        seed_x: 9,
        seed_y: 9,
        eval_resolution: 200,
        ..Default::default()
    };
    let table = cost_comparison(&small_case(), &config.h_ladder.clone(), &config, &config).unwrap();
    let (classical, decoupled): (Vec<_>, Vec<_>) = table.rows.iter().partition(|r| r.variant == Variant::Classical);
    for (c, d) in classical.iter().zip(&decoupled) {
        assert_eq!(c.system_size, d.system_size);
        let (ec, ed) = (c.err_sup.unwrap(), d.err_sup.unwrap());
        assert!((ec - ed).abs() <= 1e-12 * ec.max(1.0), "{ec} vs {ed}");
    }
    // Same dense system, so the solve times agree up to noise.
    let (tc, td) = (classical[2].solve_seconds, decoupled[2].solve_seconds);
    assert!(td <= 1.2 * tc + 0.05, "classical {tc}s, decoupled {td}s");
}

#[test]
fn decoupled_system_is_sized_by_x() {
    let config = StudyConfig {
        h_ladder: vec![0.2, 0.1, 0.05],
        c_x: 1.0,
        c_y: 0.5,
        eval_resolution: 200,
        ..Default::default()
    };
    let table = cost_comparison(&small_case(), &config.h_ladder.clone(), &config, &config).unwrap();
    for r in &table.rows {
        match r.variant {
            Variant::Classical => assert_eq!(r.system_size, r.n_y),
            Variant::Decoupled => {
                assert_eq!(r.system_size, r.n_x);
                // Halving the spacing roughly quadruples the count.
                let ratio = r.n_y as f64 / r.n_x as f64;
                assert!((2.5..6.0).contains(&ratio), "|Y|/|X| = {ratio}");
            }
        }
    }
}

#[test]
fn realizations_keep_the_worst_level() {
    let base = StudyConfig {
        h_ladder: vec![0.2, 0.1, 0.05],
        mls_degree: 1,
        eval_resolution: 200,
        ..Default::default()
    };
    let one = run_study(&small_case(), &base).unwrap();
    let three = run_study(&small_case(), &StudyConfig { realizations: 3, ..base.clone() }).unwrap();
    for (a, b) in one.levels.iter().zip(&three.levels) {
        assert_eq!(a.n_x, b.n_x);
        assert!(b.err_sup.unwrap() >= a.err_sup.unwrap());
        assert!(b.ok());
    }
    let again = run_study(&small_case(), &StudyConfig { realizations: 3, ..base }).unwrap();
    let errs = |r: &fredholm2d::study::ConvergenceReport| r.levels.iter().map(|l| l.err_sup).collect::<Vec<_>>();
    assert_eq!(errs(&three), errs(&again));
}

#[test]
fn stability_is_logged_per_level() {
    let r = run_study(
        &small_case(),
        &StudyConfig {
            h_ladder: vec![0.2, 0.1, 0.05],
            eval_resolution: 200,
            ..Default::default()
        },
    )
    .unwrap();
    for l in &r.levels {
        assert!(l.w_l1.unwrap() <= 1.05);
        assert!(l.r_inf.unwrap() >= 1.0 - 1e-12);
        assert!(l.cond_inf.unwrap() >= 1.0);
    }
    assert!(r.levels[0].eoc.is_none() && r.levels[1..].iter().all(|l| l.eoc.is_some()));
}
