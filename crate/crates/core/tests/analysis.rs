use softkill_core::analysis::*;
use softkill_core::torus::TorusGrid;

fn small(json: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_json(json).unwrap();
    cfg.points = 32;
    cfg.dt = 5e-3;
    cfg.pair.points = 16;
    cfg.pair.delta_points = 33;
    cfg.pair.dt = 1e-2;
    cfg
}

#[test]
fn constant_cost_without_control_has_no_gap() {
    let cfg = small(
        r#"{"potential": "one", "terminal": {"constant": 0.3}, "initial": "one_plus_cos",
            "particles": {"counts": [2, 5, 9], "replications": 4, "feedback": "zero"},
            "pair": {"exact_row": false}}"#,
    );
    let rep = run_convergence_study(&cfg).unwrap();
    assert!((rep.limit_value - 0.3).abs() < 1e-12);
    for r in &rep.rows {
        assert!(r.ok);
        assert!(r.gap < 1e-12 && r.rms_gap < 1e-12, "{r:?}");
    }
    assert!(rep.fit.is_none());
}

#[test]
fn heterogeneous_clocks_enter_the_bound() {
    let cfg = small(
        r#"{"particles": {"counts": [1, 4, 10], "replications": 2, "clocks": [1.0986122886681098]},
            "pair": {"exact_row": false}}"#,
    );
    let rep = run_convergence_study(&cfg).unwrap();
    for r in &rep.rows {
        // one clock at log 3: that particle weighs 1/3 of the others
        let n = r.particles as f64;
        let z = 1.0 / 3.0 + (n - 1.0);
        let exact = ((1.0 / 9.0 + (n - 1.0)) / (z * z)).sqrt();
        assert!((r.rhs - exact).abs() < 1e-12, "{} vs {exact}", r.rhs);
        assert!(r.rhs > 1.0 / n.sqrt() || r.particles == 1);
    }
}

#[test]
fn study_is_deterministic_and_fits_a_decreasing_slope() {
    let cfg = small(
        r#"{"particles": {"counts": [8, 32, 128, 512], "replications": 24}, "pair": {"exact_row": false}}"#,
    );
    let a = run_convergence_study(&cfg).unwrap();
    let b = run_convergence_study(&cfg).unwrap();
    assert_eq!(a, b);
    let fit = a.fit.unwrap();
    assert!(fit.slope < -0.3, "{fit:?}");
    assert_eq!(fit.points, 4);
    assert!(a
        .rows
        .iter()
        .all(|r| r.std_error >= 0.0 && r.rms_std_error >= 0.0));
    let report = a.to_report();
    assert_eq!(
        report.column("rms_gap").unwrap(),
        a.rows.iter().map(|r| r.rms_gap).collect::<Vec<_>>()
    );
}

#[test]
fn study_includes_the_exact_pair_row() {
    let cfg = small(r#"{"particles": {"counts": [4], "replications": 2}, "pair": {"samples": 2}}"#);
    let rep = run_convergence_study(&cfg).unwrap();
    assert!(rep.exact_pair_error.is_none());
    assert_eq!(rep.exact_pair.len(), 2);
    assert!(rep.exact_pair.iter().all(|r| r.ratio.is_finite()));
}

#[test]
fn random_densities_are_reproducible_probability_densities() {
    use rand::SeedableRng;
    let grid = TorusGrid::new(1, 64).unwrap();
    let mut r1 = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let mut r2 = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let a = random_density(&grid, 8, 0.5, &mut r1).unwrap();
    let b = random_density(&grid, 8, 0.5, &mut r2).unwrap();
    assert_eq!(a.values(), b.values());
    assert!((a.mean() - 1.0).abs() < 1e-14);
    assert!(a.min() >= 0.5 - 1e-12 && a.max() <= 1.5 + 1e-12);
}

#[test]
fn probes_are_finite_and_stable() {
    let cfg = small(r#"{"probe": {"pairs": 3, "scales": [1.0, 0.5], "ladder": 5, "tol": 1e-11}}"#);
    let rep = regularity_probe(&cfg).unwrap();
    assert!(rep.all_converged);
    for s in &rep.scales {
        assert!(s.lipschitz.is_finite() && s.lipschitz > 0.0);
        assert!(s.semiconcavity.is_finite());
    }
    assert!(rep.lipschitz_change < 0.15);
    assert!(rep.fp_stability >= 1.0 - 1e-12 && rep.fp_stability.is_finite());
    assert!(rep.dpp_defect < 1e-4 && rep.duality_defect < 1e-4);
    assert!(rep.time.time_lipschitz_change < 0.2 && rep.time.holder_change < 0.2);
}

#[test]
fn time_ladder_matches_cole_hopf_without_killing() {
    let mut cfg = small(
        r#"{"potential": "zero", "terminal": "cos", "initial": {"constant": 1.0, "modes": [{"n": [1], "sin": 0.4}]}, "probe": {"ladder": 5}}"#,
    );
    cfg.dt = 2e-3;
    cfg.horizon = 0.25;
    let t = time_regularity_probe(&cfg).unwrap();
    for l in &t.levels {
        assert!(l.oracle_error.unwrap() < 1e-5, "{:?}", l.oracle_error);
        assert!(l.time_lipschitz.is_finite() && l.holder.is_finite());
        assert_eq!(l.times.len(), 5);
    }
}

#[test]
fn pair_comparison_is_reproducible() {
    let cfg = small(r#"{"pair": {"samples": 3}}"#);
    let a = run_pair_comparison(&cfg).unwrap();
    let b = run_pair_comparison(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 3);
    assert!(a.max_ratio.is_finite());
    assert!(a.value_sup <= 1.0 + 1e-6);
}
