use cap_wasm::demo::{objective_grid, slope_sweep, two_state_choquet};

#[test]
fn sweep_shows_pattern_at_slope_25() {
    let pts = slope_sweep(0.0, 50.0, 3).unwrap();
    assert_eq!(pts[1].slope, 25.0);
    assert!(pts[1].pattern);
    let p = 50.0 / 101.0;
    assert!((pts[1].values[0] - 100.0 * (1.0 + p)).abs() < 1e-9);
    // free filtering: acts are valued at the uniform prior, where f2 beats f1
    assert!(!pts[0].pattern);
    assert!(slope_sweep(0.0, 1.0, 1).is_err());
}

#[test]
fn grid_peaks_where_the_evaluator_says() {
    let g = objective_grid("reflection", "f6", 30.0, 11).unwrap();
    assert_eq!(g.best, [1.0, 0.0]);
    assert!((g.value - 70.0).abs() < 1e-9);
    let max = g.z.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((max - g.value).abs() < 1e-9);
    assert!((g.z[10][0] - 70.0).abs() < 1e-9);
    assert!(objective_grid("reflection", "f1", 30.0, 11).is_err());
    assert!(objective_grid("5051", "f1", -1.0, 11).is_err());
}

#[test]
fn choquet_matches_core_minimum() {
    let r = two_state_choquet(0.3, 0.5, 10.0, 2.0).unwrap();
    assert!(r.supermodular);
    // core is the segment P(red) in [0.3, 0.5]; the minimum puts 0.3 on red
    assert!((r.choquet.unwrap() - (0.3 * 10.0 + 0.7 * 2.0)).abs() < 1e-12);
    assert!((r.choquet.unwrap() - r.core_min.unwrap()).abs() < 1e-9);
    assert_eq!(r.core.len(), 2);

    let sub = two_state_choquet(0.7, 0.5, 1.0, 0.0).unwrap();
    assert!(!sub.supermodular && sub.choquet.is_none());
}
