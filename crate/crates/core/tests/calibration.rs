//! Calibration of the step-up family and the asymptotic limit formula.

use mtp_core::calibrate::{
    asymptotic_limit, convergence_probe, solve_kappa, worst_case_fdr_su, KappaSolution,
};

#[test]
fn kappa_bracketing_at_n20() {
    let (n, alpha, tol) = (20usize, 0.1f64, 1e-5);
    let result = match solve_kappa(n, alpha, tol).unwrap() {
        KappaSolution::Converged(r) => r,
        other => panic!("expected convergence, got {other:?}"),
    };
    assert!((result.worst_case_fdr_at_kappa - alpha).abs() <= tol);
    assert!(result.kappa > 0.0 && result.kappa < 1.0 - alpha);
    // Monotonicity probe around κ.
    for (offset, above) in [(-0.05, false), (0.05, true)] {
        let delta = result.kappa + offset;
        if delta <= 0.0 || delta >= 1.0 - alpha {
            continue;
        }
        let (w, _) = worst_case_fdr_su(n, alpha, delta).unwrap();
        assert_eq!(w > alpha, above, "offset {offset}: worst {w}");
    }
}

#[test]
fn asymptotic_limit_grid_properties() {
    // x solves the fixed point, stays in (0,1), the limit stays below α,
    // and the limit increases in c at fixed δ.
    let alpha = 0.1;
    for i in 1..=20 {
        let delta = i as f64 / 21.0 * (1.0 - alpha);
        let mut prev_limit = -1.0;
        for j in 1..=20 {
            let c = alpha + j as f64 / 21.0 * (1.0 - alpha);
            let lim = asymptotic_limit(alpha, c, delta).unwrap();
            let residual = lim.x / (delta * lim.x + alpha) - ((1.0 - c) + c * lim.x);
            assert!(residual.abs() <= 1e-10);
            assert!(lim.x > 0.0 && lim.x < 1.0);
            assert!(lim.limit_fdr < alpha);
            assert!(lim.limit_fdr > prev_limit, "c={c} delta={delta}");
            prev_limit = lim.limit_fdr;
        }
    }
}

#[test]
fn convergence_probe_trends() {
    // Ladder chosen so c·n is integral; rounding n0 = ⌈cn⌉ at other n
    // shifts the effective true-null fraction and can break the trend.
    let table = convergence_probe(&[10, 20, 40, 80], 0.1, 0.5, 0.5).unwrap();
    assert!(table.worst_gap_monotone, "{:?}", table.rows);
    assert!(table.du_gap_monotone, "{:?}", table.rows);
    // The worst case climbs toward α from below.
    for w in table.rows.windows(2) {
        assert!(w[1].worst_case_fdr >= w[0].worst_case_fdr);
    }
    // n = 1 row: worst case equals α/(n+1−δ).
    let one = convergence_probe(&[1], 0.1, 0.5, 0.5).unwrap();
    assert!((one.rows[0].worst_case_fdr - 0.1 / (2.0 - 0.5)).abs() < 1e-14);
    assert!(convergence_probe(&[5, 5], 0.1, 0.5, 0.5).is_err());
    assert!(convergence_probe(&[], 0.1, 0.5, 0.5).is_err());
}
