use std::f64::consts::PI;
use std::sync::Arc;

use gch_core::experiments::monitors::random_field;
use gch_core::experiments::order_fit;
use gch_core::solver::{
    integrate_field, nonlocal_p, rhs, rhs_spectral, step_rk4, SolverConfig,
};
use gch_core::spectral::transform;
use gch_core::{Error, Field, Grid};
use proptest::prelude::*;

fn bump_grid(points: usize) -> Arc<Grid> {
    Grid::new(32.0, points).unwrap()
}

fn bump(g: &Arc<Grid>, amp: f64) -> Field {
    Field::from_fn(g, |x| amp * (-x * x).exp() * (1.0 + 0.2 * x)).unwrap()
}

#[test]
fn nonlocal_term_vanishes_on_constants() {
    let g = bump_grid(256);
    for q in 1..=3 {
        assert_eq!(nonlocal_p(&Field::zeros(&g), q).unwrap().max_abs(), 0.0);
        let c = Field::from_fn(&g, |_| -0.7).unwrap();
        assert!(nonlocal_p(&c, q).unwrap().max_abs() <= 1e-14);
    }
}

/// For `u = sin x` with `Q = 1`: `P = −(1/10) sin 2x` and the full right-hand
/// side is `−(3/5) sin 2x`, both computed by hand from the Fourier symbols.
#[test]
fn single_mode_oracle() {
    let g = Grid::new(PI, 128).unwrap();
    let u = Field::from_fn(&g, f64::sin).unwrap();
    let p = nonlocal_p(&u, 1).unwrap();
    let f = rhs(&u, 1).unwrap();
    for i in 0..g.points() {
        let s2 = (2.0 * g.x(i)).sin();
        assert!((p.values()[i] + 0.1 * s2).abs() <= 1e-10);
        assert!((f.values()[i] + 0.6 * s2).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rhs_has_zero_mean(seed in any::<u64>(), q in 1u32..4) {
        let g = Grid::new(16.0, 512).unwrap();
        let u = random_field(&g, seed, 0, 20.0).unwrap();
        let f = rhs_spectral(&transform(&u).unwrap(), q).unwrap();
        prop_assert!(f.mean().abs() <= 1e-13);
    }

    #[test]
    fn one_step_keeps_the_mean(seed in any::<u64>(), q in 1u32..4) {
        let g = Grid::new(16.0, 512).unwrap();
        let u = random_field(&g, seed, 1, 10.0).unwrap().scaled(0.3);
        let stepped = step_rk4(&u, 1e-4, q).unwrap();
        prop_assert!((stepped.mean() - u.mean()).abs() <= 1e-12);
    }
}

#[test]
fn energy_and_mean_are_conserved() {
    let g = bump_grid(1024);
    let u = bump(&g, 0.5);
    for q in 1..=3 {
        let traj = integrate_field(&u, &SolverConfig::new(q, 0.1), None).unwrap();
        assert!(traj.energy_drift() <= 1e-8, "Q {q}: {}", traj.energy_drift());
        assert!(traj.mean_drift() <= 1e-10, "Q {q}: {}", traj.mean_drift());
    }
}

fn final_state(u: &Field, q: u32, t: f64, dt: f64) -> Field {
    integrate_field(u, &SolverConfig::new(q, t).with_dt(dt), None)
        .unwrap()
        .final_field()
        .unwrap()
}

/// Step doubling: over a fixed interval the difference between runs at `h`
/// and `h/2` scales like `h⁴`, so halving `h` divides it by about 16.
#[test]
fn richardson_ratio_is_sixteen() {
    let g = bump_grid(256);
    let u = bump(&g, 1.0);
    let t = 0.4;
    let diff = |dt: f64| {
        let coarse = final_state(&u, 2, t, dt);
        let fine = final_state(&u, 2, t, dt / 2.0);
        coarse.sub(&fine).unwrap().max_abs()
    };
    let ratio = diff(0.02) / diff(0.01);
    assert!((ratio - 16.0).abs() <= 1.0, "ratio {ratio}");
}

#[test]
fn rk4_order_is_four() {
    let g = bump_grid(256);
    let u = bump(&g, 1.0);
    let t = 0.4;
    let dts = [0.02, 0.01, 0.005, 0.0025];
    let reference = final_state(&u, 1, t, dts[3] / 8.0);
    let errors: Vec<f64> = dts
        .iter()
        .map(|&dt| final_state(&u, 1, t, dt).sub(&reference).unwrap().max_abs())
        .collect();
    let fit = order_fit(&dts, &errors).unwrap();
    assert!((3.8..=4.2).contains(&fit.slope), "order {} from {errors:?}", fit.slope);
}

#[test]
fn refining_the_grid_leaves_the_solution_unchanged() {
    let norms: Vec<f64> = [1024usize, 2048]
        .iter()
        .map(|&n| {
            let g = bump_grid(n);
            let cfg = SolverConfig::new(2, 0.05).with_dt(1e-3);
            let traj = integrate_field(&bump(&g, 0.5), &cfg, None).unwrap();
            traj.final_state.l2_norm()
        })
        .collect();
    assert!((norms[0] - norms[1]).abs() <= 1e-10, "{norms:?}");
}

#[test]
fn blow_up_keeps_the_partial_trajectory() {
    let g = bump_grid(256);
    let u = bump(&g, 1.0);
    let mut cfg = SolverConfig::new(1, 1.0).with_dt(0.01);
    cfg.blowup_threshold = 1.05 * {
        let ux = gch_core::spectral::derivative(&u, 1).unwrap();
        ux.max_abs()
    };
    match integrate_field(&u, &cfg, None) {
        Err(Error::BlowUp { t, partial, .. }) => {
            assert!(t > 0.0 && t < 1.0);
            assert_eq!(partial.final_time, t);
            assert_eq!(partial.diagnostics.len(), partial.steps);
            assert!(partial.diagnostics.iter().all(|r| r.max_ux <= cfg.blowup_threshold));
        }
        other => panic!("expected blow-up, got {other:?}"),
    }
}
