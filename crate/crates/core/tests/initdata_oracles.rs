use std::sync::{Arc, OnceLock};

use gch_core::besov::{besov_norm_spectral, lipschitz_norm, BesovParams, BlockNorms, Exponent};
use gch_core::experiments::decay_fit;
use gch_core::initdata::{phi_peak_bounds, snapped_carrier};
use gch_core::reference::{LineEnvelope, Quadrature};
use gch_core::spectral::lp_norm;
use gch_core::{CounterexampleData, Error, FilterBank, Grid, InitDataParams};

struct Setup {
    data: CounterexampleData,
    bank: FilterBank,
}

fn setup() -> &'static Setup {
    static CELL: OnceLock<Setup> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = Grid::new(1024.0, 1 << 20).unwrap();
        Setup {
            data: CounterexampleData::new(&g).unwrap(),
            bank: FilterBank::new(&g).unwrap(),
        }
    })
}

fn params(s: f64, p: f64, r: f64) -> BesovParams {
    BesovParams::new(s, p, r).unwrap()
}

fn bisect(env: &LineEnvelope, mut a: f64, mut b: f64) -> f64 {
    let mut fa = env.value(a);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        let fm = env.value(m);
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `∫|φ|` on the line: the sign changes of `φ` are located first, then
/// each smooth piece is integrated with Gauss–Legendre.
fn envelope_l1_oracle(half_width: f64) -> f64 {
    let env = LineEnvelope::default();
    let h = 0.05;
    let mut cuts = vec![0.0];
    let mut prev = env.value(0.0);
    for i in 1..=(half_width / h) as usize {
        let x = i as f64 * h;
        let v = env.value(x);
        if v != 0.0 && v.signum() != prev.signum() {
            cuts.push(bisect(&env, x - h, x));
        }
        prev = v;
    }
    cuts.push(half_width);
    let total: f64 = cuts
        .windows(2)
        .map(|w| {
            let panels = ((w[1] - w[0]) / 0.5).ceil().max(1.0) as usize;
            Quadrature::composite(w[0], w[1], panels, 16).integrate(|x| env.value(x).abs())
        })
        .sum();
    2.0 * total
}

/// Golden-section refinement of `max |φ'|` after a coarse scan.
fn slope_oracle() -> f64 {
    let env = LineEnvelope::default();
    let f = |x: f64| env.derivative(x).abs();
    let h = 0.01;
    let best = (0..4000).map(|i| i as f64 * h).max_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
    let (mut a, mut b) = ((best - h).max(0.0), best + h);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

#[test]
fn envelope_is_real_even_and_peaked() {
    let s = setup();
    let v = s.data.phi().values();
    let n = v.len();
    let asym = (1..n).map(|i| (v[i] - v[n - i]).abs()).fold(0.0, f64::max);
    assert!(asym <= 1e-12);
    let (lo, hi) = phi_peak_bounds();
    let peak = v[n / 2];
    assert!(peak >= lo && peak <= hi);
    assert_eq!(peak, s.data.phi().max_abs());
    let spec = s.data.phi_spectrum().unwrap();
    assert!(spec.l2_norm_above(0.5 - 1e-12) <= 1e-12 * spec.l2_norm());
    assert!(spec.hermitian_defect() <= 1e-13);
}

#[test]
fn envelope_l1_norm_matches_quadrature() {
    let measured = lp_norm(setup().data.phi(), 1.0).unwrap();
    let oracle = envelope_l1_oracle(1024.0);
    assert!((measured - oracle).abs() <= 1e-8, "{measured} vs {oracle}");
}

#[test]
fn envelope_lipschitz_norm_matches_refined_oracle() {
    let measured = lipschitz_norm(setup().data.phi()).unwrap();
    let oracle = LineEnvelope::default().value(0.0) + slope_oracle();
    assert!((measured - oracle).abs() <= 1e-6, "{measured} vs {oracle}");
}

#[test]
fn high_data_occupy_exactly_block_n() {
    let s = setup();
    for n in 3..=9 {
        let p = InitDataParams::new(n, 2.0, 1).unwrap();
        let f = s.data.fn_spectrum(&p).unwrap();
        assert!(f.hermitian_defect() <= 1e-13);
        let norm = f.l2_norm();
        for j in s.bank.blocks() {
            let block = s.bank.dyadic_block_spectral(&f, j).unwrap();
            let off = if j == n as i32 { block.sub(&f).unwrap().l2_norm() } else { block.l2_norm() };
            assert!(off <= 1e-12 * norm, "n {n} block {j}: {off:e}");
        }
        let field = s.data.build_fn(&p).unwrap();
        assert!(field.max_abs() <= p.high_amplitude() * s.data.phi().max_abs() * (1.0 + 1e-12));
    }
}

#[test]
fn low_data_live_in_the_low_block_and_scale_exactly() {
    let s = setup();
    let phi = s.data.phi_spectrum().unwrap();
    for q in 1..=3 {
        for pr in [params(2.0, 2.0, 2.0), params(1.5, 2.0, 1.0), params(2.5, 1.0, f64::INFINITY)] {
            let phi_norm = besov_norm_spectral(&phi, &pr, &s.bank).unwrap().0;
            let mut prev: Option<f64> = None;
            for n in 3..=9 {
                let p = InitDataParams::new(n, pr.s, q).unwrap();
                let g = s.data.gn_spectrum(&p).unwrap();
                let block = s.bank.dyadic_block_spectral(&g, -1).unwrap();
                assert!(block.sub(&g).unwrap().l2_norm() <= 1e-12 * g.l2_norm());
                let norm = besov_norm_spectral(&g, &pr, &s.bank).unwrap().0;
                let expected = 12.0 / 17.0 * (-(n as f64) / q as f64).exp2() * phi_norm;
                assert!((norm / expected - 1.0).abs() <= 1e-12);
                if let Some(prev) = prev {
                    assert!((norm / prev / (-1.0 / q as f64).exp2() - 1.0).abs() <= 1e-12);
                }
                prev = Some(norm);
            }
        }
    }
}

#[test]
fn sum_minus_high_part_is_the_low_part() {
    let s = setup();
    let p = InitDataParams::new(6, 2.0, 2).unwrap();
    let u = s.data.build_u0n(&p).unwrap();
    let f = s.data.build_fn(&p).unwrap();
    let g = s.data.build_gn(&p).unwrap();
    for ((a, b), c) in u.values().iter().zip(f.values()).zip(g.values()) {
        assert_eq!(*a, b + c);
    }
    let residual = u.sub(&f).unwrap().sub(&g).unwrap().max_abs();
    assert!(residual <= 4.0 * f64::EPSILON * u.max_abs());
}

#[test]
fn high_data_norms_follow_their_scaling() {
    let s = setup();
    let pr = params(2.0, 2.0, 2.0);
    let norms: Vec<(f64, f64)> = (5..=9)
        .map(|n| {
            let p = InitDataParams::new(n, pr.s, 1).unwrap();
            let blocks = BlockNorms::of_spectrum(&s.data.fn_spectrum(&p).unwrap(), pr.p, &s.bank).unwrap();
            (blocks.besov(pr.s, pr.r), blocks.besov(pr.s + 1.0, pr.r))
        })
        .collect();
    let first = norms[0].0;
    for (k, (b_s, b_s1)) in norms.iter().enumerate() {
        assert!((b_s / first - 1.0).abs() <= 0.10);
        if k > 0 {
            assert!((b_s1 / norms[k - 1].1 / 2.0 - 1.0).abs() <= 0.10);
        }
    }
}

#[test]
fn sum_decays_like_the_low_part_below_s() {
    let s = setup();
    for q in [1u32, 2] {
        let ns: Vec<f64> = (5..=9).map(f64::from).collect();
        let values: Vec<f64> = (5..=9)
            .map(|n| {
                let p = InitDataParams::new(n, 2.0, q).unwrap();
                let u = s.data.u0n_spectrum(&p).unwrap();
                BlockNorms::of_spectrum(&u, Exponent::new(2.0).unwrap(), &s.bank)
                    .unwrap()
                    .besov(1.0, Exponent::new(2.0).unwrap())
            })
            .collect();
        let fit = decay_fit(&ns, &values).unwrap();
        let target = -1.0 / q as f64;
        assert!((fit.slope / target - 1.0).abs() <= 0.10, "Q {q}: slope {}", fit.slope);
    }
}

#[test]
fn sum_is_bounded_above_s_after_rescaling() {
    let s = setup();
    for sigma in [2.0, 3.0] {
        let scaled: Vec<f64> = (5..=9)
            .map(|n| {
                let p = InitDataParams::new(n, 2.0, 1).unwrap();
                let u = s.data.u0n_spectrum(&p).unwrap();
                let b = BlockNorms::of_spectrum(&u, Exponent::new(2.0).unwrap(), &s.bank).unwrap();
                b.besov(sigma, Exponent::new(2.0).unwrap()) / ((sigma - 2.0) * n as f64).exp2()
            })
            .collect();
        let max = scaled.iter().cloned().fold(0.0, f64::max);
        let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 2.0, "sigma {sigma}: {scaled:?}");
    }
}

#[test]
fn doubling_the_domain_barely_moves_the_high_norm() {
    let s = setup();
    let g2: Arc<Grid> = Grid::new(2048.0, 1 << 21).unwrap();
    let data2 = CounterexampleData::new(&g2).unwrap();
    let bank2 = FilterBank::new(&g2).unwrap();
    let pr = params(2.0, 2.0, 2.0);
    for n in [5, 7, 9] {
        let p = InitDataParams::new(n, pr.s, 1).unwrap();
        let a = besov_norm_spectral(&s.data.fn_spectrum(&p).unwrap(), &pr, &s.bank).unwrap().0;
        let b = besov_norm_spectral(&data2.fn_spectrum(&p).unwrap(), &pr, &bank2).unwrap().0;
        assert!((b / a - 1.0).abs() < 0.01, "n {n}: {a} vs {b}");
    }
}

#[test]
fn unresolvable_carrier_is_rejected() {
    let g = Grid::new(1024.0, 1 << 16).unwrap();
    assert!(matches!(snapped_carrier(&g, 9), Err(Error::Resolution { .. })));
}
