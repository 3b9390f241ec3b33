use gch_core::besov::{besov_norm, e_functional, BesovParams, BlockNorms, Exponent};
use gch_core::experiments::monitors::random_field;
use gch_core::spectral::{lp_norm, transform};
use gch_core::{Error, Field, FilterBank, Grid};
use proptest::prelude::*;

fn bank() -> FilterBank {
    FilterBank::new(&Grid::new(64.0, 8192).unwrap()).unwrap()
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::new(1.0).unwrap()),
        Just(Exponent::new(2.0).unwrap()),
        (1.0f64..6.0).prop_map(|v| Exponent::new(v).unwrap()),
        Just(Exponent::INFINITY),
    ]
}

#[test]
fn single_block_identity() {
    let b = bank();
    let g = b.grid().clone();
    for j in 0..=b.j_max() {
        let k = g.snap(17.0 / 12.0 * (j as f64).exp2());
        let u = Field::from_fn(&g, |x| (k * x).sin()).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            for r in [1.0, 2.0, f64::INFINITY] {
                let params = BesovParams::new(1.5, p, r).unwrap();
                let (norm, profile) = besov_norm(&u, &params, &b).unwrap();
                let expected = (1.5 * j as f64).exp2() * lp_norm(&u, p).unwrap();
                assert!((norm / expected - 1.0).abs() <= 1e-10, "j {j} p {p} r {r}");
                assert_eq!(profile.dominant_block(), Some(j));
            }
        }
    }
}

#[test]
fn zero_field_has_zero_profile() {
    let b = bank();
    let params = BesovParams::new(2.0, 2.0, 2.0).unwrap();
    let (norm, profile) = besov_norm(&Field::zeros(b.grid()), &params, &b).unwrap();
    assert_eq!(norm, 0.0);
    assert!(profile.values().iter().all(|v| *v == 0.0));
}

#[test]
fn content_past_the_band_limit_is_refused() {
    let b = bank();
    let k = b.grid().snap(0.5 * (b.band_limit() + b.grid().k_max()));
    let u = Field::from_fn(b.grid(), |x| (k * x).cos()).unwrap();
    let params = BesovParams::new(1.0, 2.0, 2.0).unwrap();
    assert!(matches!(besov_norm(&u, &params, &b), Err(Error::Truncation { .. })));
}

#[test]
fn plancherel_and_physical_block_norms_agree() {
    let b = bank();
    let u = random_field(b.grid(), 11, 0, b.band_limit()).unwrap();
    let spec = transform(&u).unwrap();
    let fast = BlockNorms::of_spectrum(&spec, Exponent::new(2.0).unwrap(), &b).unwrap();
    for ((j, v), block) in fast.raw().zip(b.all_blocks(&spec).unwrap()) {
        let slow = lp_norm(&block, 2.0).unwrap();
        assert!((v - slow).abs() <= 1e-12 * slow.max(1e-300), "block {j}");
    }
}

#[test]
fn e_functional_of_low_data_decays_like_its_amplitude() {
    let g = Grid::new(1024.0, 1 << 18).unwrap();
    let data = gch_core::CounterexampleData::new(&g).unwrap();
    let q = 2;
    let values: Vec<f64> = (5..=9)
        .map(|n| {
            let p = gch_core::InitDataParams::new(n, 2.0, q).unwrap();
            e_functional(&data.build_gn(&p).unwrap(), q).unwrap()
        })
        .collect();
    for w in values.windows(2) {
        let ratio = w[1] / w[0];
        assert!((ratio / 0.5f64.sqrt() - 1.0).abs() <= 0.01, "ratio {ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn homogeneity(seed in any::<u64>(), p in exponent(), r in exponent(), s in -1.0f64..3.0) {
        let b = bank();
        let u = random_field(b.grid(), seed, 0, b.band_limit()).unwrap();
        let params = BesovParams::new(s, p.value(), r.value()).unwrap();
        let (a, _) = besov_norm(&u, &params, &b).unwrap();
        let (c, _) = besov_norm(&u.scaled(3.5), &params, &b).unwrap();
        prop_assert!((c - 3.5 * a).abs() <= 1e-12 * c);
    }

    #[test]
    fn r_nesting(seed in any::<u64>(), p in exponent(), r1 in 1.0f64..8.0, dr in 0.0f64..8.0) {
        let b = bank();
        let u = random_field(b.grid(), seed, 1, b.band_limit()).unwrap();
        let blocks = BlockNorms::of_field(&u, p, &b).unwrap();
        let lo = blocks.besov(2.0, Exponent::new(r1).unwrap());
        let hi = blocks.besov(2.0, Exponent::new(r1 + dr).unwrap());
        let inf = blocks.besov(2.0, Exponent::INFINITY);
        prop_assert!(lo >= hi * (1.0 - 1e-14));
        prop_assert!(hi >= inf * (1.0 - 1e-14));
    }

    #[test]
    fn s_monotone_without_low_block(seed in any::<u64>(), p in exponent(), s in 0.0f64..3.0, ds in 0.0f64..2.0) {
        let b = bank();
        let u = random_field(b.grid(), seed, 2, b.band_limit()).unwrap();
        let u = u.sub(&b.dyadic_block(&u, -1).unwrap()).unwrap();
        let blocks = BlockNorms::of_field(&u, p, &b).unwrap();
        let r = Exponent::new(2.0).unwrap();
        prop_assert!(blocks.besov(s, r) <= blocks.besov(s + ds, r) * (1.0 + 1e-14));
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>(), p in exponent(), r in exponent()) {
        let b = bank();
        let u = random_field(b.grid(), seed, 3, b.band_limit()).unwrap();
        let v = random_field(b.grid(), seed, 4, b.band_limit()).unwrap();
        let params = BesovParams::new(1.0, p.value(), r.value()).unwrap();
        let n = |f: &Field| besov_norm(f, &params, &b).unwrap().0;
        prop_assert!(n(&u.add(&v).unwrap()) <= n(&u) + n(&v) + 1e-12);
    }
}
