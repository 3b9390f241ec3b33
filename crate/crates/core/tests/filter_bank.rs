use std::f64::consts::PI;
use std::sync::Arc;

use gch_core::experiments::monitors::random_field;
use gch_core::littlewood_paley::{block_symbol, chi, phi};
use gch_core::spectral::{inverse_transform, transform};
use gch_core::{Field, FilterBank, Grid};
use proptest::prelude::*;

fn bank() -> FilterBank {
    FilterBank::new(&Grid::new(64.0, 8192).unwrap()).unwrap()
}

fn snapped_mode(g: &Arc<Grid>, j: i32) -> Field {
    let k = g.snap(17.0 / 12.0 * (j as f64).exp2());
    Field::from_fn(g, |x| (k * x).sin()).unwrap()
}

#[test]
fn cutoff_values() {
    assert_eq!(chi(0.5), 1.0);
    assert_eq!(chi(1.5), 0.0);
    assert_eq!(phi(1.45), 1.0);
}

#[test]
fn partition_of_unity_on_the_lattice() {
    assert!(bank().partition_deviation() <= 1e-12);
}

#[test]
fn chi_and_high_blocks_are_disjoint() {
    let b = bank();
    for xi in b.grid().wavenumbers() {
        for j in 1..=b.j_max() {
            assert_eq!(chi(xi) * block_symbol(j, xi), 0.0, "xi = {xi}, j = {j}");
        }
    }
}

#[test]
fn carrier_mode_occupies_one_block() {
    let b = bank();
    let g = b.grid().clone();
    for j in 0..=b.j_max() {
        let u = snapped_mode(&g, j);
        for k in b.blocks() {
            let block = b.dyadic_block(&u, k).unwrap();
            let expected = if k == j { &u } else { &Field::zeros(&g) };
            assert!(block.sub(expected).unwrap().max_abs() <= 1e-12, "j = {j}, block {k}");
        }
    }
}

#[test]
fn constant_lives_in_the_low_block() {
    let b = bank();
    let u = Field::from_fn(b.grid(), |_| 2.5).unwrap();
    assert!(b.dyadic_block(&u, -1).unwrap().sub(&u).unwrap().max_abs() <= 1e-12);
    for j in 0..=b.j_max() {
        assert!(b.dyadic_block(&u, j).unwrap().max_abs() <= 1e-12);
    }
}

#[test]
fn low_cutoff_examples() {
    let b = bank();
    let g = b.grid().clone();
    let u = random_field(&g, 9, 0, b.band_limit()).unwrap();
    let full = b.low_cutoff(&u, b.j_max() + 1).unwrap();
    assert!(full.sub(&u).unwrap().max_abs() <= 1e-12);
    let s0 = b.low_cutoff(&u, 0).unwrap();
    let d_low = b.dyadic_block(&u, -1).unwrap();
    assert!(s0.sub(&d_low).unwrap().max_abs() <= 1e-12);
    // S_j kills modes above 2^{j−1}·8/3.
    for j in 1..=b.j_max() {
        let k = g.snap((j as f64 - 1.0).exp2() * 8.0 / 3.0 + 0.5);
        let mode = Field::from_fn(&g, |x| (k * x).cos()).unwrap();
        assert!(b.low_cutoff(&mode, j).unwrap().max_abs() <= 1e-12, "j = {j}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reconstruction(seed in any::<u64>()) {
        let b = bank();
        let u = random_field(b.grid(), seed, 0, b.band_limit()).unwrap();
        let blocks = b.all_blocks(&transform(&u).unwrap()).unwrap();
        let mut sum = Field::zeros(b.grid());
        for block in &blocks {
            sum = sum.add(block).unwrap();
        }
        prop_assert!(sum.sub(&u).unwrap().max_abs() <= 1e-12 * u.max_abs().max(1.0));
    }

    #[test]
    fn far_blocks_are_orthogonal(seed in any::<u64>()) {
        let b = bank();
        let u = random_field(b.grid(), seed, 3, b.band_limit()).unwrap();
        let spec = transform(&u).unwrap();
        let norm = spec.l2_norm();
        for j in b.blocks() {
            let dj = b.dyadic_block_spectral(&spec, j).unwrap();
            for k in b.blocks().filter(|k| (k - j).abs() >= 2) {
                let dk = b.dyadic_block_spectral(&dj, k).unwrap();
                prop_assert!(dk.l2_norm() <= 1e-12 * norm);
            }
        }
    }

    #[test]
    fn blocks_of_real_fields_are_real(seed in any::<u64>()) {
        let b = bank();
        let u = random_field(b.grid(), seed, 4, b.band_limit()).unwrap();
        let spec = transform(&u).unwrap();
        let peak = |s: &gch_core::SpectralField| s.raw().iter().fold(0.0, |m: f64, c| m.max(c.norm()));
        let scale = peak(&spec);
        for j in b.blocks() {
            let block = b.dyadic_block_spectral(&spec, j).unwrap();
            // the defect is relative to the block's own peak
            prop_assert!(block.hermitian_defect() * peak(&block) <= 1e-13 * scale);
        }
    }

    #[test]
    fn block_outputs_survive_a_round_trip(seed in any::<u64>(), j in -1i32..7) {
        let b = bank();
        let u = random_field(b.grid(), seed, 5, b.band_limit()).unwrap();
        let block = b.dyadic_block(&u, j).unwrap();
        let again = inverse_transform(&transform(&block).unwrap()).unwrap();
        prop_assert!(block.sub(&again).unwrap().max_abs() <= 1e-13);
    }
}

#[test]
fn block_symbols_tile_the_axis() {
    let b = bank();
    for i in 0..2000 {
        let xi = i as f64 * b.band_limit() / 2000.0;
        let total: f64 = chi(xi) + (0..=b.j_max()).map(|j| block_symbol(j, xi)).sum::<f64>();
        assert!((total - 1.0).abs() <= 1e-12, "xi = {xi}");
    }
    assert!((b.grid().k_max() - PI * 8192.0 / 128.0).abs() < 1e-12);
}
