//! Measured constants of the product, difference and power estimates on a
//! seeded corpus of random band-limited fields.
//!
//! For consecutive corpus pairs `(u, v)`:
//!
//! ```text
//! product   ‖uv‖_{B^s}       / (‖u‖_∞ ‖v‖_{B^s} + ‖v‖_∞ ‖u‖_{B^s})
//! low       ‖uv‖_{B^{s−2}}   / (‖u‖_{B^{s−2}} ‖v‖_{B^{s−1}})
//! nonlocal  ‖P(u) − P(v)‖_{B^s} / (‖u − v‖_{B^s} (‖u‖_{B^s} + ‖v‖_{B^s})^Q)
//! power     ‖u^Q‖_{B^{s+1}}  / (‖u‖_{B^{s−1}}^{Q−1} ‖u‖_{B^{s+1}})
//! ```
//!
//! Each constant is the maximum ratio over the corpus, reported for the first
//! half and for the whole corpus.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::report::{Check, ExperimentReport, Table};
use crate::besov::{BesovParams, BlockNorms};
use crate::error::{Error, Result};
use crate::littlewood_paley::FilterBank;
use crate::solver::nonlocal_p_spectral;
use crate::spectral::{dealias_product_spectral, inverse_transform, transform, Field, Grid, SpectralField};

pub const STABILITY_FACTOR: f64 = 2.0;

/// Corpus band for degree `Q`: products up to `u^{Q+1}` stay inside the
/// bank's certified band.
pub fn corpus_band(bank: &FilterBank, q: u32) -> f64 {
    0.9 * bank.band_limit() / (q + 1) as f64
}

/// `count` random real fields with spectra inside `|ξ| ≤ band`.
///
/// Field `i` depends only on `(seed, i)`, so a corpus of 50 extends the
/// corpus of 25 with the same seed.
pub fn random_corpus(grid: &Arc<Grid>, count: usize, seed: u64, band: f64) -> Result<Vec<Field>> {
    if !(band > 0.0) {
        return Err(Error::config("corpus band must be positive"));
    }
    (0..count)
        .map(|i| random_field(grid, seed, i as u64, band))
        .collect()
}

pub fn random_field(grid: &Arc<Grid>, seed: u64, index: u64, band: f64) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = grid.points();
    let mut raw = vec![Complex64::new(0.0, 0.0); n];
    raw[0] = Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0);
    for idx in 1..n / 2 {
        let xi = grid.wavenumber(idx);
        if xi > band {
            break;
        }
        let weight = 1.0 / (1.0 + xi).powi(2);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let c = Complex64::new(re, im) * weight;
        raw[idx] = c;
        raw[n - idx] = c.conj();
    }
    let u = inverse_transform(&SpectralField::from_raw(grid, raw)?)?;
    let peak = u.max_abs();
    let scale: f64 = rng.random_range(0.5..2.0);
    Ok(if peak > 0.0 { u.scaled(scale / peak) } else { u })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct Constants {
    pub product: f64,
    pub low: f64,
    pub nonlocal: f64,
    pub power: f64,
}

impl Constants {
    fn merge(self, o: Constants) -> Constants {
        Constants {
            product: self.product.max(o.product),
            low: self.low.max(o.low),
            nonlocal: self.nonlocal.max(o.nonlocal),
            power: self.power.max(o.power),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.product, self.low, self.nonlocal, self.power]
    }

    pub fn all_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

struct Measured {
    spec: SpectralField,
    field: Field,
    blocks: BlockNorms,
    p_of: SpectralField,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Ratios for the pair `(u, v)`; also the power ratio of `u`.
fn pair_constants(
    u: &Measured,
    v: &Measured,
    params: &BesovParams,
    bank: &FilterBank,
    q: u32,
) -> Result<Constants> {
    let (s, r, p) = (params.s, params.r, params.p);
    let uv = BlockNorms::of_spectrum(&dealias_product_spectral(&[&u.field, &v.field])?, p, bank)?;
    let product = ratio(
        uv.besov(s, r),
        u.field.max_abs() * v.blocks.besov(s, r) + v.field.max_abs() * u.blocks.besov(s, r),
    );
    let low = ratio(uv.besov(s - 2.0, r), u.blocks.besov(s - 2.0, r) * v.blocks.besov(s - 1.0, r));

    let dp = BlockNorms::of_spectrum(&u.p_of.sub(&v.p_of)?, p, bank)?.besov(s, r);
    let duv = BlockNorms::of_spectrum(&u.spec.sub(&v.spec)?, p, bank)?.besov(s, r);
    let nonlocal = ratio(dp, duv * (u.blocks.besov(s, r) + v.blocks.besov(s, r)).powi(q as i32));

    let factors = vec![&u.field; q as usize];
    let uq = BlockNorms::of_spectrum(&dealias_product_spectral(&factors)?, p, bank)?;
    let power = ratio(
        uq.besov(s + 1.0, r),
        u.blocks.besov(s - 1.0, r).powi(q as i32 - 1) * u.blocks.besov(s + 1.0, r),
    );
    Ok(Constants {
        product,
        low,
        nonlocal,
        power,
    })
}

fn measure(u: &Field, params: &BesovParams, bank: &FilterBank, q: u32) -> Result<Measured> {
    let spec = transform(u)?;
    Ok(Measured {
        blocks: BlockNorms::of_spectrum(&spec, params.p, bank)?,
        p_of: nonlocal_p_spectral(&spec, q)?,
        field: u.clone(),
        spec,
    })
}

pub fn run_inequality_monitors(
    corpus: &[Field],
    params: &BesovParams,
    bank: &FilterBank,
    q: u32,
) -> Result<ExperimentReport> {
    if corpus.len() < 4 {
        return Err(Error::config("inequality monitors need at least 4 corpus fields"));
    }
    let measured: Vec<Measured> = corpus
        .par_iter()
        .map(|u| measure(u, params, bank, q))
        .collect::<Result<_>>()?;
    let per_pair: Vec<Constants> = (0..measured.len() - 1)
        .into_par_iter()
        .map(|i| pair_constants(&measured[i], &measured[i + 1], params, bank, q))
        .collect::<Result<_>>()?;

    let half = corpus.len() / 2;
    let first = per_pair[..half - 1]
        .iter()
        .fold(Constants::default(), |a, c| a.merge(*c));
    let full = per_pair.iter().fold(Constants::default(), |a, c| a.merge(*c));

    let mut report = ExperimentReport::new(
        "inequalities",
        json!({
            "besov": params,
            "Q": q,
            "corpus_size": corpus.len(),
            "L": bank.grid().half_length(),
            "N": bank.grid().points(),
        }),
    )?;
    report.measure("constants_half", first)?;
    report.measure("constants_full", full)?;

    let mut table = Table::new(
        "inequalities",
        "pair index i (fields i, i+1); measured ratios for product, low-regularity product, P difference, power estimates",
        &["pair", "product", "low", "nonlocal", "power"],
    );
    for (i, c) in per_pair.iter().enumerate() {
        let a = c.as_array();
        table.push_values(&[i as f64, a[0], a[1], a[2], a[3]]);
    }
    report.add_table(table)?;

    let names = ["product", "low", "nonlocal", "power"];
    for (k, name) in names.iter().enumerate() {
        let (a, b) = (first.as_array()[k], full.as_array()[k]);
        report.check(Check::new(
            &format!("{name}-finite"),
            &format!("{name} constant finite and positive"),
            Some(b),
            "finite, > 0",
            b.is_finite() && b > 0.0,
        ));
        let change = if a > 0.0 { (b / a).max(a / b) } else { f64::INFINITY };
        report.check(Check::new(
            &format!("{name}-stable"),
            &format!("{name} constant changes by less than 2x when the corpus doubles"),
            Some(change),
            "< 2",
            change < STABILITY_FACTOR,
        ));
    }

    // u = v: the difference estimate holds with both sides zero.
    let u = &measured[0];
    let self_diff = BlockNorms::of_spectrum(&u.p_of.sub(&u.p_of)?, params.p, bank)?.besov(params.s, params.r);
    report.check(Check::new(
        "nonlocal-identical-pair",
        "||P(u) - P(u)|| = 0",
        Some(self_diff),
        "== 0",
        self_diff == 0.0,
    ));
    // v = 0: reduces to a bound on ||P(u)||.
    let zero = measure(&Field::zeros(bank.grid()), params, bank, q)?;
    let c = pair_constants(u, &zero, params, bank, q)?;
    report.measure_f64("nonlocal_ratio_against_zero", c.nonlocal)?;
    Ok(report)
}
