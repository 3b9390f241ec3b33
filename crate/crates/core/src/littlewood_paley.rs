//! Dyadic frequency cutoffs and the Littlewood–Paley blocks `Δ_j`, `S_j`.
//!
//! `χ` is a smooth radial cutoff equal to 1 on `|ξ| ≤ 3/4` and supported in
//! `|ξ| ≤ 4/3`; `φ(ξ) = χ(ξ/2) − χ(ξ)` is supported in the annulus
//! `3/4 ≤ |ξ| ≤ 8/3`. Because every block multiplier is a difference of two
//! dilates of `χ`, the partial sums telescope:
//!
//! ```text
//! χ(ξ) + Σ_{j=0}^{J} φ(2^{-j}ξ) = χ(2^{-J-1}ξ)
//! ```
//!
//! which is identically 1 on `|ξ| ≤ 2^J·3/2`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::neumaier_sum;
use crate::spectral::{inverse_transform, transform, Field, Grid, SpectralField};

pub const CHI_INNER: f64 = 3.0 / 4.0;
pub const CHI_OUTER: f64 = 4.0 / 3.0;
pub const ANNULUS_INNER: f64 = 3.0 / 4.0;
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;
pub const PLATEAU_INNER: f64 = 4.0 / 3.0;
pub const PLATEAU_OUTER: f64 = 3.0 / 2.0;

/// Relative `L²` spectral mass allowed above the band limit before a norm
/// computation is refused.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-10;

/// `e^{-1/t}` for `t > 0`, else 0.
fn bump_edge(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = bump_edge(t);
    let b = bump_edge(1.0 - t);
    a / (a + b)
}

/// Low-frequency cutoff `χ`.
pub fn chi(xi: f64) -> f64 {
    1.0 - smooth_step((xi.abs() - CHI_INNER) / (CHI_OUTER - CHI_INNER))
}

/// Annulus cutoff `φ(ξ) = χ(ξ/2) − χ(ξ)`.
pub fn phi(xi: f64) -> f64 {
    chi(0.5 * xi) - chi(xi)
}

/// Multiplier of `Δ_j`: `χ` for `j = −1`, `φ(2^{−j}·)` for `j ≥ 0`, zero below.
pub fn block_symbol(j: i32, xi: f64) -> f64 {
    match j {
        j if j < -1 => 0.0,
        -1 => chi(xi),
        j => {
            let scale = (-j as f64).exp2();
            chi(0.5 * scale * xi) - chi(scale * xi)
        }
    }
}

/// Multiplier of `S_j = Σ_{j' < j} Δ_{j'}`, which telescopes to `χ(2^{−j}·)`.
pub fn low_cutoff_symbol(j: i32, xi: f64) -> f64 {
    if j <= -1 {
        0.0
    } else {
        chi((-j as f64).exp2() * xi)
    }
}

/// Outcome of the sampled support checks on a filter bank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportReport {
    /// Largest `|χ|` seen outside `|ξ| ≤ 4/3`.
    pub chi_outside: f64,
    /// Largest `|χ − 1|` on `|ξ| ≤ 3/4`.
    pub chi_plateau: f64,
    /// Largest `|φ_j|` outside `2^j[3/4, 8/3]`, over all `j`.
    pub annulus_outside: f64,
    /// Largest `|φ_j − 1|` on `2^j[4/3, 3/2]`, over all `j`.
    pub annulus_plateau: f64,
    /// Largest `|χ·φ_j|` for `j ≥ 1`.
    pub chi_annulus_overlap: f64,
    /// Smallest and largest sampled multiplier value.
    pub range: (f64, f64),
}

impl SupportReport {
    pub fn max_violation(&self) -> f64 {
        [
            self.chi_outside,
            self.chi_plateau,
            self.annulus_outside,
            self.annulus_plateau,
            self.chi_annulus_overlap,
            (-self.range.0).max(0.0),
            (self.range.1 - 1.0).max(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Sampled dyadic cutoffs on a grid's frequency lattice.
#[derive(Debug, Clone)]
pub struct FilterBank {
    grid: Arc<Grid>,
    j_max: i32,
    /// `multipliers[j + 1]` is the sampled symbol of `Δ_j`, FFT slot order.
    multipliers: Vec<Vec<f64>>,
}

impl FilterBank {
    /// Samples `χ` and `φ(2^{−j}·)` for `j = 0..=j_max`, where `j_max` is the
    /// largest `j` whose annulus `2^j·[3/4, 8/3]` fits under the Nyquist
    /// frequency.
    pub fn new(grid: &Arc<Grid>) -> Result<Self> {
        let j_max = Self::j_max_for(grid.k_max());
        if j_max < 2 {
            return Err(Error::config(format!(
                "grid too coarse for a Littlewood-Paley decomposition: j_max = {j_max} < 2 (k_max = {:.4})",
                grid.k_max()
            )));
        }
        let xi = grid.wavenumbers();
        let multipliers = (-1..=j_max)
            .map(|j| xi.iter().map(|&x| block_symbol(j, x)).collect())
            .collect();
        Ok(FilterBank {
            grid: grid.clone(),
            j_max,
            multipliers,
        })
    }

    /// Largest `j` with `2^j·8/3 ≤ k_max` (may be negative for tiny grids).
    pub fn j_max_for(k_max: f64) -> i32 {
        let mut j = -1;
        while (j + 1) < 64 && ((j + 1) as f64).exp2() * ANNULUS_OUTER <= k_max {
            j += 1;
        }
        j
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Block indices `−1..=j_max`.
    pub fn blocks(&self) -> impl Iterator<Item = i32> {
        -1..=self.j_max
    }

    /// Frequency below which the truncated decomposition reconstructs exactly.
    pub fn band_limit(&self) -> f64 {
        (self.j_max as f64).exp2() * PLATEAU_OUTER
    }

    fn check_block(&self, j: i32) -> Result<()> {
        if j < -1 || j > self.j_max {
            return Err(Error::config(format!(
                "block index {j} outside -1..={}",
                self.j_max
            )));
        }
        Ok(())
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.grid.same_as(grid) {
            Ok(())
        } else {
            Err(Error::config("field and filter bank live on different grids"))
        }
    }

    /// Sampled multiplier of `Δ_j`, FFT slot order.
    pub fn multiplier(&self, j: i32) -> Result<&[f64]> {
        self.check_block(j)?;
        Ok(&self.multipliers[(j + 1) as usize])
    }

    pub fn dyadic_block_spectral(&self, spec: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(spec.grid())?;
        Ok(spec.masked(self.multiplier(j)?))
    }

    /// `Δ_j u`.
    pub fn dyadic_block(&self, u: &Field, j: i32) -> Result<Field> {
        self.check_grid(u.grid())?;
        inverse_transform(&self.dyadic_block_spectral(&transform(u)?, j)?)
    }

    pub fn low_cutoff_spectral(&self, spec: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(spec.grid())?;
        if j > self.j_max + 1 {
            return Err(Error::config(format!(
                "low cutoff index {j} exceeds j_max + 1 = {}",
                self.j_max + 1
            )));
        }
        let symbol: Vec<f64> = self
            .grid
            .wavenumbers()
            .iter()
            .map(|&x| low_cutoff_symbol(j, x))
            .collect();
        Ok(spec.masked(&symbol))
    }

    /// `S_j u = Σ_{j' ≤ j−1} Δ_{j'} u`, for `j ≤ j_max + 1`.
    pub fn low_cutoff(&self, u: &Field, j: i32) -> Result<Field> {
        self.check_grid(u.grid())?;
        inverse_transform(&self.low_cutoff_spectral(&transform(u)?, j)?)
    }

    /// Sum of the sampled block multipliers at FFT slot `idx`.
    fn partition_sum(&self, idx: usize) -> f64 {
        neumaier_sum(self.multipliers.iter().map(|m| m[idx]))
    }

    /// `max |χ + Σ_j φ(2^{−j}·) − 1|` over lattice points with `|ξ| ≤` band limit.
    pub fn partition_deviation(&self) -> f64 {
        let limit = self.band_limit();
        (0..self.grid.points())
            .filter(|&idx| self.grid.wavenumber(idx).abs() <= limit)
            .map(|idx| (self.partition_sum(idx) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Sampled checks of the support and plateau properties of every cutoff.
    pub fn support_report(&self) -> SupportReport {
        let xi = self.grid.wavenumbers();
        let mut r = SupportReport {
            chi_outside: 0.0,
            chi_plateau: 0.0,
            annulus_outside: 0.0,
            annulus_plateau: 0.0,
            chi_annulus_overlap: 0.0,
            range: (f64::INFINITY, f64::NEG_INFINITY),
        };
        let chi_m = &self.multipliers[0];
        for (idx, &x) in xi.iter().enumerate() {
            let a = x.abs();
            let c = chi_m[idx];
            if a > CHI_OUTER {
                r.chi_outside = r.chi_outside.max(c.abs());
            }
            if a <= CHI_INNER {
                r.chi_plateau = r.chi_plateau.max((c - 1.0).abs());
            }
            for j in 0..=self.j_max {
                let m = self.multipliers[(j + 1) as usize][idx];
                let scale = (j as f64).exp2();
                if a < scale * ANNULUS_INNER || a > scale * ANNULUS_OUTER {
                    r.annulus_outside = r.annulus_outside.max(m.abs());
                }
                if a >= scale * PLATEAU_INNER && a <= scale * PLATEAU_OUTER {
                    r.annulus_plateau = r.annulus_plateau.max((m - 1.0).abs());
                }
                if j >= 1 {
                    r.chi_annulus_overlap = r.chi_annulus_overlap.max((c * m).abs());
                }
            }
            for m in &self.multipliers {
                r.range.0 = r.range.0.min(m[idx]);
                r.range.1 = r.range.1.max(m[idx]);
            }
        }
        r
    }

    /// Relative `L²` mass of `spec` at `|ξ| >` band limit.
    pub fn tail_fraction(&self, spec: &SpectralField) -> f64 {
        let total = spec.l2_norm();
        if total == 0.0 {
            return 0.0;
        }
        spec.l2_norm_above(self.band_limit()) / total
    }

    /// Refuses fields whose spectrum extends past the band limit, since their
    /// truncated block sums would underestimate any Besov norm.
    pub fn certify(&self, spec: &SpectralField) -> Result<()> {
        self.check_grid(spec.grid())?;
        let tail = self.tail_fraction(spec);
        if tail > CERTIFICATE_TOLERANCE {
            return Err(Error::Truncation {
                tail,
                cutoff: self.band_limit(),
                tolerance: CERTIFICATE_TOLERANCE,
            });
        }
        Ok(())
    }

    /// Certificate for a difference of fields of size `scale` (an `L²` norm).
    /// Round-off in the operands leaves mass of order `ε·scale` above the
    /// band limit, which can dwarf a small difference; the tail is therefore
    /// measured against `max(scale, ‖spec‖)`.
    pub fn certify_difference(&self, spec: &SpectralField, scale: f64) -> Result<()> {
        self.check_grid(spec.grid())?;
        let reference = scale.max(spec.l2_norm());
        if reference == 0.0 {
            return Ok(());
        }
        let tail = spec.l2_norm_above(self.band_limit()) / reference;
        if tail > CERTIFICATE_TOLERANCE {
            return Err(Error::Truncation {
                tail,
                cutoff: self.band_limit(),
                tolerance: CERTIFICATE_TOLERANCE,
            });
        }
        Ok(())
    }

    /// `‖Δ_j u‖_{L²}` for every block, via discrete Plancherel.
    pub fn block_l2_norms(&self, spec: &SpectralField) -> Result<Vec<f64>> {
        self.check_grid(spec.grid())?;
        let n = self.grid.points() as f64;
        let dx = self.grid.spacing();
        let power: Vec<f64> = spec.raw().iter().map(Complex64::norm_sqr).collect();
        Ok(self
            .multipliers
            .iter()
            .map(|m| {
                let s = neumaier_sum(
                    m.iter()
                        .zip(&power)
                        .filter(|(w, _)| **w != 0.0)
                        .map(|(w, p)| w * w * p),
                );
                (s * dx / n).sqrt()
            })
            .collect())
    }

    /// Physical-space samples of every block `Δ_{−1} u, …, Δ_{j_max} u`.
    pub fn all_blocks(&self, spec: &SpectralField) -> Result<Vec<Field>> {
        self.blocks()
            .map(|j| inverse_transform(&self.dyadic_block_spectral(spec, j)?))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cutoff_examples() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(1.5), 0.0);
        assert_eq!(phi(1.45), 1.0);
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn smooth_step_is_monotone() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = smooth_step(i as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn j_max_arithmetic() {
        assert_eq!(FilterBank::j_max_for(PI * 65536.0 / 128.0), 9);
        assert_eq!(FilterBank::j_max_for(8.0 / 3.0), 0);
        assert_eq!(FilterBank::j_max_for(2.0), -1);
        let g = Grid::new(PI, 16).unwrap();
        assert!(matches!(FilterBank::new(&g), Err(Error::Config(_))));
    }

    #[test]
    fn coarse_bank_partition() {
        let g = Grid::new(16.0, 1024).unwrap();
        let fb = FilterBank::new(&g).unwrap();
        assert!(fb.partition_deviation() <= 1e-12);
        assert_eq!(fb.support_report().max_violation(), 0.0);
    }

    #[test]
    fn bad_block_index() {
        let g = Grid::new(16.0, 1024).unwrap();
        let fb = FilterBank::new(&g).unwrap();
        let u = Field::zeros(&g);
        assert!(fb.dyadic_block(&u, -2).is_err());
        assert!(fb.dyadic_block(&u, fb.j_max() + 1).is_err());
        assert!(fb.low_cutoff(&u, fb.j_max() + 2).is_err());
    }
}
