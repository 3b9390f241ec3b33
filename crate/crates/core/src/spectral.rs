//! Periodic grid, discrete Fourier transforms, spectral calculus and
//! dealiased products.
//!
//! The line is replaced by the torus `[-L, L)` sampled at `N` points
//! `x_i = -L + i·dx`, `dx = 2L/N`. The frequency lattice is `ξ_k = kπ/L`,
//! `k = -N/2 .. N/2-1`.
//!
//! # Fourier convention
//!
//! ```text
//! û(ξ) = ∫ u(x) e^{-ixξ} dx          u(x) = (1/2π) ∫ û(ξ) e^{ixξ} dξ
//! ```
//!
//! discretized as `û_k = dx · Σ_i u_i e^{-iξ_k x_i}` and
//! `u_i = (1/2L) · Σ_k û_k e^{iξ_k x_i}`. With this normalization the discrete
//! Plancherel identity reads `Σ_i |u_i|² dx = (1/2L) Σ_k |û_k|²`, the exact
//! analogue of `‖u‖²_{L²} = (1/2π) ‖û‖²_{L²}`.
//!
//! Internally [`SpectralField`] keeps the unnormalized FFT output `c_k`
//! (FFT index order); `û_k = dx · (-1)^k · c_k` is applied only when the
//! convention-bearing coefficients are requested. Diagonal multipliers do not
//! care about the distinction.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numeric::{all_finite, is_power_of_two, max_abs, neumaier_sum};

pub const MIN_POINTS: usize = 16;

type PlanKey = (usize, bool);

/// Periodic spatial domain `[-L, L)` with `N` equispaced points.
pub struct Grid {
    half_length: f64,
    points: usize,
    plans: Mutex<(FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>)>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.half_length)
            .field("points", &self.points)
            .finish()
    }
}

impl Grid {
    /// Builds a grid; `N` must be a power of two no smaller than 16.
    pub fn new(half_length: f64, points: usize) -> Result<Arc<Self>> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::config(format!(
                "half-length L must be positive and finite, got {half_length}"
            )));
        }
        if !is_power_of_two(points) || points < MIN_POINTS {
            return Err(Error::config(format!(
                "point count N must be a power of two >= {MIN_POINTS}, got {points}"
            )));
        }
        Ok(Arc::new(Grid {
            half_length,
            points,
            plans: Mutex::new((FftPlanner::new(), HashMap::new())),
        }))
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    /// Lattice spacing `π/L`.
    pub fn dxi(&self) -> f64 {
        PI / self.half_length
    }

    /// Nyquist frequency `πN/(2L)`.
    pub fn k_max(&self) -> f64 {
        PI * self.points as f64 / (2.0 * self.half_length)
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Signed lattice index `k` of FFT slot `idx`; the Nyquist slot maps to `-N/2`.
    pub fn lattice_index(&self, idx: usize) -> i64 {
        let n = self.points;
        if idx < n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        self.lattice_index(idx) as f64 * self.dxi()
    }

    /// Frequencies `ξ_k` in FFT slot order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.wavenumber(i)).collect()
    }

    pub fn nyquist_slot(&self) -> usize {
        self.points / 2
    }

    /// Nearest lattice frequency to `xi`.
    pub fn snap(&self, xi: f64) -> f64 {
        (xi / self.dxi()).round() * self.dxi()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.points == other.points && self.half_length == other.half_length
    }

    pub(crate) fn plan(&self, len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        let mut guard = self.plans.lock().expect("fft plan cache poisoned");
        let (planner, cache) = &mut *guard;
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    }

    pub(crate) fn fft_in_place(&self, buf: &mut [Complex64], inverse: bool) {
        self.plan(buf.len(), inverse).process(buf);
    }
}

fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::config(format!(
            "grid mismatch: (L={}, N={}) vs (L={}, N={})",
            a.half_length, a.points, b.half_length, b.points
        )))
    }
}

/// Real samples `u(x_i)` on a grid.
#[derive(Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("max_abs", &max_abs(&self.values))
            .finish()
    }
}

impl Field {
    pub fn new(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::config(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.points()
            )));
        }
        if !all_finite(&values) {
            return Err(Error::numeric("field contains non-finite samples"));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Field {
            grid: grid.clone(),
            values: vec![0.0; grid.points()],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.points()).map(|i| f(grid.x(i))).collect();
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    fn zip_with(&self, other: &Field, op: impl Fn(f64, f64) -> f64) -> Result<Field> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| op(*a, *b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product without dealiasing.
    pub fn mul_pointwise(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Mean value `(1/2L) ∫ u`.
    pub fn mean(&self) -> f64 {
        neumaier_sum(self.values.iter().copied()) / self.values.len() as f64
    }
}

/// Discrete Fourier coefficients of a field (see the module docs for the
/// normalization).
#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    raw: Vec<Complex64>,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("l2", &self.l2_norm())
            .finish()
    }
}

impl SpectralField {
    /// Wraps unnormalized FFT-order coefficients `c_k` (so that
    /// `u_i = (1/N) Σ c_k e^{2πi k i/N}`).
    pub fn from_raw(grid: &Arc<Grid>, raw: Vec<Complex64>) -> Result<Self> {
        if raw.len() != grid.points() {
            return Err(Error::config(format!(
                "spectrum has {} coefficients, grid has {}",
                raw.len(),
                grid.points()
            )));
        }
        if raw.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::numeric("spectrum contains non-finite coefficients"));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            raw,
        })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralField {
            grid: grid.clone(),
            raw: vec![Complex64::new(0.0, 0.0); grid.points()],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn raw(&self) -> &[Complex64] {
        &self.raw
    }

    pub fn into_raw(self) -> Vec<Complex64> {
        self.raw
    }

    /// `û(ξ_k)` in the continuous-transform convention, for FFT slot `idx`.
    pub fn coefficient(&self, idx: usize) -> Complex64 {
        let k = self.grid.lattice_index(idx);
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        self.raw[idx] * (sign * self.grid.spacing())
    }

    /// `(ξ_k, û(ξ_k))` sorted by increasing `ξ`.
    pub fn coefficients(&self) -> Vec<(f64, Complex64)> {
        let n = self.grid.points();
        (0..n)
            .map(|j| (j + n / 2) % n)
            .map(|idx| (self.grid.wavenumber(idx), self.coefficient(idx)))
            .collect()
    }

    /// `L²` norm of the represented field via discrete Plancherel.
    pub fn l2_norm(&self) -> f64 {
        let n = self.grid.points() as f64;
        let sum = neumaier_sum(self.raw.iter().map(|c| c.norm_sqr()));
        (sum * self.grid.spacing() / n).sqrt()
    }

    /// `L²` norm restricted to `|ξ| > cutoff`.
    pub fn l2_norm_above(&self, cutoff: f64) -> f64 {
        let n = self.grid.points() as f64;
        let sum = neumaier_sum(
            self.raw
                .iter()
                .enumerate()
                .filter(|(idx, _)| self.grid.wavenumber(*idx).abs() > cutoff)
                .map(|(_, c)| c.norm_sqr()),
        );
        (sum * self.grid.spacing() / n).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.raw[0].re / self.grid.points() as f64
    }

    fn zip_with(
        &self,
        other: &SpectralField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SpectralField> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(SpectralField {
            grid: self.grid.clone(),
            raw: self
                .raw
                .iter()
                .zip(&other.raw)
                .map(|(a, b)| op(*a, *b))
                .collect(),
        })
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            raw: self.raw.iter().map(|v| v * c).collect(),
        }
    }

    /// Applies a real multiplier sampled in FFT slot order.
    pub fn masked(&self, multiplier: &[f64]) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            raw: self
                .raw
                .iter()
                .zip(multiplier)
                .map(|(c, m)| c * *m)
                .collect(),
        }
    }

    /// Largest deviation from Hermitian symmetry `c_{-k} = conj(c_k)`,
    /// relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.points();
        let scale = self.raw.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (1..n)
            .map(|idx| (self.raw[idx] - self.raw[n - idx].conj()).norm())
            .fold(self.raw[0].im.abs(), f64::max);
        worst / scale
    }
}

/// Forward DFT of raw samples (unnormalized, FFT slot order).
pub fn forward_raw(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    grid.fft_in_place(&mut buf, false);
    buf
}

/// Inverse of [`forward_raw`]; the imaginary part (round-off for Hermitian
/// input) is discarded.
pub fn inverse_raw(grid: &Grid, raw: &[Complex64]) -> Vec<f64> {
    let mut buf = raw.to_vec();
    grid.fft_in_place(&mut buf, true);
    let scale = 1.0 / buf.len() as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

pub fn transform(u: &Field) -> Result<SpectralField> {
    if !all_finite(&u.values) {
        return Err(Error::numeric("transform input contains non-finite samples"));
    }
    Ok(SpectralField {
        grid: u.grid.clone(),
        raw: forward_raw(&u.grid, &u.values),
    })
}

pub fn inverse_transform(spec: &SpectralField) -> Result<Field> {
    let values = inverse_raw(&spec.grid, &spec.raw);
    Field::new(&spec.grid, values)
}

/// Symbol `(iξ)^order` in FFT slot order; the Nyquist slot is zeroed for odd
/// orders so real fields stay real.
pub fn derivative_symbol(grid: &Grid, order: u32) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    (0..grid.points())
        .map(|idx| {
            if order % 2 == 1 && idx == grid.nyquist_slot() {
                Complex64::new(0.0, 0.0)
            } else {
                (i * grid.wavenumber(idx)).powu(order)
            }
        })
        .collect()
}

pub fn derivative_spectral(spec: &SpectralField, order: u32) -> SpectralField {
    let symbol = derivative_symbol(&spec.grid, order);
    SpectralField {
        grid: spec.grid.clone(),
        raw: spec.raw.iter().zip(&symbol).map(|(c, m)| c * m).collect(),
    }
}

pub fn derivative(u: &Field, order: u32) -> Result<Field> {
    if order == 0 {
        return Ok(u.clone());
    }
    inverse_transform(&derivative_spectral(&transform(u)?, order))
}

/// Samples a real symbol on the lattice (FFT slot order), rejecting
/// non-finite values.
pub fn sample_symbol(grid: &Grid, m: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let symbol: Vec<f64> = (0..grid.points()).map(|idx| m(grid.wavenumber(idx))).collect();
    if !all_finite(&symbol) {
        return Err(Error::numeric("multiplier is not finite on the lattice"));
    }
    Ok(symbol)
}

/// `𝓕⁻¹(m(ξ)·𝓕u)`.
pub fn apply_multiplier(u: &Field, m: impl Fn(f64) -> f64) -> Result<Field> {
    let symbol = sample_symbol(&u.grid, m)?;
    inverse_transform(&transform(u)?.masked(&symbol))
}

/// Symbol of `(1 - ∂x²)⁻¹`.
pub fn helmholtz_inverse(xi: f64) -> f64 {
    1.0 / (1.0 + xi * xi)
}

/// Rectangle-rule `L^p` norm; `p = f64::INFINITY` gives the sampled maximum.
pub fn lp_norm(u: &Field, p: f64) -> Result<f64> {
    lp_norm_values(&u.values, u.grid.spacing(), p)
}

pub(crate) fn lp_norm_values(values: &[f64], dx: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::config(format!("L^p exponent must satisfy p >= 1, got {p}")));
    }
    let peak = max_abs(values);
    if p.is_infinite() || peak == 0.0 {
        return Ok(peak);
    }
    let sum = if p == 1.0 {
        neumaier_sum(values.iter().map(|v| v.abs() / peak))
    } else if p == 2.0 {
        neumaier_sum(values.iter().map(|v| (v / peak) * (v / peak)))
    } else {
        neumaier_sum(values.iter().map(|v| (v.abs() / peak).powf(p)))
    };
    Ok(peak * (sum * dx).powf(1.0 / p))
}

/// Size of the zero-padded grid on which a degree-`degree` product of fields
/// band-limited to `|k| < N/2` is alias-free after truncation back to `N`.
pub fn padded_size(points: usize, degree: usize) -> usize {
    if degree <= 1 {
        return points;
    }
    let needed = ((degree + 1) * points).div_ceil(2);
    needed.next_power_of_two()
}

/// Embeds `N` raw coefficients into an `M`-slot spectrum, scaled so that the
/// inverse FFT on `M` points divided by `M` samples the same function. The
/// Nyquist slot is dropped.
pub(crate) fn pad_raw(grid: &Grid, raw: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = grid.points();
    let scale = m as f64 / n as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (idx, c) in raw.iter().enumerate() {
        if idx == grid.nyquist_slot() {
            continue;
        }
        let k = grid.lattice_index(idx);
        let dest = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
        out[dest] = c * scale;
    }
    out
}

/// Inverse of [`pad_raw`]: keeps `|k| < N/2`, zeroes the Nyquist slot.
pub(crate) fn truncate_raw(grid: &Grid, padded: &[Complex64]) -> Vec<Complex64> {
    let n = grid.points();
    let m = padded.len();
    let scale = n as f64 / m as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (idx, slot) in out.iter_mut().enumerate() {
        if idx == grid.nyquist_slot() {
            continue;
        }
        let k = grid.lattice_index(idx);
        let src = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
        *slot = padded[src] * scale;
    }
    out
}

/// Samples of the band-limited interpolant of `raw` on an `m`-point grid.
pub(crate) fn padded_values(grid: &Grid, raw: &[Complex64], m: usize) -> Vec<f64> {
    let mut buf = pad_raw(grid, raw, m);
    grid.fft_in_place(&mut buf, true);
    let scale = 1.0 / m as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Forward transform of `m` samples, truncated back to the base grid.
pub(crate) fn truncated_spectrum(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    grid.fft_in_place(&mut buf, false);
    truncate_raw(grid, &buf)
}

/// Product of the factors computed on a zero-padded grid and truncated back;
/// exact (alias-free) for the total degree `factors.len()`.
pub fn dealias_product(factors: &[&Field]) -> Result<Field> {
    let spec = dealias_product_spectral(factors)?;
    inverse_transform(&spec)
}

pub fn dealias_product_spectral(factors: &[&Field]) -> Result<SpectralField> {
    let first = factors
        .first()
        .ok_or_else(|| Error::config("dealias_product needs at least one factor"))?;
    let grid = first.grid.clone();
    for f in factors {
        check_same_grid(&grid, &f.grid)?;
    }
    if factors.len() == 1 {
        return transform(first);
    }
    let m = padded_size(grid.points(), factors.len());
    let mut product = vec![1.0; m];
    for f in factors {
        let raw = transform(f)?.raw;
        let values = padded_values(&grid, &raw, m);
        for (acc, v) in product.iter_mut().zip(values) {
            *acc *= v;
        }
    }
    SpectralField::from_raw(&grid, truncated_spectrum(&grid, &product))
}

/// Naive grid product (aliased); kept for comparison against
/// [`dealias_product`].
pub fn aliased_product(factors: &[&Field]) -> Result<Field> {
    let first = factors
        .first()
        .ok_or_else(|| Error::config("product needs at least one factor"))?;
    let mut acc = (*first).clone();
    for f in &factors[1..] {
        acc = acc.mul_pointwise(f)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(l: f64, n: usize) -> Arc<Grid> {
        Grid::new(l, n).unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = grid(PI, 16);
        assert!((g.spacing() - PI / 8.0).abs() < 1e-15);
        let lattice: Vec<i64> = (0..16).map(|i| g.lattice_index(i)).collect();
        assert_eq!(lattice.iter().min(), Some(&-8));
        assert_eq!(lattice.iter().max(), Some(&7));
        assert!((g.dxi() - 1.0).abs() < 1e-15);

        let g = grid(64.0, 65536);
        assert!((g.k_max() - PI * 65536.0 / 128.0).abs() < 1e-9);
        assert!((g.k_max() - 1608.495).abs() < 1e-3);

        assert!(matches!(Grid::new(64.0, 1000), Err(Error::Config(_))));
        assert!(matches!(Grid::new(-1.0, 64), Err(Error::Config(_))));
        assert!(matches!(Grid::new(1.0, 8), Err(Error::Config(_))));
    }

    #[test]
    fn spacing_times_points_is_domain_length() {
        for (l, n) in [(PI, 16), (64.0, 1024), (1024.0, 1 << 20)] {
            let g = grid(l, n);
            assert_eq!(g.spacing() * n as f64, 2.0 * l);
        }
    }

    #[test]
    fn pure_mode_has_two_coefficients() {
        let g = grid(PI, 64);
        let u = Field::from_fn(&g, |x| (3.0 * x).sin()).unwrap();
        let spec = transform(&u).unwrap();
        let peak = spec.raw().iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        let active: Vec<f64> = (0..64)
            .filter(|&i| spec.raw()[i].norm() > 1e-12 * peak)
            .map(|i| g.wavenumber(i))
            .collect();
        assert_eq!(active, vec![3.0, -3.0]);
        // û(3) = ∫ sin(3x) e^{-3ix} dx = -iπ
        let idx3 = 3;
        let c = spec.coefficient(idx3);
        assert!((c - Complex64::new(0.0, -PI)).norm() < 1e-12);
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let g = grid(PI, 32);
        let spec = transform(&Field::zeros(&g)).unwrap();
        assert!(spec.raw().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn nan_is_rejected() {
        let g = grid(PI, 16);
        assert!(matches!(
            Field::new(&g, vec![f64::NAN; 16]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn derivative_of_mode_and_constant() {
        let g = grid(PI, 64);
        for k in [1.0, 5.0, 17.0] {
            let u = Field::from_fn(&g, |x| (k * x).sin()).unwrap();
            let du = derivative(&u, 1).unwrap();
            for (i, v) in du.values().iter().enumerate() {
                assert!((v - k * (k * g.x(i)).cos()).abs() < 1e-10);
            }
        }
        let c = Field::from_fn(&g, |_| 2.5).unwrap();
        for order in 1..4 {
            assert!(derivative(&c, order).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn odd_derivative_drops_nyquist() {
        let g = grid(PI, 16);
        // cos(8x) lives entirely in the Nyquist slot.
        let u = Field::from_fn(&g, |x| (8.0 * x).cos()).unwrap();
        assert!(derivative(&u, 1).unwrap().max_abs() < 1e-13);
        let second = derivative(&u, 2).unwrap();
        assert!((second.values()[0] + 64.0 * (8.0 * g.x(0)).cos()).abs() < 1e-9);
    }

    #[test]
    fn helmholtz_inverse_on_mode_and_inverse_pair() {
        let g = grid(PI, 64);
        let k = 4.0;
        let u = Field::from_fn(&g, |x| (k * x).sin()).unwrap();
        let w = apply_multiplier(&u, helmholtz_inverse).unwrap();
        for (i, v) in w.values().iter().enumerate() {
            assert!((v - (k * g.x(i)).sin() / (1.0 + k * k)).abs() < 1e-14);
        }
        let back = w.sub(&derivative(&w, 2).unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_must_be_finite() {
        let g = grid(PI, 16);
        let u = Field::zeros(&g);
        assert!(apply_multiplier(&u, |xi| 1.0 / xi).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        let l = PI;
        let g = grid(l, 64);
        let u = Field::from_fn(&g, |x| (3.0 * x).sin()).unwrap();
        assert!((lp_norm(&u, 2.0).unwrap() - l.sqrt()).abs() < 1e-13);
        let c = Field::from_fn(&g, |_| -1.5).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let expect = 1.5 * (2.0 * l).powf(1.0 / p);
            assert!((lp_norm(&c, p).unwrap() - expect).abs() < 1e-13);
        }
        assert_eq!(lp_norm(&c, f64::INFINITY).unwrap(), 1.5);
        assert!(matches!(lp_norm(&c, 0.5), Err(Error::Config(_))));
    }

    #[test]
    fn padded_sizes() {
        assert_eq!(padded_size(64, 1), 64);
        assert_eq!(padded_size(64, 2), 128);
        assert_eq!(padded_size(64, 3), 128);
        assert_eq!(padded_size(64, 4), 256);
    }

    #[test]
    fn dealiased_square_of_resolved_mode() {
        let g = grid(PI, 32);
        let k = 5.0;
        let u = Field::from_fn(&g, |x| (k * x).sin()).unwrap();
        let sq = dealias_product(&[&u, &u]).unwrap();
        for (i, v) in sq.values().iter().enumerate() {
            let expect = 0.5 * (1.0 - (2.0 * k * g.x(i)).cos());
            assert!((v - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn dealiased_square_near_nyquist_has_no_spurious_low_modes() {
        let g = grid(PI, 32);
        let k = 15.0;
        let u = Field::from_fn(&g, |x| (k * x).sin()).unwrap();
        // Exact square is 1/2 - cos(30x)/2; the cos(30x) part is beyond the
        // grid, so the correctly truncated product is the constant 1/2.
        let padded = dealias_product(&[&u, &u]).unwrap();
        for v in padded.values() {
            assert!((v - 0.5).abs() < 1e-13);
        }
        // The naive product folds cos(30x) onto cos(2x).
        let naive = transform(&aliased_product(&[&u, &u]).unwrap()).unwrap();
        let low = naive.raw()[2].norm() / 32.0;
        assert!(low > 0.2, "expected aliased energy at k=2, got {low}");
    }

    #[test]
    fn single_factor_is_identity() {
        let g = grid(PI, 32);
        let u = Field::from_fn(&g, |x| (x.sin() * 2.0).exp()).unwrap();
        let p = dealias_product(&[&u]).unwrap();
        for (a, b) in p.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
