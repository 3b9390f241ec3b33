//! Besov norms `B^s_{p,r}`, the Lipschitz norm and `E(u₀)`.
//!
//! ```text
//! ‖u‖_{B^s_{p,r}} = ‖ (2^{js} ‖Δ_j u‖_{L^p})_{j = −1..j_max} ‖_{ℓ^r}
//! ```
//!
//! The block range is truncated at the filter bank's `j_max`; every norm
//! computation first certifies that the field carries no spectral mass above
//! the bank's band limit.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::littlewood_paley::FilterBank;
use crate::numeric::neumaier_sum;
use crate::spectral::{
    derivative_spectral, inverse_transform, lp_norm_values, transform, Field, SpectralField,
};

/// Lebesgue or sequence-space exponent in `[1, ∞]`.
///
/// Serializes as a JSON number, or the string `"inf"` for `∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 1.0 {
            return Err(Error::config(format!(
                "exponent must lie in [1, inf], got {value}"
            )));
        }
        Ok(Exponent(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INFINITY),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::config(format!("cannot parse exponent {s:?}")))?;
                Exponent::new(v)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Exponent::new(v),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// The triple `(s, p, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::config(format!("regularity s must be finite, got {s}")));
        }
        Ok(BesovParams {
            s,
            p: Exponent::new(p)?,
            r: Exponent::new(r)?,
        })
    }

    /// The borderline space `B^{3/2}_{2,1}`.
    pub fn is_critical(&self) -> bool {
        self.s == 1.5 && self.p.value() == 2.0 && self.r.value() == 1.0
    }

    pub fn with_s(self, s: f64) -> Self {
        BesovParams { s, ..self }
    }

    pub fn with_r(self, r: Exponent) -> Self {
        BesovParams { r, ..self }
    }
}

impl fmt::Display for BesovParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B^{}_{{{},{}}}", self.s, self.p, self.r)
    }
}

/// `ℓ^r` norm of a nonnegative finite sequence.
pub fn sequence_norm(values: &[f64], r: Exponent) -> f64 {
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if r.is_infinite() || peak == 0.0 {
        return peak;
    }
    let r = r.value();
    let sum = if r == 1.0 {
        neumaier_sum(values.iter().map(|v| v.abs() / peak))
    } else {
        neumaier_sum(values.iter().map(|v| (v.abs() / peak).powf(r)))
    };
    peak * sum.powf(1.0 / r)
}

/// Unweighted block norms `‖Δ_j u‖_{L^p}` for `j = −1..j_max`.
///
/// Computing these once lets several `(s, r)` pairs share the transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockNorms {
    p: Exponent,
    norms: Vec<f64>,
}

impl BlockNorms {
    pub fn of_field(u: &Field, p: Exponent, bank: &FilterBank) -> Result<Self> {
        Self::of_spectrum(&transform(u)?, p, bank)
    }

    /// For `p = 2` the blocks are measured by discrete Plancherel, which is
    /// exactly the rectangle-rule `L²` norm of the block samples.
    pub fn of_spectrum(spec: &SpectralField, p: Exponent, bank: &FilterBank) -> Result<Self> {
        bank.certify(spec)?;
        Self::measure(spec, p, bank)
    }

    /// Like [`BlockNorms::of_spectrum`] for a difference of fields whose
    /// `L²` size is `scale`; see [`FilterBank::certify_difference`].
    pub fn of_difference(spec: &SpectralField, scale: f64, p: Exponent, bank: &FilterBank) -> Result<Self> {
        bank.certify_difference(spec, scale)?;
        Self::measure(spec, p, bank)
    }

    fn measure(spec: &SpectralField, p: Exponent, bank: &FilterBank) -> Result<Self> {
        let norms = if p.value() == 2.0 {
            bank.block_l2_norms(spec)?
        } else {
            let dx = spec.grid().spacing();
            bank.blocks()
                .map(|j| {
                    let block = inverse_transform(&bank.dyadic_block_spectral(spec, j)?)?;
                    lp_norm_values(block.values(), dx, p.value())
                })
                .collect::<Result<Vec<_>>>()?
        };
        if norms.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("non-finite block norm"));
        }
        Ok(BlockNorms { p, norms })
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    /// `(j, ‖Δ_j u‖_{L^p})` pairs.
    pub fn raw(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.norms.iter().enumerate().map(|(i, v)| (i as i32 - 1, *v))
    }

    pub fn profile(&self, s: f64) -> BlockProfile {
        BlockProfile {
            entries: self
                .raw()
                .map(|(j, v)| (j, (j as f64 * s).exp2() * v))
                .collect(),
        }
    }

    pub fn besov(&self, s: f64, r: Exponent) -> f64 {
        self.profile(s).norm(r)
    }
}

/// `(j, 2^{js}‖Δ_j u‖_{L^p})` for `j = −1..j_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockProfile {
    pub entries: Vec<(i32, f64)>,
}

impl BlockProfile {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, v)| *v).collect()
    }

    pub fn norm(&self, r: Exponent) -> f64 {
        sequence_norm(&self.values(), r)
    }

    /// Index of the block carrying the largest weighted value.
    pub fn dominant_block(&self) -> Option<i32> {
        self.entries
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| *j)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["j", "block_value"])?;
        for (j, v) in &self.entries {
            w.write_record([j.to_string(), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// `‖u‖_{B^s_{p,r}}` together with its block profile.
pub fn besov_norm(u: &Field, params: &BesovParams, bank: &FilterBank) -> Result<(f64, BlockProfile)> {
    besov_norm_spectral(&transform(u)?, params, bank)
}

pub fn besov_norm_spectral(
    spec: &SpectralField,
    params: &BesovParams,
    bank: &FilterBank,
) -> Result<(f64, BlockProfile)> {
    let blocks = BlockNorms::of_spectrum(spec, params.p, bank)?;
    let profile = blocks.profile(params.s);
    Ok((profile.norm(params.r), profile))
}

/// `‖u‖_{L^∞} + ‖∂ₓu‖_{L^∞}` on grid samples.
pub fn lipschitz_norm(u: &Field) -> Result<f64> {
    lipschitz_norm_spectral(&transform(u)?)
}

pub fn lipschitz_norm_spectral(spec: &SpectralField) -> Result<f64> {
    let u = inverse_transform(spec)?;
    let ux = inverse_transform(&derivative_spectral(spec, 1))?;
    Ok(u.max_abs() + ux.max_abs())
}

/// `E(u) = ‖u‖_{L^∞} + ‖u‖^{Q+1}_{C^{0,1}}`.
pub fn e_functional(u: &Field, q: u32) -> Result<f64> {
    if q < 1 {
        return Err(Error::config("nonlinearity degree Q must be >= 1"));
    }
    Ok(u.max_abs() + lipschitz_norm(u)?.powi(q as i32 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::INFINITY);
        assert_eq!("2".parse::<Exponent>().unwrap().value(), 2.0);
        assert!("0.5".parse::<Exponent>().is_err());
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(e.is_infinite());
        let e: Exponent = serde_json::from_str("1").unwrap();
        assert_eq!(e.value(), 1.0);
        assert!(serde_json::from_str::<Exponent>("0.5").is_err());
        assert_eq!(serde_json::to_string(&Exponent::INFINITY).unwrap(), "\"inf\"");
    }

    #[test]
    fn critical_flag() {
        assert!(BesovParams::new(1.5, 2.0, 1.0).unwrap().is_critical());
        assert!(!BesovParams::new(2.0, 2.0, 2.0).unwrap().is_critical());
    }

    #[test]
    fn sequence_norms() {
        let v = [3.0, 4.0];
        assert!((sequence_norm(&v, Exponent::new(2.0).unwrap()) - 5.0).abs() < 1e-15);
        assert_eq!(sequence_norm(&v, Exponent::new(1.0).unwrap()), 7.0);
        assert_eq!(sequence_norm(&v, Exponent::INFINITY), 4.0);
        assert_eq!(sequence_norm(&[0.0, 0.0], Exponent::new(1.0).unwrap()), 0.0);
    }

    #[test]
    fn lipschitz_and_e_examples() {
        let g = Grid::new(PI, 64).unwrap();
        let s = Field::from_fn(&g, f64::sin).unwrap();
        assert!((lipschitz_norm(&s).unwrap() - 2.0).abs() < 1e-12);
        assert!((e_functional(&s, 1).unwrap() - 5.0).abs() < 1e-11);
        let c = Field::from_fn(&g, |_| -0.7).unwrap();
        assert!((lipschitz_norm(&c).unwrap() - 0.7).abs() < 1e-14);
        assert_eq!(e_functional(&Field::zeros(&g), 3).unwrap(), 0.0);
        assert!(matches!(e_functional(&s, 0), Err(Error::Config(_))));
    }

    #[test]
    fn profile_csv() {
        let profile = BlockProfile {
            entries: vec![(-1, 0.5), (0, 1.0)],
        };
        let mut out = Vec::new();
        profile.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("j,block_value\n-1,5e-1\n"));
    }
}
