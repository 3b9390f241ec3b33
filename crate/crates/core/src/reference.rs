//! Direct quadrature of the envelope on the real line, independent of any
//! grid or FFT:
//!
//! ```text
//! φ(x) = (1/π) ∫_0^{1/2} φ̂(ξ) cos(xξ) dξ
//!      = (1/π) [ sin(x/4)/x + ∫_{1/4}^{1/2} φ̂(ξ) cos(xξ) dξ ]
//! ```
//!
//! The transition integral uses composite Gauss–Legendre panels.

use std::f64::consts::PI;

use crate::initdata::envelope_symbol;
use crate::numeric::neumaier_sum;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(lo + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Quadrature { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        neumaier_sum(self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)))
    }
}

/// Evaluator for `φ` and `φ'` on the line.
#[derive(Debug, Clone)]
pub struct LineEnvelope {
    rule: Quadrature,
    symbol: Vec<f64>,
}

impl Default for LineEnvelope {
    fn default() -> Self {
        Self::new(64, 16)
    }
}

impl LineEnvelope {
    pub fn new(panels: usize, order: usize) -> Self {
        let rule = Quadrature::composite(0.25, 0.5, panels, order);
        let symbol = rule.nodes.iter().map(|&xi| envelope_symbol(xi)).collect();
        LineEnvelope { rule, symbol }
    }

    fn transition(&self, f: impl Fn(f64) -> f64) -> f64 {
        neumaier_sum(
            self.rule
                .nodes
                .iter()
                .zip(&self.rule.weights)
                .zip(&self.symbol)
                .map(|((xi, w), m)| w * m * f(*xi)),
        )
    }

    /// `φ(x)`.
    pub fn value(&self, x: f64) -> f64 {
        let plateau = if x.abs() < 1e-8 {
            0.25 - x * x / 384.0
        } else {
            (0.25 * x).sin() / x
        };
        (plateau + self.transition(|xi| (x * xi).cos())) / PI
    }

    /// `φ'(x) = −(1/π) ∫_0^{1/2} ξ φ̂(ξ) sin(xξ) dξ`.
    pub fn derivative(&self, x: f64) -> f64 {
        // ∫_0^{1/4} ξ sin(xξ) dξ = (sin(x/4) − (x/4)cos(x/4)) / x²
        let plateau = if x.abs() < 1e-4 {
            x / 192.0
        } else {
            let q = 0.25 * x;
            (q.sin() - q * q.cos()) / (x * x)
        };
        -(plateau + self.transition(|xi| xi * (x * xi).sin())) / PI
    }

    /// Trapezoid integral of `g(φ(x))` over `[−half_width, half_width]` with
    /// step `h`, exploiting evenness.
    pub fn integrate_even(&self, half_width: f64, h: f64, g: impl Fn(f64) -> f64) -> f64 {
        let steps = (half_width / h).round() as usize;
        let inner = neumaier_sum((1..steps).map(|i| g(self.value(i as f64 * h))));
        let ends = 0.5 * g(self.value(steps as f64 * h));
        h * (g(self.value(0.0)) + 2.0 * (inner + ends))
    }

    /// `‖φ^m‖_{L²(ℝ)}`. The integrand is band-limited to `|ξ| ≤ m`, so the
    /// trapezoid rule with `h < π/m` is exact up to truncation of the range.
    pub fn power_l2(&self, m: u32, half_width: f64) -> f64 {
        let h = 0.5 * PI / m as f64;
        self.integrate_even(half_width, h, |v| v.powi(2 * m as i32)).sqrt()
    }
}

/// `(12/17)^{Q−1} ‖φ^{Q+1}‖_{L²} / √2`, the limit of the lower-bound main term
/// measured in `B^s_{2,∞}`.
pub fn lower_bound_plateau(q: u32, envelope: &LineEnvelope) -> f64 {
    let amp = (12.0_f64 / 17.0).powi(q as i32 - 1);
    amp * envelope.power_l2(q + 1, 1024.0) / 2.0_f64.sqrt()
}
