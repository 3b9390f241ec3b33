//! Numerical laboratory for the generalized Camassa–Holm equation
//!
//! ```text
//! u_t + u^Q u_x = -∂x (1 - ∂x²)^{-1} [ (Q²+3Q)/(2(Q+1)) u^{Q+1} + (Q/2) u^{Q-1} u_x² ]
//! ```
//!
//! on a periodic grid `[-L, L)`, together with the Littlewood–Paley machinery
//! needed to measure solutions in Besov spaces `B^s_{p,r}`.
//!
//! Module map:
//!
//! * [`spectral`]: grid, transforms, multipliers, quadrature, dealiased products
//! * [`littlewood_paley`]: dyadic cutoffs `χ`, `φ` and the blocks `Δ_j`, `S_j`
//! * [`besov`]: Besov, Lipschitz and `E(u₀)` functionals
//! * [`initdata`]: the envelope `φ` and the high/low frequency sequences
//! * [`solver`]: RK4 pseudo-spectral integrator and diagnostics
//! * [`experiments`]: small-time estimates, lower bounds, separation tables
//! * [`reference`]: quadrature evaluation of the envelope on the real line

pub mod besov;
pub mod error;
pub mod experiments;
pub mod initdata;
pub mod littlewood_paley;
pub mod numeric;
pub mod reference;
pub mod solver;
pub mod spectral;

pub use besov::{BesovParams, BlockNorms, BlockProfile, Exponent};
pub use error::{Error, Result};
pub use initdata::{CounterexampleData, InitDataParams};
pub use littlewood_paley::FilterBank;
pub use solver::{SolverConfig, Trajectory};
pub use spectral::{Field, Grid, SpectralField};
