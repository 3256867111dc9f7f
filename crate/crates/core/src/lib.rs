//! Secrecy performance of transmit-antenna-selection MIMO wiretap channels
//! with BPSK/QPSK inputs: mutual-information kernels, closed-form and
//! quadrature evaluators, and a seeded Monte-Carlo simulator.

pub mod channel;
pub mod cli;
pub mod closed_form;
pub mod dd;
pub mod error;
pub mod math_kernels;
pub mod monte_carlo;
pub mod quad;

pub use channel::{SnrPair, SystemConfig};
pub use error::{Error, Result};
pub use math_kernels::{MiModel, Modulation, PHI};
pub use monte_carlo::{Estimate, EstimatorConfig};
