//! Stochastic swing-equation dynamics for power-grid frequency fluctuations.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical parts:
//!
//! - [`grid`]: network parameters, decentral control gains and the ten-node test scenarios.
//! - [`noise`]: Gaussian and symmetric α-stable power noise with per-(run, node) seeded streams.
//! - [`integrator`]: Euler–Maruyama integration of the swing equation with control.
//! - [`predictions`]: closed-form bulk-frequency widths and autocorrelation.
//! - [`estimators`]: autocorrelation, moments and stable-law fitting.
//! - [`cf`]: the characteristic-function transform pair between power noise and
//!   angular velocity, plus density reconstruction.
//!
//! IO, configuration files, ensembles and the command line live in the `gridfluct` crate.
#![no_std]

extern crate alloc;

pub mod cf;
pub mod estimators;
mod fft;
pub mod grid;
pub mod integrator;
mod linalg;
pub mod noise;
pub mod predictions;

pub use cf::{CharFn, Density, PowerExtraction};
pub use estimators::{AcfCurve, GammaFit, Moments, StableFit, StableMethod};
pub use grid::{ControlRule, GridSpec, ScenarioId, Violation};
pub use integrator::{SimConfig, State, Trajectory};
pub use noise::{NoiseFamily, NoiseSpec};
pub use predictions::{ScaleConvention, WidthKind, WidthPrediction};

/// 64-bit FNV-1a, used for provenance digests of parameter sets.
#[derive(Debug, Clone, Copy)]
pub struct Fnv64(u64);

impl Default for Fnv64 {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv64 {
    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn write_f64s(&mut self, xs: &[f64]) {
        for x in xs {
            self.write(&x.to_bits().to_le_bytes());
        }
    }

    pub fn write_u64(&mut self, x: u64) {
        self.write(&x.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}
