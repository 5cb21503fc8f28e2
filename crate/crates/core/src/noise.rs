//! Gaussian and symmetric α-stable power noise.
//!
//! Scale convention: the standard stable variate has characteristic function
//! `exp(-|k|^α)`, and node `i` multiplies it by `σ_{S,i}`. At α = 2 this is a
//! Gaussian with standard deviation `√2·σ_{S,i}`, so `σ_S = 1/100` corresponds
//! to a Gaussian amplitude `σ = √2/100`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

// unused when another crate in the graph links std
#[allow(unused_imports)]
use num_traits::Float;
use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::Fnv64;

/// Per-(run, node) random stream.
pub type NodeRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum NoiseError {
    #[error("stability parameter must lie in (0, 2], got {0}")]
    AlphaOutOfRange(f64),
    #[error("noise scale at node {node} must be finite and non-negative, got {value}")]
    BadScale { node: usize, value: f64 },
    #[error("noise spec has {got} scales for a grid of {expected} nodes")]
    ScaleCount { expected: usize, got: usize },
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NoiseFamily {
    Gaussian,
    Stable,
}

/// Noise law shared by all nodes, with per-node scales.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Stability parameter; ignored (treated as 2) for the Gaussian family.
    pub alpha: f64,
    /// Per-node scale `σ_{S,i}` in s⁻².
    pub scale: Vec<f64>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(scale: Vec<f64>, seed: u64) -> Self {
        Self {
            family: NoiseFamily::Gaussian,
            alpha: 2.0,
            scale,
            seed,
        }
    }

    pub fn stable(alpha: f64, scale: Vec<f64>, seed: u64) -> Self {
        Self {
            family: NoiseFamily::Stable,
            alpha,
            scale,
            seed,
        }
    }

    /// Same scale at each of `n` nodes.
    pub fn uniform(family: NoiseFamily, alpha: f64, scale: f64, n: usize, seed: u64) -> Self {
        Self {
            family,
            alpha: if family == NoiseFamily::Gaussian { 2.0 } else { alpha },
            scale: vec![scale; n],
            seed,
        }
    }

    /// Effective stability parameter (2 for the Gaussian family).
    pub fn effective_alpha(&self) -> f64 {
        match self.family {
            NoiseFamily::Gaussian => 2.0,
            NoiseFamily::Stable => self.alpha,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        self.effective_alpha() == 2.0
    }

    pub fn check(&self, n: usize) -> Result<(), NoiseError> {
        check_alpha(self.effective_alpha())?;
        if self.scale.len() != n {
            return Err(NoiseError::ScaleCount {
                expected: n,
                got: self.scale.len(),
            });
        }
        for (i, &s) in self.scale.iter().enumerate() {
            if !(s >= 0.0) || !s.is_finite() {
                return Err(NoiseError::BadScale {
                    node: i + 1,
                    value: s,
                });
            }
        }
        Ok(())
    }

    pub fn digest(&self) -> u64 {
        let mut h = Fnv64::default();
        h.write(match self.family {
            NoiseFamily::Gaussian => b"gaussian",
            NoiseFamily::Stable => b"stable",
        });
        h.write_f64s(&[self.alpha]);
        h.write_f64s(&self.scale);
        h.write_u64(self.seed);
        h.finish()
    }
}

fn check_alpha(alpha: f64) -> Result<(), NoiseError> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(NoiseError::AlphaOutOfRange(alpha))
    }
}

/// Deterministic stream for `(seed, run, node)`.
///
/// The triple is written verbatim into the ChaCha key, so distinct triples
/// always give distinct keys.
pub fn derive_rng(seed: u64, run: u64, node: u64) -> NodeRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&run.to_le_bytes());
    key[16..24].copy_from_slice(&node.to_le_bytes());
    key[24..].copy_from_slice(b"gridnois");
    ChaCha8Rng::from_seed(key)
}

/// Chambers–Mallows–Stuck transform for the symmetric case.
///
/// `v` is uniform on (-π/2, π/2) and `w` is standard exponential. Valid for the
/// whole range (0, 2]; at α = 2 it reduces to `2·sin(v)·√w`, a Gaussian of variance 2.
pub fn cms_symmetric(alpha: f64, v: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        return v.tan();
    }
    let a = alpha * v;
    a.sin() / v.cos().powf(1.0 / alpha) * ((v - a).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Standard symmetric α-stable law with characteristic function `exp(-|k|^α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardStable {
    alpha: f64,
}

impl StandardStable {
    pub fn new(alpha: f64) -> Result<Self, NoiseError> {
        check_alpha(alpha)?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Distribution<f64> for StandardStable {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.alpha == 2.0 {
            // CMS degenerates numerically near α = 2; use the normal sampler.
            let z: f64 = rng.sample(StandardNormal);
            return SQRT_2 * z;
        }
        let u: f64 = rng.sample(Open01);
        let e: f64 = rng.sample(Open01);
        let v = PI * (u - 0.5);
        let w = -e.ln();
        cms_symmetric(self.alpha, v, w)
    }
}

/// One draw from the standard symmetric α-stable law.
pub fn sample_standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64, NoiseError> {
    Ok(StandardStable::new(alpha)?.sample(rng))
}

/// The increment of node `node`'s noise over a step `dt`:
/// `σ_{S,i}·dt^{1/α}·S_α`. For the Gaussian family this is `√2·σ_{S,i}·√dt·N(0,1)`.
pub fn noise_increment<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    node: usize,
    dt: f64,
    rng: &mut R,
) -> Result<f64, NoiseError> {
    if !(dt > 0.0) {
        return Err(NoiseError::BadStep(dt));
    }
    let sampler = IncrementSampler::new(spec, dt)?;
    Ok(sampler.sample(node, rng))
}

/// Precomputed per-node increment prefactors for a fixed step size.
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    law: StandardStable,
    gaussian: bool,
    prefactor: Vec<f64>,
}

impl IncrementSampler {
    pub fn new(spec: &NoiseSpec, dt: f64) -> Result<Self, NoiseError> {
        if !(dt > 0.0) {
            return Err(NoiseError::BadStep(dt));
        }
        let alpha = spec.effective_alpha();
        let law = StandardStable::new(alpha)?;
        let step = dt.powf(1.0 / alpha);
        Ok(Self {
            law,
            gaussian: spec.family == NoiseFamily::Gaussian,
            prefactor: spec.scale.iter().map(|s| s * step).collect(),
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, node: usize, rng: &mut R) -> f64 {
        let p = self.prefactor[node];
        if p == 0.0 {
            return 0.0;
        }
        if self.gaussian {
            let z: f64 = rng.sample(StandardNormal);
            p * SQRT_2 * z
        } else {
            p * self.law.sample(rng)
        }
    }
}
