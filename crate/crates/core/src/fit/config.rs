use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{SemanticLossParams, SurfaceData, Term};

/// Step sizes for μ₀, μ₁, μ₂, μ₃, μ₄, μ₅ in that order.
pub const DEFAULT_LEARNING_RATES: [f64; 6] = [1e-3, 1e-3, 1e-3, 1e-4, 1e-4, 1e-11];
pub const DEFAULT_MAX_ITERATIONS: usize = 200_000;
pub const DEFAULT_REL_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_STARTS: usize = 8;
/// Safeguarded step sizes never shrink below this fraction of their start value.
pub const STEP_FLOOR_FRACTION: f64 = 1e-3;
/// Iterations between relative-SSE-change checks.
pub const TOLERANCE_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum InitPolicy {
    PaperScaleRandom,
    WarmStart(SemanticLossParams),
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub learning_rates: [f64; 6],
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub seed: u64,
    pub init_policy: InitPolicy,
    /// Reject SSE-increasing steps and halve the step sizes.
    pub safeguard: bool,
    pub starts: usize,
    /// Feed q/100 to the surface model instead of raw q.
    pub normalize_q: bool,
    /// Accumulate gradients across iterations instead of zeroing them.
    pub literal_accumulate: bool,
    /// Record every n-th iteration in the SSE trace.
    pub trace_stride: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            learning_rates: DEFAULT_LEARNING_RATES,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            rel_tolerance: DEFAULT_REL_TOLERANCE,
            seed: 0,
            init_policy: InitPolicy::PaperScaleRandom,
            safeguard: true,
            starts: DEFAULT_STARTS,
            normalize_q: false,
            literal_accumulate: false,
            trace_stride: 1000,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rates.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidArgument("learning rates must be finite and > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        if !(self.rel_tolerance >= 0.0) {
            return Err(Error::InvalidArgument("rel_tolerance must be >= 0".into()));
        }
        if self.starts == 0 {
            return Err(Error::InvalidArgument("starts must be >= 1".into()));
        }
        if self.trace_stride == 0 {
            return Err(Error::InvalidArgument("trace_stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn q_divisor(&self) -> f64 {
        if self.normalize_q {
            100.0
        } else {
            1.0
        }
    }

    /// Independent generator for one start; streams keep starts
    /// decorrelated under a single seed.
    pub fn start_rng(&self, start: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(start as u64);
        rng
    }
}

/// Random initial surface parameters scaled to the data:
/// μ₀ = mean, μ₁, μ₂ ~ U(−1, 1)·std, μ₃, μ₄ ~ U(−5, 5), μ₅ ~ U(−0.05, 0.005).
pub fn paper_scale_random<R: Rng>(data: &SurfaceData, n_terms: usize, rng: &mut R) -> SemanticLossParams {
    let mean = data.mean();
    let sd = data.std_dev();
    let terms = (0..n_terms)
        .map(|_| Term {
            mu1: rng.gen_range(-1.0..1.0) * sd,
            mu2: rng.gen_range(-1.0..1.0) * sd,
            mu3: rng.gen_range(-5.0..5.0),
            mu4: rng.gen_range(-5.0..5.0),
            mu5: rng.gen_range(-0.05..0.005),
        })
        .collect();
    SemanticLossParams { mu0: mean, terms }
}
