//! Counter-based random streams.
//!
//! A scenario's master seed and id are hashed into a ChaCha8 key; each
//! iteration gets its own ChaCha stream number under that key. Streams for
//! different iterations are therefore disjoint by construction, and any one of
//! them can be produced without touching the others.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::statcore::kernels::normal_quantile;

const DOMAIN_TAG: &[u8] = b"truncsim/stream/v1";
const TWO_POW_NEG_53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Key material shared by every iteration of one scenario.
#[derive(Debug, Clone)]
pub struct StreamFamily {
    key: [u8; 32],
}

impl StreamFamily {
    pub fn new(master_seed: u64, scenario_id: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN_TAG);
        hasher.update(master_seed.to_le_bytes());
        hasher.update((scenario_id.len() as u64).to_le_bytes());
        hasher.update(scenario_id.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        Self { key }
    }

    pub fn stream(&self, iteration: u64) -> Stream {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(iteration);
        Stream { rng }
    }
}

/// A deterministic source of uniforms, normals and Bernoulli draws.
///
/// Every method consumes exactly one 64-bit word, so the number of words used
/// by a trial depends only on how many draws it makes.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Standard normal by inverse-CDF transform of a single uniform.
    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}
