//! Network Geometry with Flavor in dimension 2.
//!
//! Growth starts from a single filled triangle. Each step picks a link `ℓ`
//! with probability proportional to `(1 + s n_ℓ) e^{-β ε_ℓ}`, where `n_ℓ` is
//! the number of triangles glued to `ℓ` after the first one, and glues a new
//! triangle on it through a fresh node. Link energies `ε_ℓ` are uniform on
//! `[0, 1]` and are drawn once when the link is created.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{Link, SimplicialComplex, Triangle};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgfParams {
    pub target_nodes: usize,
    /// `s ∈ {-1, 0, 1}`.
    pub flavor: i32,
    /// Inverse temperature `β ≥ 0`.
    pub beta: f64,
    pub seed: u64,
}

impl NgfParams {
    pub fn new(target_nodes: usize, flavor: i32, beta: f64, seed: u64) -> Self {
        NgfParams {
            target_nodes,
            flavor,
            beta,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1..=1).contains(&self.flavor) {
            return Err(Error::InvalidFlavor(self.flavor));
        }
        if self.target_nodes < 3 {
            return Err(Error::InvalidConfig(format!(
                "target_nodes must be >= 3, got {}",
                self.target_nodes
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Grows an NGF complex with `target_nodes` nodes. The same parameters always
/// give the same complex.
pub fn ngf_generate(params: &NgfParams) -> Result<SimplicialComplex> {
    params.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let s = params.flavor as f64;

    let mut links: Vec<Link> = vec![[0, 1], [0, 2], [1, 2]];
    let mut triangles: Vec<Triangle> = vec![[0, 1, 2]];
    let mut attachments = vec![0u32; 3];
    let mut energy: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();

    for k in 3..params.target_nodes {
        let weights = attachments
            .iter()
            .zip(&energy)
            .map(|(&n, &e)| ((1.0 + s * n as f64) * (-params.beta * e).exp()).max(0.0));
        let pick = WeightedIndex::new(weights)
            .map_err(|e| Error::InvalidConfig(format!("no link can accept a triangle: {e}")))?;
        let l = pick.sample(&mut rng);
        let [i, j] = links[l];
        attachments[l] += 1;
        links.push([i, k]);
        links.push([j, k]);
        attachments.extend([0, 0]);
        energy.push(rng.random());
        energy.push(rng.random());
        triangles.push([i, j, k]);
    }
    SimplicialComplex::new(params.target_nodes, &links, &triangles)
}
