use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fem::NodalField;

/// Adds i.i.d. `N(0, sigma^2)` noise to every value of every level.
///
/// Draws come from ChaCha8 seeded with `seed` (stream 0) and are consumed
/// level by level in node order, so the output is identical on every
/// platform.
pub fn add_noise(data: &[NodalField], sigma: f64, seed: u64) -> Result<Vec<NodalField>> {
    add_noise_stream(data, sigma, seed, 0)
}

/// [`add_noise`] on an explicit ChaCha stream, for independent runs sharing
/// one seed.
pub fn add_noise_stream(data: &[NodalField], sigma: f64, seed: u64, stream: u64) -> Result<Vec<NodalField>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise level {sigma} must be non-negative")));
    }
    if sigma == 0.0 {
        return Ok(data.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Ok(data
        .iter()
        .map(|f| {
            let mut g = f.clone();
            for v in g.values_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += sigma * z;
            }
            g
        })
        .collect())
}
