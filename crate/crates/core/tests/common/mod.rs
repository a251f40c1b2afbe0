#![allow(dead_code)]

use eprnet::{CMatrix6, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> CMatrix6 {
    CMatrix6::from_fn(|_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// QR of a complex Gaussian, with R's diagonal phases folded back into Q.
pub fn haar(rng: &mut ChaCha8Rng) -> CMatrix6 {
    let qr = gaussian(rng).qr();
    let (q, r) = (qr.q(), qr.r());
    q * CMatrix6::from_diagonal(&r.diagonal().map(|z| z / z.norm()))
}
