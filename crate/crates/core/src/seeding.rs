//! Counter-based seeding: every trial gets its own ChaCha stream derived from
//! `(seed, point, trial)`, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(seed: u64, point: u64) -> [u8; 32] {
    let mut state = mix64(seed) ^ mix64(point.wrapping_add(0x5851_f42d_4c95_7f2d));
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        state = mix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    out
}

/// Generator for trial `trial` of sweep point `point` under master `seed`.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, point));
    rng.set_stream(trial);
    rng
}
