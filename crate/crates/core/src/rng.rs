use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which part of a round a random draw belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Search = 0,
    Purify = 1,
}

/// Counter-based measurement RNG.
///
/// Each `(master_seed, round, phase, trial)` selects its own ChaCha8 stream
/// position, so a trial's draw never depends on how many draws other trials
/// made or on which worker ran them.
pub fn trial_rng(master_seed: u64, round: usize, phase: Phase, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((round as u64) << 1) | phase as u64);
    // 64 words of headroom per trial
    rng.set_word_pos((trial as u128) << 6);
    rng
}
