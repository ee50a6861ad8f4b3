//! Deterministic RNG derivation and worker fan-out.
//!
//! Every randomized operation derives an independent ChaCha12 generator from a
//! 64-bit master seed plus (stream, trial) counters, and per-coordinate draws
//! use the ChaCha stream id as the coordinate counter. Results are therefore
//! independent of worker count and of how many variates each coordinate
//! consumes.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream ids keep unrelated operations on disjoint parts of the key space.
pub mod stream {
    pub const CHANNEL: u64 = 1;
    pub const MUTUAL_INFO: u64 = 2;
    pub const CONCENTRATION: u64 = 3;
    pub const CODING: u64 = 4;
    pub const CONSTRAINT: u64 = 5;
    pub const PROBE: u64 = 6;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one (master seed, stream, trial) cell.
pub fn derive_rng(master: u64, stream_id: u64, trial: u64) -> ChaCha12Rng {
    let mut state = master ^ 0x6a09_e667_f3bc_c908;
    let mut seed = [0u8; 32];
    let a = splitmix64(&mut state);
    state ^= stream_id.wrapping_mul(0xb7e1_5162_8aed_2a6b);
    let b = splitmix64(&mut state);
    state ^= trial.wrapping_mul(0x2430_5d1a_8f61_0ebb);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    seed[0..8].copy_from_slice(&a.to_le_bytes());
    seed[8..16].copy_from_slice(&b.to_le_bytes());
    seed[16..24].copy_from_slice(&c.to_le_bytes());
    seed[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha12Rng::from_seed(seed)
}

/// Clone of `base` moved to the per-coordinate stream `coord`. Streams share
/// the key, so this is safe for exactly one level of fan-out; anything that
/// itself fans out by coordinate must fork with [`sub_rng`] first.
pub fn coord_rng(base: &ChaCha12Rng, coord: u64) -> ChaCha12Rng {
    let mut rng = base.clone();
    rng.set_stream(coord.wrapping_add(1));
    rng
}

/// Fresh-keyed generator forked from `base` under `tag`. Distinct tags give
/// independent keys, so the result can be fanned out again by coordinate.
pub fn sub_rng(base: &ChaCha12Rng, tag: u64) -> ChaCha12Rng {
    use rand_chacha::rand_core::RngCore;
    let mut forker = base.clone();
    forker.set_stream(tag ^ 0x8000_0000_0000_0000);
    let mut seed = [0u8; 32];
    forker.fill_bytes(&mut seed);
    ChaCha12Rng::from_seed(seed)
}

/// Worker cap: FREQCAP_THREADS if set, otherwise all available cores.
pub fn worker_count() -> usize {
    if let Ok(v) = std::env::var("FREQCAP_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

const CHUNK: u64 = 4096;

/// Runs `work` over trial indices `0..trials` in fixed-size chunks and merges
/// the per-chunk partials in chunk order. The chunk grid does not depend on
/// the worker count, so floating-point reductions are bitwise reproducible.
pub fn run_trials<P, F>(trials: u64, work: F) -> Vec<P>
where
    P: Send,
    F: Fn(std::ops::Range<u64>) -> P + Sync,
{
    let n_chunks = trials.div_ceil(CHUNK) as usize;
    if n_chunks == 0 {
        return Vec::new();
    }
    let workers = worker_count().min(n_chunks).max(1);
    if workers == 1 {
        return (0..n_chunks)
            .map(|c| {
                let lo = c as u64 * CHUNK;
                work(lo..trials.min(lo + CHUNK))
            })
            .collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<P>> = (0..n_chunks).map(|_| None).collect();
    let slots_ref = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let c = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if c >= n_chunks {
                    break;
                }
                let lo = c as u64 * CHUNK;
                let partial = work(lo..trials.min(lo + CHUNK));
                let mut guard = slots_ref.lock().unwrap();
                guard[c] = Some(partial);
            });
        }
    });
    slots.into_iter().map(|p| p.unwrap()).collect()
}
