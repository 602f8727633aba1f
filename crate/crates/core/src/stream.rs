//! Hierarchically addressed random streams.
//!
//! A stream is identified by a root seed and a path of indices, e.g.
//! `[level, sample, role]`. The address is hashed into a 256-bit ChaCha key,
//! so every address owns an independent counter-based generator and results
//! never depend on which worker thread happens to draw them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator handed out by [`RngStream::rng`].
pub type StreamRng = ChaCha8Rng;

/// Role indices used below a sample address.
pub mod role {
    pub const JUMPS: u64 = 0;
    pub const WIENER: u64 = 1;
    pub const CORRECTION: u64 = 2;
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
    path: Vec<u64>,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            path: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Child stream whose path is this path extended by `index`.
    pub fn split(&self, index: u64) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        Self {
            seed: self.seed,
            path,
        }
    }

    fn key(&self) -> [u8; 32] {
        // Length is mixed in so that [a] and [a, 0] never collide by prefix.
        let mut state = splitmix64(self.seed ^ 0x6c65_7679_5f6d_6c6d);
        state = splitmix64(state ^ (self.path.len() as u64));
        for &p in &self.path {
            state = splitmix64(state ^ splitmix64(p.wrapping_add(0x243f_6a88_85a3_08d3)));
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        key
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::from_seed(self.key())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_address_same_sequence() {
        let s = RngStream::new(42).split(3).split(7);
        let a: Vec<u64> = (0..16).map({
            let mut r = s.rng();
            move |_| r.next_u64()
        }).collect();
        let mut r = s.rng();
        let b: Vec<u64> = (0..16).map(|_| r.next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn split_is_deterministic() {
        let s = RngStream::new(1);
        assert_eq!(s.split(0), s.split(0));
        assert_eq!(s.split(0).rng().next_u64(), s.split(0).rng().next_u64());
    }

    #[test]
    fn siblings_differ() {
        let s = RngStream::new(1);
        assert_ne!(s.split(0).rng().next_u64(), s.split(1).rng().next_u64());
        // prefix paths are distinct addresses
        assert_ne!(s.split(0).rng().next_u64(), s.rng().next_u64());
        assert_ne!(
            s.split(5).rng().next_u64(),
            s.split(5).split(0).rng().next_u64()
        );
    }

    #[test]
    fn different_seeds_differ() {
        assert_ne!(
            RngStream::new(1).split(0).rng().next_u64(),
            RngStream::new(2).split(0).rng().next_u64()
        );
    }
}
