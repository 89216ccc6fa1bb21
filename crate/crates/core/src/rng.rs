//! Counter-based random numbers.
//!
//! [`Philox4x32`] is the Philox4x32-10 bijection run in counter mode. The
//! 64-bit master seed is the key; the upper half of the 128-bit counter holds
//! a stream id and the lower half counts blocks. Every (master seed, stream)
//! pair is therefore an independent, reproducible substream, and experiment
//! replications can run in any order or on any number of threads.

use core::convert::Infallible;

use rand_core::TryRng;

const MUL0: u32 = 0xD251_1F53;
const MUL1: u32 = 0xCD9E_8D57;
const WEYL0: u32 = 0x9E37_79B9;
const WEYL1: u32 = 0xBB67_AE85;
const ROUNDS: usize = 10;

/// Bits reserved for the lane inside a stream id.
const LANE_BITS: u32 = 8;

/// Identifies one substream: a master seed plus a stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamSeed {
    pub master: u64,
    pub stream: u64,
}

impl StreamSeed {
    pub const fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    /// Substream for replication `replication`, lane 0.
    pub const fn replication(master: u64, replication: u64) -> Self {
        Self {
            master,
            stream: replication << LANE_BITS,
        }
    }

    /// Same replication, different purpose (counts, locations, index picks, ...).
    pub const fn lane(self, lane: u8) -> Self {
        let base = self.stream & !((1u64 << LANE_BITS) - 1);
        Self {
            master: self.master,
            stream: base | lane as u64,
        }
    }

    pub fn rng(self) -> Philox4x32 {
        Philox4x32::new(self)
    }
}

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// Applies Philox4x32-10 to one counter block.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut key = key;
    for round in 0..ROUNDS {
        if round > 0 {
            key[0] = key[0].wrapping_add(WEYL0);
            key[1] = key[1].wrapping_add(WEYL1);
        }
        let (hi0, lo0) = mulhilo(MUL0, ctr[0]);
        let (hi1, lo1) = mulhilo(MUL1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// Philox4x32-10 in counter mode.
#[derive(Clone, Debug)]
pub struct Philox4x32 {
    key: [u32; 2],
    stream: [u32; 2],
    block: u64,
    buf: [u32; 4],
    used: usize,
}

impl Philox4x32 {
    pub fn new(seed: StreamSeed) -> Self {
        Self {
            key: [seed.master as u32, (seed.master >> 32) as u32],
            stream: [seed.stream as u32, (seed.stream >> 32) as u32],
            block: 0,
            buf: [0; 4],
            used: 4,
        }
    }

    fn refill(&mut self) {
        let ctr = [
            self.block as u32,
            (self.block >> 32) as u32,
            self.stream[0],
            self.stream[1],
        ];
        self.buf = philox4x32_10(ctr, self.key);
        self.block = self.block.wrapping_add(1);
        self.used = 0;
    }

    #[inline]
    pub fn next_word(&mut self) -> u32 {
        if self.used == 4 {
            self.refill();
        }
        let w = self.buf[self.used];
        self.used += 1;
        w
    }

    #[inline]
    pub fn next_u64_word(&mut self) -> u64 {
        let lo = self.next_word() as u64;
        let hi = self.next_word() as u64;
        (hi << 32) | lo
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64_word() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (unbiased, by rejection).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let v = self.next_u64_word();
            if v <= zone {
                return v % bound;
            }
        }
    }
}

impl TryRng for Philox4x32 {
    type Error = Infallible;

    fn try_next_u32(&mut self) -> Result<u32, Infallible> {
        Ok(self.next_word())
    }

    fn try_next_u64(&mut self) -> Result<u64, Infallible> {
        Ok(self.next_u64_word())
    }

    fn try_fill_bytes(&mut self, dst: &mut [u8]) -> Result<(), Infallible> {
        for chunk in dst.chunks_mut(4) {
            let bytes = self.next_word().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
        Ok(())
    }
}
