//! Polar codes: encoding, successive-cancellation decoding and
//! genie-aided Monte Carlo construction.

mod construct;
mod sc;

pub use construct::{construct_monte_carlo, select_info_sets, ReliabilityProfile};
pub use sc::{CheckNodeRule, ScDecoder, ScOutput};

use crate::error::{domain, Result};

/// An `(n, k)` polar code given by its information set. Frozen bits are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarCode {
    n: usize,
    info_set: Vec<usize>,
    is_info: Vec<bool>,
}

impl PolarCode {
    /// `info_set` holds 0-based positions of `u`; order does not matter.
    pub fn new(n: usize, info_set: impl IntoIterator<Item = usize>) -> Result<Self> {
        if !n.is_power_of_two() {
            return domain(format!("block length {n} is not a power of two"));
        }
        let mut is_info = vec![false; n];
        for i in info_set {
            if i >= n {
                return domain(format!("information index {i} out of range for n = {n}"));
            }
            if is_info[i] {
                return domain(format!("duplicate information index {i}"));
            }
            is_info[i] = true;
        }
        let info_set = (0..n).filter(|&i| is_info[i]).collect();
        Ok(Self { n, info_set, is_info })
    }

    /// Every position carries data.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, 0..n)
    }

    /// Every position frozen.
    pub fn frozen(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    /// Sorted information positions.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn is_info(&self, i: usize) -> bool {
        self.is_info[i]
    }

    /// Places `data` on the information positions, zeros elsewhere.
    pub fn embed(&self, data: &[u8]) -> Result<Vec<u8>> {
        if data.len() != self.k() {
            return domain(format!("expected {} data bits, got {}", self.k(), data.len()));
        }
        let mut u = vec![0u8; self.n];
        for (&pos, &b) in self.info_set.iter().zip(data) {
            u[pos] = b & 1;
        }
        Ok(u)
    }

    /// Reads the information positions of `u`.
    pub fn extract(&self, u: &[u8]) -> Vec<u8> {
        self.info_set.iter().map(|&i| u[i]).collect()
    }

    /// `c = u G_n` for data placed on the information set.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<u8>> {
        let mut u = self.embed(data)?;
        transform_in_place(&mut u);
        Ok(u)
    }
}

/// Applies `G_n = K_2^{⊗ℓ}` in place, `log2(n)` butterfly stages.
///
/// `G_n` is an involution over GF(2), so this is also its own inverse.
pub fn transform_in_place(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Returns `u G_n` without modifying the input.
pub fn transform(u: &[u8]) -> Vec<u8> {
    let mut c = u.to_vec();
    transform_in_place(&mut c);
    c
}
