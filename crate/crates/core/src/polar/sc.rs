use crate::error::{domain, Result};

use super::PolarCode;

/// Check-node combination used by the SC decoder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CheckNodeRule {
    /// `2 atanh(tanh(a/2) tanh(b/2))`, evaluated in a stable form.
    #[default]
    Exact,
    /// `sign(a) sign(b) min(|a|, |b|)`.
    MinSum,
}

#[inline]
fn f_min_sum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// `2 atanh(tanh(a/2) tanh(b/2))` written as the min-sum term plus two
/// correction terms, which avoids overflow of `tanh` near ±1.
#[inline]
pub(crate) fn f_exact(a: f64, b: f64) -> f64 {
    let ms = f_min_sum(a, b);
    if a.is_infinite() || b.is_infinite() {
        return ms;
    }
    ms + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

#[inline]
fn g(a: f64, b: f64, u: u8) -> f64 {
    let v = if u == 0 { b + a } else { b - a };
    // only reachable with contradicting infinite inputs
    if v.is_nan() {
        0.0
    } else {
        v
    }
}

#[inline]
fn hard(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

/// Result of one SC decoding pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScOutput {
    /// Decided input vector `û` (frozen positions included).
    pub u: Vec<u8>,
    /// Re-encoded codeword `û G_n`.
    pub codeword: Vec<u8>,
}

/// Successive-cancellation decoder for one block length.
///
/// Holds its own scratch buffers, so one instance serves one trial at a time.
/// LLRs follow `log(P(0) / P(1))`.
#[derive(Clone, Debug)]
pub struct ScDecoder {
    n: usize,
    rule: CheckNodeRule,
    // node of length L reads LLRs from llr[L..2L] and writes bits to bits[L..2L]
    llr: Vec<f64>,
    bits: Vec<u8>,
}

impl ScDecoder {
    pub fn new(n: usize, rule: CheckNodeRule) -> Result<Self> {
        if !n.is_power_of_two() {
            return domain(format!("block length {n} is not a power of two"));
        }
        Ok(Self {
            n,
            rule,
            llr: vec![0.0; 2 * n],
            bits: vec![0; 2 * n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> CheckNodeRule {
        self.rule
    }

    fn load(&mut self, llrs: &[f64]) -> Result<()> {
        if llrs.len() != self.n {
            return domain(format!("expected {} channel LLRs, got {}", self.n, llrs.len()));
        }
        if llrs.iter().any(|l| l.is_nan()) {
            return domain("NaN channel LLR");
        }
        self.llr[self.n..].copy_from_slice(llrs);
        Ok(())
    }

    fn run<D: FnMut(usize, f64) -> u8>(&mut self, mut decide: D) -> Vec<u8> {
        let mut u = vec![0u8; self.n];
        match self.rule {
            CheckNodeRule::Exact => self.node::<_, true>(self.n, 0, &mut decide, &mut u),
            CheckNodeRule::MinSum => self.node::<_, false>(self.n, 0, &mut decide, &mut u),
        }
        u
    }

    fn node<D: FnMut(usize, f64) -> u8, const EXACT: bool>(
        &mut self,
        len: usize,
        first_leaf: usize,
        decide: &mut D,
        u: &mut [u8],
    ) {
        if len == 1 {
            let b = decide(first_leaf, self.llr[1]);
            u[first_leaf] = b;
            self.bits[1] = b;
            return;
        }
        let h = len / 2;
        {
            let (lo, hi) = self.llr.split_at_mut(len);
            let child = &mut lo[h..len];
            let (top, bottom) = hi[..len].split_at(h);
            for ((c, &a), &b) in child.iter_mut().zip(top).zip(bottom) {
                *c = if EXACT { f_exact(a, b) } else { f_min_sum(a, b) };
            }
        }
        self.node::<D, EXACT>(h, first_leaf, decide, u);
        {
            let (blo, bhi) = self.bits.split_at_mut(len);
            bhi[..h].copy_from_slice(&blo[h..len]);
            let (lo, hi) = self.llr.split_at_mut(len);
            let child = &mut lo[h..len];
            let (top, bottom) = hi[..len].split_at(h);
            for (((c, &a), &b), &ub) in child.iter_mut().zip(top).zip(bottom).zip(&bhi[..h]) {
                *c = g(a, b, ub);
            }
        }
        self.node::<D, EXACT>(h, first_leaf + h, decide, u);
        let (blo, bhi) = self.bits.split_at_mut(len);
        let right = &blo[h..len];
        let (top, bottom) = bhi[..len].split_at_mut(h);
        for ((t, b), &r) in top.iter_mut().zip(bottom.iter_mut()).zip(right) {
            *t ^= r;
            *b = r;
        }
    }

    fn codeword(&self) -> Vec<u8> {
        self.bits[self.n..].to_vec()
    }

    /// Decodes `llrs` under `code`; frozen positions decode to zero.
    pub fn decode(&mut self, code: &PolarCode, llrs: &[f64]) -> Result<ScOutput> {
        self.check_code(code)?;
        self.load(llrs)?;
        let u = self.run(|i, l| if code.is_info(i) { hard(l) } else { 0 });
        Ok(ScOutput {
            u,
            codeword: self.codeword(),
        })
    }

    /// Like [`decode`](Self::decode), also returning the LLR on which each
    /// decision `û_i` was based.
    pub fn decode_traced(&mut self, code: &PolarCode, llrs: &[f64]) -> Result<(ScOutput, Vec<f64>)> {
        self.check_code(code)?;
        self.load(llrs)?;
        let mut trace = vec![0.0; self.n];
        let u = self.run(|i, l| {
            trace[i] = l;
            if code.is_info(i) {
                hard(l)
            } else {
                0
            }
        });
        Ok((
            ScOutput {
                u,
                codeword: self.codeword(),
            },
            trace,
        ))
    }

    /// Genie-aided pass: every decision is forced to `truth`, and `errors[i]`
    /// records whether the hard decision on position `i` would have been wrong.
    /// Returns the re-encoded true codeword.
    pub fn decode_genie(&mut self, truth: &[u8], llrs: &[f64], errors: &mut [bool]) -> Result<Vec<u8>> {
        if truth.len() != self.n || errors.len() != self.n {
            return domain("genie vectors do not match the block length");
        }
        self.load(llrs)?;
        self.run(|i, l| {
            errors[i] = hard(l) != truth[i];
            truth[i]
        });
        Ok(self.codeword())
    }

    fn check_code(&self, code: &PolarCode) -> Result<()> {
        if code.n() != self.n {
            return domain(format!("decoder length {} used with code length {}", self.n, code.n()));
        }
        Ok(())
    }
}
