//! Per-level soft demodulation for the binary partitions of a PAM channel.
//!
//! Every partition reduces to one primitive: the log-ratio of likelihood sums
//! over the labels that agree with some known bits and take value 0 vs 1 at
//! the level of interest. Uniform priors make the `1/2^k` prefactors cancel.
//! LLRs use `log(P(bit = 0) / P(bit = 1))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constellation::PamConstellation;
use crate::error::{domain, Result};

/// Arithmetic used for the label sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum LlrMode {
    /// Max-shifted log-sum-exp.
    #[default]
    Exact,
    /// Largest term only.
    MaxLog,
}

impl LlrMode {
    pub fn name(self) -> &'static str {
        match self {
            LlrMode::Exact => "exact",
            LlrMode::MaxLog => "maxlog",
        }
    }
}

/// `log W(y | L(b))` for every packed label `b`, up to a common constant.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolLikelihoods {
    m: u32,
    loglik: Vec<f64>,
}

impl SymbolLikelihoods {
    /// Likelihoods from amplitudes indexed by packed label.
    pub fn from_points(y: f64, sigma: f64, points_by_label: &[f64]) -> Result<Self> {
        if sigma.is_nan() || sigma <= 0.0 {
            return domain(format!("noise standard deviation must be positive, got {sigma}"));
        }
        let size = points_by_label.len();
        if !size.is_power_of_two() || size < 2 {
            return domain("point count must be a power of two of at least 2");
        }
        let scale = 1.0 / (2.0 * sigma * sigma);
        let loglik = points_by_label.iter().map(|&x| -(y - x) * (y - x) * scale).collect();
        Ok(Self {
            m: size.trailing_zeros(),
            loglik,
        })
    }

    /// Builds directly from log-likelihoods indexed by packed label.
    pub fn from_loglik(loglik: Vec<f64>) -> Result<Self> {
        let size = loglik.len();
        if !size.is_power_of_two() || size < 2 {
            return domain("likelihood table size must be a power of two of at least 2");
        }
        Ok(Self {
            m: size.trailing_zeros(),
            loglik,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn loglik(&self) -> &[f64] {
        &self.loglik
    }

    /// Product likelihood of `m` independent bit channels with the given LLRs:
    /// entry `b` is `Σ_t (1 - 2 b_t) λ_t / 2`.
    pub fn from_bit_llrs(llrs: &[f64]) -> Result<Self> {
        if llrs.is_empty() || llrs.len() > 16 {
            return domain(format!("{} bit LLRs, expected 1..=16", llrs.len()));
        }
        let mut loglik = vec![0.0; 1 << llrs.len()];
        fill_bitwise(llrs, &mut loglik);
        Ok(Self {
            m: llrs.len() as u32,
            loglik,
        })
    }

    /// Re-indexes by kernel input: entry `v` becomes `log W(y | L(v K))`.
    pub fn through_kernel(&self, kernel: &Kernel) -> Result<Self> {
        if kernel.m() != self.m {
            return domain(format!(
                "kernel of size {} applied to {}-bit labels",
                kernel.m(),
                self.m
            ));
        }
        Ok(Self {
            m: self.m,
            loglik: (0..self.loglik.len() as u32)
                .map(|v| self.loglik[kernel.apply(v) as usize])
                .collect(),
        })
    }
}

/// Likelihoods of every label of `c` for one received amplitude.
pub fn symbol_likelihoods(y: f64, sigma: f64, c: &PamConstellation) -> Result<SymbolLikelihoods> {
    SymbolLikelihoods::from_points(y, sigma, &c.points_by_label())
}

pub(crate) fn fill_bitwise(llrs: &[f64], out: &mut [f64]) {
    for (b, o) in out.iter_mut().enumerate() {
        *o = llrs
            .iter()
            .enumerate()
            .map(|(t, &l)| if (b >> t) & 1 == 0 { 0.5 * l } else { -0.5 * l })
            .sum();
    }
}

#[inline]
fn combine(acc: (f64, f64), l: f64) -> (f64, f64) {
    // running (max, sum of exp(l - max))
    let (m, s) = acc;
    if l <= m {
        (m, s + (l - m).exp())
    } else {
        (l, s * (m - l).exp() + 1.0)
    }
}

/// Log-ratio of the label sums restricted to `b & mask == value`, split on
/// bit `bit`. Every partition is an instance of this.
#[inline]
pub(crate) fn masked_llr(loglik: &[f64], mask: u32, value: u32, bit: u32, mode: LlrMode) -> f64 {
    let sel = 1u32 << bit;
    debug_assert_eq!(mask & sel, 0);
    let mut zero = (f64::NEG_INFINITY, 0.0);
    let mut one = (f64::NEG_INFINITY, 0.0);
    match mode {
        LlrMode::Exact => {
            for (b, &l) in loglik.iter().enumerate() {
                let b = b as u32;
                if b & mask != value {
                    continue;
                }
                if b & sel == 0 {
                    zero = combine(zero, l);
                } else {
                    one = combine(one, l);
                }
            }
            (zero.0 + zero.1.ln()) - (one.0 + one.1.ln())
        }
        LlrMode::MaxLog => {
            for (b, &l) in loglik.iter().enumerate() {
                let b = b as u32;
                if b & mask != value {
                    continue;
                }
                if b & sel == 0 {
                    zero.0 = zero.0.max(l);
                } else {
                    one.0 = one.0.max(l);
                }
            }
            zero.0 - one.0
        }
    }
}

fn check_level(sl: &SymbolLikelihoods, j: u32) -> Result<()> {
    if j == 0 || j > sl.m {
        return domain(format!("level {j} outside 1..={}", sl.m));
    }
    Ok(())
}

fn pack_prefix(prefix: &[u8]) -> Result<u32> {
    let mut v = 0u32;
    for (i, &b) in prefix.iter().enumerate() {
        if b > 1 {
            return domain(format!("prefix bit {} is {b}", i + 1));
        }
        v |= u32::from(b) << i;
    }
    Ok(v)
}

fn low_mask(bits: u32) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}

#[inline]
pub(crate) fn pbp_slice(loglik: &[f64], j: u32, mode: LlrMode) -> f64 {
    masked_llr(loglik, 0, 0, j - 1, mode)
}

#[inline]
pub(crate) fn sbp_slice(loglik: &[f64], j: u32, prefix: u32, mode: LlrMode) -> f64 {
    let mask = low_mask(j - 1);
    masked_llr(loglik, mask, prefix & mask, j - 1, mode)
}

#[inline]
pub(crate) fn hbp_slice(loglik: &[f64], j: u32, s: u32, prefix: u32, mode: LlrMode) -> f64 {
    if j <= s {
        return sbp_slice(loglik, j, prefix, mode);
    }
    let mask = low_mask(s);
    masked_llr(loglik, mask, prefix & mask, j - 1, mode)
}

/// Parallel binary partition: level `j` sees only the channel output.
pub fn pbp_llr(sl: &SymbolLikelihoods, j: u32) -> Result<f64> {
    pbp_llr_with(sl, j, LlrMode::Exact)
}

pub fn pbp_llr_with(sl: &SymbolLikelihoods, j: u32, mode: LlrMode) -> Result<f64> {
    check_level(sl, j)?;
    Ok(pbp_slice(&sl.loglik, j, mode))
}

/// Sequential binary partition: level `j` also knows levels `1..j`.
pub fn sbp_llr(sl: &SymbolLikelihoods, j: u32, prefix: &[u8]) -> Result<f64> {
    if prefix.len() as u32 + 1 != j {
        return domain(format!(
            "level {j} needs a prefix of {} bits, got {}",
            j.saturating_sub(1),
            prefix.len()
        ));
    }
    sbp_llr_packed(sl, j, pack_prefix(prefix)?, LlrMode::Exact)
}

/// [`sbp_llr`] with the prefix packed (level `i` in bit `i - 1`); bits at or
/// above level `j` are ignored.
pub fn sbp_llr_packed(sl: &SymbolLikelihoods, j: u32, prefix: u32, mode: LlrMode) -> Result<f64> {
    check_level(sl, j)?;
    Ok(sbp_slice(&sl.loglik, j, prefix, mode))
}

/// Hybrid binary partition with split `s`.
///
/// Levels up to `s` coincide with the sequential partition; the later levels
/// all condition on exactly the first `s` bits.
pub fn hbp_llr(sl: &SymbolLikelihoods, j: u32, s: u32, prefix_s: &[u8]) -> Result<f64> {
    if prefix_s.len() as u32 != s {
        return domain(format!("split {s} needs {s} prefix bits, got {}", prefix_s.len()));
    }
    hbp_llr_packed(sl, j, s, pack_prefix(prefix_s)?, LlrMode::Exact)
}

pub fn hbp_llr_packed(sl: &SymbolLikelihoods, j: u32, s: u32, prefix: u32, mode: LlrMode) -> Result<f64> {
    check_level(sl, j)?;
    if s > sl.m {
        return domain(format!("split {s} exceeds {} levels", sl.m));
    }
    Ok(hbp_slice(&sl.loglik, j, s, prefix, mode))
}

/// LLR of kernel input `v_j` given `v_1..v_{j-1}`, where the label sent is `v K`.
pub fn kernel_llr(sl: &SymbolLikelihoods, kernel: &Kernel, j: u32, prefix: &[u8]) -> Result<f64> {
    sbp_llr(&sl.through_kernel(kernel)?, j, prefix)
}

/// Square binary matrix applied to each symbol's label bits as `b = v K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Kernel {
    // row i packed with column j in bit j
    rows: Vec<u32>,
}

impl Kernel {
    /// Rows given as 0/1 entries. Fails unless the matrix is invertible over GF(2).
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 || m > 16 {
            return domain(format!("kernel size {m} outside 1..=16"));
        }
        let mut packed = Vec::with_capacity(m);
        for row in rows {
            if row.len() != m {
                return domain("kernel is not square");
            }
            packed.push(pack_prefix(row)?);
        }
        let kernel = Self { rows: packed };
        if !kernel.is_invertible() {
            return domain("kernel is singular over GF(2)");
        }
        Ok(kernel)
    }

    pub fn identity(m: u32) -> Result<Self> {
        Self::from_rows(
            &(0..m as usize)
                .map(|i| (0..m as usize).map(|j| u8::from(i == j)).collect())
                .collect::<Vec<_>>(),
        )
    }

    /// Lower-bidiagonal kernel: ones on the diagonal and just below it.
    /// Gives `K_2`, `K_3` and `K_4` for `m = 2, 3, 4`.
    pub fn bidiagonal(m: u32) -> Result<Self> {
        Self::from_rows(
            &(0..m as usize)
                .map(|i| (0..m as usize).map(|j| u8::from(i == j || i == j + 1)).collect())
                .collect::<Vec<_>>(),
        )
    }

    pub fn m(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn entry(&self, row: usize, col: usize) -> u8 {
        ((self.rows[row] >> col) & 1) as u8
    }

    /// Packed `v K`.
    #[inline]
    pub fn apply(&self, v: u32) -> u32 {
        let mut b = 0;
        for (i, &r) in self.rows.iter().enumerate() {
            if (v >> i) & 1 == 1 {
                b ^= r;
            }
        }
        b
    }

    fn is_invertible(&self) -> bool {
        let mut rows = self.rows.clone();
        let m = rows.len();
        for col in 0..m {
            let Some(p) = (col..m).find(|&r| (rows[r] >> col) & 1 == 1) else {
                return false;
            };
            rows.swap(col, p);
            let pivot = rows[col];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != col && (*row >> col) & 1 == 1 {
                    *row ^= pivot;
                }
            }
        }
        true
    }

    pub fn name(&self) -> String {
        if let Ok(b) = Self::bidiagonal(self.m()) {
            if &b == self {
                return format!("k{}", self.m());
            }
        }
        let rows: Vec<String> = self.rows.iter().map(|r| format!("{r:x}")).collect();
        format!("kernel[{}]", rows.join(","))
    }
}

/// Which binary partition an MI estimate refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partition {
    Parallel,
    Sequential,
    Hybrid(u32),
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    pub stderr: f64,
}

#[derive(Default)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    /// `offset - mean`, with the standard error of the mean.
    fn estimate(&self, offset: f64) -> MiEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        MiEstimate {
            bits: offset - mean,
            stderr: (var / n).sqrt(),
        }
    }
}

/// `log2(1 + e^x)` without overflow.
fn log2_1p_exp(x: f64) -> f64 {
    (x.max(0.0) + (-x.abs()).exp().ln_1p()) / std::f64::consts::LN_2
}

/// Per-level and symbol-wise mutual information estimated on one sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionMi {
    pub levels: Vec<MiEstimate>,
    /// Sum over levels, with the standard error of the per-sample sum.
    pub sum: MiEstimate,
    /// `I(W)` for uniform inputs.
    pub symbol: MiEstimate,
    /// `I(W)` minus the level sum, with the paired standard error.
    pub gap: MiEstimate,
}

fn partition_llr(sl: &SymbolLikelihoods, partition: Partition, j: u32, label: u32) -> Result<f64> {
    match partition {
        Partition::Parallel => pbp_llr(sl, j),
        Partition::Sequential => sbp_llr_packed(sl, j, label, LlrMode::Exact),
        Partition::Hybrid(s) => hbp_llr_packed(sl, j, s, label, LlrMode::Exact),
    }
}

/// Estimates the level capacities of `partition` and `I(W)` from `samples`
/// uniformly drawn labels plus Gaussian noise, using the partition's own LLRs:
/// `I(B_j) = 1 - E[log2(1 + exp(-(1 - 2 b_j) L_j))]`. The same `seed` always
/// yields the same samples regardless of the partition.
pub fn partition_mutual_information(
    partition: Partition,
    c: &PamConstellation,
    sigma: f64,
    samples: u64,
    seed: u64,
) -> Result<PartitionMi> {
    if samples == 0 {
        return domain("at least one sample is required");
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return domain(format!("noise standard deviation must be positive, got {sigma}"));
    }
    if let Partition::Hybrid(s) = partition {
        if s > c.m() {
            return domain(format!("split {s} exceeds {} levels", c.m()));
        }
    }
    let m = c.m();
    let points = c.points_by_label();
    let size = points.len() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels: Vec<Moments> = (0..m).map(|_| Moments::default()).collect();
    let mut sum = Moments::default();
    let mut symbol = Moments::default();
    let mut gap = Moments::default();
    for _ in 0..samples {
        let label = rng.random_range(0..size);
        let z: f64 = rng.sample(StandardNormal);
        let y = points[label as usize] + sigma * z;
        let sl = SymbolLikelihoods::from_points(y, sigma, &points)?;
        let mut total = 0.0;
        for j in 1..=m {
            let l = partition_llr(&sl, partition, j, label)?;
            let sign = if (label >> (j - 1)) & 1 == 0 { 1.0 } else { -1.0 };
            let t = log2_1p_exp(-sign * l);
            levels[(j - 1) as usize].push(t);
            total += t;
        }
        sum.push(total);
        let own = sl.loglik[label as usize];
        let (mx, s) = sl
            .loglik
            .iter()
            .fold((f64::NEG_INFINITY, 0.0), |acc, &l| combine(acc, l - own));
        let sym = (mx + s.ln()) / std::f64::consts::LN_2;
        symbol.push(sym);
        // I(W) - Σ I(B_j) = Σ t_j - sym per sample
        gap.push(sym - total);
    }
    Ok(PartitionMi {
        levels: levels.iter().map(|mo| mo.estimate(1.0)).collect(),
        sum: sum.estimate(f64::from(m)),
        symbol: symbol.estimate(f64::from(m)),
        gap: gap.estimate(0.0),
    })
}

/// Monte Carlo estimate of the capacity of level `j` under `partition`.
pub fn level_mutual_information(
    partition: Partition,
    j: u32,
    c: &PamConstellation,
    sigma: f64,
    samples: u64,
    seed: u64,
) -> Result<MiEstimate> {
    if j == 0 || j > c.m() {
        return domain(format!("level {j} outside 1..={}", c.m()));
    }
    Ok(partition_mutual_information(partition, c, sigma, samples, seed)?.levels[(j - 1) as usize])
}

/// Monte Carlo estimate of `I(W)` under uniform inputs.
pub fn symbol_mutual_information(c: &PamConstellation, sigma: f64, samples: u64, seed: u64) -> Result<MiEstimate> {
    Ok(partition_mutual_information(Partition::Parallel, c, sigma, samples, seed)?.symbol)
}

/// CSV with header `level,snr_db,mi_bits,stderr`.
pub fn mi_csv(rows: &[(u32, f64, MiEstimate)]) -> String {
    let mut out = String::from("level,snr_db,mi_bits,stderr\n");
    for (level, snr_db, est) in rows {
        out.push_str(&format!("{level},{snr_db},{},{}\n", est.bits, est.stderr));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_pam, LabelingKind};

    fn brute(sl_y: f64, sigma: f64, pts: &[f64], keep: impl Fn(u32) -> Option<bool>) -> f64 {
        // direct density sums, no log-domain tricks
        let (mut s0, mut s1) = (0.0, 0.0);
        for (b, &x) in pts.iter().enumerate() {
            let w = (-(sl_y - x).powi(2) / (2.0 * sigma * sigma)).exp();
            match keep(b as u32) {
                Some(false) => s0 += w,
                Some(true) => s1 += w,
                None => {}
            }
        }
        (s0 / s1).ln()
    }

    #[test]
    fn two_pam_symbol_llr() {
        let c = build_pam(1, LabelingKind::SetPartition).unwrap();
        let sl = symbol_likelihoods(1.0, 1.0, &c).unwrap();
        assert!((sl.loglik()[1] - sl.loglik()[0] - 2.0).abs() < 1e-12);
        let y = 0.37;
        let sl = symbol_likelihoods(y, 0.8, &c).unwrap();
        assert!((pbp_llr(&sl, 1).unwrap() - (-2.0 * y / 0.64)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_at_zero() {
        let c = build_pam(3, LabelingKind::SetPartition).unwrap();
        let sl = symbol_likelihoods(0.0, 1.3, &c).unwrap();
        for (i, &x) in c.points().iter().enumerate() {
            let mirror = c.size() - 1 - i;
            assert_eq!(c.points()[mirror], -x);
            let a = sl.loglik()[c.label_of(i).bits() as usize];
            let b = sl.loglik()[c.label_of(mirror).bits() as usize];
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn four_pam_density_ratios() {
        let c = build_pam(2, LabelingKind::GrayLsbFirst).unwrap();
        let (y, sigma) = (3.0, 0.5);
        let sl = symbol_likelihoods(y, sigma, &c).unwrap();
        let dens =
            |x: f64| (-(y - x) * (y - x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        for a in 0..4u32 {
            for b in 0..4u32 {
                let got = sl.loglik()[a as usize] - sl.loglik()[b as usize];
                let want = (dens(c.point_of_label(a)) / dens(c.point_of_label(b))).ln();
                assert!((got - want).abs() < 1e-9);
            }
        }
        assert!(symbol_likelihoods(0.0, 0.0, &c).is_err());
    }

    #[test]
    fn gray_level2_zero_on_symmetry_axis() {
        // LSB-first Gray 4-PAM: level 2 is the sign bit, symmetric around y = 0
        let c = build_pam(2, LabelingKind::GrayLsbFirst).unwrap();
        let sl = symbol_likelihoods(0.0, 0.7, &c).unwrap();
        assert!(pbp_llr(&sl, 2).unwrap().abs() < 1e-12);
        // level 1 separates outer from inner points, symmetric around ±2
        let c = build_pam(2, LabelingKind::GrayMsbFirst).unwrap();
        let sl = symbol_likelihoods(0.0, 0.7, &c).unwrap();
        assert!(pbp_llr(&sl, 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pbp_16_gray_brute_force() {
        let c = build_pam(4, LabelingKind::GrayLsbFirst).unwrap();
        let pts = c.points_by_label();
        let sl = symbol_likelihoods(2.5, 1.0, &c).unwrap();
        let want = brute(2.5, 1.0, &pts, |b| Some((b >> 2) & 1 == 1));
        let got = pbp_llr(&sl, 3).unwrap();
        assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn sbp_examples() {
        let c = build_pam(4, LabelingKind::SetPartition).unwrap();
        let pts = c.points_by_label();
        for &y in &[-9.3, -0.2, 0.7, 4.4, 14.9] {
            let sl = symbol_likelihoods(y, 0.9, &c).unwrap();
            assert_eq!(sbp_llr(&sl, 1, &[]).unwrap(), pbp_llr(&sl, 1).unwrap());
        }
        let sl = symbol_likelihoods(0.7, 0.9, &c).unwrap();
        let want = brute(0.7, 0.9, &pts, |b| (b & 1 == 1).then_some((b >> 1) & 1 == 1));
        let got = sbp_llr(&sl, 2, &[1]).unwrap();
        assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0));
        // full prefix: two surviving symbols
        let prefix = [1, 0, 1];
        let x0 = c.point_of_label(0b0101);
        let x1 = c.point_of_label(0b1101);
        let two = (-(0.7 - x0).powi(2) + (0.7 - x1).powi(2)) / (2.0 * 0.81);
        assert!((sbp_llr(&sl, 4, &prefix).unwrap() - two).abs() < 1e-9);
        assert!(sbp_llr(&sl, 3, &[1]).is_err());
    }

    #[test]
    fn hbp_examples() {
        let c = build_pam(4, LabelingKind::Hybrid(2)).unwrap();
        let pts = c.points_by_label();
        let (y, sigma) = (-4.2, 1.2);
        let sl = symbol_likelihoods(y, sigma, &c).unwrap();
        let want = brute(y, sigma, &pts, |b| (b & 0b11 == 0b11).then_some((b >> 3) & 1 == 1));
        let got = hbp_llr(&sl, 4, 2, &[1, 1]).unwrap();
        assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0));
        for j in 1..=4 {
            assert_eq!(hbp_llr(&sl, j, 0, &[]).unwrap(), pbp_llr(&sl, j).unwrap());
        }
        let full = [1u8, 0, 0, 1];
        for j in 1..=4u32 {
            assert_eq!(
                hbp_llr(&sl, j, 4, &full).unwrap(),
                sbp_llr(&sl, j, &full[..(j - 1) as usize]).unwrap()
            );
        }
        assert!(hbp_llr(&sl, 5, 2, &[0, 0]).is_err());
        assert!(hbp_llr(&sl, 1, 2, &[0]).is_err());
    }

    #[test]
    fn kernel_examples() {
        let c = build_pam(2, LabelingKind::GrayLsbFirst).unwrap();
        let k2 = Kernel::bidiagonal(2).unwrap();
        let (y, sigma) = (0.6, 0.8);
        let sl = symbol_likelihoods(y, sigma, &c).unwrap();
        // v = (v1, v2) -> b = (v1 + v2, v2); enumerate all four inputs by hand
        let w = |b1: u32, b2: u32| {
            let x = c.point_of_label(b1 | (b2 << 1));
            (-(y - x).powi(2) / (2.0 * sigma * sigma)).exp()
        };
        let p0 = w(0, 0) + w(1, 1); // v1 = 0: v2 = 0 or 1
        let p1 = w(1, 0) + w(0, 1); // v1 = 1
        let got = kernel_llr(&sl, &k2, 1, &[]).unwrap();
        assert!((got - (p0 / p1).ln()).abs() < 1e-12);

        let id = Kernel::identity(2).unwrap();
        for j in 1..=2u32 {
            let prefix = vec![1u8; (j - 1) as usize];
            assert_eq!(
                kernel_llr(&sl, &id, j, &prefix).unwrap(),
                sbp_llr(&sl, j, &prefix).unwrap()
            );
        }
    }

    #[test]
    fn k3_on_eight_pam() {
        let c = build_pam(3, LabelingKind::GrayLsbFirst).unwrap();
        let k3 = Kernel::bidiagonal(3).unwrap();
        assert_eq!(k3.entry(0, 0), 1);
        assert_eq!(k3.entry(1, 0), 1);
        assert_eq!(k3.entry(2, 1), 1);
        assert_eq!(k3.entry(0, 1), 0);
        let pts = c.points_by_label();
        let (y, sigma) = (-2.3, 0.9);
        let sl = symbol_likelihoods(y, sigma, &c).unwrap();
        let (mut s0, mut s1) = (0.0, 0.0);
        for v2 in 0..2u32 {
            for v3 in 0..2u32 {
                let v = [0u32, v2, v3];
                let b1 = v[0] ^ v[1];
                let b2 = v[1] ^ v[2];
                let b3 = v[2];
                let x = pts[(b1 | (b2 << 1) | (b3 << 2)) as usize];
                let wt = (-(y - x).powi(2) / (2.0 * sigma * sigma)).exp();
                if v2 == 0 {
                    s0 += wt;
                } else {
                    s1 += wt;
                }
            }
        }
        let got = kernel_llr(&sl, &k3, 2, &[0]).unwrap();
        assert!((got - (s0 / s1).ln()).abs() < 1e-10);
    }

    #[test]
    fn bitwise_table_reproduces_bit_llrs() {
        let llrs = [1.3, -0.4, 2.2];
        let sl = SymbolLikelihoods::from_bit_llrs(&llrs).unwrap();
        for (j, &l) in llrs.iter().enumerate() {
            assert!((pbp_llr(&sl, j as u32 + 1).unwrap() - l).abs() < 1e-12);
        }
        // with K2 the first kernel input sees the box-plus of both bit LLRs
        let sl = SymbolLikelihoods::from_bit_llrs(&llrs[..2]).unwrap();
        let k2 = Kernel::bidiagonal(2).unwrap();
        let boxplus = 2.0 * ((1.3f64 / 2.0).tanh() * (-0.4f64 / 2.0).tanh()).atanh();
        assert!((kernel_llr(&sl, &k2, 1, &[]).unwrap() - boxplus).abs() < 1e-12);
    }

    #[test]
    fn gray_through_bidiagonal_kernel_is_set_partition() {
        // b = v K with K lower-bidiagonal gives b_t = v_t ^ v_{t+1}, which is
        // the reflected Gray map applied to the set-partition index.
        for m in 1..=6 {
            let gray = build_pam(m, LabelingKind::GrayLsbFirst).unwrap();
            let sp = build_pam(m, LabelingKind::SetPartition).unwrap();
            let k = Kernel::bidiagonal(m).unwrap();
            for v in 0..(1u32 << m) {
                assert_eq!(gray.point_of_label(k.apply(v)), sp.point_of_label(v));
            }
        }
    }

    #[test]
    fn singular_kernel_rejected() {
        assert!(Kernel::from_rows(&[vec![1, 1], vec![1, 1]]).is_err());
        assert!(Kernel::from_rows(&[vec![1, 0], vec![0]]).is_err());
        assert_eq!(Kernel::bidiagonal(4).unwrap().name(), "k4");
    }

    #[test]
    fn sp_level1_sign_flip_under_reflection() {
        // For even m the reflection x -> -x maps index i to 2^m-1-i, flipping bit 1.
        let c = build_pam(4, LabelingKind::SetPartition).unwrap();
        for &y in &[0.3, -2.7, 6.1] {
            let a = pbp_llr(&symbol_likelihoods(y, 1.1, &c).unwrap(), 1).unwrap();
            let b = pbp_llr(&symbol_likelihoods(-y, 1.1, &c).unwrap(), 1).unwrap();
            assert!((a + b).abs() < 1e-9);
        }
    }

    #[test]
    fn maxlog_bounds_are_close_at_high_snr() {
        let c = build_pam(3, LabelingKind::GrayLsbFirst).unwrap();
        let sl = symbol_likelihoods(2.2, 0.2, &c).unwrap();
        for j in 1..=3 {
            let e = pbp_llr_with(&sl, j, LlrMode::Exact).unwrap();
            let m = pbp_llr_with(&sl, j, LlrMode::MaxLog).unwrap();
            assert_eq!(e.signum(), m.signum());
            assert!((e - m).abs() < 0.1);
        }
    }

    #[test]
    fn binary_mi_limits() {
        let c = build_pam(1, LabelingKind::SetPartition).unwrap();
        let hi = level_mutual_information(Partition::Parallel, 1, &c, 0.05, 2000, 1).unwrap();
        assert!((hi.bits - 1.0).abs() < 1e-6);
        let lo = level_mutual_information(Partition::Parallel, 1, &c, 200.0, 20000, 1).unwrap();
        assert!(lo.bits.abs() < 0.01, "{lo:?}");
        assert!(level_mutual_information(Partition::Parallel, 1, &c, 1.0, 0, 1).is_err());
    }

    #[test]
    fn mi_csv_format() {
        let csv = mi_csv(&[(
            1,
            15.0,
            MiEstimate {
                bits: 0.5,
                stderr: 0.01,
            },
        )]);
        assert_eq!(csv, "level,snr_db,mi_bits,stderr\n1,15,0.5,0.01\n");
    }
}
