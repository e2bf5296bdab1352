//! Transmitters and receivers for the coded-modulation schemes.
//!
//! All schemes share one bit-index space of `m·N` positions: component codes
//! are laid out back to back in decoding order. Sequential components map one
//! codeword bit to one level of each symbol; the parallel component (plain
//! BI-PCM, or the tail of Hybrid-PCM) is spread over its levels through an
//! [`Interleaver`].

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constellation::{LabelingKind, PamConstellation};
use crate::demod::{self, Kernel, LlrMode};
use crate::error::{config, domain, Result};
use crate::polar::{CheckNodeRule, PolarCode, ScDecoder};

/// Which coded-modulation pipeline to run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// One polar code of length `m·N`, interleaved over all levels.
    PlainBicm,
    /// `m` codes of length `N` combined per symbol by an `m×m` kernel.
    CompoundBicm(Kernel),
    /// One code of length `N` per level, multi-stage decoding.
    Mlpcm,
    /// `s` sequential level codes plus one parallel code of length `(m−s)·N`.
    HybridPcm(u32),
    /// No coding; label bits are the data. Reference for calibration.
    Uncoded,
}

impl SchemeKind {
    pub fn name(&self) -> String {
        match self {
            SchemeKind::PlainBicm => "bipcm".into(),
            SchemeKind::CompoundBicm(k) => format!("compound-{}", k.name()),
            SchemeKind::Mlpcm => "mlpcm".into(),
            SchemeKind::HybridPcm(s) => format!("hybrid-s{s}"),
            SchemeKind::Uncoded => "uncoded".into(),
        }
    }
}

/// Soft input of the kernel stage in compound BI-PCM.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CompoundMetric {
    /// Bit-level LLRs from the parallel demodulator, treated as independent
    /// channels and combined through the kernel. Demodulation stays separate
    /// from decoding.
    #[default]
    BitwisePbp,
    /// Exact symbol-level marginalization over the kernel inputs. With a
    /// bidiagonal kernel and LSB-first Gray labeling this is the same channel
    /// as ML-PCM over set-partition labeling.
    SymbolExact,
}

impl CompoundMetric {
    pub fn name(self) -> &'static str {
        match self {
            CompoundMetric::BitwisePbp => "pbp",
            CompoundMetric::SymbolExact => "exact",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum InterleaverKind {
    /// Codeword position `p` goes to symbol `p / w`, level offset `p % w`.
    #[default]
    Block,
    /// Seeded uniform permutation followed by the block layout.
    Random(u64),
}

impl InterleaverKind {
    pub fn name(self) -> String {
        match self {
            InterleaverKind::Block => "block".into(),
            InterleaverKind::Random(seed) => format!("random{seed}"),
        }
    }
}

/// Bijection from codeword positions to (symbol, level) slots. Slot
/// `i·w + o` is level offset `o` of symbol `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    slot_of: Vec<usize>,
}

impl Interleaver {
    pub fn new(kind: InterleaverKind, len: usize) -> Self {
        let mut slot_of: Vec<usize> = (0..len).collect();
        if let InterleaverKind::Random(seed) = kind {
            slot_of.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        Self { slot_of }
    }

    pub fn len(&self) -> usize {
        self.slot_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot_of.is_empty()
    }

    pub fn slot_of(&self, position: usize) -> usize {
        self.slot_of[position]
    }

    /// Codeword order to slot order.
    pub fn interleave<T: Copy + Default>(&self, codeword: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); codeword.len()];
        for (p, &v) in codeword.iter().enumerate() {
            out[self.slot_of[p]] = v;
        }
        out
    }

    /// Slot order back to codeword order.
    pub fn deinterleave<T: Copy>(&self, slots: &[T]) -> Vec<T> {
        self.slot_of.iter().map(|&s| slots[s]).collect()
    }
}

/// A fully specified scheme: constellation, component codes and receiver
/// arithmetic.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    kind: SchemeKind,
    n_uses: usize,
    constellation: PamConstellation,
    interleaver_kind: InterleaverKind,
    interleaver: Option<Interleaver>,
    codes: Vec<PolarCode>,
    llr_mode: LlrMode,
    rule: CheckNodeRule,
    compound_metric: CompoundMetric,
}

fn default_labeling(kind: &SchemeKind) -> LabelingKind {
    match kind {
        SchemeKind::PlainBicm | SchemeKind::CompoundBicm(_) | SchemeKind::Uncoded => LabelingKind::GrayLsbFirst,
        SchemeKind::Mlpcm => LabelingKind::SetPartition,
        SchemeKind::HybridPcm(s) => LabelingKind::Hybrid(*s),
    }
}

impl SchemeConfig {
    /// Scheme over `2^m`-PAM with `n_uses` channel uses per codeword, default
    /// labeling for the kind, block interleaver and all-frozen components.
    pub fn new(kind: SchemeKind, m: u32, n_uses: usize) -> Result<Self> {
        if n_uses == 0 {
            return domain("at least one channel use is required");
        }
        let constellation = PamConstellation::new(m, default_labeling(&kind))?;
        let mn = m as usize * n_uses;
        let lengths: Vec<usize> = match &kind {
            SchemeKind::PlainBicm => vec![mn],
            SchemeKind::CompoundBicm(k) => {
                if k.m() != m {
                    return config(format!("{}x{} kernel on {m} bit levels", k.m(), k.m()));
                }
                vec![n_uses; m as usize]
            }
            SchemeKind::Mlpcm => vec![n_uses; m as usize],
            SchemeKind::HybridPcm(s) => {
                if *s > m {
                    return domain(format!("split {s} exceeds order exponent {m}"));
                }
                let mut v = vec![n_uses; *s as usize];
                if *s < m {
                    v.push((m - s) as usize * n_uses);
                }
                v
            }
            SchemeKind::Uncoded => Vec::new(),
        };
        for &len in &lengths {
            if !len.is_power_of_two() {
                return config(format!(
                    "{} needs component length {len} to be a power of two",
                    kind.name()
                ));
            }
        }
        let codes = lengths
            .iter()
            .map(|&len| PolarCode::frozen(len))
            .collect::<Result<_>>()?;
        let mut cfg = Self {
            kind,
            n_uses,
            constellation,
            interleaver_kind: InterleaverKind::Block,
            interleaver: None,
            codes,
            llr_mode: LlrMode::Exact,
            rule: CheckNodeRule::Exact,
            compound_metric: CompoundMetric::BitwisePbp,
        };
        cfg.interleaver = cfg
            .parallel_width()
            .map(|w| Interleaver::new(InterleaverKind::Block, w * n_uses));
        Ok(cfg)
    }

    pub fn with_labeling(mut self, labeling: LabelingKind) -> Result<Self> {
        self.constellation = PamConstellation::new(self.m(), labeling)?;
        Ok(self)
    }

    pub fn with_interleaver(mut self, kind: InterleaverKind) -> Self {
        self.interleaver_kind = kind;
        self.interleaver = self.parallel_width().map(|w| Interleaver::new(kind, w * self.n_uses));
        self
    }

    pub fn with_llr_mode(mut self, mode: LlrMode) -> Self {
        self.llr_mode = mode;
        self
    }

    pub fn with_check_node_rule(mut self, rule: CheckNodeRule) -> Self {
        self.rule = rule;
        self
    }

    /// Only meaningful for compound BI-PCM.
    pub fn with_compound_metric(mut self, metric: CompoundMetric) -> Self {
        self.compound_metric = metric;
        self
    }

    /// Installs information sets, one per component, 0-based within each component.
    pub fn with_info_sets(mut self, sets: &[Vec<usize>]) -> Result<Self> {
        if sets.len() != self.codes.len() {
            return config(format!(
                "{} components, {} information sets",
                self.codes.len(),
                sets.len()
            ));
        }
        self.codes = self
            .codes
            .iter()
            .zip(sets)
            .map(|(c, set)| PolarCode::new(c.n(), set.iter().copied()))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    pub fn m(&self) -> u32 {
        self.constellation.m()
    }

    pub fn n_uses(&self) -> usize {
        self.n_uses
    }

    /// Total bit positions `m·N`.
    pub fn total_bits(&self) -> usize {
        self.m() as usize * self.n_uses
    }

    pub fn constellation(&self) -> &PamConstellation {
        &self.constellation
    }

    pub fn codes(&self) -> &[PolarCode] {
        &self.codes
    }

    pub fn component_lengths(&self) -> Vec<usize> {
        self.codes.iter().map(PolarCode::n).collect()
    }

    pub fn interleaver(&self) -> Option<&Interleaver> {
        self.interleaver.as_ref()
    }

    pub fn llr_mode(&self) -> LlrMode {
        self.llr_mode
    }

    pub fn check_node_rule(&self) -> CheckNodeRule {
        self.rule
    }

    pub fn compound_metric(&self) -> CompoundMetric {
        self.compound_metric
    }

    /// Information bits per codeword.
    pub fn k(&self) -> usize {
        match self.kind {
            SchemeKind::Uncoded => self.total_bits(),
            _ => self.codes.iter().map(PolarCode::k).sum(),
        }
    }

    /// Code rate in information bits per coded bit.
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.total_bits() as f64
    }

    /// Number of sequentially decoded level components.
    fn sequential_levels(&self) -> u32 {
        match self.kind {
            SchemeKind::PlainBicm | SchemeKind::Uncoded => 0,
            SchemeKind::CompoundBicm(_) | SchemeKind::Mlpcm => self.m(),
            SchemeKind::HybridPcm(s) => s,
        }
    }

    /// Levels covered by the interleaved parallel component, if any.
    fn parallel_width(&self) -> Option<usize> {
        match self.kind {
            SchemeKind::PlainBicm => Some(self.m() as usize),
            SchemeKind::HybridPcm(s) if s < self.m() => Some((self.m() - s) as usize),
            _ => None,
        }
    }

    fn kernel(&self) -> Option<&Kernel> {
        match &self.kind {
            SchemeKind::CompoundBicm(k) => Some(k),
            _ => None,
        }
    }

    /// Identifies everything that shapes the bit channels, but not the
    /// information sets. Construction profiles are keyed by this.
    pub fn layout_fingerprint(&self) -> String {
        let s = match self.kind {
            SchemeKind::HybridPcm(s) => s.to_string(),
            _ => "-".into(),
        };
        let mut fp = format!(
            "{}/m{}/N{}/s{}/lab-{}/il-{}/llr-{}",
            self.kind.name(),
            self.m(),
            self.n_uses,
            s,
            self.constellation.kind().name(),
            self.interleaver_kind.name(),
            self.llr_mode.name(),
        );
        if self.kernel().is_some() {
            fp.push_str("/cm-");
            fp.push_str(self.compound_metric.name());
        }
        fp
    }

    /// [`layout_fingerprint`](Self::layout_fingerprint) plus a hash of the
    /// information sets.
    pub fn fingerprint(&self) -> String {
        // FNV-1a over (component, position) pairs
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for byte in v.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for (ci, code) in self.codes.iter().enumerate() {
            eat(ci as u64);
            eat(code.n() as u64);
            for &p in code.info_set() {
                eat(p as u64);
            }
        }
        format!("{}/info-{h:016x}", self.layout_fingerprint())
    }

    /// Encodes `data` into one codeword per component.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<Vec<u8>>> {
        if data.len() != self.k() {
            return domain(format!("expected {} data bits, got {}", self.k(), data.len()));
        }
        if self.kind == SchemeKind::Uncoded {
            return Ok(vec![data.to_vec()]);
        }
        let mut rest = data;
        let mut out = Vec::with_capacity(self.codes.len());
        for code in &self.codes {
            let (head, tail) = rest.split_at(code.k());
            out.push(code.encode(head)?);
            rest = tail;
        }
        Ok(out)
    }

    /// Packed per-symbol labels for the given component codewords.
    pub fn labels(&self, codewords: &[Vec<u8>]) -> Result<Vec<u32>> {
        let n = self.n_uses;
        let m = self.m() as usize;
        if self.kind == SchemeKind::Uncoded {
            let bits = codewords.first().map(Vec::as_slice).unwrap_or_default();
            if codewords.len() != 1 || bits.len() != m * n {
                return domain("uncoded transmission takes one block of m·N bits");
            }
            return Ok(bits
                .chunks_exact(m)
                .map(|sym| {
                    sym.iter()
                        .enumerate()
                        .fold(0u32, |acc, (j, &b)| acc | (u32::from(b & 1) << j))
                })
                .collect());
        }
        if codewords.len() != self.codes.len() || codewords.iter().zip(&self.codes).any(|(c, code)| c.len() != code.n())
        {
            return domain("codeword shapes do not match the component codes");
        }
        let seq = self.sequential_levels() as usize;
        let mut v = vec![0u32; n];
        for (j, c) in codewords.iter().take(seq).enumerate() {
            for (vi, &b) in v.iter_mut().zip(c) {
                *vi |= u32::from(b & 1) << j;
            }
        }
        if let (Some(w), Some(il)) = (self.parallel_width(), &self.interleaver) {
            let slots = il.interleave(&codewords[seq]);
            for (i, vi) in v.iter_mut().enumerate() {
                for o in 0..w {
                    *vi |= u32::from(slots[i * w + o] & 1) << (seq + o);
                }
            }
        }
        if let Some(k) = self.kernel() {
            for vi in &mut v {
                *vi = k.apply(*vi);
            }
        }
        Ok(v)
    }

    /// Amplitudes for the given component codewords.
    pub fn modulate(&self, codewords: &[Vec<u8>]) -> Result<Vec<f64>> {
        Ok(self
            .labels(codewords)?
            .into_iter()
            .map(|b| self.constellation.point_of_label(b))
            .collect())
    }

    /// Encodes and modulates `data` into `N` amplitudes.
    pub fn transmit(&self, data: &[u8]) -> Result<Vec<f64>> {
        self.modulate(&self.encode(data)?)
    }
}

/// Genie assistance for a receiver pass.
#[derive(Clone, Copy, Debug)]
pub enum Genie<'a> {
    Off,
    /// Feed back these true component codewords between stages.
    Feedback(&'a [Vec<u8>]),
    /// Force every SC decision to these true component inputs `u` and record
    /// which hard decisions would have been wrong.
    Full(&'a [Vec<u8>]),
}

/// Output of one receiver pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reception {
    pub data: Vec<u8>,
    /// Hard re-encoded codeword of each component.
    pub codewords: Vec<Vec<u8>>,
    /// Demodulator-to-decoder hand-offs, one per component decode.
    pub exchanges: usize,
    /// Per global position, set under [`Genie::Full`] when the hard decision
    /// disagreed with the truth. Empty otherwise.
    pub position_errors: Vec<bool>,
}

/// Single-trial receiver holding decoder scratch space for one scheme.
#[derive(Clone, Debug)]
pub struct Receiver<'c> {
    cfg: &'c SchemeConfig,
    decoders: Vec<ScDecoder>,
    points: Vec<f64>,
    loglik: Vec<f64>,
    known: Vec<u32>,
}

impl<'c> Receiver<'c> {
    pub fn new(cfg: &'c SchemeConfig) -> Result<Self> {
        let decoders = cfg
            .codes
            .iter()
            .map(|c| ScDecoder::new(c.n(), cfg.rule))
            .collect::<Result<_>>()?;
        Ok(Self {
            cfg,
            decoders,
            points: cfg.constellation.points_by_label(),
            loglik: Vec::new(),
            known: Vec::new(),
        })
    }

    pub fn receive(&mut self, y: &[f64], sigma: f64) -> Result<Reception> {
        self.receive_with(y, sigma, Genie::Off)
    }

    pub fn receive_with(&mut self, y: &[f64], sigma: f64, genie: Genie<'_>) -> Result<Reception> {
        let cfg = self.cfg;
        let n = cfg.n_uses;
        if y.len() != n {
            return domain(format!("expected {n} received amplitudes, got {}", y.len()));
        }
        if sigma.is_nan() || sigma <= 0.0 {
            return domain(format!("noise standard deviation must be positive, got {sigma}"));
        }
        match genie {
            Genie::Feedback(t) | Genie::Full(t)
                if t.len() != cfg.codes.len() || t.iter().zip(&cfg.codes).any(|(v, c)| v.len() != c.n()) =>
            {
                return domain("genie vectors do not match the component codes");
            }
            _ => {}
        }
        self.fill_likelihoods(y, sigma)?;
        if cfg.kind == SchemeKind::Uncoded {
            return Ok(self.hard_decide());
        }

        let size = self.points.len();
        let mode = cfg.llr_mode;
        let seq = cfg.sequential_levels();
        self.known.clear();
        self.known.resize(n, 0);
        let mut data = Vec::with_capacity(cfg.k());
        let mut codewords = Vec::with_capacity(cfg.codes.len());
        let mut position_errors = match genie {
            Genie::Full(_) => vec![false; cfg.total_bits()],
            _ => Vec::new(),
        };
        let mut exchanges = 0;
        let mut offset = 0;

        for j in 1..=seq {
            let comp = (j - 1) as usize;
            let llrs: Vec<f64> = self
                .loglik
                .chunks_exact(size)
                .zip(&self.known)
                .map(|(ll, &prefix)| match cfg.kind {
                    SchemeKind::HybridPcm(s) => demod::hbp_slice(ll, j, s, prefix, mode),
                    // kernel case: table already indexed by kernel input
                    _ => demod::sbp_slice(ll, j, prefix, mode),
                })
                .collect();
            let c = self.decode_component(comp, &llrs, genie, &mut data, &mut position_errors[..], offset)?;
            exchanges += 1;
            for (k, &b) in self.known.iter_mut().zip(&c) {
                *k |= u32::from(b) << (j - 1);
            }
            offset += n;
            codewords.push(c);
        }

        if let (Some(w), Some(il)) = (cfg.parallel_width(), cfg.interleaver.as_ref()) {
            let comp = seq as usize;
            let mut slots = vec![0.0; w * n];
            for (i, (ll, &prefix)) in self.loglik.chunks_exact(size).zip(&self.known).enumerate() {
                for o in 0..w {
                    let j = seq + 1 + o as u32;
                    slots[i * w + o] = match cfg.kind {
                        SchemeKind::PlainBicm => demod::pbp_slice(ll, j, mode),
                        SchemeKind::HybridPcm(s) => demod::hbp_slice(ll, j, s, prefix, mode),
                        _ => unreachable!("only BI-PCM and Hybrid-PCM have a parallel component"),
                    };
                }
            }
            let llrs = il.deinterleave(&slots);
            let c = self.decode_component(comp, &llrs, genie, &mut data, &mut position_errors[..], offset)?;
            exchanges += 1;
            codewords.push(c);
        }

        Ok(Reception {
            data,
            codewords,
            exchanges,
            position_errors,
        })
    }

    fn fill_likelihoods(&mut self, y: &[f64], sigma: f64) -> Result<()> {
        let size = self.points.len();
        let scale = 1.0 / (2.0 * sigma * sigma);
        self.loglik.clear();
        self.loglik.reserve(y.len() * size);
        match self.cfg.kernel() {
            None => {
                for &yi in y {
                    self.loglik
                        .extend(self.points.iter().map(|&x| -(yi - x) * (yi - x) * scale));
                }
            }
            Some(k) => {
                let m = self.cfg.m();
                let mode = self.cfg.llr_mode;
                let mut by_label = vec![0.0; size];
                let mut bit_llrs = vec![0.0; m as usize];
                for &yi in y {
                    for (l, &x) in by_label.iter_mut().zip(&self.points) {
                        *l = -(yi - x) * (yi - x) * scale;
                    }
                    if self.cfg.compound_metric == CompoundMetric::BitwisePbp {
                        for (j, l) in bit_llrs.iter_mut().enumerate() {
                            *l = demod::pbp_slice(&by_label, j as u32 + 1, mode);
                        }
                        demod::fill_bitwise(&bit_llrs, &mut by_label);
                    }
                    // re-index by kernel input
                    self.loglik
                        .extend((0..size as u32).map(|v| by_label[k.apply(v) as usize]));
                }
            }
        }
        Ok(())
    }

    fn hard_decide(&self) -> Reception {
        let m = self.cfg.m();
        let size = self.points.len();
        let mut data = Vec::with_capacity(self.cfg.total_bits());
        for ll in self.loglik.chunks_exact(size) {
            for j in 1..=m {
                data.push(u8::from(demod::pbp_slice(ll, j, self.cfg.llr_mode) < 0.0));
            }
        }
        Reception {
            codewords: vec![data.clone()],
            data,
            exchanges: 0,
            position_errors: Vec::new(),
        }
    }

    fn decode_component(
        &mut self,
        comp: usize,
        llrs: &[f64],
        genie: Genie<'_>,
        data: &mut Vec<u8>,
        position_errors: &mut [bool],
        offset: usize,
    ) -> Result<Vec<u8>> {
        let code = &self.cfg.codes[comp];
        let dec = &mut self.decoders[comp];
        match genie {
            Genie::Full(truth) => {
                let errs = &mut position_errors[offset..offset + code.n()];
                let c = dec.decode_genie(&truth[comp], llrs, errs)?;
                data.extend(code.extract(&truth[comp]));
                Ok(c)
            }
            Genie::Feedback(truth) => {
                let out = dec.decode(code, llrs)?;
                data.extend(code.extract(&out.u));
                Ok(truth[comp].clone())
            }
            Genie::Off => {
                let out = dec.decode(code, llrs)?;
                data.extend(code.extract(&out.u));
                Ok(out.codeword)
            }
        }
    }
}

fn expect_kind(cfg: &SchemeConfig, ok: bool, receiver: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        config(format!("{receiver} used with a {} configuration", cfg.kind.name()))
    }
}

/// Parallel demodulation of all levels, one de-interleaved SC decode.
pub fn receive_plain_bicm(cfg: &SchemeConfig, y: &[f64], sigma: f64) -> Result<Reception> {
    expect_kind(cfg, cfg.kind == SchemeKind::PlainBicm, "BI-PCM receiver")?;
    Receiver::new(cfg)?.receive(y, sigma)
}

/// Multi-stage demodulation with one SC decode per level.
pub fn receive_mlpcm(cfg: &SchemeConfig, y: &[f64], sigma: f64) -> Result<Reception> {
    expect_kind(cfg, cfg.kind == SchemeKind::Mlpcm, "ML-PCM receiver")?;
    Receiver::new(cfg)?.receive(y, sigma)
}

/// `s` sequential stages, then the remaining levels in parallel.
pub fn receive_hybrid(cfg: &SchemeConfig, y: &[f64], sigma: f64) -> Result<Reception> {
    expect_kind(cfg, matches!(cfg.kind, SchemeKind::HybridPcm(_)), "Hybrid-PCM receiver")?;
    Receiver::new(cfg)?.receive(y, sigma)
}

/// Sequential decoding of the kernel inputs.
pub fn receive_compound(cfg: &SchemeConfig, y: &[f64], sigma: f64) -> Result<Reception> {
    expect_kind(
        cfg,
        matches!(cfg.kind, SchemeKind::CompoundBicm(_)),
        "compound receiver",
    )?;
    Receiver::new(cfg)?.receive(y, sigma)
}

/// Dispatches on the scheme kind.
pub fn receive(cfg: &SchemeConfig, y: &[f64], sigma: f64) -> Result<Reception> {
    Receiver::new(cfg)?.receive(y, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info_half(cfg: &SchemeConfig) -> Vec<Vec<usize>> {
        cfg.component_lengths().iter().map(|&n| (n / 2..n).collect()).collect()
    }

    #[test]
    fn layouts() {
        let c = SchemeConfig::new(SchemeKind::HybridPcm(1), 3, 512).unwrap();
        assert_eq!(c.component_lengths(), vec![512, 1024]);
        let c = SchemeConfig::new(SchemeKind::Mlpcm, 3, 512).unwrap();
        assert_eq!(c.component_lengths(), vec![512; 3]);
        let c = SchemeConfig::new(SchemeKind::PlainBicm, 4, 512).unwrap();
        assert_eq!(c.component_lengths(), vec![2048]);
        assert!(SchemeConfig::new(SchemeKind::PlainBicm, 3, 512).is_err());
        assert!(SchemeConfig::new(SchemeKind::HybridPcm(5), 4, 512).is_err());
        assert!(SchemeConfig::new(SchemeKind::CompoundBicm(Kernel::bidiagonal(3).unwrap()), 4, 8).is_err());
    }

    #[test]
    fn all_zero_transmission() {
        for kind in [
            SchemeKind::PlainBicm,
            SchemeKind::Mlpcm,
            SchemeKind::HybridPcm(2),
            SchemeKind::CompoundBicm(Kernel::bidiagonal(4).unwrap()),
        ] {
            let cfg = SchemeConfig::new(kind, 4, 8).unwrap();
            let x = cfg.transmit(&[]).unwrap();
            let x0 = cfg.constellation().point_of_label(0);
            assert!(x.iter().all(|&v| v == x0));
        }
    }

    #[test]
    fn mlpcm_level_assembly() {
        let cfg = SchemeConfig::new(SchemeKind::Mlpcm, 2, 2).unwrap();
        let labels = cfg.labels(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(labels, vec![0b01, 0b10]);
    }

    #[test]
    fn hybrid_block_interleaver_layout() {
        // 8-PAM, N = 4, s = 1: level 1 from component 1 in symbol order,
        // component 2 position p to symbol p / 2, level 2 + p % 2.
        let cfg = SchemeConfig::new(SchemeKind::HybridPcm(1), 3, 4).unwrap();
        let c1 = vec![1, 0, 0, 1];
        for p in 0..8 {
            let mut c2 = vec![0u8; 8];
            c2[p] = 1;
            let labels = cfg.labels(&[c1.clone(), c2]).unwrap();
            for (i, &b) in labels.iter().enumerate() {
                assert_eq!(b & 1, u32::from(c1[i]));
                let expect = if i == p / 2 { 1u32 << (1 + p % 2) } else { 0 };
                assert_eq!(b & !1, expect, "position {p} symbol {i}");
            }
        }
    }

    #[test]
    fn interleaver_roundtrip() {
        for kind in [InterleaverKind::Block, InterleaverKind::Random(9)] {
            let il = Interleaver::new(kind, 64);
            let v: Vec<u32> = (0..64).collect();
            assert_eq!(il.deinterleave(&il.interleave(&v)), v);
        }
        let a = Interleaver::new(InterleaverKind::Random(3), 32);
        assert_eq!(a, Interleaver::new(InterleaverKind::Random(3), 32));
        assert_ne!(a, Interleaver::new(InterleaverKind::Block, 32));
    }

    #[test]
    fn noiseless_roundtrip_and_exchange_counts() {
        for (kind, m, exch) in [
            (SchemeKind::PlainBicm, 4, 1),
            (SchemeKind::Mlpcm, 4, 4),
            (SchemeKind::HybridPcm(2), 4, 3),
            (SchemeKind::HybridPcm(1), 3, 2),
            (SchemeKind::CompoundBicm(Kernel::bidiagonal(3).unwrap()), 3, 3),
        ] {
            let cfg = SchemeConfig::new(kind, m, 16).unwrap();
            let sets = info_half(&cfg);
            let cfg = cfg.with_info_sets(&sets).unwrap();
            let data: Vec<u8> = (0..cfg.k()).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
            let y = cfg.transmit(&data).unwrap();
            let r = receive(&cfg, &y, 1e-3).unwrap();
            assert_eq!(r.data, data, "{}", cfg.fingerprint());
            assert_eq!(r.exchanges, exch);
        }
    }

    #[test]
    fn exact_compound_coincides_with_mlpcm() {
        let compound = SchemeConfig::new(SchemeKind::CompoundBicm(Kernel::bidiagonal(3).unwrap()), 3, 16)
            .unwrap()
            .with_compound_metric(CompoundMetric::SymbolExact);
        let sets = info_half(&compound);
        let compound = compound.with_info_sets(&sets).unwrap();
        let mlpcm = SchemeConfig::new(SchemeKind::Mlpcm, 3, 16)
            .unwrap()
            .with_info_sets(&sets)
            .unwrap();
        let data: Vec<u8> = (0..compound.k()).map(|i| (i % 3 == 0) as u8).collect();
        let x = compound.transmit(&data).unwrap();
        assert_eq!(x, mlpcm.transmit(&data).unwrap());
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| v + ((i * 37 % 11) as f64 - 5.0) * 0.3)
            .collect();
        let a = receive(&compound, &y, 1.4).unwrap();
        let b = receive(&mlpcm, &y, 1.4).unwrap();
        assert_eq!(a, b);
        // the bitwise metric loses information and decodes differently in general
        assert_ne!(
            compound
                .clone()
                .with_compound_metric(CompoundMetric::BitwisePbp)
                .layout_fingerprint(),
            compound.layout_fingerprint()
        );
    }

    #[test]
    fn receiver_kind_checks() {
        let cfg = SchemeConfig::new(SchemeKind::Mlpcm, 2, 4).unwrap();
        let y = cfg.transmit(&[]).unwrap();
        assert!(receive_plain_bicm(&cfg, &y, 1.0).is_err());
        assert!(receive_hybrid(&cfg, &y, 1.0).is_err());
        assert!(receive_compound(&cfg, &y, 1.0).is_err());
        assert!(receive_mlpcm(&cfg, &y, 1.0).is_ok());
        assert!(receive_mlpcm(&cfg, &y[..2], 1.0).is_err());
        assert!(cfg.transmit(&[1]).is_err());
    }

    #[test]
    fn uncoded_roundtrip() {
        let cfg = SchemeConfig::new(SchemeKind::Uncoded, 2, 4).unwrap();
        let data = vec![1, 0, 0, 1, 1, 1, 0, 0];
        let y = cfg.transmit(&data).unwrap();
        assert_eq!(receive(&cfg, &y, 0.01).unwrap().data, data);
    }

    #[test]
    fn fingerprints_distinguish() {
        let a = SchemeConfig::new(SchemeKind::HybridPcm(1), 3, 8).unwrap();
        let b = a.clone().with_interleaver(InterleaverKind::Random(1));
        assert_ne!(a.layout_fingerprint(), b.layout_fingerprint());
        let c = a.clone().with_info_sets(&[vec![1], vec![2, 3]]).unwrap();
        assert_eq!(a.layout_fingerprint(), c.layout_fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
