//! PAM constellations and their bit labelings.
//!
//! Symbols are indexed by ascending amplitude, `index = (x + 2^m - 1) / 2`,
//! and every labeling rule is stated against that index. A label packs bit
//! level `j` (1-based, leftmost in printed tables) into bit `j - 1` of a `u32`.

use std::fmt;

use crate::error::{domain, Result};

/// Largest supported order exponent.
pub const MAX_M: u32 = 16;

/// An `m`-bit symbol label. Bit level 1 is printed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Label {
    bits: u32,
    m: u32,
}

impl Label {
    pub fn new(bits: u32, m: u32) -> Result<Self> {
        if m == 0 || m > MAX_M {
            return domain(format!("label width {m} outside 1..={MAX_M}"));
        }
        if bits >> m != 0 {
            return domain(format!("label {bits:#b} has more than {m} bits"));
        }
        Ok(Self { bits, m })
    }

    /// Builds a label from bit levels given level 1 first.
    pub fn from_levels(levels: &[u8]) -> Result<Self> {
        let mut bits = 0u32;
        for (j, &b) in levels.iter().enumerate() {
            if b > 1 {
                return domain(format!("bit value {b} at level {}", j + 1));
            }
            bits |= u32::from(b) << j;
        }
        Self::new(bits, levels.len() as u32)
    }

    /// Packed form: level `j` lives in bit `j - 1`.
    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn width(self) -> u32 {
        self.m
    }

    /// Bit at 1-based `level`.
    pub fn level(self, level: u32) -> u8 {
        debug_assert!(level >= 1 && level <= self.m);
        ((self.bits >> (level - 1)) & 1) as u8
    }

    pub fn levels(self) -> Vec<u8> {
        (1..=self.m).map(|j| self.level(j)).collect()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 1..=self.m {
            f.write_str(if self.level(j) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Bit-level order of the reflected binary Gray code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GrayOrder {
    /// Least significant Gray bit at level 1 (LSB-BRGC).
    LsbFirst,
    /// Most significant Gray bit at level 1.
    MsbFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LabelingKind {
    GrayLsbFirst,
    GrayMsbFirst,
    SetPartition,
    /// First `s` levels set-partitioned, remaining levels Gray within each subset.
    Hybrid(u32),
}

impl LabelingKind {
    /// Short stable name used in fingerprints and on the command line.
    pub fn name(self) -> String {
        match self {
            LabelingKind::GrayLsbFirst => "gray".into(),
            LabelingKind::GrayMsbFirst => "gray-msb".into(),
            LabelingKind::SetPartition => "sp".into(),
            LabelingKind::Hybrid(s) => format!("hybrid{s}"),
        }
    }
}

fn check_index(index: u32, m: u32) -> Result<()> {
    if m == 0 || m > MAX_M {
        return domain(format!("order exponent {m} outside 1..={MAX_M}"));
    }
    if index >> m != 0 {
        return domain(format!("symbol index {index} out of range for {} points", 1u64 << m));
    }
    Ok(())
}

fn reverse_bits(v: u32, m: u32) -> u32 {
    v.reverse_bits() >> (32 - m)
}

/// Reflected Gray label of the `index`-th smallest amplitude.
pub fn gray_label(index: u32, m: u32, order: GrayOrder) -> Result<Label> {
    check_index(index, m)?;
    let g = index ^ (index >> 1);
    let bits = match order {
        GrayOrder::LsbFirst => g,
        GrayOrder::MsbFirst => reverse_bits(g, m),
    };
    Label::new(bits, m)
}

/// Set-partition label: level `j` carries bit `j - 1` of the index.
pub fn sp_label(index: u32, m: u32) -> Result<Label> {
    check_index(index, m)?;
    Label::new(index, m)
}

/// Hybrid label with split `s`.
///
/// Levels `1..=s` follow the set-partition rule. Symbols sharing those `s` bits
/// are spaced `2^s` indices apart, so the position of a symbol inside its subset
/// is `index >> s`; the remaining levels carry the LSB-first Gray label of that
/// position over the `2^(m-s)`-point sub-constellation.
pub fn hybrid_label(index: u32, m: u32, s: u32) -> Result<Label> {
    check_index(index, m)?;
    if s > m {
        return domain(format!("split {s} exceeds order exponent {m}"));
    }
    let prefix = index & ((1u32 << s) - 1);
    let suffix = if s == m {
        0
    } else {
        gray_label(index >> s, m - s, GrayOrder::LsbFirst)?.bits()
    };
    Label::new(prefix | (suffix << s), m)
}

fn label_for(kind: LabelingKind, index: u32, m: u32) -> Result<Label> {
    match kind {
        LabelingKind::GrayLsbFirst => gray_label(index, m, GrayOrder::LsbFirst),
        LabelingKind::GrayMsbFirst => gray_label(index, m, GrayOrder::MsbFirst),
        LabelingKind::SetPartition => sp_label(index, m),
        LabelingKind::Hybrid(s) => hybrid_label(index, m, s),
    }
}

/// A labeled `2^m`-PAM constellation with points `{±1, ±3, …, ±(2^m − 1)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PamConstellation {
    m: u32,
    kind: LabelingKind,
    points: Vec<f64>,
    label_of: Vec<u32>,
    index_of: Vec<u32>,
}

impl PamConstellation {
    pub fn new(m: u32, kind: LabelingKind) -> Result<Self> {
        if m == 0 || m > MAX_M {
            return domain(format!("order exponent {m} outside 1..={MAX_M}"));
        }
        if let LabelingKind::Hybrid(s) = kind {
            if s > m {
                return domain(format!("split {s} exceeds order exponent {m}"));
            }
        }
        let size = 1u32 << m;
        let points = (0..size).map(|i| f64::from(2 * i) - f64::from(size - 1)).collect();
        let label_of = (0..size)
            .map(|i| label_for(kind, i, m).map(Label::bits))
            .collect::<Result<Vec<_>>>()?;
        let mut index_of = vec![u32::MAX; size as usize];
        for (i, &b) in label_of.iter().enumerate() {
            if index_of[b as usize] != u32::MAX {
                return domain(format!("labeling {kind:?} is not bijective at label {b}"));
            }
            index_of[b as usize] = i as u32;
        }
        Ok(Self {
            m,
            kind,
            points,
            label_of,
            index_of,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn kind(&self) -> LabelingKind {
        self.kind
    }

    /// Amplitudes in ascending order.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn label_of(&self, index: usize) -> Label {
        Label {
            bits: self.label_of[index],
            m: self.m,
        }
    }

    pub fn index_of(&self, label: u32) -> usize {
        self.index_of[label as usize] as usize
    }

    /// Amplitude carrying the packed label `label`.
    pub fn point_of_label(&self, label: u32) -> f64 {
        self.points[self.index_of(label)]
    }

    /// Amplitudes indexed by packed label.
    pub fn points_by_label(&self) -> Vec<f64> {
        (0..self.size() as u32).map(|b| self.point_of_label(b)).collect()
    }

    /// `E[x^2] = (4^m - 1) / 3` under uniform inputs.
    pub fn average_energy(&self) -> f64 {
        ((4f64).powi(self.m as i32) - 1.0) / 3.0
    }

    /// One line per point, ascending amplitude: `<amplitude> <bits level-1-first>`.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for (i, &x) in self.points.iter().enumerate() {
            out.push_str(&format!("{} {}\n", x as i64, self.label_of(i)));
        }
        out
    }
}

/// Convenience wrapper around [`PamConstellation::new`].
pub fn build_pam(m: u32, kind: LabelingKind) -> Result<PamConstellation> {
    PamConstellation::new(m, kind)
}
