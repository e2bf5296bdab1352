//! Ready-made experiment setups for the 64-QAM and 256-QAM comparisons.
//!
//! Every default that affects results (design SNRs, construction trials and
//! seeds, SNR grids, stopping rule, interleaver) lives here and is printed by
//! [`FigurePreset::describe`]. Design SNRs sit near the middle of each
//! scheme's observed waterfall; they are toolkit choices.

use std::fmt::Write as _;

use crate::demod::Kernel;
use crate::error::{config, Result};
use crate::polar::{construct_monte_carlo, select_info_sets, ReliabilityProfile};
use crate::schemes::{InterleaverKind, SchemeConfig, SchemeKind};
use crate::sim::StopRule;

/// Seed of the interleaver used by every preset with a parallel component.
pub const PRESET_INTERLEAVER: InterleaverKind = InterleaverKind::Random(1);

/// One curve of a preset.
#[derive(Clone, Debug)]
pub struct Curve {
    pub kind: SchemeKind,
    pub design_snr_db: f64,
    pub snr_db: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct FigurePreset {
    pub name: &'static str,
    pub m: u32,
    pub n_uses: usize,
    pub k: usize,
    pub construction_trials: u64,
    pub construction_seed: u64,
    pub stop: StopRule,
    pub seed: u64,
    pub curves: Vec<Curve>,
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Looks up a preset by name: `64qam` or `256qam`.
pub fn figure(name: &str) -> Result<FigurePreset> {
    let stop = StopRule {
        min_block_errors: 100,
        max_trials: 20_000,
    };
    match name {
        "64qam" => Ok(FigurePreset {
            name: "64qam",
            m: 3,
            n_uses: 512,
            k: 768,
            construction_trials: 100_000,
            construction_seed: 7,
            stop,
            seed: 1,
            curves: vec![
                Curve {
                    kind: SchemeKind::Mlpcm,
                    design_snr_db: 11.25,
                    snr_db: grid(10.75, 11.75, 0.25),
                },
                Curve {
                    kind: SchemeKind::HybridPcm(1),
                    design_snr_db: 11.5,
                    snr_db: grid(11.0, 12.0, 0.25),
                },
                Curve {
                    kind: SchemeKind::CompoundBicm(Kernel::bidiagonal(3)?),
                    design_snr_db: 11.75,
                    snr_db: grid(11.25, 12.25, 0.25),
                },
            ],
        }),
        "256qam" => Ok(FigurePreset {
            name: "256qam",
            m: 4,
            n_uses: 512,
            k: 1024,
            construction_trials: 100_000,
            construction_seed: 7,
            stop,
            seed: 1,
            curves: vec![
                Curve {
                    kind: SchemeKind::Mlpcm,
                    design_snr_db: 14.5,
                    snr_db: grid(14.0, 15.0, 0.25),
                },
                Curve {
                    kind: SchemeKind::HybridPcm(2),
                    design_snr_db: 14.75,
                    snr_db: grid(14.25, 15.25, 0.25),
                },
                Curve {
                    kind: SchemeKind::CompoundBicm(Kernel::bidiagonal(4)?),
                    design_snr_db: 15.5,
                    snr_db: grid(15.0, 16.0, 0.25),
                },
                Curve {
                    kind: SchemeKind::PlainBicm,
                    design_snr_db: 16.5,
                    snr_db: grid(16.0, 17.5, 0.25),
                },
            ],
        }),
        other => config(format!("unknown figure preset `{other}` (expected 64qam or 256qam)")),
    }
}

impl FigurePreset {
    /// Scheme layout of `curve` with all components frozen.
    pub fn layout(&self, curve: &Curve) -> Result<SchemeConfig> {
        Ok(SchemeConfig::new(curve.kind.clone(), self.m, self.n_uses)?.with_interleaver(PRESET_INTERLEAVER))
    }

    /// Constructs the codes of `curve` and returns the ready scheme with its
    /// profile.
    pub fn build(&self, curve: &Curve) -> Result<(SchemeConfig, ReliabilityProfile)> {
        let layout = self.layout(curve)?;
        let profile = construct_monte_carlo(
            &layout,
            curve.design_snr_db,
            self.construction_trials,
            self.construction_seed,
        )?;
        let cfg = with_profile(layout, &profile, self.k)?;
        Ok((cfg, profile))
    }

    /// Human-readable list of every default, one `# key: value` line each.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# preset: {}", self.name);
        let _ = writeln!(
            out,
            "# code: ({}, {}) on {}-PAM x2, N = {}",
            self.m as usize * self.n_uses,
            self.k,
            1u32 << self.m,
            self.n_uses
        );
        let _ = writeln!(
            out,
            "# construction: {} genie-aided trials, seed {}",
            self.construction_trials, self.construction_seed
        );
        let _ = writeln!(
            out,
            "# stop: {} block errors or {} trials per point",
            self.stop.min_block_errors, self.stop.max_trials
        );
        let _ = writeln!(out, "# seed: {}", self.seed);
        let _ = writeln!(out, "# interleaver: {}", PRESET_INTERLEAVER.name());
        for c in &self.curves {
            let snrs: Vec<String> = c.snr_db.iter().map(|s| s.to_string()).collect();
            let _ = writeln!(
                out,
                "# curve: {} design_snr_db={} snr_db={}",
                c.kind.name(),
                c.design_snr_db,
                snrs.join(",")
            );
        }
        out
    }
}

/// Applies the `k` most reliable positions of `profile` to `layout`.
pub fn with_profile(layout: SchemeConfig, profile: &ReliabilityProfile, k: usize) -> Result<SchemeConfig> {
    crate::profile::check_matches(profile, &layout)?;
    let sets = select_info_sets(profile, k)?;
    layout.with_info_sets(&sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_consistent() {
        for name in ["64qam", "256qam"] {
            let p = figure(name).unwrap();
            for c in &p.curves {
                let cfg = p.layout(c).unwrap();
                assert_eq!(cfg.total_bits(), 2 * p.k);
                assert!(c.snr_db.windows(2).all(|w| w[0] < w[1]));
            }
            assert!(p.describe().contains("# curve: mlpcm"));
        }
        assert_eq!(figure("64qam").unwrap().curves.len(), 3);
        assert_eq!(figure("256qam").unwrap().curves.len(), 4);
        assert!(figure("qpsk").is_err());
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(10.0, 11.0, 0.25), vec![10.0, 10.25, 10.5, 10.75, 11.0]);
    }
}
