//! AWGN channel and Monte Carlo error-rate estimation.
//!
//! Trial `t` of sweep point `p` draws all of its randomness (data bits, then
//! one normal sample per channel use) from its own ChaCha stream keyed by
//! `(seed, p, t)`. Trials are evaluated in parallel batches and then scanned
//! in index order, so the stopping point and every count are independent of
//! the worker count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::constellation::PamConstellation;
use crate::error::{domain, Result};
use crate::schemes::{Receiver, SchemeConfig, SchemeKind};
use crate::seeding::trial_rng;

/// How Gaussian noise samples are produced; reported in output metadata.
pub const NOISE_METHOD: &str = "ziggurat (rand_distr::StandardNormal) on ChaCha8 streams";

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Real AWGN with standard deviation `sigma` per dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelModel {
    sigma: f64,
}

impl ChannelModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain(format!("noise standard deviation must be positive, got {sigma}"));
        }
        Ok(Self { sigma })
    }

    pub fn from_snr_db(snr_db: f64, c: &PamConstellation) -> Result<Self> {
        Self::new(snr_to_sigma(snr_db, c))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn add_noise<R: Rng>(&self, x: &mut [f64], rng: &mut R) {
        for xi in x {
            let z: f64 = rng.sample(StandardNormal);
            *xi += self.sigma * z;
        }
    }
}

/// `sigma = sqrt(E[x^2] / 10^(snr_db / 10))` with `E[x^2] = (4^m - 1) / 3`.
pub fn snr_to_sigma(snr_db: f64, c: &PamConstellation) -> f64 {
    (c.average_energy() / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// `Eb/N0` in dB for a per-dimension SNR: `SNR / (2 R m)`.
pub fn ebn0_db(snr_db: f64, cfg: &SchemeConfig) -> f64 {
    let bits_per_dim = cfg.rate() * f64::from(cfg.m());
    snr_db - 10.0 * (2.0 * bits_per_dim).log10()
}

/// When to stop simulating one SNR point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopRule {
    pub min_block_errors: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_block_errors: 100,
            max_trials: 100_000,
        }
    }
}

/// Error statistics for one SNR point.
#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub bler: f64,
    pub ber: f64,
    /// 95% half-widths from the normal approximation to the binomial.
    pub bler_ci95: f64,
    pub ber_ci95: f64,
    pub seed: u64,
    pub fingerprint: String,
    /// Demodulator-to-decoder exchanges per received block.
    pub exchanges: usize,
}

pub const CSV_HEADER: &str =
    "scheme,pam,n,k,s,snr_db,ebn0_db,trials,block_errors,bler,bler_ci95,ber,ber_ci95,seed,fingerprint";

impl SimResult {
    /// One CSV row matching [`CSV_HEADER`].
    pub fn csv_row(&self, cfg: &SchemeConfig) -> String {
        let scheme = match cfg.kind() {
            SchemeKind::HybridPcm(_) => "hybrid".to_string(),
            SchemeKind::CompoundBicm(_) => "compound".to_string(),
            other => other.name(),
        };
        let s = match cfg.kind() {
            SchemeKind::HybridPcm(s) => s.to_string(),
            _ => String::new(),
        };
        format!(
            "{scheme},{},{},{},{s},{},{:.4},{},{},{:e},{:e},{:e},{:e},{},{}",
            cfg.constellation().size(),
            cfg.n_uses(),
            cfg.k(),
            self.snr_db,
            self.ebn0_db,
            self.trials,
            self.block_errors,
            self.bler,
            self.bler_ci95,
            self.ber,
            self.ber_ci95,
            self.seed,
            self.fingerprint
        )
    }
}

fn half_width(p: f64, n: f64) -> f64 {
    if n > 0.0 {
        Z95 * (p * (1.0 - p) / n).sqrt()
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Outcome {
    block_error: bool,
    bit_errors: u64,
    exchanges: usize,
}

fn one_trial(
    rx: &mut Receiver<'_>,
    cfg: &SchemeConfig,
    ch: ChannelModel,
    seed: u64,
    point: u64,
    t: u64,
) -> Result<Outcome> {
    let mut rng = trial_rng(seed, point, t);
    let data: Vec<u8> = (0..cfg.k()).map(|_| rng.random::<bool>() as u8).collect();
    let mut y = cfg.transmit(&data)?;
    ch.add_noise(&mut y, &mut rng);
    let r = rx.receive(&y, ch.sigma())?;
    let bit_errors = data.iter().zip(&r.data).filter(|(a, b)| a != b).count() as u64;
    Ok(Outcome {
        block_error: bit_errors > 0,
        bit_errors,
        exchanges: r.exchanges,
    })
}

/// Simulates one point with per-trial streams keyed by `(seed, point, t)`.
pub fn run_point_indexed(cfg: &SchemeConfig, snr_db: f64, stop: StopRule, seed: u64, point: u64) -> Result<SimResult> {
    if stop.max_trials == 0 {
        return domain("max_trials must be at least 1");
    }
    let ch = ChannelModel::from_snr_db(snr_db, cfg.constellation())?;
    let batch = (rayon::current_num_threads() as u64 * 32).max(64);
    let (mut trials, mut block_errors, mut bit_errors, mut exchanges) = (0u64, 0u64, 0u64, 0usize);
    'outer: while trials < stop.max_trials {
        let end = (trials + batch).min(stop.max_trials);
        let outcomes = (trials..end)
            .into_par_iter()
            .map_init(
                || Receiver::new(cfg),
                |rx, t| match rx {
                    Ok(rx) => one_trial(rx, cfg, ch, seed, point, t),
                    Err(e) => Err(crate::Error::Config(e.to_string())),
                },
            )
            .collect::<Result<Vec<_>>>()?;
        for o in outcomes {
            trials += 1;
            bit_errors += o.bit_errors;
            block_errors += u64::from(o.block_error);
            exchanges = o.exchanges;
            if stop.min_block_errors > 0 && block_errors >= stop.min_block_errors {
                break 'outer;
            }
        }
    }
    let n = trials as f64;
    let bits = n * cfg.k() as f64;
    let bler = block_errors as f64 / n;
    let ber = if bits > 0.0 { bit_errors as f64 / bits } else { 0.0 };
    Ok(SimResult {
        snr_db,
        ebn0_db: ebn0_db(snr_db, cfg),
        trials,
        block_errors,
        bit_errors,
        bler,
        ber,
        bler_ci95: half_width(bler, n),
        ber_ci95: half_width(ber, bits),
        seed,
        fingerprint: cfg.fingerprint(),
        exchanges,
    })
}

/// Simulates one SNR point (sweep index 0).
pub fn run_point(cfg: &SchemeConfig, snr_db: f64, stop: StopRule, seed: u64) -> Result<SimResult> {
    run_point_indexed(cfg, snr_db, stop, seed, 0)
}

/// Runs every SNR in `snr_list`; point `i` of the input list uses stream
/// index `i`. Results come back in ascending SNR order.
pub fn sweep(cfg: &SchemeConfig, snr_list: &[f64], stop: StopRule, seed: u64) -> Result<Vec<SimResult>> {
    let mut out = snr_list
        .iter()
        .enumerate()
        .map(|(i, &snr)| run_point_indexed(cfg, snr, stop, seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    Ok(out)
}

/// SNR at which the BLER curve crosses `target`, by linear interpolation of
/// `log10(BLER)` between the two bracketing points. `results` must be sorted
/// by SNR. Returns `None` when the curve never crosses the target.
pub fn required_snr(results: &[SimResult], target: f64) -> Option<f64> {
    results.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.bler >= target && b.bler < target {
            if b.bler <= 0.0 {
                // no errors at the upper point: fall back to the upper SNR
                return Some(b.snr_db);
            }
            let (la, lb, lt) = (a.bler.log10(), b.bler.log10(), target.log10());
            Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_pam, LabelingKind};

    #[test]
    fn sigma_examples() {
        let c2 = build_pam(1, LabelingKind::SetPartition).unwrap();
        let c4 = build_pam(2, LabelingKind::SetPartition).unwrap();
        let c16 = build_pam(4, LabelingKind::SetPartition).unwrap();
        assert!((snr_to_sigma(0.0, &c2) - 1.0).abs() < 1e-12);
        assert!((snr_to_sigma(0.0, &c4) - 5f64.sqrt()).abs() < 1e-12);
        assert!((snr_to_sigma(10.0, &c16) - (85.0f64 / 10.0).sqrt()).abs() < 1e-12);
        assert!(ChannelModel::new(0.0).is_err());
    }

    #[test]
    fn noiseless_limit_has_no_errors() {
        let cfg = SchemeConfig::new(SchemeKind::Mlpcm, 2, 8)
            .unwrap()
            .with_info_sets(&[vec![6, 7], vec![3, 5, 6, 7]])
            .unwrap();
        let r = run_point(
            &cfg,
            300.0,
            StopRule {
                min_block_errors: 1,
                max_trials: 200,
            },
            5,
        )
        .unwrap();
        assert_eq!(r.trials, 200);
        assert_eq!(r.block_errors, 0);
        assert_eq!(r.bler, 0.0);
    }

    #[test]
    fn stops_at_error_target() {
        let cfg = SchemeConfig::new(SchemeKind::Uncoded, 1, 16).unwrap();
        let r = run_point(
            &cfg,
            0.0,
            StopRule {
                min_block_errors: 10,
                max_trials: 10_000,
            },
            1,
        )
        .unwrap();
        assert_eq!(r.block_errors, 10);
        assert!(r.trials < 100);
        assert!(r.block_errors * cfg.k() as u64 >= r.bit_errors);
    }

    #[test]
    fn sweep_edge_cases() {
        let cfg = SchemeConfig::new(SchemeKind::Uncoded, 1, 8).unwrap();
        let stop = StopRule {
            min_block_errors: 5,
            max_trials: 500,
        };
        assert!(sweep(&cfg, &[], stop, 3).unwrap().is_empty());
        let single = sweep(&cfg, &[4.0], stop, 3).unwrap();
        assert_eq!(single, vec![run_point(&cfg, 4.0, stop, 3).unwrap()]);
        let out = sweep(&cfg, &[6.0, 2.0], stop, 3).unwrap();
        assert_eq!(out[0].snr_db, 2.0);
        assert!(run_point(
            &cfg,
            1.0,
            StopRule {
                min_block_errors: 1,
                max_trials: 0
            },
            1
        )
        .is_err());
    }

    fn fake(snr: f64, bler: f64) -> SimResult {
        SimResult {
            snr_db: snr,
            ebn0_db: snr,
            trials: 1,
            block_errors: 0,
            bit_errors: 0,
            bler,
            ber: 0.0,
            bler_ci95: 0.0,
            ber_ci95: 0.0,
            seed: 0,
            fingerprint: String::new(),
            exchanges: 0,
        }
    }

    #[test]
    fn interpolates_required_snr() {
        let pts = [fake(10.0, 0.5), fake(11.0, 0.1), fake(12.0, 0.001)];
        let r = required_snr(&pts, 0.01).unwrap();
        assert!((r - 11.5).abs() < 1e-12);
        assert_eq!(required_snr(&pts[..1], 0.01), None);
        assert_eq!(required_snr(&[fake(1.0, 0.5), fake(2.0, 0.0)], 0.01), Some(2.0));
    }

    #[test]
    fn ebn0_conversion() {
        let cfg = SchemeConfig::new(SchemeKind::Uncoded, 1, 4).unwrap();
        // R = 1, m = 1: Eb/N0 = SNR / 2
        assert!((ebn0_db(3.0, &cfg) - (3.0 - 10.0 * 2f64.log10())).abs() < 1e-12);
    }
}
