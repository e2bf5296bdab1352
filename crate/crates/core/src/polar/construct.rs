use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{config, domain, Result};
use crate::schemes::{Genie, Receiver, SchemeConfig, SchemeKind};
use crate::seeding::trial_rng;
use crate::sim::snr_to_sigma;

use super::transform;

/// Stream index reserved for construction trials, distinct from sweep points.
const CONSTRUCTION_POINT: u64 = u64::MAX;

/// Trials handed to one worker at a time.
const CHUNK: u64 = 256;

/// Genie-aided error counts for every bit position of a scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityProfile {
    /// Layout fingerprint of the scheme the counts belong to.
    pub fingerprint: String,
    pub design_snr_db: f64,
    pub trials: u64,
    pub seed: u64,
    /// Component code lengths in global index order.
    pub component_lengths: Vec<usize>,
    /// Decision errors per global position.
    pub error_counts: Vec<u64>,
}

impl ReliabilityProfile {
    /// Estimated decision error probability per global position.
    pub fn err_est(&self) -> Vec<f64> {
        let t = self.trials as f64;
        self.error_counts.iter().map(|&c| c as f64 / t).collect()
    }

    pub fn total_bits(&self) -> usize {
        self.error_counts.len()
    }

    /// Adds the counts of another shard of the same construction.
    pub fn merge(&mut self, other: &ReliabilityProfile) -> Result<()> {
        if self.fingerprint != other.fingerprint
            || self.component_lengths != other.component_lengths
            || self.design_snr_db != other.design_snr_db
        {
            return config("cannot merge profiles of different schemes or design SNRs");
        }
        self.trials += other.trials;
        for (a, b) in self.error_counts.iter_mut().zip(&other.error_counts) {
            *a += b;
        }
        Ok(())
    }
}

fn run_trials(cfg: &SchemeConfig, sigma: f64, seed: u64, range: std::ops::Range<u64>) -> Result<Vec<u64>> {
    let mut rx = Receiver::new(cfg)?;
    let mut counts = vec![0u64; cfg.total_bits()];
    let lengths = cfg.component_lengths();
    for t in range {
        let mut rng = trial_rng(seed, CONSTRUCTION_POINT, t);
        let u: Vec<Vec<u8>> = lengths
            .iter()
            .map(|&n| (0..n).map(|_| rng.random::<bool>() as u8).collect())
            .collect();
        let codewords: Vec<Vec<u8>> = u.iter().map(|ui| transform(ui)).collect();
        let mut y = cfg.modulate(&codewords)?;
        for yi in &mut y {
            let z: f64 = rng.sample(StandardNormal);
            *yi += sigma * z;
        }
        let r = rx.receive_with(&y, sigma, Genie::Full(&u))?;
        for (c, &e) in counts.iter_mut().zip(&r.position_errors) {
            *c += u64::from(e);
        }
    }
    Ok(counts)
}

/// Genie-aided Monte Carlo construction.
///
/// Each trial sends uniformly random inputs on every position of every
/// component through the full scheme at `design_snr_db`. The receiver runs
/// as usual except that every SC decision and every stage feedback is forced
/// to the truth; an error is counted at each position whose own hard decision
/// disagrees with the truth. Trials run in parallel and the result depends
/// only on `(cfg, design_snr_db, trials, seed)`.
pub fn construct_monte_carlo(
    cfg: &SchemeConfig,
    design_snr_db: f64,
    trials: u64,
    seed: u64,
) -> Result<ReliabilityProfile> {
    if trials == 0 {
        return domain("construction needs at least one trial");
    }
    if *cfg.kind() == SchemeKind::Uncoded {
        return config("an uncoded scheme has nothing to construct");
    }
    let sigma = snr_to_sigma(design_snr_db, cfg.constellation());
    let chunks = trials.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| run_trials(cfg, sigma, seed, c * CHUNK..((c + 1) * CHUNK).min(trials)))
        .try_reduce(
            || vec![0u64; cfg.total_bits()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok(ReliabilityProfile {
        fingerprint: cfg.layout_fingerprint(),
        design_snr_db,
        trials,
        seed,
        component_lengths: cfg.component_lengths(),
        error_counts: counts,
    })
}

/// Picks the `k_total` most reliable positions across all components jointly
/// (ties go to the lower global index) and returns them per component as
/// sorted local indices.
pub fn select_info_sets(profile: &ReliabilityProfile, k_total: usize) -> Result<Vec<Vec<usize>>> {
    let total = profile.total_bits();
    if k_total > total {
        return domain(format!("cannot select {k_total} of {total} positions"));
    }
    if profile.component_lengths.iter().sum::<usize>() != total {
        return config("profile component lengths do not cover its positions");
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by_key(|&i| (profile.error_counts[i], i));
    let mut chosen = order[..k_total].to_vec();
    chosen.sort_unstable();
    let mut sets = Vec::with_capacity(profile.component_lengths.len());
    let mut start = 0;
    for &len in &profile.component_lengths {
        sets.push(
            chosen
                .iter()
                .filter(|&&g| g >= start && g < start + len)
                .map(|&g| g - start)
                .collect(),
        );
        start += len;
    }
    Ok(sets)
}
