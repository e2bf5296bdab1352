//! Reliability profile files and an on-disk cache keyed by scheme and design point.
//!
//! File layout:
//!
//! ```text
//! # polarcm-profile v1
//! # fingerprint: mlpcm/m3/N512/s-/lab-sp/il-block/llr-exact
//! # design_snr_db: 12
//! # trials: 100000
//! # seed: 7
//! # components: 512,512,512
//! 0 0.41233
//! 1 0.30061
//! ...
//! ```
//!
//! Data lines are `global_index err_estimate` in ascending index order.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{config, Error, Result};
use crate::polar::{construct_monte_carlo, ReliabilityProfile};
use crate::schemes::SchemeConfig;

const MAGIC: &str = "# polarcm-profile v1";

pub fn to_text(p: &ReliabilityProfile) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("# fingerprint: {}\n", p.fingerprint));
    out.push_str(&format!("# design_snr_db: {}\n", p.design_snr_db));
    out.push_str(&format!("# trials: {}\n", p.trials));
    out.push_str(&format!("# seed: {}\n", p.seed));
    let comps: Vec<String> = p.component_lengths.iter().map(usize::to_string).collect();
    out.push_str(&format!("# components: {}\n", comps.join(",")));
    for (i, e) in p.err_est().iter().enumerate() {
        out.push_str(&format!("{i} {e}\n"));
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn from_text(text: &str) -> Result<ReliabilityProfile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(parse_err(1, "missing profile header")),
    }
    let mut header = |key: &str| -> Result<(usize, String)> {
        let (no, line) = lines.next().ok_or_else(|| parse_err(0, format!("missing `{key}`")))?;
        let value = line
            .strip_prefix("# ")
            .and_then(|l| l.strip_prefix(key))
            .and_then(|l| l.strip_prefix(": "))
            .ok_or_else(|| parse_err(no, format!("expected `# {key}: ...`")))?;
        Ok((no, value.to_string()))
    };
    let (_, fingerprint) = header("fingerprint")?;
    let (no, v) = header("design_snr_db")?;
    let design_snr_db: f64 = v.parse().map_err(|_| parse_err(no, "bad design SNR"))?;
    let (no, v) = header("trials")?;
    let trials: u64 = v.parse().map_err(|_| parse_err(no, "bad trial count"))?;
    let (no, v) = header("seed")?;
    let seed: u64 = v.parse().map_err(|_| parse_err(no, "bad seed"))?;
    let (no, v) = header("components")?;
    let component_lengths = v
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| parse_err(no, "bad component list"))?;
    if trials == 0 {
        return Err(parse_err(no, "zero trials"));
    }
    let mut error_counts = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let idx: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(no, "bad index"))?;
        let est: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(no, "bad estimate"))?;
        if idx != error_counts.len() {
            return Err(parse_err(
                no,
                format!("expected index {}, found {idx}", error_counts.len()),
            ));
        }
        if !(0.0..=1.0).contains(&est) {
            return Err(parse_err(no, "estimate outside [0, 1]"));
        }
        error_counts.push((est * trials as f64).round() as u64);
    }
    if component_lengths.iter().sum::<usize>() != error_counts.len() {
        return Err(parse_err(0, "component lengths do not match the number of positions"));
    }
    Ok(ReliabilityProfile {
        fingerprint,
        design_snr_db,
        trials,
        seed,
        component_lengths,
        error_counts,
    })
}

pub fn write(path: &Path, p: &ReliabilityProfile) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, to_text(p))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<ReliabilityProfile> {
    from_text(&fs::read_to_string(path)?)
}

/// Fails unless `p` was built for the layout of `cfg`.
pub fn check_matches(p: &ReliabilityProfile, cfg: &SchemeConfig) -> Result<()> {
    let want = cfg.layout_fingerprint();
    if p.fingerprint != want {
        return config(format!(
            "profile fingerprint `{}` does not match scheme `{want}`",
            p.fingerprint
        ));
    }
    if p.component_lengths != cfg.component_lengths() {
        return config("profile component lengths do not match the scheme");
    }
    Ok(())
}

/// Directory of profiles keyed by (layout fingerprint, design SNR, trials, seed).
#[derive(Clone, Debug)]
pub struct ProfileCache {
    dir: PathBuf,
}

impl ProfileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, cfg: &SchemeConfig, design_snr_db: f64, trials: u64, seed: u64) -> PathBuf {
        let safe: String = cfg
            .layout_fingerprint()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        self.dir
            .join(format!("{safe}__snr{design_snr_db}__t{trials}__seed{seed}.profile"))
    }

    /// Reads the cached profile or constructs and stores it.
    pub fn load_or_construct(
        &self,
        cfg: &SchemeConfig,
        design_snr_db: f64,
        trials: u64,
        seed: u64,
    ) -> Result<ReliabilityProfile> {
        let path = self.path_for(cfg, design_snr_db, trials, seed);
        if path.exists() {
            let p = read(&path)?;
            check_matches(&p, cfg)?;
            if p.design_snr_db == design_snr_db && p.trials == trials && p.seed == seed {
                return Ok(p);
            }
        }
        let p = construct_monte_carlo(cfg, design_snr_db, trials, seed)?;
        write(&path, &p)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::SchemeKind;

    fn sample() -> ReliabilityProfile {
        ReliabilityProfile {
            fingerprint: "mlpcm/m2/N2/s-/lab-sp/il-block/llr-exact".into(),
            design_snr_db: 7.5,
            trials: 3,
            seed: 11,
            component_lengths: vec![2, 2],
            error_counts: vec![3, 1, 2, 0],
        }
    }

    #[test]
    fn text_roundtrip() {
        let p = sample();
        let text = to_text(&p);
        assert!(text.starts_with("# polarcm-profile v1\n# fingerprint: mlpcm/"));
        assert!(text.ends_with("0 1\n1 0.3333333333333333\n2 0.6666666666666666\n3 0\n"));
        assert_eq!(from_text(&text).unwrap(), p);
    }

    #[test]
    fn rejects_malformed() {
        assert!(from_text("garbage").is_err());
        let text = to_text(&sample()).replace("2 0.6666666666666666", "5 0.5");
        assert!(from_text(&text).is_err());
        let text = to_text(&sample()).replace("# trials: 3", "# trials: x");
        assert!(from_text(&text).is_err());
    }

    #[test]
    fn cache_roundtrip_and_fingerprint_check() {
        let dir = std::env::temp_dir().join(format!("polarcm-cache-{}", std::process::id()));
        let cache = ProfileCache::new(&dir);
        let cfg = SchemeConfig::new(SchemeKind::Mlpcm, 2, 4).unwrap();
        let a = cache.load_or_construct(&cfg, 6.0, 300, 1).unwrap();
        assert!(cache.path_for(&cfg, 6.0, 300, 1).exists());
        let b = cache.load_or_construct(&cfg, 6.0, 300, 1).unwrap();
        assert_eq!(a, b);
        let other = SchemeConfig::new(SchemeKind::HybridPcm(1), 2, 4).unwrap();
        assert!(check_matches(&a, &other).is_err());
        fs::remove_dir_all(&dir).ok();
    }
}
