//! `polarcm`: construct polar coded modulation schemes, sweep BLER/BER over
//! SNR and dump labeling tables.
//!
//! Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use polarcm::constellation::{build_pam, LabelingKind};
use polarcm::demod::{Kernel, LlrMode};
use polarcm::polar::{construct_monte_carlo, ReliabilityProfile};
use polarcm::presets::{self, with_profile};
use polarcm::profile;
use polarcm::schemes::{CompoundMetric, InterleaverKind, SchemeConfig, SchemeKind};
use polarcm::sim::{sweep, SimResult, StopRule, CSV_HEADER, NOISE_METHOD};

#[derive(Debug, Parser)]
#[command(name = "polarcm", version, about = "Polar coded modulation link simulator")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the genie-aided Monte Carlo construction and write a profile.
    Construct(ConstructArgs),
    /// Simulate BLER/BER over an SNR range and emit CSV.
    Sweep(SweepArgs),
    /// Print the amplitude/label table of a PAM labeling.
    Tables(TablesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Bipcm,
    Compound,
    Mlpcm,
    Hybrid,
    Uncoded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LabelingArg {
    Gray,
    GrayMsb,
    Sp,
    Hybrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LlrArg {
    Exact,
    Maxlog,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Pbp,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FigureArg {
    #[value(name = "64qam")]
    Qam64,
    #[value(name = "256qam")]
    Qam256,
}

/// Flags describing one scheme.
#[derive(Debug, Args)]
struct SchemeFlags {
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// PAM order (2, 4, 8, 16, ...). A 2^(2m)-QAM symbol is two 2^m-PAM symbols.
    #[arg(long)]
    pam: Option<u32>,
    /// Number of sequential levels of Hybrid-PCM.
    #[arg(long)]
    s: Option<u32>,
    /// Channel uses N per codeword (PAM symbols); the code length is m·N.
    #[arg(long)]
    n: Option<usize>,
    /// Information bits per codeword.
    #[arg(long)]
    k: Option<usize>,
    /// Compound kernel: k2, k3 or k4 (default: the bidiagonal kernel of the PAM order).
    #[arg(long)]
    kernel: Option<String>,
    /// Labeling (default depends on the scheme).
    #[arg(long, value_enum)]
    labeling: Option<LabelingArg>,
    /// Interleaver of the parallel component: `block` or `random:SEED`.
    #[arg(long, default_value = "block")]
    interleaver: String,
    #[arg(long, value_enum, default_value = "exact")]
    llr: LlrArg,
    /// Soft input of the compound kernel stage.
    #[arg(long, value_enum, default_value = "pbp")]
    compound_metric: MetricArg,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    #[arg(long)]
    design_snr: f64,
    /// Construction trials.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Profile output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Run a ready-made comparison; scheme flags are not allowed with it.
    #[arg(long, value_enum, conflicts_with_all = ["scheme", "pam", "n", "k", "profile", "construct_inline"])]
    figure: Option<FigureArg>,
    /// SNR range in dB: `a:step:b` (inclusive) or a single value.
    #[arg(long)]
    snr: Option<String>,
    /// Maximum trials per SNR point.
    #[arg(long)]
    trials_cap: Option<u64>,
    #[arg(long)]
    min_block_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Profile written by `construct`.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Construct the codes before simulating instead of reading a profile.
    #[arg(long)]
    construct_inline: bool,
    /// Design SNR for --construct-inline.
    #[arg(long)]
    design_snr: Option<f64>,
    /// Construction trials for --construct-inline.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// CSV output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TablesArgs {
    #[arg(long)]
    pam: u32,
    #[arg(long, value_enum, default_value = "gray")]
    labeling: LabelingArg,
    #[arg(long)]
    s: Option<u32>,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<polarcm::Error> for Failure {
    fn from(e: polarcm::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn pam_exponent(pam: u32) -> Result<u32, Failure> {
    if pam < 2 || !pam.is_power_of_two() || pam > 1 << 16 {
        return usage(format!("--pam {pam}: expected a power of two between 2 and 65536"));
    }
    Ok(pam.trailing_zeros())
}

fn labeling(arg: LabelingArg, s: Option<u32>, m: u32) -> Result<LabelingKind, Failure> {
    Ok(match arg {
        LabelingArg::Gray => LabelingKind::GrayLsbFirst,
        LabelingArg::GrayMsb => LabelingKind::GrayMsbFirst,
        LabelingArg::Sp => LabelingKind::SetPartition,
        LabelingArg::Hybrid => {
            let Some(s) = s else {
                return usage("--labeling hybrid needs --s");
            };
            if s > m {
                return usage(format!("--s {s} exceeds the {m} bit levels of {}-PAM", 1u32 << m));
            }
            LabelingKind::Hybrid(s)
        }
    })
}

fn parse_interleaver(s: &str) -> Result<InterleaverKind, Failure> {
    if s == "block" {
        return Ok(InterleaverKind::Block);
    }
    match s.strip_prefix("random:").map(str::parse) {
        Some(Ok(seed)) => Ok(InterleaverKind::Random(seed)),
        _ => usage(format!("--interleaver `{s}`: expected `block` or `random:SEED`")),
    }
}

fn parse_kernel(s: &str, m: u32) -> Result<Kernel, Failure> {
    let size = match s {
        "k2" => 2,
        "k3" => 3,
        "k4" => 4,
        other => return usage(format!("--kernel `{other}`: expected k2, k3 or k4")),
    };
    if size != m {
        return usage(format!("--kernel {s} does not fit {}-PAM ({m} bit levels)", 1u32 << m));
    }
    Ok(Kernel::bidiagonal(m)?)
}

/// Parses `a:step:b` (inclusive) or a single number.
fn parse_snr(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<f64> = match parts.iter().map(|p| p.trim().parse()).collect() {
        Ok(v) => v,
        Err(_) => return usage(format!("--snr `{s}`: expected a:step:b or a number")),
    };
    match nums[..] {
        [a] if a.is_finite() => Ok(vec![a]),
        [a, step, b] if a.is_finite() && b.is_finite() && step > 0.0 && b >= a => {
            let count = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| a + i as f64 * step).collect())
        }
        _ => usage(format!("--snr `{s}`: expected a:step:b with step > 0 and b >= a")),
    }
}

/// Scheme layout (all components frozen) from flags.
fn layout(f: &SchemeFlags) -> Result<SchemeConfig, Failure> {
    let Some(scheme) = f.scheme else {
        return usage("--scheme is required");
    };
    let Some(pam) = f.pam else {
        return usage("--pam is required");
    };
    let Some(n) = f.n else {
        return usage("--n is required");
    };
    let m = pam_exponent(pam)?;
    let kind = match scheme {
        SchemeArg::Bipcm => SchemeKind::PlainBicm,
        SchemeArg::Mlpcm => SchemeKind::Mlpcm,
        SchemeArg::Uncoded => SchemeKind::Uncoded,
        SchemeArg::Compound => {
            let kernel = match &f.kernel {
                Some(k) => parse_kernel(k, m)?,
                None => Kernel::bidiagonal(m)?,
            };
            SchemeKind::CompoundBicm(kernel)
        }
        SchemeArg::Hybrid => {
            let Some(s) = f.s else {
                return usage("--scheme hybrid needs --s");
            };
            if s > m {
                return usage(format!("--s {s} exceeds the {m} bit levels of {pam}-PAM"));
            }
            SchemeKind::HybridPcm(s)
        }
    };
    if f.kernel.is_some() && scheme != SchemeArg::Compound {
        return usage("--kernel only applies to --scheme compound");
    }
    let mut cfg = SchemeConfig::new(kind, m, n).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(l) = f.labeling {
        cfg = cfg.with_labeling(labeling(l, f.s, m)?)?;
    }
    let llr = match f.llr {
        LlrArg::Exact => LlrMode::Exact,
        LlrArg::Maxlog => LlrMode::MaxLog,
    };
    let metric = match f.compound_metric {
        MetricArg::Pbp => CompoundMetric::BitwisePbp,
        MetricArg::Exact => CompoundMetric::SymbolExact,
    };
    Ok(cfg
        .with_interleaver(parse_interleaver(&f.interleaver)?)
        .with_llr_mode(llr)
        .with_compound_metric(metric))
}

fn required_k(f: &SchemeFlags, cfg: &SchemeConfig) -> Result<usize, Failure> {
    let Some(k) = f.k else {
        return usage("--k is required");
    };
    if k == 0 || k > cfg.total_bits() {
        return usage(format!("--k {k}: expected 1..={}", cfg.total_bits()));
    }
    Ok(k)
}

fn rate_report(cfg: &SchemeConfig, p: &ReliabilityProfile) -> String {
    let ks: Vec<String> = cfg.codes().iter().map(|c| c.k().to_string()).collect();
    let rates: Vec<String> = cfg
        .codes()
        .iter()
        .map(|c| format!("{:.4}", c.k() as f64 / c.n() as f64))
        .collect();
    let zeros = p.error_counts.iter().filter(|&&c| c == 0).count();
    let mut out = format!(
        "# scheme: {}\n# design_snr_db: {}\n# construction: {} trials, seed {}\n# k per component: {}\n# rate per component: {}\n# overall rate: {:.4}\n",
        cfg.fingerprint(),
        p.design_snr_db,
        p.trials,
        p.seed,
        ks.join(","),
        rates.join(","),
        cfg.rate()
    );
    if zeros > cfg.k() {
        out.push_str(&format!(
            "# warning: {zeros} positions saw no errors, more than k = {}; ties were broken by index\n",
            cfg.k()
        ));
    }
    out
}

fn cmd_construct(a: &ConstructArgs) -> Result<(), Failure> {
    let layout = layout(&a.scheme)?;
    if *layout.kind() == SchemeKind::Uncoded {
        return usage("an uncoded scheme has nothing to construct");
    }
    let k = required_k(&a.scheme, &layout)?;
    if a.trials == 0 {
        return usage("--trials must be at least 1");
    }
    let p = construct_monte_carlo(&layout, a.design_snr, a.trials, a.seed)?;
    profile::write(&a.out, &p).with_context(|| format!("writing {}", a.out.display()))?;
    let cfg = with_profile(layout, &p, k)?;
    print!("{}", rate_report(&cfg, &p));
    println!("# profile: {}", a.out.display());
    Ok(())
}

fn stop_rule(a: &SweepArgs, base: StopRule) -> Result<StopRule, Failure> {
    let stop = StopRule {
        min_block_errors: a.min_block_errors.unwrap_or(base.min_block_errors),
        max_trials: a.trials_cap.unwrap_or(base.max_trials),
    };
    if stop.max_trials == 0 {
        return usage("--trials-cap must be at least 1");
    }
    Ok(stop)
}

fn csv(rows: &[(SchemeConfig, Vec<SimResult>)]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (cfg, results) in rows {
        for r in results {
            out.push_str(&r.csv_row(cfg));
            out.push('\n');
        }
    }
    out
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let override_snr = a.snr.as_deref().map(parse_snr).transpose()?;
    let mut rows = Vec::new();
    if let Some(fig) = a.figure {
        let mut p = presets::figure(match fig {
            FigureArg::Qam64 => "64qam",
            FigureArg::Qam256 => "256qam",
        })?;
        p.stop = stop_rule(a, p.stop)?;
        if let Some(seed) = a.seed {
            p.seed = seed;
        }
        if let Some(snr) = &override_snr {
            for c in &mut p.curves {
                c.snr_db = snr.clone();
            }
        }
        eprint!("{}", p.describe());
        eprintln!("# noise: {NOISE_METHOD}");
        for c in &p.curves {
            let (cfg, prof) = p.build(c)?;
            eprint!("{}", rate_report(&cfg, &prof));
            let results = sweep(&cfg, &c.snr_db, p.stop, p.seed)?;
            rows.push((cfg, results));
        }
    } else {
        let Some(snr) = override_snr else {
            return usage("--snr is required without --figure");
        };
        let layout = layout(&a.scheme)?;
        let cfg = if *layout.kind() == SchemeKind::Uncoded {
            layout
        } else {
            let k = required_k(&a.scheme, &layout)?;
            let prof = match (&a.profile, a.construct_inline) {
                (Some(_), true) => return usage("--profile and --construct-inline are exclusive"),
                (None, false) => return usage("a coded scheme needs --profile or --construct-inline"),
                (Some(path), false) => {
                    let p = profile::read(path).with_context(|| format!("reading {}", path.display()))?;
                    profile::check_matches(&p, &layout)
                        .with_context(|| format!("profile {} was built for another scheme", path.display()))?;
                    p
                }
                (None, true) => {
                    let Some(design) = a.design_snr else {
                        return usage("--construct-inline needs --design-snr");
                    };
                    if a.trials == 0 {
                        return usage("--trials must be at least 1");
                    }
                    construct_monte_carlo(&layout, design, a.trials, a.seed.unwrap_or(1))?
                }
            };
            let cfg = with_profile(layout, &prof, k)?;
            eprint!("{}", rate_report(&cfg, &prof));
            cfg
        };
        eprintln!("# noise: {NOISE_METHOD}");
        let stop = stop_rule(a, StopRule::default())?;
        let results = sweep(&cfg, &snr, stop, a.seed.unwrap_or(1))?;
        rows.push((cfg, results));
    }
    let text = csv(&rows);
    match &a.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_tables(a: &TablesArgs) -> Result<(), Failure> {
    let m = pam_exponent(a.pam)?;
    if a.s.is_some() && a.labeling != LabelingArg::Hybrid {
        return usage("--s only applies to --labeling hybrid");
    }
    let c = build_pam(m, labeling(a.labeling, a.s, m)?)?;
    print!("{}", c.table());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.cmd {
        Command::Construct(a) => cmd_construct(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Tables(a) => cmd_tables(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
