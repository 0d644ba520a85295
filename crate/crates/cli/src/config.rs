//! Command-line options, optional JSON config file, and the merged settings.
//!
//! Precedence: command line, then `--config` file, then built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use membench::blur::{default_sigma, BlurVariant};
use membench::report::Suite;
use membench::timing::RepetitionPolicy;
use membench::transpose::TransposeVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

/// Every option is optional so the same struct can be read from a config file
/// and layered under the command line.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Opts {
    /// JSON file with default values for any of these options
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Device profile (JSON)
    #[arg(long, global = true)]
    pub profile: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Measured repetitions per configuration
    #[arg(long, global = true)]
    pub reps: Option<usize>,

    /// Untimed warm-up runs per configuration
    #[arg(long, global = true)]
    pub warmup: Option<usize>,

    /// Stop sampling once this many seconds have been spent measuring
    #[arg(long, global = true)]
    pub time_budget: Option<f64>,

    /// Matrix size for transpose (repeatable)
    #[arg(long = "size", global = true)]
    #[serde(rename = "size")]
    pub sizes: Vec<usize>,

    /// Transpose block size; default derived from the smallest cache
    #[arg(long, global = true)]
    pub block: Option<usize>,

    /// Threads for parallel variants; default is the profile's core count
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Odd Gaussian filter size
    #[arg(long, global = true)]
    pub filter_size: Option<usize>,

    /// Gaussian sigma; default derived from the filter size
    #[arg(long, global = true)]
    pub sigma: Option<f64>,

    /// Input image (binary PPM)
    #[arg(long, global = true)]
    pub image: Option<PathBuf>,

    /// Synthetic image pattern: random[:seed], constant[:v], impulse, gradient
    #[arg(long, global = true)]
    pub synthetic: Option<String>,

    /// Synthetic image width
    #[arg(long = "width", visible_alias = "w", global = true)]
    #[serde(rename = "width")]
    pub w: Option<usize>,

    /// Synthetic image height
    #[arg(long = "height", visible_alias = "h", global = true)]
    #[serde(rename = "height")]
    pub h: Option<usize>,

    /// Synthetic image channels (1 or 3)
    #[arg(long, global = true)]
    pub channels: Option<usize>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Comma-separated variant list
    #[arg(long, global = true, value_delimiter = ',')]
    pub variants: Vec<String>,

    /// STREAM results (CSV or JSON) to take the utilization baseline from
    #[arg(long, global = true)]
    pub baseline: Option<PathBuf>,

    /// Skip a suite: stream, transpose or blur (repeatable)
    #[arg(long, global = true, value_delimiter = ',')]
    pub skip: Vec<String>,

    /// Do not compute utilization
    #[arg(long, global = true)]
    #[serde(default)]
    pub no_utilization: bool,

    /// Result files to chart (repeatable)
    #[arg(long = "input", global = true)]
    #[serde(rename = "input")]
    pub inputs: Vec<PathBuf>,
}

impl Opts {
    /// Fills every unset field of `self` from `file`.
    fn layer_over(mut self, file: Opts) -> Opts {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if self.$f.is_none() { self.$f = file.$f; }
            )*};
        }
        take!(
            profile, out, format, reps, warmup, time_budget, block, threads, filter_size, sigma, image, synthetic,
            w, h, channels, seed, baseline
        );
        macro_rules! take_vec {
            ($($f:ident),*) => {$(
                if self.$f.is_empty() { self.$f = file.$f; }
            )*};
        }
        take_vec!(sizes, variants, skip, inputs);
        self.no_utilization |= file.no_utilization;
        self
    }
}

pub const DEFAULT_SIZES: [usize; 2] = [8192, 16384];
pub const DEFAULT_FILTER: usize = 19;
pub const DEFAULT_WIDTH: usize = 2544;
pub const DEFAULT_HEIGHT: usize = 2027;
pub const DEFAULT_SEED: u64 = 42;

/// Settings after merging and validation.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub profile: Option<PathBuf>,
    pub out: PathBuf,
    pub format: Format,
    pub warmup: usize,
    pub reps: usize,
    pub time_budget: Option<f64>,
    pub sizes: Vec<usize>,
    pub block: Option<usize>,
    pub threads: Option<usize>,
    pub filter_size: usize,
    pub sigma: f64,
    pub image: Option<PathBuf>,
    pub synthetic: String,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub seed: u64,
    #[serde(serialize_with = "labels_t")]
    pub transpose_variants: Vec<TransposeVariant>,
    #[serde(serialize_with = "labels_b")]
    pub blur_variants: Vec<BlurVariant>,
    pub baseline: Option<PathBuf>,
    pub skip: Vec<Suite>,
    pub utilization: bool,
    pub inputs: Vec<PathBuf>,
}

fn labels_t<S: serde::Serializer>(v: &[TransposeVariant], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.label()))
}

fn labels_b<S: serde::Serializer>(v: &[BlurVariant], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.label()))
}

fn load_file(path: &Path) -> Result<Opts> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// Names in `--variants` may belong to either kernel family; each command
/// uses the ones it knows.
pub fn resolve(cli: Opts) -> Result<Settings> {
    let opts = match &cli.config {
        Some(p) => {
            let file = load_file(p)?;
            cli.layer_over(file)
        }
        None => cli,
    };

    let mut transpose_variants = Vec::new();
    let mut blur_variants = Vec::new();
    for v in &opts.variants {
        let t = TransposeVariant::parse(v);
        let b = BlurVariant::parse(v);
        if t.is_none() && b.is_none() {
            bail!("unknown variant '{v}'");
        }
        transpose_variants.extend(t);
        blur_variants.extend(b);
    }
    if opts.variants.is_empty() {
        transpose_variants = TransposeVariant::ALL.to_vec();
        blur_variants = BlurVariant::ALL.to_vec();
    }

    let mut skip = Vec::new();
    for s in &opts.skip {
        skip.push(match s.to_ascii_lowercase().as_str() {
            "stream" => Suite::Stream,
            "transpose" => Suite::Transpose,
            "blur" => Suite::Blur,
            _ => bail!("unknown suite '{s}' in --skip"),
        });
    }

    let warmup = opts.warmup.unwrap_or(RepetitionPolicy::default().warmup_runs);
    let reps = opts.reps.unwrap_or(RepetitionPolicy::default().measured_runs);
    if reps == 0 {
        bail!("--reps must be at least 1");
    }
    if let Some(t) = opts.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
    }
    if opts.sizes.contains(&0) {
        bail!("--size must be positive");
    }
    if opts.block == Some(0) {
        bail!("--block must be positive");
    }
    let filter_size = opts.filter_size.unwrap_or(DEFAULT_FILTER);
    if filter_size % 2 == 0 {
        bail!("--filter-size must be odd, got {filter_size}");
    }

    Ok(Settings {
        profile: opts.profile,
        out: opts.out.unwrap_or_else(|| PathBuf::from("results")),
        format: opts.format.unwrap_or(Format::Both),
        warmup,
        reps,
        time_budget: opts.time_budget,
        sizes: if opts.sizes.is_empty() { DEFAULT_SIZES.to_vec() } else { opts.sizes },
        block: opts.block,
        threads: opts.threads,
        filter_size,
        sigma: opts.sigma.unwrap_or_else(|| default_sigma(filter_size)),
        image: opts.image,
        synthetic: opts.synthetic.unwrap_or_else(|| "random".into()),
        width: opts.w.unwrap_or(DEFAULT_WIDTH),
        height: opts.h.unwrap_or(DEFAULT_HEIGHT),
        channels: opts.channels.unwrap_or(3),
        seed: opts.seed.unwrap_or(DEFAULT_SEED),
        transpose_variants,
        blur_variants,
        baseline: opts.baseline,
        skip,
        utilization: !opts.no_utilization,
        inputs: opts.inputs,
    })
}

impl Settings {
    pub fn policy(&self) -> Result<RepetitionPolicy> {
        let p = RepetitionPolicy::new(self.warmup, self.reps)?;
        Ok(match self.time_budget {
            Some(b) => p.with_budget(b)?,
            None => p,
        })
    }

    pub fn skips(&self, s: Suite) -> bool {
        self.skip.contains(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_wins_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"reps": 3, "warmup": 0, "size": [64], "filter-size": 5}"#).unwrap();
        let cli = Opts {
            config: Some(path),
            reps: Some(7),
            ..Default::default()
        };
        let s = resolve(cli).unwrap();
        assert_eq!((s.reps, s.warmup, s.sizes.clone(), s.filter_size), (7, 0, vec![64], 5));
    }

    #[test]
    fn unknown_key_in_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"repz": 3}"#).unwrap();
        let cli = Opts {
            config: Some(path),
            ..Default::default()
        };
        assert!(resolve(cli).is_err());
    }

    #[test]
    fn variant_names_split_by_family() {
        let cli = Opts {
            variants: vec!["naive".into(), "dynamic".into(), "1d_kernels".into()],
            ..Default::default()
        };
        let s = resolve(cli).unwrap();
        assert_eq!(s.transpose_variants, vec![TransposeVariant::Naive, TransposeVariant::Dynamic]);
        assert_eq!(s.blur_variants, vec![BlurVariant::Naive, BlurVariant::Kernels1D]);
    }

    #[test]
    fn bad_values() {
        for cli in [
            Opts {
                variants: vec!["fast".into()],
                ..Default::default()
            },
            Opts {
                filter_size: Some(4),
                ..Default::default()
            },
            Opts {
                reps: Some(0),
                ..Default::default()
            },
            Opts {
                skip: vec!["gemm".into()],
                ..Default::default()
            },
        ] {
            assert!(resolve(cli).is_err());
        }
    }
}
