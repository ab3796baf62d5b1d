//! Run configuration: optional JSON config file merged under command-line
//! flags, plus the run manifest emitted next to file output.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use sievelab::{RegularParams, SievingPrefix};

/// Flat bag of optional values a config file may carry; flags override each.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub prefix: Option<String>,
    pub regular: Option<String>,
    pub residues: Option<String>,
    pub len: Option<usize>,
    pub seed: Option<u64>,
    pub depth: Option<usize>,
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub z: Option<i64>,
    pub n_max: Option<usize>,
    pub offsets: Option<String>,
    pub d: Option<usize>,
    pub m: Option<u64>,
    pub g: Option<usize>,
    pub survivors: Option<usize>,
    pub limit: Option<u64>,
    pub format: Option<String>,
    pub output: Option<PathBuf>,
    pub bitmap_cap: Option<u64>,
    pub scan_cap: Option<u64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))
            }
        }
    }
}

/// "p:r,p:r,..." into a validated prefix.
pub fn parse_prefix_spec(spec: &str) -> Result<SievingPrefix> {
    let mut primes = Vec::new();
    let mut residues = Vec::new();
    for (i, item) in spec.split(',').enumerate() {
        let item = item.trim();
        let Some((p, r)) = item.split_once(':') else {
            bail!("class {i} must look like p:r, got {item:?}");
        };
        primes.push(p.trim().parse::<u64>().context("prime")?);
        residues.push(r.trim().parse::<u64>().context("residue")?);
    }
    Ok(SievingPrefix::new(&primes, &residues)?)
}

/// "alpha,kappa" into regular parameters.
pub fn parse_regular(spec: &str) -> Result<RegularParams> {
    let Some((alpha, kappa)) = spec.split_once(',') else {
        bail!("regular parameters must look like alpha,kappa, got {spec:?}");
    };
    let alpha: usize = alpha.trim().parse().context("alpha")?;
    let kappa: u64 = kappa.trim().parse().context("kappa")?;
    if alpha < 1 || kappa < 1 {
        bail!("alpha and kappa must be positive");
    }
    Ok(RegularParams::new(alpha, kappa))
}

pub fn parse_u64_list(spec: &str) -> Result<Vec<u64>> {
    spec.split(',')
        .map(|s| s.trim().parse::<u64>().context("list entry"))
        .collect()
}

pub fn parse_offsets(spec: &str) -> Result<Vec<i64>> {
    spec.split(',')
        .map(|s| s.trim().parse::<i64>().context("offset"))
        .collect()
}

/// The sieving prefix a command works on, from either an explicit class list
/// or regular parameters with explicit or seeded residues.
pub fn resolve_prefix(
    prefix: Option<&str>,
    regular: Option<&str>,
    residues: Option<&str>,
    len: Option<usize>,
    seed: Option<u64>,
) -> Result<SievingPrefix> {
    match (prefix, regular) {
        (Some(_), Some(_)) => bail!("give either an explicit prefix or regular parameters"),
        (Some(spec), None) => parse_prefix_spec(spec),
        (None, Some(spec)) => {
            let params = parse_regular(spec)?;
            match (residues, len) {
                (Some(residues), _) => Ok(params.prefix(&parse_u64_list(residues)?)?),
                (None, Some(len)) => {
                    let seed = seed.unwrap_or(0);
                    Ok(params.seeded_prefix(len, seed)?)
                }
                (None, None) => bail!("regular parameters need --residues or --len"),
            }
        }
        (None, None) => bail!("a prefix is required (--prefix or --regular)"),
    }
}

/// Manifest written next to file output; rerunning the same resolved config
/// reproduces the data rows byte for byte.
pub fn write_manifest(
    output: &Path,
    command: &str,
    resolved: &serde_json::Value,
    rows: u64,
) -> Result<PathBuf> {
    let config_text = serde_json::to_string(resolved)?;
    let digest = Sha256::digest(config_text.as_bytes());
    let manifest = serde_json::json!({
        "command": command,
        "config": resolved,
        "version": env!("CARGO_PKG_VERSION"),
        "created": chrono::Utc::now().to_rfc3339(),
        "input_sha256": format!("{digest:x}"),
        "rows": rows,
    });
    let path = manifest_path(output);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing manifest {}", path.display()))?;
    Ok(path)
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
