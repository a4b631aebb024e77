//! Flat key=value experiment configuration.
//!
//! A configuration can come from a file (one `key=value` per line, `#`
//! comments), from command-line overrides, or both; overrides are applied
//! after the file. The canonical text rendering fixes one line per
//! parameter in sorted order, and its SHA-256 is the identity stamped
//! into every artifact. The output directory and the check switch do not
//! enter the hash: they say where results go and how strictly they are
//! judged, not what experiment ran.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::dyadic::Dyadic;
use crate::families::Family;

use super::LabError;

/// All parameters a runner can consume.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub n_lo: u32,
    pub n_hi: u32,
    /// Tree depth override for direction-list inputs.
    pub depth: Option<u32>,
    /// Separation parameter for strips and coarsened trees.
    pub eta: Dyadic,
    /// Vertical strip `[x0, x1]`; commands fall back to their natural
    /// strip when unset.
    pub strip: Option<(Dyadic, Dyadic)>,
    /// Monte-Carlo sample count.
    pub samples: u64,
    /// Number of random sticky maps per scaling point.
    pub draws: u32,
    pub seed: u64,
    /// Scan grids carry `2^grid_bits` points, nudged off cell boundaries.
    pub grid_bits: u32,
    /// Query abscissa for point-based commands.
    pub x: Option<Dyadic>,
    /// Query ordinate for point-based commands.
    pub y: Option<Dyadic>,
    /// Explicit direction list; replaces the family tree in tree-info.
    pub directions: Option<Vec<Dyadic>>,
    pub out: Option<PathBuf>,
    pub check: bool,
    pub cap_enum: u64,
    pub cap_depth: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            family: Family::QuarterCantor,
            n_lo: 2,
            n_hi: 2,
            depth: None,
            eta: Dyadic::pow2(-1),
            strip: None,
            samples: 10_000,
            draws: 200,
            seed: 0,
            grid_bits: 4,
            x: None,
            y: None,
            directions: None,
            out: None,
            check: false,
            cap_enum: 1 << 20,
            cap_depth: 24,
        }
    }
}

impl ExperimentConfig {
    /// Parses a configuration file on top of the defaults.
    pub fn from_file(path: &std::path::Path) -> Result<ExperimentConfig, LabError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = ExperimentConfig::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    /// Applies `key=value` lines; later lines win.
    pub fn apply_text(&mut self, text: &str) -> Result<(), LabError> {
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(LabError::Config(format!(
                    "line {}: expected key=value, got {line:?}",
                    index + 1
                )));
            };
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies one parameter by name; used for files and flag overrides.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        let bad = |what: &str| LabError::Config(format!("invalid {what}: {value:?}"));
        match key {
            "family" => self.family = value.parse().map_err(|_| bad("family"))?,
            "N" | "n" => {
                let (lo, hi) = parse_range(value).ok_or_else(|| bad("N range"))?;
                if lo < 1 || lo > hi {
                    return Err(bad("N range"));
                }
                self.n_lo = lo;
                self.n_hi = hi;
            }
            "depth" => self.depth = Some(value.parse().map_err(|_| bad("depth"))?),
            "eta" => {
                let eta: Dyadic = value.parse().map_err(|_| bad("eta"))?;
                if !eta.is_positive() {
                    return Err(bad("eta (must be positive)"));
                }
                self.eta = eta;
            }
            "strip" => {
                let (a, b) = value.split_once("..").ok_or_else(|| bad("strip"))?;
                let x0: Dyadic = a.trim().parse().map_err(|_| bad("strip"))?;
                let x1: Dyadic = b.trim().parse().map_err(|_| bad("strip"))?;
                if x0 >= x1 {
                    return Err(bad("strip (x0 must be below x1)"));
                }
                self.strip = Some((x0, x1));
            }
            "samples" => self.samples = value.parse().map_err(|_| bad("samples"))?,
            "draws" => {
                self.draws = value.parse().map_err(|_| bad("draws"))?;
                if self.draws == 0 {
                    return Err(bad("draws (must be positive)"));
                }
            }
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "grid" | "grid_bits" => {
                self.grid_bits = value.parse().map_err(|_| bad("grid_bits"))?;
                if self.grid_bits > 16 {
                    return Err(bad("grid_bits (at most 16)"));
                }
            }
            "x" => self.x = Some(value.parse().map_err(|_| bad("x"))?),
            "y" => self.y = Some(value.parse().map_err(|_| bad("y"))?),
            "directions" => {
                let mut dirs = Vec::new();
                for part in value.split(',') {
                    dirs.push(part.trim().parse().map_err(|_| bad("directions"))?);
                }
                if dirs.is_empty() {
                    return Err(bad("directions"));
                }
                self.directions = Some(dirs);
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "check" => {
                self.check = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(bad("check")),
                }
            }
            "cap-enum" | "cap_enum" => self.cap_enum = value.parse().map_err(|_| bad("cap-enum"))?,
            "cap-depth" | "cap_depth" => {
                self.cap_depth = value.parse().map_err(|_| bad("cap-depth"))?
            }
            other => {
                return Err(LabError::Config(format!("unknown parameter {other:?}")));
            }
        }
        Ok(())
    }

    /// The inclusive order range.
    pub fn n_range(&self) -> std::ops::RangeInclusive<u32> {
        self.n_lo..=self.n_hi
    }

    /// The configured strip, or the command's natural default.
    pub fn strip_or(&self, default: (Dyadic, Dyadic)) -> (Dyadic, Dyadic) {
        self.strip.clone().unwrap_or(default)
    }

    /// One line per experiment parameter, sorted by key. Output location
    /// and check mode are deliberately absent.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let optional = |v: &Option<Dyadic>| v.as_ref().map(Dyadic::to_string).unwrap_or_default();
        let _ = writeln!(out, "cap_depth={}", self.cap_depth);
        let _ = writeln!(out, "cap_enum={}", self.cap_enum);
        let _ = writeln!(out, "depth={}", match self.depth {
            Some(d) => d.to_string(),
            None => String::new(),
        });
        let dirs = self
            .directions
            .as_ref()
            .map(|d| {
                d.iter()
                    .map(Dyadic::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .unwrap_or_default();
        let _ = writeln!(out, "directions={dirs}");
        let _ = writeln!(out, "draws={}", self.draws);
        let _ = writeln!(out, "eta={}", self.eta);
        let _ = writeln!(out, "family={}", self.family);
        let _ = writeln!(out, "grid_bits={}", self.grid_bits);
        let _ = writeln!(out, "n={}..{}", self.n_lo, self.n_hi);
        let _ = writeln!(out, "samples={}", self.samples);
        let _ = writeln!(out, "seed={}", self.seed);
        let strip = self
            .strip
            .as_ref()
            .map(|(a, b)| format!("{a}..{b}"))
            .unwrap_or_default();
        let _ = writeln!(out, "strip={strip}");
        let _ = writeln!(out, "x={}", optional(&self.x));
        let _ = writeln!(out, "y={}", optional(&self.y));
        out
    }

    /// Hex SHA-256 of the canonical text: the identity of the experiment.
    pub fn sha256_hex(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}

fn parse_range(value: &str) -> Option<(u32, u32)> {
    if let Some((a, b)) = value.split_once("..") {
        let lo = a.trim().parse().ok()?;
        let hi = b.trim().parse().ok()?;
        Some((lo, hi))
    } else {
        let n = value.trim().parse().ok()?;
        Some((n, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_canonical_text() {
        let config = ExperimentConfig::default();
        let text = config.canonical_text();
        let mut reparsed = ExperimentConfig::default();
        for line in text.lines() {
            let (key, value) = line.split_once('=').unwrap();
            if value.is_empty() {
                continue;
            }
            reparsed.apply(key, value).unwrap();
        }
        assert_eq!(reparsed, config);
    }

    #[test]
    fn hash_ignores_output_and_check() {
        let mut a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        b.out = Some(PathBuf::from("/tmp/elsewhere"));
        b.check = true;
        assert_eq!(a.sha256_hex(), b.sha256_hex());
        a.apply("seed", "7").unwrap();
        assert_ne!(a.sha256_hex(), b.sha256_hex());
    }

    #[test]
    fn parses_ranges_strips_and_directions() {
        let mut config = ExperimentConfig::default();
        config
            .apply_text("# comment\n\nN=1..5\nstrip=1..2\ndirections=1/2^1, 1/2^2, 1/2^3\neta=1/2^3\n")
            .unwrap();
        assert_eq!(config.n_range(), 1..=5);
        let (x0, x1) = config.strip.clone().unwrap();
        assert_eq!(x0, Dyadic::one());
        assert_eq!(x1, Dyadic::from_int(2));
        assert_eq!(config.directions.as_ref().unwrap().len(), 3);
        assert_eq!(config.eta, Dyadic::pow2(-3));
    }

    #[test]
    fn rejects_malformed_input() {
        let mut config = ExperimentConfig::default();
        assert!(config.apply("family", "unheard-of").is_err());
        assert!(config.apply("N", "5..2").is_err());
        assert!(config.apply("N", "0").is_err());
        assert!(config.apply("strip", "2..1").is_err());
        assert!(config.apply("eta", "0").is_err());
        assert!(config.apply("mystery", "1").is_err());
        assert!(config.apply_text("no equals sign").is_err());
    }
}
