//! Run configuration: defaults, a flat `key = value` file, and overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::RadialKernel;
use crate::perturbation::{GRADIENT_STEP, HESSIAN_STEP, MIN_STEP};
use crate::variational::{COARSE_N, REFINE_ITERS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("format must be csv or json, got {s:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// Which energy profiles a subcommand runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileChoice {
    Squared,
    Linear,
    Both,
    /// The configured kernel as `phi`.
    Kernel,
}

impl FromStr for ProfileChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(ProfileChoice::Squared),
            "linear" => Ok(ProfileChoice::Linear),
            "both" => Ok(ProfileChoice::Both),
            "kernel" => Ok(ProfileChoice::Kernel),
            _ => Err(Error::Config(format!("profile must be squared, linear, both or kernel, got {s:?}"))),
        }
    }
}

impl fmt::Display for ProfileChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileChoice::Squared => "squared",
            ProfileChoice::Linear => "linear",
            ProfileChoice::Both => "both",
            ProfileChoice::Kernel => "kernel",
        })
    }
}

/// Default `d` grid for the gap sweep.
pub const PERTURB_D_GRID: [f64; 7] = [1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4];
/// Default `d` grid for the local maximality scan.
pub const VARIATIONAL_D_GRID: [f64; 2] = [1e-2, 1e-3];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub r_max: f64,
    pub kl_bound: i64,
    /// `(gradient, hessian)` finite-difference steps.
    pub fd_steps: (f64, f64),
    pub directions: usize,
    /// `None` picks the subcommand's own grid.
    pub d_grid: Option<Vec<f64>>,
    pub kernel: String,
    pub seed: u64,
    pub output_format: OutputFormat,
    pub profile: ProfileChoice,
    pub coarse_n: usize,
    pub refine_iters: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            r_max: 8.0,
            kl_bound: 100,
            fd_steps: (GRADIENT_STEP, HESSIAN_STEP),
            directions: 16,
            d_grid: None,
            kernel: "default".into(),
            seed: 0,
            output_format: OutputFormat::Csv,
            profile: ProfileChoice::Both,
            coarse_n: COARSE_N,
            refine_iters: REFINE_ITERS,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| num(key, s)).collect()
}

impl RunConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "r_max" => self.r_max = num(key, v)?,
            "kl_bound" => self.kl_bound = num(key, v)?,
            "fd_steps" => {
                let s = parse_list(key, v)?;
                if s.len() != 2 {
                    return Err(Error::Config(format!("fd_steps needs two values, got {v:?}")));
                }
                self.fd_steps = (s[0], s[1]);
            }
            "fd_gradient_step" => self.fd_steps.0 = num(key, v)?,
            "fd_hessian_step" => self.fd_steps.1 = num(key, v)?,
            "directions" => self.directions = num(key, v)?,
            "d_grid" => self.d_grid = Some(parse_list(key, v)?),
            "kernel" => self.kernel = v.to_string(),
            "seed" => self.seed = num(key, v)?,
            "format" | "output_format" => self.output_format = v.parse()?,
            "profile" => self.profile = v.parse()?,
            "coarse_n" => self.coarse_n = num(key, v)?,
            "refine_iters" => self.refine_iters = num(key, v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Apply a flat config file: `key = value` lines, `#` comments.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_str(&text)
    }

    pub fn d_grid_or(&self, default: &[f64]) -> Vec<f64> {
        self.d_grid.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn parsed_kernel(&self) -> Result<RadialKernel> {
        self.kernel.parse()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.r_max > 0.0) || !self.r_max.is_finite() {
            return bad(format!("r_max must be positive, got {}", self.r_max));
        }
        if self.kl_bound <= 0 || self.kl_bound > 100_000 {
            return bad(format!("kl_bound must be in 1..=100000, got {}", self.kl_bound));
        }
        for (name, s) in [("gradient", self.fd_steps.0), ("hessian", self.fd_steps.1)] {
            if !(s >= MIN_STEP) || !s.is_finite() || s >= 0.1 {
                return bad(format!("{name} step must lie in [{MIN_STEP}, 0.1), got {s}"));
            }
        }
        if self.directions == 0 {
            return bad("directions must be positive".into());
        }
        if let Some(g) = &self.d_grid {
            if g.is_empty() {
                return bad("d_grid is empty".into());
            }
            if g.iter().any(|&d| !(d >= 0.0) || !d.is_finite() || d > 0.1) {
                return bad(format!("d_grid entries must lie in [0, 0.1], got {g:?}"));
            }
            if g.windows(2).any(|w| !(w[0] > w[1])) {
                return bad(format!("d_grid must be strictly decreasing, got {g:?}"));
            }
        }
        if self.coarse_n < 16 || self.coarse_n > 4096 {
            return bad(format!("coarse_n must be in 16..=4096, got {}", self.coarse_n));
        }
        if self.refine_iters > 30 {
            return bad(format!("refine_iters must be at most 30, got {}", self.refine_iters));
        }
        self.parsed_kernel().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Resolved settings as `(key, value)` pairs in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let list = |v: &[f64]| v.iter().map(|d| format!("{d:e}")).collect::<Vec<_>>().join(",");
        vec![
            ("r_max", format!("{}", self.r_max)),
            ("kl_bound", self.kl_bound.to_string()),
            ("fd_steps", format!("{:e},{:e}", self.fd_steps.0, self.fd_steps.1)),
            ("directions", self.directions.to_string()),
            ("d_grid", self.d_grid.as_deref().map(list).unwrap_or_else(|| "auto".into())),
            ("kernel", self.kernel.clone()),
            ("seed", self.seed.to_string()),
            ("format", self.output_format.to_string()),
            ("profile", self.profile.to_string()),
            ("coarse_n", self.coarse_n.to_string()),
            ("refine_iters", self.refine_iters.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn file_round_trip() {
        let mut c = RunConfig::default();
        c.apply_str("# comment\nr_max = 3.5\nd_grid = 1e-2, 1e-3 # trailing\nkernel = gauss:rate=2\nformat=json\n\nfd_steps = 1e-6, 1e-3\n")
            .unwrap();
        assert_eq!(c.r_max, 3.5);
        assert_eq!(c.d_grid, Some(vec![1e-2, 1e-3]));
        assert_eq!(c.kernel, "gauss:rate=2");
        assert_eq!(c.output_format, OutputFormat::Json);
        assert_eq!(c.fd_steps, (1e-6, 1e-3));
        c.validate().unwrap();
        let mut d = RunConfig::default();
        for (k, v) in c.entries() {
            if v != "auto" {
                d.set(k, &v).unwrap();
            }
        }
        assert_eq!(c, d);
    }

    #[test]
    fn rejects() {
        let mut c = RunConfig::default();
        assert!(c.apply_str("bogus = 1").is_err());
        assert!(c.apply_str("r_max").is_err());
        assert!(c.apply_str("r_max = x").is_err());
        for (k, v) in [
            ("r_max", "-1"),
            ("fd_gradient_step", "1e-30"),
            ("d_grid", "1e-3,1e-2"),
            ("d_grid", "1e-2,1e-2"),
            ("kernel", "nope"),
            ("directions", "0"),
            ("coarse_n", "8"),
        ] {
            let mut c = RunConfig::default();
            c.set(k, v).unwrap();
            assert!(c.validate().is_err(), "{k} = {v}");
        }
        let mut c = RunConfig::default();
        c.set("d_grid", "1e-2, 0").unwrap();
        c.validate().unwrap();
    }
}
