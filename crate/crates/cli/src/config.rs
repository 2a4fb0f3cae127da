//! Experiment configuration: defaults, key=value config files, and the
//! string forms shared between flags and files.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rdslab_core::{SamplerMethod, DEFAULT_EXACT_LIMIT};

/// How the cut distance of each record is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSolver {
    /// Exact below the limit, heuristic with this many restarts above.
    Auto { restarts: usize },
    /// Always exact; errors when a record exceeds the limit.
    Exact,
    /// Always the heuristic lower bound.
    Heuristic { restarts: usize },
}

pub const DEFAULT_HEURISTIC_RESTARTS: usize = 64;

/// Full description of one experiment run. Together with nothing else, a
/// config fixes every output byte.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Kernel descriptor, e.g. `kind=product a=1.0 b=1.0`.
    pub kernel: String,
    /// Step-count exponent: `N = round(lambda * n^(1+alpha))`.
    pub alpha: f64,
    pub lambda: f64,
    /// Strictly increasing bin counts.
    pub n_list: Vec<usize>,
    pub replicates: u64,
    pub master_seed: u64,
    pub sampler: SamplerMethod,
    pub cut_solver: CutSolver,
    pub exact_limit: usize,
    /// Oracle chains use `m = m_multiplier * n` states.
    pub m_multiplier: usize,
    /// Report measured wall times in CSV output instead of zeros; off by
    /// default so that reruns are byte-identical.
    pub emit_timings: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kernel: "kind=product a=1.0 b=1.0".into(),
            alpha: 0.5,
            lambda: 1.0,
            n_list: vec![8, 12, 16, 20, 24],
            replicates: 5,
            master_seed: 0,
            sampler: SamplerMethod::Exact,
            cut_solver: CutSolver::Auto { restarts: DEFAULT_HEURISTIC_RESTARTS },
            exact_limit: DEFAULT_EXACT_LIMIT,
            m_multiplier: 1,
            emit_timings: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            bail!("alpha = {} must lie in (0, 1]", self.alpha);
        }
        if !(self.lambda > 0.0) {
            bail!("lambda = {} must be positive", self.lambda);
        }
        if self.n_list.is_empty() {
            bail!("n_list must not be empty");
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) || self.n_list[0] == 0 {
            bail!("n_list must be strictly increasing and positive");
        }
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        if self.m_multiplier == 0 {
            bail!("m_multiplier must be at least 1");
        }
        Ok(())
    }

    /// Overlay `key = value` assignments from a config file. Blank lines
    /// and `#` comments are ignored; keys are the field names.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (line_no, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), line_no + 1))?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), line_no + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "kernel" => self.kernel = value.to_string(),
            "alpha" => self.alpha = value.parse()?,
            "lambda" => self.lambda = value.parse()?,
            "n_list" => self.n_list = parse_n_list(value)?,
            "replicates" => self.replicates = value.parse()?,
            "master_seed" => self.master_seed = value.parse()?,
            "sampler" => self.sampler = parse_sampler(value)?,
            "cutnorm" => self.cut_solver = parse_cut_solver(value)?,
            "exact_limit" => self.exact_limit = value.parse()?,
            "m_multiplier" => self.m_multiplier = value.parse()?,
            "emit_timings" => self.emit_timings = value.parse()?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }
}

pub fn parse_n_list(value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| anyhow!("bad n `{t}`: {e}")))
        .collect()
}

/// `exact`, `rejection`, `grid` or `grid:<cells>`.
pub fn parse_sampler(value: &str) -> Result<SamplerMethod> {
    match value {
        "exact" => Ok(SamplerMethod::Exact),
        "rejection" => Ok(SamplerMethod::Rejection),
        "grid" => Ok(SamplerMethod::grid_default()),
        other => {
            if let Some(m) = other.strip_prefix("grid:") {
                Ok(SamplerMethod::Grid { m: m.parse()? })
            } else {
                bail!("unknown sampler `{other}` (use exact, rejection, grid, grid:<cells>)")
            }
        }
    }
}

/// `auto`, `exact`, `heuristic`, optionally with `:<restarts>`.
pub fn parse_cut_solver(value: &str) -> Result<CutSolver> {
    let (name, restarts) = match value.split_once(':') {
        Some((name, r)) => (name, Some(r.parse::<usize>()?)),
        None => (value, None),
    };
    match name {
        "auto" => Ok(CutSolver::Auto { restarts: restarts.unwrap_or(DEFAULT_HEURISTIC_RESTARTS) }),
        "exact" => Ok(CutSolver::Exact),
        "heuristic" => {
            Ok(CutSolver::Heuristic { restarts: restarts.unwrap_or(DEFAULT_HEURISTIC_RESTARTS) })
        }
        other => bail!("unknown cutnorm solver `{other}` (use auto, exact, heuristic)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let mut cfg = ExperimentConfig::default();
        cfg.alpha = 0.0;
        assert!(cfg.validate().is_err());
        cfg.alpha = 0.5;
        cfg.n_list = vec![8, 8];
        assert!(cfg.validate().is_err());
        cfg.n_list = vec![8, 16];
        cfg.replicates = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_file_overlay() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        std::fs::write(
            &path,
            "# comment\nkernel = kind=constant c=1.0\nalpha = 1\nn_list = 4, 8\nsampler = grid:2048\ncutnorm = heuristic:16\nemit_timings = true\n",
        )
        .unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.kernel, "kind=constant c=1.0");
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.n_list, vec![4, 8]);
        assert_eq!(cfg.sampler, SamplerMethod::Grid { m: 2048 });
        assert_eq!(cfg.cut_solver, CutSolver::Heuristic { restarts: 16 });
        assert!(cfg.emit_timings);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.set("mystery", "1").is_err());
        assert!(parse_sampler("bogus").is_err());
        assert!(parse_cut_solver("bogus").is_err());
    }
}
