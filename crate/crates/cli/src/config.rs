//! Run configuration: defaults, flat `key = value` config files with
//! section prefixes (scenario., solver., output.), and CLI overrides.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};

/// A custom (non-catalog) scenario described entirely by constants.
#[derive(Debug, Clone)]
pub struct CustomScenario {
    pub geometry: String,
    pub kappa: f64,
    pub sigma: f64,
    pub h_field: f64,
    pub psi0: (f64, f64),
    pub a0: [f64; 2],
}

impl Default for CustomScenario {
    fn default() -> Self {
        CustomScenario {
            geometry: "unit_square".to_string(),
            kappa: 1.0,
            sigma: 1.0,
            h_field: 0.0,
            psi0: (1.0, 0.0),
            a0: [0.0, 0.0],
        }
    }
}

/// Fully merged run configuration. Flag values win over file values, file
/// values win over defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub custom: Option<CustomScenario>,
    /// Mesh resolutions; several values run a sweep (one errors.csv row each).
    pub m_values: Vec<usize>,
    pub h_target: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub gmres_tol: f64,
    pub gmres_max_iter: usize,
    pub precondition: bool,
    pub out_dir: PathBuf,
    pub snapshot_times: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: None,
            custom: None,
            m_values: Vec::new(),
            h_target: None,
            dt: None,
            t_final: None,
            newton_tol: 1e-6,
            newton_max_iter: 20,
            gmres_tol: 1e-8,
            gmres_max_iter: 500,
            precondition: true,
            out_dir: PathBuf::from("out"),
            snapshot_times: None,
        }
    }
}

fn parse_pair(value: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("expected two comma-separated numbers, got {value:?}");
    }
    Ok((parts[0].parse()?, parts[1].parse()?))
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("{e}: {s:?}")))
        .collect()
}

impl RunConfig {
    /// Applies one `section.key = value` line.
    fn apply_entry(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scenario.name" => self.scenario = Some(value.to_string()),
            "scenario.geometry" => {
                self.custom.get_or_insert_with(Default::default).geometry = value.to_string();
            }
            "scenario.M" => self.m_values = vec![value.parse()?],
            "scenario.h_target" => self.h_target = Some(value.parse()?),
            "scenario.kappa" => {
                self.custom.get_or_insert_with(Default::default).kappa = value.parse()?;
            }
            "scenario.sigma" => {
                self.custom.get_or_insert_with(Default::default).sigma = value.parse()?;
            }
            "scenario.H" => {
                self.custom.get_or_insert_with(Default::default).h_field = value.parse()?;
            }
            "scenario.psi0" => {
                self.custom.get_or_insert_with(Default::default).psi0 = parse_pair(value)?;
            }
            "scenario.A0" => {
                let (x, y) = parse_pair(value)?;
                self.custom.get_or_insert_with(Default::default).a0 = [x, y];
            }
            "scenario.dt" => self.dt = Some(value.parse()?),
            "scenario.T" => self.t_final = Some(value.parse()?),
            "solver.newton_tol" => self.newton_tol = value.parse()?,
            "solver.newton_max_iter" => self.newton_max_iter = value.parse()?,
            "solver.gmres_tol" => self.gmres_tol = value.parse()?,
            "solver.gmres_max_iter" => self.gmres_max_iter = value.parse()?,
            "solver.precondition" => self.precondition = value.parse()?,
            "output.dir" => self.out_dir = PathBuf::from(value),
            "output.snapshots" => self.snapshot_times = Some(parse_list(value)?),
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Parses a flat config file: one `key = value` per line, `#` comments.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            self.apply_entry(key.trim(), value.trim())
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario.is_none() && self.custom.is_none() {
            bail!("no scenario selected: pass --scenario or a config file with scenario.name / scenario.geometry");
        }
        if !(self.newton_tol > 0.0 && self.newton_tol < 1.0) {
            bail!("solver.newton_tol must be in (0, 1)");
        }
        if !(self.gmres_tol > 0.0 && self.gmres_tol < 1.0) {
            bail!("solver.gmres_tol must be in (0, 1)");
        }
        for &m in &self.m_values {
            if m == 0 {
                bail!("mesh resolution M must be at least 1");
            }
        }
        if let Some(dt) = self.dt {
            if dt <= 0.0 || dt.is_nan() {
                bail!("time step must be positive");
            }
        }
        if let Some(t) = self.t_final {
            if t <= 0.0 || t.is_nan() {
                bail!("final time must be positive");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_file_text(
            "# comment\n\
             scenario.name = ex2\n\
             scenario.M = 8\n\
             solver.newton_tol = 1e-6\n\
             solver.precondition = false\n\
             output.dir = results\n\
             output.snapshots = 1, 2.5, 10\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario.as_deref(), Some("ex2"));
        assert_eq!(cfg.m_values, vec![8]);
        assert_eq!(cfg.newton_tol, 1e-6);
        assert!(!cfg.precondition);
        assert_eq!(cfg.out_dir, PathBuf::from("results"));
        assert_eq!(cfg.snapshot_times, Some(vec![1.0, 2.5, 10.0]));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_file_text("bogus.key = 1").is_err());
        assert!(cfg.apply_file_text("no equals sign").is_err());
    }

    #[test]
    fn custom_block_builds_up() {
        let mut cfg = RunConfig::default();
        cfg.apply_file_text(
            "scenario.geometry = lshape\n\
             scenario.kappa = 10\n\
             scenario.H = 5\n\
             scenario.psi0 = 0.6, 0.8\n\
             scenario.dt = 0.0625\n\
             scenario.T = 1\n\
             scenario.M = 16\n",
        )
        .unwrap();
        let custom = cfg.custom.as_ref().unwrap();
        assert_eq!(custom.geometry, "lshape");
        assert_eq!(custom.kappa, 10.0);
        assert_eq!(custom.psi0, (0.6, 0.8));
        cfg.validate().unwrap();
    }

    #[test]
    fn validation_requires_a_scenario() {
        let cfg = RunConfig::default();
        assert!(cfg.validate().is_err());
    }
}
