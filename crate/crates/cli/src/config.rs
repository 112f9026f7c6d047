//! Typed experiment configuration with hard errors on unknown keys.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use dce_core::dynamics::BathSpec;
use dce_core::gaussian::nbar_from_temperature;
use dce_core::modulation::{ModulationProfile, SinusoidalModulation, TwoStepModulation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cavity {
    Linear,
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModulationConfig {
    Twostep { f1: f64, f2: f64, t1: f64, t2: f64 },
    Sinusoidal { n0: f64, dn: f64, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    /// Temperature in units of the quiescent mode frequency over k_B;
    /// converted through the Bose-Einstein occupation of that mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    /// Defaults to one modulation period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_interval: Option<f64>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
}

fn default_rel_tol() -> f64 {
    1e-10
}

fn default_abs_tol() -> f64 {
    1e-13
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count < 2 {
            bail!("range count must be >= 2");
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| self.start + i as f64 * step)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted path of a scalar config field, e.g. `bath.nbar`.
    pub parameter: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<Range>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub theta1: Range,
    pub theta2: Range,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: String,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cavity: Option<Cavity>,
    pub modulation: ModulationConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    /// Theta grid for `stability-map`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("failed to parse config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bath) = &self.bath {
            match (bath.nbar, bath.temperature) {
                (Some(_), Some(_)) => bail!("bath: specify exactly one of nbar or temperature"),
                (None, None) => bail!("bath: specify exactly one of nbar or temperature"),
                _ => {}
            }
            if let Some(n) = bath.nbar {
                if n < 0.0 {
                    bail!("bath.nbar must be >= 0");
                }
            }
            if let Some(t) = bath.temperature {
                if t < 0.0 {
                    bail!("bath.temperature must be >= 0");
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            match (&sweep.values, &sweep.range) {
                (Some(_), Some(_)) => bail!("sweep: specify exactly one of values or range"),
                (None, None) => bail!("sweep: specify exactly one of values or range"),
                _ => {}
            }
            // reject unknown parameter paths eagerly
            let mut probe = self.clone();
            probe.sweep = None;
            probe
                .set_parameter(&sweep.parameter, self.probe_parameter(&sweep.parameter)?)
                .with_context(|| format!("invalid sweep parameter `{}`", sweep.parameter))?;
        }
        self.profile().map(|_| ())
    }

    fn probe_parameter(&self, path: &str) -> Result<f64> {
        Ok(match path {
            "bath.gamma" => self.bath.as_ref().map(|b| b.gamma).unwrap_or(0.0),
            "bath.nbar" => self.bath.as_ref().and_then(|b| b.nbar).unwrap_or(0.0),
            "bath.temperature" => self
                .bath
                .as_ref()
                .and_then(|b| b.temperature)
                .unwrap_or(0.0),
            _ => 0.5,
        })
    }

    /// Set the scalar named by a dotted `path`; errors if the path does not
    /// name a field present in this config.
    pub fn set_parameter(&mut self, path: &str, value: f64) -> Result<()> {
        match path {
            "bath.gamma" | "bath.nbar" | "bath.temperature" => {
                let bath = self.bath.as_mut().context("config has no [bath] section")?;
                match path {
                    "bath.gamma" => bath.gamma = value,
                    "bath.nbar" => {
                        if bath.nbar.is_none() {
                            bail!("bath uses temperature, not nbar");
                        }
                        bath.nbar = Some(value);
                    }
                    _ => {
                        if bath.temperature.is_none() {
                            bail!("bath uses nbar, not temperature");
                        }
                        bath.temperature = Some(value);
                    }
                }
            }
            "run.t_end" => {
                self.run
                    .as_mut()
                    .context("config has no [run] section")?
                    .t_end = value;
            }
            "modulation.f1" | "modulation.f2" | "modulation.t1" | "modulation.t2" => {
                match &mut self.modulation {
                    ModulationConfig::Twostep { f1, f2, t1, t2 } => match path {
                        "modulation.f1" => *f1 = value,
                        "modulation.f2" => *f2 = value,
                        "modulation.t1" => *t1 = value,
                        _ => *t2 = value,
                    },
                    ModulationConfig::Sinusoidal { .. } => {
                        bail!("`{path}` requires a twostep modulation")
                    }
                }
            }
            "modulation.n0" | "modulation.dn" | "modulation.omega" => match &mut self.modulation {
                ModulationConfig::Sinusoidal { n0, dn, omega } => match path {
                    "modulation.n0" => *n0 = value,
                    "modulation.dn" => *dn = value,
                    _ => *omega = value,
                },
                ModulationConfig::Twostep { .. } => {
                    bail!("`{path}` requires a sinusoidal modulation")
                }
            },
            _ => bail!("unknown parameter path `{path}`"),
        }
        Ok(())
    }

    pub fn sweep_values(&self) -> Result<Vec<f64>> {
        let sweep = self
            .sweep
            .as_ref()
            .context("config has no [sweep] section")?;
        if let Some(values) = &sweep.values {
            if values.is_empty() {
                bail!("sweep.values must not be empty");
            }
            return Ok(values.clone());
        }
        sweep.range.as_ref().unwrap().values()
    }

    pub fn profile(&self) -> Result<ModulationProfile<f64>> {
        Ok(match self.modulation {
            ModulationConfig::Twostep { f1, f2, t1, t2 } => {
                ModulationProfile::TwoStep(TwoStepModulation::new(f1, f2, t1, t2)?)
            }
            ModulationConfig::Sinusoidal { n0, dn, omega } => {
                ModulationProfile::Sinusoidal(SinusoidalModulation::new(n0, dn, omega)?)
            }
        })
    }

    pub fn bath_spec(&self) -> Result<BathSpec<f64>> {
        let bath = self.bath.as_ref().context("config has no [bath] section")?;
        let nbar = match (bath.nbar, bath.temperature) {
            (Some(n), None) => n,
            (None, Some(t)) => {
                if t == 0.0 {
                    0.0
                } else {
                    nbar_from_temperature(self.profile()?.f0(), t)?
                }
            }
            _ => bail!("bath: specify exactly one of nbar or temperature"),
        };
        Ok(BathSpec::new(bath.gamma, nbar)?)
    }

    pub fn cavity(&self) -> Result<Cavity> {
        self.cavity.context("config has no `cavity` field")
    }

    pub fn run_config(&self) -> Result<&RunConfig> {
        self.run.as_ref().context("config has no [run] section")
    }
}
