//! Experiment configuration: JSON-loadable, with resolved defaults echoed
//! into every report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ContinuumLimit,
    SmallAmplitude,
    Decoupling,
    LinearComparison,
    Kernels,
    Bilinear,
    XsbFailure,
    Conservation,
    /// scaling of the h²-weighted remainder term's trajectory contribution
    Remainder,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ContinuumLimit => "continuum_limit",
            ExperimentKind::SmallAmplitude => "small_amplitude",
            ExperimentKind::Decoupling => "decoupling",
            ExperimentKind::LinearComparison => "linear_comparison",
            ExperimentKind::Kernels => "kernels",
            ExperimentKind::Bilinear => "bilinear",
            ExperimentKind::XsbFailure => "xsb_failure",
            ExperimentKind::Conservation => "conservation",
            ExperimentKind::Remainder => "remainder",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// halve from 1.0 until the H^s norm stays within 2R at the largest h
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DataKind {
    /// synthetic H^s-class data with randomized phases and near-critical
    /// spectral decay
    RandomHs,
    /// band-limited random pair, H^s-normalized; the feasible class for
    /// measurements that must resolve the cross-term oscillations
    SmoothPair { band: usize },
    /// single right-moving KdV-soliton-derived data (u⁻ channel empty)
    Soliton { speed: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_h_list")]
    pub h_list: Vec<f64>,
    /// regularity of the synthetic data
    #[serde(default = "default_s")]
    pub s: f64,
    /// data-size bound R
    #[serde(default = "default_r")]
    pub r_bound: f64,
    #[serde(default = "default_horizon")]
    pub horizon: Horizon,
    #[serde(default = "default_potential")]
    pub potential: Potential,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_box")]
    pub box_length: f64,
    /// dt = min(0.1, h)·dt_factor
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
    /// line-grid refinement factor
    #[serde(default = "default_rho")]
    pub rho: usize,
    #[serde(default = "default_data")]
    pub data: DataKind,
    /// minimum number of trajectory samples over [-T, T]
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// (ξ, τ) lattice sizes for the bilinear suprema
    #[serde(default = "default_bilinear_samples")]
    pub bilinear_samples: (usize, usize),
    /// exponent window used by the bilinear and Bourgain-norm experiments
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// s' - s gains probed by the bilinear kind-II/III sweeps
    #[serde(default = "default_gains")]
    pub gains: Vec<f64>,
}

fn default_h_list() -> Vec<f64> {
    vec![0.125, 0.0625, 0.03125, 0.015625, 0.0078125]
}
fn default_s() -> f64 {
    1.0
}
fn default_r() -> f64 {
    1.0
}
fn default_horizon() -> Horizon {
    Horizon::Auto
}
fn default_potential() -> Potential {
    Potential::cubic_normalized()
}
fn default_box() -> f64 {
    64.0
}
fn default_dt_factor() -> f64 {
    0.5
}
fn default_rho() -> usize {
    8
}
fn default_data() -> DataKind {
    DataKind::RandomHs
}
fn default_samples() -> usize {
    65
}
fn default_bilinear_samples() -> (usize, usize) {
    (1 << 12, 1 << 12)
}
fn default_b() -> f64 {
    0.55
}
fn default_delta() -> f64 {
    0.1
}
fn default_gains() -> Vec<f64> {
    vec![0.25, 0.5]
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            h_list: default_h_list(),
            s: default_s(),
            r_bound: default_r(),
            horizon: default_horizon(),
            potential: default_potential(),
            seed: 0,
            box_length: default_box(),
            dt_factor: default_dt_factor(),
            rho: default_rho(),
            data: default_data(),
            samples: default_samples(),
            bilinear_samples: default_bilinear_samples(),
            b: default_b(),
            delta: default_delta(),
            gains: default_gains(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_list.is_empty() {
            return Err(Error::InvalidConfig("h list is empty".into()));
        }
        for &h in &self.h_list {
            if !(h > 0.0) || (h.log2() - h.log2().round()).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!("h = {h} is not dyadic")));
            }
        }
        if !self.h_list.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig("h list must be strictly decreasing".into()));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return Err(Error::InvalidConfig(format!("s = {} outside (0, 1]", self.s)));
        }
        if matches!(
            self.experiment,
            ExperimentKind::ContinuumLimit | ExperimentKind::SmallAmplitude
        ) && self.s <= 0.75
        {
            return Err(Error::InvalidConfig(
                "the continuum-limit experiments need s in (3/4, 1]".into(),
            ));
        }
        if !(self.r_bound > 0.0) {
            return Err(Error::InvalidConfig("R must be positive".into()));
        }
        if let Horizon::Fixed(t) = self.horizon {
            if !(t > 0.0) {
                return Err(Error::InvalidConfig("fixed horizon must be positive".into()));
            }
        }
        if self.rho < 2 {
            return Err(Error::InvalidConfig("refinement factor must be at least 2".into()));
        }
        if self.samples < 3 {
            return Err(Error::InvalidConfig("need at least 3 samples".into()));
        }
        self.potential.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::new(ExperimentKind::ContinuumLimit).validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig::new(ExperimentKind::Decoupling);
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.h_list, cfg.h_list);
        assert_eq!(back.experiment, cfg.experiment);
    }

    #[test]
    fn rejects_non_dyadic_h() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Decoupling);
        cfg.h_list = vec![0.1];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn continuum_needs_high_regularity() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::ContinuumLimit);
        cfg.s = 0.5;
        assert!(cfg.validate().is_err());
        cfg.experiment = ExperimentKind::Decoupling;
        assert!(cfg.validate().is_ok());
    }
}
