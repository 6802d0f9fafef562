//! JSON experiment configuration and its resolution into core parameters.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use wvtomo_core::{
    pure_from_angles, rates_at, stationary_fields, BlochAngles, CoherenceDecay, EfficiencyModel, FactorMode,
    PpsMode, PureQubitState, ReadoutParams,
};

use crate::HarnessError;

/// Angle in radians; JSON accepts numbers or strings like `"0.65pi"`, `"pi/4"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angle(pub f64);

impl Angle {
    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim().to_ascii_lowercase().replace(' ', "");
        let bad = || format!("cannot parse angle {text:?}");
        let num = |s: &str| -> Result<f64, String> {
            if s.is_empty() {
                Ok(1.0)
            } else if s == "-" {
                Ok(-1.0)
            } else {
                s.parse::<f64>().map_err(|_| bad())
            }
        };
        let value = if let Some((lhs, rhs)) = t.split_once("pi/") {
            num(lhs.trim_end_matches('*'))? * PI / rhs.parse::<f64>().map_err(|_| bad())?
        } else if let Some(lhs) = t.strip_suffix("pi") {
            num(lhs.trim_end_matches('*'))? * PI
        } else {
            t.parse::<f64>().map_err(|_| bad())?
        };
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for Angle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::parse(s)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Angle(v)),
            Raw::Text(t) => Angle::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Measurement time, absolute or as a multiple of `1/Gamma_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementTime {
    Absolute(f64),
    Relative { per_gamma_d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QubitFrequency {
    Value(f64),
    Named(FrequencyName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyName {
    /// Frame co-rotating with the stationary dressed qubit.
    DressedFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutConfig {
    #[serde(default = "one")]
    pub epsilon_m: f64,
    #[serde(default = "kappa")]
    pub kappa: f64,
    #[serde(default = "chi")]
    pub chi: f64,
    #[serde(default)]
    pub delta_r: f64,
    #[serde(default = "dressed")]
    pub omega_q: QubitFrequency,
    #[serde(default = "half_gamma_d")]
    pub t_m: MeasurementTime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub efficiency_model: EfficiencyName,
    #[serde(default)]
    pub coherence_decay: DecayName,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            epsilon_m: 1.0,
            kappa: 8.0,
            chi: 0.1,
            delta_r: 0.0,
            omega_q: dressed(),
            t_m: half_gamma_d(),
            dt: None,
            efficiency_model: EfficiencyName::default(),
            coherence_decay: DecayName::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyName {
    #[default]
    RetainedFraction,
    LostFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayName {
    #[default]
    HalfRate,
    FullRate,
    SqrtRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Stationary,
    TimeResolved,
}

impl ModeName {
    pub fn factor_mode(self) -> FactorMode {
        match self {
            Self::Stationary => FactorMode::Stationary,
            Self::TimeResolved => FactorMode::TimeResolved,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Stationary => "stationary",
            Self::TimeResolved => "time_resolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionName {
    Linear,
    #[default]
    Iterative,
}

impl ExtractionName {
    pub fn label(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PpsName {
    #[default]
    Weighted,
    Bernoulli,
}

/// Cavity fields driving the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    /// Fields held at their stationary values.
    Stationary,
    /// Fields ringing up from vacuum at `t = 0`.
    Transient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesConfig {
    pub theta: Angle,
    pub phi: Angle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub readout: ReadoutConfig,
    #[serde(default = "reference_state")]
    pub psi_i: AnglesConfig,
    /// Polar angles of the post-selection states.
    #[serde(default = "default_sweep")]
    pub post_selection_sweep: Vec<Angle>,
    /// Azimuth shared by all post-selection states.
    #[serde(default)]
    pub post_selection_phi: Angle,
    /// Local-oscillator phases relative to `theta_beta`; exactly two.
    #[serde(default = "default_phases")]
    pub phases: Vec<Angle>,
    #[serde(default = "default_n")]
    pub n_trajectories: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default)]
    pub extraction: ExtractionName,
    #[serde(default)]
    pub pps_mode: PpsName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_model: Option<FieldModel>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            readout: ReadoutConfig::default(),
            psi_i: reference_state(),
            post_selection_sweep: default_sweep(),
            post_selection_phi: Angle(0.0),
            phases: default_phases(),
            n_trajectories: default_n(),
            master_seed: 0,
            mode: ModeName::default(),
            eta: 1.0,
            extraction: ExtractionName::default(),
            pps_mode: PpsName::default(),
            field_model: None,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn kappa() -> f64 {
    8.0
}
fn chi() -> f64 {
    0.1
}
fn dressed() -> QubitFrequency {
    QubitFrequency::Named(FrequencyName::DressedFrame)
}
fn half_gamma_d() -> MeasurementTime {
    MeasurementTime::Relative { per_gamma_d: 0.5 }
}
fn default_n() -> u64 {
    100_000
}
fn default_phases() -> Vec<Angle> {
    vec![Angle(0.0), Angle(PI / 4.0)]
}

fn reference_state() -> AnglesConfig {
    AnglesConfig {
        theta: Angle(PI / 3.0),
        phi: Angle(0.662),
    }
}

/// `0.1 pi, 0.2 pi, ..., 0.9 pi` plus `0.65 pi`.
pub fn default_sweep() -> Vec<Angle> {
    [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.65, 0.8, 0.9]
        .map(|v| Angle(v * PI))
        .to_vec()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The preset for the strong-response run: `kappa = 2` with transient fields.
    pub fn beyond_limits() -> Self {
        Self {
            readout: ReadoutConfig {
                kappa: 2.0,
                ..ReadoutConfig::default()
            },
            field_model: Some(FieldModel::Transient),
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.n_trajectories < 1 {
            return fail("n_trajectories must be at least 1".into());
        }
        if self.post_selection_sweep.is_empty() {
            return fail("post_selection_sweep must not be empty".into());
        }
        if self.phases.len() != 2 {
            return fail(format!("phases must list exactly two values, got {}", self.phases.len()));
        }
        if let Some(t) = self.post_selection_sweep.iter().find(|t| !(0.0..=PI).contains(&t.0)) {
            return fail(format!("post-selection angle {t} outside [0, pi]"));
        }
        self.psi_i()?;
        self.readout_params(self.eta, self.phases[0].0).map(|_| ())
    }

    pub fn psi_i(&self) -> Result<PureQubitState, HarnessError> {
        let angles = BlochAngles::new(self.psi_i.theta.0, self.psi_i.phi.0).map_err(config_error)?;
        Ok(pure_from_angles(angles))
    }

    pub fn psi_f(&self, theta: f64) -> Result<PureQubitState, HarnessError> {
        let angles = BlochAngles::new(theta, self.post_selection_phi.0).map_err(config_error)?;
        Ok(pure_from_angles(angles))
    }

    /// Fields used by the generator: stationary unless configured otherwise.
    pub fn field_model(&self) -> FieldModel {
        self.field_model.unwrap_or(FieldModel::Stationary)
    }

    pub fn pps_mode(&self) -> PpsMode {
        match self.pps_mode {
            PpsName::Weighted => PpsMode::Weighted,
            PpsName::Bernoulli => PpsMode::Bernoulli {
                seed: wvtomo_core::trajectory_seed(self.master_seed, u64::MAX),
            },
        }
    }

    /// Core parameters for one efficiency and relative phase.
    pub fn readout_params(&self, eta: f64, relative_phase: f64) -> Result<ReadoutParams, HarnessError> {
        let r = &self.readout;
        let mut p = ReadoutParams::new(r.epsilon_m, r.kappa, r.chi, 1.0, 1.0);
        p.delta_r = r.delta_r;
        p.eta = eta;
        p.efficiency_model = match r.efficiency_model {
            EfficiencyName::RetainedFraction => EfficiencyModel::RetainedFraction,
            EfficiencyName::LostFraction => EfficiencyModel::LostFraction,
        };
        p.coherence_decay = match r.coherence_decay {
            DecayName::HalfRate => CoherenceDecay::HalfRate,
            DecayName::FullRate => CoherenceDecay::FullRate,
            DecayName::SqrtRate => CoherenceDecay::SqrtRate,
        };
        p.validate().map_err(config_error)?;

        let (a1, a2) = stationary_fields(&p);
        let rates = rates_at(a1, a2, &p);
        p.t_m = match r.t_m {
            MeasurementTime::Absolute(t) => t,
            MeasurementTime::Relative { per_gamma_d } => {
                if rates.gamma_d.is_nan() || rates.gamma_d <= 0.0 {
                    return Err(HarnessError::Config("t_m relative to Gamma_d needs Gamma_d > 0".into()));
                }
                per_gamma_d / rates.gamma_d
            }
        };
        p.omega_q = match r.omega_q {
            QubitFrequency::Value(w) => w,
            QubitFrequency::Named(FrequencyName::DressedFrame) => p.dressed_frame_omega_q(),
        };
        p.dt = match r.dt {
            Some(dt) => dt,
            None => {
                let mut dt = p.t_m / 200.0;
                if rates.gamma_m > 0.0 {
                    dt = dt.min(0.01 / rates.gamma_m);
                }
                if self.field_model() == FieldModel::Transient {
                    dt = dt.min(0.05 / p.kappa);
                }
                dt
            }
        };
        let p = p.with_relative_phase(relative_phase);
        p.validate().map_err(config_error)?;
        Ok(p)
    }
}

fn config_error(e: wvtomo_core::Error) -> HarnessError {
    HarnessError::Config(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_forms() {
        assert_eq!(Angle::parse("0.65pi").unwrap().0, 0.65 * PI);
        assert_eq!(Angle::parse("pi/4").unwrap().0, PI / 4.0);
        assert_eq!(Angle::parse("-pi").unwrap().0, -PI);
        assert_eq!(Angle::parse("2*pi/3").unwrap().0, 2.0 * PI / 3.0);
        assert_eq!(Angle::parse("0.3").unwrap().0, 0.3);
        assert!(Angle::parse("pie").is_err());
    }

    #[test]
    fn empty_object_is_paper_preset() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.post_selection_sweep.len(), 10);
        let p = cfg.readout_params(1.0, 0.0).unwrap();
        assert!((p.t_m - 400.5).abs() < 0.1);
        assert_eq!(p.n_steps(), 200);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"n_traj": 5}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"readout": {"kapa": 2}}"#).is_err());
    }

    #[test]
    fn invariants_enforced() {
        assert!(ExperimentConfig::from_json(r#"{"n_trajectories": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"post_selection_sweep": []}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"phases": [0]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"eta": 1.5}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"readout": {"kappa": -1}}"#).is_err());
    }

    #[test]
    fn explicit_values() {
        let cfg = ExperimentConfig::from_json(
            r#"{"readout": {"kappa": 2, "t_m": 6.0, "omega_q": 0.0, "dt": 0.01},
                "phases": ["0", "pi/2"], "post_selection_sweep": ["0.65pi"],
                "mode": "time_resolved", "pps_mode": "bernoulli", "field_model": "transient"}"#,
        )
        .unwrap();
        let p = cfg.readout_params(0.8, cfg.phases[1].0).unwrap();
        assert_eq!((p.kappa, p.t_m, p.omega_q, p.dt, p.eta), (2.0, 6.0, 0.0, 0.01, 0.8));
        assert_eq!(cfg.mode, ModeName::TimeResolved);
        assert!(matches!(cfg.pps_mode(), PpsMode::Bernoulli { .. }));
    }

    #[test]
    fn transient_default_step_resolves_cavity() {
        let p = ExperimentConfig::beyond_limits().readout_params(1.0, 0.0).unwrap();
        assert!(p.kappa * p.step() <= 0.05 + 1e-12);
        assert!((p.t_m - 6.3756).abs() < 1e-3);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ExperimentConfig::beyond_limits();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }
}
