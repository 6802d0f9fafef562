//! Weak-value tomography of a qubit read out through a dispersively coupled
//! cavity.
//!
//! Everything is generic over the scalar type (`f64` or `f32`, see [`Real`]);
//! the `*64` / `*32` aliases below fix it. The usual flow is
//! 1. compute cavity fields ([`stationary_trajectory`], [`transient_fields`]),
//! 2. simulate conditioned trajectories with a [`Simulator`],
//! 3. post-select with [`mc_pps`] and compare with [`analytic_pps`],
//! 4. invert two phases with [`extract_weak_value`] and [`reconstruct`].

pub mod cavity;
pub mod error;
pub mod qubit;
pub mod scalar;
pub mod tomography;
pub mod trajectory;

pub use cavity::{
    integrated_factors, rates_at, stationary_fields, stationary_trajectory, transient_fields,
    CavityFieldTrajectory, CoherenceDecay, EfficiencyModel, FactorMode, IntegratedFactors, RateSchedule,
    RateSet, ReadoutParams, StepRates,
};
pub use error::{Error, Result};
pub use qubit::{
    density_from_pure, fidelity, pure_from_angles, wrap_angle, BlochAngles, ComplexScalar, DensityMatrix,
    PureQubitState,
};
pub use scalar::Real;
pub use tomography::{
    analytic_pps, extract_weak_value, mc_pps, post_selection_overlap, reconstruct, true_weak_value,
    ExtractedWeakValue, ExtractionMethod, ExtractionOptions, PhaseData, PpsMode, PpsResult, WeakValue,
};
pub use trajectory::{
    apply_inefficiency, bayesian_factors, bayesian_update, simulate_record, trajectory_seed, BayesianFactors,
    BayesianFilter, MeasurementRecord, Simulator, TrajectoryOutcome,
};

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type PureQubitState64 = PureQubitState<f64>;
pub type PureQubitState32 = PureQubitState<f32>;
pub type ReadoutParams64 = ReadoutParams<f64>;
pub type ReadoutParams32 = ReadoutParams<f32>;
pub type CavityFieldTrajectory64 = CavityFieldTrajectory<f64>;
pub type CavityFieldTrajectory32 = CavityFieldTrajectory<f32>;
pub type MeasurementRecord64 = MeasurementRecord<f64>;
pub type MeasurementRecord32 = MeasurementRecord<f32>;
pub type Simulator64 = Simulator<f64>;
pub type Simulator32 = Simulator<f32>;
