//! Parallel trajectory ensembles with index-ordered results.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use wvtomo_core::{
    stationary_trajectory, transient_fields, trajectory_seed, CavityFieldTrajectory, PureQubitState, ReadoutParams,
    Simulator, TrajectoryOutcome,
};

use crate::config::FieldModel;
use crate::HarnessError;

/// Running count of simulated trajectories, for throughput reporting.
pub static SIMULATED: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub params: ReadoutParams,
    pub fields: CavityFieldTrajectory,
    pub seed: u64,
    pub outcomes: Vec<TrajectoryOutcome>,
}

pub fn fields(params: &ReadoutParams, model: FieldModel) -> Result<CavityFieldTrajectory, HarnessError> {
    let traj = match model {
        FieldModel::Stationary => stationary_trajectory(params),
        FieldModel::Transient => transient_fields(params),
    };
    traj.map_err(HarnessError::Numerical)
}

/// Runs trajectories `0..n`; trajectory `j` uses `trajectory_seed(seed, j)`.
pub fn run_ensemble(
    psi_i: &PureQubitState,
    params: &ReadoutParams,
    model: FieldModel,
    n: u64,
    seed: u64,
) -> Result<Ensemble, HarnessError> {
    let traj = fields(params, model)?;
    let sim = Simulator::new(psi_i, &traj, params)?;
    let outcomes = (0..n)
        .into_par_iter()
        .map(|j| sim.run(trajectory_seed(seed, j)))
        .collect::<Result<Vec<_>, _>>()?;
    SIMULATED.fetch_add(n, Ordering::Relaxed);
    Ok(Ensemble {
        params: *params,
        fields: traj,
        seed,
        outcomes,
    })
}

/// Thread count from the flag, else `WVTOMO_THREADS`, else rayon's default.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, HarnessError> {
    let from_env = || {
        std::env::var("WVTOMO_THREADS")
            .ok()
            .map(|v| v.trim().parse::<usize>())
            .transpose()
            .map_err(|_| HarnessError::Config("WVTOMO_THREADS must be a positive integer".into()))
    };
    let n = match threads {
        Some(n) => Some(n),
        None => from_env()?,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        if n == 0 {
            return Err(HarnessError::Config("thread count must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| HarnessError::Config(e.to_string()))
}
