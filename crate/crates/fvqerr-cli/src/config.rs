//! Run configuration: one experiment block, a master seed, and an output
//! directory. The seed fully determines every stochastic ensemble.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use fvqerr::bath::{Cutoff, SpectralDensity};
use fvqerr::channels::ChannelSpec;
use fvqerr::exact::{ModePlacement, ScalingConfig, DEFAULT_DIM_CAP};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Optional tolerance overrides consulted by experiment summaries.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Kernels(KernelsParams),
    Propagator(PropagatorParams),
    Scaling(ScalingParams),
    CommonBath(CommonBathParams),
    Toric(ToricParams),
    Channels(ChannelsParams),
    WeakCouplingOrder(WeakOrderParams),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Kernels(_) => "kernels",
            ExperimentConfig::Propagator(_) => "propagator",
            ExperimentConfig::Scaling(_) => "scaling",
            ExperimentConfig::CommonBath(_) => "common-bath",
            ExperimentConfig::Toric(_) => "toric",
            ExperimentConfig::Channels(_) => "channels",
            ExperimentConfig::WeakCouplingOrder(_) => "weak-coupling-order",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelsParams {
    pub spectral: SpectralDensity,
    pub tau_max: f64,
    pub n_tau: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropagatorParams {
    /// (n_theta, n_phi) resolutions to sweep.
    pub resolutions: Vec<(usize, usize)>,
    pub n_hamiltonians: usize,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingParams {
    #[serde(flatten)]
    pub config: ScalingConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommonBathParams {
    pub spectral: SpectralDensity,
    pub n_values: Vec<usize>,
    pub duration: f64,
    pub n_time: usize,
    pub ensemble: usize,
    /// Corner frequency of the random path ensemble.
    pub path_corner_freq: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToricParams {
    pub lattices: Vec<(usize, usize)>,
    pub eta: f64,
    pub duration: f64,
    pub ensemble: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelsParams {
    pub channel: ChannelSpec,
    pub n_random_states: usize,
    /// Qubit count and per-qubit flip probability for the half-TVD
    /// error-rate construction.
    pub kalai_qubits: usize,
    pub kalai_eps: f64,
    /// (n, tvd) table for the polynomial-scaling fit.
    pub scaling_table: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakOrderParams {
    pub omega0: f64,
    pub mode_frequency: f64,
    /// Coupling of the eta = 1 template; each eta scales it by sqrt(eta).
    pub base_coupling: f64,
    pub levels: usize,
    pub periods: f64,
    pub etas: Vec<f64>,
    pub n_steps: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        let field = |name: &str, ok: bool, msg: &str| -> Result<(), String> {
            if ok {
                Ok(())
            } else {
                Err(format!("{name}: {msg}"))
            }
        };
        match &self.experiment {
            ExperimentConfig::Kernels(p) => {
                p.spectral.validate().map_err(|e| format!("spectral: {e}"))?;
                field("tau_max", p.tau_max > 0.0, "must be > 0")?;
                field("n_tau", p.n_tau >= 2, "need at least 2 grid points")?;
            }
            ExperimentConfig::Propagator(p) => {
                field("resolutions", !p.resolutions.is_empty(), "empty sweep")?;
                field(
                    "resolutions",
                    p.resolutions.iter().all(|&(a, b)| a > 0 && b > 0),
                    "node counts must be positive",
                )?;
                field("n_hamiltonians", p.n_hamiltonians > 0, "must be > 0")?;
                field("n_steps", p.n_steps > 0, "must be > 0")?;
            }
            ExperimentConfig::Scaling(p) => {
                p.config
                    .spectral
                    .validate()
                    .map_err(|e| format!("spectral: {e}"))?;
                field("omega0", p.config.omega0 > 0.0, "must be > 0")?;
                field("n_values", !p.config.n_values.is_empty(), "empty sweep")?;
                field("periods", !p.config.periods.is_empty(), "empty sweep")?;
                field("eta_values", !p.config.eta_values.is_empty(), "empty sweep")?;
                field("levels", p.config.levels >= 2, "need at least 2 levels")?;
            }
            ExperimentConfig::CommonBath(p) => {
                p.spectral.validate().map_err(|e| format!("spectral: {e}"))?;
                field("n_values", !p.n_values.is_empty(), "empty sweep")?;
                field("duration", p.duration > 0.0, "must be > 0")?;
                field("n_time", p.n_time >= 2, "need at least 2 time points")?;
                field("ensemble", p.ensemble > 0, "must be > 0")?;
            }
            ExperimentConfig::Toric(p) => {
                field("lattices", !p.lattices.is_empty(), "empty sweep")?;
                for &(n, m) in &p.lattices {
                    field(
                        "lattices",
                        n >= 2 && m >= 2 && 2 * n * m <= 64,
                        "each lattice needs 2 <= N, M and 2NM <= 64",
                    )?;
                }
                field("eta", p.eta >= 0.0, "must be >= 0")?;
                field("duration", p.duration > 0.0, "must be > 0")?;
                field("ensemble", p.ensemble > 0, "must be > 0")?;
            }
            ExperimentConfig::Channels(p) => {
                p.channel.build().map_err(|e| format!("channel: {e}"))?;
                field("n_random_states", p.n_random_states > 0, "must be > 0")?;
                field("kalai_qubits", p.kalai_qubits >= 1, "must be >= 1")?;
                field(
                    "kalai_eps",
                    p.kalai_eps >= 0.0 && p.kalai_eps * p.kalai_qubits as f64 <= 1.0,
                    "flip mass must fit in [0, 1]",
                )?;
                field(
                    "scaling_table",
                    p.scaling_table.len() >= 3,
                    "need at least 3 (n, tvd) rows",
                )?;
            }
            ExperimentConfig::WeakCouplingOrder(p) => {
                field("omega0", p.omega0 > 0.0, "must be > 0")?;
                field("mode_frequency", p.mode_frequency > 0.0, "must be > 0")?;
                field("levels", p.levels >= 2, "need at least 2 levels")?;
                field("periods", p.periods > 0.0, "must be > 0")?;
                field("etas", p.etas.len() >= 3, "need at least 3 eta values")?;
                field("n_steps", p.n_steps >= 2, "need at least 2 steps")?;
            }
        }
        Ok(())
    }
}

fn default_spectral() -> SpectralDensity {
    SpectralDensity {
        eta: 0.25,
        exponent: 1.0,
        omega_c: 1.0,
        omega_cutoff: 1.0,
        cutoff: Cutoff::Exponential,
        temperature: 0.5,
    }
}

/// The experiment catalog: every entry carries a runnable default config.
pub fn catalog() -> Vec<RunConfig> {
    let mk = |experiment: ExperimentConfig| RunConfig {
        experiment,
        seed: 42,
        output_dir: PathBuf::from("out"),
        tolerances: BTreeMap::new(),
    };
    vec![
        mk(ExperimentConfig::Kernels(KernelsParams {
            spectral: default_spectral(),
            tau_max: 20.0,
            n_tau: 201,
        })),
        mk(ExperimentConfig::Propagator(PropagatorParams {
            resolutions: vec![(4, 8), (8, 16), (16, 32)],
            n_hamiltonians: 25,
            n_steps: 4,
        })),
        mk(ExperimentConfig::Scaling(ScalingParams {
            config: ScalingConfig {
                omega0: 1.0,
                spectral: SpectralDensity {
                    eta: 0.01,
                    temperature: 0.0,
                    ..default_spectral()
                },
                placement: ModePlacement::Window {
                    n_modes: 2,
                    lo: 0.9,
                    hi: 1.3,
                },
                levels: 2,
                n_values: vec![1, 2, 3],
                periods: vec![1.0, 2.0, 3.0],
                eta_values: vec![0.0, 0.01],
                counter_term: true,
                dim_cap: DEFAULT_DIM_CAP,
            },
        })),
        mk(ExperimentConfig::CommonBath(CommonBathParams {
            spectral: default_spectral(),
            n_values: vec![1, 2, 4, 8],
            duration: 8.0,
            n_time: 48,
            ensemble: 12,
            path_corner_freq: 2.0,
        })),
        mk(ExperimentConfig::Toric(ToricParams {
            lattices: vec![(2, 2), (2, 3)],
            eta: 0.05,
            duration: 5.0,
            ensemble: 64,
        })),
        mk(ExperimentConfig::Channels(ChannelsParams {
            channel: ChannelSpec::Depolarizing { p: 0.1 },
            n_random_states: 100,
            kalai_qubits: 4,
            kalai_eps: 0.01,
            scaling_table: vec![(1, 0.01), (2, 0.02), (3, 0.03), (4, 0.04)],
        })),
        mk(ExperimentConfig::WeakCouplingOrder(WeakOrderParams {
            omega0: 1.0,
            mode_frequency: 1.2,
            base_coupling: 1.0,
            levels: 4,
            periods: 1.5,
            etas: vec![1e-3, 3e-3, 1e-2],
            n_steps: 600,
        })),
    ]
}
