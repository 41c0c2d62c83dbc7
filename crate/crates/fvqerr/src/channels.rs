//! Quantum-channel utilities: depolarizing and Pauli channels, Kraus-form
//! channels read from JSON, random-unitary mixtures and their combined
//! influence action, mixture TVD, the half-TVD error-rate construction, and
//! the polynomial-scaling hypothesis fit.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};
use crate::exact::{outcome_distribution, tvd, DensityMatrix, DistributionPair};
use crate::fit::{power_law_fit, PowerLawFit};
use crate::linalg::{self, Axis};

/// A channel in Kraus form, sum_k K^dag K = 1.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<Array2<C64>>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<Array2<C64>>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(FvError::InvalidParameter("no Kraus operators".into()));
        }
        let d = kraus[0].nrows();
        let mut sum = Array2::<C64>::zeros((d, d));
        for k in &kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(FvError::InvalidParameter(
                    "Kraus operators must be square and same-sized".into(),
                ));
            }
            sum = sum + linalg::dagger(k).dot(k);
        }
        let res = linalg::max_abs(&(&sum - &linalg::identity(d)));
        if res > 1e-12 {
            return Err(FvError::InvalidParameter(format!(
                "completeness residual {res:.2e}"
            )));
        }
        Ok(Self { kraus })
    }

    pub fn operators(&self) -> &[Array2<C64>] {
        &self.kraus
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let d = rho.dim();
        let mut out = Array2::<C64>::zeros((d, d));
        for k in &self.kraus {
            out = out + k.dot(rho.matrix()).dot(&linalg::dagger(k));
        }
        DensityMatrix::new(out)
    }
}

/// (1 - p) rho + p 1/2.
pub fn depolarize(p: f64, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(FvError::InvalidParameter(format!(
            "depolarizing p = {p} outside [0, 1]"
        )));
    }
    if rho.dim() != 2 {
        return Err(FvError::InvalidParameter(
            "depolarize acts on one qubit".into(),
        ));
    }
    let out = rho.matrix().mapv(|z| z * (1.0 - p))
        + linalg::identity(2).mapv(|z| z * (0.5 * p));
    DensityMatrix::new(out)
}

/// rho -> p0 rho + sum_i p_i sigma_i rho sigma_i.
pub fn pauli_channel(probs: [f64; 4], rho: &DensityMatrix) -> Result<DensityMatrix> {
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-12 {
        return Err(FvError::InvalidParameter(format!(
            "bad Pauli probability vector (sum {sum})"
        )));
    }
    if rho.dim() != 2 {
        return Err(FvError::InvalidParameter(
            "pauli_channel acts on one qubit".into(),
        ));
    }
    let mut out = rho.matrix().mapv(|z| z * probs[0]);
    for (i, axis) in [Axis::X, Axis::Y, Axis::Z].iter().enumerate() {
        let s = linalg::pauli(*axis);
        out = out + s.dot(rho.matrix()).dot(&s).mapv(|z| z * probs[i + 1]);
    }
    DensityMatrix::new(out)
}

/// One branch of a random-unitary mixture, with an optional per-branch
/// influence action.
#[derive(Debug, Clone)]
pub struct MixtureBranch {
    pub probability: f64,
    pub unitary: Array2<C64>,
    pub action: Option<C64>,
}

/// A random superposition of unitaries sum_a p_a V_a rho V_a^dag.
#[derive(Debug, Clone)]
pub struct UnitaryMixture {
    branches: Vec<MixtureBranch>,
}

impl UnitaryMixture {
    pub fn new(branches: Vec<MixtureBranch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(FvError::InvalidParameter("empty mixture".into()));
        }
        let sum: f64 = branches.iter().map(|b| b.probability).sum();
        if branches.iter().any(|b| b.probability < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(FvError::InvalidParameter(format!(
                "mixture probabilities sum to {sum}"
            )));
        }
        for b in &branches {
            let u = &b.unitary;
            let res = linalg::max_abs(&(&linalg::dagger(u).dot(u) - &linalg::identity(u.nrows())));
            if res > 1e-12 {
                return Err(FvError::InvalidParameter(format!(
                    "branch unitarity residual {res:.2e}"
                )));
            }
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[MixtureBranch] {
        &self.branches
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let d = rho.dim();
        let mut out = Array2::<C64>::zeros((d, d));
        for b in &self.branches {
            out = out
                + b.unitary
                    .dot(rho.matrix())
                    .dot(&linalg::dagger(&b.unitary))
                    .mapv(|z| z * b.probability);
        }
        DensityMatrix::new(out)
    }
}

/// Threshold below which the mixture sum is treated as a degenerate
/// cancellation rather than fed to the logarithm.
pub const MIXTURE_CANCELLATION_TOL: f64 = 1e-8;

/// Combined influence action (1/i) log sum_a p_a exp(i Phi_a), principal
/// branch. A near-vanishing sum is reported as degenerate cancellation.
pub fn mixture_influence_action(mix: &UnitaryMixture) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    for b in &mix.branches {
        let phi = b.action.ok_or_else(|| {
            FvError::InvalidParameter("every branch needs an influence action".into())
        })?;
        sum += (phi * C64::new(0.0, 1.0)).exp() * b.probability;
    }
    if sum.norm() < MIXTURE_CANCELLATION_TOL {
        return Err(FvError::DegenerateCancellation {
            magnitude: sum.norm(),
        });
    }
    Ok(sum.ln() * C64::new(0.0, -1.0))
}

/// TVD between the mixture output distribution (mixture applied after the
/// ideal evolution) and the ideal distribution.
pub fn mixture_tvd(
    mix: &UnitaryMixture,
    rho_ideal_evolved: &DensityMatrix,
    p_ideal: &[f64],
) -> Result<f64> {
    let noisy = mix.apply(rho_ideal_evolved)?;
    let pair = DistributionPair::new(outcome_distribution(&noisy), p_ideal.to_vec())?;
    Ok(tvd(&pair))
}

/// The half-TVD error-rate construction for a point-mass ideal distribution.
#[derive(Debug, Clone, Serialize)]
pub struct KalaiReport {
    pub tvd: f64,
    /// Total error rate, half the TVD.
    pub eps_total: f64,
    /// Per-qubit rate eps_total / n.
    pub eps_per_qubit: f64,
    /// Noisy mass on outcomes more than one bit-flip from the ideal outcome;
    /// nonzero mass is flagged, not rejected.
    pub out_of_class_mass: f64,
    pub hamming_class_ok: bool,
}

/// Computes eps' = TVD/2 and eps = eps'/n, checking that the ideal
/// distribution is a point mass and flagging noisy mass beyond Hamming
/// distance one.
pub fn kalai_error_rate(d: &DistributionPair, n_qubits: usize) -> Result<KalaiReport> {
    let ideal_index = d
        .p_ideal
        .iter()
        .position(|&p| (p - 1.0).abs() < 1e-10)
        .ok_or_else(|| {
            FvError::Distribution("ideal distribution must be a point mass".into())
        })?;
    let t = tvd(d);
    let mut out_of_class = 0.0;
    for (f, &p) in d.p_noisy.iter().enumerate() {
        let dist = (f ^ ideal_index).count_ones();
        if dist > 1 {
            out_of_class += p;
        }
    }
    Ok(KalaiReport {
        tvd: t,
        eps_total: 0.5 * t,
        eps_per_qubit: 0.5 * t / n_qubits as f64,
        out_of_class_mass: out_of_class,
        hamming_class_ok: out_of_class < 1e-12,
    })
}

/// Power-law fit report for TVD vs qubit count at fixed (eta, t).
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticHypothesisReport {
    pub fit: PowerLawFit,
    /// Two-sigma confidence interval on the exponent.
    pub exponent_ci: (f64, f64),
}

/// Fits TVD = c n^alpha over (n, tvd) points; at least quadratic growth is
/// the hypothesis under test, the fitted alpha with its interval is the
/// verdict.
pub fn quadratic_hypothesis_test(points: &[(usize, f64)]) -> Result<QuadraticHypothesisReport> {
    if points.len() < 3 {
        return Err(FvError::InvalidParameter(
            "need at least 3 qubit counts".into(),
        ));
    }
    let n: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let y: Vec<f64> = points.iter().map(|&(_, v)| v).collect();
    let fit = power_law_fit(&n, &y)?;
    Ok(QuadraticHypothesisReport {
        exponent_ci: (
            fit.exponent - 2.0 * fit.exponent_stderr,
            fit.exponent + 2.0 * fit.exponent_stderr,
        ),
        fit,
    })
}

/// Channel description readable from JSON: probabilities, named single-qubit
/// Paulis, or explicit matrices (complex entries as [re, im]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelSpec {
    Depolarizing { p: f64 },
    Pauli { probs: [f64; 4] },
    Kraus { matrices: Vec<Vec<Vec<[f64; 2]>>> },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            ChannelSpec::Depolarizing { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(FvError::InvalidParameter(format!(
                        "depolarizing p = {p} outside [0, 1]"
                    )));
                }
                // (1-p) rho + p/2 = (1 - 3p/4) rho + (p/4) sum_i sigma_i rho sigma_i
                ChannelSpec::Pauli {
                    probs: [1.0 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p],
                }
                .build()
            }
            ChannelSpec::Pauli { probs } => {
                let sum: f64 = probs.iter().sum();
                if probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-12 {
                    return Err(FvError::InvalidParameter(format!(
                        "bad Pauli probability vector (sum {sum})"
                    )));
                }
                let mut kraus = Vec::new();
                let ops = [
                    linalg::identity(2),
                    linalg::pauli(Axis::X),
                    linalg::pauli(Axis::Y),
                    linalg::pauli(Axis::Z),
                ];
                for (p, op) in probs.iter().zip(ops.iter()) {
                    if *p > 0.0 {
                        kraus.push(op.mapv(|z| z * p.sqrt()));
                    }
                }
                KrausChannel::new(kraus)
            }
            ChannelSpec::Kraus { matrices } => {
                let kraus = matrices
                    .iter()
                    .map(|m| {
                        let d = m.len();
                        let mut out = Array2::<C64>::zeros((d, d));
                        for (i, row) in m.iter().enumerate() {
                            if row.len() != d {
                                return Err(FvError::InvalidParameter(
                                    "non-square Kraus matrix".into(),
                                ));
                            }
                            for (j, &[re, im]) in row.iter().enumerate() {
                                out[[i, j]] = C64::new(re, im);
                            }
                        }
                        Ok(out)
                    })
                    .collect::<Result<Vec<_>>>()?;
                KrausChannel::new(kraus)
            }
        }
    }
}
