//! Exact-diagonalization treatment of n qubits linearly coupled through S_z to
//! truncated harmonic modes: joint Hamiltonians, thermal bath states, reduced
//! dynamics, outcome distributions, total variation distance, and the
//! TVD-scaling sweep.
//!
//! Hilbert-space layout: qubit factors first (qubit 0 most significant), then
//! bath modes in declaration order.

use ndarray::{linalg::kron, Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bath::{counter_term_coefficient, discretize_modes, window_modes, BathMode, SpectralDensity};
use crate::error::{FvError, Result};
use crate::fit::{power_law_fit, PowerLawFit};
use crate::linalg::{self, Axis};
use crate::spinham::SpinHamiltonianParams;

pub const DEFAULT_DIM_CAP: usize = 1 << 16;

/// Validated Hermitian, unit-trace matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Array2<C64>,
}

impl DensityMatrix {
    /// Checks Hermiticity and unit trace (1e-12); positivity is checked
    /// separately by [`DensityMatrix::min_eigenvalue`] since it needs a full
    /// eigendecomposition.
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(FvError::InvalidState("density matrix not square".into()));
        }
        let herm = linalg::hermiticity_residual(&mat);
        if herm > 1e-12 {
            return Err(FvError::InvalidState(format!(
                "hermiticity residual {herm:.2e}"
            )));
        }
        let tr: C64 = mat.diag().iter().sum();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(FvError::InvalidState(format!("trace {tr}")));
        }
        Ok(Self { mat })
    }

    pub fn pure(ket: &Array1<C64>) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(FvError::InvalidState(format!("ket norm^2 {norm}")));
        }
        let d = ket.len();
        let mut mat = Array2::<C64>::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                mat[[i, j]] = ket[i] * ket[j].conj();
            }
        }
        Ok(Self { mat })
    }

    /// |f><f| for the computational basis state with index `f` (qubit 0 is
    /// the most significant bit).
    pub fn basis_state(index: usize, dim: usize) -> Self {
        let mut mat = Array2::<C64>::zeros((dim, dim));
        mat[[index, index]] = C64::new(1.0, 0.0);
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().iter().sum()
    }

    pub fn purity(&self) -> f64 {
        self.mat.dot(&self.mat).diag().iter().sum::<C64>().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = linalg::eigh(&self.mat)?;
        Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// Bath wiring: disjoint per-spin mode sets, or one shared set coupled to
/// sum_k S_z^k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum BathTopology {
    /// modes[k] couple to S_z of qubit k only.
    OneBathPerSpin(Vec<Vec<BathMode>>),
    /// One shared mode set coupled to the collective sum_k S_z^k.
    Common(Vec<BathMode>),
}

/// Full open-system model: a pairwise spin Hamiltonian plus harmonic baths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub system: SpinHamiltonianParams,
    pub topology: BathTopology,
    pub temperature: f64,
    pub counter_term: bool,
    pub dim_cap: usize,
}

impl ModelSpec {
    pub fn n_qubits(&self) -> usize {
        self.system.n_spins()
    }

    pub fn bath_modes(&self) -> Vec<&BathMode> {
        match &self.topology {
            BathTopology::OneBathPerSpin(per_spin) => per_spin.iter().flatten().collect(),
            BathTopology::Common(modes) => modes.iter().collect(),
        }
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_modes().iter().map(|m| m.levels).product()
    }

    pub fn total_dim(&self) -> usize {
        (1 << self.n_qubits()) * self.bath_dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperature < 0.0 {
            return Err(FvError::InvalidParameter(
                "temperature must be >= 0".into(),
            ));
        }
        for m in self.bath_modes() {
            m.validate()?;
        }
        if let BathTopology::OneBathPerSpin(per_spin) = &self.topology {
            if per_spin.len() != self.n_qubits() {
                return Err(FvError::GridMismatch(format!(
                    "{} bath sets for {} qubits",
                    per_spin.len(),
                    self.n_qubits()
                )));
            }
        }
        let dim = self.total_dim();
        if dim > self.dim_cap {
            return Err(FvError::DimensionCap {
                dim,
                cap: self.dim_cap,
            });
        }
        Ok(())
    }

    /// Identical independent bath copies, one per spin.
    pub fn one_bath_per_spin(
        system: SpinHamiltonianParams,
        modes: Vec<BathMode>,
        temperature: f64,
        counter_term: bool,
    ) -> Self {
        let n = system.n_spins();
        Self {
            system,
            topology: BathTopology::OneBathPerSpin(vec![modes; n]),
            temperature,
            counter_term,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

fn oscillator_number(d: usize) -> Array2<C64> {
    Array2::from_diag(&Array1::from_iter(
        (0..d).map(|k| C64::new(k as f64, 0.0)),
    ))
}

fn oscillator_position(d: usize, mass: f64, freq: f64) -> Array2<C64> {
    let scale = 1.0 / (2.0 * mass * freq).sqrt();
    let mut x = Array2::<C64>::zeros((d, d));
    for k in 0..d - 1 {
        let v = C64::new(scale * ((k + 1) as f64).sqrt(), 0.0);
        x[[k, k + 1]] = v;
        x[[k + 1, k]] = v;
    }
    x
}

/// Joint Hamiltonian at system step `step`:
/// H = H_S (x) 1  +  sum couplings  +  1 (x) H_B  (+ counter-term).
pub fn build_hamiltonian(spec: &ModelSpec, step: usize) -> Result<Array2<C64>> {
    spec.validate()?;
    let nq = spec.n_qubits();
    let dim_q = 1 << nq;
    let qubit_dims = vec![2usize; nq];
    let modes = spec.bath_modes();
    let bath_dims: Vec<usize> = modes.iter().map(|m| m.levels).collect();
    let dim_b = spec.bath_dim();

    // bath-space pieces
    let mut h_bath = Array2::<C64>::zeros((dim_b, dim_b));
    for (idx, m) in modes.iter().enumerate() {
        let term = oscillator_number(m.levels) + linalg::identity(m.levels).mapv(|z| z * 0.5);
        h_bath = h_bath + linalg::embed(&term, idx, &bath_dims).mapv(|z| z * m.frequency);
    }

    // qubit-space system part, plus optional counter-term
    let mut h_sys = spec.system.matrix(step);
    if spec.counter_term {
        match &spec.topology {
            BathTopology::OneBathPerSpin(per_spin) => {
                for (k, modes_k) in per_spin.iter().enumerate() {
                    let coeff = counter_term_coefficient(modes_k);
                    if coeff != 0.0 {
                        let sz = linalg::embed(&linalg::spin_half(Axis::Z), k, &qubit_dims);
                        h_sys = h_sys + sz.dot(&sz).mapv(|z| z * coeff);
                    }
                }
            }
            BathTopology::Common(modes) => {
                let coeff = counter_term_coefficient(modes);
                if coeff != 0.0 {
                    let mut a = Array2::<C64>::zeros((dim_q, dim_q));
                    for k in 0..nq {
                        a = a + linalg::embed(&linalg::spin_half(Axis::Z), k, &qubit_dims);
                    }
                    h_sys = h_sys + a.dot(&a).mapv(|z| z * coeff);
                }
            }
        }
    }

    let mut h = kron(&h_sys, &linalg::identity(dim_b)) + kron(&linalg::identity(dim_q), &h_bath);

    // couplings: S_z^k (x) sum_n C_n x_n over that spin's modes
    match &spec.topology {
        BathTopology::OneBathPerSpin(per_spin) => {
            let mut offset = 0usize;
            for (k, modes_k) in per_spin.iter().enumerate() {
                let mut x_k = Array2::<C64>::zeros((dim_b, dim_b));
                for (j, m) in modes_k.iter().enumerate() {
                    let x1 = oscillator_position(m.levels, m.mass, m.frequency);
                    x_k = x_k + linalg::embed(&x1, offset + j, &bath_dims).mapv(|z| z * m.coupling);
                }
                offset += modes_k.len();
                let sz = linalg::embed(&linalg::spin_half(Axis::Z), k, &qubit_dims);
                h = h + kron(&sz, &x_k);
            }
        }
        BathTopology::Common(modes) => {
            let mut x = Array2::<C64>::zeros((dim_b, dim_b));
            for (j, m) in modes.iter().enumerate() {
                let x1 = oscillator_position(m.levels, m.mass, m.frequency);
                x = x + linalg::embed(&x1, j, &bath_dims).mapv(|z| z * m.coupling);
            }
            let mut a = Array2::<C64>::zeros((dim_q, dim_q));
            for k in 0..nq {
                a = a + linalg::embed(&linalg::spin_half(Axis::Z), k, &qubit_dims);
            }
            h = h + kron(&a, &x);
        }
    }
    Ok(h)
}

/// Thermal state (x)_n exp(-H_n / T)/Z_n truncated to the mode's levels and
/// renormalized; T = 0 gives the ground-state projector.
pub fn thermal_bath_state(modes: &[BathMode], temperature: f64) -> Result<DensityMatrix> {
    if temperature < 0.0 {
        return Err(FvError::InvalidParameter(
            "temperature must be >= 0".into(),
        ));
    }
    let mut rho = Array2::<C64>::ones((1, 1));
    for m in modes {
        m.validate()?;
        let weights: Vec<f64> = if temperature == 0.0 {
            let mut w = vec![0.0; m.levels];
            w[0] = 1.0;
            w
        } else {
            let w: Vec<f64> = (0..m.levels)
                .map(|k| (-(k as f64) * m.frequency / temperature).exp())
                .collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|v| v / z).collect()
        };
        let diag = Array2::from_diag(&Array1::from_iter(
            weights.into_iter().map(|v| C64::new(v, 0.0)),
        ));
        rho = kron(&rho, &diag);
    }
    DensityMatrix::new(rho)
}

/// Precomputed eigendecompositions of the per-step joint Hamiltonians, so a
/// sweep over final times costs matrix products only.
pub struct JointEvolution {
    spec: ModelSpec,
    factors: Vec<(Array1<f64>, Array2<C64>)>,
    bath_state: DensityMatrix,
}

impl JointEvolution {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let mut factors = Vec::with_capacity(spec.system.n_steps());
        for step in 0..spec.system.n_steps() {
            let h = build_hamiltonian(&spec, step)?;
            factors.push(linalg::eigh(&h)?);
        }
        let modes: Vec<BathMode> = spec.bath_modes().into_iter().copied().collect();
        let bath_state = thermal_bath_state(&modes, spec.temperature)?;
        Ok(Self {
            spec,
            factors,
            bath_state,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Exact evolution of the product state rho_i (x) rho_B^thermal to `t_f`
    /// followed by the partial trace over all bath modes.
    pub fn evolve(&self, rho_i: &DensityMatrix, t_f: f64) -> Result<DensityMatrix> {
        let nq = self.spec.n_qubits();
        let dim_q = 1 << nq;
        if rho_i.dim() != dim_q {
            return Err(FvError::GridMismatch(format!(
                "initial state dim {} but qubit space dim {dim_q}",
                rho_i.dim()
            )));
        }
        let grid = &self.spec.system.time_grid;
        let t_i = grid[0];
        if t_f < t_i || t_f > *grid.last().unwrap() + 1e-12 {
            return Err(FvError::InvalidParameter(format!(
                "t_f = {t_f} outside system grid"
            )));
        }
        let mut rho = kron(rho_i.matrix(), self.bath_state.matrix());
        for (step, (vals, vecs)) in self.factors.iter().enumerate() {
            let lo = grid[step];
            if t_f <= lo {
                break;
            }
            let hi = grid[step + 1].min(t_f);
            let u = linalg::unitary_from_factors(vals, vecs, hi - lo);
            rho = u.dot(&rho).dot(&linalg::dagger(&u));
        }
        let reduced = linalg::partial_trace_bath(&rho, dim_q, self.spec.bath_dim());
        DensityMatrix::new(reduced)
    }
}

/// One-call form of [`JointEvolution`]: evolve and trace out the bath.
pub fn evolve_and_reduce(spec: &ModelSpec, rho_i: &DensityMatrix, t_f: f64) -> Result<DensityMatrix> {
    JointEvolution::new(spec.clone())?.evolve(rho_i, t_f)
}

/// Diagonal of rho in the computational z basis.
pub fn outcome_distribution(rho: &DensityMatrix) -> Vec<f64> {
    rho.matrix().diag().iter().map(|z| z.re).collect()
}

/// A noisy/ideal distribution pair over the 2^n z-measurement outcomes.
#[derive(Debug, Clone)]
pub struct DistributionPair {
    pub p_noisy: Vec<f64>,
    pub p_ideal: Vec<f64>,
}

impl DistributionPair {
    pub fn new(p_noisy: Vec<f64>, p_ideal: Vec<f64>) -> Result<Self> {
        if p_noisy.len() != p_ideal.len() {
            return Err(FvError::Distribution(format!(
                "length mismatch {} vs {}",
                p_noisy.len(),
                p_ideal.len()
            )));
        }
        for p in [&p_noisy, &p_ideal] {
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-10 {
                return Err(FvError::Distribution(format!("sum {sum}")));
            }
            if p.iter().any(|&v| v < -1e-12) {
                return Err(FvError::Distribution("negative entry".into()));
            }
        }
        Ok(Self { p_noisy, p_ideal })
    }

    pub fn n_outcomes(&self) -> usize {
        self.p_noisy.len()
    }
}

/// Total variation distance sum_f |p(f) - q(f)|, in [0, 2].
pub fn tvd(d: &DistributionPair) -> f64 {
    d.p_noisy
        .iter()
        .zip(d.p_ideal.iter())
        .map(|(a, b)| (a - b).abs())
        .sum()
}

/// How discrete modes are placed against the continuum J for sweeps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModePlacement {
    /// Gauss-Legendre nodes of J over the support.
    GaussLegendre { n_modes: usize },
    /// Equally spaced modes over [lo, hi] (rad/s): a quasi-continuum whose
    /// single recurrence time exceeds the sweep window.
    Window { n_modes: usize, lo: f64, hi: f64 },
    /// One mode at `frequency` carrying the J-mass of a band of width
    /// `bandwidth`: C^2 = (2/pi) m w J(w) bandwidth.
    Single { frequency: f64, bandwidth: f64 },
}

impl ModePlacement {
    pub fn build(&self, sd: &SpectralDensity, levels: usize) -> Result<Vec<BathMode>> {
        match *self {
            ModePlacement::GaussLegendre { n_modes } => discretize_modes(sd, n_modes, levels),
            ModePlacement::Window { n_modes, lo, hi } => window_modes(sd, n_modes, lo, hi, levels),
            ModePlacement::Single {
                frequency,
                bandwidth,
            } => {
                if frequency <= 0.0 || bandwidth <= 0.0 {
                    return Err(FvError::InvalidParameter(
                        "single mode needs positive frequency and bandwidth".into(),
                    ));
                }
                let c2 = 2.0 / std::f64::consts::PI * frequency * sd.eval(frequency)? * bandwidth;
                Ok(vec![BathMode {
                    mass: 1.0,
                    frequency,
                    coupling: c2.sqrt(),
                    levels,
                }])
            }
        }
    }
}

/// Sweep configuration for the TVD-scaling experiment: non-interacting qubits
/// driven at `omega0` about x, one identical independent bath per spin,
/// initial state |0...0>, z measurement, durations in units of the drive
/// period 2 pi / omega0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub omega0: f64,
    pub spectral: SpectralDensity,
    pub placement: ModePlacement,
    pub levels: usize,
    pub n_values: Vec<usize>,
    pub periods: Vec<f64>,
    pub eta_values: Vec<f64>,
    pub counter_term: bool,
    pub dim_cap: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub t: f64,
    pub eta: f64,
    pub tvd: f64,
}

/// Runs the sweep over (n, t, eta). The ideal reference for each (n, t) is the
/// same joint pipeline with couplings set to zero, so eta = 0 rows give
/// exactly zero TVD.
pub fn scaling_experiment(cfg: &ScalingConfig) -> Result<Vec<ScalingPoint>> {
    if cfg.periods.is_empty() || cfg.n_values.is_empty() || cfg.eta_values.is_empty() {
        return Err(FvError::InvalidParameter("empty sweep axis".into()));
    }
    let period = 2.0 * std::f64::consts::PI / cfg.omega0;
    let t_max = period * cfg.periods.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    for &n in &cfg.n_values {
        let system = SpinHamiltonianParams::constant(
            vec![[cfg.omega0, 0.0, 0.0]; n],
            vec![],
            0.0,
            t_max,
            1,
        )?;
        let rho_i = DensityMatrix::basis_state(0, 1 << n);
        // ideal run: same pipeline, couplings zeroed
        let mut sd_ideal = cfg.spectral;
        sd_ideal.eta = 0.0;
        let mut by_eta: Vec<(f64, JointEvolution)> = Vec::new();
        for &eta in &cfg.eta_values {
            let mut sd = cfg.spectral;
            sd.eta = eta;
            sd.temperature = cfg.spectral.temperature;
            let modes = cfg.placement.build(&sd, cfg.levels)?;
            let mut spec = ModelSpec::one_bath_per_spin(
                system.clone(),
                modes,
                cfg.spectral.temperature,
                cfg.counter_term,
            );
            spec.dim_cap = cfg.dim_cap;
            by_eta.push((eta, JointEvolution::new(spec)?));
        }
        let modes0 = cfg.placement.build(&sd_ideal, cfg.levels)?;
        let mut spec0 = ModelSpec::one_bath_per_spin(
            system,
            modes0,
            cfg.spectral.temperature,
            cfg.counter_term,
        );
        spec0.dim_cap = cfg.dim_cap;
        let ideal = JointEvolution::new(spec0)?;
        for &m in &cfg.periods {
            let t = m * period;
            let p_ideal = outcome_distribution(&ideal.evolve(&rho_i, t)?);
            for (eta, ev) in &by_eta {
                let p_noisy = outcome_distribution(&ev.evolve(&rho_i, t)?);
                let pair = DistributionPair::new(p_noisy, p_ideal.clone())?;
                out.push(ScalingPoint {
                    n,
                    t,
                    eta: *eta,
                    tvd: tvd(&pair),
                });
            }
        }
    }
    Ok(out)
}

/// Log-log slope fits along each sweep axis, holding the other axes at their
/// first (nonzero, for eta) values.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFitReport {
    pub slope_n: Option<PowerLawFit>,
    pub slope_t: Option<PowerLawFit>,
    pub slope_eta: Option<PowerLawFit>,
}

pub fn fit_scaling(points: &[ScalingPoint]) -> ScalingFitReport {
    let etas: Vec<f64> = dedup(points.iter().map(|p| p.eta));
    let ns: Vec<usize> = dedup(points.iter().map(|p| p.n));
    let ts: Vec<f64> = dedup(points.iter().map(|p| p.t));
    let eta0 = etas.iter().copied().find(|&e| e > 0.0);
    let fit_axis = |xs: Vec<(f64, f64)>| -> Option<PowerLawFit> {
        if xs.len() < 2 {
            return None;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = xs.into_iter().unzip();
        power_law_fit(&x, &y).ok()
    };
    let slope_n = eta0.and_then(|e| {
        fit_axis(
            points
                .iter()
                .filter(|p| p.eta == e && p.t == ts[0])
                .map(|p| (p.n as f64, p.tvd))
                .collect(),
        )
    });
    let slope_t = eta0.and_then(|e| {
        fit_axis(
            points
                .iter()
                .filter(|p| p.eta == e && p.n == ns[0])
                .map(|p| (p.t, p.tvd))
                .collect(),
        )
    });
    let slope_eta = fit_axis(
        points
            .iter()
            .filter(|p| p.eta > 0.0 && p.n == ns[0] && p.t == ts[0])
            .map(|p| (p.eta, p.tvd))
            .collect(),
    );
    ScalingFitReport {
        slope_n,
        slope_t,
        slope_eta,
    }
}

fn dedup<T: PartialEq + Copy, I: Iterator<Item = T>>(it: I) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for v in it {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn mode(freq: f64, coupling: f64, levels: usize) -> BathMode {
        BathMode {
            mass: 1.0,
            frequency: freq,
            coupling,
            levels,
        }
    }

    fn one_qubit_spec(coupling: f64, levels: usize, t_f: f64) -> ModelSpec {
        let system =
            SpinHamiltonianParams::constant(vec![[1.0, 0.0, 0.0]], vec![], 0.0, t_f, 1).unwrap();
        ModelSpec::one_bath_per_spin(system, vec![mode(1.2, coupling, levels)], 0.0, true)
    }

    #[test]
    fn hamiltonian_hermitian_and_decoupled_block() {
        let spec = one_qubit_spec(0.3, 3, 1.0);
        let h = build_hamiltonian(&spec, 0).unwrap();
        assert!(linalg::hermiticity_residual(&h) < 1e-12);

        // C = 0: H = H_S (x) 1 + 1 (x) H_B exactly
        let spec0 = one_qubit_spec(0.0, 3, 1.0);
        let h0 = build_hamiltonian(&spec0, 0).unwrap();
        let hs = spec0.system.matrix(0);
        let mut hb = Array2::<C64>::zeros((3, 3));
        for k in 0..3 {
            hb[[k, k]] = C64::new(1.2 * (k as f64 + 0.5), 0.0);
        }
        let want = kron(&hs, &linalg::identity(3)) + kron(&linalg::identity(2), &hb);
        assert!(max_abs(&(&h0 - &want)) < 1e-14);
    }

    #[test]
    fn hamiltonian_single_mode_matches_hand_construction() {
        // 1 qubit + 1 mode d=2 without counter-term: 4x4 by hand.
        let system =
            SpinHamiltonianParams::constant(vec![[0.0, 0.0, 2.0]], vec![], 0.0, 1.0, 1).unwrap();
        let spec = ModelSpec {
            system,
            topology: BathTopology::OneBathPerSpin(vec![vec![mode(1.5, 0.4, 2)]]),
            temperature: 0.0,
            counter_term: false,
            dim_cap: DEFAULT_DIM_CAP,
        };
        let h = build_hamiltonian(&spec, 0).unwrap();
        let g = 0.4 / (2.0_f64 * 1.5).sqrt();
        let w = 1.5;
        // basis |q, n>: diag(sz*2/2) = +-1; H = w0 Sz + w(n+1/2) + C Sz x
        let mut want = Array2::<C64>::zeros((4, 4));
        for (i, (sz, n)) in [(0.5, 0.0), (0.5, 1.0), (-0.5, 0.0), (-0.5, 1.0)]
            .iter()
            .enumerate()
        {
            want[[i, i]] = C64::new(2.0 * sz + w * (n + 0.5), 0.0);
        }
        // x couples n=0 <-> n=1 within each qubit block
        want[[0, 1]] = C64::new(0.5 * g, 0.0);
        want[[1, 0]] = C64::new(0.5 * g, 0.0);
        want[[2, 3]] = C64::new(-0.5 * g, 0.0);
        want[[3, 2]] = C64::new(-0.5 * g, 0.0);
        assert!(max_abs(&(&h - &want)) < 1e-14, "\n{h:?}\nvs\n{want:?}");
    }

    #[test]
    fn dimension_cap_enforced() {
        let mut spec = one_qubit_spec(0.1, 3, 1.0);
        spec.dim_cap = 4;
        assert!(matches!(
            build_hamiltonian(&spec, 0),
            Err(FvError::DimensionCap { .. })
        ));
    }

    #[test]
    fn thermal_state_limits() {
        // T = 0 -> ground projector
        let rho = thermal_bath_state(&[mode(1.0, 0.0, 4)], 0.0).unwrap();
        assert!((rho.matrix()[[0, 0]].re - 1.0).abs() < 1e-15);
        // T -> infinity, d = 2 -> maximally mixed
        let rho = thermal_bath_state(&[mode(1.0, 0.0, 2)], 1e12).unwrap();
        assert!((rho.matrix()[[0, 0]].re - 0.5).abs() < 1e-10);
        // single mode omega, d=3, T=omega: populations (1, e^-1, e^-2)/Z
        let rho = thermal_bath_state(&[mode(1.3, 0.0, 3)], 1.3).unwrap();
        let z = 1.0 + (-1.0_f64).exp() + (-2.0_f64).exp();
        for k in 0..3 {
            let want = (-(k as f64)).exp() / z;
            assert!((rho.matrix()[[k, k]].re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn decoupled_evolution_matches_closed_system() {
        let spec = one_qubit_spec(0.0, 3, 2.0);
        let rho_i = DensityMatrix::basis_state(0, 2);
        let rho_f = evolve_and_reduce(&spec, &rho_i, 2.0).unwrap();
        let u = spec.system.propagator().unwrap();
        let want = u.dot(rho_i.matrix()).dot(&linalg::dagger(&u));
        assert!(max_abs(&(rho_f.matrix() - &want)) < 1e-10);
    }

    #[test]
    fn instant_evolution_is_identity() {
        let spec = one_qubit_spec(0.2, 3, 2.0);
        let rho_i = DensityMatrix::basis_state(0, 2);
        let rho_f = evolve_and_reduce(&spec, &rho_i, 0.0).unwrap();
        assert!(max_abs(&(rho_f.matrix() - rho_i.matrix())) < 1e-12);
    }

    #[test]
    fn weak_coupling_reduces_purity() {
        let spec = one_qubit_spec(0.15, 4, 6.0);
        let rho_i = DensityMatrix::basis_state(0, 2);
        let rho_f = evolve_and_reduce(&spec, &rho_i, 6.0).unwrap();
        assert!((rho_f.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(rho_f.min_eigenvalue().unwrap() > -1e-9);
        assert!(rho_f.purity() < 1.0 - 1e-6, "purity {}", rho_f.purity());
    }

    #[test]
    fn truncation_validated_by_doubling_levels() {
        let t = 4.0;
        let rho_i = DensityMatrix::basis_state(0, 2);
        let sys = SpinHamiltonianParams::constant(vec![[1.0, 0.0, 0.0]], vec![], 0.0, t, 1)
            .unwrap();
        let run = |levels: usize| {
            let spec = ModelSpec::one_bath_per_spin(
                sys.clone(),
                vec![mode(1.1, 0.02, levels)],
                0.0,
                true,
            );
            evolve_and_reduce(&spec, &rho_i, t).unwrap()
        };
        let a = run(4);
        let b = run(8);
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-6);
    }

    #[test]
    fn factorization_over_independent_baths() {
        // two non-interacting qubits with identical independent baths: rho_f
        // is the tensor square of the 1-qubit rho_f.
        let t = 3.0;
        let rho1 = {
            let sys =
                SpinHamiltonianParams::constant(vec![[1.0, 0.2, 0.5]], vec![], 0.0, t, 1).unwrap();
            let spec =
                ModelSpec::one_bath_per_spin(sys, vec![mode(1.2, 0.25, 3)], 0.4, true);
            evolve_and_reduce(&spec, &DensityMatrix::basis_state(0, 2), t).unwrap()
        };
        let rho2 = {
            let sys = SpinHamiltonianParams::constant(
                vec![[1.0, 0.2, 0.5]; 2],
                vec![],
                0.0,
                t,
                1,
            )
            .unwrap();
            let spec =
                ModelSpec::one_bath_per_spin(sys, vec![mode(1.2, 0.25, 3)], 0.4, true);
            evolve_and_reduce(&spec, &DensityMatrix::basis_state(0, 4), t).unwrap()
        };
        let prod = kron(rho1.matrix(), rho1.matrix());
        assert!(max_abs(&(rho2.matrix() - &prod)) < 1e-8);
    }

    #[test]
    fn outcome_distribution_cases() {
        let rho = DensityMatrix::basis_state(0, 4);
        assert_eq!(outcome_distribution(&rho), vec![1.0, 0.0, 0.0, 0.0]);
        let mixed = DensityMatrix::new(linalg::identity(4).mapv(|z| z * 0.25)).unwrap();
        for p in outcome_distribution(&mixed) {
            assert!((p - 0.25).abs() < 1e-15);
        }
        // Hadamard-like rotation of one qubit -> (1/2, 1/2)
        let v = Array1::from(vec![
            C64::new(0.5_f64.sqrt(), 0.0),
            C64::new(0.5_f64.sqrt(), 0.0),
        ]);
        let rho = DensityMatrix::pure(&v).unwrap();
        let d = outcome_distribution(&rho);
        assert!((d[0] - 0.5).abs() < 1e-14 && (d[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn tvd_cases() {
        let same = DistributionPair::new(vec![0.5, 0.5], vec![0.5, 0.5]).unwrap();
        assert_eq!(tvd(&same), 0.0);
        let disjoint = DistributionPair::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(tvd(&disjoint), 2.0);
        let pair = DistributionPair::new(vec![0.9, 0.1], vec![1.0, 0.0]).unwrap();
        assert!((tvd(&pair) - 0.2).abs() < 1e-15);
        assert!(DistributionPair::new(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(DistributionPair::new(vec![0.7, 0.7], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn scaling_eta_slope_is_linear_at_weak_coupling() {
        let cfg = ScalingConfig {
            omega0: 1.0,
            spectral: SpectralDensity::ohmic(0.01, 1.0, 0.0),
            placement: ModePlacement::Single {
                frequency: 1.15,
                bandwidth: 0.5,
            },
            levels: 2,
            n_values: vec![1],
            periods: vec![3.0],
            eta_values: vec![0.005, 0.01, 0.02],
            counter_term: true,
            dim_cap: DEFAULT_DIM_CAP,
        };
        let points = scaling_experiment(&cfg).unwrap();
        let fit = fit_scaling(&points).slope_eta.unwrap();
        assert!(
            (fit.exponent - 1.0).abs() <= 0.2,
            "eta exponent {}",
            fit.exponent
        );
    }

    #[test]
    fn scaling_eta_zero_gives_exact_zero() {
        let cfg = ScalingConfig {
            omega0: 1.0,
            spectral: SpectralDensity::ohmic(0.01, 1.0, 0.0),
            placement: ModePlacement::Window {
                n_modes: 2,
                lo: 0.9,
                hi: 1.3,
            },
            levels: 2,
            n_values: vec![1, 2],
            periods: vec![1.0, 2.0],
            eta_values: vec![0.0, 0.01],
            counter_term: true,
            dim_cap: DEFAULT_DIM_CAP,
        };
        let points = scaling_experiment(&cfg).unwrap();
        for p in points.iter().filter(|p| p.eta == 0.0) {
            assert_eq!(p.tvd, 0.0, "n={} t={}", p.n, p.t);
        }
        for p in points.iter().filter(|p| p.eta > 0.0) {
            assert!(p.tvd > 0.0);
        }
    }
}
