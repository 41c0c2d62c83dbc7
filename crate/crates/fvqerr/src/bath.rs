//! Harmonic-bath spectral densities, the influence kernels k_i and k_r, the
//! influence actions S_i and S_r on doubled spin histories, and the
//! common-bath collective-coordinate action.
//!
//! Conventions (hbar = k_B = 1): J(w) = eta w^s w_c^{-s-1} cutoff(w/W);
//! a discrete bath realizes J(w) = (pi/2) sum_n C_n^2/(m_n w_n) delta(w - w_n),
//! so per-mode kernel weights are q_n = C_n^2 / (2 m_n w_n) and
//!   k_i(tau) = (1/pi) int J(w) sin(w tau) dw   = sum_n q_n sin(w_n tau),
//!   k_r(tau) = (1/pi) int J(w) cos(w tau) coth(w/2T) dw.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};
use crate::path::{Branch, DiscretizedPath};
use crate::quad::{gauss_legendre_on, integrate_oscillatory};

/// High-frequency cutoff shape of the spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    Hard,
    Exponential,
}

/// Bath parameters: J(w) = eta w^s w_c^{-s-1} for w up to the cutoff scale
/// `omega_cutoff`, at temperature `temperature`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub eta: f64,
    /// Spectral exponent s; 1 is Ohmic.
    pub exponent: f64,
    /// Reference frequency w_c fixing units of J.
    pub omega_c: f64,
    /// Cutoff frequency W.
    pub omega_cutoff: f64,
    pub cutoff: Cutoff,
    /// Temperature in energy units (k_B = 1); 0 means the T -> 0 limit
    /// coth -> 1.
    pub temperature: f64,
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        if self.eta < 0.0 {
            return Err(FvError::InvalidParameter("eta must be >= 0".into()));
        }
        if self.omega_cutoff <= 0.0 || self.omega_c <= 0.0 {
            return Err(FvError::InvalidParameter(
                "omega_c and omega_cutoff must be > 0".into(),
            ));
        }
        if self.temperature < 0.0 {
            return Err(FvError::InvalidParameter(
                "temperature must be >= 0".into(),
            ));
        }
        Ok(())
    }

    /// An Ohmic bath with exponential cutoff and w_c = W.
    pub fn ohmic(eta: f64, omega_cutoff: f64, temperature: f64) -> Self {
        Self {
            eta,
            exponent: 1.0,
            omega_c: omega_cutoff,
            omega_cutoff,
            cutoff: Cutoff::Exponential,
            temperature,
        }
    }

    /// J(w); rejects negative frequencies.
    pub fn eval(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(FvError::InvalidParameter(format!(
                "J evaluated at negative frequency {omega}"
            )));
        }
        Ok(self.eval_unchecked(omega))
    }

    fn eval_unchecked(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return if self.exponent > 0.0 { 0.0 } else { f64::NAN };
        }
        let base = self.eta
            * omega.powf(self.exponent)
            * self.omega_c.powf(-self.exponent - 1.0);
        match self.cutoff {
            Cutoff::Hard => {
                if omega <= self.omega_cutoff {
                    base
                } else {
                    0.0
                }
            }
            Cutoff::Exponential => base * (-omega / self.omega_cutoff).exp(),
        }
    }

    /// Upper integration limit where the integrand is negligible.
    fn omega_max(&self) -> f64 {
        match self.cutoff {
            Cutoff::Hard => self.omega_cutoff,
            Cutoff::Exponential => 45.0 * self.omega_cutoff,
        }
    }

    /// Operational kernel support width: max(1/W, 1/T).
    pub fn kernel_width(&self) -> f64 {
        let w = 1.0 / self.omega_cutoff;
        if self.temperature > 0.0 {
            w.max(1.0 / self.temperature)
        } else {
            w
        }
    }
}

fn coth(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

/// Absolute kernel tolerance, relative to the natural kernel magnitude.
const KERNEL_TOL: f64 = 1e-10;

fn kernel_scale(sd: &SpectralDensity) -> f64 {
    let base = sd.eta * sd.omega_cutoff.powf(sd.exponent + 1.0)
        / sd.omega_c.powf(sd.exponent + 1.0);
    base * (1.0 + sd.temperature / sd.omega_cutoff)
}

fn gate(value: f64, error_estimate: f64, scale: f64) -> Result<f64> {
    let tol = KERNEL_TOL * scale.max(1e-300);
    if error_estimate > tol {
        return Err(FvError::QuadratureNonConvergence {
            achieved: error_estimate,
            requested: tol,
        });
    }
    Ok(value)
}

/// k_i(tau) = (1/pi) int_0^inf J(w) sin(w tau) dw, odd in tau.
/// Non-convergence is reported with the achieved error estimate.
pub fn kernel_ki(sd: &SpectralDensity, tau: f64) -> Result<f64> {
    sd.validate()?;
    if !tau.is_finite() {
        return Err(FvError::InvalidParameter("tau must be finite".into()));
    }
    if tau == 0.0 || sd.eta == 0.0 {
        return Ok(0.0);
    }
    let at = tau.abs();
    let f = |w: f64| sd.eval_unchecked(w) * (w * at).sin();
    let q = integrate_oscillatory(&f, 0.0, sd.omega_max(), at, sd.omega_cutoff)?;
    let v = gate(q.value, q.error_estimate, kernel_scale(sd))?;
    Ok(tau.signum() * v / std::f64::consts::PI)
}

/// k_r(tau) = (1/pi) int_0^inf J(w) cos(w tau) coth(w / 2T) dw, even in tau.
/// T = 0 uses the coth -> 1 limit. Rejects s <= 0 with T > 0 (infrared
/// divergent).
pub fn kernel_kr(sd: &SpectralDensity, tau: f64) -> Result<f64> {
    sd.validate()?;
    if !tau.is_finite() {
        return Err(FvError::InvalidParameter("tau must be finite".into()));
    }
    if sd.eta == 0.0 {
        return Ok(0.0);
    }
    if sd.temperature > 0.0 && sd.exponent <= 0.0 {
        return Err(FvError::InvalidParameter(format!(
            "s = {} with T > 0 is infrared divergent",
            sd.exponent
        )));
    }
    let at = tau.abs();
    let t = sd.temperature;
    let f = |w: f64| {
        let jw = sd.eval_unchecked(w);
        let th = if t > 0.0 { coth(w / (2.0 * t)) } else { 1.0 };
        if w == 0.0 {
            // s = 1 limit: J coth -> 2 T eta / w_c^2 * cutoff(0)
            if t > 0.0 && (sd.exponent - 1.0).abs() < 1e-12 {
                2.0 * t * sd.eta * sd.omega_c.powf(-2.0)
            } else {
                0.0
            }
        } else {
            jw * (w * at).cos() * th
        }
    };
    // resolve the coth knee at w ~ 2T separately when it sits well below the
    // cutoff scale
    let b = sd.omega_max();
    let split = if t > 0.0 { (8.0 * t).min(b) } else { 0.0 };
    let (value, err) = if split > 0.0 && split < 0.5 * sd.omega_cutoff {
        let q1 = integrate_oscillatory(&f, 0.0, split, at, 2.0 * t)?;
        let q2 = integrate_oscillatory(&f, split, b, at, sd.omega_cutoff)?;
        (q1.value + q2.value, q1.error_estimate + q2.error_estimate)
    } else {
        let smooth = if t > 0.0 {
            sd.omega_cutoff.min(2.0 * t)
        } else {
            sd.omega_cutoff
        };
        let q = integrate_oscillatory(&f, 0.0, b, at, smooth)?;
        (q.value, q.error_estimate)
    };
    let v = gate(value, err, kernel_scale(sd))?;
    Ok(v / std::f64::consts::PI)
}

/// One discrete bath oscillator (mass, frequency, coupling, truncation levels).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BathMode {
    pub mass: f64,
    pub frequency: f64,
    pub coupling: f64,
    pub levels: usize,
}

impl BathMode {
    pub fn validate(&self) -> Result<()> {
        if self.frequency <= 0.0 || self.mass <= 0.0 {
            return Err(FvError::InvalidParameter(
                "mode mass and frequency must be > 0".into(),
            ));
        }
        if self.levels < 2 {
            return Err(FvError::InvalidParameter(
                "mode truncation needs at least 2 levels".into(),
            ));
        }
        Ok(())
    }

    /// Kernel weight q = C^2 / (2 m w).
    pub fn kernel_weight(&self) -> f64 {
        self.coupling * self.coupling / (2.0 * self.mass * self.frequency)
    }
}

/// Discrete modes standing in for the continuum J: Gauss-Legendre nodes over
/// the support ([0, W] hard, [0, 5 W] exponential) with couplings from the
/// quadrature weights, C_n = sqrt((2/pi) m w_n J(w_n) dw_n).
pub fn discretize_modes(sd: &SpectralDensity, n_modes: usize, levels: usize) -> Result<Vec<BathMode>> {
    sd.validate()?;
    let top = match sd.cutoff {
        Cutoff::Hard => sd.omega_cutoff,
        Cutoff::Exponential => 5.0 * sd.omega_cutoff,
    };
    let (nodes, weights) = gauss_legendre_on(n_modes, 0.0, top);
    nodes
        .iter()
        .zip(weights.iter())
        .map(|(&w, &dw)| {
            let c2 = 2.0 / std::f64::consts::PI * w * sd.eval(w)? * dw;
            Ok(BathMode {
                mass: 1.0,
                frequency: w,
                coupling: c2.sqrt(),
                levels,
            })
        })
        .collect()
}

/// Equally spaced modes over a frequency window [lo, hi], weighted by J.
/// A quasi-continuum with a single recurrence time 2 pi (hi - lo) / (n - 1);
/// used where a clean golden-rule window matters more than coverage of the
/// full cutoff range.
pub fn window_modes(
    sd: &SpectralDensity,
    n_modes: usize,
    lo: f64,
    hi: f64,
    levels: usize,
) -> Result<Vec<BathMode>> {
    sd.validate()?;
    if n_modes < 2 || lo < 0.0 || hi <= lo {
        return Err(FvError::InvalidParameter(
            "window needs n_modes >= 2 and 0 <= lo < hi".into(),
        ));
    }
    let dw = (hi - lo) / (n_modes - 1) as f64;
    (0..n_modes)
        .map(|k| {
            let w = lo + k as f64 * dw;
            let c2 = 2.0 / std::f64::consts::PI * w * sd.eval(w)? * dw;
            Ok(BathMode {
                mass: 1.0,
                frequency: w,
                coupling: c2.sqrt(),
                levels,
            })
        })
        .collect()
}

/// Counter-term coefficient sum_n C_n^2 / (2 m_n w_n^2), multiplying the
/// square of the coupling operator.
pub fn counter_term_coefficient(modes: &[BathMode]) -> f64 {
    modes
        .iter()
        .map(|m| m.coupling * m.coupling / (2.0 * m.mass * m.frequency * m.frequency))
        .sum()
}

/// Tabulated kernels on a tau >= 0 grid; k_i extends oddly, k_r evenly.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub tau: Vec<f64>,
    pub ki: Vec<f64>,
    pub kr: Vec<f64>,
    pub source: SpectralDensity,
}

impl KernelTable {
    /// Tabulate the continuum kernels on a uniform grid over [0, tau_max].
    pub fn tabulate(sd: &SpectralDensity, tau_max: f64, n: usize) -> Result<Self> {
        if n < 2 || tau_max <= 0.0 {
            return Err(FvError::InvalidParameter(
                "need tau_max > 0 and at least 2 grid points".into(),
            ));
        }
        let tau: Vec<f64> = (0..n).map(|k| tau_max * k as f64 / (n - 1) as f64).collect();
        let ki = tau
            .iter()
            .map(|&t| kernel_ki(sd, t))
            .collect::<Result<Vec<_>>>()?;
        let kr = tau
            .iter()
            .map(|&t| kernel_kr(sd, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tau,
            ki,
            kr,
            source: *sd,
        })
    }

    /// Exact kernels of a discrete-mode bath at temperature `sd.temperature`,
    /// tabulated on the same kind of grid. `sd` records the continuum the
    /// modes were sampled from.
    pub fn from_modes(
        sd: &SpectralDensity,
        modes: &[BathMode],
        tau_max: f64,
        n: usize,
    ) -> Result<Self> {
        if n < 2 || tau_max <= 0.0 {
            return Err(FvError::InvalidParameter(
                "need tau_max > 0 and at least 2 grid points".into(),
            ));
        }
        for m in modes {
            m.validate()?;
        }
        let t = sd.temperature;
        let tau: Vec<f64> = (0..n).map(|k| tau_max * k as f64 / (n - 1) as f64).collect();
        let mut ki = vec![0.0; n];
        let mut kr = vec![0.0; n];
        for m in modes {
            let q = m.kernel_weight();
            let th = if t > 0.0 {
                coth(m.frequency / (2.0 * t))
            } else {
                1.0
            };
            for (k, &tv) in tau.iter().enumerate() {
                ki[k] += q * (m.frequency * tv).sin();
                kr[k] += q * th * (m.frequency * tv).cos();
            }
        }
        Ok(Self {
            tau,
            ki,
            kr,
            source: *sd,
        })
    }

    pub fn tau_max(&self) -> f64 {
        *self.tau.last().unwrap()
    }

    fn interp(&self, values: &[f64], tau: f64) -> f64 {
        let at = tau.abs();
        let n = self.tau.len();
        if at >= self.tau[n - 1] {
            return values[n - 1];
        }
        let idx = self.tau.partition_point(|&t| t <= at).saturating_sub(1);
        let (t0, t1) = (self.tau[idx], self.tau[idx + 1]);
        let f = (at - t0) / (t1 - t0);
        values[idx] * (1.0 - f) + values[idx + 1] * f
    }

    /// k_i with odd extension to tau < 0.
    pub fn eval_ki(&self, tau: f64) -> f64 {
        tau.signum() * self.interp(&self.ki, tau)
    }

    /// k_r with even extension to tau < 0.
    pub fn eval_kr(&self, tau: f64) -> f64 {
        self.interp(&self.kr, tau)
    }

    /// CSV with header `tau,ki,kr`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,ki,kr")?;
        for k in 0..self.tau.len() {
            writeln!(
                w,
                "{},{},{}",
                fmt_float(self.tau[k]),
                fmt_float(self.ki[k]),
                fmt_float(self.kr[k])
            )?;
        }
        Ok(())
    }
}

/// Fixed-point float formatting shared by the CSV emitters: `.` decimal
/// separator, scientific notation below 1e-4 in magnitude.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.abs() < 1e-4 {
        format!("{x:.12e}")
    } else {
        format!("{x:.12}")
    }
}

/// The pair (S_i, S_r) of influence actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluencePair {
    pub s_i: f64,
    /// Non-negative up to discretization error.
    pub s_r: f64,
}

impl InfluencePair {
    /// i Phi = i S_i - S_r, i.e. Phi = S_i + i S_r (hbar = 1).
    pub fn phi(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.s_i, self.s_r)
    }
}

/// S_i and S_r for one spin's forward/backward S_z histories:
///   S_i = int_t int_{s<t} (Szf - Szb)(t) (Szf + Szb)(s) k_i(t - s),
///   S_r = int_t int_{s<t} (Szf - Szb)(t) (Szf - Szb)(s) k_r(t - s),
/// by double trapezoid over the triangle with diagonal half-weights.
pub fn influence_action(
    kt: &KernelTable,
    path: &DiscretizedPath,
    spin_index: usize,
) -> Result<InfluencePair> {
    if spin_index >= path.n_spins() {
        return Err(FvError::GridMismatch(format!(
            "spin index {spin_index} out of range for {} spins",
            path.n_spins()
        )));
    }
    let szf = path.sz_history(spin_index, Branch::Forward);
    let szb = path.sz_history(spin_index, Branch::Backward);
    influence_action_on_sz(kt, &path.time_grid, &szf, &szb)
}

/// The same double integral on raw S_z histories; the collective-coordinate
/// action reuses this directly.
pub fn influence_action_on_sz(
    kt: &KernelTable,
    time_grid: &[f64],
    szf: &[f64],
    szb: &[f64],
) -> Result<InfluencePair> {
    let n = time_grid.len();
    if szf.len() != n || szb.len() != n {
        return Err(FvError::GridMismatch(
            "S_z history length differs from time grid".into(),
        ));
    }
    let span = time_grid[n - 1] - time_grid[0];
    if span > kt.tau_max() * (1.0 + 1e-12) {
        return Err(FvError::GridMismatch(format!(
            "kernel table covers tau <= {} but path spans {}",
            kt.tau_max(),
            span
        )));
    }
    let w = trapezoid_weights(time_grid);
    let diff: Vec<f64> = szf.iter().zip(szb).map(|(f, b)| f - b).collect();
    let sum: Vec<f64> = szf.iter().zip(szb).map(|(f, b)| f + b).collect();
    let mut s_i = 0.0;
    let mut s_r = 0.0;
    for j in 0..n {
        for l in 0..=j {
            let wt = w[j] * w[l] * if l == j { 0.5 } else { 1.0 };
            let tau = time_grid[j] - time_grid[l];
            s_i += wt * diff[j] * sum[l] * kt.eval_ki(tau);
            s_r += wt * diff[j] * diff[l] * kt.eval_kr(tau);
        }
    }
    Ok(InfluencePair { s_i, s_r })
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let dt = grid[k + 1] - grid[k];
        w[k] += 0.5 * dt;
        w[k + 1] += 0.5 * dt;
    }
    w
}

/// Mean |S_i| and |S_r| over a path ensemble, divided by eta (t_f - t_i).
/// O(1) stable ratios once the duration exceeds the kernel width embody the
/// estimate S ~ eta (t_f - t_i).
pub fn influence_estimate_ratio(
    kt: &KernelTable,
    paths: &[DiscretizedPath],
) -> Result<(f64, f64)> {
    if paths.is_empty() {
        return Err(FvError::InvalidParameter("empty path ensemble".into()));
    }
    let eta = kt.source.eta;
    if eta == 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut acc_i = 0.0;
    let mut acc_r = 0.0;
    let mut count = 0usize;
    for p in paths {
        for s in 0..p.n_spins() {
            let pair = influence_action(kt, p, s)?;
            let norm = eta * p.duration();
            acc_i += pair.s_i.abs() / norm;
            acc_r += pair.s_r.abs() / norm;
            count += 1;
        }
    }
    Ok((acc_i / count as f64, acc_r / count as f64))
}

/// Common-bath influence action: collective coordinates
/// mean_k cos(theta_k^{f,b}) drive a single doubled history, scaled by n^2.
pub fn common_bath_influence(kt: &KernelTable, path: &DiscretizedPath) -> Result<InfluencePair> {
    let n = path.n_spins() as f64;
    let nt = path.n_times();
    let mut szf = vec![0.0; nt];
    let mut szb = vec![0.0; nt];
    for s in 0..path.n_spins() {
        for (k, v) in path.sz_history(s, Branch::Forward).iter().enumerate() {
            szf[k] += v / n;
        }
        for (k, v) in path.sz_history(s, Branch::Backward).iter().enumerate() {
            szb[k] += v / n;
        }
    }
    let pair = influence_action_on_sz(kt, &path.time_grid, &szf, &szb)?;
    Ok(InfluencePair {
        s_i: n * n * pair.s_i,
        s_r: n * n * pair.s_r,
    })
}
