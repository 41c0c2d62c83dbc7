//! Pairwise spin Hamiltonians H_S = sum_a mu_a . S^a + sum_ab S^a kappa_ab S^b
//! on a time grid, their dense matrices, step unitaries, and the classical
//! interaction Lagrangian obtained by substituting the spin expectation vector.
//!
//! Units: hbar = 1 throughout; mu and kappa entries are angular frequencies.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};
use crate::linalg::{self, Axis};
use crate::sphere::BlochPoint;

/// One pair coupling S^a kappa S^b (a != b); `matrix[i][j]` couples axis i of
/// spin `a` to axis j of spin `b`. Entries are stored exactly as summed: a
/// symmetric pair is represented by storing both (a, b) and (b, a) terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairCoupling {
    pub a: usize,
    pub b: usize,
    pub matrix: [[f64; 3]; 3],
}

/// Hamiltonian data for one time step: per-spin fields and pair couplings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianStep {
    pub mu: Vec<[f64; 3]>,
    pub kappa: Vec<PairCoupling>,
}

/// Piecewise-constant pairwise spin Hamiltonian on a strictly increasing time
/// grid t_0 < ... < t_K, with one [`HamiltonianStep`] per interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpinHamiltonianParams {
    pub time_grid: Vec<f64>,
    pub steps: Vec<HamiltonianStep>,
}

impl SpinHamiltonianParams {
    pub fn new(time_grid: Vec<f64>, steps: Vec<HamiltonianStep>) -> Result<Self> {
        if time_grid.len() < 2 || steps.len() + 1 != time_grid.len() {
            return Err(FvError::GridMismatch(format!(
                "{} grid points with {} steps",
                time_grid.len(),
                steps.len()
            )));
        }
        if time_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FvError::InvalidParameter(
                "time grid must be strictly increasing".into(),
            ));
        }
        let n = steps[0].mu.len();
        for s in &steps {
            if s.mu.len() != n {
                return Err(FvError::GridMismatch(
                    "spin count varies across steps".into(),
                ));
            }
            for pc in &s.kappa {
                if pc.a == pc.b || pc.a >= n || pc.b >= n {
                    return Err(FvError::InvalidParameter(format!(
                        "kappa indices ({}, {}) invalid for {} spins",
                        pc.a, pc.b, n
                    )));
                }
            }
        }
        Ok(Self { time_grid, steps })
    }

    /// Time-independent Hamiltonian over [t_i, t_f] split into `n_steps`.
    pub fn constant(
        mu: Vec<[f64; 3]>,
        kappa: Vec<PairCoupling>,
        t_i: f64,
        t_f: f64,
        n_steps: usize,
    ) -> Result<Self> {
        if n_steps == 0 || t_f <= t_i {
            return Err(FvError::InvalidParameter(
                "need t_f > t_i and at least one step".into(),
            ));
        }
        let dt = (t_f - t_i) / n_steps as f64;
        let grid = (0..=n_steps).map(|k| t_i + k as f64 * dt).collect();
        let step = HamiltonianStep { mu, kappa };
        Ok(Self {
            time_grid: grid,
            steps: vec![step; n_steps],
        })
    }

    pub fn n_spins(&self) -> usize {
        self.steps[0].mu.len()
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn t_initial(&self) -> f64 {
        self.time_grid[0]
    }

    pub fn t_final(&self) -> f64 {
        *self.time_grid.last().unwrap()
    }

    /// Index of the step whose interval contains `t` (last step at t_f).
    pub fn step_index_at(&self, t: f64) -> Result<usize> {
        if t < self.t_initial() || t > self.t_final() {
            return Err(FvError::InvalidParameter(format!(
                "t = {t} outside [{}, {}]",
                self.t_initial(),
                self.t_final()
            )));
        }
        let idx = self
            .time_grid
            .partition_point(|&tk| tk <= t)
            .saturating_sub(1);
        Ok(idx.min(self.steps.len() - 1))
    }

    /// Dense 2^n x 2^n matrix of the step Hamiltonian.
    pub fn matrix(&self, step: usize) -> Array2<C64> {
        let n = self.n_spins();
        let dims = vec![2usize; n];
        let dim = 1usize << n;
        let mut h = Array2::<C64>::zeros((dim, dim));
        let s_ops = [
            linalg::spin_half(Axis::X),
            linalg::spin_half(Axis::Y),
            linalg::spin_half(Axis::Z),
        ];
        let st = &self.steps[step];
        for (a, mu) in st.mu.iter().enumerate() {
            for (i, s_op) in s_ops.iter().enumerate() {
                if mu[i] != 0.0 {
                    h = h + linalg::embed(s_op, a, &dims).mapv(|z| z * mu[i]);
                }
            }
        }
        for pc in &st.kappa {
            for i in 0..3 {
                for j in 0..3 {
                    let g = pc.matrix[i][j];
                    if g != 0.0 {
                        let sa = linalg::embed(&s_ops[i], pc.a, &dims);
                        let sb = linalg::embed(&s_ops[j], pc.b, &dims);
                        h = h + sa.dot(&sb).mapv(|z| z * g);
                    }
                }
            }
        }
        h
    }

    /// Exact unitary for one grid step, exp(-i H_step dt).
    pub fn step_unitary(&self, step: usize) -> Result<Array2<C64>> {
        let dt = self.time_grid[step + 1] - self.time_grid[step];
        linalg::unitary_exp(&self.matrix(step), dt)
    }

    /// Full closed-system propagator U(t_f, t_i) as the ordered product of
    /// per-step exact exponentials.
    pub fn propagator(&self) -> Result<Array2<C64>> {
        let mut u = linalg::identity(1 << self.n_spins());
        for k in 0..self.n_steps() {
            u = self.step_unitary(k)?.dot(&u);
        }
        Ok(u)
    }
}

/// Classical spin vector S = (sin t cos p, sin t sin p, cos t) / 2.
pub fn classical_spin(p: &BlochPoint) -> [f64; 3] {
    let (st, ct) = (p.theta.sin(), p.theta.cos());
    let (sp, cp) = (p.phi.sin(), p.phi.cos());
    [0.5 * st * cp, 0.5 * st * sp, 0.5 * ct]
}

/// L_S for the pairwise Hamiltonian at time `t`: the classical function
/// -(sum_a mu_a . S_a + sum_ab S_a kappa_ab S_b) with S the spin vector above.
pub fn interaction_lagrangian(
    params: &SpinHamiltonianParams,
    angles: &[BlochPoint],
    t: f64,
) -> Result<f64> {
    if angles.len() != params.n_spins() {
        return Err(FvError::GridMismatch(format!(
            "{} angle sets for {} spins",
            angles.len(),
            params.n_spins()
        )));
    }
    let st = &params.steps[params.step_index_at(t)?];
    let s: Vec<[f64; 3]> = angles.iter().map(classical_spin).collect();
    let mut h = 0.0;
    for (a, mu) in st.mu.iter().enumerate() {
        h += dot3(mu, &s[a]);
    }
    for pc in &st.kappa {
        for i in 0..3 {
            for j in 0..3 {
                h += s[pc.a][i] * pc.matrix[i][j] * s[pc.b][j];
            }
        }
    }
    Ok(-h)
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn single_spin(mu: [f64; 3]) -> SpinHamiltonianParams {
        SpinHamiltonianParams::constant(vec![mu], vec![], 0.0, 1.0, 4).unwrap()
    }

    #[test]
    fn matrix_is_hermitian() {
        let params = SpinHamiltonianParams::constant(
            vec![[0.3, -0.2, 1.1], [0.0, 0.5, -0.7]],
            vec![PairCoupling {
                a: 0,
                b: 1,
                matrix: [[0.1, 0.0, 0.2], [0.0, -0.3, 0.0], [0.2, 0.1, 0.4]],
            }],
            0.0,
            2.0,
            3,
        )
        .unwrap();
        let h = params.matrix(0);
        assert!(linalg::hermiticity_residual(&h) < 1e-14);
    }

    #[test]
    fn propagator_unitary() {
        let params = single_spin([0.4, 0.9, -1.2]);
        let u = params.propagator().unwrap();
        let id = linalg::dagger(&u).dot(&u);
        assert!(max_abs(&(&id - &linalg::identity(2))) < 1e-13);
    }

    #[test]
    fn lagrangian_zero_fields() {
        let params = single_spin([0.0, 0.0, 0.0]);
        let p = BlochPoint::new(0.7, 0.4).unwrap();
        assert_eq!(interaction_lagrangian(&params, &[p], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn lagrangian_zeeman_at_pole() {
        // one spin, mu = (0, 0, w0), theta = 0 -> -w0/2
        let w0 = 1.7;
        let params = single_spin([0.0, 0.0, w0]);
        let p = BlochPoint::new(0.0, 0.0).unwrap();
        let l = interaction_lagrangian(&params, &[p], 0.0).unwrap();
        assert!((l + w0 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn lagrangian_ising_pair_at_poles() {
        // kappa^zz = g, both spins at theta = 0 -> -g/4
        let g = 0.8;
        let mut m = [[0.0; 3]; 3];
        m[2][2] = g;
        let params = SpinHamiltonianParams::constant(
            vec![[0.0; 3], [0.0; 3]],
            vec![PairCoupling { a: 0, b: 1, matrix: m }],
            0.0,
            1.0,
            1,
        )
        .unwrap();
        let p = BlochPoint::new(0.0, 0.0).unwrap();
        let l = interaction_lagrangian(&params, &[p, p], 0.0).unwrap();
        assert!((l + g / 4.0).abs() < 1e-14);
    }
}
