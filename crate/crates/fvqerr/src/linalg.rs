//! Small dense-matrix helpers shared across the crate.

use ndarray::{linalg::kron, Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::Result;

/// Spin axis label for single-spin operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// The 2x2 Pauli matrix for the given axis.
pub fn pauli(axis: Axis) -> Array2<C64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => Array2::from_shape_vec((2, 2), vec![o, l, l, o]).unwrap(),
        Axis::Y => Array2::from_shape_vec((2, 2), vec![o, -i, i, o]).unwrap(),
        Axis::Z => Array2::from_shape_vec((2, 2), vec![l, o, o, -l]).unwrap(),
    }
}

/// Spin-1/2 operator S_axis = pauli/2.
pub fn spin_half(axis: Axis) -> Array2<C64> {
    pauli(axis).mapv(|z| z * 0.5)
}

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::eye(dim)
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Max-abs entry of M - M^dagger.
pub fn hermiticity_residual(m: &Array2<C64>) -> f64 {
    let md = dagger(m);
    (m - &md)
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
}

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max)
}

/// Kronecker product of a list of factors, left factor most significant.
pub fn kron_all(factors: &[Array2<C64>]) -> Array2<C64> {
    assert!(!factors.is_empty());
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = kron(&out, f);
    }
    out
}

/// Embed `op` on `site` of a product space with the given factor dimensions.
pub fn embed(op: &Array2<C64>, site: usize, dims: &[usize]) -> Array2<C64> {
    let mut factors: Vec<Array2<C64>> = dims.iter().map(|&d| identity(d)).collect();
    factors[site] = op.clone();
    kron_all(&factors)
}

/// Eigendecomposition of a Hermitian matrix (ascending eigenvalues).
pub fn eigh(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (vals, vecs) = h.eigh(UPLO::Lower)?;
    Ok((vals, vecs))
}

/// exp(-i H t) for Hermitian H, via eigendecomposition.
pub fn unitary_exp(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let (vals, vecs) = eigh(h)?;
    Ok(unitary_from_factors(&vals, &vecs, t))
}

/// exp(-i H t) from a precomputed eigendecomposition of H.
pub fn unitary_from_factors(vals: &Array1<f64>, vecs: &Array2<C64>, t: f64) -> Array2<C64> {
    let phases = Array1::from_iter(vals.iter().map(|&l| C64::from_polar(1.0, -l * t)));
    let mut scaled = vecs.clone();
    for (mut col, ph) in scaled.columns_mut().into_iter().zip(phases.iter()) {
        for z in col.iter_mut() {
            *z *= *ph;
        }
    }
    scaled.dot(&dagger(vecs))
}

/// Partial trace over the trailing (bath) factor: input on sys (x) bath.
pub fn partial_trace_bath(rho: &Array2<C64>, dim_sys: usize, dim_bath: usize) -> Array2<C64> {
    assert_eq!(rho.nrows(), dim_sys * dim_bath);
    let mut out = Array2::<C64>::zeros((dim_sys, dim_sys));
    for i in 0..dim_sys {
        for j in 0..dim_sys {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..dim_bath {
                acc += rho[[i * dim_bath + b, j * dim_bath + b]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}
