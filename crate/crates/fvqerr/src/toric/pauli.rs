//! Bit-packed Pauli strings on up to 64 qubits, P = i^phase X^x Z^z.

use num_complex::Complex64 as C64;

use crate::error::{FvError, Result};

/// An n-qubit Pauli operator with x/z bit masks and an i^phase prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliString {
    pub n: usize,
    pub x: u64,
    pub z: u64,
    /// Power of i, modulo 4.
    pub phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(FvError::InvalidParameter(format!(
                "{n} qubits outside supported 1..=64"
            )));
        }
        Ok(Self {
            n,
            x: 0,
            z: 0,
            phase: 0,
        })
    }

    pub fn x_string(n: usize, mask: u64) -> Result<Self> {
        let mut p = Self::identity(n)?;
        p.x = mask & bitmask(n);
        Ok(p)
    }

    pub fn z_string(n: usize, mask: u64) -> Result<Self> {
        let mut p = Self::identity(n)?;
        p.z = mask & bitmask(n);
        Ok(p)
    }

    pub fn x_on(n: usize, qubit: usize) -> Result<Self> {
        Self::x_string(n, 1u64 << qubit)
    }

    pub fn z_on(n: usize, qubit: usize) -> Result<Self> {
        Self::z_string(n, 1u64 << qubit)
    }

    /// sigma_y = i sigma_x sigma_z on one qubit.
    pub fn y_on(n: usize, qubit: usize) -> Result<Self> {
        let mut p = Self::identity(n)?;
        p.x = 1u64 << qubit;
        p.z = 1u64 << qubit;
        p.phase = 1;
        Ok(p)
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Product self * other, tracking the i^k prefactor:
    /// Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1.
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let swaps = (self.z & other.x).count_ones();
        Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (self.phase + other.phase + 2 * (swaps as u8 & 1)) % 4,
        }
    }

    /// Hermitian adjoint: (i^k X Z)^dagger = i^{-k} (-1)^{|x & z|} X Z.
    pub fn adjoint(&self) -> Self {
        let flips = (self.x & self.z).count_ones();
        Self {
            n: self.n,
            x: self.x,
            z: self.z,
            phase: ((4 - self.phase) + 2 * (flips as u8 & 1)) % 4,
        }
    }

    /// Symplectic commutation test.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let a = (self.x & other.z).count_ones() & 1;
        let b = (self.z & other.x).count_ones() & 1;
        a == b
    }

    /// P |b> = i^phase (-1)^{|z & b|} |b ^ x> in the computational basis
    /// (bit r set means spin r is down, sigma_z eigenvalue -1).
    pub fn apply_to_basis(&self, b: u64) -> (u64, C64) {
        let sign = if (self.z & b).count_ones() & 1 == 1 {
            -1.0
        } else {
            1.0
        };
        let ph = match self.phase {
            0 => C64::new(sign, 0.0),
            1 => C64::new(0.0, sign),
            2 => C64::new(-sign, 0.0),
            _ => C64::new(0.0, -sign),
        };
        (b ^ self.x, ph)
    }
}

fn bitmask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_squares_to_identity() {
        let y = PauliString::y_on(4, 2).unwrap();
        let yy = y.mul(&y);
        assert_eq!(yy.x, 0);
        assert_eq!(yy.z, 0);
        // i X Z i X Z = i^2 XZXZ = i^2 (-1) = +1
        assert_eq!(yy.phase, 0);
    }

    #[test]
    fn xz_anticommute_on_same_qubit() {
        let x = PauliString::x_on(2, 0).unwrap();
        let z = PauliString::z_on(2, 0).unwrap();
        assert!(!x.commutes_with(&z));
        let z1 = PauliString::z_on(2, 1).unwrap();
        assert!(x.commutes_with(&z1));
        // xz = -zx as strings
        let xz = x.mul(&z);
        let zx = z.mul(&x);
        assert_eq!(xz.x, zx.x);
        assert_eq!(xz.z, zx.z);
        assert_eq!((xz.phase + 2) % 4, zx.phase);
    }

    #[test]
    fn adjoint_involution_and_y_hermitian() {
        let y = PauliString::y_on(3, 1).unwrap();
        assert_eq!(y.adjoint(), y);
        let x = PauliString::x_on(3, 0).unwrap();
        let p = x.mul(&y);
        assert_eq!(p.adjoint().adjoint(), p);
        // P Pdag = identity with phase 0
        let prod = p.mul(&p.adjoint());
        assert_eq!((prod.x, prod.z, prod.phase), (0, 0, 0));
    }

    #[test]
    fn basis_action() {
        let z = PauliString::z_on(2, 0).unwrap();
        // |b>: bit 0 set -> eigenvalue -1
        assert_eq!(z.apply_to_basis(0b01), (0b01, C64::new(-1.0, 0.0)));
        assert_eq!(z.apply_to_basis(0b10), (0b10, C64::new(1.0, 0.0)));
        let x = PauliString::x_on(2, 1).unwrap();
        assert_eq!(x.apply_to_basis(0b01), (0b11, C64::new(1.0, 0.0)));
        let y = PauliString::y_on(2, 0).unwrap();
        // Y|0> = i X Z |0> = i|1>
        assert_eq!(y.apply_to_basis(0b00), (0b01, C64::new(0.0, 1.0)));
        // Y|1> = i X Z |1> = -i|0>
        assert_eq!(y.apply_to_basis(0b01), (0b00, C64::new(0.0, -1.0)));
    }
}
