//! Sparse state vectors over the edge-qubit computational basis, stored as
//! index-sorted (basis, amplitude) pairs.

use num_complex::Complex64 as C64;

use super::pauli::PauliString;

const DROP_TOL: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct SparseState {
    entries: Vec<(u64, C64)>,
}

impl SparseState {
    pub fn from_entries(mut entries: Vec<(u64, C64)>) -> Self {
        entries.sort_unstable_by_key(|(b, _)| *b);
        let mut merged: Vec<(u64, C64)> = Vec::with_capacity(entries.len());
        for (b, a) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == b => *acc += a,
                _ => merged.push((b, a)),
            }
        }
        merged.retain(|(_, a)| a.norm() > DROP_TOL);
        Self { entries: merged }
    }

    pub fn entries(&self) -> &[(u64, C64)] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// <self | other> by merge join.
    pub fn inner(&self, other: &Self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (bi, ai) = self.entries[i];
            let (bj, aj) = other.entries[j];
            match bi.cmp(&bj) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += ai.conj() * aj;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// |<self|other>|^2 for unit-normalized states.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    pub fn apply(&self, p: &PauliString) -> Self {
        Self::from_entries(
            self.entries
                .iter()
                .map(|&(b, a)| {
                    let (b2, ph) = p.apply_to_basis(b);
                    (b2, a * ph)
                })
                .collect(),
        )
    }

    /// Expectation <self| P |self> / <self|self>.
    pub fn expectation(&self, p: &PauliString) -> C64 {
        self.inner(&self.apply(p)) / self.norm_sqr()
    }

    /// Expectation of the diagonal operator sum_r sigma_r^z over `n_edges`
    /// qubits, weighted per basis state as n_edges - 2 popcount(b).
    pub fn weighted_overlap_sum_z(&self, other: &Self, n_edges: usize) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (bi, ai) = self.entries[i];
            let (bj, aj) = other.entries[j];
            match bi.cmp(&bj) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let w = n_edges as f64 - 2.0 * bi.count_ones() as f64;
                    acc += ai.conj() * aj * w;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}
