//! Codeword bases of syndrome sectors as sparse coset superpositions, the
//! bath-coupling matrix elements of sum_r sigma_r^z within and across
//! sectors, their coherent-state transforms over the logical qubits, and the
//! influence-magnitude estimates built from them.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lattice::TorusLattice;
use super::state::SparseState;
use crate::coherent::coherent_state_vector;
use crate::error::{FvError, Result};
use crate::sphere::BlochPoint;

/// Stabilizer eigenvalue assignment: one +-1 per vertex and per plaquette,
/// subject to the two product relations (each family multiplies to +1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeSector {
    pub vertex: Vec<i8>,
    pub plaquette: Vec<i8>,
}

impl SyndromeSector {
    pub fn ground(lat: &TorusLattice) -> Self {
        Self {
            vertex: vec![1; lat.n_vertices()],
            plaquette: vec![1; lat.n_plaquettes()],
        }
    }

    pub fn validate(&self, lat: &TorusLattice) -> Result<()> {
        if self.vertex.len() != lat.n_vertices() || self.plaquette.len() != lat.n_plaquettes() {
            return Err(FvError::InconsistentSector(format!(
                "expected {} vertex and {} plaquette labels",
                lat.n_vertices(),
                lat.n_plaquettes()
            )));
        }
        for v in self.vertex.iter().chain(self.plaquette.iter()) {
            if *v != 1 && *v != -1 {
                return Err(FvError::InconsistentSector(
                    "labels must be +-1".into(),
                ));
            }
        }
        if self.vertex.iter().map(|&v| v as i64).product::<i64>() != 1 {
            return Err(FvError::InconsistentSector(
                "vertex labels must multiply to +1".into(),
            ));
        }
        if self.plaquette.iter().map(|&v| v as i64).product::<i64>() != 1 {
            return Err(FvError::InconsistentSector(
                "plaquette labels must multiply to +1".into(),
            ));
        }
        Ok(())
    }

    /// Flip the two vertex labels adjacent to `edge` (the action of a single
    /// sigma_r^z on the sector).
    pub fn with_edge_vertex_flips(&self, lat: &TorusLattice, edge: usize) -> Self {
        let mut out = self.clone();
        let (v1, v2) = lat.edge_vertices(edge);
        out.vertex[v1.0 * lat.cols + v1.1] *= -1;
        out.vertex[v2.0 * lat.cols + v2.1] *= -1;
        out
    }
}

/// The four codewords of one syndrome sector, indexed by the logical-z labels
/// (l1, l2) in the order (+,+), (+,-), (-,+), (-,-).
#[derive(Debug, Clone)]
pub struct CodeBasis {
    pub lattice: TorusLattice,
    pub sector: SyndromeSector,
    pub codewords: [SparseState; 4],
}

pub fn logical_index(l1: i8, l2: i8) -> usize {
    let hi = usize::from(l1 < 0);
    let lo = usize::from(l2 < 0);
    (hi << 1) | lo
}

/// Builds the 4 orthonormal codewords of sector `m`: uniform-magnitude
/// superpositions chi(g) 2^{-(NM-1)/2} over the coset of the star-generated
/// group through a reference configuration with the prescribed plaquette and
/// logical-z eigenvalues; chi is the character fixing the vertex eigenvalues.
pub fn codeword_basis(lat: &TorusLattice, sector: &SyndromeSector) -> Result<CodeBasis> {
    sector.validate(lat)?;
    let nm = lat.n_vertices();
    let n_edges = lat.n_edges();

    // reference configuration for l = (+1, +1): solve over GF(2) for the
    // plaquette parities and the two logical-z parities
    let mut rows: Vec<(u64, u8)> = Vec::with_capacity(nm + 2);
    for r in 0..lat.rows {
        for c in 0..lat.cols {
            let want = u8::from(sector.plaquette[r * lat.cols + c] < 0);
            rows.push((lat.plaquette_mask(r, c), want));
        }
    }
    rows.push((lat.cycle_c1(), 0)); // s1z = +1
    rows.push((lat.cycle_c2(), 0)); // s2z = +1
    let base = solve_gf2(&rows, n_edges).ok_or_else(|| {
        FvError::InconsistentSector("no configuration matches the plaquette labels".into())
    })?;

    // star-group enumeration over all vertices but the last (the full product
    // is the identity); chi(g) is the product of the chosen vertices' labels
    let star_masks: Vec<u64> = (0..nm)
        .map(|v| lat.star_mask(v / lat.cols, v % lat.cols))
        .collect();
    let group_bits = nm - 1;
    let amp = 0.5_f64.powi(group_bits as i32 / 2)
        * if group_bits % 2 == 1 {
            0.5_f64.sqrt()
        } else {
            1.0
        };
    let logicals = lat.build_logicals();
    let mut codewords = Vec::with_capacity(4);
    for (l1, l2) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
        let mut reference = base;
        if l1 < 0 {
            reference ^= logicals.s1x.x;
        }
        if l2 < 0 {
            reference ^= logicals.s2x.x;
        }
        let mut entries = Vec::with_capacity(1 << group_bits);
        for g in 0u64..(1 << group_bits) {
            let mut mask = 0u64;
            let mut chi = 1.0;
            for (v, star) in star_masks.iter().enumerate().take(group_bits) {
                if g >> v & 1 == 1 {
                    mask ^= star;
                    chi *= sector.vertex[v] as f64;
                }
            }
            entries.push((reference ^ mask, C64::new(chi * amp, 0.0)));
        }
        codewords.push(SparseState::from_entries(entries));
    }
    let codewords: [SparseState; 4] = codewords.try_into().map_err(|_| {
        FvError::InvalidState("codeword construction produced wrong count".into())
    })?;
    Ok(CodeBasis {
        lattice: *lat,
        sector: sector.clone(),
        codewords,
    })
}

/// One solution x of the GF(2) system {mask . x = parity} over `n_vars` bits.
fn solve_gf2(rows: &[(u64, u8)], n_vars: usize) -> Option<u64> {
    let mut sys: Vec<(u64, u8)> = rows.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, bit)
    let mut rank = 0usize;
    for bit in 0..n_vars {
        if let Some(pr) = (rank..sys.len()).find(|&i| sys[i].0 >> bit & 1 == 1) {
            sys.swap(rank, pr);
            for i in 0..sys.len() {
                if i != rank && sys[i].0 >> bit & 1 == 1 {
                    sys[i].0 ^= sys[rank].0;
                    sys[i].1 ^= sys[rank].1;
                }
            }
            pivots.push((rank, bit));
            rank += 1;
        }
    }
    // inconsistent if a zero row demands parity 1
    if sys[rank..].iter().any(|&(m, p)| m == 0 && p == 1) {
        return None;
    }
    let mut x = 0u64;
    for &(row, bit) in &pivots {
        if sys[row].1 == 1 {
            x |= 1 << bit;
        }
    }
    Some(x)
}

/// <l', m| sum_r sigma_r^z |l, m> within one sector's basis.
pub fn q_matrix_element(basis: &CodeBasis, l: (i8, i8), l_prime: (i8, i8)) -> C64 {
    let bra = &basis.codewords[logical_index(l_prime.0, l_prime.1)];
    let ket = &basis.codewords[logical_index(l.0, l.1)];
    bra.weighted_overlap_sum_z(ket, basis.lattice.n_edges())
}

/// <l', m'| sum_r sigma_r^z |l, m> across sectors. Nonzero exactly when the
/// sectors differ by the two vertex labels adjacent to a single edge and the
/// logical labels agree.
pub fn q_model_matrix_element(
    lat: &TorusLattice,
    from: ((i8, i8), &SyndromeSector),
    to: ((i8, i8), &SyndromeSector),
) -> Result<C64> {
    let basis_from = codeword_basis(lat, from.1)?;
    let basis_to = codeword_basis(lat, to.1)?;
    let ket = &basis_from.codewords[logical_index(from.0 .0, from.0 .1)];
    let bra = &basis_to.codewords[logical_index(to.0 .0, to.0 .1)];
    Ok(bra.weighted_overlap_sum_z(ket, lat.n_edges()))
}

/// The 4x4 matrix Q[l'][l] over the logical labels of one sector.
pub fn q_matrix(basis: &CodeBasis) -> Array2<C64> {
    let labels = [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)];
    let mut q = Array2::<C64>::zeros((4, 4));
    for (i, &lp) in labels.iter().enumerate() {
        for (j, &l) in labels.iter().enumerate() {
            q[[i, j]] = q_matrix_element(basis, l, lp);
        }
    }
    q
}

/// Coherent-state transforms Q^F, Q^B of a 4x4 logical matrix:
/// Q^F = sum_{l,l'} <theta phi|l'> Q[l'][l] <l|theta phi> over the product
/// coherent state of the two logical qubits (and likewise backward).
pub fn q_coherent_transform(
    q: &Array2<C64>,
    forward: &[BlochPoint; 2],
    backward: &[BlochPoint; 2],
) -> (C64, C64) {
    (q_form(q, forward), q_form(q, backward))
}

fn q_form(q: &Array2<C64>, angles: &[BlochPoint; 2]) -> C64 {
    let v1 = coherent_state_vector(&angles[0]);
    let v2 = coherent_state_vector(&angles[1]);
    // <l|theta,phi>: l = +1 picks the spin-up component
    let v = [
        v1[0] * v2[0],
        v1[0] * v2[1],
        v1[1] * v2[0],
        v1[1] * v2[1],
    ];
    let mut acc = C64::new(0.0, 0.0);
    for (i, vi) in v.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            acc += vi.conj() * q[[i, j]] * vj;
        }
    }
    acc
}

/// eta Qbar^2 (t_f - t_i) with Qbar^2 the ensemble mean of |Q^F|^2 over
/// uniform random logical angles; the sector's exact Q matrix enters through
/// `q`.
pub fn fv_kitaev_estimate<R: Rng>(
    q: &Array2<C64>,
    eta: f64,
    duration: f64,
    ensemble: usize,
    rng: &mut R,
) -> f64 {
    let mut acc = 0.0;
    for _ in 0..ensemble {
        let angles = [BlochPoint::random(rng), BlochPoint::random(rng)];
        let qf = q_form(q, &angles);
        acc += qf.norm_sqr();
    }
    eta * acc / ensemble as f64 * duration
}

/// The promoted-stabilizer variant: syndrome labels treated as dynamical, so
/// single-edge sector transitions contribute at full strength. Returns
/// eta mean_r |<l, m(r)| sum sigma^z |l, m>|^2 (t_f - t_i), the analogue of
/// the fixed-sector estimate with cross-sector elements admitted.
pub fn fv_kitaev_estimate_promoted(
    lat: &TorusLattice,
    sector: &SyndromeSector,
    eta: f64,
    duration: f64,
) -> Result<f64> {
    let l = (1i8, 1i8);
    let mut acc = 0.0;
    for edge in 0..lat.n_edges() {
        let flipped = sector.with_edge_vertex_flips(lat, edge);
        let el = q_model_matrix_element(lat, (l, sector), (l, &flipped))?;
        acc += el.norm_sqr();
    }
    Ok(eta * acc / lat.n_edges() as f64 * duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gram_is_identity(basis: &CodeBasis) {
        for i in 0..4 {
            for j in 0..4 {
                let g = basis.codewords[i].inner(&basis.codewords[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g - C64::new(want, 0.0)).norm() < 1e-12,
                    "({i}, {j}): {g}"
                );
            }
        }
    }

    #[test]
    fn ground_sector_codewords_orthonormal() {
        for (n, m) in [(2, 2), (2, 3)] {
            let lat = TorusLattice::new(n, m).unwrap();
            let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
            gram_is_identity(&basis);
            // support size 2^{NM-1}, equal magnitudes 2^{-(NM-1)/2}
            let want_amp = 0.5_f64.powf((n * m - 1) as f64 / 2.0);
            for cw in &basis.codewords {
                assert_eq!(cw.entries().len(), 1 << (n * m - 1));
                for (_, a) in cw.entries() {
                    assert!((a.norm() - want_amp).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn codewords_are_stabilizer_eigenstates() {
        let lat = TorusLattice::new(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..4 {
            let sector = random_sector(&lat, &mut rng);
            let basis = codeword_basis(&lat, &sector).unwrap();
            let (a, b) = lat.build_stabilizers();
            for (k, cw) in basis.codewords.iter().enumerate() {
                for (idx, s) in a.iter().enumerate() {
                    let ev = cw.expectation(s);
                    let want = sector.vertex[idx] as f64;
                    assert!((ev - C64::new(want, 0.0)).norm() < 1e-12, "A_{idx} on {k}");
                }
                for (idx, s) in b.iter().enumerate() {
                    let ev = cw.expectation(s);
                    let want = sector.plaquette[idx] as f64;
                    assert!((ev - C64::new(want, 0.0)).norm() < 1e-12, "B_{idx} on {k}");
                }
            }
            // logical-z labels
            let logicals = lat.build_logicals();
            for (i, (l1, l2)) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)]
                .iter()
                .enumerate()
            {
                let cw = &basis.codewords[i];
                let e1 = cw.expectation(&logicals.s1z);
                let e2 = cw.expectation(&logicals.s2z);
                assert!((e1 - C64::new(*l1 as f64, 0.0)).norm() < 1e-12);
                assert!((e2 - C64::new(*l2 as f64, 0.0)).norm() < 1e-12);
            }
        }
    }

    fn random_sector(lat: &TorusLattice, rng: &mut ChaCha8Rng) -> SyndromeSector {
        // random labels with the product relations restored on the last entry
        let mut vertex: Vec<i8> = (0..lat.n_vertices())
            .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        let n = vertex.len();
        let prod: i64 = vertex[..n - 1].iter().map(|&v| v as i64).product();
        vertex[n - 1] = prod as i8;
        let mut plaquette: Vec<i8> = (0..lat.n_plaquettes())
            .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        let prod: i64 = plaquette[..n - 1].iter().map(|&v| v as i64).product();
        plaquette[n - 1] = prod as i8;
        SyndromeSector { vertex, plaquette }
    }

    #[test]
    fn cross_sector_orthogonality() {
        let lat = TorusLattice::new(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let ground = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        for _ in 0..6 {
            let sector = random_sector(&lat, &mut rng);
            if sector == SyndromeSector::ground(&lat) {
                continue;
            }
            let other = codeword_basis(&lat, &sector).unwrap();
            for cw1 in &ground.codewords {
                for cw2 in &other.codewords {
                    assert!(cw1.inner(cw2).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inconsistent_sector_rejected() {
        let lat = TorusLattice::new(2, 2).unwrap();
        let mut sector = SyndromeSector::ground(&lat);
        sector.vertex[0] = -1; // odd number of -1s violates the product rule
        assert!(matches!(
            codeword_basis(&lat, &sector),
            Err(FvError::InconsistentSector(_))
        ));
    }

    #[test]
    fn ground_sector_q_vanishes_exactly() {
        for (n, m) in [(2, 2), (2, 3)] {
            let lat = TorusLattice::new(n, m).unwrap();
            let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
            let labels = [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)];
            for &l in &labels {
                for &lp in &labels {
                    let q = q_matrix_element(&basis, l, lp);
                    assert!(q.norm() <= 1e-12, "{n}x{m} {l:?} {lp:?}: {q}");
                }
            }
        }
    }

    #[test]
    fn identity_coupling_reproduces_orthonormality() {
        // replacing sum sigma_z by the identity gives delta_{l l'}
        let lat = TorusLattice::new(2, 2).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let g = basis.codewords[i].inner(&basis.codewords[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn q_model_selection_rule_exhaustive_2x2() {
        let lat = TorusLattice::new(2, 2).unwrap();
        let ground = SyndromeSector::ground(&lat);
        let l = (1i8, 1i8);
        // same sector reduces to q_matrix_element
        let same = q_model_matrix_element(&lat, (l, &ground), (l, &ground)).unwrap();
        let basis = codeword_basis(&lat, &ground).unwrap();
        assert!((same - q_matrix_element(&basis, l, l)).norm() < 1e-14);
        // each vertex-pair transition collects one unit contribution per edge
        // sharing that star pair; on the 2x2 torus every pair is joined by
        // two parallel edges, so the magnitude is 2 rather than 1
        for edge in 0..lat.n_edges() {
            let flipped = ground.with_edge_vertex_flips(&lat, edge);
            let el = q_model_matrix_element(&lat, (l, &ground), (l, &flipped)).unwrap();
            assert!((el.norm() - 2.0).abs() < 1e-12, "edge {edge}: {el}");
        }
        // a sector differing on a non-edge vertex pattern gives zero: flip
        // the labels of two diagonal (non-adjacent) vertices
        let mut diag = ground.clone();
        diag.vertex[0] *= -1; // (0,0)
        diag.vertex[3] *= -1; // (1,1)
        let el = q_model_matrix_element(&lat, (l, &ground), (l, &diag)).unwrap();
        assert!(el.norm() < 1e-12);
        // plaquette flips can never be reached by sigma_z
        let mut pl = ground.clone();
        pl.plaquette[0] *= -1;
        pl.plaquette[1] *= -1;
        let el = q_model_matrix_element(&lat, (l, &ground), (l, &pl)).unwrap();
        assert!(el.norm() < 1e-12);
        // logical labels must agree
        let flipped = ground.with_edge_vertex_flips(&lat, 0);
        let el = q_model_matrix_element(&lat, (l, &ground), ((1, -1), &flipped)).unwrap();
        assert!(el.norm() < 1e-12);
    }

    #[test]
    fn q_model_unit_magnitude_on_unique_edges() {
        // with no parallel edges (3x3), each selection-rule transition is
        // mediated by exactly one edge and has unit magnitude
        let lat = TorusLattice::new(3, 3).unwrap();
        let ground = SyndromeSector::ground(&lat);
        let l = (1i8, 1i8);
        for edge in 0..lat.n_edges() {
            let flipped = ground.with_edge_vertex_flips(&lat, edge);
            let el = q_model_matrix_element(&lat, (l, &ground), (l, &flipped)).unwrap();
            assert!((el.norm() - 1.0).abs() < 1e-12, "edge {edge}: {el}");
        }
        // a flipped pair not joined by any edge is unreachable
        let mut diag = ground.clone();
        diag.vertex[0] *= -1; // (0, 0)
        diag.vertex[4] *= -1; // (1, 1)
        let el = q_model_matrix_element(&lat, (l, &ground), (l, &diag)).unwrap();
        assert!(el.norm() < 1e-12);
    }

    #[test]
    fn coherent_transform_poles_pick_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        // random Hermitian 4x4
        let mut q = Array2::<C64>::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                q[[i, j]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let qh = &q + &q.t().mapv(|z| z.conj());
        let poles = [
            [BlochPoint::new(0.0, 0.0).unwrap(), BlochPoint::new(0.0, 0.0).unwrap()],
            [
                BlochPoint::new(std::f64::consts::PI, 0.0).unwrap(),
                BlochPoint::new(std::f64::consts::PI, 0.0).unwrap(),
            ],
        ];
        let (qf, _) = q_coherent_transform(&qh, &poles[0], &poles[0]);
        assert!((qf - qh[[0, 0]]).norm() < 1e-13);
        let (qf, qb) = q_coherent_transform(&qh, &poles[1], &poles[1]);
        assert!((qf - qh[[3, 3]]).norm() < 1e-13);
        assert!((qb - qh[[3, 3]]).norm() < 1e-13);
        // zero matrix -> (0, 0)
        let zero = Array2::<C64>::zeros((4, 4));
        let (f, b) = q_coherent_transform(&zero, &poles[0], &poles[1]);
        assert_eq!((f, b), (C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        // identity -> completeness: Q^F = 1 for any angles
        let id = Array2::<C64>::eye(4);
        let angles = [BlochPoint::random(&mut rng), BlochPoint::random(&mut rng)];
        let (f, _) = q_coherent_transform(&id, &angles, &angles);
        assert!((f - C64::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn kitaev_estimates_ground_vs_promoted() {
        let lat = TorusLattice::new(2, 2).unwrap();
        let ground = SyndromeSector::ground(&lat);
        let basis = codeword_basis(&lat, &ground).unwrap();
        let q = q_matrix(&basis);
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        let eta = 0.05;
        let duration = 7.0;
        let fixed = fv_kitaev_estimate(&q, eta, duration, 200, &mut rng);
        let promoted = fv_kitaev_estimate_promoted(&lat, &ground, eta, duration).unwrap();
        assert!(promoted > 0.0);
        assert!(
            fixed <= 1e-12 * promoted,
            "fixed {fixed} vs promoted {promoted}"
        );
        // eta = 0 and doubling duration
        assert_eq!(
            fv_kitaev_estimate_promoted(&lat, &ground, 0.0, duration).unwrap(),
            0.0
        );
        let double = fv_kitaev_estimate_promoted(&lat, &ground, eta, 2.0 * duration).unwrap();
        assert!((double - 2.0 * promoted).abs() < 1e-12 * promoted);
    }
}
