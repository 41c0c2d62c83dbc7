//! Syndrome measurement, minimal-path single-error recovery, and the
//! Knill-Laflamme correctability check.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::code::{CodeBasis, SyndromeSector};
use super::lattice::TorusLattice;
use super::pauli::PauliString;
use super::state::SparseState;
use crate::error::{FvError, Result};

/// Time-stamped history of full syndrome measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyndromeRecord {
    pub times: Vec<f64>,
    pub sectors: Vec<SyndromeSector>,
}

impl SyndromeRecord {
    pub fn new(times: Vec<f64>, sectors: Vec<SyndromeSector>) -> Result<Self> {
        if times.len() != sectors.len() || times.is_empty() {
            return Err(FvError::InvalidParameter(
                "record needs matching, non-empty times and sectors".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FvError::InvalidParameter(
                "record times must increase".into(),
            ));
        }
        Ok(Self { times, sectors })
    }

    pub fn latest(&self) -> &SyndromeSector {
        self.sectors.last().unwrap()
    }

    /// Stabilizer indices on which consecutive records differ.
    pub fn changes(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        self.sectors
            .windows(2)
            .map(|w| {
                let dv = w[0]
                    .vertex
                    .iter()
                    .zip(&w[1].vertex)
                    .enumerate()
                    .filter(|(_, (a, b))| a != b)
                    .map(|(i, _)| i)
                    .collect();
                let dp = w[0]
                    .plaquette
                    .iter()
                    .zip(&w[1].plaquette)
                    .enumerate()
                    .filter(|(_, (a, b))| a != b)
                    .map(|(i, _)| i)
                    .collect();
                (dv, dp)
            })
            .collect()
    }
}

/// Measures every stabilizer eigenvalue of a stabilizer eigenstate.
pub fn measure_syndrome(lat: &TorusLattice, state: &SparseState) -> Result<SyndromeSector> {
    let (a_ops, b_ops) = lat.build_stabilizers();
    let read = |s: &PauliString| -> Result<i8> {
        let ev = state.expectation(s);
        if (ev - C64::new(1.0, 0.0)).norm() < 1e-8 {
            Ok(1)
        } else if (ev + C64::new(1.0, 0.0)).norm() < 1e-8 {
            Ok(-1)
        } else {
            Err(FvError::InvalidState(format!(
                "not a stabilizer eigenstate: <S> = {ev}"
            )))
        }
    };
    Ok(SyndromeSector {
        vertex: a_ops.iter().map(&read).collect::<Result<_>>()?,
        plaquette: b_ops.iter().map(&read).collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecoveryStatus {
    Corrected,
    /// Defects cannot be paired (odd counts or more than one pair per type).
    Unpaired { vertex_defects: usize, plaquette_defects: usize },
    /// Multiple minimal corrections differ by a logical operator; applying
    /// any of them risks silent logical corruption, so none is applied.
    Ambiguous { candidate_masks: Vec<u64> },
}

/// Outcome of a recovery attempt: the (possibly) corrected state, the
/// correction applied, and the defect bookkeeping.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub status: RecoveryStatus,
    pub state: SparseState,
    pub correction: Option<PauliString>,
    pub vertex_defects: Vec<(usize, usize)>,
    pub plaquette_defects: Vec<(usize, usize)>,
}

impl Recovery {
    pub fn corrected(&self) -> bool {
        self.status == RecoveryStatus::Corrected
    }
}

/// Measures the syndrome of `state`, diffs it against the recorded sector,
/// pairs defects by minimal torus paths, and applies the correcting string.
/// Ambiguous minimal pairings (candidates differing by a logical) and
/// unpairable defect sets are reported as failures, with the state returned
/// unchanged.
pub fn recovery_map(
    lat: &TorusLattice,
    state: &SparseState,
    record: &SyndromeRecord,
) -> Result<Recovery> {
    let reference = record.latest();
    reference.validate(lat)?;
    let measured = measure_syndrome(lat, state)?;
    let vertex_defects: Vec<(usize, usize)> = (0..lat.n_vertices())
        .filter(|&i| measured.vertex[i] != reference.vertex[i])
        .map(|i| (i / lat.cols, i % lat.cols))
        .collect();
    let plaquette_defects: Vec<(usize, usize)> = (0..lat.n_plaquettes())
        .filter(|&i| measured.plaquette[i] != reference.plaquette[i])
        .map(|i| (i / lat.cols, i % lat.cols))
        .collect();

    let fail = |status: RecoveryStatus| Recovery {
        status,
        state: state.clone(),
        correction: None,
        vertex_defects: vertex_defects.clone(),
        plaquette_defects: plaquette_defects.clone(),
    };

    if vertex_defects.len() > 2
        || plaquette_defects.len() > 2
        || vertex_defects.len() % 2 == 1
        || plaquette_defects.len() % 2 == 1
    {
        return Ok(fail(RecoveryStatus::Unpaired {
            vertex_defects: vertex_defects.len(),
            plaquette_defects: plaquette_defects.len(),
        }));
    }

    let mut z_mask = 0u64;
    if vertex_defects.len() == 2 {
        let paths = lat.minimal_vertex_paths(vertex_defects[0], vertex_defects[1]);
        if !paths
            .iter()
            .skip(1)
            .all(|&p| lat.z_cycle_is_trivial(p ^ paths[0]))
        {
            return Ok(fail(RecoveryStatus::Ambiguous {
                candidate_masks: paths,
            }));
        }
        z_mask = paths[0];
    }
    let mut x_mask = 0u64;
    if plaquette_defects.len() == 2 {
        let paths = lat.minimal_plaquette_paths(plaquette_defects[0], plaquette_defects[1]);
        if !paths
            .iter()
            .skip(1)
            .all(|&p| lat.x_cycle_is_trivial(p ^ paths[0]))
        {
            return Ok(fail(RecoveryStatus::Ambiguous {
                candidate_masks: paths,
            }));
        }
        x_mask = paths[0];
    }

    let correction = PauliString::z_string(lat.n_edges(), z_mask)?
        .mul(&PauliString::x_string(lat.n_edges(), x_mask)?);
    let corrected = state.apply(&correction);
    Ok(Recovery {
        status: RecoveryStatus::Corrected,
        state: corrected,
        correction: Some(correction),
        vertex_defects,
        plaquette_defects,
    })
}

/// Result of the Knill-Laflamme condition P E_j^dag E_k P = c_jk P on the
/// code projector of one sector.
#[derive(Debug, Clone)]
pub struct KlReport {
    pub passed: bool,
    /// First violating pair of error indices, if any.
    pub witness: Option<(usize, usize)>,
    pub coefficients: Array2<C64>,
}

const KL_TOL: f64 = 1e-10;

/// Checks P E_j^dag E_k P = c_jk P for every pair in `errors`, with P the
/// projector onto the sector's four codewords.
pub fn knill_laflamme_check(basis: &CodeBasis, errors: &[PauliString]) -> KlReport {
    let n = errors.len();
    let mut coefficients = Array2::<C64>::zeros((n, n));
    let mut witness = None;
    'outer: for j in 0..n {
        for k in 0..n {
            let op = errors[j].adjoint().mul(&errors[k]);
            // gram[alpha][beta] = <psi_alpha| op |psi_beta>
            let mut diag = C64::new(0.0, 0.0);
            let mut ok = true;
            for (alpha, bra) in basis.codewords.iter().enumerate() {
                for (beta, ket) in basis.codewords.iter().enumerate() {
                    let g = bra.inner(&ket.apply(&op));
                    if alpha == beta {
                        if alpha == 0 {
                            diag = g;
                        } else if (g - diag).norm() > KL_TOL {
                            ok = false;
                        }
                    } else if g.norm() > KL_TOL {
                        ok = false;
                    }
                }
            }
            coefficients[[j, k]] = diag;
            if !ok {
                witness = Some((j, k));
                break 'outer;
            }
        }
    }
    KlReport {
        passed: witness.is_none(),
        witness,
        coefficients,
    }
}

/// Convenience error set: every single-qubit Pauli on the lattice plus the
/// identity (at index 0).
pub fn single_qubit_errors(lat: &TorusLattice) -> Vec<PauliString> {
    let n = lat.n_edges();
    let mut out = vec![PauliString::identity(n).unwrap()];
    for e in 0..n {
        out.push(PauliString::x_on(n, e).unwrap());
        out.push(PauliString::y_on(n, e).unwrap());
        out.push(PauliString::z_on(n, e).unwrap());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::code::codeword_basis;

    fn ground_record(lat: &TorusLattice) -> SyndromeRecord {
        SyndromeRecord::new(vec![0.0], vec![SyndromeSector::ground(lat)]).unwrap()
    }

    #[test]
    fn record_changes_tracked() {
        let lat = TorusLattice::new(2, 2).unwrap();
        let g = SyndromeSector::ground(&lat);
        let mut s2 = g.clone();
        s2.vertex[0] *= -1;
        s2.vertex[1] *= -1;
        let rec = SyndromeRecord::new(vec![0.0, 1.0], vec![g, s2]).unwrap();
        assert_eq!(rec.changes(), vec![(vec![0, 1], vec![])]);
    }

    #[test]
    fn no_error_recovers_identically() {
        let lat = TorusLattice::new(2, 2).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let rec = ground_record(&lat);
        for cw in &basis.codewords {
            let r = recovery_map(&lat, cw, &rec).unwrap();
            assert!(r.corrected());
            assert!(r.state.fidelity(cw) > 1.0 - 1e-12);
            let c = r.correction.unwrap();
            assert_eq!((c.x, c.z), (0, 0));
        }
    }

    #[test]
    fn syndrome_measured_after_errors() {
        let lat = TorusLattice::new(3, 3).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let cw = &basis.codewords[0];
        let err = PauliString::x_on(lat.n_edges(), 4).unwrap();
        let corrupted = cw.apply(&err);
        let syn = measure_syndrome(&lat, &corrupted).unwrap();
        // X on edge 4 flips the two plaquettes containing it
        let flipped: Vec<usize> = (0..lat.n_plaquettes())
            .filter(|&i| syn.plaquette[i] < 0)
            .collect();
        let (p1, p2) = lat.edge_plaquettes(4);
        let mut want = vec![p1.0 * lat.cols + p1.1, p2.0 * lat.cols + p2.1];
        want.sort_unstable();
        assert_eq!(flipped, want);
        assert!(syn.vertex.iter().all(|&v| v == 1));
    }

    #[test]
    fn single_errors_corrected_on_3x3() {
        let lat = TorusLattice::new(3, 3).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let rec = ground_record(&lat);
        for cw in &basis.codewords {
            for e in 0..lat.n_edges() {
                for err in [
                    PauliString::x_on(lat.n_edges(), e).unwrap(),
                    PauliString::y_on(lat.n_edges(), e).unwrap(),
                    PauliString::z_on(lat.n_edges(), e).unwrap(),
                ] {
                    let corrupted = cw.apply(&err);
                    let r = recovery_map(&lat, &corrupted, &rec).unwrap();
                    assert!(r.corrected(), "edge {e}");
                    let f = r.state.fidelity(cw);
                    assert!(f >= 1.0 - 1e-10, "edge {e}: fidelity {f}");
                }
            }
        }
    }

    #[test]
    fn parallel_edge_ambiguity_reported_on_2x2() {
        // on the 2x2 torus the two minimal corrections differ by a logical,
        // so X and Z single errors are reported, never silently mis-corrected
        let lat = TorusLattice::new(2, 2).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let rec = ground_record(&lat);
        let cw = &basis.codewords[0];
        let mut ambiguous = 0;
        let mut corrected = 0;
        for e in 0..lat.n_edges() {
            for err in [
                PauliString::x_on(lat.n_edges(), e).unwrap(),
                PauliString::y_on(lat.n_edges(), e).unwrap(),
                PauliString::z_on(lat.n_edges(), e).unwrap(),
            ] {
                let corrupted = cw.apply(&err);
                let r = recovery_map(&lat, &corrupted, &rec).unwrap();
                match r.status {
                    RecoveryStatus::Corrected => {
                        corrected += 1;
                        assert!(r.state.fidelity(cw) >= 1.0 - 1e-10);
                    }
                    RecoveryStatus::Ambiguous { .. } => {
                        ambiguous += 1;
                        // state returned unchanged
                        assert!(r.state.fidelity(&corrupted) >= 1.0 - 1e-12);
                    }
                    RecoveryStatus::Unpaired { .. } => panic!("unexpected unpaired"),
                }
            }
        }
        // Y errors flip both sectors and the edge is pinned by the
        // intersection of two parallel classes... the current decoder treats
        // the X and Z parts independently, so Y is ambiguous too
        assert_eq!(ambiguous + corrected, 24);
        assert!(ambiguous > 0);
    }

    #[test]
    fn two_error_cluster_reported_unpaired() {
        let lat = TorusLattice::new(3, 3).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let cw = &basis.codewords[0];
        let rec = ground_record(&lat);
        // two Z errors on disjoint edges -> four vertex defects
        let e1 = PauliString::z_on(lat.n_edges(), 0).unwrap();
        let e2 = PauliString::z_on(lat.n_edges(), 7).unwrap();
        let corrupted = cw.apply(&e1).apply(&e2);
        let r = recovery_map(&lat, &corrupted, &rec).unwrap();
        assert!(matches!(r.status, RecoveryStatus::Unpaired { .. }));
    }

    #[test]
    fn knill_laflamme_identity_passes() {
        let lat = TorusLattice::new(2, 2).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let errors = vec![PauliString::identity(lat.n_edges()).unwrap()];
        let rep = knill_laflamme_check(&basis, &errors);
        assert!(rep.passed);
        assert!((rep.coefficients[[0, 0]] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn knill_laflamme_single_qubit_set_on_3x3() {
        // distance 3: all weight-<=2 products are correctable -> pass
        let lat = TorusLattice::new(3, 3).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let errors = single_qubit_errors(&lat);
        let rep = knill_laflamme_check(&basis, &errors);
        assert!(rep.passed, "witness {:?}", rep.witness);
    }

    #[test]
    fn knill_laflamme_fails_with_logical_witness() {
        let lat = TorusLattice::new(3, 3).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let logicals = lat.build_logicals();
        let errors = vec![
            PauliString::identity(lat.n_edges()).unwrap(),
            logicals.s1x,
        ];
        let rep = knill_laflamme_check(&basis, &errors);
        assert!(!rep.passed);
        // the witness pair involves the logical string against the identity
        let (j, k) = rep.witness.unwrap();
        assert!(j == 1 || k == 1);
    }

    #[test]
    fn knill_laflamme_fails_on_distance_2_lattice() {
        // on 2x2 the product of two parallel single-qubit errors is a
        // logical, so the single-qubit set itself violates the condition
        let lat = TorusLattice::new(2, 2).unwrap();
        let basis = codeword_basis(&lat, &SyndromeSector::ground(&lat)).unwrap();
        let errors = single_qubit_errors(&lat);
        let rep = knill_laflamme_check(&basis, &errors);
        assert!(!rep.passed);
    }
}
