//! The experiment implementations behind `fvqerr run`.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use fvqerr::bath::{common_bath_influence, BathMode, KernelTable};
use fvqerr::channels::{
    depolarize, kalai_error_rate, quadratic_hypothesis_test, ChannelSpec,
};
use fvqerr::coherent::{
    coherent_propagator, direct_matrix_element, resolution_of_identity_residual,
};
use fvqerr::exact::{
    fit_scaling, scaling_experiment, DensityMatrix, DistributionPair, ModelSpec,
};
use fvqerr::fit::power_law_fit;
use fvqerr::path::DiscretizedPath;
use fvqerr::sphere::{BlochPoint, SphereQuadrature};
use fvqerr::spinham::SpinHamiltonianParams;
use fvqerr::toric::{
    codeword_basis, fv_kitaev_estimate, fv_kitaev_estimate_promoted, knill_laflamme_check,
    q_matrix, recovery_map, single_qubit_errors, PauliString, SyndromeRecord, SyndromeSector,
    TorusLattice,
};
use fvqerr::weak::order_comparison;
use fvqerr::FvError;

use crate::config::*;
use crate::output::{fmt_float, CsvFile};
use crate::CliError;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1_0000_0000_01b3);
    }
    h
}

/// One deterministic generator per experiment, derived from the master seed
/// by hashing the experiment name.
pub fn experiment_rng(master_seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(master_seed ^ fnv1a(name.as_bytes()))
}

fn num(e: FvError) -> CliError {
    match e {
        FvError::QuadratureNonConvergence { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

pub fn run_experiment(
    cfg: &RunConfig,
    dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value), CliError> {
    match &cfg.experiment {
        ExperimentConfig::Kernels(p) => kernels(p, dir),
        ExperimentConfig::Propagator(p) => propagator(p, cfg.seed, dir),
        ExperimentConfig::Scaling(p) => scaling(p, dir),
        ExperimentConfig::CommonBath(p) => common_bath(p, cfg.seed, dir),
        ExperimentConfig::Toric(p) => toric(p, cfg.seed, dir),
        ExperimentConfig::Channels(p) => channels(p, cfg.seed, dir),
        ExperimentConfig::WeakCouplingOrder(p) => weak_order(p, dir),
    }
}

fn kernels(p: &KernelsParams, dir: &Path) -> Result<(Vec<PathBuf>, serde_json::Value), CliError> {
    let table = KernelTable::tabulate(&p.spectral, p.tau_max, p.n_tau).map_err(num)?;
    let mut csv = CsvFile::create(dir, "kernels.csv", &["tau", "ki", "kr"])?;
    for k in 0..table.tau.len() {
        csv.row(&[
            fmt_float(table.tau[k]),
            fmt_float(table.ki[k]),
            fmt_float(table.kr[k]),
        ])?;
    }
    let path = csv.finish()?;
    let summary = json!({
        "rows": p.n_tau,
        "kernel_width": p.spectral.kernel_width(),
    });
    Ok((vec![path], summary))
}

fn propagator(
    p: &PropagatorParams,
    seed: u64,
    dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value), CliError> {
    let mut rng = experiment_rng(seed, "propagator");
    // one fixed set of random single-spin Hamiltonians and endpoints, shared
    // across resolutions
    let cases: Vec<(SpinHamiltonianParams, BlochPoint, BlochPoint)> = (0..p.n_hamiltonians)
        .map(|_| {
            let mu: [f64; 3] = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let norm = (mu[0] * mu[0] + mu[1] * mu[1] + mu[2] * mu[2])
                .sqrt()
                .max(1e-3);
            let t = rng.gen_range(0.1..std::f64::consts::PI / norm);
            let params =
                SpinHamiltonianParams::constant(vec![mu], vec![], 0.0, t, p.n_steps).unwrap();
            (params, BlochPoint::random(&mut rng), BlochPoint::random(&mut rng))
        })
        .collect();
    let mut csv = CsvFile::create(
        dir,
        "propagator.csv",
        &["n_theta", "n_phi", "identity_residual", "max_error", "mean_error"],
    )?;
    let mut worst = 0.0f64;
    for &(nt, np) in &p.resolutions {
        let quad = SphereQuadrature::gauss_legendre(nt, np).map_err(num)?;
        let residual = resolution_of_identity_residual(&quad);
        let errors: Vec<f64> = cases
            .par_iter()
            .map(|(params, p_i, p_f)| {
                let k = coherent_propagator(params, &quad, &[*p_i], &[*p_f]).unwrap();
                let d = direct_matrix_element(params, &[*p_i], &[*p_f]).unwrap();
                (k - d).norm()
            })
            .collect();
        let max = errors.iter().copied().fold(0.0f64, f64::max);
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        worst = worst.max(max);
        csv.row(&[
            nt.to_string(),
            np.to_string(),
            fmt_float(residual),
            fmt_float(max),
            fmt_float(mean),
        ])?;
    }
    let path = csv.finish()?;
    Ok((
        vec![path],
        json!({ "cases": p.n_hamiltonians, "worst_error": worst }),
    ))
}

fn scaling(p: &ScalingParams, dir: &Path) -> Result<(Vec<PathBuf>, serde_json::Value), CliError> {
    let points = scaling_experiment(&p.config).map_err(num)?;
    let fits = fit_scaling(&points);
    let slope = |f: &Option<fvqerr::fit::PowerLawFit>| {
        f.as_ref().map(|v| v.exponent).unwrap_or(f64::NAN)
    };
    let r2 = |f: &Option<fvqerr::fit::PowerLawFit>| {
        f.as_ref().map(|v| v.r_squared).unwrap_or(f64::NAN)
    };
    let (sn, st, se) = (
        slope(&fits.slope_n),
        slope(&fits.slope_t),
        slope(&fits.slope_eta),
    );
    let mut csv = CsvFile::create(
        dir,
        "scaling.csv",
        &[
            "n",
            "t",
            "eta",
            "tvd",
            "fit_slope_n",
            "fit_slope_t",
            "fit_slope_eta",
            "fit_r2_n",
        ],
    )?;
    let mut rows = points.clone();
    rows.sort_by(|a, b| {
        (a.n, a.t, a.eta)
            .partial_cmp(&(b.n, b.t, b.eta))
            .unwrap()
    });
    for pt in &rows {
        csv.row(&[
            pt.n.to_string(),
            fmt_float(pt.t),
            fmt_float(pt.eta),
            fmt_float(pt.tvd),
            fmt_float(sn),
            fmt_float(st),
            fmt_float(se),
            fmt_float(r2(&fits.slope_n)),
        ])?;
    }
    let path = csv.finish()?;
    let summary = json!({
        "points": rows.len(),
        "fits": fits,
    });
    Ok((vec![path], summary))
}

fn common_bath(
    p: &CommonBathParams,
    seed: u64,
    dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value), CliError> {
    let grid: Vec<f64> = (0..p.n_time)
        .map(|k| p.duration * k as f64 / (p.n_time - 1) as f64)
        .collect();
    let mut csv = CsvFile::create(
        dir,
        "common_bath.csv",
        &["n", "mean_abs_s_i", "mean_abs_s_r", "mean_abs_phi", "eta_effective"],
    )?;
    let mut rng = experiment_rng(seed, "common-bath");
    // per-sample seeds drawn up front so ensembles are reproducible
    let sample_seeds: Vec<u64> = (0..p.n_values.len() * p.ensemble)
        .map(|_| rng.gen())
        .collect();
    let mut mean_phi = Vec::new();
    for (i, &n) in p.n_values.iter().enumerate() {
        // the 1/n coupling rescaling: J (hence eta) decreases as 1/n
        let mut sd = p.spectral;
        sd.eta /= n as f64;
        let kt = KernelTable::tabulate(&sd, p.duration * 1.01, 4 * p.n_time + 1).map_err(num)?;
        let seeds = &sample_seeds[i * p.ensemble..(i + 1) * p.ensemble];
        let samples: Vec<(f64, f64)> = seeds
            .par_iter()
            .map(|&s| {
                let mut srng = ChaCha8Rng::seed_from_u64(s);
                let path = DiscretizedPath::random_smooth(
                    n,
                    grid.clone(),
                    0.0,
                    p.path_corner_freq,
                    &mut srng,
                )
                .unwrap();
                let pair = common_bath_influence(&kt, &path).unwrap();
                (pair.s_i, pair.s_r)
            })
            .collect();
        let m = p.ensemble as f64;
        let si = samples.iter().map(|(a, _)| a.abs()).sum::<f64>() / m;
        let sr = samples.iter().map(|(_, b)| b.abs()).sum::<f64>() / m;
        let phi = samples
            .iter()
            .map(|(a, b)| C64::new(*a, *b).norm())
            .sum::<f64>()
            / m;
        mean_phi.push(phi);
        csv.row(&[
            n.to_string(),
            fmt_float(si),
            fmt_float(sr),
            fmt_float(phi),
            fmt_float(sd.eta),
        ])?;
    }
    let path = csv.finish()?;
    let ns: Vec<f64> = p.n_values.iter().map(|&n| n as f64).collect();
    let growth = power_law_fit(&ns, &mean_phi).ok();
    let summary = json!({
        "growth_exponent": growth.as_ref().map(|f| f.exponent),
        "growth_r2": growth.as_ref().map(|f| f.r_squared),
    });
    Ok((vec![path], summary))
}

fn logical_label(idx: usize) -> &'static str {
    ["++", "+-", "-+", "--"][idx]
}

fn toric(
    p: &ToricParams,
    seed: u64,
    dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value), CliError> {
    let mut q_csv = CsvFile::create(
        dir,
        "toric_q.csv",
        &["lattice", "sector", "l", "l_prime", "re", "im"],
    )?;
    let mut sum_csv = CsvFile::create(
        dir,
        "toric_summary.csv",
        &[
            "lattice",
            "ground_q_max",
            "fixed_sector_estimate",
            "promoted_estimate",
            "suppression_ratio",
            "recovery_corrected",
            "recovery_reported",
            "recovery_miscorrected",
            "kl_single_passed",
            "kl_logical_witness",
        ],
    )?;
    let mut rng = experiment_rng(seed, "toric");
    let mut summaries = Vec::new();
    for &(n, m) in &p.lattices {
        let lat = TorusLattice::new(n, m).map_err(num)?;
        let ground = SyndromeSector::ground(&lat);
        let basis = codeword_basis(&lat, &ground).map_err(num)?;
        let q = q_matrix(&basis);
        let mut q_max = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                q_max = q_max.max(q[[i, j]].norm());
                q_csv.row(&[
                    format!("{n}x{m}"),
                    "ground".to_string(),
                    logical_label(j).to_string(),
                    logical_label(i).to_string(),
                    fmt_float(q[[i, j]].re),
                    fmt_float(q[[i, j]].im),
                ])?;
            }
        }
        let fixed = fv_kitaev_estimate(&q, p.eta, p.duration, p.ensemble, &mut rng);
        let promoted =
            fv_kitaev_estimate_promoted(&lat, &ground, p.eta, p.duration).map_err(num)?;
        let suppression = if promoted > 0.0 { fixed / promoted } else { 0.0 };

        // recovery over every single-qubit error on every ground codeword
        let record =
            SyndromeRecord::new(vec![0.0], vec![ground.clone()]).map_err(num)?;
        let mut corrected = 0usize;
        let mut reported = 0usize;
        let mut miscorrected = 0usize;
        for cw in &basis.codewords {
            for e in 0..lat.n_edges() {
                for err in [
                    PauliString::x_on(lat.n_edges(), e).unwrap(),
                    PauliString::y_on(lat.n_edges(), e).unwrap(),
                    PauliString::z_on(lat.n_edges(), e).unwrap(),
                ] {
                    let corrupted = cw.apply(&err);
                    let r = recovery_map(&lat, &corrupted, &record).map_err(num)?;
                    if r.corrected() {
                        if r.state.fidelity(cw) >= 1.0 - 1e-10 {
                            corrected += 1;
                        } else {
                            miscorrected += 1;
                        }
                    } else {
                        reported += 1;
                    }
                }
            }
        }
        let kl_single = knill_laflamme_check(&basis, &single_qubit_errors(&lat));
        let mut with_logical = single_qubit_errors(&lat);
        with_logical.push(lat.build_logicals().s1x);
        let kl_logical = knill_laflamme_check(&basis, &with_logical);
        sum_csv.row(&[
            format!("{n}x{m}"),
            fmt_float(q_max),
            fmt_float(fixed),
            fmt_float(promoted),
            fmt_float(suppression),
            corrected.to_string(),
            reported.to_string(),
            miscorrected.to_string(),
            kl_single.passed.to_string(),
            (!kl_logical.passed).to_string(),
        ])?;
        summaries.push(json!({
            "lattice": format!("{n}x{m}"),
            "ground_q_max": q_max,
            "suppression_ratio": suppression,
            "recovery": {"corrected": corrected, "reported": reported, "miscorrected": miscorrected},
            "kl_single_passed": kl_single.passed,
        }));
    }
    let p1 = q_csv.finish()?;
    let p2 = sum_csv.finish()?;
    Ok((vec![p1, p2], json!({ "lattices": summaries })))
}

fn channels(
    p: &ChannelsParams,
    seed: u64,
    dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value), CliError> {
    let mut rng = experiment_rng(seed, "channels");
    let channel = p.channel.build().map_err(num)?;
    // channel sanity over random pure states: trace preservation and
    // positivity, plus depolarizing/Pauli agreement when applicable
    let mut max_trace_dev = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut max_depol_dev = 0.0f64;
    for _ in 0..p.n_random_states {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let point = BlochPoint::new(theta, phi).unwrap();
        let rho = DensityMatrix::pure(&fvqerr::coherent::coherent_state_vector(&point))
            .map_err(num)?;
        let out = channel.apply(&rho).map_err(num)?;
        max_trace_dev = max_trace_dev.max((out.trace() - C64::new(1.0, 0.0)).norm());
        min_eig = min_eig.min(out.min_eigenvalue().map_err(num)?);
        if let ChannelSpec::Depolarizing { p: dp } = &p.channel {
            let direct = depolarize(*dp, &rho).map_err(num)?;
            let dev = (out.matrix() - direct.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            max_depol_dev = max_depol_dev.max(dev);
        }
    }

    // half-TVD error rate on the constructed single-flip distribution
    let nq = p.kalai_qubits;
    let mut noisy = vec![0.0; 1 << nq];
    noisy[0] = 1.0 - nq as f64 * p.kalai_eps;
    for k in 0..nq {
        noisy[1 << k] = p.kalai_eps;
    }
    let mut ideal = vec![0.0; 1 << nq];
    ideal[0] = 1.0;
    let pair = DistributionPair::new(noisy, ideal).map_err(num)?;
    let kalai = kalai_error_rate(&pair, nq).map_err(num)?;

    let fit = quadratic_hypothesis_test(&p.scaling_table).map_err(num)?;
    let fit_path = dir.join("channels_fit.json");
    std::fs::write(
        &fit_path,
        serde_json::to_string_pretty(&fit)
            .map_err(|e| CliError::Config(e.to_string()))?,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = CsvFile::create(dir, "channels.csv", &["check", "value"])?;
    csv.row(&["max_trace_deviation".into(), fmt_float(max_trace_dev)])?;
    csv.row(&["min_output_eigenvalue".into(), fmt_float(min_eig)])?;
    csv.row(&["max_depolarizing_deviation".into(), fmt_float(max_depol_dev)])?;
    csv.row(&["kalai_tvd".into(), fmt_float(kalai.tvd)])?;
    csv.row(&["kalai_eps_total".into(), fmt_float(kalai.eps_total)])?;
    csv.row(&["kalai_eps_per_qubit".into(), fmt_float(kalai.eps_per_qubit)])?;
    csv.row(&["fit_exponent".into(), fmt_float(fit.fit.exponent)])?;
    let p1 = csv.finish()?;
    let summary = json!({
        "kalai": kalai,
        "fit": fit,
    });
    Ok((vec![p1, fit_path], summary))
}

fn weak_order(
    p: &WeakOrderParams,
    dir: &Path,
) -> Result<(Vec<PathBuf>, serde_json::Value), CliError> {
    let t_f = p.periods * 2.0 * std::f64::consts::PI / p.omega0;
    let system =
        SpinHamiltonianParams::constant(vec![[p.omega0, 0.0, 0.0]], vec![], 0.0, t_f, 1)
            .map_err(num)?;
    let spec = ModelSpec::one_bath_per_spin(
        system,
        vec![BathMode {
            mass: 1.0,
            frequency: p.mode_frequency,
            coupling: p.base_coupling,
            levels: p.levels,
        }],
        0.0,
        true,
    );
    let rho = DensityMatrix::basis_state(0, 2);
    let report = order_comparison(&spec, &rho, &p.etas, p.n_steps).map_err(num)?;
    let mut csv = CsvFile::create(dir, "weak_order.csv", &["eta", "remainder"])?;
    for (eta, rem) in report.etas.iter().zip(report.remainders.iter()) {
        csv.row(&[fmt_float(*eta), fmt_float(*rem)])?;
    }
    let path = csv.finish()?;
    let summary = json!({
        "remainder_exponent": report.fit.exponent,
        "max_pert_sum": report.max_pert_sum,
    });
    Ok((vec![path], summary))
}

