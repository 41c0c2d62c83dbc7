//! Discretized forward/backward spin histories on a time grid, and the
//! kinetic, regularization, and normalization functionals evaluated on them.
//!
//! Discretization follows the mid-point prescription for cos(theta) and
//! sin^2(theta) and plain increments for dtheta, dphi; phi is stored
//! unwrapped so paths can wind.

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{FvError, Result};
use crate::sphere::BlochPoint;

/// Which branch of the doubled history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Forward,
    Backward,
}

/// Per-branch values of an action functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchValues {
    pub forward: f64,
    pub backward: f64,
}

/// Forward and backward angle histories for several spins on a shared grid,
/// with the regularization mass epsilon.
#[derive(Debug, Clone)]
pub struct DiscretizedPath {
    pub time_grid: Vec<f64>,
    /// forward[spin][time]
    pub forward: Vec<Vec<BlochPoint>>,
    /// backward[spin][time]
    pub backward: Vec<Vec<BlochPoint>>,
    pub epsilon: f64,
}

impl DiscretizedPath {
    pub fn new(
        time_grid: Vec<f64>,
        forward: Vec<Vec<BlochPoint>>,
        backward: Vec<Vec<BlochPoint>>,
        epsilon: f64,
    ) -> Result<Self> {
        if time_grid.len() < 2 {
            return Err(FvError::GridMismatch("need at least two instants".into()));
        }
        if time_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FvError::InvalidParameter(
                "time grid must be strictly increasing".into(),
            ));
        }
        if forward.len() != backward.len() || forward.is_empty() {
            return Err(FvError::GridMismatch(
                "forward and backward must cover the same spins".into(),
            ));
        }
        for branch in [&forward, &backward] {
            for spin in branch {
                if spin.len() != time_grid.len() {
                    return Err(FvError::GridMismatch(
                        "angle history length differs from time grid".into(),
                    ));
                }
            }
        }
        if epsilon < 0.0 {
            return Err(FvError::InvalidParameter("epsilon must be >= 0".into()));
        }
        Ok(Self {
            time_grid,
            forward,
            backward,
            epsilon,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.forward.len()
    }

    pub fn n_times(&self) -> usize {
        self.time_grid.len()
    }

    pub fn duration(&self) -> f64 {
        self.time_grid[self.time_grid.len() - 1] - self.time_grid[0]
    }

    fn branch(&self, b: Branch) -> &Vec<Vec<BlochPoint>> {
        match b {
            Branch::Forward => &self.forward,
            Branch::Backward => &self.backward,
        }
    }

    /// S_z history 0.5 cos(theta) for one spin on one branch.
    pub fn sz_history(&self, spin: usize, b: Branch) -> Vec<f64> {
        self.branch(b)[spin]
            .iter()
            .map(|p| 0.5 * p.theta.cos())
            .collect()
    }

    /// Reverse time on both branches (for antisymmetry checks).
    pub fn reversed(&self) -> Self {
        let t0 = self.time_grid[0];
        let tf = *self.time_grid.last().unwrap();
        let mut grid: Vec<f64> = self.time_grid.iter().map(|&t| t0 + tf - t).collect();
        grid.reverse();
        let rev = |b: &Vec<Vec<BlochPoint>>| {
            b.iter()
                .map(|s| {
                    let mut v = s.clone();
                    v.reverse();
                    v
                })
                .collect()
        };
        Self {
            time_grid: grid,
            forward: rev(&self.forward),
            backward: rev(&self.backward),
            epsilon: self.epsilon,
        }
    }

    /// Random smooth histories: bounded random Fourier series in cos(theta)
    /// and free Fourier phi, independent per spin and branch.
    pub fn random_smooth<R: Rng>(
        n_spins: usize,
        time_grid: Vec<f64>,
        epsilon: f64,
        corner_freq: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let gen_branch = |rng: &mut R| -> Vec<Vec<BlochPoint>> {
            (0..n_spins)
                .map(|_| {
                    let n_modes = 12;
                    let amps: Vec<(f64, f64, f64)> = (0..n_modes)
                        .map(|_| {
                            (
                                rng.gen_range(-0.5..0.5) / (n_modes as f64).sqrt(),
                                rng.gen_range(0.0..corner_freq),
                                rng.gen_range(0.0..std::f64::consts::TAU),
                            )
                        })
                        .collect();
                    let phi_rate: f64 = rng.gen_range(-corner_freq..corner_freq);
                    time_grid
                        .iter()
                        .map(|&t| {
                            let mut c = 0.0;
                            let mut phi = phi_rate * t;
                            for &(a, w, ph) in &amps {
                                c += a * (w * t + ph).cos();
                                phi += 0.3 * a * (w * t - ph).sin();
                            }
                            let c = c.clamp(-0.95, 0.95);
                            BlochPoint::unwrapped(c.acos(), phi).unwrap()
                        })
                        .collect()
                })
                .collect()
        };
        let forward = gen_branch(rng);
        let backward = gen_branch(rng);
        Self::new(time_grid, forward, backward, epsilon)
    }
}

/// Kinetic action int (1/2) cos(theta) dphi per branch, summed over spins:
/// trapezoid in time with midpoint theta.
pub fn kinetic_action(path: &DiscretizedPath) -> BranchValues {
    BranchValues {
        forward: kinetic_branch(path, Branch::Forward),
        backward: kinetic_branch(path, Branch::Backward),
    }
}

fn kinetic_branch(path: &DiscretizedPath, b: Branch) -> f64 {
    let mut acc = 0.0;
    for spin in path.branch(b) {
        for w in spin.windows(2) {
            let mid = 0.5 * (w[0].theta + w[1].theta);
            acc += 0.5 * mid.cos() * (w[1].phi - w[0].phi);
        }
    }
    acc
}

/// Regularization action eps * sum (dtheta^2 + sin^2(theta_mid) dphi^2) / (2 dt)
/// per branch, summed over spins.
pub fn regularization_action(path: &DiscretizedPath) -> BranchValues {
    BranchValues {
        forward: regularization_branch(path, Branch::Forward),
        backward: regularization_branch(path, Branch::Backward),
    }
}

fn regularization_branch(path: &DiscretizedPath, b: Branch) -> f64 {
    if path.epsilon == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for spin in path.branch(b) {
        for (w, dt) in spin.windows(2).zip(path.time_grid.windows(2)) {
            let dt = dt[1] - dt[0];
            let mid = 0.5 * (w[0].theta + w[1].theta);
            let dth = w[1].theta - w[0].theta;
            let dph = w[1].phi - w[0].phi;
            acc += path.epsilon * (dth * dth + mid.sin().powi(2) * dph * dph) / (2.0 * dt);
        }
    }
    acc
}

/// The normalizing coefficient N_eps = prod_n |sin(theta_mid)| eps / (2 pi i dt),
/// taken over all steps and spins of one branch. Kept separate from the
/// propagator, which uses quadrature identity insertions instead.
pub fn klauder_normalization(path: &DiscretizedPath, b: Branch) -> C64 {
    let mut out = C64::new(1.0, 0.0);
    let inv_i = C64::new(0.0, -1.0);
    for spin in path.branch(b) {
        for (w, dt) in spin.windows(2).zip(path.time_grid.windows(2)) {
            let dt = dt[1] - dt[0];
            let mid = 0.5 * (w[0].theta + w[1].theta);
            let factor = mid.sin().abs() * path.epsilon / (2.0 * std::f64::consts::PI * dt);
            out *= inv_i * factor;
        }
    }
    out
}

/// Signed spherical area of the band between two single-spin paths with
/// common endpoints, by summing spherical triangle excesses. Oriented so that
/// kinetic_action(a) - kinetic_action(b) = area / 2 up to discretization
/// error. Independent surface-integral oracle for the kinetic-action area law.
pub fn enclosed_area_between(path_a: &[BlochPoint], path_b: &[BlochPoint]) -> f64 {
    assert_eq!(path_a.len(), path_b.len());
    let mut area = 0.0;
    for k in 0..path_a.len() - 1 {
        // quad (b_k, b_{k+1}, a_{k+1}, a_k) split into two triangles
        area += signed_triangle_area(&path_b[k], &path_b[k + 1], &path_a[k + 1]);
        area += signed_triangle_area(&path_b[k], &path_a[k + 1], &path_a[k]);
    }
    area
}

fn unit_vec(p: &BlochPoint) -> [f64; 3] {
    [
        p.theta.sin() * p.phi.cos(),
        p.theta.sin() * p.phi.sin(),
        p.theta.cos(),
    ]
}

/// Signed solid angle of a spherical triangle (Van Oosterom-Strackee).
fn signed_triangle_area(p1: &BlochPoint, p2: &BlochPoint, p3: &BlochPoint) -> f64 {
    let a = unit_vec(p1);
    let b = unit_vec(p2);
    let c = unit_vec(p3);
    let triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    let dot = |x: &[f64; 3], y: &[f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let denom = 1.0 + dot(&a, &b) + dot(&b, &c) + dot(&a, &c);
    2.0 * triple.atan2(denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn grid(n: usize, t: f64) -> Vec<f64> {
        (0..=n).map(|k| t * k as f64 / n as f64).collect()
    }

    fn single_branch_path(points: Vec<BlochPoint>, eps: f64) -> DiscretizedPath {
        let grid = grid(points.len() - 1, 1.0);
        DiscretizedPath::new(grid, vec![points.clone()], vec![points], eps).unwrap()
    }

    #[test]
    fn kinetic_constant_path_vanishes() {
        let p = BlochPoint::new(0.8, 0.3).unwrap();
        let path = single_branch_path(vec![p; 5], 0.0);
        let k = kinetic_action(&path);
        assert_eq!(k.forward, 0.0);
        assert_eq!(k.backward, 0.0);
    }

    #[test]
    fn kinetic_equatorial_loop_vanishes() {
        let n = 64;
        let pts: Vec<BlochPoint> = (0..=n)
            .map(|k| BlochPoint::unwrapped(0.5 * PI, 2.0 * PI * k as f64 / n as f64).unwrap())
            .collect();
        let path = single_branch_path(pts, 0.0);
        assert!(kinetic_action(&path).forward.abs() < 1e-14);
    }

    #[test]
    fn kinetic_polar_cap_loop() {
        // theta = pi/4, phi 0 -> 2 pi: action pi cos(pi/4)
        let n = 200;
        let pts: Vec<BlochPoint> = (0..=n)
            .map(|k| {
                BlochPoint::unwrapped(0.25 * PI, 2.0 * PI * k as f64 / n as f64).unwrap()
            })
            .collect();
        let path = single_branch_path(pts, 0.0);
        let k = kinetic_action(&path).forward;
        let want = PI * (0.25 * PI).cos();
        assert!((k - want).abs() < 1e-12, "{k} vs {want}");
    }

    #[test]
    fn kinetic_antisymmetric_under_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let path =
            DiscretizedPath::random_smooth(2, grid(40, 5.0), 0.0, 2.0, &mut rng).unwrap();
        let k = kinetic_action(&path);
        let kr = kinetic_action(&path.reversed());
        assert!((k.forward + kr.forward).abs() < 1e-12);
        assert!((k.backward + kr.backward).abs() < 1e-12);
    }

    #[test]
    fn regularization_cases() {
        let p = BlochPoint::new(0.8, 0.3).unwrap();
        let path = single_branch_path(vec![p; 5], 0.0);
        assert_eq!(regularization_action(&path).forward, 0.0);
        let path = single_branch_path(vec![p; 5], 0.7);
        assert_eq!(regularization_action(&path).forward, 0.0);

        // theta = pi/2, phi linear 0 -> pi over t = 1 in 4 equal steps, eps = 1
        let pts: Vec<BlochPoint> = (0..=4)
            .map(|k| BlochPoint::unwrapped(0.5 * PI, PI * k as f64 / 4.0).unwrap())
            .collect();
        let path = single_branch_path(pts, 1.0);
        let r = regularization_action(&path).forward;
        assert!((r - 0.5 * PI * PI).abs() < 1e-12, "{r}");
    }

    #[test]
    fn area_law_between_paths() {
        // path A: theta = pi/2 + a sin(phi); path B: equator. Common endpoints
        // at phi = 0, pi. Action difference = -(1/2) * signed enclosed area.
        let n = 400;
        let a = 0.3;
        let pa: Vec<BlochPoint> = (0..=n)
            .map(|k| {
                let phi = PI * k as f64 / n as f64;
                BlochPoint::unwrapped(0.5 * PI + a * phi.sin(), phi).unwrap()
            })
            .collect();
        let pb: Vec<BlochPoint> = (0..=n)
            .map(|k| BlochPoint::unwrapped(0.5 * PI, PI * k as f64 / n as f64).unwrap())
            .collect();
        let ka = kinetic_action(&single_branch_path(pa.clone(), 0.0)).forward;
        let kb = kinetic_action(&single_branch_path(pb.clone(), 0.0)).forward;
        let area = enclosed_area_between(&pa, &pb);
        let diff = ka - kb;
        assert!(
            (diff - 0.5 * area).abs() < 1e-4,
            "diff {diff} vs half-area {}",
            0.5 * area
        );
    }

    #[test]
    fn klauder_normalization_vanishes_at_zero_eps() {
        let p = BlochPoint::new(0.8, 0.3).unwrap();
        let path = single_branch_path(vec![p; 3], 0.0);
        assert_eq!(klauder_normalization(&path, Branch::Forward).norm(), 0.0);
    }

    #[test]
    fn klauder_normalization_single_step() {
        // one step, dt = 1, theta constant: |sin(theta)| eps / (2 pi) / i
        let p = BlochPoint::new(0.8, 0.3).unwrap();
        let grid = vec![0.0, 1.0];
        let path =
            DiscretizedPath::new(grid, vec![vec![p, p]], vec![vec![p, p]], 0.2).unwrap();
        let n = klauder_normalization(&path, Branch::Forward);
        let want = 0.8_f64.sin().abs() * 0.2 / (2.0 * PI);
        assert!((n - C64::new(0.0, -want)).norm() < 1e-15);
    }
}
