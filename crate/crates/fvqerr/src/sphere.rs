//! Points on the Bloch sphere and quadrature rules over it.

use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};
use crate::quad::gauss_legendre;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A point (theta, phi) on S^2.
///
/// `theta` lies in [0, pi]. `phi` is kept as given: coherent-state phases
/// depend on phi/2, so shifting phi by 2*pi flips the state's sign, and
/// discretized paths need unwrapped phi to carry winding. Use [`BlochPoint::new`]
/// to canonicalize phi into [0, 2*pi) and [`BlochPoint::unwrapped`] to keep it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub theta: f64,
    pub phi: f64,
}

impl BlochPoint {
    /// Canonical point with phi normalized into [0, 2*pi).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        Self::unwrapped(theta, phi.rem_euclid(TAU))
    }

    /// Point with phi stored as given (may wind outside [0, 2*pi)).
    pub fn unwrapped(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) || !theta.is_finite() {
            return Err(FvError::InvalidParameter(format!(
                "theta = {theta} outside [0, pi]"
            )));
        }
        if !phi.is_finite() {
            return Err(FvError::InvalidParameter("phi not finite".into()));
        }
        Ok(Self { theta, phi })
    }

    /// Uniform point on the sphere (cos theta uniform, phi uniform).
    pub fn random<R: rand::Rng>(rng: &mut R) -> Self {
        let u: f64 = rng.gen_range(-1.0..=1.0);
        let phi: f64 = rng.gen_range(0.0..TAU);
        Self {
            theta: u.acos(),
            phi,
        }
    }
}

/// Quadrature scheme label for [`SphereQuadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SphereScheme {
    /// Gauss-Legendre in cos(theta) crossed with a uniform grid in phi.
    GaussLegendreUniformPhi,
}

/// Nodes and weights discretizing the measure sin(theta) dtheta dphi / (2*pi),
/// whose total mass is 2.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    nodes: Vec<(BlochPoint, f64)>,
    pub scheme: SphereScheme,
    pub resolution: (usize, usize),
}

impl SphereQuadrature {
    /// Gauss-Legendre rule in u = cos(theta) with `n_theta` nodes, uniform
    /// `n_phi`-point grid in phi.
    pub fn gauss_legendre(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(FvError::InvalidParameter(
                "sphere quadrature needs at least one node per angle".into(),
            ));
        }
        let (u, w) = gauss_legendre(n_theta);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (ui, wi) in u.iter().zip(w.iter()) {
            let theta = ui.acos();
            for j in 0..n_phi {
                let phi = TAU * j as f64 / n_phi as f64;
                nodes.push((BlochPoint { theta, phi }, wi / n_phi as f64));
            }
        }
        Ok(Self {
            nodes,
            scheme: SphereScheme::GaussLegendreUniformPhi,
            resolution: (n_theta, n_phi),
        })
    }

    pub fn nodes(&self) -> &[(BlochPoint, f64)] {
        &self.nodes
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }
}
