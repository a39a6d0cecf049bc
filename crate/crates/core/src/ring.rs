//! Closed-form stability of ring networks.
//!
//! With uniform coefficients the Jacobian is the circulant
//! `circ(alpha, beta, 0, ..., 0, gamma)` whose eigenvalues are
//! `alpha + beta w^p + gamma conj(w)^p`, `w = exp(2 pi i / n)`.

use crate::angle::principal_arg;
use crate::equilibrium::EquilibriumState;
use crate::error::{Error, Result};
use crate::model::{NetworkSpec, TopologyTag};
use crate::spectral::activation_derivatives;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_2_PI, PI};

pub const UNIFORMITY_TOL: f64 = 1e-10;
pub const DEFAULT_RESOLUTION: usize = 256;
pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RingCoefficients {
    /// Diagonal, `-a_j + T_jj g'_j(z*_j)`.
    pub alpha: Complex64,
    /// Forward coupling, `T_{j,j+1} g'_{j+1}(z*_{j+1})`.
    pub beta: Complex64,
    /// Backward coupling, `T_{j,j-1} g'_{j-1}(z*_{j-1})`.
    pub gamma: Complex64,
    pub n: usize,
}

impl RingCoefficients {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("a ring needs n >= 3, got {n}")));
        }
        Ok(RingCoefficients { alpha, beta, gamma, n })
    }

    /// The family with `alpha = -1`, `beta = e^{i theta1}`, `gamma = e^{i theta2}`.
    pub fn unit_circle(theta1: f64, theta2: f64, n: usize) -> Result<Self> {
        Self::new(
            Complex64::new(-1.0, 0.0),
            Complex64::from_polar(1.0, theta1),
            Complex64::from_polar(1.0, theta2),
            n,
        )
    }
}

/// Reduces a ring network at `eq` to its uniform `(alpha, beta, gamma)`.
pub fn ring_coefficients(spec: &NetworkSpec, eq: &EquilibriumState) -> Result<RingCoefficients> {
    spec.ensure_valid()?;
    if !spec.has_ring_pattern() {
        return Err(Error::TopologyMismatch {
            expected: TopologyTag::Ring.to_string(),
            found: spec.classify_topology().to_string(),
        });
    }
    let d = activation_derivatives(spec, &eq.z)?;
    let n = spec.n;
    let t = &spec.weights;
    let diag = |j: usize| -spec.a[j] + t[j][j] * d[j];
    let fwd = |j: usize| t[j][(j + 1) % n] * d[(j + 1) % n];
    let bwd = |j: usize| t[j][(j + n - 1) % n] * d[(j + n - 1) % n];
    let (alpha, beta, gamma) = (diag(0), fwd(0), bwd(0));
    for j in 1..n {
        for (name, got, want) in [("alpha", diag(j), alpha), ("beta", fwd(j), beta), ("gamma", bwd(j), gamma)] {
            if (got - want).norm() > UNIFORMITY_TOL {
                return Err(Error::NonUniformRing(format!(
                    "{name} of neuron {} is {got}, neuron 1 has {want}",
                    j + 1
                )));
            }
        }
    }
    RingCoefficients::new(alpha, beta, gamma, n)
}

/// `lambda_p = alpha + beta w^p + gamma conj(w)^p`, `p = 0..n-1`.
pub fn circulant_eigenvalues(c: &RingCoefficients) -> Vec<Complex64> {
    let n = c.n;
    (0..n)
        .map(|p| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * p as f64 / n as f64);
            c.alpha + c.beta * w + c.gamma * w.conj()
        })
        .collect()
}

/// `Re(alpha) + |beta + conj(gamma)| < 0`: stable for every order.
/// Equality is not sufficient.
pub fn ring_sufficient_stable(c: &RingCoefficients) -> bool {
    c.alpha.re + (c.beta + c.gamma.conj()).norm() < 0.0
}

fn min_order(eigs: &[Complex64]) -> f64 {
    FRAC_2_PI
        * eigs
            .iter()
            .map(|&l| principal_arg(l).abs())
            .fold(f64::INFINITY, f64::min)
}

/// `(2/pi) min_p |arg lambda_p|`, unclamped.
pub fn ring_critical_order(c: &RingCoefficients) -> Result<f64> {
    let eigs = circulant_eigenvalues(c);
    if let Some(p) = eigs.iter().position(|l| l.norm() == 0.0) {
        return Err(Error::Degenerate(format!("lambda_{p} = 0")));
    }
    Ok(min_order(&eigs))
}

/// Eigenvalues of the unit-circle family in the closed form
/// `-1 + 2 cos((theta1 - theta2)/2 + 2 p pi / n) exp(i (theta1 + theta2)/2)`.
pub fn parametric_eigs(theta1: f64, theta2: f64, n: usize) -> Vec<Complex64> {
    parametric_eigs_half_angles((theta1 - theta2) / 2.0, (theta1 + theta2) / 2.0, n)
}

fn parametric_eigs_half_angles(half_diff: f64, half_sum: f64, n: usize) -> Vec<Complex64> {
    let rotation = Complex64::from_polar(1.0, half_sum);
    (0..n)
        .map(|p| {
            let amp = 2.0 * (half_diff + 2.0 * PI * p as f64 / n as f64).cos();
            Complex64::new(-1.0, 0.0) + rotation * amp
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityGrid {
    pub n_neurons: usize,
    pub resolution: usize,
    /// Cell-center angles, shared by both axes.
    pub thetas: Vec<f64>,
    /// Row-major: `values[i * resolution + j]` is `q*(thetas[i], thetas[j])`.
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn q_star(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.resolution + j]
    }

    /// `q* >= 1`: stable for every order in `(0, 1)`.
    pub fn stable_all_q(&self, i: usize, j: usize) -> bool {
        self.q_star(i, j) >= 1.0
    }

    /// `(theta1, theta2, q*)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let r = self.resolution;
        (0..r * r).map(move |k| (self.thetas[k / r], self.thetas[k % r], self.values[k]))
    }
}

/// Cell-center angle `-pi + (k + 1/2) 2 pi / resolution`.
pub fn cell_center(k: usize, resolution: usize) -> f64 {
    -PI + (k as f64 + 0.5) * 2.0 * PI / resolution as f64
}

/// `q*` of the zero equilibrium over the `(theta1, theta2)` torus for the
/// unit-circle family. Rows are `theta1`, columns `theta2`.
pub fn density_scan(n: usize, resolution: usize) -> Result<DensityGrid> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("a ring needs n >= 3, got {n}")));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    let step = 2.0 * PI / resolution as f64;
    let thetas: Vec<f64> = (0..resolution).map(|k| cell_center(k, resolution)).collect();
    let values: Vec<f64> = (0..resolution * resolution)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / resolution, cell % resolution);
            // half-sum and half-difference from the indices so that the
            // anti-diagonal theta1 + theta2 = 0 is exact
            let half_sum = (i as f64 + j as f64 + 1.0 - resolution as f64) * step / 2.0;
            let half_diff = (i as f64 - j as f64) * step / 2.0;
            min_order(&parametric_eigs_half_angles(half_diff, half_sum, n))
        })
        .collect();
    Ok(DensityGrid {
        n_neurons: n,
        resolution,
        thetas,
        values,
    })
}
