//! Linearization at an equilibrium and the argument criterion for Caputo
//! systems: an equilibrium is asymptotically stable for order `q` iff every
//! eigenvalue of `M = -A + T g'(z*)` satisfies `|arg(lambda)| > q pi / 2`.

use crate::angle::principal_arg;
use crate::eigen::{eig_complex, eig_real};
use crate::equilibrium::EquilibriumState;
use crate::error::{Error, Result};
use crate::model::{split_state, NetworkSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_2_PI;

/// Margins within this band of zero are reported as marginal.
pub const MARGIN_BAND: f64 = 1e-12;

/// Relative threshold below which an eigenvalue counts as zero.
pub const ZERO_EIGENVALUE_RELATIVE: f64 = 1e-12;

/// Complex Jacobian `M = -A + T diag(g'_1(z*_1), ..., g'_n(z*_n))`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianM {
    pub m: DMatrix<Complex64>,
}

impl JacobianM {
    /// `U = Re M`.
    pub fn u(&self) -> DMatrix<f64> {
        self.m.map(|z| z.re)
    }

    /// `V = Im M`.
    pub fn v(&self) -> DMatrix<f64> {
        self.m.map(|z| z.im)
    }

    /// Real Jacobian of the split system, `[[U, -V], [V, U]]`.
    pub fn real_split(&self) -> DMatrix<f64> {
        let n = self.m.nrows();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = self.m[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        })
    }
}

/// Complex derivatives `g'_k(z*_k)` for every neuron, failing on the first
/// neuron where the activation is not complex-differentiable.
pub fn activation_derivatives(spec: &NetworkSpec, z: &[Complex64]) -> Result<Vec<Complex64>> {
    spec.check_state(z)?;
    z.iter()
        .zip(&spec.activations)
        .enumerate()
        .map(|(k, (&zk, act))| {
            act.complex_derivative(zk)
                .ok_or(Error::NotComplexDifferentiable { component: k + 1 })
        })
        .collect()
}

pub fn jacobian_m(spec: &NetworkSpec, eq: &EquilibriumState) -> Result<JacobianM> {
    spec.ensure_valid()?;
    let d = activation_derivatives(spec, &eq.z)?;
    let n = spec.n;
    let m = DMatrix::from_fn(n, n, |j, k| {
        let diag = if j == k { -spec.a[j] } else { 0.0 };
        spec.weights[j][k] * d[k] + diag
    });
    Ok(JacobianM { m })
}

/// Eigenvalues of the real `2n x 2n` Jacobian of the split system at the
/// equilibrium, assembled from the activation real Jacobians.
pub fn real_split_spectrum(spec: &NetworkSpec, eq: &EquilibriumState) -> Result<Vec<Complex64>> {
    // complex differentiability is required even though the real Jacobian
    // exists without it
    activation_derivatives(spec, &eq.z)?;
    let split = spec.real_split();
    eig_real(&split.jacobian(&split_state(&eq.z)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    /// The smallest margin is within [`MARGIN_BAND`] of zero.
    Marginal,
    /// A zero eigenvalue makes the criterion inapplicable.
    Degenerate,
}

/// Range of orders for which the equilibrium is stable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StableFor {
    /// `q_star >= 1`.
    AllQ,
    /// `0 < q_star < 1`; stable exactly for `q < q_star`.
    BelowCritical { q_star: f64 },
    /// `q_star = 0` (within the margin band): unstable for every order.
    None,
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    /// Principal arguments, `(-pi, pi]`.
    pub args: Vec<f64>,
    /// `(2/pi) min |arg|`, unclamped; `None` when degenerate.
    pub q_star: Option<f64>,
    pub stable_for: StableFor,
    /// True for [`StableFor::BelowCritical`]: crossing the critical order is a Hopf
    /// bifurcation candidate (not a certified bifurcation).
    pub hopf_candidate: bool,
    pub degenerate: bool,
}

impl SpectrumReport {
    /// `scale` is the matrix norm used for zero detection.
    pub fn new(eigenvalues: Vec<Complex64>, scale: f64) -> Self {
        let args: Vec<f64> = eigenvalues.iter().map(|&l| principal_arg(l)).collect();
        let degenerate = has_zero_eigenvalue(&eigenvalues, scale);
        let q_star = if degenerate {
            None
        } else {
            Some(critical_order_unchecked(&args))
        };
        let stable_for = match q_star {
            None => StableFor::Undefined,
            Some(q) if q >= 1.0 => StableFor::AllQ,
            // a positive real eigenvalue up to rounding
            Some(q) if q * std::f64::consts::FRAC_PI_2 <= MARGIN_BAND => StableFor::None,
            Some(q) => StableFor::BelowCritical { q_star: q },
        };
        let hopf_candidate = matches!(stable_for, StableFor::BelowCritical { .. });
        SpectrumReport {
            eigenvalues,
            args,
            q_star,
            stable_for,
            hopf_candidate,
            degenerate,
        }
    }

    pub fn from_matrix(m: &JacobianM) -> Result<Self> {
        let eigs = eig_complex(&m.m)?;
        Ok(Self::new(eigs, m.m.norm()))
    }

    /// `|arg lambda| - q pi / 2` per eigenvalue.
    pub fn margins(&self, q: f64) -> Vec<f64> {
        self.args.iter().map(|a| a.abs() - q * std::f64::consts::FRAC_PI_2).collect()
    }

    pub fn verdict(&self, q: f64) -> Verdict {
        if self.degenerate {
            return Verdict::Degenerate;
        }
        let min = self.margins(q).into_iter().fold(f64::INFINITY, f64::min);
        if min > MARGIN_BAND {
            Verdict::Stable
        } else if min < -MARGIN_BAND {
            Verdict::Unstable
        } else {
            Verdict::Marginal
        }
    }
}

fn eigen_scale(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|l| l.norm()).fold(0.0, f64::max)
}

fn has_zero_eigenvalue(eigs: &[Complex64], scale: f64) -> bool {
    let scale = if scale > 0.0 { scale } else { eigen_scale(eigs) };
    eigs.iter()
        .any(|l| l.norm() <= ZERO_EIGENVALUE_RELATIVE * scale)
}

fn critical_order_unchecked(args: &[f64]) -> f64 {
    FRAC_2_PI * args.iter().map(|a| a.abs()).fold(f64::INFINITY, f64::min)
}

/// Stability report and verdict for order `q` from a bare eigenvalue list.
/// Zero detection is relative to the largest eigenvalue modulus.
pub fn matignon_report(eigs: &[Complex64], q: f64) -> Result<(SpectrumReport, Verdict)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("order q must lie in (0, 1), got {q}")));
    }
    let report = SpectrumReport::new(eigs.to_vec(), eigen_scale(eigs));
    let verdict = report.verdict(q);
    Ok((report, verdict))
}

/// `(2/pi) min |arg lambda|`, unclamped.
pub fn critical_order(eigs: &[Complex64]) -> Result<f64> {
    if eigs.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    if has_zero_eigenvalue(eigs, eigen_scale(eigs)) {
        return Err(Error::Degenerate("zero eigenvalue, argument undefined".into()));
    }
    let args: Vec<f64> = eigs.iter().map(|&l| principal_arg(l)).collect();
    Ok(critical_order_unchecked(&args))
}

/// Full spectral analysis of an equilibrium.
pub fn analyze(spec: &NetworkSpec, eq: &EquilibriumState) -> Result<(JacobianM, SpectrumReport)> {
    let m = jacobian_m(spec, eq)?;
    let report = SpectrumReport::from_matrix(&m)?;
    Ok((m, report))
}
