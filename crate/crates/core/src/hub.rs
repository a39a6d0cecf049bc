//! Closed-form stability of hub networks.
//!
//! Neuron 1 is the center; peripheral neurons only connect to the center
//! and to themselves. When every peripheral diagonal entry of the Jacobian
//! equals a common `beta`, the characteristic polynomial factors as
//!
//! ```text
//! (lambda - beta)^(n-2) * (lambda^2 - (alpha + beta) lambda + alpha beta - gamma)
//! ```
//!
//! and the principal arguments of the quadratic's roots follow from the
//! moduli and arguments of its coefficients without solving it.

use crate::angle::{principal_arg, wrap};
use crate::equilibrium::EquilibriumState;
use crate::error::{Error, Result};
use crate::model::{NetworkSpec, TopologyTag};
use crate::spectral::activation_derivatives;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

/// Uniformity tolerance for the peripheral diagonal.
pub const UNIFORMITY_TOL: f64 = 1e-10;
/// `|cos A|` at or below this routes to the `phi1 - phi2 = pi` path.
pub const COS_A_ZERO: f64 = 1e-14;
/// Allowed disagreement between the four-branch `q**` and the root
/// arguments.
pub const BRANCH_AGREEMENT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HubCoefficients {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub n: usize,
}

impl HubCoefficients {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("a hub needs n >= 2, got {n}")));
        }
        Ok(HubCoefficients { alpha, beta, gamma, n })
    }

    /// `alpha + beta`, the sum of the quadratic's roots.
    pub fn root_sum(&self) -> Complex64 {
        self.alpha + self.beta
    }

    /// `alpha beta - gamma`, the product of the quadratic's roots.
    pub fn root_product(&self) -> Complex64 {
        self.alpha * self.beta - self.gamma
    }

    /// `(lambda - beta)^(n-2) (lambda^2 - (alpha+beta) lambda + alpha beta - gamma)`.
    pub fn characteristic(&self, lambda: Complex64) -> Complex64 {
        let quad = lambda * lambda - self.root_sum() * lambda + self.root_product();
        (lambda - self.beta).powi(self.n as i32 - 2) * quad
    }
}

/// Reduces a hub network at `eq` to `(alpha, beta, gamma)`.
pub fn hub_coefficients(spec: &NetworkSpec, eq: &EquilibriumState) -> Result<HubCoefficients> {
    spec.ensure_valid()?;
    if !spec.has_hub_pattern() {
        return Err(Error::TopologyMismatch {
            expected: TopologyTag::Hub.to_string(),
            found: spec.classify_topology().to_string(),
        });
    }
    let d = activation_derivatives(spec, &eq.z)?;
    let n = spec.n;
    let alpha = -spec.a[0] + spec.weights[0][0] * d[0];
    let peripheral: Vec<Complex64> = (1..n).map(|j| -spec.a[j] + spec.weights[j][j] * d[j]).collect();
    let beta = peripheral[0];
    if let Some((j, b)) = peripheral
        .iter()
        .enumerate()
        .find(|(_, b)| (*b - beta).norm() > UNIFORMITY_TOL)
    {
        return Err(Error::NonUniformPeripheral(format!(
            "neuron {} has {b}, neuron 2 has {beta}",
            j + 2
        )));
    }
    let gamma: Complex64 = (1..n)
        .map(|k| spec.weights[0][k] * spec.weights[k][0] * d[0] * d[k])
        .sum();
    HubCoefficients::new(alpha, beta, gamma, n)
}

/// Intermediate quantities of the root-argument computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootArgInputs {
    /// `|alpha + beta|`
    pub rho1: f64,
    /// `Arg(alpha + beta)`
    pub theta1: f64,
    /// `|alpha beta - gamma|`
    pub rho2: f64,
    /// `Arg(alpha beta - gamma)`
    pub theta2: f64,
    /// `theta1 - theta2 / 2`
    #[serde(rename = "A")]
    pub a: f64,
    /// Half the angle between the two roots (or its supplement).
    #[serde(rename = "B")]
    pub b: f64,
    /// `rho1^2 / (2 rho2)`
    pub u: f64,
    /// Argument handed to `arccos` before clamping to `[-1, 1]`.
    pub arccos_arg: f64,
}

impl RootArgInputs {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64) -> Result<Self> {
        let sum = alpha + beta;
        let product = alpha * beta - gamma;
        let rho2 = product.norm();
        if rho2.is_nan() || rho2 <= 0.0 {
            return Err(Error::Degenerate(
                "alpha beta - gamma = 0: a root at the origin has no argument".into(),
            ));
        }
        let rho1 = sum.norm();
        let theta1 = principal_arg(sum);
        let theta2 = principal_arg(product);
        let a = theta1 - theta2 / 2.0;
        let u = rho1 * rho1 / (2.0 * rho2);
        let cos2a = (2.0 * a).cos();
        // (u - sqrt(u^2 - 4u cos 2A + 4)) / 2, rationalized against
        // cancellation for large u
        let root = (u * u - 4.0 * u * cos2a + 4.0).max(0.0).sqrt();
        let arccos_arg = 2.0 * (u * cos2a - 1.0) / (u + root);
        let b = 0.5 * arccos_arg.clamp(-1.0, 1.0).acos();
        Ok(RootArgInputs {
            rho1,
            theta1,
            rho2,
            theta2,
            a,
            b,
            u,
            arccos_arg,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RootArgCase {
    /// `cos A >= 0`: `theta2/2 +- B`.
    #[serde(rename = "a")]
    A,
    /// `cos A < 0`, `theta2 <= -2B`: `theta2/2 + pi +- B`.
    #[serde(rename = "b.1")]
    B1,
    /// `cos A < 0`, `-2B < theta2 <= 2B`: `theta2/2 +- (pi - B)`.
    #[serde(rename = "b.2")]
    B2,
    /// `cos A < 0`, `theta2 > 2B`: `theta2/2 - pi +- B`.
    #[serde(rename = "b.3")]
    B3,
    /// `cos A = 0`: the roots are `pi` apart, `(theta2 +- pi) / 2`.
    #[serde(rename = "a.cos_zero")]
    CosAZero,
    /// `alpha + beta = 0`: the roots are `+-sqrt(-(alpha beta - gamma))`.
    #[serde(rename = "a.sum_zero")]
    SumZero,
}

impl RootArgCase {
    pub fn label(&self) -> &'static str {
        match self {
            RootArgCase::A => "a",
            RootArgCase::B1 => "b.1",
            RootArgCase::B2 => "b.2",
            RootArgCase::B3 => "b.3",
            RootArgCase::CosAZero => "a.cos_zero",
            RootArgCase::SumZero => "a.sum_zero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootArgs {
    pub phi1: f64,
    pub phi2: f64,
    pub case: RootArgCase,
    pub inputs: RootArgInputs,
}

impl RootArgs {
    /// `(2/pi) min(|phi1|, |phi2|)`.
    pub fn critical_order(&self) -> f64 {
        FRAC_2_PI * self.phi1.abs().min(self.phi2.abs())
    }
}

/// Principal arguments of the roots of
/// `lambda^2 - (alpha + beta) lambda + (alpha beta - gamma)` by case
/// analysis on `cos A` and `theta2`, without solving the quadratic.
pub fn quadratic_root_args(alpha: Complex64, beta: Complex64, gamma: Complex64) -> Result<RootArgs> {
    let inputs = RootArgInputs::new(alpha, beta, gamma)?;
    let RootArgInputs { rho1, theta2, a, b, .. } = inputs;
    let half = theta2 / 2.0;

    let (case, plus, minus) = if rho1 == 0.0 {
        (RootArgCase::SumZero, half + FRAC_PI_2, half - FRAC_PI_2)
    } else {
        let cos_a = a.cos();
        if cos_a.abs() <= COS_A_ZERO {
            (RootArgCase::CosAZero, (theta2 + PI) / 2.0, (theta2 - PI) / 2.0)
        } else if cos_a > 0.0 {
            (RootArgCase::A, half + b, half - b)
        } else if theta2 <= -2.0 * b {
            (RootArgCase::B1, half + PI + b, half + PI - b)
        } else if theta2 <= 2.0 * b {
            (RootArgCase::B2, half + (PI - b), half - (PI - b))
        } else {
            (RootArgCase::B3, half - PI + b, half - PI - b)
        }
    };
    Ok(RootArgs {
        phi1: wrap(plus),
        phi2: wrap(minus),
        case,
        inputs,
    })
}

/// The four-branch expression for `q**` written directly in terms of
/// `theta2` and `B`.
pub fn q_double_star_branches(inputs: &RootArgInputs, case: RootArgCase) -> f64 {
    let t = inputs.theta2;
    let b2 = 2.0 * inputs.b;
    let two_pi = 2.0 * PI;
    let pair = match case {
        RootArgCase::A => ((t - b2).abs(), (t + b2).abs()),
        RootArgCase::CosAZero | RootArgCase::SumZero => ((t - PI).abs(), (t + PI).abs()),
        RootArgCase::B1 => ((t + two_pi - b2).abs(), (t + two_pi + b2).abs()),
        RootArgCase::B2 => ((t + two_pi - b2).abs(), (t - two_pi + b2).abs()),
        RootArgCase::B3 => ((t - two_pi + b2).abs(), (t - two_pi - b2).abs()),
    };
    pair.0.min(pair.1) / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HubAnalysis {
    pub coefficients: HubCoefficients,
    pub roots: RootArgs,
    /// Critical order of the quadratic factor alone.
    pub q_double_star: f64,
    /// `(2/pi) |Arg beta|` for `n >= 3`.
    pub beta_order: Option<f64>,
    pub q_star: f64,
}

/// Critical fractional order of a hub equilibrium.
///
/// `q** = (2/pi) min(|phi1|, |phi2|)` is computed both from the root
/// arguments and from the four-branch expression; they must agree within
/// [`BRANCH_AGREEMENT_TOL`].
pub fn hub_critical_order(coeffs: &HubCoefficients) -> Result<HubAnalysis> {
    let roots = quadratic_root_args(coeffs.alpha, coeffs.beta, coeffs.gamma)?;
    let from_args = roots.critical_order();
    let from_branches = q_double_star_branches(&roots.inputs, roots.case);
    if (from_args - from_branches).abs() > BRANCH_AGREEMENT_TOL {
        return Err(Error::Degenerate(format!(
            "branch formula gives q** = {from_branches}, root arguments give {from_args}"
        )));
    }
    let beta_order = if coeffs.n >= 3 {
        if coeffs.beta.norm() == 0.0 {
            return Err(Error::Degenerate(format!(
                "beta = 0 is an eigenvalue of multiplicity {}",
                coeffs.n - 2
            )));
        }
        Some(FRAC_2_PI * principal_arg(coeffs.beta).abs())
    } else {
        None
    };
    let q_star = beta_order.map_or(from_args, |qb| qb.min(from_args));
    Ok(HubAnalysis {
        coefficients: *coeffs,
        roots,
        q_double_star: from_args,
        beta_order,
        q_star,
    })
}
