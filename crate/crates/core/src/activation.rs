//! Complex activation functions.
//!
//! Each activation `g(x + iy) = g_R(x, y) + i g_I(x, y)` exposes its value,
//! the real 2x2 Jacobian of `(g_R, g_I)` with respect to `(x, y)` and, where
//! the Cauchy-Riemann equations hold, the complex derivative.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance on the analytic partials when testing the Cauchy-Riemann
/// equations.
pub const CR_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Activation {
    /// `g(z) = z / (c1 + c2 |z|)`, bounded by `1 / c2`.
    #[serde(rename = "georgiou")]
    GeorgiouKoutsougeras { c1: f64, c2: f64 },
    /// `g(z) = gain * z`.
    Linear { gain: Complex64 },
}

/// Partial derivatives of `(g_R, g_I)` with respect to `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealJacobian2x2 {
    pub d_re_dx: f64,
    pub d_re_dy: f64,
    pub d_im_dx: f64,
    pub d_im_dy: f64,
}

impl RealJacobian2x2 {
    /// Residuals of the two Cauchy-Riemann equations.
    pub fn cauchy_riemann_defect(&self) -> (f64, f64) {
        (
            self.d_re_dx - self.d_im_dy,
            self.d_re_dy + self.d_im_dx,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.d_re_dx.is_finite()
            && self.d_re_dy.is_finite()
            && self.d_im_dx.is_finite()
            && self.d_im_dy.is_finite()
    }
}

impl Activation {
    /// The activation used throughout the worked examples, `z / (1 + |z|)`.
    pub const fn unit_georgiou() -> Self {
        Activation::GeorgiouKoutsougeras { c1: 1.0, c2: 1.0 }
    }

    /// Parameter violations, empty when the activation is well formed.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match *self {
            Activation::GeorgiouKoutsougeras { c1, c2 } => {
                if !(c1.is_finite() && c1 > 0.0) {
                    out.push(format!("georgiou c1 must be finite and > 0, got {c1}"));
                }
                if !(c2.is_finite() && c2 > 0.0) {
                    out.push(format!("georgiou c2 must be finite and > 0, got {c2}"));
                }
            }
            Activation::Linear { gain } => {
                if !(gain.re.is_finite() && gain.im.is_finite()) {
                    out.push(format!("linear gain must be finite, got {gain}"));
                }
            }
        }
        out
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            Activation::GeorgiouKoutsougeras { c1, c2 } => z / (c1 + c2 * z.norm()),
            Activation::Linear { gain } => gain * z,
        }
    }

    /// Real Jacobian of `(g_R, g_I)` at `z`.
    ///
    /// For the Georgiou-Koutsougeras function the partials extend
    /// continuously to the origin, where they equal `diag(1/c1, 1/c1)`.
    pub fn real_jacobian(&self, z: Complex64) -> RealJacobian2x2 {
        match *self {
            Activation::GeorgiouKoutsougeras { c1, c2 } => {
                let r = z.norm();
                let den = c1 + c2 * r;
                if r == 0.0 {
                    return RealJacobian2x2 {
                        d_re_dx: 1.0 / c1,
                        d_re_dy: 0.0,
                        d_im_dx: 0.0,
                        d_im_dy: 1.0 / c1,
                    };
                }
                let (x, y) = (z.re, z.im);
                // d/dx [x / (c1 + c2 r)] = 1/den - c2 x^2 / (r den^2)
                let k = c2 / (r * den * den);
                RealJacobian2x2 {
                    d_re_dx: 1.0 / den - k * x * x,
                    d_re_dy: -k * x * y,
                    d_im_dx: -k * x * y,
                    d_im_dy: 1.0 / den - k * y * y,
                }
            }
            Activation::Linear { gain } => RealJacobian2x2 {
                d_re_dx: gain.re,
                d_re_dy: -gain.im,
                d_im_dx: gain.im,
                d_im_dy: gain.re,
            },
        }
    }

    /// Complex derivative at `z`, present only when the Cauchy-Riemann
    /// equations hold within [`CR_TOLERANCE`].
    pub fn complex_derivative(&self, z: Complex64) -> Option<Complex64> {
        match *self {
            Activation::Linear { gain } => Some(gain),
            Activation::GeorgiouKoutsougeras { .. } => {
                let jac = self.real_jacobian(z);
                let (e1, e2) = jac.cauchy_riemann_defect();
                if e1.abs() <= CR_TOLERANCE && e2.abs() <= CR_TOLERANCE {
                    Some(Complex64::new(jac.d_re_dx, jac.d_im_dx))
                } else {
                    None
                }
            }
        }
    }
}
