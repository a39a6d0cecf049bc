//! One-parameter Mittag-Leffler function by direct series summation.
//!
//! `E_q(-lambda t^q)` solves `D^q y = -lambda y`, `y(0) = 1`, which makes it
//! the reference solution for the integrator tests. The series alternates for
//! negative arguments, so it is only trusted on a bounded window.

use crate::error::{Error, Result};
use statrs::function::gamma::{gamma, ln_gamma};

/// Largest `|x|` accepted.
pub const MAX_ABS_ARG: f64 = 5.0;
/// Summation stops once a term falls below this magnitude.
pub const TERM_CUTOFF: f64 = 1e-16;
/// Refuse when the largest term exceeds this; the absolute error of the
/// alternating sum grows like `peak * eps`.
pub const MAX_PEAK_TERM: f64 = 1e10;
const MAX_TERMS: usize = 100_000;

/// `E_q(x) = sum_{m >= 0} x^m / Gamma(q m + 1)` for `q` in `(0, 1]` and
/// `x <= 0`, `|x| <= 5`.
pub fn ml_oracle(q: f64, x: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::OracleWindow(format!("order {q} outside (0, 1]")));
    }
    if !x.is_finite() || x > 0.0 || x.abs() > MAX_ABS_ARG {
        return Err(Error::OracleWindow(format!("argument {x} outside [-{MAX_ABS_ARG}, 0]")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let ln_abs = x.abs().ln();
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    for m in 0..MAX_TERMS {
        let mf = m as f64;
        let arg = q * mf + 1.0;
        let magnitude = if arg < 170.0 {
            x.abs().powi(m as i32) / gamma(arg)
        } else {
            (mf * ln_abs - ln_gamma(arg)).exp()
        };
        peak = peak.max(magnitude);
        if peak > MAX_PEAK_TERM {
            return Err(Error::OracleWindow(format!(
                "series terms reach {peak:e} at q = {q}, x = {x}; cancellation would dominate"
            )));
        }
        // terms decrease once m exceeds the peak index
        if magnitude < TERM_CUTOFF && magnitude < peak {
            return Ok(sum);
        }
        sum += if m % 2 == 0 { magnitude } else { -magnitude };
    }
    Err(Error::OracleWindow(format!("series did not settle after {MAX_TERMS} terms")))
}
