//! Principal-argument helpers. All angles are radians in `(-pi, pi]`.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Principal argument of `z` in `(-pi, pi]`.
///
/// `atan2` returns `-pi` for a negative real with a negative-zero imaginary
/// part; that value is mapped back to `pi`. `arg(0)` is `0`.
pub fn principal_arg(z: Complex64) -> f64 {
    let t = z.im.atan2(z.re);
    if t == -PI {
        PI
    } else {
        t
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    if t == -PI {
        PI
    } else {
        t
    }
}

/// Distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}
