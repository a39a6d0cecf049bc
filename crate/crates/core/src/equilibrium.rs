//! Steady states of the network: `-A z + T g(z) + I = 0`.
//!
//! Roots are found with Newton's method on the real-split residual; the
//! Jacobian is assembled from the analytic activation partials. Nothing here
//! depends on the fractional order.

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::model::{join_state, split_state, NetworkSpec};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Roots closer than this in max-norm are merged.
pub const DEDUP_RADIUS: f64 = 1e-8;
const MAX_HALVINGS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumState {
    pub z: Vec<Complex64>,
    /// Max-norm of the steady-state defect at `z`.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl EquilibriumState {
    /// Wraps `z`, recomputing its residual. `converged` is set when the
    /// residual is within [`DEFAULT_TOL`].
    pub fn evaluate(spec: &NetworkSpec, z: Vec<Complex64>) -> Result<Self> {
        let residual_norm = residual(spec, &z)?;
        Ok(EquilibriumState {
            z,
            residual_norm,
            converged: residual_norm <= DEFAULT_TOL,
            iterations: 0,
        })
    }
}

/// Max-norm of `-A z + T g(z) + I`, evaluated in complex form.
pub fn residual(spec: &NetworkSpec, z: &[Complex64]) -> Result<f64> {
    spec.check_state(z)?;
    Ok(max_norm(&spec.field(z)))
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Result of a damped Newton solve on a real system.
struct NewtonOutcome {
    u: Vec<f64>,
    iterations: usize,
}

/// Damped Newton on a real system. `residual` is the merit function used
/// for convergence and line search (max-norm).
fn damped_newton<F, J, R>(
    mut u: Vec<f64>,
    tol: f64,
    max_iter: usize,
    field: F,
    jacobian: J,
    merit: R,
) -> NewtonOutcome
where
    F: Fn(&[f64]) -> DVector<f64>,
    J: Fn(&[f64]) -> DMatrix<f64>,
    R: Fn(&[f64]) -> f64,
{
    let mut current = merit(&u);
    let mut iterations = 0;
    while current > tol && iterations < max_iter {
        iterations += 1;
        let f = field(&u);
        let jac = jacobian(&u);
        let step = match jac.clone().lu().solve(&(-&f)) {
            Some(s) if s.iter().all(|x| x.is_finite()) => s,
            // singular: regularized least squares step
            _ => {
                let jt = jac.transpose();
                let mu = 1e-10 * jac.norm_squared().max(1e-300);
                let normal = &jt * &jac + DMatrix::identity(u.len(), u.len()) * mu;
                match normal.lu().solve(&(-(&jt * &f))) {
                    Some(s) => s,
                    None => break,
                }
            }
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            let r = merit(&trial);
            if r.is_finite() && r < current {
                u = trial;
                current = r;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    NewtonOutcome { u, iterations }
}

/// Newton solve of the steady-state equations from `guess`.
///
/// `converged` is true iff the final residual is within `tol`; the last
/// iterate is returned either way.
pub fn find_equilibrium(
    spec: &NetworkSpec,
    guess: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumState> {
    spec.ensure_valid()?;
    spec.check_state(guess)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let split = spec.real_split();
    let outcome = damped_newton(
        split_state(guess),
        tol,
        max_iter,
        |u| split.field(u),
        |u| split.jacobian(u),
        |u| max_norm(&spec.field(&join_state(u))),
    );
    let z = join_state(&outcome.u);
    let residual_norm = residual(spec, &z)?;
    Ok(EquilibriumState {
        z,
        residual_norm,
        converged: residual_norm <= tol,
        iterations: outcome.iterations,
    })
}

/// Roots of the scalar equation `-a0 z + s g(z) = 0` from several seeds,
/// lifted to equal-component states of an `n`-neuron network.
///
/// `z = 0` is always included. Non-convergent seeds are dropped and roots
/// within [`DEDUP_RADIUS`] of an earlier one are merged.
pub fn equal_component_equilibria(
    a0: f64,
    s: Complex64,
    act: &Activation,
    seeds: &[Complex64],
    n: usize,
) -> Result<Vec<EquilibriumState>> {
    if a0.is_nan() || a0 <= 0.0 {
        return Err(Error::InvalidArgument(format!("a0 must be > 0, got {a0}")));
    }
    let v = act.violations();
    if !v.is_empty() {
        return Err(Error::InvalidArgument(v.join("; ")));
    }
    let scalar = |z: Complex64| -a0 * z + s * act.eval(z);
    let field = |u: &[f64]| {
        let f = scalar(Complex64::new(u[0], u[1]));
        DVector::from_column_slice(&[f.re, f.im])
    };
    let jacobian = |u: &[f64]| {
        let j = act.real_jacobian(Complex64::new(u[0], u[1]));
        // [[s.re, -s.im], [s.im, s.re]] * Dg - a0 I
        DMatrix::from_row_slice(
            2,
            2,
            &[
                s.re * j.d_re_dx - s.im * j.d_im_dx - a0,
                s.re * j.d_re_dy - s.im * j.d_im_dy,
                s.im * j.d_re_dx + s.re * j.d_im_dx,
                s.im * j.d_re_dy + s.re * j.d_im_dy - a0,
            ],
        )
    };
    let merit = |u: &[f64]| scalar(Complex64::new(u[0], u[1])).norm();

    let mut roots: Vec<(Complex64, f64)> = vec![(Complex64::new(0.0, 0.0), 0.0)];
    for seed in seeds {
        // polish well past the acceptance tolerance so that slow convergence
        // to a singular root still lands inside the merge radius
        let out = damped_newton(
            vec![seed.re, seed.im],
            DEFAULT_TOL * 1e-6,
            DEFAULT_MAX_ITER,
            field,
            jacobian,
            merit,
        );
        let root = Complex64::new(out.u[0], out.u[1]);
        let r = scalar(root).norm();
        if r > DEFAULT_TOL {
            continue;
        }
        let duplicate = roots
            .iter()
            .any(|(z, _)| (z.re - root.re).abs().max((z.im - root.im).abs()) < DEDUP_RADIUS);
        if !duplicate {
            roots.push((root, r));
        }
    }
    Ok(roots
        .into_iter()
        .map(|(z, r)| EquilibriumState {
            z: vec![z; n],
            residual_norm: r,
            converged: true,
            iterations: 0,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::examples::{hub3, ring3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn residual_examples() {
        assert_eq!(residual(&hub3(), &[c(0.0, 0.0); 3]).unwrap(), 0.0);
        let z0 = Complex64::from_polar(1.0, 0.3);
        assert!(residual(&ring3(), &[z0; 3]).unwrap() < 1e-15);
        // -2 + 2 * (2/3) per component
        let r = residual(&ring3(), &[c(2.0, 0.0); 3]).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-15, "{r}");
        assert!(residual(&ring3(), &[c(2.0, 0.0); 2]).is_err());
    }

    #[test]
    fn hub_newton_finds_origin() {
        let eq = find_equilibrium(&hub3(), &[c(0.1, 0.0); 3], DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(eq.converged);
        assert!(eq.residual_norm <= 1e-12);
        assert!(eq.z.iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn exact_guess_needs_no_iterations() {
        let eq = find_equilibrium(&hub3(), &[c(0.0, 0.0); 3], DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(eq.converged);
        assert_eq!(eq.iterations, 0);
    }

    #[test]
    fn ring_newton_reaches_unit_circle() {
        let eq = find_equilibrium(&ring3(), &[c(1.2, 0.0); 3], DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(eq.converged, "{eq:?}");
        let z0 = eq.z[0];
        assert!((z0.norm() - 1.0).abs() <= 1e-10);
        assert!(eq.z.iter().all(|z| (z - z0).norm() < 1e-10));
    }

    #[test]
    fn zero_iteration_budget_reports_not_converged() {
        let eq = find_equilibrium(&hub3(), &[c(0.1, 0.0); 3], DEFAULT_TOL, 0).unwrap();
        assert!(!eq.converged);
        assert_eq!(eq.z, vec![c(0.1, 0.0); 3]);
    }

    #[test]
    fn scalar_roots_on_unit_circle() {
        let seeds: Vec<Complex64> = (0..8)
            .map(|k| Complex64::from_polar(1.5, k as f64 * std::f64::consts::PI / 4.0))
            .collect();
        let roots = equal_component_equilibria(1.0, c(2.0, 0.0), &Activation::unit_georgiou(), &seeds, 3).unwrap();
        assert_eq!(roots[0].z[0], c(0.0, 0.0));
        assert_eq!(roots.len(), 9);
        for r in &roots[1..] {
            assert!((r.z[0].norm() - 1.0).abs() < 1e-10);
            assert_eq!(r.z.len(), 3);
            // independent complex-form check on the full network
            assert!(residual(&ring3(), &r.z).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn weak_coupling_has_only_origin() {
        let seeds = [c(1.0, 1.0), c(-3.0, 0.5), c(0.2, -0.1)];
        let g = Activation::unit_georgiou();
        let roots = equal_component_equilibria(1.0, c(0.5, 0.0), &g, &seeds, 1).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].z[0], c(0.0, 0.0));
        // a0 = 2, s = 2: modulus equation |z|(1 + |z|) = |z| forces z = 0
        let roots = equal_component_equilibria(2.0, c(2.0, 0.0), &g, &seeds, 1).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(equal_component_equilibria(0.0, c(2.0, 0.0), &g, &seeds, 1).is_err());
    }

    #[test]
    fn ring_equilibria_lie_in_bounding_ball() {
        let spec = ring3();
        let radius = 1.0 + 2f64.sqrt() + 5f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut found = 0;
        for _ in 0..100 {
            let guess: Vec<Complex64> = (0..3)
                .map(|_| c(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)))
                .collect();
            let eq = find_equilibrium(&spec, &guess, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            if eq.converged {
                found += 1;
                assert!(residual(&spec, &eq.z).unwrap() <= DEFAULT_TOL);
                assert!(eq.z.iter().all(|z| z.norm() <= radius), "{eq:?}");
            }
        }
        assert!(found > 0);
    }
}
