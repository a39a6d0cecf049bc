//! Dense complex eigenvalues: Householder reduction to upper Hessenberg
//! form followed by single-shift complex QR iteration with Wilkinson
//! shifts and deflation.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Iteration budget per eigenvalue before giving up.
const ITERATIONS_PER_EIGENVALUE: usize = 60;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// All eigenvalues of `m`, repeated according to algebraic multiplicity.
///
/// Order follows deflation (bottom of the Hessenberg matrix first), not any
/// sorting. Non-convergence returns [`Error::EigenNoConvergence`] carrying
/// the eigenvalues deflated so far.
pub fn eig_complex(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "eigenvalues of a non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = m.clone();
    reduce_to_hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

/// Eigenvalues of a real matrix via its complex embedding.
pub fn eig_real(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    eig_complex(&m.map(|x| Complex64::new(x, 0.0)))
}

/// In-place Householder reduction; entries below the first subdiagonal are
/// left as explicit zeros.
fn reduce_to_hessenberg(h: &mut DMatrix<Complex64>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![zero(); n];
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // v = x + phase*|x| e1, reflector I - 2 v v^H / (v^H v)
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] += phase * norm;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // left: H <- (I - beta v v^H) H, rows k+1.., columns k..
        for j in k..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * h[(i, j)]).sum();
            let s = s * beta;
            for i in k + 1..n {
                h[(i, j)] -= v[i] * s;
            }
        }
        // right: H <- H (I - beta v v^H), all rows, columns k+1..
        for i in 0..n {
            let s: Complex64 = (k + 1..n).map(|j| h[(i, j)] * v[j]).sum();
            let s = s * beta;
            for j in k + 1..n {
                h[(i, j)] -= s * v[j].conj();
            }
        }
        h[(k + 1, k)] = -phase * norm;
        for i in k + 2..n {
            h[(i, k)] = zero();
        }
    }
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with real `c` mapping
/// `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, zero());
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

fn hessenberg_qr(h: &mut DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tiny = f64::MIN_POSITIVE / eps;
    let max_total = ITERATIONS_PER_EIGENVALUE * n;

    let mut eigs = Vec::with_capacity(n);
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    let mut total = 0usize;

    loop {
        if hi == 0 {
            eigs.push(h[(0, 0)]);
            break;
        }
        // locate the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= eps * diag || sub <= tiny {
                h[(lo, lo - 1)] = zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigs.push(h[(hi, hi)]);
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }

        total += 1;
        iter_since_deflation += 1;
        if total > max_total {
            return Err(Error::EigenNoConvergence {
                iterations: total,
                partial: eigs,
            });
        }

        let shift = if iter_since_deflation.is_multiple_of(11) {
            // exceptional shift to break cycles
            let s = h[(hi, hi - 1)].re.abs()
                + if hi >= 2 { h[(hi - 1, hi - 2)].re.abs() } else { 0.0 };
            h[(hi, hi)] + Complex64::new(0.75 * s, -0.4375 * s)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // explicit shifted QR step on the active block lo..=hi
        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        rotations.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = zero();
            rotations.push((c, s));
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eigs)
}

/// Multiset comparison with tolerance: greedy nearest matching after
/// sorting by real then imaginary part. Returns the largest matched
/// distance, or `None` when lengths differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| {
        a[i].re
            .total_cmp(&a[j].re)
            .then(a[i].im.total_cmp(&a[j].im))
    });
    for i in order {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, z)| (j, (z - a[i]).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[best] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    /// smallest singular value of (M - lambda I) relative to |M|, via the
    /// smallest eigenvalue of the Gram matrix.
    fn relative_residual(m: &DMatrix<Complex64>, lambda: Complex64) -> f64 {
        let n = m.nrows();
        let shifted = m - DMatrix::<Complex64>::identity(n, n) * lambda;
        let svd = shifted.clone().svd(false, false);
        let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        smin / m.norm()
    }

    #[test]
    fn diagonal_matrix() {
        let d = [c(1.0, -5.0), c(-1.0, 1.0), c(-1.0, 1.0)];
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&d));
        let eigs = eig_complex(&m).unwrap();
        assert_eq!(multiset_distance(&eigs, &d), Some(0.0));
    }

    #[test]
    fn trace_and_determinant_are_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 3, 5, 8, 13, 30] {
            let m = random_matrix(&mut rng, n);
            let eigs = eig_complex(&m).unwrap();
            assert_eq!(eigs.len(), n);
            let tr: Complex64 = eigs.iter().sum();
            assert!((tr - m.trace()).norm() < 1e-10 * n as f64, "n={n}");
            for &l in &eigs {
                assert!(relative_residual(&m, l) < 1e-12, "n={n} lambda={l}");
            }
        }
    }

    #[test]
    fn larger_random_matrices_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [60, 120] {
            let m = random_matrix(&mut rng, n);
            let eigs = eig_complex(&m).unwrap();
            assert_eq!(eigs.len(), n);
            let tr: Complex64 = eigs.iter().sum();
            assert!((tr - m.trace()).norm() < 1e-9 * n as f64);
            for &l in eigs.iter().take(10) {
                assert!(relative_residual(&m, l) < 1e-10);
            }
        }
    }

    #[test]
    fn real_matrix_spectrum_is_conjugate_closed() {
        // rotation-like block has eigenvalues +-i
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let eigs = eig_real(&m).unwrap();
        assert!(multiset_distance(&eigs, &[c(0.0, 1.0), c(0.0, -1.0)]).unwrap() < 1e-14);
    }

    #[test]
    fn nilpotent_and_zero_matrices() {
        let z = DMatrix::<Complex64>::zeros(4, 4);
        assert!(eig_complex(&z).unwrap().iter().all(|l| l.norm() == 0.0));
        let mut j = DMatrix::<Complex64>::zeros(3, 3);
        j[(0, 1)] = c(1.0, 0.0);
        j[(1, 2)] = c(1.0, 0.0);
        assert!(eig_complex(&j).unwrap().iter().all(|l| l.norm() < 1e-12));
    }

    #[test]
    fn permutation_matrix_roots_of_unity() {
        let n = 7;
        let m = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let eigs = eig_complex(&m).unwrap();
        let roots: Vec<Complex64> = (0..n)
            .map(|p| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * p as f64 / n as f64))
            .collect();
        assert!(multiset_distance(&eigs, &roots).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 0)] = c(f64::NAN, 0.0);
        assert!(eig_complex(&m).is_err());
    }
}
