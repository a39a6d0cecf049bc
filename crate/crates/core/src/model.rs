//! Network description, topology detection and the real-split system.

use crate::activation::Activation;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A complex-valued Hopfield network
///
/// `D^q z_k = -a_k z_k + sum_j T_kj g_j(z_j) + I_k`.
///
/// Instances deserialized from JSON are not validated; call
/// [`NetworkSpec::validate`] (or [`NetworkSpec::ensure_valid`]) before use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub n: usize,
    /// Self-regulation coefficients, one per neuron, all positive.
    pub a: Vec<f64>,
    /// Interconnection matrix, row-major.
    #[serde(rename = "T")]
    pub weights: Vec<Vec<Complex64>>,
    /// External inputs.
    #[serde(rename = "I")]
    pub inputs: Vec<Complex64>,
    pub activations: Vec<Activation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyTag {
    General,
    Hub,
    Ring,
}

impl fmt::Display for TopologyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TopologyTag::General => "general",
            TopologyTag::Hub => "hub",
            TopologyTag::Ring => "ring",
        };
        f.write_str(s)
    }
}

impl NetworkSpec {
    /// Network with every neuron sharing one activation and zero inputs.
    pub fn uniform(a: Vec<f64>, weights: Vec<Vec<Complex64>>, activation: Activation) -> Self {
        let n = a.len();
        NetworkSpec {
            n,
            a,
            weights,
            inputs: vec![Complex64::new(0.0, 0.0); n],
            activations: vec![activation; n],
        }
    }

    /// Every violated well-formedness condition; empty when valid.
    pub fn validate(&self) -> Vec<String> {
        let n = self.n;
        let mut out = Vec::new();
        if n == 0 {
            out.push("n must be at least 1".to_string());
        }
        if self.a.len() != n {
            out.push(format!("a has length {}, expected n = {n}", self.a.len()));
        }
        for (k, &ak) in self.a.iter().enumerate() {
            if !(ak.is_finite() && ak > 0.0) {
                out.push(format!("a_{} must be finite and > 0, got {ak}", k + 1));
            }
        }
        let cols: Vec<usize> = self.weights.iter().map(Vec::len).collect();
        if self.weights.len() != n || cols.iter().any(|&c| c != n) {
            let shape = match cols.iter().min() == cols.iter().max() {
                true => format!("{}x{}", self.weights.len(), cols.first().copied().unwrap_or(0)),
                false => format!("{} ragged rows", self.weights.len()),
            };
            out.push(format!("T has shape {shape}, expected {n}x{n}"));
        }
        if self
            .weights
            .iter()
            .flatten()
            .any(|t| !(t.re.is_finite() && t.im.is_finite()))
        {
            out.push("T has non-finite entries".to_string());
        }
        if self.inputs.len() != n {
            out.push(format!("I has length {}, expected n = {n}", self.inputs.len()));
        }
        if self.inputs.iter().any(|t| !(t.re.is_finite() && t.im.is_finite())) {
            out.push("I has non-finite entries".to_string());
        }
        if self.activations.len() != n {
            out.push(format!(
                "activations has length {}, expected n = {n}",
                self.activations.len()
            ));
        }
        for (k, act) in self.activations.iter().enumerate() {
            for v in act.violations() {
                out.push(format!("activation {}: {v}", k + 1));
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(v))
        }
    }

    pub(crate) fn check_state(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::StateLength {
                expected: self.n,
                got: z.len(),
            });
        }
        Ok(())
    }

    pub fn weight(&self, j: usize, k: usize) -> Complex64 {
        self.weights[j][k]
    }

    pub fn weight_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |j, k| self.weights[j][k])
    }

    /// `-A z + T g(z) + I`.
    pub fn field(&self, z: &[Complex64]) -> Vec<Complex64> {
        let g: Vec<Complex64> = z
            .iter()
            .zip(&self.activations)
            .map(|(&zk, act)| act.eval(zk))
            .collect();
        self.field_with_activations(z, &g)
    }

    pub(crate) fn field_with_activations(&self, z: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|k| {
                let coupling: Complex64 = self.weights[k].iter().zip(g).map(|(t, gj)| t * gj).sum();
                -self.a[k] * z[k] + coupling + self.inputs[k]
            })
            .collect()
    }

    /// Hub pattern: peripheral neurons (index >= 1) only talk to the
    /// center and themselves.
    pub fn has_hub_pattern(&self) -> bool {
        let n = self.n;
        n >= 2
            && (1..n).all(|j| (1..n).all(|k| j == k || self.weights[j][k] == Complex64::new(0.0, 0.0)))
    }

    /// Ring pattern: every neuron only talks to itself and its two cyclic
    /// neighbours.
    pub fn has_ring_pattern(&self) -> bool {
        let n = self.n;
        n >= 3
            && (0..n).all(|j| {
                (0..n).all(|k| {
                    let d = (j + n - k) % n;
                    d == 0 || d == 1 || d == n - 1 || self.weights[j][k] == Complex64::new(0.0, 0.0)
                })
            })
    }

    /// Hub wins over ring when both patterns hold.
    pub fn classify_topology(&self) -> TopologyTag {
        if self.has_hub_pattern() {
            TopologyTag::Hub
        } else if self.has_ring_pattern() {
            TopologyTag::Ring
        } else {
            TopologyTag::General
        }
    }

    pub fn real_split(&self) -> RealSplitSystem {
        RealSplitSystem::from_spec(self)
    }
}

/// The equivalent real system of dimension `2n` acting on `u = (x, y)`:
/// `D^q u = -A~ u + T~ g~(u) + I~`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSplitSystem {
    pub dim: usize,
    /// Diagonal of `A~ = diag(a, a)`.
    pub a_tilde_diag: DVector<f64>,
    /// `[[T^R, -T^I], [T^I, T^R]]`.
    pub t_tilde: DMatrix<f64>,
    pub i_tilde: DVector<f64>,
    pub activations: Vec<Activation>,
}

impl RealSplitSystem {
    fn from_spec(spec: &NetworkSpec) -> Self {
        let n = spec.n;
        let mut t_tilde = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                let t = spec.weights[j][k];
                t_tilde[(j, k)] = t.re;
                t_tilde[(j, k + n)] = -t.im;
                t_tilde[(j + n, k)] = t.im;
                t_tilde[(j + n, k + n)] = t.re;
            }
        }
        let a_tilde_diag = DVector::from_fn(2 * n, |i, _| spec.a[i % n]);
        let i_tilde = DVector::from_fn(2 * n, |i, _| {
            if i < n {
                spec.inputs[i].re
            } else {
                spec.inputs[i - n].im
            }
        });
        RealSplitSystem {
            dim: 2 * n,
            a_tilde_diag,
            t_tilde,
            i_tilde,
            activations: spec.activations.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn a_tilde(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.a_tilde_diag)
    }

    /// `g~(u) = (g^R(x, y), g^I(x, y))`.
    pub fn activation_vector(&self, u: &[f64]) -> DVector<f64> {
        let n = self.n();
        let mut out = DVector::zeros(2 * n);
        for k in 0..n {
            let g = self.activations[k].eval(Complex64::new(u[k], u[k + n]));
            out[k] = g.re;
            out[k + n] = g.im;
        }
        out
    }

    pub fn field(&self, u: &[f64]) -> DVector<f64> {
        let g = self.activation_vector(u);
        let mut f = &self.t_tilde * g + &self.i_tilde;
        for i in 0..self.dim {
            f[i] -= self.a_tilde_diag[i] * u[i];
        }
        f
    }

    /// Real Jacobian of the field, `-A~ + T~ Dg~(u)`.
    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.n();
        let mut dg = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            let j = self.activations[k].real_jacobian(Complex64::new(u[k], u[k + n]));
            dg[(k, k)] = j.d_re_dx;
            dg[(k, k + n)] = j.d_re_dy;
            dg[(k + n, k)] = j.d_im_dx;
            dg[(k + n, k + n)] = j.d_im_dy;
        }
        let mut jac = &self.t_tilde * dg;
        for i in 0..self.dim {
            jac[(i, i)] -= self.a_tilde_diag[i];
        }
        jac
    }
}

/// `(x, y)` stacking of a complex vector.
pub fn split_state(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect()
}

/// Inverse of [`split_state`].
pub fn join_state(u: &[f64]) -> Vec<Complex64> {
    let n = u.len() / 2;
    (0..n).map(|k| Complex64::new(u[k], u[k + n])).collect()
}

/// Networks used by the worked examples.
pub mod examples {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Three-neuron hub with `a = 1`, `b_2 = b_3 = 2`.
    pub fn hub3() -> NetworkSpec {
        let z = c(0.0, 0.0);
        NetworkSpec::uniform(
            vec![1.0, 2.0, 2.0],
            vec![
                vec![c(2.0, -5.0), c(-2.0, -1.0), c(2.0, 1.0)],
                vec![c(3.0, 0.0), c(1.0, 1.0), z],
                vec![c(1.0, -1.0), z, c(1.0, 1.0)],
            ],
            Activation::unit_georgiou(),
        )
    }

    /// Three-neuron ring with `T0 = 1 - 2i`, `T1 = 1 + i`, `T2 = i`.
    pub fn ring3() -> NetworkSpec {
        ring_uniform(3, 1.0, c(1.0, -2.0), c(1.0, 1.0), c(0.0, 1.0), Activation::unit_georgiou())
    }

    /// Ring of identical neurons: self weight `t0`, forward `t1`
    /// (`T_{j,j+1}`) and backward `t2` (`T_{j,j-1}`).
    pub fn ring_uniform(
        n: usize,
        a0: f64,
        t0: Complex64,
        t1: Complex64,
        t2: Complex64,
        activation: Activation,
    ) -> NetworkSpec {
        let mut w = vec![vec![c(0.0, 0.0); n]; n];
        for j in 0..n {
            w[j][j] = t0;
            w[j][(j + 1) % n] += t1;
            w[j][(j + n - 1) % n] += t2;
        }
        NetworkSpec::uniform(vec![a0; n], w, activation)
    }
}
