use num_complex::Complex64;

use crate::error::{invalid, Result};

/// EWMA estimate of the modal cross-correlation `Lambda = E{alpha alpha^H}` for one bin.
#[derive(Clone, Debug)]
pub struct CorrelationState {
    dim: usize,
    beta: f64,
    lambda: Vec<Complex64>,
}

impl CorrelationState {
    pub fn new(dim: usize, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return invalid(format!("beta must lie in [0, 1], got {beta}"));
        }
        Ok(Self { dim, beta, lambda: vec![Complex64::new(0.0, 0.0); dim * dim] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Lambda <- beta Lambda + (1 - beta) alpha alpha^H`.
    pub fn update(&mut self, alpha: &[Complex64]) -> Result<()> {
        if alpha.len() != self.dim {
            return invalid(format!("frame has {} modes, state expects {}", alpha.len(), self.dim));
        }
        let (b, g) = (self.beta, 1.0 - self.beta);
        let d = self.dim;
        for i in 0..d {
            let v = self.lambda[i * d + i].re * b + alpha[i].norm_sqr() * g;
            self.lambda[i * d + i] = Complex64::new(v, 0.0);
            for j in (i + 1)..d {
                let v = self.lambda[i * d + j] * b + alpha[i] * alpha[j].conj() * g;
                self.lambda[i * d + j] = v;
                self.lambda[j * d + i] = v.conj();
            }
        }
        Ok(())
    }

    /// Entry `(a, b)` = `E{alpha_a alpha_b^*}`.
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.lambda[a * self.dim + b]
    }

    /// Row-major flattening, matching the row order of the translation matrix.
    pub fn vectorized(&self) -> &[Complex64] {
        &self.lambda
    }

    /// Hermitian with a real, non-negative diagonal.
    pub fn is_valid(&self) -> bool {
        let d = self.dim;
        (0..d).all(|i| {
            let di = self.lambda[i * d + i];
            di.im == 0.0
                && di.re >= 0.0
                && ((i + 1)..d).all(|j| self.lambda[i * d + j] == self.lambda[j * d + i].conj())
        })
    }
}
