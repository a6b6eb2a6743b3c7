use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::Direction;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; count];
    let mut w = vec![0.0; count];
    let n = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 2..=count {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[count - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[count - 1 - i] = wi;
    }
    (x, w)
}

/// Weighted point set on the unit sphere.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    pub points: Vec<Direction>,
    pub weights: Vec<f64>,
}

impl SphereQuadrature {
    /// Gauss-Legendre in `cos theta` times uniform azimuth; exact for harmonics of total degree `degree`.
    pub fn gauss_product(degree: usize) -> Self {
        let nt = (degree + 2) / 2;
        let np = degree + 1;
        let (x, w) = gauss_legendre(nt.max(1));
        let mut points = Vec::with_capacity(x.len() * np);
        let mut weights = Vec::with_capacity(x.len() * np);
        for (xi, wi) in x.iter().zip(&w) {
            for j in 0..np {
                let phi = 2.0 * PI * j as f64 / np as f64;
                points.push(Direction { theta: xi.clamp(-1.0, 1.0).acos(), phi });
                weights.push(wi * 2.0 * PI / np as f64);
            }
        }
        Self { points, weights }
    }

    /// Spherical Fibonacci lattice with equal weights.
    pub fn fibonacci(count: usize) -> Self {
        let golden = PI * (3.0 - 5f64.sqrt());
        let points = (0..count)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let phi = (golden * i as f64).rem_euclid(2.0 * PI);
                Direction { theta: z.clamp(-1.0, 1.0).acos(), phi }
            })
            .collect();
        Self { points, weights: vec![4.0 * PI / count as f64; count] }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Apply a rotation matrix to every point.
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> Self {
        let points = self
            .points
            .iter()
            .map(|d| {
                let v = d.unit_vector();
                let w = [
                    r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
                    r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
                    r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
                ];
                Direction::from_vector(w)
            })
            .collect();
        Self { points, weights: self.weights.clone() }
    }
}

/// Uniformly distributed rotation matrix (from a random unit quaternion).
pub fn random_rotation<R: Rng>(rng: &mut R) -> [[f64; 3]; 3] {
    let mut q = [0.0f64; 4];
    for v in q.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|v| v / norm);
    [
        [a * a + b * b - c * c - d * d, 2.0 * (b * c - a * d), 2.0 * (b * d + a * c)],
        [2.0 * (b * c + a * d), a * a - b * b + c * c - d * d, 2.0 * (c * d - a * b)],
        [2.0 * (b * d - a * c), 2.0 * (c * d + a * b), a * a - b * b - c * c + d * d],
    ]
}
