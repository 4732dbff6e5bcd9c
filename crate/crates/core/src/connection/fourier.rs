use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Connection;
use crate::error::{Error, Result};
use crate::geometry::ControlPoint;
use crate::linalg::{random_hermitian, CMatrix};

/// Hermitian-matrix-valued trigonometric series
/// `Σ_k [C_k cos(k·λ) + S_k sin(k·λ)]` over integer wave vectors with
/// components in `[−K, K]`, one representative per `±k` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    wave_vectors: Vec<Vec<f64>>,
    cos: Vec<CMatrix>,
    sin: Vec<CMatrix>,
}

fn half_space_wave_vectors(dim: usize, cutoff: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let width = (2 * cutoff + 1) as usize;
    let total = width.pow(dim as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut k = vec![0i64; dim];
        for slot in k.iter_mut().rev() {
            *slot = (rem % width) as i64 - cutoff;
            rem /= width;
        }
        match k.iter().find(|&&x| x != 0) {
            None => out.push(k),
            Some(&first) if first > 0 => out.push(k),
            _ => {}
        }
    }
    out
}

impl FourierSeries {
    pub fn random(
        control_dim: usize,
        code_dim: usize,
        cutoff: usize,
        amplitude: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let vectors = half_space_wave_vectors(control_dim, cutoff as i64);
        let scale = amplitude / (vectors.len() as f64).sqrt();
        let mut cos = Vec::with_capacity(vectors.len());
        let mut sin = Vec::with_capacity(vectors.len());
        for k in &vectors {
            cos.push(random_hermitian(code_dim, scale, rng));
            if k.iter().all(|&x| x == 0) {
                sin.push(CMatrix::zeros(code_dim, code_dim));
            } else {
                sin.push(random_hermitian(code_dim, scale, rng));
            }
        }
        Self {
            wave_vectors: vectors
                .into_iter()
                .map(|k| k.into_iter().map(|x| x as f64).collect())
                .collect(),
            cos,
            sin,
        }
    }

    pub fn code_dim(&self) -> usize {
        self.cos[0].nrows()
    }

    /// `(sin k·x, cos k·x)` for every wave vector.
    fn phases(&self, x: &[f64]) -> Vec<(f64, f64)> {
        self.wave_vectors
            .iter()
            .map(|k| k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().sin_cos())
            .collect()
    }

    fn accumulate(&self, phases: &[(f64, f64)], weight: f64, acc: &mut CMatrix) {
        for ((&(sp, cp), c), s) in phases.iter().zip(&self.cos).zip(&self.sin) {
            let (wc, ws) = (weight * cp, weight * sp);
            for (a, (x, y)) in acc.iter_mut().zip(c.iter().zip(s.iter())) {
                *a += x * wc + y * ws;
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> CMatrix {
        let n = self.code_dim();
        let mut acc = CMatrix::zeros(n, n);
        self.accumulate(&self.phases(x), 1.0, &mut acc);
        acc
    }

    pub fn derivative(&self, x: &[f64], axis: usize) -> CMatrix {
        let n = self.code_dim();
        let mut acc = CMatrix::zeros(n, n);
        for ((k, c), s) in self.wave_vectors.iter().zip(&self.cos).zip(&self.sin) {
            if k[axis] == 0.0 {
                continue;
            }
            let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            let (sp, cp) = phase.sin_cos();
            let (wc, ws) = (k[axis] * cp, k[axis] * sp);
            for (a, (x, y)) in acc.iter_mut().zip(s.iter().zip(c.iter())) {
                *a += x * wc - y * ws;
            }
        }
        acc
    }

    /// The series and its derivative along `direction` at `x`.
    pub fn value_and_directional(&self, x: &[f64], direction: &[f64]) -> (CMatrix, CMatrix) {
        let n = self.code_dim();
        let mut value = CMatrix::zeros(n, n);
        let mut slope = CMatrix::zeros(n, n);
        for ((k, c), s) in self.wave_vectors.iter().zip(&self.cos).zip(&self.sin) {
            let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            let rate: f64 = k.iter().zip(direction).map(|(a, b)| a * b).sum();
            let (sp, cp) = phase.sin_cos();
            let (vc, vs) = (rate * cp, rate * sp);
            for ((v, d), (x, y)) in value.iter_mut().zip(slope.iter_mut()).zip(c.iter().zip(s.iter())) {
                *v += x * cp + y * sp;
                *d += y * vc - x * vs;
            }
        }
        (value, slope)
    }
}

/// Smooth, `2π`-periodic random connection with one [`FourierSeries`] per
/// component, seeded deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierConnection {
    series: Vec<FourierSeries>,
    seed: u64,
}

impl FourierConnection {
    pub fn new(
        control_dim: usize,
        code_dim: usize,
        cutoff: usize,
        amplitude: f64,
        seed: u64,
    ) -> Result<Self> {
        if control_dim == 0 || code_dim == 0 {
            return Err(Error::InvalidInput("Fourier connection needs positive dimensions".into()));
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidInput("Fourier amplitude must be finite".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let series = (0..control_dim)
            .map(|_| FourierSeries::random(control_dim, code_dim, cutoff, amplitude, &mut rng))
            .collect();
        Ok(Self { series, seed })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Connection for FourierConnection {
    fn control_dim(&self) -> usize {
        self.series.len()
    }

    fn code_dim(&self) -> usize {
        self.series[0].code_dim()
    }

    fn components(&self, point: &ControlPoint) -> Result<Vec<CMatrix>> {
        let phases = self.series[0].phases(point.coords());
        let n = self.code_dim();
        Ok(self
            .series
            .iter()
            .map(|s| {
                let mut acc = CMatrix::zeros(n, n);
                s.accumulate(&phases, 1.0, &mut acc);
                acc
            })
            .collect())
    }

    fn contract(&self, point: &ControlPoint, delta: &[f64]) -> Result<CMatrix> {
        point.ensure_dim(self.control_dim(), "Fourier connection point")?;
        let phases = self.series[0].phases(point.coords());
        let n = self.code_dim();
        let mut acc = CMatrix::zeros(n, n);
        for (s, d) in self.series.iter().zip(delta) {
            s.accumulate(&phases, *d, &mut acc);
        }
        Ok(acc)
    }

    fn derivatives(&self, point: &ControlPoint, axis: usize) -> Option<Result<Vec<CMatrix>>> {
        Some(Ok(self
            .series
            .iter()
            .map(|s| s.derivative(point.coords(), axis))
            .collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wave_vectors_cover_half_space() {
        let v = half_space_wave_vectors(2, 1);
        assert_eq!(v.len(), 5);
        assert!(v.contains(&vec![0, 0]));
        assert!(v.contains(&vec![0, 1]));
        assert!(!v.contains(&vec![0, -1]));
        assert!(v.contains(&vec![1, -1]));
    }

    #[test]
    fn periodic_in_every_axis() {
        let f = FourierConnection::new(2, 2, 2, 1.0, 7).unwrap();
        let p = ControlPoint::new(vec![0.37, -1.1]).unwrap();
        let q = ControlPoint::new(vec![0.37 + 2.0 * PI, -1.1 - 4.0 * PI]).unwrap();
        let a = f.components(&p).unwrap();
        let b = f.components(&q).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(crate::linalg::frobenius_distance(x, y).unwrap() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_field() {
        let p = ControlPoint::new(vec![0.1, 0.2]).unwrap();
        let a = FourierConnection::new(2, 2, 1, 1.0, 7).unwrap().components(&p).unwrap();
        let b = FourierConnection::new(2, 2, 1, 1.0, 7).unwrap().components(&p).unwrap();
        let c = FourierConnection::new(2, 2, 1, 1.0, 8).unwrap().components(&p).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn directional_derivative_matches_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FourierSeries::random(3, 2, 2, 1.0, &mut rng);
        let x = [0.2, -0.7, 1.3];
        let d = [0.5, -1.5, 2.0];
        let (v, slope) = f.value_and_directional(&x, &d);
        let mut expected = CMatrix::zeros(2, 2);
        for (axis, w) in d.iter().enumerate() {
            expected += f.derivative(&x, axis).scale(*w);
        }
        assert!(crate::linalg::frobenius_distance(&v, &f.eval(&x)).unwrap() < 1e-14);
        assert!(crate::linalg::frobenius_distance(&slope, &expected).unwrap() < 1e-13);
    }
}
