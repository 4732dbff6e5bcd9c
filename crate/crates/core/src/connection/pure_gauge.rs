use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Connection, FourierSeries};
use crate::error::{Error, Result};
use crate::geometry::{parallelogram_loop, ControlPoint};
use crate::holonomy::{holonomy, IntegratorConfig};
use crate::linalg::{exp_i, frobenius_distance, CMatrix, I};
use num_complex::Complex64;

const SELF_TEST_TOLERANCE: f64 = 1e-8;

/// Flat connection `A_μ = s·i(∂_μV)V†` with `V(λ) = exp(iK(λ))` and `K` a
/// random Hermitian Fourier series.
///
/// The sign `s` is fixed at construction by requiring the holonomy of a
/// small test square to be the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PureGaugeConnection {
    generator: FourierSeries,
    control_dim: usize,
    sign: f64,
}

impl PureGaugeConnection {
    pub fn new(
        control_dim: usize,
        code_dim: usize,
        cutoff: usize,
        amplitude: f64,
        seed: u64,
    ) -> Result<Self> {
        if control_dim == 0 || code_dim == 0 {
            return Err(Error::InvalidInput("pure-gauge connection needs positive dimensions".into()));
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidInput("pure-gauge amplitude must be finite".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let generator = FourierSeries::random(control_dim, code_dim, cutoff, amplitude, &mut rng);
        let candidate = |sign| Self {
            generator: generator.clone(),
            control_dim,
            sign,
        };
        if control_dim < 2 {
            return Ok(candidate(-1.0));
        }
        let mut residuals = Vec::new();
        for sign in [-1.0, 1.0] {
            let c = candidate(sign);
            let r = c.self_test_residual()?;
            if r <= SELF_TEST_TOLERANCE {
                return Ok(c);
            }
            residuals.push(r);
        }
        Err(Error::SelfCheck(format!(
            "pure-gauge holonomy is not the identity for either sign (residuals {:.3e}, {:.3e})",
            residuals[0], residuals[1]
        )))
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// `V(λ) = exp(iK(λ))`.
    pub fn gauge(&self, point: &ControlPoint) -> CMatrix {
        exp_i(&self.generator.eval(point.coords()))
    }

    fn self_test_residual(&self) -> Result<f64> {
        let mut anchor = vec![0.0; self.control_dim];
        anchor[0] = 0.1;
        anchor[1] = -0.2;
        let mut a = vec![0.0; self.control_dim];
        let mut b = vec![0.0; self.control_dim];
        a[0] = 0.4;
        b[1] = 0.4;
        let l = parallelogram_loop(&ControlPoint::new(anchor)?, &a, &b)?;
        let g = holonomy(self, &l, &IntegratorConfig::default())?;
        let n = self.code_dim();
        frobenius_distance(g.matrix(), &CMatrix::identity(n, n))
    }
}

impl Connection for PureGaugeConnection {
    fn control_dim(&self) -> usize {
        self.control_dim
    }

    fn code_dim(&self) -> usize {
        self.generator.code_dim()
    }

    fn components(&self, point: &ControlPoint) -> Result<Vec<CMatrix>> {
        let spectral = Spectral::new(&self.generator.eval(point.coords()));
        Ok((0..self.control_dim)
            .map(|mu| {
                let dk = self.generator.derivative(point.coords(), mu);
                spectral.log_derivative(&dk, self.sign)
            })
            .collect())
    }

    fn contract(&self, point: &ControlPoint, delta: &[f64]) -> Result<CMatrix> {
        point.ensure_dim(self.control_dim, "pure-gauge connection point")?;
        let (k, dk) = self.generator.value_and_directional(point.coords(), delta);
        Ok(Spectral::new(&k).log_derivative(&dk, self.sign))
    }
}

/// Eigendecomposition `K = U diag(k) U†` used to differentiate `exp(iK)`.
struct Spectral {
    u: CMatrix,
    k: Vec<f64>,
}

impl Spectral {
    fn new(k: &CMatrix) -> Self {
        let eig = crate::linalg::hermitian_part(k).symmetric_eigen();
        Self {
            u: eig.eigenvectors,
            k: eig.eigenvalues.iter().copied().collect(),
        }
    }

    /// `s·i(DV)V†` for the directional derivative `DK`, using divided
    /// differences of `exp(i·)` in the eigenbasis.
    fn log_derivative(&self, dk: &CMatrix, sign: f64) -> CMatrix {
        let n = self.k.len();
        let rotated = self.u.adjoint() * dk * &self.u;
        let m = CMatrix::from_fn(n, n, |i, j| {
            let half = 0.5 * (self.k[i] - self.k[j]);
            let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
            // (e^{ik_i} − e^{ik_j})/(k_i − k_j) · e^{−ik_j}
            let phi = I * Complex64::from_polar(sinc, half);
            rotated[(i, j)] * phi
        });
        let a = &self.u * m * self.u.adjoint() * (I * sign);
        crate::linalg::hermitian_part(&a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_the_flat_sign() {
        let g = PureGaugeConnection::new(2, 2, 1, 0.8, 11).unwrap();
        assert_eq!(g.sign(), -1.0);
    }

    #[test]
    fn connection_matches_finite_difference_of_gauge() {
        let g = PureGaugeConnection::new(2, 2, 1, 0.8, 5).unwrap();
        let p = ControlPoint::new(vec![0.3, -0.4]).unwrap();
        let a = g.components(&p).unwrap();
        let h = 1e-5;
        let v = g.gauge(&p);
        for mu in 0..2 {
            let dv = (g.gauge(&p.shifted(mu, h)) - g.gauge(&p.shifted(mu, -h))).unscale(2.0 * h);
            let expected = dv * v.adjoint() * (-I);
            assert!(frobenius_distance(&a[mu], &expected).unwrap() < 1e-8);
        }
    }
}
