use super::Connection;
use crate::error::{Error, Result};
use crate::geometry::ControlPoint;
use crate::linalg::{c, exp_i, polar_unitary, CMatrix, Hermitian, Unitary, I};

/// Eigenvalues closer than this to the level belong to the code space.
const LEVEL_TOLERANCE: f64 = 1e-12;
/// Largest spread tolerated inside the degenerate cluster.
const CLUSTER_WIDTH_TOLERANCE: f64 = 1e-9;
/// Smallest singular value of the overlap with the reference frame.
const ALIGNMENT_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_FRAME_STEP: f64 = 1e-4;

/// Gell-Mann matrix `λ_k`, `k = 1..=8`.
pub fn gell_mann(k: usize) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(3, 3);
    let one = c(1.0, 0.0);
    match k {
        1 => {
            m[(0, 1)] = one;
            m[(1, 0)] = one;
        }
        2 => {
            m[(0, 1)] = -I;
            m[(1, 0)] = I;
        }
        3 => {
            m[(0, 0)] = one;
            m[(1, 1)] = -one;
        }
        4 => {
            m[(0, 2)] = one;
            m[(2, 0)] = one;
        }
        5 => {
            m[(0, 2)] = -I;
            m[(2, 0)] = I;
        }
        6 => {
            m[(1, 2)] = one;
            m[(2, 1)] = one;
        }
        7 => {
            m[(1, 2)] = -I;
            m[(2, 1)] = I;
        }
        8 => {
            let s = 1.0 / 3f64.sqrt();
            m[(0, 0)] = c(s, 0.0);
            m[(1, 1)] = c(s, 0.0);
            m[(2, 2)] = c(-2.0 * s, 0.0);
        }
        _ => return Err(Error::InvalidInput(format!("no Gell-Mann matrix with index {k}"))),
    }
    Ok(m)
}

/// Spectral diagnostics of `H(λ)` around the code level.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub point: ControlPoint,
    /// Spread of the `N` eigenvalues assigned to the code space.
    pub cluster_width: f64,
    /// Distance from the cluster to the nearest other eigenvalue.
    pub gap: f64,
    pub required_gap: f64,
    pub passes: bool,
}

/// Isospectral family `H(λ) = U(λ) H₀ U(λ)†` with
/// `U(λ) = exp(iλ₁G₁) exp(iλ₂G₂) ⋯ exp(iλ_D G_D)`.
///
/// `H₀` is diagonal; the code space is the eigenspace of `H₀` at `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianFamily {
    h0: Vec<f64>,
    level: f64,
    generators: Vec<CMatrix>,
    code_indices: Vec<usize>,
    reference: CMatrix,
    gap: f64,
    frame_rotation: Option<CMatrix>,
}

impl HamiltonianFamily {
    pub fn new(h0: Vec<f64>, level: f64, generators: Vec<CMatrix>) -> Result<Self> {
        let m = h0.len();
        if m == 0 || h0.iter().any(|x| !x.is_finite()) || !level.is_finite() {
            return Err(Error::InvalidInput("H0 must be a non-empty finite diagonal".into()));
        }
        if generators.is_empty() {
            return Err(Error::InvalidInput("Hamiltonian family needs at least one generator".into()));
        }
        for g in &generators {
            if g.nrows() != m || g.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: g.nrows(),
                    context: "generator size",
                });
            }
            Hermitian::new(g.clone())?;
        }
        let code_indices: Vec<usize> = (0..m)
            .filter(|&k| (h0[k] - level).abs() <= LEVEL_TOLERANCE)
            .collect();
        if code_indices.is_empty() {
            return Err(Error::InvalidInput(format!("no eigenvalue of H0 at level {level}")));
        }
        let gap = h0
            .iter()
            .filter(|x| (*x - level).abs() > LEVEL_TOLERANCE)
            .map(|x| (x - level).abs())
            .fold(f64::INFINITY, f64::min);
        let mut reference = CMatrix::zeros(m, code_indices.len());
        for (col, &k) in code_indices.iter().enumerate() {
            reference[(k, col)] = c(1.0, 0.0);
        }
        Ok(Self {
            h0,
            level,
            generators,
            code_indices,
            reference,
            gap,
            frame_rotation: None,
        })
    }

    /// `H₀ = diag(0, 0, 1)`, `G₁ = λ₄`, `G₂ = λ₆`, code level 0.
    pub fn su3_example() -> Self {
        Self::new(
            vec![0.0, 0.0, 1.0],
            0.0,
            vec![gell_mann(4).unwrap(), gell_mann(6).unwrap()],
        )
        .expect("valid family")
    }

    /// Rotates the aligned code frame by a constant unitary `W`, which turns
    /// every `A_μ` into `W†A_μW`.
    pub fn with_frame_rotation(mut self, w: CMatrix) -> Result<Self> {
        let n = self.code_dim();
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: w.nrows(),
                context: "frame rotation size",
            });
        }
        Unitary::new(w.clone(), 1e-10)?;
        self.frame_rotation = Some(w);
        Ok(self)
    }

    pub fn control_dim(&self) -> usize {
        self.generators.len()
    }

    pub fn code_dim(&self) -> usize {
        self.code_indices.len()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.h0.len()
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// Distance from the code level to the rest of the spectrum of `H₀`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn h0(&self) -> &[f64] {
        &self.h0
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn unitary(&self, point: &ControlPoint) -> Result<CMatrix> {
        point.ensure_dim(self.control_dim(), "Hamiltonian family point")?;
        let m = self.hilbert_dim();
        let mut u = CMatrix::identity(m, m);
        for (g, x) in self.generators.iter().zip(point.coords()) {
            u *= exp_i(&g.scale(*x));
        }
        Ok(u)
    }

    pub fn hamiltonian(&self, point: &ControlPoint) -> Result<Hermitian> {
        let u = self.unitary(point)?;
        let h0 = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.h0.len(),
            self.h0.iter().map(|x| c(*x, 0.0)),
        ));
        Ok(Hermitian::symmetrized(&(&u * h0 * u.adjoint())))
    }

    /// Largest deviation between the sorted spectra of `H(λ)` and `H₀`.
    pub fn isospectrality_defect(&self, point: &ControlPoint) -> Result<f64> {
        let spectrum = self.hamiltonian(point)?.eigenvalues();
        let mut reference = self.h0.clone();
        reference.sort_by(f64::total_cmp);
        Ok(spectrum
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn eigen_split(&self, point: &ControlPoint) -> Result<(CMatrix, GapReport)> {
        let h = self.hamiltonian(point)?.into_inner();
        let eig = h.symmetric_eigen();
        let n = self.code_dim();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| {
            (eig.eigenvalues[a] - self.level)
                .abs()
                .total_cmp(&(eig.eigenvalues[b] - self.level).abs())
        });
        let cluster: Vec<f64> = order[..n].iter().map(|&k| eig.eigenvalues[k]).collect();
        let lo = cluster.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cluster.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let centre = cluster.iter().sum::<f64>() / n as f64;
        let gap = order[n..]
            .iter()
            .map(|&k| (eig.eigenvalues[k] - centre).abs())
            .fold(f64::INFINITY, f64::min);
        let required_gap = self.gap / 2.0;
        let report = GapReport {
            point: point.clone(),
            cluster_width: hi - lo,
            gap,
            required_gap,
            passes: hi - lo <= CLUSTER_WIDTH_TOLERANCE && gap >= required_gap,
        };
        let mut frame = CMatrix::zeros(self.hilbert_dim(), n);
        for (col, &k) in order[..n].iter().enumerate() {
            frame.set_column(col, &eig.eigenvectors.column(k));
        }
        Ok((frame, report))
    }

    pub fn degeneracy_check(&self, point: &ControlPoint) -> Result<GapReport> {
        Ok(self.eigen_split(point)?.1)
    }

    /// Orthonormal frame of the code eigenspace of `H(λ)`, aligned to the
    /// code frame of `H₀` by the polar factor of their overlap.
    pub fn frame(&self, point: &ControlPoint) -> Result<CMatrix> {
        let (phi, report) = self.eigen_split(point)?;
        if !report.passes {
            return Err(Error::DegeneracyLost {
                point: point.coords().to_vec(),
                width: report.cluster_width,
                gap: report.gap,
                required: report.required_gap,
            });
        }
        let overlap = phi.adjoint() * &self.reference;
        let (w, smallest) = polar_unitary(&overlap);
        if smallest < ALIGNMENT_TOLERANCE {
            return Err(Error::GaugeAlignment(smallest));
        }
        let psi = phi * w;
        Ok(match &self.frame_rotation {
            Some(r) => psi * r,
            None => psi,
        })
    }
}

/// `A_μ = −iΨ(λ)†∂_μΨ(λ)` by central differences of the aligned frame with
/// step `h`, symmetrized to be exactly Hermitian.
pub fn adiabatic_connection_at(
    family: &HamiltonianFamily,
    point: &ControlPoint,
    h: f64,
) -> Result<Vec<Hermitian>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("frame step must be positive, got {h}")));
    }
    let psi = family.frame(point)?;
    let psi_adj = psi.adjoint();
    (0..family.control_dim())
        .map(|mu| {
            let plus = family.frame(&point.shifted(mu, h))?;
            let minus = family.frame(&point.shifted(mu, -h))?;
            let d = (plus - minus).unscale(2.0 * h);
            let a = &psi_adj * d * (-I);
            Ok(Hermitian::symmetrized(&a))
        })
        .collect()
}

/// The connection induced on the code eigenspace of a [`HamiltonianFamily`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticConnection {
    family: HamiltonianFamily,
    step: f64,
}

impl AdiabaticConnection {
    pub fn new(family: HamiltonianFamily) -> Self {
        Self::with_step(family, DEFAULT_FRAME_STEP)
    }

    pub fn with_step(family: HamiltonianFamily, step: f64) -> Self {
        Self { family, step }
    }

    pub fn family(&self) -> &HamiltonianFamily {
        &self.family
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl Connection for AdiabaticConnection {
    fn control_dim(&self) -> usize {
        self.family.control_dim()
    }

    fn code_dim(&self) -> usize {
        self.family.code_dim()
    }

    fn components(&self, point: &ControlPoint) -> Result<Vec<CMatrix>> {
        Ok(adiabatic_connection_at(&self.family, point, self.step)?
            .into_iter()
            .map(Hermitian::into_inner)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_norm;

    #[test]
    fn trivial_family_has_zero_connection() {
        let fam = HamiltonianFamily::new(
            vec![0.0, 0.0, 1.0],
            0.0,
            vec![CMatrix::zeros(3, 3), CMatrix::zeros(3, 3)],
        )
        .unwrap();
        let p = ControlPoint::new(vec![0.3, 0.4]).unwrap();
        for a in adiabatic_connection_at(&fam, &p, 1e-4).unwrap() {
            assert_eq!(frobenius_norm(a.matrix()), 0.0);
        }
    }

    #[test]
    fn su3_family_is_isospectral() {
        let fam = HamiltonianFamily::su3_example();
        let p = ControlPoint::new(vec![0.7, -1.3]).unwrap();
        assert!(fam.isospectrality_defect(&p).unwrap() < 1e-12);
        let r = fam.degeneracy_check(&p).unwrap();
        assert!(r.passes);
        assert!((r.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_spans_code_space_and_is_aligned() {
        let fam = HamiltonianFamily::su3_example();
        let p = ControlPoint::new(vec![0.2, 0.5]).unwrap();
        let psi = fam.frame(&p).unwrap();
        let h = fam.hamiltonian(&p).unwrap();
        assert!(frobenius_norm(&(h.matrix() * &psi)) < 1e-12);
        assert!(frobenius_norm(&(psi.adjoint() * &psi - CMatrix::identity(2, 2))) < 1e-12);
        // aligned: overlap with the reference frame is positive definite Hermitian
        let o = psi.adjoint() * &fam.reference;
        assert!(frobenius_norm(&(&o - o.adjoint())) < 1e-12);
    }

    #[test]
    fn no_eigenvalue_at_level() {
        assert!(HamiltonianFamily::new(vec![1.0, 2.0], 0.0, vec![gell_mann(1).unwrap()]).is_err());
        assert!(gell_mann(9).is_err());
    }

    #[test]
    fn gell_mann_are_hermitian_and_traceless() {
        for k in 1..=8 {
            let g = gell_mann(k).unwrap();
            assert!(Hermitian::new(g.clone()).is_ok());
            assert!(g.trace().norm() < 1e-15);
            let n = (&g * &g).trace().re;
            assert!((n - 2.0).abs() < 1e-14);
        }
    }
}
