//! The elliptic operator ℒ = −Δ + h′(c₀(x), x), diagonalized in the
//! −Δ eigenbasis.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    BasisTag, Discretization, NonlinearitySpec, NormParams, Profile, SpectralField,
};

/// Relative size of an imaginary potential part that is tolerated (and dropped).
const IMAGINARY_POTENTIAL_TOL: f64 = 1e-12;
/// Off-diagonal quadrature noise below this (relative) level is dropped.
const DIAGONAL_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorSource {
    LOperator,
    MinusDelta,
}

/// ℒ in the Δ eigenbasis together with its spectral decomposition.
///
/// Columns of `q` are the ℒ-eigenvectors in Δ coordinates, so
/// û_Δ = Q û_L and û_L = Qᵀ û_Δ.
#[derive(Clone, Debug)]
pub struct EllipticOperator {
    disc: Arc<Discretization>,
    lambda: Vec<f64>,
    q: DMatrix<f64>,
    matrix: DMatrix<f64>,
    source: OperatorSource,
    identity_basis: bool,
}

/// Spectrum summary attached to reports.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumReport {
    pub lambda1: f64,
    pub lowest: Vec<f64>,
    pub h2_holds: bool,
}

impl EllipticOperator {
    /// −Δ itself.
    pub fn minus_delta(disc: &Arc<Discretization>) -> Self {
        let lambda = disc.basis().eigenvalues().to_vec();
        let n = lambda.len();
        EllipticOperator {
            disc: disc.clone(),
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lambda.clone())),
            lambda,
            q: DMatrix::identity(n, n),
            source: OperatorSource::MinusDelta,
            identity_basis: true,
        }
    }

    /// A diagonal operator with prescribed eigenvalues in the Δ basis.
    pub fn from_eigenvalues(disc: &Arc<Discretization>, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != disc.n_x() {
            return Err(Error::Mismatch(format!(
                "{} eigenvalues for {} spatial modes",
                lambda.len(),
                disc.n_x()
            )));
        }
        let n = lambda.len();
        Ok(EllipticOperator {
            disc: disc.clone(),
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lambda.clone())),
            lambda,
            q: DMatrix::identity(n, n),
            source: OperatorSource::LOperator,
            identity_basis: true,
        })
    }

    /// Assembles and diagonalizes ℒ without asserting positivity.
    pub fn assemble(
        c0: Option<&Profile>,
        h: &NonlinearitySpec,
        disc: &Arc<Discretization>,
    ) -> Result<Self> {
        let basis = disc.basis();
        let n = basis.n_modes();
        let c0_values = match c0 {
            Some(p) => p.point_values(),
            None => vec![Complex64::new(0.0, 0.0); basis.n_points()],
        };
        let mut potential = Vec::with_capacity(c0_values.len());
        for (v, &x) in c0_values.iter().zip(basis.points()) {
            let d = h.derivative(1, *v, x)?;
            if d.im.abs() > IMAGINARY_POTENTIAL_TOL * (1.0 + d.re.abs()) {
                return Err(Error::Config(format!(
                    "h′(c₀) has imaginary part {:e} at x = {x}; ℒ must be self-adjoint",
                    d.im
                )));
            }
            potential.push(d.re);
        }
        let mut matrix = DMatrix::<f64>::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let entry: f64 = basis
                    .mode(a)
                    .iter()
                    .zip(basis.mode(b))
                    .zip(basis.weights())
                    .zip(&potential)
                    .map(|(((p, q), w), v)| p * q * w * v)
                    .sum();
                matrix[(a, b)] = entry;
                matrix[(b, a)] = entry;
            }
            matrix[(a, a)] += basis.eigenvalues()[a];
        }
        Ok(Self::from_matrix(disc, matrix, OperatorSource::LOperator))
    }

    /// ℒ = −Δ + h′(c₀, ·); fails with an H2 error when λ₁ ≤ 0.
    #[allow(non_snake_case)]
    pub fn build_L(
        c0: Option<&Profile>,
        h: &NonlinearitySpec,
        disc: &Arc<Discretization>,
    ) -> Result<Self> {
        let op = Self::assemble(c0, h, disc)?;
        op.require_h2("ℒ = −Δ + h′(c₀)")?;
        Ok(op)
    }

    fn from_matrix(
        disc: &Arc<Discretization>,
        matrix: DMatrix<f64>,
        source: OperatorSource,
    ) -> Self {
        let n = matrix.nrows();
        let off_diag = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| matrix[(a, b)].abs())
            .fold(0.0, f64::max);
        let diag_scale = (0..n).map(|a| matrix[(a, a)].abs()).fold(1.0, f64::max);
        let diag_sorted = (1..n).all(|a| matrix[(a - 1, a - 1)] <= matrix[(a, a)]);
        if off_diag <= DIAGONAL_TOL * diag_scale && diag_sorted {
            let mut matrix = matrix;
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        matrix[(a, b)] = 0.0;
                    }
                }
            }
            let lambda = (0..n).map(|a| matrix[(a, a)]).collect();
            return EllipticOperator {
                disc: disc.clone(),
                lambda,
                q: DMatrix::identity(n, n),
                matrix,
                source,
                identity_basis: true,
            };
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let lambda = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut q = DMatrix::<f64>::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(i).into_owned();
            // fix the sign so the largest component is positive
            let (imax, _) = v.iter().enumerate().fold((0, 0.0), |acc, (j, x)| {
                if x.abs() > acc.1 {
                    (j, x.abs())
                } else {
                    acc
                }
            });
            if v[imax] < 0.0 {
                v.neg_mut();
            }
            q.set_column(col, &v);
        }
        EllipticOperator {
            disc: disc.clone(),
            lambda,
            q,
            matrix,
            source,
            identity_basis: false,
        }
    }

    pub fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    /// Eigenvalues λ_n, nondecreasing.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda[0]
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// The operator as a matrix in the Δ basis.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn source(&self) -> OperatorSource {
        self.source
    }

    /// True when the ℒ and Δ eigenbases coincide.
    pub fn is_delta_diagonal(&self) -> bool {
        self.identity_basis
    }

    /// Eigenvalues λ_n^Δ of −Δ on the same truncation.
    pub fn delta_eigenvalues(&self) -> &[f64] {
        self.disc.basis().eigenvalues()
    }

    pub fn require_h2(&self, context: &str) -> Result<()> {
        let l1 = self.lambda1();
        if !(l1 > 0.0) {
            return Err(Error::H2Violation {
                lambda1: l1,
                context: context.to_string(),
            });
        }
        Ok(())
    }

    pub fn spectrum_report(&self, count: usize) -> SpectrumReport {
        SpectrumReport {
            lambda1: self.lambda1(),
            lowest: self.lambda.iter().take(count).copied().collect(),
            h2_holds: self.lambda1() > 0.0,
        }
    }

    fn transform(&self, u: &SpectralField, transpose: bool, tag: BasisTag) -> SpectralField {
        if self.identity_basis {
            return u.clone().with_basis_tag(tag);
        }
        let nx = self.disc.n_x();
        let mut out = u.clone().with_basis_tag(tag);
        let mut buf = vec![Complex64::new(0.0, 0.0); nx];
        for idx in 0..self.disc.n_modes_theta() {
            let row = u.row(idx);
            if row.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                continue;
            }
            for (a, slot) in buf.iter_mut().enumerate() {
                *slot = (0..nx)
                    .map(|b| {
                        let m = if transpose {
                            self.q[(b, a)]
                        } else {
                            self.q[(a, b)]
                        };
                        row[b] * m
                    })
                    .sum();
            }
            out.row_mut(idx).copy_from_slice(&buf);
        }
        out
    }

    /// Re-expresses a field in the ℒ eigenbasis.
    pub fn to_l_basis(&self, u: &SpectralField) -> SpectralField {
        match u.basis_tag() {
            BasisTag::LBasis => u.clone(),
            BasisTag::DeltaBasis => self.transform(u, true, BasisTag::LBasis),
        }
    }

    /// Re-expresses a field in the Δ eigenbasis.
    pub fn to_delta_basis(&self, u: &SpectralField) -> SpectralField {
        match u.basis_tag() {
            BasisTag::DeltaBasis => u.clone(),
            BasisTag::LBasis => self.transform(u, false, BasisTag::DeltaBasis),
        }
    }

    /// Profile coefficients converted from the Δ basis to the ℒ basis.
    pub fn profile_to_l(&self, p: &[Complex64]) -> Vec<Complex64> {
        let nx = p.len();
        (0..nx)
            .map(|a| (0..nx).map(|b| p[b] * self.q[(b, a)]).sum())
            .collect()
    }

    /// Profile coefficients converted from the ℒ basis to the Δ basis.
    pub fn profile_to_delta(&self, p: &[Complex64]) -> Vec<Complex64> {
        let nx = p.len();
        (0..nx)
            .map(|a| (0..nx).map(|b| p[b] * self.q[(a, b)]).sum())
            .collect()
    }

    /// ℒ applied to a θ-independent profile (Δ basis in and out).
    pub fn apply_profile(&self, p: &Profile) -> Profile {
        let nx = p.coeffs().len();
        let coeffs = (0..nx)
            .map(|a| (0..nx).map(|b| p.coeffs()[b] * self.matrix[(a, b)]).sum())
            .collect();
        Profile::from_coeffs(p.disc(), coeffs).expect("same truncation")
    }

    /// ℒu for a field in the Δ basis (matrix action on every Fourier row).
    pub fn apply_delta(&self, u: &SpectralField) -> SpectralField {
        let ud = self.to_delta_basis(u);
        let nx = self.disc.n_x();
        let mut out = ud.clone();
        for idx in 0..self.disc.n_modes_theta() {
            let row = ud.row(idx);
            if row.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                continue;
            }
            for a in 0..nx {
                out.row_mut(idx)[a] = (0..nx).map(|b| row[b] * self.matrix[(a, b)]).sum();
            }
        }
        out
    }

    /// Solves ℒ p = r for a θ-independent profile (Δ basis in and out).
    pub fn solve_profile(&self, r: &Profile) -> Result<Profile> {
        self.require_h2("average solve ℒ⟨U⟩ = r")?;
        let rl = self.profile_to_l(r.coeffs());
        let sol: Vec<Complex64> = rl.iter().zip(&self.lambda).map(|(c, l)| c / *l).collect();
        Profile::from_coeffs(r.disc(), self.profile_to_delta(&sol))
    }

    /// ‖u‖_{ρ,j,m} measured with the ℒ spectrum.
    pub fn norm(&self, u: &SpectralField, params: &NormParams) -> Result<f64> {
        crate::spectral::norm(&self.to_l_basis(u), params, &self.lambda)
    }

    /// Largest deviation of QᵀQ from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.q.nrows();
        let g = self.q.transpose() * &self.q;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let e = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g[(a, b)] - e).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{BoundaryCondition, Truncation};
    use std::f64::consts::PI;

    fn disc(nx: usize) -> Arc<Discretization> {
        Discretization::new(
            1,
            Truncation::new(2, nx, BoundaryCondition::Dirichlet).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn shifted_sine_spectrum() {
        let d = disc(6);
        let h = NonlinearitySpec::polynomial(&[0.0, 1.0, 0.0, 0.1]);
        let op = EllipticOperator::build_L(None, &h, &d).unwrap();
        assert!(op.is_delta_diagonal());
        for (i, l) in op.lambda().iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((l - (PI * PI * n * n + 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_potential_violates_h2() {
        let d = disc(4);
        let h = NonlinearitySpec::polynomial(&[0.0, -20.0]);
        let err = EllipticOperator::build_L(None, &h, &d).unwrap_err();
        assert!(matches!(err, Error::H2Violation { .. }));
        assert!(EllipticOperator::assemble(None, &h, &d).is_ok());
    }

    #[test]
    fn basis_round_trip_with_nonconstant_potential() {
        let d = disc(6);
        let h = NonlinearitySpec::polynomial(&[0.0, 0.0, 0.0, 1.0]);
        let c0 = Profile::project(&d, |x| Complex64::new((PI * x).sin(), 0.0));
        let op = EllipticOperator::build_L(Some(&c0), &h, &d).unwrap();
        assert!(!op.is_delta_diagonal());
        assert!(op.orthogonality_defect() < 1e-12);
        let u = SpectralField::single_mode(&d, &[1], 2, Complex64::new(0.3, -0.7)).unwrap();
        let back = op.to_delta_basis(&op.to_l_basis(&u));
        assert!(back.max_diff(&u) < 1e-14);
    }
}
