//! Pure states and density matrices.

use num_complex::Complex64;

use crate::linalg::hermitian_eigenvalues;
use crate::matrix::ComplexMatrix;
use crate::{dim_mismatch, Error, Result};

/// Tolerance on the norm of a pure state's amplitude vector.
pub const PURE_NORM_TOL: f64 = 1e-12;
/// Entrywise tolerance on the Hermiticity of a density matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Tolerance on `Tr rho = 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor for positivity: RK4 trajectories transiently dip below
/// zero at machine scale, so exact PSD is not required.
pub const EIGENVALUE_FLOOR: f64 = -1e-8;

/// Normalized pure state `|psi>`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Accepts an amplitude vector already normalized within 1e-12.
    pub fn try_new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("state dimension must be positive".into()));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitude".into()));
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {norm} deviates from 1 by more than {PURE_NORM_TOL}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales an arbitrary nonzero amplitude vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("state dimension must be positive".into()));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitude".into()));
        }
        let norm = vec_norm(&amplitudes);
        if norm < 1e-12 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    /// Computational basis state `|k>` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::try_new(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Outer product `|psi><psi|`. Positive semidefinite by construction, so
    /// no eigenvalue check is run.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Density matrix: Hermitian, unit trace, positive semidefinite up to
/// numerical slack.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace, and positivity of a raw matrix.
    ///
    /// Positivity uses a Gershgorin fast path; only when that bound is
    /// inconclusive is the full Hermitian eigenvalue problem solved.
    pub fn try_new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(dim_mismatch(
                "density matrix",
                format!("{}x{}", matrix.rows(), matrix.cols()),
                "square",
            ));
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite("density matrix entry".into()));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix deviates from Hermitian by {defect:.3e}"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix trace {trace} deviates from 1"
            )));
        }
        if gershgorin_lower_bound(&matrix) < EIGENVALUE_FLOOR {
            let min_eig = hermitian_eigenvalues(&matrix)[0];
            if min_eig < EIGENVALUE_FLOOR {
                return Err(Error::InvalidState(format!(
                    "density matrix minimum eigenvalue {min_eig:.3e} below floor {EIGENVALUE_FLOOR:.1e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `Tr(self · other)` clamped to `[0, 1]`; this is `cos Theta` between
    /// the two states. Integration noise can push the raw trace marginally
    /// outside the interval, which the clamp absorbs.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(dim_mismatch("state overlap", other.dim(), self.dim()));
        }
        let t = self.matrix.trace_product(&other.matrix);
        if t.im.abs() > 1e-10 {
            return Err(Error::NumericalFailure(format!(
                "overlap trace has imaginary part {:.3e}",
                t.im
            )));
        }
        Ok(t.re.clamp(0.0, 1.0))
    }
}

fn gershgorin_lower_bound(m: &ComplexMatrix) -> f64 {
    let d = m.rows();
    let mut bound = f64::INFINITY;
    for i in 0..d {
        let mut radius = 0.0;
        for j in 0..d {
            if j != i {
                radius += m[(i, j)].norm();
            }
        }
        bound = bound.min(m[(i, i)].re - radius);
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pure_state_norm_gate() {
        assert!(PureState::try_new(vec![c(1.0, 0.0), c(0.0, 0.0)]).is_ok());
        assert!(PureState::try_new(vec![c(1.0, 0.0), c(0.1, 0.0)]).is_err());
        let s = PureState::normalized(vec![c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-15);
    }

    #[test]
    fn density_from_pure_is_projector() {
        let plus = PureState::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2]).unwrap();
        let rho = plus.density();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-15);
        assert!((rho.matrix()[(0, 1)].re - 0.5).abs() < 1e-15);
        assert!((rho.overlap(&rho).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn try_new_rejects_bad_matrices() {
        // Not unit trace.
        let m = ComplexMatrix::from_real(2, 2, &[0.7, 0.0, 0.0, 0.7]).unwrap();
        assert!(DensityMatrix::try_new(m).is_err());
        // Not Hermitian.
        let m = ComplexMatrix::new(2, 2, vec![c(0.5, 0.0), c(0.1, 0.0), c(0.3, 0.0), c(0.5, 0.0)])
            .unwrap();
        assert!(DensityMatrix::try_new(m).is_err());
        // Hermitian, unit trace, but indefinite.
        let m = ComplexMatrix::from_real(2, 2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(DensityMatrix::try_new(m).is_err());
        // Valid mixed state.
        let m = ComplexMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(DensityMatrix::try_new(m).is_ok());
    }

    #[test]
    fn overlap_of_orthogonal_states_is_zero() {
        let zero = PureState::basis(2, 0).density();
        let one = PureState::basis(2, 1).density();
        assert_eq!(zero.overlap(&one).unwrap(), 0.0);
    }
}
