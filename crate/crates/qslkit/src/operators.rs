//! Quantum-operator vocabulary: standard constructors, Lindblad dissipators,
//! and the relative-purity distance.
//!
//! Basis convention: `|0> = [1, 0]ᵀ` is the excited state and `|1> = [0, 1]ᵀ`
//! the ground state, so the lowering operator is `sigma_minus = |1><0|`.
//! Tensor factors are ordered left to right, first factor most significant.

use num_complex::Complex64;

use crate::matrix::ComplexMatrix;
use crate::states::DensityMatrix;
use crate::{dim_mismatch, Error, Result};

/// Collective operators allocate dense `2^N x 2^N` matrices; this cap keeps
/// the footprint bounded (N = 12 is 256 MiB).
pub const COLLECTIVE_MAX_QUBITS: usize = 12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli axis selector for [`pauli`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Pauli matrix along the given axis.
pub fn pauli(axis: PauliAxis) -> ComplexMatrix {
    let data = match axis {
        PauliAxis::X => vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        PauliAxis::Y => vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        PauliAxis::Z => vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    };
    ComplexMatrix::new(2, 2, data).expect("static Pauli data")
}

pub fn sigma_x() -> ComplexMatrix {
    pauli(PauliAxis::X)
}

pub fn sigma_y() -> ComplexMatrix {
    pauli(PauliAxis::Y)
}

pub fn sigma_z() -> ComplexMatrix {
    pauli(PauliAxis::Z)
}

/// Raising operator `sigma_plus = |0><1|`.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
        .expect("static ladder data")
}

/// Lowering operator `sigma_minus = |1><0|`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
        .expect("static ladder data")
}

pub fn identity(dim: usize) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("identity dimension must be positive".into()));
    }
    Ok(ComplexMatrix::identity(dim))
}

/// Matrix unit `|i><j|` in dimension `dim` (zero-based indices).
pub fn projector(i: usize, j: usize, dim: usize) -> Result<ComplexMatrix> {
    if i >= dim || j >= dim {
        return Err(Error::InvalidArgument(format!(
            "projector indices ({i},{j}) out of range for dimension {dim}"
        )));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(i, j)] = c(1.0, 0.0);
    Ok(m)
}

/// The eight 3x3 Gell-Mann matrices, one-based index.
pub fn gell_mann(k: usize) -> Result<ComplexMatrix> {
    let data: Vec<Complex64> = match k {
        1 => vec![
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
        ],
        2 => vec![
            c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0),
            c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
        ],
        3 => vec![
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
        ],
        4 => vec![
            c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
        ],
        5 => vec![
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0),
        ],
        6 => vec![
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
        ],
        7 => vec![
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0),
            c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0),
        ],
        8 => {
            let s = 1.0 / 3f64.sqrt();
            vec![
                c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0),
                c(0.0, 0.0), c(0.0, 0.0), c(-2.0 * s, 0.0),
            ]
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Gell-Mann index {k} out of range 1..=8"
            )))
        }
    };
    ComplexMatrix::new(3, 3, data)
}

/// Tensor product of two operators.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

fn check_qubit_count(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be at least 1".into()));
    }
    if n > COLLECTIVE_MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n} exceeds the memory cap of {COLLECTIVE_MAX_QUBITS}"
        )));
    }
    Ok(1usize << n)
}

/// Collective lowering operator `sum_j sigma_minus^(j)` on `2^N` dimensions.
pub fn collective_lowering(n: usize) -> Result<ComplexMatrix> {
    let dim = check_qubit_count(n)?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    // Bit value 0 means the excited state |0>; lowering sets the bit.
    for b in 0..dim {
        for k in 0..n {
            if b & (1 << k) == 0 {
                let t = b | (1 << k);
                m[(t, b)] += c(1.0, 0.0);
            }
        }
    }
    Ok(m)
}

/// Collective dephasing operator `sum_j sigma_z^(j)` on `2^N` dimensions.
pub fn collective_dephasing(n: usize) -> Result<ComplexMatrix> {
    let dim = check_qubit_count(n)?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for b in 0..dim {
        let ground = (b as u32).count_ones() as f64;
        m[(b, b)] = c(n as f64 - 2.0 * ground, 0.0);
    }
    Ok(m)
}

/// Traceless Hermitian basis of dimension `d`: the generalized Gell-Mann
/// matrices normalized to `Tr(B_i B_j) = 2 delta_ij`.
///
/// Ordering: for each level `l = 1..d`, the symmetric and antisymmetric
/// pairs `(j, l)` for `j < l`, then the diagonal generator for `l`. For
/// `d = 2` this is `{sigma_x, sigma_y, sigma_z}` and for `d = 3` exactly the
/// eight Gell-Mann matrices in their conventional order.
pub fn hermitian_basis(d: usize) -> Result<Vec<ComplexMatrix>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "hermitian basis needs dimension >= 2, got {d}"
        )));
    }
    let mut basis = Vec::with_capacity(d * d - 1);
    for l in 1..d {
        for j in 0..l {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, l)] = c(1.0, 0.0);
            sym[(l, j)] = c(1.0, 0.0);
            basis.push(sym);
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, l)] = c(0.0, -1.0);
            anti[(l, j)] = c(0.0, 1.0);
            basis.push(anti);
        }
        let norm = (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt();
        let mut diag = ComplexMatrix::zeros(d, d);
        for m in 0..l {
            diag[(m, m)] = c(norm, 0.0);
        }
        diag[(l, l)] = c(-(l as f64) * norm, 0.0);
        basis.push(diag);
    }
    Ok(basis)
}

/// Commutator `AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(dim_mismatch(
            "commutator",
            format!("{}x{} vs {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
            "equal square",
        ));
    }
    Ok(&(a * b) - &(b * a))
}

/// Lindblad dissipator `D[M] rho = M rho M† - M†M rho / 2 - rho M†M / 2`.
pub fn dissipator(m: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() || !rho.is_square() || m.rows() != rho.rows() {
        return Err(dim_mismatch(
            "dissipator",
            format!("{}x{} vs {}x{}", m.rows(), m.cols(), rho.rows(), rho.cols()),
            "equal square",
        ));
    }
    let m_dag = m.dagger();
    let mdm = &m_dag * m;
    let gain = &(m * rho) * &m_dag;
    let half = c(0.5, 0.0);
    Ok(&(&gain - &(&mdm * rho).scale(half)) - &(rho * &mdm).scale(half))
}

/// Adjoint dissipator `D†[M] rho = M† rho M - M†M rho / 2 - rho M†M / 2`.
///
/// Hermitian-preserving: maps Hermitian `rho` to a Hermitian matrix.
pub fn adjoint_dissipator(m: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() || !rho.is_square() || m.rows() != rho.rows() {
        return Err(dim_mismatch(
            "adjoint dissipator",
            format!("{}x{} vs {}x{}", m.rows(), m.cols(), rho.rows(), rho.cols()),
            "equal square",
        ));
    }
    let m_dag = m.dagger();
    let mdm = &m_dag * m;
    let lifted = &(&m_dag * rho) * m;
    let half = c(0.5, 0.0);
    Ok(&(&lifted - &(&mdm * rho).scale(half)) - &(rho * &mdm).scale(half))
}

/// Relative purity angle `Theta = arccos(Tr(rho0 rho_t))`, in `[0, pi/2]`.
pub fn relative_purity_angle(rho0: &DensityMatrix, rhot: &DensityMatrix) -> Result<f64> {
    Ok(rho0.overlap(rhot)?.acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::PureState;

    const EPS: f64 = 1e-12;

    fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
        let diff = (a - b).max_abs();
        assert!(diff <= tol, "matrices differ by {diff:.3e}");
    }

    #[test]
    fn pauli_algebra() {
        // [sx, sy] = 2i sz
        let comm = commutator(&sigma_x(), &sigma_y()).unwrap();
        assert_close(&comm, &sigma_z().scale(c(0.0, 2.0)), EPS);
        // [A, A] = 0
        let self_comm = commutator(&sigma_x(), &sigma_x()).unwrap();
        assert_eq!(self_comm.max_abs(), 0.0);
    }

    #[test]
    fn commutator_of_sz_with_plus_projector() {
        // [sz, (I + sx)/2] = [[0, 1], [-1, 0]]
        let proj = (&ComplexMatrix::identity(2) + &sigma_x()).scale(c(0.5, 0.0));
        let comm = commutator(&sigma_z(), &proj).unwrap();
        let want = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert_close(&comm, &want, EPS);
    }

    #[test]
    fn commutator_rejects_mismatched_dims() {
        assert!(commutator(&sigma_x(), &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn frobenius_of_sigma_x() {
        assert!((sigma_x().frobenius_norm() - 2f64.sqrt()).abs() < EPS);
    }

    #[test]
    fn dissipator_examples() {
        // Ground state is dark for sigma_minus.
        let ground = PureState::basis(2, 1).density();
        let d = dissipator(&sigma_minus(), ground.matrix()).unwrap();
        assert!(d.max_abs() < EPS);

        // Excited state decays: D[sm] |0><0| = |1><1| - |0><0|.
        let excited = PureState::basis(2, 0).density();
        let d = dissipator(&sigma_minus(), excited.matrix()).unwrap();
        let want = ComplexMatrix::from_real(2, 2, &[-1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_close(&d, &want, EPS);

        // Zero channel does nothing.
        let d = dissipator(&ComplexMatrix::zeros(2, 2), excited.matrix()).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn dissipator_is_traceless_on_states() {
        let rho = PureState::from_real(&[0.6, 0.8]).unwrap().density();
        for m in [sigma_x(), sigma_minus(), sigma_z()] {
            let d = dissipator(&m, rho.matrix()).unwrap();
            assert!(d.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_dissipator_examples() {
        // sqrt(gamma) sx on |0><0| gives -gamma sz (gamma = 1 here).
        let excited = PureState::basis(2, 0).density();
        let d = adjoint_dissipator(&sigma_x(), excited.matrix()).unwrap();
        assert_close(&d, &sigma_z().scale(c(-1.0, 0.0)), EPS);

        // sqrt(gamma) sm on |+><+| gives -(gamma/4) sx.
        let plus = PureState::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2])
            .unwrap()
            .density();
        let d = adjoint_dissipator(&sigma_minus(), plus.matrix()).unwrap();
        assert_close(&d, &sigma_x().scale(c(-0.25, 0.0)), EPS);

        assert_eq!(
            adjoint_dissipator(&ComplexMatrix::zeros(2, 2), plus.matrix())
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn adjoint_pairing_on_random_matrices() {
        // Tr(A · D[M]B) = Tr(D†[M]A · B) for Hermitian A, B.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for d in 2..=6 {
            let rand_mat = |next: &mut dyn FnMut() -> f64| {
                let data: Vec<Complex64> =
                    (0..d * d).map(|_| c(next(), next())).collect();
                ComplexMatrix::new(d, d, data).unwrap()
            };
            let a = rand_mat(&mut next).hermitian_part();
            let b = rand_mat(&mut next).hermitian_part();
            let m = rand_mat(&mut next);
            let lhs = a.trace_product(&dissipator(&m, &b).unwrap());
            let rhs = adjoint_dissipator(&m, &a).unwrap().trace_product(&b);
            assert!((lhs - rhs).norm() < 1e-10, "d = {d}");
        }
    }

    #[test]
    fn relative_purity_angle_range_and_symmetry() {
        let zero = PureState::basis(2, 0).density();
        let one = PureState::basis(2, 1).density();
        assert!(relative_purity_angle(&zero, &zero).unwrap().abs() < 1e-12);
        assert!(
            (relative_purity_angle(&zero, &one).unwrap() - std::f64::consts::FRAC_PI_2).abs()
                < 1e-12
        );
        let plus = PureState::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2])
            .unwrap()
            .density();
        let ab = relative_purity_angle(&zero, &plus).unwrap();
        let ba = relative_purity_angle(&plus, &zero).unwrap();
        assert!((ab - ba).abs() < 1e-15);
        // Tr overlap of 0.9 gives arccos(0.9).
        assert!((0.9f64.acos() - 0.451026811796262).abs() < 1e-9);
    }

    #[test]
    fn gell_mann_eight_is_scaled_diagonal() {
        let g8 = gell_mann(8).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((g8[(0, 0)].re - s).abs() < EPS);
        assert!((g8[(2, 2)].re + 2.0 * s).abs() < EPS);
        assert!(gell_mann(0).is_err());
        assert!(gell_mann(9).is_err());
    }

    #[test]
    fn tensor_lowering_acts_on_first_qubit() {
        // (sm ⊗ I) |00> = |10>
        let op = tensor(&sigma_minus(), &ComplexMatrix::identity(2));
        let v = op.matvec(PureState::basis(4, 0).amplitudes());
        assert!((v[2].re - 1.0).abs() < EPS);
        assert!(v.iter().enumerate().all(|(i, z)| i == 2 || z.norm() < EPS));
    }

    #[test]
    fn collective_operators_match_kron_sums() {
        assert_close(&collective_dephasing(1).unwrap(), &sigma_z(), EPS);
        assert_close(&collective_lowering(1).unwrap(), &sigma_minus(), EPS);

        for n in 2..=3 {
            let id = ComplexMatrix::identity(2);
            let build = |single: &ComplexMatrix| {
                let dim = 1usize << n;
                let mut total = ComplexMatrix::zeros(dim, dim);
                for j in 0..n {
                    let mut op = ComplexMatrix::identity(1);
                    for k in 0..n {
                        op = op.kron(if k == j { single } else { &id });
                    }
                    total = &total + &op;
                }
                total
            };
            assert_close(&collective_lowering(n).unwrap(), &build(&sigma_minus()), EPS);
            assert_close(&collective_dephasing(n).unwrap(), &build(&sigma_z()), EPS);
        }
        assert!(collective_lowering(0).is_err());
        assert!(collective_lowering(COLLECTIVE_MAX_QUBITS + 1).is_err());
    }

    #[test]
    fn hermitian_basis_d2_is_pauli() {
        let basis = hermitian_basis(2).unwrap();
        assert_eq!(basis.len(), 3);
        assert_close(&basis[0], &sigma_x(), EPS);
        assert_close(&basis[1], &sigma_y(), EPS);
        assert_close(&basis[2], &sigma_z(), EPS);
    }

    #[test]
    fn hermitian_basis_d3_is_gell_mann() {
        let basis = hermitian_basis(3).unwrap();
        assert_eq!(basis.len(), 8);
        for (i, b) in basis.iter().enumerate() {
            assert_close(b, &gell_mann(i + 1).unwrap(), EPS);
        }
    }

    #[test]
    fn hermitian_basis_gram_matrix() {
        for d in 2..=5 {
            let basis = hermitian_basis(d).unwrap();
            assert_eq!(basis.len(), d * d - 1);
            for (i, bi) in basis.iter().enumerate() {
                assert!(bi.trace().norm() < EPS, "traceless");
                assert_eq!(bi.hermiticity_defect(), 0.0, "exactly Hermitian");
                for (j, bj) in basis.iter().enumerate() {
                    let g = bi.trace_product(bj);
                    let want = if i == j { 2.0 } else { 0.0 };
                    assert!((g.re - want).abs() < EPS && g.im.abs() < EPS);
                }
            }
        }
        assert!(hermitian_basis(1).is_err());
    }
}
