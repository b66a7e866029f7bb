//! Hamiltonian design: minimize the convex quadratic cost
//!
//! ```text
//! F(H) = Tr(H^2 rho0) - Tr(H rho0 H rho0) + Tr(i[rho0, sum_j D†[M_j] rho0] H)
//! ```
//!
//! over Hermitian `H` for a fixed pure target state and channel set. `F`
//! differs from `A^2/4` by an `H`-independent constant, so its minimizer
//! maximizes `T*`. The stationarity condition
//!
//! ```text
//! H rho0 + rho0 H - 2 rho0 H rho0 + i[rho0, sum_j D†[M_j] rho0] = 0
//! ```
//!
//! is linear in `H` and is solved by SVD least squares over a traceless
//! Hermitian basis; a projected-gradient descent provides an independent
//! route to the same minimum cost.

use num_complex::Complex64;

use crate::linalg::{least_squares_min_norm, RealMatrix};
use crate::matrix::ComplexMatrix;
use crate::operators::{adjoint_dissipator, hermitian_basis};
use crate::states::PureState;
use crate::{dim_mismatch, Error, Result};

/// Relative singular-value cutoff that separates the rank-`2(d-1)`
/// stationarity map from its nullspace.
pub const SVD_CUTOFF: f64 = 1e-10;

/// A Hamiltonian-design instance: target state, channels, and the Hermitian
/// basis that parametrizes the candidate Hamiltonians.
#[derive(Clone, Debug)]
pub struct EngineeringProblem {
    psi0: PureState,
    channels: Vec<ComplexMatrix>,
    basis: Vec<ComplexMatrix>,
}

impl EngineeringProblem {
    /// Problem over the default traceless Hermitian basis of the state's
    /// dimension. The identity direction is excluded: it commutes with
    /// everything and cannot change the dynamics or the cost.
    pub fn new(psi0: PureState, channels: Vec<ComplexMatrix>) -> Result<Self> {
        let basis = hermitian_basis(psi0.dim())?;
        Self::with_basis(psi0, channels, basis)
    }

    pub fn with_basis(
        psi0: PureState,
        channels: Vec<ComplexMatrix>,
        basis: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let d = psi0.dim();
        for m in &channels {
            if !m.is_square() || m.rows() != d {
                return Err(dim_mismatch(
                    "engineering channel",
                    format!("{}x{}", m.rows(), m.cols()),
                    format!("{d}x{d}"),
                ));
            }
        }
        if basis.is_empty() {
            return Err(Error::InvalidArgument("basis must be nonempty".into()));
        }
        for b in &basis {
            if !b.is_square() || b.rows() != d {
                return Err(dim_mismatch(
                    "basis element",
                    format!("{}x{}", b.rows(), b.cols()),
                    format!("{d}x{d}"),
                ));
            }
        }
        Ok(Self {
            psi0,
            channels,
            basis,
        })
    }

    pub fn psi0(&self) -> &PureState {
        &self.psi0
    }

    pub fn channels(&self) -> &[ComplexMatrix] {
        &self.channels
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.psi0.dim()
    }

    /// Assembles `sum_i u_i B_i`.
    pub fn hamiltonian_from_coefficients(&self, u: &[f64]) -> Result<ComplexMatrix> {
        if u.len() != self.basis.len() {
            return Err(dim_mismatch("coefficient vector", u.len(), self.basis.len()));
        }
        let d = self.dim();
        let mut h = ComplexMatrix::zeros(d, d);
        for (coeff, b) in u.iter().zip(&self.basis) {
            h = &h + &b.scale_re(*coeff);
        }
        Ok(h)
    }
}

/// Solution of a design problem.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct EngineeringSolution {
    /// Coefficients of `H_opt` over the problem basis.
    pub u: Vec<f64>,
    /// `sum_i u_i B_i`.
    pub h_opt: ComplexMatrix,
    /// Orthonormal coefficient vectors spanning the cost-flat directions
    /// (Hamiltonians commuting with `rho0`). Empty for the descent solver,
    /// which does not factor the stationarity map.
    pub nullspace: Vec<Vec<f64>>,
    /// Frobenius norm of the stationarity residual at the solution.
    pub residual_norm: f64,
    /// `F(H_opt)`.
    pub cost_value: f64,
}

/// Drift term `G = i[rho0, sum_j D†[M_j] rho0]`; Hermitian, and zero exactly
/// when every channel commutes with `rho0`.
pub fn drift_term(psi0: &PureState, channels: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let rho0 = psi0.density();
    let d = psi0.dim();
    let mut dissipation = ComplexMatrix::zeros(d, d);
    for m in channels {
        dissipation = &dissipation + &adjoint_dissipator(m, rho0.matrix())?;
    }
    let comm = &(rho0.matrix() * &dissipation) - &(&dissipation * rho0.matrix());
    Ok(comm.scale(Complex64::new(0.0, 1.0)))
}

fn check_h(h: &ComplexMatrix, d: usize) -> Result<()> {
    if !h.is_square() || h.rows() != d {
        return Err(dim_mismatch(
            "Hamiltonian",
            format!("{}x{}", h.rows(), h.cols()),
            format!("{d}x{d}"),
        ));
    }
    Ok(())
}

/// The design cost `F(H)`; convex quadratic in the coefficients of `H`.
pub fn cost(h: &ComplexMatrix, psi0: &PureState, channels: &[ComplexMatrix]) -> Result<f64> {
    check_h(h, psi0.dim())?;
    let psi = psi0.amplitudes();
    let h_psi = h.matvec(psi);
    // Tr(H^2 rho0) = ||H psi||^2 and Tr(H rho0 H rho0) = <psi|H|psi>^2
    // for Hermitian H and a pure rho0.
    let quad: f64 = h_psi.iter().map(|z| z.norm_sqr()).sum();
    let expect: Complex64 = psi.iter().zip(&h_psi).map(|(p, w)| p.conj() * w).sum();
    let drift = drift_term(psi0, channels)?;
    let linear = drift.trace_product(h);
    Ok(quad - expect.norm_sqr() + linear.re)
}

/// Matrix derivative of the cost,
/// `(H rho0 + rho0 H)ᵀ - 2 (rho0 H rho0)ᵀ + (i[rho0, sum_j D†[M_j] rho0])ᵀ`.
///
/// The directional derivative of `F` along `B` is `Tr(gradᵀ B)`.
pub fn cost_gradient(
    h: &ComplexMatrix,
    psi0: &PureState,
    channels: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    check_h(h, psi0.dim())?;
    Ok(stationarity_residual(h, psi0, channels)?.transpose())
}

/// Left-hand side of the stationarity equation,
/// `H rho0 + rho0 H - 2 rho0 H rho0 + i[rho0, sum_j D†[M_j] rho0]`.
///
/// This is the transposed gradient; both vanish together since every term
/// is Hermitian for Hermitian `H`.
pub fn stationarity_residual(
    h: &ComplexMatrix,
    psi0: &PureState,
    channels: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    check_h(h, psi0.dim())?;
    let rho0 = psi0.density();
    let rho = rho0.matrix();
    let anticomm = &(h * rho) + &(rho * h);
    let sandwich = &(rho * &(h * rho)).scale_re(2.0);
    let drift = drift_term(psi0, channels)?;
    Ok(&(&anticomm - sandwich) + &drift)
}

/// Stacks `[Re(entries); Im(entries)]` of a `d x d` matrix into `2 d^2`
/// reals; preserves the Frobenius norm.
fn real_vec(m: &ComplexMatrix) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.entries().len());
    v.extend(m.entries().iter().map(|z| z.re));
    v.extend(m.entries().iter().map(|z| z.im));
    v
}

/// Solves the stationarity equation by SVD least squares over the basis.
///
/// Returns the minimum-norm coefficient vector (the canonical representative
/// of the solution family), an orthonormal nullspace basis (the directions
/// with singular value below [`SVD_CUTOFF`] relative to the largest), the
/// residual, and the cost at the optimum.
pub fn solve_optimal(problem: &EngineeringProblem) -> Result<EngineeringSolution> {
    let n = problem.basis.len();
    let d = problem.dim();
    let rho0 = problem.psi0.density();
    let rho = rho0.matrix();
    let drift = drift_term(&problem.psi0, &problem.channels)?;

    let mut map = RealMatrix::zeros(2 * d * d, n);
    for (j, b) in problem.basis.iter().enumerate() {
        let anticomm = &(b * rho) + &(rho * b);
        let sandwich = (rho * &(b * rho)).scale_re(2.0);
        let column = real_vec(&(&anticomm - &sandwich));
        for (i, value) in column.into_iter().enumerate() {
            map.set(i, j, value);
        }
    }
    let target: Vec<f64> = real_vec(&drift).into_iter().map(|x| -x).collect();
    let lsq = least_squares_min_norm(&map, &target, SVD_CUTOFF);

    let scale = 1.0 + drift.frobenius_norm();
    if lsq.residual_norm > 1e-9 * scale {
        return Err(Error::ResidualTooLarge {
            residual: lsq.residual_norm,
            tolerance: 1e-9 * scale,
        });
    }
    let h_opt = problem.hamiltonian_from_coefficients(&lsq.solution)?;
    let cost_value = cost(&h_opt, &problem.psi0, &problem.channels)?;
    if cost_value > 1e-10 * scale * scale {
        return Err(Error::NumericalFailure(format!(
            "stationary point has cost {cost_value:.3e} above the trivial H = 0"
        )));
    }
    Ok(EngineeringSolution {
        u: lsq.solution,
        h_opt,
        nullspace: lsq.nullspace,
        residual_norm: lsq.residual_norm,
        cost_value,
    })
}

/// Independent minimizer: projected gradient descent on the basis
/// coefficients from `u = 0` with Armijo backtracking.
///
/// Converges to the same cost as [`solve_optimal`] (the minimizers may
/// differ along the nullspace). Reports non-convergence instead of silently
/// returning a poor iterate.
pub fn brute_force_minimize(
    problem: &EngineeringProblem,
    iterations: usize,
    step: f64,
) -> Result<EngineeringSolution> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let n = problem.basis.len();
    let drift = drift_term(&problem.psi0, &problem.channels)?;
    let grad_tol = 1e-10 * (1.0 + drift.frobenius_norm());

    let mut u = vec![0.0; n];
    let mut f_val = 0.0; // cost at u = 0 is exactly zero
    let mut converged = false;
    let mut grad_norm = f64::INFINITY;
    let mut stalled = 0usize;

    let eval = |u: &[f64]| -> Result<f64> {
        let h = problem.hamiltonian_from_coefficients(u)?;
        cost(&h, &problem.psi0, &problem.channels)
    };

    for _ in 0..iterations {
        let h = problem.hamiltonian_from_coefficients(&u)?;
        let grad_matrix = cost_gradient(&h, &problem.psi0, &problem.channels)?;
        let grad: Vec<f64> = problem
            .basis
            .iter()
            .map(|b| grad_matrix.transpose().trace_product(b).re)
            .collect();
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        grad_norm = grad_sq.sqrt();
        if grad_norm <= grad_tol {
            converged = true;
            break;
        }
        // Armijo backtracking along the steepest descent direction.
        let mut alpha = step;
        let mut accepted = false;
        let mut improvement = 0.0;
        for _ in 0..60 {
            let candidate: Vec<f64> = u
                .iter()
                .zip(&grad)
                .map(|(ui, gi)| ui - alpha * gi)
                .collect();
            let f_candidate = eval(&candidate)?;
            if f_candidate <= f_val - 1e-4 * alpha * grad_sq {
                improvement = f_val - f_candidate;
                u = candidate;
                f_val = f_candidate;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        // Near the minimum the Armijo test runs out of representable
        // decrease; treat sustained stagnation as convergence provided the
        // gradient has collapsed to rounding scale.
        if !accepted || improvement <= 1e-15 * (1.0 + f_val.abs()) {
            stalled += 1;
            if !accepted || stalled >= 25 {
                converged = grad_norm <= 1e-6 * (1.0 + drift.frobenius_norm());
                break;
            }
        } else {
            stalled = 0;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations,
            gradient_norm: grad_norm,
        });
    }
    let h_opt = problem.hamiltonian_from_coefficients(&u)?;
    let residual_norm = stationarity_residual(&h_opt, &problem.psi0, &problem.channels)?
        .frobenius_norm();
    Ok(EngineeringSolution {
        u,
        h_opt,
        nullspace: Vec::new(),
        residual_norm,
        cost_value: f_val,
    })
}
