//! The explicit quantum speed limit `T*`, the comparison bound `T_DC`, their
//! ratio, and robustness rankings.
//!
//! For an initial pure state `rho0 = |psi0><psi0|` evolving under the master
//! equation, the escape time `T` from the relative-purity ball of radius
//! `lambda = sqrt(1 - cos Theta_T)` obeys
//!
//! ```text
//! T >= T* = 2 lambda / A + (2 E / A^2) ln(E / (E + A lambda))
//! T >= T_DC = sqrt(2) lambda^2 / A
//! ```
//!
//! with the generator amplitude and channel excess
//!
//! ```text
//! A = sqrt(2) || sum_j i[H_j, rho0] + sum_j D†[M_j] rho0 ||_F
//! E = sum_j ( ||M_j psi0||^2 - |<psi0|M_j|psi0>|^2 )
//! ```
//!
//! `A = 0` means `rho0` is stationary and `T*` diverges; `E = 0` is the
//! closed-system case where `T*` reduces to `2 lambda / A`.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matrix::ComplexMatrix;
use crate::states::PureState;
use crate::system::SystemModel;
use crate::{dim_mismatch, Error, Result};

/// Nonnegative real extended with an explicit infinity, so that stationary
/// states never feed floating-point sentinels into arithmetic or sorts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(*x),
            ExtReal::Infinite => None,
        }
    }

    /// Total order with `Infinite` greater than every finite value.
    pub fn total_cmp(&self, other: &ExtReal) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => Ordering::Equal,
            (ExtReal::Infinite, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::Finite(_), ExtReal::Infinite) => Ordering::Less,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl std::fmt::Display for ExtReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(x) => Ok(ExtReal::Finite(x)),
            Repr::Text(s) if s == "inf" || s == "infinity" => Ok(ExtReal::Infinite),
            Repr::Text(s) => Err(D::Error::custom(format!("invalid extended real: {s}"))),
        }
    }
}

/// The pair `(A, E)` with the structural constraint `A >= sqrt(2) E`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QslInputs {
    pub amplitude: f64,
    pub excess: f64,
}

impl QslInputs {
    pub fn try_new(amplitude: f64, excess: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !(excess >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "amplitude and excess must be nonnegative (got A = {amplitude}, E = {excess})"
            )));
        }
        if amplitude + 1e-9 * (1.0 + amplitude) < std::f64::consts::SQRT_2 * excess {
            return Err(Error::InvalidState(format!(
                "A = {amplitude} violates A >= sqrt(2) E with E = {excess}"
            )));
        }
        Ok(Self { amplitude, excess })
    }

    /// `k = E / A`, confined to `[0, 1/sqrt(2)]`; zero when `A` vanishes.
    pub fn k(&self) -> f64 {
        if self.amplitude > 0.0 {
            self.excess / self.amplitude
        } else {
            0.0
        }
    }
}

/// Effective generator at the initial state:
/// `sum_j i[H_j, rho0] + sum_j D†[M_j] rho0`.
///
/// Exploits `rho0 = |psi><psi|`: every term is a sum of outer products of
/// `psi`, `H psi`, `M† psi`, and `M†M psi`, so only matrix-vector products
/// are needed. Equals the commutator/dissipator route exactly up to rounding.
pub fn effective_generator(model: &SystemModel, psi0: &PureState) -> Result<ComplexMatrix> {
    if model.dim() != psi0.dim() {
        return Err(dim_mismatch("effective generator", psi0.dim(), model.dim()));
    }
    let psi = psi0.amplitudes();
    let d = model.dim();
    let mut g = ComplexMatrix::zeros(d, d);
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(-0.5, 0.0);
    for h in model.hamiltonians() {
        // i[H, rho0] = i (H psi) psi† - i psi (H psi)†
        let w = h.matvec(psi);
        g.add_outer(i, &w, psi);
        g.add_outer(-i, psi, &w);
    }
    for m in model.channels() {
        // D†[M] rho0 = (M†psi)(M†psi)† - (M†M psi) psi†/2 - psi (M†M psi)†/2
        let m_dag = m.dagger();
        let u = m_dag.matvec(psi);
        let w = m_dag.matvec(&m.matvec(psi));
        g.add_outer(Complex64::new(1.0, 0.0), &u, &u);
        g.add_outer(half, &w, psi);
        g.add_outer(half, psi, &w);
    }
    Ok(g)
}

/// Generator amplitude `A = sqrt(2) || sum_j i[H_j, rho0] + sum_j D†[M_j]
/// rho0 ||_F`. Larger `A` permits faster departure from `rho0`.
pub fn amplitude(model: &SystemModel, psi0: &PureState) -> Result<f64> {
    Ok(std::f64::consts::SQRT_2 * effective_generator(model, psi0)?.frobenius_norm())
}

/// Triangle-inequality variant of the amplitude,
/// `sqrt(2) (|| sum_j i[H_j, rho0] ||_F + sum_j || D†[M_j] rho0 ||_F)`:
/// per-channel norms are summed instead of taking the norm of the summed
/// generator.
///
/// Always `>= amplitude`, so substituting it into `T*` still yields a valid
/// (looser) lower bound on the escape time. Kept alongside the tight
/// definition so the two routes can be compared on multi-channel models.
pub fn amplitude_channel_norm_sum(model: &SystemModel, psi0: &PureState) -> Result<f64> {
    if model.dim() != psi0.dim() {
        return Err(dim_mismatch("amplitude", psi0.dim(), model.dim()));
    }
    let psi = psi0.amplitudes();
    let d = model.dim();
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(-0.5, 0.0);
    let mut coherent = ComplexMatrix::zeros(d, d);
    for h in model.hamiltonians() {
        let w = h.matvec(psi);
        coherent.add_outer(i, &w, psi);
        coherent.add_outer(-i, psi, &w);
    }
    let mut total = coherent.frobenius_norm();
    for m in model.channels() {
        let m_dag = m.dagger();
        let u = m_dag.matvec(psi);
        let w = m_dag.matvec(&m.matvec(psi));
        let mut g = ComplexMatrix::zeros(d, d);
        g.add_outer(Complex64::new(1.0, 0.0), &u, &u);
        g.add_outer(half, &w, psi);
        g.add_outer(half, psi, &w);
        total += g.frobenius_norm();
    }
    Ok(std::f64::consts::SQRT_2 * total)
}

/// Channel excess `E = sum_j (||M_j psi0||^2 - |<psi0|M_j|psi0>|^2)`.
///
/// Each term is a variance and is nonnegative; it vanishes exactly when
/// `psi0` is an eigenvector of the channel.
pub fn excess(model: &SystemModel, psi0: &PureState) -> Result<f64> {
    if model.dim() != psi0.dim() {
        return Err(dim_mismatch("excess", psi0.dim(), model.dim()));
    }
    let psi = psi0.amplitudes();
    let mut total = 0.0;
    for m in model.channels() {
        let v = m.matvec(psi);
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let expectation: Complex64 = psi.iter().zip(v.iter()).map(|(p, w)| p.conj() * w).sum();
        total += (norm_sq - expectation.norm_sqr()).max(0.0);
    }
    Ok(total)
}

/// `lambda = sqrt(1 - cos Theta_T)` for `Theta_T` in `(0, pi/2]`.
pub fn lambda_from_theta(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2 + 1e-15) {
        return Err(Error::InvalidArgument(format!(
            "Theta_T must lie in (0, pi/2], got {theta}"
        )));
    }
    Ok((1.0 - theta.cos()).sqrt())
}

/// Inverse of [`lambda_from_theta`]: `Theta_T = arccos(1 - lambda^2)`.
pub fn theta_from_lambda(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((1.0 - lambda * lambda).acos())
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must lie in (0, 1], got {lambda}"
        )));
    }
    Ok(())
}

/// The explicit speed limit with caller-supplied stationary/closed cutoffs.
///
/// `A` below `tol_a` flags a stationary state (infinite bound); `E` below
/// `tol_e` takes the analytic closed-system limit `2 lambda / A`, avoiding
/// the `0 ln 0` form.
pub fn t_star_with_tols(a: f64, e: f64, lambda: f64, tol_a: f64, tol_e: f64) -> Result<ExtReal> {
    if a < 0.0 || e < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "amplitude and excess must be nonnegative (got A = {a}, E = {e})"
        )));
    }
    check_lambda(lambda)?;
    if a < tol_a {
        return Ok(ExtReal::Infinite);
    }
    if e < tol_e {
        return Ok(ExtReal::Finite(2.0 * lambda / a));
    }
    let value = 2.0 * lambda / a + (2.0 * e / (a * a)) * (e / (e + a * lambda)).ln();
    Ok(ExtReal::Finite(value))
}

/// The explicit speed limit `T*(A, E, lambda)` with default cutoffs scaled
/// to the magnitude of the inputs.
pub fn t_star(a: f64, e: f64, lambda: f64) -> Result<ExtReal> {
    let tol = 1e-12 * (1.0 + a + e);
    t_star_with_tols(a, e, lambda, tol, tol)
}

/// The comparison bound `T_DC = sqrt(2) lambda^2 / A`; infinite for a
/// stationary state.
pub fn t_dc(a: f64, lambda: f64) -> Result<ExtReal> {
    if a < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be nonnegative, got {a}"
        )));
    }
    check_lambda(lambda)?;
    let tol = 1e-12 * (1.0 + a);
    if a < tol {
        return Ok(ExtReal::Infinite);
    }
    Ok(ExtReal::Finite(std::f64::consts::SQRT_2 * lambda * lambda / a))
}

/// The ratio `T*/T_DC = sqrt(2)/lambda + (sqrt(2) k / lambda^2)
/// ln(k / (k + lambda))`, which depends only on `k = E/A` and `lambda`.
///
/// At `k = 0` the limit `sqrt(2)/lambda` is returned exactly. The ratio is
/// non-increasing in both `k` and `lambda`, and exceeds 1 whenever the
/// decoherence is weak.
pub fn bound_ratio(k: f64, lambda: f64) -> Result<f64> {
    const K_MAX: f64 = std::f64::consts::FRAC_1_SQRT_2;
    if !(k >= 0.0 && k <= K_MAX + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "k must lie in [0, 1/sqrt(2)], got {k}"
        )));
    }
    check_lambda(lambda)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    if k == 0.0 {
        return Ok(sqrt2 / lambda);
    }
    Ok(sqrt2 / lambda + (sqrt2 * k / (lambda * lambda)) * (k / (k + lambda)).ln())
}

/// Full bound report for one model and initial state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QslReport {
    /// Target relative-purity angle `Theta_T` in radians.
    pub theta_t: f64,
    /// Radius `lambda = sqrt(1 - cos Theta_T)`.
    pub lambda: f64,
    /// Generator amplitude `A`.
    pub amplitude: f64,
    /// Channel excess `E`.
    pub excess: f64,
    /// `k = E / A` (zero for a stationary state).
    pub k: f64,
    /// The explicit speed limit `T*`.
    pub t_star: ExtReal,
    /// The comparison bound `T_DC`.
    pub t_dc: ExtReal,
    /// `T*/T_DC`, a function of `(k, lambda)` alone; for a stationary state
    /// this is the `k = 0` limit `sqrt(2)/lambda`.
    pub ratio: f64,
    /// `E` below tolerance: closed-system behavior.
    pub closed_system: bool,
    /// `A` below tolerance: `rho0` is stationary and `T*` is infinite.
    pub stationary: bool,
}

/// Computes `A`, `E`, `k`, `T*`, `T_DC`, and their ratio for the model and
/// state, flagging stationary/closed cases against a tolerance scaled by the
/// model's spectral magnitude.
pub fn qsl_report(model: &SystemModel, psi0: &PureState, lambda: f64) -> Result<QslReport> {
    check_lambda(lambda)?;
    let a = amplitude(model, psi0)?;
    let e = excess(model, psi0)?;
    let inputs = QslInputs::try_new(a, e)?;
    let tol = 1e-12 * (1.0 + model.spectral_scale());
    let stationary = a < tol;
    let closed_system = e < tol;
    let k = if stationary { 0.0 } else { inputs.k() };
    let t_star = t_star_with_tols(a, e, lambda, tol, tol)?;
    let t_dc = if stationary {
        ExtReal::Infinite
    } else {
        ExtReal::Finite(std::f64::consts::SQRT_2 * lambda * lambda / a)
    };
    let ratio = bound_ratio(k.min(std::f64::consts::FRAC_1_SQRT_2), lambda)?;
    Ok(QslReport {
        theta_t: theta_from_lambda(lambda)?,
        lambda,
        amplitude: a,
        excess: e,
        k,
        t_star,
        t_dc,
        ratio,
        closed_system,
        stationary,
    })
}

/// Ranks states by robustness: descending `T*`, stationary (infinite)
/// entries first, ties keeping input order.
pub fn rank_states(
    model: &SystemModel,
    states: &[PureState],
    lambda: f64,
) -> Result<Vec<(usize, ExtReal)>> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("rank_states needs at least one state".into()));
    }
    let mut ranked = Vec::with_capacity(states.len());
    for (idx, psi) in states.iter().enumerate() {
        let report = qsl_report(model, psi, lambda)?;
        ranked.push((idx, report.t_star));
    }
    // Stable sort keeps input order among exact ties.
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ranked)
}

/// Evaluates `T*` along a grid of decoherence strengths, treating the
/// model's channels as unscaled `M'_j` so that `M_j = sqrt(gamma) M'_j`.
pub fn gamma_sweep(
    template: &SystemModel,
    psi0: &PureState,
    lambda: f64,
    gamma_grid: &[f64],
) -> Result<Vec<(f64, ExtReal)>> {
    if gamma_grid.is_empty() {
        return Err(Error::InvalidArgument("gamma grid must be nonempty".into()));
    }
    if gamma_grid.windows(2).any(|w| w[1] <= w[0]) || gamma_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "gamma grid must be positive and strictly ascending".into(),
        ));
    }
    let mut out = Vec::with_capacity(gamma_grid.len());
    for &gamma in gamma_grid {
        let model = template.with_channel_strength(gamma)?;
        let report = qsl_report(&model, psi0, lambda)?;
        out.push((gamma, report.t_star));
    }
    Ok(out)
}
