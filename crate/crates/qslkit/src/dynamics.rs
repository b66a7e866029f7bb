//! Fixed-step RK4 integration of the master equation, relative-purity
//! trajectories, and first-exit (escape) times from the robustness region.

use num_complex::Complex64;

use crate::matrix::ComplexMatrix;
use crate::states::{DensityMatrix, PureState};
use crate::system::SystemModel;
use crate::{bounds, dim_mismatch, Error, Result};

/// Trajectories keep every `STORE_EVERY`-th density matrix so that escape
/// refinement can re-integrate short segments without holding every state.
pub const STORE_EVERY: usize = 10;

/// Overlap tolerance to which the threshold crossing is located.
pub const CROSSING_TOL: f64 = 1e-8;

/// Sampled evolution of `cos Theta_t = Tr(rho0 rho_t)`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Strictly increasing sample times starting at 0.
    pub times: Vec<f64>,
    /// `cos Theta_t` at each sample, in `[0, 1]`; the first entry is 1.
    pub overlaps: Vec<f64>,
    /// Sparsely stored states: `(sample index, state)` pairs.
    pub stored_states: Vec<(usize, DensityMatrix)>,
}

/// Outcome of an escape-time search.
#[derive(Clone, Debug)]
pub struct EscapeResult {
    /// Whether the overlap crossed `1 - lambda^2` before `t_max`.
    pub escaped: bool,
    /// First crossing time; meaningful only when `escaped` is true.
    pub time: f64,
    /// The radius that defines the region.
    pub lambda: f64,
    /// The search horizon.
    pub t_max: f64,
}

/// Cached right-hand side of the master equation,
/// `L(rho) = sum_j -i[H_j, rho] + sum_j D[M_j] rho`.
struct Generator {
    hamiltonians: Vec<ComplexMatrix>,
    channels: Vec<ChannelOps>,
}

struct ChannelOps {
    m: ComplexMatrix,
    m_dag: ComplexMatrix,
    mdag_m: ComplexMatrix,
}

impl Generator {
    fn new(model: &SystemModel) -> Self {
        let channels = model
            .channels()
            .iter()
            .map(|m| {
                let m_dag = m.dagger();
                let mdag_m = &m_dag * m;
                ChannelOps {
                    m: m.clone(),
                    m_dag,
                    mdag_m,
                }
            })
            .collect();
        Self {
            hamiltonians: model.hamiltonians().to_vec(),
            channels,
        }
    }

    fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = rho.rows();
        let mut out = ComplexMatrix::zeros(d, d);
        let minus_i = Complex64::new(0.0, -1.0);
        let half = Complex64::new(0.5, 0.0);
        for h in &self.hamiltonians {
            let comm = &(h * rho) - &(rho * h);
            out = &out + &comm.scale(minus_i);
        }
        for ch in &self.channels {
            let gain = &(&ch.m * rho) * &ch.m_dag;
            let loss = &(&ch.mdag_m * rho).scale(half) + &(rho * &ch.mdag_m).scale(half);
            out = &out + &(&gain - &loss);
        }
        out
    }

    /// One raw RK4 update, before re-Hermitization and renormalization.
    fn rk4_raw(&self, rho: &ComplexMatrix, h: f64) -> ComplexMatrix {
        let half_h = Complex64::new(h / 2.0, 0.0);
        let full_h = Complex64::new(h, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1.scale(half_h)));
        let k3 = self.apply(&(rho + &k2.scale(half_h)));
        let k4 = self.apply(&(rho + &k3.scale(full_h)));
        let sum = &(&k1 + &k2.scale_re(2.0)) + &(&k3.scale_re(2.0) + &k4);
        rho + &sum.scale(Complex64::new(h / 6.0, 0.0))
    }

    /// RK4 update with the per-step cleanup: re-Hermitize and renormalize
    /// the trace. Fails when the step produced a non-finite or degenerate
    /// matrix (step too large).
    fn rk4_step(&self, rho: &ComplexMatrix, h: f64) -> Result<ComplexMatrix> {
        let raw = self.rk4_raw(rho, h);
        if !raw.is_finite() {
            return Err(Error::NumericalFailure(
                "RK4 update produced non-finite entries; reduce the step".into(),
            ));
        }
        let herm = raw.hermitian_part();
        let trace = herm.trace().re;
        if !(trace > 0.5 && trace < 2.0) {
            return Err(Error::NumericalFailure(format!(
                "RK4 trace drifted to {trace}; reduce the step"
            )));
        }
        Ok(herm.scale_re(1.0 / trace))
    }
}

fn check_model_state(model: &SystemModel, dim: usize) -> Result<()> {
    if model.dim() != dim {
        return Err(dim_mismatch("dynamics", dim, model.dim()));
    }
    Ok(())
}

/// Validates an integrator-produced matrix as a state; a violated invariant
/// here means the step was too large, which is a numerical failure rather
/// than bad input.
fn validate_step(matrix: ComplexMatrix) -> Result<DensityMatrix> {
    DensityMatrix::try_new(matrix).map_err(|e| match e {
        Error::InvalidState(msg) => {
            Error::NumericalFailure(format!("integration left the state space ({msg}); reduce the step"))
        }
        other => other,
    })
}

/// Default integration step `0.01 / (sum ||H_j||_2 + sum ||M_j||_2^2 + 1)`,
/// scaling inversely with the generator magnitude.
pub fn default_step(model: &SystemModel) -> f64 {
    0.01 / (model.spectral_scale() + 1.0)
}

/// One classical fourth-order Runge-Kutta step of the master equation; the
/// output is re-Hermitized (`(rho + rho†)/2`) and trace-renormalized.
pub fn rk4_step(model: &SystemModel, rho: &DensityMatrix, h: f64) -> Result<DensityMatrix> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    check_model_state(model, rho.dim())?;
    let generator = Generator::new(model);
    validate_step(generator.rk4_step(rho.matrix(), h)?)
}

/// Integrates from `|psi0><psi0|`, sampling `cos Theta_t` against the fixed
/// initial state at `0, h, 2h, ..., t_end` (the final step is shortened to
/// land exactly on `t_end`).
pub fn evolve(model: &SystemModel, psi0: &PureState, t_end: f64, h: f64) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    check_model_state(model, psi0.dim())?;
    let generator = Generator::new(model);
    let rho0 = psi0.density();

    let mut times = vec![0.0];
    let mut overlaps = vec![1.0];
    let mut stored_states = vec![(0usize, rho0.clone())];
    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut index = 0usize;
    while t < t_end - 1e-12 * t_end.max(1.0) {
        let step = h.min(t_end - t);
        let next = generator.rk4_step(rho.matrix(), step)?;
        rho = validate_step(next)?;
        t += step;
        index += 1;
        times.push(t);
        overlaps.push(rho0.overlap(&rho)?);
        if index % STORE_EVERY == 0 {
            stored_states.push((index, rho.clone()));
        }
    }
    Ok(Trajectory {
        times,
        overlaps,
        stored_states,
    })
}

/// First time at which `cos Theta_t` crosses `1 - lambda^2`, i.e. the state
/// first exits the robustness region of radius `lambda`.
///
/// The integration detects a bracketing sample pair, then bisects inside it
/// to [`CROSSING_TOL`] in overlap, re-integrating each candidate from the
/// last stored pre-crossing state so that no interpolation bias enters the
/// comparison against `T*`. Later re-entries are ignored: only the first
/// crossing counts.
pub fn escape_time(
    model: &SystemModel,
    psi0: &PureState,
    lambda: f64,
    t_max: f64,
    h: f64,
) -> Result<EscapeResult> {
    bounds::check_lambda(lambda)?;
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    check_model_state(model, psi0.dim())?;
    let threshold = 1.0 - lambda * lambda;
    let generator = Generator::new(model);
    let rho0 = psi0.density();

    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut prev_overlap = 1.0;
    let mut index = 0usize;
    // Most recent state stored at a multiple of STORE_EVERY steps.
    let mut anchor_time = 0.0;
    let mut anchor = rho0.clone();

    while t < t_max - 1e-12 * t_max {
        let step = h.min(t_max - t);
        let next = generator.rk4_step(rho.matrix(), step)?;
        let next_rho = validate_step(next)?;
        let overlap = rho0.overlap(&next_rho)?;
        if prev_overlap >= threshold && overlap < threshold {
            let time = refine_crossing(
                &generator,
                &rho0,
                &anchor,
                anchor_time,
                t,
                t + step,
                threshold,
                h,
            )?;
            return Ok(EscapeResult {
                escaped: true,
                time,
                lambda,
                t_max,
            });
        }
        rho = next_rho;
        t += step;
        prev_overlap = overlap;
        index += 1;
        if index % STORE_EVERY == 0 {
            anchor_time = t;
            anchor = rho.clone();
        }
    }
    Ok(EscapeResult {
        escaped: false,
        time: t_max,
        lambda,
        t_max,
    })
}

/// Overlap at `target` obtained by re-integrating from the anchor state with
/// full `h` steps plus one shortened final step.
fn overlap_at(
    generator: &Generator,
    rho0: &DensityMatrix,
    anchor: &DensityMatrix,
    anchor_time: f64,
    target: f64,
    h: f64,
) -> Result<f64> {
    let mut rho = anchor.matrix().clone();
    let mut t = anchor_time;
    while t < target - 1e-15 * target.max(1.0) {
        let step = h.min(target - t);
        rho = generator.rk4_step(&rho, step)?;
        t += step;
    }
    validate_step(rho)?.overlap(rho0)
}

#[allow(clippy::too_many_arguments)]
fn refine_crossing(
    generator: &Generator,
    rho0: &DensityMatrix,
    anchor: &DensityMatrix,
    anchor_time: f64,
    mut lo: f64,
    mut hi: f64,
    threshold: f64,
    h: f64,
) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let overlap = overlap_at(generator, rho0, anchor, anchor_time, mid, h)?;
        if (overlap - threshold).abs() <= CROSSING_TOL {
            return Ok(mid);
        }
        if overlap > threshold {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Ok(0.5 * (lo + hi))
}
