//! Named builders for the worked example systems, each carrying its
//! closed-form reference values for regression tests and CLI demos.
//!
//! Stable scenario identifiers: `two-level-dephasing`, `two-level-decay`,
//! `bell-collective`, `bell-local`, `ensemble`, `qutrit-ladder`.

use num_complex::Complex64;

use crate::matrix::ComplexMatrix;
use crate::operators::{
    collective_dephasing, collective_lowering, identity, projector, sigma_minus, sigma_x, sigma_z,
    tensor,
};
use crate::states::PureState;
use crate::system::SystemModel;
use crate::{Error, Result};

/// A named system with its initial state and, where the closed forms are
/// known, reference values for `A`, `E`, and the exact escape time.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub model: SystemModel,
    pub psi0: PureState,
    pub reference: Option<ScenarioReference>,
}

/// Closed-form reference values derived from the generator definitions.
#[derive(Clone, Debug)]
pub struct ScenarioReference {
    pub amplitude: f64,
    pub excess: f64,
    pub exact_escape: Option<ExactEscape>,
}

/// Exact escape-time formulas, where the master equation solves in closed
/// form.
#[derive(Clone, Copy, Debug)]
pub enum ExactEscape {
    /// Dephasing of `|0>`: `cos Theta_t = (1 + exp(-2 gamma t))/2`, so
    /// `T = -ln(1 - 2 lambda^2) / (2 gamma)`.
    DephasingGroundState { gamma: f64 },
    /// Closed rotation of `[cos theta, sin theta]` under `omega sz`:
    /// `cos Theta_t = 1 - sin^2(2 theta) sin^2(omega t)`.
    ClosedRotation { omega: f64, theta: f64 },
}

impl ExactEscape {
    /// Escape time for radius `lambda`, or `None` when the state never
    /// leaves the region.
    pub fn evaluate(&self, lambda: f64) -> Option<f64> {
        match *self {
            ExactEscape::DephasingGroundState { gamma } => {
                let arg = 1.0 - 2.0 * lambda * lambda;
                if arg <= 0.0 || gamma <= 0.0 {
                    return None;
                }
                Some(-arg.ln() / (2.0 * gamma))
            }
            ExactEscape::ClosedRotation { omega, theta } => {
                let swing = (2.0 * theta).sin().abs();
                if omega <= 0.0 || swing == 0.0 || lambda > swing {
                    return None;
                }
                Some((lambda / swing).asin() / omega)
            }
        }
    }
}

/// Bell-state selector, ordered `Phi+, Phi-, Psi+, Psi-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            BellState::PhiPlus => "phi+",
            BellState::PhiMinus => "phi-",
            BellState::PsiPlus => "psi+",
            BellState::PsiMinus => "psi-",
        }
    }

    pub fn state(&self) -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = match self {
            BellState::PhiPlus => [h, 0.0, 0.0, h],
            BellState::PhiMinus => [h, 0.0, 0.0, -h],
            BellState::PsiPlus => [0.0, h, h, 0.0],
            BellState::PsiMinus => [0.0, h, -h, 0.0],
        };
        PureState::from_real(&amps).expect("Bell amplitudes")
    }
}

/// `(|0> + |1>)/sqrt(2)` on every site.
pub fn plus_product(n: usize) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be at least 1".into()));
    }
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    PureState::try_new(vec![Complex64::new(amp, 0.0); dim])
}

/// `(|0...0> + |1...1>)/sqrt(2)`.
pub fn ghz_state(n: usize) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be at least 1".into()));
    }
    let dim = 1usize << n;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = Complex64::new(h, 0.0);
    amps[dim - 1] = Complex64::new(h, 0.0);
    PureState::try_new(amps)
}

fn check_angles(theta: f64, phi: f64) -> Result<()> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "theta must lie in [0, pi/2), got {theta}"
        )));
    }
    if !(0.0..2.0 * std::f64::consts::PI).contains(&phi) {
        return Err(Error::InvalidArgument(format!(
            "phi must lie in [0, 2 pi), got {phi}"
        )));
    }
    Ok(())
}

/// Two-level dephasing: `H = omega sz`, `M = sqrt(gamma) sx`, initial state
/// `[cos theta, e^{i phi} sin theta]`.
///
/// Reference values:
/// `A^2/4 = gamma^2 (cos^2 2theta + sin^2 2theta sin^2 phi)
///        + omega^2 sin^2 2theta + omega gamma sin^2 2theta sin 2phi`,
/// `E = gamma (1 - sin^2 2theta cos^2 phi)`.
pub fn two_level_dephasing(omega: f64, gamma: f64, theta: f64, phi: f64) -> Result<Scenario> {
    if omega < 0.0 || gamma < 0.0 {
        return Err(Error::InvalidArgument("omega and gamma must be nonnegative".into()));
    }
    check_angles(theta, phi)?;
    let hamiltonians = if omega == 0.0 {
        vec![]
    } else {
        vec![sigma_z().scale_re(omega)]
    };
    let channels = if gamma == 0.0 {
        vec![]
    } else {
        vec![sigma_x().scale_re(gamma.sqrt())]
    };
    let model = SystemModel::try_new(2, hamiltonians, channels)?;
    let psi0 = PureState::try_new(vec![
        Complex64::new(theta.cos(), 0.0),
        Complex64::from_polar(theta.sin(), phi),
    ])?;
    let s2 = (2.0 * theta).sin();
    let c2 = (2.0 * theta).cos();
    let amp_sq = gamma * gamma * (c2 * c2 + s2 * s2 * phi.sin() * phi.sin())
        + omega * omega * s2 * s2
        + omega * gamma * s2 * s2 * (2.0 * phi).sin();
    let amplitude = 2.0 * amp_sq.max(0.0).sqrt();
    let excess = gamma * (1.0 - s2 * s2 * phi.cos() * phi.cos());
    let exact_escape = if gamma == 0.0 && omega > 0.0 {
        Some(ExactEscape::ClosedRotation { omega, theta })
    } else if gamma > 0.0 && omega == 0.0 && theta == 0.0 {
        Some(ExactEscape::DephasingGroundState { gamma })
    } else {
        None
    };
    Ok(Scenario {
        name: "two-level-dephasing".into(),
        model,
        psi0,
        reference: Some(ScenarioReference {
            amplitude,
            excess,
            exact_escape,
        }),
    })
}

/// Two-level decay: `H = omega sz`, `M = sqrt(gamma) sm`, initial state
/// `|+>`.
///
/// The reference values come from the generator definitions:
/// `A = sqrt(16 omega^2 + gamma^2) / 2`, `E = gamma / 4`.
pub fn two_level_decay(omega: f64, gamma: f64) -> Result<Scenario> {
    if omega < 0.0 || gamma < 0.0 {
        return Err(Error::InvalidArgument("omega and gamma must be nonnegative".into()));
    }
    let hamiltonians = if omega == 0.0 {
        vec![]
    } else {
        vec![sigma_z().scale_re(omega)]
    };
    let channels = if gamma == 0.0 {
        vec![]
    } else {
        vec![sigma_minus().scale_re(gamma.sqrt())]
    };
    let model = SystemModel::try_new(2, hamiltonians, channels)?;
    let psi0 = plus_product(1)?;
    let amplitude = (16.0 * omega * omega + gamma * gamma).sqrt() / 2.0;
    let excess = gamma / 4.0;
    let exact_escape = if gamma == 0.0 && omega > 0.0 {
        Some(ExactEscape::ClosedRotation {
            omega,
            theta: std::f64::consts::FRAC_PI_4,
        })
    } else {
        None
    };
    Ok(Scenario {
        name: "two-level-decay".into(),
        model,
        psi0,
        reference: Some(ScenarioReference {
            amplitude,
            excess,
            exact_escape,
        }),
    })
}

/// The four Bell states under either the collective lowering channel
/// `sqrt(gamma)(sm ⊗ I + I ⊗ sm)` or the two local channels
/// `sqrt(gamma) sm ⊗ I` and `sqrt(gamma) I ⊗ sm`; `H = 0`.
///
/// Collective references: `(A, E) = (sqrt(5) gamma, gamma)` for `Phi±`,
/// `(4 gamma, 2 gamma)` for `Psi+`, `(0, 0)` for `Psi-` (stationary).
///
/// Local references: `(2 gamma, gamma)` for all four states — identical, so
/// no state is more robust than another. (The per-channel norm-sum variant
/// of the amplitude evaluates to `sqrt(5) gamma` instead; see
/// [`crate::bounds::amplitude_channel_norm_sum`].)
pub fn bell_scenarios(gamma: f64, collective: bool) -> Result<Vec<Scenario>> {
    if gamma <= 0.0 {
        return Err(Error::InvalidArgument("gamma must be positive".into()));
    }
    let root = gamma.sqrt();
    let channels = if collective {
        vec![collective_lowering(2)?.scale_re(root)]
    } else {
        let id = identity(2)?;
        vec![
            tensor(&sigma_minus(), &id).scale_re(root),
            tensor(&id, &sigma_minus()).scale_re(root),
        ]
    };
    let model = SystemModel::decoherence_only(4, channels)?;
    let kind = if collective { "collective" } else { "local" };
    BellState::ALL
        .iter()
        .map(|bell| {
            let (amplitude, excess) = if collective {
                match bell {
                    BellState::PhiPlus | BellState::PhiMinus => (5f64.sqrt() * gamma, gamma),
                    BellState::PsiPlus => (4.0 * gamma, 2.0 * gamma),
                    BellState::PsiMinus => (0.0, 0.0),
                }
            } else {
                (2.0 * gamma, gamma)
            };
            Ok(Scenario {
                name: format!("bell-{kind}-{}", bell.label()),
                model: model.clone(),
                psi0: bell.state(),
                reference: Some(ScenarioReference {
                    amplitude,
                    excess,
                    exact_escape: None,
                }),
            })
        })
        .collect()
}

/// Atomic ensemble of `N` qubits under collective dephasing
/// `M = sqrt(gamma) sum_j sz^(j)` with `H = 0`: the product state
/// `|+>^(x N)` and the GHZ state.
///
/// At `H = 0` the reference values are exact:
/// `(A, E) = (gamma sqrt(6 N^2 - 2 N), gamma N)` for the product state and
/// `(2 gamma N^2, gamma N^2)` for GHZ, which is why `T*` scales as `1/N`
/// and `1/N^2` respectively.
pub fn ensemble_scenarios(n: usize, gamma: f64) -> Result<(Scenario, Scenario)> {
    if gamma <= 0.0 {
        return Err(Error::InvalidArgument("gamma must be positive".into()));
    }
    let channel = collective_dephasing(n)?.scale_re(gamma.sqrt());
    let model = SystemModel::decoherence_only(1 << n, vec![channel])?;
    let nf = n as f64;
    let product = Scenario {
        name: format!("ensemble-product-{n}"),
        model: model.clone(),
        psi0: plus_product(n)?,
        reference: Some(ScenarioReference {
            amplitude: gamma * (6.0 * nf * nf - 2.0 * nf).sqrt(),
            excess: gamma * nf,
            exact_escape: None,
        }),
    };
    let ghz = Scenario {
        name: format!("ensemble-ghz-{n}"),
        model,
        psi0: ghz_state(n)?,
        reference: Some(ScenarioReference {
            amplitude: 2.0 * gamma * nf * nf,
            excess: gamma * nf * nf,
            exact_escape: None,
        }),
    };
    Ok((product, ghz))
}

/// Qutrit with ladder decay `|E> -> |S> -> |G>`:
/// `M = sqrt(gamma)(|S><E| + |G><S|)`, target state
/// `[1/2, 1/sqrt(2), 1/2]`, no Hamiltonian (the design variable).
pub fn qutrit_ladder(gamma: f64) -> Result<Scenario> {
    if gamma <= 0.0 {
        return Err(Error::InvalidArgument("gamma must be positive".into()));
    }
    let ladder = &projector(1, 0, 3)? + &projector(2, 1, 3)?;
    let model = SystemModel::decoherence_only(3, vec![ladder.scale_re(gamma.sqrt())])?;
    let psi0 = PureState::from_real(&[0.5, std::f64::consts::FRAC_1_SQRT_2, 0.5])?;
    Ok(Scenario {
        name: "qutrit-ladder".into(),
        model,
        psi0,
        reference: None,
    })
}

/// Comparison Hamiltonian for the qutrit scenario: `S_z = |E><E| - |G><G|`.
pub fn qutrit_sz() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(3, 3);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    m[(2, 2)] = Complex64::new(-1.0, 0.0);
    m
}
