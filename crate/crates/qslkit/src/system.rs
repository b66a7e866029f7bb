//! The open-system model: Hamiltonians and decoherence channels.

use crate::linalg::spectral_norm;
use crate::matrix::ComplexMatrix;
use crate::{dim_mismatch, Error, Result};

/// Tolerance on the Hermiticity of each Hamiltonian.
pub const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-10;

/// A Markovian open-system model: `d rho/dt = sum_j -i[H_j, rho] +
/// sum_j D[M_j] rho`.
///
/// Hamiltonians carry angular-frequency units; channels carry sqrt-rate
/// units (a channel of rate `gamma` is `sqrt(gamma) * M'`).
#[derive(Clone, Debug)]
pub struct SystemModel {
    dim: usize,
    hamiltonians: Vec<ComplexMatrix>,
    channels: Vec<ComplexMatrix>,
}

impl SystemModel {
    pub fn try_new(
        dim: usize,
        hamiltonians: Vec<ComplexMatrix>,
        channels: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("model dimension must be positive".into()));
        }
        for (k, h) in hamiltonians.iter().enumerate() {
            if !h.is_square() || h.rows() != dim {
                return Err(dim_mismatch(
                    "model Hamiltonian",
                    format!("{}x{}", h.rows(), h.cols()),
                    format!("{dim}x{dim}"),
                ));
            }
            if !h.is_finite() {
                return Err(Error::NonFinite(format!("Hamiltonian {k}")));
            }
            let defect = h.hermiticity_defect();
            if defect > HAMILTONIAN_HERMITICITY_TOL {
                return Err(Error::InvalidState(format!(
                    "Hamiltonian {k} deviates from Hermitian by {defect:.3e}"
                )));
            }
        }
        for (k, m) in channels.iter().enumerate() {
            if !m.is_square() || m.rows() != dim {
                return Err(dim_mismatch(
                    "model channel",
                    format!("{}x{}", m.rows(), m.cols()),
                    format!("{dim}x{dim}"),
                ));
            }
            if !m.is_finite() {
                return Err(Error::NonFinite(format!("channel {k}")));
            }
        }
        Ok(Self {
            dim,
            hamiltonians,
            channels,
        })
    }

    /// Model with no Hamiltonian (pure decoherence).
    pub fn decoherence_only(dim: usize, channels: Vec<ComplexMatrix>) -> Result<Self> {
        Self::try_new(dim, Vec::new(), channels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonians(&self) -> &[ComplexMatrix] {
        &self.hamiltonians
    }

    pub fn channels(&self) -> &[ComplexMatrix] {
        &self.channels
    }

    /// Replaces the Hamiltonian list, keeping the channels.
    pub fn with_hamiltonians(&self, hamiltonians: Vec<ComplexMatrix>) -> Result<Self> {
        Self::try_new(self.dim, hamiltonians, self.channels.clone())
    }

    /// Treats the stored channels as unscaled `M'_j` and returns the model
    /// with `M_j = sqrt(gamma) M'_j`.
    pub fn with_channel_strength(&self, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "channel strength must be a finite nonnegative number, got {gamma}"
            )));
        }
        let root = gamma.sqrt();
        Ok(Self {
            dim: self.dim,
            hamiltonians: self.hamiltonians.clone(),
            channels: self.channels.iter().map(|m| m.scale_re(root)).collect(),
        })
    }

    /// Generator magnitude `sum ||H_j||_2 + sum ||M_j||_2^2`, used to scale
    /// integration steps and stationarity tolerances.
    pub fn spectral_scale(&self) -> f64 {
        let h: f64 = self.hamiltonians.iter().map(spectral_norm).sum();
        let m: f64 = self
            .channels
            .iter()
            .map(|ch| {
                let s = spectral_norm(ch);
                s * s
            })
            .sum();
        h + m
    }

    /// Smallest positive channel rate `||M_j||_2^2`, if any.
    pub fn min_channel_rate(&self) -> Option<f64> {
        self.channels
            .iter()
            .map(|ch| {
                let s = spectral_norm(ch);
                s * s
            })
            .filter(|&r| r > 1e-12)
            .min_by(f64::total_cmp)
    }
}
