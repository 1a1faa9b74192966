//! Pseudospectral simulation of rapidly rotating convection in the limit of
//! infinite Prandtl number.
//!
//! The only prognostic variable is the temperature fluctuation `θ'`; the
//! velocity, stream function, vorticity and horizontal-mean temperature are
//! all diagnosed from it at every instant:
//!
//! ```text
//! ψ_z = Ra θ' + Δ_h w,    -w_z = Δ_h ω,    ω = Δ_h ψ,    (u, v) = (-ψ_y, ψ_x)
//! ∂_t θ' + u·∇_h θ' + w ∂_z θ̄ = Δ_h θ'
//! ∂_z ⟨θ'w⟩ = ∂_zz θ̄
//! ```
//!
//! on the periodic box `[0, 2πL]² × [0, 2π]`.

pub mod diagnostic;
pub mod error;
pub mod evolution;
pub mod mean;
mod numeric;
pub mod spectral;
pub mod verification;

pub use rustfft::num_complex::Complex64;

pub use diagnostic::{DiagnosedFlow, PhysParams};
pub use error::{EvolutionError, ParamError, SpectralError, VerificationError};
pub use evolution::{SimState, Stepper, StepperConfig};
pub use spectral::{Grid, MeanProfile, Norm, NormKind, SpectralField, Wavevector};
