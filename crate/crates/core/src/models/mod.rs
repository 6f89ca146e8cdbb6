//! Concrete problem builders: a spectral heat/reaction equation and a Fourier–Galerkin
//! Navier–Stokes system, plus numerical audits of the structural conditions.

pub mod audit;
pub mod fourier;
pub mod heat;
pub mod navier_stokes;
pub mod noise;

pub use self::audit::{
    condition_audit, derivative_check_f, derivative_check_q, derivative_checks, fit_quadratic_constant, AuditCheck,
    AuditReport,
    DerivativeCheck,
};
pub use self::fourier::{leray_project, ns_bilinear, ns_bilinear_adjoint, FourierField, WaveSet};
pub use self::heat::{make_heat_model, single_mode_square_coefficient, sup_norm_constant, HeatNonlinearity, HeatParams, SineProduct};
pub use self::navier_stokes::{
    energy_defect, make_ns_model, make_ns_model_with_basis, sobolevski_check, taylor_green, NsNonlinearity, NsParams,
    SobolevskiEstimate, StokesBasis,
};
pub use self::noise::TanhNoise;
