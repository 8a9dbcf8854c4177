//! Small numerical kernels shared by the physics modules.

pub mod bessel;
pub mod nelder_mead;
pub mod quadrature;
