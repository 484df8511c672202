//! Periodic grids, spectral derivatives and the scalar/vector/tensor split.

pub mod field;
pub mod grid;
pub mod io;
pub mod svt;

pub use field::{
    apply_derivative_symbol, dealias, derivative_wavevector, laplacian, spectral_derivative, ScalarField,
    SymTensorField, VectorField, SYM_INDEX, SYM_PAIRS,
};
pub use grid::Grid3;
pub use svt::{svt_decompose, svt_recompose, SvtParts};
