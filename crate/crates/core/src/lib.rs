#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision
)]

pub mod background;
pub mod checks;
pub mod diagnostics;
pub mod error;
pub mod first_order;
pub mod numerics;
pub mod scenario;
pub mod second_order;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
