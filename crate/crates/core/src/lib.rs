// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoherence;
pub mod eigen;
pub mod error;
pub mod figures;
pub mod hamiltonian;
pub mod memory;
pub mod model;
pub mod optics;
pub mod spectro;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/levels.md")]
    mod levels {}
    #[doc = include_str!("../../../book/src/raman.md")]
    mod raman {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/memory.md")]
    mod memory {}
    #[doc = include_str!("../../../book/src/spectroscopy.md")]
    mod spectroscopy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
