#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod convolve;
pub mod error;
pub mod linalg;
pub mod mild;
pub mod models;
pub mod paths;
pub mod spectral;
pub mod verify;
pub mod young;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/young.md")]
    mod young {}
    #[doc = include_str!("../../../book/src/convolve.md")]
    mod convolve {}
    #[doc = include_str!("../../../book/src/mild.md")]
    mod mild {}
    #[doc = include_str!("../../../book/src/horizon.md")]
    mod horizon {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
