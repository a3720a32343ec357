pub mod cli;
pub mod dilation;
pub mod error;
pub mod funcalc;
pub mod gallery;
pub mod lpcore;
pub mod multiplier;
pub mod quad;
pub mod randseq;
pub mod ritt;
pub mod schur;
pub mod squarefn;

pub use error::{Error, Result};
pub use lpcore::{ComplexMatrix, LpOperator, MixedElement, C64};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/ritt.md")]
    mod ritt {}
    #[doc = include_str!("../../../book/src/fractional-powers.md")]
    mod fractional_powers {}
    #[doc = include_str!("../../../book/src/square-functions.md")]
    mod square_functions {}
    #[doc = include_str!("../../../book/src/schur.md")]
    mod schur {}
    #[doc = include_str!("../../../book/src/dilations.md")]
    mod dilations {}
    #[doc = include_str!("../../../book/src/multipliers.md")]
    mod multipliers {}
    #[doc = include_str!("../../../book/src/gallery.md")]
    mod gallery {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
