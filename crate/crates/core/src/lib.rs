//! Regular subdivisions of lattice polytopes, their dual tropical complexes,
//! and the patchworked hypersurfaces that degenerate onto them.
//!
//! The exact side (lattice points, weights, subdivisions, dual cells,
//! mod-2 homology) uses rational arithmetic throughout. The numerical side
//! (amoeba sampling and holomorphic forms) works in `Log_t` coordinates so
//! that large values of `t` stay representable.

pub mod amoeba;
pub mod cycles;
pub mod dualcomplex;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod lattice;
pub mod linalg;
pub mod lp;
pub mod subdivision;
pub mod tropical;

pub use error::{Error, Result};

// The README and guide snippets run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/subdivisions.md")]
    mod subdivisions {}
    #[doc = include_str!("../../../book/src/complex.md")]
    mod complex {}
    #[doc = include_str!("../../../book/src/cycles.md")]
    mod cycles {}
    #[doc = include_str!("../../../book/src/amoeba.md")]
    mod amoeba {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
