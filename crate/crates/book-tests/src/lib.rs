//! Keeps the guide honest: every chapter of `book/` is included as module
//! documentation here, so `cargo test --doc` compiles and runs each of its
//! code blocks against the current library. A chapter module per file keeps
//! failure origins identifiable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/spectra.md")]
pub mod spectra {}

#[doc = include_str!("../../../book/src/operating-points.md")]
pub mod operating_points {}

#[doc = include_str!("../../../book/src/stability.md")]
pub mod stability {}

#[doc = include_str!("../../../book/src/classical.md")]
pub mod classical {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
