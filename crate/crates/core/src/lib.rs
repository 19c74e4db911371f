//! Tensor-hypergraph signal processing.
//!
//! Hypergraphs are lifted into third-order tensors (normalized
//! adjacency and outer-power signal tensors), operated on with the
//! t-product algebra (`talg`), denoised by tensor Laplacian smoothing
//! (`denoise`), and classified with tensor convolution / iterative
//! shifting layers (`nn`).

pub mod builder;
pub mod denoise;
pub mod error;
pub mod hypergraph;
pub mod nn;
pub mod synth;
pub mod talg;

pub use error::{Error, Result};
pub use hypergraph::{Dataset, Hypergraph};
pub use talg::{SymTensor3, Tensor3, Tube};
