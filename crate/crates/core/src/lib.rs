//! Higher order singular value decomposition: a classical reference, exact
//! simulations of two quantum algorithms for it, and HOSVD-based tensor
//! completion.

pub mod alg1;
pub mod alg2;
pub mod collate;
pub mod completion;
pub mod corpus;
pub mod error;
pub mod hosvd;
pub mod linalg;
pub mod qram;
pub mod qten;
pub mod sim;
pub mod tensor;

pub use alg1::{qhosvd1, Alg1Config};
pub use alg2::qhosvd2;
pub use completion::{CompletionModel, GradientMode, RatingsTensor, TrainConfig};
pub use error::{Error, Result};
pub use hosvd::{hosvd, truncated_hosvd, verify, HosvdResult, VerifyReport};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
pub use qram::{QRamTree, RowAccessor};
pub use sim::{DensityMatrix, QuantumState, SparseHermitian};
pub use tensor::{
    fold, inner_product, mode_multiply, outer_product, unfold, DenseTensor, UnfoldingMatrix,
};
