//! Exchangeable feature probability functions: evaluation, consistency
//! checks, the induced Markov chain of feature counts, boundary limits and
//! sampling.
//!
//! ```
//! use efpf_core::efpf::{efpf_ibp3, FeatureCounts, Ibp3Params};
//!
//! let p = Ibp3Params::new(1.0, 0.5, 1.0).unwrap();
//! let fc = FeatureCounts::new(3, vec![1, 2]).unwrap();
//! let log_prob = efpf_ibp3(&p, &fc).log_mag();
//! assert!((log_prob + 5.617_592_351_485_517).abs() < 1e-12);
//! ```

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// oracle constants are written with every digit they were computed to
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod boundary;
pub mod consistency;
pub mod efpf;
pub mod error;
pub mod markov;
pub mod numerics;
pub mod sampler;

pub use error::{EfpfError, Result};
pub use numerics::LogReal;
