//! Bound states of the hyperbolic asymmetric double well
//! `U(z) = (-w1 (1 + tanh²z) + w2 - w3 tanh z) sech²z` from confluent Heun series
//! matched by their Wronskian, with a finite-difference cross-check.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod eigensolver;
pub mod error;
pub mod frobenius;
pub mod heun;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod qes;
pub mod threshold;
