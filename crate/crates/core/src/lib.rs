#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod field;
pub mod flux;
pub mod harmonics;
pub mod io;
pub mod linalg;
pub mod mollifier;
pub mod moduli;
pub mod morera;
pub mod operator;
pub mod poly;
pub mod quadrature;
pub mod symbol;
