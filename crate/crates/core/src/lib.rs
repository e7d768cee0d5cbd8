// Range checks are written `!(x >= lo)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod executor;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod scenarios;
pub mod scheme;
pub mod timestep;
