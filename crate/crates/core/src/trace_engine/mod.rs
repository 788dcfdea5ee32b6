//! Executable semantics for implicit- and explicit-signal monitors, and a
//! bounded differential equivalence checker built on them.

pub mod exec;
pub mod explore;
pub mod state;
pub mod step;
pub mod wellformed;

pub use exec::{eval_pred, exec_body, ExecError, DEFAULT_FUEL};
pub use explore::*;
pub use state::*;
pub use step::*;
pub use wellformed::*;
