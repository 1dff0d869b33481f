//! Command-line front end for `repcut`: instance files, solver dispatch,
//! validation, reductions and oracle audits.
//!
//! Exit codes: 0 success, 1 rejected solution or solver failure, 2 bad
//! arguments or unparsable input, 3 infeasible instance, 4 refused by a size
//! cap or oracle budget.

pub mod algorithms;
pub mod commands;
pub mod format;
