//! Independent reference implementations and property suites used to check
//! the `extba` crate: a bit-serial field, a subset-interpolation decoder,
//! exhaustive binary graded consensus enumeration, and randomized adversary
//! sweeps over every protocol layer.

pub mod bgc_enum;
pub mod ref_gf;
pub mod ref_rs;
pub mod report;
pub mod suites;

pub use report::SuiteReport;
