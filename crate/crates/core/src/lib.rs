//! A spreadsheet calculation core with manual-mode iterative recalculation,
//! plus a workbook compiler that lays out neural-network training schedules
//! as ordinary array formulas.
//!
//! The crate is organized around a small set of ideas:
//!
//! * [`workbook`] — sparse sheets, named ranges, and a line-oriented text
//!   format for building workbooks. Entering a formula evaluates it once,
//!   immediately, against whatever values the sheet currently holds.
//! * [`engine`] — Calculate-Sheet: N top-to-bottom, left-to-right passes in
//!   which every formula reads the latest value already written this pass
//!   (or the previous pass's value if not yet visited) and splices its
//!   result back into the grid before the next formula runs. Circular
//!   references are ordinary, not an error.
//! * [`formula`] — the array-formula language: broadcasting arithmetic,
//!   matrix builtins, and lazy `IF`.
//! * [`builder`] — compiles a network description into a training sheet with
//!   two mirrored regions (a predictor region updated from the corrector's
//!   previous pass, and a corrector region updated from the predictor's
//!   current pass), circular sample counters, and an error monitor.
//! * [`oracle`] — an independent numerical implementation of the same
//!   forward/backward/update rules, used to cross-check the sheet path.
//! * [`pipeline`] — CSV ingestion, validation, scaling, and splits.

pub mod addr;
pub mod builder;
pub mod config;
pub mod engine;
pub mod formula;
pub mod net;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod value;
pub mod workbook;

pub use addr::{CellAddr, RangeRef};
pub use net::{Activation, NetworkSpec, Sampling, WeightInit};
pub use value::{Array, ErrorCode, Scalar, Value};
pub use workbook::Workbook;
