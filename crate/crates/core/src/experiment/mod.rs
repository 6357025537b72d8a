//! Experiment harness: configuration files, fixed and sequential runs over
//! many replications, run archives, comparisons, validation, and planning.

pub mod archive;
pub mod compare;
pub mod plan;
pub mod runner;
pub mod spec;
pub mod validate;

pub use archive::{ArchiveFooter, ArchiveWriter, RunArchive, ARCHIVE_VERSION};
pub use compare::{compare_archives, MEASURE_IDENTIFIER};
pub use plan::{time_replication, PlanEstimate, SdSource};
pub use runner::{run_in_memory, run_to_file, run_with, RunReport};
pub use spec::{locate_key, ExperimentSpec, ModeKind, RunMode};
pub use validate::{reduced_config, validate, ValidationCheck, ValidationReport};
