//! Convergence studies across truncation sizes: Hausdorff distances,
//! cluster tracking, pollution verdicts, and file output.

mod convergence;
mod emit;
mod family;
mod hausdorff;
mod portrait;

pub use convergence::{
    classify_pollution, convergence_study, probe_grid, symbol_components, ComponentCount, ConvergenceReport, LevelData,
    PairDistance, PollutionFlag, Reference, SublevelSet, Verdict, CLUSTER_RADIUS_FRACTION,
};
pub use emit::{emit_portrait, emit_report, portrait_svg, report_svg, write_json, OutputFormat};
pub use family::OperatorFamily;
pub use hausdorff::{directed_distance, hausdorff};
pub use portrait::SpectralPortrait;
