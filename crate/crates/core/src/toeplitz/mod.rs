//! Banded Toeplitz operators: symbols, finite sections, compact
//! perturbations, symbol curves and the winding-number description of the
//! spectrum.

mod components;
mod curve;
mod symbol;

pub use components::{component_probe, Component, ComponentMap};
pub use curve::{
    segment_distance, spectrum_classify, symbol_curve, winding_number, SpectrumClass, SymbolCurve, DEFAULT_SAMPLES,
    MIN_SAMPLES,
};
pub use symbol::{apply_perturbation, finite_section, fish_section, PerturbationSpec, ToeplitzSymbol};
