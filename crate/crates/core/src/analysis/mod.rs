//! Post-processing: exponential-decay fitting of survival curves, the
//! diamond-norm distance between channels, and the gate-dependence scan
//! over noise-parameter grids.

pub mod diamond;
pub mod fit;
pub mod scan;

pub use diamond::{diamond_distance, diamond_distance_with, DiamondOptions, DiamondReport};
pub use fit::{fit_exponential, fit_rb_result, DecayFit, FitPoint};
pub use scan::{gate_dependence_scan, ScanConfig, ScanGrid};
