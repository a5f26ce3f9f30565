//! Woven-fabric image analysis: thread density, yarn metrics, weave
//! pattern recognition and defect detection, plus a synthetic fabric
//! renderer used as ground truth.

mod error;
pub mod imgcore;
pub mod wiener;
pub mod spectral;
pub mod density;
pub mod metrics;
pub mod weave;
pub mod synthgen;
pub mod defect;
pub mod fixtures;
pub mod verify;

pub use error::{Error, Result};
pub use imgcore::{BinaryImage, GrayImage, Illumination, NiblackParams, Rect};
pub use wiener::{YarnAxis, YarnOutlines};
pub use density::{DensityParams, DensityResult, StandardLineCount};
pub use metrics::{AxisMetrics, FabricMetrics};
pub use weave::{WeaveClass, WeaveMatrix};
pub use synthgen::SynthSpec;
pub use defect::{DefectRegion, DefectReport, EdgeMethod, Polarity};
pub use verify::{verify, VerifyReport};
