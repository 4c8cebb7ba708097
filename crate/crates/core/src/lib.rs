//! Quaternion-domain infrared/visible image fusion.
//!
//! Images are carried as pure quaternion matrices (`r·i + g·j + b·k`). Each
//! modality goes through lighting suppression ([`qls`]) and a low-rank plus
//! sparse decomposition ([`qlrd`]); detail layers are injected back into the
//! visible layer ([`qaum`]) and the result is fused with the infrared layer by
//! EM under Laplacian priors ([`qhbf`]). [`pipeline`] wires the stages
//! together and [`metrics`] scores the output.

pub mod cli;
pub mod config;
pub mod error;
pub mod imgcodec;
pub mod metrics;
pub mod pipeline;
pub mod proxops;
pub mod qaum;
pub mod qhbf;
pub mod qlrd;
pub mod qls;
pub mod quat;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use imgcodec::RasterImage;
pub use metrics::MetricReport;
pub use pipeline::{fuse_images, FusionResult};
pub use quat::{Quaternion, QuaternionMatrix};
