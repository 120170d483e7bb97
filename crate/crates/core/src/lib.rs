//! Deterministic autoexposure simulation.
//!
//! A scene is a time series of exposure stacks: for every time step, one
//! linear RAW frame per level of a fixed shutter-speed ladder. AE
//! controllers meter frames, pick the next exposure index, and the
//! simulator replays the loop so different controllers can be compared on
//! identical inputs.
//!
//! ```
//! use ae_sim::prelude::*;
//!
//! let ladder = ExposureLadder::standard();
//! let script = scene::bundled::scene(1).unwrap().with_size(24, 16).with_timesteps(4);
//! let seq = scene::synthesize_scene(&script, &ladder).unwrap();
//! let trace = sim::run(&seq, &RunOptions::new(Algorithm::Global, AeConfig::default())).unwrap();
//! assert_eq!(trace.steps.len(), 4);
//! ```

pub mod ae;
pub mod error;
pub mod exposure;
pub mod histogram;
pub mod image;
pub mod isp;
pub mod saliency;
pub mod scene;
pub mod sim;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::ae::{AeConfig, AeDecision, AeInput, AeState, Algorithm};
    pub use crate::error::{Error, Result};
    pub use crate::exposure::{ExposureLadder, ExposureStack, ShutterSpeed};
    pub use crate::histogram::{ClipConfig, WeightMap, WeightedHistogram};
    pub use crate::image::{BoundingBox, RawImage, SrgbImage};
    pub use crate::isp::IspProfile;
    pub use crate::saliency::SaliencyConfig;
    pub use crate::scene::{self, SceneScript, SceneSequence};
    pub use crate::sim::{self, ControlMode, RunOptions, SimulationTrace};
}
