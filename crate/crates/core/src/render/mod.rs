//! Synthesis of the multiplexed sensor frame.

pub mod capture;
pub mod draw;
pub mod geometry;
pub mod noise;
pub mod scene;
pub mod sensor;

pub use capture::{extract_subimages, render_capture, CaptureLayout, RawCapture};
pub use draw::{project_target, render_subimage};
pub use geometry::{capture_layout, subimage_geometry, SubimageGeometry, Window};
pub use noise::apply_noise;
pub use scene::{Opacity, PlanarTarget, SceneSpec, Texture};
pub use sensor::SensorSpec;
