//! Benchmark assembly: instances with modality renditions, prompt bundles and
//! dataset serialization.

pub mod dataset;
pub mod instance;
pub mod prompts;

pub use dataset::{emit_dataset, generate_dataset, load_dataset, Dataset, DatasetMeta, DatasetProfile};
pub use instance::{build_instance, PuzzleInstance, Renditions};
pub use prompts::{build_prompts, Modality, ModalityBundle, MessagePart};
