//! Gridworld episodes: scenarios, detector emulation, policies, traces and
//! SR/SPL evaluation.

pub mod batch;
pub mod detect;
pub mod episode;
pub mod generate;
pub mod metrics;
pub mod policy;
pub mod scenario;
pub mod trace;

pub use batch::{run_batch, summarize, BatchManifest, BatchRow};
pub use detect::{detect, DetectorConfig};
pub use episode::{build_engine, run_episode, run_episode_traced, EpisodeOutcome};
pub use generate::{generate_household, generate_scene, GeneratedScene, GeneratorConfig};
pub use metrics::{compute_metrics, oracle_shortest, EpisodeResult, Metrics, Termination};
pub use policy::{baseline_policies, Policy};
pub use scenario::{LoadedScenario, SceneObject, Scenario};
pub use trace::{Trace, TraceRecord};
