//! Target parsing and target-relevance scoring.

pub mod backend;
pub mod bands;
pub mod cache;
pub mod engine;
pub mod mock;
pub mod remote;
pub mod sanitize;

pub use backend::{BackendError, RelevanceBackend};
pub use bands::{Band, BandPoint, BandTable};
pub use cache::LruTtlCache;
pub use engine::{CacheConfig, DegradationEvent, RelevanceEngine};
pub use mock::{CooccurrenceTable, MockBackend, SceneKit, Vocabulary};
pub use remote::{RemoteBackend, RemoteConfig};
pub use sanitize::LabelSanitizer;
