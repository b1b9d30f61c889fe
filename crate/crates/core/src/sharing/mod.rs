//! Reuse mechanisms that cut fetches and recomputation: the per-chunk
//! deduplication table and the static edge-list cache. Vertical reuse
//! (parent bindings and stored intersections) lives in the engine's slot
//! resolution and in [`extend`](crate::plan::extend).

mod cache;
mod dedup;

pub use cache::{CacheOutcome, EdgeListCache};
pub use dedup::{Claim, DedupTable};

/// On/off switches for the four sharing mechanisms. Counts never depend on
/// them, only traffic and memory do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharingOptions {
    /// Children refer to parent-held edge lists instead of copying them.
    pub vertical_reuse: bool,
    /// Children start from the parent's stored intersection.
    pub computation_reuse: bool,
    /// Same-chunk embeddings share one fetch of a vertex's list.
    pub horizontal_sharing: bool,
    /// Remote lists of high-degree vertices are kept in a static cache.
    pub cache: bool,
}

impl Default for SharingOptions {
    fn default() -> Self {
        Self { vertical_reuse: true, computation_reuse: true, horizontal_sharing: true, cache: true }
    }
}

impl SharingOptions {
    /// All 16 on/off combinations, in bit order.
    pub fn all_combinations() -> impl Iterator<Item = SharingOptions> {
        (0u8..16).map(|m| SharingOptions {
            vertical_reuse: m & 1 != 0,
            computation_reuse: m & 2 != 0,
            horizontal_sharing: m & 4 != 0,
            cache: m & 8 != 0,
        })
    }
}
