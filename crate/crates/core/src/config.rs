use std::path::PathBuf;

/// Tunables shared by all computations.
#[derive(Clone, Debug)]
pub struct Settings {
    /// Starting working precision in bits; refinement may go up to 16× this.
    pub precision_bits: u32,
    /// Maximum number of digit strings a single enumeration may visit.
    pub budget: u64,
    /// Largest degree accepted by the factor search.
    pub degree_cap: usize,
    /// Square-root steps attempted before giving up.
    pub max_reduction_steps: usize,
    /// Extra digits between a measured level and the cylinder depth.
    pub guard: usize,
    /// Largest `N` accepted for trace series.
    pub trace_cap: usize,
    /// Directory for cached level sets; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            precision_bits: 128,
            budget: 1 << 26,
            degree_cap: 24,
            max_reduction_steps: 6,
            guard: 8,
            trace_cap: 1000,
            cache_dir: None,
        }
    }
}

impl Settings {
    pub fn max_bits(&self) -> u32 {
        self.precision_bits.saturating_mul(16)
    }
}
