/// Environment variable overriding [`Budget::max_order`].
pub const BUDGET_ENV: &str = "CUSPCOUNT_BUDGET";

/// Limits for exhaustive enumeration over finite groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest discriminant group order for which full enumeration runs.
    pub max_order: u64,
    /// Largest automorphism group (or closure) materialized in memory.
    pub max_group: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_order: 10_000,
            max_group: 1_000_000,
        }
    }
}

impl Budget {
    pub fn with_max_order(max_order: u64) -> Self {
        Budget {
            max_order,
            ..Budget::default()
        }
    }

    /// Default budget, with `CUSPCOUNT_BUDGET` applied when set and valid.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .filter(|&n| n > 0)
            .map_or_else(Budget::default, Budget::with_max_order)
    }
}
