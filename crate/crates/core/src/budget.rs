use serde::{Deserialize, Serialize};

/// Environment variable overriding the default amplitude budget.
pub const BUDGET_ENV: &str = "NULLCODE_BUDGET";

pub const DEFAULT_AMPLITUDES: u64 = 1 << 26;
pub const DEFAULT_ENUMERATION: u64 = 1 << 22;

/// Size limits for exhaustive enumeration and simulated states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest code (or key space) that may be enumerated.
    pub enumeration: u64,
    /// Largest number of nonzero amplitudes in a simulated state.
    pub amplitudes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        let amplitudes = std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_AMPLITUDES);
        Budget { enumeration: DEFAULT_ENUMERATION, amplitudes }
    }
}

impl Budget {
    pub fn with_amplitudes(mut self, amplitudes: u64) -> Self {
        self.amplitudes = amplitudes;
        self
    }
}
