//! Declared device descriptions: core count and memory hierarchy.
//!
//! Profiles are plain JSON files, e.g.
//!
//! ```json
//! {
//!   "name": "raspberry-pi-4",
//!   "core_count": 4,
//!   "levels": [
//!     { "label": "L1", "capacity": 32768, "shared": false },
//!     { "label": "L2", "capacity": 1048576, "shared": true },
//!     { "label": "DRAM", "capacity": 4294967296, "shared": true }
//!   ]
//! }
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read profile {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed profile")]
    Parse(#[from] serde_json::Error),
    #[error("invalid profile: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LevelName {
    L1,
    L2,
    L3,
    #[serde(rename = "DRAM")]
    Dram,
}

impl LevelName {
    pub fn is_cache(self) -> bool {
        self != LevelName::Dram
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LevelName::L1 => "L1",
            LevelName::L2 => "L2",
            LevelName::L3 => "L3",
            LevelName::Dram => "DRAM",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "L1" => Some(LevelName::L1),
            "L2" => Some(LevelName::L2),
            "L3" => Some(LevelName::L3),
            "DRAM" => Some(LevelName::Dram),
            _ => None,
        }
    }
}

impl fmt::Display for LevelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryLevel {
    pub label: LevelName,
    /// Bytes.
    pub capacity: u64,
    /// Shared between cores (true) or private to each core (false).
    pub shared: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    /// Falls back to the host's available parallelism when omitted.
    #[serde(default = "host_cores")]
    pub core_count: usize,
    pub levels: Vec<MemoryLevel>,
}

pub fn host_cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl DeviceProfile {
    pub fn new(name: impl Into<String>, core_count: usize, levels: Vec<MemoryLevel>) -> Result<Self, ProfileError> {
        let p = DeviceProfile {
            name: name.into(),
            core_count,
            levels,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let p: DeviceProfile = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.core_count == 0 {
            return Err(ProfileError::Invalid("core_count must be at least 1".into()));
        }
        if self.levels.is_empty() {
            return Err(ProfileError::Invalid("at least one memory level is required".into()));
        }
        for lvl in &self.levels {
            if lvl.capacity == 0 {
                return Err(ProfileError::Invalid(format!("{} has zero capacity", lvl.label)));
            }
        }
        for pair in self.levels.windows(2) {
            if pair[1].capacity <= pair[0].capacity {
                return Err(ProfileError::Invalid(format!(
                    "level capacities must strictly increase ({} {} B, then {} {} B)",
                    pair[0].label, pair[0].capacity, pair[1].label, pair[1].capacity
                )));
            }
            if pair[1].label <= pair[0].label {
                return Err(ProfileError::Invalid(format!(
                    "levels out of order: {} after {}",
                    pair[1].label, pair[0].label
                )));
            }
        }
        Ok(())
    }

    pub fn level(&self, name: LevelName) -> Option<&MemoryLevel> {
        self.levels.iter().find(|l| l.label == name)
    }

    /// The level immediately faster than `name`, if any.
    pub fn faster_than(&self, name: LevelName) -> Option<&MemoryLevel> {
        let idx = self.levels.iter().position(|l| l.label == name)?;
        idx.checked_sub(1).map(|i| &self.levels[i])
    }

    pub fn caches(&self) -> impl Iterator<Item = &MemoryLevel> {
        self.levels.iter().filter(|l| l.label.is_cache())
    }

    pub fn largest_cache(&self) -> Option<&MemoryLevel> {
        self.caches().max_by_key(|l| l.capacity)
    }

    pub fn smallest_cache(&self) -> Option<&MemoryLevel> {
        self.caches().min_by_key(|l| l.capacity)
    }

    pub fn dram(&self) -> Option<&MemoryLevel> {
        self.level(LevelName::Dram)
    }

    pub fn with_cores(mut self, cores: usize) -> Self {
        self.core_count = cores.max(1);
        self
    }
}
