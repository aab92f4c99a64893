//! Size-based grouping rule for real cascade datasets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cascade::Cascade;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeBin {
    Small,
    Medium,
    Large,
}

impl fmt::Display for SizeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeBin::Small => "small",
            SizeBin::Medium => "medium",
            SizeBin::Large => "large",
        })
    }
}

/// `>= 100` is Large, `[50, 100)` Medium, below 50 Small.
pub fn size_bin(average_size: f64) -> SizeBin {
    if average_size >= 100.0 {
        SizeBin::Large
    } else if average_size >= 50.0 {
        SizeBin::Medium
    } else {
        SizeBin::Small
    }
}

/// Mean number of events per cascade, or `None` for an empty dataset.
pub fn average_size(cascades: &[Cascade]) -> Option<f64> {
    if cascades.is_empty() {
        return None;
    }
    Some(cascades.iter().map(Cascade::len).sum::<usize>() as f64 / cascades.len() as f64)
}

/// Bin for a whole dataset.
pub fn dataset_bin(cascades: &[Cascade]) -> Option<SizeBin> {
    average_size(cascades).map(size_bin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert_eq!(size_bin(100.0), SizeBin::Large);
        assert_eq!(size_bin(99.9), SizeBin::Medium);
        assert_eq!(size_bin(50.0), SizeBin::Medium);
        assert_eq!(size_bin(49.0), SizeBin::Small);
    }
}
