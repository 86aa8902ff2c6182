use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the two time slices being compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Period {
    T1,
    T2,
}

impl Period {
    pub const BOTH: [Period; 2] = [Period::T1, Period::T2];

    /// Lower-case directory name used for per-period outputs (`t1`, `t2`).
    pub fn dir_name(self) -> &'static str {
        match self {
            Period::T1 => "t1",
            Period::T2 => "t2",
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::T1 => f.write_str("T1"),
            Period::T2 => f.write_str("T2"),
        }
    }
}

impl FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T1" | "t1" | "1" => Ok(Period::T1),
            "T2" | "t2" | "2" => Ok(Period::T2),
            other => Err(format!("unknown period {other:?}")),
        }
    }
}
