use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LevelMatrix, MultiIndex};

/// The basis function `theta~_J[A]` of level `M`, with `A` given by its
/// index in the canonical enumeration.
///
/// Symbols order by level entries, then `J` entries, then characteristic
/// index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisSymbol {
    pub level: LevelMatrix,
    pub j: MultiIndex,
    pub char_index: usize,
}

impl BasisSymbol {
    pub fn new(level: LevelMatrix, j: MultiIndex, char_index: usize) -> Result<Self> {
        let (rows, g) = j.shape();
        if rows != level.h() {
            return Err(Error::DimensionMismatch(format!(
                "J has {rows} rows but the level has degree {}",
                level.h()
            )));
        }
        let count = level.characteristic_count(g);
        if char_index >= count {
            return Err(Error::IndexOutOfRange(format!(
                "characteristic {char_index} of {count} for level {level}"
            )));
        }
        Ok(BasisSymbol { level, j, char_index })
    }

    /// The theta series `theta[A]` itself (`J = 0`).
    pub fn theta(level: LevelMatrix, g: usize, char_index: usize) -> Result<Self> {
        let h = level.h();
        Self::new(level, MultiIndex::zeros(h, g), char_index)
    }

    pub fn h(&self) -> usize {
        self.level.h()
    }

    pub fn g(&self) -> usize {
        self.j.shape().1
    }

    pub(crate) fn with_j(&self, j: MultiIndex) -> Self {
        BasisSymbol {
            level: self.level.clone(),
            j,
            char_index: self.char_index,
        }
    }
}

impl fmt::Display for BasisSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(M={}, J={}, A#{})", self.level, self.j, self.char_index)
    }
}
