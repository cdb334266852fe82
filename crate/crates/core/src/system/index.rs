// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("multi-index must be non-empty")]
    Empty,
    #[error("multi-index {0:?} must be strictly increasing axis labels >= 1")]
    NotIncreasing(Vec<usize>),
    #[error("axis {axis} is not in {index}")]
    AxisNotInIndex { index: MultiIndex, axis: usize },
}

/// Strictly increasing, non-empty list of axis labels: the partials an
/// unknown has prescribed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(axes: impl Into<Vec<usize>>) -> Result<MultiIndex, IndexError> {
        let axes = axes.into();
        if axes.is_empty() {
            return Err(IndexError::Empty);
        }
        if axes[0] == 0 || axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(IndexError::NotIncreasing(axes));
        }
        Ok(MultiIndex(axes))
    }

    pub fn single(axis: usize) -> MultiIndex {
        MultiIndex::new(vec![axis]).expect("axis labels start at 1")
    }

    pub fn axes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_axis(&self) -> usize {
        self.0[0]
    }

    pub fn contains(&self, axis: usize) -> bool {
        self.0.binary_search(&axis).is_ok()
    }

    pub fn contains_all(&self, axes: &[usize]) -> bool {
        axes.iter().all(|&a| self.contains(a))
    }

    /// `I ∖ i`, possibly empty.
    pub fn without(&self, axis: usize) -> Vec<usize> {
        self.0.iter().copied().filter(|&a| a != axis).collect()
    }

    /// `I ∖ i` as a multi-index; `None` when it would be empty.
    pub fn removed(&self, axis: usize) -> Option<MultiIndex> {
        MultiIndex::new(self.without(axis)).ok()
    }

    /// `I^c` relative to the given live axes.
    pub fn complement(&self, axes: &[usize]) -> Vec<usize> {
        axes.iter().copied().filter(|&a| !self.contains(a)).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}
