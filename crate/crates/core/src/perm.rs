//! Permutations in one-line notation, composition and block decomposition,
//! and the exceedance structure used by the 321-avoiding counters.
//!
//! Values and positions are 1-based at every public boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `1..=n` in one-line notation, `n >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let mut seen = vec![false; n + 1];
        for &v in &values {
            let idx = v as usize;
            if v == 0 || idx > n {
                return Err(Error::InvalidPermutation(format!(
                    "value {v} out of range 1..={n}"
                )));
            }
            if seen[idx] {
                return Err(Error::InvalidPermutation(format!("value {v} repeated")));
            }
            seen[idx] = true;
        }
        Ok(Permutation { values })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutations have length at least 1");
        Permutation {
            values: (1..=n as u32).collect(),
        }
    }

    /// Builds the permutation order-isomorphic to a slice of distinct values.
    pub fn standardize(values: &[u32]) -> Result<Self> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by_key(|&i| values[i]);
        let mut out = vec![0u32; values.len()];
        for (rank, &i) in order.iter().enumerate() {
            out[i] = rank as u32 + 1;
        }
        Permutation::new(out)
    }

    pub(crate) fn from_values_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// `pi(i)` for a 1-based position `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.values[i - 1]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation { values: inv }
    }

    /// `self * other`: `other` acts on the values above `self.len()`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        let shift = self.len() as u32;
        let mut values = self.values.clone();
        values.extend(other.values.iter().map(|&v| v + shift));
        Permutation { values }
    }

    pub fn blocks(&self) -> BlockDecomposition {
        let mut blocks = Vec::new();
        let mut start = 0usize;
        let mut prefix_max = 0u32;
        for (i, &v) in self.values.iter().enumerate() {
            prefix_max = prefix_max.max(v);
            if prefix_max as usize == i + 1 {
                let shift = start as u32;
                let block = self.values[start..=i].iter().map(|&x| x - shift).collect();
                blocks.push(Block {
                    start: start + 1,
                    perm: Permutation { values: block },
                });
                start = i + 1;
            }
        }
        BlockDecomposition { blocks }
    }

    pub fn is_indecomposable(&self) -> bool {
        let mut prefix_max = 0u32;
        for (i, &v) in self.values[..self.len() - 1].iter().enumerate() {
            prefix_max = prefix_max.max(v);
            if prefix_max as usize == i + 1 {
                return false;
            }
        }
        true
    }

    /// True iff no `i < j < k` has `pi_i > pi_j > pi_k`. Linear time.
    pub fn avoids_321(&self) -> bool {
        let n = self.len();
        let mut suffix_min = vec![u32::MAX; n + 1];
        for i in (0..n).rev() {
            suffix_min[i] = suffix_min[i + 1].min(self.values[i]);
        }
        let mut prefix_max = 0u32;
        for i in 0..n {
            let v = self.values[i];
            if prefix_max > v && suffix_min[i + 1] < v {
                return false;
            }
            prefix_max = prefix_max.max(v);
        }
        true
    }

    pub(crate) fn require_321_avoiding(&self) -> Result<()> {
        if self.avoids_321() {
            Ok(())
        } else {
            Err(Error::Contains321(self.to_string()))
        }
    }

    pub fn displacement_profile(&self) -> DisplacementProfile {
        let deltas: Vec<i64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| v as i64 - (i as i64 + 1))
            .collect();
        let mut eplus = Vec::new();
        let mut eminus = Vec::new();
        for (i, &d) in deltas.iter().enumerate() {
            if d > 0 {
                eplus.push(i + 1);
            } else {
                eminus.push(i + 1);
            }
        }
        let deltastar = deltas.iter().map(|d| d.unsigned_abs()).max().unwrap_or(0);
        DisplacementProfile {
            deltas,
            eplus,
            eminus,
            deltastar,
        }
    }

    /// Compact digit form, e.g. `2413`. Only meaningful for `n <= 9`.
    pub fn to_compact(&self) -> Option<String> {
        if self.len() > 9 {
            return None;
        }
        Some(self.values.iter().map(|v| v.to_string()).collect())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Accepts `"2 4 1 3"` (also comma separated) or the compact `"2413"` when
/// the length is at most nine.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let tokens: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        let values: Vec<u32> = if tokens.len() == 1 && tokens[0].len() > 1 {
            let digits = tokens[0];
            if digits.len() > 9 {
                return Err(Error::InvalidPermutation(format!(
                    "compact form only allowed for length <= 9: {digits:?}"
                )));
            }
            digits
                .chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| Error::InvalidPermutation(format!("bad digit {c:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            tokens
                .iter()
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| Error::InvalidPermutation(format!("bad entry {t:?}")))
                })
                .collect::<Result<_>>()?
        };
        Permutation::new(values)
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(values: Vec<u32>) -> Result<Self> {
        Permutation::new(values)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Vec<u32> {
        p.values
    }
}

/// One indecomposable factor, with its 1-based start position in the parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub perm: Permutation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn count(&self) -> usize {
        self.blocks.len()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.perm.len()).collect()
    }

    pub fn perms(&self) -> impl Iterator<Item = &Permutation> {
        self.blocks.iter().map(|b| &b.perm)
    }

    /// Inverse of [`Permutation::blocks`].
    pub fn compose(&self) -> Permutation {
        let mut iter = self.perms();
        let first = iter.next().expect("decomposition has at least one block").clone();
        iter.fold(first, |acc, b| acc.compose(b))
    }
}

/// `deltas[i-1] = pi_i - i`; `eplus`/`eminus` are the 1-based exceedance
/// and non-exceedance positions; `deltastar = max |delta|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisplacementProfile {
    pub deltas: Vec<i64>,
    pub eplus: Vec<usize>,
    pub eminus: Vec<usize>,
    pub deltastar: u64,
}

/// Block lengths `m_1..m_l` of a permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockProfile {
    pub lengths: Vec<usize>,
}

impl BlockProfile {
    pub fn new(lengths: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.contains(&0) {
            return Err(Error::InvalidArgument(
                "block profile needs at least one block, each of length >= 1".into(),
            ));
        }
        Ok(BlockProfile { lengths })
    }

    pub fn of(pi: &Permutation) -> Self {
        BlockProfile {
            lengths: pi.blocks().lengths(),
        }
    }

    pub fn block_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn total(&self) -> usize {
        self.lengths.iter().sum()
    }

    /// Exponent `(m + l) / 2` of `n` in the occurrence scaling, doubled.
    pub fn scaling_exponent_x2(&self) -> usize {
        self.total() + self.block_count()
    }
}
