//! Exhaustive enumeration of `S_n(tau)` and exact occurrence distributions.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::count::{contains_ending_at_last, count_occurrences};
use crate::error::{Error, Result};
use crate::perm::Permutation;

pub const ENUMERATION_CAP: usize = 14;

/// Lexicographic walk over `S_n(tau)`; a prefix containing `tau` is never
/// extended.
pub struct Avoiders {
    n: usize,
    tau: Vec<u32>,
    is_321: bool,
    prefix: Vec<u32>,
    used: Vec<bool>,
    /// Next candidate value to try at each depth.
    next: Vec<u32>,
    /// For 321: (prefix max, largest value below an earlier larger value).
    state: Vec<(u32, u32)>,
    base: usize,
    done: bool,
}

pub fn enumerate_avoiders(n: usize, tau: &Permutation) -> Result<Avoiders> {
    Avoiders::with_prefix(n, tau, &[])
}

impl Avoiders {
    /// Completions of a fixed prefix; used to split work by first value.
    pub fn with_prefix(n: usize, tau: &Permutation, prefix: &[u32]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if n > ENUMERATION_CAP {
            return Err(Error::CapExceeded(format!(
                "enumeration is limited to n <= {ENUMERATION_CAP}"
            )));
        }
        let mut it = Avoiders {
            n,
            tau: tau.values().to_vec(),
            is_321: tau.values() == [3, 2, 1],
            prefix: Vec::with_capacity(n),
            used: vec![false; n + 1],
            next: vec![1; n + 1],
            state: vec![(0, 0)],
            base: prefix.len(),
            done: false,
        };
        for &v in prefix {
            if v == 0 || v as usize > n || it.used[v as usize] || !it.admissible(v) {
                it.done = true;
                return Ok(it);
            }
            it.push(v);
        }
        Ok(it)
    }

    fn admissible(&self, v: u32) -> bool {
        if self.is_321 {
            let (_, low) = *self.state.last().unwrap();
            return v > low;
        }
        let mut extended = self.prefix.clone();
        extended.push(v);
        !contains_ending_at_last(&self.tau, &extended)
    }

    fn push(&mut self, v: u32) {
        let (max, low) = *self.state.last().unwrap();
        let low = if v < max { low.max(v) } else { low };
        self.state.push((max.max(v), low));
        self.used[v as usize] = true;
        self.prefix.push(v);
        self.next[self.prefix.len()] = 1;
    }

    fn pop(&mut self) {
        let v = self.prefix.pop().unwrap();
        self.used[v as usize] = false;
        self.state.pop();
    }
}

impl Iterator for Avoiders {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.done {
            return None;
        }
        loop {
            let d = self.prefix.len();
            if d == self.n {
                let out = Permutation::from_values_unchecked(self.prefix.clone());
                if d == self.base {
                    self.done = true;
                } else {
                    self.pop();
                }
                return Some(out);
            }
            let found = (self.next[d]..=self.n as u32)
                .find(|&c| !self.used[c as usize] && self.admissible(c));
            match found {
                Some(c) => {
                    self.next[d] = c + 1;
                    self.push(c);
                }
                None => {
                    if d == self.base {
                        self.done = true;
                        return None;
                    }
                    self.pop();
                }
            }
        }
    }
}

/// Exact histogram of `n_sigma` over `S_n(tau)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistributionTable {
    pub n: usize,
    pub sigma: Permutation,
    pub tau: Permutation,
    #[serde(serialize_with = "ser_counts")]
    pub counts: BTreeMap<BigUint, BigUint>,
}

fn ser_counts<S: serde::Serializer>(
    counts: &BTreeMap<BigUint, BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(counts.len()))?;
    for (k, v) in counts {
        map.serialize_entry(&k.to_string(), &v.to_string())?;
    }
    map.end()
}

impl DistributionTable {
    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    fn raw_moment(&self, power: u32) -> BigRational {
        let sum: BigUint = self.counts.iter().map(|(k, v)| k.pow(power) * v).sum();
        BigRational::new(BigInt::from(sum), BigInt::from(self.total()))
    }

    pub fn mean(&self) -> BigRational {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> BigRational {
        let mean = self.mean();
        self.raw_moment(2) - &mean * &mean
    }

    /// `# key=value` metadata line, then `value,count` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# n={},sigma={},tau={},total={},mean={},variance={}",
            self.n,
            self.sigma,
            self.tau,
            self.total(),
            self.mean(),
            self.variance()
        )?;
        writeln!(out, "value,count")?;
        for (k, v) in &self.counts {
            writeln!(out, "{k},{v}")?;
        }
        Ok(())
    }
}

fn histogram(sigma: &Permutation, perms: impl Iterator<Item = Permutation>) -> BTreeMap<BigUint, BigUint> {
    let mut counts = BTreeMap::new();
    for pi in perms {
        *counts.entry(count_occurrences(sigma, &pi)).or_insert_with(BigUint::zero) += 1u32;
    }
    counts
}

/// Histogram of occurrence counts of `sigma` over all of `S_n(tau)`; the
/// work is split by the first entry of `pi`.
pub fn exact_distribution(sigma: &Permutation, n: usize, tau: &Permutation) -> Result<DistributionTable> {
    enumerate_avoiders(n, tau)?;
    let parts: Vec<BTreeMap<BigUint, BigUint>> = (1..=n as u32)
        .into_par_iter()
        .map(|first| Avoiders::with_prefix(n, tau, &[first]).map(|it| histogram(sigma, it)))
        .collect::<Result<_>>()?;
    let mut counts = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *counts.entry(k).or_insert_with(BigUint::zero) += v;
        }
    }
    Ok(DistributionTable {
        n,
        sigma: sigma.clone(),
        tau: tau.clone(),
        counts,
    })
}
