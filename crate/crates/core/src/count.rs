//! Occurrence counting.
//!
//! Three exact counters:
//!
//! * [`count_occurrences`] works for any host permutation; it backtracks over
//!   index tuples and prunes as soon as the chosen prefix stops being
//!   order-isomorphic to the pattern.
//! * [`count_occurrences_block_fast`] needs an indecomposable pattern and a
//!   321-avoiding host. An index tuple is an occurrence iff every pattern
//!   exceedance lands on a host exceedance, every non-exceedance on a
//!   non-exceedance, and, for each pattern pair `i < j` with `i` an
//!   exceedance and `j` not, `sigma_i > sigma_j` exactly when
//!   `k_j - k_i < |Delta_{k_i}| + |Delta_{k_j}|`. All positions of an
//!   occurrence also lie within `2 m Delta*` of the first one, so only a
//!   short window after each start is searched.
//! * [`count_occurrences_decomposable`] splits the pattern into blocks, lists
//!   the occurrences of each block with the windowed search, and counts
//!   chains of block occurrences that are separated in both position and
//!   value with a Fenwick-tree sweep.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Number of occurrences of `sigma` in `pi`; zero when `sigma` is longer.
pub fn count_occurrences(sigma: &Permutation, pi: &Permutation) -> BigUint {
    BigUint::from(Backtrack::new(sigma.values(), pi.values()).count())
}

/// True iff `pi` has no occurrence of `tau`.
pub fn is_avoiding(tau: &Permutation, pi: &Permutation) -> bool {
    if tau.len() == 3 && tau.values() == [3, 2, 1] {
        return pi.avoids_321();
    }
    !Backtrack::new(tau.values(), pi.values()).exists()
}

/// True iff `values` (distinct, not necessarily `1..=n`) contains `pattern`
/// with the last pattern entry matched to the last element of `values`.
pub(crate) fn contains_ending_at_last(pattern: &[u32], values: &[u32]) -> bool {
    let n = values.len();
    if pattern.len() > n {
        return false;
    }
    let mut bt = Backtrack::new(pattern, values);
    bt.last_fixed = true;
    bt.exists()
}

struct Backtrack<'a> {
    host: &'a [u32],
    m: usize,
    /// For pattern index `j`, the earlier index holding the largest smaller
    /// pattern value, and the one holding the smallest larger value.
    lower: Vec<Option<usize>>,
    upper: Vec<Option<usize>>,
    chosen: Vec<usize>,
    last_fixed: bool,
}

impl<'a> Backtrack<'a> {
    fn new(pattern: &[u32], host: &'a [u32]) -> Self {
        let m = pattern.len();
        let mut lower = vec![None; m];
        let mut upper = vec![None; m];
        for j in 0..m {
            for i in 0..j {
                if pattern[i] < pattern[j] {
                    if lower[j].is_none_or(|l: usize| pattern[l] < pattern[i]) {
                        lower[j] = Some(i);
                    }
                } else if upper[j].is_none_or(|u: usize| pattern[u] > pattern[i]) {
                    upper[j] = Some(i);
                }
            }
        }
        Backtrack {
            host,
            m,
            lower,
            upper,
            chosen: vec![0; m],
            last_fixed: false,
        }
    }

    fn fits(&self, j: usize, v: u32) -> bool {
        self.lower[j].is_none_or(|l| self.host[self.chosen[l]] < v)
            && self.upper[j].is_none_or(|u| self.host[self.chosen[u]] > v)
    }

    fn range(&self, j: usize) -> std::ops::Range<usize> {
        let n = self.host.len();
        let start = if j == 0 { 0 } else { self.chosen[j - 1] + 1 };
        if self.last_fixed && j + 1 == self.m {
            return start.max(n - 1)..n;
        }
        // leave room for the remaining m - j - 1 entries
        start..(n + j + 1).saturating_sub(self.m).max(start)
    }

    fn count(&mut self) -> u128 {
        if self.m > self.host.len() {
            return 0;
        }
        self.count_from(0)
    }

    fn count_from(&mut self, j: usize) -> u128 {
        let mut total = 0u128;
        for pos in self.range(j) {
            let v = self.host[pos];
            if !self.fits(j, v) {
                continue;
            }
            if j + 1 == self.m {
                total += 1;
            } else {
                self.chosen[j] = pos;
                total += self.count_from(j + 1);
            }
        }
        total
    }

    fn exists(&mut self) -> bool {
        if self.m > self.host.len() {
            return false;
        }
        self.exists_from(0)
    }

    fn exists_from(&mut self, j: usize) -> bool {
        for pos in self.range(j) {
            let v = self.host[pos];
            if !self.fits(j, v) {
                continue;
            }
            if j + 1 == self.m {
                return true;
            }
            self.chosen[j] = pos;
            if self.exists_from(j + 1) {
                return true;
            }
        }
        false
    }
}

/// `(2m)^(m-1) * n * Delta*^(m-1)`, the a priori bound on the number of
/// occurrences of a block of length `m` in a 321-avoiding permutation.
pub fn occurrence_bound(m: usize, n: usize, deltastar: u64) -> BigUint {
    let e = (m - 1) as u32;
    BigUint::from(2 * m).pow(e) * BigUint::from(n) * BigUint::from(deltastar).pow(e)
}

/// Windowed counter for an indecomposable pattern of length `> 1` in a
/// 321-avoiding host.
pub fn count_occurrences_block_fast(sigma: &Permutation, pi: &Permutation) -> Result<BigUint> {
    let search = WindowSearch::new(sigma, pi)?;
    let mut total = 0u128;
    search.for_each(|_| total += 1);
    Ok(BigUint::from(total))
}

/// Exact counter for any pattern in a 321-avoiding host, using the block
/// structure of `sigma`.
pub fn count_occurrences_decomposable(sigma: &Permutation, pi: &Permutation) -> Result<BigUint> {
    pi.require_321_avoiding()?;
    if !sigma.avoids_321() || sigma.len() > pi.len() {
        return Ok(BigUint::zero());
    }
    let decomposition = sigma.blocks();
    let mut layers: Vec<Vec<Span>> = Vec::with_capacity(decomposition.count());
    for block in decomposition.perms() {
        layers.push(block_spans(block, pi)?);
    }

    let n = pi.len();
    let mut weights: Vec<BigUint> = vec![BigUint::one(); layers[0].len()];
    for p in 1..layers.len() {
        let prev = &layers[p - 1];
        let next = &layers[p];
        let mut prev_order: Vec<usize> = (0..prev.len()).collect();
        prev_order.sort_unstable_by_key(|&i| prev[i].last_pos);
        let mut next_order: Vec<usize> = (0..next.len()).collect();
        next_order.sort_unstable_by_key(|&i| next[i].first_pos);

        let mut tree = Fenwick::new(n);
        let mut next_weights = vec![BigUint::zero(); next.len()];
        let mut cursor = 0;
        for &o in &next_order {
            let span = next[o];
            while cursor < prev_order.len() && prev[prev_order[cursor]].last_pos < span.first_pos {
                let q = prev_order[cursor];
                if !weights[q].is_zero() {
                    tree.add(prev[q].max_val as usize, &weights[q]);
                }
                cursor += 1;
            }
            next_weights[o] = tree.prefix(span.min_val as usize - 1);
        }
        weights = next_weights;
    }
    Ok(weights.into_iter().sum())
}

/// Occurrence of one block, reduced to what chaining needs.
#[derive(Clone, Copy, Debug)]
struct Span {
    first_pos: u32,
    last_pos: u32,
    min_val: u32,
    max_val: u32,
}

fn block_spans(block: &Permutation, pi: &Permutation) -> Result<Vec<Span>> {
    let values = pi.values();
    if block.len() == 1 {
        return Ok(values
            .iter()
            .enumerate()
            .map(|(i, &v)| Span {
                first_pos: i as u32,
                last_pos: i as u32,
                min_val: v,
                max_val: v,
            })
            .collect());
    }
    let search = WindowSearch::new(block, pi)?;
    let mut spans = Vec::new();
    search.for_each(|ks| {
        let (mut lo, mut hi) = (u32::MAX, 0u32);
        for &k in ks {
            lo = lo.min(values[k]);
            hi = hi.max(values[k]);
        }
        spans.push(Span {
            first_pos: ks[0] as u32,
            last_pos: ks[ks.len() - 1] as u32,
            min_val: lo,
            max_val: hi,
        });
    });
    Ok(spans)
}

/// Enumerates occurrences of an indecomposable pattern in a 321-avoiding
/// host, visiting 0-based index tuples.
struct WindowSearch {
    m: usize,
    /// Whether pattern index `j` is an exceedance.
    plus: Vec<bool>,
    /// For pattern index `j`: earlier exceedances `i` paired with whether
    /// `(i, j)` is an inversion. Empty when `j` is an exceedance.
    checks: Vec<Vec<(usize, bool)>>,
    abs_delta: Vec<u64>,
    plus_pos: Vec<usize>,
    minus_pos: Vec<usize>,
    deltastar: u64,
}

impl WindowSearch {
    fn new(sigma: &Permutation, pi: &Permutation) -> Result<Self> {
        if sigma.len() < 2 {
            return Err(Error::TrivialBlock);
        }
        if !sigma.is_indecomposable() {
            return Err(Error::Decomposable(sigma.to_string()));
        }
        sigma.require_321_avoiding()?;
        pi.require_321_avoiding()?;

        let s = sigma.values();
        let m = s.len();
        let plus: Vec<bool> = (0..m).map(|j| s[j] as usize > j + 1).collect();
        let checks = (0..m)
            .map(|j| {
                if plus[j] {
                    Vec::new()
                } else {
                    (0..j).filter(|&i| plus[i]).map(|i| (i, s[i] > s[j])).collect()
                }
            })
            .collect();

        let profile = pi.displacement_profile();
        Ok(WindowSearch {
            m,
            plus,
            checks,
            abs_delta: profile.deltas.iter().map(|d| d.unsigned_abs()).collect(),
            plus_pos: profile.eplus.iter().map(|&i| i - 1).collect(),
            minus_pos: profile.eminus.iter().map(|&i| i - 1).collect(),
            deltastar: profile.deltastar,
        })
    }

    fn for_each<F: FnMut(&[usize])>(&self, mut visit: F) {
        if self.deltastar == 0 {
            return;
        }
        let window = 2 * self.m as u64 * self.deltastar;
        let mut ks = vec![0usize; self.m];
        let starts = if self.plus[0] { &self.plus_pos } else { &self.minus_pos };
        for &k1 in starts {
            ks[0] = k1;
            let limit = k1.saturating_add(window as usize);
            self.extend(1, limit, &mut ks, &mut visit);
        }
    }

    fn extend<F: FnMut(&[usize])>(&self, j: usize, limit: usize, ks: &mut [usize], visit: &mut F) {
        if j == self.m {
            visit(ks);
            return;
        }
        let mut hi = limit;
        for &(i, inverted) in &self.checks[j] {
            if inverted {
                // k_j - k_i < |D_{k_i}| + |D_{k_j}| <= |D_{k_i}| + D*
                let reach = ks[i] + (self.abs_delta[ks[i]] + self.deltastar) as usize - 1;
                hi = hi.min(reach);
            }
        }
        let pool = if self.plus[j] { &self.plus_pos } else { &self.minus_pos };
        let from = pool.partition_point(|&x| x <= ks[j - 1]);
        for &k in &pool[from..] {
            if k > hi {
                break;
            }
            let dk = self.abs_delta[k];
            let ok = self.checks[j].iter().all(|&(i, inverted)| {
                let close = ((k - ks[i]) as u64) < self.abs_delta[ks[i]] + dk;
                close == inverted
            });
            if ok {
                ks[j] = k;
                self.extend(j + 1, limit, ks, visit);
            }
        }
    }
}

/// Prefix sums of big-integer weights over values `1..=n`.
struct Fenwick {
    tree: Vec<BigUint>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![BigUint::zero(); n + 1],
        }
    }

    fn add(&mut self, mut i: usize, w: &BigUint) {
        while i < self.tree.len() {
            self.tree[i] += w;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> BigUint {
        let mut s = BigUint::zero();
        while i > 0 {
            s += &self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn c(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(count_occurrences(&p("21"), &p("321")), c(3));
        assert_eq!(count_occurrences(&p("12"), &p("1234")), c(6));
        assert_eq!(count_occurrences(&p("231"), &p("2413")), c(1));
        assert_eq!(count_occurrences(&p("1234"), &p("21")), c(0));
        assert_eq!(count_occurrences(&p("1"), &p("2413")), c(4));
    }

    #[test]
    fn block_fast_examples() {
        assert_eq!(count_occurrences_block_fast(&p("21"), &p("2413")).unwrap(), c(3));
        assert_eq!(count_occurrences_block_fast(&p("231"), &p("2413")).unwrap(), c(1));
        assert_eq!(count_occurrences_block_fast(&p("21"), &p("1234")).unwrap(), c(0));
    }

    #[test]
    fn block_fast_rejects_contract_violations() {
        assert!(matches!(
            count_occurrences_block_fast(&p("2314"), &p("2413")),
            Err(Error::Decomposable(_))
        ));
        assert!(matches!(
            count_occurrences_block_fast(&p("21"), &p("321")),
            Err(Error::Contains321(_))
        ));
        assert!(matches!(
            count_occurrences_block_fast(&p("1"), &p("21")),
            Err(Error::TrivialBlock)
        ));
    }

    #[test]
    fn decomposable_examples() {
        assert_eq!(count_occurrences_decomposable(&p("1243"), &p("1234")).unwrap(), c(0));
        assert_eq!(count_occurrences_decomposable(&p("12"), &p("2413")).unwrap(), c(3));
        assert_eq!(count_occurrences_decomposable(&p("123"), &p("123456")).unwrap(), c(20));
        assert_eq!(count_occurrences_decomposable(&p("321"), &p("2413")).unwrap(), c(0));
        assert_eq!(count_occurrences_decomposable(&p("12345"), &p("123")).unwrap(), c(0));
        assert!(count_occurrences_decomposable(&p("12"), &p("321")).is_err());
    }

    #[test]
    fn avoidance_examples() {
        assert!(is_avoiding(&p("321"), &p("2413")));
        assert!(!is_avoiding(&p("321"), &p("321")));
        assert!(is_avoiding(&p("21"), &Permutation::identity(7)));
        assert!(!is_avoiding(&p("132"), &p("2413")));
        assert!(is_avoiding(&p("123"), &p("321")));
    }

    #[test]
    fn ending_at_last() {
        assert!(contains_ending_at_last(&[3, 2, 1], &[5, 4, 1]));
        assert!(!contains_ending_at_last(&[3, 2, 1], &[5, 4, 1, 7]));
        assert!(contains_ending_at_last(&[1], &[9]));
    }

    #[test]
    fn bound_formula() {
        // (2*3)^2 * 10 * 4^2
        assert_eq!(occurrence_bound(3, 10, 4), c(36 * 10 * 16));
    }

    #[test]
    fn big_counts_exceed_u64() {
        // C(100000, 6) > 2^64; identity host makes every 6-tuple increasing.
        let n = 100_000;
        let pi = Permutation::identity(n);
        let got = count_occurrences_decomposable(&p("123456"), &pi).unwrap();
        let mut expected = BigUint::one();
        for i in 0..6u64 {
            expected = expected * BigUint::from(n as u64 - i) / BigUint::from(i + 1);
        }
        assert!(expected > BigUint::from(u64::MAX));
        assert_eq!(got, expected);
    }
}
