//! Dyck paths, their run structure, uniform sampling, and the
//! Billey–Jockusch–Stanley bijection onto 321-avoiding permutations.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// `C_n = binom(2n, n) / (n + 1)`.
pub fn catalan(n: u64) -> BigUint {
    // C_{k+1} = C_k * 2(2k+1) / (k+2), exact at every step
    let mut c = BigUint::one();
    for k in 0..n {
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    c
}

/// A lattice path of `+1`/`-1` steps that never goes below zero and ends at
/// zero. Written as a string over `U` and `D`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyckPath {
    steps: Vec<i8>,
}

impl DyckPath {
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidDyckPath("empty path".into()));
        }
        let mut height = 0i64;
        for (x, &s) in steps.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::InvalidDyckPath(format!("step {s} at {x}")));
            }
            height += s as i64;
            if height < 0 {
                return Err(Error::InvalidDyckPath(format!("goes below zero at {}", x + 1)));
            }
        }
        if height != 0 {
            return Err(Error::InvalidDyckPath(format!("ends at height {height}")));
        }
        Ok(DyckPath { steps })
    }

    /// Half-length `n`.
    pub fn semilength(&self) -> usize {
        self.steps.len() / 2
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// `gamma(x)` for `0 <= x <= 2n`.
    pub fn height(&self, x: usize) -> i64 {
        self.steps[..x].iter().map(|&s| s as i64).sum()
    }

    pub fn max_height(&self) -> i64 {
        let mut h = 0i64;
        let mut best = 0;
        for &s in &self.steps {
            h += s as i64;
            best = best.max(h);
        }
        best
    }

    pub fn run_decomposition(&self) -> RunDecomposition {
        let mut ascents = Vec::new();
        let mut descents = Vec::new();
        let mut x = 0;
        let len = self.steps.len();
        while x < len {
            let up_start = x;
            while x < len && self.steps[x] == 1 {
                x += 1;
            }
            ascents.push(x - up_start);
            let down_start = x;
            while x < len && self.steps[x] == -1 {
                x += 1;
            }
            descents.push(x - down_start);
        }
        RunDecomposition::from_runs(ascents, descents)
    }

    /// Billey–Jockusch–Stanley: sends the descent-run endpoints `D_i` to
    /// `A_i + 1` increasingly and the remaining positions to the remaining
    /// values increasingly.
    pub fn to_permutation(&self) -> Permutation {
        let n = self.semilength();
        let runs = self.run_decomposition();
        let mut values = vec![0u32; n];
        let mut is_target = vec![false; n + 1];
        for (&d, &a1) in runs.descent_set.iter().zip(&runs.shifted_ascent_set) {
            values[d - 1] = a1 as u32;
            is_target[a1] = true;
        }
        let mut rest = (1..=n).filter(|&v| !is_target[v]);
        for slot in values.iter_mut().filter(|v| **v == 0) {
            *slot = rest.next().expect("complements have equal size") as u32;
        }
        Permutation::from_values_unchecked(values)
    }

    /// Inverse of [`DyckPath::to_permutation`]. The exceedance positions of
    /// `pi` are the `D_i` and their values the `A_i + 1`, which fixes every
    /// run length.
    pub fn from_permutation(pi: &Permutation) -> Result<DyckPath> {
        pi.require_321_avoiding()?;
        let n = pi.len();
        let mut a_sums = vec![0usize];
        let mut d_sums = vec![0usize];
        for (i, &v) in pi.values().iter().enumerate() {
            if v as usize > i + 1 {
                d_sums.push(i + 1);
                a_sums.push(v as usize - 1);
            }
        }
        a_sums.push(n);
        d_sums.push(n);
        let mut steps = Vec::with_capacity(2 * n);
        for i in 1..a_sums.len() {
            steps.extend(std::iter::repeat_n(1i8, a_sums[i] - a_sums[i - 1]));
            steps.extend(std::iter::repeat_n(-1i8, d_sums[i] - d_sums[i - 1]));
        }
        DyckPath::new(steps)
    }

    /// Uniform over Dyck paths of semilength `n` (cycle lemma): shuffle `n`
    /// up-steps with `n + 1` down-steps, rotate to start just after the first
    /// minimum of the walk, and drop the final down-step.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DyckPath> {
        if n == 0 {
            return Err(Error::InvalidArgument("semilength must be >= 1".into()));
        }
        let mut word: Vec<i8> = std::iter::repeat_n(1i8, n)
            .chain(std::iter::repeat_n(-1i8, n + 1))
            .collect();
        word.shuffle(rng);
        let mut h = 0i64;
        let mut min = 0i64;
        let mut cut = 0usize;
        for (x, &s) in word.iter().enumerate() {
            h += s as i64;
            if h < min {
                min = h;
                cut = x + 1;
            }
        }
        let mut steps = Vec::with_capacity(2 * n);
        steps.extend_from_slice(&word[cut..]);
        steps.extend_from_slice(&word[..cut]);
        let last = steps.pop();
        debug_assert_eq!(last, Some(-1));
        Ok(DyckPath { steps })
    }
}

impl fmt::Display for DyckPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.steps {
            f.write_str(if s == 1 { "U" } else { "D" })?;
        }
        Ok(())
    }
}

impl FromStr for DyckPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let steps = s
            .trim()
            .chars()
            .map(|c| match c {
                'U' | 'u' => Ok(1),
                'D' | 'd' => Ok(-1),
                other => Err(Error::InvalidDyckPath(format!("bad step {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        DyckPath::new(steps)
    }
}

/// Maximal runs `U^{a_1} D^{d_1} ... U^{a_m} D^{d_m}` of a Dyck path.
///
/// Sets are 1-based: `descent_set = {D_i}`, `ascent_set = {A_i}`,
/// `shifted_ascent_set = {A_i + 1}` for `1 <= i <= m - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunDecomposition {
    pub ascents: Vec<usize>,
    pub descents: Vec<usize>,
    /// `A_1..A_m`
    pub ascent_sums: Vec<usize>,
    /// `D_1..D_m`
    pub descent_sums: Vec<usize>,
    pub ascent_set: Vec<usize>,
    pub shifted_ascent_set: Vec<usize>,
    pub descent_set: Vec<usize>,
    /// `y_i = A_i - D_i`, the height after the `i`-th descent run begins.
    pub heights: Vec<i64>,
}

impl RunDecomposition {
    fn from_runs(ascents: Vec<usize>, descents: Vec<usize>) -> Self {
        let prefix = |xs: &[usize]| {
            xs.iter()
                .scan(0usize, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect::<Vec<_>>()
        };
        let ascent_sums = prefix(&ascents);
        let descent_sums = prefix(&descents);
        let inner = ascents.len().saturating_sub(1);
        let ascent_set = ascent_sums[..inner].to_vec();
        let shifted_ascent_set = ascent_set.iter().map(|a| a + 1).collect();
        let descent_set = descent_sums[..inner].to_vec();
        let heights = ascent_sums
            .iter()
            .zip(&descent_sums)
            .map(|(&a, &d)| a as i64 - d as i64)
            .collect();
        RunDecomposition {
            ascents,
            descents,
            ascent_sums,
            descent_sums,
            ascent_set,
            shifted_ascent_set,
            descent_set,
            heights,
        }
    }

    /// Number of ascent runs `m`.
    pub fn run_count(&self) -> usize {
        self.ascents.len()
    }
}

/// All Dyck paths of semilength `n`, in lexicographic order with `U < D`.
pub fn all_dyck_paths(n: usize) -> Vec<DyckPath> {
    fn rec(n: usize, ups: usize, downs: usize, cur: &mut Vec<i8>, out: &mut Vec<DyckPath>) {
        if ups == n && downs == n {
            out.push(DyckPath { steps: cur.clone() });
            return;
        }
        if ups < n {
            cur.push(1);
            rec(n, ups + 1, downs, cur, out);
            cur.pop();
        }
        if downs < ups {
            cur.push(-1);
            rec(n, ups, downs + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, 0, &mut Vec::with_capacity(2 * n), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn d(s: &str) -> DyckPath {
        s.parse().unwrap()
    }

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn catalan_values() {
        let expected = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796];
        for (n, &c) in expected.iter().enumerate() {
            assert_eq!(catalan(n as u64), BigUint::from(c));
            if n >= 1 {
                assert_eq!(all_dyck_paths(n).len() as u64, c);
            }
        }
    }

    #[test]
    fn path_validation() {
        assert!("UDDU".parse::<DyckPath>().is_err());
        assert!("UUD".parse::<DyckPath>().is_err());
        assert!("UXD".parse::<DyckPath>().is_err());
        assert_eq!(d("UUDD").to_string(), "UUDD");
        assert_eq!(d("UUDUDD").max_height(), 2);
        assert_eq!(d("UUDUDD").height(3), 1);
    }

    #[test]
    fn run_examples() {
        let r = d("UUDD").run_decomposition();
        assert_eq!((r.ascents.clone(), r.descents.clone(), r.run_count()), (vec![2], vec![2], 1));

        let r = d("UDUD").run_decomposition();
        assert_eq!(r.ascents, vec![1, 1]);
        assert_eq!(r.descents, vec![1, 1]);
        assert_eq!(r.ascent_sums, vec![1, 2]);
        assert_eq!(r.descent_sums, vec![1, 2]);
        assert_eq!(r.heights[0], 0);

        let r = d("UUDUDD").run_decomposition();
        assert_eq!(r.ascents, vec![2, 1]);
        assert_eq!(r.descents, vec![1, 2]);
        assert_eq!(r.descent_set, vec![1]);
        assert_eq!(r.shifted_ascent_set, vec![3]);
    }

    #[test]
    fn heights_match_path() {
        for path in all_dyck_paths(6) {
            let r = path.run_decomposition();
            for i in 0..r.run_count() {
                let x = r.ascent_sums[i] + r.descent_sums[i];
                assert_eq!(r.heights[i], path.height(x));
                assert!(r.heights[i] >= 0);
            }
        }
    }

    #[test]
    fn bjs_examples() {
        assert_eq!(d("UDUD").to_permutation(), p("21"));
        assert_eq!(d("UUDD").to_permutation(), p("12"));
        assert_eq!(d("UD").to_permutation(), p("1"));
        assert_eq!(d("UUDUDD").to_permutation(), p("312"));

        assert_eq!(DyckPath::from_permutation(&p("21")).unwrap(), d("UDUD"));
        assert_eq!(DyckPath::from_permutation(&p("12")).unwrap(), d("UUDD"));
        assert_eq!(DyckPath::from_permutation(&p("1")).unwrap(), d("UD"));
        assert!(matches!(
            DyckPath::from_permutation(&p("321")),
            Err(Error::Contains321(_))
        ));
    }

    #[test]
    fn sampler_small_cases() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..20 {
            assert_eq!(DyckPath::sample_uniform(1, &mut rng).unwrap(), d("UD"));
        }
        let a = DyckPath::sample_uniform(5, &mut stream_rng(99, 0)).unwrap();
        let b = DyckPath::sample_uniform(5, &mut stream_rng(99, 0)).unwrap();
        assert_eq!(a, b);
        assert!(DyckPath::sample_uniform(0, &mut rng).is_err());
    }

    #[test]
    fn sampler_n2_chi_square() {
        let mut rng = stream_rng(2024, 0);
        let draws = 100_000;
        let mut uudd = 0u64;
        for _ in 0..draws {
            if DyckPath::sample_uniform(2, &mut rng).unwrap() == d("UUDD") {
                uudd += 1;
            }
        }
        let e = draws as f64 / 2.0;
        let x = uudd as f64;
        let chi2 = 2.0 * (x - e).powi(2) / e;
        // chi-square, 1 dof: P(X > 10.83) = 0.001
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }
}
