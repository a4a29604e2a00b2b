//! Closed-form moments of the excursion functional
//! `W = w * int_{t_1 < .. < t_l} prod_p Bex(t_p)^(m_p - 1) dt`.
//!
//! Several routes overlap; [`mean_w`] runs every route that applies to a
//! pattern and fails loudly if any two disagree.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rat, ExactValue};
use crate::perm::{BlockProfile, Permutation};
use crate::polytope::w_const;

fn factorial(n: u64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn rational_of(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// `Gamma(two_x / 2)` for a positive integer `two_x`.
pub fn gamma_half(two_x: u64) -> Result<ExactValue> {
    if two_x == 0 {
        return Err(Error::InvalidArgument("Gamma needs a positive argument".into()));
    }
    if two_x.is_multiple_of(2) {
        return Ok(ExactValue::integer(factorial(two_x / 2 - 1)));
    }
    // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
    let k = (two_x - 1) / 2;
    let q = BigRational::new(
        factorial(2 * k),
        BigInt::from(4u32).pow(k as u32) * factorial(k),
    );
    Ok(ExactValue::sqrt_pi().scale(&q))
}

fn gamma_int(n: u64) -> BigRational {
    rational_of(factorial(n - 1))
}

/// `E int_0^1 Bex(t)^r dt = 2^(-r/2) Gamma(r/2 + 1)`.
pub fn excursion_moment_lex1(r: u64) -> ExactValue {
    ExactValue::two_half_pow(-(r as i64)) * gamma_half(r + 2).expect("positive argument")
}

/// `E int int Bex(t)^r Bex(u)^s dt du`
/// `= 2^(-(r+s)/2) ((r+s+2)/((r+1)(s+1)) - r! s!/(r+s+1)!) Gamma((r+s)/2 + 1)`.
pub fn excursion_cross_moment_lex2(r: u64, s: u64) -> ExactValue {
    let bracket = rat((r + s + 2) as i64, ((r + 1) * (s + 1)) as i64)
        - BigRational::new(factorial(r) * factorial(s), factorial(r + s + 1));
    ExactValue::two_half_pow(-((r + s) as i64))
        .scale(&bracket)
        * gamma_half(r + s + 2).expect("positive argument")
}

/// Constant `c_r` with `E[Bex(t)^r] = c_r (t(1-t))^(r/2)`, i.e.
/// `c_r = 2^(r/2+1) pi^(-1/2) Gamma((r+3)/2)`.
pub fn pointwise_moment_coefficient(r: u64) -> ExactValue {
    ExactValue::two_half_pow(r as i64 + 2)
        * ExactValue::pi_half_pow(-1)
        * gamma_half(r + 3).expect("positive argument")
}

/// `E[(int_0^1 Bex(t)^k dt)^j]` where available: `j <= 2` from the two
/// lemmas above, `k = 0` trivially, and `j = 3` for `k` in `{1, 2}` from
/// tabulated literature values (excursion area: `15 sqrt(2 pi) / 128`;
/// `int Bex^2`: `631/2520`).
pub fn power_moment(k: u64, j: u64) -> Result<ExactValue> {
    match (k, j) {
        (_, 0) | (0, _) => Ok(ExactValue::one()),
        (_, 1) => Ok(excursion_moment_lex1(k)),
        (_, 2) => Ok(excursion_cross_moment_lex2(k, k)),
        (1, 3) => Ok((ExactValue::sqrt2() * ExactValue::sqrt_pi()).scale(&rat(15, 128))),
        (2, 3) => Ok(ExactValue::frac(631, 2520)),
        _ => Err(Error::Unsupported(format!(
            "E[(int Bex^{k})^{j}] has no closed form here"
        ))),
    }
}

/// Closed-form routes to `E W_sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanMethod {
    /// One block: `w 2^(-(m-1)/2) Gamma((m+1)/2)`.
    Indecomposable,
    /// Two blocks, via reflection symmetry of the excursion.
    TwoBlocks,
    /// At most one block longer than one: a Beta integral against the
    /// pointwise moment of `Bex(t)`.
    SingleNontrivialBlock,
    /// All blocks the same length: `w / l! E[(int Bex^(m_1 - 1))^l]`.
    EqualBlocks,
    /// All blocks odd: Gaussian pairings of a 3-d Brownian bridge.
    Wick,
}

impl fmt::Display for MeanMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeanMethod::Indecomposable => "indecomposable",
            MeanMethod::TwoBlocks => "two-blocks",
            MeanMethod::SingleNontrivialBlock => "single-nontrivial-block",
            MeanMethod::EqualBlocks => "equal-blocks",
            MeanMethod::Wick => "wick",
        })
    }
}

pub fn applicable_methods(profile: &BlockProfile) -> Vec<MeanMethod> {
    let lens = &profile.lengths;
    let l = lens.len();
    let mut out = Vec::new();
    if l == 1 {
        out.push(MeanMethod::Indecomposable);
    }
    if l == 2 {
        out.push(MeanMethod::TwoBlocks);
    }
    if lens.iter().filter(|&&m| m > 1).count() <= 1 {
        out.push(MeanMethod::SingleNontrivialBlock);
    }
    if lens.iter().all(|&m| m == lens[0]) && power_moment(lens[0] as u64 - 1, l as u64).is_ok() {
        out.push(MeanMethod::EqualBlocks);
    }
    if lens.iter().all(|&m| m % 2 == 1) {
        out.push(MeanMethod::Wick);
    }
    out
}

/// `E W_sigma` by one named route.
pub fn mean_by_method(sigma: &Permutation, method: MeanMethod) -> Result<ExactValue> {
    let w = w_const(sigma)?;
    let profile = BlockProfile::of(sigma);
    if !applicable_methods(&profile).contains(&method) {
        return Err(Error::Unsupported(format!(
            "method {method} does not apply to {sigma}"
        )));
    }
    let integral = match method {
        MeanMethod::Indecomposable => excursion_moment_lex1(profile.total() as u64 - 1),
        MeanMethod::TwoBlocks => two_block_integral(profile.lengths[0], profile.lengths[1]),
        MeanMethod::SingleNontrivialBlock => single_block_integral(&profile),
        MeanMethod::EqualBlocks => {
            let l = profile.block_count() as u64;
            power_moment(profile.lengths[0] as u64 - 1, l)?
                .scale(&BigRational::new(BigInt::one(), factorial(l)))
        }
        MeanMethod::Wick => wick_simplex_integral(&profile)?,
    };
    Ok(&w * &integral)
}

/// `E W_sigma`, cross-checked across every applicable route.
pub fn mean_w(sigma: &Permutation) -> Result<ExactValue> {
    Ok(mean_w_detailed(sigma)?.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanReport {
    pub value: ExactValue,
    pub methods: Vec<MeanMethod>,
}

pub fn mean_w_detailed(sigma: &Permutation) -> Result<MeanReport> {
    sigma.require_321_avoiding()?;
    let methods = applicable_methods(&BlockProfile::of(sigma));
    if methods.is_empty() {
        return Err(Error::Unsupported(format!(
            "no closed form for E W of {sigma}; estimate it by Monte Carlo"
        )));
    }
    let mut value: Option<(MeanMethod, ExactValue)> = None;
    for &method in &methods {
        let v = mean_by_method(sigma, method)?;
        match &value {
            None => value = Some((method, v)),
            Some((first, expected)) if *expected != v => {
                return Err(Error::MethodDisagreement {
                    sigma: sigma.to_string(),
                    detail: format!("{first} gives {expected}, {method} gives {v}"),
                })
            }
            Some(_) => {}
        }
    }
    Ok(MeanReport {
        value: value.expect("at least one method").1,
        methods,
    })
}

/// `E int_{t1<t2} Bex(t1)^(m1-1) Bex(t2)^(m2-1)`: half the unordered
/// cross moment, `2^(-m/2) m/(m1 m2) (1 - m1! m2!/m!) Gamma(m/2)`.
fn two_block_integral(m1: usize, m2: usize) -> ExactValue {
    let m = (m1 + m2) as u64;
    let bracket = rat(m as i64, (m1 * m2) as i64)
        * (BigRational::one()
            - BigRational::new(factorial(m1 as u64) * factorial(m2 as u64), factorial(m)));
    ExactValue::two_half_pow(-(m as i64)).scale(&bracket) * gamma_half(m).expect("m >= 2")
}

/// For the only block of length `M > 1` (or any block, if none is longer
/// than one) at position `p` among `l`:
/// `int_0^1 t^(p-1) (1-t)^(l-p) / ((p-1)! (l-p)!) E[Bex(t)^(M-1)] dt`.
fn single_block_integral(profile: &BlockProfile) -> ExactValue {
    let l = profile.block_count() as u64;
    let p = profile
        .lengths
        .iter()
        .position(|&m| m > 1)
        .map_or(1, |i| i as u64 + 1);
    let r = profile.lengths[p as usize - 1] as u64 - 1;
    let simplex_weight = BigRational::new(BigInt::one(), factorial(p - 1) * factorial(l - p));
    // Beta(p + r/2, l - p + 1 + r/2)
    let numer = gamma_half(2 * p + r).expect("positive")
        * gamma_half(2 * (l - p + 1) + r).expect("positive");
    let denom = gamma_int(l + 1 + r);
    let beta = numer.scale(&(BigRational::one() / denom));
    pointwise_moment_coefficient(r).scale(&simplex_weight) * beta
}

/// `E[W_sigma^2]` for a single block, or equal-length blocks where the
/// needed power moment is known.
pub fn second_moment(sigma: &Permutation) -> Result<ExactValue> {
    moment_w(sigma, 2)
}

/// `E[W_sigma^q]` for one block or equal blocks.
pub fn moment_w(sigma: &Permutation, q: u32) -> Result<ExactValue> {
    if q == 1 {
        return mean_w(sigma);
    }
    let w = w_const(sigma)?;
    let profile = BlockProfile::of(sigma);
    let lens = &profile.lengths;
    if !lens.iter().all(|&m| m == lens[0]) {
        return Err(Error::Unsupported(format!(
            "E[W^{q}] for {sigma}: blocks of different lengths"
        )));
    }
    let l = lens.len() as u64;
    let k = lens[0] as u64 - 1;
    let inner = power_moment(k, l * q as u64)?;
    let scale = BigRational::new(BigInt::one(), factorial(l).pow(q));
    Ok(&w.pow(q) * &inner.scale(&scale))
}

/// `Var W_sigma` for an indecomposable `sigma`:
/// `w^2 2^(1-m) (2(m-1)!/m (1 - m!^2/(2m)!) - Gamma((m+1)/2)^2)`,
/// checked against `E W^2 - (E W)^2` from the cross-moment lemma.
pub fn variance_w_block(sigma: &Permutation) -> Result<ExactValue> {
    let m = sigma.len() as u64;
    if m < 2 {
        return Err(Error::TrivialBlock);
    }
    if !sigma.is_indecomposable() {
        return Err(Error::Decomposable(sigma.to_string()));
    }
    let w = w_const(sigma)?;
    let g = gamma_half(m + 1)?;
    let first = rat(2, m as i64)
        * rational_of(factorial(m - 1))
        * (BigRational::one()
            - BigRational::new(factorial(m).pow(2), factorial(2 * m)));
    let bracket = ExactValue::rational(first) - &g * &g;
    let closed = w.pow(2) * ExactValue::two_half_pow(2 - 2 * m as i64) * bracket;

    let mean = mean_by_method(sigma, MeanMethod::Indecomposable)?;
    let via_lex2 = w.pow(2) * excursion_cross_moment_lex2(m - 1, m - 1) - mean.pow(2);
    if closed != via_lex2 {
        return Err(Error::MethodDisagreement {
            sigma: sigma.to_string(),
            detail: format!("variance {closed} vs second moment route {via_lex2}"),
        });
    }
    Ok(closed)
}

/// `Var W_sigma` wherever the first two moments are available.
pub fn variance_w(sigma: &Permutation) -> Result<ExactValue> {
    if sigma.len() >= 2 && sigma.is_indecomposable() {
        return variance_w_block(sigma);
    }
    let mean = mean_w(sigma)?;
    Ok(second_moment(sigma)? - mean.pow(2))
}

/// Polynomial in `t_1..t_l` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    pub fn constant(vars: usize, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; vars], c);
        }
        Poly { terms }
    }

    /// Sum of `coeff * prod t_i^e_i` terms.
    pub fn from_terms(terms: &[(i64, i64, &[u32])]) -> Self {
        let mut out = Poly::default();
        for &(n, d, e) in terms {
            out.add_term(e.to_vec(), rat(n, d));
        }
        out
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        let entry = self.terms.entry(exps.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    /// `t_p (1 - t_q)`.
    fn bridge_cov(vars: usize, p: usize, q: usize) -> Self {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let mut a = vec![0; vars];
        a[lo] += 1;
        let mut b = a.clone();
        b[hi] += 1;
        let mut out = Poly::default();
        out.add_term(a, BigRational::one());
        out.add_term(b, -BigRational::one());
        out
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, q: &BigRational) -> Poly {
        let mut out = Poly::default();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * q);
        }
        out
    }

    /// `int_{0 < t_1 < .. < t_l < 1}`; a monomial with exponents `a_p`
    /// integrates to `prod_p 1 / (a_1 + .. + a_p + p)`.
    pub fn integrate_simplex(&self) -> BigRational {
        let mut total = BigRational::zero();
        for (e, c) in &self.terms {
            let mut partial = 0u64;
            let mut denom = BigInt::one();
            for (p, &a) in e.iter().enumerate() {
                partial += a as u64;
                denom *= BigInt::from(partial + p as u64 + 1);
            }
            total += c / BigRational::from_integer(denom);
        }
        total
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| {
                c.to_f64().unwrap()
                    * e.iter().zip(t).map(|(&a, &x)| x.powi(a as i32)).product::<f64>()
            })
            .sum()
    }
}

/// `E[prod_p X_p^(n_p)]` for one centred Gaussian bridge component sampled
/// at ordered times, as a polynomial in the times (Isserlis).
struct GaussianMoments {
    vars: usize,
    memo: HashMap<Vec<u32>, Poly>,
}

impl GaussianMoments {
    fn new(vars: usize) -> Self {
        GaussianMoments {
            vars,
            memo: HashMap::new(),
        }
    }

    fn moment(&mut self, counts: &[u32]) -> Poly {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            return Poly::constant(self.vars, BigRational::one());
        }
        if total % 2 == 1 {
            return Poly::default();
        }
        if let Some(hit) = self.memo.get(counts) {
            return hit.clone();
        }
        // pair the first remaining factor with each other factor
        let first = counts.iter().position(|&c| c > 0).expect("nonzero total");
        let mut rest = counts.to_vec();
        rest[first] -= 1;
        let mut out = Poly::default();
        for q in 0..self.vars {
            if rest[q] == 0 {
                continue;
            }
            let ways = rest[q];
            let mut after = rest.clone();
            after[q] -= 1;
            let sub = self.moment(&after);
            let term = Poly::bridge_cov(self.vars, first, q)
                .mul(&sub)
                .scale(&BigRational::from_integer(BigInt::from(ways)));
            out = out.add(&term);
        }
        self.memo.insert(counts.to_vec(), out.clone());
        out
    }
}

/// `E[prod_p Bex(t_p)^(e_p)]` for even exponents, as a polynomial in the
/// ordered times, using `Bex^2 = b_1^2 + b_2^2 + b_3^2` for independent
/// Brownian bridges `b_k`.
pub fn wick_integrand(exponents: &[u32]) -> Result<Poly> {
    if exponents.iter().any(|e| e % 2 == 1) {
        return Err(Error::Unsupported("odd excursion exponent".into()));
    }
    let vars = exponents.len();
    let halves: Vec<u32> = exponents.iter().map(|e| e / 2).collect();
    let mut gauss = GaussianMoments::new(vars);

    // For each time p choose how its h_p squared factors split over the
    // three components, weighted by the multinomial coefficient.
    let splits: Vec<Vec<([u32; 3], BigInt)>> = halves
        .iter()
        .map(|&h| {
            let mut v = Vec::new();
            for a in 0..=h {
                for b in 0..=h - a {
                    let c = h - a - b;
                    let coeff = factorial(h as u64)
                        / (factorial(a as u64) * factorial(b as u64) * factorial(c as u64));
                    v.push(([a, b, c], coeff));
                }
            }
            v
        })
        .collect();

    let mut total = Poly::default();
    let mut choice = vec![0usize; vars];
    loop {
        let mut weight = BigInt::one();
        let mut product = Poly::constant(vars, BigRational::one());
        for k in 0..3 {
            let counts: Vec<u32> = (0..vars).map(|p| 2 * splits[p][choice[p]].0[k]).collect();
            product = product.mul(&gauss.moment(&counts));
        }
        for p in 0..vars {
            weight *= &splits[p][choice[p]].1;
        }
        total = total.add(&product.scale(&BigRational::from_integer(weight)));

        let mut p = 0;
        loop {
            if p == vars {
                return Ok(total);
            }
            choice[p] += 1;
            if choice[p] < splits[p].len() {
                break;
            }
            choice[p] = 0;
            p += 1;
        }
    }
}

fn wick_simplex_integral(profile: &BlockProfile) -> Result<ExactValue> {
    let exps: Vec<u32> = profile.lengths.iter().map(|&m| m as u32 - 1).collect();
    Ok(ExactValue::rational(wick_integrand(&exps)?.integrate_simplex()))
}

/// Mean by the bridge/pairing route only; needs every block of odd length.
pub fn wick_mean_all_odd(sigma: &Permutation) -> Result<ExactValue> {
    let profile = BlockProfile::of(sigma);
    if profile.lengths.iter().any(|m| m % 2 == 0) {
        return Err(Error::Unsupported(format!(
            "{sigma} has a block of even length"
        )));
    }
    mean_by_method(sigma, MeanMethod::Wick)
}
