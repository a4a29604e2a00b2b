//! Monte Carlo for `W_sigma`: discretized Brownian excursions built as the
//! norm of a 3-d Brownian bridge, and end-to-end sampling through uniform
//! 321-avoiding permutations.

use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::count::{count_occurrences_block_fast, count_occurrences_decomposable};
use crate::dyck::DyckPath;
use crate::error::{Error, Result};
use crate::exact::ExactValue;
use crate::perm::{BlockProfile, Permutation};
use crate::polytope::w_const;
use crate::rng::stream_rng;

/// Largest host size at which patterns longer than 5 are still counted.
pub const PERMUTATION_CAP_N: usize = 5000;
pub const PERMUTATION_CAP_M: usize = 5;

/// Values `e_0..e_G` of an excursion on the grid `i / G`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcursionSample {
    values: Vec<f64>,
}

impl ExcursionSample {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidArgument("excursion needs G >= 2".into()));
        }
        if values[0] != 0.0 || *values.last().unwrap() != 0.0 {
            return Err(Error::InvalidArgument("excursion endpoints must be 0".into()));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidArgument("excursion values must be >= 0".into()));
        }
        Ok(ExcursionSample { values })
    }

    pub fn grid(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Exact finite-dimensional law of `Bex` at the points `i / G`.
pub fn sample_excursion<R: Rng + ?Sized>(grid: usize, rng: &mut R) -> Result<ExcursionSample> {
    if grid < 2 {
        return Err(Error::InvalidArgument("excursion needs G >= 2".into()));
    }
    let mut sq = vec![0.0; grid + 1];
    let mut walk = vec![0.0; grid + 1];
    fill_excursion(grid, rng, &mut walk, &mut sq);
    Ok(ExcursionSample { values: sq })
}

/// Writes the excursion into `out`, using `walk` as scratch.
fn fill_excursion<R: Rng + ?Sized>(grid: usize, rng: &mut R, walk: &mut [f64], out: &mut [f64]) {
    let step = (1.0 / grid as f64).sqrt();
    out.iter_mut().for_each(|v| *v = 0.0);
    for _ in 0..3 {
        walk[0] = 0.0;
        for i in 1..=grid {
            let z: f64 = rng.sample(StandardNormal);
            walk[i] = walk[i - 1] + step * z;
        }
        let end = walk[grid];
        for i in 1..grid {
            let b = walk[i] - (i as f64 / grid as f64) * end;
            out[i] += b * b;
        }
    }
    out[0] = 0.0;
    out[grid] = 0.0;
    for v in out[1..grid].iter_mut() {
        *v = v.sqrt();
    }
}

/// `w * int_{t_1 < .. < t_l} prod_p e(t_p)^(m_p - 1) dt` by `l` nested
/// cumulative trapezoid passes.
pub fn functional_w(sample: &ExcursionSample, profile: &BlockProfile, w: f64) -> f64 {
    let mut scratch = Vec::new();
    functional_w_slice(&sample.values, profile, w, &mut scratch)
}

fn functional_w_slice(e: &[f64], profile: &BlockProfile, w: f64, f: &mut Vec<f64>) -> f64 {
    let grid = e.len() - 1;
    let h = 1.0 / grid as f64;
    f.clear();
    f.resize(grid + 1, 1.0);
    for &m in &profile.lengths {
        let power = m as i32 - 1;
        let mut prev_g = e[0].powi(power) * f[0];
        let mut acc = 0.0;
        f[0] = 0.0;
        for i in 1..=grid {
            let g = e[i].powi(power) * f[i];
            acc += 0.5 * h * (prev_g + g);
            prev_g = g;
            f[i] = acc;
        }
    }
    w * f[grid]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Grid size for the excursion path; `None` for the permutation path.
    pub grid: Option<usize>,
    /// Host size for the permutation path.
    pub host_size: Option<usize>,
    pub seed: u64,
}

impl Estimate {
    fn from_values(values: &[f64], grid: Option<usize>, host_size: Option<usize>, seed: u64) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Estimate {
            mean,
            stderr: (var / n).sqrt(),
            samples: values.len(),
            grid,
            host_size,
            seed,
        }
    }

    /// `(mean - exact) / stderr`.
    pub fn z_score(&self, exact: f64) -> f64 {
        (self.mean - exact) / self.stderr
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    Ok(())
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(0) => Err(Error::InvalidArgument("workers must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map(|pool| pool.install(job))
            .map_err(|e| Error::InvalidArgument(e.to_string())),
    }
}

/// Per-sample `W_sigma^k` for several patterns from one excursion stream;
/// sample `i` uses stream `i` of `seed`.
pub fn excursion_samples(
    sigmas: &[Permutation],
    power: u32,
    samples: usize,
    grid: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    if grid < 2 {
        return Err(Error::InvalidArgument("excursion needs G >= 2".into()));
    }
    if power == 0 {
        return Err(Error::InvalidArgument("power must be positive".into()));
    }
    let mut targets = Vec::with_capacity(sigmas.len());
    for sigma in sigmas {
        sigma.require_321_avoiding()?;
        targets.push((BlockProfile::of(sigma), w_const(sigma)?.to_f64()));
    }
    let rows: Vec<Vec<f64>> = with_workers(workers, || {
        (0..samples as u64)
            .into_par_iter()
            .map_init(
                || (vec![0.0; grid + 1], vec![0.0; grid + 1], Vec::new()),
                |(walk, e, scratch), i| {
                    let mut rng = stream_rng(seed, i);
                    fill_excursion(grid, &mut rng, walk, e);
                    targets
                        .iter()
                        .map(|(profile, w)| functional_w_slice(e, profile, *w, scratch).powi(power as i32))
                        .collect()
                },
            )
            .collect()
    })?;
    Ok(transpose(rows, sigmas.len()))
}

fn transpose(rows: Vec<Vec<f64>>, width: usize) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::with_capacity(rows.len()); width];
    for row in rows {
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    cols
}

/// Mean of `W_sigma^k` over `samples` excursions on a grid of size `grid`.
pub fn estimate_w_moment(
    sigma: &Permutation,
    power: u32,
    samples: usize,
    grid: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Estimate> {
    check_samples(samples)?;
    let values = excursion_samples(std::slice::from_ref(sigma), power, samples, grid, seed, workers)?;
    Ok(Estimate::from_values(&values[0], Some(grid), None, seed))
}

fn check_permutation_cap(sigma: &Permutation, n: usize) -> Result<()> {
    if sigma.len() > PERMUTATION_CAP_M && n > PERMUTATION_CAP_N {
        return Err(Error::CapExceeded(format!(
            "counting patterns longer than {PERMUTATION_CAP_M} is refused for n > {PERMUTATION_CAP_N}"
        )));
    }
    Ok(())
}

/// `n_sigma(pi)` with the counter suited to `sigma`.
pub fn count_in_host(sigma: &Permutation, pi: &Permutation) -> Result<f64> {
    let count = if sigma.len() > 1 && sigma.is_indecomposable() {
        count_occurrences_block_fast(sigma, pi)?
    } else {
        count_occurrences_decomposable(sigma, pi)?
    };
    Ok(count.to_f64().unwrap_or(f64::INFINITY))
}

/// Per-sample `n_sigma(pi) / n^((m + l)/2)` for several patterns, all
/// evaluated on the same stream of uniform `pi` in `S_n(321)`.
pub fn permutation_samples(
    sigmas: &[Permutation],
    n: usize,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("host size must be positive".into()));
    }
    let mut scales = Vec::with_capacity(sigmas.len());
    for sigma in sigmas {
        sigma.require_321_avoiding()?;
        check_permutation_cap(sigma, n)?;
        let exp2 = BlockProfile::of(sigma).scaling_exponent_x2();
        scales.push((n as f64).powf(exp2 as f64 / 2.0));
    }
    let rows: Result<Vec<Vec<f64>>> = with_workers(workers, || {
        (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, i);
                let pi = DyckPath::sample_uniform(n, &mut rng)?.to_permutation();
                sigmas
                    .iter()
                    .zip(&scales)
                    .map(|(sigma, scale)| Ok(count_in_host(sigma, &pi)? / scale))
                    .collect()
            })
            .collect()
    })?;
    Ok(transpose(rows?, sigmas.len()))
}

/// Mean of `n_sigma(pi) / n^((m + l)/2)` over uniform `pi` in `S_n(321)`.
pub fn estimate_via_permutations(
    sigma: &Permutation,
    n: usize,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Estimate> {
    check_samples(samples)?;
    let values = permutation_samples(std::slice::from_ref(sigma), n, samples, seed, workers)?;
    Ok(Estimate::from_values(&values[0], None, Some(n), seed))
}

/// Rayleigh distribution function `1 - exp(-x^2 / 2)`.
pub fn rayleigh_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x * x / 2.0).exp_m1()
    }
}

/// Kolmogorov-Smirnov statistic of `data` against `cdf`.
pub fn ks_statistic(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value `P(sqrt(n) D > d sqrt(n))` from the Kolmogorov series,
/// with the usual small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    pub p_value: f64,
    pub draws: usize,
}

/// Draws `2 e(U)` at a uniform time `U` of independent excursions and tests
/// them against the Rayleigh law.
pub fn rayleigh_ks_test(draws: usize, grid: usize, seed: u64) -> Result<KsReport> {
    if grid < 2 || draws < 1 {
        return Err(Error::InvalidArgument("need G >= 2 and at least one draw".into()));
    }
    let data: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map_init(
            || (vec![0.0; grid + 1], vec![0.0; grid + 1]),
            |(walk, e), i| {
                let mut rng = stream_rng(seed, i);
                let u: f64 = rng.random();
                fill_excursion(grid, &mut rng, walk, e);
                2.0 * e[(u * grid as f64).round() as usize]
            },
        )
        .collect();
    let statistic = ks_statistic(&data, rayleigh_cdf);
    Ok(KsReport {
        statistic,
        p_value: ks_p_value(statistic, draws),
        draws,
    })
}

/// `E W` as a float when a closed form exists.
pub fn closed_form_moment(sigma: &Permutation, power: u32) -> Option<ExactValue> {
    crate::moments::moment_w(sigma, power).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn sample_shape() {
        let mut rng = stream_rng(1, 0);
        let s = sample_excursion(64, &mut rng).unwrap();
        assert_eq!(s.grid(), 64);
        assert_eq!(s.values()[0], 0.0);
        assert_eq!(s.values()[64], 0.0);
        assert!(s.values().iter().all(|&v| v >= 0.0));
        assert!(s.values()[1..64].iter().all(|&v| v > 0.0));
        assert!(sample_excursion(1, &mut rng).is_err());
    }

    #[test]
    fn functional_on_fixed_vectors() {
        let zero = ExcursionSample::from_values(vec![0.0; 9]).unwrap();
        let single = BlockProfile::new(vec![1]).unwrap();
        assert!((functional_w(&zero, &single, 2.5) - 2.5).abs() < 1e-12);
        let three = BlockProfile::new(vec![1, 1, 1]).unwrap();
        let g = 1024;
        let big = ExcursionSample::from_values(vec![0.0; g + 1]).unwrap();
        assert!((functional_w(&big, &three, 1.0) - 1.0 / 6.0).abs() < 1.0 / g as f64);
        // flat c away from the ends
        let c = 0.7;
        let mut flat = vec![c; g + 1];
        flat[0] = 0.0;
        flat[g] = 0.0;
        let flat = ExcursionSample::from_values(flat).unwrap();
        let two = BlockProfile::new(vec![2]).unwrap();
        assert!((functional_w(&flat, &two, 1.0) - c).abs() < 2.0 / g as f64);
    }

    #[test]
    fn sample_validation() {
        assert!(ExcursionSample::from_values(vec![0.0, 1.0]).is_err());
        assert!(ExcursionSample::from_values(vec![1.0, 1.0, 0.0]).is_err());
        assert!(ExcursionSample::from_values(vec![0.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let s = p("21");
        let a = estimate_w_moment(&s, 1, 200, 64, 9, None).unwrap();
        let b = estimate_w_moment(&s, 1, 200, 64, 9, Some(1)).unwrap();
        let c = estimate_w_moment(&s, 1, 200, 64, 9, Some(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean.to_bits(), c.mean.to_bits());
        let d = estimate_w_moment(&s, 1, 200, 64, 10, None).unwrap();
        assert_ne!(a.mean, d.mean);
    }

    #[test]
    fn small_mean_is_close() {
        let est = estimate_w_moment(&p("21"), 1, 4000, 256, 7, None).unwrap();
        let exact = std::f64::consts::PI.sqrt() / 4.0;
        assert!(est.z_score(exact).abs() < 4.0, "{est:?}");
    }

    #[test]
    fn pointwise_mean_at_half() {
        let n = 4000;
        let vals: Vec<f64> = (0..n)
            .map(|i| sample_excursion(16, &mut stream_rng(3, i)).unwrap().values()[8])
            .collect();
        let est = Estimate::from_values(&vals, Some(16), None, 3);
        let exact = (2.0 / std::f64::consts::PI).sqrt();
        assert!(est.z_score(exact).abs() < 4.0, "{est:?}");
    }

    #[test]
    fn permutation_path_small() {
        let est = estimate_via_permutations(&p("12"), 200, 50, 1, None).unwrap();
        assert!((est.mean - 0.5).abs() < 0.05, "{est:?}");
        assert_eq!(est.host_size, Some(200));
        assert!(matches!(
            estimate_via_permutations(&p("234561"), 6000, 2, 1, None),
            Err(Error::CapExceeded(_))
        ));
        assert!(matches!(
            estimate_via_permutations(&p("321"), 10, 2, 1, None),
            Err(Error::Contains321(_))
        ));
        assert!(estimate_via_permutations(&p("21"), 10, 1, 1, None).is_err());
    }

    #[test]
    fn ks_pieces() {
        assert_eq!(rayleigh_cdf(-1.0), 0.0);
        assert!((rayleigh_cdf(1.0) - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        let uniform: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&uniform, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
        assert!(ks_p_value(d, 1000) > 0.99);
        assert!(ks_p_value(0.1, 1000) < 1e-6);
    }
}
