use avoidlab::excursion::{
    estimate_via_permutations, estimate_w_moment, excursion_samples, permutation_samples,
};
use avoidlab::moments::moment_w;
use avoidlab::Permutation;

fn p(s: &str) -> Permutation {
    s.parse().unwrap()
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn grid_refinement_is_within_noise() {
    let sigma = p("21");
    let coarse = estimate_w_moment(&sigma, 1, 20_000, 1024, 5, None).unwrap();
    let fine = estimate_w_moment(&sigma, 1, 20_000, 4096, 6, None).unwrap();
    let band = 2.0 * (coarse.stderr.powi(2) + fine.stderr.powi(2)).sqrt();
    assert!((coarse.mean - fine.mean).abs() < band, "{coarse:?} vs {fine:?}");
}

#[test]
fn same_seed_same_bits_any_worker_count() {
    let sigma = p("2314");
    let a = estimate_w_moment(&sigma, 2, 500, 512, 77, Some(1)).unwrap();
    let b = estimate_w_moment(&sigma, 2, 500, 512, 77, Some(4)).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    let c = estimate_via_permutations(&sigma, 300, 40, 77, Some(1)).unwrap();
    let d = estimate_via_permutations(&sigma, 300, 40, 77, Some(3)).unwrap();
    assert_eq!(c, d);
}

#[test]
fn reflected_patterns_share_excursion_values() {
    let values = excursion_samples(&[p("231"), p("312")], 1, 300, 256, 3, None).unwrap();
    assert_eq!(values[0], values[1]);
}

#[test]
fn reflected_patterns_agree_in_distribution_on_permutations() {
    let values = permutation_samples(&[p("231"), p("312")], 400, 2000, 8, None).unwrap();
    let (m1, v1) = mean_and_var(&values[0]);
    let (m2, v2) = mean_and_var(&values[1]);
    let n = values[0].len() as f64;
    let z = (m1 - m2) / ((v1 + v2) / n).sqrt();
    assert!(z.abs() < 4.0, "means {m1} vs {m2}, z = {z}");
    assert!((v1 / v2 - 1.0).abs() < 0.25, "variances {v1} vs {v2}");
}

#[test]
fn second_moment_of_231() {
    let exact = moment_w(&p("231"), 2).unwrap().to_f64();
    let est = estimate_w_moment(&p("231"), 2, 100_000, 4096, 11, None).unwrap();
    assert!(est.z_score(exact).abs() <= 3.0, "{est:?} vs {exact}");
}

#[test]
fn permutation_path_examples() {
    // By the sum identity n_123 = C(n,3) - n_132 - n_213 - n_231 - n_312,
    // and the 132/213 terms shift the normalized mean by -(sqrt(pi)/4)/sqrt(n):
    // about -6% at n = 2000, so 1/6 itself is only reached for larger n.
    let n = 2000.0f64;
    let corrected = (1.0 - 1.0 / n) * (1.0 - 2.0 / n) / 6.0 - std::f64::consts::PI.sqrt() / 4.0 / n.sqrt();
    let est = estimate_via_permutations(&p("123"), 2000, 500, 21, None).unwrap();
    assert!((est.mean / corrected - 1.0).abs() < 0.01, "{est:?} vs {corrected}");
    let est = estimate_via_permutations(&p("123"), 4000, 200, 21, None).unwrap();
    assert!((est.mean * 6.0 - 1.0).abs() < 0.05, "{est:?}");

    let est = estimate_via_permutations(&p("12"), 1000, 100, 22, None).unwrap();
    assert!((est.mean / 0.5 - 1.0).abs() < 0.05, "{est:?}");
}

#[test]
fn decomposable_pattern_on_permutations() {
    // 1243 has blocks 1, 1, 21; the relative bias decays like 1/sqrt(n)
    let exact = moment_w(&p("1243"), 1).unwrap().to_f64();
    let rel: Vec<f64> = [250, 1000, 4000]
        .iter()
        .map(|&n| estimate_via_permutations(&p("1243"), n, 300, 4, None).unwrap().mean / exact - 1.0)
        .collect();
    assert!(rel[0].abs() > rel[1].abs() && rel[1].abs() > rel[2].abs(), "{rel:?}");
    assert!(rel[2].abs() < 0.15, "{rel:?}");
}
