use avoidlab::enumerate::enumerate_avoiders;
use avoidlab::exact::rat;
use avoidlab::moments::{
    applicable_methods, excursion_cross_moment_lex2, excursion_moment_lex1, mean_by_method,
    mean_w, moment_w, pointwise_moment_coefficient, variance_w, wick_integrand, MeanMethod, Poly,
};
use avoidlab::{w_const, BlockProfile, Error, ExactValue, Permutation};
use num_rational::BigRational;

fn avoiders(n: usize) -> Vec<Permutation> {
    enumerate_avoiders(n, &"321".parse().unwrap()).unwrap().collect()
}

fn p(s: &str) -> Permutation {
    s.parse().unwrap()
}

#[test]
fn every_applicable_method_agrees() {
    let mut compared = 0;
    for n in 1..=7 {
        for sigma in avoiders(n) {
            let methods = applicable_methods(&BlockProfile::of(&sigma));
            match mean_w(&sigma) {
                Ok(v) => {
                    for &m in &methods {
                        assert_eq!(mean_by_method(&sigma, m).unwrap(), v, "{sigma} {m}");
                    }
                    compared += (methods.len() > 1) as usize;
                }
                Err(Error::Unsupported(_)) => assert!(methods.is_empty(), "{sigma}"),
                Err(e) => panic!("{sigma}: {e}"),
            }
        }
    }
    assert!(compared > 100, "only {compared} patterns had two routes");
}

#[test]
fn unsupported_exactly_for_mixed_parity_with_three_or_more_blocks() {
    for n in 1..=7 {
        for sigma in avoiders(n) {
            let lens = BlockProfile::of(&sigma).lengths;
            let nontrivial = lens.iter().filter(|&&m| m > 1).count();
            let mixed = lens.iter().any(|m| m % 2 == 0) && lens.iter().any(|m| m % 2 == 1);
            let equal = lens.iter().all(|&m| m == lens[0]);
            let expect_unsupported = lens.len() >= 3 && nontrivial >= 2 && mixed && !equal;
            assert_eq!(
                matches!(mean_w(&sigma), Err(Error::Unsupported(_))),
                expect_unsupported,
                "{sigma}: {lens:?}"
            );
        }
    }
}

#[test]
fn pairing_expansion_reproduces_pointwise_moments() {
    // E Bex(t)^r = c_r (t(1-t))^(r/2) for even r
    for half in 1..=4u32 {
        let r = 2 * half;
        let c = pointwise_moment_coefficient(r as u64).as_rational().unwrap();
        let mut expected = Poly::constant(1, BigRational::from_integer(1.into()));
        let t_one_minus_t = Poly::from_terms(&[(1, 1, &[1]), (-1, 1, &[2])]);
        for _ in 0..half {
            expected = expected.mul(&t_one_minus_t);
        }
        assert_eq!(wick_integrand(&[r]).unwrap(), expected.scale(&c), "r={r}");
    }
}

#[test]
fn reversed_two_block_patterns_have_equal_means() {
    let blocks: Vec<Permutation> = (1..=4)
        .flat_map(avoiders)
        .filter(Permutation::is_indecomposable)
        .collect();
    for a in &blocks {
        for b in &blocks {
            let ab = a.compose(b);
            let ba = b.compose(a);
            let mean_ab = mean_by_method(&ab, MeanMethod::TwoBlocks).unwrap();
            assert_eq!(mean_ab, mean_by_method(&ba, MeanMethod::TwoBlocks).unwrap(), "{a} {b}");
            // ordered integral is half of the unordered cross moment
            let cross = excursion_cross_moment_lex2(a.len() as u64 - 1, b.len() as u64 - 1)
                .scale(&rat(1, 2));
            assert_eq!(mean_ab, &w_const(&ab).unwrap() * &cross, "{a} {b}");
        }
    }
}

#[test]
fn cross_moment_with_zero_is_single_moment() {
    for r in 0..=5 {
        assert_eq!(excursion_cross_moment_lex2(r, 0), excursion_moment_lex1(r));
    }
}

#[test]
fn variances_are_positive() {
    for n in 2..=7 {
        for sigma in avoiders(n) {
            match variance_w(&sigma) {
                Ok(v) => {
                    let x = v.to_f64();
                    if sigma.blocks().lengths().iter().all(|&m| m == 1) {
                        assert_eq!(v, ExactValue::zero(), "{sigma}");
                    } else {
                        assert!(x > 0.0, "{sigma}: {v} = {x}");
                    }
                }
                Err(Error::Unsupported(_)) => {}
                Err(e) => panic!("{sigma}: {e}"),
            }
        }
    }
}

#[test]
fn quoted_higher_moments() {
    assert_eq!(moment_w(&p("231"), 2).unwrap(), ExactValue::frac(19, 240));
    assert_eq!(moment_w(&p("231"), 3).unwrap(), ExactValue::frac(631, 20160));
    assert_eq!(moment_w(&p("21"), 1).unwrap(), mean_w(&p("21")).unwrap());
    assert!(matches!(moment_w(&p("231"), 4), Err(Error::Unsupported(_))));
}
