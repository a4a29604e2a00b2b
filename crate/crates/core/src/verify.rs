//! Reference constants: block volumes, `w` constants, and moments of `W`.

use num_bigint::BigUint;
use serde::Serialize;

use crate::dyck::catalan;
use crate::enumerate::enumerate_avoiders;
use crate::exact::{rat, ExactValue};
use crate::moments::{mean_w, second_moment, variance_w_block};
use crate::perm::Permutation;
use crate::polytope::{block_volume, w_const};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub ok: bool,
}

fn check(name: String, expected: ExactValue, got: crate::Result<ExactValue>) -> Check {
    match got {
        Ok(v) => Check {
            name,
            ok: v == expected,
            expected: expected.to_string(),
            got: v.to_string(),
        },
        Err(e) => Check {
            name,
            expected: expected.to_string(),
            got: format!("error: {e}"),
            ok: false,
        },
    }
}

fn perm(s: &str) -> Permutation {
    s.parse().expect("table entries are valid")
}

fn sqrt_pi(n: i64, d: i64) -> ExactValue {
    ExactValue::sqrt_pi().scale(&rat(n, d))
}

pub const VOLUMES: &[(&str, i64, i64)] = &[
    ("21", 1, 1),
    ("231", 1, 2),
    ("312", 1, 2),
    ("2341", 1, 6),
    ("2413", 1, 6),
    ("3142", 1, 6),
    ("3412", 1, 6),
    ("4123", 1, 6),
    ("23451", 1, 24),
    ("51234", 1, 24),
    ("24153", 1, 12),
    ("234561", 1, 120),
    ("612345", 1, 120),
    ("315264", 1, 24),
];

/// `(sigma, w_sigma)`.
pub fn w_table() -> Vec<(&'static str, ExactValue)> {
    let r = ExactValue::two_half_pow(-1);
    vec![
        ("21", r.clone()),
        ("132", r.clone()),
        ("213", r),
        ("231", ExactValue::frac(1, 2)),
        ("312", ExactValue::frac(1, 2)),
        ("123", ExactValue::one()),
    ]
}

/// `(sigma, E W_sigma)`.
pub fn mean_table() -> Vec<(&'static str, ExactValue)> {
    vec![
        ("21", sqrt_pi(1, 4)),
        ("231", ExactValue::frac(1, 4)),
        ("312", ExactValue::frac(1, 4)),
        ("132", sqrt_pi(1, 8)),
        ("213", sqrt_pi(1, 8)),
        ("123", ExactValue::frac(1, 6)),
        ("1243", sqrt_pi(5, 128)),
        ("214365", sqrt_pi(5, 512)),
        ("2314675", ExactValue::frac(31, 3360)),
    ]
}

/// Every exact reference value, recomputed.
pub fn exact_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for &(s, n, d) in VOLUMES {
        let got = block_volume(&perm(s)).map(|v| ExactValue::rational(v.volume));
        out.push(check(format!("volume {s}"), ExactValue::frac(n, d), got));
    }
    for (s, w) in w_table() {
        out.push(check(format!("w {s}"), w, w_const(&perm(s))));
    }
    for (s, m) in mean_table() {
        out.push(check(format!("mean {s}"), m, mean_w(&perm(s))));
    }
    out.push(check(
        "second moment 231".into(),
        ExactValue::frac(19, 240),
        second_moment(&perm("231")),
    ));
    out.push(check(
        "variance 231".into(),
        ExactValue::frac(1, 60),
        variance_w_block(&perm("231")),
    ));
    out.push(check(
        "variance 21".into(),
        ExactValue::frac(5, 24) - ExactValue::pi_pow(1).scale(&rat(1, 16)),
        variance_w_block(&perm("21")),
    ));
    out.push(check(
        "third moment 231".into(),
        ExactValue::frac(631, 20160),
        crate::moments::moment_w(&perm("231"), 3),
    ));
    let tau = perm("321");
    for n in 1..=10usize {
        let got = enumerate_avoiders(n, &tau)
            .map(|it| ExactValue::from(BigUint::from(it.count())));
        out.push(check(
            format!("|S_{n}(321)|"),
            ExactValue::from(catalan(n as u64)),
            got,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_reference_values_reproduce() {
        let checks = exact_checks();
        let bad: Vec<_> = checks.iter().filter(|c| !c.ok).collect();
        assert!(bad.is_empty(), "{bad:#?}");
        assert_eq!(checks.len(), 14 + 6 + 9 + 4 + 10);
    }
}
