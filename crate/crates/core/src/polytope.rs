//! The difference-constraint polytope of a 321-avoiding block and its exact
//! volume, and the constant `w_sigma` built from block volumes.
//!
//! Volume algorithm: every vertex is the solution of `m - 1` tight
//! constraints that form a spanning tree on the variables (with `x_1 = 0`
//! as root), so vertices are integral and found by walking the tree. The
//! vertex set is then cut into simplices by a pulling triangulation over the
//! face lattice, and simplex volumes are summed as exact determinants.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ExactValue;
use crate::perm::Permutation;

/// Constraint between positions `i < j` of the block, 1-based, where `i` is
/// an exceedance and `j` is not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairConstraint {
    pub i: usize,
    pub j: usize,
    pub sense: Sense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    /// `x_j >= x_i + 1` (`sigma_i < sigma_j`)
    AtLeastOneAbove,
    /// `x_j <= x_i + 1` (`sigma_i > sigma_j`)
    AtMostOneAbove,
}

/// `x_b - x_a <= c` over 1-based variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub a: usize,
    pub b: usize,
    pub c: i64,
}

impl Inequality {
    fn holds(&self, x: &[i64]) -> bool {
        x[self.b - 1] - x[self.a - 1] <= self.c
    }

    fn tight(&self, x: &[i64]) -> bool {
        x[self.b - 1] - x[self.a - 1] == self.c
    }
}

/// Variables `x_2..x_m` with `x_1 = 0`, the chain `0 <= x_2 <= ... <= x_m`,
/// and one [`PairConstraint`] per exceedance/non-exceedance pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintSystem {
    pub m: usize,
    pub pairs: Vec<PairConstraint>,
}

impl ConstraintSystem {
    pub fn build(sigma: &Permutation) -> Result<Self> {
        let m = sigma.len();
        if m < 2 {
            return Err(Error::TrivialBlock);
        }
        if !sigma.is_indecomposable() {
            return Err(Error::Decomposable(sigma.to_string()));
        }
        sigma.require_321_avoiding()?;
        let s = sigma.values();
        let exceeds = |i: usize| s[i - 1] as usize > i;
        let mut pairs = Vec::new();
        for i in 1..=m {
            for j in i + 1..=m {
                if exceeds(i) && !exceeds(j) {
                    let sense = if s[i - 1] < s[j - 1] {
                        Sense::AtLeastOneAbove
                    } else {
                        Sense::AtMostOneAbove
                    };
                    pairs.push(PairConstraint { i, j, sense });
                }
            }
        }
        Ok(ConstraintSystem { m, pairs })
    }

    pub fn dimension(&self) -> usize {
        self.m - 1
    }

    /// All constraints in the form `x_b - x_a <= c`, chain first.
    pub fn inequalities(&self) -> Vec<Inequality> {
        let mut out: Vec<Inequality> = (1..self.m)
            .map(|i| Inequality { a: i + 1, b: i, c: 0 })
            .collect();
        for p in &self.pairs {
            out.push(match p.sense {
                Sense::AtLeastOneAbove => Inequality { a: p.j, b: p.i, c: -1 },
                Sense::AtMostOneAbove => Inequality { a: p.i, b: p.j, c: 1 },
            });
        }
        out
    }

    /// Membership test for a point `(x_2, .., x_m)`.
    pub fn contains(&self, point: &[f64]) -> bool {
        let x = |k: usize| if k == 1 { 0.0 } else { point[k - 2] };
        self.inequalities()
            .iter()
            .all(|q| x(q.b) - x(q.a) <= q.c as f64)
    }

    /// Vertices as integer points `(x_2, .., x_m)`, sorted.
    pub fn vertices(&self) -> Vec<Vec<i64>> {
        let ineqs = self.inequalities();
        let mut found = BTreeSet::new();
        let mut chosen = Vec::with_capacity(self.m - 1);
        let dsu = Dsu::new(self.m);
        self.spanning_trees(&ineqs, 0, &dsu, &mut chosen, &mut found);
        found.into_iter().map(|x: Vec<i64>| x[1..].to_vec()).collect()
    }

    fn spanning_trees(
        &self,
        ineqs: &[Inequality],
        from: usize,
        dsu: &Dsu,
        chosen: &mut Vec<usize>,
        found: &mut BTreeSet<Vec<i64>>,
    ) {
        if chosen.len() == self.m - 1 {
            let x = solve_tree(self.m, ineqs, chosen);
            debug_assert!(chosen.iter().all(|&k| ineqs[k].tight(&x)));
            if ineqs.iter().all(|q| q.holds(&x)) {
                found.insert(x);
            }
            return;
        }
        let needed = self.m - 1 - chosen.len();
        for k in from..ineqs.len() {
            if ineqs.len() - k < needed {
                break;
            }
            let (a, b) = (ineqs[k].a - 1, ineqs[k].b - 1);
            if dsu.find(a) == dsu.find(b) {
                continue;
            }
            let mut next = dsu.clone();
            next.union(a, b);
            chosen.push(k);
            self.spanning_trees(ineqs, k + 1, &next, chosen, found);
            chosen.pop();
        }
    }
}

fn solve_tree(m: usize, ineqs: &[Inequality], tree: &[usize]) -> Vec<i64> {
    let mut x = vec![None; m];
    x[0] = Some(0i64);
    let mut progress = true;
    while progress {
        progress = false;
        for &k in tree {
            let q = ineqs[k];
            let (a, b) = (q.a - 1, q.b - 1);
            match (x[a], x[b]) {
                (Some(xa), None) => {
                    x[b] = Some(xa + q.c);
                    progress = true;
                }
                (None, Some(xb)) => {
                    x[a] = Some(xb - q.c);
                    progress = true;
                }
                _ => {}
            }
        }
    }
    x.into_iter().map(|v| v.expect("spanning tree reaches every variable")).collect()
}

#[derive(Clone)]
struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.parent[ra] = rb;
    }
}

/// `v_sigma` and, when `(m-1)! v_sigma` is an integer, `nu_sigma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolytopeVolume {
    pub volume: BigRational,
    pub normalized: Option<BigInt>,
}

impl fmt::Display for PolytopeVolume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.volume.is_integer() {
            write!(f, "{}", self.volume.numer())
        } else {
            write!(f, "{}/{}", self.volume.numer(), self.volume.denom())
        }
    }
}

pub fn exact_volume(system: &ConstraintSystem) -> Result<PolytopeVolume> {
    let d = system.dimension();
    let vertices = system.vertices();
    if vertices.len() < d + 1 || affine_rank(&vertices, &(0..vertices.len()).collect::<Vec<_>>()) < d {
        return Err(Error::Degenerate);
    }
    let ineqs = system.inequalities();
    let tight: Vec<Vec<bool>> = ineqs
        .iter()
        .map(|q| {
            vertices
                .iter()
                .map(|v| {
                    let mut full = Vec::with_capacity(d + 1);
                    full.push(0);
                    full.extend_from_slice(v);
                    q.tight(&full)
                })
                .collect()
        })
        .collect();

    let mut triangulation = Pulling {
        vertices: &vertices,
        tight: &tight,
        memo: HashMap::new(),
    };
    let all: Vec<usize> = (0..vertices.len()).collect();
    let simplices = triangulation.pull(&all, d);

    let mut total = BigInt::zero();
    for s in &simplices {
        let rows: Vec<Vec<i128>> = s[1..]
            .iter()
            .map(|&k| {
                vertices[k]
                    .iter()
                    .zip(&vertices[s[0]])
                    .map(|(a, b)| (a - b) as i128)
                    .collect()
            })
            .collect();
        total += BigInt::from(determinant(rows).abs());
    }
    let factorial: BigInt = (1..=d as u64).map(BigInt::from).product();
    let volume = BigRational::new(total, factorial.clone());
    if volume.is_zero() {
        return Err(Error::Degenerate);
    }
    let scaled = &volume * BigRational::from_integer(factorial);
    let normalized = scaled.is_integer().then(|| scaled.to_integer());
    Ok(PolytopeVolume { volume, normalized })
}

struct Pulling<'a> {
    vertices: &'a [Vec<i64>],
    tight: &'a [Vec<bool>],
    memo: HashMap<Vec<usize>, Vec<Vec<usize>>>,
}

impl Pulling<'_> {
    /// Simplices (as vertex-index lists) triangulating the face spanned by
    /// `face`, which has dimension `dim`. Apex is the smallest index.
    fn pull(&mut self, face: &[usize], dim: usize) -> Vec<Vec<usize>> {
        if dim == 0 {
            return vec![vec![face[0]]];
        }
        if let Some(done) = self.memo.get(face) {
            return done.clone();
        }
        let apex = face[0];
        let mut facets = BTreeSet::new();
        for row in self.tight {
            if row[apex] {
                continue;
            }
            let sub: Vec<usize> = face.iter().copied().filter(|&v| row[v]).collect();
            if sub.len() >= dim && affine_rank(self.vertices, &sub) == dim - 1 {
                facets.insert(sub);
            }
        }
        let mut out = Vec::new();
        for facet in facets {
            for simplex in self.pull(&facet, dim - 1) {
                let mut s = Vec::with_capacity(dim + 1);
                s.push(apex);
                s.extend(simplex);
                out.push(s);
            }
        }
        self.memo.insert(face.to_vec(), out.clone());
        out
    }
}

/// Affine rank of the points `idx` by fraction-free elimination.
fn affine_rank(points: &[Vec<i64>], idx: &[usize]) -> usize {
    if idx.len() <= 1 {
        return 0;
    }
    let base = &points[idx[0]];
    let mut rows: Vec<Vec<i128>> = idx[1..]
        .iter()
        .map(|&k| points[k].iter().zip(base).map(|(a, b)| (a - b) as i128).collect())
        .collect();
    let cols = base.len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col] != 0 {
                let f = row[col];
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x = *x * pivot[col] - y * f;
                }
                let g = row.iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                if g > 1 {
                    row.iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Bareiss determinant; exact for integer input.
fn determinant(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        1
    } else {
        sign * a[n - 1][n - 1]
    }
}

/// `v_sigma` for a 321-avoiding block of length at least two.
pub fn block_volume(sigma: &Permutation) -> Result<PolytopeVolume> {
    exact_volume(&ConstraintSystem::build(sigma)?)
}

/// `w_sigma`: product over blocks of `2^((m_p - 3)/2) v_{block}`, with
/// singleton blocks contributing 1.
pub fn w_const(sigma: &Permutation) -> Result<ExactValue> {
    sigma.require_321_avoiding()?;
    let mut w = ExactValue::one();
    for block in sigma.blocks().perms() {
        let m = block.len();
        if m == 1 {
            continue;
        }
        let v = block_volume(block)?;
        let factor = ExactValue::two_half_pow(m as i64 - 3).scale(&v.volume);
        w = &w * &factor;
    }
    Ok(w)
}

/// `(m - 1)! v_sigma` as an exact rational, whether or not it is integral.
pub fn normalized_volume(v: &PolytopeVolume, m: usize) -> BigRational {
    let f: BigInt = (1..m as u64).map(BigInt::from).product();
    &v.volume * BigRational::from_integer(f)
}

impl PolytopeVolume {
    pub fn is_integral_normalized(&self) -> bool {
        self.normalized.as_ref().is_some_and(|n| n >= &BigInt::one())
    }
}
