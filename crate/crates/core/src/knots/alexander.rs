//! Alexander polynomial of a crossing diagram.
//!
//! Rows come from the Fox derivatives of the Wirtinger relations, one per
//! crossing; deleting one row and one column leaves a matrix whose
//! determinant is `±t^k Δ(t)`. The determinant is computed exactly by
//! fraction-free (Bareiss) elimination over `Z[t]`, first with checked
//! `i128` coefficients and on overflow again with big integers.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

use super::diagram::CrossingDiagram;

trait Coef: Clone + PartialEq + Sized {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    /// Exact quotient; `None` when `o` does not divide `self`.
    fn div_exact(&self, o: &Self) -> Option<Self>;
}

impl Coef for i128 {
    fn zero() -> Self {
        0
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn div_exact(&self, o: &Self) -> Option<Self> {
        (self.checked_rem(*o)? == 0).then(|| self / o)
    }
}

impl Coef for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_exact(&self, o: &Self) -> Option<Self> {
        (Zero::is_zero(&(self % o))).then(|| self / o)
    }
}

/// Coefficients in increasing degree, no trailing zeros (empty is zero).
type Poly<C> = Vec<C>;

fn trim<C: Coef>(mut p: Poly<C>) -> Poly<C> {
    while p.last().is_some_and(Coef::is_zero) {
        p.pop();
    }
    p
}

fn poly_mul<C: Coef>(a: &[C], b: &[C]) -> Option<Poly<C>> {
    if a.is_empty() || b.is_empty() {
        return Some(Vec::new());
    }
    let mut out = vec![C::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y)?)?;
        }
    }
    Some(trim(out))
}

fn poly_sub<C: Coef>(a: &[C], b: &[C]) -> Option<Poly<C>> {
    let mut out = vec![C::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] = x.clone();
    }
    for (i, y) in b.iter().enumerate() {
        out[i] = out[i].sub(y)?;
    }
    Some(trim(out))
}

/// Exact division; `None` on overflow or a nonzero remainder.
fn poly_div_exact<C: Coef>(a: &[C], b: &[C]) -> Option<Poly<C>> {
    if a.is_empty() {
        return Some(Vec::new());
    }
    let db = b.len() - 1;
    if a.len() < b.len() {
        return None;
    }
    let mut rem: Vec<C> = a.to_vec();
    let mut q = vec![C::zero(); a.len() - db];
    let lead = &b[db];
    for k in (0..q.len()).rev() {
        let c = rem[k + db].div_exact(lead)?;
        if !c.is_zero() {
            for (i, y) in b.iter().enumerate() {
                rem[k + i] = rem[k + i].sub(&c.mul(y)?)?;
            }
        }
        q[k] = c;
    }
    rem.iter().all(Coef::is_zero).then(|| trim(q))
}

/// Bareiss determinant; `None` on coefficient overflow.
fn bareiss<C: Coef>(mut m: Vec<Vec<Poly<C>>>) -> Option<Poly<C>> {
    let n = m.len();
    if n == 0 {
        return Some(vec![C::from_i64(1)]);
    }
    let mut prev: Poly<C> = vec![C::from_i64(1)];
    let mut negate = false;
    for k in 0..n {
        if m[k][k].is_empty() {
            let swap = (k + 1..n).find(|&r| !m[r][k].is_empty());
            match swap {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return Some(Vec::new()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = poly_sub(&poly_mul(&m[k][k], &m[i][j])?, &poly_mul(&m[i][k], &m[k][j])?)?;
                m[i][j] = poly_div_exact(&num, &prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    let mut det = m[n - 1][n - 1].clone();
    if negate {
        det = poly_sub(&[], &det)?;
    }
    Some(det)
}

/// Entries of the Alexander matrix as `(a0, a1)` for `a0 + a1 t`.
fn alexander_matrix(d: &CrossingDiagram) -> Vec<Vec<(i64, i64)>> {
    let c = d.crossing_count();
    let mut over_arc = vec![0usize; c];
    let mut in_arc = vec![0usize; c];
    let mut out_arc = vec![0usize; c];
    let mut arc = 0usize;
    for e in d.gauss_code() {
        if e.over {
            over_arc[e.crossing] = arc % c;
        } else {
            in_arc[e.crossing] = arc % c;
            arc += 1;
            out_arc[e.crossing] = arc % c;
        }
    }
    let mut m = vec![vec![(0i64, 0i64); c]; c];
    for (k, x) in d.crossings().iter().enumerate() {
        let add = |m: &mut Vec<Vec<(i64, i64)>>, col: usize, v: (i64, i64)| {
            m[k][col].0 += v.0;
            m[k][col].1 += v.1;
        };
        add(&mut m, over_arc[k], (1, -1));
        if x.sign > 0 {
            add(&mut m, in_arc[k], (0, 1));
            add(&mut m, out_arc[k], (-1, 0));
        } else {
            add(&mut m, in_arc[k], (-1, 0));
            add(&mut m, out_arc[k], (0, 1));
        }
    }
    m
}

fn minor<C: Coef>(m: &[Vec<(i64, i64)>]) -> Vec<Vec<Poly<C>>> {
    let c = m.len();
    m[..c - 1]
        .iter()
        .map(|row| {
            row[..c - 1]
                .iter()
                .map(|&(a0, a1)| trim(vec![C::from_i64(a0), C::from_i64(a1)]))
                .collect()
        })
        .collect()
}

/// Normalized Alexander polynomial: no factor of `t`, positive constant term.
pub fn alexander_polynomial(d: &CrossingDiagram) -> Result<Vec<BigInt>> {
    if d.crossing_count() <= 1 {
        return Ok(vec![BigInt::one()]);
    }
    let m = alexander_matrix(d);
    let det: Vec<BigInt> = match bareiss::<i128>(minor(&m)) {
        Some(p) => p.into_iter().map(BigInt::from).collect(),
        None => bareiss::<BigInt>(minor(&m)).expect("big-integer elimination is exact"),
    };
    let lo = det
        .iter()
        .position(|c| !Zero::is_zero(c))
        .ok_or_else(|| Error::Domain("Alexander determinant vanished; diagram is not a knot".into()))?;
    let mut p: Vec<BigInt> = det[lo..].to_vec();
    if p[0].is_negative() {
        p.iter_mut().for_each(|c| *c = -c.clone());
    }
    Ok(p)
}

pub fn evaluate(poly: &[BigInt], t: i64) -> BigUint {
    let t = BigInt::from(t);
    let v = poly
        .iter()
        .rev()
        .fold(<BigInt as Zero>::zero(), |acc, c| acc * &t + c);
    v.magnitude().clone()
}

/// `|Δ(t)|` of the normalized Alexander polynomial; 1 for diagrams without crossings.
pub fn alexander_at(d: &CrossingDiagram, t: i64) -> Result<BigUint> {
    Ok(evaluate(&alexander_polynomial(d)?, t))
}
