//! Integer linear inequalities over transition points and the exact convex hull
//! of a set of 0/1 points.
//!
//! The hull is computed with the double description method on the homogenized
//! cone `{c : c . (1, p) >= 0 for every point p}`. Every extreme ray
//! `c = (c0, a)` of that cone is a facet `a . v >= -c0`. All arithmetic is
//! integer; intermediate combinations run in `i128` and are reduced by their gcd.

use std::collections::HashSet;
use std::fmt;

use crate::bits::BitSet;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DIM: usize = 12;

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `sum(coeffs[i] * v[i]) >= rhs`, kept in canonical form (gcd of all entries is 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearInequality {
    coeffs: Vec<i64>,
    rhs: i64,
}

impl LinearInequality {
    pub fn new(coeffs: Vec<i64>, rhs: i64) -> Self {
        let mut ineq = LinearInequality { coeffs, rhs };
        ineq.canonicalize();
        ineq
    }

    fn canonicalize(&mut self) {
        let g = self.coeffs.iter().fold(i128::from(self.rhs), |g, &c| gcd(g, i128::from(c)));
        if g > 1 {
            let g = g as i64;
            for c in self.coeffs.iter_mut() {
                *c /= g;
            }
            self.rhs /= g;
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn rhs(&self) -> i64 {
        self.rhs
    }

    /// `sum(coeffs[i] * v[i]) - rhs`; the point satisfies the inequality iff this is `>= 0`.
    pub fn evaluate(&self, v: &[u8]) -> Result<i64> {
        if v.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch { expected: self.coeffs.len(), got: v.len() });
        }
        Ok(self.coeffs.iter().zip(v).map(|(&a, &b)| a * i64::from(b)).sum::<i64>() - self.rhs)
    }

    /// [`evaluate`](Self::evaluate) on a point code (vector index 0 is the code's top bit).
    #[inline]
    pub fn eval_code(&self, code: u32) -> i64 {
        let d = self.coeffs.len();
        let mut s = -self.rhs;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if code >> (d - 1 - i) & 1 == 1 {
                s += a;
            }
        }
        s
    }

    pub fn satisfied_by(&self, code: u32) -> bool {
        self.eval_code(code) >= 0
    }

    /// Coefficient-wise sum, re-canonicalized.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a LinearInequality>) -> Option<LinearInequality> {
        let mut it = items.into_iter();
        let first = it.next()?;
        let mut coeffs = first.coeffs.clone();
        let mut rhs = first.rhs;
        for q in it {
            for (c, &a) in coeffs.iter_mut().zip(&q.coeffs) {
                *c += a;
            }
            rhs += q.rhs;
        }
        Some(LinearInequality::new(coeffs, rhs))
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Space-separated `a_{dim-1} .. a_0 b` line of the inequality file format.
    pub fn to_line(&self) -> String {
        let mut parts: Vec<String> = self.coeffs.iter().map(i64::to_string).collect();
        parts.push(self.rhs.to_string());
        parts.join(" ")
    }

    /// Human-readable form with named variables, e.g. `x3 - y0 >= -1`.
    pub fn format_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (a, n) in self.coeffs.iter().zip(names) {
            if *a == 0 {
                continue;
            }
            let sign = if *a < 0 { "-" } else { "+" };
            if out.is_empty() {
                if *a < 0 {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            if a.abs() != 1 {
                out.push_str(&a.abs().to_string());
            }
            out.push_str(n);
        }
        if out.is_empty() {
            out.push('0');
        }
        format!("{out} >= {}", self.rhs)
    }
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Names `x_{q-1} .. x_0 y_{r-1} .. y_0` in the shared vector order.
pub fn transition_var_names(in_bits: u32, out_bits: u32) -> Vec<String> {
    let xs = (0..in_bits).rev().map(|i| format!("x{i}"));
    let ys = (0..out_bits).rev().map(|i| format!("y{i}"));
    xs.chain(ys).collect()
}

/// Ordered inequalities of a common dimension without canonical duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct InequalitySet {
    dim: usize,
    items: Vec<LinearInequality>,
}

impl InequalitySet {
    pub fn new(dim: usize) -> Self {
        InequalitySet { dim, items: Vec::new() }
    }

    /// Keeps the first occurrence of each canonical inequality, in input order.
    pub fn from_items(dim: usize, items: impl IntoIterator<Item = LinearInequality>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for q in items {
            if q.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: q.dim() });
            }
            if seen.insert(q.clone()) {
                out.push(q);
            }
        }
        Ok(InequalitySet { dim, items: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[LinearInequality] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LinearInequality> {
        self.items.iter()
    }

    /// Appends unless a canonical duplicate is already present.
    pub fn push(&mut self, q: LinearInequality) -> Result<bool> {
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: q.dim() });
        }
        if self.items.contains(&q) {
            return Ok(false);
        }
        self.items.push(q);
        Ok(true)
    }

    pub fn sorted(mut self) -> Self {
        self.items.sort();
        self
    }

    pub fn satisfied_by(&self, code: u32) -> bool {
        self.items.iter().all(|q| q.satisfied_by(code))
    }

    /// Serializes to the inequality file format with optional `# key: value` header lines.
    pub fn to_text(&self, header: &[(&str, String)]) -> String {
        let mut out = String::new();
        for (k, v) in header {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        for q in &self.items {
            out.push_str(&q.to_line());
            out.push('\n');
        }
        out
    }

    /// Parses the inequality file format; `dim` is inferred from the first row.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("bad integer {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if nums.len() < 2 {
                return Err(Error::Parse(format!("inequality line too short: {line:?}")));
            }
            rows.push(nums);
        }
        let dim = rows.first().map(|r| r.len() - 1).unwrap_or(0);
        let items = rows
            .into_iter()
            .map(|mut r| {
                if r.len() != dim + 1 {
                    return Err(Error::DimensionMismatch { expected: dim + 1, got: r.len() });
                }
                let rhs = r.pop().unwrap_or(0);
                Ok(LinearInequality::new(r, rhs))
            })
            .collect::<Result<Vec<_>>>()?;
        InequalitySet::from_items(dim, items)
    }
}

/// Impossible points (codes) that violate `ineq`.
pub fn removal_footprint(ineq: &LinearInequality, impossible: &[u32]) -> Vec<u32> {
    impossible.iter().copied().filter(|&c| !ineq.satisfied_by(c)).collect()
}

/// Footprint as a bitset over indices into `impossible`.
pub fn footprint_bits(ineq: &LinearInequality, impossible: &[u32]) -> BitSet {
    BitSet::from_indices(
        impossible.len(),
        impossible.iter().enumerate().filter(|(_, &c)| !ineq.satisfied_by(c)).map(|(i, _)| i),
    )
}

/// Facets and implicit equalities of a point set's convex hull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hull {
    pub facets: InequalitySet,
    /// Each entry `a . v >= b` here stands for the equality `a . v = b`.
    pub equalities: InequalitySet,
}

impl Hull {
    /// Facets followed by both directions of every equality: an exact inequality
    /// description even when the points are not full-dimensional.
    pub fn inequalities(&self) -> InequalitySet {
        let mut out = self.facets.clone();
        for e in self.equalities.iter() {
            let neg = LinearInequality::new(e.coeffs().iter().map(|c| -c).collect(), -e.rhs());
            for q in [e.clone(), neg] {
                out.push(q).expect("same dimension");
            }
        }
        out
    }
}

pub fn convex_hull_hrep(points: &[u32], dim: usize) -> Result<Hull> {
    convex_hull_hrep_with_limit(points, dim, DEFAULT_MAX_DIM)
}

pub fn convex_hull_hrep_with_limit(points: &[u32], dim: usize, max_dim: usize) -> Result<Hull> {
    if dim > max_dim || dim > 31 {
        return Err(Error::DimensionOverflow(dim, max_dim.min(31)));
    }
    if points.is_empty() {
        return Err(Error::Invalid("convex hull of an empty point set".into()));
    }
    let mut pts: Vec<u32> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if let Some(&p) = pts.iter().find(|&&p| dim < 32 && u64::from(p) >= 1u64 << dim) {
        return Err(Error::Invalid(format!("point {p:#x} outside dimension {dim}")));
    }
    let full_d = dim + 1;
    let gens: Vec<Vec<i64>> = pts
        .iter()
        .map(|&p| {
            let mut g = Vec::with_capacity(full_d);
            g.push(1);
            g.extend((0..dim).map(|i| i64::from((p >> (dim - 1 - i)) & 1)));
            g
        })
        .collect();

    // Row basis of the generator matrix, then a column basis inside it.
    let mut ech = Echelon::new(full_d);
    let mut basis_rows = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if ech.add(g) {
            basis_rows.push(i);
            if basis_rows.len() == full_d {
                break;
            }
        }
    }
    let k = basis_rows.len();
    let mut cols = Vec::new();
    let mut col_ech = Echelon::new(k);
    for j in 0..full_d {
        let col: Vec<i64> = basis_rows.iter().map(|&r| gens[r][j]).collect();
        if col_ech.add(&col) {
            cols.push(j);
        }
    }
    debug_assert_eq!(cols.len(), k);
    debug_assert_eq!(cols[0], 0);

    let mut equalities = Vec::new();
    if k < full_d {
        for j in (0..full_d).filter(|j| !cols.contains(j)) {
            let sub: Vec<Vec<i64>> = basis_rows
                .iter()
                .map(|&r| cols.iter().map(|&c| gens[r][c]).chain(std::iter::once(gens[r][j])).collect())
                .collect();
            let z = kernel_vector(&sub, k + 1)?;
            let mut e = vec![0i64; full_d];
            for (t, &c) in cols.iter().enumerate() {
                e[c] = z[t];
            }
            e[j] = z[k];
            let first = e[1..].iter().copied().find(|&x| x != 0).unwrap_or(1);
            if first < 0 {
                e.iter_mut().for_each(|x| *x = -*x);
            }
            equalities.push(LinearInequality::new(e[1..].to_vec(), -e[0]));
        }
    }

    let proj: Vec<Vec<i64>> = gens.iter().map(|g| cols.iter().map(|&c| g[c]).collect()).collect();
    let proj_basis: Vec<usize> = basis_rows.clone();
    let rays = double_description(&proj, &proj_basis)?;

    let mut facets = Vec::with_capacity(rays.len());
    for r in rays {
        let mut c = vec![0i64; full_d];
        for (t, &col) in cols.iter().enumerate() {
            c[col] = r[t];
        }
        let q = LinearInequality::new(c[1..].to_vec(), -c[0]);
        if !q.is_trivial() {
            facets.push(q);
        }
    }
    Ok(Hull {
        facets: InequalitySet::from_items(dim, facets)?.sorted(),
        equalities: InequalitySet::from_items(dim, equalities)?.sorted(),
    })
}

/// Incremental fraction-free row echelon form used for rank decisions.
struct Echelon {
    width: usize,
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    fn new(width: usize) -> Self {
        Echelon { width, rows: Vec::new() }
    }

    /// Adds `v` if it is independent of the rows so far.
    fn add(&mut self, v: &[i64]) -> bool {
        let mut v: Vec<i128> = v.iter().map(|&x| i128::from(x)).collect();
        for (p, row) in &self.rows {
            if v[*p] != 0 {
                let (a, b) = (row[*p], v[*p]);
                for j in 0..self.width {
                    v[j] = v[j] * a - row[j] * b;
                }
                let g = v.iter().fold(0, |g, &x| gcd(g, x));
                if g > 1 {
                    v.iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

fn det_bareiss(mut m: Vec<Vec<i128>>) -> Result<i128> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j]
                    .checked_mul(m[k][k])
                    .and_then(|a| m[i][k].checked_mul(m[k][j]).and_then(|b| a.checked_sub(b)))
                    .ok_or(Error::Overflow)?;
                m[i][j] = num / prev;
            }
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

/// Integer generator of the kernel of an `(n-1) x n` matrix of rank `n-1` (cofactor expansion).
fn kernel_vector(rows: &[Vec<i64>], n: usize) -> Result<Vec<i64>> {
    let mut z = Vec::with_capacity(n);
    for j in 0..n {
        let minor: Vec<Vec<i128>> = rows
            .iter()
            .map(|r| (0..n).filter(|&c| c != j).map(|c| i128::from(r[c])).collect())
            .collect();
        let d = det_bareiss(minor)?;
        z.push(if j % 2 == 0 { d } else { -d });
    }
    let g = z.iter().fold(0, |g, &x| gcd(g, x));
    if g == 0 {
        return Err(Error::Invalid("degenerate kernel computation".into()));
    }
    z.iter().map(|&x| i64::try_from(x / g).map_err(|_| Error::Overflow)).collect()
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| i128::from(x) * i128::from(y)).sum()
}

struct Ray {
    coords: Vec<i64>,
    zeros: BitSet,
}

/// Extreme rays of `{c : g . c >= 0 for all g in gens}`; `basis` indexes `D` independent gens.
fn double_description(gens: &[Vec<i64>], basis: &[usize]) -> Result<Vec<Vec<i64>>> {
    let d = basis.len();
    let n = gens.len();
    let basis_mat: Vec<&Vec<i64>> = basis.iter().map(|&i| &gens[i]).collect();
    let mut rays: Vec<Ray> = Vec::with_capacity(d);
    for i in 0..d {
        let others: Vec<Vec<i64>> =
            (0..d).filter(|&j| j != i).map(|j| basis_mat[j].clone()).collect();
        let mut c = if d == 1 { vec![1] } else { kernel_vector(&others, d)? };
        if dot(basis_mat[i], &c) < 0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        let zeros = BitSet::from_indices(n, basis.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &g)| g));
        rays.push(Ray { coords: c, zeros });
    }
    let in_basis: HashSet<usize> = basis.iter().copied().collect();
    let need = d.saturating_sub(2);

    for (gi, g) in gens.iter().enumerate() {
        if in_basis.contains(&gi) {
            continue;
        }
        let vals: Vec<i128> = rays.iter().map(|r| dot(g, &r.coords)).collect();
        if vals.iter().all(|&v| v >= 0) {
            for (r, &v) in rays.iter_mut().zip(&vals) {
                if v == 0 {
                    r.zeros.insert(gi);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < 0).collect();
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.count() < need {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(t, r)| t == p || t == q || !common.is_subset(&r.zeros));
                if !adjacent {
                    continue;
                }
                let (sp, sq) = (vals[p], vals[q]);
                let mut c: Vec<i128> = rays[q]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(&a, &b)| sp * i128::from(a) - sq * i128::from(b))
                    .collect();
                let gg = c.iter().fold(0, |acc, &x| gcd(acc, x));
                if gg > 1 {
                    c.iter_mut().for_each(|x| *x /= gg);
                }
                let coords = c
                    .into_iter()
                    .map(|x| i64::try_from(x).map_err(|_| Error::Overflow))
                    .collect::<Result<Vec<_>>>()?;
                let mut zeros = common;
                zeros.insert(gi);
                fresh.push(Ray { coords, zeros });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(pos.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i] > 0 {
                next.push(r);
            } else if vals[i] == 0 {
                r.zeros.insert(gi);
                next.push(r);
            }
        }
        next.extend(fresh);
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.coords).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn cube_completeness(hull: &InequalitySet, possible: &[u32], dim: usize) {
        for code in 0..1u32 << dim {
            let inside = possible.contains(&code);
            assert_eq!(hull.satisfied_by(code), inside, "point {code:b}");
        }
    }

    #[test]
    fn unit_square() {
        let h = convex_hull_hrep(&[0b00, 0b01, 0b10, 0b11], 2).unwrap();
        let expect = vec![
            LinearInequality::new(vec![-1, 0], -1),
            LinearInequality::new(vec![0, -1], -1),
            LinearInequality::new(vec![0, 1], 0),
            LinearInequality::new(vec![1, 0], 0),
        ];
        assert_eq!(h.facets.items(), expect.as_slice());
        assert!(h.equalities.is_empty());
    }

    #[test]
    fn degenerate_inputs_report_equalities() {
        // Points on the plane v0 = v2 inside the 3-cube.
        let pts = [0b000, 0b010, 0b101, 0b111];
        let h = convex_hull_hrep(&pts, 3).unwrap();
        assert_eq!(h.equalities.len(), 1);
        let e = &h.equalities.items()[0];
        for &p in &pts {
            assert_eq!(e.eval_code(p), 0);
        }
        assert_eq!(h.facets.len(), 4);
        for &p in &pts {
            assert!(h.facets.satisfied_by(p));
        }
        let single = convex_hull_hrep(&[0b101], 3).unwrap();
        assert_eq!(single.equalities.len(), 3);
        assert!(single.facets.is_empty());
    }

    #[test]
    fn four_bit_facet_counts() {
        for (name, count) in [("gift", 237), ("present", 327), ("mibs", 378), ("piccolo", 202), ("lblock_s0", 205), ("lilliput", 324)] {
            let t = catalog::sbox(name).unwrap().ddt().transitions();
            let h = convex_hull_hrep(t.possible(), 8).unwrap();
            assert_eq!(h.facets.len(), count, "{name}");
            assert!(h.equalities.is_empty());
            cube_completeness(&h.facets, t.possible(), 8);
        }
    }

    #[test]
    fn evaluate_examples() {
        let q = LinearInequality::new(vec![-1, 1, -1, 1, 1, -1, -1, -1], -4);
        assert_eq!(q.evaluate(&[1, 0, 1, 0, 0, 1, 1, 1]).unwrap(), -1);
        assert_eq!(q.eval_code(0b1010_0111), -1);
        for code in 0..256u32 {
            if code != 0b1010_0111 {
                assert!(q.eval_code(code) >= 0);
            }
        }
        let zero = LinearInequality::new(vec![0; 4], 0);
        assert_eq!(zero.evaluate(&[1, 1, 0, 1]).unwrap(), 0);
        assert!(q.evaluate(&[1, 0]).is_err());
    }

    #[test]
    fn dimension_limit() {
        assert!(matches!(convex_hull_hrep(&[0], 13), Err(Error::DimensionOverflow(13, 12))));
        assert!(convex_hull_hrep_with_limit(&[0, 1], 13, 13).is_ok());
    }

    #[test]
    fn file_round_trip() {
        let set = InequalitySet::from_items(
            3,
            vec![LinearInequality::new(vec![1, -1, 0], -1), LinearInequality::new(vec![2, 2, 2], 2)],
        )
        .unwrap();
        assert_eq!(set.items()[1], LinearInequality::new(vec![1, 1, 1], 1));
        let text = set.to_text(&[("method", "test".into())]);
        assert_eq!(InequalitySet::parse(&text).unwrap(), set);
    }

    #[test]
    fn footprints_cover_impossible_set() {
        let t = catalog::sbox("gift").unwrap().ddt().transitions();
        let h = convex_hull_hrep(t.possible(), 8).unwrap();
        let mut covered = BitSet::new(t.impossible().len());
        for q in h.facets.iter() {
            covered.union_with(&footprint_bits(q, t.impossible()));
            assert_eq!(removal_footprint(q, &[]), Vec::<u32>::new());
        }
        assert_eq!(covered.count(), t.impossible().len());
    }

    #[test]
    fn names_render() {
        let q = LinearInequality::new(vec![-1, 1, 0, 2], -4);
        let names = transition_var_names(2, 2);
        assert_eq!(q.format_with(&names), "-x1 + x0 + 2y0 >= -4");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn hull_is_sound_and_complete(mask in proptest::collection::vec(any::<bool>(), 32)) {
                let pts: Vec<u32> = (0..32u32).filter(|&c| mask[c as usize]).collect();
                prop_assume!(!pts.is_empty());
                let h = convex_hull_hrep(&pts, 5).unwrap();
                for code in 0..32u32 {
                    let inside = h.facets.satisfied_by(code)
                        && h.equalities.iter().all(|e| e.eval_code(code) == 0);
                    prop_assert_eq!(inside, pts.contains(&code));
                }
                for q in h.facets.iter() {
                    prop_assert_eq!(&LinearInequality::new(q.coeffs().to_vec(), q.rhs()), q);
                    // Every facet is tight on at least one input point.
                    prop_assert!(pts.iter().any(|&p| q.eval_code(p) == 0));
                }
            }
        }
    }
}
