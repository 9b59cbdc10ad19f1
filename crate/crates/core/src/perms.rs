//! Radix-`r` vectors, the shift permutations `x -> x + i*v` on `[0, r^m)`,
//! and the row sets each parity rebuilds.
//!
//! A row index `x` doubles as its length-`m` radix-`r` digit string, most
//! significant digit first, so `e_1` is the vector whose leading digit is 1.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("radix {0} is below 2")]
    BadRadix(u32),
    #[error("digit {digit} is out of range for radix {radix}")]
    BadDigit { digit: u32, radix: u32 },
    #[error("vectors of shape (r={0}, m={1}) and (r={2}, m={3}) cannot be combined")]
    ShapeMismatch(u32, usize, u32, usize),
    #[error("the zero vector needs the all-ones access rule")]
    ZeroVector,
    #[error("vector {0} has gcd(v_1..v_m, r) > 1")]
    NotAdmissible(RVector),
    #[error("vector {0} appears twice in the family")]
    Duplicate(RVector),
    #[error("weight {w} does not divide length {m} (or is below 2)")]
    BadBlocks { w: usize, m: usize },
    #[error("empty vector family")]
    Empty,
    #[error("row {row} is outside [0, {rows})")]
    RowOutOfRange { row: usize, rows: usize },
}

/// A vector in `Z_r^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RVector {
    radix: u32,
    digits: Vec<u32>,
}

impl RVector {
    pub fn new(radix: u32, digits: Vec<u32>) -> Result<RVector, PermError> {
        if radix < 2 {
            return Err(PermError::BadRadix(radix));
        }
        if let Some(&digit) = digits.iter().find(|&&d| d >= radix) {
            return Err(PermError::BadDigit { digit, radix });
        }
        Ok(RVector { radix, digits })
    }

    pub fn zero(radix: u32, m: usize) -> RVector {
        RVector {
            radix,
            digits: vec![0; m],
        }
    }

    /// `e_l` for `l` in `1..=m`; `e_0` is the zero vector.
    pub fn unit(radix: u32, m: usize, l: usize) -> RVector {
        let mut v = RVector::zero(radix, m);
        if l > 0 {
            v.digits[l - 1] = 1;
        }
        v
    }

    /// Parses a digit string such as `"10"` or `"0201"`.
    pub fn parse(radix: u32, text: &str) -> Result<RVector, PermError> {
        let digits = text
            .trim()
            .chars()
            .map(|c| {
                c.to_digit(36).ok_or(PermError::BadDigit {
                    digit: u32::MAX,
                    radix,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        RVector::new(radix, digits)
    }

    pub fn from_index(radix: u32, m: usize, mut x: usize) -> RVector {
        let mut digits = vec![0; m];
        for d in digits.iter_mut().rev() {
            *d = (x % radix as usize) as u32;
            x /= radix as usize;
        }
        RVector { radix, digits }
    }

    pub fn to_index(&self) -> usize {
        self.digits
            .iter()
            .fold(0, |acc, &d| acc * self.radix as usize + d as usize)
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Usable in a code iff `gcd(v_1, ..., v_m, r) = 1`.
    pub fn is_admissible(&self) -> bool {
        self.digits.iter().fold(self.radix, |g, &d| g.gcd(&d)) == 1
    }

    /// Inner product with another vector over `Z_r`.
    pub fn dot(&self, other: &RVector) -> u32 {
        let r = self.radix;
        self.digits
            .iter()
            .zip(&other.digits)
            .fold(0, |acc, (&a, &b)| (acc + a * b) % r)
    }

    /// Inner product with the digit string of row `x`.
    pub fn dot_row(&self, x: usize) -> u32 {
        let r = self.radix as usize;
        let mut x = x;
        let mut acc = 0usize;
        for &d in self.digits.iter().rev() {
            acc += (x % r) * d as usize;
            x /= r;
        }
        (acc % r) as u32
    }

    /// Digit-wise `self - other` over `Z_r`.
    pub fn sub(&self, other: &RVector) -> RVector {
        let r = self.radix;
        RVector {
            radix: r,
            digits: self
                .digits
                .iter()
                .zip(&other.digits)
                .map(|(&a, &b)| (a + r - b) % r)
                .collect(),
        }
    }

    fn check_shape(&self, other: &RVector) -> Result<(), PermError> {
        if self.radix != other.radix || self.len() != other.len() {
            return Err(PermError::ShapeMismatch(
                self.radix,
                self.len(),
                other.radix,
                other.len(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for RVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &d in &self.digits {
            write!(f, "{}", char::from_digit(d, 36).unwrap_or('?'))?;
        }
        Ok(())
    }
}

fn rows(radix: u32, m: usize) -> usize {
    (radix as usize).pow(m as u32)
}

/// Digit-wise `x + scale * v` over `Z_r` (the permutation `f_v^scale`).
fn shift(v: &RVector, scale: i64, x: usize) -> usize {
    let r = v.radix as usize;
    let scale = scale.rem_euclid(r as i64) as usize;
    if scale == 0 {
        return x;
    }
    let mut rest = x;
    let mut place = 1usize;
    let mut out = 0usize;
    for &d in v.digits.iter().rev() {
        let digit = (rest % r + scale * d as usize) % r;
        out += digit * place;
        rest /= r;
        place *= r;
    }
    out
}

/// `f_v^i(x) = x + i*v`.
pub fn perm_apply(v: &RVector, i: u32, x: usize) -> Result<usize, PermError> {
    check_row(v, x)?;
    Ok(shift(v, i as i64, x))
}

/// `f_v^{-i}(x) = x - i*v`, the inverse of [`perm_apply`].
pub fn perm_unapply(v: &RVector, i: u32, x: usize) -> Result<usize, PermError> {
    check_row(v, x)?;
    Ok(shift(v, -(i as i64), x))
}

fn check_row(v: &RVector, x: usize) -> Result<(), PermError> {
    let p = rows(v.radix, v.len());
    if x >= p {
        return Err(PermError::RowOutOfRange { row: x, rows: p });
    }
    Ok(())
}

/// The rows of column `owner` rebuilt from parity `parity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessSet {
    pub owner: RVector,
    pub parity: u32,
    pub rows: Vec<usize>,
}

/// `X_v^s = {x : x.v = -s}` for nonzero `v`; for the zero vector (only with
/// `special_zero`) the all-ones functional is used instead:
/// `X_0^s = {x : x.(1,...,1) = s}`.
pub fn access_set(v: &RVector, s: u32, special_zero: bool) -> Result<AccessSet, PermError> {
    let r = v.radix;
    let p = rows(r, v.len());
    let rows: Vec<usize> = if v.is_zero() {
        if !special_zero {
            return Err(PermError::ZeroVector);
        }
        let ones = RVector {
            radix: r,
            digits: vec![1; v.len()],
        };
        (0..p).filter(|&x| ones.dot_row(x) == s % r).collect()
    } else {
        if !v.is_admissible() {
            return Err(PermError::NotAdmissible(v.clone()));
        }
        let target = (r - s % r) % r;
        (0..p).filter(|&x| v.dot_row(x) == target).collect()
    };
    Ok(AccessSet {
        owner: v.clone(),
        parity: s,
        rows,
    })
}

/// `c_{v,u} = v.(v - u) - 1` over `Z_r`.
pub fn coupling(v: &RVector, u: &RVector) -> u32 {
    let r = v.radix;
    (v.dot(&v.sub(u)) + r - 1) % r
}

/// `|f_u^{-i} f_v^i(X_v^i) ∩ f_u^{-j} f_v^j(X_v^j)|` by the coset argument:
/// the two shifted sets coincide when `(i - j) c_{v,u} = 0` and are
/// disjoint otherwise.
pub fn intersection_size(v: &RVector, u: &RVector, i: u32, j: u32) -> Result<usize, PermError> {
    v.check_shape(u)?;
    for w in [v, u] {
        if w.is_zero() {
            return Err(PermError::ZeroVector);
        }
        if !w.is_admissible() {
            return Err(PermError::NotAdmissible(w.clone()));
        }
    }
    let r = v.radix as i64;
    let c = coupling(v, u) as i64;
    let block = rows(v.radix, v.len()) / v.radix as usize;
    if ((i as i64 - j as i64) * c).rem_euclid(r) == 0 {
        Ok(block)
    } else {
        Ok(0)
    }
}

/// Rows of column `u` read when the column of `v` is rebuilt:
/// `|∪_i f_u^{-i} f_v^i(X_v^i)| = r^m / gcd(r, c_{v,u})`.
pub fn union_size(v: &RVector, u: &RVector) -> Result<usize, PermError> {
    intersection_size(v, u, 0, 0)?;
    let g = v.radix.gcd(&coupling(v, u)) as usize;
    Ok(rows(v.radix, v.len()) / g)
}

/// `|B_v \ B_u|` for binary vectors: positions where `v` is 1 and `u` is 0.
pub fn difference_weight(v: &RVector, u: &RVector) -> usize {
    v.digits
        .iter()
        .zip(&u.digits)
        .filter(|&(&a, &b)| a != 0 && b == 0)
        .count()
}

/// An ordered vector family defining one zigzag permutation per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    radix: u32,
    m: usize,
    vectors: Vec<RVector>,
    zero_index: Option<usize>,
}

impl Family {
    /// `{e_0 = 0, e_1, ..., e_m}` with the all-ones rule for `e_0`.
    pub fn standard_basis(m: usize, radix: u32) -> Result<Family, PermError> {
        if radix < 2 {
            return Err(PermError::BadRadix(radix));
        }
        if m == 0 {
            return Err(PermError::Empty);
        }
        Ok(Family {
            radix,
            m,
            vectors: (0..=m).map(|l| RVector::unit(radix, m, l)).collect(),
            zero_index: Some(0),
        })
    }

    /// Binary vectors of weight `w` with exactly one 1 in each of the `w`
    /// equal blocks of positions, in lexicographic order of the chosen
    /// positions.
    pub fn weight_w(m: usize, w: usize) -> Result<Family, PermError> {
        if w < 2 || m == 0 || m % w != 0 {
            return Err(PermError::BadBlocks { w, m });
        }
        let block = m / w;
        let count = block.pow(w as u32);
        let vectors = (0..count)
            .map(|mut code| {
                let mut picks = vec![0; w];
                for pick in picks.iter_mut().rev() {
                    *pick = code % block;
                    code /= block;
                }
                let mut v = RVector::zero(2, m);
                for (b, &offset) in picks.iter().enumerate() {
                    v.digits[b * block + offset] = 1;
                }
                v
            })
            .collect();
        Ok(Family {
            radix: 2,
            m,
            vectors,
            zero_index: None,
        })
    }

    /// A user-chosen family. Every vector must be nonzero and admissible.
    pub fn explicit(radix: u32, vectors: Vec<RVector>) -> Result<Family, PermError> {
        let first = vectors.first().ok_or(PermError::Empty)?;
        let m = first.len();
        let mut seen = BTreeSet::new();
        for v in &vectors {
            if v.radix != radix || v.len() != m {
                return Err(PermError::ShapeMismatch(radix, m, v.radix, v.len()));
            }
            if v.is_zero() {
                return Err(PermError::ZeroVector);
            }
            if !v.is_admissible() {
                return Err(PermError::NotAdmissible(v.clone()));
            }
            if !seen.insert(v.clone()) {
                return Err(PermError::Duplicate(v.clone()));
            }
        }
        Ok(Family {
            radix,
            m,
            vectors,
            zero_index: None,
        })
    }

    /// Parses the comma-separated digit-string form, e.g. `"00,10,01"`.
    /// A family exactly equal to the standard basis keeps its zero vector.
    pub fn parse(radix: u32, text: &str) -> Result<Family, PermError> {
        let vectors = text
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| RVector::parse(radix, t))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = vectors.first() {
            if let Ok(basis) = Family::standard_basis(first.len(), radix) {
                if basis.vectors == vectors {
                    return Ok(basis);
                }
            }
        }
        Family::explicit(radix, vectors)
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rows(&self) -> usize {
        rows(self.radix, self.m)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[RVector] {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> &RVector {
        &self.vectors[j]
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.zero_index
    }

    pub fn is_standard_basis(&self) -> bool {
        self.zero_index == Some(0) && self.vectors.len() == self.m + 1
    }

    /// Comma-separated digit strings.
    pub fn to_text(&self) -> String {
        self.vectors
            .iter()
            .map(RVector::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Rows of member `j` rebuilt by parity `s`.
    pub fn access_set(&self, j: usize, s: u32) -> AccessSet {
        access_set(&self.vectors[j], s, self.zero_index == Some(j))
            .expect("family members are admissible")
    }

    /// `f_{v_j}^s(x)`.
    pub fn apply(&self, j: usize, s: u32, x: usize) -> usize {
        shift(&self.vectors[j], s as i64, x)
    }

    /// `f_{v_j}^{-s}(x)`.
    pub fn unapply(&self, j: usize, s: u32, x: usize) -> usize {
        shift(&self.vectors[j], -(s as i64), x)
    }

    /// Rows of member `other` inside the parity-`s` sets used to rebuild
    /// member `target`: `f_u^{-s} f_v^s (X_v^s)`, built explicitly.
    pub fn rows_read(&self, target: usize, other: usize, s: u32) -> BTreeSet<usize> {
        self.access_set(target, s)
            .rows
            .into_iter()
            .map(|x| self.unapply(other, s, self.apply(target, s, x)))
            .collect()
    }

    /// Size of `∪_s rows_read(target, other, s)`, by explicit construction.
    pub fn union_rows_read(&self, target: usize, other: usize) -> usize {
        (0..self.radix)
            .flat_map(|s| self.rows_read(target, other, s))
            .collect::<BTreeSet<_>>()
            .len()
    }
}

/// One failure of `f_u^i(X_v^0) = f_v^i(X_v^i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub v: usize,
    pub u: usize,
    pub parity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrthogonalityReport {
    pub violations: Vec<Violation>,
}

impl OrthogonalityReport {
    pub fn is_orthogonal(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `f_u^i(X_v^0) = f_v^i(X_v^i)` for every ordered pair `u != v` and
/// every parity `i`, by building both sets.
pub fn orthogonality_check(family: &Family) -> OrthogonalityReport {
    let mut report = OrthogonalityReport::default();
    for v in 0..family.len() {
        let base = family.access_set(v, 0).rows;
        for i in 0..family.radix {
            let rebuilt: BTreeSet<usize> = family
                .access_set(v, i)
                .rows
                .iter()
                .map(|&x| family.apply(v, i, x))
                .collect();
            for u in (0..family.len()).filter(|&u| u != v) {
                let moved: BTreeSet<usize> = base.iter().map(|&x| family.apply(u, i, x)).collect();
                if moved != rebuilt {
                    report.violations.push(Violation { v, u, parity: i });
                }
            }
        }
    }
    report
}

/// A permutation of `[0, p)` together with a half-size row subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationWithSet {
    pub perm: Vec<usize>,
    pub set: Vec<usize>,
}

/// Exhaustive search for the largest family of pairwise orthogonal
/// (permutation, half-set) pairs on `[0, 2^m)`, for two parities.
///
/// Pairs `i != j` are orthogonal when `f_i(X_i) ∩ f_j(X_i) = ∅` in both
/// directions. Only feasible for `m <= 2`.
pub fn largest_orthogonal_family(m: usize) -> Vec<PermutationWithSet> {
    assert!((1..=2).contains(&m), "search is exhaustive; m must be 1 or 2");
    let p = 1usize << m;
    let perms = all_permutations(p);
    let sets: Vec<Vec<usize>> = (0u32..(1 << p))
        .filter(|mask| mask.count_ones() as usize == p / 2)
        .map(|mask| (0..p).filter(|&x| mask >> x & 1 == 1).collect())
        .collect();
    let candidates: Vec<PermutationWithSet> = perms
        .iter()
        .flat_map(|perm| {
            sets.iter().map(move |set| PermutationWithSet {
                perm: perm.clone(),
                set: set.clone(),
            })
        })
        .collect();

    let disjoint_images = |a: &PermutationWithSet, b: &PermutationWithSet| {
        let image: BTreeSet<usize> = a.set.iter().map(|&x| a.perm[x]).collect();
        a.set.iter().all(|&x| !image.contains(&b.perm[x]))
    };
    let n = candidates.len();
    let compatible: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    i != j
                        && disjoint_images(&candidates[i], &candidates[j])
                        && disjoint_images(&candidates[j], &candidates[i])
                })
                .collect()
        })
        .collect();

    let mut best = Vec::new();
    let mut current = Vec::new();
    extend_clique(&compatible, (0..n).collect(), &mut current, &mut best);
    best.into_iter().map(|i| candidates[i].clone()).collect()
}

fn extend_clique(
    compatible: &[Vec<bool>],
    pool: Vec<usize>,
    current: &mut Vec<usize>,
    best: &mut Vec<usize>,
) {
    if current.len() > best.len() {
        *best = current.clone();
    }
    for (idx, &c) in pool.iter().enumerate() {
        if current.len() + pool.len() - idx <= best.len() {
            return;
        }
        let next: Vec<usize> = pool[idx + 1..]
            .iter()
            .copied()
            .filter(|&d| compatible[c][d])
            .collect();
        current.push(c);
        extend_clique(compatible, next, current, best);
        current.pop();
    }
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in all_permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(radix: u32, s: &str) -> RVector {
        RVector::parse(radix, s).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(perm_apply(&v(2, "10"), 1, 3), Ok(1));
        // 5 = (1,2) in base 3, so 5 + 2*(0,1) = (1,1)
        assert_eq!(perm_apply(&v(3, "01"), 2, 5), Ok(4));
        for x in 0..9 {
            assert_eq!(perm_apply(&v(3, "12"), 0, x), Ok(x));
        }
        // f_{(1,0)} as a whole is [2, 3, 0, 1]
        let image: Vec<usize> = (0..4).map(|x| perm_apply(&v(2, "10"), 1, x).unwrap()).collect();
        assert_eq!(image, vec![2, 3, 0, 1]);
    }

    #[test]
    fn unapply_examples() {
        assert_eq!(perm_unapply(&v(3, "01"), 2, 4), Ok(5));
        for x in 0..8 {
            let w = v(2, "101");
            assert_eq!(perm_unapply(&w, 1, x), perm_apply(&w, 1, x));
            assert_eq!(perm_unapply(&w, 0, x), Ok(x));
        }
        assert_eq!(
            perm_apply(&v(2, "10"), 1, 4),
            Err(PermError::RowOutOfRange { row: 4, rows: 4 })
        );
    }

    #[test]
    fn access_set_examples() {
        assert_eq!(access_set(&v(2, "10"), 0, false).unwrap().rows, vec![0, 1]);
        assert_eq!(access_set(&v(2, "00"), 0, true).unwrap().rows, vec![0, 3]);
        assert_eq!(access_set(&v(2, "01"), 0, false).unwrap().rows, vec![0, 2]);
        assert_eq!(access_set(&v(2, "00"), 0, false), Err(PermError::ZeroVector));
        assert!(matches!(
            access_set(&v(4, "22"), 0, false),
            Err(PermError::NotAdmissible(_))
        ));
    }

    #[test]
    fn access_sets_have_size_r_pow_m_minus_one() {
        for r in 2..=4u32 {
            for m in 1..=3usize {
                let p = (r as usize).pow(m as u32);
                for idx in 0..p {
                    let w = RVector::from_index(r, m, idx);
                    for s in 0..r {
                        match access_set(&w, s, true) {
                            Ok(set) => assert_eq!(set.rows.len(), p / r as usize, "{w} s={s}"),
                            Err(PermError::NotAdmissible(_)) => assert!(!w.is_admissible()),
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn standard_basis_shapes() {
        let fam = Family::standard_basis(2, 2).unwrap();
        assert_eq!(fam.to_text(), "00,10,01");
        assert_eq!(Family::standard_basis(1, 2).unwrap().to_text(), "0,1");
        for m in 1..6 {
            assert_eq!(Family::standard_basis(m, 3).unwrap().len(), m + 1);
        }
        let sets: Vec<Vec<usize>> = (0..3).map(|j| fam.access_set(j, 0).rows).collect();
        assert_eq!(sets, vec![vec![0, 3], vec![0, 1], vec![0, 2]]);
    }

    #[test]
    fn weight_w_families() {
        let fam = Family::weight_w(6, 3).unwrap();
        assert_eq!(fam.len(), 8);
        assert!(fam.vectors().contains(&v(2, "100101")));
        assert_eq!(Family::weight_w(3, 3).unwrap().to_text(), "111");
        let four = Family::weight_w(4, 2).unwrap();
        assert_eq!(four.to_text(), "1010,1001,0110,0101");
        assert_eq!(Family::weight_w(12, 3).unwrap().len(), 64);
        assert_eq!(Family::weight_w(5, 3), Err(PermError::BadBlocks { w: 3, m: 5 }));
    }

    #[test]
    fn explicit_family_validation() {
        assert!(Family::explicit(2, vec![v(2, "10"), v(2, "11")]).is_ok());
        assert_eq!(
            Family::explicit(2, vec![v(2, "00"), v(2, "11")]),
            Err(PermError::ZeroVector)
        );
        assert_eq!(
            Family::explicit(2, vec![v(2, "11"), v(2, "11")]),
            Err(PermError::Duplicate(v(2, "11")))
        );
        assert!(matches!(
            Family::explicit(2, vec![v(2, "11"), v(2, "110")]),
            Err(PermError::ShapeMismatch(..))
        ));
        assert!(Family::parse(2, "00,10,01").unwrap().is_standard_basis());
        assert!(Family::parse(2, "00,10").is_err());
    }

    #[test]
    fn orthogonality_examples() {
        for m in 1..=4 {
            for r in 2..=3 {
                let fam = Family::standard_basis(m, r).unwrap();
                let report = orthogonality_check(&fam);
                assert!(report.is_orthogonal(), "m={m} r={r}: {:?}", report.violations);
            }
        }
        let fam = Family::explicit(2, vec![v(2, "10"), v(2, "11")]).unwrap();
        let report = orthogonality_check(&fam);
        assert!(!report.is_orthogonal());
        // only the (v=(1,0), u=(1,1)) direction fails
        assert_eq!(report.violations, vec![Violation { v: 0, u: 1, parity: 1 }]);
    }

    #[test]
    fn opposite_sign_convention_breaks_r3_orthogonality() {
        // X_v^s = {x.v = +s} for nonzero v paired with the all-ones rule for 0
        let fam = Family::standard_basis(2, 3).unwrap();
        let flipped = |j: usize, s: u32| -> Vec<usize> {
            if j == 0 {
                fam.access_set(0, s).rows
            } else {
                (0..9).filter(|&x| fam.vector(j).dot_row(x) == s).collect()
            }
        };
        let mut ok = true;
        for vi in 0..3 {
            for i in 0..3u32 {
                let rebuilt: BTreeSet<usize> = flipped(vi, i).iter().map(|&x| fam.apply(vi, i, x)).collect();
                for u in (0..3).filter(|&u| u != vi) {
                    let moved: BTreeSet<usize> = flipped(vi, 0).iter().map(|&x| fam.apply(u, i, x)).collect();
                    ok &= moved == rebuilt;
                }
            }
        }
        assert!(!ok);
    }

    #[test]
    fn intersection_closed_form_examples() {
        let (a, b) = (RVector::unit(2, 4, 1), RVector::unit(2, 4, 3));
        assert_eq!(intersection_size(&a, &b, 1, 1), Ok(8));
        // c_{e_a,e_b} = 0: the row-rebuilt and zigzag-rebuilt sets coincide
        assert_eq!(intersection_size(&a, &b, 1, 0), Ok(8));
        assert_eq!(union_size(&a, &b), Ok(8));
        let (w, u) = (v(2, "111000"), v(2, "100110"));
        assert_eq!(difference_weight(&w, &u), 2);
        assert_eq!(union_size(&w, &u), Ok(64));
        assert_eq!(intersection_size(&w, &u, 1, 0), Ok(0));
        assert_eq!(
            intersection_size(&RVector::zero(2, 4), &a, 0, 0),
            Err(PermError::ZeroVector)
        );
    }

    /// The coset shortcut must agree with explicitly built sets.
    #[test]
    fn closed_form_matches_explicit_sets() {
        for r in 2..=3u32 {
            for m in 1..=4usize {
                let p = (r as usize).pow(m as u32);
                let admissible: Vec<RVector> = (1..p)
                    .map(|x| RVector::from_index(r, m, x))
                    .filter(RVector::is_admissible)
                    .collect();
                for vv in &admissible {
                    for uu in &admissible {
                        let shifted = |i: u32| -> BTreeSet<usize> {
                            access_set(vv, i, false)
                                .unwrap()
                                .rows
                                .iter()
                                .map(|&x| shift(uu, -(i as i64), shift(vv, i as i64, x)))
                                .collect()
                        };
                        let all: Vec<BTreeSet<usize>> = (0..r).map(shifted).collect();
                        for i in 0..r {
                            for j in 0..r {
                                let explicit = all[i as usize].intersection(&all[j as usize]).count();
                                assert_eq!(intersection_size(vv, uu, i, j), Ok(explicit));
                            }
                        }
                        let union: BTreeSet<usize> = all.iter().flatten().copied().collect();
                        assert_eq!(union_size(vv, uu), Ok(union.len()));
                    }
                }
            }
        }
    }

    /// For two parities the zigzag term `|f_v(X_v) ∩ f_u(X_v)|` is half the
    /// rows exactly when `|B_v \ B_u|` is even.
    #[test]
    fn binary_overlap_depends_on_difference_parity() {
        for m in 1..=5usize {
            let p = 1usize << m;
            for vi in 1..p {
                for ui in 1..p {
                    let (vv, uu) = (RVector::from_index(2, m, vi), RVector::from_index(2, m, ui));
                    let xs = access_set(&vv, 0, false).unwrap().rows;
                    let a: BTreeSet<usize> = xs.iter().map(|&x| shift(&vv, 1, x)).collect();
                    let b: BTreeSet<usize> = xs.iter().map(|&x| shift(&uu, 1, x)).collect();
                    let overlap = a.intersection(&b).count();
                    let expected = if difference_weight(&vv, &uu) % 2 == 0 { p / 2 } else { 0 };
                    assert_eq!(overlap, expected, "v={vv} u={uu}");
                }
            }
        }
    }

    #[test]
    fn zigzag_sets_partition_rows() {
        for (r, m) in [(2u32, 3usize), (3, 2), (4, 2)] {
            let p = (r as usize).pow(m as u32);
            for vi in 0..p {
                let w = RVector::from_index(r, m, vi);
                for s in 0..r {
                    let image: BTreeSet<usize> = (0..p).map(|x| shift(&w, s as i64, x)).collect();
                    assert_eq!(image.len(), p);
                }
            }
        }
    }

    #[test]
    fn no_orthogonal_triple_on_two_rows() {
        let best = largest_orthogonal_family(1);
        assert_eq!(best.len(), 2);
        let perms: BTreeSet<Vec<usize>> = best.iter().map(|c| c.perm.clone()).collect();
        assert_eq!(perms.len(), 2, "identity and swap");
    }

    #[test]
    fn orthogonal_family_on_four_rows_has_three_members() {
        assert_eq!(largest_orthogonal_family(2).len(), 3);
    }

    proptest! {
        #[test]
        fn apply_is_a_bijection_and_unapply_inverts(r in 2u32..5, m in 1usize..4, vi in any::<usize>(), i in 0u32..5) {
            let p = (r as usize).pow(m as u32);
            let w = RVector::from_index(r, m, vi % p);
            let i = i % r;
            let image: BTreeSet<usize> = (0..p).map(|x| perm_apply(&w, i, x).unwrap()).collect();
            prop_assert_eq!(image.len(), p);
            for x in 0..p {
                prop_assert_eq!(perm_unapply(&w, i, perm_apply(&w, i, x).unwrap()).unwrap(), x);
            }
        }

        #[test]
        fn index_round_trip(r in 2u32..6, m in 1usize..5, x in any::<usize>()) {
            let p = (r as usize).pow(m as u32);
            let x = x % p;
            prop_assert_eq!(RVector::from_index(r, m, x).to_index(), x);
        }
    }
}
