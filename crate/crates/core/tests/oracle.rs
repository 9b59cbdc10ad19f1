//! Cross-checks against small independent reimplementations.

use std::collections::BTreeSet;

use num_rational::Rational64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zigzag_core::analysis::{measured_ratio, predicted_ratio};
use zigzag_core::codec::{decode_erasures, encode, rebuild_plan};
use zigzag_core::construct::{build_code, combinations, CodeParams, CodeSpec, Scheme};
use zigzag_core::gf::{Elem, Field};
use zigzag_core::perms::Family;

/// Carry-less product reduced by the full modulus bit pattern.
fn clmul(a: u32, b: u32, w: u32, modulus: u32) -> u32 {
    let mut acc = 0u32;
    for i in 0..w {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    for bit in (w..2 * w).rev() {
        if acc >> bit & 1 == 1 {
            acc ^= modulus << (bit - w);
        }
    }
    acc
}

#[test]
fn binary_fields_match_polynomial_products() {
    for (w, modulus) in [(2, 0b111), (3, 0b1011), (4, 0b10011), (8, 0x11d)] {
        let f = Field::binary(w).unwrap();
        for a in 0..1u32 << w {
            for b in 0..1u32 << w {
                let got = f.mul(f.elem(a).unwrap(), f.elem(b).unwrap()).value();
                assert_eq!(got, clmul(a, b, w, modulus), "gf(2^{w}): {a} * {b}");
            }
        }
    }
}

#[test]
fn gf9_matches_pairs_over_gf3() {
    // y^2 = -y - 2 = 2y + 1
    let f = Field::gf9();
    for a in 0..9u32 {
        for b in 0..9u32 {
            let (a0, a1, b0, b1) = (a % 3, a / 3, b % 3, b / 3);
            let c0 = a0 * b0 + a1 * b1;
            let c1 = a0 * b1 + a1 * b0 + 2 * a1 * b1;
            let want = (c0 % 3) + 3 * (c1 % 3);
            assert_eq!(f.mul(f.elem(a).unwrap(), f.elem(b).unwrap()).value(), want);
        }
    }
    assert_eq!(f.multiplicative_order(f.primitive()), Some(8));
}

#[test]
fn prime_fields_match_modular_arithmetic() {
    for p in [2u32, 3, 5, 7, 13, 257] {
        let f = Field::prime(p).unwrap();
        for a in 0..p.min(40) {
            for b in 0..p.min(40) {
                let (ea, eb) = (f.elem(a).unwrap(), f.elem(b).unwrap());
                assert_eq!(f.mul(ea, eb).value(), a * b % p);
                assert_eq!(f.sub(ea, eb).value(), (a + p - b) % p);
            }
        }
    }
}

/// Row digits, most significant first.
fn digits(x: usize, r: usize, m: usize) -> Vec<usize> {
    (0..m).rev().map(|i| x / r.pow(i as u32) % r).collect()
}

fn undigits(d: &[usize], r: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * r + x)
}

/// `x + s v` digit-wise.
fn shift(x: usize, v: &[u32], s: usize, r: usize) -> usize {
    let d: Vec<usize> = digits(x, r, v.len())
        .iter()
        .zip(v)
        .map(|(&a, &b)| (a + s * b as usize) % r)
        .collect();
    undigits(&d, r)
}

/// Rows rebuilt through parity `s`.
fn x_set(fam: &Family, j: usize, s: usize) -> BTreeSet<usize> {
    let r = fam.radix() as usize;
    let v = fam.vector(j).digits();
    (0..fam.rows())
        .filter(|&x| {
            let d = digits(x, r, fam.m());
            if fam.zero_index() == Some(j) {
                d.iter().sum::<usize>() % r == s
            } else {
                let dot: usize = d.iter().zip(v).map(|(&a, &b)| a * b as usize).sum();
                (dot + s) % r == 0
            }
        })
        .collect()
}

fn families() -> Vec<Family> {
    let mut out = Vec::new();
    for r in [2, 3] {
        for m in 1..=3 {
            out.push(Family::standard_basis(m, r).unwrap());
        }
    }
    out.push(Family::weight_w(4, 2).unwrap());
    out.push(Family::weight_w(6, 3).unwrap());
    out.push(Family::parse(2, "100,110,111,011").unwrap());
    out.push(Family::parse(3, "10,11,12,01").unwrap());
    out
}

#[test]
fn access_sets_match_definition() {
    for fam in families() {
        for j in 0..fam.len() {
            for s in 0..fam.radix() {
                let got: BTreeSet<usize> = fam.access_set(j, s).rows.into_iter().collect();
                assert_eq!(got, x_set(&fam, j, s as usize), "{} j={j} s={s}", fam.to_text());
            }
        }
    }
}

/// Cells read to rebuild family member `t` with one copy per member:
/// parities give `|X|` cells each, every other column gives the rows
/// `x + s(v_t - v_u)` for `x` in `X^s`.
fn oracle_reads(fam: &Family, t: usize) -> usize {
    let r = fam.radix() as usize;
    let mut total = 0;
    for u in (0..fam.len()).filter(|&u| u != t) {
        let mut rows = BTreeSet::new();
        for s in 0..r {
            for x in x_set(fam, t, s) {
                let z = shift(x, fam.vector(t).digits(), s, r);
                let back: Vec<u32> = fam.vector(u).digits().iter().map(|&d| (r as u32 - d) % r as u32).collect();
                rows.insert(shift(z, &back, s, r));
            }
        }
        total += rows.len();
    }
    // each parity gives p / r cells
    total + fam.rows()
}

fn table_spec(fam: Family) -> CodeSpec {
    CodeSpec::from_table(fam, 1, Field::prime(7).unwrap(), |_, _, _| Elem::ONE).unwrap()
}

#[test]
fn rebuild_reads_match_direct_count() {
    for fam in families() {
        let spec = table_spec(fam.clone());
        let mut total = 0;
        for t in 0..fam.len() {
            let want = oracle_reads(&fam, t);
            assert_eq!(rebuild_plan(&spec, t).cells_read(), want, "{} target {t}", fam.to_text());
            total += want;
        }
        let ratio = Rational64::new(total as i64, (fam.len() * spec.p() * (spec.n() - 1)) as i64);
        assert_eq!(measured_ratio(&spec).0, ratio);
        assert_eq!(predicted_ratio(&spec).value, ratio);
    }
}

/// Parity cell `z` from the definition: sum over columns of the cell whose
/// row maps to `z`.
fn oracle_parity(spec: &CodeSpec, info: &[Vec<Elem>], s: u32) -> Vec<Elem> {
    let f = spec.field();
    let r = spec.r() as usize;
    (0..spec.p())
        .map(|z| {
            (0..spec.k()).fold(Elem::ZERO, |acc, c| {
                let v = spec.family().vector(spec.column_id(c).family).digits();
                let x = (0..spec.p()).find(|&x| shift(x, v, s as usize, r) == z).unwrap();
                f.add(acc, f.mul(spec.coefficient(x, c, s), info[c][x]))
            })
        })
        .collect()
}

fn specs() -> Vec<CodeSpec> {
    let mut out: Vec<CodeSpec> = (1..=3)
        .map(|m| build_code(&CodeParams::standard(m, 2, 1, Scheme::Cons3)).unwrap())
        .collect();
    out.push(build_code(&CodeParams::standard(2, 2, 3, Scheme::Cons4)).unwrap());
    out.push(build_code(&CodeParams::standard(2, 2, 2, Scheme::Cons4).with_field(Field::binary(3).unwrap())).unwrap());
    out.push(build_code(&CodeParams::standard(2, 3, 1, Scheme::R3)).unwrap());
    out.push(build_code(&CodeParams::standard(3, 3, 1, Scheme::R3)).unwrap());
    out
}

#[test]
fn encoder_matches_parity_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for spec in specs() {
        let q = spec.field().order();
        let info: Vec<Vec<Elem>> = (0..spec.k())
            .map(|_| (0..spec.p()).map(|_| spec.field().elem(rng.gen_range(0..q)).unwrap()).collect())
            .collect();
        let stripe = encode(&spec, &info).unwrap();
        for s in 0..spec.r() {
            assert_eq!(stripe.column(spec.k() + s as usize), oracle_parity(&spec, &info, s), "{spec} parity {s}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_pattern_of_r_erasures_decodes(which in 0usize..7, seed in any::<u64>(), pick in any::<u32>()) {
        let spec = &specs()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = spec.field().order();
        let info: Vec<Vec<Elem>> = (0..spec.k())
            .map(|_| (0..spec.p()).map(|_| spec.field().elem(rng.gen_range(0..q)).unwrap()).collect())
            .collect();
        let stripe = encode(spec, &info).unwrap();
        let patterns = combinations(spec.n(), spec.r() as usize);
        let pattern = &patterns[pick as usize % patterns.len()];
        prop_assert_eq!(decode_erasures(spec, &stripe.erase(pattern)).unwrap(), stripe);
    }
}
