//! Exact rational reference computations shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("finite rational")
}

/// Weights normalized to exact probabilities.
pub fn probabilities(weights: &[u32]) -> Vec<BigRational> {
    let total: i64 = weights.iter().map(|&w| w as i64).sum();
    weights.iter().map(|&w| ratio(w as i64, total)).collect()
}

/// Nearest `f64` measures for the same weights.
pub fn float_measures(weights: &[u32]) -> Vec<f64> {
    probabilities(weights).iter().map(to_f64).collect()
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `N! / prod n_i!` by Pascal-style products of binomials.
pub fn multinomial(counts: &[u64]) -> BigInt {
    let mut acc = BigInt::one();
    let mut seen = 0u64;
    for &c in counts {
        seen += c;
        acc *= binomial(seen, c);
    }
    acc
}

/// Binomial coefficient from Pascal's triangle.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut row = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = vec![BigInt::one(); row.len() + 1];
        for j in 1..row.len() {
            next[j] = &row[j - 1] + &row[j];
        }
        row = next;
    }
    row[k as usize].clone()
}

pub fn pow(p: &BigRational, e: u64) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * p)
}

pub fn class_measure(p: &[BigRational], counts: &[u64]) -> BigRational {
    let mut m = BigRational::from_integer(multinomial(counts));
    for (pi, &ni) in p.iter().zip(counts) {
        m *= pow(pi, ni);
    }
    m
}

/// All count vectors of `m` outcomes summing to `n`, built recursively.
pub fn classes(m: usize, n: u64) -> Vec<Vec<u64>> {
    if m == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in classes(m - 1, n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Measure of the classes whose fractions lie within `eps` of `p` in every
/// component.
pub fn typicality(p: &[BigRational], n: u64, eps: &BigRational) -> BigRational {
    let big_n = BigRational::from_integer(BigInt::from(n));
    classes(p.len(), n)
        .iter()
        .filter(|c| {
            c.iter().zip(p).all(|(&ni, pi)| {
                let f = BigRational::from_integer(BigInt::from(ni)) / &big_n;
                (f - pi).abs() <= *eps
            })
        })
        .map(|c| class_measure(p, c))
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Exact class measures keyed by count vector, from brute force over every
/// outcome string of length `n`.
pub fn brute_force_classes(p: &[BigRational], n: u32) -> std::collections::BTreeMap<Vec<u64>, BigRational> {
    let m = p.len();
    let mut out = std::collections::BTreeMap::new();
    let mut digits = vec![0usize; n as usize];
    loop {
        let mut counts = vec![0u64; m];
        let mut weight = BigRational::one();
        for &d in &digits {
            counts[d] += 1;
            weight *= &p[d];
        }
        *out.entry(counts).or_insert_with(BigRational::zero) += weight;
        let mut k = 0;
        loop {
            if k == digits.len() {
                return out;
            }
            digits[k] += 1;
            if digits[k] < m {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}
