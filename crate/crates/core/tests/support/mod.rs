//! Independent oracles: dense rational matrices and a Jacobi SVD.
#![allow(dead_code)]

use elemdyn_core::{Dyadic, FiniteRankOperator, Mode, Scalar, WeightedPermutationOperator};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::Rng;

pub type Dense = Vec<Vec<BigRational>>;

pub fn ratio(d: &Dyadic) -> BigRational {
    let m = BigRational::from_integer(d.mantissa().clone());
    let two = BigRational::from_integer(BigInt::from(2));
    let e = d.exponent();
    let mut p = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        p *= &two;
    }
    if e >= 0 {
        m * p
    } else {
        m / p
    }
}

pub fn zeros(n: usize) -> Dense {
    vec![vec![BigRational::zero(); n]; n]
}

pub fn identity(n: usize) -> Dense {
    let mut a = zeros(n);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    a
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    let t = &a[i][k] * &b[k][j];
                    c[i][j] += t;
                }
            }
        }
    }
    c
}

pub fn transpose(a: &Dense) -> Dense {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].clone()).collect()).collect()
}

/// The `size × size` section of a weighted permutation, built column by
/// column from its action on basis vectors.
pub fn section(op: &WeightedPermutationOperator, size: usize) -> Dense {
    let mut a = zeros(size);
    for j in 1..=size as u64 {
        let s = op.apply(j).unwrap();
        if (s.index as usize) <= size {
            a[s.index as usize - 1][j as usize - 1] = ratio(&s.weight);
        }
    }
    a
}

/// `A^n` as a product of sections; negative powers use the section of `A^{-1}`.
/// Exact as long as no orbit involved leaves the section.
pub fn section_power(op: &WeightedPermutationOperator, n: i64, size: usize) -> Dense {
    let step = if n >= 0 {
        section(op, size)
    } else {
        section(&op.inverse().unwrap(), size)
    };
    let mut out = identity(size);
    for _ in 0..n.unsigned_abs() {
        out = matmul(&step, &out);
    }
    out
}

pub fn dense_of(f: &FiniteRankOperator, size: usize) -> Dense {
    let mut a = zeros(size);
    for (i, j, c) in f.entries() {
        let v = match c {
            Scalar::Exact(d) => ratio(d),
            Scalar::Float(x) => BigRational::from_float(*x).unwrap(),
        };
        a[i as usize - 1][j as usize - 1] = v;
    }
    a
}

pub fn to_f64(a: &Dense) -> Vec<Vec<f64>> {
    a.iter()
        .map(|r| r.iter().map(|x| x.to_f64().unwrap()).collect())
        .collect()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> BigRational {
    let mut m = BigRational::zero();
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            let d = (x - y).abs();
            if d > m {
                m = d;
            }
        }
    }
    m
}

/// Singular values by one-sided Jacobi rotations on the columns.
pub fn jacobi_singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| a[i][j]).collect()).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (x, y) = (u[p][i], u[q][i]);
                    u[p][i] = c * x - s * y;
                    u[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = u.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Dyadic with a small mantissa and exponent, never zero.
pub fn random_dyadic(rng: &mut StdRng) -> Dyadic {
    let mut m: i64 = rng.random_range(-7..=7);
    if m == 0 {
        m = 1;
    }
    Dyadic::new(m, rng.random_range(-4..=4))
}

/// Random operator with `entries` nonzero coefficients inside `L_m × L_m`.
pub fn random_operator(rng: &mut StdRng, m: u64, entries: usize, mode: Mode) -> FiniteRankOperator {
    let triplets: Vec<(u64, u64, Scalar)> = (0..entries)
        .map(|_| {
            let d = random_dyadic(rng);
            let c = match mode {
                Mode::Exact => Scalar::Exact(d),
                Mode::Float => Scalar::Float(d.to_f64().unwrap()),
            };
            (rng.random_range(1..=m), rng.random_range(1..=m), c)
        })
        .collect();
    FiniteRankOperator::from_triplets(mode, triplets).unwrap()
}

/// Random float operator on an `r × c` block of indices below `bound`.
pub fn random_float_block(rng: &mut StdRng, r: usize, c: usize, bound: u64) -> FiniteRankOperator {
    let rows: Vec<u64> = (0..r).map(|_| rng.random_range(1..=bound)).collect();
    let cols: Vec<u64> = (0..c).map(|_| rng.random_range(1..=bound)).collect();
    let mut t = Vec::new();
    for &i in &rows {
        for &j in &cols {
            if rng.random_bool(0.7) {
                t.push((i, j, Scalar::Float(rng.random_range(-4.0..4.0))));
            }
        }
    }
    FiniteRankOperator::from_triplets(Mode::Float, t).unwrap()
}

/// Singular values of `f` through its dense section.
pub fn oracle_singular_values(f: &FiniteRankOperator) -> Vec<f64> {
    let rows: Vec<u64> = f.row_support().into_iter().collect();
    let cols: Vec<u64> = f.col_support().into_iter().collect();
    let a: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| f.get(i, j).to_f64().unwrap()).collect())
        .collect();
    jacobi_singular_values(&a)
}
