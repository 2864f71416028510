//! Exact characteristic polynomials and Perron-Frobenius eigenvalues.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficients `c_0..=c_n` of `det(xI - A)`, constant term first.
pub fn characteristic_polynomial(a: &[Vec<u64>]) -> Vec<BigInt> {
    let n = a.len();
    let a: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    // Faddeev-LeVerrier, integer form: every trace is divisible by k.
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigInt::zero();
                for l in 0..n {
                    if !a[i][l].is_zero() && !m[l][j].is_zero() {
                        s += &a[i][l] * &m[l][j];
                    }
                }
                next[i][j] = s;
            }
            next[i][i] += &c[n - k + 1];
        }
        m = next;
        let mut tr = BigInt::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &m[l][i];
            }
        }
        c[n - k] = -tr / BigInt::from(k);
    }
    c
}

type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn eval(p: &Poly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn derivative(p: &Poly) -> Poly {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

fn is_zero_poly(p: &Poly) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn remainder(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !is_zero_poly(&r) {
        let dr = r.len() - 1;
        let q = &r[dr] / &lead;
        for i in 0..=db {
            let t = &q * &b[i];
            r[dr - db + i] -= t;
        }
        r.pop();
        r = trim(r);
    }
    trim(r)
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), derivative(p)];
    loop {
        let n = chain.len();
        if is_zero_poly(&chain[n - 1]) || chain[n - 1].len() == 1 {
            break;
        }
        let r = remainder(&chain[n - 2], &chain[n - 1]);
        if is_zero_poly(&r) {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain.retain(|q| !is_zero_poly(q));
    chain
}

fn sign_changes(chain: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<i8> = chain
        .iter()
        .map(|q| {
            let v = eval(q, x);
            if v.is_positive() { 1 } else if v.is_negative() { -1 } else { 0 }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// The Perron-Frobenius eigenvalue as a rational bracket plus a float.
#[derive(Clone, Debug, PartialEq)]
pub struct PfEigenvalue {
    pub lower: BigRational,
    pub upper: BigRational,
    pub approx: f64,
}

/// Largest real root of the characteristic polynomial of a nonnegative
/// matrix, isolated by Sturm sequences to width `tol`.
pub fn perron_frobenius(a: &[Vec<u64>], tol: f64) -> PfEigenvalue {
    let c = characteristic_polynomial(a);
    let p: Poly = c.iter().map(|x| BigRational::from_integer(x.clone())).collect();
    let chain = sturm_chain(&p);
    let bound = c.iter().map(|x| x.abs()).max().unwrap_or_default() + BigInt::one();
    let mut lo = BigRational::from_integer(BigInt::from(-1));
    let mut hi = BigRational::from_integer(bound);
    let v_hi = sign_changes(&chain, &hi);
    let tol = BigRational::from_float(tol).unwrap_or_else(|| BigRational::new(1.into(), BigInt::from(10u64).pow(12)));
    let half = BigRational::new(1.into(), 2.into());
    while &hi - &lo > tol {
        let mut mid = (&lo + &hi) * &half;
        let mut nudge = 3;
        while eval(&p, &mid).is_zero() {
            mid = &lo + (&hi - &lo) * BigRational::new(nudge.into(), (2 * nudge + 1).into());
            nudge += 1;
        }
        if sign_changes(&chain, &mid) > v_hi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let approx = ((&lo + &hi) * half).to_f64().unwrap_or(f64::NAN);
    PfEigenvalue { lower: lo, upper: hi, approx }
}

pub fn is_permutation_matrix(a: &[Vec<u64>]) -> bool {
    let n = a.len();
    a.iter().all(|r| r.iter().sum::<u64>() == 1 && r.iter().all(|&x| x <= 1))
        && (0..n).all(|j| a.iter().map(|r| r[j]).sum::<u64>() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_of_small_matrices() {
        let c = characteristic_polynomial(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(c, vec![BigInt::from(1), BigInt::from(-3), BigInt::from(1)]);
        let c = characteristic_polynomial(&[vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]]);
        assert_eq!(c, vec![BigInt::from(-1), BigInt::from(0), BigInt::from(0), BigInt::from(1)]);
    }

    #[test]
    fn golden_ratio_squared() {
        let pf = perron_frobenius(&[vec![2, 1], vec![1, 1]], 1e-12);
        let expect = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((pf.approx - expect).abs() < 1e-11);
        assert!(pf.lower.to_f64().unwrap() <= expect && expect <= pf.upper.to_f64().unwrap() + 1e-15);
    }

    #[test]
    fn integer_eigenvalue_is_bracketed() {
        let pf = perron_frobenius(&[vec![1, 1], vec![1, 1]], 1e-12);
        assert!((pf.approx - 2.0).abs() < 1e-11);
    }

    #[test]
    fn agrees_with_power_iteration() {
        let a = vec![vec![1, 2, 0], vec![0, 1, 3], vec![1, 0, 1]];
        let mut v = vec![1.0f64; 3];
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i][j] as f64 * v[j]).sum()).collect();
            lambda = w.iter().sum::<f64>() / v.iter().sum::<f64>();
            let s: f64 = w.iter().sum();
            v = w.iter().map(|x| x / s).collect();
        }
        let pf = perron_frobenius(&a, 1e-12);
        assert!((pf.approx - lambda).abs() < 1e-9);
    }
}
