//! Roots of real polynomials: exact square-free splitting over Q, then
//! Aberth–Ehrlich on each factor, with a companion-matrix fallback.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

type QPoly = Vec<BigRational>;

fn trim(p: &mut QPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn deg(p: &QPoly) -> usize {
    p.len().saturating_sub(1)
}

fn derivative(p: &QPoly) -> QPoly {
    let mut d: QPoly = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect();
    trim(&mut d);
    d
}

fn sub(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.len().max(b.len());
    let mut out: QPoly = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            x - y
        })
        .collect();
    trim(&mut out);
    out
}

fn divrem(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
    let mut r = a.clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lb = b.last().expect("nonzero divisor").clone();
    let mut quot = vec![BigRational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / &lb;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] -= &c * bi;
        }
        quot[shift] = c;
        r.pop();
        trim(&mut r);
    }
    trim(&mut quot);
    (quot, r)
}

fn monic(p: &QPoly) -> QPoly {
    let l = p.last().expect("nonzero").clone();
    p.iter().map(|c| c / &l).collect()
}

fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

/// Yun's square-free decomposition: f = c · ∏ a_i^i with a_i square-free and
/// pairwise coprime. Returns (i, a_i) for the non-constant a_i.
pub fn squarefree_decomposition(coeffs: &[i64]) -> Vec<(usize, Vec<f64>)> {
    let mut f: QPoly = coeffs
        .iter()
        .map(|&c| BigRational::from_integer(BigInt::from(c)))
        .collect();
    trim(&mut f);
    let mut out = Vec::new();
    if deg(&f) == 0 {
        return out;
    }
    let fp = derivative(&f);
    let a0 = gcd(&f, &fp);
    let mut b = divrem(&f, &a0).0;
    let mut c = divrem(&fp, &a0).0;
    let mut d = sub(&c, &derivative(&b));
    let mut i = 1;
    while deg(&b) > 0 {
        let a = gcd(&b, &d);
        b = divrem(&b, &a).0;
        c = divrem(&d, &a).0;
        d = sub(&c, &derivative(&b));
        if deg(&a) > 0 {
            let fl = a.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect();
            out.push((i, fl));
        }
        i += 1;
    }
    out
}

/// Exact test for a repeated root.
pub fn is_squarefree_over_q(coeffs: &[i64]) -> bool {
    squarefree_decomposition(coeffs).iter().all(|(m, _)| *m == 1)
}

fn horner(p: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::zero();
    let mut dv = Complex64::zero();
    for &c in p.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

/// Aberth–Ehrlich iteration from the given starting points.
pub fn aberth(p: &[f64], init: Vec<Complex64>, max_iter: usize) -> Option<Vec<Complex64>> {
    let n = p.len() - 1;
    debug_assert_eq!(init.len(), n);
    let mut z = init;
    for _ in 0..max_iter {
        let mut worst = 0.0f64;
        for i in 0..n {
            let (v, dv) = horner(p, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::one() - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                return None;
            }
            z[i] -= w;
            worst = worst.max(w.norm() / z[i].norm().max(1.0));
        }
        if worst < 1e-15 {
            return Some(z);
        }
    }
    None
}

/// Eigenvalues of the companion matrix.
pub fn companion_roots(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let lead = p[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

fn polish(p: &[f64], mut z: Complex64) -> Complex64 {
    for _ in 0..3 {
        let (v, dv) = horner(p, z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.re.is_finite() {
            break;
        }
        z -= step;
    }
    z
}

/// Roots of a polynomial whose roots are expected near |z| = radius.
pub fn roots_near_circle(p: &[f64], radius: f64) -> Result<Vec<Complex64>> {
    let n = p.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    // rescale to z = radius·w so the roots sit near the unit circle
    let scaled: Vec<f64> = p.iter().enumerate().map(|(i, &c)| c * radius.powi(i as i32)).collect();
    let init = (0..n)
        .map(|j| Complex64::from_polar(1.0, (2.0 * std::f64::consts::PI * j as f64 + 0.4) / n as f64))
        .collect();
    let w = match aberth(&scaled, init, 500) {
        Some(w) => w,
        None => {
            let w = companion_roots(&scaled);
            if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::RootFinder(n));
            }
            w
        }
    };
    Ok(w.into_iter().map(|w| polish(p, w * radius)).collect())
}

/// Group nearby points; returns (representative, count).
pub fn cluster(points: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &z in points {
        match out.iter_mut().find(|(c, _)| (c - z).norm() < tol) {
            Some(entry) => entry.1 += 1,
            None => out.push((z, 1)),
        }
    }
    out
}

pub fn max_abs_coeff(p: &[f64]) -> f64 {
    p.iter().fold(0.0f64, |m, c| m.max(c.abs()))
}
