//! Quadratic residue symbols, the characters χ_D, the additive character
//! e(·) and generalized Gauss sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::ffpoly::{
    enumerate_monic, enumerate_monic_upto, enumerate_squarefree, factorize, Factorization, Fq,
    FqElem, MonicPoly, Poly,
};

/// Default ceiling on |f| for definitional Gauss sums.
pub const DEFAULT_GAUSS_BUDGET: u128 = 15_625;

/// c^{(q-1)/2} mapped to {-1, 0, 1}.
pub fn legendre_const(fq: Fq, c: FqElem) -> i8 {
    let c = c % fq.q();
    if c == 0 {
        return 0;
    }
    if fq.pow(c, ((fq.q() - 1) / 2) as u64) == 1 {
        1
    } else {
        -1
    }
}

/// (f/P) ≡ f^{(|P|-1)/2} (mod P) for irreducible P.
pub fn residue_symbol(f: &Poly, p: &MonicPoly) -> Result<i8> {
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible(p.to_string()));
    }
    let e = (p.norm() - 1) / 2;
    let r = f.powmod(e, p.as_poly());
    Ok(match r.degree() {
        None => 0,
        Some(0) if r.lead() == 1 => 1,
        Some(0) if r.lead() == p.field().q() - 1 => -1,
        _ => unreachable!("Euler criterion produced a non-unit"),
    })
}

// Euclid-style Jacobi reduction on raw little-endian buffers; `b` is monic.
fn jacobi_raw(fq: Fq, mut a: Vec<u32>, mut b: Vec<u32>) -> i8 {
    let q = fq.q();
    let mut sign = 1i8;
    loop {
        let db = b.len() - 1;
        if db == 0 {
            return sign;
        }
        // a <- a mod b (b monic)
        while a.len() > db {
            let top = a.pop().unwrap();
            if top != 0 {
                let off = a.len() - db;
                for j in 0..db {
                    let t = a[off + j] + q - (top * b[j]) % q;
                    a[off + j] = if t >= q { t - q } else { t };
                }
            }
        }
        while a.last() == Some(&0) {
            a.pop();
        }
        if a.is_empty() {
            return 0;
        }
        let lead = *a.last().unwrap();
        if lead != 1 {
            if db % 2 == 1 && legendre_const(fq, lead) == -1 {
                sign = -sign;
            }
            let inv = fq.inv(lead);
            for v in a.iter_mut() {
                *v = (*v * inv) % q;
            }
        }
        // reciprocity for monic arguments when q ≡ 1 (mod 4): (a/b) = (b/a)
        std::mem::swap(&mut a, &mut b);
    }
}

/// Jacobi symbol (A/B) for an arbitrary polynomial A and monic B. Leading
/// constants contribute legendre(c)^{d(B)}.
pub fn jacobi_poly(a: &Poly, b: &MonicPoly) -> i8 {
    jacobi_raw(b.field(), a.coeffs().to_vec(), b.coeffs().to_vec())
}

/// Jacobi symbol of two monic polynomials.
pub fn jacobi(a: &MonicPoly, b: &MonicPoly) -> i8 {
    jacobi_raw(b.field(), a.coeffs().to_vec(), b.coeffs().to_vec())
}

/// Jacobi symbol as the product of residue symbols over B's factorization.
pub fn jacobi_by_factorization(a: &Poly, b: &MonicPoly) -> i8 {
    factorize(b)
        .factors()
        .iter()
        .map(|(p, j)| residue_symbol(a, p).expect("irreducible factor").pow(*j))
        .product()
}

/// The quadratic character χ_D(f) = (D/f).
#[derive(Clone, Debug)]
pub struct QuadChar {
    d: MonicPoly,
    factorization: Factorization,
}

impl QuadChar {
    pub fn new(d: MonicPoly) -> QuadChar {
        let factorization = factorize(&d);
        QuadChar { d, factorization }
    }

    pub fn modulus(&self) -> &MonicPoly {
        &self.d
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn eval(&self, f: &MonicPoly) -> i8 {
        jacobi(&self.d, f)
    }
}

pub fn chi_d(chi: &QuadChar, f: &MonicPoly) -> i8 {
    chi.eval(f)
}

/// e(a) = exp(2πi a_1 / p) with the trace trivial over a prime field.
pub fn exp_e(fq: Fq, a1: FqElem) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (a1 % fq.q()) as f64 / fq.q() as f64)
}

/// A Gauss sum with its closed-form magnitude class when known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaussSumValue {
    /// An integer value (0, φ(P^j) or −|P|^{j−1}).
    Integer(i128),
    /// sign · q^{half_exp / 2}.
    HalfPower { sign: i8, half_exp: u32 },
    /// Evaluated numerically.
    Complex(Complex64),
}

impl GaussSumValue {
    pub fn to_complex(self, q: u32) -> Complex64 {
        match self {
            GaussSumValue::Integer(v) => Complex64::new(v as f64, 0.0),
            GaussSumValue::HalfPower { sign, half_exp } => {
                Complex64::new(sign as f64 * (q as f64).powf(half_exp as f64 / 2.0), 0.0)
            }
            GaussSumValue::Complex(z) => z,
        }
    }
}

/// Precomputed data for definitional Gauss sums modulo a fixed f.
///
/// The 1/x coefficient of uV/f equals the x^{n-1} coefficient of uV mod f,
/// a bilinear form in the coefficient vectors of u and V.
pub struct GaussSumTable {
    f: MonicPoly,
    chi: Vec<i8>,
    hankel: Vec<Vec<u32>>,
    roots: Vec<Complex64>,
}

impl GaussSumTable {
    pub fn new(f: &MonicPoly, budget: u128) -> Result<GaussSumTable> {
        let fq = f.field();
        let n = f.degree();
        if n == 0 {
            return Err(Error::Precondition("Gauss sum modulus must have degree >= 1".into()));
        }
        let size = f.norm();
        if size > budget {
            return Err(Error::GaussBudget { size, budget });
        }
        let chi = (0..size as u64)
            .map(|r| jacobi_poly(&residue_unrank(fq, n, r), f))
            .collect();
        let hankel = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let mut c = vec![0u32; i + k + 1];
                        c[i + k] = 1;
                        Poly::new(fq, c).rem(f.as_poly()).unwrap().coeff(n - 1)
                    })
                    .collect()
            })
            .collect();
        let roots = (0..fq.q()).map(|a| exp_e(fq, a)).collect();
        Ok(GaussSumTable {
            f: f.clone(),
            chi,
            hankel,
            roots,
        })
    }

    pub fn modulus(&self) -> &MonicPoly {
        &self.f
    }

    /// χ(u) for the residue with little-endian coefficient index `r`.
    pub fn chi_table(&self) -> &[i8] {
        &self.chi
    }

    /// Σ_{u mod f} (u/f) e(uV/f) by enumerating every residue.
    pub fn direct(&self, v: &Poly) -> Complex64 {
        let fq = self.f.field();
        let q = fq.q();
        let n = self.f.degree();
        let vr = v.rem(self.f.as_poly()).unwrap();
        // w_i = Σ_k T_{ik} V_k, so that a_1(u) = Σ_i u_i w_i
        let w: Vec<u32> = (0..n)
            .map(|i| {
                (0..n).fold(0u32, |acc, k| {
                    fq.add(acc, fq.mul(self.hankel[i][k], vr.coeff(k)))
                })
            })
            .collect();
        let mut acc = vec![0i64; q as usize];
        let mut digits = vec![0u32; n];
        let mut a1 = 0u32;
        for &c in &self.chi {
            if c != 0 {
                acc[a1 as usize] += c as i64;
            }
            // little-endian odometer over u, tracking a_1 incrementally
            for i in 0..n {
                digits[i] += 1;
                a1 = fq.add(a1, w[i]);
                if digits[i] == q {
                    digits[i] = 0;
                    continue;
                }
                break;
            }
        }
        acc.iter()
            .zip(&self.roots)
            .map(|(&c, &z)| z * c as f64)
            .sum()
    }
}

/// Residue of degree < n with little-endian coefficient index r.
fn residue_unrank(fq: Fq, n: usize, mut r: u64) -> Poly {
    let q = fq.q() as u64;
    let mut c = vec![0u32; n];
    for v in c.iter_mut() {
        *v = (r % q) as u32;
        r /= q;
    }
    Poly::new(fq, c)
}

/// Definitional G(V, χ_f); V may be the zero polynomial.
pub fn gauss_sum_direct(v: &Poly, f: &MonicPoly, budget: u128) -> Result<GaussSumValue> {
    let table = GaussSumTable::new(f, budget)?;
    Ok(GaussSumValue::Complex(table.direct(v)))
}

/// Closed form for G(V, χ_{P^j}) with V = V_1 P^α, P ∤ V_1.
pub fn gauss_sum_closed(v: &Poly, p: &MonicPoly, j: u32) -> Result<GaussSumValue> {
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible(p.to_string()));
    }
    assert!(j >= 1);
    let d = p.degree() as u32;
    let pn = p.norm() as i128;
    // α = ord_P(V); V = 0 counts as divisible by every power
    let mut alpha = 0u32;
    let mut v1 = v.clone();
    let v1_is_zero = v.is_zero();
    if !v1_is_zero {
        loop {
            let (qt, r) = v1.divrem(p.as_poly()).unwrap();
            if !r.is_zero() {
                break;
            }
            v1 = qt;
            alpha += 1;
        }
    }
    let alpha_inf = v1_is_zero;
    let value = if alpha_inf || j <= alpha {
        if j % 2 == 1 {
            GaussSumValue::Integer(0)
        } else {
            GaussSumValue::Integer(pn.pow(j) - pn.pow(j - 1))
        }
    } else if j == alpha + 1 {
        if j % 2 == 0 {
            GaussSumValue::Integer(-pn.pow(j - 1))
        } else {
            let s = residue_symbol(&v1, p)?;
            GaussSumValue::HalfPower {
                sign: s,
                half_exp: d * (2 * j - 1),
            }
        }
    } else {
        GaussSumValue::Integer(0)
    };
    Ok(value)
}

/// χ_f(u) for every residue u mod f, indexed by little-endian digits.
///
/// Each prime power P^e of f contributes (u mod P / P)^e, read from a
/// table over residues mod P; u mod P is carried along an odometer over
/// the digits of u, one bump adding x^i mod P.
pub fn chi_table(f: &MonicPoly) -> Vec<i8> {
    let fq = f.field();
    let q = fq.q();
    let n = f.degree();
    let mut out = vec![1i8; f.norm() as usize];
    for (p, e) in factorize(f).factors() {
        let dp = p.degree();
        let local: Vec<i8> = (0..p.norm() as u64)
            .map(|r| {
                let s = jacobi_poly(&residue_unrank(fq, dp, r), p);
                if e % 2 == 0 {
                    s * s
                } else {
                    s
                }
            })
            .collect();
        let red: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let mut c = vec![0u32; i + 1];
                c[i] = 1;
                let r = Poly::new(fq, c).rem(p.as_poly()).unwrap();
                (0..dp).map(|k| r.coeff(k)).collect()
            })
            .collect();
        let weights: Vec<usize> = (0..dp).map(|k| (q as usize).pow(k as u32)).collect();
        let mut digits = vec![0u32; n];
        let mut r = vec![0u32; dp];
        let mut idx = 0usize;
        for slot in out.iter_mut() {
            *slot *= local[idx];
            for i in 0..n {
                digits[i] += 1;
                for k in 0..dp {
                    let old = r[k];
                    let new = fq.add(old, red[i][k]);
                    r[k] = new;
                    idx = idx + new as usize * weights[k] - old as usize * weights[k];
                }
                if digits[i] == q {
                    digits[i] = 0;
                    continue;
                }
                break;
            }
        }
    }
    out
}

/// All G(V, χ_f) for V ranging over residues mod f, by an n-dimensional
/// discrete Fourier transform of χ over F_q^n. Index = little-endian digits
/// of V. Used where the per-V sum would exceed the enumeration budget.
pub fn gauss_sums_all(f: &MonicPoly, chi: &[i8]) -> Vec<Complex64> {
    let fq = f.field();
    let q = fq.q() as usize;
    let n = f.degree();
    let size = chi.len();
    assert_eq!(size as u128, f.norm());
    let roots: Vec<Complex64> = (0..q).map(|a| exp_e(fq, a as u32)).collect();
    let mut data: Vec<Complex64> = chi.iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); q];
    let mut stride = 1usize;
    for _ in 0..n {
        for block in (0..size).step_by(stride * q) {
            for off in 0..stride {
                let base = block + off;
                for (t, s) in scratch.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..q {
                        acc += data[base + a * stride] * roots[(a * t) % q];
                    }
                    *s = acc;
                }
                for t in 0..q {
                    data[base + t * stride] = scratch[t];
                }
            }
        }
        stride *= q;
    }
    // data[w] = Σ_u χ(u) ω^{u·w}; G(V) = data[T V]
    let hankel: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let mut c = vec![0u32; i + k + 1];
                    c[i + k] = 1;
                    Poly::new(fq, c).rem(f.as_poly()).unwrap().coeff(n - 1)
                })
                .collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); size];
    let mut vd = vec![0u32; n];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut r = idx;
        for d in vd.iter_mut() {
            *d = (r % q) as u32;
            r /= q;
        }
        let mut w = 0usize;
        for i in (0..n).rev() {
            let wi = (0..n).fold(0u32, |acc, k| fq.add(acc, fq.mul(hankel[i][k], vd[k])));
            w = w * q + wi as usize;
        }
        *slot = data[w];
    }
    out
}

/// Little-endian index of a residue of degree < n.
pub fn residue_index(v: &Poly, n: usize) -> usize {
    let q = v.field().q() as usize;
    (0..n).rev().fold(0usize, |acc, i| acc * q + v.coeff(i) as usize)
}

/// Σ_{h ∈ M_m} χ_f(h) computed directly and through the Gauss-sum identity.
#[derive(Clone, Copy, Debug)]
pub struct CharSumCheck {
    pub direct: i64,
    pub identity: Complex64,
}

impl CharSumCheck {
    pub fn agrees(&self, tol: f64) -> bool {
        (self.identity - Complex64::new(self.direct as f64, 0.0)).norm() < tol
    }
}

pub fn char_sum_direct(f: &MonicPoly, m: usize) -> i64 {
    enumerate_monic(f.field(), m)
        .map(|h| jacobi(f, &h) as i64)
        .sum()
}

/// Both sides of the short character-sum identity for f ∈ M_n and M_m.
pub fn char_sum_gauss_identity(f: &MonicPoly, m: usize, table: Option<&GaussSumTable>) -> Result<CharSumCheck> {
    let fq = f.field();
    let q = fq.q() as f64;
    let n = f.degree();
    let direct = char_sum_direct(f, m);
    if n == 0 {
        // trivial character; the identity degenerates to q^m
        return Ok(CharSumCheck {
            direct,
            identity: Complex64::new(q.powi(m as i32), 0.0),
        });
    }
    let owned;
    let table = match table {
        Some(t) => t,
        None => {
            owned = GaussSumTable::new(f, u128::MAX)?;
            &owned
        }
    };
    let g_sum = |upto: i64| -> Complex64 {
        if upto < 0 {
            return Complex64::new(0.0, 0.0);
        }
        enumerate_monic_upto(fq, upto as usize)
            .map(|v| table.direct(v.as_poly()))
            .sum()
    };
    let norm_f = q.powi(n as i32);
    let identity = if n % 2 == 0 {
        let g0 = table.direct(&Poly::zero(fq));
        let a = g_sum(n as i64 - m as i64 - 2);
        let b = g_sum(n as i64 - m as i64 - 1);
        (g0 + a * q - b) * (q.powi(m as i32) / norm_f)
    } else {
        let deg = n as i64 - m as i64 - 1;
        let s: Complex64 = if deg < 0 {
            Complex64::new(0.0, 0.0)
        } else {
            enumerate_monic(fq, deg as usize)
                .map(|v| table.direct(v.as_poly()))
                .sum()
        };
        s * (q.powf(m as f64 + 0.5) / norm_f)
    };
    Ok(CharSumCheck { direct, identity })
}

/// Monic C with d(C) ≤ max_deg whose prime factors divide f.
pub fn divisors_of_power(f: &MonicPoly, max_deg: usize) -> Vec<MonicPoly> {
    let fq = f.field();
    let primes: Vec<MonicPoly> = factorize(f).primes().cloned().collect();
    let mut out = vec![MonicPoly::one(fq)];
    for p in &primes {
        let mut next = Vec::new();
        for c in &out {
            let mut cur = c.clone();
            while cur.degree() <= max_deg {
                next.push(cur.clone());
                cur = cur.mul(p);
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// Σ_{D ∈ H_{2g+1}} χ_D(f), directly and via the divisor-sum identity.
pub fn fundamental_sum(f: &MonicPoly, g: usize) -> (i64, i64) {
    let fq = f.field();
    let direct: i64 = enumerate_squarefree(fq, 2 * g + 1)
        .map(|d| jacobi(&d, f) as i64)
        .sum();
    let q = fq.q() as i64;
    let mut rhs = 0i64;
    for c in divisors_of_power(f, g) {
        let dc = 2 * c.degree();
        if 2 * g + 1 >= dc {
            rhs += char_sum_direct(f, 2 * g + 1 - dc);
        }
        if 2 * g > dc {
            rhs -= q * char_sum_direct(f, 2 * g - 1 - dc);
        }
    }
    (direct, rhs)
}

/// Exact average of χ_D(ℓ) over H_{2g+1} against ∏_{P|ℓ}(1+1/|P|)^{-1}.
pub fn square_twist_average(l: &MonicPoly, g: usize) -> (f64, f64) {
    let fq = l.field();
    let mut total = 0i64;
    let mut count = 0i64;
    for d in enumerate_squarefree(fq, 2 * g + 1) {
        total += jacobi(&d, l) as i64;
        count += 1;
    }
    let predicted = factorize(l)
        .primes()
        .map(|p| 1.0 / (1.0 + 1.0 / p.norm_f64()))
        .product();
    (total as f64 / count as f64, predicted)
}

/// |⟨χ_D(ℓ)⟩ − ∏_{P|ℓ}(1+1/|P|)^{−1}| over H_{2g+1}, as an exact rational.
pub fn square_twist_deviation(l: &MonicPoly, g: usize) -> Ratio<i128> {
    let fq = l.field();
    let mut total = 0i128;
    let mut count = 0i128;
    for d in enumerate_squarefree(fq, 2 * g + 1) {
        total += jacobi(&d, l) as i128;
        count += 1;
    }
    let predicted = factorize(l)
        .primes()
        .map(|p| Ratio::new(p.norm() as i128, p.norm() as i128 + 1))
        .fold(Ratio::from_integer(1), |a, b| a * b);
    (Ratio::new(total, count) - predicted).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::enumerate_monic;

    fn f5() -> Fq {
        Fq::new(5).unwrap()
    }

    #[test]
    fn legendre_examples() {
        let fq = f5();
        assert_eq!(legendre_const(fq, 1), 1);
        assert_eq!(legendre_const(fq, 2), -1);
        assert_eq!(legendre_const(fq, 4), 1);
        assert_eq!(legendre_const(fq, 0), 0);
    }

    #[test]
    fn residue_symbol_examples() {
        let fq = f5();
        let x = Poly::x(fq);
        assert_eq!(residue_symbol(&x, &MonicPoly::linear(fq, 1)).unwrap(), 1);
        assert_eq!(residue_symbol(&x, &MonicPoly::linear(fq, 2)).unwrap(), -1);
        let p = MonicPoly::from_lower(fq, &[2, 0]);
        assert_eq!(residue_symbol(p.as_poly(), &p).unwrap(), 0);
        assert!(residue_symbol(&x, &MonicPoly::from_lower(fq, &[1, 0])).is_err());
    }

    #[test]
    fn jacobi_matches_factorization_small() {
        let fq = f5();
        for db in 1..=3 {
            for b in enumerate_monic(fq, db) {
                for da in 0..=3 {
                    for a in enumerate_monic(fq, da) {
                        assert_eq!(
                            jacobi(&a, &b),
                            jacobi_by_factorization(a.as_poly(), &b),
                            "a = {a}, b = {b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn constants_follow_degree_parity() {
        let fq = f5();
        let two = Poly::constant(fq, 2);
        for b in enumerate_monic(fq, 3) {
            assert_eq!(jacobi_poly(&two, &b), -1);
        }
        for b in enumerate_monic(fq, 2) {
            assert_eq!(jacobi_poly(&two, &b), 1);
        }
    }

    #[test]
    fn exp_e_examples() {
        let fq = f5();
        assert!((exp_e(fq, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let w = exp_e(fq, 1);
        assert!((w - Complex64::from_polar(1.0, 2.0 * PI / 5.0)).norm() < 1e-15);
        let s: Complex64 = (0..5).map(|a| exp_e(fq, a)).sum();
        assert!(s.norm() < 1e-12);
    }

    #[test]
    fn gauss_sum_basic_cases() {
        let fq = f5();
        let p = MonicPoly::from_lower(fq, &[2, 0]);
        let g0 = gauss_sum_direct(&Poly::zero(fq), &p, DEFAULT_GAUSS_BUDGET).unwrap();
        assert!(g0.to_complex(5).norm() < 1e-10);
        let g1 = gauss_sum_direct(&Poly::constant(fq, 1), &p, DEFAULT_GAUSS_BUDGET).unwrap();
        assert!((g1.to_complex(5).norm() - 5.0).abs() < 1e-10);
        let big = MonicPoly::x(fq).pow(7);
        assert!(matches!(
            gauss_sum_direct(&Poly::zero(fq), &big, DEFAULT_GAUSS_BUDGET),
            Err(Error::GaussBudget { .. })
        ));
    }

    #[test]
    fn chi_table_matches_jacobi() {
        let fq = f5();
        for f in enumerate_monic(fq, 4).step_by(7) {
            let t = GaussSumTable::new(&f, DEFAULT_GAUSS_BUDGET).unwrap();
            assert_eq!(chi_table(&f), t.chi_table(), "f = {f}");
        }
    }

    #[test]
    fn transform_agrees_with_direct() {
        let fq = f5();
        let p = MonicPoly::from_lower(fq, &[2, 0]);
        let f = p.pow(2);
        let t = GaussSumTable::new(&f, DEFAULT_GAUSS_BUDGET).unwrap();
        let all = gauss_sums_all(&f, t.chi_table());
        for v in enumerate_monic_upto(fq, 3) {
            let idx = residue_index(&v.as_poly().rem(f.as_poly()).unwrap(), 4);
            assert!((all[idx] - t.direct(v.as_poly())).norm() < 1e-9);
        }
    }

    #[test]
    fn char_sum_identity_small() {
        let fq = f5();
        for n in 1..=2 {
            for f in enumerate_monic(fq, n) {
                let t = GaussSumTable::new(&f, DEFAULT_GAUSS_BUDGET).unwrap();
                for m in 0..=2 {
                    let c = char_sum_gauss_identity(&f, m, Some(&t)).unwrap();
                    assert!(c.agrees(1e-8), "f = {f}, m = {m}: {c:?}");
                }
            }
        }
        let one = MonicPoly::one(fq);
        assert_eq!(char_sum_gauss_identity(&one, 3, None).unwrap().direct, 125);
    }

    #[test]
    fn fundamental_sum_trivial_and_small() {
        let fq = f5();
        let (d, r) = fundamental_sum(&MonicPoly::one(fq), 1);
        assert_eq!((d, r), (100, 100));
        for f in enumerate_monic(fq, 2) {
            let (d, r) = fundamental_sum(&f, 1);
            assert_eq!(d, r, "f = {f}");
        }
    }
}
