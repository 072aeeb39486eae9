//! Arithmetic and enumeration in F_q[x] for prime q ≡ 1 (mod 4).
//!
//! Polynomials are dense and little-endian. Monic polynomials of degree n are
//! ranked lexicographically on (a_0, ..., a_{n-1}) with a_0 most significant,
//! which fixes the canonical enumeration order used by every ensemble.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A residue in [0, q).
pub type FqElem = u32;

const MAX_Q: u32 = 46337;

/// The prime field F_q. Construction rejects anything that is not a prime
/// congruent to 1 mod 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fq {
    q: u32,
}

pub fn is_prime_u32(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Fq {
    pub fn new(q: u32) -> Result<Fq> {
        if q > MAX_Q || q % 4 != 1 || !is_prime_u32(q) {
            return Err(Error::InvalidField(q));
        }
        Ok(Fq { q })
    }

    #[inline]
    pub fn q(self) -> u32 {
        self.q
    }

    #[inline]
    pub fn reduce(self, a: i64) -> FqElem {
        a.rem_euclid(self.q as i64) as u32
    }

    #[inline]
    pub fn add(self, a: FqElem, b: FqElem) -> FqElem {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: FqElem, b: FqElem) -> FqElem {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(self, a: FqElem) -> FqElem {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: FqElem, b: FqElem) -> FqElem {
        (a * b) % self.q
    }

    pub fn pow(self, a: FqElem, mut e: u64) -> FqElem {
        let mut base = a % self.q;
        let mut acc = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero element.
    pub fn inv(self, a: FqElem) -> FqElem {
        debug_assert!(a % self.q != 0);
        self.pow(a, (self.q - 2) as u64)
    }

    /// q^n as u128, panicking on overflow (never reached at desk scale).
    pub fn norm(self, n: usize) -> u128 {
        (self.q as u128).checked_pow(n as u32).expect("norm overflow")
    }
}

/// A general polynomial over F_q. The zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    fq: Fq,
    c: Vec<FqElem>,
}

impl Poly {
    pub fn new(fq: Fq, mut c: Vec<FqElem>) -> Poly {
        for v in c.iter_mut() {
            *v %= fq.q;
        }
        let mut p = Poly { fq, c };
        p.trim();
        p
    }

    pub fn from_signed(fq: Fq, c: &[i64]) -> Poly {
        Poly::new(fq, c.iter().map(|&v| fq.reduce(v)).collect())
    }

    pub fn zero(fq: Fq) -> Poly {
        Poly { fq, c: Vec::new() }
    }

    pub fn constant(fq: Fq, a: FqElem) -> Poly {
        Poly::new(fq, vec![a])
    }

    pub fn x(fq: Fq) -> Poly {
        Poly { fq, c: vec![0, 1] }
    }

    fn trim(&mut self) {
        while self.c.last() == Some(&0) {
            self.c.pop();
        }
    }

    #[inline]
    pub fn field(&self) -> Fq {
        self.fq
    }

    #[inline]
    pub fn coeffs(&self) -> &[FqElem] {
        &self.c
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> FqElem {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn lead(&self) -> FqElem {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.c.len().max(other.c.len());
        let c = (0..n)
            .map(|i| self.fq.add(self.coeff(i), other.coeff(i)))
            .collect();
        Poly::new(self.fq, c)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.c.len().max(other.c.len());
        let c = (0..n)
            .map(|i| self.fq.sub(self.coeff(i), other.coeff(i)))
            .collect();
        Poly::new(self.fq, c)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.fq, self.c.iter().map(|&a| self.fq.neg(a)).collect())
    }

    pub fn scale(&self, a: FqElem) -> Poly {
        Poly::new(self.fq, self.c.iter().map(|&v| self.fq.mul(v, a)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.fq);
        }
        let q = self.fq.q as u64;
        let mut acc = vec![0u64; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                acc[i + j] += a as u64 * b as u64;
            }
            // keep the accumulator far from overflow for long inputs
            if i % 1024 == 1023 {
                for v in acc.iter_mut() {
                    *v %= q;
                }
            }
        }
        Poly::new(self.fq, acc.into_iter().map(|v| (v % q) as u32).collect())
    }

    /// Euclidean division: self = quot * d + rem with deg rem < deg d.
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let fq = self.fq;
        let mut r = self.c.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(fq), self.clone()));
        }
        let inv_lead = fq.inv(d.lead());
        let mut quot = vec![0u32; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let coef = fq.mul(r[i], inv_lead);
            if coef == 0 {
                continue;
            }
            quot[i - dd] = coef;
            for (j, &dj) in d.c.iter().enumerate() {
                let idx = i - dd + j;
                r[idx] = fq.sub(r[idx], fq.mul(coef, dj));
            }
        }
        r.truncate(dd);
        Ok((Poly::new(fq, quot), Poly::new(fq, r)))
    }

    pub fn rem(&self, d: &Poly) -> Result<Poly> {
        Ok(self.divrem(d)?.1)
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let inv = self.fq.inv(a.lead());
            a.scale(inv)
        }
    }

    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero(self.fq);
        }
        let c = self.c[1..]
            .iter()
            .enumerate()
            .map(|(i, &a)| self.fq.mul(a, ((i + 1) as u32) % self.fq.q))
            .collect();
        Poly::new(self.fq, c)
    }

    pub fn eval(&self, x: FqElem) -> FqElem {
        self.c
            .iter()
            .rev()
            .fold(0, |acc, &a| self.fq.add(self.fq.mul(acc, x), a))
    }

    /// Splits off the leading coefficient: self = c * monic.
    pub fn to_monic(&self) -> Option<(FqElem, MonicPoly)> {
        if self.is_zero() {
            return None;
        }
        let lead = self.lead();
        let m = self.scale(self.fq.inv(lead));
        Some((lead, MonicPoly(m)))
    }

    pub fn mulmod(&self, other: &Poly, m: &Poly) -> Poly {
        self.mul(other).rem(m).expect("nonzero modulus")
    }

    pub fn powmod(&self, mut e: u128, m: &Poly) -> Poly {
        let mut base = self.rem(m).expect("nonzero modulus");
        let mut acc = Poly::constant(self.fq, 1).rem(m).expect("nonzero modulus");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mulmod(&base, m);
            }
            base = base.mulmod(&base, m);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &a) in self.c.iter().enumerate().rev() {
            if a == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, a) {
                (0, _) => write!(f, "{a}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{a}x")?,
                (_, 1) => write!(f, "x^{i}")?,
                _ => write!(f, "{a}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    /// Parses sums and products such as `x^2 + 3x + 1`, `2x^3 - x` or `x(x+1)^2`.
    /// Integer literals are reduced mod q.
    pub fn parse(fq: Fq, text: &str) -> Result<Poly> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { fq, s: &chars, at: 0 };
        let v = p.expr()?;
        if p.at != chars.len() {
            return Err(p.fail());
        }
        Ok(v)
    }
}

struct Parser<'a> {
    fq: Fq,
    s: &'a [char],
    at: usize,
}

impl Parser<'_> {
    fn fail(&self) -> Error {
        let text: String = self.s.iter().collect();
        Error::Precondition(format!("cannot parse polynomial {text:?} at position {}", self.at))
    }

    fn peek(&self) -> Option<char> {
        self.s.get(self.at).copied()
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.at += 1;
                self.term()?.neg()
            }
            _ => self.term()?,
        };
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.at += 1;
            let t = self.term()?;
            acc = if op == '+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.at += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(c) if c == 'x' || c == '(' || c.is_ascii_digit() => acc = acc.mul(&self.factor()?),
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = match self.peek() {
            Some('x') => {
                self.at += 1;
                Poly::x(self.fq)
            }
            Some('(') => {
                self.at += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.fail());
                }
                self.at += 1;
                v
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Poly::constant(self.fq, (n % self.fq.q() as u64) as u32)
            }
            _ => return Err(self.fail()),
        };
        if self.peek() == Some('^') {
            self.at += 1;
            let e = self.integer()?;
            let mut r = Poly::constant(self.fq, 1);
            for _ in 0..e {
                r = r.mul(&base);
            }
            return Ok(r);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64> {
        let start = self.at;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.at += 1;
        }
        let digits: String = self.s[start..self.at].iter().collect();
        digits.parse().map_err(|_| self.fail())
    }
}

/// A monic polynomial; the degree-0 polynomial 1 is allowed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MonicPoly(Poly);

impl MonicPoly {
    /// Coefficients lowest degree first; the last one must be 1.
    pub fn new(fq: Fq, coeffs: Vec<FqElem>) -> Result<MonicPoly> {
        if let Some(&v) = coeffs.iter().find(|&&v| v >= fq.q) {
            return Err(Error::CoefficientRange { value: v, q: fq.q });
        }
        if coeffs.last() != Some(&1) {
            return Err(Error::NotMonic);
        }
        Ok(MonicPoly(Poly { fq, c: coeffs }))
    }

    /// x^n + lower[n-1] x^{n-1} + ... + lower[0].
    pub fn parse(fq: Fq, text: &str) -> Result<MonicPoly> {
        match Poly::parse(fq, text)?.to_monic() {
            Some((1, m)) => Ok(m),
            _ => Err(Error::NotMonic),
        }
    }

    pub fn from_lower(fq: Fq, lower: &[FqElem]) -> MonicPoly {
        let mut c: Vec<u32> = lower.iter().map(|&a| a % fq.q).collect();
        c.push(1);
        MonicPoly(Poly { fq, c })
    }

    pub fn one(fq: Fq) -> MonicPoly {
        MonicPoly(Poly { fq, c: vec![1] })
    }

    pub fn x(fq: Fq) -> MonicPoly {
        MonicPoly(Poly { fq, c: vec![0, 1] })
    }

    /// x + a.
    pub fn linear(fq: Fq, a: FqElem) -> MonicPoly {
        MonicPoly(Poly {
            fq,
            c: vec![a % fq.q, 1],
        })
    }

    #[inline]
    pub fn field(&self) -> Fq {
        self.0.fq
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.0.c.len() - 1
    }

    /// |f| = q^{d(f)}.
    pub fn norm(&self) -> u128 {
        self.0.fq.norm(self.degree())
    }

    pub fn norm_f64(&self) -> f64 {
        (self.0.fq.q as f64).powi(self.degree() as i32)
    }

    #[inline]
    pub fn coeffs(&self) -> &[FqElem] {
        &self.0.c
    }

    #[inline]
    pub fn as_poly(&self) -> &Poly {
        &self.0
    }

    pub fn into_poly(self) -> Poly {
        self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.c.len() == 1
    }

    pub fn mul(&self, other: &MonicPoly) -> MonicPoly {
        MonicPoly(self.0.mul(&other.0))
    }

    pub fn pow(&self, j: u32) -> MonicPoly {
        let mut acc = MonicPoly::one(self.field());
        for _ in 0..j {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn divides(&self, other: &MonicPoly) -> bool {
        other.0.rem(&self.0).expect("monic divisor").is_zero()
    }

    /// other / self, which must divide exactly.
    pub fn div_exact(&self, divisor: &MonicPoly) -> Option<MonicPoly> {
        let (qt, r) = self.0.divrem(&divisor.0).expect("monic divisor");
        if r.is_zero() {
            Some(MonicPoly(qt))
        } else {
            None
        }
    }

    pub fn gcd(&self, other: &MonicPoly) -> MonicPoly {
        MonicPoly(self.0.gcd(&other.0))
    }

    pub fn is_coprime(&self, other: &MonicPoly) -> bool {
        self.gcd(other).is_one()
    }

    pub fn derivative(&self) -> Poly {
        self.0.derivative()
    }

    /// gcd(f, f') = 1.
    pub fn is_squarefree(&self) -> bool {
        if self.degree() == 0 {
            return true;
        }
        let d = self.0.derivative();
        if d.is_zero() {
            return false;
        }
        self.0.gcd(&d).degree() == Some(0)
    }

    /// Trial division up to degree 6, distinct-degree gcds above.
    pub fn is_irreducible(&self) -> bool {
        let n = self.degree();
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        if n <= 6 {
            let fq = self.field();
            for d in 1..=n / 2 {
                for h in enumerate_monic(fq, d) {
                    if h.divides(self) {
                        return false;
                    }
                }
            }
            true
        } else {
            smallest_factor_degree(self) == n
        }
    }

    /// Rank in the canonical order of M_n.
    pub fn rank(&self) -> u64 {
        let q = self.field().q as u64;
        let n = self.degree();
        self.0.c[..n].iter().fold(0u64, |acc, &a| acc * q + a as u64)
    }

    pub fn unrank(fq: Fq, n: usize, mut rank: u64) -> MonicPoly {
        let q = fq.q as u64;
        let mut c = vec![0u32; n + 1];
        c[n] = 1;
        for i in (0..n).rev() {
            c[i] = (rank % q) as u32;
            rank /= q;
        }
        MonicPoly(Poly { fq, c })
    }

    pub fn factorize(&self) -> Factorization {
        factorize(self)
    }
}

impl PartialOrd for MonicPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MonicPoly {
    /// Degree first, then the canonical lexicographic order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.c.cmp(&other.0.c))
    }
}

impl fmt::Display for MonicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Iterator over M_n in canonical order.
pub struct MonicIter {
    fq: Fq,
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for MonicIter {
    type Item = MonicPoly;

    fn next(&mut self) -> Option<MonicPoly> {
        if self.next >= self.end {
            return None;
        }
        let f = MonicPoly::unrank(self.fq, self.n, self.next);
        self.next += 1;
        Some(f)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = (self.end - self.next) as usize;
        (r, Some(r))
    }
}

impl ExactSizeIterator for MonicIter {}

/// All monic polynomials of degree n, q^n of them.
pub fn enumerate_monic(fq: Fq, n: usize) -> MonicIter {
    let end = u64::try_from(fq.norm(n)).expect("enumeration too large");
    MonicIter {
        fq,
        n,
        next: 0,
        end,
    }
}

/// Monic polynomials of degree ≤ n, ordered by degree.
pub fn enumerate_monic_upto(fq: Fq, n: usize) -> impl Iterator<Item = MonicPoly> {
    (0..=n).flat_map(move |d| enumerate_monic(fq, d))
}

/// The set H_d of monic square-free polynomials of degree d.
pub fn enumerate_squarefree(fq: Fq, d: usize) -> impl Iterator<Item = MonicPoly> {
    enumerate_monic(fq, d).filter(|f| f.is_squarefree())
}

/// |H_d|: q for d = 1 and q^{d-1}(q-1) for d ≥ 2 (and 1 for d = 0).
pub fn count_squarefree(q: u32, d: usize) -> u128 {
    let q = q as u128;
    match d {
        0 => 1,
        1 => q,
        _ => q.pow(d as u32 - 1) * (q - 1),
    }
}

/// Möbius function on positive integers.
pub fn mobius_int(mut n: u64) -> i64 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// π_q(n) = (1/n) Σ_{d|n} μ(d) q^{n/d}.
pub fn prime_count(q: u32, n: usize) -> u128 {
    assert!(n >= 1);
    let mut acc: i128 = 0;
    for d in 1..=n {
        if n % d == 0 {
            acc += mobius_int(d as u64) as i128 * (q as i128).pow((n / d) as u32);
        }
    }
    (acc / n as i128) as u128
}

/// Degree of the smallest irreducible factor, found by distinct-degree gcds.
/// Returns d(f) when f is irreducible.
pub fn smallest_factor_degree(f: &MonicPoly) -> usize {
    let n = f.degree();
    assert!(n >= 1);
    let fq = f.field();
    let x = Poly::x(fq);
    let mut h = x.rem(f.as_poly()).expect("monic");
    for d in 1..=n / 2 {
        h = h.powmod(fq.q as u128, f.as_poly());
        let g = h.sub(&x).gcd(f.as_poly());
        if g.degree() != Some(0) {
            return d;
        }
    }
    n
}

/// Λ(f) = d(P) when f = P^j, else 0.
pub fn von_mangoldt(f: &MonicPoly) -> u32 {
    let n = f.degree();
    if n == 0 {
        return 0;
    }
    let fq = f.field();
    let x = Poly::x(fq);
    let mut h = x.rem(f.as_poly()).expect("monic");
    for d in 1..=n {
        h = h.powmod(fq.q as u128, f.as_poly());
        let g = h.sub(&x).gcd(f.as_poly());
        if g.degree() == Some(0) {
            continue;
        }
        // all irreducible factors of g have degree d; f is a prime power
        // iff g is a single prime and f is a power of it
        if g.degree() != Some(d) {
            return 0;
        }
        let p = MonicPoly(g);
        let mut rest = f.clone();
        while let Some(r) = rest.div_exact(&p) {
            rest = r;
        }
        return if rest.is_one() { d as u32 } else { 0 };
    }
    0
}

/// Prime factorization into distinct monic irreducibles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(MonicPoly, u32)>,
}

impl Factorization {
    pub fn from_factors(mut factors: Vec<(MonicPoly, u32)>) -> Factorization {
        factors.sort();
        Factorization { factors }
    }

    pub fn factors(&self) -> &[(MonicPoly, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &MonicPoly> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn product(&self, fq: Fq) -> MonicPoly {
        self.factors
            .iter()
            .fold(MonicPoly::one(fq), |acc, (p, j)| acc.mul(&p.pow(*j)))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, j)| j == 1)
    }

    pub fn is_square(&self) -> bool {
        self.factors.iter().all(|&(_, j)| j % 2 == 0)
    }

    pub fn mobius(&self) -> i32 {
        if self.is_squarefree() {
            if self.factors.len() % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }

    /// τ_k as a product of C(j+k-1, k-1).
    pub fn tau_k(&self, k: u32) -> u128 {
        self.factors
            .iter()
            .map(|&(_, j)| binomial(j as u64 + k as u64 - 1, k as u64 - 1))
            .product()
    }
}

/// Binomial coefficient, exact for the small arguments used here.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

// Square-free decomposition over F_p: returns (squarefree part, multiplicity).
fn squarefree_decomposition(f: &Poly, out: &mut Vec<(Poly, u32)>, scale: u32) {
    let fq = f.fq;
    if f.degree().unwrap_or(0) == 0 {
        return;
    }
    let df = f.derivative();
    if df.is_zero() {
        out_pth_root(f, out, scale);
        return;
    }
    let mut c = f.gcd(&df);
    let mut w = f.divrem(&c).expect("nonzero").0;
    let mut i = 1u32;
    while w.degree() != Some(0) {
        let y = w.gcd(&c);
        let z = w.divrem(&y).expect("nonzero").0;
        if z.degree().unwrap_or(0) > 0 {
            out.push((z.to_monic().expect("nonzero").1 .0, i * scale));
        }
        i += 1;
        w = y;
        c = c.divrem(&w).expect("nonzero").0;
    }
    if c.degree().unwrap_or(0) > 0 {
        out_pth_root(&c, out, scale);
    }
    let _ = fq;
}

fn out_pth_root(f: &Poly, out: &mut Vec<(Poly, u32)>, scale: u32) {
    // f = g(x^p) = g(x)^p over the prime field
    let p = f.fq.q as usize;
    let c: Vec<u32> = f.c.iter().step_by(p).copied().collect();
    let g = Poly::new(f.fq, c);
    squarefree_decomposition(&g, out, scale * f.fq.q);
}

// Distinct-degree factorization of a monic square-free polynomial.
fn distinct_degree(f: &Poly) -> Vec<(Poly, usize)> {
    let fq = f.fq;
    let x = Poly::x(fq);
    let mut rest = f.clone();
    let mut h = x.rem(&rest).expect("monic");
    let mut out = Vec::new();
    let mut d = 0;
    while rest.degree().unwrap_or(0) >= 2 * (d + 1) {
        d += 1;
        h = h.powmod(fq.q as u128, &rest);
        let g = h.sub(&x).gcd(&rest);
        if g.degree().unwrap_or(0) > 0 {
            rest = rest.divrem(&g).expect("nonzero").0;
            h = h.rem(&rest).expect("nonzero");
            out.push((g, d));
        }
    }
    if rest.degree().unwrap_or(0) > 0 {
        let dr = rest.degree().unwrap();
        out.push((rest, dr));
    }
    out
}

// Cantor–Zassenhaus splitting of a product of distinct degree-d primes.
fn equal_degree(f: &Poly, d: usize, seed: &mut u64, out: &mut Vec<Poly>) {
    let n = f.degree().unwrap();
    if n == d {
        out.push(f.clone());
        return;
    }
    let fq = f.fq;
    let e = (fq.norm(d) - 1) / 2;
    loop {
        let a: Vec<u32> = (0..n)
            .map(|_| {
                *seed = seed
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((*seed >> 33) % fq.q as u64) as u32
            })
            .collect();
        let a = Poly::new(fq, a);
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let b = a.powmod(e, f).sub(&Poly::constant(fq, 1));
        let g = b.gcd(f);
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && dg < n {
            let h = f.divrem(&g).expect("nonzero").0;
            equal_degree(&g, d, seed, out);
            equal_degree(&h.to_monic().unwrap().1 .0, d, seed, out);
            return;
        }
    }
}

pub fn factorize(f: &MonicPoly) -> Factorization {
    let mut sqf = Vec::new();
    squarefree_decomposition(f.as_poly(), &mut sqf, 1);
    let mut factors: Vec<(MonicPoly, u32)> = Vec::new();
    let mut seed = 0x9e37_79b9_7f4a_7c15u64;
    for (part, mult) in sqf {
        for (g, d) in distinct_degree(&part) {
            let mut primes = Vec::new();
            equal_degree(&g, d, &mut seed, &mut primes);
            for p in primes {
                let p = MonicPoly(p);
                match factors.iter_mut().find(|(existing, _)| *existing == p) {
                    Some(entry) => entry.1 += mult,
                    None => factors.push((p, mult)),
                }
            }
        }
    }
    Factorization::from_factors(factors)
}

pub fn mobius(f: &MonicPoly) -> i32 {
    factorize(f).mobius()
}

/// τ_k(f), the number of ordered factorizations into k monic parts.
pub fn tau_k(f: &MonicPoly, k: u32) -> u128 {
    assert!(k >= 1);
    if f.is_one() {
        return 1;
    }
    factorize(f).tau_k(k)
}

/// ℓ = ℓ_1 ℓ_2^2 with ℓ_1 square-free.
pub fn split_squarefree_part(l: &MonicPoly) -> (MonicPoly, MonicPoly) {
    let fq = l.field();
    let fac = factorize(l);
    let mut l1 = MonicPoly::one(fq);
    let mut l2 = MonicPoly::one(fq);
    for (p, j) in fac.factors() {
        if j % 2 == 1 {
            l1 = l1.mul(p);
        }
        l2 = l2.mul(&p.pow(j / 2));
    }
    (l1, l2)
}

/// Bits per sieve segment; small enough to stay in cache.
const SEGMENT_BITS: u64 = 1 << 23;

/// Irreducibles of degree n by sieving M_n with all primes of degree ≤ n/2.
///
/// `small[d]` must list the irreducibles of degree d for d ≤ n/2. The
/// returned bitset marks reducible ranks. The sieve runs segment by
/// segment: fixing the s most significant rank digits (the low coefficients
/// of f) fixes the low s coefficients of every cofactor when P(0) ≠ 0.
fn sieve_bits(fq: Fq, n: usize, small: &[Vec<MonicPoly>]) -> Vec<u64> {
    sieve_bits_segmented(fq, n, small, SEGMENT_BITS)
}

fn sieve_bits_segmented(fq: Fq, n: usize, small: &[Vec<MonicPoly>], segment_bits: u64) -> Vec<u64> {
    let q = fq.q as u64;
    let size = u64::try_from(fq.norm(n)).expect("sieve too large");
    let mut bits = vec![0u64; (size as usize).div_ceil(64)];
    if n < 2 {
        return bits;
    }
    let weights: Vec<u64> = (0..n).map(|i| q.pow((n - 1 - i) as u32)).collect();
    // multiples of x are exactly the ranks with leading digit 0
    let x_end = weights[0];
    for w in bits.iter_mut().take((x_end / 64) as usize) {
        *w = !0;
    }
    for r in (x_end / 64) * 64..x_end {
        bits[(r >> 6) as usize] |= 1 << (r & 63);
    }

    let mut s = 0;
    while s < n - n / 2 && weights[s] * q > segment_bits {
        s += 1;
    }
    let inv: Vec<u32> = (0..fq.q).map(|a| if a == 0 { 0 } else { fq.inv(a) }).collect();
    let mut c = vec![0u32; s];
    let mut h = vec![0u32; n];
    let mut f = vec![0u32; n];
    for seg in 0..q.pow(s as u32) {
        let mut rest = seg;
        for i in (0..s).rev() {
            c[i] = (rest % q) as u32;
            rest /= q;
        }
        for d in 1..=n / 2 {
            let m = n - d;
            for p in &small[d] {
                let pc = p.coeffs();
                if pc[0] == 0 {
                    continue;
                }
                h[..m].fill(0);
                for i in 0..s {
                    let mut acc = c[i];
                    for j in 1..=i.min(d) {
                        acc = fq.sub(acc, fq.mul(pc[j], h[i - j]));
                    }
                    h[i] = fq.mul(acc, inv[pc[0] as usize]);
                }
                f.fill(0);
                for i in 0..s {
                    for (j, &pj) in pc.iter().enumerate() {
                        if i + j < n {
                            f[i + j] = fq.add(f[i + j], fq.mul(pj, h[i]));
                        }
                    }
                }
                for j in 0..d {
                    f[m + j] = fq.add(f[m + j], pc[j]);
                }
                mark_cofactors(&mut bits, &weights, &mut f, &mut h, s, m, pc, fq.q);
            }
        }
    }
    bits
}

/// Marks hi + rank(lo + t·P) over the low block for t = 0..q.
#[inline(always)]
fn mark_block<const L: usize>(bits: &mut [u64], hi: u64, lo: &[u32], lo_w: &[u64], pc: &[u32], q: u32) {
    let mut c: [u32; L] = lo.try_into().unwrap();
    let w: [u64; L] = lo_w.try_into().unwrap();
    let p: [u32; L] = pc[..L].try_into().unwrap();
    for _ in 0..q {
        let mut r = hi;
        for j in 0..L {
            r += c[j] as u64 * w[j];
        }
        bits[(r >> 6) as usize] |= 1 << (r & 63);
        for j in 0..L {
            let v = c[j] + p[j];
            c[j] = if v >= q { v - q } else { v };
        }
    }
}

/// Marks P·h for every h agreeing with `h` below degree `from`, with
/// `f` = P·h at the starting cofactor (free digits zero).
#[allow(clippy::too_many_arguments)]
fn mark_cofactors(
    bits: &mut [u64],
    weights: &[u64],
    f: &mut [u32],
    h: &mut [u32],
    from: usize,
    m: usize,
    pc: &[u32],
    q: u32,
) {
    let n = f.len();
    let mark = |bits: &mut [u64], r: u64| bits[(r >> 6) as usize] |= 1 << (r & 63);
    if from == m {
        let r: u64 = f.iter().zip(weights).map(|(&c, &w)| c as u64 * w).sum();
        mark(bits, r);
        return;
    }
    // the top digit h[m-1] only moves f[m-1..n], the lowest-weight block
    let lo_start = m - 1;
    let lo_w = &weights[lo_start..];
    let mut hi: u64 = (0..lo_start).map(|i| f[i] as u64 * weights[i]).sum();
    let mut lo = [0u32; 64];
    let lo = &mut lo[..n - lo_start];
    let outer = (q as u64).pow((lo_start - from) as u32);
    for step in 0..outer {
        lo.copy_from_slice(&f[lo_start..]);
        match lo.len() {
            2 => mark_block::<2>(bits, hi, lo, lo_w, pc, q),
            3 => mark_block::<3>(bits, hi, lo, lo_w, pc, q),
            4 => mark_block::<4>(bits, hi, lo, lo_w, pc, q),
            5 => mark_block::<5>(bits, hi, lo, lo_w, pc, q),
            _ => {
                for _ in 0..q {
                    let r = hi + lo.iter().zip(lo_w).map(|(&c, &w)| c as u64 * w).sum::<u64>();
                    mark(bits, r);
                    for (c, &pj) in lo.iter_mut().zip(pc) {
                        *c += pj;
                        if *c >= q {
                            *c -= q;
                        }
                    }
                }
            }
        }
        if step + 1 == outer {
            break;
        }
        // odometer over h[from..m-1]; each bump adds P * x^i
        let mut i = lo_start - 1;
        loop {
            h[i] += 1;
            for (j, &pj) in pc.iter().enumerate() {
                let idx = i + j;
                if idx >= n {
                    break;
                }
                let old = f[idx];
                let mut new = old + pj;
                if new >= q {
                    new -= q;
                }
                f[idx] = new;
                if idx < lo_start {
                    hi = hi.wrapping_add((new as u64).wrapping_sub(old as u64).wrapping_mul(weights[idx]));
                }
            }
            if h[i] == q {
                h[i] = 0;
                i -= 1;
            } else {
                break;
            }
        }
    }
}

fn unmarked(bits: &[u64], size: usize) -> impl Iterator<Item = u64> + '_ {
    (0..size as u64).filter(move |&r| bits[(r >> 6) as usize] & (1 << (r & 63)) == 0)
}

/// Monic irreducibles of degree 1..=max_deg, grouped by degree (index 0 empty).
pub fn sieve_irreducibles(fq: Fq, max_deg: usize) -> Vec<Vec<MonicPoly>> {
    let mut out: Vec<Vec<MonicPoly>> = vec![Vec::new()];
    for n in 1..=max_deg {
        let size = fq.norm(n) as usize;
        let bits = sieve_bits(fq, n, &out);
        let primes: Vec<MonicPoly> = unmarked(&bits, size)
            .map(|r| MonicPoly::unrank(fq, n, r))
            .collect();
        out.push(primes);
    }
    out
}

/// Sieve count of degree-n irreducibles; lists only the degrees ≤ n/2.
pub fn count_irreducibles_sieve(fq: Fq, n: usize) -> u64 {
    let small = sieve_irreducibles(fq, n / 2);
    let size = fq.norm(n) as usize;
    let bits = sieve_bits(fq, n, &small);
    let marked: u64 = bits.iter().map(|w| w.count_ones() as u64).sum();
    size as u64 - marked
}

/// Sieve counts of degree-n irreducibles for n = 0..=max_n (entry 0 is 0).
pub fn sieve_counts(fq: Fq, max_n: usize) -> Vec<u64> {
    let small = sieve_irreducibles(fq, max_n / 2);
    (0..=max_n)
        .map(|n| match n {
            0 => 0,
            n if n <= max_n / 2 => small[n].len() as u64,
            n => {
                let bits = sieve_bits(fq, n, &small);
                let marked: u64 = bits.iter().map(|w| w.count_ones() as u64).sum();
                fq.norm(n) as u64 - marked
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> Fq {
        Fq::new(5).unwrap()
    }

    fn mp(c: &[u32]) -> MonicPoly {
        MonicPoly::new(f5(), c.to_vec()).unwrap()
    }

    #[test]
    fn field_validation() {
        assert!(Fq::new(5).is_ok());
        assert!(Fq::new(13).is_ok());
        assert_eq!(Fq::new(7), Err(Error::InvalidField(7)));
        assert_eq!(Fq::new(3), Err(Error::InvalidField(3)));
        assert_eq!(Fq::new(9), Err(Error::InvalidField(9)));
        assert_eq!(Fq::new(25), Err(Error::InvalidField(25)));
    }

    #[test]
    fn small_arithmetic() {
        let fq = f5();
        let a = MonicPoly::linear(fq, 1);
        assert_eq!(a.mul(&a), mp(&[1, 2, 1]));
        let g = mp(&[4, 0, 1]).gcd(&mp(&[4, 1]));
        assert_eq!(g, mp(&[4, 1]));
        let f = mp(&[3, 1, 4, 1]);
        assert!(f.as_poly().rem(f.as_poly()).unwrap().is_zero());
        let (qt, r) = f.as_poly().divrem(&Poly::new(fq, vec![2, 3])).unwrap();
        assert_eq!(qt.mul(&Poly::new(fq, vec![2, 3])).add(&r), *f.as_poly());
        assert!(Poly::zero(fq).divrem(&Poly::zero(fq)).is_err());
    }

    #[test]
    fn irreducibility_examples() {
        assert!(!mp(&[1, 0, 1]).is_irreducible());
        assert!(MonicPoly::x(f5()).is_irreducible());
        assert!(mp(&[2, 0, 1]).is_irreducible());
    }

    #[test]
    fn enumeration_counts() {
        let fq = f5();
        let m0: Vec<_> = enumerate_monic(fq, 0).collect();
        assert_eq!(m0, vec![MonicPoly::one(fq)]);
        assert_eq!(enumerate_monic(fq, 2).count(), 25);
        assert_eq!(enumerate_monic(Fq::new(13).unwrap(), 3).count(), 2197);
        for d in 1..=6 {
            let n = enumerate_squarefree(fq, d).count() as u128;
            assert_eq!(n, count_squarefree(5, d), "d = {d}");
        }
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let fq = f5();
        let all: Vec<_> = enumerate_monic(fq, 3).collect();
        for w in all.windows(2) {
            let a: Vec<_> = w[0].coeffs()[..3].to_vec();
            let b: Vec<_> = w[1].coeffs()[..3].to_vec();
            assert!(a < b);
        }
        for (r, f) in all.iter().enumerate() {
            assert_eq!(f.rank(), r as u64);
        }
    }

    #[test]
    fn segmented_sieve_matches_unsegmented() {
        for (q, n) in [(5, 6), (13, 4), (5, 7)] {
            let fq = Fq::new(q).unwrap();
            let small = sieve_irreducibles(fq, n / 2);
            let whole = sieve_bits_segmented(fq, n, &small, u64::MAX);
            for seg in [1, 64, 700] {
                assert_eq!(sieve_bits_segmented(fq, n, &small, seg), whole, "q={q} n={n} seg={seg}");
            }
        }
    }

    #[test]
    fn sieve_matches_brute_force_and_formula() {
        let fq = f5();
        let sieve = sieve_irreducibles(fq, 4);
        for n in 1..=4 {
            let brute: Vec<_> = enumerate_monic(fq, n).filter(|f| f.is_irreducible()).collect();
            assert_eq!(sieve[n], brute);
            assert_eq!(sieve[n].len() as u128, prime_count(5, n));
        }
        assert_eq!(prime_count(5, 2), 10);
        assert_eq!(prime_count(5, 3), 40);
    }

    #[test]
    fn distinct_degree_test_agrees_with_trial_division() {
        let fq = f5();
        for f in enumerate_monic(fq, 4) {
            assert_eq!(f.is_irreducible(), smallest_factor_degree(&f) == 4);
        }
    }

    #[test]
    fn von_mangoldt_examples() {
        let fq = f5();
        assert_eq!(von_mangoldt(&MonicPoly::one(fq)), 0);
        assert_eq!(von_mangoldt(&MonicPoly::x(fq).pow(3)), 1);
        let s: u32 = enumerate_monic(fq, 2).map(|f| von_mangoldt(&f)).sum();
        assert_eq!(s, 25);
        let p = mp(&[2, 0, 1]);
        assert_eq!(von_mangoldt(&p.pow(5)), 2);
        assert_eq!(von_mangoldt(&p.mul(&MonicPoly::x(fq))), 0);
    }

    #[test]
    fn factorization_reconstructs() {
        let fq = f5();
        for f in enumerate_monic(fq, 5).step_by(7) {
            let fac = factorize(&f);
            assert_eq!(fac.product(fq), f);
            for p in fac.primes() {
                assert!(p.is_irreducible());
            }
        }
        // p-th powers exercise the inseparable branch
        let f = MonicPoly::linear(fq, 2).pow(5).mul(&mp(&[2, 0, 1]).pow(2));
        let fac = factorize(&f);
        assert_eq!(fac.factors(), &[(MonicPoly::linear(fq, 2), 5), (mp(&[2, 0, 1]), 2)]);
    }

    #[test]
    fn tau_examples() {
        let fq = f5();
        let p = MonicPoly::x(fq);
        assert_eq!(tau_k(&MonicPoly::one(fq), 3), 1);
        assert_eq!(tau_k(&p.pow(2), 2), 3);
        assert_eq!(tau_k(&p, 3), 3);
    }

    #[test]
    fn tau_matches_ordered_factorization_count() {
        // count (a, b) with a*b = f directly
        let fq = f5();
        for f in enumerate_monic(fq, 3) {
            let mut count = 0;
            for d in 0..=3 {
                for a in enumerate_monic(fq, d) {
                    if a.divides(&f) {
                        count += 1;
                    }
                }
            }
            assert_eq!(tau_k(&f, 2), count);
        }
    }

    #[test]
    fn squarefree_split_examples() {
        let fq = f5();
        let x = MonicPoly::x(fq);
        assert_eq!(split_squarefree_part(&x.pow(3)), (x.clone(), x.clone()));
        let one = MonicPoly::one(fq);
        assert_eq!(split_squarefree_part(&one), (one.clone(), one.clone()));
        let l = x.pow(2).mul(&MonicPoly::linear(fq, 1));
        assert_eq!(split_squarefree_part(&l), (MonicPoly::linear(fq, 1), x));
    }

    #[test]
    fn mobius_values() {
        let fq = f5();
        assert_eq!(mobius(&MonicPoly::one(fq)), 1);
        assert_eq!(mobius(&MonicPoly::x(fq)), -1);
        assert_eq!(mobius(&MonicPoly::x(fq).pow(2)), 0);
        assert_eq!(mobius(&mp(&[4, 0, 1])), 1);
    }
}
