//! Coefficients of L(u, χ_D) from prime data.
//!
//! For each d ≤ 2g we model F_{q^d} = F_q[x]/(P_0) and keep one root α per
//! Frobenius orbit of size d, i.e. one root per monic irreducible of degree
//! d. Then χ_D(P) = η(D(α)) with η the quadratic character of F_{q^d}, and
//!
//!   a_n = Σ_{d|n} d · Σ_{d(P)=d} χ_D(P)^{n/d},   n c_n = Σ_{m=1}^{n} a_m c_{n-m}.
//!
//! Everything is exact integer arithmetic.

use crate::error::{Error, Result};
use crate::ffpoly::{enumerate_monic, Fq, MonicPoly, Poly};

const LANE_BITS: u32 = 16;
const LANES_PER_WORD: usize = 4;
const WORDS: usize = 2;

/// Arithmetic in F_{q^d} on little-endian coordinate vectors.
#[derive(Clone, Debug)]
pub struct ExtField {
    fq: Fq,
    d: usize,
    modulus: MonicPoly,
    /// η(e) for every element index.
    eta: Vec<i8>,
    /// x^{qi} mod P_0 as coordinate rows, the matrix of Frobenius.
    frob: Vec<Vec<u32>>,
}

impl ExtField {
    pub fn new(fq: Fq, d: usize) -> ExtField {
        let modulus = enumerate_monic(fq, d)
            .find(|f| f.is_irreducible())
            .expect("irreducibles exist in every degree");
        let size = fq.norm(d) as usize;
        let mut is_square = vec![false; size];
        for idx in 1..size {
            let e = Self::decode_with(fq, d, idx);
            let sq = Self::mul_with(fq, &modulus, &e, &e);
            is_square[Self::encode_with(fq, &sq)] = true;
        }
        let eta = (0..size)
            .map(|i| if i == 0 { 0 } else if is_square[i] { 1 } else { -1 })
            .collect();
        let frob = (0..d)
            .map(|i| {
                let xi = Poly::x(fq).powmod(fq.q() as u128 * i as u128, modulus.as_poly());
                (0..d).map(|j| xi.coeff(j)).collect()
            })
            .collect();
        ExtField {
            fq,
            d,
            modulus,
            eta,
            frob,
        }
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> &MonicPoly {
        &self.modulus
    }

    pub fn size(&self) -> usize {
        self.eta.len()
    }

    pub fn eta(&self, idx: usize) -> i8 {
        self.eta[idx]
    }

    fn decode_with(fq: Fq, d: usize, mut idx: usize) -> Vec<u32> {
        let q = fq.q() as usize;
        (0..d)
            .map(|_| {
                let c = (idx % q) as u32;
                idx /= q;
                c
            })
            .collect()
    }

    fn encode_with(fq: Fq, v: &[u32]) -> usize {
        let q = fq.q() as usize;
        v.iter().rev().fold(0usize, |acc, &c| acc * q + c as usize)
    }

    fn mul_with(fq: Fq, m: &MonicPoly, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = Poly::new(fq, a.to_vec()).mulmod(&Poly::new(fq, b.to_vec()), m.as_poly());
        (0..m.degree()).map(|i| p.coeff(i)).collect()
    }

    pub fn decode(&self, idx: usize) -> Vec<u32> {
        Self::decode_with(self.fq, self.d, idx)
    }

    pub fn encode(&self, v: &[u32]) -> usize {
        Self::encode_with(self.fq, v)
    }

    pub fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        Self::mul_with(self.fq, &self.modulus, a, b)
    }

    pub fn frobenius(&self, a: &[u32]) -> Vec<u32> {
        let mut out = vec![0u32; self.d];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = self.fq.add(*o, self.fq.mul(ai, self.frob[i][j]));
            }
        }
        out
    }

    /// One representative of each Frobenius orbit of exact size d.
    pub fn orbit_representatives(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.size()];
        let mut reps = Vec::new();
        for idx in 0..self.size() {
            if seen[idx] {
                continue;
            }
            let a = self.decode(idx);
            let mut cur = a.clone();
            let mut len = 0;
            loop {
                let ci = self.encode(&cur);
                if seen[ci] {
                    break;
                }
                seen[ci] = true;
                len += 1;
                cur = self.frobenius(&cur);
            }
            if len == self.d {
                reps.push(a);
            }
        }
        reps
    }

    /// Minimal polynomial over F_q of an element with orbit size d.
    pub fn minimal_polynomial(&self, a: &[u32]) -> MonicPoly {
        // ∏_{i<d} (T - a^{q^i}) with coefficients in F_{q^d}, which land in F_q
        let mut poly: Vec<Vec<u32>> = vec![one_vec(self.d)];
        let mut conj = a.to_vec();
        for _ in 0..self.d {
            let neg: Vec<u32> = conj.iter().map(|&c| self.fq.neg(c)).collect();
            let mut next = vec![vec![0u32; self.d]; poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                // c * T^{i+1}
                for (j, &v) in c.iter().enumerate() {
                    next[i + 1][j] = self.fq.add(next[i + 1][j], v);
                }
                let t = self.mul(c, &neg);
                for (j, &v) in t.iter().enumerate() {
                    next[i][j] = self.fq.add(next[i][j], v);
                }
            }
            poly = next;
            conj = self.frobenius(&conj);
        }
        let coeffs = poly
            .iter()
            .map(|c| {
                debug_assert!(c[1..].iter().all(|&v| v == 0));
                c[0]
            })
            .collect();
        MonicPoly::new(self.fq, coeffs).expect("monic")
    }
}

fn one_vec(d: usize) -> Vec<u32> {
    let mut v = vec![0u32; d];
    v[0] = 1;
    v
}

struct DegreeData {
    field: ExtField,
    /// powers[p][i] = packed coordinates of α_p^i, i = 0..=2g+1.
    powers: Vec<Vec<[u64; WORDS]>>,
    prime_count: usize,
    place: Vec<usize>,
}

/// Coefficient engine for a fixed (q, g).
pub struct CoeffEngine {
    fq: Fq,
    g: usize,
    degrees: Vec<DegreeData>,
    lane_mod: Vec<u8>,
}

/// Per-degree prime statistics of χ_D.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeSums {
    /// s[d] = Σ_{d(P)=d} χ_D(P), index 0 unused.
    pub s: Vec<i64>,
    /// t[d] = #{P : d(P) = d, P ∤ D}.
    pub t: Vec<i64>,
}

impl CoeffEngine {
    pub fn new(fq: Fq, g: usize) -> Result<CoeffEngine> {
        if g == 0 {
            return Err(Error::Precondition("genus must be at least 1".into()));
        }
        let q = fq.q() as u64;
        let max_lane = (2 * g as u64 + 2) * (q - 1) * (q - 1);
        if max_lane >= 1 << LANE_BITS || 2 * g > WORDS * LANES_PER_WORD {
            return Err(Error::Precondition(format!(
                "coefficient engine supports 2g ≤ {} and small q; got q = {q}, g = {g}",
                WORDS * LANES_PER_WORD
            )));
        }
        let mut degrees = Vec::new();
        for d in 1..=2 * g {
            let field = ExtField::new(fq, d);
            let reps = field.orbit_representatives();
            let powers = reps
                .iter()
                .map(|a| {
                    let mut out = Vec::with_capacity(2 * g + 2);
                    let mut cur = one_vec(d);
                    for _ in 0..=2 * g + 1 {
                        out.push(pack(&cur));
                        cur = field.mul(&cur, a);
                    }
                    out
                })
                .collect();
            let place = (0..d).map(|j| q.pow(j as u32) as usize).collect();
            degrees.push(DegreeData {
                prime_count: reps.len(),
                field,
                powers,
                place,
            });
        }
        let lane_mod = (0..1u32 << LANE_BITS).map(|v| (v % fq.q()) as u8).collect();
        Ok(CoeffEngine {
            fq,
            g,
            degrees,
            lane_mod,
        })
    }

    pub fn field(&self) -> Fq {
        self.fq
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    /// Number of monic irreducibles of degree d found as Frobenius orbits.
    pub fn orbit_count(&self, d: usize) -> usize {
        self.degrees[d - 1].prime_count
    }

    pub fn ext_field(&self, d: usize) -> &ExtField {
        &self.degrees[d - 1].field
    }

    pub fn prime_sums(&self, dpoly: &MonicPoly) -> PrimeSums {
        debug_assert_eq!(dpoly.degree(), 2 * self.g + 1);
        let dc = dpoly.coeffs();
        let mut s = vec![0i64; 2 * self.g + 1];
        let mut t = vec![0i64; 2 * self.g + 1];
        for (di, data) in self.degrees.iter().enumerate() {
            let d = di + 1;
            let mut sum = 0i64;
            let mut zeros = 0i64;
            for pw in &data.powers {
                let mut acc = [0u64; WORDS];
                for (i, &c) in dc.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let c = c as u64;
                    for w in 0..WORDS {
                        acc[w] += c * pw[i][w];
                    }
                }
                let mut idx = 0usize;
                for j in 0..d {
                    let lane = (acc[j / LANES_PER_WORD] >> (LANE_BITS as usize * (j % LANES_PER_WORD))) & 0xffff;
                    idx += self.lane_mod[lane as usize] as usize * data.place[j];
                }
                let e = data.field.eta[idx];
                sum += e as i64;
                if e == 0 {
                    zeros += 1;
                }
            }
            s[d] = sum;
            t[d] = data.prime_count as i64 - zeros;
        }
        PrimeSums { s, t }
    }

    /// a_n = Σ_{f ∈ M_n} Λ(f) χ_D(f) for n = 1..=2g (index 0 unused).
    pub fn lambda_sums(&self, dpoly: &MonicPoly) -> Vec<i64> {
        let ps = self.prime_sums(dpoly);
        lambda_from_prime_sums(&ps, 2 * self.g)
    }

    pub fn coeffs(&self, dpoly: &MonicPoly) -> Vec<i64> {
        let a = self.lambda_sums(dpoly);
        coeffs_from_lambda(&a, 2 * self.g)
    }
}

pub fn lambda_from_prime_sums(ps: &PrimeSums, max_n: usize) -> Vec<i64> {
    let mut a = vec![0i64; max_n + 1];
    for (n, an) in a.iter_mut().enumerate().skip(1) {
        for d in 1..=n {
            if n % d == 0 {
                let v = if (n / d) % 2 == 1 { ps.s[d] } else { ps.t[d] };
                *an += d as i64 * v;
            }
        }
    }
    a
}

/// Newton's identities: n c_n = Σ_{m=1}^{n} a_m c_{n-m}.
pub fn coeffs_from_lambda(a: &[i64], max_n: usize) -> Vec<i64> {
    let mut c = vec![0i64; max_n + 1];
    c[0] = 1;
    for n in 1..=max_n {
        let acc: i128 = (1..=n).map(|m| a[m] as i128 * c[n - m] as i128).sum();
        debug_assert_eq!(acc % n as i128, 0);
        c[n] = (acc / n as i128) as i64;
    }
    c
}

fn pack(v: &[u32]) -> [u64; WORDS] {
    let mut out = [0u64; WORDS];
    for (j, &c) in v.iter().enumerate() {
        out[j / LANES_PER_WORD] |= (c as u64) << (LANE_BITS as usize * (j % LANES_PER_WORD));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::jacobi;
    use crate::ffpoly::{prime_count, sieve_irreducibles};

    #[test]
    fn orbits_are_the_irreducibles() {
        let fq = Fq::new(5).unwrap();
        let sieve = sieve_irreducibles(fq, 4);
        for d in 1..=4 {
            let f = ExtField::new(fq, d);
            let reps = f.orbit_representatives();
            assert_eq!(reps.len() as u128, prime_count(5, d));
            let mut mins: Vec<MonicPoly> = reps.iter().map(|a| f.minimal_polynomial(a)).collect();
            mins.sort();
            let mut expected = sieve[d].clone();
            expected.sort();
            assert_eq!(mins, expected);
        }
    }

    #[test]
    fn eta_is_the_residue_symbol() {
        // χ_D(P) = η(D(α)) must match (D/P) for every prime of degree ≤ 3
        let fq = Fq::new(5).unwrap();
        let d = MonicPoly::from_lower(fq, &[1, 3, 0, 2, 4]);
        for deg in 1..=3 {
            let f = ExtField::new(fq, deg);
            for a in f.orbit_representatives() {
                let p = f.minimal_polynomial(&a);
                // Horner evaluation of D at α
                let mut acc = vec![0u32; deg];
                for &c in d.coeffs().iter().rev() {
                    acc = f.mul(&acc, &a);
                    acc[0] = fq.add(acc[0], c);
                }
                assert_eq!(f.eta(f.encode(&acc)), jacobi(&d, &p));
            }
        }
    }
}
