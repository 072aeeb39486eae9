//! Hybrid Euler–Hadamard product: L(1/2) = P_X · Z_X.
//!
//! Zeros of L(s, χ_D) sit at ρ = 1/2 + iγ with γ = (±θ_j + 2πk)/log q for
//! every k ∈ Z. At s = 1/2 the pair ±γ contributes
//! U(iy) + U(-iy) = -2 ∫ u(x) Ci(|y| log x) dx with y = γX, so
//!
//!   log Z_X = 2 Σ_j Σ_k ∫ u(x) Ci(|θ_j + 2πk| · X log_q x) dx.
//!
//! The kernel lives on [q, q^{1+1/X}], where t = X log_q x runs over [X, X+1].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffpoly::{prime_count, sieve_irreducibles};
use crate::characters::jacobi;
use crate::lfunction::{LPoly, ZeroSet};
use crate::special::{cosine_integral, exp_integral_e1, gauss_legendre};

pub const DEFAULT_NODES: usize = 200;
pub const DEFAULT_K_MAX: usize = 200;

/// u(x) = (C/w) exp(-1/(1-τ²)) with τ the affine image of x in [-1, 1].
#[derive(Clone, Debug)]
pub struct BumpKernel {
    q: u32,
    x_param: u32,
    a: f64,
    b: f64,
    /// C/w, fixed so the base rule gives mass 1.
    scale: f64,
    base: KernelRule,
}

/// A quadrature rule pushed onto the kernel support, with u folded into the weights.
#[derive(Clone, Debug)]
pub struct KernelRule {
    pub weight: Vec<f64>,
    /// log x at each node
    pub log_x: Vec<f64>,
    /// X log_q x at each node
    pub t: Vec<f64>,
}

fn bump(tau: f64) -> f64 {
    if tau.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - tau * tau)).exp()
    }
}

impl BumpKernel {
    pub fn new(q: u32, x_param: u32) -> Result<BumpKernel> {
        Self::with_nodes(q, x_param, DEFAULT_NODES)
    }

    pub fn with_nodes(q: u32, x_param: u32, nodes: usize) -> Result<BumpKernel> {
        if x_param == 0 {
            return Err(Error::Precondition("kernel needs X ≥ 1".into()));
        }
        let qf = q as f64;
        let a = qf;
        let b = qf.powf(1.0 + 1.0 / x_param as f64);
        let mut k = BumpKernel {
            q,
            x_param,
            a,
            b,
            scale: 1.0,
            base: KernelRule {
                weight: Vec::new(),
                log_x: Vec::new(),
                t: Vec::new(),
            },
        };
        let raw = k.rule(nodes);
        let mass: f64 = raw.weight.iter().sum();
        k.scale = 1.0 / mass;
        k.base = k.rule(nodes);
        Ok(k)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn x_param(&self) -> u32 {
        self.x_param
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn tau(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    pub fn u(&self, x: f64) -> f64 {
        self.scale * bump(self.tau(x))
    }

    /// n-point Gauss–Legendre rule on the support, weights multiplied by u.
    pub fn rule(&self, n: usize) -> KernelRule {
        let (nodes, weights) = gauss_legendre(n);
        let half = 0.5 * (self.b - self.a);
        let lq = (self.q as f64).ln();
        let mut r = KernelRule {
            weight: Vec::with_capacity(n),
            log_x: Vec::with_capacity(n),
            t: Vec::with_capacity(n),
        };
        for (&s, &w) in nodes.iter().zip(&weights) {
            let x = self.a + half * (s + 1.0);
            let wt = w * half * self.scale * bump(s);
            if wt == 0.0 {
                continue;
            }
            r.weight.push(wt);
            r.log_x.push(x.ln());
            r.t.push(self.x_param as f64 * x.ln() / lq);
        }
        r
    }

    pub fn base_rule(&self) -> &KernelRule {
        &self.base
    }

    pub fn mass(&self) -> f64 {
        self.base.weight.iter().sum()
    }

    /// v(t) = ∫_t^∞ u(x) dx.
    pub fn v(&self, t: f64) -> f64 {
        if t <= self.a {
            return 1.0;
        }
        if t >= self.b {
            return 0.0;
        }
        let (nodes, weights) = gauss_legendre(DEFAULT_NODES);
        let half = 0.5 * (self.b - t);
        let s: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&s, &w)| w * self.u(t + half * (s + 1.0)))
            .sum();
        (s * half).clamp(0.0, 1.0)
    }

    /// ũ(z) = ∫ u(x) x^{z-1} dx on the base rule.
    pub fn mellin(&self, z: Complex64) -> Complex64 {
        mellin_on(&self.base, z)
    }

    /// U(z) = ∫ u(x) E_1(z log x) dx on the base rule.
    pub fn big_u(&self, z: Complex64) -> Complex64 {
        self.base
            .weight
            .iter()
            .zip(&self.base.log_x)
            .map(|(&w, &lx)| w * exp_integral_e1(z * lx))
            .sum()
    }
}

fn mellin_on(r: &KernelRule, z: Complex64) -> Complex64 {
    r.weight
        .iter()
        .zip(&r.log_x)
        .map(|(&w, &lx)| w * ((z - 1.0) * lx).exp())
        .sum()
}

const BUCKET: usize = 64;

/// Frequency-adapted rules for integrating against oscillating factors.
///
/// An image at angle ω oscillates ω radians across the t-range, so the node
/// count grows linearly with ω.
#[derive(Clone, Debug)]
pub struct ImageRules {
    kernel: BumpKernel,
    k_max: usize,
    rules: Vec<KernelRule>,
}

impl ImageRules {
    pub fn new(kernel: BumpKernel, k_max: usize) -> ImageRules {
        Self::with_base(kernel, k_max, DEFAULT_NODES)
    }

    pub fn with_base(kernel: BumpKernel, k_max: usize, base_nodes: usize) -> ImageRules {
        let omega_max = PI * (2 * k_max + 2) as f64 + 8.0;
        let nb = Self::bucket_for(omega_max) + 1;
        let rules = (0..nb).map(|b| kernel.rule(base_nodes + BUCKET * b)).collect();
        ImageRules {
            kernel,
            k_max,
            rules,
        }
    }

    fn bucket_for(omega: f64) -> usize {
        ((0.7 * omega).ceil() as usize).div_ceil(BUCKET)
    }

    pub fn kernel(&self) -> &BumpKernel {
        &self.kernel
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn rule_for(&self, omega: f64) -> &KernelRule {
        let b = Self::bucket_for(omega).min(self.rules.len() - 1);
        &self.rules[b]
    }

    /// ∫ u(x) Ci(ω X log_q x) dx for ω > 0.
    pub fn ci_integral(&self, omega: f64) -> f64 {
        let r = self.rule_for(omega);
        r.weight.iter().zip(&r.t).map(|(&w, &t)| w * cosine_integral(omega * t)).sum()
    }

    /// Σ_{|k| ≤ K} ∫ u Ci(|θ + 2πk| t) dx.
    pub fn image_sum(&self, theta: f64) -> f64 {
        let k = self.k_max as i64;
        (-k..=k)
            .map(|j| self.ci_integral((theta + 2.0 * PI * j as f64).abs()))
            .sum()
    }

    /// ũ(z) with the rule matched to the oscillation of x^{z-1}.
    pub fn mellin(&self, z: Complex64) -> Complex64 {
        // x^{z-1} = exp((z-1) log q · t / X): Im(z) log q / X radians per unit t
        let omega = z.im.abs() * (self.kernel.q as f64).ln() / self.kernel.x_param as f64;
        mellin_on(self.rule_for(omega), z)
    }
}

/// log P_X(1/2) = Σ_{n ≤ X} a_n q^{-n/2} / n with a_n = Σ_{M_n} Λχ_D.
pub fn log_p_x(l: &LPoly, x: u32) -> f64 {
    let a = l.lambda_sums(x as usize);
    let q = l.q() as f64;
    (1..=x as usize)
        .map(|n| a[n] as f64 * q.powf(-(n as f64) / 2.0) / n as f64)
        .sum()
}

pub fn p_x_value(l: &LPoly, x: u32) -> f64 {
    log_p_x(l, x).exp()
}

/// P_X(1/2) from an explicit list of primes, for cross-checking.
pub fn p_x_by_primes(l: &LPoly, x: u32) -> f64 {
    let fq = l.discriminant().field();
    let q = fq.q() as f64;
    let mut s = 0.0;
    for (d, primes) in sieve_irreducibles(fq, x as usize).iter().enumerate().skip(1) {
        for p in primes {
            let chi = jacobi(l.discriminant(), p) as f64;
            // Σ_{j ≤ X/d} χ(P)^j / (j |P|^{j/2})
            for j in 1..=(x as usize / d) {
                s += chi.powi(j as i32) * q.powf(-((d * j) as f64) / 2.0) / j as f64;
            }
        }
    }
    s.exp()
}

/// Number of primes of each degree with χ_D = +1, -1, 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeCensus {
    /// Index d; entry 0 unused.
    pub plus: Vec<i64>,
    pub minus: Vec<i64>,
    pub zero: Vec<i64>,
}

/// Census for degrees 1..=max_deg, recovered exactly from the a_n and the
/// factorisation of D.
pub fn prime_census(l: &LPoly, max_deg: usize) -> PrimeCensus {
    let a = l.lambda_sums(max_deg);
    let q = l.q();
    let mut zero = vec![0i64; max_deg + 1];
    for (p, _) in l.discriminant().factorize().factors() {
        if p.degree() <= max_deg {
            zero[p.degree()] += 1;
        }
    }
    let t: Vec<i64> = (0..=max_deg)
        .map(|d| if d == 0 { 0 } else { prime_count(q, d) as i64 - zero[d] })
        .collect();
    let mut s = vec![0i64; max_deg + 1];
    for n in 1..=max_deg {
        let mut rest = a[n];
        for d in 1..n {
            if n % d == 0 {
                rest -= d as i128 * if (n / d) % 2 == 1 { s[d] } else { t[d] } as i128;
            }
        }
        s[n] = (rest / n as i128) as i64;
    }
    PrimeCensus {
        plus: (0..=max_deg).map(|d| (t[d] + s[d]) / 2).collect(),
        minus: (0..=max_deg).map(|d| (t[d] - s[d]) / 2).collect(),
        zero,
    }
}

/// P*_{k,X}(1/2, χ_D), any real k.
pub fn p_star_value(l: &LPoly, k: f64, x: u32) -> f64 {
    let c = prime_census(l, x as usize);
    let q = l.q() as f64;
    let mut log = 0.0;
    for d in 1..=x as usize {
        let r = q.powf(-(d as f64) / 2.0);
        let (np, nm) = (c.plus[d] as f64, c.minus[d] as f64);
        if 2 * d <= x as usize {
            log += -k * (np * (-r).ln_1p() + nm * r.ln_1p());
        } else {
            let quad = 0.5 * k * k * r * r;
            log += np * (k * r + quad).ln_1p() + nm * (-k * r + quad).ln_1p();
        }
    }
    log.exp()
}

/// Local coefficients α_k(P^j), which depend only on d(P).
#[derive(Clone, Debug)]
pub struct AlphaTable {
    k: f64,
    x: u32,
    max_j: usize,
    inner: Vec<f64>,
}

impl AlphaTable {
    pub fn new(k: f64, x: u32, max_j: usize) -> AlphaTable {
        // coefficients of (1 - t)^{-k}
        let mut inner = vec![1.0; max_j + 1];
        for j in 1..=max_j {
            inner[j] = inner[j - 1] * (k + j as f64 - 1.0) / j as f64;
        }
        AlphaTable { k, x, max_j, inner }
    }

    pub fn local(&self, d: usize, j: usize) -> f64 {
        if j == 0 {
            return 1.0;
        }
        if 2 * d <= self.x as usize {
            if j <= self.max_j {
                self.inner[j]
            } else {
                AlphaTable::new(self.k, self.x, j).inner[j]
            }
        } else if d <= self.x as usize {
            match j {
                1 => self.k,
                2 => 0.5 * self.k * self.k,
                _ => 0.0,
            }
        } else {
            0.0
        }
    }

    pub fn eval(&self, f: &crate::ffpoly::Factorization) -> f64 {
        f.factors()
            .iter()
            .map(|(p, e)| self.local(p.degree(), *e as usize))
            .product()
    }
}

/// Outcome of evaluating Z_X from the zeros.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZValue {
    pub value: f64,
    pub central_zero: bool,
}

/// Z_X(1/2) from the zeros and their periodic images |k| ≤ K_max.
pub fn z_x_value(zeros: &ZeroSet, rules: &ImageRules) -> ZValue {
    if zeros.has_central_zero() {
        return ZValue {
            value: 0.0,
            central_zero: true,
        };
    }
    let log: f64 = zeros
        .angles
        .iter()
        .map(|&(theta, m)| 2.0 * m as f64 * rules.image_sum(theta))
        .sum();
    ZValue {
        value: log.exp(),
        central_zero: false,
    }
}

/// Closed form of log Z_X after summing all images:
/// Σ_j 2(log|2 sin θ_j/2| + Σ_{n ≤ X} cos(nθ_j)/n).
pub fn log_z_x_closed(zeros: &ZeroSet, x: u32) -> f64 {
    zeros
        .angles
        .iter()
        .map(|&(theta, m)| 2.0 * m as f64 * log_phi_unit(theta, x))
        .sum()
}

/// log|2 sin θ/2| + Σ_{n ≤ X} cos(nθ)/n.
pub fn log_phi_unit(theta: f64, x: u32) -> f64 {
    (2.0 * (theta / 2.0).sin()).abs().ln() + (1..=x).map(|n| (n as f64 * theta).cos() / n as f64).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub discriminant: String,
    pub x: u32,
    pub l_value: f64,
    pub p_value: f64,
    pub z_value: f64,
    pub residual: f64,
    pub k_max: usize,
    pub central_zero: bool,
}

pub fn decompose_check(l: &LPoly, rules: &ImageRules) -> Result<DecompositionReport> {
    let x = rules.kernel().x_param();
    let zeros = l.zeros()?;
    let lv = l.central_value();
    let p = p_x_value(l, x);
    let z = z_x_value(&zeros, rules);
    let central = z.central_zero || l.is_central_zero();
    Ok(DecompositionReport {
        discriminant: l.discriminant().to_string(),
        x,
        l_value: lv,
        p_value: p,
        z_value: z.value,
        residual: (lv - p * z.value).abs() / lv.abs().max(1e-30),
        k_max: rules.k_max(),
        central_zero: central,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExplicitFormulaCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// Both sides of the smoothed explicit formula for −L'/L(s).
pub fn verify_explicit_formula(l: &LPoly, s: Complex64, rules: &ImageRules) -> Result<ExplicitFormulaCheck> {
    let x = rules.kernel().x_param();
    let q = l.q() as f64;
    let lq = q.ln();
    let zeros = l.zeros()?;
    let k = rules.k_max() as i64;
    let mut rhos = Vec::new();
    for &(theta, m) in &zeros.angles {
        for j in -k..=k {
            for sign in [1.0, -1.0] {
                let gamma = (sign * theta + 2.0 * PI * j as f64) / lq;
                rhos.push((Complex64::new(0.5, gamma), m));
            }
        }
    }
    let nearest = rhos.iter().map(|(r, _)| (s - r).norm()).fold(f64::INFINITY, f64::min);
    if nearest < 1e-3 {
        return Err(Error::NearZero { distance: nearest });
    }
    let lhs = crate::lfunction::log_derivative(l, s)?;
    let a = l.lambda_sums(x as usize);
    let prime: Complex64 = (1..=x as usize)
        .map(|n| a[n] as f64 * lq * (-s * lq * n as f64).exp())
        .sum();
    let zero_sum: Complex64 = rhos
        .iter()
        .map(|&(rho, m)| {
            let w = s - rho;
            m as f64 * rules.mellin(1.0 - w * x as f64) / w
        })
        .sum();
    let rhs = prime - zero_sum;
    Ok(ExplicitFormulaCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::{Fq, MonicPoly};
    use crate::lfunction::{compute_coeffs, full_ensemble, sample_discriminants};

    #[test]
    fn kernel_basics() {
        for x in [1u32, 2, 4] {
            let k = BumpKernel::new(5, x).unwrap();
            assert!((k.mass() - 1.0).abs() < 1e-12);
            let fine = k.rule(800);
            let m: f64 = fine.weight.iter().sum();
            assert!((m - 1.0).abs() < 1e-12, "{m}");
            assert_eq!(k.v(0.0), 1.0);
            assert_eq!(k.v(k.support().1), 0.0);
            assert!((k.mellin(Complex64::new(1.0, 0.0)).re - 1.0).abs() < 1e-12);
            for d in 1..=x + 2 {
                let v = k.v(5f64.powf(d as f64 / x as f64));
                if d <= x {
                    assert_eq!(v, 1.0);
                } else if d > x {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn big_u_limits() {
        let k = BumpKernel::new(5, 2).unwrap();
        let z = Complex64::new(0.3, 0.7);
        assert!((k.big_u(z.conj()) - k.big_u(z).conj()).norm() < 1e-14);
        assert!(k.big_u(Complex64::new(10.0, 0.0)).norm() < 1e-4 * k.big_u(Complex64::new(0.1, 0.0)).norm());
        let r = |z: f64| (-k.big_u(Complex64::new(z, 0.0))).exp().re / z;
        assert!((r(1e-4) / r(1e-5) - 1.0).abs() < 0.01);
    }

    #[test]
    fn image_sum_matches_closed_form() {
        for x in [1u32, 2, 3, 4] {
            let rules = ImageRules::new(BumpKernel::new(5, x).unwrap(), DEFAULT_K_MAX);
            for theta in [0.3, 1.0, 2.0, PI] {
                let a = rules.image_sum(theta);
                let b = log_phi_unit(theta, x);
                assert!((a - b).abs() < 1e-9, "x={x} θ={theta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn p_x_agrees_with_primes() {
        let fq = Fq::new(5).unwrap();
        for d in sample_discriminants(fq, 2, 5, 3) {
            let l = compute_coeffs(&d).unwrap();
            for x in 0..=5 {
                assert!((p_x_value(&l, x) - p_x_by_primes(&l, x)).abs() < 1e-12);
            }
        }
        // X = 1, g = 1: five linear characters
        let d = MonicPoly::from_lower(fq, &[1, 1, 0]);
        let l = compute_coeffs(&d).unwrap();
        let s: f64 = (0..5).map(|a| jacobi(&d, &MonicPoly::linear(fq, a)) as f64).sum();
        assert!((p_x_value(&l, 1) - (s / 5f64.sqrt()).exp()).abs() < 1e-14);
    }

    #[test]
    fn census_matches_symbols() {
        let fq = Fq::new(5).unwrap();
        let d = sample_discriminants(fq, 2, 1, 9).remove(0);
        let l = compute_coeffs(&d).unwrap();
        let c = prime_census(&l, 5);
        for (d, ps) in sieve_irreducibles(fq, 5).iter().enumerate().skip(1) {
            let mut cnt = [0i64; 3];
            for p in ps {
                cnt[(jacobi(l.discriminant(), p) + 1) as usize] += 1;
            }
            assert_eq!((c.minus[d], c.zero[d], c.plus[d]), (cnt[0], cnt[1], cnt[2]));
        }
    }

    #[test]
    fn alpha_values() {
        let t = AlphaTable::new(-1.0, 6, 6);
        assert_eq!(t.local(2, 3), 0.0);
        assert_eq!(t.local(3, 1), -1.0);
        assert_eq!(t.local(5, 1), -1.0);
        let t2 = AlphaTable::new(2.0, 6, 6);
        assert_eq!(t2.local(2, 3), 4.0);
        assert_eq!(t2.local(4, 2), 2.0);
        assert_eq!(t2.local(7, 1), 0.0);
    }

    #[test]
    fn decomposition_genus_one() {
        let rules = ImageRules::new(BumpKernel::new(5, 2).unwrap(), 60);
        for l in full_ensemble(Fq::new(5).unwrap(), 1).unwrap().iter().take(30) {
            let r = decompose_check(l, &rules).unwrap();
            if !r.central_zero {
                assert!(r.residual < 1e-6, "{r:?}");
            }
        }
    }

    #[test]
    fn explicit_formula() {
        let fq = Fq::new(5).unwrap();
        let rules = ImageRules::new(BumpKernel::new(5, 2).unwrap(), 100);
        for d in sample_discriminants(fq, 1, 3, 5) {
            let l = compute_coeffs(&d).unwrap();
            for s in [Complex64::new(2.0, 0.3), Complex64::new(0.7, 1.1)] {
                let c = verify_explicit_formula(&l, s, &rules).unwrap();
                assert!(c.residual < 1e-5, "{c:?}");
                let cc = verify_explicit_formula(&l, s.conj(), &rules).unwrap();
                assert!((cc.lhs - c.lhs.conj()).norm() < 1e-10);
            }
        }
    }
}
