//! Arithmetic constants and leading-term predictions.
//!
//! Infinite Euler products are grouped by degree: every prime of degree d
//! contributes the same local factor, so a product over 𝒫 becomes
//! Σ_d π_q(d)·log(factor at |P| = q^d). Local factors are evaluated in
//! double-double arithmetic since π_q(d) reaches ~10^13 at d = 20, q = 5.

pub mod dd;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffpoly::{prime_count, MonicPoly};
use crate::special::EULER_GAMMA;
pub use dd::Dd;

pub const DEFAULT_D_MAX: usize = 20;

/// Truncated Euler product with an estimate of the omitted tail.
#[derive(Clone, Copy, Debug)]
pub struct EulerProductValue {
    pub value: Dd,
    pub d_max: usize,
    /// Bound on |full product − value|, from a geometric fit of the last terms.
    pub tail: f64,
}

impl EulerProductValue {
    pub fn f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// ∏_P exp(log_factor(1/|P|, d(P))) over d(P) ≤ d_max.
pub fn euler_product(q: u32, d_max: usize, log_factor: impl Fn(Dd, usize) -> Dd) -> EulerProductValue {
    let qd = Dd::new(q as f64);
    let mut terms = Vec::with_capacity(d_max);
    for d in 1..=d_max {
        let x = qd.powi(d as i32).recip();
        terms.push(Dd::from_u128(prime_count(q, d)) * log_factor(x, d));
    }
    let log: Dd = terms.iter().copied().sum();
    let value = log.exp();
    let mag = |t: &Dd| t.hi.abs();
    let tail_log = match terms.len() {
        0..=2 => f64::INFINITY,
        n => {
            let last = mag(&terms[n - 1]);
            let r = (last / mag(&terms[n - 2]).max(f64::MIN_POSITIVE))
                .max(mag(&terms[n - 2]) / mag(&terms[n - 3]).max(f64::MIN_POSITIVE));
            if last == 0.0 {
                0.0
            } else if r < 1.0 {
                last * r / (1.0 - r)
            } else {
                f64::INFINITY
            }
        }
    };
    EulerProductValue {
        value,
        d_max,
        tail: value.hi.abs() * tail_log.exp_m1(),
    }
}

fn ln1p(x: Dd) -> Dd {
    Dd::ln_1p(x)
}

/// (1 + t)^e for real e.
fn pow1p(t: Dd, e: f64) -> Dd {
    (ln1p(t) * Dd::new(e)).exp()
}

/// Σ_{j≥1} τ_k(P^{2j}) y^j and Σ_{j≥0} τ_k(P^{2j+1}) y^j, with
/// τ_k(P^n) = C(n+k−1, n) extended to real k.
///
/// The even series is returned without its constant term 1, which would
/// otherwise swamp y^j at large d(P).
fn tau_series(k: f64, y: Dd) -> (Dd, Dd) {
    let mut tau = Dd::ONE;
    let mut ypow = Dd::ONE;
    let mut even = Dd::ZERO;
    let mut odd = Dd::ZERO;
    for n in 1..400 {
        tau = tau * Dd::new(k - 1.0 + n as f64) / Dd::new(n as f64);
        let add = if n % 2 == 1 {
            let a = tau * ypow;
            odd = odd + a;
            a
        } else {
            ypow = ypow * y;
            let a = tau * ypow;
            even = even + a;
            a
        };
        if n > 4 && add.hi.abs() < 1e-34 * (even.hi.abs() + odd.hi.abs()) {
            break;
        }
    }
    (even, odd)
}

fn tri(k: f64) -> f64 {
    k * (k + 1.0) / 2.0
}

// ---------------------------------------------------------------- A_k

/// A_k from the defining product: (1 − 1/|P|)^{k(k+1)/2}(1 + (1+1/|P|)^{-1}Σ_{j≥1} τ_k(P^{2j})/|P|^j).
pub fn a_k(q: u32, k: f64, d_max: usize) -> EulerProductValue {
    euler_product(q, d_max, |x, _| {
        let (even, _) = tau_series(k, x);
        Dd::new(tri(k)) * ln1p(-x) + ln1p(even / (Dd::ONE + x))
    })
}

/// A_k from the equivalent form
/// (1−1/|P|)^{k(k+1)/2}(1+1/|P|)^{-1}(½(1−|P|^{-1/2})^{-k} + ½(1+|P|^{-1/2})^{-k} + 1/|P|).
pub fn a_k_alternate(q: u32, k: f64, d_max: usize) -> EulerProductValue {
    euler_product(q, d_max, |x, _| {
        let s = x.sqrt();
        let half = Dd::new(0.5);
        let bracket = half * pow1p(-s, -k) + half * pow1p(s, -k) + x;
        Dd::new(tri(k)) * ln1p(-x) - ln1p(x) + ln1p(bracket - Dd::ONE)
    })
}

/// A_1 with the local factor 1 − 1/(|P|(|P|+1)).
pub fn a_1_simplified(q: u32, d_max: usize) -> EulerProductValue {
    euler_product(q, d_max, |x, _| ln1p(-(x * x / (Dd::ONE + x))))
}

/// Both forms of A_k.
pub fn a_k_both(q: u32, k: f64, d_max: usize) -> Result<(EulerProductValue, EulerProductValue)> {
    if d_max < 4 {
        return Err(Error::Precondition(format!("D_max = {d_max} < 4")));
    }
    Ok((a_k(q, k, d_max), a_k_alternate(q, k, d_max)))
}

// ---------------------------------------------------------------- twists

/// The prime data of ℓ = ℓ_1ℓ_2² that the twisted constants depend on.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistShape {
    pub q: u32,
    /// degrees of P | ℓ_1
    pub odd: Vec<usize>,
    /// degrees of P ∤ ℓ_1 with P | ℓ_2
    pub even: Vec<usize>,
}

impl TwistShape {
    pub fn trivial(q: u32) -> TwistShape {
        TwistShape { q, odd: Vec::new(), even: Vec::new() }
    }

    pub fn from_ell(l: &MonicPoly) -> TwistShape {
        let mut odd = Vec::new();
        let mut even = Vec::new();
        for (p, j) in l.factorize().factors() {
            if j % 2 == 1 {
                odd.push(p.degree());
            } else {
                even.push(p.degree());
            }
        }
        TwistShape { q: l.field().q(), odd, even }
    }

    /// d(ℓ_1)
    pub fn d1(&self) -> usize {
        self.odd.iter().sum()
    }

    fn norm(&self, d: usize) -> f64 {
        (self.q as f64).powi(d as i32)
    }

    fn all(&self) -> impl Iterator<Item = usize> + '_ {
        self.odd.iter().chain(&self.even).copied()
    }
}

/// η_k(ℓ;u) from the local factors 𝒜_{k,P}(u), ℬ_{k,P}(u), 𝒞_{k,P}(u).
pub fn eta_k_series(shape: &TwistShape, k: f64, u: f64, d_max: usize) -> EulerProductValue {
    let ud = Dd::new(u);
    let mut ep = euler_product(shape.q, d_max, |x, d| {
        let y = ud.powi(2 * d as i32) * x;
        let (even, _) = tau_series(k, y);
        Dd::new(tri(k)) * ln1p(-y) + ln1p(even / (Dd::ONE + x))
    });
    let local = |d: usize, odd: bool| {
        let x = Dd::new(shape.norm(d)).recip();
        let y = ud.powi(2 * d as i32) * x;
        let (even, oddsum) = tau_series(k, y);
        let den = Dd::ONE + x + even;
        if odd { oddsum / den } else { (Dd::ONE + even) / den }
    };
    let mut finite = Dd::ONE;
    for &d in &shape.odd {
        finite = finite * local(d, true);
    }
    for &d in &shape.even {
        finite = finite * local(d, false);
    }
    ep.value = ep.value * finite;
    ep.tail *= finite.hi.abs();
    ep
}

/// τ(ℓ_1)|ℓ_1|/σ(ℓ_1) and the other closed forms of η_k(ℓ;±1), k = 1, 2, 3.
pub fn eta_k_at_1(shape: &TwistShape, k: u32, d_max: usize) -> Result<f64> {
    let a = a_k(shape.q, k as f64, d_max).f64();
    let mut v = a;
    match k {
        1 => {
            for d in shape.all() {
                let p = shape.norm(d);
                v /= 1.0 + 1.0 / p - 1.0 / (p * p);
            }
        }
        2 => {
            for &d in &shape.odd {
                let p = shape.norm(d);
                // τ(P)|P|/σ(P) = 2|P|/(1+|P|)
                v *= 2.0 * p / (1.0 + p);
            }
            for d in shape.all() {
                let x = 1.0 / shape.norm(d);
                v *= (1.0 + x) / (1.0 + 2.0 * x - 2.0 * x * x + x * x * x);
            }
        }
        3 => {
            for d in shape.all() {
                let x = 1.0 / shape.norm(d);
                v *= (1.0 + 3.0 * x) / (1.0 + 4.0 * x - 3.0 * x * x + 3.0 * x.powi(3) - x.powi(4));
            }
            for &d in &shape.odd {
                let p = shape.norm(d);
                v *= (1.0 + 3.0 * p) / (3.0 + p);
            }
        }
        _ => return Err(Error::Precondition(format!("η_k closed form needs k ∈ 1..3, got {k}"))),
    }
    Ok(v)
}

/// η_1(ℓ;u) = ∏_P(1 − u^{2d}/(|P|(1+|P|)))·∏_{P|ℓ}(1 + 1/|P| − u^{2d}/|P|²)^{-1}.
pub fn eta1_of_u(shape: &TwistShape, u: f64, d_max: usize) -> Result<EulerProductValue> {
    if u.abs() >= (shape.q as f64).sqrt() {
        return Err(Error::Precondition(format!("|u| = {} must be below q^(1/2)", u.abs())));
    }
    Ok(eta1_dd(shape, Dd::new(u), d_max))
}

fn eta1_dd(shape: &TwistShape, u: Dd, d_max: usize) -> EulerProductValue {
    let mut ep = euler_product(shape.q, d_max, |x, d| {
        ln1p(-(u.powi(2 * d as i32) * x * x / (Dd::ONE + x)))
    });
    let mut finite = Dd::ONE;
    for d in shape.all() {
        let x = Dd::new(shape.norm(d)).recip();
        finite = finite / (Dd::ONE + x - u.powi(2 * d as i32) * x * x);
    }
    ep.value = ep.value * finite;
    ep.tail *= finite.hi.abs();
    ep
}

/// ∂_uη_1/η_1 at u = 1: central differences at h = 1e-4 and h/2, Richardson-combined.
pub fn eta1_log_derivative(shape: &TwistShape, d_max: usize) -> f64 {
    let f = |u: f64| eta1_dd(shape, Dd::new(u), d_max).value;
    let central = |h: f64| (f(1.0 + h) - f(1.0 - h)) / Dd::new(2.0 * h);
    let h = 1e-4;
    let rich = (Dd::new(4.0) * central(h / 2.0) - central(h)) / Dd::new(3.0);
    (rich / f(1.0)).to_f64()
}

/// The same derivative summed term by term from the logarithm of the product.
pub fn eta1_log_derivative_series(shape: &TwistShape, d_max: usize) -> f64 {
    let q = shape.q;
    let mut s = Dd::ZERO;
    let qd = Dd::new(q as f64);
    for d in 1..=d_max {
        let x = qd.powi(d as i32).recip();
        let c = x * x / (Dd::ONE + x);
        s = s - Dd::from_u128(prime_count(q, d)) * Dd::new(2.0 * d as f64) * c / (Dd::ONE - c);
    }
    for d in shape.all() {
        let x = Dd::new(shape.norm(d)).recip();
        s = s + Dd::new(2.0 * d as f64) * x * x / (Dd::ONE + x - x * x);
    }
    s.to_f64()
}

/// ζ_q(s) = (1 − q^{1−s})^{-1}.
pub fn zeta_q(q: u32, s: f64) -> f64 {
    1.0 / (1.0 - (q as f64).powf(1.0 - s))
}

// ---------------------------------------------------------------- κ_2, κ_3

/// 𝒟_{2,P}, ℋ_{2,P}, 𝒥_{2,P} at general (u, w), with |P| = 1/x and d = d(P).
pub fn kappa2_local(u: f64, w: f64, x: f64, d: usize) -> (f64, f64, f64) {
    let di = d as i32;
    let ud = u.powi(di);
    let wd = w.powi(di);
    let uw = ud * wd;
    let uw2 = ud * wd * wd;
    let uw4 = ud * wd.powi(4);
    let big = 1.0 + wd * (2.0 - 2.0 * ud + uw) * x - (1.0 / ud + 3.0 * uw2) * x * x
        + wd * wd * (2.0 + uw * uw) * x.powi(3)
        - uw4 * x.powi(4);
    let dd = (1.0 - wd * x).powi(2) / (1.0 - uw2 * x) * big;
    // the bracket (2 − w^d + (uw)^d) closes before the division by |P|
    let h = (1.0 - ud + 2.0 * uw - uw * (2.0 - wd + uw) * x) / big;
    let j = (1.0 - (1.0 - 2.0 * wd + 2.0 * uw - uw2) * x - uw2 * x * x) / big;
    (dd, h, j)
}

/// The w = 1 specialisations of the κ_2 local factors.
pub fn kappa2_local_w1(u: f64, x: f64, d: usize) -> (f64, f64, f64) {
    let ud = u.powi(d as i32);
    let short = 1.0 + 2.0 * x - (1.0 / ud + ud) * x * x + x.powi(3);
    ((1.0 - x).powi(2) * short, (1.0 + ud) / short, (1.0 + x) / short)
}

/// κ_2(ℓ;u,1) for q^{-1} < |u| < q.
pub fn kappa2_at_u1(shape: &TwistShape, u: f64, d_max: usize) -> Result<EulerProductValue> {
    let q = shape.q as f64;
    if !(u.abs() > 1.0 / q && u.abs() < q) {
        return Err(Error::Precondition(format!("u = {u} outside q^-1 < |u| < q")));
    }
    let ud = Dd::new(u);
    let mut ep = euler_product(shape.q, d_max, |x, d| {
        let p = ud.powi(d as i32);
        let short = Dd::ONE + Dd::new(2.0) * x - (p.recip() + p) * x * x + x * x * x;
        Dd::new(2.0) * ln1p(-x) + ln1p(short - Dd::ONE)
    });
    let mut finite = 1.0;
    for &d in &shape.odd {
        finite *= kappa2_local_w1(u, 1.0 / shape.norm(d), d).1;
    }
    for &d in &shape.even {
        finite *= kappa2_local_w1(u, 1.0 / shape.norm(d), d).2;
    }
    ep.value = ep.value * Dd::new(finite);
    ep.tail *= finite.abs();
    Ok(ep)
}

/// 𝒟_{3,P}, ℋ_{3,P}, 𝒥_{3,P} at general (u, w).
///
/// The middle factor of 𝒟_3 is read as (1 − (uw)^d/|P|)^{-3}.
pub fn kappa3_local(u: f64, w: f64, x: f64, d: usize) -> (f64, f64, f64) {
    let di = d as i32;
    let ud = u.powi(di);
    let wd = w.powi(di);
    let uw = ud * wd;
    let uw2 = ud * wd * wd;
    let uw4 = ud * wd.powi(4);
    let uw3sq = (ud * wd.powi(3)).powi(2);
    let big = 1.0 + 3.0 * wd * (1.0 - ud + uw) * x - (1.0 / ud + uw2 * (6.0 - wd + uw)) * x * x
        + 3.0 * wd * wd * (1.0 + uw * uw) * x.powi(3)
        - uw4 * (3.0 + uw * uw) * x.powi(4)
        + uw3sq * x.powi(5);
    let dd = (1.0 - wd * x).powi(3) * (1.0 - uw * x).powi(-3) * (1.0 - uw2 * x).powi(3) * big;
    let u2w3 = ud * ud * wd.powi(3);
    let h = (1.0 - ud + 3.0 * uw - uw * (3.0 - 3.0 * wd + 3.0 * uw - uw2) * x - u2w3 * x * x) / big;
    let j = (1.0 - (1.0 - 3.0 * wd + 3.0 * uw - 3.0 * uw2) * x - uw2 * (3.0 - wd + uw) * x * x) / big;
    (dd, h, j)
}

/// κ_3(ℓ;1,1).
pub fn kappa3_at_11(shape: &TwistShape, d_max: usize) -> EulerProductValue {
    let mut ep = euler_product(shape.q, d_max, |x, _| {
        // 𝒟_{3,P}(1,1) = (1−x)^3(1 + 3x − 7x² + 6x³ − 4x⁴ + x⁵)
        let big = Dd::ONE + Dd::new(3.0) * x - Dd::new(7.0) * x.powi(2) + Dd::new(6.0) * x.powi(3)
            - Dd::new(4.0) * x.powi(4)
            + x.powi(5);
        Dd::new(3.0) * ln1p(-x) + ln1p(big - Dd::ONE)
    });
    let mut finite = 1.0;
    for &d in &shape.odd {
        finite *= kappa3_local(1.0, 1.0, 1.0 / shape.norm(d), d).1;
    }
    for &d in &shape.even {
        finite *= kappa3_local(1.0, 1.0, 1.0 / shape.norm(d), d).2;
    }
    ep.value = ep.value * Dd::new(finite);
    ep.tail *= finite.abs();
    ep
}

/// Relative residual of κ_3(ℓ;1,1)·ζ_q(2) = η_3(ℓ;1).
pub fn kappa3_identity_check(shape: &TwistShape, d_max: usize) -> Result<f64> {
    let lhs = kappa3_at_11(shape, d_max).f64() * zeta_q(shape.q, 2.0);
    let rhs = eta_k_at_1(shape, 3, d_max)?;
    Ok(((lhs - rhs) / rhs).abs())
}

/// Relative residual of κ_2(ℓ;1,1)·ζ_q(2) = η_2(ℓ;1).
pub fn kappa2_identity_check(shape: &TwistShape, d_max: usize) -> Result<f64> {
    let lhs = kappa2_at_u1(shape, 1.0, d_max)?.f64() * zeta_q(shape.q, 2.0);
    let rhs = eta_k_at_1(shape, 2, d_max)?;
    Ok(((lhs - rhs) / rhs).abs())
}

/// Relative residual of κ_2(ℓ;u,1) = u^{d(ℓ_1)}κ_2(ℓ;1/u,1).
pub fn kappa2_symmetry_check(shape: &TwistShape, u: f64, d_max: usize) -> Result<f64> {
    let a = kappa2_at_u1(shape, u, d_max)?.f64();
    let b = u.powi(shape.d1() as i32) * kappa2_at_u1(shape, 1.0 / u, d_max)?.f64();
    Ok(((a - b) / a).abs())
}

/// Everything attached to one twist ℓ.
#[derive(Clone, Debug, Serialize)]
pub struct TwistConstants {
    pub ell: String,
    pub ell1: String,
    pub ell2: String,
    pub eta: [f64; 3],
    pub eta1_log_derivative: f64,
    pub kappa2_identity_residual: f64,
    pub kappa3_identity_residual: f64,
}

impl TwistConstants {
    pub fn compute(l: &MonicPoly, d_max: usize) -> Result<TwistConstants> {
        let shape = TwistShape::from_ell(l);
        let (l1, l2) = crate::ffpoly::split_squarefree_part(l);
        Ok(TwistConstants {
            ell: l.to_string(),
            ell1: l1.to_string(),
            ell2: l2.to_string(),
            eta: [
                eta_k_at_1(&shape, 1, d_max)?,
                eta_k_at_1(&shape, 2, d_max)?,
                eta_k_at_1(&shape, 3, d_max)?,
            ],
            eta1_log_derivative: eta1_log_derivative(&shape, d_max),
            kappa2_identity_residual: kappa2_identity_check(&shape, d_max)?,
            kappa3_identity_residual: kappa3_identity_check(&shape, d_max)?,
        })
    }
}

// ---------------------------------------------------------------- local tables

/// Series and closed-form values of 𝒜_k(P), 𝒜_k(P)ℬ_k(P), 𝒜_k(P)𝒞_k(P).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalFactorRow {
    pub k: u32,
    pub norm: f64,
    pub a_series: f64,
    pub a_closed: f64,
    pub ab_series: f64,
    pub ab_closed: f64,
    pub ac_series: f64,
    pub ac_closed: f64,
}

impl LocalFactorRow {
    pub fn max_residual(&self) -> f64 {
        [
            (self.a_series, self.a_closed),
            (self.ab_series, self.ab_closed),
            (self.ac_series, self.ac_closed),
        ]
        .iter()
        .map(|(s, c)| ((s - c) / c).abs())
        .fold(0.0, f64::max)
    }
}

/// 𝒜_k(P) = 1 + 1/|P| + Σ_{j≥1} τ_k(P^{2j})/|P|^j, with ℬ_k, 𝒞_k the odd and
/// even partial series divided by it.
pub fn local_factor_row(k: u32, norm: f64) -> Result<LocalFactorRow> {
    let x = 1.0 / norm;
    let (even, odd) = tau_series(k as f64, Dd::new(x));
    let a_series = (Dd::ONE + Dd::new(x) + even).to_f64();
    let inv = 1.0 / (1.0 - x);
    let (a_closed, ab_closed, ac_closed) = match k {
        1 => (inv * (1.0 + x - x * x), inv, inv),
        2 => (
            inv.powi(2) * (1.0 + 2.0 * x - 2.0 * x * x + x.powi(3)),
            2.0 * inv.powi(2),
            inv.powi(2) * (1.0 + x),
        ),
        3 => (
            inv.powi(3) * (1.0 + 4.0 * x - 3.0 * x * x + 3.0 * x.powi(3) - x.powi(4)),
            inv.powi(3) * (3.0 + x),
            inv.powi(3) * (1.0 + 3.0 * x),
        ),
        _ => return Err(Error::Precondition(format!("local tables exist for k ∈ 1..3, got {k}"))),
    };
    Ok(LocalFactorRow {
        k,
        norm,
        a_series,
        a_closed,
        ab_series: odd.to_f64(),
        ab_closed,
        ac_series: (Dd::ONE + even).to_f64(),
        ac_closed,
    })
}

pub fn local_factor_table(k: u32, norms: &[f64]) -> Result<Vec<LocalFactorRow>> {
    norms.iter().map(|&n| local_factor_row(k, n)).collect()
}

// ---------------------------------------------------------------- Mertens, RMT

/// ∏_{d(P)≤X}(1 − 1/|P|)^{-1}.
pub fn mertens_product(q: u32, x: usize) -> f64 {
    let qd = Dd::new(q as f64);
    let log: Dd = (1..=x)
        .map(|d| -Dd::from_u128(prime_count(q, d)) * ln1p(-qd.powi(d as i32).recip()))
        .sum();
    log.exp().to_f64()
}

/// Barnes G at a positive integer: G(1) = G(2) = 1, G(n+1) = (n−1)!·G(n).
pub fn barnes_g(n: u32) -> u128 {
    assert!(n >= 1);
    let mut g: u128 = 1;
    let mut fact: u128 = 1;
    for m in 2..n {
        // here fact = (m−1)!
        fact *= (m - 1) as u128;
        g *= fact;
    }
    g
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

/// G(k+1)√Γ(k+1)/√(G(2k+1)Γ(2k+1)), via the exact rational square.
pub fn rmt_coefficient(k: u32) -> f64 {
    let num = barnes_g(k + 1).pow(2) * factorial(k);
    let den = barnes_g(2 * k + 1) * factorial(2 * k);
    let g = num_integer::Integer::gcd(&num, &den);
    ((num / g) as f64 / (den / g) as f64).sqrt()
}

/// Conjectured I_k(g) leading term 2^{-k/2}A_k·(G-ratio)·(2g)^{k(k+1)/2}.
pub fn conjectured_ik(q: u32, g: usize, k: u32) -> f64 {
    let kf = k as f64;
    2f64.powf(-kf / 2.0) * a_k(q, kf, DEFAULT_D_MAX).f64() * rmt_coefficient(k) * (2.0 * g as f64).powf(tri(kf))
}

/// Leading term of the twisted k-th moment ⟨L(½,χ_D)^k χ_D(ℓ)⟩ for k = 1, 2, 3.
pub fn leading_ik(shape: &TwistShape, g: usize, k: u32, d_max: usize) -> Result<f64> {
    let eta = eta_k_at_1(shape, k, d_max)?;
    let d = shape.d1() as f64;
    let g = g as f64;
    let root = (shape.q as f64).powf(d / 2.0);
    Ok(match k {
        1 => eta / root * (g - d + 1.0 - eta1_log_derivative(shape, d_max)),
        2 => eta / (24.0 * root) * (8.0 * g.powi(3) - 12.0 * g * g * d + d.powi(3)),
        3 => {
            let s = g + d;
            let poly = (3.0 * g - d).powi(6) - 73.0 * s.powi(6) + 396.0 * g * s.powi(5) - 540.0 * g * g * s.powi(4);
            eta / (32.0 * 720.0 * root) * poly
        }
        _ => unreachable!("eta_k_at_1 rejects k outside 1..3"),
    })
}

/// ⟨P_X^k⟩ ≈ 2^{-k/2}A_k(e^γX)^{k(k+1)/2}.
pub fn predicted_p_moment(q: u32, k: f64, x: f64) -> f64 {
    2f64.powf(-k / 2.0) * a_k(q, k, DEFAULT_D_MAX).f64() * (EULER_GAMMA.exp() * x).powf(tri(k))
}

/// ⟨L^k P_X^{-k}⟩ ≈ (G-ratio)(2g/(e^γX))^{k(k+1)/2}.
pub fn predicted_lp_inverse_moment(k: u32, g: usize, x: f64) -> f64 {
    rmt_coefficient(k) * (2.0 * g as f64 / (EULER_GAMMA.exp() * x)).powf(tri(k as f64))
}

/// Finite-X main term J_{k,1} of ⟨L^k P*_{-k,X}⟩, before Mertens is applied.
pub fn j_k1(q: u32, k: u32, g: usize, x: usize) -> Result<f64> {
    let kf = k as f64;
    let ck = match k {
        1 | 2 => 1.0,
        3 => 512.0 / 729.0,
        _ => return Err(Error::Precondition(format!("J_k,1 needs k ∈ 1..3, got {k}"))),
    };
    let t = tri(kf);
    let fact_t: f64 = (1..=t as u32).map(f64::from).product();
    let mut log = 0.0;
    for d in 1..=x {
        let norm = (q as f64).powi(d as i32);
        let inv = 1.0 / norm;
        let row = local_factor_row(k, norm)?;
        let (a2, a3) = if 2 * d <= x {
            (kf * (kf - 1.0) / 2.0, -kf * (kf - 1.0) * (kf - 2.0) / 6.0)
        } else {
            (kf * kf / 2.0, 0.0)
        };
        let local = row.a_closed - row.ab_closed * kf * inv + row.ac_closed * a2 * inv + row.ab_closed * a3 * inv * inv;
        let pre = t * (1.0 - inv).ln() - (1.0 + inv).ln();
        log += prime_count(q, d) as f64 * (pre + local.ln());
    }
    Ok(2.0 * ck / fact_t * (kf * g as f64 / 2.0).powf(t) * log.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::Fq;

    const Q: u32 = 5;

    #[test]
    fn a_k_dual_forms_agree() {
        for k in 1..=3 {
            let (a, b) = a_k_both(Q, k as f64, 20).unwrap();
            assert!((a.f64() - b.f64()).abs() < 1e-10, "k={k}: {} {}", a.f64(), b.f64());
            assert!(a.tail < 1e-10);
        }
        let s = a_1_simplified(Q, 20);
        assert!((s.f64() - a_k(Q, 1.0, 20).f64()).abs() < 1e-14);
        // A_{-1} has trivial local factors
        assert!((a_k_alternate(Q, -1.0, 20).f64() - 1.0).abs() < 1e-14);
        assert!(a_k_both(Q, 1.0, 3).is_err());
    }

    #[test]
    fn tails_cover_extension() {
        for k in 1..=3 {
            let a = a_k(Q, k as f64, 10);
            let b = a_k(Q, k as f64, 12);
            assert!((a.f64() - b.f64()).abs() <= a.tail, "k={k}");
        }
    }

    #[test]
    fn eta_closed_forms_match_series() {
        let shapes = [
            TwistShape::trivial(Q),
            TwistShape { q: Q, odd: vec![1], even: vec![] },
            TwistShape { q: Q, odd: vec![1, 2], even: vec![1] },
            TwistShape { q: Q, odd: vec![], even: vec![3] },
        ];
        for s in &shapes {
            for k in 1..=3 {
                let closed = eta_k_at_1(s, k, 20).unwrap();
                let series = eta_k_series(s, k as f64, 1.0, 20).f64();
                let minus = eta_k_series(s, k as f64, -1.0, 20).f64();
                assert!(((closed - series) / closed).abs() < 1e-12, "{s:?} k={k}");
                assert!((series - minus).abs() < 1e-14);
            }
            let disp = eta1_of_u(s, 1.3, 40).unwrap().f64();
            let ser = eta_k_series(s, 1.0, 1.3, 40).f64();
            assert!(((disp - ser) / disp).abs() < 1e-12, "{disp} {ser}");
        }
        assert_eq!(eta_k_at_1(&TwistShape::trivial(Q), 1, 20).unwrap(), a_k(Q, 1.0, 20).f64());
    }

    #[test]
    fn eta1_special_values() {
        let fq = Fq::new(Q).unwrap();
        let s = TwistShape::from_ell(&MonicPoly::x(fq));
        let a1 = a_k(Q, 1.0, 20).f64();
        let want = a1 / (1.0 + 0.2 - 0.04);
        assert!((eta_k_at_1(&s, 1, 20).unwrap() - want).abs() < 1e-14);
        // u = 0 leaves only the finite part
        assert!((eta1_of_u(&s, 0.0, 20).unwrap().f64() - 1.0 / 1.2).abs() < 1e-15);
        let e = eta1_of_u(&s, 0.7, 20).unwrap().f64();
        assert!((e - eta1_of_u(&s, -0.7, 20).unwrap().f64()).abs() < 1e-12);
        assert!(eta1_of_u(&s, 2.3, 20).is_err());
    }

    #[test]
    fn eta1_derivative_matches_series() {
        for s in [TwistShape::trivial(Q), TwistShape { q: Q, odd: vec![1], even: vec![2] }] {
            let fd = eta1_log_derivative(&s, 20);
            let series = eta1_log_derivative_series(&s, 20);
            assert!((fd - series).abs() < 1e-10, "{fd} {series}");
        }
    }

    #[test]
    fn kappa_identities() {
        let fq = Fq::new(Q).unwrap();
        let x2 = MonicPoly::x(fq).pow(2);
        let s = TwistShape::from_ell(&x2);
        assert!(kappa2_symmetry_check(&s, 2.0, 20).unwrap() < 1e-12);
        let odd = TwistShape { q: Q, odd: vec![1, 2], even: vec![1] };
        assert!(kappa2_symmetry_check(&odd, 1.7, 20).unwrap() < 1e-10);
        for sh in [TwistShape::trivial(Q), s.clone(), odd.clone()] {
            assert!(kappa2_identity_check(&sh, 20).unwrap() < 1e-10);
            assert!(kappa3_identity_check(&sh, 20).unwrap() < 1e-10);
        }
        let a2 = a_k(Q, 2.0, 20).f64();
        let k11 = kappa2_at_u1(&TwistShape::trivial(Q), 1.0, 20).unwrap().f64();
        assert!((k11 * zeta_q(Q, 2.0) - a2).abs() < 1e-12);
        assert!(kappa2_at_u1(&s, 0.1, 20).is_err());
        assert!(kappa2_at_u1(&s, 6.0, 20).is_err());
    }

    #[test]
    fn kappa_local_short_forms() {
        for d in 1..4 {
            let x = 1.0 / (Q as f64).powi(d as i32);
            for u in [0.5, 1.0, 2.0] {
                let full = kappa2_local(u, 1.0, x, d);
                let short = kappa2_local_w1(u, x, d);
                assert!((full.0 - short.0).abs() < 1e-14);
                assert!((full.1 - short.1).abs() < 1e-13);
                assert!((full.2 - short.2).abs() < 1e-14);
                assert!((short.0 - kappa2_local_w1(1.0 / u, x, d).0).abs() < 1e-15);
            }
            let p = 1.0 / x;
            let (_, h, j) = kappa3_local(1.0, 1.0, x, d);
            let den = 1.0 + 4.0 * x - 3.0 * x * x + 3.0 * x.powi(3) - x.powi(4);
            assert!((h - (3.0 + x) / den).abs() < 1e-14, "{p}");
            assert!((j - (1.0 + 3.0 * x) / den).abs() < 1e-14);
        }
    }

    #[test]
    fn local_tables() {
        for k in 1..=3 {
            for row in local_factor_table(k, &[5.0, 25.0, 125.0]).unwrap() {
                assert!(row.max_residual() < 1e-12, "{row:?}");
            }
        }
    }

    #[test]
    fn mertens_values() {
        assert!((mertens_product(5, 1) - 1.25f64.powi(5)).abs() < 1e-12);
        let mut prev = 0.0;
        for x in 1..=10 {
            let m = mertens_product(5, x);
            assert!(m > prev);
            prev = m;
            if x >= 4 {
                assert!((m - EULER_GAMMA.exp() * x as f64).abs() < 1.0);
            }
        }
    }

    #[test]
    fn rmt_coefficients() {
        assert_eq!(barnes_g(1), 1);
        assert_eq!(barnes_g(2), 1);
        assert_eq!(barnes_g(4), 2);
        assert_eq!(barnes_g(7), 34560);
        let r2 = std::f64::consts::SQRT_2;
        assert!((rmt_coefficient(1) - 1.0 / r2).abs() < 1e-15);
        assert!((rmt_coefficient(2) - 1.0 / 12.0).abs() < 1e-15);
        assert!((rmt_coefficient(3) - 1.0 / (720.0 * r2)).abs() < 1e-15);
    }

    #[test]
    fn leading_terms_consistent() {
        let t = TwistShape::trivial(Q);
        for g in 1..6 {
            let c2 = conjectured_ik(Q, g, 2);
            let l2 = leading_ik(&t, g, 2, 20).unwrap();
            assert!(((c2 - l2) / c2).abs() < 1e-12);
            let c3 = conjectured_ik(Q, g, 3);
            let l3 = leading_ik(&t, g, 3, 20).unwrap();
            // the displayed k = 3 polynomial also has lower-order terms
            let gf = g as f64;
            let top = a_k(Q, 3.0, 20).f64() / (32.0 * 720.0) * 512.0 * gf.powi(6);
            assert!(((c3 - top) / c3).abs() < 1e-12);
            assert!(l3.is_finite());
            let l1 = leading_ik(&t, g, 1, 20).unwrap();
            let a1 = a_k(Q, 1.0, 20).f64();
            let want = a1 * (gf + 1.0 - eta1_log_derivative(&t, 20));
            assert!((l1 - want).abs() < 1e-12);
        }
        assert!(leading_ik(&t, 2, 4, 20).is_err());
    }

    #[test]
    fn j_k1_approaches_mertens_limit() {
        // J_{1,1} → (1/√2)·g/(e^γX/2) as X grows
        let g = 10;
        let x = 10;
        let j = j_k1(Q, 1, g, x).unwrap();
        let lim = predicted_lp_inverse_moment(1, g, x as f64);
        assert!((j / lim - 1.0).abs() < 0.1, "{j} {lim}");
    }
}
