//! Haar-random USp(2N) eigenangles and the symplectic model for ⟨Z_X^k⟩.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::rmt_coefficient;
use crate::error::{Error, Result};
use crate::eulerhadamard::{log_phi_unit, ImageRules};
use crate::moments::pairwise_sum;
use crate::special::{gauss_legendre, EULER_GAMMA};

type C64 = Complex<f64>;

/// Below this angle φ is taken from the factored form.
pub const FACTORED_SWITCH: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenangleSample {
    pub n: usize,
    /// θ_1 ≤ … ≤ θ_N in [0, π]; the spectrum is {e^{±iθ_n}}.
    pub angles: Vec<f64>,
    pub stream: u64,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<C64> {
    DVector::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// T(x, y) = (−ȳ, x̄): antiunitary with T² = −1, commuting with USp(2N).
fn quaternionic_partner(v: &DVector<C64>) -> DVector<C64> {
    let n = v.len() / 2;
    DVector::from_fn(2 * n, |i, _| if i < n { -v[i + n].conj() } else { v[i - n].conj() })
}

/// Haar-random element of USp(2N) as [[A, −B̄], [B, Ā]].
///
/// Gaussian vectors are orthonormalised against the span built so far,
/// which is closed under T, and each new vector v brings its partner Tv.
pub fn haar_usp_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let dim = 2 * n;
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(dim);
    let mut firsts = Vec::with_capacity(n);
    while firsts.len() < n {
        let mut v = gaussian_vector(rng, dim);
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm < 1e-8 {
            continue;
        }
        v /= C64::new(norm, 0.0);
        let tv = quaternionic_partner(&v);
        cols.push(v.clone());
        cols.push(tv);
        firsts.push(v);
    }
    let partners: Vec<DVector<C64>> = firsts.iter().map(quaternionic_partner).collect();
    let ordered: Vec<DVector<C64>> = firsts.into_iter().chain(partners).collect();
    DMatrix::from_columns(&ordered)
}

/// Eigenangles in [0, π] of a USp(2N) matrix, one per conjugate pair.
pub fn eigenangles(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let eig = m
        .clone()
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::RootFinder(m.nrows()))?;
    let mut args: Vec<f64> = eig.iter().map(|z| z.arg().abs()).collect();
    args.sort_by(|a, b| a.total_cmp(b));
    Ok(args.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// One Haar sample, reproducible from (seed, stream).
pub fn haar_usp_sample(n: usize, seed: u64, stream: u64) -> Result<EigenangleSample> {
    if n == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    let mut rng = rng_for(seed, stream);
    let m = haar_usp_matrix(n, &mut rng);
    Ok(EigenangleSample {
        n,
        angles: eigenangles(&m)?,
        stream,
    })
}

/// Accept–reject draw from the Weyl density
/// ∝ ∏_{i<j}(cos θ_i − cos θ_j)² ∏ sin²θ_i, for N ≤ 2.
pub fn weyl_sample(n: usize, seed: u64, stream: u64) -> Result<EigenangleSample> {
    if !(1..=2).contains(&n) {
        return Err(Error::Precondition(format!("accept-reject sampler covers N ≤ 2, got {n}")));
    }
    let mut rng = rng_for(seed, stream);
    // the density is at most 1 (N = 1) or 4 (N = 2)
    let bound = if n == 1 { 1.0 } else { 4.0 };
    loop {
        let th: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * PI).collect();
        let w = weyl_density(&th) / bound;
        if rng.gen::<f64>() < w {
            let mut angles = th;
            angles.sort_by(|a, b| a.total_cmp(b));
            return Ok(EigenangleSample { n, angles, stream });
        }
    }
}

/// Unnormalised Weyl density on [0, π]^N.
pub fn weyl_density(th: &[f64]) -> f64 {
    let mut w: f64 = th.iter().map(|t| t.sin().powi(2)).product();
    for i in 0..th.len() {
        for j in i + 1..th.len() {
            w *= (th[i].cos() - th[j].cos()).powi(2);
        }
    }
    w
}

/// φ(θ) = exp(2k ∫u Σ_j Ci(|θ+2πj| X log x) dx), images |j| ≤ K_max.
pub fn phi_images(theta: f64, k: f64, rules: &ImageRules) -> f64 {
    (2.0 * k * rules.image_sum(theta)).exp()
}

/// The factored form |2 sin θ/2|^{2k}·exp(2k Σ_{n≤X} cos(nθ)/n), all images summed.
pub fn phi_factored(theta: f64, k: f64, x: u32) -> f64 {
    (2.0 * k * log_phi_unit(theta, x)).exp()
}

/// φ(θ) with the image sum, switching to the factored form near θ = 0.
pub fn phi_theta(theta: f64, k: f64, rules: &ImageRules) -> Result<f64> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::Precondition(format!("θ = {theta} outside (0, π]")));
    }
    Ok(if theta < FACTORED_SWITCH {
        phi_factored(theta, k, rules.kernel().x_param())
    } else {
        phi_images(theta, k, rules)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub n: usize,
    pub k: f64,
    pub x: u32,
    pub samples: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub prediction: f64,
    pub ratio: f64,
}

/// E[∏_n φ(θ_n)] over Haar USp(2N), with the factored φ.
pub fn mc_average(n: usize, k: f64, x: u32, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 100 {
        return Err(Error::Precondition(format!("need at least 100 samples, got {samples}")));
    }
    let vals: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = haar_usp_sample(n, seed, i)?;
            Ok(if k == 0.0 {
                1.0
            } else {
                s.angles.iter().map(|&t| phi_factored(t, k, x)).product()
            })
        })
        .collect::<Result<_>>()?;
    let m = samples as f64;
    let mean = pairwise_sum(&vals) / m;
    let sq: Vec<f64> = vals.iter().map(|v| (v - mean).powi(2)).collect();
    let stderr = (pairwise_sum(&sq) / (m - 1.0)).sqrt() / m.sqrt();
    let prediction = if k.fract() == 0.0 && k >= 1.0 {
        rmt_coefficient(k as u32) * (2.0 * n as f64 / (EULER_GAMMA.exp() * x as f64)).powf(k * (k + 1.0) / 2.0)
    } else {
        f64::NAN
    };
    Ok(McEstimate {
        n,
        k,
        x,
        samples,
        estimate: mean,
        stderr,
        prediction,
        ratio: mean / prediction,
    })
}

/// ∫_{[0,π]^N} f·Weyl density / ∫ Weyl density by tensor Gauss–Legendre, N ≤ 2.
pub fn weyl_expectation(n: usize, nodes: usize, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let (xs, ws) = gauss_legendre(nodes);
    let th: Vec<f64> = xs.iter().map(|x| 0.5 * PI * (x + 1.0)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    match n {
        1 => {
            for (t, w) in th.iter().zip(&ws) {
                let d = w * weyl_density(&[*t]);
                num += d * f(&[*t]);
                den += d;
            }
        }
        2 => {
            for (a, wa) in th.iter().zip(&ws) {
                for (b, wb) in th.iter().zip(&ws) {
                    let p = [*a, *b];
                    let d = wa * wb * weyl_density(&p);
                    num += d * f(&p);
                    den += d;
                }
            }
        }
        _ => return Err(Error::Precondition(format!("quadrature oracle covers N ≤ 2, got {n}"))),
    }
    Ok(num / den)
}

/// The quadrature counterpart of [`mc_average`] for N ≤ 2.
pub fn phi_quadrature(n: usize, k: f64, x: u32) -> Result<f64> {
    weyl_expectation(n, 200, |th| th.iter().map(|&t| phi_factored(t, k, x)).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eulerhadamard::BumpKernel;

    #[test]
    fn matrices_are_symplectic_unitary() {
        let mut rng = rng_for(3, 0);
        let n = 3;
        let m = haar_usp_matrix(n, &mut rng);
        let eye = DMatrix::<C64>::identity(2 * n, 2 * n);
        assert!((m.adjoint() * &m - &eye).norm() < 1e-12);
        let mut j = DMatrix::<C64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, i + n)] = C64::new(1.0, 0.0);
            j[(i + n, i)] = C64::new(-1.0, 0.0);
        }
        assert!((m.transpose() * &j * &m - &j).norm() < 1e-12);
        let angles = eigenangles(&m).unwrap();
        assert_eq!(angles.len(), n);
        assert!(angles.windows(2).all(|w| w[0] < w[1]));
        let tr: C64 = m.trace();
        let s: f64 = angles.iter().map(|t| 2.0 * t.cos()).sum();
        assert!((tr.re - s).abs() < 1e-10 && tr.im.abs() < 1e-10);
    }

    #[test]
    fn n1_marginal_ks() {
        let mut th: Vec<f64> = (0..100_000u64)
            .into_par_iter()
            .map(|i| haar_usp_sample(1, 11, i).unwrap().angles[0])
            .collect();
        th.sort_by(|a, b| a.total_cmp(b));
        let m = th.len() as f64;
        let cdf = |t: f64| (t - t.sin() * t.cos()) / PI;
        let ks = th
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let f = cdf(t);
                (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS = {ks}");
    }

    #[test]
    fn n2_matches_weyl_oracle() {
        let want = weyl_expectation(2, 60, |t| t[0].cos() + t[1].cos()).unwrap();
        assert!(want.abs() < 1e-12);
        let want_sq = weyl_expectation(2, 60, |t| (t[0].cos() + t[1].cos()).powi(2)).unwrap();
        let n = 20_000u64;
        for sampler in [haar_usp_sample, weyl_sample] {
            let v: Vec<f64> = (0..n)
                .map(|i| {
                    let s = sampler(2, 5, i).unwrap();
                    assert!(s.angles[0] != s.angles[1]);
                    (s.angles[0].cos() + s.angles[1].cos()).powi(2)
                })
                .collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            assert!((mean - want_sq).abs() < 4.0 * sd / (n as f64).sqrt(), "{mean} {want_sq}");
        }
    }

    #[test]
    fn phi_forms_agree() {
        let rules = ImageRules::new(BumpKernel::new(5, 2).unwrap(), 200);
        for t in [0.5, 1.0, 2.0, 3.0, PI] {
            let a = phi_images(t, 1.0, &rules);
            let b = phi_factored(t, 1.0, 2);
            assert!((a - b).abs() < 1e-8, "{t}: {a} {b}");
            assert!(a > 0.0);
        }
        assert!(phi_theta(0.0, 1.0, &rules).is_err());
        let near = phi_theta(5e-4, 1.0, &rules).unwrap();
        assert_eq!(near, phi_factored(5e-4, 1.0, 2));
        let fewer = ImageRules::new(BumpKernel::new(5, 2).unwrap(), 100);
        assert!((phi_images(0.5, 1.0, &fewer) - phi_images(0.5, 1.0, &rules)).abs() < 1e-8);
    }

    #[test]
    fn mc_matches_quadrature_n1() {
        let est = mc_average(1, 1.0, 2, 20_000, 7).unwrap();
        let quad = phi_quadrature(1, 1.0, 2).unwrap();
        assert!((est.estimate - quad).abs() < 3.0 * est.stderr, "{est:?} {quad}");
        let zero = mc_average(1, 0.0, 2, 100, 1).unwrap();
        assert_eq!(zero.estimate, 1.0);
        assert_eq!(zero.stderr, 0.0);
        assert!(mc_average(1, 1.0, 2, 50, 1).is_err());
    }
}
