//! Ensemble averages over H_{2g+1}: central values, twists, P_X, Z_X.
//!
//! Per-discriminant values are produced in ensemble order (in parallel) and
//! reduced by a fixed pairwise tree, so full-mode results do not depend on
//! the number of worker threads.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::characters::jacobi;
use crate::constants::{self, TwistShape, DEFAULT_D_MAX};
use crate::error::{Error, Result};
use crate::eulerhadamard::log_p_x;
use crate::ffpoly::{Fq, MonicPoly};
use crate::lfunction::{self, cache, LPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Full,
    Sample { count: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub q: u32,
    pub g: usize,
    pub mode: Mode,
}

/// The L-polynomials of an ensemble, in canonical (full) or sampling order.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub spec: EnsembleSpec,
    pub members: Vec<LPoly>,
}

impl Ensemble {
    pub fn build(spec: EnsembleSpec) -> Result<Ensemble> {
        Ok(Ensemble::build_with_cache(spec, None)?.0)
    }

    /// Full mode reads and writes the coefficient cache when a directory is
    /// given. The second value is a warning when an existing cache file was
    /// rejected and rebuilt.
    pub fn build_with_cache(spec: EnsembleSpec, dir: Option<&Path>) -> Result<(Ensemble, Option<String>)> {
        if spec.g == 0 {
            return Err(Error::Precondition("g must be at least 1".into()));
        }
        let fq = Fq::new(spec.q)?;
        let mut warning = None;
        let members = match (spec.mode, dir) {
            (Mode::Full, Some(dir)) => {
                let (rows, status) = cache::ensemble_cached(dir, fq, spec.g)?;
                if let cache::CacheStatus::Rebuilt(why) = status {
                    warning = Some(format!("cache for q={} g={} was invalid ({why}); recomputed", spec.q, spec.g));
                }
                rows
            }
            (Mode::Full, None) => lfunction::full_ensemble(fq, spec.g)?,
            (Mode::Sample { count, seed }, _) => {
                lfunction::lpolys_for(&lfunction::sample_discriminants(fq, spec.g, count, seed))?
            }
        };
        Ok((Ensemble { spec, members }, warning))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn is_sample(&self) -> bool {
        matches!(self.spec.mode, Mode::Sample { .. })
    }

    /// Mean of f over the ensemble, with the standard error in sample mode.
    pub fn average<F>(&self, f: F) -> (f64, Option<f64>)
    where
        F: Fn(&LPoly) -> f64 + Sync,
    {
        let vals: Vec<f64> = self.members.par_iter().map(&f).collect();
        let n = vals.len() as f64;
        let mean = pairwise_sum(&vals) / n;
        let stderr = if self.is_sample() && vals.len() > 1 {
            let sq: Vec<f64> = vals.iter().map(|v| (v - mean).powi(2)).collect();
            Some((pairwise_sum(&sq) / (n - 1.0)).sqrt() / n.sqrt())
        } else {
            None
        };
        (mean, stderr)
    }
}

/// Rough symbol-evaluation count for enumerating H_{2g+1} in full:
/// |H_{2g+1}| discriminants times the monic polynomials of degree ≤ g.
pub fn full_enumeration_ops(q: u32, g: usize) -> f64 {
    let q = q as f64;
    let h = q.powi(2 * g as i32 + 1) * (1.0 - 1.0 / q);
    let monic: f64 = (0..=g).map(|d| q.powi(d as i32)).sum();
    h * monic
}

/// Sum by a balanced binary tree over the slice order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 8 => v.iter().sum(),
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub kind: String,
    pub q: u32,
    pub g: usize,
    pub k: f64,
    pub x: Option<u32>,
    pub ell: Option<String>,
    pub empirical: f64,
    pub predicted: Option<f64>,
    pub stderr: Option<f64>,
    pub n: usize,
    pub relative_deviation: Option<f64>,
    pub mode: Mode,
}

impl MomentReport {
    fn new(kind: &str, ens: &Ensemble, k: f64, x: Option<u32>, avg: (f64, Option<f64>), predicted: Option<f64>) -> MomentReport {
        MomentReport {
            kind: kind.to_string(),
            q: ens.spec.q,
            g: ens.spec.g,
            k,
            x,
            ell: None,
            empirical: avg.0,
            predicted,
            stderr: avg.1,
            n: ens.len(),
            relative_deviation: predicted.map(|p| (avg.0 - p) / p),
            mode: ens.spec.mode,
        }
    }
}

fn powk(v: f64, k: u32) -> f64 {
    v.powi(k as i32)
}

/// Z_X(χ_D) = L(½,χ_D)/P_X(χ_D), and 0 at a central zero.
pub fn z_from_l(l: &LPoly, x: u32) -> f64 {
    if l.is_central_zero() {
        0.0
    } else {
        l.central_value() * (-log_p_x(l, x)).exp()
    }
}

/// I_k(g) = ⟨L(½,χ_D)^k⟩ against the conjectured leading term.
pub fn moment_l(ens: &Ensemble, k: u32) -> MomentReport {
    let avg = if k == 0 { (1.0, None) } else { ens.average(|l| powk(l.central_value(), k)) };
    let pred = (k >= 1).then(|| constants::conjectured_ik(ens.spec.q, ens.spec.g, k));
    MomentReport::new("L", ens, k as f64, None, avg, pred)
}

/// I_k(ℓ;g) = ⟨L(½,χ_D)^k χ_D(ℓ)⟩; D sharing a factor with ℓ contribute 0.
pub fn twisted_moment(ens: &Ensemble, ell: &MonicPoly, k: u32) -> Result<MomentReport> {
    if ell.field().q() != ens.spec.q {
        return Err(Error::FieldMismatch(ell.field().q(), ens.spec.q));
    }
    let avg = ens.average(|l| {
        let chi = jacobi(l.discriminant(), ell);
        if chi == 0 { 0.0 } else { chi as f64 * powk(l.central_value(), k) }
    });
    let pred = if (1..=3).contains(&k) {
        Some(constants::leading_ik(&TwistShape::from_ell(ell), ens.spec.g, k, DEFAULT_D_MAX)?)
    } else {
        None
    };
    let mut r = MomentReport::new("twisted", ens, k as f64, None, avg, pred);
    r.ell = Some(ell.to_string());
    Ok(r)
}

/// ⟨χ_D(ℓ)⟩ over the ensemble.
pub fn character_average(ens: &Ensemble, ell: &MonicPoly) -> f64 {
    ens.average(|l| jacobi(l.discriminant(), ell) as f64).0
}

/// ⟨P_X(χ_D)^k⟩ for real k.
pub fn moment_p(ens: &Ensemble, k: f64, x: u32) -> MomentReport {
    let avg = if k == 0.0 { (1.0, None) } else { ens.average(|l| (k * log_p_x(l, x)).exp()) };
    let pred = constants::predicted_p_moment(ens.spec.q, k, x as f64);
    MomentReport::new("P", ens, k, Some(x), avg, Some(pred))
}

fn z_average(ens: &Ensemble, k: u32, x: u32) -> (f64, Option<f64>) {
    if k == 0 {
        return (1.0, None);
    }
    ens.average(|l| powk(z_from_l(l, x), k))
}

/// ⟨L(½)^k P_X^{-k}⟩ against the leading terms with coefficients G(k+1)√Γ(k+1)/√(G(2k+1)Γ(2k+1)).
pub fn moment_lp_inv(ens: &Ensemble, k: u32, x: u32) -> MomentReport {
    let pred = constants::predicted_lp_inverse_moment(k, ens.spec.g, x as f64);
    MomentReport::new("LPinv", ens, k as f64, Some(x), z_average(ens, k, x), Some(pred))
}

/// ⟨Z_X^k⟩ with Z_X = L/P_X; the same numbers as [`moment_lp_inv`].
pub fn moment_z(ens: &Ensemble, k: u32, x: u32) -> MomentReport {
    let pred = constants::predicted_lp_inverse_moment(k, ens.spec.g, x as f64);
    MomentReport::new("Z", ens, k as f64, Some(x), z_average(ens, k, x), Some(pred))
}

/// ⟨L^k⟩ / (⟨P_X^k⟩⟨Z_X^k⟩).
pub fn splitting_ratio(ens: &Ensemble, k: u32, x: u32) -> Result<f64> {
    let l = moment_l(ens, k).empirical;
    let p = moment_p(ens, k as f64, x).empirical;
    let z = z_average(ens, k, x).0;
    if p == 0.0 || z == 0.0 {
        return Err(Error::Precondition(format!("zero denominator in splitting ratio (k={k}, X={x})")));
    }
    Ok(l / (p * z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eulerhadamard::{z_x_value, BumpKernel, ImageRules};

    fn full(g: usize) -> Ensemble {
        Ensemble::build(EnsembleSpec { q: 5, g, mode: Mode::Full }).unwrap()
    }

    #[test]
    fn genus_one_first_moment() {
        let e = full(1);
        assert_eq!(e.len(), 100);
        // L(½) = 1 + c_1/√5 + 1 = 2 + c_1/√5 at g = 1
        let direct: f64 = e
            .members
            .iter()
            .map(|l| 2.0 + l.coeffs()[1] as f64 / 5f64.sqrt())
            .sum::<f64>()
            / 100.0;
        let r = moment_l(&e, 1);
        assert!((r.empirical - direct).abs() < 1e-13);
        assert_eq!(moment_l(&e, 0).empirical, 1.0);
        assert!(r.stderr.is_none());
    }

    #[test]
    fn trivial_twist_and_identities() {
        let e = full(2);
        let one = MonicPoly::one(Fq::new(5).unwrap());
        for k in 1..=3 {
            let t = twisted_moment(&e, &one, k).unwrap();
            assert_eq!(t.empirical, moment_l(&e, k).empirical);
            assert_eq!(moment_z(&e, k, 2).empirical, moment_lp_inv(&e, k, 2).empirical);
        }
        assert_eq!(moment_p(&e, 0.0, 2).empirical, 1.0);
        let pinv = moment_p(&e, -1.0, 2).empirical;
        assert!(pinv.is_finite() && pinv > 0.0);
        assert_eq!(splitting_ratio(&e, 0, 2).unwrap(), 1.0);
    }

    #[test]
    fn square_twist_weight() {
        let e = full(2);
        let fq = Fq::new(5).unwrap();
        let p = MonicPoly::linear(fq, 2);
        let ell = p.mul(&p);
        let avg = character_average(&e, &ell);
        let pred = 1.0 / (1.0 + 1.0 / 5.0);
        assert!((avg - pred).abs() < 10.0 * 5f64.powi(-4), "{avg} {pred}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let e = full(2);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| moment_lp_inv(&e, 2, 3).empirical);
        let b = three.install(|| moment_lp_inv(&e, 2, 3).empirical);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn sample_mode_covers_full_value() {
        let exact = moment_l(&full(1), 1).empirical;
        let mut covered = 0;
        for seed in 0..20 {
            let s = Ensemble::build(EnsembleSpec { q: 5, g: 1, mode: Mode::Sample { count: 50, seed } }).unwrap();
            let r = moment_l(&s, 1);
            let se = r.stderr.unwrap();
            if (r.empirical - exact).abs() <= 3.0 * se {
                covered += 1;
            }
        }
        assert!(covered >= 18, "{covered}/20");
    }

    #[test]
    fn z_from_zeros_agrees() {
        let fq = Fq::new(5).unwrap();
        let ds = lfunction::sample_discriminants(fq, 2, 50, 4);
        let ls = lfunction::lpolys_for(&ds).unwrap();
        let rules = ImageRules::new(BumpKernel::new(5, 2).unwrap(), 200);
        for l in &ls {
            let zs = l.zeros().unwrap();
            let zv = z_x_value(&zs, &rules);
            let direct = z_from_l(l, 2);
            if zv.central_zero {
                assert_eq!(direct, 0.0);
            } else {
                assert!(((zv.value - direct) / direct).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn g_zero_rejected() {
        assert!(Ensemble::build(EnsembleSpec { q: 5, g: 0, mode: Mode::Full }).is_err());
    }
}
