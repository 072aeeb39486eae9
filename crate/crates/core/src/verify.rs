//! The twelve acceptance criteria as runnable checks.
//!
//! Each check returns a [`CriterionOutcome`] carrying the pass flag, wall
//! time and the measured quantities behind the verdict. Full ensembles at
//! q = 5 are built once and shared between checks.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::{
    char_sum_gauss_identity, chi_table, fundamental_sum, gauss_sum_closed, gauss_sums_all, jacobi_poly,
    residue_index, square_twist_deviation, GaussSumTable, DEFAULT_GAUSS_BUDGET,
};
use crate::constants::{self, TwistShape, DEFAULT_D_MAX};
use crate::error::{Error, Result};
use crate::eulerhadamard::{decompose_check, z_x_value, BumpKernel, ImageRules, DEFAULT_K_MAX};
use crate::ffpoly::{
    enumerate_monic, enumerate_monic_upto, prime_count, sieve_counts, sieve_irreducibles, von_mangoldt, Fq,
    MonicPoly, Poly,
};
use crate::lfunction::{afe_residual, full_ensemble, lpolys_for, sample_discriminants, twisted_divisor_sums, FactorTable, LPoly};
use crate::moments::{moment_l, moment_lp_inv, Ensemble, EnsembleSpec, Mode};
use crate::rmt::{mc_average, phi_factored, phi_images, phi_quadrature};

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "prime polynomial theorem"),
    (2, "gauss sums"),
    (3, "character-sum identities"),
    (4, "functional equation"),
    (5, "riemann hypothesis"),
    (6, "approximate functional equation"),
    (7, "hybrid decomposition"),
    (8, "constant calculus"),
    (9, "mertens"),
    (10, "first-moment trend"),
    (11, "L/P_X moment trend"),
    (12, "random matrix model"),
];

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Where full-ensemble coefficient files are read and written.
    pub cache_dir: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub metrics: BTreeMap<String, f64>,
    pub detail: String,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:>2} {} ({:.1}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

/// What a check hands back before timing is attached.
struct Verdict {
    passed: bool,
    metrics: BTreeMap<String, f64>,
    detail: String,
}

impl Verdict {
    fn new() -> Verdict {
        Verdict {
            passed: true,
            metrics: BTreeMap::new(),
            detail: String::new(),
        }
    }

    fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// Records a condition; failing ones are named in the detail line.
    fn require(&mut self, ok: bool, what: impl std::fmt::Display) {
        if !ok {
            self.passed = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&format!("failed: {what}"));
        }
    }

    fn note(&mut self, s: impl std::fmt::Display) {
        if self.passed && self.detail.is_empty() {
            self.detail = s.to_string();
        } else if self.passed {
            self.detail.push_str(&format!("; {s}"));
        }
    }
}

pub struct Verifier {
    opts: VerifyOptions,
    ensembles: HashMap<usize, Ensemble>,
    warnings: Vec<String>,
}

impl Verifier {
    pub fn new(opts: VerifyOptions) -> Verifier {
        Verifier {
            opts,
            ensembles: HashMap::new(),
            warnings: Vec::new(),
        }
    }

    /// Cache files that failed validation and were rebuilt.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Full ensemble H_{2g+1} at q = 5.
    fn ensemble(&mut self, g: usize) -> Result<&Ensemble> {
        if !self.ensembles.contains_key(&g) {
            let spec = EnsembleSpec { q: 5, g, mode: Mode::Full };
            let (ens, warning) = Ensemble::build_with_cache(spec, self.opts.cache_dir.as_deref())?;
            self.warnings.extend(warning);
            self.ensembles.insert(g, ens);
        }
        Ok(&self.ensembles[&g])
    }

    pub fn run(&mut self, id: u32) -> Result<CriterionOutcome> {
        let name = CRITERIA
            .iter()
            .find(|c| c.0 == id)
            .ok_or_else(|| Error::Precondition(format!("no acceptance criterion {id}")))?
            .1;
        let start = Instant::now();
        let verdict = match id {
            1 => prime_polynomial_theorem(),
            2 => gauss_sums(self.opts.seed),
            3 => character_sums(self.opts.seed),
            4 => self.functional_equation(),
            5 => self.riemann_hypothesis(),
            6 => afe(self.opts.seed),
            7 => decomposition(self.opts.seed),
            8 => constant_calculus(),
            9 => mertens(),
            10 => self.first_moment_trend(),
            11 => self.lp_inverse_trend(),
            _ => random_matrix(self.opts.seed),
        };
        let seconds = start.elapsed().as_secs_f64();
        let mut v = verdict.unwrap_or_else(|e| {
            let mut v = Verdict::new();
            v.require(false, format!("error: {e}"));
            v
        });
        // runtime ceilings that are part of a criterion
        let ceiling = match id {
            1 => Some(60.0),
            2 | 12 => Some(300.0),
            _ => None,
        };
        if let Some(c) = ceiling {
            v.require(seconds < c, format!("runtime {seconds:.1}s ≥ {c}s"));
        }
        Ok(CriterionOutcome {
            id,
            name: name.to_string(),
            passed: v.passed,
            seconds,
            metrics: v.metrics,
            detail: if v.detail.is_empty() { "ok".into() } else { v.detail },
        })
    }

    pub fn run_all(&mut self) -> Vec<CriterionOutcome> {
        CRITERIA.iter().map(|c| self.run(c.0).expect("known criterion")).collect()
    }

    fn functional_equation(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        for g in 1..=3 {
            let ens = self.ensemble(g)?;
            let bad = ens.members.par_iter().filter(|l| !l.functional_equation_holds()).count();
            v.metric(format!("g{g}.count"), ens.len() as f64);
            v.metric(format!("g{g}.violations"), bad as f64);
            v.require(bad == 0, format!("{bad} violations at g={g}"));
        }
        v.note("c_{2g-n} = q^{g-n} c_n for every D at q=5, g ≤ 3");
        Ok(v)
    }

    fn riemann_hypothesis(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        for g in 1..=3 {
            let ens = self.ensemble(g)?;
            let worst = ens
                .members
                .par_iter()
                .map(|l| l.zeros().map(|z| z.radius_residual).unwrap_or(f64::INFINITY))
                .reduce(|| 0.0, f64::max);
            v.metric(format!("g{g}.max_radius_residual"), worst);
            v.require(worst < 1e-8, format!("g={g}: max ||u|√q − 1| = {worst:e}"));
        }
        v.note("all zeros on |u| = q^{-1/2} to 1e-8");
        Ok(v)
    }

    fn first_moment_trend(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let shape = TwistShape::trivial(5);
        let a1 = constants::a_k(5, 1.0, DEFAULT_D_MAX).f64();
        let dlog = constants::eta1_log_derivative(&shape, DEFAULT_D_MAX);
        let mut devs = Vec::new();
        for g in 1..=3 {
            let i1 = moment_l(self.ensemble(g)?, 1).empirical;
            let main = a1 * (g as f64 + 1.0 - dlog);
            let dev = (i1 / main - 1.0).abs();
            v.metric(format!("g{g}.I1"), i1);
            v.metric(format!("g{g}.main"), main);
            v.metric(format!("g{g}.deviation"), dev);
            devs.push(dev);
        }
        v.require(devs.windows(2).all(|w| w[1] < w[0]), format!("deviations not strictly decreasing: {devs:?}"));
        v.note(format!("|I_1/main − 1| = {:.2e}, {:.2e}, {:.2e}", devs[0], devs[1], devs[2]));
        Ok(v)
    }

    fn lp_inverse_trend(&mut self) -> Result<Verdict> {
        let mut v = Verdict::new();
        let mut ratios = Vec::new();
        for g in 2..=3 {
            let ens = self.ensemble(g)?;
            for k in 1..=3 {
                let r = moment_lp_inv(ens, k, 2);
                let ratio = r.empirical / r.predicted.expect("prediction");
                v.metric(format!("g{g}.k{k}.ratio"), ratio);
                if k == 1 {
                    ratios.push(ratio);
                }
            }
        }
        for (g, r) in [2, 3].iter().zip(&ratios) {
            v.require((0.4..=2.5).contains(r), format!("g={g} ratio {r:.3} outside [0.4, 2.5]"));
        }
        v.require(
            (ratios[1] - 1.0).abs() < (ratios[0] - 1.0).abs(),
            format!("ratio does not move toward 1: {:.3} → {:.3}", ratios[0], ratios[1]),
        );
        v.note(format!("k=1, X=2 ratios {:.3} (g=2), {:.3} (g=3)", ratios[0], ratios[1]));
        Ok(v)
    }
}

fn f5() -> Fq {
    Fq::new(5).expect("5 is an admissible field size")
}

fn prime_polynomial_theorem() -> Result<Verdict> {
    let mut v = Verdict::new();
    for q in [5u32, 13] {
        let fq = Fq::new(q)?;
        let counts = sieve_counts(fq, 8);
        for n in 1..=8usize {
            let formula = prime_count(q, n);
            v.require(counts[n] as u128 == formula, format!("q={q} n={n}: sieve {} vs formula {formula}", counts[n]));
            // Σ_{M_n} Λ = Σ_{d|n} d·π(d), with π(d) from the sieve
            let lambda: u128 = (1..=n).filter(|d| n % d == 0).map(|d| d as u128 * counts[d] as u128).sum();
            v.require(lambda == fq.norm(n), format!("q={q} n={n}: ΣΛ = {lambda} ≠ q^n"));
        }
        v.metric(format!("q{q}.pi8"), counts[8] as f64);
        // literal enumeration where M_n is small
        let direct_max = if q == 5 { 8 } else { 4 };
        for n in 1..=direct_max {
            let s: u128 = enumerate_monic(fq, n).map(|f| von_mangoldt(&f) as u128).sum();
            v.require(s == fq.norm(n), format!("q={q} n={n}: enumerated ΣΛ = {s}"));
        }
    }
    v.note("sieve counts and ΣΛ exact for q ∈ {5, 13}, n ≤ 8");
    Ok(v)
}

/// All polynomials of degree ≤ max_deg, the zero polynomial included.
fn polys_upto(fq: Fq, max_deg: usize) -> Vec<Poly> {
    let q = fq.q() as u64;
    (0..q.pow(max_deg as u32 + 1))
        .map(|mut r| {
            let c = (0..=max_deg)
                .map(|_| {
                    let d = (r % q) as u32;
                    r /= q;
                    d
                })
                .collect();
            Poly::new(fq, c)
        })
        .collect()
}

fn gauss_sums(seed: u64) -> Result<Verdict> {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a55);
    for q in [5u32, 13] {
        let fq = Fq::new(q)?;
        let vs = polys_upto(fq, 4);
        let primes: Vec<MonicPoly> = sieve_irreducibles(fq, 3)
            .into_iter()
            .flatten()
            .filter(|p| p.norm() <= 125)
            .collect();
        let mut worst = 0f64;
        let mut worst_transform = 0f64;
        let mut cases = 0usize;
        for p in &primes {
            for j in 1..=3u32 {
                let f = p.pow(j);
                let n = f.degree();
                let chi = chi_table(&f);
                let all = gauss_sums_all(&f, &chi);
                if f.norm() <= DEFAULT_GAUSS_BUDGET {
                    // the transform against the literal sum over residues
                    let table = GaussSumTable::new(&f, DEFAULT_GAUSS_BUDGET)?;
                    v.require(table.chi_table() == chi.as_slice(), format!("χ table mismatch for {f}"));
                    for _ in 0..8 {
                        let w = &vs[rng.gen_range(0..vs.len())];
                        let r = w.rem(f.as_poly())?;
                        let d = (table.direct(w) - all[residue_index(&r, n)]).norm();
                        worst_transform = worst_transform.max(d);
                    }
                } else {
                    for _ in 0..200 {
                        let idx = rng.gen_range(0..chi.len());
                        let mut c = vec![0u32; n];
                        let mut r = idx;
                        for x in c.iter_mut() {
                            *x = (r % q as usize) as u32;
                            r /= q as usize;
                        }
                        let s = jacobi_poly(&Poly::new(fq, c), &f);
                        v.require(s == chi[idx], format!("χ mismatch for {f} at residue {idx}"));
                    }
                }
                let err = vs
                    .par_iter()
                    .map(|w| {
                        let closed = gauss_sum_closed(w, p, j).map(|c| c.to_complex(q));
                        let r = w.rem(f.as_poly()).expect("monic modulus");
                        closed.map(|c| (c - all[residue_index(&r, n)]).norm())
                    })
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                worst = worst.max(err);
                cases += vs.len();
            }
        }
        v.metric(format!("q{q}.cases"), cases as f64);
        v.metric(format!("q{q}.max_closed_error"), worst);
        v.metric(format!("q{q}.max_transform_error"), worst_transform);
        v.require(worst < 1e-10, format!("q={q}: closed form off by {worst:e}"));
        v.require(worst_transform < 1e-10, format!("q={q}: transform off by {worst_transform:e}"));
    }

    // multiplicativity on random coprime pairs
    let fq = f5();
    let mut worst = 0f64;
    let mut pairs = 0;
    while pairs < 200 {
        let df = rng.gen_range(1..=3usize);
        let dh = rng.gen_range(1..=6 - df);
        let f = MonicPoly::unrank(fq, df, rng.gen_range(0..5u64.pow(df as u32)));
        let h = MonicPoly::unrank(fq, dh, rng.gen_range(0..5u64.pow(dh as u32)));
        if !f.is_coprime(&h) {
            continue;
        }
        let fh = f.mul(&h);
        let tf = GaussSumTable::new(&f, DEFAULT_GAUSS_BUDGET)?;
        let th = GaussSumTable::new(&h, DEFAULT_GAUSS_BUDGET)?;
        let tfh = GaussSumTable::new(&fh, DEFAULT_GAUSS_BUDGET)?;
        for _ in 0..3 {
            let c: Vec<u32> = (0..5).map(|_| rng.gen_range(0..5)).collect();
            let w = Poly::new(fq, c);
            let d = (tfh.direct(&w) - tf.direct(&w) * th.direct(&w)).norm();
            worst = worst.max(d);
        }
        pairs += 1;
    }
    v.metric("multiplicativity.max_error", worst);
    v.require(worst < 1e-10, format!("multiplicativity off by {worst:e}"));
    v.note("closed form = definitional sum for |P| ≤ 125, j ≤ 3, d(V) ≤ 4 (q = 5, 13); 200 coprime pairs multiply");
    Ok(v)
}

fn character_sums(seed: u64) -> Result<Verdict> {
    let mut v = Verdict::new();
    let fq = f5();
    let mut checked = 0usize;
    let mut worst = 0f64;
    for f in enumerate_monic_upto(fq, 4) {
        let table = if f.degree() >= 1 {
            Some(GaussSumTable::new(&f, DEFAULT_GAUSS_BUDGET)?)
        } else {
            None
        };
        for m in 0..=4 {
            let c = char_sum_gauss_identity(&f, m, table.as_ref())?;
            let err = (c.identity - Complex64::new(c.direct as f64, 0.0)).norm();
            worst = worst.max(err);
            v.require(c.agrees(1e-6), format!("short-sum identity fails for f = {f}, m = {m}"));
            checked += 1;
        }
    }
    v.metric("short_sum.cases", checked as f64);
    v.metric("short_sum.max_error", worst);

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3131);
    let mut bad = 0;
    for _ in 0..100 {
        let deg = rng.gen_range(1..=4usize);
        let f = MonicPoly::unrank(fq, deg, rng.gen_range(0..5u64.pow(deg as u32)));
        for g in 1..=2 {
            let (direct, identity) = fundamental_sum(&f, g);
            if direct != identity {
                bad += 1;
            }
        }
    }
    v.metric("squarefree_sum.failures", bad as f64);
    v.require(bad == 0, format!("{bad} squarefree-sum identity failures"));
    v.note(format!("{checked} short sums exact (max error {worst:.1e}); 100 random f at g = 1, 2 exact"));
    Ok(v)
}

fn afe(seed: u64) -> Result<Verdict> {
    let mut v = Verdict::new();
    let fq = f5();
    let run = |k: u32, g: usize, ls: &[LPoly], v: &mut Verdict| {
        let table = FactorTable::new(fq, k as usize * g);
        let tau = table.tau_table(k);
        let (le, exact) = ls
            .par_iter()
            .map(|l| {
                let b = twisted_divisor_sums(&table, &tau, l.discriminant());
                let r = afe_residual(l, k, &b);
                (r.degree_le, r.exact_degree)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        v.metric(format!("k{k}.g{g}.max_residual"), le);
        v.metric(format!("k{k}.g{g}.exact_degree_residual"), exact);
        v.require(le < 1e-9, format!("k={k} g={g}: residual {le:e}"));
    };
    for g in 1..=2 {
        let ls = full_ensemble(fq, g)?;
        for k in 1..=3 {
            run(k, g, &ls, &mut v);
        }
    }
    let ls = lpolys_for(&sample_discriminants(fq, 3, 500, seed ^ 0xafe))?;
    run(3, 3, &ls, &mut v);
    v.note("degree-≤ reading holds to 1e-9 (k = 1, 2, 3 exhaustive at g ≤ 2; k = 3 on 500 D at g = 3)");
    Ok(v)
}

fn decomposition(seed: u64) -> Result<Verdict> {
    let mut v = Verdict::new();
    let fq = f5();
    let mut worst = 0f64;
    let mut worst_doubling = 0f64;
    for g in 1..=3usize {
        let ds = sample_discriminants(fq, g, 160, seed ^ (0xdec0 + g as u64));
        let ls: Vec<LPoly> = lpolys_for(&ds)?.into_iter().filter(|l| !l.is_central_zero()).take(100).collect();
        v.require(ls.len() == 100, format!("g={g}: only {} non-central-zero D sampled", ls.len()));
        for x in 2..=4u32 {
            let rules = ImageRules::new(BumpKernel::new(5, x)?, DEFAULT_K_MAX);
            let doubled = ImageRules::new(BumpKernel::new(5, x)?, 2 * DEFAULT_K_MAX);
            let res = ls
                .par_iter()
                .map(|l| decompose_check(l, &rules).map(|r| r.residual))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let dbl = ls
                .par_iter()
                .take(20)
                .map(|l| {
                    let z = l.zeros()?;
                    let a = z_x_value(&z, &rules).value;
                    let b = z_x_value(&z, &doubled).value;
                    Ok((a - b).abs() / b.abs())
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            v.metric(format!("g{g}.x{x}.max_residual"), res);
            v.metric(format!("g{g}.x{x}.kmax_doubling"), dbl);
            v.require(res < 1e-6, format!("g={g} X={x}: residual {res:e}"));
            v.require(dbl < 1e-8, format!("g={g} X={x}: K_max doubling moved Z_X by {dbl:e}"));
            worst = worst.max(res);
            worst_doubling = worst_doubling.max(dbl);
        }
    }
    v.note(format!("max |L − P_X Z_X|/|L| = {worst:.1e}, K_max doubling {worst_doubling:.1e}"));
    Ok(v)
}

fn constant_calculus() -> Result<Verdict> {
    let mut v = Verdict::new();
    for q in [5u32, 13] {
        for k in [0.5, 1.0, 2.0, 3.0] {
            let (a, b) = constants::a_k_both(q, k, DEFAULT_D_MAX)?;
            let rel = ((a.f64() - b.f64()) / a.f64()).abs();
            v.metric(format!("A.q{q}.k{k}.dual_residual"), rel);
            v.require(rel < 1e-10, format!("A_{k} dual forms differ by {rel:e} at q={q}"));
        }
    }

    let fq = f5();
    let ells = [
        MonicPoly::one(fq),
        MonicPoly::linear(fq, 1),
        MonicPoly::linear(fq, 1).pow(2),
        MonicPoly::from_lower(fq, &[2, 0]).mul(&MonicPoly::linear(fq, 3)),
        MonicPoly::from_lower(fq, &[2, 0]).pow(3).mul(&MonicPoly::x(fq)),
    ];
    let mut worst_id = 0f64;
    let mut worst_sym = 0f64;
    for l in &ells {
        let shape = TwistShape::from_ell(l);
        worst_id = worst_id.max(constants::kappa2_identity_check(&shape, DEFAULT_D_MAX)?);
        for u in [0.5, 0.8, 1.3, 2.0] {
            worst_sym = worst_sym.max(constants::kappa2_symmetry_check(&shape, u, DEFAULT_D_MAX)?);
        }
    }
    v.metric("kappa2.identity_residual", worst_id);
    v.metric("kappa2.symmetry_residual", worst_sym);
    v.require(worst_id < 1e-10, format!("κ_2 ζ_q(2) = η_2 off by {worst_id:e}"));
    v.require(worst_sym < 1e-10, format!("κ_2 u ↔ 1/u off by {worst_sym:e}"));

    let mut worst_local = 0f64;
    for k in 1..=3 {
        for row in constants::local_factor_table(k, &[5.0, 25.0, 125.0, 13.0, 169.0])? {
            worst_local = worst_local.max(row.max_residual());
        }
    }
    v.metric("local_tables.max_residual", worst_local);
    v.require(worst_local < 1e-12, format!("local tables off by {worst_local:e}"));

    let expected = [FRAC_1_SQRT_2, 1.0 / 12.0, 1.0 / (720.0 * 2f64.sqrt())];
    for (k, e) in (1..=3).zip(expected) {
        let d = (constants::rmt_coefficient(k) - e).abs();
        v.metric(format!("rmt_coefficient.k{k}.error"), d);
        v.require(d < 1e-12, format!("rmt_coefficient({k}) off by {d:e}"));
    }

    // square twists: deviation · q^{2g} should not grow with g
    let squares = [
        MonicPoly::x(fq).pow(2),
        MonicPoly::linear(fq, 1).pow(2),
        MonicPoly::from_lower(fq, &[2, 0]).pow(2),
    ];
    for l in &squares {
        let cs: Vec<Ratio<i128>> = (1..=3)
            .map(|g| square_twist_deviation(l, g) * Ratio::from_integer(5i128.pow(2 * g as u32)))
            .collect();
        for (g, c) in (1..=3).zip(&cs) {
            v.metric(format!("square_twist.{l}.g{g}.C"), c.to_f64().unwrap_or(f64::NAN));
        }
        v.require(
            cs.windows(2).all(|w| w[1] <= w[0]) && cs[0] > Ratio::from_integer(0),
            format!("C(g) increases for ℓ = {l}: {cs:?}"),
        );
    }
    // two primes of equal degree: C grows like g (reported, not asserted)
    let l = MonicPoly::linear(fq, 2).mul(&MonicPoly::linear(fq, 3)).pow(2);
    for g in 1..=3 {
        let c = square_twist_deviation(&l, g) * Ratio::from_integer(5i128.pow(2 * g as u32));
        v.metric(format!("square_twist.{l}.g{g}.C"), c.to_f64().unwrap_or(f64::NAN));
    }
    v.note("dual A_k, κ_2 identities, local tables, RMT coefficients and square-twist constants agree");
    Ok(v)
}

fn mertens() -> Result<Verdict> {
    let mut v = Verdict::new();
    let gamma_e = crate::special::EULER_GAMMA.exp();
    let xs: Vec<f64> = (4..=10).map(|x| x as f64).collect();
    let ys: Vec<f64> = (4..=10usize)
        .map(|x| (constants::mertens_product(5, x) - gamma_e * x as f64).abs())
        .collect();
    for (x, y) in xs.iter().zip(&ys) {
        v.metric(format!("x{x}.offset"), *y);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    v.metric("slope", slope);
    v.require(slope < 0.05, format!("offset slope {slope:.4} ≥ 0.05"));
    v.note(format!("offset slope {slope:.4} over X = 4..10"));
    Ok(v)
}

fn random_matrix(seed: u64) -> Result<Verdict> {
    let mut v = Verdict::new();
    let samples = 100_000;
    for (n, ks, xs) in [(1usize, [1.0, 2.0], [2u32, 4]), (2, [1.0, 2.0], [2, 4])] {
        for k in ks {
            for x in xs {
                let mc = mc_average(n, k, x, samples, seed ^ (0x7a7 + 16 * n as u64 + x as u64))?;
                let quad = phi_quadrature(n, k, x)?;
                let z = (mc.estimate - quad).abs() / mc.stderr;
                v.metric(format!("n{n}.k{k}.x{x}.mc"), mc.estimate);
                v.metric(format!("n{n}.k{k}.x{x}.quadrature"), quad);
                v.metric(format!("n{n}.k{k}.x{x}.sigmas"), z);
                v.require(z < 3.0, format!("N={n} k={k} X={x}: MC {:.5} vs quadrature {quad:.5} ({z:.2}σ)", mc.estimate));
            }
        }
    }
    let mut worst = 0f64;
    for x in [2u32, 4] {
        let rules = ImageRules::new(BumpKernel::new(5, x)?, DEFAULT_K_MAX);
        for i in 1..=40 {
            let theta = PI * i as f64 / 40.0;
            for k in [1.0, 2.0] {
                let a = phi_images(theta, k, &rules);
                let b = phi_factored(theta, k, x);
                worst = worst.max((a - b).abs() / b.abs().max(1e-300));
            }
        }
    }
    v.metric("phi.dual_form_residual", worst);
    v.require(worst < 1e-8, format!("φ image and factored forms differ by {worst:e}"));
    v.note(format!("MC within 3σ of quadrature at 1e5 samples (N = 1, 2); φ forms agree to {worst:.1e}"));
    Ok(v)
}
