//! Row builders behind the CLI subcommands. Every number in a report row
//! comes from one of these calls.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{self, EulerProductValue, TwistShape};
use crate::error::Result;
use crate::eulerhadamard::{decompose_check, BumpKernel, DecompositionReport, ImageRules};
use crate::ffpoly::MonicPoly;
use crate::moments::{self, Ensemble, MomentReport};
use crate::rmt::{self, McEstimate};

#[derive(Clone, Debug, Serialize)]
pub struct LfunRow {
    pub discriminant: String,
    pub q: u32,
    pub g: usize,
    pub coeffs: Vec<i64>,
    pub central_value: f64,
    pub central_zero: bool,
}

pub fn lfun_rows(ens: &Ensemble) -> Vec<LfunRow> {
    ens.members
        .iter()
        .map(|l| LfunRow {
            discriminant: l.discriminant().to_string(),
            q: l.q(),
            g: l.genus(),
            coeffs: l.coeffs().to_vec(),
            central_value: l.central_value(),
            central_zero: l.is_central_zero(),
        })
        .collect()
}

/// One row per conjugate pair e^{±iθ}.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroRow {
    pub discriminant: String,
    pub theta: f64,
    pub multiplicity: usize,
    pub radius_residual: f64,
    pub eval_residual: f64,
}

pub fn zero_rows(ens: &Ensemble) -> Result<Vec<ZeroRow>> {
    let per_d: Vec<Vec<ZeroRow>> = ens
        .members
        .par_iter()
        .map(|l| {
            let z = l.zeros()?;
            Ok(z.angles
                .iter()
                .map(|&(theta, multiplicity)| ZeroRow {
                    discriminant: l.discriminant().to_string(),
                    theta,
                    multiplicity,
                    radius_residual: z.radius_residual,
                    eval_residual: z.eval_residual,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_d.into_iter().flatten().collect())
}

pub fn decompose_rows(ens: &Ensemble, xs: &[u32], k_max: usize) -> Result<Vec<DecompositionReport>> {
    let mut out = Vec::new();
    for &x in xs {
        let rules = ImageRules::new(BumpKernel::new(ens.spec.q, x)?, k_max);
        let rows = ens
            .members
            .par_iter()
            .map(|l| decompose_check(l, &rules))
            .collect::<Result<Vec<_>>>()?;
        out.extend(rows);
    }
    Ok(out)
}

/// ⟨L^k⟩ for each k, and for each X also ⟨P_X^k⟩ and ⟨L^k P_X^{−k}⟩.
pub fn moment_rows(ens: &Ensemble, ks: &[u32], xs: &[u32]) -> Vec<MomentReport> {
    let mut out = Vec::new();
    for &k in ks {
        out.push(moments::moment_l(ens, k));
        for &x in xs {
            out.push(moments::moment_p(ens, k as f64, x));
            out.push(moments::moment_lp_inv(ens, k, x));
        }
    }
    out
}

pub fn twisted_rows(ens: &Ensemble, ells: &[MonicPoly], ks: &[u32]) -> Result<Vec<MomentReport>> {
    let mut out = Vec::new();
    for l in ells {
        for &k in ks {
            out.push(moments::twisted_moment(ens, l, k)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantRow {
    pub name: String,
    pub q: u32,
    pub k: Option<f64>,
    pub ell: String,
    pub value: f64,
    pub d_max: Option<usize>,
    pub tail_bound: Option<f64>,
}

impl ConstantRow {
    fn product(name: &str, q: u32, k: Option<f64>, ell: &str, v: EulerProductValue) -> ConstantRow {
        ConstantRow {
            name: name.into(),
            q,
            k,
            ell: ell.into(),
            value: v.f64(),
            d_max: Some(v.d_max),
            tail_bound: Some(v.tail),
        }
    }

    fn plain(name: &str, q: u32, k: Option<f64>, ell: &str, value: f64, d_max: Option<usize>) -> ConstantRow {
        ConstantRow {
            name: name.into(),
            q,
            k,
            ell: ell.into(),
            value,
            d_max,
            tail_bound: None,
        }
    }
}

/// A_k, the RMT coefficient, and for each ℓ the η, κ values at the centre.
pub fn constant_rows(q: u32, ks: &[u32], ells: &[MonicPoly], d_max: usize) -> Result<Vec<ConstantRow>> {
    let mut out = Vec::new();
    for &k in ks {
        out.push(ConstantRow::product("A", q, Some(k as f64), "1", constants::a_k(q, k as f64, d_max)));
        out.push(ConstantRow::plain("rmt_coefficient", q, Some(k as f64), "1", constants::rmt_coefficient(k), None));
    }
    for l in ells {
        let shape = TwistShape::from_ell(l);
        let name = l.to_string();
        for k in 1..=3u32 {
            let eta = constants::eta_k_at_1(&shape, k, d_max)?;
            out.push(ConstantRow::plain("eta_at_1", q, Some(k as f64), &name, eta, Some(d_max)));
        }
        out.push(ConstantRow::plain(
            "eta1_log_derivative",
            q,
            Some(1.0),
            &name,
            constants::eta1_log_derivative(&shape, d_max),
            Some(d_max),
        ));
        out.push(ConstantRow::product("kappa2_at_1_1", q, Some(2.0), &name, constants::kappa2_at_u1(&shape, 1.0, d_max)?));
        out.push(ConstantRow::product("kappa3_at_1_1", q, Some(3.0), &name, constants::kappa3_at_11(&shape, d_max)));
    }
    Ok(out)
}

/// Monte Carlo averages over USp(2N) for every (N, k, X).
pub fn rmt_rows(dims: &[usize], ks: &[f64], xs: &[u32], samples: usize, seed: u64) -> Result<Vec<McEstimate>> {
    let mut out = Vec::new();
    for &n in dims {
        for &k in ks {
            for &x in xs {
                out.push(rmt::mc_average(n, k, x, samples, seed)?);
            }
        }
    }
    Ok(out)
}
