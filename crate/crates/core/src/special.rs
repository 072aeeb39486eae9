//! Exponential and cosine integrals, Gauss–Legendre rules.

use num_complex::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// E_1(z) = ∫_z^∞ e^{-t}/t dt on the principal branch, |arg z| < π.
///
/// Power series for |z| ≤ 4, Lentz continued fraction beyond.
pub fn exp_integral_e1(z: Complex64) -> Complex64 {
    assert!(z.norm() > 0.0, "E_1 has a logarithmic singularity at 0");
    if z.norm() <= 4.0 {
        // E_1(z) = -γ - log z - Σ_{n≥1} (-z)^n / (n n!)
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 1..200 {
            term *= -z / n as f64;
            let add = term / n as f64;
            sum += add;
            if add.norm() < 1e-17 * sum.norm().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    } else {
        // e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - ...)))
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 1..2000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = (a * d + b).inv();
            c = b + a / c;
            if c.norm() < tiny {
                c = Complex64::new(tiny, 0.0);
            }
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// Ci(x) = -∫_x^∞ cos t / t dt for x > 0.
pub fn cosine_integral(x: f64) -> f64 {
    assert!(x > 0.0, "Ci needs a positive argument");
    if x <= 4.0 {
        ci_series(x)
    } else if x <= 32.0 {
        // Ci(x) = Ci(4) + ∫_4^x cos t / t dt
        let (nodes, weights) = gl_cached_48();
        let half = 0.5 * (x - 4.0);
        let mid = 0.5 * (x + 4.0);
        let integral: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(&s, &w)| {
                let t = mid + half * s;
                w * t.cos() / t
            })
            .sum();
        ci_series(4.0) + half * integral
    } else {
        ci_asymptotic(x)
    }
}

fn ci_series(x: f64) -> f64 {
    // γ + log x + Σ_{n≥1} (-x²)^n / (2n (2n)!)
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..60 {
        let m = 2 * n;
        term *= -x2 / ((m - 1) * m) as f64;
        let add = term / m as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

/// Ci(x) = f(x) sin x - g(x) cos x with the auxiliary asymptotic series.
fn ci_asymptotic(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let mut f = 1.0;
    let mut g = 1.0;
    let mut tf = 1.0;
    let mut tg = 1.0;
    for n in 1..40i32 {
        let m = 2 * n;
        let nf = -tf * ((m - 1) * m) as f64 * inv2;
        let ng = -tg * (m * (m + 1)) as f64 * inv2;
        if nf.abs() > tf.abs() || ng.abs() > tg.abs() {
            break;
        }
        tf = nf;
        tg = ng;
        f += tf;
        g += tg;
        if tf.abs() < 1e-17 && tg.abs() < 1e-17 {
            break;
        }
    }
    (f / x) * x.sin() - (g * inv2) * x.cos()
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_pair(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl_cached_48() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(48))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_reference_values() {
        assert!((exp_integral_e1(Complex64::new(1.0, 0.0)).re - 0.219_383_934_395_520_3).abs() < 1e-13);
        // CF branch
        let v = exp_integral_e1(Complex64::new(5.0, 0.0)).re;
        assert!((v - 0.001_148_295_591_275_325_8).abs() < 1e-15);
        for k in 2..=6 {
            let z = Complex64::new(10f64.powi(-k), 0.0);
            let r = exp_integral_e1(z) + z.ln() + EULER_GAMMA;
            assert!(r.norm() < 2.0 * z.re);
        }
    }

    #[test]
    fn e1_ci_identity() {
        for i in 0..=40 {
            let x = 10f64.powf(-2.0 + 0.1 * i as f64);
            let s = exp_integral_e1(Complex64::new(0.0, -x)) + exp_integral_e1(Complex64::new(0.0, x));
            assert!((s.re + 2.0 * cosine_integral(x)).abs() < 1e-10, "x = {x}");
            assert!(s.im.abs() < 1e-10);
        }
    }

    #[test]
    fn ci_branches_join() {
        for x in [4.0f64, 32.0] {
            let a = cosine_integral(x - 1e-9);
            let b = cosine_integral(x + 1e-9);
            // Ci' = cos x / x
            assert!((b - a - 2e-9 * x.cos() / x).abs() < 1e-13, "{x}: {a} {b}");
        }
        assert!((cosine_integral(1.0) - 0.337_403_922_900_968_1).abs() < 1e-14);
        assert!((cosine_integral(20.0) - 0.044_419_820_845_353_3).abs() < 1e-13);
    }

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(1500);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (300.0 * x).cos()).sum();
        assert!((s - 2.0 * (300f64).sin() / 300.0).abs() < 1e-13);
    }
}
