//! Sampled lower bounds Γ_n(τ) = |g_n(τ)|² of the model symbols over the
//! continuum relaxation τ = 2πω·k ∈ ℝ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::elliptic::EllipticOperator;
use super::model::Variant;

/// Infimum estimate and where it was attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaBound {
    pub value: f64,
    pub tau: f64,
    pub n: usize,
}

/// Coefficients (a, b, c) of g(τ) = aτ² + bτ + c: the ε-multiplied symbol
/// for A/A′, the plain symbol for B/B′.
pub fn symbol_quadratic(
    variant: Variant,
    eps: Complex64,
    lambda: f64,
    lambda_delta: f64,
) -> (Complex64, Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    match variant {
        Variant::A => (-eps, i, eps * lambda),
        Variant::APrime => (-eps, i * lambda_delta, eps * lambda),
        Variant::B => (-eps * eps, i, Complex64::new(lambda, 0.0)),
        Variant::BPrime => (-eps * eps, i, Complex64::new(lambda_delta, 0.0)),
    }
}

fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    if a.norm() == 0.0 {
        if b.norm() == 0.0 {
            return vec![];
        }
        return vec![-c / b];
    }
    let disc = (b * b - a * c * 4.0).sqrt();
    // numerically stable pairing
    let q = if (b.conj() * disc).re >= 0.0 {
        -(b + disc) * 0.5
    } else {
        -(b - disc) * 0.5
    };
    let mut roots = vec![q / a];
    if q.norm() > 0.0 {
        roots.push(c / q);
    }
    roots
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-14 * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// inf over τ ∈ ℝ of Γ for one eigenvalue pair.
pub fn gamma_min_single(
    variant: Variant,
    eps: Complex64,
    lambda: f64,
    lambda_delta: f64,
    tau_samples: usize,
) -> (f64, f64) {
    let (a, b, c) = symbol_quadratic(variant, eps, lambda, lambda_delta);
    let g = |t: f64| (a * t * t + b * t + c).norm_sqr();
    let roots = quadratic_roots(a, b, c);
    let scale = a.norm() + b.norm() + c.norm();
    for r in &roots {
        if r.im.abs() <= 1e-12 * (1.0 + r.re.abs()) && g(r.re) <= 1e-20 * scale * scale {
            return (0.0, r.re);
        }
    }
    let mut t_max = 2.0 * lambda.abs().max(lambda_delta.abs()).sqrt() * 1.01 + 1.0;
    for r in &roots {
        if r.re.is_finite() {
            t_max = t_max.max(1.1 * r.re.abs());
        }
    }
    let samples = tau_samples.max(16);
    let step = 2.0 * t_max / (samples - 1) as f64;
    let taus: Vec<f64> = (0..samples).map(|i| -t_max + i as f64 * step).collect();
    let vals: Vec<f64> = taus.iter().map(|&t| g(t)).collect();

    let mut best = (g(0.0), 0.0);
    let mut consider = |t: f64, v: f64| {
        if v < best.0 {
            best = (v, t);
        }
    };
    for (i, (&t, &v)) in taus.iter().zip(&vals).enumerate() {
        consider(t, v);
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < vals.len() {
            vals[i + 1]
        } else {
            f64::INFINITY
        };
        if v <= left && v <= right {
            let lo = if i > 0 { taus[i - 1] } else { t - step };
            let hi = if i + 1 < taus.len() {
                taus[i + 1]
            } else {
                t + step
            };
            let (tm, vm) = golden_min(&g, lo, hi);
            consider(tm, vm);
        }
    }
    for r in &roots {
        if r.re.is_finite() {
            let (tm, vm) = golden_min(&g, r.re - step, r.re + step);
            consider(tm, vm);
        }
    }
    (best.0, best.1)
}

/// Lower-bound estimate of |ε λ_{n,k}|² (A/A′) or |Λ_ε multiplier|² (B/B′)
/// over sampled τ and all n.
pub fn gamma_lower_bound(
    variant: Variant,
    op: &EllipticOperator,
    eps: Complex64,
    tau_samples: usize,
) -> GammaBound {
    let ld = op.delta_eigenvalues();
    let mut best = GammaBound {
        value: f64::INFINITY,
        tau: 0.0,
        n: 0,
    };
    for (n, &l) in op.lambda().iter().enumerate() {
        let (v, t) = gamma_min_single(variant, eps, l, ld[n], tau_samples);
        if v < best.value {
            best = GammaBound {
                value: v,
                tau: t,
                n,
            };
        }
    }
    best
}
