//! The linear parts N_ε (models A, A′) and Λ_ε (models B, B′).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::elliptic::EllipticOperator;
use super::model::Variant;
use crate::error::{Error, Result};
use crate::spectral::{BasisTag, Frequency, SpectralField};

/// Default lower bound on |multiplier| before a solve is refused.
pub const DEFAULT_MULTIPLIER_FLOOR: f64 = 1e-12;

/// Raw operator, or the ε-multiplied form used for models A/A′ to avoid
/// 1/ε amplification when assembling residuals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    Raw,
    EpsMultiplied,
}

fn require_eps(variant: Variant, eps: Complex64) -> Result<()> {
    if eps == Complex64::new(0.0, 0.0) && matches!(variant, Variant::A | Variant::APrime) {
        return Err(Error::ZeroEpsilon(variant.to_string()));
    }
    Ok(())
}

/// Symbol of the model's linear operator for τ = 2πω·k and eigenvalues
/// (λ, λ^Δ).
pub fn symbol(
    variant: Variant,
    eps: Complex64,
    tau: f64,
    lambda: f64,
    lambda_delta: f64,
) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    match variant {
        Variant::A => -tau * tau + i * tau / eps + lambda,
        Variant::APrime => -tau * tau + i * tau * lambda_delta / eps + lambda,
        Variant::B => -eps * eps * tau * tau + i * tau + lambda,
        Variant::BPrime => -eps * eps * tau * tau + i * tau + lambda_delta,
    }
}

/// ε × symbol for models A/A′, evaluated without forming 1/ε.
pub fn scaled_symbol(
    variant: Variant,
    eps: Complex64,
    tau: f64,
    lambda: f64,
    lambda_delta: f64,
) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    match variant {
        Variant::A => eps * (lambda - tau * tau) + i * tau,
        Variant::APrime => eps * (lambda - tau * tau) + i * tau * lambda_delta,
        Variant::B | Variant::BPrime => symbol(variant, eps, tau, lambda, lambda_delta),
    }
}

/// Multiplier of e^{2πik·θ}Φ_n under the model's linear operator.
///
/// For A′ the pair (λ_n, λ_n^Δ) is matched by index, which is exact when
/// ℒ commutes with Δ.
pub fn multiplier(
    variant: Variant,
    omega: &Frequency,
    op: &EllipticOperator,
    eps: Complex64,
    k: &[i64],
    n: usize,
) -> Result<Complex64> {
    require_eps(variant, eps)?;
    if n >= op.lambda().len() {
        return Err(Error::Truncation(format!("mode index {n} out of range")));
    }
    let tau = 2.0 * PI * omega.dot(k);
    Ok(symbol(
        variant,
        eps,
        tau,
        op.lambda()[n],
        op.delta_eigenvalues()[n],
    ))
}

fn scaled_or_raw(
    variant: Variant,
    scaling: Scaling,
    eps: Complex64,
    tau: f64,
    lambda: f64,
    lambda_delta: f64,
) -> Complex64 {
    match scaling {
        Scaling::Raw => symbol(variant, eps, tau, lambda, lambda_delta),
        Scaling::EpsMultiplied => scaled_symbol(variant, eps, tau, lambda, lambda_delta),
    }
}

/// Dense block of the A′ operator on Fourier mode k, in the Δ basis.
fn aprime_block(
    op: &EllipticOperator,
    eps: Complex64,
    tau: f64,
    scaling: Scaling,
) -> DMatrix<Complex64> {
    let n = op.lambda().len();
    let i = Complex64::new(0.0, 1.0);
    let (s, friction) = match scaling {
        Scaling::Raw => (Complex64::new(1.0, 0.0), i * tau / eps),
        Scaling::EpsMultiplied => (eps, i * tau),
    };
    let ld = op.delta_eigenvalues();
    DMatrix::from_fn(n, n, |a, b| {
        let mut v = s * op.matrix()[(a, b)];
        if a == b {
            v += -s * tau * tau + friction * ld[a];
        }
        v
    })
}

fn is_dense(variant: Variant, op: &EllipticOperator) -> bool {
    variant == Variant::APrime && !op.is_delta_diagonal()
}

/// Applies the model's linear operator; the result uses the input's basis.
pub fn apply_linear(
    variant: Variant,
    omega: &Frequency,
    op: &EllipticOperator,
    eps: Complex64,
    u: &SpectralField,
    scaling: Scaling,
) -> Result<SpectralField> {
    require_eps(variant, eps)?;
    let tag = u.basis_tag();
    let disc = u.disc().clone();
    if is_dense(variant, op) {
        let ud = op.to_delta_basis(u);
        let mut out = ud.clone();
        let n = disc.n_x();
        for (idx, k) in disc.modes().iter().enumerate() {
            let row = ud.row(idx);
            if row.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let m = aprime_block(op, eps, 2.0 * PI * omega.dot(k), scaling);
            let v = nalgebra::DVector::from_column_slice(row);
            let r = m * v;
            out.row_mut(idx).copy_from_slice(&r.as_slice()[..n]);
        }
        return Ok(restore(op, out, tag));
    }
    let ul = op.to_l_basis(u);
    let lam = op.lambda();
    let ld = op.delta_eigenvalues();
    let out = ul.map_modes(|k, n, c| {
        c * scaled_or_raw(
            variant,
            scaling,
            eps,
            2.0 * PI * omega.dot(k),
            lam[n],
            ld[n],
        )
    });
    Ok(restore(op, out, tag))
}

fn restore(op: &EllipticOperator, u: SpectralField, tag: BasisTag) -> SpectralField {
    match tag {
        BasisTag::DeltaBasis => op.to_delta_basis(&u),
        BasisTag::LBasis => op.to_l_basis(&u),
    }
}

/// Solves the model's linear equation mode by mode (block by block for a
/// non-commuting A′), refusing multipliers below `floor`.
pub fn invert_linear(
    variant: Variant,
    omega: &Frequency,
    op: &EllipticOperator,
    eps: Complex64,
    u: &SpectralField,
    floor: f64,
) -> Result<SpectralField> {
    invert_linear_scaled(variant, omega, op, eps, u, floor, Scaling::Raw)
}

pub fn invert_linear_scaled(
    variant: Variant,
    omega: &Frequency,
    op: &EllipticOperator,
    eps: Complex64,
    u: &SpectralField,
    floor: f64,
    scaling: Scaling,
) -> Result<SpectralField> {
    require_eps(variant, eps)?;
    let tag = u.basis_tag();
    let disc = u.disc().clone();
    if is_dense(variant, op) {
        let ud = op.to_delta_basis(u);
        let mut out = ud.clone();
        for (idx, k) in disc.modes().iter().enumerate() {
            let m = aprime_block(op, eps, 2.0 * PI * omega.dot(k), scaling);
            let lu = m.lu();
            let diag = lu.u().diagonal();
            if let Some((n, d)) = diag
                .iter()
                .enumerate()
                .map(|(n, d)| (n, d.norm()))
                .find(|(_, d)| !(*d >= floor))
            {
                return Err(Error::MultiplierUnderflow {
                    k: k.clone(),
                    n,
                    modulus: d,
                });
            }
            let row = ud.row(idx);
            if row.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let v = nalgebra::DVector::from_column_slice(row);
            let sol = lu
                .solve(&v)
                .ok_or_else(|| Error::SingularJacobian(format!("A′ block at k = {k:?}")))?;
            out.row_mut(idx).copy_from_slice(sol.as_slice());
        }
        return Ok(restore(op, out, tag));
    }
    let ul = op.to_l_basis(u);
    let lam = op.lambda();
    let ld = op.delta_eigenvalues();
    let nx = disc.n_x();
    let mut out = ul.clone();
    for (idx, k) in disc.modes().iter().enumerate() {
        let tau = 2.0 * PI * omega.dot(k);
        for n in 0..nx {
            let m = scaled_or_raw(variant, scaling, eps, tau, lam[n], ld[n]);
            if !(m.norm() >= floor) {
                return Err(Error::MultiplierUnderflow {
                    k: k.clone(),
                    n,
                    modulus: m.norm(),
                });
            }
            out.row_mut(idx)[n] /= m;
        }
    }
    Ok(restore(op, out, tag))
}

/// sup_{k,n} |multiplier| over the truncation (diagonal models).
pub fn sup_multiplier(
    variant: Variant,
    omega: &Frequency,
    op: &EllipticOperator,
    eps: Complex64,
) -> Result<f64> {
    require_eps(variant, eps)?;
    let disc = op.disc();
    let mut sup: f64 = 0.0;
    for k in disc.modes() {
        for n in 0..disc.n_x() {
            sup = sup.max(multiplier(variant, omega, op, eps, k, n)?.norm());
        }
    }
    Ok(sup)
}

/// Worst cancellation over the truncation.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Conditioning {
    /// min over (k, n) of |a + b| / (|a| + |b|), where a is the static and b
    /// the friction part of the (ε-multiplied for A/A′) symbol.
    pub ratio: f64,
    pub k: Vec<i64>,
    pub n: usize,
}

fn split_symbol(
    variant: Variant,
    eps: Complex64,
    tau: f64,
    lambda: f64,
    lambda_delta: f64,
) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    match variant {
        Variant::A => (eps * (lambda - tau * tau), i * tau),
        Variant::APrime => (eps * (lambda - tau * tau), i * tau * lambda_delta),
        Variant::B => (lambda - eps * eps * tau * tau, i * tau),
        Variant::BPrime => (lambda_delta - eps * eps * tau * tau, i * tau),
    }
}

/// Relative cancellation of the multipliers; near a resonance ε* of model A
/// the ratio behaves like |ε − ε*| / (2|ε*|), for real ε it is at least 1/√2.
pub fn conditioning(
    variant: Variant,
    omega: &Frequency,
    op: &EllipticOperator,
    eps: Complex64,
) -> Result<Conditioning> {
    require_eps(variant, eps)?;
    let disc = op.disc();
    let mut worst = Conditioning {
        ratio: f64::INFINITY,
        k: vec![0; disc.dim()],
        n: 0,
    };
    for k in disc.modes() {
        let tau = 2.0 * PI * omega.dot(k);
        for n in 0..disc.n_x() {
            let (a, b) = split_symbol(variant, eps, tau, op.lambda()[n], op.delta_eigenvalues()[n]);
            let denom = a.norm() + b.norm();
            let ratio = if denom > 0.0 {
                (a + b).norm() / denom
            } else {
                0.0
            };
            if ratio < worst.ratio {
                worst = Conditioning {
                    ratio,
                    k: k.clone(),
                    n,
                };
            }
        }
    }
    Ok(worst)
}
