//! Products, compositions with h, and the small-divisor solve for ω·∇_θ.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{BasisTag, GridField, Profile, SpectralField};
use super::nonlinearity::NonlinearitySpec;
use super::params::Frequency;
use crate::error::{Error, Result};

/// Largest θ-average magnitude accepted by [`solve_omega_grad`].
pub const DEFAULT_AVERAGE_TOL: f64 = 1e-14;
/// Smallest |ω·k| accepted by [`solve_omega_grad`].
pub const DEFAULT_DIVISOR_FLOOR: f64 = 1e-14;

fn require_delta(u: &SpectralField) -> Result<()> {
    if u.basis_tag() != BasisTag::DeltaBasis {
        return Err(Error::Mismatch(
            "pointwise operations need fields in the Δ basis".into(),
        ));
    }
    Ok(())
}

/// Product u·v by oversampled collocation.
pub fn multiply(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_compatible(v)?;
    require_delta(u)?;
    let gu = u.to_grid()?;
    let gv = v.to_grid()?;
    Ok((&gu * &gv).to_spectral())
}

/// Grid samples of c₀(x) + u(θ, x).
pub fn shifted_grid(u: &SpectralField, c0: Option<&Profile>) -> Result<GridField> {
    require_delta(u)?;
    let g = u.to_grid()?;
    Ok(match c0 {
        Some(p) => &g + &GridField::from_profile(p),
        None => g,
    })
}

/// h(c₀ + u, ·).
pub fn compose_h(
    h: &NonlinearitySpec,
    u: &SpectralField,
    c0: Option<&Profile>,
) -> Result<SpectralField> {
    compose_h_derivative(h, 0, u, c0)
}

/// ∂ᵖ_u h(c₀ + u, ·).
pub fn compose_h_derivative(
    h: &NonlinearitySpec,
    order: usize,
    u: &SpectralField,
    c0: Option<&Profile>,
) -> Result<SpectralField> {
    let g = shifted_grid(u, c0)?;
    Ok(g.try_map(|w, x| h.derivative(order, w, x))?.to_spectral())
}

/// ∂ᵖ_u h(c₀ + u, ·) · v.
pub fn compose_h_derivative_times(
    h: &NonlinearitySpec,
    order: usize,
    u: &SpectralField,
    c0: Option<&Profile>,
    v: &SpectralField,
) -> Result<SpectralField> {
    u.check_compatible(v)?;
    let g = shifted_grid(u, c0)?;
    let d = g.try_map(|w, x| h.derivative(order, w, x))?;
    Ok((&d * &v.to_grid()?).to_spectral())
}

/// Taylor coefficients in ε of h(b + Σ_{j≥1} εʲ v_j), evaluated pointwise.
///
/// `base` holds b on the grid and `terms[j-1]` holds v_j. Returns the grid
/// coefficients of ε⁰ … ε^`order`.
pub fn compose_series(
    h: &NonlinearitySpec,
    base: &GridField,
    terms: &[GridField],
    order: usize,
) -> Result<Vec<GridField>> {
    let npts = base.values().len();
    let disc = base.disc().clone();
    let gd = disc.theta_points();
    let pts = disc.basis().points();
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); npts]; order + 1];

    // series[i] = coefficient of εⁱ of V = Σ εʲ v_j at one point
    let mut series = vec![Complex64::new(0.0, 0.0); order + 1];
    let mut power = vec![Complex64::new(0.0, 0.0); order + 1];
    let mut next = vec![Complex64::new(0.0, 0.0); order + 1];
    for idx in 0..npts {
        let x = pts[idx / gd];
        series
            .iter_mut()
            .for_each(|s| *s = Complex64::new(0.0, 0.0));
        for (j, t) in terms.iter().enumerate().take(order) {
            series[j + 1] = t.values()[idx];
        }
        let coeffs = h.taylor(order, base.values()[idx], x)?;

        power.iter_mut().for_each(|p| *p = Complex64::new(0.0, 0.0));
        power[0] = Complex64::new(1.0, 0.0);
        for (p, c) in coeffs.iter().enumerate() {
            if p > 0 {
                // power ← power · V, truncated at `order`; V has no ε⁰ term
                next.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for a in (p - 1)..=order {
                    if power[a] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for b in 1..=(order - a) {
                        next[a + b] += power[a] * series[b];
                    }
                }
                std::mem::swap(&mut power, &mut next);
            }
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for n in p..=order {
                out[n][idx] += c * power[n];
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|values| {
            let mut g = GridField::constant(&disc, Complex64::new(0.0, 0.0));
            g.values_mut().copy_from_slice(&values);
            g
        })
        .collect())
}

fn check_dim(u: &SpectralField, omega: &Frequency) -> Result<()> {
    if u.disc().dim() != omega.dim() {
        return Err(Error::Mismatch(format!(
            "field on a {}-torus, frequency of dimension {}",
            u.disc().dim(),
            omega.dim()
        )));
    }
    Ok(())
}

/// (ω·∇_θ) u: multiplies mode k by 2πi ω·k.
pub fn apply_omega_grad(u: &SpectralField, omega: &Frequency) -> Result<SpectralField> {
    check_dim(u, omega)?;
    Ok(u.map_modes(|k, _, c| c * Complex64::new(0.0, 2.0 * PI * omega.dot(k))))
}

/// Right inverse of ω·∇_θ on zero-average fields.
pub fn solve_omega_grad(rhs: &SpectralField, omega: &Frequency) -> Result<SpectralField> {
    solve_omega_grad_with(rhs, omega, DEFAULT_AVERAGE_TOL, DEFAULT_DIVISOR_FLOOR)
}

pub fn solve_omega_grad_with(
    rhs: &SpectralField,
    omega: &Frequency,
    average_tol: f64,
    divisor_floor: f64,
) -> Result<SpectralField> {
    check_dim(rhs, omega)?;
    let avg = rhs.theta_average().max_abs();
    if avg > average_tol {
        return Err(Error::NonzeroAverage { magnitude: avg });
    }
    let disc = rhs.disc();
    let z = disc.zero_mode();
    for (idx, k) in disc.modes().iter().enumerate() {
        if idx == z {
            continue;
        }
        let d = omega.dot(k);
        if d.abs() < divisor_floor {
            return Err(Error::DivisorUnderflow {
                k: k.clone(),
                divisor: d.abs(),
            });
        }
    }
    let mut out = rhs.map_modes(|k, _, c| {
        let d = omega.dot(k);
        if d == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            c / Complex64::new(0.0, 2.0 * PI * d)
        }
    });
    out.row_mut(z)
        .iter_mut()
        .for_each(|c| *c = Complex64::new(0.0, 0.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::Discretization;
    use crate::spectral::params::{BoundaryCondition, Truncation};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn golden_divisor() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let omega = Frequency::new(vec![phi, 1.0]).unwrap();
        let disc = Discretization::new(
            2,
            Truncation::new(2, 1, BoundaryCondition::Periodic).unwrap(),
        )
        .unwrap();
        let rhs = SpectralField::single_mode(&disc, &[1, -2], 0, c(1.0, 0.0)).unwrap();
        let u = solve_omega_grad(&rhs, &omega).unwrap();
        // φ − 2 = −0.381966011250105151795…
        let expected = c(1.0, 0.0) / c(0.0, 2.0 * PI * -0.381_966_011_250_105_2);
        assert!((u.get(&[1, -2], 0).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn nonzero_average_rejected() {
        let disc = Discretization::new(
            1,
            Truncation::new(2, 2, BoundaryCondition::Periodic).unwrap(),
        )
        .unwrap();
        let omega = Frequency::new(vec![1.0]).unwrap();
        let rhs = SpectralField::single_mode(&disc, &[0], 0, c(1.0, 0.0)).unwrap();
        assert!(matches!(
            solve_omega_grad(&rhs, &omega),
            Err(Error::NonzeroAverage { .. })
        ));
    }

    #[test]
    fn series_composition_of_cube() {
        // h(u) = u³ around b = 0 with V = ε v: coefficient of ε³ is v³.
        let disc = Discretization::new(
            1,
            Truncation::new(2, 2, BoundaryCondition::Periodic).unwrap(),
        )
        .unwrap();
        let h = NonlinearitySpec::polynomial(&[0.0, 0.0, 0.0, 1.0]);
        let v = SpectralField::single_mode(&disc, &[1], 0, c(0.5, 0.1)).unwrap();
        let base = GridField::constant(&disc, c(0.0, 0.0));
        let gv = v.to_grid().unwrap();
        let coeffs = compose_series(&h, &base, std::slice::from_ref(&gv), 3).unwrap();
        let cube = compose_h(&h, &v, None).unwrap();
        assert!(coeffs[3].to_spectral().max_diff(&cube) < 1e-14);
        assert!(coeffs[1].max_abs() < 1e-15 && coeffs[2].max_abs() < 1e-15);
    }
}
