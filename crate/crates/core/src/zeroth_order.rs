//! Order-zero problems: the elliptic equation for c₀ (models A, A′), the
//! contraction for U₀ (model B) and the diagonal solve for U₀ (model B′).

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::linear::{apply_linear, invert_linear, Scaling};
use crate::operators::{EllipticOperator, ModelSpec, SpectrumReport, Variant};
use crate::spectral::{Discretization, NonlinearitySpec, NormParams, Profile, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-12,
            max_iter: 60,
            max_halvings: 40,
        }
    }
}

/// Convergence record of a c₀ solve.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct C0Report {
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub spectrum: SpectrumReport,
}

#[derive(Clone, Debug)]
pub struct C0Solution {
    pub c0: Profile,
    /// ℒ = −Δ + h′(c₀, ·) at the solution (H2 not asserted).
    pub op: EllipticOperator,
    pub report: C0Report,
}

/// Projection of h(c(x), x) onto the spatial modes.
fn h_profile(h: &NonlinearitySpec, c: &Profile, order: usize) -> Result<Vec<Complex64>> {
    let disc = c.disc();
    let pts = disc.basis().points();
    let vals = c
        .point_values()
        .iter()
        .zip(pts)
        .map(|(v, &x)| h.derivative(order, *v, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(Profile::from_point_values(disc, &vals).coeffs().to_vec())
}

/// −Δc + h(c, ·) − ⟨f⟩ in Δ coordinates.
pub fn c0_residual(h: &NonlinearitySpec, c: &Profile, f_avg: &Profile) -> Result<Profile> {
    let hc = h_profile(h, c, 0)?;
    let ld = c.disc().basis().eigenvalues();
    let coeffs = c
        .coeffs()
        .iter()
        .zip(ld)
        .zip(hc)
        .zip(f_avg.coeffs())
        .map(|(((ci, l), hi), fi)| ci * *l + hi - fi)
        .collect();
    Profile::from_coeffs(c.disc(), coeffs)
}

fn jacobian(h: &NonlinearitySpec, c: &Profile) -> Result<DMatrix<Complex64>> {
    let disc = c.disc();
    let basis = disc.basis();
    let pts = basis.points();
    let pot = c
        .point_values()
        .iter()
        .zip(pts)
        .map(|(v, &x)| h.derivative(1, *v, x))
        .collect::<Result<Vec<_>>>()?;
    let n = basis.n_modes();
    Ok(DMatrix::from_fn(n, n, |a, b| {
        let s: Complex64 = basis
            .mode(a)
            .iter()
            .zip(basis.mode(b))
            .zip(basis.weights())
            .zip(&pot)
            .map(|(((p, q), w), v)| v * (p * q * w))
            .sum();
        if a == b {
            s + basis.eigenvalues()[a]
        } else {
            s
        }
    }))
}

fn require_c0_model(model: &ModelSpec) -> Result<()> {
    if !model.variant().has_c0() {
        return Err(Error::Config(format!(
            "c₀ is only defined for models A and A′ (got {})",
            model.variant()
        )));
    }
    Ok(())
}

/// Damped Newton for −Δc₀ + h(c₀, ·) = ⟨f⟩.
pub fn solve_c0(
    model: &ModelSpec,
    f_avg: &Profile,
    initial_guess: &Profile,
    cfg: &NewtonConfig,
) -> Result<C0Solution> {
    require_c0_model(model)?;
    solve_c0_for(model.h(), f_avg, initial_guess, cfg)
}

/// The c₀ Newton solve for an explicit nonlinearity.
pub fn solve_c0_for(
    h: &NonlinearitySpec,
    f_avg: &Profile,
    initial_guess: &Profile,
    cfg: &NewtonConfig,
) -> Result<C0Solution> {
    let mut c = initial_guess.clone();
    let mut r = c0_residual(h, &c, f_avg)?;
    let mut res = r.l2();
    let mut history = vec![res];
    let mut iterations = 0;
    while res >= cfg.tol {
        if iterations >= cfg.max_iter {
            return Err(Error::NewtonDivergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let jac = jacobian(h, &c)?;
        let scale = jac.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let lu = jac.lu();
        let min_pivot = lu
            .u()
            .diagonal()
            .iter()
            .map(|d| d.norm())
            .fold(f64::INFINITY, f64::min);
        if !(min_pivot > 1e-14 * scale) {
            return Err(Error::SingularJacobian(format!(
                "c₀ Jacobian pivot {min_pivot:e} at iteration {iterations}"
            )));
        }
        let rhs = DVector::from_iterator(r.coeffs().len(), r.coeffs().iter().map(|v| -v));
        let step = lu
            .solve(&rhs)
            .ok_or_else(|| Error::SingularJacobian("c₀ Newton step".into()))?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial_coeffs = c
                .coeffs()
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + s * t)
                .collect();
            let trial = Profile::from_coeffs(c.disc(), trial_coeffs)?;
            if let Ok(tr) = c0_residual(h, &trial, f_avg) {
                let tres = tr.l2();
                if tres.is_finite() && tres < res {
                    accepted = Some((trial, tr, tres));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, tr, tres)) => {
                c = trial;
                r = tr;
                res = tres;
                history.push(res);
            }
            None => {
                return Err(Error::NewtonDivergence {
                    iterations,
                    residual: res,
                })
            }
        }
    }
    let op = EllipticOperator::assemble(Some(&c), h, c.disc())?;
    let report = C0Report {
        iterations,
        residual: res,
        residual_history: history,
        spectrum: op.spectrum_report(4),
    };
    Ok(C0Solution { c0: c, op, report })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultistartConfig {
    pub n_starts: usize,
    pub seed: u64,
    /// Random start coefficient n is drawn from ±amplitude/n.
    pub amplitude: f64,
    pub dedup_tol: f64,
    pub newton: NewtonConfig,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        MultistartConfig {
            n_starts: 16,
            seed: 0,
            amplitude: 2.0,
            dedup_tol: 1e-6,
            newton: NewtonConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MultistartResult {
    pub solutions: Vec<C0Solution>,
    pub failed_starts: usize,
}

/// Random real starting profiles; the first start is always zero.
pub fn multistart_starts(disc: &Arc<Discretization>, cfg: &MultistartConfig) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n_starts)
        .map(|s| {
            if s == 0 {
                return Profile::zeros(disc);
            }
            let coeffs = (0..disc.n_x())
                .map(|n| {
                    let a = cfg.amplitude / (n + 1) as f64;
                    Complex64::new(rng.random_range(-a..=a), 0.0)
                })
                .collect();
            Profile::from_coeffs(disc, coeffs).expect("sized to the truncation")
        })
        .collect()
}

/// Newton from many starts, deduplicated by coefficient distance.
pub fn multistart_c0(
    model: &ModelSpec,
    f_avg: &Profile,
    cfg: &MultistartConfig,
) -> Result<MultistartResult> {
    require_c0_model(model)?;
    let starts = multistart_starts(model.disc(), cfg);
    Ok(multistart_from(model.h(), f_avg, &starts, cfg))
}

/// Newton from the given starts, deduplicated in start order.
pub fn multistart_from(
    h: &NonlinearitySpec,
    f_avg: &Profile,
    starts: &[Profile],
    cfg: &MultistartConfig,
) -> MultistartResult {
    let outcomes: Vec<Result<C0Solution>> = starts
        .par_iter()
        .map(|s| solve_c0_for(h, f_avg, s, &cfg.newton))
        .collect();
    let mut solutions: Vec<C0Solution> = Vec::new();
    let mut failed_starts = 0;
    for o in outcomes {
        match o {
            Ok(sol) => {
                let dup = solutions.iter().any(|other| {
                    let d: f64 = other
                        .c0
                        .coeffs()
                        .iter()
                        .zip(sol.c0.coeffs())
                        .map(|(a, b)| (a - b).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    d <= cfg.dedup_tol
                });
                if !dup {
                    solutions.push(sol);
                }
            }
            Err(_) => failed_starts += 1,
        }
    }
    MultistartResult {
        solutions,
        failed_starts,
    }
}

/// CSV of spatial coefficients: one row per (solution, n).
pub fn write_c0_csv<W: Write>(mut w: W, solutions: &[C0Solution]) -> Result<()> {
    writeln!(w, "solution,n,re,im,lambda1")?;
    for (i, s) in solutions.iter().enumerate() {
        for (n, c) in s.c0.coeffs().iter().enumerate() {
            writeln!(
                w,
                "{i},{n},{:.17e},{:.17e},{:.17e}",
                c.re, c.im, s.report.spectrum.lambda1
            )?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct U0Config {
    /// Radius of the ball the iterates must stay in.
    pub alpha0: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub norm: NormParams,
}

impl Default for U0Config {
    fn default() -> Self {
        U0Config {
            alpha0: 1.0,
            tol: 1e-12,
            max_iter: 200,
            norm: NormParams::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct U0Report {
    pub iterations: usize,
    pub final_step: f64,
    /// Norm of (ω·∇)U₀ − ΔU₀ + h(U₀) − f.
    pub residual: f64,
    pub contraction_ratio: Option<f64>,
    pub norm: f64,
    pub spectrum: SpectrumReport,
}

#[derive(Clone, Debug)]
pub struct U0Solution {
    pub u0: SpectralField,
    /// ℒ = −Δ + h′(0, ·).
    pub op: EllipticOperator,
    pub report: U0Report,
}

/// G(U) = h(U) − h′(0, ·)U for model B.
pub fn model_b_remainder(h: &NonlinearitySpec, u: &SpectralField) -> Result<SpectralField> {
    let g = u.to_grid()?;
    let out = g.try_map(|v, x| Ok(h.eval(v, x)? - h.derivative(1, ZERO, x)? * v))?;
    Ok(out.to_spectral())
}

/// (ω·∇)U − ΔU + h(U) − f.
pub fn model_b_zeroth_residual(
    model: &ModelSpec,
    op: &EllipticOperator,
    u: &SpectralField,
) -> Result<SpectralField> {
    let lin = apply_linear(Variant::B, model.omega(), op, ZERO, u, Scaling::Raw)?;
    let g = model_b_remainder(model.h(), u)?;
    Ok(&(&lin + &g) - model.forcing())
}

/// Picard iteration U ← Γ⁻¹(f − G(U)) with Γ = ω·∇ + ℒ.
#[allow(non_snake_case)]
pub fn solve_U0_modelB(model: &ModelSpec, cfg: &U0Config) -> Result<U0Solution> {
    if model.variant() != Variant::B {
        return Err(Error::Config("U₀ contraction applies to model B".into()));
    }
    if !model.h().vanishes_at_zero() {
        return Err(Error::Precondition(
            "model B zeroth order needs h(0, x) = 0".into(),
        ));
    }
    let op = EllipticOperator::build_L(None, model.h(), model.disc())?;
    let omega = model.omega();
    let f = model.forcing();
    let solve = |rhs: &SpectralField| {
        invert_linear(
            Variant::B,
            omega,
            &op,
            ZERO,
            rhs,
            crate::operators::DEFAULT_MULTIPLIER_FLOOR,
        )
    };
    let mut u = SpectralField::zeros(model.disc());
    let mut steps: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        if iterations >= cfg.max_iter {
            return Err(Error::MaxIterations {
                iterations,
                step: steps.last().copied().unwrap_or(f64::NAN),
            });
        }
        iterations += 1;
        let g = model_b_remainder(model.h(), &u)?;
        let next = solve(&(f - &g))?;
        let step = op.norm(&(&next - &u), &cfg.norm)?;
        let size = op.norm(&next, &cfg.norm)?;
        if size > cfg.alpha0 {
            return Err(Error::BallExit {
                iterations,
                norm: size,
                radius: cfg.alpha0,
            });
        }
        u = next;
        steps.push(step);
        if step < cfg.tol {
            break;
        }
    }
    let residual = op.norm(&model_b_zeroth_residual(model, &op, &u)?, &cfg.norm)?;
    let report = U0Report {
        iterations,
        final_step: *steps.last().expect("at least one step"),
        residual,
        contraction_ratio: crate::fixedpoint::tail_ratio(&steps, cfg.tol),
        norm: op.norm(&u, &cfg.norm)?,
        spectrum: op.spectrum_report(4),
    };
    Ok(U0Solution { u0: u, op, report })
}

/// Ũ₀ = Γ⁻¹f with Γ = ω·∇ − Δ, including the k = 0 modes.
#[allow(non_snake_case)]
pub fn solve_U0_modelBprime(model: &ModelSpec) -> Result<SpectralField> {
    if model.variant() != Variant::BPrime {
        return Err(Error::Config(
            "the diagonal U₀ solve applies to model B′".into(),
        ));
    }
    let op = EllipticOperator::minus_delta(model.disc());
    if !(op.lambda1() > 0.0) {
        return Err(Error::H2PrimeViolation {
            lambda1: op.lambda1(),
            bc: model.bc().to_string(),
        });
    }
    invert_linear(
        Variant::BPrime,
        model.omega(),
        &op,
        ZERO,
        model.forcing(),
        crate::operators::DEFAULT_MULTIPLIER_FLOOR,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{BoundaryCondition, Frequency, Truncation};
    use std::f64::consts::PI;

    fn disc() -> Arc<Discretization> {
        Discretization::new(
            1,
            Truncation::new(3, 8, BoundaryCondition::Dirichlet).unwrap(),
        )
        .unwrap()
    }

    fn model(variant: Variant, h: NonlinearitySpec, f: SpectralField) -> ModelSpec {
        ModelSpec::new(variant, h, f, Frequency::new(vec![1.0]).unwrap()).unwrap()
    }

    #[test]
    fn linear_c0_is_diagonal_solve() {
        let d = disc();
        let h = NonlinearitySpec::polynomial(&[0.0, 1.0]);
        let f_avg = Profile::project(&d, |x| Complex64::new((PI * x).sin(), 0.0));
        let m = model(Variant::A, h, SpectralField::from_profile(&f_avg));
        let sol = solve_c0(&m, &f_avg, &Profile::zeros(&d), &NewtonConfig::default()).unwrap();
        // sin(πx) = Φ₁/√2
        let expected = 1.0 / (2f64.sqrt() * (PI * PI + 1.0));
        assert!((sol.c0.coeffs()[0].re - expected).abs() < 1e-13);
        assert!(sol.c0.coeffs()[1..].iter().all(|c| c.norm() < 1e-13));
        assert!(sol.report.spectrum.h2_holds);
    }

    #[test]
    fn zero_forcing_gives_zero_c0() {
        let d = disc();
        let h = NonlinearitySpec::polynomial(&[0.0, 1.0, 0.0, 1.0]);
        let m = model(Variant::A, h, SpectralField::zeros(&d));
        let sol = solve_c0(
            &m,
            &Profile::zeros(&d),
            &Profile::zeros(&d),
            &NewtonConfig::default(),
        )
        .unwrap();
        assert_eq!(sol.report.iterations, 0);
        assert_eq!(sol.c0.max_abs(), 0.0);
    }

    #[test]
    fn duplicate_starts_collapse() {
        let d = disc();
        let h = NonlinearitySpec::polynomial(&[0.0, 1.0, 0.0, 1.0]);
        let f_avg = Profile::project(&d, |x| Complex64::new(0.1 * (PI * x).sin(), 0.0));
        let starts = vec![Profile::zeros(&d), Profile::zeros(&d)];
        let r = multistart_from(&h, &f_avg, &starts, &MultistartConfig::default());
        assert_eq!(r.solutions.len(), 1);
    }

    #[test]
    fn model_b_linear_h_is_one_division() {
        let d = disc();
        let h = NonlinearitySpec::polynomial(&[0.0, 2.0]);
        let f = SpectralField::single_mode(&d, &[1], 0, Complex64::new(0.1, 0.0)).unwrap();
        let m = model(Variant::B, h, f);
        let sol = solve_U0_modelB(&m, &U0Config::default()).unwrap();
        let expected = Complex64::new(0.1, 0.0) / Complex64::new(PI * PI + 2.0, 2.0 * PI);
        assert!((sol.u0.get(&[1], 0).unwrap() - expected).norm() < 1e-15);
        assert!(sol.report.iterations <= 2);
    }

    #[test]
    fn model_bprime_worked_values() {
        let d = disc();
        let h = NonlinearitySpec::polynomial(&[0.0, 1.0, 0.0, 1.0]);
        let mut f = SpectralField::single_mode(&d, &[1], 0, Complex64::new(1.0, 0.0)).unwrap();
        f.set(&[0], 0, Complex64::new(1.0, 0.0)).unwrap();
        let m = model(Variant::BPrime, h, f);
        let u0 = solve_U0_modelBprime(&m).unwrap();
        let a = u0.get(&[1], 0).unwrap();
        assert!((a - Complex64::new(1.0, 0.0) / Complex64::new(PI * PI, 2.0 * PI)).norm() < 1e-15);
        let b = u0.get(&[0], 0).unwrap();
        assert!((b.re - 1.0 / (PI * PI)).abs() < 1e-15);
    }
}
