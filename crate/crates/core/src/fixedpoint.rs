//! Picard iteration for the full hull equation of each model.
//!
//! Models A/A′ iterate 𝒯(U) = N_ε⁻¹(f − ⟨f⟩ − G(U)) with
//! G(U) = h(c₀+U) − h(c₀) − h′(c₀)U; model B iterates
//! 𝒯(U) = −Λ_ε⁻¹(H(U) − f) with H(U) = h(U) − h′(0)U; model B′ iterates
//! 𝒯(U) = −Λ̃_ε⁻¹(εh(U) − f).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::linear::{apply_linear, conditioning, invert_linear, Conditioning, Scaling};
use crate::operators::{
    DomainSpec, EllipticOperator, ModelSpec, Variant, DEFAULT_MULTIPLIER_FLOOR,
};
use crate::spectral::{BasisTag, NormParams, Profile, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default lower bound on the cancellation ratio of the multipliers.
pub const DEFAULT_CONDITIONING_GUARD: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates with norm above α₀ abort the run.
    pub alpha0: f64,
    /// Radius of the ball around the start; `None` means 100σ (or 100δ).
    pub beta: Option<f64>,
    pub norm: NormParams,
    pub multiplier_floor: f64,
    /// Minimum cancellation ratio (see [`conditioning`]); zero disables it.
    pub conditioning_guard: f64,
    pub domain: Option<DomainSpec>,
    /// Refuse ε outside `domain` instead of recording a warning.
    pub strict: bool,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            tol: 1e-12,
            max_iter: 200,
            alpha0: 10.0,
            beta: None,
            norm: NormParams::default(),
            multiplier_floor: DEFAULT_MULTIPLIER_FLOOR,
            conditioning_guard: DEFAULT_CONDITIONING_GUARD,
            domain: None,
            strict: true,
        }
    }
}

impl FixedPointConfig {
    pub fn with_domain(mut self, domain: DomainSpec) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn explore(mut self) -> Self {
        self.strict = false;
        self
    }

    /// β, defaulting to 100 times the domain scale.
    pub fn beta(&self) -> Option<f64> {
        self.beta.or(match self.domain {
            Some(DomainSpec::Parabolic { sigma, .. }) => Some(100.0 * sigma),
            Some(DomainSpec::Sector { delta }) => Some(100.0 * delta),
            None => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tol must be positive (got {})",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if let Some(beta) = self.beta() {
            if !(beta > 0.0 && beta <= self.alpha0) {
                return Err(Error::Config(format!(
                    "need 0 < β ≤ α₀ (β = {beta}, α₀ = {})",
                    self.alpha0
                )));
            }
        }
        Ok(())
    }
}

/// Hull residual norms; `value` is the ε-multiplied form for A/A′ when
/// |ε| < 1 and the raw form otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullResidual {
    pub value: f64,
    pub raw: f64,
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub eps: Complex64,
    pub iterations: usize,
    pub final_step: f64,
    pub residual: HullResidual,
    pub contraction_ratio: Option<f64>,
    pub steps: Vec<f64>,
    pub conditioning: Conditioning,
    /// Largest distance of an iterate from the start.
    pub max_distance_from_start: f64,
    pub stayed_in_start_ball: Option<bool>,
    pub in_domain: Option<bool>,
    pub warnings: Vec<String>,
}

/// A hull equation with its linear operator (and c₀ for A/A′).
#[derive(Clone, Debug)]
pub struct HullSystem {
    model: ModelSpec,
    op: EllipticOperator,
    c0: Option<Profile>,
    rhs: SpectralField,
}

impl HullSystem {
    /// `c0` is required for A/A′ and ignored otherwise. For A/A′ the
    /// operator is ℒ = −Δ + h′(c₀), for B it is −Δ + h′(0), for B′ it is −Δ.
    pub fn new(model: &ModelSpec, c0: Option<&Profile>) -> Result<Self> {
        let disc = model.disc();
        let variant = model.variant();
        let (op, c0) = match variant {
            Variant::A | Variant::APrime => {
                let c0 = c0.ok_or_else(|| Error::Config(format!("model {variant} needs c₀")))?;
                (
                    EllipticOperator::build_L(Some(c0), model.h(), disc)?,
                    Some(c0.clone()),
                )
            }
            Variant::B => (EllipticOperator::build_L(None, model.h(), disc)?, None),
            Variant::BPrime => {
                let op = EllipticOperator::minus_delta(disc);
                if !(op.lambda1() > 0.0) {
                    return Err(Error::H2PrimeViolation {
                        lambda1: op.lambda1(),
                        bc: model.bc().to_string(),
                    });
                }
                (op, None)
            }
        };
        let rhs = if variant.has_c0() {
            model.forcing().oscillating_part()
        } else {
            model.forcing().clone()
        };
        Ok(HullSystem {
            model: model.clone(),
            op,
            c0,
            rhs,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn op(&self) -> &EllipticOperator {
        &self.op
    }

    pub fn c0(&self) -> Option<&Profile> {
        self.c0.as_ref()
    }

    pub fn variant(&self) -> Variant {
        self.model.variant()
    }

    /// f − ⟨f⟩ for A/A′, f for B/B′.
    pub fn rhs(&self) -> &SpectralField {
        &self.rhs
    }

    /// G(U), H(U) or h(U) according to the model (without the ε of B′).
    pub fn nonlinear(&self, u: &SpectralField) -> Result<SpectralField> {
        let h = self.model.h();
        let g = u.to_grid()?;
        let out = match self.variant() {
            Variant::A | Variant::APrime => {
                let c0 = self
                    .c0
                    .as_ref()
                    .expect("models A/A′ always carry c₀")
                    .point_values();
                let nx = self.model.disc().basis().n_points();
                let gd = self.model.disc().theta_points();
                let mut out = g.clone();
                for (idx, v) in g.values().iter().enumerate() {
                    let xi = idx / gd;
                    debug_assert!(xi < nx);
                    let x = self.model.disc().basis().points()[xi];
                    let c = c0[xi];
                    out.values_mut()[idx] =
                        h.eval(c + v, x)? - h.eval(c, x)? - h.derivative(1, c, x)? * v;
                }
                out
            }
            Variant::B => g.try_map(|v, x| Ok(h.eval(v, x)? - h.derivative(1, ZERO, x)? * v))?,
            Variant::BPrime => g.try_map(|v, x| h.eval(v, x))?,
        };
        Ok(out.to_spectral())
    }

    /// The fixed-point map 𝒯.
    pub fn map(&self, eps: Complex64, u: &SpectralField, floor: f64) -> Result<SpectralField> {
        let omega = self.model.omega();
        let variant = self.variant();
        let nl = self.nonlinear(u)?;
        match variant {
            Variant::A | Variant::APrime => {
                invert_linear(variant, omega, &self.op, eps, &(&self.rhs - &nl), floor)
            }
            Variant::B => Ok(-&invert_linear(
                variant,
                omega,
                &self.op,
                eps,
                &(&nl - &self.rhs),
                floor,
            )?),
            Variant::BPrime => Ok(-&invert_linear(
                variant,
                omega,
                &self.op,
                eps,
                &(&(&nl * eps) - &self.rhs),
                floor,
            )?),
        }
    }

    /// The hull residual F_ε(U), in raw or ε-multiplied form.
    pub fn residual_field(
        &self,
        eps: Complex64,
        u: &SpectralField,
        scaling: Scaling,
    ) -> Result<SpectralField> {
        let omega = self.model.omega();
        let variant = self.variant();
        let lin = apply_linear(variant, omega, &self.op, eps, u, scaling)?;
        let nl = self.nonlinear(u)?;
        let rest = match variant {
            Variant::A | Variant::APrime => &nl - &self.rhs,
            Variant::B => &nl - &self.rhs,
            Variant::BPrime => &(&nl * eps) - &self.rhs,
        };
        let rest = match (variant.has_c0(), scaling) {
            (true, Scaling::EpsMultiplied) => &rest * eps,
            _ => rest,
        };
        Ok(&lin + &rest)
    }

    pub fn norm(&self, u: &SpectralField, params: &NormParams) -> Result<f64> {
        self.op.norm(u, params)
    }

    /// ‖F_ε(U)‖ in both forms.
    pub fn hull_residual(
        &self,
        eps: Complex64,
        u: &SpectralField,
        params: &NormParams,
    ) -> Result<HullResidual> {
        let raw = self.norm(&self.residual_field(eps, u, Scaling::Raw)?, params)?;
        let scaled = if self.variant().has_c0() {
            self.norm(
                &self.residual_field(eps, u, Scaling::EpsMultiplied)?,
                params,
            )?
        } else {
            raw
        };
        let value = if self.variant().has_c0() && eps.norm() < 1.0 {
            scaled
        } else {
            raw
        };
        Ok(HullResidual { value, raw, scaled })
    }
}

/// Median of successive step ratios over the steps above 100·tol.
pub fn tail_ratio(steps: &[f64], tol: f64) -> Option<f64> {
    let mut ratios: Vec<f64> = steps
        .windows(2)
        .filter(|w| w[0] > 100.0 * tol && w[1] > 100.0 * tol)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    let m = ratios.len();
    Some(if m % 2 == 1 {
        ratios[m / 2]
    } else {
        0.5 * (ratios[m / 2 - 1] + ratios[m / 2])
    })
}

/// Iterates 𝒯 from `start` until successive iterates differ by less than
/// `cfg.tol` in the weighted norm.
pub fn picard_solve(
    system: &HullSystem,
    eps: Complex64,
    start: &SpectralField,
    cfg: &FixedPointConfig,
) -> Result<(SpectralField, PicardReport)> {
    cfg.validate()?;
    start.check_compatible(system.model.forcing())?;
    if start.basis_tag() != BasisTag::DeltaBasis {
        return Err(Error::Mismatch(
            "Picard start must be in the Δ basis".into(),
        ));
    }
    let mut warnings = Vec::new();
    let in_domain = cfg.domain.map(|d| d.contains(eps));
    if in_domain == Some(false) {
        let domain = cfg.domain.expect("checked above");
        if cfg.strict {
            domain.require(eps)?;
        }
        warnings.push(format!("ε = {eps} lies outside {domain}"));
    }
    let cond = conditioning(system.variant(), system.model.omega(), &system.op, eps)?;
    if cond.ratio < cfg.conditioning_guard {
        return Err(Error::ResonanceProximity {
            k: cond.k,
            n: cond.n,
            ratio: cond.ratio,
            guard: cfg.conditioning_guard,
        });
    }

    let mut u = start.clone();
    let mut steps = Vec::new();
    let mut max_dist: f64 = 0.0;
    let mut iterations = 0;
    loop {
        if iterations >= cfg.max_iter {
            return Err(Error::MaxIterations {
                iterations,
                step: steps.last().copied().unwrap_or(f64::NAN),
            });
        }
        iterations += 1;
        let next = system.map(eps, &u, cfg.multiplier_floor)?;
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("Picard iterate {iterations}")));
        }
        let size = system.norm(&next, &cfg.norm)?;
        if !(size <= cfg.alpha0) {
            return Err(Error::BallExit {
                iterations,
                norm: size,
                radius: cfg.alpha0,
            });
        }
        let step = system.norm(&(&next - &u), &cfg.norm)?;
        max_dist = max_dist.max(system.norm(&(&next - start), &cfg.norm)?);
        u = next;
        steps.push(step);
        if step < cfg.tol {
            break;
        }
    }
    let residual = system.hull_residual(eps, &u, &cfg.norm)?;
    let report = PicardReport {
        eps,
        iterations,
        final_step: *steps.last().expect("at least one iteration"),
        residual,
        contraction_ratio: tail_ratio(&steps, cfg.tol),
        steps,
        conditioning: cond,
        max_distance_from_start: max_dist,
        stayed_in_start_ball: cfg.beta().map(|b| max_dist <= b),
        in_domain,
        warnings,
    };
    Ok((u, report))
}

/// Random field of weighted norm `radius` supported on the modes where
/// `center` or the forcing is nonzero, plus their conjugates.
fn random_direction(
    system: &HullSystem,
    center: &SpectralField,
    radius: f64,
    params: &NormParams,
    rng: &mut ChaCha8Rng,
) -> Result<SpectralField> {
    let disc = center.disc();
    let mut v = SpectralField::zeros(disc);
    for (c, slot) in center.coeffs().iter().zip(v.coeffs_mut()) {
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        // decay with the magnitude pattern of the center keeps the norm finite-sized
        let weight = if c.norm() > 0.0 { 1.0 } else { 1e-3 };
        *slot = Complex64::new(re, im) * weight;
    }
    let n = system.norm(&v, params)?;
    if n == 0.0 {
        return Ok(v);
    }
    Ok(&v * (radius / n))
}

/// max ‖𝒯U − 𝒯V‖ / ‖U − V‖ over `n_pairs` random pairs in the ball of
/// radius `radius` around `center`.
pub fn contraction_estimate(
    system: &HullSystem,
    eps: Complex64,
    center: &SpectralField,
    radius: f64,
    n_pairs: usize,
    seed: u64,
    params: &NormParams,
) -> Result<f64> {
    if n_pairs == 0 {
        return Err(Error::Config(
            "contraction estimate needs at least one pair".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_pairs {
        let s: f64 = rng.random_range(0.0..1.0);
        let t: f64 = rng.random_range(0.0..1.0);
        let a = center + &random_direction(system, center, s * radius, params, &mut rng)?;
        let b = center + &random_direction(system, center, t * radius, params, &mut rng)?;
        let d = system.norm(&(&a - &b), params)?;
        if d == 0.0 {
            continue;
        }
        let ta = system.map(eps, &a, 0.0)?;
        let tb = system.map(eps, &b, 0.0)?;
        worst = worst.max(system.norm(&(&ta - &tb), params)? / d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ModelSpec;
    use crate::spectral::{
        BoundaryCondition, Discretization, Frequency, NonlinearitySpec, Truncation,
    };
    use crate::zeroth_order::{solve_c0, NewtonConfig};
    use std::f64::consts::PI;

    fn benchmark(variant: Variant, coeffs: &[f64]) -> ModelSpec {
        let disc = Discretization::new(
            1,
            Truncation::new(6, 6, BoundaryCondition::Dirichlet).unwrap(),
        )
        .unwrap();
        let mut f = SpectralField::zeros(&disc);
        f.set(&[1], 0, Complex64::new(0.05, 0.0)).unwrap();
        f.set(&[-1], 0, Complex64::new(0.05, 0.0)).unwrap();
        ModelSpec::new(
            variant,
            NonlinearitySpec::polynomial(coeffs),
            f,
            Frequency::new(vec![1.0]).unwrap(),
        )
        .unwrap()
    }

    fn system(model: &ModelSpec) -> HullSystem {
        if model.variant().has_c0() {
            let avg = model.forcing().theta_average();
            let c0 = solve_c0(
                model,
                &avg,
                &Profile::zeros(model.disc()),
                &NewtonConfig::default(),
            )
            .unwrap();
            HullSystem::new(model, Some(&c0.c0)).unwrap()
        } else {
            HullSystem::new(model, None).unwrap()
        }
    }

    #[test]
    fn tail_ratio_of_geometric_sequence() {
        let steps: Vec<f64> = (0..10).map(|i| 0.5f64.powi(i)).collect();
        assert!((tail_ratio(&steps, 1e-12).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(tail_ratio(&[1.0], 1e-12), None);
    }

    #[test]
    fn linear_h_converges_in_one_step() {
        let model = benchmark(Variant::A, &[0.0, 1.0]);
        let sys = system(&model);
        let eps = Complex64::new(0.05, 0.0);
        let cfg = FixedPointConfig::default();
        let zero = SpectralField::zeros(model.disc());
        let (u, report) = picard_solve(&sys, eps, &zero, &cfg).unwrap();
        // the first application already lands on the fixed point
        assert!(report.iterations <= 2);
        assert!(report.steps[1..].iter().all(|s| *s < 1e-15));
        // compare against the per-mode closed form
        let lam = PI * PI + 1.0;
        let tau = 2.0 * PI;
        let m = Complex64::new(lam - tau * tau, tau / eps.re);
        assert!((u.get(&[1], 0).unwrap() - Complex64::new(0.05, 0.0) / m).norm() < 1e-15);
        assert!(report.residual.value < 1e-14);
        assert_eq!(
            contraction_estimate(&sys, eps, &u, 0.1, 4, 1, &cfg.norm).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_field_residual_is_forcing() {
        let model = benchmark(Variant::B, &[0.0, 1.0, 0.0, 0.1]);
        let sys = system(&model);
        let zero = SpectralField::zeros(model.disc());
        let r = sys
            .hull_residual(Complex64::new(0.05, 0.0), &zero, &NormParams::default())
            .unwrap();
        let fnorm = sys.norm(model.forcing(), &NormParams::default()).unwrap();
        assert!((r.raw - fnorm).abs() < 1e-14 * fnorm);
    }

    #[test]
    fn cubic_benchmark_converges_for_every_model() {
        for variant in [Variant::A, Variant::APrime, Variant::B, Variant::BPrime] {
            let model = benchmark(variant, &[0.0, 1.0, 0.0, 0.1]);
            let sys = system(&model);
            let eps = Complex64::new(0.05, 0.0);
            let zero = SpectralField::zeros(model.disc());
            let (u, report) = picard_solve(&sys, eps, &zero, &FixedPointConfig::default()).unwrap();
            assert!(
                report.residual.value < 1e-11,
                "{variant}: {:?}",
                report.residual
            );
            assert!(report.contraction_ratio.unwrap_or(0.0) < 1.0);
            assert!(u.reality_defect() < 1e-14);
        }
    }

    #[test]
    fn strict_mode_refuses_points_outside_the_domain() {
        let model = benchmark(Variant::A, &[0.0, 1.0, 0.0, 0.1]);
        let sys = system(&model);
        let cfg =
            FixedPointConfig::default().with_domain(DomainSpec::parabolic(0.04, 100.0).unwrap());
        let zero = SpectralField::zeros(model.disc());
        let err = picard_solve(&sys, Complex64::new(0.5, 0.0), &zero, &cfg).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { .. }));
        let (_, report) =
            picard_solve(&sys, Complex64::new(0.5, 0.0), &zero, &cfg.explore()).unwrap();
        assert_eq!(report.in_domain, Some(false));
        assert_eq!(report.warnings.len(), 1);
    }
}
