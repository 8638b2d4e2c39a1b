//! Order-by-order construction of the approximate solution
//! U^{(M)} = Σ_{j≤M} εʲ U_j and the non-resonance diagnostic.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixedpoint::{HullResidual, HullSystem};
use crate::operators::linear::invert_linear;
use crate::operators::{Variant, DEFAULT_MULTIPLIER_FLOOR};
use crate::spectral::lattice;
use crate::spectral::ops::{compose_series, solve_omega_grad_with, DEFAULT_DIVISOR_FLOOR};
use crate::spectral::{
    apply_omega_grad, BasisTag, Frequency, GridField, NormParams, Profile, SpectralField,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Format version of saved series.
pub const SERIES_SCHEMA_VERSION: u32 = 1;

/// Outcome of the scan of |k|⁻¹ log|ω·k|⁻¹.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonresonanceReport {
    /// sup over 0 < |k|₁ ≤ K, clipped below at 0.
    pub sup: f64,
    /// A k attaining the supremum (absent when no term is positive).
    pub argmax: Option<Vec<i64>>,
    /// floor(2πρ / sup); `None` when every order is admissible.
    pub max_order: Option<u64>,
    pub rho: f64,
    pub k_max: usize,
}

impl NonresonanceReport {
    pub fn admits(&self, order: usize) -> bool {
        self.max_order.map_or(true, |m| order as u64 <= m)
    }
}

/// |k|₁⁻¹ log|ω·k|⁻¹, with ω·k evaluated by compensated summation.
pub fn nonresonance_term(omega: &Frequency, k: &[i64]) -> f64 {
    let d = omega.dot_compensated(k).abs();
    -d.ln() / lattice::l1(k) as f64
}

pub fn nonresonance_order(omega: &Frequency, rho: f64, k_max: usize) -> Result<NonresonanceReport> {
    if k_max == 0 {
        return Err(Error::Config("the scan cutoff K must be at least 1".into()));
    }
    if !(rho > 0.0) {
        return Err(Error::Config(format!("ρ must be positive (got {rho})")));
    }
    let mut sup = 0.0;
    let mut argmax = None;
    for k in lattice::l1_shell(omega.dim(), k_max, true) {
        let t = nonresonance_term(omega, &k);
        if t > sup {
            sup = t;
            argmax = Some(k);
        }
    }
    let max_order = if sup > 0.0 {
        let m = (2.0 * PI * rho / sup).floor();
        Some(if m >= u64::MAX as f64 {
            u64::MAX
        } else {
            m as u64
        })
    } else {
        None
    };
    Ok(NonresonanceReport {
        sup,
        argmax,
        max_order,
        rho,
        k_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindstedtConfig {
    /// ρ of the non-resonance condition.
    pub rho: f64,
    pub check_nonresonance: bool,
    /// Largest admissible θ-average of a small-divisor right-hand side,
    /// relative to its size.
    pub average_tol: f64,
    pub divisor_floor: f64,
    /// Tolerance and cap of the Neumann series for Γ̃ (model B).
    pub neumann_tol: f64,
    pub neumann_max_iter: usize,
}

impl Default for LindstedtConfig {
    fn default() -> Self {
        LindstedtConfig {
            rho: NormParams::default().rho,
            check_nonresonance: true,
            average_tol: 1e-10,
            divisor_floor: DEFAULT_DIVISOR_FLOOR,
            neumann_tol: 1e-15,
            neumann_max_iter: 500,
        }
    }
}

/// The series U^{(M)} together with its zeroth term.
#[derive(Clone, Debug)]
pub struct LindstedtSeries {
    system: HullSystem,
    u0: Option<SpectralField>,
    coeffs: Vec<SpectralField>,
    order_defects: Vec<f64>,
}

fn at_order(order: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::AtOrder { .. } => e,
        other => Error::AtOrder {
            order,
            cause: Box::new(other),
        },
    }
}

fn grids(fields: &[SpectralField]) -> Result<Vec<GridField>> {
    fields.iter().map(|u| u.to_grid()).collect()
}

/// Relative size of `e` against the terms that produced it.
fn relative(e: &SpectralField, terms: &[&SpectralField]) -> f64 {
    let scale = terms.iter().map(|t| t.max_abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        e.max_abs()
    } else {
        e.max_abs() / scale
    }
}

fn second_derivative(u: &SpectralField, omega: &Frequency) -> Result<SpectralField> {
    apply_omega_grad(&apply_omega_grad(u, omega)?, omega)
}

struct Expander<'a> {
    system: &'a HullSystem,
    cfg: &'a LindstedtConfig,
}

impl Expander<'_> {
    fn omega(&self) -> &Frequency {
        self.system.model().omega()
    }

    /// D for A (ω·∇) or A′ ((ω·∇)(−Δ)).
    fn apply_d(&self, u: &SpectralField) -> Result<SpectralField> {
        let v = apply_omega_grad(u, self.omega())?;
        Ok(match self.system.variant() {
            Variant::APrime => {
                let ld = self.system.op().delta_eigenvalues().to_vec();
                v.map_modes(|_, n, c| c * ld[n])
            }
            _ => v,
        })
    }

    /// D⁻¹ on zero-average fields; the average is checked, then removed.
    fn solve_d(&self, rhs: &SpectralField) -> Result<SpectralField> {
        let avg = rhs.theta_average().max_abs();
        let size = rhs.max_abs();
        if avg > self.cfg.average_tol * size.max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroAverage { magnitude: avg });
        }
        let rhs = rhs.oscillating_part();
        let rhs = match self.system.variant() {
            Variant::APrime => {
                let ld = self.system.op().delta_eigenvalues().to_vec();
                rhs.map_modes(|_, n, c| c / ld[n])
            }
            _ => rhs,
        };
        solve_omega_grad_with(&rhs, self.omega(), f64::INFINITY, self.cfg.divisor_floor)
    }

    fn check_small_divisors(&self, order: usize) -> Result<()> {
        let bound = 2.0 * PI * self.cfg.rho / order as f64;
        let omega = self.omega();
        for k in self.system.model().disc().modes() {
            if k.iter().all(|&c| c == 0) {
                continue;
            }
            let term = nonresonance_term(omega, k);
            if term > bound {
                return Err(Error::Nonresonance {
                    order,
                    k: k.clone(),
                    term,
                    bound,
                });
            }
        }
        Ok(())
    }

    fn model_a(&self, order: usize) -> Result<(Vec<SpectralField>, Vec<f64>)> {
        if self.cfg.check_nonresonance {
            self.check_small_divisors(order)?;
        }
        let sys = self.system;
        let omega = self.omega();
        let op = sys.op();
        let h = sys.model().h();
        let base = GridField::from_profile(sys.c0().expect("A/A′ systems carry c₀"));
        let f_osc = sys.rhs();

        let mut u = vec![self.solve_d(f_osc).map_err(at_order(1))?];
        let mut defects = vec![relative(&(&self.apply_d(&u[0])? - f_osc), &[f_osc])];
        for n in 1..=order {
            let terms = grids(&u[..n - 1])?;
            let r_n = compose_series(h, &base, &terms, n)?
                .swap_remove(n)
                .to_spectral();
            let avg = op
                .solve_profile(&(-&r_n).theta_average())
                .map_err(at_order(n))?;
            let z = sys.model().disc().zero_mode();
            u[n - 1].row_mut(z).copy_from_slice(avg.coeffs());
            let l_avg = op.apply_profile(&u[n - 1].theta_average());
            defects.push(avg_defect(&l_avg, &r_n.theta_average()));
            if n == order {
                break;
            }
            let driven =
                &(&second_derivative(&u[n - 1], omega)? + &op.apply_delta(&u[n - 1])) + &r_n;
            let rhs = -&driven;
            let next = self.solve_d(&rhs).map_err(at_order(n + 1))?;
            let e = &(&self.apply_d(&next)? + &driven) - &driven.theta_average_field();
            defects.push(relative(&e, &[&driven]));
            u.push(next);
        }
        Ok((u, defects))
    }

    /// Γ̃V = rhs with Γ̃ = ω·∇ + ℒ(0) + T, T = h′(U₀) − h′(0).
    fn solve_gamma_tilde(&self, t: &GridField, rhs: &SpectralField) -> Result<SpectralField> {
        let sys = self.system;
        let gamma_inv = |r: &SpectralField| {
            invert_linear(
                Variant::B,
                sys.model().omega(),
                sys.op(),
                ZERO,
                r,
                DEFAULT_MULTIPLIER_FLOOR,
            )
        };
        let mut v = gamma_inv(rhs)?;
        let mut last = f64::INFINITY;
        for _ in 0..self.cfg.neumann_max_iter {
            let tv = (t * &v.to_grid()?).to_spectral();
            let next = gamma_inv(&(rhs - &tv))?;
            last = next.max_diff(&v);
            let done = last <= self.cfg.neumann_tol * next.max_abs().max(f64::MIN_POSITIVE);
            v = next;
            if done {
                return Ok(v);
            }
        }
        Err(Error::MaxIterations {
            iterations: self.cfg.neumann_max_iter,
            step: last,
        })
    }

    fn model_b(&self, u0: &SpectralField, order: usize) -> Result<(Vec<SpectralField>, Vec<f64>)> {
        let sys = self.system;
        let omega = self.omega();
        let h = sys.model().h();
        let base = u0.to_grid()?;
        let t = base.try_map(|v, x| Ok(h.derivative(1, v, x)? - h.derivative(1, ZERO, x)?))?;
        let gamma_tilde = |v: &SpectralField| -> Result<SpectralField> {
            let g = crate::operators::apply_linear(
                Variant::B,
                omega,
                sys.op(),
                ZERO,
                v,
                crate::operators::Scaling::Raw,
            )?;
            Ok(&g + &(&t * &v.to_grid()?).to_spectral())
        };
        let mut u: Vec<SpectralField> = Vec::new();
        let mut defects = Vec::new();
        for n in 1..=order {
            let terms = grids(&u)?;
            let r_n = compose_series(h, &base, &terms, n)?
                .swap_remove(n)
                .to_spectral();
            let mut rhs = -&r_n;
            if n >= 2 {
                let prev = if n == 2 { u0 } else { &u[n - 3] };
                rhs = &rhs - &second_derivative(prev, omega)?;
            }
            let next = self.solve_gamma_tilde(&t, &rhs).map_err(at_order(n))?;
            let lhs = gamma_tilde(&next)?;
            defects.push(relative(&(&lhs - &rhs), &[&lhs, &rhs]));
            u.push(next);
        }
        Ok((u, defects))
    }

    fn model_bprime(
        &self,
        u0: &SpectralField,
        order: usize,
    ) -> Result<(Vec<SpectralField>, Vec<f64>)> {
        let sys = self.system;
        let omega = self.omega();
        let h = sys.model().h();
        let base = u0.to_grid()?;
        let lambda = |v: &SpectralField| {
            crate::operators::apply_linear(
                Variant::BPrime,
                omega,
                sys.op(),
                ZERO,
                v,
                crate::operators::Scaling::Raw,
            )
        };
        let mut u: Vec<SpectralField> = Vec::new();
        let mut defects = Vec::new();
        for n in 1..=order {
            let terms = grids(&u)?;
            let hn = compose_series(h, &base, &terms, n - 1)?
                .swap_remove(n - 1)
                .to_spectral();
            let mut rhs = -&hn;
            if n >= 2 {
                let prev = if n == 2 { u0 } else { &u[n - 3] };
                rhs = &rhs - &second_derivative(prev, omega)?;
            }
            let next = invert_linear(
                Variant::BPrime,
                omega,
                sys.op(),
                ZERO,
                &rhs,
                DEFAULT_MULTIPLIER_FLOOR,
            )
            .map_err(at_order(n))?;
            let lhs = lambda(&next)?;
            defects.push(relative(&(&lhs - &rhs), &[&lhs, &rhs]));
            u.push(next);
        }
        Ok((u, defects))
    }
}

fn avg_defect(l_avg: &Profile, r_avg: &Profile) -> f64 {
    let scale = l_avg.max_abs().max(r_avg.max_abs());
    let diff = l_avg
        .coeffs()
        .iter()
        .zip(r_avg.coeffs())
        .map(|(a, b)| (a + b).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

trait AverageField {
    fn theta_average_field(&self) -> SpectralField;
}

impl AverageField for SpectralField {
    /// ⟨u⟩ as a θ-independent field.
    fn theta_average_field(&self) -> SpectralField {
        let mut out = SpectralField::zeros(self.disc()).with_basis_tag(self.basis_tag());
        let z = self.disc().zero_mode();
        out.row_mut(z).copy_from_slice(self.row(z));
        out
    }
}

/// Builds U₁…U_M. `u0` is the zeroth term for B/B′ and ignored for A/A′,
/// whose zeroth term c₀ lives in the system.
pub fn expand(
    system: &HullSystem,
    u0: Option<&SpectralField>,
    order: usize,
    cfg: &LindstedtConfig,
) -> Result<LindstedtSeries> {
    let ex = Expander { system, cfg };
    let variant = system.variant();
    let need_u0 = || {
        u0.cloned()
            .ok_or_else(|| Error::Config(format!("model {variant} needs U₀")))
    };
    let (u0, (coeffs, order_defects)) = match variant {
        Variant::A | Variant::APrime => {
            if order == 0 {
                (None, (Vec::new(), Vec::new()))
            } else {
                (None, ex.model_a(order)?)
            }
        }
        Variant::B => {
            let u0 = need_u0()?;
            let r = ex.model_b(&u0, order)?;
            (Some(u0), r)
        }
        Variant::BPrime => {
            let u0 = need_u0()?;
            let r = ex.model_bprime(&u0, order)?;
            (Some(u0), r)
        }
    };
    Ok(LindstedtSeries {
        system: system.clone(),
        u0,
        coeffs,
        order_defects,
    })
}

#[derive(Serialize, Deserialize)]
struct SeriesFile {
    schema_version: u32,
    model_hash: String,
    variant: Variant,
    order: usize,
    /// c₀ as "n,re,im" rows (A/A′) or U₀ as field CSV (B/B′).
    zeroth: String,
    coefficients: Vec<String>,
    order_defects: Vec<f64>,
}

fn profile_csv(p: &Profile) -> String {
    let mut out = String::from("n,re,im\n");
    for (n, c) in p.coeffs().iter().enumerate() {
        out.push_str(&format!("{n},{:.17e},{:.17e}\n", c.re, c.im));
    }
    out
}

fn parse_profile_csv(
    disc: &std::sync::Arc<crate::spectral::Discretization>,
    csv: &str,
) -> Result<Profile> {
    let mut p = Profile::zeros(disc);
    for (line_no, line) in csv.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Parse(format!("c₀ line {}: `{line}`", line_no + 1));
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: usize = parts[0].parse().map_err(|_| bad())?;
        let re: f64 = parts[1].parse().map_err(|_| bad())?;
        let im: f64 = parts[2].parse().map_err(|_| bad())?;
        *p.coeffs_mut().get_mut(n).ok_or_else(bad)? = Complex64::new(re, im);
    }
    Ok(p)
}

impl LindstedtSeries {
    pub fn system(&self) -> &HullSystem {
        &self.system
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// U₁ … U_M.
    pub fn coefficients(&self) -> &[SpectralField] {
        &self.coeffs
    }

    pub fn u0(&self) -> Option<&SpectralField> {
        self.u0.as_ref()
    }

    /// Relative defect of each defining equation, in construction order.
    pub fn order_defects(&self) -> &[f64] {
        &self.order_defects
    }

    /// U^{(M)}_ε by Horner's rule; for A/A′ the c₀ term is not included.
    pub fn evaluate(&self, eps: Complex64) -> SpectralField {
        let disc = self.system.model().disc();
        let mut acc = SpectralField::zeros(disc);
        for u in self.coeffs.iter().rev() {
            acc = &(&acc + u) * eps;
        }
        match &self.u0 {
            Some(u0) => &acc + u0,
            None => acc,
        }
    }

    /// The same series cut at a lower order.
    pub fn truncated(&self, order: usize) -> LindstedtSeries {
        let order = order.min(self.order());
        let mut out = self.clone();
        out.coeffs.truncate(order);
        out
    }

    pub fn residual(&self, eps: Complex64, params: &NormParams) -> Result<HullResidual> {
        self.system.hull_residual(eps, &self.evaluate(eps), params)
    }

    pub fn to_json(&self) -> Result<String> {
        let zeroth = match (&self.u0, self.system.c0()) {
            (Some(u0), _) => u0.to_csv(false),
            (None, Some(c0)) => profile_csv(c0),
            (None, None) => unreachable!("every system has a zeroth term"),
        };
        let file = SeriesFile {
            schema_version: SERIES_SCHEMA_VERSION,
            model_hash: self.system.model().hash(),
            variant: self.system.variant(),
            order: self.order(),
            zeroth,
            coefficients: self.coeffs.iter().map(|u| u.to_csv(false)).collect(),
            order_defects: self.order_defects.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Reads a series saved by [`LindstedtSeries::to_json`] for `model`.
    pub fn from_json(json: &str, model: &crate::operators::ModelSpec) -> Result<Self> {
        let file: SeriesFile = serde_json::from_str(json)?;
        if file.schema_version != SERIES_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported series schema version {}",
                file.schema_version
            )));
        }
        if file.model_hash != model.hash() {
            return Err(Error::Mismatch(
                "the saved series was built for a different model".into(),
            ));
        }
        if file.coefficients.len() != file.order {
            return Err(Error::Parse(format!(
                "series declares order {} but carries {} coefficients",
                file.order,
                file.coefficients.len()
            )));
        }
        let disc = model.disc();
        let (system, u0) = if model.variant().has_c0() {
            let c0 = parse_profile_csv(disc, &file.zeroth)?;
            (HullSystem::new(model, Some(&c0))?, None)
        } else {
            let u0 = SpectralField::from_csv(disc, &file.zeroth, BasisTag::DeltaBasis)?;
            (HullSystem::new(model, None)?, Some(u0))
        };
        let coeffs = file
            .coefficients
            .iter()
            .map(|c| SpectralField::from_csv(disc, c, BasisTag::DeltaBasis))
            .collect::<Result<Vec<_>>>()?;
        Ok(LindstedtSeries {
            system,
            u0,
            coeffs,
            order_defects: file.order_defects,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::ModelSpec;
    use crate::spectral::{BoundaryCondition, Discretization, NonlinearitySpec, Truncation};
    use crate::zeroth_order::{
        solve_U0_modelB, solve_U0_modelBprime, solve_c0, NewtonConfig, U0Config,
    };

    fn model(variant: Variant) -> ModelSpec {
        let disc = Discretization::new(
            1,
            Truncation::new(8, 6, BoundaryCondition::Dirichlet).unwrap(),
        )
        .unwrap();
        let mut f = SpectralField::zeros(&disc);
        f.set(&[1], 0, Complex64::new(0.05, 0.0)).unwrap();
        f.set(&[-1], 0, Complex64::new(0.05, 0.0)).unwrap();
        f.set(&[0], 0, Complex64::new(0.02, 0.0)).unwrap();
        ModelSpec::new(
            variant,
            NonlinearitySpec::polynomial(&[0.0, 1.0, 0.0, 0.1]),
            f,
            Frequency::new(vec![1.0]).unwrap(),
        )
        .unwrap()
    }

    fn series(variant: Variant, order: usize) -> LindstedtSeries {
        let m = model(variant);
        let cfg = LindstedtConfig::default();
        match variant {
            Variant::A | Variant::APrime => {
                let c0 = solve_c0(
                    &m,
                    &m.forcing().theta_average(),
                    &Profile::zeros(m.disc()),
                    &NewtonConfig::default(),
                )
                .unwrap();
                expand(
                    &HullSystem::new(&m, Some(&c0.c0)).unwrap(),
                    None,
                    order,
                    &cfg,
                )
                .unwrap()
            }
            Variant::B => {
                let u0 = solve_U0_modelB(&m, &U0Config::default()).unwrap().u0;
                expand(&HullSystem::new(&m, None).unwrap(), Some(&u0), order, &cfg).unwrap()
            }
            Variant::BPrime => {
                let u0 = solve_U0_modelBprime(&m).unwrap();
                expand(&HullSystem::new(&m, None).unwrap(), Some(&u0), order, &cfg).unwrap()
            }
        }
    }

    #[test]
    fn unit_frequency_is_unbounded() {
        let r = nonresonance_order(&Frequency::new(vec![1.0]).unwrap(), 0.5, 10).unwrap();
        assert_eq!(r.sup, 0.0);
        assert_eq!(r.max_order, None);
        assert!(r.admits(1000));
    }

    #[test]
    fn first_order_average_vanishes_for_a() {
        let s = series(Variant::A, 3);
        assert_eq!(s.coefficients()[0].theta_average().max_abs(), 0.0);
        assert!(
            s.order_defects().iter().all(|d| *d < 1e-10),
            "{:?}",
            s.order_defects()
        );
    }

    #[test]
    fn first_order_vanishes_for_b() {
        let s = series(Variant::B, 3);
        assert_eq!(s.coefficients()[0].max_abs(), 0.0);
        assert!(
            s.order_defects().iter().all(|d| *d < 1e-10),
            "{:?}",
            s.order_defects()
        );
    }

    #[test]
    fn evaluation_at_zero() {
        let a = series(Variant::APrime, 2);
        assert_eq!(a.evaluate(ZERO).max_abs(), 0.0);
        let b = series(Variant::BPrime, 2);
        assert_eq!(b.evaluate(ZERO).max_diff(b.u0().unwrap()), 0.0);
        assert!(b.order_defects().iter().all(|d| *d < 1e-10));
    }

    #[test]
    fn json_round_trip_checks_the_model() {
        let s = series(Variant::A, 2);
        let json = s.to_json().unwrap();
        let back = LindstedtSeries::from_json(&json, s.system().model()).unwrap();
        for (a, b) in s.coefficients().iter().zip(back.coefficients()) {
            assert_eq!(a.max_diff(b), 0.0);
        }
        let other = s.system().model().with_variant(Variant::B).unwrap();
        assert!(matches!(
            LindstedtSeries::from_json(&json, &other),
            Err(Error::Mismatch(_))
        ));
    }
}
