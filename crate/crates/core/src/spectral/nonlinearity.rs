//! Pointwise nonlinearities h(u, x) and their u-derivatives.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::params::BoundaryCondition;
use crate::error::{Error, Result};

/// Default lower bound on |1 + u| for the capacitor nonlinearity.
pub const DEFAULT_POLE_GUARD: f64 = 1e-6;

/// A pointwise map (u, x) ↦ value, shared between threads.
pub type PointMap = Arc<dyn Fn(Complex64, f64) -> Complex64 + Send + Sync>;

/// Coefficient a_p(x) of a polynomial nonlinearity.
#[derive(Clone)]
pub enum PolyCoeff {
    Constant(f64),
    Profile(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl PolyCoeff {
    pub fn at(&self, x: f64) -> f64 {
        match self {
            PolyCoeff::Constant(c) => *c,
            PolyCoeff::Profile(f) => f(x),
        }
    }

    fn is_identically_zero(&self) -> Option<bool> {
        match self {
            PolyCoeff::Constant(c) => Some(*c == 0.0),
            PolyCoeff::Profile(_) => None,
        }
    }
}

impl fmt::Debug for PolyCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyCoeff::Constant(c) => write!(f, "{c}"),
            PolyCoeff::Profile(_) => f.write_str("<profile>"),
        }
    }
}

#[derive(Clone)]
pub enum NonlinearityKind {
    /// h(u, x) = Σ_p a_p(x) uᵖ.
    Polynomial(Vec<PolyCoeff>),
    /// h(u) = γ / (1 + u)².
    MemsCapacitor { gamma: f64, pole_guard: f64 },
    /// User-supplied h, ∂_u h and ∂²_u h.
    Custom {
        name: String,
        h: PointMap,
        dh: PointMap,
        d2h: PointMap,
    },
}

/// Nonlinearity together with its boundary-compatibility metadata.
#[derive(Clone)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    vanishes_at_zero: bool,
    neumann_compatible: bool,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NonlinearityKind::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            NonlinearityKind::MemsCapacitor { gamma, .. } => write!(f, "MemsCapacitor(γ={gamma})"),
            NonlinearityKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Serializable summary used in reports and hashes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NonlinearityDescriptor {
    pub kind: String,
    pub parameters: Vec<f64>,
    pub vanishes_at_zero: bool,
    pub neumann_compatible: bool,
}

impl NonlinearitySpec {
    /// Polynomial with constant coefficients a_0, a_1, ….
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let vanishes = coeffs.first().map(|c| *c == 0.0).unwrap_or(true);
        NonlinearitySpec {
            kind: NonlinearityKind::Polynomial(
                coeffs.iter().map(|&c| PolyCoeff::Constant(c)).collect(),
            ),
            vanishes_at_zero: vanishes,
            neumann_compatible: true,
        }
    }

    /// Polynomial with x-dependent coefficients. The boundary flags must
    /// be declared since they cannot be inferred from opaque profiles.
    pub fn polynomial_profiles(
        coeffs: Vec<PolyCoeff>,
        vanishes_at_zero: bool,
        neumann_compatible: bool,
    ) -> Self {
        let vanishes = match coeffs.first() {
            Some(c) => c.is_identically_zero().unwrap_or(vanishes_at_zero),
            None => true,
        };
        NonlinearitySpec {
            kind: NonlinearityKind::Polynomial(coeffs),
            vanishes_at_zero: vanishes,
            neumann_compatible,
        }
    }

    pub fn mems_capacitor(gamma: f64) -> Self {
        Self::mems_capacitor_with_guard(gamma, DEFAULT_POLE_GUARD)
    }

    pub fn mems_capacitor_with_guard(gamma: f64, pole_guard: f64) -> Self {
        NonlinearitySpec {
            kind: NonlinearityKind::MemsCapacitor { gamma, pole_guard },
            vanishes_at_zero: gamma == 0.0,
            neumann_compatible: true,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        h: PointMap,
        dh: PointMap,
        d2h: PointMap,
        vanishes_at_zero: bool,
        neumann_compatible: bool,
    ) -> Self {
        NonlinearitySpec {
            kind: NonlinearityKind::Custom {
                name: name.into(),
                h,
                dh,
                d2h,
            },
            vanishes_at_zero,
            neumann_compatible,
        }
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    /// Whether h(0, x) = 0.
    pub fn vanishes_at_zero(&self) -> bool {
        self.vanishes_at_zero
    }

    pub fn neumann_compatible(&self) -> bool {
        self.neumann_compatible
    }

    /// Polynomial degree, if h is a polynomial.
    pub fn degree(&self) -> Option<usize> {
        match &self.kind {
            NonlinearityKind::Polynomial(c) => Some(c.len().saturating_sub(1)),
            _ => None,
        }
    }

    /// Whether ∂_u h is independent of u (so the remainder G vanishes).
    pub fn is_affine(&self) -> bool {
        matches!(self.degree(), Some(d) if d <= 1)
    }

    /// Highest derivative order that can be evaluated.
    pub fn max_derivative(&self) -> usize {
        match &self.kind {
            NonlinearityKind::Polynomial(_) | NonlinearityKind::MemsCapacitor { .. } => usize::MAX,
            NonlinearityKind::Custom { .. } => 2,
        }
    }

    /// Enforces BCD (Dirichlet) and BCN (Neumann).
    pub fn check_bc(&self, bc: BoundaryCondition) -> Result<()> {
        match bc {
            BoundaryCondition::Dirichlet if !self.vanishes_at_zero => Err(Error::BcdViolation),
            BoundaryCondition::Neumann if !self.neumann_compatible => Err(Error::BcnViolation),
            _ => Ok(()),
        }
    }

    pub fn descriptor(&self) -> NonlinearityDescriptor {
        let (kind, parameters) = match &self.kind {
            NonlinearityKind::Polynomial(c) => (
                "polynomial".to_string(),
                c.iter()
                    .map(|c| match c {
                        PolyCoeff::Constant(v) => *v,
                        PolyCoeff::Profile(_) => f64::NAN,
                    })
                    .collect(),
            ),
            NonlinearityKind::MemsCapacitor { gamma, pole_guard } => {
                ("mems".to_string(), vec![*gamma, *pole_guard])
            }
            NonlinearityKind::Custom { name, .. } => (format!("custom:{name}"), vec![]),
        };
        NonlinearityDescriptor {
            kind,
            parameters,
            vanishes_at_zero: self.vanishes_at_zero,
            neumann_compatible: self.neumann_compatible,
        }
    }

    /// h(u, x).
    pub fn eval(&self, u: Complex64, x: f64) -> Result<Complex64> {
        self.derivative(0, u, x)
    }

    /// ∂ᵖ_u h(u, x).
    pub fn derivative(&self, order: usize, u: Complex64, x: f64) -> Result<Complex64> {
        let value = match &self.kind {
            NonlinearityKind::Polynomial(coeffs) => {
                // Horner on the order-th derivative: Σ_{q≥order} a_q q!/(q-order)! u^{q-order}
                let mut acc = Complex64::new(0.0, 0.0);
                for q in (order..coeffs.len()).rev() {
                    let falling: f64 = ((q - order + 1)..=q).map(|i| i as f64).product();
                    acc = acc * u + coeffs[q].at(x) * falling;
                }
                acc
            }
            NonlinearityKind::MemsCapacitor { gamma, pole_guard } => {
                let base = Complex64::new(1.0, 0.0) + u;
                let dist = base.norm();
                if !(dist > *pole_guard) {
                    return Err(Error::PoleProximity {
                        distance: dist,
                        guard: *pole_guard,
                    });
                }
                let fact: f64 = (2..=order + 1).map(|i| i as f64).product();
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                base.powi(-((order + 2) as i32)) * (gamma * sign * fact)
            }
            NonlinearityKind::Custom { h, dh, d2h, .. } => match order {
                0 => h(u, x),
                1 => dh(u, x),
                2 => d2h(u, x),
                _ => return Err(Error::DerivativeUnavailable { order }),
            },
        };
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite(format!("h^({order}) at u = {u}, x = {x}")));
        }
        Ok(value)
    }

    /// Scaled Taylor coefficients h⁽ᵖ⁾(u, x)/p! for p = 0..=order.
    pub fn taylor(&self, order: usize, u: Complex64, x: f64) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for p in 0..=order {
            if p > 0 {
                fact *= p as f64;
            }
            if let Some(deg) = self.degree() {
                if p > deg {
                    out.push(Complex64::new(0.0, 0.0));
                    continue;
                }
            }
            out.push(self.derivative(p, u, x)? / fact);
        }
        Ok(out)
    }
}
