use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex ε-domains on which the linear parts have uniform bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    /// Ω_{σ,B} = {ξ + iη : ξ > Bη², σ < |ε| < 2σ}.
    Parabolic { sigma: f64, b: f64 },
    /// Ω_δ = {Re(−ε²) ≥ δ} ∪ {ε ∈ ℝ : δ < |ε| < 2δ}.
    Sector { delta: f64 },
}

impl DomainSpec {
    pub fn parabolic(sigma: f64, b: f64) -> Result<Self> {
        if !(sigma > 0.0 && b > 0.0) {
            return Err(Error::Config(format!(
                "parabolic domain needs σ > 0 and B > 0 (got σ = {sigma}, B = {b})"
            )));
        }
        Ok(DomainSpec::Parabolic { sigma, b })
    }

    pub fn sector(delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Config(format!(
                "sector domain needs δ > 0 (got {delta})"
            )));
        }
        Ok(DomainSpec::Sector { delta })
    }

    pub fn contains(&self, eps: Complex64) -> bool {
        in_domain(eps, self)
    }

    /// Error unless ε lies in the domain.
    pub fn require(&self, eps: Complex64) -> Result<()> {
        if self.contains(eps) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                re: eps.re,
                im: eps.im,
                domain: self.to_string(),
            })
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Parabolic { sigma, b } => write!(f, "Ω(σ={sigma}, B={b})"),
            DomainSpec::Sector { delta } => write!(f, "Ω(δ={delta})"),
        }
    }
}

/// Exact membership test.
pub fn in_domain(eps: Complex64, dom: &DomainSpec) -> bool {
    let (xi, eta) = (eps.re, eps.im);
    match *dom {
        DomainSpec::Parabolic { sigma, b } => {
            let r = eps.norm();
            xi > b * eta * eta && sigma < r && r < 2.0 * sigma
        }
        DomainSpec::Sector { delta } => {
            let re_minus_sq = eta * eta - xi * xi;
            re_minus_sq >= delta || (eta == 0.0 && delta < xi.abs() && xi.abs() < 2.0 * delta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_memberships() {
        let p = DomainSpec::parabolic(0.04, 100.0).unwrap();
        assert!(p.contains(Complex64::new(0.05, 0.01)));
        assert!(!p.contains(Complex64::new(0.0, 0.05)));
        let s = DomainSpec::sector(0.05).unwrap();
        assert!(s.contains(Complex64::new(0.0, 0.3)));
        assert!(s.contains(Complex64::new(0.07, 0.0)));
        assert!(!s.contains(Complex64::new(0.2, 0.0)));
        assert!(matches!(
            p.require(Complex64::new(0.0, 0.05)),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
