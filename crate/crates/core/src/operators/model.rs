use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectral::nonlinearity::NonlinearityDescriptor;
use crate::spectral::{
    BasisTag, BoundaryCondition, Discretization, Frequency, NonlinearitySpec, SpectralField,
    Truncation,
};

/// The four damped wave models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// u_tt + ε⁻¹u_t − Δu + h(u) = f.
    A,
    /// u_tt + ε⁻¹(−Δ)u_t − Δu + h(u) = f.
    #[serde(rename = "Aprime")]
    APrime,
    /// ε²u_tt + u_t − Δu + h(u) = f.
    B,
    /// ε²u_tt + u_t − Δu + εh(u) = f.
    #[serde(rename = "Bprime")]
    BPrime,
}

impl Variant {
    /// Models whose response ansatz is c₀(x) + U_ε(θ, x).
    pub fn has_c0(self) -> bool {
        matches!(self, Variant::A | Variant::APrime)
    }

    /// Models whose linear part carries −Δ instead of ℒ.
    pub fn needs_h2_prime(self) -> bool {
        matches!(self, Variant::APrime | Variant::BPrime)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "A",
            Variant::APrime => "Aprime",
            Variant::B => "B",
            Variant::BPrime => "Bprime",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Variant::A),
            "Aprime" | "aprime" | "A'" | "A′" => Ok(Variant::APrime),
            "B" | "b" => Ok(Variant::B),
            "Bprime" | "bprime" | "B'" | "B′" => Ok(Variant::BPrime),
            other => Err(Error::Config(format!("unknown model variant `{other}`"))),
        }
    }
}

/// Everything that determines a hull equation.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    variant: Variant,
    h: NonlinearitySpec,
    forcing: SpectralField,
    omega: Frequency,
}

#[derive(Serialize)]
struct HashInput<'a> {
    variant: Variant,
    truncation: &'a Truncation,
    omega: &'a [f64],
    h: NonlinearityDescriptor,
    forcing: &'a [Complex64],
}

impl ModelSpec {
    pub fn new(
        variant: Variant,
        h: NonlinearitySpec,
        forcing: SpectralField,
        omega: Frequency,
    ) -> Result<Self> {
        let disc = forcing.disc();
        if disc.dim() != omega.dim() {
            return Err(Error::Mismatch(format!(
                "forcing lives on a {}-torus but ω has {} components",
                disc.dim(),
                omega.dim()
            )));
        }
        if forcing.basis_tag() != BasisTag::DeltaBasis {
            return Err(Error::Mismatch(
                "forcing must be given in the Δ basis".into(),
            ));
        }
        if !forcing.is_finite() {
            return Err(Error::NonFinite("forcing".into()));
        }
        let bc = disc.truncation().bc;
        if variant.needs_h2_prime() && bc != BoundaryCondition::Dirichlet {
            let lambda1 = disc.basis().eigenvalues()[0];
            return Err(Error::H2PrimeViolation {
                lambda1,
                bc: bc.to_string(),
            });
        }
        h.check_bc(bc)?;
        Ok(ModelSpec {
            variant,
            h,
            forcing,
            omega,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn h(&self) -> &NonlinearitySpec {
        &self.h
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    pub fn omega(&self) -> &Frequency {
        &self.omega
    }

    pub fn disc(&self) -> &Arc<Discretization> {
        self.forcing.disc()
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.disc().truncation().bc
    }

    /// The same model with another variant (shares h, f, ω).
    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        Self::new(
            variant,
            self.h.clone(),
            self.forcing.clone(),
            self.omega.clone(),
        )
    }

    /// SHA-256 of the model description, hex encoded.
    pub fn hash(&self) -> String {
        let input = HashInput {
            variant: self.variant,
            truncation: self.disc().truncation(),
            omega: self.omega.components(),
            h: self.h.descriptor(),
            forcing: self.forcing.coeffs(),
        };
        let bytes = serde_json::to_vec(&input).expect("model description serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forcing(bc: BoundaryCondition) -> SpectralField {
        let disc = Discretization::new(1, Truncation::new(2, 3, bc).unwrap()).unwrap();
        SpectralField::single_mode(&disc, &[1], 0, Complex64::new(0.05, 0.0)).unwrap()
    }

    #[test]
    fn primed_models_need_dirichlet() {
        let h = NonlinearitySpec::polynomial(&[0.0, 1.0]);
        let omega = Frequency::new(vec![1.0]).unwrap();
        let err = ModelSpec::new(
            Variant::BPrime,
            h.clone(),
            forcing(BoundaryCondition::Neumann),
            omega.clone(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::H2PrimeViolation { .. }));
        assert!(ModelSpec::new(Variant::B, h, forcing(BoundaryCondition::Neumann), omega).is_ok());
    }

    #[test]
    fn dirichlet_requires_bcd() {
        let h = NonlinearitySpec::mems_capacitor(1.0);
        let omega = Frequency::new(vec![1.0]).unwrap();
        let err = ModelSpec::new(Variant::B, h, forcing(BoundaryCondition::Dirichlet), omega)
            .unwrap_err();
        assert_eq!(err, Error::BcdViolation);
    }

    #[test]
    fn hash_tracks_variant() {
        let h = NonlinearitySpec::polynomial(&[0.0, 1.0]);
        let omega = Frequency::new(vec![1.0]).unwrap();
        let a =
            ModelSpec::new(Variant::A, h, forcing(BoundaryCondition::Dirichlet), omega).unwrap();
        let b = a.with_variant(Variant::B).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
        assert_eq!(a.hash().len(), 64);
    }
}
