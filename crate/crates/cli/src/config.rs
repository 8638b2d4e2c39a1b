//! TOML run configuration. Unknown keys are rejected.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use dampwave::fixedpoint::FixedPointConfig;
use dampwave::operators::{DomainSpec, ModelSpec, Variant};
use dampwave::spectral::{
    BoundaryCondition, Discretization, Frequency, NonlinearitySpec, NormParams, SpectralField,
    Truncation,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub truncation: TruncationSection,
    #[serde(default)]
    pub norm: NormSection,
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub fixedpoint: FixedPointSection,
    #[serde(default)]
    pub scan: ScanSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub variant: String,
    pub bc: String,
    pub omega: Vec<f64>,
    pub h: HSection,
    #[serde(default)]
    pub forcing: Vec<ForcingEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HSection {
    /// h(u) = Σ coeffs[p] uᵖ.
    Polynomial { coeffs: Vec<f64> },
    /// h(u) = γ / (1 + u)².
    Mems {
        gamma: f64,
        pole_guard: Option<f64>,
    },
}

/// One forcing term re + i·im times e^{2πik·θ} Φ_n(x); Φ is chosen either by
/// index `n` or by `label` (for example "sin1", "cos2", "const").
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingEntry {
    pub k: Vec<i64>,
    pub n: Option<usize>,
    pub label: Option<String>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub k_theta: usize,
    pub n_x: usize,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
}

fn default_oversample() -> usize {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    pub rho: f64,
    pub j: u32,
    pub m: u32,
}

impl Default for NormSection {
    fn default() -> Self {
        let p = NormParams::default();
        NormSection {
            rho: p.rho,
            j: p.j,
            m: p.m,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointSection {
    pub eps_re: f64,
    pub eps_im: f64,
    /// Order M of the Lindstedt start.
    pub order: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub alpha0: f64,
    pub beta: Option<f64>,
    pub multiplier_floor: f64,
    pub conditioning_guard: f64,
    /// Sampled pairs for the contraction estimate (0 skips it).
    pub contraction_pairs: usize,
}

impl Default for FixedPointSection {
    fn default() -> Self {
        let d = FixedPointConfig::default();
        FixedPointSection {
            eps_re: 0.05,
            eps_im: 0.0,
            order: 3,
            tol: d.tol,
            max_iter: d.max_iter,
            alpha0: d.alpha0,
            beta: None,
            multiplier_floor: d.multiplier_floor,
            conditioning_guard: d.conditioning_guard,
            contraction_pairs: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    Zero,
    Series,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub start: StartKind,
    /// |k|₁ cutoff for resonance lists.
    pub k_max: usize,
    /// Number of spatial modes in resonance lists.
    pub n_max: usize,
    /// Cutoff K of the non-resonance scan.
    pub k_check: usize,
    /// Number of τ samples for spectral-bound sampling.
    pub tau_samples: usize,
    /// Exponents p of the residual ladder ε = 2^−p.
    pub ladder: Vec<i32>,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            re_min: 0.01,
            re_max: 0.1,
            im_min: -0.01,
            im_max: 0.01,
            nx: 10,
            ny: 5,
            start: StartKind::Series,
            k_max: 4,
            n_max: 5,
            k_check: 64,
            tau_samples: 2001,
            ladder: (4..=10).collect(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).context("invalid configuration file")?;
        Ok(cfg)
    }

    pub fn variant(&self) -> Result<Variant> {
        Ok(self.model.variant.parse()?)
    }

    pub fn norm(&self) -> Result<NormParams> {
        Ok(NormParams::new(self.norm.rho, self.norm.j, self.norm.m)?)
    }

    pub fn eps(&self) -> Complex64 {
        Complex64::new(self.fixedpoint.eps_re, self.fixedpoint.eps_im)
    }

    pub fn nonlinearity(&self) -> Result<NonlinearitySpec> {
        Ok(match &self.model.h {
            HSection::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    bail!("polynomial nonlinearity needs at least one coefficient");
                }
                NonlinearitySpec::polynomial(coeffs)
            }
            HSection::Mems { gamma, pole_guard } => match pole_guard {
                Some(g) => NonlinearitySpec::mems_capacitor_with_guard(*gamma, *g),
                None => NonlinearitySpec::mems_capacitor(*gamma),
            },
        })
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let bc: BoundaryCondition = self.model.bc.parse()?;
        let trunc = Truncation::with_oversample(
            self.truncation.k_theta,
            self.truncation.n_x,
            bc,
            self.truncation.oversample,
        )?;
        let omega = Frequency::new(self.model.omega.clone())?;
        let disc = Discretization::new(omega.dim(), trunc)?;
        let mut f = SpectralField::zeros(&disc);
        for (i, e) in self.model.forcing.iter().enumerate() {
            let n = match (e.n, &e.label) {
                (Some(n), None) => n,
                (None, Some(label)) => disc.basis().index_of(label).ok_or_else(|| {
                    anyhow!(
                        "forcing entry {i}: unknown spatial mode `{label}` (available: {})",
                        disc.basis().labels().join(", ")
                    )
                })?,
                _ => bail!("forcing entry {i}: give exactly one of `n` and `label`"),
            };
            let c = Complex64::new(e.re, e.im);
            let old = f
                .get(&e.k, n)
                .with_context(|| format!("forcing entry {i} lies outside the truncation"))?;
            f.set(&e.k, n, old + c)?;
        }
        Ok(ModelSpec::new(self.variant()?, self.nonlinearity()?, f, omega)?)
    }

    pub fn fixedpoint(&self, strict: bool) -> Result<FixedPointConfig> {
        let s = &self.fixedpoint;
        let cfg = FixedPointConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            alpha0: s.alpha0,
            beta: s.beta,
            norm: self.norm()?,
            multiplier_floor: s.multiplier_floor,
            conditioning_guard: s.conditioning_guard,
            domain: self.domain,
            strict,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
