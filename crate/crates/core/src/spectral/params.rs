use serde::{Deserialize, Serialize};

use super::lattice;
use crate::error::{Error, Result};

/// Default cutoff for the rational-independence check on ω.
pub const DEFAULT_K_CHECK: usize = 64;
/// Default threshold below which |ω·k| counts as an exact resonance.
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-12;

/// Spatial boundary condition on the unit circle (periodic) or unit interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet,
    Neumann,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" | "p" => Ok(BoundaryCondition::Periodic),
            "dirichlet" | "d" => Ok(BoundaryCondition::Dirichlet),
            "neumann" | "n" => Ok(BoundaryCondition::Neumann),
            other => Err(Error::Config(format!(
                "unsupported boundary condition `{other}`"
            ))),
        }
    }
}

/// Frequency vector ω ∈ ℝᵈ of the quasi-periodic forcing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    omega: Vec<f64>,
}

impl Frequency {
    /// Builds ω and checks approximate rational independence with the
    /// default cutoff and tolerance.
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        Self::with_check(omega, DEFAULT_K_CHECK, DEFAULT_RESONANCE_TOL)
    }

    /// Builds ω, rejecting any 0 < |k|₁ ≤ `k_check` with |ω·k| < `tol`.
    pub fn with_check(omega: Vec<f64>, k_check: usize, tol: f64) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Config("frequency vector must be nonempty".into()));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("frequency vector".into()));
        }
        let freq = Frequency { omega };
        for k in lattice::l1_shell(freq.dim(), k_check, true) {
            let div = freq.dot_compensated(&k).abs();
            if div < tol {
                return Err(Error::DivisorUnderflow { k, divisor: div });
            }
        }
        Ok(freq)
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.omega
    }

    /// ω·k in plain double precision.
    pub fn dot(&self, k: &[i64]) -> f64 {
        self.omega.iter().zip(k).map(|(w, &c)| w * c as f64).sum()
    }

    /// ω·k with error-free products and compensated summation, for
    /// small-divisor diagnostics where cancellation matters.
    pub fn dot_compensated(&self, k: &[i64]) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (w, &c) in self.omega.iter().zip(k) {
            let c = c as f64;
            let p = w * c;
            let p_err = w.mul_add(c, -p);
            let t = sum + p;
            let e = if sum.abs() >= p.abs() {
                (sum - t) + p
            } else {
                (p - t) + sum
            };
            sum = t;
            comp += e + p_err;
        }
        sum + comp
    }
}

/// Discretization of θ × x: Fourier box max-norm ≤ `k_theta`, `n_x`
/// spatial eigenmodes and the grid oversampling factor used for products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub k_theta: usize,
    pub n_x: usize,
    pub bc: BoundaryCondition,
    pub oversample: usize,
}

impl Truncation {
    pub fn new(k_theta: usize, n_x: usize, bc: BoundaryCondition) -> Result<Self> {
        Self::with_oversample(k_theta, n_x, bc, 2)
    }

    pub fn with_oversample(
        k_theta: usize,
        n_x: usize,
        bc: BoundaryCondition,
        oversample: usize,
    ) -> Result<Self> {
        let t = Truncation {
            k_theta,
            n_x,
            bc,
            oversample,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_theta < 1 {
            return Err(Error::Truncation("K_theta must be at least 1".into()));
        }
        if self.n_x < 1 {
            return Err(Error::Truncation("N_x must be at least 1".into()));
        }
        if self.oversample < 2 {
            return Err(Error::Truncation(
                "oversampling factor must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Parameters (ρ, j, m) of the weighted analytic-Sobolev norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub rho: f64,
    pub j: u32,
    pub m: u32,
}

impl NormParams {
    pub fn new(rho: f64, j: u32, m: u32) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Config(format!("rho must be positive, got {rho}")));
        }
        if j % 2 != 0 || m % 2 != 0 {
            return Err(Error::Config(format!(
                "Sobolev exponents must be even, got j = {j}, m = {m}"
            )));
        }
        Ok(NormParams { rho, j, m })
    }

    /// Checks the Banach-algebra hypotheses j > d and m > 1/2.
    pub fn require_algebra(&self, dim: usize) -> Result<()> {
        if (self.j as usize) <= dim || self.m == 0 {
            return Err(Error::Config(format!(
                "Banach algebra property needs j > d = {dim} and m > 1/2 (got j = {}, m = {})",
                self.j, self.m
            )));
        }
        Ok(())
    }
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams {
            rho: 0.1,
            j: 2,
            m: 2,
        }
    }
}
