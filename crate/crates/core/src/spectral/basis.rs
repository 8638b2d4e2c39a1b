//! Eigenpairs of −Δ on the unit circle or unit interval, sampled on a
//! quadrature grid that is exact for products of the retained modes.

use std::f64::consts::{PI, SQRT_2};

use super::params::{BoundaryCondition, Truncation};
use crate::error::{Error, Result};

/// Orthonormal spatial basis Φ_n of −Δ together with a quadrature rule.
#[derive(Clone, Debug)]
pub struct SpatialBasis {
    bc: BoundaryCondition,
    eigenvalues: Vec<f64>,
    labels: Vec<String>,
    points: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major `n_modes × n_points` samples Φ_n(x_j).
    samples: Vec<f64>,
    /// Φ_n = scale_n · (classical profile), e.g. √2 for sin(πnx).
    scales: Vec<f64>,
}

/// Eigenpairs of −Δ for `bc` at the grid resolution implied by `trunc`.
pub fn basis_tables(bc: BoundaryCondition, trunc: &Truncation) -> Result<SpatialBasis> {
    trunc.validate()?;
    let grid = match bc {
        BoundaryCondition::Dirichlet => trunc.oversample * (trunc.n_x + 1),
        BoundaryCondition::Neumann => trunc.oversample * trunc.n_x.max(1),
        BoundaryCondition::Periodic => trunc.oversample * (trunc.n_x + 1),
    };
    SpatialBasis::with_grid(bc, trunc.n_x, grid)
}

impl SpatialBasis {
    /// Builds the first `n_modes` eigenfunctions on a grid with spacing
    /// 1/`n_grid`. Fails when the grid cannot resolve the requested modes.
    pub fn with_grid(bc: BoundaryCondition, n_modes: usize, n_grid: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Truncation("N_x must be at least 1".into()));
        }
        let h = 1.0 / n_grid as f64;
        let (points, weights): (Vec<f64>, Vec<f64>) = match bc {
            BoundaryCondition::Dirichlet => {
                if n_modes + 1 > n_grid {
                    return Err(Error::Truncation(format!(
                        "N_x = {n_modes} exceeds the sine grid resolution {n_grid}"
                    )));
                }
                (1..n_grid).map(|j| (j as f64 * h, h)).unzip()
            }
            BoundaryCondition::Neumann => {
                if n_modes > n_grid {
                    return Err(Error::Truncation(format!(
                        "N_x = {n_modes} exceeds the cosine grid resolution {n_grid}"
                    )));
                }
                (0..=n_grid)
                    .map(|j| {
                        let w = if j == 0 || j == n_grid { 0.5 * h } else { h };
                        (j as f64 * h, w)
                    })
                    .unzip()
            }
            BoundaryCondition::Periodic => {
                let max_freq = n_modes / 2;
                if 2 * max_freq >= n_grid {
                    return Err(Error::Truncation(format!(
                        "N_x = {n_modes} exceeds the periodic grid resolution {n_grid}"
                    )));
                }
                (0..n_grid).map(|j| (j as f64 * h, h)).unzip()
            }
        };

        let mut eigenvalues = Vec::with_capacity(n_modes);
        let mut labels = Vec::with_capacity(n_modes);
        let mut scales = Vec::with_capacity(n_modes);
        let mut samples = Vec::with_capacity(n_modes * points.len());
        for idx in 0..n_modes {
            let (lambda, label, scale, profile): (f64, String, f64, Box<dyn Fn(f64) -> f64>) =
                match bc {
                    BoundaryCondition::Dirichlet => {
                        let n = (idx + 1) as f64;
                        (
                            (PI * n).powi(2),
                            format!("sin{}", idx + 1),
                            SQRT_2,
                            Box::new(move |x: f64| (PI * n * x).sin()),
                        )
                    }
                    BoundaryCondition::Neumann => {
                        let n = idx as f64;
                        let scale = if idx == 0 { 1.0 } else { SQRT_2 };
                        let label = if idx == 0 {
                            "const".to_string()
                        } else {
                            format!("cos{idx}")
                        };
                        (
                            (PI * n).powi(2),
                            label,
                            scale,
                            Box::new(move |x: f64| (PI * n * x).cos()),
                        )
                    }
                    BoundaryCondition::Periodic => {
                        if idx == 0 {
                            (0.0, "const".to_string(), 1.0, Box::new(|_x: f64| 1.0))
                        } else {
                            let m = ((idx + 1) / 2) as f64;
                            let lambda = (2.0 * PI * m).powi(2);
                            if idx % 2 == 1 {
                                (
                                    lambda,
                                    format!("cos{}", (idx + 1) / 2),
                                    SQRT_2,
                                    Box::new(move |x: f64| (2.0 * PI * m * x).cos()),
                                )
                            } else {
                                (
                                    lambda,
                                    format!("sin{}", (idx + 1) / 2),
                                    SQRT_2,
                                    Box::new(move |x: f64| (2.0 * PI * m * x).sin()),
                                )
                            }
                        }
                    }
                };
            eigenvalues.push(lambda);
            labels.push(label);
            scales.push(scale);
            samples.extend(points.iter().map(|&x| scale * profile(x)));
        }

        Ok(SpatialBasis {
            bc,
            eigenvalues,
            labels,
            points,
            weights,
            samples,
            scales,
        })
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// λ_n^Δ, nondecreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Human-readable mode labels (`sin1`, `cos0`, `const`, …).
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of the mode with the given label.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        let label = label.trim().to_ascii_lowercase();
        let label = if label == "cos0" {
            "const".to_string()
        } else {
            label
        };
        self.labels.iter().position(|l| *l == label)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Φ_n sampled on the grid.
    pub fn mode(&self, n: usize) -> &[f64] {
        let np = self.points.len();
        &self.samples[n * np..(n + 1) * np]
    }

    /// Normalisation factor between Φ_n and its classical profile.
    pub fn scale(&self, n: usize) -> f64 {
        self.scales[n]
    }

    /// Quadrature Gram matrix ∫ Φ_n Φ_m, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let nm = self.n_modes();
        let mut g = vec![0.0; nm * nm];
        for a in 0..nm {
            for b in 0..nm {
                g[a * nm + b] = self
                    .mode(a)
                    .iter()
                    .zip(self.mode(b))
                    .zip(&self.weights)
                    .map(|((p, q), w)| p * q * w)
                    .sum();
            }
        }
        g
    }
}
