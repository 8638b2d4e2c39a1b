//! Parameter values ε* where a multiplier of the linear part vanishes.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::elliptic::EllipticOperator;
use super::model::Variant;
use crate::error::Result;
use crate::spectral::{lattice, Frequency};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub eps: Complex64,
    pub k: Vec<i64>,
    pub n: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ResonanceList {
    pub items: Vec<Resonance>,
    /// (k, n) pairs with (2πω·k)² = λ_n, which have no finite resonance.
    pub skipped: Vec<(Vec<i64>, usize)>,
}

impl ResonanceList {
    /// Closest resonance to ε and its distance.
    pub fn nearest(&self, eps: Complex64) -> Option<(f64, &Resonance)> {
        self.items
            .iter()
            .map(|r| ((r.eps - eps).norm(), r))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Smallest |ε − ε*| / |ε*| over the list.
    pub fn nearest_relative(&self, eps: Complex64) -> Option<(f64, &Resonance)> {
        self.items
            .iter()
            .filter(|r| r.eps.norm() > 0.0)
            .map(|r| ((r.eps - eps).norm() / r.eps.norm(), r))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// CSV with columns re, im, k_1..k_d, n.
    pub fn write_csv<W: Write>(&self, mut w: W, dim: usize) -> Result<()> {
        let kcols: Vec<String> = (1..=dim).map(|i| format!("k{i}")).collect();
        writeln!(w, "re,im,{},n", kcols.join(","))?;
        for r in &self.items {
            let ks: Vec<String> = r.k.iter().map(|c| c.to_string()).collect();
            writeln!(
                w,
                "{:.17e},{:.17e},{},{}",
                r.eps.re,
                r.eps.im,
                ks.join(","),
                r.n
            )?;
        }
        Ok(())
    }
}

/// Resonant ε for 0 < |k|₁ ≤ `k_max` and spatial index n < `n_max`.
pub fn resonance_locations(
    variant: Variant,
    omega: &Frequency,
    op: &EllipticOperator,
    k_max: usize,
    n_max: usize,
) -> ResonanceList {
    let mut list = ResonanceList::default();
    let i = Complex64::new(0.0, 1.0);
    let n_max = n_max.min(op.lambda().len());
    for k in lattice::l1_shell(omega.dim(), k_max, false) {
        let tau = 2.0 * PI * omega.dot(&k);
        if tau == 0.0 {
            continue;
        }
        for n in 0..n_max {
            let lam = op.lambda()[n];
            let ld = op.delta_eigenvalues()[n];
            match variant {
                Variant::A | Variant::APrime => {
                    let friction = if variant == Variant::A { 1.0 } else { ld };
                    let denom = tau * tau - lam;
                    if denom.abs() <= 1e-14 * (tau * tau + lam.abs()) {
                        list.skipped.push((k.clone(), n));
                        continue;
                    }
                    list.items.push(Resonance {
                        eps: i * tau * friction / denom,
                        k: k.clone(),
                        n,
                    });
                }
                Variant::B | Variant::BPrime => {
                    let l = if variant == Variant::B { lam } else { ld };
                    let eps_sq = (Complex64::new(l, tau)) / (tau * tau);
                    let root = eps_sq.sqrt();
                    for r in [root, -root] {
                        list.items.push(Resonance {
                            eps: r,
                            k: k.clone(),
                            n,
                        });
                    }
                }
            }
        }
    }
    list.items.sort_by(|a, b| {
        a.eps
            .norm()
            .total_cmp(&b.eps.norm())
            .then(a.eps.re.total_cmp(&b.eps.re))
            .then(a.eps.im.total_cmp(&b.eps.im))
    });
    list
}
