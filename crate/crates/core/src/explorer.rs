//! ε-plane scans, residual-order fits and the Cauchy-integral check.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixedpoint::{picard_solve, FixedPointConfig, HullSystem};
use crate::lindstedt::LindstedtSeries;
use crate::operators::linear::conditioning;
use crate::operators::{DomainSpec, ResonanceList};
use crate::spectral::{NormParams, SpectralField};

/// Rectangle [re_min, re_max] × [im_min, im_max] sampled on nx × ny points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl EpsGrid {
    pub fn points(&self) -> Result<Vec<(usize, usize, Complex64)>> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Config(
                "scan grid needs at least one point per axis".into(),
            ));
        }
        let lerp = |a: f64, b: f64, i: usize, n: usize| {
            if n == 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        Ok((0..self.ny)
            .flat_map(|iy| (0..self.nx).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| {
                let eps = Complex64::new(
                    lerp(self.re_min, self.re_max, ix, self.nx),
                    lerp(self.im_min, self.im_max, iy, self.ny),
                );
                (ix, iy, eps)
            })
            .collect())
    }
}

/// Where each scan point starts its Picard iteration.
#[derive(Clone, Debug)]
pub enum ScanStart {
    Zero,
    Series(Box<LindstedtSeries>),
}

impl ScanStart {
    fn at(&self, system: &HullSystem, eps: Complex64) -> SpectralField {
        match self {
            ScanStart::Zero => SpectralField::zeros(system.model().disc()),
            ScanStart::Series(s) => s.evaluate(eps),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub fixedpoint: FixedPointConfig,
    pub parabolic: Option<DomainSpec>,
    pub sector: Option<DomainSpec>,
    /// Only attempt points inside one of the configured domains.
    pub strict: bool,
    pub resonances: ResonanceList,
    pub start: ScanStart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub ix: usize,
    pub iy: usize,
    pub re: f64,
    pub im: f64,
    pub in_parabolic: Option<bool>,
    pub in_sector: Option<bool>,
    pub attempted: bool,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub contraction_ratio: Option<f64>,
    pub nearest_resonance: Option<f64>,
    pub failure: Option<String>,
}

fn scan_point(
    system: &HullSystem,
    cfg: &ScanConfig,
    ix: usize,
    iy: usize,
    mut eps: Complex64,
) -> ScanRecord {
    let in_parabolic = cfg.parabolic.map(|d| d.contains(eps));
    let in_sector = cfg.sector.map(|d| d.contains(eps));
    let inside = in_parabolic == Some(true) || in_sector == Some(true);
    let mut rec = ScanRecord {
        ix,
        iy,
        re: eps.re,
        im: eps.im,
        in_parabolic,
        in_sector,
        attempted: false,
        converged: false,
        iterations: None,
        residual: None,
        contraction_ratio: None,
        nearest_resonance: cfg.resonances.nearest(eps).map(|(d, _)| d),
        failure: None,
    };
    if cfg.strict && !inside {
        rec.failure = Some("out_of_domain".into());
        return rec;
    }
    let omega = system.model().omega();
    if let Ok(c) = conditioning(system.variant(), omega, system.op(), eps) {
        if c.ratio == 0.0 {
            eps += Complex64::new(1e-12, 1e-12);
        }
    }
    rec.attempted = true;
    let mut fp = cfg.fixedpoint;
    fp.domain = None;
    fp.strict = false;
    let start = cfg.start.at(system, eps);
    match picard_solve(system, eps, &start, &fp) {
        Ok((_, report)) => {
            rec.converged = true;
            rec.iterations = Some(report.iterations);
            rec.residual = Some(report.residual.value);
            rec.contraction_ratio = report.contraction_ratio;
        }
        Err(e) => {
            if let Error::MaxIterations { iterations, .. } | Error::BallExit { iterations, .. } = e
            {
                rec.iterations = Some(iterations);
            }
            rec.failure = Some(e.to_string());
        }
    }
    rec
}

/// One record per grid point, row-major in (iy, ix); failures are recorded.
pub fn scan_epsilon(
    system: &HullSystem,
    grid: &EpsGrid,
    cfg: &ScanConfig,
) -> Result<Vec<ScanRecord>> {
    let points = grid.points()?;
    Ok(points
        .par_iter()
        .map(|&(ix, iy, eps)| scan_point(system, cfg, ix, iy, eps))
        .collect())
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_scan_csv<W: Write>(mut w: W, records: &[ScanRecord]) -> Result<()> {
    writeln!(
        w,
        "ix,iy,re,im,in_parabolic,in_sector,attempted,converged,iterations,residual,contraction_ratio,nearest_resonance,failure"
    )?;
    for r in records {
        let failure = r.failure.as_deref().unwrap_or("").replace(['"', ','], ";");
        writeln!(
            w,
            "{},{},{:.17e},{:.17e},{},{},{},{},{},{},{},{},{}",
            r.ix,
            r.iy,
            r.re,
            r.im,
            opt(&r.in_parabolic),
            opt(&r.in_sector),
            r.attempted,
            r.converged,
            opt(&r.iterations),
            r.residual.map(|v| format!("{v:.6e}")).unwrap_or_default(),
            r.contraction_ratio
                .map(|v| format!("{v:.6e}"))
                .unwrap_or_default(),
            r.nearest_resonance
                .map(|v| format!("{v:.6e}"))
                .unwrap_or_default(),
            failure
        )?;
    }
    Ok(())
}

/// Residuals below this fraction of the zero-field residual are treated as
/// roundoff.
pub const RESIDUAL_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// (ε, ‖F_ε(U^{(M)})‖) for every ladder point.
    pub points: Vec<(f64, f64)>,
    pub used: usize,
}

/// Least-squares slope of log‖F_ε(U^{(M)})‖ against log ε.
pub fn fit_residual_order(
    series: &LindstedtSeries,
    eps_list: &[f64],
    params: &NormParams,
) -> Result<ResidualFit> {
    if eps_list.len() < 5 {
        return Err(Error::Config(format!(
            "a residual fit needs at least 5 ladder points (got {})",
            eps_list.len()
        )));
    }
    let system = series.system();
    let zero = SpectralField::zeros(system.model().disc());
    let rows = eps_list
        .par_iter()
        .map(|&e| {
            let eps = Complex64::new(e, 0.0);
            let r = series.residual(eps, params)?.value;
            let r0 = system.hull_residual(eps, &zero, params)?.value;
            Ok((e, r, r0))
        })
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, r, r0)| *r > RESIDUAL_FLOOR * r0 && *r > 0.0)
        .map(|(e, r, _)| (e.ln(), r.ln()))
        .collect();
    if usable.len() < 5 {
        let kept: Vec<f64> = rows
            .iter()
            .filter(|(_, r, r0)| *r > RESIDUAL_FLOOR * r0)
            .map(|(e, _, _)| *e)
            .collect();
        let range = match (
            kept.iter().cloned().reduce(f64::min),
            kept.iter().cloned().reduce(f64::max),
        ) {
            (Some(a), Some(b)) => format!("usable ε in [{a:e}, {b:e}]"),
            _ => "no usable ε".into(),
        };
        return Err(Error::ResidualUnderflow {
            usable: usable.len(),
            range,
        });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(ResidualFit {
        slope,
        intercept,
        r_squared,
        points: rows.iter().map(|(e, r, _)| (*e, *r)).collect(),
        used: usable.len(),
    })
}

/// Membership in the union of the domain family over its scale parameter:
/// ξ > Bη² (ε ≠ 0) for the parabolic family, Re(−ε²) > 0 or real ε ≠ 0 for
/// the sector family.
pub fn in_domain_family(eps: Complex64, dom: &DomainSpec) -> bool {
    if eps.norm() == 0.0 {
        return false;
    }
    match *dom {
        DomainSpec::Parabolic { b, .. } => eps.re > b * eps.im * eps.im,
        DomainSpec::Sector { .. } => (-(eps * eps)).re > 0.0 || eps.im == 0.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub center: Complex64,
    pub radius: f64,
    pub n_samples: usize,
    /// max |U_c − (1/n)Σ U(ε_j)| / max |U_c| over coefficients.
    pub deviation: f64,
    pub max_iterations: usize,
}

/// Compares U at `center` with the trapezoidal Cauchy mean over the circle.
pub fn cauchy_check(
    system: &HullSystem,
    center: Complex64,
    radius: f64,
    n_samples: usize,
    cfg: &FixedPointConfig,
    start: &ScanStart,
) -> Result<CauchyReport> {
    if n_samples < 3 || !(radius > 0.0) {
        return Err(Error::Config(
            "Cauchy check needs radius > 0 and at least 3 samples".into(),
        ));
    }
    let domain = cfg
        .domain
        .ok_or_else(|| Error::Precondition("Cauchy check needs a configured domain".into()))?;
    let dense = 8 * n_samples;
    for j in 0..=dense {
        let eps = center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / dense as f64);
        if !in_domain_family(eps, &domain) {
            return Err(Error::Precondition(format!(
                "circle |ε − {center}| = {radius} leaves the domain family of {domain} at ε = {eps}"
            )));
        }
    }
    let mut fp = *cfg;
    fp.domain = None;
    let solve = |eps: Complex64| {
        picard_solve(system, eps, &start.at(system, eps), &fp).map(|(u, r)| (u, r.iterations))
    };
    let (uc, it_c) = solve(center)?;
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            solve(center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / n_samples as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut mean = SpectralField::zeros(system.model().disc());
    let mut max_it = it_c;
    for (u, it) in &samples {
        mean = &mean + u;
        max_it = max_it.max(*it);
    }
    let mean = &mean * (1.0 / n_samples as f64);
    let scale = uc.max_abs();
    let deviation = if scale == 0.0 {
        mean.max_abs()
    } else {
        mean.max_diff(&uc) / scale
    };
    Ok(CauchyReport {
        center,
        radius,
        n_samples,
        deviation,
        max_iterations: max_it,
    })
}
