//! Subcommand implementations. Every run writes into its own directory:
//! `config.toml` (echo), JSON reports and CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::Serialize;

use dampwave::explorer::{
    fit_residual_order, scan_epsilon, write_scan_csv, EpsGrid, ScanConfig, ScanStart,
};
use dampwave::fixedpoint::{contraction_estimate, picard_solve, HullSystem, PicardReport};
use dampwave::lindstedt::{expand, nonresonance_order, LindstedtConfig, LindstedtSeries};
use dampwave::operators::{
    gamma_lower_bound, resonance_locations, DomainSpec, ModelSpec, Variant,
};
use dampwave::spectral::{Profile, SpectralField};
use dampwave::zeroth_order::{
    solve_U0_modelB, solve_U0_modelBprime, solve_c0, NewtonConfig, U0Config,
};

use crate::config::{Config, StartKind};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    model_hash: String,
    variant: Variant,
    report: T,
}

/// Options shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: u64,
    pub strict: bool,
}

pub struct Run {
    pub cfg: Config,
    pub config_text: String,
    pub opts: RunOptions,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, command: &str, model: &ModelSpec, report: T) -> Result<()> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        model_hash: model.hash(),
        variant: model.variant(),
        report,
    };
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&env)?)
        .with_context(|| format!("writing {}", path.display()))
}

/// Zeroth order, hull system and U₀ (for B/B′).
pub struct Zeroth {
    pub system: HullSystem,
    pub u0: Option<SpectralField>,
    pub report: serde_json::Value,
    pub c0: Option<Profile>,
}

pub fn zeroth(model: &ModelSpec) -> Result<Zeroth> {
    match model.variant() {
        Variant::A | Variant::APrime => {
            let sol = solve_c0(
                model,
                &model.forcing().theta_average(),
                &Profile::zeros(model.disc()),
                &NewtonConfig::default(),
            )?;
            let system = HullSystem::new(model, Some(&sol.c0))?;
            Ok(Zeroth {
                system,
                u0: None,
                report: serde_json::to_value(&sol.report)?,
                c0: Some(sol.c0),
            })
        }
        Variant::B => {
            let sol = solve_U0_modelB(model, &U0Config::default())?;
            let system = HullSystem::new(model, None)?;
            Ok(Zeroth {
                system,
                u0: Some(sol.u0),
                report: serde_json::to_value(&sol.report)?,
                c0: None,
            })
        }
        Variant::BPrime => {
            let u0 = solve_U0_modelBprime(model)?;
            let system = HullSystem::new(model, None)?;
            Ok(Zeroth {
                system,
                u0: Some(u0),
                report: serde_json::json!({ "solver": "diagonal" }),
                c0: None,
            })
        }
    }
}

impl Run {
    pub fn new(config_text: String, opts: RunOptions) -> Result<Self> {
        let cfg = Config::parse(&config_text)?;
        Ok(Run {
            cfg,
            config_text,
            opts,
        })
    }

    fn prepare(&self) -> Result<()> {
        fs::create_dir_all(&self.opts.out)
            .with_context(|| format!("creating {}", self.opts.out.display()))?;
        fs::write(self.opts.out.join("config.toml"), &self.config_text)?;
        Ok(())
    }

    fn lindstedt_cfg(&self) -> Result<LindstedtConfig> {
        Ok(LindstedtConfig {
            rho: self.cfg.norm()?.rho,
            ..LindstedtConfig::default()
        })
    }

    fn series(&self, z: &Zeroth) -> Result<LindstedtSeries> {
        Ok(expand(
            &z.system,
            z.u0.as_ref(),
            self.cfg.fixedpoint.order,
            &self.lindstedt_cfg()?,
        )?)
    }

    fn write_zeroth(&self, z: &Zeroth) -> Result<()> {
        let dir = &self.opts.out;
        if let Some(c0) = &z.c0 {
            let mut csv = String::from("n,re,im\n");
            for (n, c) in c0.coeffs().iter().enumerate() {
                csv.push_str(&format!("{n},{:.17e},{:.17e}\n", c.re, c.im));
            }
            fs::write(dir.join("c0.csv"), csv)?;
        }
        if let Some(u0) = &z.u0 {
            fs::write(dir.join("u0.csv"), u0.to_csv(true))?;
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<PicardReport> {
        self.prepare()?;
        let model = self.cfg.model()?;
        let z = zeroth(&model)?;
        self.write_zeroth(&z)?;
        let series = self.series(&z)?;
        let fp = self.cfg.fixedpoint(self.opts.strict)?;
        let eps = self.cfg.eps();
        let start = series.evaluate(eps);
        let (u, report) = picard_solve(&z.system, eps, &start, &fp)?;
        let contraction = if self.cfg.fixedpoint.contraction_pairs > 0 {
            let radius = fp.beta().unwrap_or(0.1 * fp.alpha0);
            contraction_estimate(
                &z.system,
                eps,
                &u,
                radius,
                self.cfg.fixedpoint.contraction_pairs,
                self.opts.seed,
                &fp.norm,
            )
            .ok()
        } else {
            None
        };
        fs::write(self.opts.out.join("solution.csv"), u.to_csv(true))?;
        #[derive(Serialize)]
        struct SolveReport<'a> {
            zeroth: &'a serde_json::Value,
            lindstedt_order: usize,
            lindstedt_order_defects: &'a [f64],
            picard: &'a PicardReport,
            contraction_estimate: Option<f64>,
            seed: u64,
        }
        write_json(
            &self.opts.out,
            "solve.json",
            "solve",
            &model,
            SolveReport {
                zeroth: &z.report,
                lindstedt_order: series.order(),
                lindstedt_order_defects: series.order_defects(),
                picard: &report,
                contraction_estimate: contraction,
                seed: self.opts.seed,
            },
        )?;
        Ok(report)
    }

    pub fn lindstedt(&self) -> Result<()> {
        self.prepare()?;
        let model = self.cfg.model()?;
        let z = zeroth(&model)?;
        self.write_zeroth(&z)?;
        let series = self.series(&z)?;
        fs::write(self.opts.out.join("series.json"), series.to_json()?)?;
        let ladder: Vec<f64> = self
            .cfg
            .scan
            .ladder
            .iter()
            .map(|&p| 2f64.powi(-p))
            .collect();
        let fit = fit_residual_order(&series, &ladder, &self.cfg.norm()?);
        #[derive(Serialize)]
        struct LindstedtReport {
            order: usize,
            order_defects: Vec<f64>,
            fit: Option<dampwave::explorer::ResidualFit>,
            fit_error: Option<String>,
        }
        let (fit, fit_error) = match fit {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        write_json(
            &self.opts.out,
            "lindstedt.json",
            "lindstedt",
            &model,
            LindstedtReport {
                order: series.order(),
                order_defects: series.order_defects().to_vec(),
                fit,
                fit_error,
            },
        )
    }

    pub fn scan(&self) -> Result<usize> {
        self.prepare()?;
        let model = self.cfg.model()?;
        let z = zeroth(&model)?;
        let s = &self.cfg.scan;
        let start = match s.start {
            StartKind::Zero => ScanStart::Zero,
            StartKind::Series => ScanStart::Series(Box::new(self.series(&z)?)),
        };
        let (parabolic, sector) = match self.cfg.domain {
            Some(d @ DomainSpec::Parabolic { .. }) => (Some(d), None),
            Some(d @ DomainSpec::Sector { .. }) => (None, Some(d)),
            None => (None, None),
        };
        let scan_cfg = ScanConfig {
            fixedpoint: self.cfg.fixedpoint(false)?,
            parabolic,
            sector,
            strict: self.opts.strict,
            resonances: resonance_locations(model.variant(), model.omega(), z.system.op(), s.k_max, s.n_max),
            start,
        };
        let grid = EpsGrid {
            re_min: s.re_min,
            re_max: s.re_max,
            im_min: s.im_min,
            im_max: s.im_max,
            nx: s.nx,
            ny: s.ny,
        };
        let records = scan_epsilon(&z.system, &grid, &scan_cfg)?;
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &records)?;
        fs::write(self.opts.out.join("scan.csv"), buf)?;
        let converged = records.iter().filter(|r| r.converged).count();
        #[derive(Serialize)]
        struct ScanSummary {
            points: usize,
            attempted: usize,
            converged: usize,
            strict: bool,
        }
        write_json(
            &self.opts.out,
            "scan.json",
            "scan",
            &model,
            ScanSummary {
                points: records.len(),
                attempted: records.iter().filter(|r| r.attempted).count(),
                converged,
                strict: self.opts.strict,
            },
        )?;
        Ok(converged)
    }

    pub fn resonances(&self) -> Result<usize> {
        self.prepare()?;
        let model = self.cfg.model()?;
        let z = zeroth(&model)?;
        let s = &self.cfg.scan;
        let list = resonance_locations(model.variant(), model.omega(), z.system.op(), s.k_max, s.n_max);
        let mut buf = Vec::new();
        list.write_csv(&mut buf, model.omega().dim())?;
        fs::write(self.opts.out.join("resonances.csv"), buf)?;
        write_json(&self.opts.out, "resonances.json", "resonances", &model, &list)?;
        Ok(list.items.len())
    }

    pub fn omega_diag(&self) -> Result<dampwave::lindstedt::NonresonanceReport> {
        self.prepare()?;
        let model = self.cfg.model()?;
        let report = nonresonance_order(model.omega(), self.cfg.norm()?.rho, self.cfg.scan.k_check)?;
        write_json(&self.opts.out, "omega_diag.json", "omega-diag", &model, &report)?;
        Ok(report)
    }

    pub fn gamma(&self) -> Result<()> {
        self.prepare()?;
        let model = self.cfg.model()?;
        let z = zeroth(&model)?;
        let samples = self.cfg.scan.tau_samples;
        let grid = EpsGrid {
            re_min: self.cfg.scan.re_min,
            re_max: self.cfg.scan.re_max,
            im_min: self.cfg.scan.im_min,
            im_max: self.cfg.scan.im_max,
            nx: self.cfg.scan.nx,
            ny: self.cfg.scan.ny,
        };
        let mut out = String::from("re,im,in_domain,gamma,tau,n\n");
        for (_, _, eps) in grid.points()? {
            let b = gamma_lower_bound(model.variant(), z.system.op(), eps, samples);
            let inside = self.cfg.domain.map(|d| d.contains(eps).to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{:.17e},{:.17e},{inside},{:.17e},{:.17e},{}\n",
                eps.re, eps.im, b.value, b.tau, b.n
            ));
        }
        fs::write(self.opts.out.join("gamma.csv"), out)?;
        let at = gamma_lower_bound(model.variant(), z.system.op(), self.cfg.eps(), samples);
        write_json(&self.opts.out, "gamma.json", "gamma", &model, serde_json::json!({
            "eps": Complex64::new(self.cfg.fixedpoint.eps_re, self.cfg.fixedpoint.eps_im),
            "bound": at,
        }))
    }
}
