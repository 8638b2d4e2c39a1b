//! Coefficient fields û_{k,n} and their grid representations.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::basis::{basis_tables, SpatialBasis};
use super::lattice;
use super::params::Truncation;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shared layout of a truncated θ × x discretization.
///
/// Immutable after construction; fields hold it behind an `Arc`.
pub struct Discretization {
    dim: usize,
    trunc: Truncation,
    modes: Vec<Vec<i64>>,
    theta_index: Vec<usize>,
    theta_grid: usize,
    basis: SpatialBasis,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Discretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Discretization")
            .field("dim", &self.dim)
            .field("trunc", &self.trunc)
            .field("theta_grid", &self.theta_grid)
            .field("x_points", &self.basis.n_points())
            .finish()
    }
}

impl Discretization {
    pub fn new(dim: usize, trunc: Truncation) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::Config("torus dimension must be positive".into()));
        }
        trunc.validate()?;
        let basis = basis_tables(trunc.bc, &trunc)?;
        let modes = lattice::box_modes(dim, trunc.k_theta);
        let theta_grid = trunc.oversample * (2 * trunc.k_theta + 1);
        let theta_index = modes
            .iter()
            .map(|k| {
                k.iter().fold(0usize, |acc, &c| {
                    acc * theta_grid + c.rem_euclid(theta_grid as i64) as usize
                })
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft(theta_grid, FftDirection::Forward);
        let fft_inverse = planner.plan_fft(theta_grid, FftDirection::Inverse);
        Ok(Arc::new(Discretization {
            dim,
            trunc,
            modes,
            theta_index,
            theta_grid,
            basis,
            fft_forward,
            fft_inverse,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    pub fn basis(&self) -> &SpatialBasis {
        &self.basis
    }

    /// Fourier modes in storage order.
    pub fn modes(&self) -> &[Vec<i64>] {
        &self.modes
    }

    pub fn n_modes_theta(&self) -> usize {
        self.modes.len()
    }

    pub fn n_x(&self) -> usize {
        self.basis.n_modes()
    }

    /// Storage index of k = 0.
    pub fn zero_mode(&self) -> usize {
        self.modes.len() / 2
    }

    /// Storage index of −k given the index of k.
    pub fn negate(&self, idx: usize) -> usize {
        self.modes.len() - 1 - idx
    }

    /// Storage index of k, if it lies in the truncation box.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let r = self.trunc.k_theta as i64;
        let side = 2 * self.trunc.k_theta + 1;
        let mut idx = 0usize;
        for &c in k {
            if c.abs() > r {
                return None;
            }
            idx = idx * side + (c + r) as usize;
        }
        Some(idx)
    }

    pub fn theta_grid(&self) -> usize {
        self.theta_grid
    }

    /// Number of θ grid points, Gᵈ.
    pub fn theta_points(&self) -> usize {
        self.theta_grid.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.modes.len() * self.n_x()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// θ-grid coordinate (in [0,1)ᵈ) of flat θ index `t`.
    pub fn theta_point(&self, mut t: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for a in (0..self.dim).rev() {
            out[a] = (t % self.theta_grid) as f64 / self.theta_grid as f64;
            t /= self.theta_grid;
        }
        out
    }

    fn fft_block(&self, block: &mut [Complex64], inverse: bool) {
        let g = self.theta_grid;
        let fft = if inverse {
            &self.fft_inverse
        } else {
            &self.fft_forward
        };
        let mut line = vec![ZERO; g];
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        let total = block.len();
        for axis in 0..self.dim {
            let stride = g.pow((self.dim - 1 - axis) as u32);
            let outer = total / (g * stride);
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * g * stride + s;
                    for (q, slot) in line.iter_mut().enumerate() {
                        *slot = block[base + q * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (q, v) in line.iter().enumerate() {
                        block[base + q * stride] = *v;
                    }
                }
            }
        }
    }

    fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || (self.dim == other.dim && self.trunc == other.trunc)
    }
}

/// Which spatial eigenbasis the index n of a field refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BasisTag {
    /// Eigenfunctions of −Δ (the physical basis used for transforms).
    DeltaBasis,
    /// Eigenfunctions of the linearized operator ℒ.
    LBasis,
}

/// Complex coefficients û_{k,n} of u(θ,x) = Σ e^{2πik·θ} Φ_n(x) û_{k,n}.
#[derive(Clone)]
pub struct SpectralField {
    disc: Arc<Discretization>,
    coeffs: Vec<Complex64>,
    basis: BasisTag,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("basis", &self.basis)
            .field("modes", &self.disc.n_modes_theta())
            .field("n_x", &self.disc.n_x())
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl SpectralField {
    pub fn zeros(disc: &Arc<Discretization>) -> Self {
        SpectralField {
            disc: disc.clone(),
            coeffs: vec![ZERO; disc.len()],
            basis: BasisTag::DeltaBasis,
        }
    }

    pub fn from_coeffs(
        disc: &Arc<Discretization>,
        coeffs: Vec<Complex64>,
        basis: BasisTag,
    ) -> Result<Self> {
        if coeffs.len() != disc.len() {
            return Err(Error::Mismatch(format!(
                "expected {} coefficients, got {}",
                disc.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField {
            disc: disc.clone(),
            coeffs,
            basis,
        })
    }

    /// The field e^{2πik·θ}Φ_n · value (Δ-basis).
    pub fn single_mode(
        disc: &Arc<Discretization>,
        k: &[i64],
        n: usize,
        value: Complex64,
    ) -> Result<Self> {
        let mut u = Self::zeros(disc);
        u.set(k, n, value)?;
        Ok(u)
    }

    /// A θ-independent field carrying the given spatial profile.
    pub fn from_profile(profile: &Profile) -> Self {
        let mut u = Self::zeros(&profile.disc);
        let z = u.disc.zero_mode();
        let nx = u.disc.n_x();
        u.coeffs[z * nx..(z + 1) * nx].copy_from_slice(&profile.coeffs);
        u
    }

    pub fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn basis_tag(&self) -> BasisTag {
        self.basis
    }

    pub fn with_basis_tag(mut self, tag: BasisTag) -> Self {
        self.basis = tag;
        self
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficients of mode index `idx` (all n).
    pub fn row(&self, idx: usize) -> &[Complex64] {
        let nx = self.disc.n_x();
        &self.coeffs[idx * nx..(idx + 1) * nx]
    }

    pub fn row_mut(&mut self, idx: usize) -> &mut [Complex64] {
        let nx = self.disc.n_x();
        &mut self.coeffs[idx * nx..(idx + 1) * nx]
    }

    pub fn get(&self, k: &[i64], n: usize) -> Option<Complex64> {
        let idx = self.disc.index_of(k)?;
        self.row(idx).get(n).copied()
    }

    pub fn set(&mut self, k: &[i64], n: usize, value: Complex64) -> Result<()> {
        let idx = self
            .disc
            .index_of(k)
            .ok_or_else(|| Error::Truncation(format!("mode k = {k:?} outside the truncation")))?;
        if n >= self.disc.n_x() {
            return Err(Error::Truncation(format!(
                "spatial index {n} outside N_x = {}",
                self.disc.n_x()
            )));
        }
        self.row_mut(idx)[n] = value;
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference |û − v̂|.
    pub fn max_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scale(&self, s: Complex64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// In-place `self += s * other`.
    pub fn axpy(&mut self, s: Complex64, other: &SpectralField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        Ok(())
    }

    /// Applies a per-mode multiplier m(k, n) (in the field's own basis).
    pub fn map_modes<F>(&self, mut f: F) -> SpectralField
    where
        F: FnMut(&[i64], usize, Complex64) -> Complex64,
    {
        let nx = self.disc.n_x();
        let mut out = self.clone();
        for (idx, k) in self.disc.modes().iter().enumerate() {
            for n in 0..nx {
                let c = &mut out.coeffs[idx * nx + n];
                *c = f(k, n, *c);
            }
        }
        out
    }

    pub fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if !self.disc.same_as(&other.disc) {
            return Err(Error::Mismatch("fields use different truncations".into()));
        }
        if self.basis != other.basis {
            return Err(Error::Mismatch(format!(
                "basis mismatch: {:?} vs {:?}",
                self.basis, other.basis
            )));
        }
        Ok(())
    }

    /// Samples u on the θ × x grid.
    pub fn to_grid(&self) -> Result<GridField> {
        if self.basis != BasisTag::DeltaBasis {
            return Err(Error::Mismatch(
                "grid transforms need a field in the Δ basis".into(),
            ));
        }
        let disc = &self.disc;
        let nx = disc.n_x();
        let np = disc.basis.n_points();
        let gd = disc.theta_points();
        let nk = disc.n_modes_theta();

        let mut slices = vec![ZERO; nk * np];
        for i in 0..nk {
            let row = self.row(i);
            let out = &mut slices[i * np..(i + 1) * np];
            for (n, c) in row.iter().enumerate().take(nx) {
                if *c == ZERO {
                    continue;
                }
                for (o, phi) in out.iter_mut().zip(disc.basis.mode(n)) {
                    *o += c * phi;
                }
            }
        }

        let mut values = vec![ZERO; np * gd];
        for j in 0..np {
            let block = &mut values[j * gd..(j + 1) * gd];
            for (i, &t) in disc.theta_index.iter().enumerate() {
                block[t] = slices[i * np + j];
            }
            disc.fft_block(block, true);
        }
        Ok(GridField {
            disc: disc.clone(),
            values,
        })
    }

    /// θ-average ⟨u⟩(x): the k = 0 slice.
    pub fn theta_average(&self) -> Profile {
        let z = self.disc.zero_mode();
        Profile {
            disc: self.disc.clone(),
            coeffs: self.row(z).to_vec(),
        }
    }

    /// u − ⟨u⟩.
    pub fn oscillating_part(&self) -> SpectralField {
        let mut out = self.clone();
        let z = self.disc.zero_mode();
        out.row_mut(z).iter_mut().for_each(|c| *c = ZERO);
        out
    }

    /// Largest deviation from û_{−k,n} = conj(û_{k,n}).
    pub fn reality_defect(&self) -> f64 {
        let nk = self.disc.n_modes_theta();
        (0..nk)
            .flat_map(|i| {
                let j = self.disc.negate(i);
                self.row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| (a - b.conj()).norm())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

impl SpectralField {
    /// CSV dump with columns k_1..k_d, n, re, im (nonzero coefficients only
    /// when `sparse` is set).
    pub fn to_csv(&self, sparse: bool) -> String {
        let d = self.disc.dim();
        let mut out = String::new();
        let kcols: Vec<String> = (1..=d).map(|i| format!("k{i}")).collect();
        out.push_str(&format!("{},n,re,im\n", kcols.join(",")));
        for (idx, k) in self.disc.modes().iter().enumerate() {
            for (n, c) in self.row(idx).iter().enumerate() {
                if sparse && *c == ZERO {
                    continue;
                }
                let ks: Vec<String> = k.iter().map(|v| v.to_string()).collect();
                out.push_str(&format!(
                    "{},{n},{:.17e},{:.17e}\n",
                    ks.join(","),
                    c.re,
                    c.im
                ));
            }
        }
        out
    }

    /// Parses the output of [`SpectralField::to_csv`]; absent entries are zero.
    pub fn from_csv(disc: &Arc<Discretization>, csv: &str, basis: BasisTag) -> Result<Self> {
        let mut u = Self::zeros(disc).with_basis_tag(basis);
        let d = disc.dim();
        for (line_no, line) in csv.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != d + 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    line_no + 1,
                    d + 3,
                    parts.len()
                )));
            }
            let bad = |e: String| Error::Parse(format!("line {}: {e}", line_no + 1));
            let k = parts[..d]
                .iter()
                .map(|p| p.trim().parse::<i64>().map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let n = parts[d]
                .trim()
                .parse::<usize>()
                .map_err(|e| bad(e.to_string()))?;
            let re = parts[d + 1]
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(e.to_string()))?;
            let im = parts[d + 2]
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(e.to_string()))?;
            u.set(&k, n, Complex64::new(re, im))?;
        }
        Ok(u)
    }
}

impl<'a> Add for &'a SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &'a SpectralField) -> SpectralField {
        debug_assert!(self.check_compatible(rhs).is_ok());
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        out
    }
}

impl<'a> Sub for &'a SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &'a SpectralField) -> SpectralField {
        debug_assert!(self.check_compatible(rhs).is_ok());
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: Complex64) -> SpectralField {
        self.scale(rhs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// Spatial profile S(x) = Σ_n Φ_n(x) Ŝ_n in the Δ basis.
#[derive(Clone)]
pub struct Profile {
    disc: Arc<Discretization>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Profile {
    pub fn zeros(disc: &Arc<Discretization>) -> Self {
        Profile {
            disc: disc.clone(),
            coeffs: vec![ZERO; disc.n_x()],
        }
    }

    pub fn from_coeffs(disc: &Arc<Discretization>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != disc.n_x() {
            return Err(Error::Mismatch(format!(
                "expected {} spatial coefficients, got {}",
                disc.n_x(),
                coeffs.len()
            )));
        }
        Ok(Profile {
            disc: disc.clone(),
            coeffs,
        })
    }

    pub fn from_real(disc: &Arc<Discretization>, coeffs: &[f64]) -> Result<Self> {
        Self::from_coeffs(
            disc,
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    /// Projects a pointwise function of x onto the retained modes.
    pub fn project<F: Fn(f64) -> Complex64>(disc: &Arc<Discretization>, f: F) -> Self {
        let basis = disc.basis();
        let values: Vec<Complex64> = basis.points().iter().map(|&x| f(x)).collect();
        Self::from_point_values(disc, &values)
    }

    pub fn from_point_values(disc: &Arc<Discretization>, values: &[Complex64]) -> Self {
        let basis = disc.basis();
        let coeffs = (0..basis.n_modes())
            .map(|n| {
                basis
                    .mode(n)
                    .iter()
                    .zip(basis.weights())
                    .zip(values)
                    .map(|((p, w), v)| v * (p * w))
                    .sum()
            })
            .collect();
        Profile {
            disc: disc.clone(),
            coeffs,
        }
    }

    pub fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Values at the spatial grid points.
    pub fn point_values(&self) -> Vec<Complex64> {
        let basis = self.disc.basis();
        let mut out = vec![ZERO; basis.n_points()];
        for (n, c) in self.coeffs.iter().enumerate() {
            for (o, phi) in out.iter_mut().zip(basis.mode(n)) {
                *o += c * phi;
            }
        }
        out
    }

    /// Euclidean norm of the coefficient vector (= L² norm of the profile).
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_diff(&self, other: &Profile) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Samples of u on the oversampled θ × x grid, x-major.
#[derive(Clone)]
pub struct GridField {
    disc: Arc<Discretization>,
    values: Vec<Complex64>,
}

impl fmt::Debug for GridField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridField")
            .field("points", &self.values.len())
            .finish()
    }
}

impl GridField {
    pub fn constant(disc: &Arc<Discretization>, value: Complex64) -> Self {
        GridField {
            disc: disc.clone(),
            values: vec![value; disc.basis().n_points() * disc.theta_points()],
        }
    }

    /// Samples a θ-independent profile on the full grid.
    pub fn from_profile(profile: &Profile) -> Self {
        let disc = profile.disc();
        let gd = disc.theta_points();
        let pv = profile.point_values();
        let mut values = Vec::with_capacity(pv.len() * gd);
        for v in pv {
            values.extend(std::iter::repeat_n(v, gd));
        }
        GridField {
            disc: disc.clone(),
            values,
        }
    }

    pub fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Iterates over (x, value) pairs in storage order.
    pub fn iter_with_x(&self) -> impl Iterator<Item = (f64, &Complex64)> + '_ {
        let gd = self.disc.theta_points();
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.disc.basis().points()[i / gd], v))
    }

    /// Pointwise map with access to the spatial coordinate.
    pub fn try_map<F>(&self, mut f: F) -> Result<GridField>
    where
        F: FnMut(Complex64, f64) -> Result<Complex64>,
    {
        let gd = self.disc.theta_points();
        let pts = self.disc.basis().points();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| f(*v, pts[i / gd]))
            .collect::<Result<Vec<_>>>()?;
        Ok(GridField {
            disc: self.disc.clone(),
            values,
        })
    }

    pub fn zip_with<F>(&self, other: &GridField, mut f: F) -> GridField
    where
        F: FnMut(Complex64, Complex64) -> Complex64,
    {
        GridField {
            disc: self.disc.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Coefficients of the grid function, truncated to the working band.
    pub fn to_spectral(&self) -> SpectralField {
        let disc = &self.disc;
        let nx = disc.n_x();
        let np = disc.basis().n_points();
        let gd = disc.theta_points();
        let nk = disc.n_modes_theta();
        let inv = 1.0 / gd as f64;

        let mut slices = vec![ZERO; nk * np];
        let mut block = vec![ZERO; gd];
        for j in 0..np {
            block.copy_from_slice(&self.values[j * gd..(j + 1) * gd]);
            disc.fft_block(&mut block, false);
            for (i, &t) in disc.theta_index.iter().enumerate() {
                slices[i * np + j] = block[t] * inv;
            }
        }

        let basis = disc.basis();
        let mut coeffs = vec![ZERO; nk * nx];
        for i in 0..nk {
            let s = &slices[i * np..(i + 1) * np];
            for n in 0..nx {
                coeffs[i * nx + n] = s
                    .iter()
                    .zip(basis.mode(n))
                    .zip(basis.weights())
                    .map(|((v, p), w)| v * (p * w))
                    .sum();
            }
        }
        SpectralField {
            disc: disc.clone(),
            coeffs,
            basis: BasisTag::DeltaBasis,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl<'a> Mul for &'a GridField {
    type Output = GridField;
    fn mul(self, rhs: &'a GridField) -> GridField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl<'a> Add for &'a GridField {
    type Output = GridField;
    fn add(self, rhs: &'a GridField) -> GridField {
        self.zip_with(rhs, |a, b| a + b)
    }
}
