//! Periodic spectral discretization: grid construction, transforms,
//! Fourier-multiplier application, Sobolev / weighted-L¹ norms and 2/3-rule
//! dealiasing.
//!
//! Fields store Fourier *series* coefficients c_j in FFT order,
//! u(x) = Σ_j c_j e^{i k_j x} with k_j on the lattice {2πj/P}. With this
//! convention `sobolev_norm(·, 0)` equals the physical L² quadrature
//! exactly (discrete Parseval), and the continuum H^s integral
//! (Σ |û(k)|² (1+k²)^s Δk)^{1/2} is recovered with Δk = 2π/P.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::symbols::DispersionSymbol;
use crate::{Error, Result};

/// Initial envelope families recognized by the grid sizing rule. The
/// boundary-decay cut W is chosen so the envelope magnitude is below 1e-12
/// at |X| = width·W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EnvelopeShape {
    Sech,
    Gaussian,
}

impl EnvelopeShape {
    pub fn boundary_cut(self) -> f64 {
        match self {
            EnvelopeShape::Sech => 30.0,
            EnvelopeShape::Gaussian => 9.0,
        }
    }
}

pub const DEFAULT_MAX_POINTS: usize = 1 << 21;

/// Periodic grid with wavenumber lattice {2πj/P}; the carrier k₀ is exactly
/// representable: k₀ = 2π·k0_index/P. Immutable; FFT plans are cached inside
/// and shared by clones.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    period: f64,
    k0_index: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("period", &self.period)
            .field("k0_index", &self.k0_index)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.period == other.period && self.k0_index == other.k0_index
    }
}

impl SpectralGrid {
    pub fn new(n: usize, period: f64, k0_index: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 16 {
            return Err(Error::InvalidParameter {
                name: "n_points",
                reason: format!("must be a power of two ≥ 16, got {n}"),
            });
        }
        if !(period > 0.0) {
            return Err(Error::InvalidParameter {
                name: "period",
                reason: format!("must be positive, got {period}"),
            });
        }
        if k0_index >= n / 2 {
            return Err(Error::InvalidParameter {
                name: "k0_index",
                reason: format!("{k0_index} not below Nyquist index {}", n / 2),
            });
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Self {
            n,
            period,
            k0_index,
            fwd,
            inv,
        })
    }

    /// Size a grid for a wave packet at carrier k₀ with a localized envelope.
    ///
    /// P is the smallest admissible period (k₀P/2π integer) with
    /// P ≥ 2·width·W/ε so the envelope A(εx) has decayed below 1e-12 at the
    /// boundary; n is the smallest power of two resolving
    /// |k| ≤ oversample·5k₀ (so the 2/3-dealiased band still contains the
    /// carrier multiples up to 5k₀ used by the approximation).
    pub fn make_grid(
        k0: f64,
        eps: f64,
        envelope_width: f64,
        shape: EnvelopeShape,
        oversample: f64,
        max_points: Option<usize>,
    ) -> Result<Self> {
        if !(k0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "k0",
                reason: format!("must be positive, got {k0}"),
            });
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("must lie in (0, 1), got {eps}"),
            });
        }
        if !(envelope_width > 0.0) {
            return Err(Error::InvalidParameter {
                name: "envelope_width",
                reason: format!("must be positive, got {envelope_width}"),
            });
        }
        if !(oversample >= 2.0) {
            return Err(Error::InvalidParameter {
                name: "oversample",
                reason: format!("must be ≥ 2, got {oversample}"),
            });
        }
        let max_points = max_points.unwrap_or(DEFAULT_MAX_POINTS);
        let p_min = 2.0 * envelope_width * shape.boundary_cut() / eps;
        let k0_index = (p_min * k0 / (2.0 * std::f64::consts::PI)).ceil().max(1.0) as usize;
        let period = 2.0 * std::f64::consts::PI * k0_index as f64 / k0;
        let k_resolve = oversample * 5.0 * k0;
        let mut n: usize = 16;
        while (n as f64) * std::f64::consts::PI / period < k_resolve {
            n *= 2;
            if n > max_points {
                return Err(Error::GridTooLarge {
                    needed: n,
                    max: max_points,
                });
            }
        }
        Self::new(n, period, k0_index)
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn k0_index(&self) -> usize {
        self.k0_index
    }

    pub fn k0(&self) -> f64 {
        self.delta_k() * self.k0_index as f64
    }

    pub fn delta_k(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }

    pub fn delta_x(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn nyquist(&self) -> f64 {
        self.delta_k() * (self.n / 2) as f64
    }

    /// 2/3-rule cutoff: modes with |k| above this are zeroed by `dealias`.
    pub fn dealias_cutoff(&self) -> f64 {
        2.0 / 3.0 * self.nyquist()
    }

    /// Signed lattice index of storage slot j (FFT order).
    pub fn signed_index(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Storage slot of signed lattice index s ∈ [-n/2, n/2).
    pub fn storage_index(&self, s: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if s < -half || s >= half {
            None
        } else if s >= 0 {
            Some(s as usize)
        } else {
            Some((s + self.n as i64) as usize)
        }
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        self.signed_index(j) as f64 * self.delta_k()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    /// Physical sample points x_m = m·P/n on [0, P).
    pub fn points(&self) -> Vec<f64> {
        let dx = self.delta_x();
        (0..self.n).map(|m| m as f64 * dx).collect()
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
        let scale = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }
}

/// Multiplier prefactor: either the symbol itself or i times it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefactor {
    One,
    I,
}

/// A field stored as spectral coefficients on a grid. `is_real` asserts
/// Hermitian symmetry c(-k) = conj(c(k)).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
    is_real: bool,
}

impl SpectralField {
    pub fn zero(grid: &SpectralGrid, is_real: bool) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points()],
            is_real,
        }
    }

    pub fn from_coeffs(grid: &SpectralGrid, coeffs: Vec<Complex64>, is_real: bool) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients on a {}-point grid",
                coeffs.len(),
                grid.n_points()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
            is_real,
        })
    }

    pub fn from_physical_real(grid: &SpectralGrid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} samples on a {}-point grid",
                samples.len(),
                grid.n_points()
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.fft_forward(&mut buf);
        Ok(Self {
            grid: grid.clone(),
            coeffs: buf,
            is_real: true,
        })
    }

    pub fn from_physical_complex(grid: &SpectralGrid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} samples on a {}-point grid",
                samples.len(),
                grid.n_points()
            )));
        }
        let mut buf = samples.to_vec();
        grid.fft_forward(&mut buf);
        Ok(Self {
            grid: grid.clone(),
            coeffs: buf,
            is_real: false,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn set_real_flag(&mut self, flag: bool) {
        self.is_real = flag;
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft_inverse(&mut buf);
        buf
    }

    /// Physical samples of a real field (real parts; symmetry is asserted
    /// elsewhere, not re-checked here).
    pub fn to_physical_real(&self) -> Vec<f64> {
        self.to_physical().iter().map(|c| c.re).collect()
    }

    /// Max |c(-k) - conj(c(k))| over paired modes, relative to the largest
    /// coefficient magnitude (0 for the zero field).
    pub fn hermitian_error(&self) -> f64 {
        let n = self.grid.n_points();
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        // the unpaired Nyquist mode and the mean must be real
        let mut worst = self.coeffs[n / 2].im.abs();
        worst = worst.max(self.coeffs[0].im.abs());
        for j in 1..n / 2 {
            let diff = (self.coeffs[n - j] - self.coeffs[j].conj()).norm();
            worst = worst.max(diff);
        }
        worst / scale
    }

    /// Project onto the Hermitian-symmetric subspace (and zero the unpaired
    /// Nyquist mode).
    pub fn enforce_hermitian(&mut self) {
        let n = self.grid.n_points();
        self.coeffs[0] = Complex64::new(self.coeffs[0].re, 0.0);
        self.coeffs[n / 2] = Complex64::new(self.coeffs[n / 2].re, 0.0);
        for j in 1..n / 2 {
            let avg = 0.5 * (self.coeffs[j] + self.coeffs[n - j].conj());
            self.coeffs[j] = avg;
            self.coeffs[n - j] = avg.conj();
        }
        self.is_real = true;
    }

    /// coefficient(k) ← prefactor·γ(k)·coefficient(k). With prefactor i, an
    /// odd real symbol and a real field the result is real again (iγ is a
    /// Hermitian-symmetric multiplier); with prefactor 1 the oddness breaks
    /// the symmetry and the flag is dropped.
    pub fn apply_multiplier(&self, sym: &DispersionSymbol, prefactor: Prefactor) -> SpectralField {
        let pref = match prefactor {
            Prefactor::One => Complex64::new(1.0, 0.0),
            Prefactor::I => Complex64::new(0.0, 1.0),
        };
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            *c *= pref * sym.eval(self.grid.wavenumber(j));
        }
        out.is_real = self.is_real && prefactor == Prefactor::I;
        out
    }

    /// Apply a scalar multiplier m(k).
    pub fn map_multiplier(&self, m: impl Fn(f64) -> Complex64) -> SpectralField {
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            *c *= m(self.grid.wavenumber(j));
        }
        out.is_real = false;
        out
    }

    /// ∂_x^ℓ as the multiplier (ik)^ℓ; preserves realness for every ℓ.
    pub fn derivative(&self, ell: usize) -> SpectralField {
        let real = self.is_real;
        let mut out = self.map_multiplier(|k| Complex64::new(0.0, k).powu(ell as u32));
        out.is_real = real;
        out
    }

    /// Discrete H^s norm: (Σ |û(k)|² (1+k²)^s Δk)^{1/2} in the unitary
    /// normalization, i.e. (P·Σ_j |c_j|² (1+k_j²)^s)^{1/2}; coincides with
    /// the physical L² quadrature at s = 0.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(j);
            acc += c.norm_sqr() * (1.0 + k * k).powf(s);
        }
        let val = (acc * self.grid.period()).sqrt();
        if !val.is_finite() {
            return Err(Error::NonFinite("sobolev_norm"));
        }
        Ok(val)
    }

    /// Discrete L¹(s) norm of the Fourier transform:
    /// Σ |û(k)|(1+k²)^{s/2} Δk = √(2π)·Σ_j |c_j| (1+k_j²)^{s/2}.
    pub fn l1s_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(j);
            acc += c.norm() * (1.0 + k * k).powf(s / 2.0);
        }
        acc * (2.0 * std::f64::consts::PI).sqrt()
    }

    /// 2/3-rule dealiasing; also zeroes the unpaired Nyquist mode.
    pub fn dealias(&self) -> SpectralField {
        let cut = self.grid.dealias_cutoff();
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            if self.grid.wavenumber(j).abs() > cut {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out.coeffs[self.grid.n_points() / 2] = Complex64::new(0.0, 0.0);
        out
    }

    /// ∫ conj(f) g dx over the period (≈ P·Σ conj(c^f_j) c^g_j).
    pub fn inner_l2(&self, other: &SpectralField) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("inner_l2 on different grids".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            acc += a.conj() * b;
        }
        Ok(acc * self.grid.period())
    }

    /// Pointwise product computed pseudospectrally (exact for data whose
    /// spectral supports fit in the lattice without wrap-around).
    pub fn product(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("product on different grids".into()));
        }
        let a = self.to_physical();
        let b = other.to_physical();
        let phys: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut out = SpectralField::from_physical_complex(&self.grid, &phys)?;
        out.is_real = self.is_real && other.is_real;
        Ok(out)
    }

    pub fn add_scaled(&mut self, other: &SpectralField, factor: Complex64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= factor;
        }
        out
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl std::ops::Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        out.is_real = self.is_real && rhs.is_real;
        out
    }
}

impl std::ops::Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        out.is_real = self.is_real && rhs.is_real;
        out
    }
}

/// The diagonalized pair (u₋₁, u₁); both components real in physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub minus: SpectralField,
    pub plus: SpectralField,
}

impl FieldPair {
    pub fn zero(grid: &SpectralGrid) -> Self {
        Self {
            minus: SpectralField::zero(grid, true),
            plus: SpectralField::zero(grid, true),
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.minus.grid()
    }

    /// u₋₁ + u₁ (the u-component of the undiagonalized system).
    pub fn sum(&self) -> SpectralField {
        &self.minus + &self.plus
    }

    pub fn hermitian_error(&self) -> f64 {
        self.minus.hermitian_error().max(self.plus.hermitian_error())
    }

    pub fn enforce_hermitian(&mut self) {
        self.minus.enforce_hermitian();
        self.plus.enforce_hermitian();
    }

    pub fn is_finite(&self) -> bool {
        self.minus.is_finite() && self.plus.is_finite()
    }
}
