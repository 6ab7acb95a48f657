//! The NLS envelope side of the toolkit: split-step envelope solver,
//! band-limited envelopes, wave-packet assembly εΨ_c, the order-ε²
//! corrections Ψ₀ and Ψ₂, and the weight operators ϑ, ϑ_{ε,∞}.

use num_complex::Complex64;

use crate::analysis::NlsCoefficients;
use crate::spectral::{FieldPair, SpectralField, SpectralGrid};
use crate::symbols::DispersionSymbol;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// weight operator
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WeightMode {
    Weighted,
    Identity,
}

/// The Fourier multiplier ϑ̂ interpolating between ε at k = 0 and 1 for
/// |k| > δ, its inverse, and the truncated variant ϑ̂_{ε,∞} that vanishes
/// for |k| ≤ ε. In identity mode all three are ≡ 1 (the ϑ_{ε,∞} truncation
/// is defined away together with the trilinear kernel).
#[derive(Debug, Clone, Copy)]
pub struct WeightOperator {
    pub delta: f64,
    pub eps: f64,
    pub mode: WeightMode,
}

impl WeightOperator {
    pub fn new(delta: f64, eps: f64, mode: WeightMode) -> Result<Self> {
        if mode == WeightMode::Weighted && !(eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: "weighted mode requires ε > 0".into(),
            });
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("cutoff radius must be positive, got {delta}"),
            });
        }
        Ok(Self { delta, eps, mode })
    }

    /// Mode selection straight from ω: identity iff ω(0⁺) ∉ {0} and
    /// ±ω(0⁺) ≠ 2ω(k₀) (then there is no resonance at k₀ to tame),
    /// weighted otherwise.
    pub fn for_symbol(omega: &DispersionSymbol, k0: f64, delta: f64, eps: f64) -> Result<Self> {
        let w0p = omega.limit_zero_plus();
        let two_w = 2.0 * omega.eval(k0);
        let identity = w0p != 0.0 && (w0p - two_w).abs() > 1e-12 && (w0p + two_w).abs() > 1e-12;
        Self::new(
            delta,
            eps,
            if identity {
                WeightMode::Identity
            } else {
                WeightMode::Weighted
            },
        )
    }

    pub fn theta_hat(&self, k: f64) -> f64 {
        match self.mode {
            WeightMode::Identity => 1.0,
            WeightMode::Weighted => {
                if k.abs() > self.delta {
                    1.0
                } else {
                    self.eps + (1.0 - self.eps) * k.abs() / self.delta
                }
            }
        }
    }

    pub fn theta_inv_hat(&self, k: f64) -> f64 {
        1.0 / self.theta_hat(k)
    }

    /// ϑ̂_{ε,∞}: 0 for |k| ≤ ε, the ϑ̂ ramp for ε < |k| ≤ δ, 1 beyond.
    pub fn theta_trunc_hat(&self, k: f64) -> f64 {
        match self.mode {
            WeightMode::Identity => 1.0,
            WeightMode::Weighted => {
                if k.abs() <= self.eps {
                    0.0
                } else {
                    self.theta_hat(k)
                }
            }
        }
    }

    /// Multiply a field by ϑ̂, ϑ̂⁻¹ or ϑ̂_{ε,∞} per the flags. The truncated
    /// variant has no inverse (it vanishes near 0).
    pub fn apply(
        &self,
        field: &SpectralField,
        inverse: bool,
        truncated: bool,
    ) -> Result<SpectralField> {
        if truncated && inverse {
            return Err(Error::TruncatedWeightInverse);
        }
        let real = field.is_real();
        let mut out = field.map_multiplier(|k| {
            Complex64::new(
                if truncated {
                    self.theta_trunc_hat(k)
                } else if inverse {
                    self.theta_inv_hat(k)
                } else {
                    self.theta_hat(k)
                },
                0.0,
            )
        });
        // ϑ̂ is even and real: realness survives
        out.set_real_flag(real);
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// envelope
// ---------------------------------------------------------------------------

/// The complex NLS envelope A on the slow grid. The slow lattice reuses the
/// fast grid's index set: slow wavenumbers are K_j = k_j/ε, the slow period
/// is εP, and X = ε(x - c_g t) identifies slow and fast coordinates.
#[derive(Debug, Clone)]
pub struct EnvelopeState {
    grid: SpectralGrid,
    coeffs: Vec<Complex64>,
    pub t_slow: f64,
    pub eps: f64,
    pub cg: f64,
}

impl EnvelopeState {
    /// Sample a profile A₀(X) centered at the middle of the slow domain.
    pub fn from_profile(
        grid: &SpectralGrid,
        eps: f64,
        cg: f64,
        profile: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let half = 0.5 * eps * grid.period();
        let samples: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&x| profile(eps * x - half))
            .collect();
        let field = SpectralField::from_physical_complex(grid, &samples)?;
        Ok(Self {
            grid: grid.clone(),
            coeffs: field.coeffs().to_vec(),
            t_slow: 0.0,
            eps,
            cg,
        })
    }

    pub fn from_coeffs(
        grid: &SpectralGrid,
        coeffs: Vec<Complex64>,
        t_slow: f64,
        eps: f64,
        cg: f64,
    ) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(Error::GridMismatch("envelope coefficients".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
            t_slow,
            eps,
            cg,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn slow_period(&self) -> f64 {
        self.eps * self.grid.period()
    }

    /// Slow wavenumber of storage slot j: K_j = k_j/ε.
    pub fn slow_wavenumber(&self, j: usize) -> f64 {
        self.grid.wavenumber(j) / self.eps
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft_inverse(&mut buf);
        buf
    }

    pub fn max_abs(&self) -> f64 {
        self.to_physical().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Discrete ‖A‖²_{L²} on the slow domain (= εP·Σ|Â_j|²).
    pub fn mass(&self) -> f64 {
        self.slow_period() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// H^s norm on the slow lattice.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let kk = self.slow_wavenumber(j);
            acc += c.norm_sqr() * (1.0 + kk * kk).powf(s);
        }
        (acc * self.slow_period()).sqrt()
    }

    /// Sharp spectral cutoff at slow wavenumber |K| ≤ K_cut (i.e. fast
    /// |k| ≤ ε·K_cut).
    pub fn window(&self, k_cut_slow: f64) -> EnvelopeState {
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            if self.slow_wavenumber(j).abs() > k_cut_slow {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// The paper's band-limited envelope A₁: sharp characteristic-function
/// cutoff at |k| ≤ δ in the fast variable, i.e. |K| ≤ δ/ε on the slow
/// lattice. Rejects δ ≥ k₀/20.
pub fn bandlimit(a: &EnvelopeState, delta: f64, k0: f64) -> Result<EnvelopeState> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "cutoff must be positive".into(),
        });
    }
    if !(delta < k0 / 20.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("cutoff must satisfy δ < k₀/20 = {}, got {delta}", k0 / 20.0),
        });
    }
    Ok(a.window(delta / a.eps))
}

/// Initial envelope families. The soliton exists when ν₂·ω″ > 0 and solves
/// the NLS exactly: a·sech(bX)e^{iαT} with b² = ν₂a²/ω″, α = ν₂a²/2.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub enum InitialEnvelope {
    Soliton { amplitude: f64 },
    Gaussian { amplitude: f64, width: f64 },
}

impl InitialEnvelope {
    pub fn shape(&self) -> crate::spectral::EnvelopeShape {
        match self {
            InitialEnvelope::Soliton { .. } => crate::spectral::EnvelopeShape::Sech,
            InitialEnvelope::Gaussian { .. } => crate::spectral::EnvelopeShape::Gaussian,
        }
    }

    /// Spatial width (1/b for the soliton, the standard deviation for the
    /// Gaussian) used by the grid sizing rule.
    pub fn width(&self, coeffs: &NlsCoefficients) -> Result<f64> {
        match self {
            InitialEnvelope::Soliton { amplitude } => {
                let omega_pp = 2.0 * coeffs.half_omega_pp;
                let b2 = coeffs.nu2 * amplitude * amplitude / omega_pp;
                if !(b2 > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "envelope",
                        reason: format!(
                            "soliton requires ν₂·ω″ > 0 (ν₂ = {}, ω″ = {omega_pp})",
                            coeffs.nu2
                        ),
                    });
                }
                Ok(1.0 / b2.sqrt())
            }
            InitialEnvelope::Gaussian { width, .. } => Ok(*width),
        }
    }

    pub fn build(
        &self,
        grid: &SpectralGrid,
        eps: f64,
        coeffs: &NlsCoefficients,
    ) -> Result<EnvelopeState> {
        match self {
            InitialEnvelope::Soliton { amplitude } => {
                let b = 1.0 / self.width(coeffs)?;
                let a = *amplitude;
                EnvelopeState::from_profile(grid, eps, coeffs.cg, |x| {
                    Complex64::new(a / (b * x).cosh(), 0.0)
                })
            }
            InitialEnvelope::Gaussian { amplitude, width } => {
                let (a, w) = (*amplitude, *width);
                EnvelopeState::from_profile(grid, eps, coeffs.cg, |x| {
                    Complex64::new(a * (-x * x / (2.0 * w * w)).exp(), 0.0)
                })
            }
        }
    }
}

// ---------------------------------------------------------------------------
// NLS split-step solver
// ---------------------------------------------------------------------------

/// Spectral coefficients of the NLS right side
/// i(ω″/2)∂_X²A + iν₂ A|A|² evaluated at the state.
pub fn nls_rhs(state: &EnvelopeState, coeffs: &NlsCoefficients) -> Vec<Complex64> {
    let n = state.grid.n_points();
    let mut lin = state.coeffs.clone();
    for (j, c) in lin.iter_mut().enumerate() {
        let kk = state.slow_wavenumber(j);
        *c *= Complex64::new(0.0, -coeffs.half_omega_pp * kk * kk);
    }
    let phys = state.to_physical();
    let mut cubic: Vec<Complex64> = phys
        .iter()
        .map(|a| Complex64::new(0.0, coeffs.nu2) * a * a.norm_sqr())
        .collect();
    state.grid.fft_forward(&mut cubic);
    for j in 0..n {
        lin[j] += cubic[j];
    }
    lin
}

/// Strang split-step: half nonlinear phase rotation, full linear multiplier
/// step, half nonlinear. Second-order in dt; conserves the discrete L² mass
/// up to roundoff (both substeps are pure phase rotations).
fn strang_step(state: &mut EnvelopeState, coeffs: &NlsCoefficients, dt: f64) {
    let half_phase = |phys: &mut Vec<Complex64>| {
        for a in phys.iter_mut() {
            let phi = coeffs.nu2 * a.norm_sqr() * dt * 0.5;
            *a *= Complex64::new(0.0, phi).exp();
        }
    };
    let mut phys = state.to_physical();
    half_phase(&mut phys);
    state.grid.fft_forward(&mut phys);
    for (j, c) in phys.iter_mut().enumerate() {
        let kk = state.slow_wavenumber(j);
        *c *= Complex64::new(0.0, -coeffs.half_omega_pp * kk * kk * dt).exp();
    }
    state.grid.fft_inverse(&mut phys);
    half_phase(&mut phys);
    state.grid.fft_forward(&mut phys);
    state.coeffs = phys;
    state.t_slow += dt;
}

/// Advance the envelope to each slow time in `schedule` (nondecreasing,
/// starting at or after the state's time), landing exactly on the samples.
pub fn solve_nls_sampled(
    a0: &EnvelopeState,
    coeffs: &NlsCoefficients,
    schedule: &[f64],
    dt: f64,
) -> Result<Vec<EnvelopeState>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "slow time step must be positive".into(),
        });
    }
    let amax0 = a0.max_abs();
    if dt * coeffs.nu2.abs() * amax0 * amax0 >= 0.1 {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!(
                "dt·ν₂·max|A|² = {} must stay below 0.1",
                dt * coeffs.nu2.abs() * amax0 * amax0
            ),
        });
    }
    let mut out = Vec::with_capacity(schedule.len());
    let mut state = a0.clone();
    for &target in schedule {
        if target < state.t_slow - 1e-12 {
            return Err(Error::ScheduleMismatch(format!(
                "sample time {target} precedes state time {}",
                state.t_slow
            )));
        }
        let span = target - state.t_slow;
        if span > 1e-14 {
            let steps = (span / dt).ceil().max(1.0) as usize;
            let step = span / steps as f64;
            for _ in 0..steps {
                strang_step(&mut state, coeffs, step);
            }
        }
        state.t_slow = target;
        let amax = state.max_abs();
        if !amax.is_finite() || amax > 1e3 * amax0.max(1e-300) {
            return Err(Error::EnvelopeBlowup {
                t_slow: state.t_slow,
                factor: amax / amax0.max(1e-300),
            });
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Final state at `t_end`.
pub fn solve_nls(
    a0: &EnvelopeState,
    coeffs: &NlsCoefficients,
    t_end: f64,
    dt: f64,
) -> Result<EnvelopeState> {
    Ok(solve_nls_sampled(a0, coeffs, &[t_end], dt)?.pop().unwrap())
}

// ---------------------------------------------------------------------------
// wave packet assembly
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ApproximationOrder {
    Leading,
    Corrected,
}

/// An assembled approximation εΨ at a fixed fast time, together with its
/// exact time derivative (envelope derivatives taken through the NLS right
/// side, never by differencing).
#[derive(Debug, Clone)]
pub struct Approximation {
    pub order: ApproximationOrder,
    pub t: f64,
    pub pair: FieldPair,
    pub pair_dt: FieldPair,
    pub k0: f64,
    pub omega0: f64,
    pub cg: f64,
    /// Carrier-window half-width used at assembly.
    pub window: f64,
}

impl Approximation {
    /// Spectral support check: every nonzero coefficient of the pair lies
    /// within `width`-neighborhoods of the carriers (±k₀, and for the
    /// corrected order also 0 and ±2k₀).
    pub fn support_within_windows(&self, width: f64) -> bool {
        let mut centers = vec![self.k0, -self.k0];
        if self.order == ApproximationOrder::Corrected {
            centers.extend_from_slice(&[0.0, 2.0 * self.k0, -2.0 * self.k0]);
        }
        let check = |f: &SpectralField| {
            let tol = 1e-13 * f.max_coeff_norm().max(1e-300);
            (0..f.grid().n_points()).all(|j| {
                let k = f.grid().wavenumber(j);
                f.coeffs()[j].norm() <= tol || centers.iter().any(|c| (k - c).abs() <= width)
            })
        };
        check(&self.pair.minus) && check(&self.pair.plus)
    }
}

/// Assembles wave packets and their corrections on a fixed grid for fixed
/// dispersion data. The carrier-window half-width bounds the envelope band
/// used in assembly; packets default to half the carrier spacing so that
/// desk-scale envelopes are not clipped, while the paper's strict δ < k₀/20
/// windows remain with the weight and kernel operators.
pub struct PacketAssembler {
    grid: SpectralGrid,
    omega: DispersionSymbol,
    rho: DispersionSymbol,
    coeffs: NlsCoefficients,
    eps: f64,
    window: f64,
}

impl PacketAssembler {
    pub fn new(
        grid: &SpectralGrid,
        omega: &DispersionSymbol,
        rho: &DispersionSymbol,
        coeffs: NlsCoefficients,
        eps: f64,
        window: Option<f64>,
    ) -> Result<Self> {
        let window = window.unwrap_or(coeffs.k0 / 2.0);
        if !(window > 0.0 && window <= coeffs.k0 / 2.0) {
            return Err(Error::InvalidParameter {
                name: "window",
                reason: format!(
                    "carrier window must lie in (0, k₀/2]; got {window} for k₀ = {}",
                    coeffs.k0
                ),
            });
        }
        let dk = grid.delta_k();
        if ((coeffs.k0 / dk) - (coeffs.k0 / dk).round()).abs() > 1e-9
            || (coeffs.k0 / dk).round() as usize != grid.k0_index()
        {
            return Err(Error::CarrierOffLattice { k0: coeffs.k0 });
        }
        Ok(Self {
            grid: grid.clone(),
            omega: omega.clone(),
            rho: rho.clone(),
            coeffs,
            eps,
            window,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn coefficients(&self) -> &NlsCoefficients {
        &self.coeffs
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn check_time(&self, a: &EnvelopeState, t: f64) -> Result<()> {
        let t_slow = self.eps * self.eps * t;
        if (a.t_slow - t_slow).abs() > 1e-9 * (1.0 + t_slow.abs()) {
            return Err(Error::ScheduleMismatch(format!(
                "envelope at T = {} but packet requested at ε²t = {t_slow}",
                a.t_slow
            )));
        }
        Ok(())
    }

    /// ψ̂₁ and ∂_tψ̂₁ on the fast lattice: the envelope (restricted to the
    /// assembly window) shifted to the +k₀ carrier, each mode phased by
    /// e^{-i(ω₀+(k-k₀)c_g)t}; the ε²∂_T drift enters through the NLS right
    /// side.
    fn psi1(&self, a: &EnvelopeState, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.grid.n_points();
        let k0_index = self.grid.k0_index() as i64;
        let rhs = nls_rhs(a, &self.coeffs);
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        let mut dpsi = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let k_env = self.grid.wavenumber(j); // = ε·K_j
            if k_env.abs() > self.window {
                continue;
            }
            let s = self.grid.signed_index(j);
            let Some(i) = self.grid.storage_index(k0_index + s) else {
                continue;
            };
            let phase = self.coeffs.omega0 + k_env * self.coeffs.cg;
            let rot = Complex64::new(0.0, -phase * t).exp();
            psi[i] = a.coeffs()[j] * rot;
            dpsi[i] =
                (Complex64::new(0.0, -phase) * a.coeffs()[j] + self.eps * self.eps * rhs[j]) * rot;
        }
        (psi, dpsi)
    }

    /// Leading order: εΨ_c = ε(ψ₁ + ψ₋₁)·(1,0)ᵀ.
    pub fn leading(&self, a: &EnvelopeState, t: f64) -> Result<Approximation> {
        self.check_time(a, t)?;
        let (psi, dpsi) = self.psi1(a, t);
        let minus = self.real_from_positive(&psi, self.eps);
        let minus_dt = self.real_from_positive(&dpsi, self.eps);
        Ok(Approximation {
            order: ApproximationOrder::Leading,
            t,
            pair: FieldPair {
                minus,
                plus: SpectralField::zero(&self.grid, true),
            },
            pair_dt: FieldPair {
                minus: minus_dt,
                plus: SpectralField::zero(&self.grid, true),
            },
            k0: self.coeffs.k0,
            omega0: self.coeffs.omega0,
            cg: self.coeffs.cg,
            window: self.window,
        })
    }

    /// εΨ_c + ε²Ψ₀ + ε²Ψ₂: the order-ε² algebraic equations solved
    /// mode-by-mode on the lattice. At each k in the carrier-c window
    /// (c ∈ {0, ±2}) the diagonalized linear operator against the carrier's
    /// phase speed gives the scalar denominators
    ///
    /// ```text
    /// D∓(k) = c·ω₀ + (k - c·k₀)·c_g ∓ ω(k)
    /// ```
    ///
    /// inverted against the quadratic forcing ρ of ψ_c·ψ_c. Near-singular
    /// denominators (margin below 1e-6·(1+|k|)^{deg ω}) abort with a
    /// near-resonance error.
    pub fn corrected(&self, a: &EnvelopeState, t: f64) -> Result<Approximation> {
        self.check_time(a, t)?;
        let n = self.grid.n_points();
        let (psi, dpsi) = self.psi1(a, t);

        // physical profiles of ψ₁ and ∂_tψ₁
        let mut p1 = psi.clone();
        self.grid.fft_inverse(&mut p1);
        let mut dp1 = dpsi.clone();
        self.grid.fft_inverse(&mut dp1);

        // forcing split by carrier: F₂ = ψ₁²/2 (carrier 2k₀), F₀ = |ψ₁|²
        // (carrier 0); the -2k₀ block is the Hermitian mirror of +2k₀.
        let mut f2: Vec<Complex64> = p1.iter().map(|z| 0.5 * z * z).collect();
        let mut df2: Vec<Complex64> = p1.iter().zip(&dp1).map(|(z, dz)| z * dz).collect();
        let mut f0: Vec<Complex64> = p1
            .iter()
            .map(|z| Complex64::new(z.norm_sqr(), 0.0))
            .collect();
        let mut df0: Vec<Complex64> = p1
            .iter()
            .zip(&dp1)
            .map(|(z, dz)| {
                let v = z.conj() * dz;
                Complex64::new(2.0 * v.re, 0.0)
            })
            .collect();
        self.grid.fft_forward(&mut f2);
        self.grid.fft_forward(&mut df2);
        self.grid.fft_forward(&mut f0);
        self.grid.fft_forward(&mut df0);

        let mut q_minus = vec![Complex64::new(0.0, 0.0); n];
        let mut q_plus = vec![Complex64::new(0.0, 0.0); n];
        let mut dq_minus = vec![Complex64::new(0.0, 0.0); n];
        let mut dq_plus = vec![Complex64::new(0.0, 0.0); n];

        let wide = 2.0 * self.window;
        let k0 = self.coeffs.k0;
        let guard = |k: f64, d: f64| -> Result<f64> {
            let margin = 1e-6 * (1.0 + k.abs()).powf(self.omega.degree());
            if d.abs() < margin {
                Err(Error::NearResonance {
                    k,
                    value: d,
                    margin,
                })
            } else {
                Ok(d)
            }
        };

        for j in 0..n {
            let k = self.grid.wavenumber(j);
            let w = self.omega.eval(k);
            let r = self.rho.eval(k);

            // carrier +2k₀ (mirrored onto -2k₀)
            if (k - 2.0 * k0).abs() <= wide {
                let speed = 2.0 * self.coeffs.omega0 + (k - 2.0 * k0) * self.coeffs.cg;
                let dm = guard(k, speed - w)?;
                let dp = guard(k, speed + w)?;
                let fm = r * f2[j];
                let fdm = r * df2[j];
                q_minus[j] += fm / dm;
                q_plus[j] -= fm / dp;
                dq_minus[j] += fdm / dm;
                dq_plus[j] -= fdm / dp;
                let mi = mirror(n, j);
                q_minus[mi] = q_minus[j].conj();
                q_plus[mi] = q_plus[j].conj();
                dq_minus[mi] = dq_minus[j].conj();
                dq_plus[mi] = dq_plus[j].conj();
            }

            // carrier 0; the k = 0 mode carries no correction (the forcing
            // ρ(0)·F̂₀(0) vanishes with ρ(0) = 0, and for jump symbols the
            // formal 0/0 mean mode is left empty)
            if k != 0.0 && k.abs() <= wide {
                let speed = k * self.coeffs.cg;
                let dm = guard(k, speed - w)?;
                let dp = guard(k, speed + w)?;
                let fm = r * f0[j];
                let fdm = r * df0[j];
                q_minus[j] += fm / dm;
                q_plus[j] -= fm / dp;
                dq_minus[j] += fdm / dm;
                dq_plus[j] -= fdm / dp;
            }
        }

        let eps2 = self.eps * self.eps;
        let mut minus = self.real_from_positive(&psi, self.eps);
        let mut minus_dt = self.real_from_positive(&dpsi, self.eps);
        for j in 0..n {
            minus.coeffs_mut()[j] += eps2 * q_minus[j];
            minus_dt.coeffs_mut()[j] += eps2 * dq_minus[j];
        }
        let plus_coeffs: Vec<Complex64> = q_plus.iter().map(|c| eps2 * c).collect();
        let plus_dt_coeffs: Vec<Complex64> = dq_plus.iter().map(|c| eps2 * c).collect();
        let plus = SpectralField::from_coeffs(&self.grid, plus_coeffs, true)?;
        let plus_dt = SpectralField::from_coeffs(&self.grid, plus_dt_coeffs, true)?;

        Ok(Approximation {
            order: ApproximationOrder::Corrected,
            t,
            pair: FieldPair { minus, plus },
            pair_dt: FieldPair {
                minus: minus_dt,
                plus: plus_dt,
            },
            k0,
            omega0: self.coeffs.omega0,
            cg: self.coeffs.cg,
            window: self.window,
        })
    }

    /// The carrier parts (ψ₋₁, ψ₁) of the unscaled packet ψ_c = ψ₋₁ + ψ₁:
    /// ψ₁ holds the +k₀ content, ψ₋₁ its complex conjugate. These feed the
    /// normal-form and energy machinery, which carries explicit ε factors.
    pub fn psi_c_parts(&self, a: &EnvelopeState, t: f64) -> Result<(SpectralField, SpectralField)> {
        self.check_time(a, t)?;
        let (psi, _) = self.psi1(a, t);
        let n = self.grid.n_points();
        let mut conj = vec![Complex64::new(0.0, 0.0); n];
        for (j, out) in conj.iter_mut().enumerate() {
            *out = psi[mirror(n, j)].conj();
        }
        let plus_part = SpectralField::from_coeffs(&self.grid, psi, false)?;
        let minus_part = SpectralField::from_coeffs(&self.grid, conj, false)?;
        Ok((minus_part, plus_part))
    }

    /// ψ_c = ψ₋₁ + ψ₁ (unscaled, real).
    pub fn psi_c_unscaled(&self, a: &EnvelopeState, t: f64) -> Result<SpectralField> {
        self.check_time(a, t)?;
        let (psi, _) = self.psi1(a, t);
        Ok(self.real_from_positive(&psi, 1.0))
    }

    /// The plain NLS approximation εψ_NLS (no band restriction beyond the
    /// lattice itself) as a real field — the comparison object of the main
    /// error estimate.
    pub fn eps_psi_nls(&self, a: &EnvelopeState, t: f64) -> Result<SpectralField> {
        self.check_time(a, t)?;
        let n = self.grid.n_points();
        let k0_index = self.grid.k0_index() as i64;
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let s = self.grid.signed_index(j);
            let Some(i) = self.grid.storage_index(k0_index + s) else {
                continue;
            };
            let phase = self.coeffs.omega0 + self.grid.wavenumber(j) * self.coeffs.cg;
            psi[i] = a.coeffs()[j] * Complex64::new(0.0, -phase * t).exp();
        }
        Ok(self.real_from_positive(&psi, self.eps))
    }

    /// ε·(ψ + c.c.) as a real spectral field from positive-carrier content.
    fn real_from_positive(&self, psi: &[Complex64], eps: f64) -> SpectralField {
        let n = self.grid.n_points();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (j, out) in coeffs.iter_mut().enumerate() {
            let mi = mirror(n, j);
            *out = eps * (psi[j] + psi[mi].conj());
        }
        SpectralField::from_coeffs(&self.grid, coeffs, true).expect("same grid")
    }
}

fn mirror(n: usize, j: usize) -> usize {
    if j == 0 {
        0
    } else {
        n - j
    }
}
