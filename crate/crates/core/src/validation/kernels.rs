//! The normal-form kernel operators: the bilinear N_{j₁j₂} with kernel
//!
//! ```text
//! nِ_{j₁j₂}(k, k-m, m) = ρ(k)·ϑ̂_{ε,∞}(m)·χ_c(k-m) / (ω(k) - j₁j₂ω(m) + j₁ω(k-m))
//! ```
//!
//! and the trilinear 𝒯_{j₁j₂j₃j₄} with the k-only kernel t, windowed to
//! |k| ≤ δ. χ_c is the sharp indicator of [k₀-δ, k₀+δ] ∪ [-k₀-δ, -k₀+δ]
//! and P̂_{0,δ} the sharp indicator of [-δ, δ].
//!
//! Operator inputs and outputs are Fourier-series coefficients; the kernel
//! quadrature is normalized so that a constant kernel reproduces the plain
//! pointwise product (the continuum ∫…dm with the paper's transform).

use num_complex::Complex64;

use crate::approximation::{WeightMode, WeightOperator};
use crate::spectral::{SpectralField, SpectralGrid};
use crate::symbols::DispersionSymbol;
use crate::{Error, Result};

/// (j₁, j₂) ∈ {±1}².
pub type SignPair = (i8, i8);

pub const ALL_SIGN_PAIRS: [SignPair; 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Shared data for kernel evaluation on a fixed grid. Symbol values on the
/// lattice are tabulated once; construction per (symbols, grid, δ, ε) is
/// the cacheable unit.
pub struct KernelContext {
    grid: SpectralGrid,
    omega: DispersionSymbol,
    rho: DispersionSymbol,
    k0: f64,
    delta: f64,
    weight: WeightOperator,
    omega_t: Vec<f64>,
    rho_t: Vec<f64>,
    theta_trunc_t: Vec<f64>,
    chi_t: Vec<f64>,
}

impl KernelContext {
    pub fn new(
        grid: &SpectralGrid,
        omega: &DispersionSymbol,
        rho: &DispersionSymbol,
        k0: f64,
        delta: f64,
        weight: WeightOperator,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < k0 / 20.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("kernel window must satisfy 0 < δ < k₀/20, got {delta}"),
            });
        }
        let n = grid.n_points();
        let mut omega_t = Vec::with_capacity(n);
        let mut rho_t = Vec::with_capacity(n);
        let mut theta_trunc_t = Vec::with_capacity(n);
        let mut chi = Vec::with_capacity(n);
        for j in 0..n {
            let k = grid.wavenumber(j);
            omega_t.push(omega.eval(k));
            rho_t.push(rho.eval(k));
            theta_trunc_t.push(weight.theta_trunc_hat(k));
            chi.push(if (k.abs() - k0).abs() <= delta { 1.0 } else { 0.0 });
        }
        Ok(Self {
            grid: grid.clone(),
            omega: omega.clone(),
            rho: rho.clone(),
            k0,
            delta,
            weight,
            omega_t,
            rho_t,
            theta_trunc_t,
            chi_t: chi,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn weight(&self) -> &WeightOperator {
        &self.weight
    }

    /// Indicator of the carrier neighborhoods [±k₀-δ, ±k₀+δ].
    pub fn chi_c(&self, k: f64) -> f64 {
        if (k.abs() - self.k0).abs() <= self.delta {
            1.0
        } else {
            0.0
        }
    }

    /// Indicator of [-δ, δ].
    pub fn p_0_delta(&self, k: f64) -> f64 {
        if k.abs() <= self.delta {
            1.0
        } else {
            0.0
        }
    }

    fn denominator_guard(&self, k: f64, m: f64, den: f64) -> Result<f64> {
        if den.abs() < 1e-6 * (1.0 + k.abs()).powf(self.omega.degree()) {
            Err(Error::KernelSingular { k, m })
        } else {
            Ok(den)
        }
    }

    /// n_{j₁j₂}(k, k-m, m). The numerator is checked first: where
    /// ρ(k)·ϑ̂_{ε,∞}(m)·χ_c(k-m) vanishes the kernel is zero and no
    /// denominator is formed — this is precisely how the trivial resonance
    /// at k = 0 and the near-resonant small-m modes are absorbed.
    pub fn n_kernel(&self, signs: SignPair, k: f64, km: f64, m: f64) -> Result<f64> {
        let num = self.rho.eval(k) * self.weight.theta_trunc_hat(m) * self.chi_c(km);
        if num == 0.0 {
            return Ok(0.0);
        }
        let (j1, j2) = (signs.0 as f64, signs.1 as f64);
        let den = self.omega.eval(k) - j1 * j2 * self.omega.eval(m) + j1 * self.omega.eval(km);
        let den = self.denominator_guard(k, m, den)?;
        Ok(num / den)
    }

    /// Lattice index set where χ_c is nonzero (the support of admissible
    /// ψ_c arguments).
    fn chi_window_indices(&self) -> Vec<usize> {
        (0..self.grid.n_points())
            .filter(|&j| self.chi_c(self.grid.wavenumber(j)) != 0.0)
            .collect()
    }

    /// N̂_{j₁j₂}(ψ_c, f)(k) = Σ_m n(k, k-m, m) ψ̂_c(k-m) f̂(m): direct
    /// windowed convolution, O(n·w) with w the χ_c window width.
    pub fn nf_apply(
        &self,
        signs: SignPair,
        psi_c: &SpectralField,
        f: &SpectralField,
    ) -> Result<SpectralField> {
        self.nf_apply_kernel(signs, psi_c, f, false)
    }

    /// The adjoint-kernel operator N*: same windowed convolution with
    /// n(-m, k-m, -k) in place of n(k, k-m, m).
    pub fn nf_apply_adjoint(
        &self,
        signs: SignPair,
        psi_c: &SpectralField,
        f: &SpectralField,
    ) -> Result<SpectralField> {
        self.nf_apply_kernel(signs, psi_c, f, true)
    }

    fn nf_apply_kernel(
        &self,
        signs: SignPair,
        psi_c: &SpectralField,
        f: &SpectralField,
        adjoint: bool,
    ) -> Result<SpectralField> {
        if psi_c.grid() != &self.grid || f.grid() != &self.grid {
            return Err(Error::GridMismatch("kernel operands".into()));
        }
        let (j1, j2) = (signs.0 as f64, signs.1 as f64);
        let n = self.grid.n_points();
        let window = self.chi_window_indices();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let half = (n / 2) as i64;
        for i in 0..n {
            let si = self.grid.signed_index(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for &wj in &window {
                let pc = psi_c.coeffs()[wj];
                if pc.re == 0.0 && pc.im == 0.0 {
                    continue;
                }
                let sm = si - self.grid.signed_index(wj);
                if sm < -half || sm >= half {
                    continue;
                }
                let jm = if sm >= 0 { sm as usize } else { (sm + n as i64) as usize };
                // lattice-table evaluation; the adjoint kernel n(-m, k-m, -k)
                // follows from ρ odd, ϑ̂ even
                let (num, den, scale) = if adjoint {
                    (
                        -self.rho_t[jm] * self.theta_trunc_t[i] * self.chi_t[wj],
                        -self.omega_t[jm] + j1 * j2 * self.omega_t[i] + j1 * self.omega_t[wj],
                        self.grid.wavenumber(jm),
                    )
                } else {
                    (
                        self.rho_t[i] * self.theta_trunc_t[jm] * self.chi_t[wj],
                        self.omega_t[i] - j1 * j2 * self.omega_t[jm] + j1 * self.omega_t[wj],
                        self.grid.wavenumber(i),
                    )
                };
                if num == 0.0 {
                    continue;
                }
                if den.abs() < 1e-6 * (1.0 + scale.abs()).powf(self.omega.degree()) {
                    return Err(Error::KernelSingular {
                        k: self.grid.wavenumber(i),
                        m: self.grid.wavenumber(jm),
                    });
                }
                acc += num / den * pc * f.coeffs()[jm];
            }
            out[i] = acc;
        }
        let real = psi_c.is_real() && f.is_real();
        let mut field = SpectralField::from_coeffs(&self.grid, out, false)?;
        // n(-k, -(k-m), -m) = n(k, k-m, m) ∈ ℝ: real in, real out
        field.set_real_flag(real);
        Ok(field)
    }

    /// L² norm of the normal-form identity defect
    ///
    /// ```text
    /// -j₁ iω N(ψ_c, f) - N(iωψ_c, f) + j₂ N(ψ_c, iωf) + j₁ iρ(ψ_c·ϑ_{ε,∞}f)
    /// ```
    ///
    /// which vanishes mode-wise when ψ_c is supported in the χ_c windows;
    /// anything left is quadrature roundoff.
    pub fn nf_identity_residual(
        &self,
        signs: SignPair,
        psi_c: &SpectralField,
        f: &SpectralField,
    ) -> Result<f64> {
        let (j1, j2) = (signs.0 as f64, signs.1 as f64);
        let n_f = self.nf_apply(signs, psi_c, f)?;
        let term1 = n_f
            .apply_multiplier(&self.omega, crate::spectral::Prefactor::I)
            .scaled(-j1);
        let omega_psi = psi_c.apply_multiplier(&self.omega, crate::spectral::Prefactor::I);
        let term2 = self.nf_apply(signs, &omega_psi, f)?;
        let omega_f = f.apply_multiplier(&self.omega, crate::spectral::Prefactor::I);
        let term3 = self.nf_apply(signs, psi_c, &omega_f)?.scaled(j2);

        let weighted_f = self.weight.apply(f, false, true)?;
        let prod = psi_c.product(&weighted_f)?;
        let rhs = prod
            .apply_multiplier(&self.rho, crate::spectral::Prefactor::I)
            .scaled(j1);

        let defect = &(&(&term1 - &term2) + &term3) + &rhs;
        defect.sobolev_norm(0.0)
    }

    /// t_{j₁j₂j₃j₄}(k): the k-only trilinear kernel; identically zero in
    /// identity-weight mode.
    pub fn t_kernel(&self, j1: i8, j2: i8, j3: i8, j4: i8, k: f64) -> Result<f64> {
        if self.weight.mode == WeightMode::Identity {
            return Ok(0.0);
        }
        if self.p_0_delta(k) == 0.0 {
            return Ok(0.0);
        }
        let jk0 = j4 as f64 * self.k0;
        let n = self.n_kernel((j1, j2), k, jk0, k - jk0)?;
        if n == 0.0 {
            return Ok(0.0);
        }
        let den = -(j1 as f64) * self.omega.eval(k) - 2.0 * self.omega.eval(jk0)
            + (j3 as f64) * self.omega.eval(k - 2.0 * jk0);
        let den = self.denominator_guard(k, k - jk0, den)?;
        Ok(-(j2 as f64) * n * self.rho.eval(k - jk0) / den)
    }

    /// 𝒯̂(g, h, f)(k) = t(k)·(g·h·f)^(k): the double convolution collapses
    /// to the k-multiplier applied to the physical triple product.
    pub fn trilinear_apply(
        &self,
        j1: i8,
        j2: i8,
        j3: i8,
        j4: i8,
        g: &SpectralField,
        h: &SpectralField,
        f: &SpectralField,
    ) -> Result<SpectralField> {
        if self.weight.mode == WeightMode::Identity {
            return Ok(SpectralField::zero(&self.grid, true));
        }
        let triple = g.product(h)?.product(f)?;
        let mut out = triple.clone();
        for (j, c) in out.coeffs_mut().iter_mut().enumerate() {
            let k = self.grid.wavenumber(j);
            *c *= self.t_kernel(j1, j2, j3, j4, k)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Prefactor;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

    // k₀ = 4 on a fine lattice so the δ-windows hold a few dozen modes
    fn setup() -> (KernelContext, SpectralGrid) {
        let grid = SpectralGrid::new(1024, 128.0 * std::f64::consts::PI, 256).unwrap();
        let beam = DispersionSymbol::beam();
        let k0 = grid.k0();
        let delta = k0 / 32.0;
        let weight = WeightOperator::new(delta, 0.05, WeightMode::Weighted).unwrap();
        let ctx = KernelContext::new(&grid, &beam, &beam, k0, delta, weight).unwrap();
        (ctx, grid)
    }

    pub(super) fn random_psi_c(ctx: &KernelContext, seed: u64) -> SpectralField {
        let grid = ctx.grid().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zero(&grid, true);
        for j in 0..grid.n_points() {
            let k = grid.wavenumber(j);
            if ctx.chi_c(k) != 0.0 && k > 0.0 {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                f.coeffs_mut()[j] = c;
                let mi = grid.storage_index(-grid.signed_index(j)).unwrap();
                f.coeffs_mut()[mi] = c.conj();
            }
        }
        f
    }

    pub(super) fn random_field(
        grid: &SpectralGrid,
        seed: u64,
        k_cut: f64,
        decay: f64,
    ) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::zero(grid, true);
        for j in 1..grid.n_points() / 2 {
            let k = grid.wavenumber(j);
            if k.abs() > k_cut {
                continue;
            }
            let amp = (1.0 + k * k).powf(-decay / 2.0);
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
            f.coeffs_mut()[j] = c;
            let mi = grid.storage_index(-(j as i64)).unwrap();
            f.coeffs_mut()[mi] = c.conj();
        }
        f
    }

    #[test]
    fn nf_apply_zero_cases() {
        let (ctx, grid) = setup();
        let psi = random_psi_c(&ctx, 1);
        let zero = SpectralField::zero(&grid, true);
        let out = ctx.nf_apply((1, -1), &psi, &zero).unwrap();
        assert_eq!(out.max_coeff_norm(), 0.0);
        let f = random_field(&grid, 2, 10.0, 2.0);
        let out = ctx.nf_apply((1, -1), &zero, &f).unwrap();
        assert_eq!(out.max_coeff_norm(), 0.0);
    }

    #[test]
    fn nf_apply_real_to_real() {
        let (ctx, grid) = setup();
        let psi = random_psi_c(&ctx, 3);
        let f = random_field(&grid, 4, 10.0, 2.0);
        for signs in ALL_SIGN_PAIRS {
            let out = ctx.nf_apply(signs, &psi, &f).unwrap();
            assert!(out.is_real());
            let imag = out
                .to_physical()
                .iter()
                .map(|c| c.im.abs())
                .fold(0.0f64, f64::max);
            let scale = out.to_physical().iter().map(|c| c.re.abs()).fold(0.0f64, f64::max);
            assert!(imag < 1e-10 * scale.max(1e-300), "imag {imag} scale {scale}");
        }
    }

    /// The identity is exact in Fourier variables: only rounding remains.
    #[test]
    fn nf_identity_exact() {
        let (ctx, grid) = setup();
        for seed in 0..5u64 {
            let psi = random_psi_c(&ctx, 100 + seed);
            let f = random_field(&grid, 200 + seed, 12.0, 2.0);
            // the defect is measured against ‖f‖_{H^{deg* ρ + 1}}
            let f_scale = f.sobolev_norm(3.0).unwrap();
            for signs in ALL_SIGN_PAIRS {
                let defect = ctx.nf_identity_residual(signs, &psi, &f).unwrap();
                assert!(
                    defect < 1e-8 * f_scale,
                    "signs {signs:?} defect {defect:.3e} vs scale {f_scale:.3e}"
                );
            }
        }
    }

    /// ⟨f, N(h,g)⟩ = ⟨g, N*(h,f)⟩ on real triples.
    #[test]
    fn adjoint_identity() {
        let (ctx, grid) = setup();
        for seed in 0..5u64 {
            let h = random_psi_c(&ctx, 300 + seed);
            let f = random_field(&grid, 400 + seed, 10.0, 2.0);
            let g = random_field(&grid, 500 + seed, 10.0, 2.0);
            for signs in ALL_SIGN_PAIRS {
                let lhs = f.inner_l2(&ctx.nf_apply(signs, &h, &g).unwrap()).unwrap();
                let rhs = g
                    .inner_l2(&ctx.nf_apply_adjoint(signs, &h, &f).unwrap())
                    .unwrap();
                let scale = lhs.norm().max(rhs.norm()).max(1e-300);
                assert!(
                    (lhs - rhs).norm() / scale < 1e-10,
                    "signs {signs:?}: {lhs} vs {rhs}"
                );
            }
        }
    }

    /// Dense-matrix oracle on a small grid: the operator norm of
    /// N_{jj}(h,·): H¹ → L² and N_{j,-j}(h,·): L² → L² is finite and the
    /// windowed convolution agrees with an explicitly built matrix.
    #[test]
    fn dense_matrix_oracle_bounds() {
        let grid = SpectralGrid::new(128, 16.0 * std::f64::consts::PI, 32).unwrap();
        let beam = DispersionSymbol::beam();
        let k0 = grid.k0();
        let delta = k0 / 32.0;
        let weight = WeightOperator::new(delta, 0.05, WeightMode::Weighted).unwrap();
        let ctx = KernelContext::new(&grid, &beam, &beam, k0, delta, weight).unwrap();
        let h = random_psi_c(&ctx, 7);
        let n = grid.n_points();

        for signs in [(1i8, 1i8), (1i8, -1i8)] {
            // dense matrix column-by-column from basis vectors
            let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
            for j in 0..n {
                let mut e = SpectralField::zero(&grid, false);
                e.coeffs_mut()[j] = Complex64::new(1.0, 0.0);
                columns.push(ctx.nf_apply(signs, &h, &e).unwrap().coeffs().to_vec());
            }
            // apply to a random field both ways
            let f = random_field(&grid, 8, grid.nyquist() / 2.0, 1.0);
            let fast = ctx.nf_apply(signs, &h, &f).unwrap();
            let mut dense = vec![Complex64::new(0.0, 0.0); n];
            for (j, col) in columns.iter().enumerate() {
                let cj = f.coeffs()[j];
                if cj.norm() == 0.0 {
                    continue;
                }
                for i in 0..n {
                    dense[i] += col[i] * cj;
                }
            }
            let mut worst = 0.0f64;
            for i in 0..n {
                worst = worst.max((fast.coeffs()[i] - dense[i]).norm());
            }
            assert!(worst < 1e-10, "matrix mismatch {worst}");

            // Frobenius bound on the weighted operator gives a concrete C
            // with ‖N(h,g)‖_{L²} ≤ C·‖g‖ in the norm the lemma prescribes
            let sob = if signs.1 == signs.0 { 1.0 } else { 0.0 };
            let mut frob = 0.0f64;
            for (j, col) in columns.iter().enumerate() {
                let k = grid.wavenumber(j);
                let w = (1.0 + k * k).powf(sob / 2.0);
                for c in col {
                    frob += (c.norm() / w).powi(2);
                }
            }
            let c_bound = frob.sqrt();
            assert!(c_bound.is_finite());
            for seed in 20..25 {
                let g = random_field(&grid, seed, grid.nyquist() / 2.0, 1.5);
                let ng = ctx.nf_apply(signs, &h, &g).unwrap().sobolev_norm(0.0).unwrap();
                let gn = g.sobolev_norm(sob).unwrap();
                assert!(
                    ng <= c_bound * gn * 1.0000001,
                    "{signs:?}: ‖N g‖ = {ng} vs C‖g‖ = {}",
                    c_bound * gn
                );
            }
        }
    }

    #[test]
    fn trilinear_zero_cases() {
        let (ctx, grid) = setup();
        let psi = random_psi_c(&ctx, 31);
        let zero = SpectralField::zero(&grid, true);
        let out = ctx.trilinear_apply(1, 1, 1, 1, &psi, &psi, &zero).unwrap();
        assert_eq!(out.max_coeff_norm(), 0.0);

        // identity-ϑ configuration: the operator is identically zero
        let idw = WeightOperator::new(ctx.delta(), 0.05, WeightMode::Identity).unwrap();
        let beam = DispersionSymbol::beam();
        let ctx_id =
            KernelContext::new(&grid, &beam, &beam, grid.k0(), grid.k0() / 32.0, idw).unwrap();
        let f = random_field(&grid, 32, 10.0, 2.0);
        let out = ctx_id.trilinear_apply(1, 1, 1, 1, &psi, &psi, &f).unwrap();
        assert_eq!(out.max_coeff_norm(), 0.0);
        assert_eq!(ctx_id.t_kernel(1, -1, 1, -1, 0.01).unwrap(), 0.0);
    }

    /// Small dense instance: the multiplier route equals a directly built
    /// matrix of the double convolution, and ‖𝒯(g,h,·)‖_{L²→L²} is bounded.
    #[test]
    fn trilinear_dense_oracle() {
        let grid = SpectralGrid::new(128, 16.0 * std::f64::consts::PI, 32).unwrap();
        let beam = DispersionSymbol::beam();
        let k0 = grid.k0();
        let delta = k0 / 32.0;
        let weight = WeightOperator::new(delta, 0.05, WeightMode::Weighted).unwrap();
        let ctx = KernelContext::new(&grid, &beam, &beam, k0, delta, weight).unwrap();
        let g = random_psi_c(&ctx, 41);
        let h = random_psi_c(&ctx, 42);
        let n = grid.n_points();
        let (j1, j2, j3, j4) = (1i8, -1i8, 1i8, 1i8);

        // direct double sum: t(k)·Σ_m Σ_ν ĝ(k-m) ĥ(m-ν) f̂(ν)
        let f = random_field(&grid, 43, grid.nyquist() / 3.0, 1.0);
        let mut direct = vec![Complex64::new(0.0, 0.0); n];
        let half = (n / 2) as i64;
        for i in 0..n {
            let k = grid.wavenumber(i);
            let t = ctx.t_kernel(j1, j2, j3, j4, k).unwrap();
            if t == 0.0 {
                continue;
            }
            let si = grid.signed_index(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for jm in 0..n {
                let sm = grid.signed_index(jm);
                let sg = si - sm;
                if sg < -half || sg >= half {
                    continue;
                }
                let ig = if sg >= 0 { sg as usize } else { (sg + n as i64) as usize };
                if g.coeffs()[ig].norm() == 0.0 {
                    continue;
                }
                for jn in 0..n {
                    let sn = grid.signed_index(jn);
                    let sh = sm - sn;
                    if sh < -half || sh >= half {
                        continue;
                    }
                    let ih = if sh >= 0 { sh as usize } else { (sh + n as i64) as usize };
                    acc += g.coeffs()[ig] * h.coeffs()[ih] * f.coeffs()[jn];
                }
            }
            direct[i] = t * acc;
        }
        let fast = ctx.trilinear_apply(j1, j2, j3, j4, &g, &h, &f).unwrap();
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max((fast.coeffs()[i] - direct[i]).norm());
        }
        assert!(worst < 1e-10, "trilinear mismatch {worst}");

        // L² → L² bound with constant from the dense operator matrix
        let mut columns = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = SpectralField::zero(&grid, false);
            e.coeffs_mut()[j] = Complex64::new(1.0, 0.0);
            columns.push(
                ctx.trilinear_apply(j1, j2, j3, j4, &g, &h, &e)
                    .unwrap()
                    .coeffs()
                    .to_vec(),
            );
        }
        let frob: f64 = columns
            .iter()
            .flat_map(|col| col.iter().map(|c| c.norm_sqr()))
            .sum::<f64>()
            .sqrt();
        for seed in 60..64 {
            let f = random_field(&grid, seed, grid.nyquist() / 3.0, 1.0);
            let tf = ctx
                .trilinear_apply(j1, j2, j3, j4, &g, &h, &f)
                .unwrap()
                .sobolev_norm(0.0)
                .unwrap();
            assert!(tf <= frob * f.sobolev_norm(0.0).unwrap() * 1.0000001);
        }
    }

    #[test]
    fn kernel_finite_on_lattice_when_conditions_pass() {
        let (ctx, grid) = setup();
        // every (k, m) pair reachable with the windowed middle argument
        for signs in ALL_SIGN_PAIRS {
            for i in (0..grid.n_points()).step_by(7) {
                let k = grid.wavenumber(i);
                for dj in -40i64..=40 {
                    let m = k - grid.delta_k() * dj as f64;
                    let km = k - m;
                    let v = ctx.n_kernel(signs, k, km, m).unwrap();
                    assert!(v.is_finite());
                }
            }
        }
    }
}
