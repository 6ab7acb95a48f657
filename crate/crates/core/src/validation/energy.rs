//! The error decomposition behind the main estimate and the modified energy
//!
//! ```text
//! 𝓔_ℓ = E₀ + E_ℓ
//! E_ℓ = Σ_{j₁} ( ½‖∂ₓ^ℓ R_{j₁}‖² + ε Σ_{j₂} ∫ ∂ₓ^ℓ R_{j₁} ∂ₓ^ℓ ϑ⁻¹N_{j₁j₂}(ψ_c, R_{j₂}) dx )
//! E₀  = ‖Ř₋₁‖² + ‖Ř₁‖²
//! Ř_j = R_j + ε Σ_{j₂} ϑ⁻¹N_{jj₂}(ψ_c, R_{j₂})
//!           + ε² Σ_{j₂j₃j₄} ϑ⁻¹𝒯_{jj₂j₃j₄}(ψ_{j₄}, ψ_{j₄}, R_{j₃})
//! ```
//!
//! equivalent to the squared H^ℓ norm of the error pair uniformly in ε.

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::nls_coefficients;
use crate::approximation::{bandlimit, InitialEnvelope, PacketAssembler, WeightOperator};
use crate::spectral::{EnvelopeShape, FieldPair, SpectralField, SpectralGrid};
use crate::symbols::DispersionSymbol;
use crate::validation::kernels::KernelContext;
use crate::{Error, Result};

/// The exponent β of the error scaling u = εΨ + ε^β ϑR.
pub const BETA: f64 = 2.5;

/// The error pair R = (R₋₁, R₁) of the decomposition
/// ε^β (ϑR₋₁, ϑR₁) = (u₋₁, u₁) − εΨ.
#[derive(Debug, Clone)]
pub struct ErrorDecomposition {
    pub r: FieldPair,
    pub beta: f64,
    pub weight: WeightOperator,
}

/// Extract R from a solution pair and an approximation pair: the definition
/// is exact, so `reconstruct` returns the solution to roundoff.
pub fn decompose_error(
    u: &FieldPair,
    approx: &FieldPair,
    eps: f64,
    weight: WeightOperator,
) -> Result<ErrorDecomposition> {
    let scale = eps.powf(-BETA);
    let minus = weight.apply(&(&u.minus - &approx.minus).scaled(scale), true, false)?;
    let plus = weight.apply(&(&u.plus - &approx.plus).scaled(scale), true, false)?;
    Ok(ErrorDecomposition {
        r: FieldPair { minus, plus },
        beta: BETA,
        weight,
    })
}

impl ErrorDecomposition {
    /// εΨ + ε^β (ϑR₋₁, ϑR₁).
    pub fn reconstruct(&self, approx: &FieldPair, eps: f64) -> Result<FieldPair> {
        let scale = eps.powf(self.beta);
        let minus = &approx.minus + &self.weight.apply(&self.r.minus, false, false)?.scaled(scale);
        let plus = &approx.plus + &self.weight.apply(&self.r.plus, false, false)?.scaled(scale);
        Ok(FieldPair { minus, plus })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    pub e0: f64,
    pub e_ell: f64,
    pub total: f64,
    pub ell: usize,
    pub eps: f64,
}

/// Evaluate 𝓔_ℓ. `psi_c` is the unscaled packet ψ_c (supported in the χ_c
/// windows) and `psi_parts` its carrier halves (ψ₋₁, ψ₁) entering the
/// trilinear corrections.
pub fn modified_energy(
    r: &FieldPair,
    psi_c: &SpectralField,
    psi_parts: (&SpectralField, &SpectralField),
    ell: usize,
    eps: f64,
    ctx: &KernelContext,
) -> Result<EnergyBreakdown> {
    if ell < 1 {
        return Err(Error::InvalidParameter {
            name: "ell",
            reason: "the energy index must satisfy ℓ ≥ 1".into(),
        });
    }
    let weight = *ctx.weight();
    let r_comp = [&r.minus, &r.plus];
    let signs = [-1i8, 1i8];

    // the four ϑ⁻¹N_{j₁j₂}(ψ_c, R_{j₂}) fields, reused by E_ℓ and E₀
    let mut tn = vec![Vec::new(); 2];
    for (i1, &j1) in signs.iter().enumerate() {
        for (i2, &j2) in signs.iter().enumerate() {
            let n = ctx.nf_apply((j1, j2), psi_c, r_comp[i2])?;
            tn[i1].push(weight.apply(&n, true, false)?);
        }
        let _ = i1;
    }

    let mut e_ell = 0.0;
    for (i1, _) in signs.iter().enumerate() {
        let d_r = r_comp[i1].derivative(ell);
        e_ell += 0.5 * d_r.sobolev_norm(0.0)?.powi(2);
        for (i2, _) in signs.iter().enumerate() {
            let d_tn = tn[i1][i2].derivative(ell);
            e_ell += eps * d_r.inner_l2(&d_tn)?.re;
        }
    }

    let mut e0 = 0.0;
    for (i1, &j1) in signs.iter().enumerate() {
        let mut check = r_comp[i1].clone();
        for (i2, _) in signs.iter().enumerate() {
            check.add_scaled(&tn[i1][i2], Complex64::new(eps, 0.0));
        }
        if eps > 0.0 {
            for &j2 in &signs {
                for (i3, &j3) in signs.iter().enumerate() {
                    for (i4, &j4) in signs.iter().enumerate() {
                        let psi_j4 = if i4 == 0 { psi_parts.0 } else { psi_parts.1 };
                        let t = ctx.trilinear_apply(j1, j2, j3, j4, psi_j4, psi_j4, r_comp[i3])?;
                        let t = weight.apply(&t, true, false)?;
                        check.add_scaled(&t, Complex64::new(eps * eps, 0.0));
                    }
                }
            }
        }
        e0 += check.sobolev_norm(0.0)?.powi(2);
    }

    Ok(EnergyBreakdown {
        e0,
        e_ell,
        total: e0 + e_ell,
        ell,
        eps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyEnsembleRow {
    pub eps: f64,
    pub draws: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyEquivalenceStats {
    pub ell: usize,
    pub seed: u64,
    pub rows: Vec<EnergyEnsembleRow>,
}

impl EnergyEquivalenceStats {
    /// Uniform two-sided bound: every ratio within [1/c, c].
    pub fn within(&self, c: f64) -> bool {
        self.rows
            .iter()
            .all(|r| r.min_ratio >= 1.0 / c && r.max_ratio <= c)
    }
}

/// Draw a random error ensemble and report the ratio
/// 𝓔_ℓ / (‖R₋₁‖_{H^ℓ} + ‖R₁‖_{H^ℓ})² per ε. The packet ψ_c comes from a
/// soliton envelope band-limited at the strict paper cutoff δ = k₀/32.
pub fn energy_equivalence_check(
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
    k0: f64,
    ell: usize,
    eps_list: &[f64],
    ensemble: usize,
    seed: u64,
) -> Result<EnergyEquivalenceStats> {
    let delta = k0 / 32.0;
    let mut rows = Vec::new();
    for &eps in eps_list {
        let coeffs = nls_coefficients(omega, rho, k0)?;
        let grid = SpectralGrid::make_grid(k0, eps, 1.0, EnvelopeShape::Sech, 2.0, None)?;
        let weight = WeightOperator::for_symbol(omega, k0, delta, eps)?;
        let ctx = KernelContext::new(&grid, omega, rho, k0, delta, weight)?;
        let asm = PacketAssembler::new(&grid, omega, rho, coeffs, eps, Some(delta))?;
        let envelope = InitialEnvelope::Soliton { amplitude: 1.0 }.build(&grid, eps, &coeffs)?;
        let a1 = bandlimit(&envelope, delta * 0.999, k0)?;
        let psi_c = asm.psi_c_unscaled(&a1, 0.0)?;
        let (psi_m, psi_p) = asm.psi_c_parts(&a1, 0.0)?;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut min_ratio = f64::INFINITY;
        let mut max_ratio = 0.0f64;
        let mut mean = 0.0;
        for _ in 0..ensemble {
            let r = FieldPair {
                minus: random_error_field(&grid, &mut rng, ell),
                plus: random_error_field(&grid, &mut rng, ell),
            };
            let breakdown = modified_energy(&r, &psi_c, (&psi_m, &psi_p), ell, eps, &ctx)?;
            let denom = (r.minus.sobolev_norm(ell as f64)? + r.plus.sobolev_norm(ell as f64)?)
                .powi(2);
            let ratio = breakdown.total / denom;
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
            mean += ratio;
        }
        rows.push(EnergyEnsembleRow {
            eps,
            draws: ensemble,
            min_ratio,
            max_ratio,
            mean_ratio: mean / ensemble as f64,
        });
    }
    Ok(EnergyEquivalenceStats { ell, seed, rows })
}

/// Random real field with H^ℓ-type spectral decay inside the dealiased band.
fn random_error_field(grid: &SpectralGrid, rng: &mut ChaCha8Rng, ell: usize) -> SpectralField {
    let mut f = SpectralField::zero(grid, true);
    let cut = grid.dealias_cutoff();
    for j in 1..grid.n_points() / 2 {
        let k = grid.wavenumber(j);
        if k.abs() > cut {
            continue;
        }
        let amp = (1.0 + k * k).powf(-(ell as f64 + 1.0) / 2.0);
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        f.coeffs_mut()[j] = c;
        let mi = grid.storage_index(-(j as i64)).unwrap();
        f.coeffs_mut()[mi] = c.conj();
    }
    f
}
