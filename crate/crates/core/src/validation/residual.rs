//! What remains after substituting an approximation into the diagonalized
//! system:
//!
//! ```text
//! Res_{u∓1} = ∂tΨ_{∓1} ± iωΨ_{∓1} ± ½ iρ (Ψ₋₁+Ψ₁)²
//! ```
//!
//! evaluated spectrally. The time derivative comes from the approximation
//! itself (assembled analytically through the NLS right side); centered
//! differencing of packets is kept in the tests as a cross-check only.

use crate::approximation::Approximation;
use crate::spectral::{FieldPair, Prefactor, SpectralField};
use crate::symbols::DispersionSymbol;
use crate::{Error, Result};

/// The residual pair (Res_{u₋₁}, Res_{u₁}) as spectral fields.
pub fn residual_fields(
    ap: &Approximation,
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
) -> Result<FieldPair> {
    residual_of_pair(&ap.pair, &ap.pair_dt, omega, rho)
}

/// Residual of an arbitrary (pair, ∂t pair) combination — lets tests feed
/// exact linear flows or differenced packets through the same formula.
pub fn residual_of_pair(
    pair: &FieldPair,
    pair_dt: &FieldPair,
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
) -> Result<FieldPair> {
    if pair.grid() != pair_dt.grid() {
        return Err(Error::GridMismatch("residual pair grids".into()));
    }
    let sum = pair.sum();
    let quad = sum.product(&sum)?.dealias();
    let half_rho_sq = quad.apply_multiplier(rho, Prefactor::I).scaled(0.5);

    let mut res_minus = &pair_dt.minus + &pair.minus.apply_multiplier(omega, Prefactor::I);
    res_minus = &res_minus + &half_rho_sq;

    let mut res_plus = &pair_dt.plus - &pair.plus.apply_multiplier(omega, Prefactor::I);
    res_plus = &res_plus - &half_rho_sq;

    Ok(FieldPair {
        minus: res_minus,
        plus: res_plus,
    })
}

/// H^s norms of the residual pair.
pub fn residual_norms(
    ap: &Approximation,
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
    s: f64,
) -> Result<(f64, f64)> {
    let res = residual_fields(ap, omega, rho)?;
    Ok((res.minus.sobolev_norm(s)?, res.plus.sobolev_norm(s)?))
}
