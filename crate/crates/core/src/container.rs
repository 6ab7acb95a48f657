//! Binary container for field snapshots and a CSV writer for inspection.
//!
//! Layout (all little-endian): u64 n_points, f64 period, u8 real flag,
//! then n_points complex coefficients as (re, im) f64 pairs.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::spectral::{SpectralField, SpectralGrid};
use crate::{Error, Result};

pub fn write_field(w: &mut impl Write, field: &SpectralField) -> Result<()> {
    let g = field.grid();
    w.write_all(&(g.n_points() as u64).to_le_bytes())?;
    w.write_all(&g.period().to_le_bytes())?;
    w.write_all(&[u8::from(field.is_real())])?;
    for c in field.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

/// The header does not carry the carrier index; callers supply it when the
/// field is to be re-attached to a packet pipeline (0 is fine for plain data).
pub fn read_field(r: &mut impl Read, k0_index: usize) -> Result<SpectralField> {
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let period = f64::from_le_bytes(b8);
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1)?;
    let is_real = match b1[0] {
        0 => false,
        1 => true,
        v => return Err(Error::Container(format!("bad real flag {v}"))),
    };
    let grid = SpectralGrid::new(n, period, k0_index)
        .map_err(|e| Error::Container(format!("bad header: {e}")))?;
    let mut coeffs = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        coeffs.push(Complex64::new(re, im));
    }
    SpectralField::from_coeffs(&grid, coeffs, is_real)
}

/// One row per grid point: x, re, im (im omitted for real fields).
pub fn write_field_csv(w: &mut impl Write, field: &SpectralField) -> Result<()> {
    let xs = field.grid().points();
    if field.is_real() {
        writeln!(w, "x,u")?;
        for (x, v) in xs.iter().zip(field.to_physical_real()) {
            writeln!(w, "{x:.12e},{v:.12e}")?;
        }
    } else {
        writeln!(w, "x,re,im")?;
        for (x, v) in xs.iter().zip(field.to_physical()) {
            writeln!(w, "{x:.12e},{:.12e},{:.12e}", v.re, v.im)?;
        }
    }
    Ok(())
}
