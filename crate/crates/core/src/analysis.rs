//! Resonance scanning, non-degeneracy/non-resonance verification and the
//! NLS coefficients (both cases of the cubic coefficient ν₂).

use serde::Serialize;

use crate::symbols::DispersionSymbol;
use crate::{Error, Result};

/// Margins below this emit a warning: the conditions hold but the constants
/// in the error estimates degrade.
pub const NEAR_RESONANCE_WARNING: f64 = 1e-3;

/// Margins below this count as a violation.
const MARGIN_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    pub condition: String,
    pub pass: bool,
    /// Absolute distance from the forbidden set.
    pub margin: f64,
}

/// Outcome of the structural conditions at a fixed wavenumber k₀:
/// ω″(k₀) ≠ 0, the derivation alternative (either ω′(k₀) ≠ ±ω′(0) with
/// ρ(0⁺) = 0, or ω(0⁺) ≠ 0), the non-resonance conditions
/// m·ω(k₀) ≠ ±ω(m·k₀) for m = 2..5, and — in the ω(0⁺) ≠ 0 case — the
/// further-resonance exclusions. Deterministic given (ω, ρ, k₀).
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub k0: f64,
    pub zero_limit_case: bool,
    pub entries: Vec<ConditionEntry>,
    pub warnings: Vec<String>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        // the two derivation alternatives are an either/or; everything else
        // must hold individually
        let mut alt_a = true;
        let mut alt_b = true;
        let mut further_a = true;
        let mut further_b = true;
        let mut has_further = false;
        let mut rest = true;
        for e in &self.entries {
            match e.condition.as_str() {
                "derivation_alt_a" => alt_a = e.pass,
                "derivation_alt_b" => alt_b = e.pass,
                "no_further_resonance_a" => {
                    has_further = true;
                    further_a = e.pass;
                }
                "no_further_resonance_b" => {
                    has_further = true;
                    further_b = e.pass;
                }
                _ => rest &= e.pass,
            }
        }
        rest && (alt_a || alt_b) && (!has_further || further_a || further_b)
    }

    pub fn nr1_margins(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.condition.starts_with("nr1_m"))
            .map(|e| e.margin)
            .collect()
    }
}

/// Evaluate the conditions on (ω, ρ) at k₀. All outcomes are report entries;
/// nothing is raised.
pub fn check_conditions(
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
    k0: f64,
) -> Result<ConditionReport> {
    if !(k0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "k0",
            reason: format!("must be positive, got {k0}"),
        });
    }
    let omega0 = omega.eval(k0);
    let omega_pp = omega.eval_derivative(k0, 2, false)?;
    let cg = omega.eval_derivative(k0, 1, false)?;
    let omega_p0 = omega.eval_derivative(0.0, 1, true)?;
    let omega_0p = omega.limit_zero_plus();
    let rho_0p = rho.limit_zero_plus();
    let zero_limit_case = omega_0p == 0.0;

    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    let mut push = |name: &str, margin: f64, pass: bool, warnings: &mut Vec<String>| {
        if pass && margin < NEAR_RESONANCE_WARNING {
            warnings.push(format!(
                "{name}: margin {margin:.3e} below {NEAR_RESONANCE_WARNING:.0e}; constants degrade"
            ));
        }
        entries.push(ConditionEntry {
            condition: name.into(),
            pass,
            margin,
        });
    };

    let scale = 1.0 + omega0.abs();

    // ω″(k₀) ≠ 0
    push(
        "omega_pp_nonzero",
        omega_pp.abs(),
        omega_pp.abs() > MARGIN_FLOOR * scale,
        &mut warnings,
    );

    // alternative (a): ω′(k₀) ≠ ±ω′(0) and ρ(0⁺) = 0
    let da = (cg - omega_p0).abs().min((cg + omega_p0).abs());
    let alt_a = da > MARGIN_FLOOR * scale && rho_0p == 0.0;
    push("derivation_alt_a", da, alt_a, &mut warnings);
    // alternative (b): ω(0⁺) ≠ 0
    push(
        "derivation_alt_b",
        omega_0p.abs(),
        omega_0p.abs() > MARGIN_FLOOR * scale,
        &mut warnings,
    );

    // m ω(k₀) ≠ ±ω(m k₀) for m = 2..5 (negative m are equivalent by oddness)
    for m in 2..=5 {
        let mf = m as f64;
        let wm = omega.eval(mf * k0);
        let margin = (mf * omega0 - wm).abs().min((mf * omega0 + wm).abs());
        push(
            &format!("nr1_m{m}"),
            margin,
            margin > MARGIN_FLOOR * scale * mf,
            &mut warnings,
        );
    }

    if !zero_limit_case {
        // (a): ω(0⁺) ≠ ±2ω(k₀)
        let m210 = (omega_0p - 2.0 * omega0)
            .abs()
            .min((omega_0p + 2.0 * omega0).abs());
        push(
            "no_further_resonance_a",
            m210,
            m210 > MARGIN_FLOOR * scale,
            &mut warnings,
        );
        // (b): ω′(k₀) ≠ ±ω′(0), ρ(0⁺) = 0 and ω(0^±) ≠ 2ω(k₀) + j ω(2k₀)
        let w2 = omega.eval(2.0 * k0);
        let mut m211 = f64::INFINITY;
        for s in [-1.0, 1.0] {
            for j in [-1.0, 1.0] {
                m211 = m211.min((s * omega_0p - 2.0 * omega0 - j * w2).abs());
            }
        }
        let pass_b = da > MARGIN_FLOOR * scale && rho_0p == 0.0 && m211 > MARGIN_FLOOR * scale;
        push("no_further_resonance_b", m211.min(da), pass_b, &mut warnings);
    }

    Ok(ConditionReport {
        k0,
        zero_limit_case,
        entries,
        warnings,
    })
}

/// The data entering the NLS envelope equation
/// ∂_T A = i (ω″(k₀)/2) ∂_X² A + i ν₂ A|A|².
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NlsCoefficients {
    pub k0: f64,
    pub omega0: f64,
    pub cg: f64,
    pub half_omega_pp: f64,
    pub nu2: f64,
    /// true when ω(0⁺) = 0 (selects which ν₂ formula applied).
    pub zero_limit_case: bool,
}

/// Compute ω₀, c_g, ω″(k₀)/2 and ν₂, with the case split on ω(0⁺):
///
/// ```text
/// ν₂ = -ρ(k₀)·( ρ(2k₀)ω(2k₀) / (4ω(k₀)² - ω(2k₀)²)
///               + 2ρ'(0)ω'(0) / (ω'(k₀)² - ω'(0)²) )     ω(0⁺) = 0
/// ν₂ = -ρ(k₀)·( ρ(2k₀)ω(2k₀) / (4ω(k₀)² - ω(2k₀)²)
///               - 2ρ(0⁺)/ω(0⁺) )                          ω(0⁺) ≠ 0
/// ```
pub fn nls_coefficients(
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
    k0: f64,
) -> Result<NlsCoefficients> {
    if !(k0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "k0",
            reason: format!("must be positive, got {k0}"),
        });
    }
    let omega0 = omega.eval(k0);
    let cg = omega.eval_derivative(k0, 1, false)?;
    let half_omega_pp = 0.5 * omega.eval_derivative(k0, 2, false)?;
    let omega_0p = omega.limit_zero_plus();
    let zero_limit_case = omega_0p == 0.0;

    let w2 = omega.eval(2.0 * k0);
    let r2 = rho.eval(2.0 * k0);
    let rk0 = rho.eval(k0);

    let d1 = 4.0 * omega0 * omega0 - w2 * w2;
    let scale1 = (1.0 + 2.0 * k0).powf(2.0 * omega.degree());
    if d1.abs() <= 1e-12 * scale1 {
        return Err(Error::NearResonance {
            k: 2.0 * k0,
            value: d1,
            margin: 1e-12 * scale1,
        });
    }
    let first = r2 * w2 / d1;

    let second = if zero_limit_case {
        let rp0 = rho.eval_derivative(0.0, 1, true)?;
        let wp0 = omega.eval_derivative(0.0, 1, true)?;
        let num = 2.0 * rp0 * wp0;
        if num == 0.0 {
            0.0
        } else {
            let d2 = cg * cg - wp0 * wp0;
            if d2.abs() <= 1e-12 * (1.0 + cg * cg) {
                return Err(Error::NearResonance {
                    k: 0.0,
                    value: d2,
                    margin: 1e-12 * (1.0 + cg * cg),
                });
            }
            num / d2
        }
    } else {
        -2.0 * rho.limit_zero_plus() / omega_0p
    };

    let nu2 = -rk0 * (first + second);
    if !nu2.is_finite() {
        return Err(Error::NonFinite("nu2"));
    }
    Ok(NlsCoefficients {
        k0,
        omega0,
        cg,
        half_omega_pp,
        nu2,
        zero_limit_case,
    })
}

/// A real solution of ω(k) - j₁j₂ ω(k - b·k₀) + j₁ ω(b·k₀) = 0, found by
/// bracketing and bisection on one (j₁, j₂, b) branch.
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceRoot {
    pub k_root: f64,
    pub j1: i8,
    pub j2: i8,
    /// The ∓ choice: +1 for (k - k₀, +k₀), -1 for (k + k₀, -k₀).
    pub branch: i8,
    pub residual_value: f64,
    /// The quadratic term's symbol vanishes here.
    pub trivial: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceScan {
    pub roots: Vec<ResonanceRoot>,
    /// inf |left side| on samples outside root/jump neighborhoods — the
    /// non-accumulation diagnostic.
    pub infimum_away_from_roots: f64,
}

impl ResonanceScan {
    /// Deduplicated root locations across all branches.
    pub fn locations(&self) -> Vec<f64> {
        let mut locs: Vec<f64> = Vec::new();
        for r in &self.roots {
            if !locs.iter().any(|&l| (l - r.k_root).abs() < 1e-8) {
                locs.push(r.k_root);
            }
        }
        locs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        locs
    }

    pub fn nontrivial_roots(&self) -> Vec<&ResonanceRoot> {
        self.roots.iter().filter(|r| !r.trivial).collect()
    }
}

const SAMPLING_BUDGET: usize = 1 << 27;

/// Scan all eight (j₁, j₂, branch) combinations for real roots of the
/// resonance equation on [-k_max, k_max].
///
/// Sign changes are bracketed on a uniform grid and refined by bisection to
/// |Δk| < 1e-12. A converged bracket only counts as a root if the left side
/// actually vanishes there (|f| ≤ 1e-8·(1+|k|)^{deg ω}); this rejects jump
/// crossings of discontinuous symbols. Brackets that straddle the jump
/// points k = 0 or k = b·k₀ are tested at those points exactly, where
/// sign(0) = 0 applies.
pub fn scan_resonances(
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
    k0: f64,
    k_max: f64,
    n_samples: usize,
) -> Result<ResonanceScan> {
    if !(k_max >= 5.0 * k0) {
        return Err(Error::InvalidParameter {
            name: "k_max",
            reason: format!("must be ≥ 5k₀ = {}, got {k_max}", 5.0 * k0),
        });
    }
    if n_samples < 10_000 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            reason: format!("must be ≥ 10⁴, got {n_samples}"),
        });
    }
    if n_samples.saturating_mul(8) > SAMPLING_BUDGET {
        return Err(Error::SamplingBudget(n_samples * 8));
    }

    let root_tol = |k: f64| 1e-8 * (1.0 + k.abs()).powf(omega.degree());
    let trivial_tol = |k: f64| 1e-10 * (1.0 + k.abs()).powf(rho.degree());

    let mut roots: Vec<ResonanceRoot> = Vec::new();
    let mut inf_away = f64::INFINITY;
    let h = 2.0 * k_max / n_samples as f64;

    for &j1 in &[1i8, -1] {
        for &j2 in &[1i8, -1] {
            for &branch in &[1i8, -1] {
                let b = branch as f64;
                let f = |k: f64| {
                    omega.eval(k) - (j1 * j2) as f64 * omega.eval(k - b * k0)
                        + j1 as f64 * omega.eval(b * k0)
                };
                let mut branch_roots: Vec<(f64, f64)> = Vec::new();
                let mut prev_k = -k_max;
                let mut prev_f = f(prev_k);
                for i in 1..=n_samples {
                    let k = -k_max + i as f64 * h;
                    let fk = f(k);
                    if prev_f == 0.0 {
                        branch_roots.push((prev_k, 0.0));
                    } else if prev_f * fk < 0.0 {
                        if let Some(root) = refine(&f, prev_k, k, b * k0, root_tol(prev_k)) {
                            branch_roots.push(root);
                        }
                    }
                    prev_k = k;
                    prev_f = fk;
                }
                if prev_f == 0.0 {
                    branch_roots.push((prev_k, 0.0));
                }

                // dedupe within the branch, keeping the smaller residual
                branch_roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut deduped: Vec<(f64, f64)> = Vec::new();
                for (k, r) in branch_roots {
                    match deduped.last_mut() {
                        Some(last) if (last.0 - k).abs() < 1e-8 => {
                            if r < last.1 {
                                *last = (k, r);
                            }
                        }
                        _ => deduped.push((k, r)),
                    }
                }

                // non-accumulation diagnostic on this branch's samples
                let exclusion = 0.05f64;
                for i in 0..=n_samples {
                    let k = -k_max + i as f64 * h;
                    let near_root = deduped.iter().any(|(kr, _)| (k - kr).abs() < exclusion);
                    let near_jump = k.abs() < exclusion || (k - b * k0).abs() < exclusion;
                    if !near_root && !near_jump {
                        inf_away = inf_away.min(f(k).abs());
                    }
                }

                for (k_root, residual_value) in deduped {
                    let trivial = rho.eval(k_root).abs() < trivial_tol(k_root);
                    roots.push(ResonanceRoot {
                        k_root,
                        j1,
                        j2,
                        branch,
                        residual_value,
                        trivial,
                    });
                }
            }
        }
    }

    Ok(ResonanceScan {
        roots,
        infimum_away_from_roots: inf_away,
    })
}

/// Bisection on a bracketing interval; returns (root, |f(root)|) or None
/// when the converged point is a jump crossing rather than a zero.
fn refine(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, shifted_jump: f64, tol: f64) -> Option<(f64, f64)> {
    let mut fa = f(a);
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return Some((mid, 0.0));
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    // test the jump points exactly if the bracket straddles them
    for special in [0.0, shifted_jump] {
        if a - 1e-10 <= special && special <= b + 1e-10 {
            let fs = f(special);
            if fs.abs() <= tol {
                return Some((special, fs.abs()));
            }
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid).abs();
    (fm <= tol).then_some((mid, fm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn beam_conditions_all_pass() {
        let beam = DispersionSymbol::beam();
        let rep = check_conditions(&beam, &beam, 1.0).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        assert!(rep.zero_limit_case);
        assert_eq!(rep.nr1_margins(), vec![2.0, 6.0, 12.0, 20.0]);
    }

    #[test]
    fn beam_second_derivative_condition_every_k0() {
        let beam = DispersionSymbol::beam();
        for &k0 in &[0.3, 1.0, 2.5, 7.0] {
            let rep = check_conditions(&beam, &beam, k0).unwrap();
            let e = rep
                .entries
                .iter()
                .find(|e| e.condition == "omega_pp_nonzero")
                .unwrap();
            assert!(e.pass);
            assert_abs_diff_eq!(e.margin, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ice_cover_conditions_at_k0_1() {
        let ice = DispersionSymbol::ice_cover();
        let rep = check_conditions(&ice, &ice, 1.0).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }

    #[test]
    fn beam_nls_coefficients() {
        let beam = DispersionSymbol::beam();
        let c = nls_coefficients(&beam, &beam, 1.0).unwrap();
        assert_abs_diff_eq!(c.omega0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.cg, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.half_omega_pp, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.nu2, 4.0 / 3.0, epsilon = 1e-12);
        assert!(c.zero_limit_case);
        // focusing at k₀ = 1: ν₂·ω″ > 0
        assert!(c.nu2 * 2.0 * c.half_omega_pp > 0.0);
    }

    #[test]
    fn zero_rho_gives_zero_nu2() {
        let beam = DispersionSymbol::beam();
        let zero = DispersionSymbol::poly_sign(vec![0.0]);
        let c = nls_coefficients(&beam, &zero, 1.0).unwrap();
        assert_eq!(c.nu2, 0.0);
    }

    /// Duplicate-implementation oracle for the ice-cover ν₂ at k₀ = 1:
    /// the formula recomputed from scratch with independent scalar code.
    #[test]
    fn ice_cover_nu2_vs_scalar_oracle() {
        let ice = DispersionSymbol::ice_cover();
        let c = nls_coefficients(&ice, &ice, 1.0).unwrap();

        let w = |k: f64| {
            let kt = k * k.tanh();
            (kt / (1.0 + kt) * (1.0 + k * k + k.powi(4))).sqrt()
        };
        let h = 1e-6;
        let wp = |k: f64| (w(k + h) - w(k - h)) / (2.0 * h);
        let w1 = w(1.0);
        let w2 = w(2.0);
        let first = w2 * w2 / (4.0 * w1 * w1 - w2 * w2);
        // ρ = ω, ρ'(0)ω'(0): symbol behaves like k near 0 so ρ'(0⁺) = ω'(0⁺) = 1
        let second = 2.0 / (wp(1.0).powi(2) - 1.0);
        let nu2 = -w1 * (first + second);
        assert_relative_eq!(c.nu2, nu2, max_relative = 1e-5);
        assert!(c.nu2.is_finite());
        assert!(c.zero_limit_case);
    }

    /// Second ν₂ case: a jump symbol with ω(0⁺) ≠ 0.
    #[test]
    fn jump_symbol_second_case() {
        // ω = ρ = sign(k)(1 + |k|²)
        let sym = DispersionSymbol::poly_sign(vec![1.0, 0.0, 1.0]);
        let c = nls_coefficients(&sym, &sym, 1.0).unwrap();
        assert!(!c.zero_limit_case);
        let w1 = 2.0;
        let w2 = 5.0;
        let expect = -w1 * (w2 * w2 / (4.0 * w1 * w1 - w2 * w2) - 2.0);
        assert_relative_eq!(c.nu2, expect, max_relative = 1e-12);
    }

    #[test]
    fn beam_scan_finds_only_known_roots() {
        let beam = DispersionSymbol::beam();
        let scan = scan_resonances(&beam, &beam, 1.0, 20.0, 100_000).unwrap();
        let locs = scan.locations();
        assert_eq!(locs.len(), 3, "locations {locs:?}");
        for (found, expect) in locs.iter().zip([-1.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(found, &expect, epsilon = 1e-6);
        }
        for r in &scan.roots {
            assert_eq!(r.trivial, r.k_root.abs() < 0.5, "{r:?}");
            assert!(
                r.residual_value <= 1e-8 * (1.0 + r.k_root.abs()).powi(2),
                "{r:?}"
            );
        }
        assert!(scan.infimum_away_from_roots > 0.01);
    }

    #[test]
    fn scan_symmetric_under_reflection() {
        let gc = DispersionSymbol::gravity_capillary(0.2).unwrap();
        let scan = scan_resonances(&gc, &gc, 1.0, 8.0, 20_000).unwrap();
        for r in &scan.roots {
            let mirrored = scan.roots.iter().any(|s| {
                s.j1 == r.j1
                    && s.j2 == r.j2
                    && s.branch == -r.branch
                    && (s.k_root + r.k_root).abs() < 1e-9
            });
            assert!(mirrored, "no mirror for {r:?}");
        }
    }

    /// Independent dense-grid oracle: sign changes on a 2·10⁶-point grid,
    /// then plain midpoint bisection, implemented from scratch.
    #[test]
    fn gravity_capillary_scan_vs_brute_force() {
        let gc = DispersionSymbol::gravity_capillary(0.2).unwrap();
        let k0 = 1.0;
        let k_max = 20.0;
        let scan = scan_resonances(&gc, &gc, k0, k_max, 200_000).unwrap();

        for &j1 in &[1i8, -1] {
            for &j2 in &[1i8, -1] {
                for &branch in &[1i8, -1] {
                    let b = branch as f64;
                    let f = |k: f64| {
                        gc.eval(k) - (j1 * j2) as f64 * gc.eval(k - b * k0)
                            + j1 as f64 * gc.eval(b * k0)
                    };
                    let n = 2_000_000usize;
                    let h = 2.0 * k_max / n as f64;
                    let mut oracle_roots = Vec::new();
                    let mut pk = -k_max;
                    let mut pf = f(pk);
                    for i in 1..=n {
                        let k = -k_max + i as f64 * h;
                        let fk = f(k);
                        if pf == 0.0 || pf * fk < 0.0 {
                            let (mut a, mut c) = (pk, k);
                            for _ in 0..60 {
                                let m = 0.5 * (a + c);
                                if f(a) * f(m) <= 0.0 {
                                    c = m;
                                } else {
                                    a = m;
                                }
                            }
                            let m = 0.5 * (a + c);
                            // keep genuine zeros; drop jump crossings
                            let near = [0.0, b * k0, m]
                                .into_iter()
                                .find(|&p| (p - m).abs() < h && f(p).abs() < 1e-7);
                            if let Some(p) = near {
                                if !oracle_roots
                                    .iter()
                                    .any(|&q: &f64| (q - p).abs() < 1e-6)
                                {
                                    oracle_roots.push(p);
                                }
                            }
                        }
                        pk = k;
                        pf = fk;
                    }
                    let scan_roots: Vec<f64> = scan
                        .roots
                        .iter()
                        .filter(|r| r.j1 == j1 && r.j2 == j2 && r.branch == branch)
                        .map(|r| r.k_root)
                        .collect();
                    assert_eq!(
                        scan_roots.len(),
                        oracle_roots.len(),
                        "branch ({j1},{j2},{branch}): scan {scan_roots:?} oracle {oracle_roots:?}"
                    );
                    for r in &scan_roots {
                        assert!(
                            oracle_roots.iter().any(|o| (o - r).abs() < 1e-6),
                            "scan root {r} not in oracle {oracle_roots:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn scan_preconditions() {
        let beam = DispersionSymbol::beam();
        assert!(scan_resonances(&beam, &beam, 1.0, 2.0, 100_000).is_err());
        assert!(scan_resonances(&beam, &beam, 1.0, 20.0, 100).is_err());
    }
}
