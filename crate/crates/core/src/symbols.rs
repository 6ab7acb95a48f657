//! Catalog and calculus of odd real dispersion symbols.
//!
//! Every symbol here has the form γ(k) = sign(k)·g(|k|) with g smooth on
//! (0, ∞), which covers the built-in models:
//!
//! ```text
//! beam               sign(k) k²
//! gravity_capillary  sign(k) √(k tanh k (1 + b k²))
//! ice_cover          sign(k) √(k tanh k / (1 + k tanh k) · (1 + k² + k⁴))
//! poly_sign(c)       sign(k) Σ c_n |k|^n
//! ```
//!
//! Symbols are immutable after construction and cheap to clone; evaluation
//! is safe from concurrent contexts.

use crate::{Error, Result};

/// sign with sign(0) := 0, so jump-type symbols evaluate to 0 at k = 0.
/// The one-sided limit γ(0⁺) is stored separately on the symbol.
fn sgn(k: f64) -> f64 {
    if k > 0.0 {
        1.0
    } else if k < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Beam,
    GravityCapillary { b: f64 },
    IceCover,
    /// g(x) = Σ coeffs[n] xⁿ evaluated at x = |k|.
    PolySign { coeffs: Vec<f64> },
}

impl Kind {
    /// g(x) for x ≥ 0.
    fn g(&self, x: f64) -> f64 {
        match self {
            Kind::Beam => x * x,
            Kind::GravityCapillary { b } => (x * x.tanh() * (1.0 + b * x * x)).sqrt(),
            Kind::IceCover => {
                let w = x * x.tanh();
                (w / (1.0 + w) * (1.0 + x * x + x.powi(4))).sqrt()
            }
            Kind::PolySign { coeffs } => poly_eval(coeffs, x),
        }
    }

    /// Analytic g⁽ⁿ⁾(x) where a closed form is carried; None falls back to
    /// finite differences.
    fn g_derivative_analytic(&self, x: f64, n: usize) -> Option<f64> {
        match self {
            Kind::Beam => Some(match n {
                0 => x * x,
                1 => 2.0 * x,
                2 => 2.0,
                _ => 0.0,
            }),
            Kind::PolySign { coeffs } => Some(poly_derivative(coeffs, x, n)),
            Kind::GravityCapillary { b } => match n {
                0 => Some(self.g(x)),
                1 | 2 => {
                    if x == 0.0 {
                        // series: g(x) = x + (b - 1/3) x³/2 + O(x⁵)
                        return Some(if n == 1 { 1.0 } else { 0.0 });
                    }
                    let t = x.tanh();
                    let s2 = 1.0 - t * t;
                    let f = x * t * (1.0 + b * x * x);
                    let fp = (t + x * s2) * (1.0 + b * x * x) + 2.0 * b * x * x * t;
                    let fpp = (2.0 * s2 - 2.0 * x * s2 * t) * (1.0 + b * x * x)
                        + 6.0 * b * x * t
                        + 4.0 * b * x * x * s2;
                    Some(sqrt_derivative(f, fp, fpp, n))
                }
                _ => None,
            },
            Kind::IceCover => match n {
                0 => Some(self.g(x)),
                1 | 2 => {
                    if x == 0.0 {
                        // series: g(x) = x - x³/6 + O(x⁵)
                        return Some(if n == 1 { 1.0 } else { 0.0 });
                    }
                    let t = x.tanh();
                    let s2 = 1.0 - t * t;
                    let w = x * t;
                    let wp = t + x * s2;
                    let wpp = 2.0 * s2 - 2.0 * x * s2 * t;
                    let q = 1.0 + x * x + x.powi(4);
                    let qp = 2.0 * x + 4.0 * x.powi(3);
                    let qpp = 2.0 + 12.0 * x * x;
                    let u = w / (1.0 + w);
                    let up = wp / (1.0 + w).powi(2);
                    let upp = (wpp * (1.0 + w) - 2.0 * wp * wp) / (1.0 + w).powi(3);
                    let f = u * q;
                    let fp = up * q + u * qp;
                    let fpp = upp * q + 2.0 * up * qp + u * qpp;
                    Some(sqrt_derivative(f, fp, fpp, n))
                }
                _ => None,
            },
        }
    }
}

/// d/dx and d²/dx² of √f from f, f′, f″.
fn sqrt_derivative(f: f64, fp: f64, fpp: f64, n: usize) -> f64 {
    let r = f.sqrt();
    match n {
        1 => fp / (2.0 * r),
        2 => fpp / (2.0 * r) - fp * fp / (4.0 * f * r),
        _ => unreachable!(),
    }
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64], x: f64, n: usize) -> f64 {
    let mut acc = 0.0;
    for (i, &c) in coeffs.iter().enumerate().skip(n) {
        // c · i!/(i-n)! · x^{i-n}
        let mut fac = 1.0;
        for j in (i - n + 1)..=i {
            fac *= j as f64;
        }
        acc += c * fac * x.powi((i - n) as i32);
    }
    acc
}

/// An odd real dispersion symbol k ↦ γ(k) with derivative calculus and
/// degree metadata (deg as in the large-|k| growth |γ(k)| ≍ (1+|k|)^deg).
#[derive(Debug, Clone)]
pub struct DispersionSymbol {
    name: String,
    kind: Kind,
    degree: f64,
    /// true when both growth bounds hold (deg), false for deg*-only symbols.
    degree_exact: bool,
    limit_zero_plus: f64,
    /// Whether γ itself, rather than sign(·)γ(·), is the C^{m_ω} representative.
    smooth_through_zero: bool,
    m_omega: usize,
}

impl DispersionSymbol {
    pub fn beam() -> Self {
        Self {
            name: "beam".into(),
            kind: Kind::Beam,
            degree: 2.0,
            degree_exact: true,
            limit_zero_plus: 0.0,
            smooth_through_zero: false,
            m_omega: m_omega_for(2.0),
        }
    }

    pub fn gravity_capillary(b: f64) -> Result<Self> {
        if b < 0.0 {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: format!("surface tension must be nonnegative, got {b}"),
            });
        }
        let degree = if b > 0.0 { 1.5 } else { 0.5 };
        Ok(Self {
            name: "gravity_capillary".into(),
            kind: Kind::GravityCapillary { b },
            degree,
            degree_exact: true,
            limit_zero_plus: 0.0,
            smooth_through_zero: true,
            m_omega: m_omega_for(degree),
        })
    }

    /// Large-k growth is k·tanh k/(1+k·tanh k) → 1 times (1+k²+k⁴) ~ k⁴,
    /// so the symbol behaves like k².
    pub fn ice_cover() -> Self {
        Self {
            name: "ice_cover".into(),
            kind: Kind::IceCover,
            degree: 2.0,
            degree_exact: true,
            limit_zero_plus: 0.0,
            smooth_through_zero: true,
            m_omega: m_omega_for(2.0),
        }
    }

    /// sign(k)·Σ c_n |k|^n; odd by construction.
    pub fn poly_sign(coeffs: Vec<f64>) -> Self {
        let degree = coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .map(|i| i as f64)
            .unwrap_or(0.0);
        let zero = coeffs.iter().all(|&c| c == 0.0);
        // sign(k)|k|^n is smooth through 0 only for odd n.
        let smooth = coeffs
            .iter()
            .enumerate()
            .all(|(i, &c)| c == 0.0 || i % 2 == 1);
        Self {
            name: "poly_sign".into(),
            kind: Kind::PolySign {
                coeffs: coeffs.clone(),
            },
            degree,
            degree_exact: !zero,
            limit_zero_plus: coeffs.first().copied().unwrap_or(0.0),
            smooth_through_zero: smooth,
            m_omega: m_omega_for(degree),
        }
    }

    /// Construct a builtin by name. `b` feeds gravity_capillary, `coeffs`
    /// feeds poly_sign.
    pub fn by_name(name: &str, b: Option<f64>, coeffs: Option<Vec<f64>>) -> Result<Self> {
        match name {
            "beam" => Ok(Self::beam()),
            "gravity_capillary" => Self::gravity_capillary(b.unwrap_or(0.0)),
            "ice_cover" => Ok(Self::ice_cover()),
            "poly_sign" => {
                let coeffs = coeffs.ok_or_else(|| Error::InvalidParameter {
                    name: "coeffs",
                    reason: "poly_sign requires a coefficient list".into(),
                })?;
                Ok(Self::poly_sign(coeffs))
            }
            other => Err(Error::UnknownSymbol(other.into())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn degree_exact(&self) -> bool {
        self.degree_exact
    }

    pub fn limit_zero_plus(&self) -> f64 {
        self.limit_zero_plus
    }

    pub fn smooth_through_zero(&self) -> bool {
        self.smooth_through_zero
    }

    /// m_ω = max{5, ⌈deg⌉ + 1}, the smoothness order up to which the
    /// derivative calculus is exercised.
    pub fn m_omega(&self) -> usize {
        self.m_omega
    }

    /// γ(k) with sign(0) = 0.
    pub fn eval(&self, k: f64) -> f64 {
        sgn(k) * self.kind.g(k.abs())
    }

    /// γ⁽ⁿ⁾(k) away from the origin; `one_sided` permits evaluation at
    /// k = 0 in the sense of the 0⁺ limit.
    ///
    /// For γ = sign(k) g(|k|), γ⁽ⁿ⁾(k) = sign(k)^{n+1} g⁽ⁿ⁾(|k|).
    pub fn eval_derivative(&self, k: f64, n: usize, one_sided: bool) -> Result<f64> {
        if n > self.m_omega {
            return Err(Error::DerivativeOrder {
                order: n,
                max: self.m_omega,
            });
        }
        if n == 0 {
            return Ok(if k == 0.0 && one_sided {
                self.limit_zero_plus
            } else {
                self.eval(k)
            });
        }
        if k == 0.0 {
            if one_sided {
                return Ok(self.g_derivative(0.0, n));
            }
            if self.smooth_through_zero {
                // odd smooth symbol: even-order derivatives vanish at 0
                return Ok(if n % 2 == 1 {
                    self.g_derivative(0.0, n)
                } else {
                    0.0
                });
            }
            return Err(Error::DerivativeAtJump);
        }
        let s = sgn(k);
        let parity = if n % 2 == 0 { s } else { 1.0 };
        Ok(parity * self.g_derivative(k.abs(), n))
    }

    /// Force the finite-difference route regardless of available closed
    /// forms (the cross-check counterpart of `eval_derivative`).
    pub fn eval_derivative_fd(&self, k: f64, n: usize, one_sided: bool) -> Result<f64> {
        if n > self.m_omega {
            return Err(Error::DerivativeOrder {
                order: n,
                max: self.m_omega,
            });
        }
        if n == 0 {
            return self.eval_derivative(k, 0, one_sided);
        }
        if k == 0.0 {
            if !one_sided && !self.smooth_through_zero {
                return Err(Error::DerivativeAtJump);
            }
            return Ok(self.fd_g_derivative(0.0, n));
        }
        let s = sgn(k);
        let parity = if n % 2 == 0 { s } else { 1.0 };
        Ok(parity * self.fd_g_derivative(k.abs(), n))
    }

    /// g⁽ⁿ⁾(x): analytic when the kind carries a closed form, otherwise a
    /// central difference with one Richardson extrapolation.
    fn g_derivative(&self, x: f64, n: usize) -> f64 {
        if let Some(v) = self.kind.g_derivative_analytic(x, n) {
            return v;
        }
        self.fd_g_derivative(x, n)
    }

    /// Central difference with step h(n, x), Richardson-extrapolated once
    /// from the pair {h, 2h}. The coarse step carries the extrapolation so
    /// the h^{-n} roundoff amplification stays on the fine, pinned step.
    fn fd_g_derivative(&self, x: f64, n: usize) -> f64 {
        let h = fd_step(n, x);
        if x - 2.0 * stencil_halfwidth(n) as f64 * h <= 0.0 {
            // one-sided Richardson near the origin
            let d = |h: f64| one_sided_diff(&|y| self.kind.g(y), x, h, n);
            return 2.0 * d(h / 2.0) - d(h);
        }
        let d = |h: f64| central_diff(&|y| self.kind.g(y), x, h, n);
        (4.0 * d(h) - d(2.0 * h)) / 3.0
    }
}

fn m_omega_for(degree: f64) -> usize {
    5usize.max(degree.ceil() as usize + 1)
}

/// Step sizes per order: 1e-5(1+|k|) for first derivatives, growing with
/// the order since roundoff in an n-th difference amplifies like h^{-n}
/// (1e-5 would leave second derivatives with only ~5 reliable digits).
fn fd_step(n: usize, x: f64) -> f64 {
    let c = match n {
        1 => 1e-5,
        2 => 1e-4,
        3 => 1e-3,
        4 => 3e-3,
        _ => 8e-3,
    };
    c * (1.0 + x.abs())
}

fn stencil_halfwidth(n: usize) -> usize {
    match n {
        1 | 2 => 1,
        3 | 4 => 2,
        _ => 3,
    }
}

fn central_diff(g: &dyn Fn(f64) -> f64, x: f64, h: f64, n: usize) -> f64 {
    match n {
        1 => (g(x + h) - g(x - h)) / (2.0 * h),
        2 => (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h),
        3 => (-g(x - 2.0 * h) + 2.0 * g(x - h) - 2.0 * g(x + h) + g(x + 2.0 * h))
            / (2.0 * h.powi(3)),
        4 => (g(x - 2.0 * h) - 4.0 * g(x - h) + 6.0 * g(x) - 4.0 * g(x + h) + g(x + 2.0 * h))
            / h.powi(4),
        5 => (-g(x - 3.0 * h) + 4.0 * g(x - 2.0 * h) - 5.0 * g(x - h) + 5.0 * g(x + h)
            - 4.0 * g(x + 2.0 * h)
            + g(x + 3.0 * h))
            / (2.0 * h.powi(5)),
        _ => {
            // recurse: d^n = d(d^{n-1}); accuracy is only needed up to m_ω ≤ 6ish
            let inner = |y: f64| central_diff(g, y, h, n - 1);
            (inner(x + h) - inner(x - h)) / (2.0 * h)
        }
    }
}

/// Forward one-sided differences, first-order accurate (used only in the
/// shrinking neighborhood of 0 where the central stencil would cross the jump).
fn one_sided_diff(g: &dyn Fn(f64) -> f64, x: f64, h: f64, n: usize) -> f64 {
    let mut vals: Vec<f64> = (0..=n).map(|i| g(x + i as f64 * h)).collect();
    for _ in 0..n {
        for i in 0..vals.len() - 1 {
            vals[i] = vals[i + 1] - vals[i];
        }
        vals.pop();
    }
    vals[0] / h.powi(n as i32)
}

/// Outcome of the derivative-degree-decay check at one order.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayCheck {
    pub order: usize,
    pub omega_slope: Option<f64>,
    pub rho_slope: Option<f64>,
    /// deg(ω⁽ⁿ⁾) = deg(ω⁽ⁿ⁻¹⁾) − 1 within tolerance, or ω⁽ⁿ⁾ ≡ 0.
    pub omega_pass: bool,
    /// deg*(ρ⁽ⁿ⁾) ≤ deg*(ρ⁽ⁿ⁻¹⁾) − 1 within tolerance, or ρ⁽ⁿ⁾ ≡ 0.
    pub rho_pass: bool,
}

/// Report of the structural hypotheses on a symbol pair (ω, ρ): the degree
/// ordering deg*(ρ) ≤ deg(ω) and the per-order derivative degree decay.
/// Deterministic for a fixed pair and sampling plan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SymbolHypothesisReport {
    pub deg_rho_le_deg_omega: bool,
    pub derivative_degree_decay: Vec<DecayCheck>,
    pub smoothness_order_checked: usize,
    pub omega_value_slope: Option<f64>,
    pub rho_value_slope: Option<f64>,
}

impl SymbolHypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.deg_rho_le_deg_omega
            && self
                .derivative_degree_decay
                .iter()
                .all(|c| c.omega_pass && c.rho_pass)
    }
}

/// Log grid on [1e2, 1e4] used by all slope fits.
fn sample_grid() -> Vec<f64> {
    let n = 25;
    (0..n)
        .map(|i| 10f64.powf(2.0 + 2.0 * i as f64 / (n - 1) as f64))
        .collect()
}

/// Least-squares slope of log|γ⁽ⁿ⁾| vs log k; None when the derivative
/// vanishes on the sample grid.
fn degree_slope(sym: &DispersionSymbol, n: usize) -> Option<f64> {
    let ks = sample_grid();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let scale = |k: f64| (1.0 + k).powf(sym.degree() - n as f64);
    for &k in &ks {
        let v = sym.eval_derivative(k, n, false).ok()?;
        if v.abs() <= 1e-9 * scale(k).max(1e-300) {
            continue;
        }
        xs.push(k.ln());
        ys.push(v.abs().ln());
    }
    if xs.len() < ks.len() / 2 {
        return None; // effectively zero
    }
    Some(lsq_slope(&xs, &ys))
}

pub(crate) fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Verify the structural hypotheses on (ω, ρ): degree ordering via metadata
/// plus sampled slope fits, and the derivative degree decay order by order up
/// to m_ω. Failures are reported, never raised.
pub fn verify_hypotheses(
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
) -> SymbolHypothesisReport {
    let tol = 0.1;
    let m = omega.m_omega();

    let omega_value_slope = degree_slope(omega, 0);
    let rho_value_slope = degree_slope(rho, 0);

    let metadata_ok = rho.degree() <= omega.degree() + 1e-12;
    let sampled_ok = match rho_value_slope {
        Some(s) => s <= omega.degree() + tol,
        None => true, // ρ ≡ 0 trivially satisfies the bound
    };

    let mut decay = Vec::new();
    let mut prev_omega = omega_value_slope;
    let mut prev_rho = rho_value_slope;
    for n in 1..=m {
        let so = degree_slope(omega, n);
        let sr = degree_slope(rho, n);
        let omega_pass = match (prev_omega, so) {
            (Some(p), Some(s)) => (s - (p - 1.0)).abs() <= tol,
            (_, None) => true, // ω⁽ⁿ⁾ ≡ 0: chain ends
            (None, Some(_)) => false,
        };
        let rho_pass = match (prev_rho, sr) {
            (Some(p), Some(s)) => s <= p - 1.0 + tol,
            (_, None) => true,
            (None, Some(_)) => false,
        };
        decay.push(DecayCheck {
            order: n,
            omega_slope: so,
            rho_slope: sr,
            omega_pass,
            rho_pass,
        });
        if so.is_some() {
            prev_omega = so;
        }
        if sr.is_some() {
            prev_rho = sr;
        }
    }

    SymbolHypothesisReport {
        deg_rho_le_deg_omega: metadata_ok && sampled_ok,
        derivative_degree_decay: decay,
        smoothness_order_checked: m,
        omega_value_slope,
        rho_value_slope,
    }
}
