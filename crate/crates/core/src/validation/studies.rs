//! Scenario pipeline: residual-scaling studies over ε sweeps, full
//! error-vs-approximation runs against the integrated system, and the
//! convergence study reproducing the main error estimate's exponent.

use std::time::Instant;

use serde::Serialize;

use crate::analysis::{nls_coefficients, NlsCoefficients};
use crate::approximation::{
    solve_nls_sampled, ApproximationOrder, EnvelopeState, InitialEnvelope, PacketAssembler,
};
use crate::solver::{simulate, IntegratorConfig, SystemState};
use crate::spectral::{SpectralGrid, SpectralField};
use crate::symbols::DispersionSymbol;
use crate::validation::residual::residual_norms;
use crate::{Error, Result};

/// Everything defining one physical setup apart from ε.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub omega: DispersionSymbol,
    pub rho: DispersionSymbol,
    pub k0: f64,
    /// Slow horizon T₀; fast runs cover [0, T₀/ε²].
    pub t0: f64,
    /// Sobolev index of the reported error norms.
    pub s: f64,
    pub envelope: InitialEnvelope,
    pub order: ApproximationOrder,
    pub oversample: f64,
    pub dt_system: f64,
    pub dt_nls: f64,
    pub n_time_samples: usize,
    /// Carrier-window half-width for packet assembly (None: k₀/2).
    pub window: Option<f64>,
    pub max_points: Option<usize>,
    /// Shrink dt until the one-step Richardson error estimate is below
    /// 1e-8 on a trial step.
    pub auto_dt: bool,
}

impl Scenario {
    pub fn new(omega: DispersionSymbol, rho: DispersionSymbol, k0: f64) -> Self {
        Self {
            omega,
            rho,
            k0,
            t0: 0.5,
            s: 4.0,
            envelope: InitialEnvelope::Soliton { amplitude: 1.0 },
            order: ApproximationOrder::Corrected,
            oversample: 4.0,
            dt_system: 5e-3,
            dt_nls: 1e-3,
            n_time_samples: 50,
            window: None,
            max_points: None,
            auto_dt: true,
        }
    }
}

pub(crate) struct EpsSetup {
    pub grid: SpectralGrid,
    pub coeffs: NlsCoefficients,
    pub assembler: PacketAssembler,
    pub a0: EnvelopeState,
}

pub(crate) fn setup_eps(sc: &Scenario, eps: f64) -> Result<EpsSetup> {
    let coeffs = nls_coefficients(&sc.omega, &sc.rho, sc.k0)?;
    let width = sc.envelope.width(&coeffs)?;
    let grid = SpectralGrid::make_grid(
        sc.k0,
        eps,
        width,
        sc.envelope.shape(),
        sc.oversample,
        sc.max_points,
    )?;
    let assembler = PacketAssembler::new(&grid, &sc.omega, &sc.rho, coeffs, eps, sc.window)?;
    let a0 = sc.envelope.build(&grid, eps, &coeffs)?;
    Ok(EpsSetup {
        grid,
        coeffs,
        assembler,
        a0,
    })
}

fn assemble(
    asm: &PacketAssembler,
    order: ApproximationOrder,
    a: &EnvelopeState,
    t: f64,
) -> Result<crate::approximation::Approximation> {
    match order {
        ApproximationOrder::Leading => asm.leading(a, t),
        ApproximationOrder::Corrected => asm.corrected(a, t),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

/// Least-squares fit of log y against log x. Returns (slope, r²).
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least two points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return Err(Error::DegenerateFit("nonpositive values in fit".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit) * (y - fit)
        })
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, r2))
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualScaling {
    pub order: ApproximationOrder,
    pub s: f64,
    /// (ε, sup over the sampled horizon of ‖Res₋‖_{H^s} + ‖Res₊‖_{H^s}).
    pub points: Vec<(f64, f64)>,
    pub fitted_slope: f64,
    pub fit_r2: f64,
}

/// Fitted residual exponent of an approximation recipe over an ε sweep.
/// The residual is evaluated spectrally with the analytic envelope time
/// derivative at ≥ 20 samples of [0, T₀/ε²].
pub fn residual_scaling_study(
    sc: &Scenario,
    eps_list: &[f64],
    order: ApproximationOrder,
) -> Result<ResidualScaling> {
    if eps_list.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "residual scaling needs ≥ 3 ε values, got {}",
            eps_list.len()
        )));
    }
    let n_samples = sc.n_time_samples.max(20);
    let mut points = Vec::new();
    for &eps in eps_list {
        let run = setup_eps(sc, eps)?;
        let times = linspace(0.0, sc.t0 / (eps * eps), n_samples);
        let slow: Vec<f64> = times.iter().map(|t| eps * eps * t).collect();
        let traj = solve_nls_sampled(&run.a0, &run.coeffs, &slow, sc.dt_nls)?;
        let mut sup = 0.0f64;
        for (a, &t) in traj.iter().zip(&times) {
            let ap = assemble(&run.assembler, order, a, t)?;
            let (rm, rp) = residual_norms(&ap, &sc.omega, &sc.rho, sc.s)?;
            sup = sup.max(rm + rp);
        }
        points.push((eps, sup));
    }
    let (fitted_slope, fit_r2) = fit_power_law(&points)?;
    Ok(ResidualScaling {
        order,
        s: sc.s,
        points,
        fitted_slope,
        fit_r2,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSeries {
    pub eps: f64,
    pub s: f64,
    pub times: Vec<f64>,
    /// ‖u - εψ_NLS‖_{H^s} with u = u₋₁ + u₁ (the statement's u-component).
    pub err_u: Vec<f64>,
    /// ‖u₋₁ - εψ_NLS‖_{H^s} + ‖u₁‖_{H^s} (diagonalized pair, auxiliary).
    pub err_pair: Vec<f64>,
    /// max |u| over the outer 1% of the domain per sample.
    pub boundary: Vec<f64>,
    pub sup_err_u: f64,
    pub sup_err_pair: f64,
    pub grid_points: usize,
}

/// Integrate the full system from u(0) = εΨ(·, 0) (so R(0) = 0) and record
/// the error against εψ_NLS on a uniform schedule over [0, T₀/ε²].
pub fn error_vs_approximation(sc: &Scenario, eps: f64) -> Result<ErrorSeries> {
    let run = setup_eps(sc, eps)?;
    let n_samples = sc.n_time_samples.max(50);
    let times = linspace(0.0, sc.t0 / (eps * eps), n_samples);
    let slow: Vec<f64> = times.iter().map(|t| eps * eps * t).collect();
    let traj = solve_nls_sampled(&run.a0, &run.coeffs, &slow, sc.dt_nls)?;

    let ap0 = assemble(&run.assembler, sc.order, &traj[0], 0.0)?;
    let init = SystemState::new(ap0.pair.clone(), 0.0);

    let mut cfg = IntegratorConfig {
        dt: sc.dt_system,
        ..Default::default()
    };
    if sc.auto_dt {
        cfg.dt = tune_dt(&init, cfg.dt, &sc.omega, &sc.rho)?;
    }

    let mut err_u = Vec::with_capacity(n_samples);
    let mut err_pair = Vec::with_capacity(n_samples);
    let mut boundary = Vec::with_capacity(n_samples);
    let mut idx = 0usize;
    simulate(&init, &times, &cfg, &sc.omega, &sc.rho, |state| {
        let a = &traj[idx];
        let nls = run.assembler.eps_psi_nls(a, state.t)?;
        let u_field = state.pair.sum();
        err_u.push((&u_field - &nls).sobolev_norm(sc.s)?);
        err_pair.push(
            (&state.pair.minus - &nls).sobolev_norm(sc.s)?
                + state.pair.plus.sobolev_norm(sc.s)?,
        );
        boundary.push(boundary_magnitude(&u_field));
        idx += 1;
        Ok(())
    })?;

    let sup_err_u = err_u.iter().cloned().fold(0.0, f64::max);
    let sup_err_pair = err_pair.iter().cloned().fold(0.0, f64::max);
    Ok(ErrorSeries {
        eps,
        s: sc.s,
        times,
        err_u,
        err_pair,
        boundary,
        sup_err_u,
        sup_err_pair,
        grid_points: run.grid.n_points(),
    })
}

/// Max |u| over the outermost 1% of grid points on each side — the periodic
/// truncation monitor.
fn boundary_magnitude(u: &SpectralField) -> f64 {
    let phys = u.to_physical_real();
    let n = phys.len();
    let margin = (n / 100).max(1);
    phys[..margin]
        .iter()
        .chain(&phys[n - margin..])
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// One-step Richardson estimate of the nonlinear-stage local error; dt is
/// halved (at most four times) until the estimate is below 1e-8.
fn tune_dt(
    init: &SystemState,
    dt0: f64,
    omega: &DispersionSymbol,
    rho: &DispersionSymbol,
) -> Result<f64> {
    let grid = init.grid().clone();
    let mut dt = dt0;
    for _ in 0..4 {
        let coarse = {
            let st = crate::solver::Stepper::new(&grid, omega, rho, dt, true);
            let mut s = init.clone();
            st.step(&mut s);
            s
        };
        let fine = {
            let st = crate::solver::Stepper::new(&grid, omega, rho, dt / 2.0, true);
            let mut s = init.clone();
            st.step(&mut s);
            st.step(&mut s);
            s
        };
        let est = ((&coarse.pair.minus - &fine.pair.minus).sobolev_norm(0.0)?
            + (&coarse.pair.plus - &fine.pair.plus).sobolev_norm(0.0)?)
            * (16.0 / 15.0);
        if est < 1e-8 {
            return Ok(dt);
        }
        dt *= 0.5;
    }
    Ok(dt)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergencePoint {
    pub eps: f64,
    pub sup_error: f64,
    pub sup_error_pair: f64,
    pub boundary_max: f64,
    pub grid_points: usize,
    pub n_time_samples: usize,
    /// Wall-clock seconds for this ε member; reported separately from the
    /// JSON summary so identical configs produce identical summaries.
    #[serde(skip_serializing)]
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub s: f64,
    pub t0: f64,
    pub points: Vec<ConvergencePoint>,
    pub fitted_slope: f64,
    pub fit_r2: f64,
}

/// Run `error_vs_approximation` for every ε (members fan out across
/// threads) and fit sup-error against ε on a log-log scale.
pub fn convergence_study(sc: &Scenario, eps_list: &[f64]) -> Result<ConvergenceReport> {
    if eps_list.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "convergence study needs ≥ 2 ε values, got {}",
            eps_list.len()
        )));
    }
    let results: Vec<Result<ConvergencePoint>> = std::thread::scope(|scope| {
        let handles: Vec<_> = eps_list
            .iter()
            .map(|&eps| {
                let sc = sc.clone();
                scope.spawn(move || -> Result<ConvergencePoint> {
                    let start = Instant::now();
                    let series = error_vs_approximation(&sc, eps)?;
                    Ok(ConvergencePoint {
                        eps,
                        sup_error: series.sup_err_u,
                        sup_error_pair: series.sup_err_pair,
                        boundary_max: series.boundary.iter().cloned().fold(0.0, f64::max),
                        grid_points: series.grid_points,
                        n_time_samples: series.times.len(),
                        runtime_seconds: start.elapsed().as_secs_f64(),
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut points = Vec::with_capacity(results.len());
    for (r, &eps) in results.into_iter().zip(eps_list) {
        match r {
            Ok(p) => points.push(p),
            Err(e) => {
                return Err(Error::StudyMember {
                    eps,
                    source: Box::new(e),
                })
            }
        }
    }
    let fit_points: Vec<(f64, f64)> = points.iter().map(|p| (p.eps, p.sup_error)).collect();
    let (fitted_slope, fit_r2) = fit_power_law(&fit_points)?;
    Ok(ConvergenceReport {
        s: sc.s,
        t0: sc.t0,
        points,
        fitted_slope,
        fit_r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn synthetic_power_law_exact() {
        let pts: Vec<(f64, f64)> = [0.3, 0.2, 0.1, 0.05]
            .iter()
            .map(|&e| (e, 2.7 * e * e * e))
            .collect();
        let (slope, r2) = fit_power_law(&pts).unwrap();
        assert_abs_diff_eq!(slope, 3.0, epsilon = 1e-10);
        assert_relative_eq!(r2, 1.0, max_relative = 1e-12);

        let pts: Vec<(f64, f64)> = [0.3, 0.2, 0.14, 0.1]
            .iter()
            .map(|&e| (e, 0.9 * e.powf(1.5)))
            .collect();
        let (slope, _) = fit_power_law(&pts).unwrap();
        assert_abs_diff_eq!(slope, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_fits_rejected() {
        assert!(fit_power_law(&[(0.1, 1.0)]).is_err());
        assert!(fit_power_law(&[(0.1, 1.0), (0.1, 2.0)]).is_err());
        assert!(fit_power_law(&[(0.1, 0.0), (0.2, 1.0)]).is_err());
    }

    #[test]
    fn residual_study_rejects_short_sweeps() {
        let beam = DispersionSymbol::beam();
        let sc = Scenario::new(beam.clone(), beam, 1.0);
        assert!(matches!(
            residual_scaling_study(&sc, &[0.1, 0.05], ApproximationOrder::Leading),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn convergence_study_rejects_single_eps() {
        let beam = DispersionSymbol::beam();
        let sc = Scenario::new(beam.clone(), beam, 1.0);
        assert!(convergence_study(&sc, &[0.1]).is_err());
    }

    /// Identical trajectories give identically zero error: feed the
    /// assembled approximation itself as the "solution".
    #[test]
    fn identical_trajectories_zero_error() {
        let beam = DispersionSymbol::beam();
        let sc = Scenario::new(beam.clone(), beam.clone(), 1.0);
        let eps = 0.2;
        let run = setup_eps(&sc, eps).unwrap();
        let ap = run.assembler.leading(&run.a0, 0.0).unwrap();
        let nls = run.assembler.eps_psi_nls(&run.a0, 0.0).unwrap();
        let diff = (&ap.pair.minus.clone() - &ap.pair.minus).sobolev_norm(4.0).unwrap();
        assert_eq!(diff, 0.0);
        // at t = 0 the u-error against εψ_NLS is only the window tail
        let err0 = (&ap.pair.sum() - &nls).sobolev_norm(4.0).unwrap();
        let scale = nls.sobolev_norm(4.0).unwrap();
        assert!(err0 < 1e-2 * scale, "window tail {}", err0 / scale);
    }

    /// Leading-order residual sup over the horizon, small sweep; the fitted
    /// slope reflects the ε^{3/2}-type scaling of the uncancelled ε²
    /// quadratic forcing under the slow-scale L² factor.
    #[test]
    fn leading_residual_scaling() {
        let beam = DispersionSymbol::beam();
        let mut sc = Scenario::new(beam.clone(), beam, 1.0);
        sc.n_time_samples = 20;
        let study =
            residual_scaling_study(&sc, &[0.2, 0.1, 0.05], ApproximationOrder::Leading).unwrap();
        assert!(
            study.fitted_slope > 1.3,
            "leading slope {}",
            study.fitted_slope
        );
        assert!(study.fit_r2 > 0.98, "r² {}", study.fit_r2);
    }
}
