//! Long-time behaviour: decay-rate fits, the Lyapunov functional `Phi` and
//! the absorbing-ball check.

use crate::coefficients::{coercivity_constants, q_operator_norm, ModelParams};
use crate::dynamics::ForcingSpec;
use crate::error::{Error, Result};
use crate::spectral::{Grid, NormConvention, SpectralField};

use super::energy::{equilibrium_residual, EnergyRecord};

/// Least-squares fit `value ~ prefactor (1 + t)^-exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual_rms: f64,
    pub samples: usize,
}

/// Fits `log v = log c - chi log(1 + t)`; `None` with fewer than two usable
/// (positive, finite) samples or a degenerate time axis.
pub fn fit_decay_exponent(times: &[f64], values: &[f64]) -> Option<PowerLawFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| t.is_finite() && **t > -1.0 && v.is_finite() && **v > 0.0)
        .map(|(t, v)| ((1.0 + t).ln(), v.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(PowerLawFit {
        exponent: -slope,
        prefactor: intercept.exp(),
        residual_rms: (ss / n as f64).sqrt(),
        samples: n,
    })
}

/// `Phi(t) = E(t) + (2 ||Q||^2 / c) int_t^inf ||g||^2_{-theta-theta2}`, with
/// `c` the coercivity constant of `A0 Q`.
pub fn phi(record: &EnergyRecord, forcing: &ForcingSpec, params: &ModelParams, grid: &Grid) -> Result<f64> {
    let tail = forcing.tail_integral(record.t, params)?;
    if tail == 0.0 {
        return Ok(record.e_total);
    }
    let c = coercivity_constants(params, grid).c_a0q;
    let q = q_operator_norm(params, grid);
    Ok(record.e_total + 2.0 * q * q / c * tail)
}

/// One saved point of a trajectory.
#[derive(Clone, Debug)]
pub struct TrajectorySample {
    pub record: EnergyRecord,
    pub d: SpectralField,
    pub u: SpectralField,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceOptions {
    /// Fraction of the samples (taken from the end) used for the fit.
    pub fit_fraction: f64,
    /// The transient ends once `e_total` is below this multiple of its tail
    /// mean.
    pub transient_factor: f64,
    /// Absolute slack added to every `Phi` increment check.
    pub phi_slack: f64,
    /// Bound on `max |d|` for the strong-mode report.
    pub max_d_bound: f64,
    /// Samples needed past the transient for a fit.
    pub min_samples: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            fit_fraction: 0.5,
            transient_factor: 1.1,
            phi_slack: 1e-12,
            max_d_bound: 10.0,
            min_samples: 20,
        }
    }
}

/// Terminal distances reported when `theta + theta2 >= 1` and `|d|` stayed
/// bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongReport {
    pub u_norm: f64,
    pub d_h1_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Fit of `||d(t) - d*||_L2`; `None` when too few samples decay.
    pub fit: Option<PowerLawFit>,
    pub transient_end: f64,
    pub terminal_u_norm: f64,
    pub terminal_equilibrium_residual: f64,
    pub terminal_d_distance: f64,
    pub phi_nonincreasing: bool,
    /// Largest `Phi(t_{n+1}) - Phi(t_n) - tolerance_n`.
    pub phi_max_excess: f64,
    pub strong: Option<StrongReport>,
}

/// Analyses a trajectory against the equilibrium `target`.
///
/// `phi_values[i]` is `Phi` at sample `i`; the allowed increase between
/// samples is the recorded budget residual of the later sample times the
/// interval plus `phi_slack`.
pub fn convergence_monitor(
    samples: &[TrajectorySample],
    phi_values: &[f64],
    target: &SpectralField,
    params: &ModelParams,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceReport> {
    let last = samples
        .last()
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    if phi_values.len() != samples.len() {
        return Err(Error::SizeMismatch {
            expected: samples.len(),
            found: phi_values.len(),
        });
    }

    let mut phi_max_excess = f64::NEG_INFINITY;
    for (w, p) in samples.windows(2).zip(phi_values.windows(2)) {
        let dt = w[1].record.t - w[0].record.t;
        let allowed = w[1].record.budget_residual * dt + opts.phi_slack;
        phi_max_excess = phi_max_excess.max(p[1] - p[0] - allowed);
    }
    if samples.len() < 2 {
        phi_max_excess = 0.0;
    }

    let tail_start = ((1.0 - opts.fit_fraction) * samples.len() as f64).floor() as usize;
    let tail = &samples[tail_start.min(samples.len() - 1)..];
    let tail_mean = tail.iter().map(|s| s.record.e_total).sum::<f64>() / tail.len() as f64;
    let transient_idx = samples
        .iter()
        .position(|s| s.record.e_total <= opts.transient_factor * tail_mean)
        .unwrap_or(samples.len() - 1);
    let fit_start = transient_idx.max(tail_start).min(samples.len() - 1);

    let mut times = Vec::new();
    let mut dist = Vec::new();
    for s in &samples[fit_start..] {
        times.push(s.record.t);
        dist.push((&s.d - target).l2_norm());
    }
    let fit = if times.len() >= opts.min_samples {
        fit_decay_exponent(&times, &dist)
    } else {
        None
    };

    let terminal_u_norm = last.u.sobolev_norm(-params.theta2, NormConvention::Velocity)?;
    let bounded = samples.iter().all(|s| s.record.max_abs_d <= opts.max_d_bound);
    let strong = if params.theta + params.theta2 >= 1.0 && bounded {
        Some(StrongReport {
            u_norm: terminal_u_norm,
            d_h1_distance: (&last.d - target).sobolev_norm(1.0, NormConvention::Director)?,
        })
    } else {
        None
    };

    Ok(ConvergenceReport {
        fit,
        transient_end: samples[transient_idx].record.t,
        terminal_u_norm,
        terminal_equilibrium_residual: equilibrium_residual(&last.d)?,
        terminal_d_distance: *dist.last().unwrap_or(&0.0),
        phi_nonincreasing: phi_max_excess <= 0.0,
        phi_max_excess,
        strong,
    })
}

/// Outcome of the absorbing-ball check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub bounded: bool,
    /// `1.5 x` the maximum over the window.
    pub radius: f64,
    /// First time after which the series stays within `radius`.
    pub entrance_time: Option<f64>,
}

/// Largest growth between the two halves of the window that still counts as
/// bounded.
const GROWTH_LIMIT: f64 = 1.25;

/// Checks that `values` enter the ball of radius `1.5 max(window)` and stay
/// there, where the window is the last `window_fraction` of the samples, and
/// that the window itself does not keep growing.
pub fn dissipative_bound_check(times: &[f64], values: &[f64], window_fraction: f64) -> BoundCheck {
    let n = times.len().min(values.len());
    let fail = BoundCheck {
        bounded: false,
        radius: f64::INFINITY,
        entrance_time: None,
    };
    if n == 0 || values[..n].iter().any(|v| !v.is_finite()) {
        return fail;
    }
    let start = (((1.0 - window_fraction.clamp(0.0, 1.0)) * n as f64).floor() as usize).min(n - 1);
    let window = &values[start..n];
    let max_of = |s: &[f64]| s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let radius = 1.5 * max_of(window);
    let entrance = (0..n).rev().take_while(|&i| values[i] <= radius).last();
    let mid = window.len() / 2;
    let growing = mid > 0 && max_of(&window[mid..]) > GROWTH_LIMIT * max_of(&window[..mid]).max(0.0);
    BoundCheck {
        bounded: entrance.is_some() && !growing,
        radius,
        entrance_time: entrance.map(|i| times[i]),
    }
}
