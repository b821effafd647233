//! Equilibria `A1 d + f(d) = 0` by gradient flow.
//!
//! The flow `d_tau = -(A1 d + f(d))` is advanced by Strang splitting with the
//! exact heat factor and the exact pointwise solution of the reaction
//! `r' = -(r^2 - 1) r`, which keeps spatially constant data on the ODE
//! trajectory to round-off. The splitting's fixed points are only
//! `O(dtau^2)` accurate for non-constant equilibria, so once the residual
//! stagnates the iteration switches to semi-implicit Euler, whose fixed
//! points are exact.

use crate::error::{Error, Result};
use crate::operators::ginzburg_landau_force;
use crate::spectral::{Rank, SpectralField};

use super::energy::equilibrium_residual;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Pseudo-time step.
    pub dtau: f64,
    /// Iterations without halving the best residual before switching to the
    /// semi-implicit polish.
    pub stagnation_window: usize,
}

impl SteadyOptions {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        SteadyOptions {
            tol,
            max_iters,
            dtau: 0.1,
            stagnation_window: 200,
        }
    }
}

/// Solver output with its residual certificate.
#[derive(Clone, Debug)]
pub struct SteadyResult {
    /// Best iterate found.
    pub d: SpectralField,
    /// `||A1 d + f(d)||_L2` of `d`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn steady_state_solve(d0: &SpectralField, tol: f64, max_iters: usize) -> Result<SteadyResult> {
    steady_state_solve_with(d0, &SteadyOptions::new(tol, max_iters))
}

pub fn steady_state_solve_with(d0: &SpectralField, opts: &SteadyOptions) -> Result<SteadyResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    if !(opts.dtau > 0.0 && opts.dtau.is_finite()) {
        return Err(Error::InvalidParameter(format!("dtau must be > 0, got {}", opts.dtau)));
    }
    if d0.rank() != Rank::Vector {
        return Err(Error::WrongRank {
            expected: Rank::Vector,
            found: d0.rank(),
        });
    }
    let mut d = d0.dealias();
    let mut residual = equilibrium_residual(&d)?;
    let mut best = (d.clone(), residual);
    let mut last_halving = (0usize, residual);
    let mut polishing = false;
    let mut iterations = 0;
    while residual > opts.tol && iterations < opts.max_iters {
        d = if polishing {
            semi_implicit_step(&d, opts.dtau)?
        } else {
            gradient_flow_step(&d, opts.dtau)
        };
        iterations += 1;
        if !d.is_finite() {
            return Err(Error::NonFinite("steady iterate"));
        }
        residual = equilibrium_residual(&d)?;
        if residual < best.1 {
            best = (d.clone(), residual);
        }
        if residual <= 0.5 * last_halving.1 {
            last_halving = (iterations, residual);
        } else if !polishing && iterations - last_halving.0 >= opts.stagnation_window {
            polishing = true;
            last_halving = (iterations, residual);
        }
    }
    let (d, residual) = best;
    Ok(SteadyResult {
        converged: residual <= opts.tol,
        d,
        residual,
        iterations,
    })
}

/// One Strang step `R(dtau / 2) H(dtau) R(dtau / 2)` of the gradient flow.
pub fn gradient_flow_step(d: &SpectralField, dtau: f64) -> SpectralField {
    let half = react(d, 0.5 * dtau);
    let heat: Vec<f64> = d.grid().k2().iter().map(|&k2| (-dtau * k2).exp()).collect();
    react(&half.scale_modes(&heat), 0.5 * dtau)
}

/// Exact reaction flow over `tau` at every base grid point:
/// `d / sqrt(s + (1 - s) exp(-2 tau))` with `s = |d|^2`.
fn react(d: &SpectralField, tau: f64) -> SpectralField {
    let grid = d.grid();
    let n = grid.mode_count();
    let dim = grid.dim();
    let mut vals = d.to_physical();
    let decay = (-2.0 * tau).exp();
    for p in 0..n {
        let s: f64 = (0..dim).map(|c| vals[c * n + p].powi(2)).sum();
        let scale = 1.0 / (s + (1.0 - s) * decay).sqrt();
        for c in 0..dim {
            vals[c * n + p] *= scale;
        }
    }
    SpectralField::from_physical(grid, Rank::Vector, &vals)
        .expect("sizes match the grid")
        .dealias()
}

/// `d <- (d - dtau f(d)) / (1 + dtau |k|^2)`; fixed points solve
/// `A1 d + f(d) = 0` exactly.
fn semi_implicit_step(d: &SpectralField, dtau: f64) -> Result<SpectralField> {
    let (f, _) = ginzburg_landau_force(d)?;
    let inv: Vec<f64> = d.grid().k2().iter().map(|&k2| 1.0 / (1.0 + dtau * k2)).collect();
    Ok(d.axpy(-dtau, &f).scale_modes(&inv))
}
