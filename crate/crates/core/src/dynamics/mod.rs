//! Time integration of the coupled velocity/director system.
//!
//! The stiff linear parts (`A0 u` and `A1 d / |lambda1|`) are treated
//! implicitly and diagonally in Fourier space, everything else explicitly.

mod init;
mod run;

use std::sync::Arc;

pub use init::{DirectorInit, VelocityInit};
pub use run::{run_from, run_simulation, ForcingConfig, GridSpec, MaxPrincipleSummary, RunConfig, RunOutput, CFL_WARNING};

use crate::coefficients::{LeslieCoefficients, ModelParams};
use crate::error::{Error, Result};
use crate::operators::{coupled_terms, CoupledTerms};
use crate::spectral::{Grid, NormConvention, Rank, SpectralField};

/// Velocity `u`, director `d` and time.
#[derive(Clone, Debug)]
pub struct SimState {
    pub u: SpectralField,
    pub d: SpectralField,
    pub t: f64,
}

impl SimState {
    /// Checks ranks, grids and finiteness; projects and dealiases `u` and
    /// dealiases `d`.
    pub fn new(u: SpectralField, d: SpectralField, t: f64) -> Result<Self> {
        for f in [&u, &d] {
            if f.rank() != Rank::Vector {
                return Err(Error::WrongRank {
                    expected: Rank::Vector,
                    found: f.rank(),
                });
            }
        }
        if !Arc::ptr_eq(u.grid(), d.grid()) {
            return Err(Error::GridMismatch);
        }
        if !u.is_finite() {
            return Err(Error::NonFinite("velocity"));
        }
        if !d.is_finite() {
            return Err(Error::NonFinite("director"));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
        }
        Ok(SimState {
            u: u.leray_project()?.dealias(),
            d: d.dealias(),
            t,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }
}

/// Time profile of the body force.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForcingKind {
    Zero,
    Steady,
    /// `g0 (1 + t)^-(1 + delta / 2)`, `0 < delta < 1`.
    Decaying { delta: f64 },
}

/// Body force `g(t)`; the profile is stored projected and dealiased.
#[derive(Clone, Debug)]
pub struct ForcingSpec {
    kind: ForcingKind,
    profile: Option<SpectralField>,
}

impl ForcingSpec {
    pub fn zero() -> Self {
        ForcingSpec {
            kind: ForcingKind::Zero,
            profile: None,
        }
    }

    pub fn steady(profile: SpectralField) -> Result<Self> {
        Self::with_profile(ForcingKind::Steady, profile)
    }

    pub fn decaying(profile: SpectralField, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "decaying forcing needs 0 < delta < 1, got {delta}"
            )));
        }
        Self::with_profile(ForcingKind::Decaying { delta }, profile)
    }

    fn with_profile(kind: ForcingKind, profile: SpectralField) -> Result<Self> {
        if profile.rank() != Rank::Vector {
            return Err(Error::WrongRank {
                expected: Rank::Vector,
                found: profile.rank(),
            });
        }
        if !profile.is_finite() {
            return Err(Error::NonFinite("forcing profile"));
        }
        Ok(ForcingSpec {
            kind,
            profile: Some(profile.leray_project()?.dealias()),
        })
    }

    pub fn kind(&self) -> ForcingKind {
        self.kind
    }

    pub fn profile(&self) -> Option<&SpectralField> {
        self.profile.as_ref()
    }

    /// Scalar factor multiplying the profile at time `t`.
    pub fn amplitude(&self, t: f64) -> f64 {
        match self.kind {
            ForcingKind::Zero => 0.0,
            ForcingKind::Steady => 1.0,
            ForcingKind::Decaying { delta } => (1.0 + t).powf(-(1.0 + 0.5 * delta)),
        }
    }

    /// `g(t)`, or `None` when the force vanishes identically.
    pub fn eval(&self, t: f64) -> Option<SpectralField> {
        match (&self.kind, &self.profile) {
            (ForcingKind::Zero, _) | (_, None) => None,
            (_, Some(g0)) => Some(g0.scale(self.amplitude(t))),
        }
    }

    /// `g(t)` as a field on `grid` (zeros for the zero force).
    pub fn eval_on(&self, grid: &Arc<Grid>, t: f64) -> Result<SpectralField> {
        match self.eval(t) {
            Some(g) if Arc::ptr_eq(g.grid(), grid) => Ok(g),
            Some(_) => Err(Error::GridMismatch),
            None => Ok(SpectralField::zeros(grid, Rank::Vector)),
        }
    }

    /// `int_t^inf ||g(s)||^2_{-theta-theta2} ds`; infinite for a nonzero
    /// steady force.
    pub fn tail_integral(&self, t: f64, params: &ModelParams) -> Result<f64> {
        let g0 = match (&self.kind, &self.profile) {
            (ForcingKind::Zero, _) | (_, None) => return Ok(0.0),
            (_, Some(g0)) => g0,
        };
        let n2 = g0
            .sobolev_norm(-params.theta - params.theta2, NormConvention::Velocity)?
            .powi(2);
        Ok(match self.kind {
            ForcingKind::Zero => 0.0,
            ForcingKind::Steady if n2 == 0.0 => 0.0,
            ForcingKind::Steady => f64::INFINITY,
            ForcingKind::Decaying { delta } => n2 * (1.0 + t).powf(-(1.0 + delta)) / (1.0 + delta),
        })
    }
}

/// `P[-B0(u, u) + R0(rho, d) + div sigma_Q + g(t)]`, without `-A0 u`.
pub fn rhs_velocity(
    state: &SimState,
    params: &ModelParams,
    leslie: &LeslieCoefficients,
    forcing: &ForcingSpec,
) -> Result<SpectralField> {
    let terms = coupled_terms(&state.u, &state.d, params, leslie)?;
    let g = forcing.eval_on(state.grid(), state.t)?;
    Ok(&terms.velocity + &g)
}

/// `-B1(u, d) + omega_Q d - (lambda2 / lambda1) A_Q d + f(d) / lambda1`,
/// without the implicit `A1 d / lambda1`.
pub fn rhs_director(state: &SimState, params: &ModelParams, leslie: &LeslieCoefficients) -> Result<SpectralField> {
    Ok(coupled_terms(&state.u, &state.d, params, leslie)?.director)
}

/// Time discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    /// First-order IMEX Euler.
    #[default]
    Imex1,
    /// Crank-Nicolson for the stiff part, second-order Adams-Bashforth for
    /// the rest; the first step falls back to IMEX Euler.
    Cnab2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub dt_used: f64,
    /// `max |d|` on the base grid after the step.
    pub max_abs_d: f64,
    /// `max |v| dt N / L` at the start of the step.
    pub cfl_estimate: f64,
    /// `||div u||_0` after the step.
    pub divergence_residual: f64,
}

/// Result of one step. `terms` and `forcing` were evaluated at the old state
/// and are reused for energy bookkeeping.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: SimState,
    pub report: StepReport,
    pub terms: CoupledTerms,
    pub forcing: Option<SpectralField>,
}

/// Advances states with a fixed time step.
#[derive(Clone, Debug)]
pub struct Stepper {
    params: ModelParams,
    leslie: LeslieCoefficients,
    forcing: ForcingSpec,
    dt: f64,
    scheme: Scheme,
    blowup_threshold: f64,
    a0: Vec<f64>,
    a1: Vec<f64>,
    /// Previous explicit terms, for Adams-Bashforth.
    history: Option<(SpectralField, SpectralField)>,
    steps: usize,
}

impl Stepper {
    pub fn new(
        grid: &Grid,
        params: ModelParams,
        leslie: LeslieCoefficients,
        forcing: ForcingSpec,
        dt: f64,
        scheme: Scheme,
    ) -> Result<Self> {
        params.validate()?;
        let l1 = leslie.require_negative_lambda1()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let a0_sym = params.a0_symbol();
        let a0 = grid.k2().iter().map(|&k2| a0_sym.eval(k2)).collect();
        let a1 = grid.k2().iter().map(|&k2| k2 / l1.abs()).collect();
        Ok(Stepper {
            params,
            leslie,
            forcing,
            dt,
            scheme,
            blowup_threshold: f64::INFINITY,
            a0,
            a1,
            history: None,
            steps: 0,
        })
    }

    /// Aborts once any `|u|` or `|d|` grid value exceeds `threshold`.
    pub fn with_blowup_threshold(mut self, threshold: f64) -> Self {
        self.blowup_threshold = threshold;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn leslie(&self) -> &LeslieCoefficients {
        &self.leslie
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    /// Explicit terms and forcing at `state`.
    pub fn evaluate(&self, state: &SimState) -> Result<(CoupledTerms, Option<SpectralField>)> {
        let terms = coupled_terms(&state.u, &state.d, &self.params, &self.leslie)?;
        Ok((terms, self.forcing.eval(state.t)))
    }

    pub fn step(&mut self, state: &SimState) -> Result<StepOutput> {
        let (terms, g) = self.evaluate(state)?;
        let (state, report) = self.advance(state, &terms, g.as_ref())?;
        Ok(StepOutput {
            state,
            report,
            terms,
            forcing: g,
        })
    }

    /// One step from explicit terms already evaluated at `state`.
    pub fn advance(
        &mut self,
        state: &SimState,
        terms: &CoupledTerms,
        g: Option<&SpectralField>,
    ) -> Result<(SimState, StepReport)> {
        let dt = self.dt;
        let nu = match g {
            Some(g) => &terms.velocity + g,
            None => terms.velocity.clone(),
        };
        let nd = terms.director.clone();

        let (u_new, d_new) = match (self.scheme, self.history.take()) {
            (Scheme::Cnab2, Some((nu_prev, nd_prev))) => {
                let cn = |sym: &[f64]| -> (Vec<f64>, Vec<f64>) {
                    (
                        sym.iter().map(|&a| 1.0 - 0.5 * dt * a).collect(),
                        sym.iter().map(|&a| 1.0 / (1.0 + 0.5 * dt * a)).collect(),
                    )
                };
                let (eu, iu) = cn(&self.a0);
                let (ed, id) = cn(&self.a1);
                let ab_u = nu.scale(1.5).axpy(-0.5, &nu_prev);
                let ab_d = nd.scale(1.5).axpy(-0.5, &nd_prev);
                (
                    state.u.scale_modes(&eu).axpy(dt, &ab_u).scale_modes(&iu),
                    state.d.scale_modes(&ed).axpy(dt, &ab_d).scale_modes(&id),
                )
            }
            _ => {
                let iu: Vec<f64> = self.a0.iter().map(|&a| 1.0 / (1.0 + dt * a)).collect();
                let id: Vec<f64> = self.a1.iter().map(|&a| 1.0 / (1.0 + dt * a)).collect();
                (
                    state.u.axpy(dt, &nu).scale_modes(&iu),
                    state.d.axpy(dt, &nd).scale_modes(&id),
                )
            }
        };
        if self.scheme == Scheme::Cnab2 {
            self.history = Some((nu, nd));
        }
        self.steps += 1;

        let t = state.t + dt;
        let blowup = |reason: String| Error::BlowUp {
            t,
            step: self.steps,
            reason,
        };
        if !u_new.is_finite() || !d_new.is_finite() {
            return Err(blowup("non-finite coefficients".into()));
        }
        let u = u_new.leray_project()?.dealias();
        let d = d_new.dealias();
        let max_abs_d = d.max_abs();
        let max_abs_u = u.max_abs();
        if max_abs_d > self.blowup_threshold || max_abs_u > self.blowup_threshold {
            return Err(blowup(format!(
                "max |u| = {max_abs_u:e}, max |d| = {max_abs_d:e} above threshold {:e}",
                self.blowup_threshold
            )));
        }
        let grid = u.grid();
        let report = StepReport {
            dt_used: dt,
            max_abs_d,
            cfl_estimate: terms.max_abs_v * dt * grid.n_modes() as f64 / grid.length(),
            divergence_residual: u.divergence()?.l2_norm(),
        };
        Ok((SimState { u, d, t }, report))
    }
}

/// Largest `|d|` over the base grid and whether it stays within
/// `bound (1 + tol)`.
pub fn max_principle_monitor(d: &SpectralField, bound: f64, tol: f64) -> (bool, f64) {
    let m = d.max_abs();
    (m <= bound * (1.0 + tol), m)
}
