//! Fixed-step simulation driver with energy bookkeeping.

use std::sync::Arc;

use crate::coefficients::{LeslieCoefficients, ModelParams};
use crate::diagnostics::{energy_budget_residual, energy_record, EnergyRecord, ExtraNorm};
use crate::error::{Error, Result};
use crate::spectral::{Grid, Padding};

use super::{max_principle_monitor, DirectorInit, ForcingSpec, Scheme, SimState, Stepper, VelocityInit};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub dim: usize,
    pub n_modes: usize,
    pub length: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub padding: Padding,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<Grid>> {
        Grid::with_padding(self.dim, self.n_modes, self.length, self.padding)
    }
}

/// Time profile of the body force, with its spatial profile drawn from the
/// velocity generators.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ForcingConfig {
    #[default]
    Zero,
    Steady { profile: VelocityInit },
    Decaying { profile: VelocityInit, delta: f64 },
}

impl ForcingConfig {
    pub fn build(&self, grid: &Arc<Grid>) -> Result<ForcingSpec> {
        match self {
            ForcingConfig::Zero => Ok(ForcingSpec::zero()),
            ForcingConfig::Steady { profile } => ForcingSpec::steady(profile.build(grid)?),
            ForcingConfig::Decaying { profile, delta } => ForcingSpec::decaying(profile.build(grid)?, *delta),
        }
    }
}

/// Everything a run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub params: ModelParams,
    pub leslie: LeslieCoefficients,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Steps between energy records; the initial and final states are always
    /// recorded.
    pub record_every: usize,
    /// Steps between snapshots; 0 disables them.
    pub snapshot_every: usize,
    pub velocity_init: VelocityInit,
    pub director_init: DirectorInit,
    pub forcing: ForcingConfig,
    /// Relative tolerance of the maximum-principle monitor.
    pub tol_maxp: f64,
    pub blowup_threshold: f64,
    pub extra_norms: Vec<ExtraNorm>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.leslie.require_negative_lambda1()?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1".into());
        }
        if !(self.tol_maxp >= 0.0) {
            return bad(format!("tol_maxp must be >= 0, got {}", self.tol_maxp));
        }
        if !(self.blowup_threshold > 0.0) {
            return bad(format!("blowup_threshold must be > 0, got {}", self.blowup_threshold));
        }
        Ok(())
    }

    /// Number of steps, `round(t_end / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn initial_state(&self, grid: &Arc<Grid>) -> Result<SimState> {
        SimState::new(self.velocity_init.build(grid)?, self.director_init.build(grid)?, 0.0)
    }
}

/// Maximum principle bookkeeping; only an assertion when `lambda2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxPrincipleSummary {
    pub applicable: bool,
    /// `max |d0|`.
    pub bound: f64,
    /// Largest `max |d|` seen over all steps.
    pub max_seen: f64,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<EnergyRecord>,
    pub final_state: SimState,
    pub max_principle: MaxPrincipleSummary,
    pub max_cfl: f64,
    /// Steps whose CFL estimate exceeded 0.5.
    pub cfl_warnings: usize,
    pub steps: usize,
    pub max_divergence_residual: f64,
}

/// CFL estimate above which a step is counted as a warning.
pub const CFL_WARNING: f64 = 0.5;

/// Runs from the configured initial data. `on_snapshot` sees every
/// `snapshot_every`-th state, including the initial one.
pub fn run_simulation(
    config: &RunConfig,
    on_snapshot: &mut dyn FnMut(&SimState) -> Result<()>,
) -> Result<RunOutput> {
    config.validate()?;
    let grid = config.grid.build()?;
    let initial = config.initial_state(&grid)?;
    run_from(config, initial, on_snapshot)
}

/// Runs from an explicit initial state (grid settings of `config` are
/// ignored in favour of the state's grid).
pub fn run_from(
    config: &RunConfig,
    initial: SimState,
    on_snapshot: &mut dyn FnMut(&SimState) -> Result<()>,
) -> Result<RunOutput> {
    config.validate()?;
    let grid = initial.grid().clone();
    let forcing = config.forcing.build(&grid)?;
    let params: ModelParams = config.params;
    let leslie: LeslieCoefficients = config.leslie;
    let mut stepper = Stepper::new(&grid, params, leslie, forcing, config.dt, config.scheme)?
        .with_blowup_threshold(config.blowup_threshold);
    let n_steps = config.steps();

    let mut state = initial;
    let (mut terms, mut g) = stepper.evaluate(&state)?;
    let mut rec = energy_record(&state, &params, &leslie, &terms, g.as_ref(), &config.extra_norms)?;
    let bound = rec.max_abs_d;
    let mut max_seen = bound;
    let mut records = vec![rec.clone()];
    if config.snapshot_every > 0 {
        on_snapshot(&state)?;
    }

    let (mut max_cfl, mut cfl_warnings, mut max_div) = (0.0f64, 0usize, 0.0f64);
    let mut residual_integral = 0.0;
    let mut interval = 0.0;
    for n in 1..=n_steps {
        let (mut next, report) = stepper.advance(&state, &terms, g.as_ref())?;
        next.t = n as f64 * config.dt;
        max_cfl = max_cfl.max(report.cfl_estimate);
        if report.cfl_estimate > CFL_WARNING {
            cfl_warnings += 1;
        }
        max_div = max_div.max(report.divergence_residual);
        max_seen = max_seen.max(report.max_abs_d);

        let (t2, g2) = stepper.evaluate(&next)?;
        let mut next_rec = energy_record(&next, &params, &leslie, &t2, g2.as_ref(), &config.extra_norms)?;
        residual_integral += energy_budget_residual(&rec, &next_rec, config.dt, &leslie) * config.dt;
        interval += config.dt;
        if n % config.record_every == 0 || n == n_steps {
            next_rec.budget_residual = residual_integral / interval;
            residual_integral = 0.0;
            interval = 0.0;
            records.push(next_rec.clone());
        }
        if config.snapshot_every > 0 && n % config.snapshot_every == 0 {
            on_snapshot(&next)?;
        }
        state = next;
        terms = t2;
        g = g2;
        rec = next_rec;
    }

    let (ok, _) = max_principle_monitor(&state.d, bound, config.tol_maxp);
    let ok = ok && max_seen <= bound * (1.0 + config.tol_maxp);
    Ok(RunOutput {
        records,
        final_state: state,
        max_principle: MaxPrincipleSummary {
            applicable: leslie.lambda2() == 0.0,
            bound,
            max_seen,
            ok,
        },
        max_cfl,
        cfl_warnings,
        steps: n_steps,
        max_divergence_residual: max_div,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::coefficients::{Case, Preset};

    fn config() -> RunConfig {
        RunConfig {
            grid: GridSpec {
                dim: 2,
                n_modes: 16,
                length: 2.0 * PI,
                padding: Padding::ThreeHalves,
            },
            params: Preset::LerayEl.params(0.5, 1.0),
            leslie: LeslieCoefficients::new(0.2, -0.6, 0.4, 0.3, 0.1, Case::Parodi),
            dt: 1e-3,
            t_end: 0.05,
            scheme: Scheme::Imex1,
            record_every: 10,
            snapshot_every: 25,
            velocity_init: VelocityInit::RandomSolenoidal {
                amplitude: 0.5,
                spectrum_slope: -1.0,
                seed: 1,
            },
            director_init: DirectorInit::PerturbedConstant {
                vector: vec![1.0, 0.0],
                amplitude: 0.1,
                seed: 2,
            },
            forcing: ForcingConfig::Zero,
            tol_maxp: 1e-6,
            blowup_threshold: 1e6,
            extra_norms: vec![],
        }
    }

    #[test]
    fn records_snapshots_and_determinism() {
        let c = config();
        let mut snaps = Vec::new();
        let out = run_simulation(&c, &mut |s| {
            snaps.push(s.t);
            Ok(())
        })
        .unwrap();
        assert_eq!(out.steps, 50);
        let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 6);
        assert!((times[5] - 0.05).abs() < 1e-15);
        assert_eq!(snaps.len(), 3);
        assert!(out.max_divergence_residual <= 1e-12);
        for w in out.records.windows(2) {
            assert!(w[1].e_total <= w[0].e_total + 1e-6);
        }
        let again = run_simulation(&c, &mut |_| Ok(())).unwrap();
        assert_eq!(again.records, out.records);
    }

    #[test]
    fn resting_state_stays_at_rest() {
        let mut c = config();
        c.velocity_init = VelocityInit::Zero;
        c.director_init = DirectorInit::Constant { vector: vec![0.0, 1.0] };
        let out = run_simulation(&c, &mut |_| Ok(())).unwrap();
        assert_eq!(out.final_state.u.max_coeff(), 0.0);
        let d0 = c.director_init.build(&out.final_state.grid().clone()).unwrap();
        assert!((&out.final_state.d - &d0).max_coeff() < 1e-15);
        assert!(out.records.iter().all(|r| r.budget_residual < 1e-12));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = config();
        c.record_every = 0;
        assert!(run_simulation(&c, &mut |_| Ok(())).is_err());
        let mut c = config();
        c.leslie = LeslieCoefficients::new(0.0, 0.0, 0.0, 0.5, 0.5, Case::Parodi);
        assert!(matches!(
            run_simulation(&c, &mut |_| Ok(())),
            Err(Error::Lambda1NotNegative { .. })
        ));
    }
}
