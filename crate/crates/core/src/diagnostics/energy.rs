//! Energy, dissipation and budget bookkeeping.

use crate::coefficients::{Case, LeslieCoefficients, ModelParams};
use crate::dynamics::SimState;
use crate::error::{Error, Result};
use crate::operators::{a1, coupled_terms, ginzburg_landau_force, CoupledTerms};
use crate::spectral::{NormConvention, SpectralField};

/// Which field an extra norm column measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NormField {
    /// `||u||_s` with the homogeneous velocity weights `|k|^(2s)`.
    Velocity,
    /// `||d||_s` with the weights `(1 + |k|^2)^s`.
    Director,
}

/// A user-selected Sobolev norm recorded next to the fixed columns.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtraNorm {
    pub field: NormField,
    pub s: f64,
}

impl ExtraNorm {
    pub fn column_name(&self) -> String {
        let f = match self.field {
            NormField::Velocity => "u",
            NormField::Director => "d",
        };
        format!("norm_{f}_s{}", self.s)
    }

    pub fn evaluate(&self, state: &SimState) -> Result<f64> {
        match self.field {
            NormField::Velocity => state.u.sobolev_norm(self.s, NormConvention::Velocity),
            NormField::Director => state.d.sobolev_norm(self.s, NormConvention::Director),
        }
    }
}

/// Energy, dissipation and norm diagnostics at one time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    pub e_total: f64,
    /// `<u, Qu> / 2`.
    pub kinetic: f64,
    /// `||grad d||^2 / 2`.
    pub elastic: f64,
    /// `int W(d)`.
    pub potential: f64,
    /// `<A0 u, Qu>`.
    pub diss_visc: f64,
    /// `-||A1 d + f(d)||^2 / lambda1`.
    pub diss_rho: f64,
    /// `mu1 ||d^T A_Q d||^2`.
    pub diss_mu1: f64,
    /// `||A_Q d||^2`.
    pub diss_aqd: f64,
    /// `||N_Q||^2`.
    pub diss_nq: f64,
    /// `<g, Qu>`.
    pub forcing_power: f64,
    /// Budget residual over the step ending at this record (0 for the first).
    pub budget_residual: f64,
    pub norm_u_m_theta2: f64,
    pub norm_u_theta_m_theta2: f64,
    pub max_abs_d: f64,
    pub extra: Vec<f64>,
}

impl EnergyRecord {
    pub const COLUMNS: [&'static str; 15] = [
        "t",
        "e_total",
        "kinetic",
        "elastic",
        "potential",
        "diss_visc",
        "diss_rho",
        "diss_mu1",
        "diss_aqd",
        "diss_nq",
        "forcing_power",
        "budget_residual",
        "norm_u_m_theta2",
        "norm_u_theta_m_theta2",
        "max_abs_d",
    ];

    /// Fixed columns in [`EnergyRecord::COLUMNS`] order, then the extras.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            self.t,
            self.e_total,
            self.kinetic,
            self.elastic,
            self.potential,
            self.diss_visc,
            self.diss_rho,
            self.diss_mu1,
            self.diss_aqd,
            self.diss_nq,
            self.forcing_power,
            self.budget_residual,
            self.norm_u_m_theta2,
            self.norm_u_theta_m_theta2,
            self.max_abs_d,
        ];
        v.extend_from_slice(&self.extra);
        v
    }

    /// Inverse of [`EnergyRecord::values`].
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.len() < Self::COLUMNS.len() {
            return Err(Error::SizeMismatch {
                expected: Self::COLUMNS.len(),
                found: values.len(),
            });
        }
        let v = values;
        Ok(EnergyRecord {
            t: v[0],
            e_total: v[1],
            kinetic: v[2],
            elastic: v[3],
            potential: v[4],
            diss_visc: v[5],
            diss_rho: v[6],
            diss_mu1: v[7],
            diss_aqd: v[8],
            diss_nq: v[9],
            forcing_power: v[10],
            budget_residual: v[11],
            norm_u_m_theta2: v[12],
            norm_u_theta_m_theta2: v[13],
            max_abs_d: v[14],
            extra: v[15..].to_vec(),
        })
    }
}

/// Kinetic, elastic and potential energy and their sum; the norm columns and
/// `max_abs_d` are filled in as well.
pub fn total_energy(state: &SimState, params: &ModelParams) -> Result<EnergyRecord> {
    let (_, potential) = ginzburg_landau_force(&state.d)?;
    energy_fields(state, params, potential)
}

fn energy_fields(state: &SimState, params: &ModelParams, potential: f64) -> Result<EnergyRecord> {
    let qu = state.u.apply(params.q_symbol())?;
    let kinetic = 0.5 * state.u.inner_product(&qu)?;
    let elastic = 0.5 * state.d.inner_product(&a1(&state.d))?;
    Ok(EnergyRecord {
        t: state.t,
        e_total: kinetic + elastic + potential,
        kinetic,
        elastic,
        potential,
        norm_u_m_theta2: state.u.sobolev_norm(-params.theta2, NormConvention::Velocity)?,
        norm_u_theta_m_theta2: state
            .u
            .sobolev_norm(params.theta - params.theta2, NormConvention::Velocity)?,
        max_abs_d: state.d.max_abs(),
        ..Default::default()
    })
}

/// Full record from explicit terms already evaluated at `state`.
pub fn energy_record(
    state: &SimState,
    params: &ModelParams,
    leslie: &LeslieCoefficients,
    terms: &CoupledTerms,
    forcing: Option<&SpectralField>,
    extra: &[ExtraNorm],
) -> Result<EnergyRecord> {
    let l1 = leslie.require_negative_lambda1()?;
    let mut rec = energy_fields(state, params, terms.potential)?;
    let qu = state.u.apply(params.q_symbol())?;
    rec.diss_visc = state.u.apply(params.a0_symbol())?.inner_product(&qu)?;
    rec.diss_rho = -terms.rho.l2_norm().powi(2) / l1;
    rec.diss_mu1 = leslie.mu1 * terms.dad_sq;
    rec.diss_aqd = terms.aqd_sq;
    rec.diss_nq = terms.nq_sq;
    rec.forcing_power = match forcing {
        Some(g) => g.inner_product(&qu)?,
        None => 0.0,
    };
    rec.extra = extra.iter().map(|e| e.evaluate(state)).collect::<Result<_>>()?;
    Ok(rec)
}

/// Energy and dissipation fields at `state`.
pub fn dissipation_components(
    state: &SimState,
    params: &ModelParams,
    leslie: &LeslieCoefficients,
    forcing: Option<&SpectralField>,
) -> Result<EnergyRecord> {
    let terms = coupled_terms(&state.u, &state.d, params, leslie)?;
    energy_record(state, params, leslie, &terms, forcing, &[])
}

/// Instantaneous energy outflow `F` with `dE/dt = -F` (Case 1) or
/// `dE/dt <= -F` (Case 2).
pub fn budget_flux(rec: &EnergyRecord, leslie: &LeslieCoefficients) -> f64 {
    let c = leslie.aqd_coefficient();
    match leslie.case {
        Case::Parodi => {
            rec.diss_visc + rec.diss_rho + rec.diss_mu1 + c * rec.diss_aqd - rec.forcing_power
        }
        Case::General => {
            rec.diss_visc + rec.diss_mu1 - 0.75 * leslie.lambda1() * rec.diss_nq + c * rec.diss_aqd
                - rec.forcing_power
        }
    }
}

/// Budget residual over one interval, with the fluxes averaged over the two
/// endpoint records (trapezoidal rule). Case 1 is two-sided, Case 2 counts
/// only energy growth beyond the bound.
pub fn energy_budget_residual(
    prev: &EnergyRecord,
    next: &EnergyRecord,
    dt: f64,
    leslie: &LeslieCoefficients,
) -> f64 {
    let flux = 0.5 * (budget_flux(prev, leslie) + budget_flux(next, leslie));
    let r = (next.e_total - prev.e_total) / dt + flux;
    match leslie.case {
        Case::Parodi => r.abs(),
        Case::General => r.max(0.0),
    }
}

/// `||A1 d + f(d)||_L2`.
pub fn equilibrium_residual(d: &SpectralField) -> Result<f64> {
    let (f, _) = ginzburg_landau_force(d)?;
    Ok((&a1(d) + &f).l2_norm())
}

/// `||u||^2_{-theta2} + ||d||_1^2`, the quantity bounded by the absorbing ball.
pub fn absorbing_norm(state: &SimState, params: &ModelParams) -> Result<f64> {
    Ok(state.u.sobolev_norm(-params.theta2, NormConvention::Velocity)?.powi(2)
        + state.d.sobolev_norm(1.0, NormConvention::Director)?.powi(2))
}
