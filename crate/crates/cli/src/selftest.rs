//! Fast invariant suite run by `elreg selftest`: the algebraic identities,
//! the potential gradient check, coercivity of the symbols and round trips of
//! every file format.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use elreg_core::coefficients::{coercivity_constants, Case, LeslieCoefficients, Preset};
use elreg_core::dynamics::{run_simulation, DirectorInit, ForcingConfig, GridSpec, RunConfig, Scheme, SimState, VelocityInit};
use elreg_core::operators::{
    ericksen_force, ericksen_stress, ginzburg_landau_force, rate_of_strain, trilinear_b0, trilinear_b1, vorticity_skew,
};
use elreg_core::spectral::{Grid, NormConvention, Padding, SpectralField};

use crate::config::{emit_config, parse_config};
use crate::records::{read_records, write_records};
use crate::snapshot::{decode_snapshot, encode_snapshot};

pub const SEEDS: u64 = 20;
const COERCIVITY_SAMPLES: u64 = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

type Outcome = elreg_core::Result<(bool, String)>;
type CheckFn = fn() -> Outcome;

const CHECKS: [(&str, CheckFn); 10] = [
    ("leray_projection", leray_projection),
    ("strain_plus_vorticity", strain_plus_vorticity),
    ("advection_cancellation", advection_cancellation),
    ("transport_cancellation", transport_cancellation),
    ("ericksen_identity", ericksen_identity),
    ("potential_gradient", potential_gradient),
    ("coercivity", coercivity),
    ("csv_round_trip", csv_round_trip),
    ("snapshot_round_trip", snapshot_round_trip),
    ("config_round_trip", config_round_trip),
];

/// Runs every check, reporting each one as it finishes.
pub fn run_selftest(progress: &mut dyn FnMut(&Check)) -> SelftestReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    for (name, f) in CHECKS {
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        let c = Check { name, passed, detail };
        progress(&c);
        checks.push(c);
    }
    SelftestReport {
        checks,
        elapsed: start.elapsed(),
    }
}

fn grid() -> Arc<Grid> {
    Grid::new(2, 32, 2.0 * PI).expect("valid grid")
}

/// Smooth mean-zero vector field, not divergence free.
fn random_vector(g: &Arc<Grid>, seed: u64) -> elreg_core::Result<SpectralField> {
    DirectorInit::PerturbedConstant {
        vector: vec![0.0; g.dim()],
        amplitude: 1.0,
        seed,
    }
    .build(g)
}

fn random_solenoidal(g: &Arc<Grid>, seed: u64) -> elreg_core::Result<SpectralField> {
    VelocityInit::RandomSolenoidal {
        amplitude: 1.0,
        spectrum_slope: -1.0,
        seed,
    }
    .build(g)
}

fn worst(worst: &mut f64, v: f64) {
    if !(v <= *worst) {
        *worst = v;
    }
}

fn leray_projection() -> Outcome {
    let g = grid();
    let mut w = 0.0f64;
    for seed in 0..SEEDS {
        let f = random_vector(&g, seed)?;
        let pf = f.leray_project()?;
        let ppf = pf.leray_project()?;
        worst(&mut w, (&ppf - &pf).l2_norm() / pf.l2_norm());
        worst(&mut w, pf.divergence()?.l2_norm() / pf.gradient()?.l2_norm());
    }
    Ok((w <= 1e-13, format!("max relative defect {w:.2e} (tol 1e-13)")))
}

fn strain_plus_vorticity() -> Outcome {
    let g = grid();
    let mut w = 0.0f64;
    for seed in 0..SEEDS {
        let v = random_vector(&g, seed)?;
        let grad = v.gradient()?;
        let sum = &rate_of_strain(&v)? + &vorticity_skew(&v)?;
        worst(&mut w, (&sum - &grad).l2_norm() / grad.l2_norm());
    }
    Ok((w <= 1e-13, format!("max relative defect {w:.2e} (tol 1e-13)")))
}

fn advection_cancellation() -> Outcome {
    let g = grid();
    let mut w = 0.0f64;
    for preset in Preset::ALL {
        let p = preset.params(0.7, 1.0);
        for seed in 0..SEEDS {
            let u = random_solenoidal(&g, 100 + seed)?;
            let mu = u.apply(p.m_symbol())?;
            let qu = u.apply(p.q_symbol())?;
            let scale = mu.l2_norm() * qu.gradient()?.l2_norm() * qu.max_abs();
            worst(&mut w, trilinear_b0(&u, &u, &qu, &p)?.abs() / scale);
        }
    }
    Ok((w <= 1e-10, format!("max |b0(u,u,Qu)| / scale {w:.2e} (tol 1e-10)")))
}

fn transport_cancellation() -> Outcome {
    let g = grid();
    let mut w = 0.0f64;
    for preset in Preset::ALL {
        let p = preset.params(0.7, 1.0);
        for seed in 0..SEEDS {
            let u = random_solenoidal(&g, 200 + seed)?;
            let psi = random_vector(&g, 300 + seed)?;
            let qu = u.apply(p.q_symbol())?;
            let scale = qu.max_abs() * psi.gradient()?.l2_norm() * psi.l2_norm();
            worst(&mut w, trilinear_b1(&u, &psi, &psi, &p)?.abs() / scale);
        }
    }
    Ok((w <= 1e-10, format!("max |b1(u,psi,psi)| / scale {w:.2e} (tol 1e-10)")))
}

fn ericksen_identity() -> Outcome {
    let g = grid();
    let mut w = 0.0f64;
    for seed in 0..SEEDS {
        let d = random_vector(&g, 400 + seed)?;
        let lhs = ericksen_force(&d)?.leray_project()?;
        let rhs = (-&ericksen_stress(&d)?.divergence()?).leray_project()?;
        worst(&mut w, (&lhs - &rhs).l2_norm() / rhs.l2_norm());
    }
    Ok((w <= 1e-10, format!("max relative defect {w:.2e} (tol 1e-10)")))
}

fn potential_gradient() -> Outcome {
    let g = grid();
    let d = DirectorInit::RandomUnit { seed: 7 }.build(&g)?;
    let h = random_vector(&g, 8)?;
    let (f, _) = ginzburg_landau_force(&d)?;
    let exact = f.inner_product(&h)?;
    let err = |eps: f64| -> elreg_core::Result<f64> {
        let (_, wp) = ginzburg_landau_force(&d.axpy(eps, &h))?;
        let (_, wm) = ginzburg_landau_force(&d.axpy(-eps, &h))?;
        Ok(((wp - wm) / (2.0 * eps) - exact).abs())
    };
    let (e1, e2) = (err(1e-2)?, err(5e-3)?);
    let slope = (e1 / e2).log2();
    Ok((
        (1.9..=2.1).contains(&slope),
        format!("errors {e1:.3e}, {e2:.3e}; halving slope {slope:.3} (want [1.9, 2.1])"),
    ))
}

fn coercivity() -> Outcome {
    let g = grid();
    let mut ok = true;
    let mut w = f64::INFINITY;
    for preset in Preset::ALL {
        let p = preset.params(0.7, 1.0);
        let c = coercivity_constants(&p, &g);
        ok &= c.c_q > 0.0 && c.c_a0q > 0.0;
        for seed in 0..COERCIVITY_SAMPLES {
            let slope = -2.0 + 3.0 * (seed as f64) / (COERCIVITY_SAMPLES as f64);
            let u = VelocityInit::RandomSolenoidal {
                amplitude: 1.0,
                spectrum_slope: slope,
                seed: 500 + seed,
            }
            .build(&g)?;
            let lhs = u.apply(p.a0_symbol())?.inner_product(&u.apply(p.q_symbol())?)?;
            let norm = u.sobolev_norm(p.theta - p.theta2, NormConvention::Velocity)?;
            w = w.min((lhs - c.c_a0q * norm * norm) / lhs);
        }
    }
    ok &= w >= -1e-12;
    Ok((ok, format!("constants positive; min relative slack {w:.2e} (tol -1e-12)")))
}

fn tiny_run() -> RunConfig {
    RunConfig {
        grid: GridSpec {
            dim: 2,
            n_modes: 8,
            length: 2.0 * PI,
            padding: Padding::ThreeHalves,
        },
        params: Preset::LerayEl.params(0.5, 1.0),
        leslie: LeslieCoefficients::new(0.2, -0.6, 0.4, 0.3, 0.1, Case::Parodi),
        dt: 1e-3,
        t_end: 5e-3,
        scheme: Scheme::Imex1,
        record_every: 1,
        snapshot_every: 0,
        velocity_init: VelocityInit::TaylorGreen { amplitude: 0.3 },
        director_init: DirectorInit::RandomUnit { seed: 1 },
        forcing: ForcingConfig::Zero,
        tol_maxp: 1e-6,
        blowup_threshold: 1e8,
        extra_norms: vec![],
    }
}

fn csv_round_trip() -> Outcome {
    let out = run_simulation(&tiny_run(), &mut |_| Ok(()))?;
    let mut buf = Vec::new();
    let fail = |e: crate::FormatError| Ok((false, format!("error: {e}")));
    if let Err(e) = write_records(&mut buf, &out.records, &[]) {
        return fail(e);
    }
    let table = match read_records(buf.as_slice()) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let same = table.records.len() == out.records.len()
        && table.records.iter().zip(&out.records).all(|(a, b)| {
            a.values()
                .iter()
                .zip(b.values())
                .all(|(x, y)| x.to_bits() == y.to_bits())
        });
    Ok((same, format!("{} records, bit-exact: {same}", out.records.len())))
}

fn snapshot_round_trip() -> Outcome {
    let g = grid();
    let state = SimState::new(random_solenoidal(&g, 1)?, DirectorInit::RandomUnit { seed: 2 }.build(&g)?, 1.25)?;
    let back = match decode_snapshot(&encode_snapshot(&state)) {
        Ok(s) => s,
        Err(e) => return Ok((false, format!("error: {e}"))),
    };
    let rel = |a: &SpectralField, b: &SpectralField| -> elreg_core::Result<f64> {
        Ok((a - &b.regrid(a.grid())?).l2_norm() / a.l2_norm())
    };
    let w = rel(&state.u, &back.u)?.max(rel(&state.d, &back.d)?);
    Ok((w <= 1e-12 && back.t == state.t, format!("max relative defect {w:.2e} (tol 1e-12)")))
}

pub(crate) const SAMPLE_CONFIG: &str = r#"
[model]
preset = "NS-EL-alpha"
alpha = 0.5
mu4 = 1.0

[leslie]
mu1 = 0.2
mu2 = -0.6
mu3 = 0.4
mu5 = 0.3
mu6 = 0.1
case = 1

[grid]
dim = 2
n_modes = 32
length = 6.283185307179586

[time]
dt = 0.01
t_end = 1.0
scheme = "cnab2"
record_every = 10

[init.velocity]
kind = "random_solenoidal"
amplitude = 0.5
spectrum_slope = -1.0
seed = 3

[init.director]
kind = "perturbed_constant"
vector = [1.0, 0.0]
amplitude = 0.3
seed = 4

[forcing]
kind = "decaying"
delta = 0.5

[forcing.profile]
kind = "taylor_green"
amplitude = 1e-5

[[extra_norms]]
field = "director"
s = 2.0
"#;

fn config_round_trip() -> Outcome {
    let first = match parse_config(SAMPLE_CONFIG) {
        Ok(c) => c,
        Err(e) => return Ok((false, format!("error: {e}"))),
    };
    let same = match parse_config(&emit_config(&first.file)) {
        Ok(again) => again == first,
        Err(e) => return Ok((false, format!("error: {e}"))),
    };
    Ok((same, format!("parse(emit(config)) identical: {same}")))
}
