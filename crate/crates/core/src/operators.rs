//! Ericksen-Leslie tensors and nonlinear terms.
//!
//! Every nonlinearity is evaluated pointwise on the padded lattice and
//! truncated back to the base spectrum. [`coupled_terms`] evaluates all terms
//! of both equations from one set of padded samples, so that the pairings
//! entering the energy balance cancel exactly at the discrete level.

use std::sync::Arc;

use crate::coefficients::{ChiVariant, LeslieCoefficients, ModelParams};
use crate::error::{Error, Result};
use crate::spectral::{Grid, Rank, SpectralField};

type Samples = Vec<Vec<f64>>;

fn require(f: &SpectralField, rank: Rank) -> Result<()> {
    if f.rank() != rank {
        return Err(Error::WrongRank {
            expected: rank,
            found: f.rank(),
        });
    }
    Ok(())
}

fn same_grid(a: &SpectralField, b: &SpectralField) -> Result<()> {
    if Arc::ptr_eq(a.grid(), b.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn zeros(grid: &Grid, ncomp: usize) -> Samples {
    vec![vec![0.0; grid.padded_point_count()]; ncomp]
}

/// Filtered velocity `v = Qu`.
pub fn filtered_velocity(u: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    require(u, Rank::Vector)?;
    u.apply(params.q_symbol())
}

/// `A1 d = -Laplacian d`.
pub fn a1(d: &SpectralField) -> SpectralField {
    -&d.laplacian()
}

/// Symmetric part `(grad v + grad v^T) / 2`.
pub fn rate_of_strain(v: &SpectralField) -> Result<SpectralField> {
    require(v, Rank::Vector)?;
    let g = v.gradient()?;
    Ok(symmetric_part(&g, 0.5))
}

/// Skew part `(grad v - grad v^T) / 2`.
pub fn vorticity_skew(v: &SpectralField) -> Result<SpectralField> {
    require(v, Rank::Vector)?;
    let g = v.gradient()?;
    Ok(symmetric_part(&g, -0.5))
}

/// `(T + s T^T) / 2` for `s = +-1`, coefficientwise.
fn symmetric_part(t: &SpectralField, half_sign: f64) -> SpectralField {
    let dim = t.grid().dim();
    let mut out = SpectralField::zeros(t.grid(), Rank::Tensor);
    for i in 0..dim {
        for j in 0..dim {
            let a = t.component(i * dim + j);
            let b = t.component(j * dim + i);
            let dst = out.component_mut(i * dim + j);
            for idx in 0..dst.len() {
                dst[idx] = a[idx] * 0.5 + b[idx] * half_sign;
            }
        }
    }
    out
}

/// Ginzburg-Landau force `f(d) = (|d|^2 - 1) d`, dealiased, and the potential
/// `int (|d|^2 - 1)^2 / 4`.
pub fn ginzburg_landau_force(d: &SpectralField) -> Result<(SpectralField, f64)> {
    require(d, Rank::Vector)?;
    let grid = d.grid();
    let dp = d.padded_components();
    let mut f = zeros(grid, dp.len());
    let mut potential = 0.0;
    for p in 0..grid.padded_point_count() {
        let s: f64 = dp.iter().map(|c| c[p] * c[p]).sum::<f64>() - 1.0;
        potential += 0.25 * s * s;
        for (fc, dc) in f.iter_mut().zip(&dp) {
            fc[p] = s * dc[p];
        }
    }
    let force = SpectralField::from_padded(grid, Rank::Vector, &f).dealias();
    Ok((force, potential * grid.padded_weight()))
}

/// `rho = A1 d + f(d)`, the variational derivative of the director energy.
pub fn molecular_field(d: &SpectralField) -> Result<SpectralField> {
    let (f, _) = ginzburg_landau_force(d)?;
    Ok(&a1(d) + &f)
}

/// Co-rotational rate with the time derivative eliminated through the
/// director equation: `(rho - lambda2 A_Q d) / lambda1`.
pub fn n_q_substituted(
    d: &SpectralField,
    a_q: &SpectralField,
    leslie: &LeslieCoefficients,
) -> Result<SpectralField> {
    let l1 = leslie.require_negative_lambda1()?;
    require(a_q, Rank::Tensor)?;
    same_grid(d, a_q)?;
    let rho = molecular_field(d)?;
    let grid = d.grid();
    let dim = grid.dim();
    let dp = d.padded_components();
    let ap = a_q.padded_components();
    let rp = rho.padded_components();
    let l2 = leslie.lambda2();
    let mut out = zeros(grid, dim);
    for p in 0..grid.padded_point_count() {
        for i in 0..dim {
            let ad: f64 = (0..dim).map(|j| ap[i * dim + j][p] * dp[j][p]).sum();
            out[i][p] = (rp[i][p] - l2 * ad) / l1;
        }
    }
    Ok(SpectralField::from_padded(grid, Rank::Vector, &out))
}

/// Pointwise Leslie stress
/// `mu1 (d.Ad) d(x)d + mu2 N(x)d + mu3 d(x)N + mu5 Ad(x)d + mu6 d(x)Ad`.
fn stress_at(
    leslie: &LeslieCoefficients,
    dim: usize,
    d: &[f64; 3],
    ad: &[f64; 3],
    n: &[f64; 3],
    out: &mut [f64; 9],
) {
    let dad: f64 = (0..dim).map(|i| d[i] * ad[i]).sum();
    for i in 0..dim {
        for j in 0..dim {
            out[i * dim + j] = leslie.mu1 * dad * d[i] * d[j]
                + leslie.mu2 * n[i] * d[j]
                + leslie.mu3 * d[i] * n[j]
                + leslie.mu5 * ad[i] * d[j]
                + leslie.mu6 * d[i] * ad[j];
        }
    }
}

/// Leslie stress tensor from a director, a strain tensor and a co-rotational
/// rate.
pub fn leslie_stress(
    d: &SpectralField,
    a_q: &SpectralField,
    n_q: &SpectralField,
    leslie: &LeslieCoefficients,
) -> Result<SpectralField> {
    require(d, Rank::Vector)?;
    require(a_q, Rank::Tensor)?;
    require(n_q, Rank::Vector)?;
    same_grid(d, a_q)?;
    same_grid(d, n_q)?;
    let grid = d.grid();
    let dim = grid.dim();
    let dp = d.padded_components();
    let ap = a_q.padded_components();
    let np = n_q.padded_components();
    let mut out = zeros(grid, dim * dim);
    let (mut dv, mut adv, mut nv, mut s) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 9]);
    for p in 0..grid.padded_point_count() {
        for i in 0..dim {
            dv[i] = dp[i][p];
            nv[i] = np[i][p];
        }
        for i in 0..dim {
            adv[i] = (0..dim).map(|j| ap[i * dim + j][p] * dv[j]).sum();
        }
        stress_at(leslie, dim, &dv, &adv, &nv, &mut s);
        for (c, o) in out.iter_mut().enumerate() {
            o[p] = s[c];
        }
    }
    Ok(SpectralField::from_padded(grid, Rank::Tensor, &out))
}

/// `R0(psi, d)_j = sum_k psi_k d_j d_k`, the force dual to transport of `d`.
pub fn r0(psi: &SpectralField, d: &SpectralField) -> Result<SpectralField> {
    require(psi, Rank::Vector)?;
    require(d, Rank::Vector)?;
    same_grid(psi, d)?;
    let grid = d.grid();
    let dim = grid.dim();
    let pp = psi.padded_components();
    let gd = d.gradient()?.padded_components();
    let mut out = zeros(grid, dim);
    for p in 0..grid.padded_point_count() {
        for j in 0..dim {
            out[j][p] = (0..dim).map(|k| pp[k][p] * gd[k * dim + j][p]).sum();
        }
    }
    Ok(SpectralField::from_padded(grid, Rank::Vector, &out))
}

/// Ericksen force `R0(A1 d, d)`; its Leray projection equals that of
/// `-div(grad d . grad d)`.
pub fn ericksen_force(d: &SpectralField) -> Result<SpectralField> {
    r0(&a1(d), d)
}

/// Ericksen stress `(grad d . grad d)_ij = d_i d . d_j d`.
pub fn ericksen_stress(d: &SpectralField) -> Result<SpectralField> {
    require(d, Rank::Vector)?;
    let grid = d.grid();
    let dim = grid.dim();
    let gd = d.gradient()?.padded_components();
    let mut out = zeros(grid, dim * dim);
    for p in 0..grid.padded_point_count() {
        for i in 0..dim {
            for j in 0..dim {
                out[i * dim + j][p] = (0..dim).map(|k| gd[k * dim + i][p] * gd[k * dim + j][p]).sum();
            }
        }
    }
    Ok(SpectralField::from_padded(grid, Rank::Tensor, &out))
}

/// Unprojected advection form `(m . grad) w + chi-term` sampled on the
/// padded lattice, with `m = Mu` and `w = Qv`.
fn advection_samples(m: &SpectralField, w: &SpectralField, params: &ModelParams) -> Result<Samples> {
    let grid = m.grid();
    let dim = grid.dim();
    let mp = m.padded_components();
    let wp = w.padded_components();
    let gw = w.gradient()?.padded_components();
    let gm = if params.chi == 1 {
        m.gradient()?.padded_components()
    } else {
        Vec::new()
    };
    let mut out = zeros(grid, dim);
    for p in 0..grid.padded_point_count() {
        for i in 0..dim {
            out[i][p] = advection_at(params, dim, i, p, &mp, &wp, &gm, &gw);
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn advection_at(
    params: &ModelParams,
    dim: usize,
    i: usize,
    p: usize,
    m: &Samples,
    w: &Samples,
    gm: &Samples,
    gw: &Samples,
) -> f64 {
    let mut s = 0.0;
    if params.chi == 0 {
        for j in 0..dim {
            s += m[j][p] * gw[i * dim + j][p];
        }
        return s;
    }
    match params.chi_variant {
        ChiVariant::Conservative => {
            for j in 0..dim {
                s += w[j][p] * gm[i * dim + j][p] + gw[j * dim + i][p] * m[j][p];
            }
        }
        ChiVariant::Literal => {
            for j in 0..dim {
                s += m[j][p] * gw[i * dim + j][p] + gw[j * dim + i][p] * m[j][p];
            }
        }
        ChiVariant::Transposed => {
            for j in 0..dim {
                s += m[j][p] * gw[i * dim + j][p] + gm[j * dim + i][p] * w[j][p];
            }
        }
    }
    s
}

/// `B0(u, u)`, Leray projected and dealiased.
pub fn b0_nonlinear(u: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    b0_bilinear(u, u, params)
}

/// `B0(u, v) = Bbar(Mu, Qv)`, Leray projected and dealiased.
pub fn b0_bilinear(u: &SpectralField, v: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    require(u, Rank::Vector)?;
    require(v, Rank::Vector)?;
    same_grid(u, v)?;
    params.validate()?;
    let m = u.apply(params.m_symbol())?;
    let w = v.apply(params.q_symbol())?;
    let s = advection_samples(&m, &w, params)?;
    SpectralField::from_padded(u.grid(), Rank::Vector, &s)
        .leray_project()
        .map(|f| f.dealias())
}

/// `B1(u, d) = (Qu . grad) d`, dealiased.
pub fn b1_transport(u: &SpectralField, d: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    let s = transport_samples(u, d, params)?;
    Ok(SpectralField::from_padded(u.grid(), Rank::Vector, &s).dealias())
}

fn transport_samples(u: &SpectralField, d: &SpectralField, params: &ModelParams) -> Result<Samples> {
    require(u, Rank::Vector)?;
    require(d, Rank::Vector)?;
    same_grid(u, d)?;
    let grid = u.grid();
    let dim = grid.dim();
    let vp = filtered_velocity(u, params)?.padded_components();
    let gd = d.gradient()?.padded_components();
    let mut out = zeros(grid, dim);
    for p in 0..grid.padded_point_count() {
        for i in 0..dim {
            out[i][p] = (0..dim).map(|j| vp[j][p] * gd[i * dim + j][p]).sum();
        }
    }
    Ok(out)
}

fn padded_pairing(grid: &Grid, a: &Samples, b: &Samples) -> f64 {
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .sum();
    sum * grid.padded_weight()
}

/// `b0(u, v, w) = <B0(u, v), w>` by quadrature on the padded lattice.
pub fn trilinear_b0(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    params: &ModelParams,
) -> Result<f64> {
    require(u, Rank::Vector)?;
    require(v, Rank::Vector)?;
    same_grid(u, v)?;
    same_grid(u, w)?;
    params.validate()?;
    let m = u.apply(params.m_symbol())?;
    let q = v.apply(params.q_symbol())?;
    let s = advection_samples(&m, &q, params)?;
    // <P X, w> = <X, P w>
    let wp = w.leray_project()?.padded_components();
    Ok(padded_pairing(u.grid(), &s, &wp))
}

/// `b1(u, d, psi) = <B1(u, d), psi>` by quadrature on the padded lattice.
pub fn trilinear_b1(
    u: &SpectralField,
    d: &SpectralField,
    psi: &SpectralField,
    params: &ModelParams,
) -> Result<f64> {
    require(psi, Rank::Vector)?;
    same_grid(d, psi)?;
    let s = transport_samples(u, d, params)?;
    Ok(padded_pairing(u.grid(), &s, &psi.padded_components()))
}

/// All explicit terms of the coupled system at one state, together with the
/// quadratures that enter the energy balance.
#[derive(Clone, Debug)]
pub struct CoupledTerms {
    /// `P[-B0(u, u) + R0(rho, d) + div sigma]`, dealiased; excludes `A0 u` and
    /// the forcing.
    pub velocity: SpectralField,
    /// `-B1(u, d) + omega d - (lambda2 / lambda1) A d + f(d) / lambda1`,
    /// dealiased; excludes the implicit `A1 d / lambda1`.
    pub director: SpectralField,
    /// `rho = A1 d + f(d)`.
    pub rho: SpectralField,
    /// `int W(d)`.
    pub potential: f64,
    /// `||d^T A_Q d||^2`.
    pub dad_sq: f64,
    /// `||A_Q d||^2`.
    pub aqd_sq: f64,
    /// `||N_Q||^2`.
    pub nq_sq: f64,
    /// `<N_Q, A_Q d>`.
    pub nq_aqd: f64,
    /// `<sigma_Q, grad v>`.
    pub stress_power: f64,
    /// `max |v|` over the padded lattice.
    pub max_abs_v: f64,
    /// `max |d|` over the padded lattice.
    pub max_abs_d_padded: f64,
}

/// Evaluates every explicit term from one set of padded samples.
pub fn coupled_terms(
    u: &SpectralField,
    d: &SpectralField,
    params: &ModelParams,
    leslie: &LeslieCoefficients,
) -> Result<CoupledTerms> {
    let l1 = leslie.require_negative_lambda1()?;
    let l2 = leslie.lambda2();
    require(u, Rank::Vector)?;
    require(d, Rank::Vector)?;
    same_grid(u, d)?;
    let grid = u.grid();
    let dim = grid.dim();
    let npts = grid.padded_point_count();
    let weight = grid.padded_weight();

    let m = u.apply(params.m_symbol())?;
    let v = u.apply(params.q_symbol())?;
    let mp = m.padded_components();
    let vp = v.padded_components();
    let gv = v.gradient()?.padded_components();
    let gm = if params.chi == 1 {
        m.gradient()?.padded_components()
    } else {
        Vec::new()
    };
    let dp = d.padded_components();
    let gd = d.gradient()?.padded_components();

    let (f, potential) = ginzburg_landau_force(d)?;
    let rho = &a1(d) + &f;
    let rp = rho.padded_components();

    let mut vel = zeros(grid, dim);
    let mut dir = zeros(grid, dim);
    let mut sigma = zeros(grid, dim * dim);
    let (mut dad_sq, mut aqd_sq, mut nq_sq, mut nq_aqd, mut stress_power) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut max_v, mut max_d) = (0.0f64, 0.0f64);
    let (mut dv, mut ad, mut wd, mut n, mut s) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3], [0.0; 9]);
    let mut a = [0.0; 9];
    let mut w = [0.0; 9];
    for p in 0..npts {
        for i in 0..dim {
            dv[i] = dp[i][p];
            for j in 0..dim {
                let gij = gv[i * dim + j][p];
                let gji = gv[j * dim + i][p];
                a[i * dim + j] = 0.5 * (gij + gji);
                w[i * dim + j] = 0.5 * (gij - gji);
            }
        }
        for i in 0..dim {
            ad[i] = (0..dim).map(|j| a[i * dim + j] * dv[j]).sum();
            wd[i] = (0..dim).map(|j| w[i * dim + j] * dv[j]).sum();
            n[i] = (rp[i][p] - l2 * ad[i]) / l1;
        }
        stress_at(leslie, dim, &dv, &ad, &n, &mut s);

        let mut dad = 0.0;
        let (mut v2, mut d2) = (0.0, 0.0);
        for i in 0..dim {
            dad += dv[i] * ad[i];
            aqd_sq += ad[i] * ad[i];
            nq_sq += n[i] * n[i];
            nq_aqd += n[i] * ad[i];
            v2 += vp[i][p] * vp[i][p];
            d2 += dv[i] * dv[i];
            for j in 0..dim {
                stress_power += s[i * dim + j] * gv[i * dim + j][p];
                sigma[i * dim + j][p] = s[i * dim + j];
            }
            let transport: f64 = (0..dim).map(|j| vp[j][p] * gd[i * dim + j][p]).sum();
            dir[i][p] = -transport + wd[i] - (l2 / l1) * ad[i];
            let ericksen: f64 = (0..dim).map(|k| rp[k][p] * gd[k * dim + i][p]).sum();
            vel[i][p] = ericksen - advection_at(params, dim, i, p, &mp, &vp, &gm, &gv);
        }
        dad_sq += dad * dad;
        max_v = max_v.max(v2);
        max_d = max_d.max(d2);
    }

    let sigma = SpectralField::from_padded(grid, Rank::Tensor, &sigma);
    let vel = SpectralField::from_padded(grid, Rank::Vector, &vel);
    let velocity = (&vel + &sigma.divergence()?).leray_project()?.dealias();
    let director = SpectralField::from_padded(grid, Rank::Vector, &dir)
        .dealias()
        .axpy(1.0 / l1, &f);

    Ok(CoupledTerms {
        velocity,
        director,
        rho,
        potential,
        dad_sq: dad_sq * weight,
        aqd_sq: aqd_sq * weight,
        nq_sq: nq_sq * weight,
        nq_aqd: nq_aqd * weight,
        stress_power: stress_power * weight,
        max_abs_v: max_v.sqrt(),
        max_abs_d_padded: max_d.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::coefficients::{Case, Preset};
    use crate::spectral::{Complex64, NormConvention};

    fn grid(n: usize) -> Arc<Grid> {
        Grid::new(2, n, 2.0 * PI).unwrap()
    }

    /// Random band-limited field with decaying spectrum.
    fn random(g: &Arc<Grid>, rank: Rank, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.mode_count();
        let mut vals = vec![0.0; rank.components(g.dim()) * n];
        let modes: Vec<(f64, f64, f64, f64)> = (0..6)
            .map(|_| {
                (
                    rng.random_range(-3..=3) as f64,
                    rng.random_range(-3..=3) as f64,
                    rng.random_range(-1.0..1.0),
                    rng.random_range(0.0..2.0 * PI),
                )
            })
            .collect();
        for c in 0..rank.components(g.dim()) {
            let shift = c as f64 * 0.7;
            for p in 0..n {
                let x = g.point(p);
                vals[c * n + p] = modes
                    .iter()
                    .map(|&(kx, ky, a, ph)| a * (kx * x[0] + ky * x[1] + ph + shift).cos())
                    .sum::<f64>()
                    + 0.3;
            }
        }
        SpectralField::from_physical(g, rank, &vals).unwrap().dealias()
    }

    fn solenoidal(g: &Arc<Grid>, seed: u64) -> SpectralField {
        random(g, Rank::Vector, seed).leray_project().unwrap()
    }

    fn parodi() -> LeslieCoefficients {
        LeslieCoefficients::new(0.2, -0.6, 0.4, 0.3, 0.1, Case::Parodi)
    }

    #[test]
    fn strain_examples() {
        let g = grid(16);
        let v = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[0] = x[1].sin());
        let a = rate_of_strain(&v).unwrap();
        let w = vorticity_skew(&v).unwrap();
        let half_cos = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = 0.5 * x[1].cos());
        assert!(a.component_field(0).max_coeff() < 1e-16);
        assert!((&a.component_field(1) - &half_cos).max_coeff() < 1e-15);
        assert!((&a.component_field(2) - &half_cos).max_coeff() < 1e-15);
        assert!((&w.component_field(1) - &half_cos).max_coeff() < 1e-15);
        assert!((&w.component_field(2) + &half_cos).max_coeff() < 1e-15);

        let c = SpectralField::from_fn(&g, Rank::Vector, |_, v| v[0] = 2.0);
        assert_eq!(rate_of_strain(&c).unwrap().max_coeff(), 0.0);
        assert_eq!(vorticity_skew(&c).unwrap().max_coeff(), 0.0);
    }

    #[test]
    fn taylor_green_strain_matches_hand_derivatives() {
        let g = grid(16);
        let v = SpectralField::from_fn(&g, Rank::Vector, |x, v| {
            v[0] = x[0].sin() * x[1].cos();
            v[1] = -x[0].cos() * x[1].sin();
        });
        let a = rate_of_strain(&v).unwrap();
        let expect = SpectralField::from_fn(&g, Rank::Tensor, |x, t| {
            let c = x[0].cos() * x[1].cos();
            t[0] = c;
            t[3] = -c;
        });
        assert!((&a - &expect).max_coeff() < 1e-12);
    }

    #[test]
    fn strain_plus_skew_is_gradient() {
        let g = grid(16);
        for seed in 0..5 {
            let v = random(&g, Rank::Vector, seed);
            let sum = &rate_of_strain(&v).unwrap() + &vorticity_skew(&v).unwrap();
            let grad = v.gradient().unwrap();
            assert!((&sum - &grad).max_coeff() <= 1e-13 * grad.max_coeff());
        }
    }

    #[test]
    fn ginzburg_landau_examples() {
        let g = grid(8);
        let unit = SpectralField::from_fn(&g, Rank::Vector, |_, v| {
            v[0] = 0.6;
            v[1] = 0.8;
        });
        let (f, w) = ginzburg_landau_force(&unit).unwrap();
        assert!(f.max_coeff() < 1e-15 && w.abs() < 1e-28);

        let zero = SpectralField::zeros(&g, Rank::Vector);
        let (f, w) = ginzburg_landau_force(&zero).unwrap();
        assert_eq!(f.max_coeff(), 0.0);
        assert!((w - 0.25 * 4.0 * PI * PI).abs() < 1e-12);

        let two = SpectralField::from_fn(&g, Rank::Vector, |_, v| v[0] = 2.0);
        let (f, w) = ginzburg_landau_force(&two).unwrap();
        assert!((f.mean(0) - Complex64::new(6.0, 0.0)).norm() < 1e-13);
        assert!((w - 2.25 * 4.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn gradient_consistency_of_potential() {
        let g = grid(16);
        let d = random(&g, Rank::Vector, 3);
        let h = random(&g, Rank::Vector, 4);
        let (f, _) = ginzburg_landau_force(&d).unwrap();
        let exact = f.inner_product(&h).unwrap();
        let err = |eps: f64| {
            let (_, wp) = ginzburg_landau_force(&d.axpy(eps, &h)).unwrap();
            let (_, wm) = ginzburg_landau_force(&d.axpy(-eps, &h)).unwrap();
            ((wp - wm) / (2.0 * eps) - exact).abs()
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        let slope = (e1 / e2).log2();
        assert!((1.9..=2.1).contains(&slope), "slope {slope}, errors {e1} {e2}");
    }

    #[test]
    fn n_q_examples() {
        let g = grid(8);
        let mut l = parodi();
        l.mu5 = 0.2;
        l.mu6 = 0.2;
        assert_eq!(l.lambda2(), 0.0);
        let unit = SpectralField::from_fn(&g, Rank::Vector, |_, v| v[0] = 1.0);
        let a = rate_of_strain(&solenoidal(&g, 1)).unwrap();
        assert!(n_q_substituted(&unit, &a, &l).unwrap().max_coeff() < 1e-15);

        let d = random(&g, Rank::Vector, 2);
        let zero_a = SpectralField::zeros(&g, Rank::Tensor);
        let n = n_q_substituted(&d, &zero_a, &l).unwrap();
        let expect = molecular_field(&d).unwrap().scale(1.0 / l.lambda1());
        assert!((&n - &expect).max_coeff() < 1e-14);

        let bad = LeslieCoefficients::new(0.0, 0.1, 0.1, 0.0, 0.0, Case::Parodi);
        assert!(matches!(
            n_q_substituted(&d, &zero_a, &bad),
            Err(Error::Lambda1NotNegative { .. })
        ));
    }

    #[test]
    fn leslie_stress_examples() {
        let g = grid(16);
        let d = random(&g, Rank::Vector, 5);
        let a = rate_of_strain(&solenoidal(&g, 6)).unwrap();
        let n = random(&g, Rank::Vector, 7);
        let none = LeslieCoefficients::new(0.0, 0.0, 0.0, 0.0, 0.0, Case::Parodi);
        assert_eq!(leslie_stress(&d, &a, &n, &none).unwrap().max_coeff(), 0.0);
        let zero = SpectralField::zeros(&g, Rank::Vector);
        assert_eq!(leslie_stress(&zero, &a, &n, &parodi()).unwrap().max_coeff(), 0.0);

        // mu5 = mu6 = 1, d = e1, v = (sin y, 0): A d = (0, cos y / 2),
        // sigma = Ad(x)d + d(x)Ad = [[0, cos y / 2], [cos y / 2, 0]]
        let l = LeslieCoefficients::new(0.0, 0.0, 0.0, 1.0, 1.0, Case::Parodi);
        let e1 = SpectralField::from_fn(&g, Rank::Vector, |_, v| v[0] = 1.0);
        let v = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[0] = x[1].sin());
        let a = rate_of_strain(&v).unwrap();
        let s = leslie_stress(&e1, &a, &n, &l).unwrap();
        let expect = SpectralField::from_fn(&g, Rank::Tensor, |x, t| {
            t[1] = 0.5 * x[1].cos();
            t[2] = 0.5 * x[1].cos();
        });
        assert!((&s - &expect).max_coeff() < 1e-12);
    }

    #[test]
    fn ericksen_examples() {
        let g = grid(16);
        let c = SpectralField::from_fn(&g, Rank::Vector, |_, v| v[0] = 0.4);
        assert_eq!(ericksen_force(&c).unwrap().max_coeff(), 0.0);
        // d = (cos x, sin x) has A1 d = d and d . d_x d = 0
        let d = SpectralField::from_fn(&g, Rank::Vector, |x, v| {
            v[0] = x[0].cos();
            v[1] = x[0].sin();
        });
        assert!(ericksen_force(&d).unwrap().max_coeff() < 1e-14);
    }

    #[test]
    fn ericksen_identity() {
        let g = grid(32);
        for seed in 0..5 {
            let d = random(&g, Rank::Vector, seed);
            let lhs = ericksen_force(&d).unwrap().leray_project().unwrap();
            let rhs = (-&ericksen_stress(&d).unwrap().divergence().unwrap())
                .leray_project()
                .unwrap();
            let diff = (&lhs - &rhs).sobolev_norm(0.0, NormConvention::Velocity).unwrap();
            let scale = rhs.sobolev_norm(0.0, NormConvention::Velocity).unwrap();
            assert!(diff <= 1e-10 * scale, "seed {seed}: {diff} vs {scale}");
        }
    }

    #[test]
    fn nse_advection_reduces_to_classical_form() {
        let g = grid(16);
        let p = Preset::NseEl.params(1.0, 1.0);
        let u = solenoidal(&g, 8);
        let b = b0_nonlinear(&u, &p).unwrap();
        let grad = u.gradient().unwrap();
        let classical = grad
            .product(&u, crate::spectral::Product::MatVec)
            .unwrap()
            .leray_project()
            .unwrap()
            .dealias();
        assert!((&b - &classical).max_coeff() < 1e-14);
        assert_eq!(b0_nonlinear(&SpectralField::zeros(&g, Rank::Vector), &p).unwrap().max_coeff(), 0.0);
    }

    #[test]
    fn single_mode_advection_matches_hand_value() {
        // u = (sin y, 0): (u . grad) u = 0 and the chi-terms are gradients.
        let g = grid(16);
        let u = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[0] = x[1].sin());
        for p in Preset::ALL {
            let b = b0_nonlinear(&u, &p.params(0.5, 1.0)).unwrap();
            assert!(b.max_coeff() < 1e-15, "{p}");
        }
    }

    #[test]
    fn transport_examples() {
        let g = grid(16);
        let p = Preset::SbmEl.params(1.0, 1.0);
        let d = random(&g, Rank::Vector, 9);
        let zero = SpectralField::zeros(&g, Rank::Vector);
        assert_eq!(b1_transport(&zero, &d, &p).unwrap().max_coeff(), 0.0);
        let c = SpectralField::from_fn(&g, Rank::Vector, |_, v| v[1] = 1.0);
        assert_eq!(b1_transport(&solenoidal(&g, 1), &c, &p).unwrap().max_coeff(), 0.0);
        // v = Qu with u = (sin y, 0), d = (cos x, 0): B1 = v_x d_x d = -sin y sin x q(1)
        let u = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[0] = x[1].sin());
        let d = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[0] = x[0].cos());
        let b = b1_transport(&u, &d, &p).unwrap();
        let expect = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[0] = -0.5 * x[1].sin() * x[0].sin());
        assert!((&b - &expect).max_coeff() < 1e-15);
    }

    #[test]
    fn cancellations_for_all_presets() {
        let g = grid(32);
        for preset in Preset::ALL {
            let p = preset.params(0.7, 1.0);
            for seed in 0..3 {
                let u = solenoidal(&g, 10 + seed);
                let qu = u.apply(p.q_symbol()).unwrap();
                let val = trilinear_b0(&u, &u, &qu, &p).unwrap();
                let scale = u.l2_norm().powi(3);
                assert!(val.abs() <= 1e-10 * scale, "{preset}: {val}");
                let psi = random(&g, Rank::Vector, 20 + seed);
                let val = trilinear_b1(&u, &psi, &psi, &p).unwrap();
                assert!(val.abs() <= 1e-10 * scale * psi.l2_norm(), "{preset}: {val}");
            }
        }
        assert_eq!(
            trilinear_b0(
                &SpectralField::zeros(&g, Rank::Vector),
                &SpectralField::zeros(&g, Rank::Vector),
                &solenoidal(&g, 1),
                &Preset::NseEl.params(1.0, 1.0)
            )
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn literal_chi_term_breaks_cancellation_in_3d() {
        // In 2D the literal form still cancels (enstrophy conservation), so a
        // 3D field is needed to see the defect.
        let g = Grid::new(3, 12, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let modes: Vec<[f64; 6]> = (0..12)
            .map(|_| {
                let mut m = [0.0; 6];
                for k in m.iter_mut().take(3) {
                    *k = rng.random_range(-3..=3) as f64;
                }
                for a in m.iter_mut().skip(3) {
                    *a = rng.random_range(-1.0..1.0);
                }
                m
            })
            .collect();
        let u = SpectralField::from_fn(&g, Rank::Vector, |x, v| {
            for m in &modes {
                let phase = m[0] * x[0] + m[1] * x[1] + m[2] * x[2];
                for c in 0..3 {
                    v[c] += m[3 + c] * (phase + c as f64).cos();
                }
            }
        })
        .dealias()
        .leray_project()
        .unwrap();
        let mut p = Preset::NsEl.params(0.7, 1.0);
        let qu = u.apply(p.q_symbol()).unwrap();
        let scale = u.l2_norm().powi(3);
        assert!(trilinear_b0(&u, &u, &qu, &p).unwrap().abs() <= 1e-10 * scale);
        p.chi_variant = ChiVariant::Literal;
        let val = trilinear_b0(&u, &u, &qu, &p).unwrap();
        assert!(val.abs() > 1e-6 * scale, "{val}");
    }

    #[test]
    fn stress_power_identity() {
        let g = grid(32);
        for (seed, l) in [
            parodi(),
            LeslieCoefficients::new(0.5, -1.2, 0.3, 0.9, 0.4, Case::General),
        ]
        .into_iter()
        .enumerate()
        {
            let seed = seed as u64;
            let d = random(&g, Rank::Vector, 30 + seed);
            let v = solenoidal(&g, 40 + seed);
            let a = rate_of_strain(&v).unwrap();
            let w = vorticity_skew(&v).unwrap();
            let n = n_q_substituted(&d, &a, &l).unwrap();
            let sigma = leslie_stress(&d, &a, &n, &l).unwrap();
            let lhs = -sigma.inner_product(&v.gradient().unwrap()).unwrap();

            // right-hand side assembled termwise from physical samples
            let dp = d.padded_components();
            let ap = a.padded_components();
            let wp = w.padded_components();
            let np = n.padded_components();
            let mut rhs = 0.0;
            for p in 0..g.padded_point_count() {
                let mut adv = [0.0; 2];
                let mut wdv = [0.0; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        adv[i] += ap[i * 2 + j][p] * dp[j][p];
                        wdv[i] += wp[i * 2 + j][p] * dp[j][p];
                    }
                }
                let dad = dp[0][p] * adv[0] + dp[1][p] * adv[1];
                let mut dn_a = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        dn_a += dp[i][p] * np[j][p] * ap[i * 2 + j][p];
                    }
                }
                let ad2 = adv[0] * adv[0] + adv[1] * adv[1];
                let kin: f64 = (0..2)
                    .map(|i| wdv[i] * (l.lambda1() * np[i][p] + l.lambda2() * adv[i]))
                    .sum();
                rhs += -l.mu1 * dad * dad - (l.mu2 + l.mu3) * dn_a - (l.mu5 + l.mu6) * ad2 - kin;
            }
            rhs *= g.padded_weight();
            assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1e-3), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn coupled_terms_match_separate_operators() {
        let g = grid(32);
        let p = Preset::MlEl.params(0.8, 1.0);
        let l = parodi();
        let u = solenoidal(&g, 50);
        let d = random(&g, Rank::Vector, 51);
        let terms = coupled_terms(&u, &d, &p, &l).unwrap();

        let v = filtered_velocity(&u, &p).unwrap();
        let a = rate_of_strain(&v).unwrap();
        let w = vorticity_skew(&v).unwrap();
        let (f, pot) = ginzburg_landau_force(&d).unwrap();
        let dir = &(&(&-&b1_transport(&u, &d, &p).unwrap()
            + &w.product(&d, crate::spectral::Product::MatVec).unwrap().dealias())
            - &a.product(&d, crate::spectral::Product::MatVec)
                .unwrap()
                .dealias()
                .scale(l.lambda2() / l.lambda1()))
            + &f.scale(1.0 / l.lambda1());
        assert!((&terms.director - &dir).max_coeff() < 1e-10 * dir.max_coeff());
        assert!((terms.potential - pot).abs() < 1e-12 * pot);

        let n = n_q_substituted(&d, &a, &l).unwrap();
        let sigma = leslie_stress(&d, &a, &n, &l).unwrap();
        let vel = (&(&ericksen_force(&d).unwrap() - &b0_nonlinear(&u, &p).unwrap())
            + &sigma.divergence().unwrap())
            .leray_project()
            .unwrap()
            .dealias();
        let vel = &vel + &r0(&f, &d).unwrap().leray_project().unwrap().dealias();
        assert!((&terms.velocity - &vel).max_coeff() < 1e-9 * vel.max_coeff());
    }
}
