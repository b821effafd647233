//! Built-in initial-data and forcing-profile generators.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{Complex64, Grid, Rank, SpectralField};

/// Divergence-free, mean-zero velocity fields.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum VelocityInit {
    Zero,
    /// `A (sin x cos y, -cos x sin y)` (times `cos z` in 3D).
    TaylorGreen { amplitude: f64 },
    /// Random phases with coefficient magnitudes `|k|^spectrum_slope`,
    /// rescaled to root-mean-square speed `amplitude`.
    RandomSolenoidal {
        amplitude: f64,
        spectrum_slope: f64,
        seed: u64,
    },
}

/// Director fields.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum DirectorInit {
    Constant { vector: Vec<f64> },
    /// `vector` plus a smooth random perturbation whose largest pointwise
    /// magnitude is `amplitude`.
    PerturbedConstant {
        vector: Vec<f64>,
        amplitude: f64,
        seed: u64,
    },
    /// Unit vectors with smooth random orientation.
    RandomUnit { seed: u64 },
}

/// Largest integer wavenumber of the random director perturbations.
const SMOOTH_MODES: i64 = 4;

impl VelocityInit {
    pub fn build(&self, grid: &Arc<Grid>) -> Result<SpectralField> {
        match *self {
            VelocityInit::Zero => Ok(SpectralField::zeros(grid, Rank::Vector)),
            VelocityInit::TaylorGreen { amplitude } => {
                check_finite("taylor_green amplitude", amplitude)?;
                let s = 2.0 * PI / grid.length();
                let dim = grid.dim();
                let u = SpectralField::from_fn(grid, Rank::Vector, |x, v| {
                    let (a, b) = (s * x[0], s * x[1]);
                    let cz = if dim == 3 { (s * x[2]).cos() } else { 1.0 };
                    v[0] = amplitude * a.sin() * b.cos() * cz;
                    v[1] = -amplitude * a.cos() * b.sin() * cz;
                });
                Ok(u.leray_project()?.dealias())
            }
            VelocityInit::RandomSolenoidal {
                amplitude,
                spectrum_slope,
                seed,
            } => {
                check_finite("random_solenoidal amplitude", amplitude)?;
                check_finite("random_solenoidal spectrum_slope", spectrum_slope)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let k2 = grid.k2();
                let kmin2 = grid.k_min().powi(2);
                let raw = random_coeffs(grid, Rank::Vector, &mut rng, |idx| {
                    if k2[idx] == 0.0 || !grid.in_band(idx) {
                        0.0
                    } else {
                        (k2[idx] / kmin2).powf(0.5 * spectrum_slope)
                    }
                })?;
                let u = raw.real_part().leray_project()?.dealias();
                let rms = u.l2_norm() / grid.volume().sqrt();
                Ok(if rms > 0.0 { u.scale(amplitude / rms) } else { u })
            }
        }
    }
}

impl DirectorInit {
    pub fn build(&self, grid: &Arc<Grid>) -> Result<SpectralField> {
        match self {
            DirectorInit::Constant { vector } => constant(grid, vector),
            DirectorInit::PerturbedConstant {
                vector,
                amplitude,
                seed,
            } => {
                check_finite("perturbed_constant amplitude", *amplitude)?;
                let base = constant(grid, vector)?;
                let pert = smooth_random(grid, *seed, SMOOTH_MODES)?;
                let m = pert.max_abs();
                let pert = if m > 0.0 { pert.scale(amplitude / m) } else { pert };
                Ok(&base + &pert)
            }
            DirectorInit::RandomUnit { seed } => {
                // Unit vectors from smooth random angles, so the field stays
                // well resolved after dealiasing.
                let angles = smooth_random(grid, *seed, 1)?;
                let m = angles.max_abs();
                let angles = if m > 0.0 { angles.scale(0.5 * PI / m) } else { angles };
                let a = angles.physical_components();
                let n = grid.mode_count();
                let dim = grid.dim();
                let mut vals = vec![0.0; dim * n];
                for p in 0..n {
                    let phi = a[0][p];
                    if dim == 2 {
                        vals[p] = phi.cos();
                        vals[n + p] = phi.sin();
                    } else {
                        let psi = 0.5 * a[1][p];
                        vals[p] = phi.cos() * psi.cos();
                        vals[n + p] = phi.sin() * psi.cos();
                        vals[2 * n + p] = psi.sin();
                    }
                }
                Ok(SpectralField::from_physical(grid, Rank::Vector, &vals)?.dealias())
            }
        }
    }
}

fn check_finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be finite, got {v}")))
    }
}

fn constant(grid: &Arc<Grid>, vector: &[f64]) -> Result<SpectralField> {
    if vector.len() != grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "director vector has {} components, grid dimension is {}",
            vector.len(),
            grid.dim()
        )));
    }
    for &v in vector {
        check_finite("director vector component", v)?;
    }
    let mut d = SpectralField::zeros(grid, Rank::Vector);
    for (c, &v) in vector.iter().enumerate() {
        d.component_mut(c)[0] = Complex64::new(v, 0.0);
    }
    Ok(d)
}

/// Random coefficients `weight(k) (a + i b)` with `a, b` uniform in `[-1, 1)`,
/// drawn in a fixed order; not yet conjugate symmetric.
fn random_coeffs<F>(grid: &Arc<Grid>, rank: Rank, rng: &mut ChaCha8Rng, weight: F) -> Result<SpectralField>
where
    F: Fn(usize) -> f64,
{
    let n = grid.mode_count();
    let ncomp = rank.components(grid.dim());
    let mut data = Vec::with_capacity(ncomp * n);
    for _ in 0..ncomp {
        for idx in 0..n {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            data.push(Complex64::new(re, im) * weight(idx));
        }
    }
    SpectralField::from_coeffs(grid, rank, data)
}

/// Mean-zero vector field built from the wavenumbers with `|k_a| <= kmax`.
fn smooth_random(grid: &Arc<Grid>, seed: u64, kmax: i64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let f = random_coeffs(grid, Rank::Vector, &mut rng, |idx| {
        let k = grid.integer_wavenumber(idx);
        let low = k[..dim].iter().all(|ki| ki.abs() <= kmax);
        if low && grid.in_band(idx) && grid.k2()[idx] > 0.0 {
            1.0
        } else {
            0.0
        }
    })?;
    Ok(f.real_part())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<Grid> {
        Grid::new(2, 32, 2.0 * PI).unwrap()
    }

    #[test]
    fn random_velocity_is_solenoidal_and_deterministic() {
        let g = grid();
        let spec = VelocityInit::RandomSolenoidal {
            amplitude: 0.5,
            spectrum_slope: -2.0,
            seed: 7,
        };
        let u = spec.build(&g).unwrap();
        let again = spec.build(&g).unwrap();
        assert_eq!(u.coeffs(), again.coeffs());
        assert!(u.divergence().unwrap().max_coeff() < 1e-15);
        assert_eq!(u.mean_norm(), 0.0);
        assert!(u.conjugate_symmetry_defect() < 1e-15);
        let rms = u.l2_norm() / g.volume().sqrt();
        assert!((rms - 0.5).abs() < 1e-12);
        let other = VelocityInit::RandomSolenoidal {
            amplitude: 0.5,
            spectrum_slope: -2.0,
            seed: 8,
        };
        assert_ne!(other.build(&g).unwrap().coeffs(), u.coeffs());
    }

    #[test]
    fn taylor_green_is_divergence_free() {
        let g = grid();
        let u = VelocityInit::TaylorGreen { amplitude: 2.0 }.build(&g).unwrap();
        assert!((u.max_abs() - 2.0).abs() < 1e-12);
        assert!(u.divergence().unwrap().max_coeff() < 1e-15);
        let g3 = Grid::new(3, 8, 2.0 * PI).unwrap();
        let u = VelocityInit::TaylorGreen { amplitude: 1.0 }.build(&g3).unwrap();
        assert!(u.divergence().unwrap().max_coeff() < 1e-15);
    }

    #[test]
    fn director_generators() {
        let g = grid();
        let d = DirectorInit::Constant { vector: vec![0.5, 0.0] }.build(&g).unwrap();
        assert!((d.max_abs() - 0.5).abs() < 1e-15);
        assert!(DirectorInit::Constant { vector: vec![1.0] }.build(&g).is_err());

        let d = DirectorInit::PerturbedConstant {
            vector: vec![1.0, 0.0],
            amplitude: 1e-3,
            seed: 3,
        }
        .build(&g)
        .unwrap();
        let unit = DirectorInit::Constant { vector: vec![1.0, 0.0] }.build(&g).unwrap();
        assert!(((&d - &unit).max_abs() - 1e-3).abs() < 1e-15);

        let d = DirectorInit::RandomUnit { seed: 5 }.build(&g).unwrap();
        assert!(d.conjugate_symmetry_defect() < 1e-14);
        assert!((d.max_abs() - 1.0).abs() < 1e-3);
    }
}
