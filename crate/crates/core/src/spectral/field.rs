use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::grid::Grid;
use super::symbol::Symbol;
use crate::error::{Error, Result};

/// Tensorial rank of a field; vectors have `dim` components, tensors
/// `dim * dim` stored row-major (`T_ij` at `i * dim + j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
    Tensor,
}

impl Rank {
    pub fn components(self, dim: usize) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => dim,
            Rank::Tensor => dim * dim,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rank::Scalar => "scalar",
            Rank::Vector => "vector",
            Rank::Tensor => "tensor",
        })
    }
}

/// Weights used by [`SpectralField::sobolev_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormConvention {
    /// `|k|^(2s)`, mean mode excluded.
    Velocity,
    /// `(1 + |k|^2)^s`, mean mode included.
    Director,
}

/// Pointwise product variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Product {
    /// Scalar times a field of any rank (either operand may be the scalar).
    Scale,
    /// `a_i b_i` of two vectors.
    Dot,
    /// `a_i b_j` of two vectors.
    Outer,
    /// `T_ij v_j`.
    MatVec,
    /// Elementwise product of two fields of equal rank.
    Componentwise,
}

/// Fourier coefficients of a real scalar, vector or tensor field.
#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    rank: Rank,
    data: Vec<Complex64>,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("rank", &self.rank)
            .field("max_coeff", &self.max_coeff())
            .finish()
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>, rank: Rank) -> Self {
        let len = rank.components(grid.dim()) * grid.mode_count();
        SpectralField {
            grid: grid.clone(),
            rank,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Wraps raw coefficients (component-major).
    pub fn from_coeffs(grid: &Arc<Grid>, rank: Rank, data: Vec<Complex64>) -> Result<Self> {
        let expected = rank.components(grid.dim()) * grid.mode_count();
        if data.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("spectral coefficients"));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            rank,
            data,
        })
    }

    /// Forward transform of real samples on the base lattice, components
    /// outermost and points in row-major order.
    pub fn from_physical(grid: &Arc<Grid>, rank: Rank, values: &[f64]) -> Result<Self> {
        let npts = grid.mode_count();
        let ncomp = rank.components(grid.dim());
        if values.len() != ncomp * npts {
            return Err(Error::SizeMismatch {
                expected: ncomp * npts,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("physical samples"));
        }
        let comps: Vec<&[f64]> = values.chunks(npts).collect();
        let spec = grid.from_physical(&comps);
        Ok(Self::assemble(grid, rank, spec))
    }

    /// Samples `f(x)` at every base-lattice point; `f` fills one value per
    /// component.
    pub fn from_fn<F>(grid: &Arc<Grid>, rank: Rank, f: F) -> Self
    where
        F: Fn([f64; 3], &mut [f64]),
    {
        let npts = grid.mode_count();
        let ncomp = rank.components(grid.dim());
        let mut values = vec![0.0; ncomp * npts];
        let mut buf = vec![0.0; ncomp];
        for p in 0..npts {
            buf.iter_mut().for_each(|b| *b = 0.0);
            f(grid.point(p), &mut buf);
            for c in 0..ncomp {
                values[c * npts + p] = buf[c];
            }
        }
        Self::from_physical(grid, rank, &values).expect("sampled function must be finite")
    }

    pub(crate) fn assemble(grid: &Arc<Grid>, rank: Rank, comps: Vec<Vec<Complex64>>) -> Self {
        debug_assert_eq!(comps.len(), rank.components(grid.dim()));
        let mut data = Vec::with_capacity(comps.len() * grid.mode_count());
        for c in comps {
            data.extend(c);
        }
        SpectralField {
            grid: grid.clone(),
            rank,
            data,
        }
    }

    /// Builds a field from samples on the padded lattice, truncating back to
    /// the base spectrum.
    pub fn from_padded(grid: &Arc<Grid>, rank: Rank, comps: &[Vec<f64>]) -> Self {
        let refs: Vec<&[f64]> = comps.iter().map(|c| c.as_slice()).collect();
        Self::assemble(grid, rank, grid.from_padded(&refs))
    }

    /// Stacks scalar fields into a vector or tensor.
    pub fn stack(parts: &[SpectralField], rank: Rank) -> Result<Self> {
        let grid = parts
            .first()
            .map(|p| p.grid.clone())
            .ok_or_else(|| Error::InvalidParameter("cannot stack zero fields".into()))?;
        let expected = rank.components(grid.dim());
        if parts.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: parts.len(),
            });
        }
        let mut data = Vec::with_capacity(expected * grid.mode_count());
        for p in parts {
            if p.rank != Rank::Scalar {
                return Err(Error::WrongRank {
                    expected: Rank::Scalar,
                    found: p.rank,
                });
            }
            if !Arc::ptr_eq(&p.grid, &grid) {
                return Err(Error::GridMismatch);
            }
            data.extend_from_slice(&p.data);
        }
        Ok(SpectralField { grid, rank, data })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn n_components(&self) -> usize {
        self.rank.components(self.grid.dim())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.mode_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.mode_count();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn components(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.grid.mode_count())
    }

    /// One component as a scalar field.
    pub fn component_field(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            rank: Rank::Scalar,
            data: self.component(c).to_vec(),
        }
    }

    /// Same coefficients attached to another grid of identical shape (for
    /// instance one with a different product padding).
    pub fn regrid(&self, grid: &Arc<Grid>) -> Result<Self> {
        if !self.grid.same_shape(grid) {
            return Err(Error::GridMismatch);
        }
        Ok(SpectralField {
            grid: grid.clone(),
            rank: self.rank,
            data: self.data.clone(),
        })
    }

    /// Inverse transform onto the base lattice, components outermost.
    pub fn to_physical(&self) -> Vec<f64> {
        self.physical_components().concat()
    }

    pub fn physical_components(&self) -> Vec<Vec<f64>> {
        let comps: Vec<&[Complex64]> = self.components().collect();
        self.grid.to_physical(&comps)
    }

    /// Samples on the padded product lattice.
    pub fn padded_components(&self) -> Vec<Vec<f64>> {
        let comps: Vec<&[Complex64]> = self.components().collect();
        self.grid.to_padded(&comps)
    }

    fn map_modes<F>(&self, rank: Rank, f: F) -> SpectralField
    where
        F: Fn(usize, usize, Complex64) -> Complex64,
    {
        let n = self.grid.mode_count();
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, &z)| f(i / n, i % n, z))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            rank,
            data,
        }
    }

    fn require(&self, rank: Rank) -> Result<()> {
        if self.rank != rank {
            return Err(Error::WrongRank {
                expected: rank,
                found: self.rank,
            });
        }
        Ok(())
    }

    fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Multiplier `i k_axis` for one mode; zero on Nyquist modes so that real
    /// fields stay real.
    fn ik(&self, idx: usize, axis: usize) -> Complex64 {
        if self.grid.is_nyquist(idx) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.grid.wavenumber(idx)[axis])
    }

    /// Partial derivative along `axis`, componentwise.
    pub fn derivative(&self, axis: usize) -> Result<SpectralField> {
        if axis >= self.grid.dim() {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.grid.dim(),
            });
        }
        Ok(self.map_modes(self.rank, |_, idx, z| z * self.ik(idx, axis)))
    }

    /// Scalar -> vector `d_i f`; vector -> tensor `(grad v)_ij = d_j v_i`.
    pub fn gradient(&self) -> Result<SpectralField> {
        let dim = self.grid.dim();
        let n = self.grid.mode_count();
        let (rank, ncomp) = match self.rank {
            Rank::Scalar => (Rank::Vector, 1),
            Rank::Vector => (Rank::Tensor, dim),
            Rank::Tensor => {
                return Err(Error::WrongRank {
                    expected: Rank::Vector,
                    found: Rank::Tensor,
                })
            }
        };
        let mut out = SpectralField::zeros(&self.grid, rank);
        for i in 0..ncomp {
            let src = self.component(i);
            for j in 0..dim {
                let dst = &mut out.data[(i * dim + j) * n..(i * dim + j + 1) * n];
                for idx in 0..n {
                    dst[idx] = src[idx] * self.ik(idx, j);
                }
            }
        }
        Ok(out)
    }

    /// Vector -> scalar `d_i v_i`; tensor -> vector `d_j T_ij` (row-wise).
    pub fn divergence(&self) -> Result<SpectralField> {
        let dim = self.grid.dim();
        let n = self.grid.mode_count();
        let (rank, rows) = match self.rank {
            Rank::Vector => (Rank::Scalar, 1),
            Rank::Tensor => (Rank::Vector, dim),
            Rank::Scalar => {
                return Err(Error::WrongRank {
                    expected: Rank::Vector,
                    found: Rank::Scalar,
                })
            }
        };
        let mut out = SpectralField::zeros(&self.grid, rank);
        for i in 0..rows {
            for j in 0..dim {
                let src = self.component(i * dim + j);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for idx in 0..n {
                    dst[idx] += src[idx] * self.ik(idx, j);
                }
            }
        }
        Ok(out)
    }

    pub fn laplacian(&self) -> SpectralField {
        let k2 = self.grid.k2();
        self.map_modes(self.rank, |_, idx, z| -z * k2[idx])
    }

    /// L2-orthogonal projection onto mean-zero divergence-free fields:
    /// `I - k k^T / |k|^2` per mode. Mean and Nyquist modes are zeroed.
    pub fn leray_project(&self) -> Result<SpectralField> {
        self.require(Rank::Vector)?;
        let dim = self.grid.dim();
        let n = self.grid.mode_count();
        let mut out = SpectralField::zeros(&self.grid, Rank::Vector);
        let k2 = self.grid.k2();
        for idx in 0..n {
            if k2[idx] == 0.0 || self.grid.is_nyquist(idx) {
                continue;
            }
            let k = self.grid.wavenumber(idx);
            let mut kdotu = Complex64::new(0.0, 0.0);
            for a in 0..dim {
                kdotu += self.data[a * n + idx] * k[a];
            }
            for a in 0..dim {
                out.data[a * n + idx] = self.data[a * n + idx] - kdotu * (k[a] / k2[idx]);
            }
        }
        Ok(out)
    }

    /// Applies a diagonal Fourier multiplier.
    pub fn apply(&self, symbol: Symbol) -> Result<SpectralField> {
        if symbol.needs_zero_mean() {
            let mean = self.mean_norm();
            if mean > 0.0 {
                return Err(Error::NonzeroMean { mean });
            }
        }
        let k2 = self.grid.k2();
        Ok(self.map_modes(self.rank, |_, idx, z| z * symbol.eval(k2[idx])))
    }

    /// Sobolev norm `||f||_s` scaled so that `s = 0` equals the L2 norm.
    pub fn sobolev_norm(&self, s: f64, convention: NormConvention) -> Result<f64> {
        let k2 = self.grid.k2();
        let n = self.grid.mode_count();
        if convention == NormConvention::Velocity && s < 0.0 {
            let mean = self.mean_norm();
            if mean > 0.0 {
                return Err(Error::NonzeroMean { mean });
            }
        }
        let weights: Vec<f64> = k2
            .iter()
            .map(|&q| match convention {
                NormConvention::Velocity => {
                    if q == 0.0 {
                        0.0
                    } else {
                        q.powf(s)
                    }
                }
                NormConvention::Director => (1.0 + q).powf(s),
            })
            .collect();
        let sum: f64 = self
            .data
            .iter()
            .enumerate()
            .map(|(i, z)| weights[i % n] * z.norm_sqr())
            .sum();
        Ok((self.grid.volume() * sum).sqrt())
    }

    /// `int f . g dx` via Parseval.
    pub fn inner_product(&self, other: &SpectralField) -> Result<f64> {
        self.same_grid(other)?;
        if self.rank != other.rank {
            return Err(Error::IncompatibleRanks {
                left: self.rank,
                right: other.rank,
                op: "inner product",
            });
        }
        let sum: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        Ok(self.grid.volume() * sum)
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        (self.grid.volume() * sum).sqrt()
    }

    /// Zeroes every mode with some `|k_axis| > n/3`.
    pub fn dealias(&self) -> SpectralField {
        let zero = Complex64::new(0.0, 0.0);
        self.map_modes(self.rank, |_, idx, z| if self.grid.in_band(idx) { z } else { zero })
    }

    /// Pointwise product evaluated on the padded lattice and truncated back
    /// to the base spectrum.
    pub fn product(&self, other: &SpectralField, kind: Product) -> Result<SpectralField> {
        self.same_grid(other)?;
        let dim = self.grid.dim();
        let incompatible = || Error::IncompatibleRanks {
            left: self.rank,
            right: other.rank,
            op: "pointwise product",
        };
        let out_rank = match kind {
            Product::Scale => match (self.rank, other.rank) {
                (Rank::Scalar, r) | (r, Rank::Scalar) => r,
                _ => return Err(incompatible()),
            },
            Product::Dot if self.rank == Rank::Vector && other.rank == Rank::Vector => Rank::Scalar,
            Product::Outer if self.rank == Rank::Vector && other.rank == Rank::Vector => Rank::Tensor,
            Product::MatVec if self.rank == Rank::Tensor && other.rank == Rank::Vector => Rank::Vector,
            Product::Componentwise if self.rank == other.rank => self.rank,
            _ => return Err(incompatible()),
        };
        let a = self.padded_components();
        let b = other.padded_components();
        let npts = self.grid.padded_point_count();
        let ncomp = out_rank.components(dim);
        let mut out = vec![vec![0.0; npts]; ncomp];
        match kind {
            Product::Scale => {
                let (s, f) = if self.rank == Rank::Scalar { (&a, &b) } else { (&b, &a) };
                for (c, o) in out.iter_mut().enumerate() {
                    for p in 0..npts {
                        o[p] = s[0][p] * f[c][p];
                    }
                }
            }
            Product::Dot => {
                for i in 0..dim {
                    for p in 0..npts {
                        out[0][p] += a[i][p] * b[i][p];
                    }
                }
            }
            Product::Outer => {
                for i in 0..dim {
                    for j in 0..dim {
                        for p in 0..npts {
                            out[i * dim + j][p] = a[i][p] * b[j][p];
                        }
                    }
                }
            }
            Product::MatVec => {
                for i in 0..dim {
                    for j in 0..dim {
                        for p in 0..npts {
                            out[i][p] += a[i * dim + j][p] * b[j][p];
                        }
                    }
                }
            }
            Product::Componentwise => {
                for c in 0..ncomp {
                    for p in 0..npts {
                        out[c][p] = a[c][p] * b[c][p];
                    }
                }
            }
        }
        Ok(SpectralField::from_padded(&self.grid, out_rank, &out))
    }

    /// Coefficient of the mean mode of component `c`.
    pub fn mean(&self, c: usize) -> Complex64 {
        self.component(c)[0]
    }

    /// Euclidean norm of the mean-mode coefficients over all components.
    pub fn mean_norm(&self) -> f64 {
        (0..self.n_components())
            .map(|c| self.mean(c).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise Euclidean norm over the base lattice.
    pub fn max_abs(&self) -> f64 {
        let comps = self.physical_components();
        let npts = self.grid.mode_count();
        (0..npts)
            .map(|p| comps.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest deviation from `coeff(-k) = conj(coeff(k))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for comp in self.components() {
            for (idx, z) in comp.iter().enumerate() {
                let neg = self.grid.negated_index(idx);
                worst = worst.max((z - comp[neg].conj()).norm());
            }
        }
        worst
    }

    /// Coefficients of the real part of the represented function,
    /// `(c(k) + conj c(-k)) / 2`; restores conjugate symmetry of arbitrary
    /// coefficient data.
    pub fn real_part(&self) -> SpectralField {
        let n = self.grid.mode_count();
        self.map_modes(self.rank, |c, idx, z| {
            let neg = self.data[c * n + self.grid.negated_index(idx)];
            (z + neg.conj()) * 0.5
        })
    }

    /// Multiplies every component by a real per-mode factor.
    pub fn scale_modes(&self, factors: &[f64]) -> SpectralField {
        assert_eq!(factors.len(), self.grid.mode_count(), "one factor per mode");
        self.map_modes(self.rank, |_, idx, z| z * factors[idx])
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        self.map_modes(self.rank, |_, _, z| z * s)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> SpectralField {
        self.assert_compatible(other);
        SpectralField {
            grid: self.grid.clone(),
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b * s).collect(),
        }
    }

    fn assert_compatible(&self, other: &SpectralField) {
        assert!(
            Arc::ptr_eq(&self.grid, &other.grid) && self.rank == other.rank,
            "arithmetic on fields with different grids or ranks"
        );
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::Padding;

    fn grid2(n: usize) -> Arc<Grid> {
        Grid::new(2, n, 2.0 * PI).unwrap()
    }

    fn coeff_at(f: &SpectralField, c: usize, k: [i64; 2]) -> Complex64 {
        let g = f.grid();
        let idx = (0..g.mode_count())
            .find(|&i| {
                let w = g.integer_wavenumber(i);
                w[0] == k[0] && w[1] == k[1]
            })
            .unwrap();
        f.component(c)[idx]
    }

    #[test]
    fn cosine_coefficients() {
        let g = grid2(8);
        let f = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = x[0].cos());
        for idx in 0..g.mode_count() {
            let k = g.integer_wavenumber(idx);
            let z = f.component(0)[idx];
            if k[0].abs() == 1 && k[1] == 0 {
                assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            } else {
                assert!(z.norm() < 1e-15, "k = {k:?}, z = {z}");
            }
        }
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = grid2(8);
        let f = SpectralField::from_physical(&g, Rank::Vector, &vec![0.0; 128]).unwrap();
        assert_eq!(f.max_coeff(), 0.0);
    }

    #[test]
    fn transform_errors() {
        let g = grid2(8);
        assert!(matches!(
            SpectralField::from_physical(&g, Rank::Scalar, &[0.0; 10]),
            Err(Error::SizeMismatch { .. })
        ));
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert!(matches!(
            SpectralField::from_physical(&g, Rank::Scalar, &v),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn derivatives_of_trig_functions() {
        let g = grid2(16);
        let f = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = x[0].cos());
        let df = f.derivative(0).unwrap();
        let expect = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = -x[0].sin());
        assert!((&df - &expect).max_coeff() < 1e-15);

        let h = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = (2.0 * x[1]).sin());
        let dh = h.derivative(1).unwrap();
        let expect = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = 2.0 * (2.0 * x[1]).cos());
        assert!((&dh - &expect).max_coeff() < 1e-14);

        let c = SpectralField::from_fn(&g, Rank::Scalar, |_, v| v[0] = 3.0);
        assert!(c.derivative(1).unwrap().max_coeff() == 0.0);
        assert!(matches!(c.derivative(2), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn leray_examples() {
        let g = grid2(8);
        // single mode k = (1, 0) with amplitude parallel to k
        let f = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[0] = x[0].cos());
        assert!(f.leray_project().unwrap().max_coeff() < 1e-16);

        let grad = SpectralField::from_fn(&g, Rank::Vector, |x, v| {
            let c = (x[0] + x[1]).cos();
            v[0] = c;
            v[1] = c;
        });
        assert!(grad.leray_project().unwrap().max_coeff() < 1e-15);

        let tg = SpectralField::from_fn(&g, Rank::Vector, |x, v| {
            v[0] = x[0].sin() * x[1].cos();
            v[1] = -x[0].cos() * x[1].sin();
        });
        assert!((&tg.leray_project().unwrap() - &tg).max_coeff() < 1e-15);

        let s = SpectralField::zeros(&g, Rank::Scalar);
        assert!(matches!(s.leray_project(), Err(Error::WrongRank { .. })));
    }

    #[test]
    fn multiplier_mean_guard() {
        let g = grid2(8);
        let f = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = 1.0 + x[0].cos());
        assert!(matches!(
            f.apply(Symbol::LambdaPow(-1.0)),
            Err(Error::NonzeroMean { .. })
        ));
        assert!(f.apply(Symbol::LambdaPow(1.0)).is_ok());
    }

    #[test]
    fn helmholtz_factor_at_unit_mode() {
        let g = grid2(8);
        let f = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = x[0].cos());
        let h = f.apply(Symbol::Helmholtz { exponent: 1.0, alpha: 1.0 }).unwrap();
        assert!((coeff_at(&h, 0, [1, 0]) - Complex64::new(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sobolev_examples() {
        let g = grid2(8);
        let f = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[1] = x[0].cos());
        let n0 = f.sobolev_norm(0.0, NormConvention::Velocity).unwrap();
        assert!((n0 * n0 - 2.0 * PI * PI).abs() < 1e-12);

        let z = SpectralField::zeros(&g, Rank::Vector);
        for s in [-1.0, 0.0, 0.5, 2.0] {
            assert_eq!(z.sobolev_norm(s, NormConvention::Velocity).unwrap(), 0.0);
            assert_eq!(z.sobolev_norm(s, NormConvention::Director).unwrap(), 0.0);
        }

        let h = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = (2.0 * x[1]).cos());
        let r = h.sobolev_norm(1.0, NormConvention::Velocity).unwrap()
            / h.sobolev_norm(0.0, NormConvention::Velocity).unwrap();
        assert!((r - 2.0).abs() < 1e-14);

        let m = SpectralField::from_fn(&g, Rank::Scalar, |_, v| v[0] = 1.0);
        assert!(m.sobolev_norm(-1.0, NormConvention::Velocity).is_err());
        assert!(m.sobolev_norm(-1.0, NormConvention::Director).is_ok());
    }

    #[test]
    fn inner_product_examples() {
        let g = grid2(8);
        let c = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = x[0].cos());
        let s = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = x[0].sin());
        assert!(c.inner_product(&s).unwrap().abs() < 1e-14);
        assert!((c.inner_product(&c).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        let vf = SpectralField::zeros(&g, Rank::Vector);
        assert!(c.inner_product(&vf).is_err());
    }

    #[test]
    fn dealias_examples() {
        let g = grid2(12);
        let f = SpectralField::from_fn(&g, Rank::Scalar, |x, v| {
            v[0] = (5.0 * x[0]).cos() + (x[0] + x[1]).cos()
        });
        let d = f.dealias();
        assert!(coeff_at(&d, 0, [5, 0]).norm() == 0.0);
        assert!((coeff_at(&d, 0, [1, 1]) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(d.dealias().coeffs(), d.coeffs());
    }

    #[test]
    fn product_to_sum() {
        let g = grid2(8);
        let c = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = x[0].cos());
        let p = c.product(&c, Product::Componentwise).unwrap();
        let expect = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = 0.5 + 0.5 * (2.0 * x[0]).cos());
        assert!((&p - &expect).max_coeff() < 1e-15);
        let z = SpectralField::zeros(&g, Rank::Scalar);
        assert_eq!(c.product(&z, Product::Componentwise).unwrap().max_coeff(), 0.0);
    }

    #[test]
    fn padding_removes_aliasing_of_k6() {
        // cos(3x)^2 = 1/2 + cos(6x)/2; on 8 points cos(6x) aliases onto k = 2.
        let padded = grid2(8);
        let plain = Grid::with_padding(2, 8, 2.0 * PI, Padding::None).unwrap();
        let f = SpectralField::from_fn(&padded, Rank::Scalar, |x, v| v[0] = (3.0 * x[0]).cos());
        let good = f.product(&f, Product::Componentwise).unwrap();
        let f_plain = f.regrid(&plain).unwrap();
        let bad = f_plain.product(&f_plain, Product::Componentwise).unwrap();

        let half = Complex64::new(0.5, 0.0);
        assert!((coeff_at(&good, 0, [0, 0]) - half).norm() < 1e-15);
        assert!((coeff_at(&bad, 0, [0, 0]) - half).norm() < 1e-15);
        for k in [[2, 0], [-2, 0]] {
            assert!(coeff_at(&good, 0, k).norm() < 1e-15);
            assert!((coeff_at(&bad, 0, k) - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        }
        let diff = &good - &bad.regrid(&padded).unwrap();
        for idx in 0..padded.mode_count() {
            let k = padded.integer_wavenumber(idx);
            if k[1] == 0 && k[0].abs() == 2 {
                continue;
            }
            assert!(diff.component(0)[idx].norm() < 1e-15, "unexpected difference at {k:?}");
        }
    }

    #[test]
    fn product_rank_rules() {
        let g = grid2(8);
        let s = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = x[0].cos());
        let v = SpectralField::from_fn(&g, Rank::Vector, |x, v| {
            v[0] = x[1].sin();
            v[1] = 1.0;
        });
        assert_eq!(s.product(&v, Product::Scale).unwrap().rank(), Rank::Vector);
        assert_eq!(v.product(&s, Product::Scale).unwrap().rank(), Rank::Vector);
        assert_eq!(v.product(&v, Product::Dot).unwrap().rank(), Rank::Scalar);
        let t = v.product(&v, Product::Outer).unwrap();
        assert_eq!(t.rank(), Rank::Tensor);
        assert_eq!(t.product(&v, Product::MatVec).unwrap().rank(), Rank::Vector);
        assert!(v.product(&v, Product::Scale).is_err());
        assert!(s.product(&v, Product::Dot).is_err());
    }

    #[test]
    fn gradient_and_divergence_conventions() {
        let g = grid2(8);
        let v = SpectralField::from_fn(&g, Rank::Vector, |x, v| v[0] = x[1].sin());
        let grad = v.gradient().unwrap();
        // (grad v)_01 = d_y v_0 = cos y; (grad v)_10 = d_x v_1 = 0
        let expect = SpectralField::from_fn(&g, Rank::Scalar, |x, v| v[0] = x[1].cos());
        assert!((&grad.component_field(1) - &expect).max_coeff() < 1e-15);
        assert!(grad.component_field(2).max_coeff() < 1e-15);

        let t = SpectralField::from_fn(&g, Rank::Tensor, |x, v| {
            v[1] = x[1].sin(); // T_01
            v[2] = x[0].cos(); // T_10
        });
        let div = t.divergence().unwrap();
        let expect = SpectralField::from_fn(&g, Rank::Vector, |x, v| {
            v[0] = x[1].cos();
            v[1] = -x[0].sin();
        });
        assert!((&div - &expect).max_coeff() < 1e-15);
    }
}
