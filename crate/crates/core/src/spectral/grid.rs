//! Periodic grids and the FFT machinery behind them.
//!
//! A [`Grid`] describes the torus `[0, L)^dim` sampled with `n` points per
//! axis. Every grid carries two lattices: the base lattice of size `n`, on
//! which spectral coefficients live, and a padded lattice of size `m >= n`
//! used to evaluate nonlinear products. Coefficients follow the convention
//! `f(x) = sum_k f_k exp(i k.x)`, so the forward transform divides by the
//! number of points.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Resolution of the lattice used for pointwise products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Padding {
    /// Products on the base lattice (aliased; used for comparisons only).
    None,
    /// 3/2 padding: quadratic products are alias-free.
    #[default]
    ThreeHalves,
    /// 3x padding: alias-free up to products of eight band-limited factors.
    Triple,
}

impl Padding {
    pub fn padded_size(self, n: usize) -> usize {
        match self {
            Padding::None => n,
            Padding::ThreeHalves => 3 * n / 2,
            Padding::Triple => 3 * n,
        }
    }
}

thread_local! {
    /// FFT scratch and line buffers, reused across transforms.
    static SCRATCH: RefCell<(Vec<Complex64>, Vec<Complex64>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

/// One cubic lattice with `n` points per axis and its FFT plans.
struct Lattice {
    n: usize,
    dim: usize,
    total: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Flat index of the mode `-k` for every flat index `k`.
    neg: Vec<usize>,
}

impl Lattice {
    fn new(n: usize, dim: usize, planner: &mut FftPlanner<f64>) -> Self {
        let total = n.pow(dim as u32);
        let neg = (0..total)
            .map(|idx| {
                let mut out = 0;
                let mut rem = idx;
                let mut digits = [0usize; 3];
                for a in (0..dim).rev() {
                    digits[a] = rem % n;
                    rem /= n;
                }
                for &d in digits.iter().take(dim) {
                    out = out * n + (n - d) % n;
                }
                out
            })
            .collect();
        Lattice {
            n,
            dim,
            total,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            neg,
        }
    }

    /// Unnormalized in-place multidimensional transform.
    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        SCRATCH.with(|cell| {
            let (scratch, lines) = &mut *cell.borrow_mut();
            let zero = Complex64::new(0.0, 0.0);
            scratch.resize(fft.get_inplace_scratch_len(), zero);
            lines.resize(self.total, zero);
            self.transform_with(fft.as_ref(), data, scratch, lines);
        });
    }

    fn transform_with(
        &self,
        fft: &dyn Fft<f64>,
        data: &mut [Complex64],
        scratch: &mut [Complex64],
        lines: &mut [Complex64],
    ) {
        let n = self.n;
        let lines = &mut lines[..self.total];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, scratch);
                continue;
            }
            let outer = self.total / (n * stride);
            for o in 0..outer {
                for inner in 0..stride {
                    let line = (o * stride + inner) * n;
                    let base = o * n * stride + inner;
                    for j in 0..n {
                        lines[line + j] = data[base + j * stride];
                    }
                }
            }
            fft.process_with_scratch(lines, scratch);
            for o in 0..outer {
                for inner in 0..stride {
                    let line = (o * stride + inner) * n;
                    let base = o * n * stride + inner;
                    for j in 0..n {
                        data[base + j * stride] = lines[line + j];
                    }
                }
            }
        }
    }
}

/// The periodic torus `[0, L)^dim` with `n` modes per axis.
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    padding: Padding,
    base: Lattice,
    fine: Lattice,
    kint: Vec<[i64; 3]>,
    k2: Vec<f64>,
    band: Vec<bool>,
    nyquist: Vec<bool>,
    /// Base index -> padded index with weight (Nyquist modes are split).
    pad_map: Vec<(usize, usize, f64)>,
    /// Base index -> padded index for every non-Nyquist base mode.
    trunc_map: Vec<(usize, usize)>,
    identity_synth: Vec<(usize, usize, f64)>,
    identity_analyze: Vec<(usize, usize)>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("length", &self.length)
            .field("padding", &self.padding)
            .finish()
    }
}

impl Grid {
    /// Grid with the default 3/2 product padding.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Arc<Grid>> {
        Self::with_padding(dim, n, length, Padding::default())
    }

    pub fn with_padding(dim: usize, n: usize, length: f64, padding: Padding) -> Result<Arc<Grid>> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_modes must be an even integer >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let m = padding.padded_size(n);
        let mut planner = FftPlanner::new();
        let base = Lattice::new(n, dim, &mut planner);
        let fine = Lattice::new(m, dim, &mut planner);

        let total = base.total;
        let scale = 2.0 * PI / length;
        let half = (n / 2) as i64;
        let mut kint = Vec::with_capacity(total);
        let mut k2 = Vec::with_capacity(total);
        let mut band = Vec::with_capacity(total);
        let mut nyquist = Vec::with_capacity(total);
        for idx in 0..total {
            let mut k = [0i64; 3];
            let mut rem = idx;
            for a in (0..dim).rev() {
                let i = (rem % n) as i64;
                rem /= n;
                k[a] = if i < half { i } else { i - n as i64 };
            }
            let sq: f64 = k.iter().map(|&ki| (ki as f64 * scale).powi(2)).sum();
            kint.push(k);
            k2.push(sq);
            band.push(k[..dim].iter().all(|&ki| 3 * ki.unsigned_abs() as usize <= n));
            nyquist.push(k[..dim].iter().any(|&ki| ki == -half));
        }

        let fine_index = |k: &[i64]| -> usize {
            k.iter().fold(0usize, |acc, &ki| {
                acc * m + ki.rem_euclid(m as i64) as usize
            })
        };
        let mut pad_map = Vec::with_capacity(total);
        let mut trunc_map = Vec::with_capacity(total);
        for idx in 0..total {
            let k = &kint[idx][..dim];
            if !nyquist[idx] {
                let f = fine_index(k);
                pad_map.push((idx, f, 1.0));
                trunc_map.push((idx, f));
                continue;
            }
            if m == n {
                pad_map.push((idx, fine_index(k), 1.0));
                continue;
            }
            // Split Nyquist content evenly between +n/2 and -n/2 so that the
            // padded spectrum stays conjugate symmetric.
            let axes: Vec<usize> = (0..dim).filter(|&a| k[a] == -half).collect();
            let combos = 1usize << axes.len();
            let w = 1.0 / combos as f64;
            for mask in 0..combos {
                let mut kk = [0i64; 3];
                kk[..dim].copy_from_slice(k);
                for (bit, &a) in axes.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        kk[a] = half;
                    }
                }
                pad_map.push((idx, fine_index(&kk[..dim]), w));
            }
        }

        Ok(Arc::new(Grid {
            dim,
            n,
            length,
            padding,
            base,
            fine,
            kint,
            k2,
            band,
            nyquist,
            pad_map,
            trunc_map,
            identity_synth: (0..total).map(|i| (i, i, 1.0)).collect(),
            identity_analyze: (0..total).map(|i| (i, i)).collect(),
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn padding(&self) -> Padding {
        self.padding
    }

    pub fn padded_size(&self) -> usize {
        self.fine.n
    }

    /// Number of modes (and of physical points) on the base lattice.
    pub fn mode_count(&self) -> usize {
        self.base.total
    }

    pub fn padded_point_count(&self) -> usize {
        self.fine.total
    }

    /// Measure of the torus, `L^dim`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Quadrature weight of one padded-lattice point.
    pub fn padded_weight(&self) -> f64 {
        self.volume() / self.fine.total as f64
    }

    /// Integer wavenumber of a flat mode index.
    pub fn integer_wavenumber(&self, idx: usize) -> [i64; 3] {
        self.kint[idx]
    }

    /// Physical wavenumber `k * 2 pi / L` of a flat mode index.
    pub fn wavenumber(&self, idx: usize) -> [f64; 3] {
        let s = 2.0 * PI / self.length;
        let k = self.kint[idx];
        [k[0] as f64 * s, k[1] as f64 * s, k[2] as f64 * s]
    }

    /// Squared physical wavenumber magnitudes, one per mode.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    /// Flat index of the mode `-k`.
    pub fn negated_index(&self, idx: usize) -> usize {
        self.base.neg[idx]
    }

    /// Whether a mode survives the 2/3 rule.
    pub fn in_band(&self, idx: usize) -> bool {
        self.band[idx]
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.nyquist[idx]
    }

    /// Coordinates of a base-lattice point.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        lattice_point(idx, self.n, self.dim, self.length)
    }

    /// Coordinates of a padded-lattice point.
    pub fn padded_point(&self, idx: usize) -> [f64; 3] {
        lattice_point(idx, self.fine.n, self.dim, self.length)
    }

    /// Smallest nonzero physical wavenumber magnitude, `2 pi / L`.
    pub fn k_min(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub(crate) fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n && self.length == other.length
    }

    /// Inverse transforms of real fields onto the base lattice.
    pub fn to_physical(&self, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
        synthesize(&self.base, &self.identity_synth, comps)
    }

    /// Forward transforms of real data sampled on the base lattice.
    pub fn from_physical(&self, comps: &[&[f64]]) -> Vec<Vec<Complex64>> {
        analyze(&self.base, &self.identity_analyze, self.base.total, comps)
    }

    /// Inverse transforms of real fields onto the padded lattice.
    pub fn to_padded(&self, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
        synthesize(&self.fine, &self.pad_map, comps)
    }

    /// Forward transforms of padded-lattice data, truncated back to the base
    /// spectrum. Nyquist modes of the result are zero.
    pub fn from_padded(&self, comps: &[&[f64]]) -> Vec<Vec<Complex64>> {
        analyze(&self.fine, &self.trunc_map, self.base.total, comps)
    }
}

fn lattice_point(idx: usize, n: usize, dim: usize, length: f64) -> [f64; 3] {
    let h = length / n as f64;
    let mut x = [0.0; 3];
    let mut rem = idx;
    for a in (0..dim).rev() {
        x[a] = (rem % n) as f64 * h;
        rem /= n;
    }
    x
}

/// Spectral -> physical for real fields, two at a time through one complex
/// transform.
fn synthesize(
    lattice: &Lattice,
    map: &[(usize, usize, f64)],
    comps: &[&[Complex64]],
) -> Vec<Vec<f64>> {
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(comps.len());
    let mut buf = vec![zero; lattice.total];
    for pair in comps.chunks(2) {
        buf.iter_mut().for_each(|z| *z = zero);
        for &(src, dst, w) in map {
            let mut z = pair[0][src];
            if let Some(b) = pair.get(1) {
                z += i * b[src];
            }
            buf[dst] += z * w;
        }
        lattice.transform(&mut buf, true);
        out.push(buf.iter().map(|z| z.re).collect());
        if pair.len() == 2 {
            out.push(buf.iter().map(|z| z.im).collect());
        }
    }
    out
}

/// Physical -> spectral for real data, two at a time, keeping the modes
/// listed in `map` (base index, lattice index).
fn analyze(
    lattice: &Lattice,
    map: &[(usize, usize)],
    base_total: usize,
    comps: &[&[f64]],
) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let scale = 1.0 / lattice.total as f64;
    let mut out = Vec::with_capacity(comps.len());
    let mut buf = vec![zero; lattice.total];
    for pair in comps.chunks(2) {
        for (p, z) in buf.iter_mut().enumerate() {
            let im = pair.get(1).map_or(0.0, |b| b[p]);
            *z = Complex64::new(pair[0][p], im);
        }
        lattice.transform(&mut buf, false);
        let mut a = vec![zero; base_total];
        let mut b = if pair.len() == 2 { vec![zero; base_total] } else { Vec::new() };
        for &(dst, src) in map {
            let z = buf[src] * scale;
            let zn = buf[lattice.neg[src]].conj() * scale;
            a[dst] = (z + zn) * 0.5;
            if pair.len() == 2 {
                b[dst] = Complex64::new(0.0, -0.5) * (z - zn);
            }
        }
        out.push(a);
        if pair.len() == 2 {
            out.push(b);
        }
    }
    out
}
