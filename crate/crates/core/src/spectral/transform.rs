//! Pruned 3D FFTs between a band-limited coefficient cube and a physical grid.
//!
//! Only the retained wavenumbers `|k_i| <= K_i` are ever nonzero in coefficient
//! space, so the inverse transform runs `z` FFTs only on the retained `(k1, k2)`
//! lines and `y` FFTs only on the retained `k1` rows; the forward transform
//! skips computing anything that would be discarded.
//!
//! Coefficients use the `(k1, k2, k3)` layout with `k3` fastest. Physical
//! samples inside this module use `(z, y, x)` order with `x` fastest, so the
//! horizontal work is done one cache-resident plane at a time.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

/// Index of wavenumber `k` in an FFT layout of length `n`.
#[inline]
pub(crate) fn fft_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// FFT-layout indices holding wavenumbers `0..=kmax` and `-kmax..=-1`, as two runs.
fn retained_runs(kmax: usize, n: usize) -> [(usize, usize); 2] {
    [(0, kmax + 1), (n - kmax, n)]
}

fn retained_indices(kmax: usize, n: usize) -> impl Iterator<Item = usize> {
    retained_runs(kmax, n).into_iter().flat_map(|(a, b)| a..b)
}

struct AxisPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl AxisPlans {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }
}

/// FFT plans and work buffers for one physical grid of size `dims`, paired
/// with the coefficient layout of a [`Grid`].
pub struct Transform3 {
    dims: [usize; 3],
    kmax: [usize; 3],
    plans: [AxisPlans; 3],
    /// `(coefficient index, line-buffer index)` for every retained wavevector.
    scatter: Vec<(usize, usize)>,
    /// Line-buffer index of `-k` for each entry of `scatter`.
    mirror: Vec<usize>,
    /// `(i1, i2)` FFT indices of each retained horizontal wavevector, in
    /// line-buffer order.
    line_ij: Vec<(usize, usize)>,
    scratch: Vec<Complex64>,
    /// One `z` line of length `m3` per retained `(k1, k2)`.
    lines: Vec<Complex64>,
    /// One horizontal plane with `y` fastest, retained `k1` rows only.
    rows: Vec<Complex64>,
}

impl Transform3 {
    /// Transform onto the collocation grid `nx × ny × nz`.
    pub fn collocation(grid: &Grid) -> Self {
        Self::with_dims(grid, grid.dims())
    }

    /// Transform onto the product grid, large enough that quadratic products of
    /// retained modes are alias-free on the retained set.
    pub fn product(grid: &Grid) -> Self {
        Self::with_dims(grid, grid.product_dims())
    }

    fn with_dims(grid: &Grid, dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let plans = [
            AxisPlans::new(&mut planner, dims[0]),
            AxisPlans::new(&mut planner, dims[1]),
            AxisPlans::new(&mut planner, dims[2]),
        ];
        let scratch_len = plans
            .iter()
            .flat_map(|p| [p.forward.get_inplace_scratch_len(), p.inverse.get_inplace_scratch_len()])
            .max()
            .unwrap_or(0);
        let kmax = grid.kmax();
        let line_ij: Vec<(usize, usize)> = retained_indices(kmax[0], dims[0])
            .flat_map(|i1| retained_indices(kmax[1], dims[1]).map(move |i2| (i1, i2)))
            .collect();
        let n2 = 2 * kmax[1] + 1;
        // position of FFT index i2 among the retained k2 indices
        let slot2 = |i2: usize| if i2 <= kmax[1] { i2 } else { i2 + n2 - dims[1] };
        let slot1 = |i1: usize| if i1 <= kmax[0] { i1 } else { i1 + 2 * kmax[0] + 1 - dims[0] };
        let line_of = |k1: i64, k2: i64| {
            slot1(fft_index(k1, dims[0])) * n2 + slot2(fft_index(k2, dims[1]))
        };
        let m3 = dims[2];
        let mut scatter = Vec::with_capacity(grid.retained_count());
        let mut mirror = Vec::with_capacity(grid.retained_count());
        for k in grid.retained() {
            let src = grid.index_of(k).expect("retained wavevector has an index");
            scatter.push((src, line_of(k.k1, k.k2) * m3 + fft_index(k.k3, m3)));
            mirror.push(line_of(-k.k1, -k.k2) * m3 + fft_index(-k.k3, m3));
        }
        let n1 = 2 * kmax[0] + 1;
        Self {
            dims,
            kmax,
            plans,
            scatter,
            mirror,
            scratch: vec![Complex64::default(); scratch_len],
            lines: vec![Complex64::default(); line_ij.len() * m3],
            rows: vec![Complex64::default(); n1 * dims[1]],
            line_ij,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical-layout index of grid point `(ix, iy, iz)`.
    #[inline]
    pub fn phys_index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.dims[1] + iy) * self.dims[0] + ix
    }

    /// Number of samples in one horizontal plane.
    pub fn plane_len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    /// Inverse transform of `a + i b` for two real fields given by their
    /// coefficients; afterwards the real part of `phys` holds `a`, the
    /// imaginary part `b`.
    pub fn inverse_pair(&mut self, a: &[Complex64], b: &[Complex64], phys: &mut Vec<Complex64>) {
        self.clear_lines();
        for &(src, dst) in &self.scatter {
            let (x, y) = (a[src], b[src]);
            self.lines[dst] = Complex64::new(x.re - y.im, x.im + y.re);
        }
        self.inverse_lines(phys);
    }

    /// Inverse transform of a single real field.
    pub fn inverse_real(&mut self, coeffs: &[Complex64], phys: &mut Vec<Complex64>) {
        self.clear_lines();
        for &(src, dst) in &self.scatter {
            self.lines[dst] = coeffs[src];
        }
        self.inverse_lines(phys);
    }

    /// Forward transform of a real field held in `phys` (imaginary parts zero),
    /// truncated to the retained set and written into coefficient layout `out`
    /// scaled by `scale / len`. Entries of `out` outside the retained set are
    /// left untouched; `phys` is overwritten.
    pub fn forward_real(&mut self, phys: &mut [Complex64], out: &mut [Complex64], scale: f64) {
        self.forward_lines(phys);
        let s = scale / self.len() as f64;
        for &(src, dst) in &self.scatter {
            out[src] = self.lines[dst] * s;
        }
    }

    /// Forward transform of two real fields packed as `a + i b` in `phys`.
    pub fn forward_pair(&mut self, phys: &mut [Complex64], a: &mut [Complex64], b: &mut [Complex64]) {
        self.forward_lines(phys);
        let scale = 0.5 / self.len() as f64;
        for (&(src, dst), &mirror) in self.scatter.iter().zip(&self.mirror) {
            let f = self.lines[dst];
            let g = self.lines[mirror].conj();
            a[src] = (f + g) * scale;
            let d = (f - g) * scale;
            // (f - conj f(-k)) / 2i
            b[src] = Complex64::new(d.im, -d.re);
        }
    }

    /// Zeroes the non-retained `k3` entries of every line.
    fn clear_lines(&mut self) {
        let m3 = self.dims[2];
        let k3 = self.kmax[2];
        for line in self.lines.chunks_exact_mut(m3) {
            line[k3 + 1..m3 - k3].fill(Complex64::default());
        }
    }

    fn inverse_lines(&mut self, phys: &mut Vec<Complex64>) {
        let [m1, m2, m3] = self.dims;
        let [k1, _, _] = self.kmax;
        let n1 = 2 * k1 + 1;
        phys.resize(m1 * m2 * m3, Complex64::default());
        let [px, py, pz] = &self.plans;
        pz.inverse.process_with_scratch(&mut self.lines, &mut self.scratch);
        for (iz, plane) in phys.chunks_exact_mut(m1 * m2).enumerate() {
            self.rows.fill(Complex64::default());
            // gather retained (k1, k2) at this height into rows, y fastest
            for (r, &(i1, i2)) in self.line_ij.iter().enumerate() {
                let s1 = if i1 <= k1 { i1 } else { i1 + n1 - m1 };
                self.rows[s1 * m2 + i2] = self.lines[r * m3 + iz];
            }
            py.inverse.process_with_scratch(&mut self.rows, &mut self.scratch);
            plane.fill(Complex64::default());
            for (s1, row) in self.rows.chunks_exact(m2).enumerate() {
                let i1 = if s1 <= k1 { s1 } else { s1 + m1 - n1 };
                for (iy, v) in row.iter().enumerate() {
                    plane[iy * m1 + i1] = *v;
                }
            }
            px.inverse.process_with_scratch(plane, &mut self.scratch);
        }
    }

    fn forward_lines(&mut self, phys: &mut [Complex64]) {
        let [m1, m2, m3] = self.dims;
        let [k1, _, _] = self.kmax;
        let n1 = 2 * k1 + 1;
        let [px, py, pz] = &self.plans;
        for (iz, plane) in phys.chunks_exact_mut(m1 * m2).enumerate() {
            px.forward.process_with_scratch(plane, &mut self.scratch);
            for (s1, row) in self.rows.chunks_exact_mut(m2).enumerate() {
                let i1 = if s1 <= k1 { s1 } else { s1 + m1 - n1 };
                for (iy, v) in row.iter_mut().enumerate() {
                    *v = plane[iy * m1 + i1];
                }
            }
            py.forward.process_with_scratch(&mut self.rows, &mut self.scratch);
            for (r, &(i1, i2)) in self.line_ij.iter().enumerate() {
                let s1 = if i1 <= k1 { i1 } else { i1 + n1 - m1 };
                self.lines[r * m3 + iz] = self.rows[s1 * m2 + i2];
            }
        }
        pz.forward.process_with_scratch(&mut self.lines, &mut self.scratch);
    }
}
