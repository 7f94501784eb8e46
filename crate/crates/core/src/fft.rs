//! Multidimensional complex FFT on row-major arrays.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

const TILE: usize = 16;

pub struct FftNd {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("dims", &self.dims).finish()
    }
}

impl FftNd {
    pub fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { dims: dims.to_vec(), forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Unnormalized transform with kernel e^{-i k x}.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward, None);
    }

    /// Unnormalized transform with kernel e^{+i k x}.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse, None);
    }

    /// Inverse transform of data that vanishes outside the index box
    /// `support[0] × … × support[r−1]`; lines that are zero before their
    /// pass are skipped. Indices are array positions (already wrapped).
    pub fn inverse_pruned(&self, data: &mut [Complex64], support: &[Vec<usize>]) {
        assert_eq!(support.len(), self.dims.len());
        self.run(data, &self.inverse, Some(support));
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>], support: Option<&[Vec<usize>]>) {
        assert_eq!(data.len(), self.len());
        let total = data.len();
        let scratch_len = plans.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        let mut lines: Vec<Complex64> = Vec::new();
        let rank = self.dims.len();
        for axis in (0..rank).rev() {
            let n = self.dims[axis];
            let stride: usize = self.dims[axis + 1..].iter().product();
            let plan = &plans[axis];
            // outer blocks: multi-indices over the axes before this one
            let outers: Vec<usize> = match support {
                None => (0..total / (n * stride)).collect(),
                Some(sup) => sup[..axis].iter().zip(&self.dims[..axis]).fold(vec![0], |acc, (set, &d)| {
                    acc.iter().flat_map(|&o| set.iter().map(move |&i| o * d + i)).collect()
                }),
            };
            if stride == 1 {
                if support.is_none() {
                    plan.process_with_scratch(data, &mut scratch);
                } else {
                    for &o in &outers {
                        plan.process_with_scratch(&mut data[o * n..(o + 1) * n], &mut scratch);
                    }
                }
                continue;
            }
            lines.resize(outers.len() * n * stride, Complex64::new(0.0, 0.0));
            // tiled so both sides of the transpose stay in cache
            for (q, &o) in outers.iter().enumerate() {
                let base = o * n * stride;
                for i0 in (0..stride).step_by(TILE) {
                    let i1 = (i0 + TILE).min(stride);
                    for j in 0..n {
                        let row = base + j * stride;
                        for i in i0..i1 {
                            lines[(q * stride + i) * n + j] = data[row + i];
                        }
                    }
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for (q, &o) in outers.iter().enumerate() {
                let base = o * n * stride;
                for i0 in (0..stride).step_by(TILE) {
                    let i1 = (i0 + TILE).min(stride);
                    for j in 0..n {
                        let row = base + j * stride;
                        for i in i0..i1 {
                            data[row + i] = lines[(q * stride + i) * n + j];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(dims: &[usize], data: &[Complex64]) -> Vec<Complex64> {
        let total: usize = dims.iter().product();
        let idx = |mut f: usize| {
            let mut v = vec![0; dims.len()];
            for a in (0..dims.len()).rev() {
                v[a] = f % dims[a];
                f /= dims[a];
            }
            v
        };
        (0..total)
            .map(|k| {
                let kv = idx(k);
                (0..total)
                    .map(|x| {
                        let xv = idx(x);
                        let ph: f64 = (0..dims.len())
                            .map(|a| -2.0 * std::f64::consts::PI * (kv[a] * xv[a]) as f64 / dims[a] as f64)
                            .sum();
                        data[x] * Complex64::from_polar(1.0, ph)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_3d_and_4d() {
        for dims in [vec![4usize, 2, 8], vec![2, 4, 4, 2]] {
            let total: usize = dims.iter().product();
            let data: Vec<Complex64> =
                (0..total).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos())).collect();
            let mut fast = data.clone();
            let plan = FftNd::new(&dims);
            plan.forward(&mut fast);
            let slow = naive_dft(&dims, &data);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
            plan.inverse(&mut fast);
            for (a, b) in fast.iter().zip(&data) {
                assert!((a / total as f64 - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn pruned_inverse_matches_full() {
        let dims = [6usize, 5, 4, 3];
        let support = vec![vec![0, 1, 5], vec![0, 4], vec![2], vec![0, 1, 2]];
        let plan = FftNd::new(&dims);
        let mut data = vec![Complex64::new(0.0, 0.0); plan.len()];
        for (n, &a) in support[0].iter().enumerate() {
            for &b in &support[1] {
                for &c in &support[2] {
                    for &d in &support[3] {
                        data[((a * 5 + b) * 4 + c) * 3 + d] =
                            Complex64::new(n as f64 + 0.3 * b as f64, c as f64 - 0.7 * d as f64);
                    }
                }
            }
        }
        let mut full = data.clone();
        plan.inverse(&mut full);
        plan.inverse_pruned(&mut data, &support);
        for (a, b) in full.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
