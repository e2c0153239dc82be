//! Multidimensional discrete Fourier transform and linear convolution.
//!
//! Transforms run axis by axis with one-dimensional FFT kernels, so a
//! transform over `N` points costs `O(N Σ log n_j)`. The forward transform is
//! unnormalized and the inverse carries the `1/N` factor.

use num_complex::Complex;
use num_traits::{Float, Zero};
use rustfft::{FftDirection, FftNum, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConvolutionError {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch(Vec<usize>, Vec<usize>),
}

/// Dense row-major array of complex values.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiArray<T> {
    dims: Vec<usize>,
    data: Vec<Complex<T>>,
}

impl<T: FftNum + Float> MultiArray<T> {
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(!dims.is_empty() && dims.iter().all(|&d| d >= 1), "dims must be non-empty and positive");
        let n = dims.iter().product();
        Self { dims: dims.to_vec(), data: vec![Complex::zero(); n] }
    }

    pub fn from_complex(dims: &[usize], data: Vec<Complex<T>>) -> Self {
        let a = Self::zeros(dims);
        assert_eq!(a.data.len(), data.len(), "data length must equal the product of dims");
        Self { dims: a.dims, data }
    }

    pub fn from_real(dims: &[usize], data: &[T]) -> Self {
        Self::from_complex(dims, data.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.data.iter().map(|c| c.re).collect()
    }

    /// Row-major offset of a multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> Complex<T> {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Complex<T>) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// Inverse of [`offset`](Self::offset).
    pub fn index_of(&self, mut offset: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for a in (0..self.dims.len()).rev() {
            idx[a] = offset % self.dims[a];
            offset /= self.dims[a];
        }
        idx
    }

    /// Copies into a larger zero array, anchored at the origin.
    pub fn zero_pad(&self, dims: &[usize]) -> Self {
        assert_eq!(dims.len(), self.dims.len());
        assert!(dims.iter().zip(&self.dims).all(|(a, b)| a >= b));
        let mut out = Self::zeros(dims);
        for off in 0..self.data.len() {
            let idx = self.index_of(off);
            let o = out.offset(&idx);
            out.data[o] = self.data[off];
        }
        out
    }

    /// Leading sub-block of the given dims.
    pub fn crop(&self, dims: &[usize]) -> Self {
        assert!(dims.iter().zip(&self.dims).all(|(a, b)| a <= b));
        let mut out = Self::zeros(dims);
        for off in 0..out.data.len() {
            let idx = out.index_of(off);
            out.data[off] = self.get(&idx);
        }
        out
    }
}

fn transform_axes<T: FftNum + Float>(a: &mut MultiArray<T>, direction: FftDirection) {
    let mut planner = FftPlanner::<T>::new();
    let dims = a.dims.clone();
    let total = a.data.len();
    let mut inner = total;
    for &n in dims.iter() {
        inner /= n;
        if n == 1 {
            continue;
        }
        let fft = planner.plan_fft(n, direction);
        let outer = total / (n * inner);
        let mut line = vec![Complex::zero(); n];
        let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            let base = o * n * inner;
            if inner == 1 {
                fft.process_with_scratch(&mut a.data[base..base + n], &mut scratch);
                continue;
            }
            for r in 0..inner {
                for k in 0..n {
                    line[k] = a.data[base + k * inner + r];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for k in 0..n {
                    a.data[base + k * inner + r] = line[k];
                }
            }
        }
    }
}

/// `f̂_k = Σ_l f_l exp(-2πi Σ_j k_j l_j / n_j)`.
pub fn dft<T: FftNum + Float>(f: &MultiArray<T>) -> MultiArray<T> {
    let mut out = f.clone();
    transform_axes(&mut out, FftDirection::Forward);
    out
}

/// Inverse of [`dft`], including the `1/N` factor.
pub fn idft<T: FftNum + Float>(g: &MultiArray<T>) -> MultiArray<T> {
    let mut out = g.clone();
    transform_axes(&mut out, FftDirection::Inverse);
    let scale = T::one() / T::from_usize(out.data.len()).unwrap();
    for c in out.data.iter_mut() {
        *c = *c * scale;
    }
    out
}

/// Smallest length `>= n` whose prime factors are 2, 3 and 5.
pub fn fast_length(n: usize) -> usize {
    let mut k = n.max(1);
    loop {
        let mut r = k;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return k;
        }
        k += 1;
    }
}

fn check_dims<T>(f: &MultiArray<T>, g: &MultiArray<T>) -> Result<(), ConvolutionError> {
    if f.dims != g.dims {
        return Err(ConvolutionError::DimensionMismatch(f.dims.clone(), g.dims.clone()));
    }
    Ok(())
}

/// Full linear convolution; the result has `2n_j - 1` points per axis.
pub fn fft_convolve<T: FftNum + Float>(f: &MultiArray<T>, g: &MultiArray<T>) -> Result<MultiArray<T>, ConvolutionError> {
    check_dims(f, g)?;
    let out_dims: Vec<usize> = f.dims.iter().map(|&n| 2 * n - 1).collect();
    let padded: Vec<usize> = out_dims.iter().map(|&n| fast_length(n)).collect();
    let ff = dft(&f.zero_pad(&padded));
    let prod = if std::ptr::eq(f, g) {
        MultiArray { dims: padded.clone(), data: ff.data.iter().map(|&a| a * a).collect() }
    } else {
        let gg = dft(&g.zero_pad(&padded));
        MultiArray { dims: padded.clone(), data: ff.data.iter().zip(&gg.data).map(|(&a, &b)| a * b).collect() }
    };
    Ok(idft(&prod).crop(&out_dims))
}

/// Direct `O(N²)` summation, used as an oracle.
pub fn naive_convolve<T: FftNum + Float>(f: &MultiArray<T>, g: &MultiArray<T>) -> Result<MultiArray<T>, ConvolutionError> {
    check_dims(f, g)?;
    let out_dims: Vec<usize> = f.dims.iter().map(|&n| 2 * n - 1).collect();
    let mut out = MultiArray::zeros(&out_dims);
    for a in 0..f.data.len() {
        if f.data[a].is_zero() {
            continue;
        }
        let ia = f.index_of(a);
        for b in 0..g.data.len() {
            let ib = g.index_of(b);
            let sum: Vec<usize> = ia.iter().zip(&ib).map(|(x, y)| x + y).collect();
            let o = out.offset(&sum);
            out.data[o] = out.data[o] + f.data[a] * g.data[b];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(dims: &[usize], v: &[f64]) -> MultiArray<f64> {
        MultiArray::from_real(dims, v)
    }

    fn rounded(a: &MultiArray<f64>) -> Vec<i64> {
        a.real_parts().iter().map(|x| x.round() as i64).collect()
    }

    #[test]
    fn dft_examples() {
        let a = dft(&real(&[2], &[1.0, 1.0]));
        assert!((a.data()[0] - Complex::new(2.0, 0.0)).norm() < 1e-12);
        assert!(a.data()[1].norm() < 1e-12);
        let d = dft(&real(&[4], &[1.0, 0.0, 0.0, 0.0]));
        assert!(d.data().iter().all(|c| (c - Complex::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn dft_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dims = [3, 4, 2];
        let v: Vec<f64> = (0..24).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = real(&dims, &v);
        let fh = dft(&f);
        for k in 0..24 {
            let kk = f.index_of(k);
            let mut acc = Complex::new(0.0, 0.0);
            for l in 0..24 {
                let ll = f.index_of(l);
                let phase: f64 = (0..3).map(|j| (kk[j] * ll[j]) as f64 / dims[j] as f64).sum();
                acc += f.data()[l] * Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * phase);
            }
            assert!((acc - fh.data()[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dims = [4, 6, 5];
        let data: Vec<Complex<f64>> =
            (0..120).map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let f = MultiArray::from_complex(&dims, data);
        let fh = dft(&f);
        let back = idft(&fh);
        for (a, b) in f.data().iter().zip(back.data()) {
            assert!((a - b).norm() < 1e-9);
        }
        let e1: f64 = f.data().iter().map(|c| c.norm_sqr()).sum();
        let e2: f64 = fh.data().iter().map(|c| c.norm_sqr()).sum::<f64>() / 120.0;
        assert!((e1 - e2).abs() < 1e-9);
    }

    #[test]
    fn convolution_examples() {
        let c = fft_convolve(&real(&[2], &[1.0, 2.0]), &real(&[2], &[3.0, 4.0])).unwrap();
        assert_eq!(rounded(&c), vec![3, 10, 8]);
        let f = real(&[3], &[5.0, -1.0, 2.0]);
        let delta = real(&[3], &[1.0, 0.0, 0.0]);
        assert_eq!(rounded(&fft_convolve(&f, &delta).unwrap()), vec![5, -1, 2, 0, 0]);
        let p = real(&[2, 2], &[1.0, 0.0, 0.0, 1.0]);
        let sq = fft_convolve(&p, &p).unwrap();
        assert_eq!(sq.dims(), &[3, 3]);
        assert_eq!(rounded(&sq), vec![1, 0, 0, 0, 2, 0, 0, 0, 1]);
        let one = naive_convolve(&real(&[1], &[1.0]), &real(&[1], &[1.0])).unwrap();
        assert_eq!(rounded(&one), vec![1]);
        let z = real(&[2, 3], &[0.0; 6]);
        assert!(naive_convolve(&z, &p.zero_pad(&[2, 3])).unwrap().real_parts().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let a = real(&[2], &[1.0, 1.0]);
        let b = real(&[3], &[1.0, 1.0, 1.0]);
        assert!(matches!(fft_convolve(&a, &b), Err(ConvolutionError::DimensionMismatch(..))));
        assert!(naive_convolve(&a, &b).is_err());
    }

    #[test]
    fn commutative_and_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = [3, 4];
        let mk = |rng: &mut ChaCha8Rng| real(&dims, &(0..12).map(|_| rng.random_range(-3..=3) as f64).collect::<Vec<_>>());
        let (f, g, h) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
        let fg = fft_convolve(&f, &g).unwrap();
        let gf = fft_convolve(&g, &f).unwrap();
        assert_eq!(rounded(&fg), rounded(&gf));
        let gh = MultiArray::from_complex(&dims, g.data().iter().zip(h.data()).map(|(a, b)| a + b).collect());
        let lhs = fft_convolve(&f, &gh).unwrap();
        let fh = fft_convolve(&f, &h).unwrap();
        for k in 0..lhs.len() {
            assert!((lhs.data()[k] - fg.data()[k] - fh.data()[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn fast_lengths() {
        assert_eq!(fast_length(7), 8);
        assert_eq!(fast_length(11), 12);
        assert_eq!(fast_length(49), 50);
        assert_eq!(fast_length(1), 1);
    }

    #[test]
    fn single_precision() {
        let a = MultiArray::<f32>::from_real(&[2], &[1.0, 2.0]);
        let b = MultiArray::<f32>::from_real(&[2], &[3.0, 4.0]);
        let c = fft_convolve(&a, &b).unwrap();
        let r: Vec<i32> = c.real_parts().iter().map(|x| x.round() as i32).collect();
        assert_eq!(r, vec![3, 10, 8]);
    }
}
