//! Dense N-way tensors, mode-m unfolding/folding, and observation masks.
//!
//! Entries are linearized first-index-fastest: the flat position of
//! `(i_1, ..., i_N)` (zero-based) is `i_1 + i_2*n_1 + i_3*n_1*n_2 + ...`.
//! For matrices the same convention means column-major storage. Mode
//! indices in the public API are 1-based (`1..=N`), matching the usual
//! matricization convention; entry indices are 0-based.

use crate::error::{Result, TenrecError};

/// Dense real N-way tensor with explicit shape, `N >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Dense real matrix in column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// The set of observed entry positions and its complement, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMask {
    shape: Vec<usize>,
    observed: Vec<bool>,
    count: usize,
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.len() < 2 {
        return Err(TenrecError::InvalidShape(format!(
            "tensor order must be >= 2, got {}",
            shape.len()
        )));
    }
    if shape.iter().any(|&n| n == 0) {
        return Err(TenrecError::InvalidShape(format!(
            "all dimensions must be >= 1, got {shape:?}"
        )));
    }
    Ok(())
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        validate_shape(&shape)?;
        let total: usize = shape.iter().product();
        if data.len() != total {
            return Err(TenrecError::DimensionMismatch(format!(
                "shape {shape:?} needs {total} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        validate_shape(shape)?;
        let total = shape.iter().product();
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![0.0; total],
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Tensor order N.
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    /// Total number of entries.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Flat position of a zero-based multi-index.
    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order());
        let mut pos = 0;
        let mut stride = 1;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.shape[k]);
            pos += i * stride;
            stride *= self.shape[k];
        }
        pos
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    /// Entrywise map into a new tensor.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Entrywise combination of two same-shape tensors.
    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(TenrecError::ShapeMismatch {
                expected: self.shape.clone(),
                got: other.shape.clone(),
            });
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Square root of the sum of squared entries.
    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Mode-m matricization: an `n_m x prod_{k != m} n_k` matrix where the
    /// tensor entry `(i_1, ..., i_N)` lands at row `i_m` and column
    /// `sum_{k != m} i_k * prod_{l < k, l != m} n_l` (zero-based).
    pub fn unfold(&self, mode: usize) -> Result<DenseMatrix> {
        let n = self.order();
        if mode < 1 || mode > n {
            return Err(TenrecError::ModeOutOfRange { mode, order: n });
        }
        let m = mode - 1;
        let rows = self.shape[m];
        let cols = self.len() / rows;
        let mut out = vec![0.0; self.len()];

        // Walk columns with an odometer over the non-mode dimensions; the
        // mode-m fiber at a fixed column is a stride-n_m..1 slice of `data`.
        let row_stride: usize = self.shape[..m].iter().product();
        let mut counters = vec![0usize; n];
        let mut base = 0usize; // flat offset with i_m = 0
        for col in 0..cols {
            if row_stride == 1 {
                out[col * rows..(col + 1) * rows].copy_from_slice(&self.data[base..base + rows]);
            } else {
                for r in 0..rows {
                    out[col * rows + r] = self.data[base + r * row_stride];
                }
            }
            // advance the odometer, skipping mode m
            let mut stride = 1usize;
            for (k, &nk) in self.shape.iter().enumerate() {
                if k == m {
                    stride *= nk;
                    continue;
                }
                counters[k] += 1;
                base += stride;
                if counters[k] < nk {
                    break;
                }
                counters[k] = 0;
                base -= nk * stride;
                stride *= nk;
            }
        }
        DenseMatrix::new(rows, cols, out)
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(TenrecError::InvalidShape(format!(
                "matrix dimensions must be >= 1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(TenrecError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn min_dim(&self) -> usize {
        self.rows.min(self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[c * self.rows + r]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[c * self.rows + r] = v;
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(TenrecError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// `self * other`, plain column-major triple loop.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(TenrecError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![0.0; self.rows * other.cols];
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other.data[j * other.rows + k];
                if b == 0.0 {
                    continue;
                }
                let a_col = &self.data[k * self.rows..(k + 1) * self.rows];
                let o_col = &mut out[j * self.rows..(j + 1) * self.rows];
                for (o, &a) in o_col.iter_mut().zip(a_col) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    /// Inverse of `DenseTensor::unfold`: `fold(unfold(X, m), m, shape) == X`.
    pub fn fold(&self, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
        validate_shape(shape)?;
        let n = shape.len();
        if mode < 1 || mode > n {
            return Err(TenrecError::ModeOutOfRange { mode, order: n });
        }
        let m = mode - 1;
        let total: usize = shape.iter().product();
        if self.rows != shape[m] || self.rows * self.cols != total {
            return Err(TenrecError::DimensionMismatch(format!(
                "{}x{} matrix does not fold into {shape:?} along mode {mode}",
                self.rows, self.cols
            )));
        }
        let rows = self.rows;
        let cols = self.cols;
        let row_stride: usize = shape[..m].iter().product();
        let mut out = vec![0.0; total];
        let mut counters = vec![0usize; n];
        let mut base = 0usize;
        for col in 0..cols {
            if row_stride == 1 {
                out[base..base + rows].copy_from_slice(&self.data[col * rows..(col + 1) * rows]);
            } else {
                for r in 0..rows {
                    out[base + r * row_stride] = self.data[col * rows + r];
                }
            }
            let mut stride = 1usize;
            for (k, &nk) in shape.iter().enumerate() {
                if k == m {
                    stride *= nk;
                    continue;
                }
                counters[k] += 1;
                base += stride;
                if counters[k] < nk {
                    break;
                }
                counters[k] = 0;
                base -= nk * stride;
                stride *= nk;
            }
        }
        DenseTensor::new(shape.to_vec(), out)
    }

    /// Writes the matrix as plain CSV (one line per row), for debugging.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    write!(w, ",")?;
                }
                write!(w, "{}", self.get(r, c))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

impl ObservationMask {
    pub fn new(shape: Vec<usize>, observed: Vec<bool>) -> Result<Self> {
        validate_shape(&shape)?;
        let total: usize = shape.iter().product();
        if observed.len() != total {
            return Err(TenrecError::DimensionMismatch(format!(
                "shape {shape:?} needs {total} indicators, got {}",
                observed.len()
            )));
        }
        let count = observed.iter().filter(|&&b| b).count();
        Ok(Self {
            shape,
            observed,
            count,
        })
    }

    /// Mask with every entry observed.
    pub fn full(shape: &[usize]) -> Result<Self> {
        validate_shape(shape)?;
        let total = shape.iter().product();
        Ok(Self {
            shape: shape.to_vec(),
            observed: vec![true; total],
            count: total,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// |Omega|, the number of observed entries.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn indicators(&self) -> &[bool] {
        &self.observed
    }

    pub fn is_observed(&self, flat: usize) -> bool {
        self.observed[flat]
    }

    fn check_shape(&self, x: &DenseTensor) -> Result<()> {
        if self.shape != x.shape() {
            return Err(TenrecError::ShapeMismatch {
                expected: self.shape.clone(),
                got: x.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// A_Omega: keeps observed entries, zeroes the rest.
    pub fn apply(&self, x: &DenseTensor) -> Result<DenseTensor> {
        self.check_shape(x)?;
        let data = x
            .data()
            .iter()
            .zip(&self.observed)
            .map(|(&v, &o)| if o { v } else { 0.0 })
            .collect();
        DenseTensor::new(self.shape.clone(), data)
    }

    /// A_Omega-bar: keeps missing entries, zeroes the observed ones.
    pub fn apply_complement(&self, x: &DenseTensor) -> Result<DenseTensor> {
        self.check_shape(x)?;
        let data = x
            .data()
            .iter()
            .zip(&self.observed)
            .map(|(&v, &o)| if o { 0.0 } else { v })
            .collect();
        DenseTensor::new(self.shape.clone(), data)
    }

    /// Mask as a 0/1 tensor, the form used by the on-disk container.
    pub fn to_indicator_tensor(&self) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self
                .observed
                .iter()
                .map(|&o| if o { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn from_indicator_tensor(t: &DenseTensor) -> Result<Self> {
        let mut observed = Vec::with_capacity(t.len());
        for &v in t.data() {
            if v == 1.0 {
                observed.push(true);
            } else if v == 0.0 {
                observed.push(false);
            } else {
                return Err(TenrecError::BadContainer(format!(
                    "mask indicator entries must be 0 or 1, got {v}"
                )));
            }
        }
        Self::new(t.shape().to_vec(), observed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_tensor(shape: &[usize]) -> DenseTensor {
        let total: usize = shape.iter().product();
        DenseTensor::new(shape.to_vec(), (1..=total).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn unfold_mode1_2x2x2() {
        // data(i1,i2,i3) = i1 + 2(i2-1) + 4(i3-1), values 1..8
        let x = seq_tensor(&[2, 2, 2]);
        let m = x.unfold(1).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        let expect = [[1.0, 3.0, 5.0, 7.0], [2.0, 4.0, 6.0, 8.0]];
        for r in 0..2 {
            for c in 0..4 {
                assert_eq!(m.get(r, c), expect[r][c]);
            }
        }
    }

    #[test]
    fn unfold_mode3_2x2x2() {
        let x = seq_tensor(&[2, 2, 2]);
        let m = x.unfold(3).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 4));
        let expect = [[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]];
        for r in 0..2 {
            for c in 0..4 {
                assert_eq!(m.get(r, c), expect[r][c]);
            }
        }
    }

    #[test]
    fn unfold_matches_index_map_oracle() {
        // Enumerate the j_m map directly over every entry of a 3x4x2x3 tensor.
        let shape = [3usize, 4, 2, 3];
        let x = seq_tensor(&shape);
        for mode in 1..=4 {
            let m = x.unfold(mode).unwrap();
            let mut idx = vec![0usize; 4];
            loop {
                let (row, col) = tenrec_oracles::unfold_position(&shape, mode, &idx);
                assert_eq!(m.get(row, col), x.get(&idx));
                // odometer
                let mut k = 0;
                loop {
                    idx[k] += 1;
                    if idx[k] < shape[k] {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                    if k == 4 {
                        return;
                    }
                }
            }
        }
    }

    #[test]
    fn unfold_order2_mode1_is_identity_view() {
        let x = seq_tensor(&[3, 5]);
        let m = x.unfold(1).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 5));
        assert_eq!(m.data(), x.data());
    }

    #[test]
    fn fold_is_exact_inverse() {
        let x = seq_tensor(&[2, 2, 2]);
        let folded = DenseMatrix::new(2, 4, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
            .unwrap()
            .fold(1, &[2, 2, 2])
            .unwrap();
        assert_eq!(folded, x);
        for mode in 1..=3 {
            assert_eq!(x.unfold(mode).unwrap().fold(mode, &[2, 2, 2]).unwrap(), x);
        }
    }

    #[test]
    fn fold_zero_matrix() {
        let z = DenseMatrix::zeros(2, 6).fold(2, &[3, 2, 2]).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mode_out_of_range() {
        let x = seq_tensor(&[2, 2]);
        assert!(matches!(
            x.unfold(0),
            Err(TenrecError::ModeOutOfRange { .. })
        ));
        assert!(matches!(
            x.unfold(3),
            Err(TenrecError::ModeOutOfRange { .. })
        ));
    }

    #[test]
    fn fold_dimension_mismatch() {
        let m = DenseMatrix::zeros(2, 4);
        assert!(m.fold(1, &[2, 3, 2]).is_err());
        assert!(m.fold(2, &[4, 2, 2]).is_err()); // rows != shape[1]
    }

    #[test]
    fn mask_apply_basics() {
        let x = DenseTensor::new(vec![2, 2], vec![1.0, 3.0, 2.0, 4.0]).unwrap(); // [[1,2],[3,4]]
        let full = ObservationMask::full(&[2, 2]).unwrap();
        assert_eq!(full.apply(&x).unwrap(), x);
        assert_eq!(full.count(), 4);

        let empty = ObservationMask::new(vec![2, 2], vec![false; 4]).unwrap();
        assert!(empty.apply(&x).unwrap().data().iter().all(|&v| v == 0.0));
        assert_eq!(full.apply_complement(&x).unwrap().l2_norm(), 0.0);

        // observe the diagonal {(0,0),(1,1)}
        let diag = ObservationMask::new(vec![2, 2], vec![true, false, false, true]).unwrap();
        assert_eq!(diag.apply(&x).unwrap().data(), &[1.0, 0.0, 0.0, 4.0]);
        assert_eq!(diag.apply_complement(&x).unwrap().data(), &[0.0, 3.0, 2.0, 0.0]);
        assert_eq!(diag.count(), 2);
    }

    #[test]
    fn mask_shape_mismatch() {
        let x = seq_tensor(&[2, 3]);
        let mask = ObservationMask::full(&[3, 2]).unwrap();
        assert!(mask.apply(&x).is_err());
    }

    #[test]
    fn l2_norm_values() {
        assert_eq!(DenseTensor::zeros(&[2, 2, 2]).unwrap().l2_norm(), 0.0);
        let ones = DenseTensor::new(vec![2, 2, 2], vec![1.0; 8]).unwrap();
        assert!((ones.l2_norm() - 8f64.sqrt()).abs() < 1e-15);
        let v = DenseTensor::new(vec![2, 1], vec![3.0, 4.0]).unwrap();
        assert_eq!(v.l2_norm(), 5.0);
    }

    #[test]
    fn construction_errors() {
        assert!(DenseTensor::new(vec![4], vec![0.0; 4]).is_err()); // order 1
        assert!(DenseTensor::new(vec![2, 0], vec![]).is_err());
        assert!(DenseTensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(ObservationMask::new(vec![2, 2], vec![true; 3]).is_err());
    }

    #[test]
    fn matmul_small() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 3.0, 2.0, 4.0]).unwrap(); // [[1,2],[3,4]]
        let b = DenseMatrix::new(2, 2, vec![5.0, 7.0, 6.0, 8.0]).unwrap(); // [[5,6],[7,8]]
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.data(), &[19.0, 43.0, 22.0, 50.0]); // [[19,22],[43,50]]
    }

    #[test]
    fn indicator_roundtrip() {
        let mask = ObservationMask::new(vec![2, 2], vec![true, false, true, false]).unwrap();
        let t = mask.to_indicator_tensor();
        assert_eq!(ObservationMask::from_indicator_tensor(&t).unwrap(), mask);
        let bad = DenseTensor::new(vec![2, 2], vec![0.5, 0.0, 1.0, 0.0]).unwrap();
        assert!(ObservationMask::from_indicator_tensor(&bad).is_err());
    }
}
