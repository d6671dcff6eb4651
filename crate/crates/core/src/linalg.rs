//! Small dense linear algebra kernel: column vectors as `&[f64]`, square
//! matrices as row-major [`Mat`], and Cholesky factorization with
//! forward/backward solves.
//!
//! Every solve against a symmetric positive definite matrix in this crate
//! goes through [`CholeskyFactor`]; explicit inverses are formed only where
//! a covariance matrix itself is the value being returned.

use crate::error::{Error, Result};

/// Relative pivot tolerance for Cholesky. A pivot smaller than this times
/// the corresponding diagonal entry is treated as a factorization failure.
const PIVOT_RTOL: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from a row-major slice; `data.len()` must equal `rows * cols`.
    pub fn from_rows(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length mismatch");
        Mat {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// y = A·x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// xᵀ·A·x for square A.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(self.rows, self.cols);
        assert_eq!(x.len(), self.cols);
        let mut acc = 0.0;
        for i in 0..self.rows {
            acc += x[i] * dot(self.row(i), x);
        }
        acc
    }

    /// Componentwise `self + other`.
    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Componentwise `self * c`.
    pub fn scale(&self, c: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Adds `c · x xᵀ` in place (square matrices only).
    pub fn add_outer(&mut self, x: &[f64], c: f64) {
        assert_eq!(self.rows, self.cols);
        assert_eq!(x.len(), self.rows);
        for i in 0..self.rows {
            let xi = c * x[i];
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (r, &xj) in row.iter_mut().zip(x) {
                *r += xi * xj;
            }
        }
    }

    /// Symmetrizes in place as `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let m = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }

    /// Largest absolute deviation from symmetry, with its location.
    pub fn max_asymmetry(&self) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = (self[(i, j)] - self[(j, i)]).abs();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor L with L·Lᵀ = A.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: Mat,
}

impl CholeskyFactor {
    /// Factors a symmetric matrix, reading only its lower triangle.
    ///
    /// Fails with [`Error::NotPositiveDefinite`] naming the first pivot that
    /// is non-positive or negligible relative to its diagonal entry.
    pub fn new(a: &Mat) -> Result<Self> {
        assert_eq!(a.rows(), a.cols());
        let n = a.rows();
        let mut l = Mat::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for m in 0..j {
                d -= l[(j, m)] * l[(j, m)];
            }
            if d <= 0.0 || d <= PIVOT_RTOL * a[(j, j)].abs() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let root = d.sqrt();
            l[(j, j)] = root;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for m in 0..j {
                    s -= l[(i, m)] * l[(j, m)];
                }
                l[(i, j)] = s / root;
            }
        }
        Ok(CholeskyFactor { l })
    }

    /// Wraps an externally produced lower-triangular factor without
    /// re-verifying it; see `conditionals::XtxFactor` for the verified path.
    pub fn from_lower_unchecked(l: Mat) -> Self {
        CholeskyFactor { l }
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &Mat {
        &self.l
    }

    /// Solves L·y = b.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.l[(i, j)] * y[j];
            }
            y[i] /= self.l[(i, i)];
        }
        y
    }

    /// Solves Lᵀ·x = y.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.l[(j, i)] * x[j];
            }
            x[i] /= self.l[(i, i)];
        }
        x
    }

    /// Solves A·x = b via the two triangular solves.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// Forms A⁻¹ column by column, then symmetrizes. Only used where the
    /// inverse itself is the value being returned.
    pub fn inverse(&self) -> Mat {
        let n = self.dim();
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv.symmetrize();
        inv
    }

    /// ‖L⁻¹·b‖², i.e. bᵀ·A⁻¹·b.
    pub fn inv_quadratic_form(&self, b: &[f64]) -> f64 {
        let y = self.solve_lower(b);
        dot(&y, &y)
    }
}

/// Symmetric positive definite matrix with its Cholesky factor computed on
/// demand and cached.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    entries: Mat,
    factor: std::sync::OnceLock<CholeskyFactor>,
}

impl SpdMatrix {
    /// Accepts a square matrix that is symmetric up to rounding, symmetrizes
    /// it, and verifies it factors. Gross asymmetry is an error.
    pub fn new(mut entries: Mat) -> Result<Self> {
        if entries.rows() != entries.cols() {
            return Err(Error::ShapeMismatch {
                context: "SpdMatrix",
                expected: entries.rows(),
                got: entries.cols(),
            });
        }
        let (i, j, dev) = entries.max_asymmetry();
        if dev > 1e-8 * entries.max_abs().max(1.0) {
            return Err(Error::NotSymmetric {
                i,
                j,
                a: entries[(i, j)],
                b: entries[(j, i)],
            });
        }
        entries.symmetrize();
        let spd = SpdMatrix {
            entries,
            factor: std::sync::OnceLock::new(),
        };
        spd.cholesky()?;
        Ok(spd)
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix::new(Mat::identity(n)).expect("identity is SPD")
    }

    /// Diagonal matrix with strictly positive entries.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = Mat::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            if d <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: i, value: d });
            }
            m[(i, i)] = d;
        }
        SpdMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    /// The cached lower Cholesky factor.
    pub fn cholesky(&self) -> Result<&CholeskyFactor> {
        if let Some(f) = self.factor.get() {
            return Ok(f);
        }
        let f = CholeskyFactor::new(&self.entries)?;
        Ok(self.factor.get_or_init(|| f))
    }

    /// A⁻¹ as a fresh SPD matrix.
    pub fn inverse(&self) -> Result<SpdMatrix> {
        let inv = self.cholesky()?.inverse();
        SpdMatrix::new(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd3() -> Mat {
        // A = Bᵀ·B + I for a fixed B, guaranteed SPD.
        Mat::from_rows(3, 3, &[4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0])
    }

    #[test]
    fn cholesky_multiplies_back() {
        let a = spd3();
        let f = CholeskyFactor::new(&a).unwrap();
        let l = f.lower();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for m in 0..3 {
                    s += l[(i, m)] * l[(j, m)];
                }
                assert!((s - a[(i, j)]).abs() < 1e-12, "LLᵀ mismatch at ({i},{j})");
            }
        }
    }

    #[test]
    fn solve_matches_matvec() {
        let a = spd3();
        let f = CholeskyFactor::new(&a).unwrap();
        let x = vec![1.0, -2.0, 0.5];
        let b = a.matvec(&x);
        let got = f.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = spd3();
        let inv = CholeskyFactor::new(&a).unwrap().inverse();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for m in 0..3 {
                    s += inv[(i, m)] * a[(m, j)];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_spd_reports_pivot() {
        // Second pivot goes negative: [[1, 2], [2, 1]].
        let a = Mat::from_rows(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match CholeskyFactor::new(&a) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn zero_matrix_rejected() {
        let a = Mat::zeros(2, 2);
        match CholeskyFactor::new(&a) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 0),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn spd_matrix_rejects_gross_asymmetry() {
        let a = Mat::from_rows(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        assert!(matches!(SpdMatrix::new(a), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn quadratic_form_matches_manual() {
        let a = spd3();
        let x = [1.0, 2.0, 3.0];
        let ax = a.matvec(&x);
        assert!((a.quadratic_form(&x) - dot(&x, &ax)).abs() < 1e-12);
    }
}
