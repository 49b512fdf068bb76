//! Dense complex matrices, just enough for channel assembly and beamforming.

use num_complex::Complex;

use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real = f64> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data; `None` when the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] += v;
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        debug_assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    /// `Aᴴ x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for (row, xr) in self.data.chunks_exact(self.cols).zip(x) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * *xr;
            }
        }
        out
    }

    /// `Aᴴ A` (cols × cols).
    pub fn gram_right(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for row in self.data.chunks_exact(n) {
            for i in 0..n {
                let ai = row[i].conj();
                for j in i..n {
                    g.add_at(i, j, ai * row[j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                let v = g.get(j, i).conj();
                g.set(i, j, v);
            }
        }
        g
    }

    /// `A Aᴴ` (rows × rows).
    pub fn gram_left(&self) -> Self {
        let m = self.rows;
        let mut g = Self::zeros(m, m);
        for i in 0..m {
            let ri = &self.data[i * self.cols..(i + 1) * self.cols];
            for j in i..m {
                let rj = &self.data[j * self.cols..(j + 1) * self.cols];
                let v: Complex<T> = ri.iter().zip(rj).map(|(a, b)| *a * b.conj()).sum();
                g.set(i, j, v);
                g.set(j, i, v.conj());
            }
        }
        g
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn scale(&mut self, s: Complex<T>) {
        for z in &mut self.data {
            *z *= s;
        }
    }
}

/// Euclidean norm of a complex vector.
pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// `aᴴ b`.
pub fn dot_conj<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * *y).sum()
}

/// Scales `v` to unit norm; `None` for the zero vector.
pub fn normalized<T: Real>(v: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
    let n = norm(v);
    if n > T::zero() && n.is_finite() {
        Some(v.iter().map(|z| z / n).collect())
    } else {
        None
    }
}
