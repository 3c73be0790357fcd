use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::rng::SplitMix64;

const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Orthogonal `n x n` matrix mapping a local frame into ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
    identity: bool,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            identity: true,
        }
    }

    /// Accepts `m` if `m^T m = I` to within `1e-12` entrywise.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("rotation must be a non-empty square matrix".into()));
        }
        let n = matrix.nrows();
        let gram = matrix.transpose() * &matrix;
        let dev = (gram - DMatrix::<f64>::identity(n, n)).amax();
        if !(dev <= ORTHOGONALITY_TOL) {
            return Err(Error::NotOrthogonal(dev));
        }
        let identity = matrix == DMatrix::identity(n, n);
        Ok(Self { matrix, identity })
    }

    pub fn from_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        check_dim(dim * dim, rows.len())?;
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, rows))
    }

    /// Haar-distributed orthogonal matrix from the QR factorisation of a
    /// Gaussian matrix (with the sign of `R`'s diagonal folded into `Q`).
    pub fn random(dim: usize, rng: &mut SplitMix64) -> Self {
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.normal());
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Self {
            matrix: q,
            identity: false,
        }
    }

    /// Signed permutation sending the last basis vector `e_{n-1}` to
    /// `sign * e_axis` and `e_axis` to `e_{n-1}`.
    pub fn axis_to_vertical(dim: usize, axis: usize, positive: bool) -> Self {
        assert!(axis < dim);
        let s = if positive { 1.0 } else { -1.0 };
        let last = dim - 1;
        let mut m = DMatrix::identity(dim, dim);
        if axis == last {
            m[(last, last)] = s;
        } else {
            m[(axis, axis)] = 0.0;
            m[(last, last)] = 0.0;
            m[(axis, last)] = s;
            m[(last, axis)] = 1.0;
        }
        let identity = positive && axis == last;
        Self { matrix: m, identity }
    }

    /// Rotation about the plane of axes `(a, b)` by `angle`.
    pub fn plane(dim: usize, a: usize, b: usize, angle: f64) -> Self {
        assert!(a < dim && b < dim && a != b);
        let (s, c) = angle.sin_cos();
        let mut m = DMatrix::identity(dim, dim);
        m[(a, a)] = c;
        m[(a, b)] = -s;
        m[(b, a)] = s;
        m[(b, b)] = c;
        Self { matrix: m, identity: false }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `self * other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        if self.identity {
            return other.clone();
        }
        if other.identity {
            return self.clone();
        }
        Rotation {
            matrix: &self.matrix * &other.matrix,
            identity: false,
        }
    }

    /// Local frame to ambient: `R q`.
    pub fn apply(&self, q: &[f64]) -> Vec<f64> {
        if self.identity {
            return q.to_vec();
        }
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * q[j]).sum())
            .collect()
    }

    /// Ambient to local frame: `R^T p`.
    pub fn apply_transpose(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        self.apply_transpose_into(p, &mut out);
        out
    }

    #[inline]
    pub fn apply_transpose_into(&self, p: &[f64], out: &mut [f64]) {
        if self.identity {
            out.copy_from_slice(p);
            return;
        }
        let n = self.dim();
        for (j, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|i| self.matrix[(i, j)] * p[i]).sum();
        }
    }
}
