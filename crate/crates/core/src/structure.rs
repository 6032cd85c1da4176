//! Linear matrix structures: synthesis from parameters, least-squares fit and
//! the composite projection onto the structure family.

use crate::error::{size_err, Result};
use crate::linalg::{mat, vectorize, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    /// Constant along anti-diagonals: entry `(i, j)` is `h[i + j]`.
    Hankel,
    /// Constant along diagonals: entry `(i, j)` is `h[i - j + n2 - 1]`.
    Toeplitz,
    /// Every entry is a free parameter; the projection is the identity.
    Unstructured,
}

/// A linear family of `n1 x n2` matrices parametrized by `p` reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearStructure {
    n1: usize,
    n2: usize,
    kind: StructureKind,
}

impl LinearStructure {
    pub fn hankel(n1: usize, n2: usize) -> Self {
        assert!(n1 >= 1 && n2 >= 1, "structure dimensions must be positive");
        Self { n1, n2, kind: StructureKind::Hankel }
    }

    pub fn toeplitz(n1: usize, n2: usize) -> Self {
        assert!(n1 >= 1 && n2 >= 1, "structure dimensions must be positive");
        Self { n1, n2, kind: StructureKind::Toeplitz }
    }

    pub fn unstructured(n1: usize, n2: usize) -> Self {
        assert!(n1 >= 1 && n2 >= 1, "structure dimensions must be positive");
        Self { n1, n2, kind: StructureKind::Unstructured }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    /// True when the projection is the identity map.
    pub fn is_identity(&self) -> bool {
        self.kind == StructureKind::Unstructured
    }

    /// Number of parameters.
    pub fn p(&self) -> usize {
        match self.kind {
            StructureKind::Hankel | StructureKind::Toeplitz => self.n1 + self.n2 - 1,
            StructureKind::Unstructured => self.n1 * self.n2,
        }
    }

    /// Parameter index feeding entry `(i, j)` (banded kinds only).
    #[inline]
    fn band_index(&self, i: usize, j: usize) -> usize {
        match self.kind {
            StructureKind::Hankel => i + j,
            StructureKind::Toeplitz => i + self.n2 - 1 - j,
            StructureKind::Unstructured => j * self.n1 + i,
        }
    }

    /// Number of entries sharing parameter `k` (banded kinds only).
    fn band_count(&self, k: usize) -> usize {
        // anti-diagonal i + j = k, or the equivalent reindexed diagonal
        let lo = k.saturating_sub(self.n2 - 1);
        let hi = k.min(self.n1 - 1);
        hi + 1 - lo
    }

    fn check_shape(&self, x: &Matrix) -> Result<()> {
        if x.shape() != (self.n1, self.n2) {
            return size_err(format!(
                "expected a {}x{} matrix, got {}x{}",
                self.n1,
                self.n2,
                x.nrows(),
                x.ncols()
            ));
        }
        Ok(())
    }

    /// Synthesis map: parameters to matrix.
    pub fn apply(&self, h: &Vector) -> Result<Matrix> {
        if h.len() != self.p() {
            return size_err(format!("{} parameters for a structure with p = {}", h.len(), self.p()));
        }
        if self.is_identity() {
            return mat(h, self.n1, self.n2);
        }
        Ok(Matrix::from_fn(self.n1, self.n2, |i, j| h[self.band_index(i, j)]))
    }

    /// Least-squares fit `argmin_h ||X - S(h)||_F`.
    ///
    /// For the banded kinds the basis columns are orthogonal, so the fit is the
    /// average over each (anti-)diagonal.
    pub fn fit(&self, x: &Matrix) -> Result<Vector> {
        self.check_shape(x)?;
        if self.is_identity() {
            return Ok(vectorize(x));
        }
        let mut h = Vector::zeros(self.p());
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                h[self.band_index(i, j)] += x[(i, j)];
            }
        }
        for (k, v) in h.iter_mut().enumerate() {
            *v /= self.band_count(k) as f64;
        }
        Ok(h)
    }

    /// Orthogonal projection onto the structure family, `S(T(X))`.
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        if self.is_identity() {
            self.check_shape(x)?;
            return Ok(x.clone());
        }
        self.apply(&self.fit(x)?)
    }

    /// Dense `n1*n2 x p` matrix `M_s` with `vec(S(h)) = M_s h`.
    pub fn basis_matrix(&self) -> Matrix {
        let n = self.n1 * self.n2;
        let mut m = Matrix::zeros(n, self.p());
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                m[(j * self.n1 + i, self.band_index(i, j))] = 1.0;
            }
        }
        m
    }
}
