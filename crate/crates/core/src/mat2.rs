//! Closed-form helpers for symmetric 2x2 matrices.
//!
//! The quadratic-form MGFs in [`crate::stats`] only ever see 2x2 symmetric
//! matrices, so eigendecomposition, PSD square root and inversion are done
//! in closed form rather than through an iterative factorization.

use crate::math;

/// Symmetric 2x2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SymMat2 {
    pub fn diag(a: f64, c: f64) -> Self {
        Self { a, b: 0.0, c }
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    /// Eigenvalues ordered `(min, max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mid = 0.5 * (self.a + self.c);
        let half_gap = 0.5 * (self.a - self.c);
        let radius = math::hypot(half_gap, self.b);
        (mid - radius, mid + radius)
    }

    /// Unit eigenvector for the larger eigenvalue.
    pub fn max_eigenvector(&self) -> [f64; 2] {
        let (_, hi) = self.eigenvalues();
        // (A - hi*I) v = 0; pick the better-conditioned row.
        let r1 = [self.a - hi, self.b];
        let r2 = [self.b, self.c - hi];
        let (x, y) = if r1[0] * r1[0] + r1[1] * r1[1] >= r2[0] * r2[0] + r2[1] * r2[1] {
            (-r1[1], r1[0])
        } else {
            (-r2[1], r2[0])
        };
        let n = math::hypot(x, y);
        if n == 0.0 {
            // Multiple of the identity: any direction works.
            [1.0, 0.0]
        } else {
            [x / n, y / n]
        }
    }

    /// Symmetric PSD square root via eigendecomposition.
    ///
    /// Slightly negative eigenvalues from roundoff are clamped to zero.
    pub fn sqrt_psd(&self) -> Self {
        let (lo, hi) = self.eigenvalues();
        let sl = math::sqrt(lo.max(0.0));
        let sh = math::sqrt(hi.max(0.0));
        let v = self.max_eigenvector();
        // sqrt = sl*I + (sh - sl) * v v^T  (v is the max-eigenvalue direction)
        Self {
            a: sl + (sh - sl) * v[0] * v[0],
            b: (sh - sl) * v[0] * v[1],
            c: sl + (sh - sl) * v[1] * v[1],
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 {
            return None;
        }
        Some(Self {
            a: self.c / det,
            b: -self.b / det,
            c: self.a / det,
        })
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.b * v[0] + self.c * v[1]]
    }

    /// Symmetric product `S * M * S` for symmetric `M` (result is symmetric
    /// whenever `S` and `M` are).
    pub fn sandwich(&self, m: &SymMat2) -> SymMat2 {
        // T = S*M
        let t00 = self.a * m.a + self.b * m.b;
        let t01 = self.a * m.b + self.b * m.c;
        let t10 = self.b * m.a + self.c * m.b;
        let t11 = self.b * m.b + self.c * m.c;
        // R = T*S
        SymMat2 {
            a: t00 * self.a + t01 * self.b,
            b: t00 * self.b + t01 * self.c,
            c: t10 * self.b + t11 * self.c,
        }
    }
}

/// Dot product of two 2-vectors.
#[inline]
pub fn dot2(x: [f64; 2], y: [f64; 2]) -> f64 {
    x[0] * y[0] + x[1] * y[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = SymMat2::diag(2.0, 5.0);
        let (lo, hi) = m.eigenvalues();
        assert_eq!((lo, hi), (2.0, 5.0));
    }

    #[test]
    fn sqrt_squares_back() {
        let cases = [
            SymMat2 { a: 2.0, b: 0.7, c: 1.0 },
            SymMat2 { a: 1e-6, b: 0.0, c: 3.0 },
            SymMat2 { a: 1.0, b: 1.0, c: 1.0 }, // rank one
            SymMat2 { a: 4.0, b: 0.0, c: 4.0 }, // multiple of identity
        ];
        for m in cases {
            let s = m.sqrt_psd();
            let sq = s.sandwich(&SymMat2::diag(1.0, 1.0));
            // s * I * s = s^2
            assert!(close(sq.a, m.a, 1e-12), "{sq:?} vs {m:?}");
            assert!(close(sq.b, m.b, 1e-12), "{sq:?} vs {m:?}");
            assert!(close(sq.c, m.c, 1e-12), "{sq:?} vs {m:?}");
        }
    }

    #[test]
    fn inverse_multiplies_to_identity() {
        let m = SymMat2 { a: 3.0, b: -1.0, c: 2.0 };
        let inv = m.inverse().unwrap();
        let e1 = inv.mul_vec(m.mul_vec([1.0, 0.0]));
        let e2 = inv.mul_vec(m.mul_vec([0.0, 1.0]));
        assert!(close(e1[0], 1.0, 1e-14) && e1[1].abs() < 1e-14);
        assert!(close(e2[1], 1.0, 1e-14) && e2[0].abs() < 1e-14);
    }
}
