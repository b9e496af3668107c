//! Orthonormal type-II DCT.
//!
//! Block lengths that are perfect squares (n = m*m, m >= 2) are treated as
//! row-major m x m tiles and transformed separably; other lengths use the
//! 1-D transform. Coefficient (u, v) of a tile lives at index u*m + v.

#[derive(Debug, Clone)]
pub struct Dct {
    n: usize,
    side: usize,
    two_d: bool,
    // side x side basis, row k holds the k-th cosine
    basis: Vec<f64>,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "transform length must be positive");
        let root = (n as f64).sqrt().round() as usize;
        let two_d = root >= 2 && root * root == n;
        let side = if two_d { root } else { n };
        Self {
            n,
            side,
            two_d,
            basis: basis(side),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_2d(&self) -> bool {
        self.two_d
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        if !self.two_d {
            return self.apply(x, false);
        }
        let m = self.side;
        let mut tmp = vec![0.0; self.n];
        for r in 0..m {
            tmp[r * m..(r + 1) * m].copy_from_slice(&self.apply(&x[r * m..(r + 1) * m], false));
        }
        self.columns(&tmp, false)
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n);
        if !self.two_d {
            return self.apply(coeffs, true);
        }
        let m = self.side;
        let tmp = self.columns(coeffs, true);
        let mut out = vec![0.0; self.n];
        for r in 0..m {
            out[r * m..(r + 1) * m].copy_from_slice(&self.apply(&tmp[r * m..(r + 1) * m], true));
        }
        out
    }

    fn columns(&self, x: &[f64], inverse: bool) -> Vec<f64> {
        let m = self.side;
        let mut out = vec![0.0; self.n];
        let mut col = vec![0.0; m];
        for c in 0..m {
            for r in 0..m {
                col[r] = x[r * m + c];
            }
            for (r, v) in self.apply(&col, inverse).into_iter().enumerate() {
                out[r * m + c] = v;
            }
        }
        out
    }

    fn apply(&self, x: &[f64], inverse: bool) -> Vec<f64> {
        let m = self.side;
        (0..m)
            .map(|k| {
                (0..m)
                    .map(|i| {
                        let b = if inverse {
                            self.basis[i * m + k]
                        } else {
                            self.basis[k * m + i]
                        };
                        b * x[i]
                    })
                    .sum()
            })
            .collect()
    }
}

fn basis(m: usize) -> Vec<f64> {
    let mut b = vec![0.0; m * m];
    let mf = m as f64;
    for k in 0..m {
        let alpha = if k == 0 {
            (1.0 / mf).sqrt()
        } else {
            (2.0 / mf).sqrt()
        };
        for i in 0..m {
            b[k * m + i] = alpha
                * (std::f64::consts::PI * (2.0 * i as f64 + 1.0) * k as f64 / (2.0 * mf)).cos();
        }
    }
    b
}
