//! Dense LU with partial pivoting for the small systems this crate needs
//! (Jacobians and bordered determinants, n ≤ 9). Hadamard row-norm
//! products provide the scale against which determinants are judged.

/// LU factorization of a row-major `n × n` matrix.
pub(crate) struct LuFactors {
    lu: Vec<f64>,
    n: usize,
    perm: Vec<usize>,
    sign: f64,
}

impl LuFactors {
    pub fn factor(matrix: &[f64], n: usize) -> LuFactors {
        debug_assert_eq!(matrix.len(), n * n);
        let mut lu = matrix.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_mag = lu[col * n + col].abs();
            for row in col + 1..n {
                let mag = lu[row * n + col].abs();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = row;
                }
            }
            if pivot_row != col {
                for k in 0..n {
                    lu.swap(col * n + k, pivot_row * n + k);
                }
                perm.swap(col, pivot_row);
                sign = -sign;
            }
            let pivot = lu[col * n + col];
            if pivot == 0.0 {
                continue; // singular: determinant will come out zero
            }
            for row in col + 1..n {
                let factor = lu[row * n + col] / pivot;
                lu[row * n + col] = factor;
                for k in col + 1..n {
                    lu[row * n + k] -= factor * lu[col * n + k];
                }
            }
        }
        LuFactors { lu, n, perm, sign }
    }

    pub fn det(&self) -> f64 {
        let mut det = self.sign;
        for i in 0..self.n {
            det *= self.lu[i * self.n + i];
        }
        det
    }

    /// Solve `A x = b`; meaningless if the factorization is singular, so
    /// callers check the determinant against the Hadamard scale first.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.lu[i * n + k] * x[k];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

pub(crate) fn det(matrix: &[f64], n: usize) -> f64 {
    LuFactors::factor(matrix, n).det()
}

/// Product of Euclidean row norms: the Hadamard bound on |det|.
pub(crate) fn row_norm_product(matrix: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|i| {
            matrix[i * n..(i + 1) * n]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
        })
        .product()
}
