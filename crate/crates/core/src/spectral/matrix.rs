//! Small dense matrices over the rationals, and the matrices of the
//! shot-window and averaging systems.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{ratio, rational_to_f64, RationalPolynomial};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { BigRational::one() } else { BigRational::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> BigRational) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        ExactMatrix { rows, cols, data }
    }

    pub fn column(entries: Vec<BigRational>) -> Self {
        ExactMatrix { rows: entries.len(), cols: 1, data: entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * k).collect(),
        }
    }

    pub fn trace(&self) -> BigRational {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * &v[c]).sum())
            .collect()
    }

    /// Column entries of a `n × 1` matrix.
    pub fn as_vector(&self) -> Vec<BigRational> {
        assert_eq!(self.cols, 1);
        self.data.clone()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| rational_to_f64(self.get(r, c)).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| rational_to_f64(self.get(r, c)))
    }

    /// `det(xI - A)` by the Faddeev–LeVerrier recurrence.
    ///
    /// Runs on the integer matrix `B = λA`, `λ` the lcm of the entry
    /// denominators, where every division in the recurrence is exact; the
    /// coefficient of `x^k` is then rescaled by `λ^{-(n-k)}`.
    pub fn char_poly(&self) -> RationalPolynomial {
        assert!(self.is_square(), "characteristic polynomial of a non-square matrix");
        let n = self.rows;
        let lambda = self.data.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let b: Vec<BigInt> = self.data.iter().map(|q| (q * &lambda).to_integer()).collect();
        let mul = |x: &[BigInt], y: &[BigInt]| -> Vec<BigInt> {
            let mut out = vec![BigInt::zero(); n * n];
            for r in 0..n {
                for k in 0..n {
                    let a = &x[r * n + k];
                    if a.is_zero() {
                        continue;
                    }
                    for c in 0..n {
                        let v = &y[k * n + c];
                        if !v.is_zero() {
                            out[r * n + c] += a * v;
                        }
                    }
                }
            }
            out
        };
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::one();
        let mut m = vec![BigInt::zero(); n * n];
        for k in 1..=n {
            // M_k = B M_{k-1} + c_{n-k+1} I
            let mut next = mul(&b, &m);
            for i in 0..n {
                next[i * n + i] += &c[n - k + 1];
            }
            m = next;
            let bm = mul(&b, &m);
            let trace: BigInt = (0..n).map(|i| bm[i * n + i].clone()).sum();
            c[n - k] = -trace / BigInt::from(k);
        }
        let mut scale = BigInt::one();
        let mut coeffs = vec![BigRational::zero(); n + 1];
        for k in (0..=n).rev() {
            coeffs[k] = BigRational::new(c[k].clone(), scale.clone());
            scale *= &lambda;
        }
        RationalPolynomial::new(coeffs)
    }
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = ExactMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if !b.is_zero() {
                        out.data[r * rhs.cols + c] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Add for &ExactMatrix {
    type Output = ExactMatrix;
    fn add(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ExactMatrix {
    type Output = ExactMatrix;
    fn sub(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

fn q(n: i64) -> BigRational {
    ratio(n, 1)
}

fn unit(len: usize, at: usize) -> ExactMatrix {
    ExactMatrix::from_fn(len, 1, |r, _| if r == at { q(1) } else { q(0) })
}

/// `A`, `(p+1) × (p+1)`: shift rows, last row `(-1/p, 0, …, 0, (p+1)/p)`.
pub fn shot_matrix(p: u32) -> ExactMatrix {
    let n = p as usize + 1;
    let pp = p as i64;
    ExactMatrix::from_fn(n, n, |r, c| {
        if r + 1 < n {
            if c == r + 1 { q(1) } else { q(0) }
        } else if c == 0 {
            ratio(-1, pp)
        } else if c == n - 1 {
            ratio(pp + 1, pp)
        } else {
            q(0)
        }
    })
}

/// `J = e_p`.
pub fn shot_perturbation(p: u32) -> ExactMatrix {
    unit(p as usize + 1, p as usize)
}

/// `B'`: lower triangular matrix of ones.
pub fn basis_change(p: u32) -> ExactMatrix {
    let n = p as usize + 1;
    ExactMatrix::from_fn(n, n, |r, c| if c <= r { q(1) } else { q(0) })
}

/// `B'^{-1}`: ones on the diagonal, minus ones just below.
pub fn basis_change_inverse(p: u32) -> ExactMatrix {
    let n = p as usize + 1;
    ExactMatrix::from_fn(n, n, |r, c| {
        if r == c {
            q(1)
        } else if r == c + 1 {
            q(-1)
        } else {
            q(0)
        }
    })
}

/// `A'` written out directly: first row `(1, 1, 0, …)`, shift rows, last row
/// `(0, 1/p, …, 1/p)`.
pub fn shot_matrix_in_new_basis(p: u32) -> ExactMatrix {
    let n = p as usize + 1;
    let pp = p as i64;
    ExactMatrix::from_fn(n, n, |r, c| {
        if r + 1 == n {
            if c == 0 { q(0) } else { ratio(1, pp) }
        } else if r == 0 {
            if c <= 1 { q(1) } else { q(0) }
        } else if c == r + 1 {
            q(1)
        } else {
            q(0)
        }
    })
}

/// Projection along `e'_0` onto the last `p` coordinates, `p × (p+1)`.
pub fn projection(p: u32) -> ExactMatrix {
    let n = p as usize;
    ExactMatrix::from_fn(n, n + 1, |r, c| if c == r + 1 { q(1) } else { q(0) })
}

/// `M`, `p × p`: shift rows, last row all `1/p`.
pub fn averaging_matrix(p: u32) -> ExactMatrix {
    let n = p as usize;
    let pp = p as i64;
    ExactMatrix::from_fn(n, n, |r, c| {
        if r + 1 == n {
            ratio(1, pp)
        } else if c == r + 1 {
            q(1)
        } else {
            q(0)
        }
    })
}

/// `K = e_{p-1}`.
pub fn averaging_perturbation(p: u32) -> ExactMatrix {
    unit(p as usize, p as usize - 1)
}

/// `D = I - (1/p) 𝟙𝟙ᵀ`, removing the mean.
pub fn centering(p: u32) -> ExactMatrix {
    let n = p as usize;
    let pp = p as i64;
    ExactMatrix::from_fn(n, n, |r, c| if r == c { q(1) } else { q(0) } - ratio(1, pp))
}

/// `O = D M`.
pub fn deviation_matrix(p: u32) -> ExactMatrix {
    &centering(p) * &averaging_matrix(p)
}

/// `L = D K`.
pub fn deviation_perturbation(p: u32) -> ExactMatrix {
    &centering(p) * &averaging_perturbation(p)
}
