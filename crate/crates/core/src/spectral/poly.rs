//! Exact univariate polynomials over the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Fallback for huge numerators/denominators.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Coefficients in ascending degree, trailing zeros trimmed; the zero
/// polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        RationalPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// `x - root`.
    pub fn linear_factor(root: BigRational) -> Self {
        Self::new(vec![-root, BigRational::one()])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    /// From `(numerator, denominator)` pairs.
    pub fn from_ratios(coeffs: &[(i64, i64)]) -> Self {
        Self::new(coeffs.iter().map(|&(n, d)| ratio(n, d)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lead) => self.scale(&lead.recip()),
            None => Self::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, a| acc * x + a)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        horner(&self.to_f64_coeffs(), z)
    }

    /// `x^d · P(1/x)` with `d = deg P`: the coefficient sequence reversed.
    pub fn reversed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self::new(coeffs)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigRational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let factor = rem.last().unwrap() / &lead;
            for (k, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + k] -= &factor * c;
            }
            quot[shift] = factor;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }
}

pub(crate) fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn add(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPolynomial::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn sub(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn neg(self) -> RationalPolynomial {
        RationalPolynomial::new(self.coeffs.iter().map(|a| -a).collect())
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn mul(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return RationalPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPolynomial::new(out)
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let show_coeff = !mag.is_one() || k == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

/// `R(x) = x^{p-1} + (p-1)/p x^{p-2} + … + 2/p x + 1/p`; coefficient of `x^k` is `(k+1)/p`.
pub fn poly_r(p: u32) -> RationalPolynomial {
    let p = p as i64;
    RationalPolynomial::new((0..p).map(|k| ratio(k + 1, p)).collect())
}

/// `S(x) = x^{p-1} + 2 x^{p-2} + … + (p-1) x + p`; coefficient of `x^k` is `p-k`.
pub fn poly_s(p: u32) -> RationalPolynomial {
    let p = p as i64;
    RationalPolynomial::new((0..p).map(|k| ratio(p - k, 1)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_and_s_small() {
        assert_eq!(poly_r(2), RationalPolynomial::from_ratios(&[(1, 2), (1, 1)]));
        assert_eq!(poly_s(2), RationalPolynomial::from_i64(&[2, 1]));
        assert_eq!(
            poly_r(4),
            RationalPolynomial::from_ratios(&[(1, 4), (2, 4), (3, 4), (1, 1)])
        );
        assert_eq!(poly_r(1), RationalPolynomial::one());
        assert_eq!(poly_r(1).degree(), Some(0));
    }

    #[test]
    fn reciprocal_identity() {
        for p in 1..=30u32 {
            let lhs = poly_r(p).reversed().scale(&ratio(p as i64, 1));
            assert_eq!(lhs, poly_s(p), "p={p}");
        }
    }

    #[test]
    fn arithmetic() {
        let a = RationalPolynomial::from_i64(&[1, 1]);
        let b = RationalPolynomial::from_i64(&[-1, 1]);
        assert_eq!(&a * &b, RationalPolynomial::from_i64(&[-1, 0, 1]));
        assert_eq!(&a - &a, RationalPolynomial::zero());
        assert_eq!(a.pow(2), RationalPolynomial::from_i64(&[1, 2, 1]));
        assert_eq!(a.pow(3).derivative(), RationalPolynomial::from_i64(&[3, 6, 3]));
        assert_eq!(poly_s(3).eval(&ratio(1, 1)), ratio(6, 1));
    }

    #[test]
    fn division_and_gcd() {
        let f = &RationalPolynomial::from_i64(&[-1, 0, 1]) * &RationalPolynomial::from_i64(&[2, 1]);
        let g = RationalPolynomial::from_i64(&[1, 1]);
        let (q, r) = f.div_rem(&g);
        assert!(r.is_zero());
        assert_eq!(&q * &g, f);
        let h = RationalPolynomial::from_i64(&[-1, 0, 1]);
        assert_eq!(f.gcd(&h), h);
        assert_eq!(poly_s(5).gcd(&poly_s(5).derivative()), RationalPolynomial::one());
    }

    #[test]
    fn display() {
        assert_eq!(poly_r(2).to_string(), "x + 1/2");
        assert_eq!(RationalPolynomial::from_i64(&[0, -1, 1]).to_string(), "x^2 - x");
    }
}
