//! Simultaneous root finding by Aberth–Ehrlich iteration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::horner;
use super::SpectralError;

pub const MAX_ITERATIONS: usize = 1000;
pub const STEP_TOLERANCE: f64 = 1e-13;

/// Roots of a polynomial with per-root residuals `|P(z)|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
    /// Minimum pairwise distance; `None` for fewer than two roots.
    pub min_separation: Option<f64>,
    pub iterations: usize,
}

impl RootSet {
    pub fn from_roots(coeffs: &[f64], roots: Vec<Complex64>, iterations: usize) -> Self {
        let residuals = roots.iter().map(|&z| horner(coeffs, z).norm()).collect();
        RootSet {
            min_separation: Some(min_separation(&roots)).filter(|s| s.is_finite()),
            roots: roots.iter().map(|z| (z.re, z.im)).collect(),
            residuals,
            iterations,
        }
    }

    pub fn complex(&self) -> Vec<Complex64> {
        self.roots.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.complex().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Minimum pairwise distance; infinite for fewer than two points.
pub fn min_separation(roots: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in roots.iter().enumerate() {
        for b in &roots[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

/// All complex roots of the polynomial with ascending real coefficients.
/// Exact zero roots (vanishing low coefficients) are split off first.
pub fn aberth(coeffs: &[f64]) -> Result<RootSet, SpectralError> {
    let mut trimmed = coeffs.to_vec();
    while trimmed.last() == Some(&0.0) {
        trimmed.pop();
    }
    if trimmed.is_empty() {
        return Err(SpectralError::ZeroPolynomial);
    }
    let zeros = trimmed.iter().take_while(|&&c| c == 0.0).count();
    let reduced = &trimmed[zeros..];
    let lead = *reduced.last().unwrap();
    let monic: Vec<f64> = reduced.iter().map(|c| c / lead).collect();
    let degree = monic.len() - 1;

    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let mut iterations = 0;
    match degree {
        0 => {}
        1 => roots.push(Complex64::new(-monic[0], 0.0)),
        _ => {
            let (found, iters) = aberth_iterate(&monic)?;
            iterations = iters;
            roots.extend(found);
        }
    }
    Ok(RootSet::from_roots(&trimmed, roots, iterations))
}

fn aberth_iterate(monic: &[f64]) -> Result<(Vec<Complex64>, usize), SpectralError> {
    let n = monic.len() - 1;
    let derivative: Vec<f64> = monic.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
    // Cauchy bound on the moduli of the roots.
    let radius = 1.0 + monic[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let start = 0.5 * radius;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(start, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();

    for iter in 1..=MAX_ITERATIONS {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let f = horner(monic, z[k]);
            if f.norm() == 0.0 {
                continue;
            }
            let df = horner(&derivative, z[k]);
            let ratio = f / df;
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                return Err(SpectralError::NoConvergence { iterations: iter });
            }
            z[k] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < STEP_TOLERANCE {
            return Ok((z, iter));
        }
    }
    Err(SpectralError::NoConvergence { iterations: MAX_ITERATIONS })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn linear_and_quadratic() {
        let r = aberth(&[0.5, 1.0]).unwrap();
        assert!(close(r.complex()[0], Complex64::new(-0.5, 0.0)));
        // x^2 + 2/3 x + 1/3 → -1/3 ± i√2/3
        let r = aberth(&[1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        let expected = Complex64::new(-1.0 / 3.0, 2f64.sqrt() / 3.0);
        assert!(r.complex().iter().any(|&z| close(z, expected)));
        assert!(r.complex().iter().any(|&z| close(z, expected.conj())));
        assert!((r.max_modulus() - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn known_integer_roots() {
        // (x-1)(x-2)(x+3)(x-4) = x^4 - 4x^3 - 7x^2 + 34x - 24
        let r = aberth(&[-24.0, 34.0, -7.0, -4.0, 1.0]).unwrap();
        let mut re: Vec<f64> = r.complex().iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (got, want) in re.iter().zip([-3.0, 1.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        assert!(r.max_residual() < 1e-9);
    }

    #[test]
    fn zero_roots_split_off() {
        let r = aberth(&[0.0, 0.0, -1.0, 1.0]).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.complex().iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert!(aberth(&[0.0, 0.0]).is_err());
    }
}
