//! The linear-algebra backbone of the shot-vector dynamics.
//!
//! Exact checks: the Bézout identity certifying that `S` and `S'` are coprime,
//! the characteristic polynomials of `A` and `M`, and the structure of the
//! basis change and projection. Numeric checks: roots of `R` (moduli bound,
//! distinctness) and eigenvalues of `O = DM`.

pub mod matrix;
pub mod poly;
pub mod roots;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dds::{to_averaging, AveragingTrajectory, ShotWindow};
use crate::stabilizer::FixedPoint;
use matrix::{deviation_matrix, deviation_perturbation, ExactMatrix};
use poly::{poly_r, poly_s, ratio, rational_to_f64, RationalPolynomial};
use roots::{aberth, min_separation, RootSet};

pub use matrix::{
    averaging_matrix, averaging_perturbation, basis_change, basis_change_inverse, centering,
    projection, shot_matrix, shot_matrix_in_new_basis, shot_perturbation,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("root iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("cannot find the roots of the zero polynomial")]
    ZeroPolynomial,
    #[error("parameter p = {0} is outside the supported range")]
    Parameter(u32),
    #[error("deviation recurrence disagrees with the direct computation at step {step}")]
    RecurrenceMismatch { step: usize },
    #[error(transparent)]
    Dds(#[from] crate::dds::DdsError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BezoutReport {
    pub p: u32,
    pub holds: bool,
    /// `S` is constant for `p = 1`, so there is nothing to check.
    pub vacuous: bool,
    pub a: RationalPolynomial,
    pub b: RationalPolynomial,
    pub combination: RationalPolynomial,
}

/// Verifies `a S + b S' = 1` with
/// `a = (1-p)/(p(p+1)) x + 1/p` and `b = (x² - x)/(p(p+1))`.
pub fn bezout_check(p: u32) -> BezoutReport {
    let pp = p as i64;
    let k = pp * (pp + 1);
    let a = RationalPolynomial::from_ratios(&[(1, pp), (1 - pp, k)]);
    let b = RationalPolynomial::from_ratios(&[(0, 1), (-1, k), (1, k)]);
    if p < 2 {
        return BezoutReport {
            p,
            holds: true,
            vacuous: true,
            a,
            b,
            combination: RationalPolynomial::one(),
        };
    }
    let s = poly_s(p);
    let combination = &(&a * &s) + &(&b * &s.derivative());
    BezoutReport { p, holds: combination == RationalPolynomial::one(), vacuous: false, a, b, combination }
}

/// `det(xI - M) == (x - 1) R(x)`.
pub fn averaging_char_poly_identity(p: u32) -> bool {
    let expected = &RationalPolynomial::linear_factor(BigRational::one()) * &poly_r(p);
    averaging_matrix(p).char_poly() == expected
}

/// `det(xI - A) == (x - 1)² R(x)`, the monic form of `(1-x)² R(x)`.
pub fn shot_char_poly_identity(p: u32) -> bool {
    let expected = &RationalPolynomial::linear_factor(BigRational::one()).pow(2) * &poly_r(p);
    shot_matrix(p).char_poly() == expected
}

/// `det(xI - O) == x R(x)`.
pub fn deviation_char_poly_identity(p: u32) -> bool {
    let expected = &RationalPolynomial::linear_factor(BigRational::zero()) * &poly_r(p);
    deviation_matrix(p).char_poly() == expected
}

/// Structural identities of the basis change and projection; each entry is
/// a named check with its outcome.
pub fn basis_identities(p: u32) -> Vec<(&'static str, bool)> {
    let n = p as usize + 1;
    let b = basis_change(p);
    let b_inv = basis_change_inverse(p);
    let a_prime = &(&b_inv * &shot_matrix(p)) * &b;
    let j_prime = &b_inv * &shot_perturbation(p);
    let proj = projection(p);
    let m = averaging_matrix(p);
    // e'_0 is the first column of B', the unit vector in B' coordinates.
    let e0: Vec<BigRational> = (0..n).map(|r| b.get(r, 0).clone()).collect();
    let unit0: Vec<BigRational> =
        (0..n).map(|r| if r == 0 { BigRational::one() } else { BigRational::zero() }).collect();
    vec![
        ("B' B'^-1 = I", &b * &b_inv == ExactMatrix::identity(n)),
        ("A' = B'^-1 A B' (displayed form)", a_prime == shot_matrix_in_new_basis(p)),
        ("J' = e_p", j_prime == shot_perturbation(p)),
        ("A e'_0 = e'_0", shot_matrix(p).mul_vec(&e0) == e0),
        ("A' e_0 = e_0", a_prime.mul_vec(&unit0) == unit0),
        ("P A' = M P", &proj * &a_prime == &m * &proj),
        ("K = P J'", &proj * &j_prime == averaging_perturbation(p)),
    ]
}

/// `D M Y = D M D Y` for the given vector.
pub fn centering_absorbs(p: u32, y: &[BigRational]) -> bool {
    let d = centering(p);
    let dm = &d * &averaging_matrix(p);
    dm.mul_vec(y) == dm.mul_vec(&d.mul_vec(y))
}

/// Roots of `R` for `p >= 2`.
pub fn roots_r(p: u32) -> Result<RootSet, SpectralError> {
    if p < 2 {
        return Err(SpectralError::Parameter(p));
    }
    aberth(&poly_r(p).to_f64_coeffs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub p: u32,
    pub eigenvalues: Vec<(f64, f64)>,
    /// `|det(λI - O)|` at each eigenvalue, from the exact characteristic polynomial.
    pub residuals: Vec<f64>,
    pub spectral_radius: f64,
    /// Worst distance in the nearest-neighbour pairing with `{0} ∪ roots(R)`;
    /// `None` when the counts differ.
    pub pairing_distance: Option<f64>,
}

/// Eigenvalues of `O` by Schur decomposition, paired against `{0} ∪ roots(R)`.
pub fn eigvals_o(p: u32) -> Result<EigenReport, SpectralError> {
    if p < 1 {
        return Err(SpectralError::Parameter(p));
    }
    let o = deviation_matrix(p);
    let eig: Vec<Complex64> = schur_eigenvalues(&o.to_f64());
    let cp = o.char_poly().to_f64_coeffs();
    let residuals = eig.iter().map(|&z| poly::horner(&cp, z).norm()).collect();

    let mut expected = vec![Complex64::new(0.0, 0.0)];
    if p >= 2 {
        expected.extend(roots_r(p)?.complex());
    }
    let pairing_distance = pairing_distance(&eig, &expected);
    Ok(EigenReport {
        p,
        spectral_radius: eig.iter().map(|z| z.norm()).fold(0.0, f64::max),
        eigenvalues: eig.iter().map(|z| (z.re, z.im)).collect(),
        residuals,
        pairing_distance,
    })
}

fn schur_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect()
}

/// Greedy nearest-neighbour matching; `None` when the counts differ.
pub fn pairing_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pool: Vec<Complex64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for &z in a {
        let (idx, d) = pool
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        worst = worst.max(d);
        pool.swap_remove(idx);
    }
    Some(worst)
}

/// Per-p summary of every spectral check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub p: u32,
    pub bezout: bool,
    pub char_poly_m: bool,
    pub char_poly_a: bool,
    pub char_poly_o: bool,
    pub basis_identities: bool,
    pub roots: Vec<(f64, f64)>,
    pub root_moduli: Vec<f64>,
    pub max_root_modulus: f64,
    pub modulus_bound: f64,
    pub max_root_residual: f64,
    /// `None` for a single root.
    pub min_root_separation: Option<f64>,
    pub spectral_radius_o: f64,
    pub o_inf_norm: f64,
    pub eigen_pairing_distance: Option<f64>,
    pub passed: bool,
}

/// Tolerances pinned for the spectral checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTolerances {
    pub modulus: f64,
    pub separation: f64,
    pub pairing: f64,
    pub residual: f64,
}

impl Default for SpectralTolerances {
    fn default() -> Self {
        SpectralTolerances { modulus: 1e-9, separation: 1e-8, pairing: 1e-8, residual: 1e-10 }
    }
}

pub fn spectral_report(p: u32, tol: SpectralTolerances) -> Result<SpectralReport, SpectralError> {
    if p < 2 {
        return Err(SpectralError::Parameter(p));
    }
    let roots = roots_r(p)?;
    let eig = eigvals_o(p)?;
    let bound = (p as f64 - 1.0) / p as f64;
    let bezout = bezout_check(p).holds;
    let char_poly_m = averaging_char_poly_identity(p);
    let char_poly_a = shot_char_poly_identity(p);
    let char_poly_o = deviation_char_poly_identity(p);
    let basis = basis_identities(p).iter().all(|(_, ok)| *ok);
    let max_root_modulus = roots.max_modulus();
    let passed = bezout
        && char_poly_m
        && char_poly_a
        && char_poly_o
        && basis
        && roots.len() == p as usize - 1
        && max_root_modulus <= bound + tol.modulus
        && roots.min_separation.is_none_or(|s| s > tol.separation)
        && roots.max_residual() < tol.residual
        && eig.spectral_radius <= bound + tol.modulus
        && eig.pairing_distance.is_some_and(|d| d <= tol.pairing);
    Ok(SpectralReport {
        p,
        bezout,
        char_poly_m,
        char_poly_a,
        char_poly_o,
        basis_identities: basis,
        root_moduli: roots.complex().iter().map(|z| z.norm()).collect(),
        roots: roots.roots.clone(),
        max_root_modulus,
        modulus_bound: bound,
        max_root_residual: roots.max_residual(),
        min_root_separation: roots.min_separation,
        spectral_radius_o: eig.spectral_radius,
        o_inf_norm: deviation_matrix(p).inf_norm(),
        eigen_pairing_distance: eig.pairing_distance,
        passed,
    })
}

/// `n₀ <= c log2(N) + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBound {
    pub c: f64,
    pub d: f64,
}

impl LogBound {
    /// `c = 1 / log2(p/(p-1))` from the spectral radius bound of `O`, and an
    /// additive allowance for the transient of the non-normal matrix.
    pub fn for_parameter(p: u32) -> Self {
        if p < 2 {
            return LogBound { c: 0.0, d: 1.0 };
        }
        let rho = (p as f64 - 1.0) / p as f64;
        LogBound { c: 1.0 / (1.0 / rho).log2(), d: 4.0 * (p as f64 + 1.0) }
    }

    pub fn admits(&self, n: u64, n0: usize) -> bool {
        let log = if n > 1 { (n as f64).log2() } else { 0.0 };
        (n0 as f64) <= self.c * log + self.d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZTrajectoryReport {
    pub p: u32,
    pub n: u64,
    /// `‖Z_i‖_∞` per step.
    pub z_norms: Vec<f64>,
    /// `max(Y_i) - min(Y_i)` per step.
    pub spreads: Vec<i64>,
    pub initial_spread: i64,
    /// `spread_0 <= (p+1)/p · N`.
    pub initial_spread_ok: bool,
    pub o_inf_norm: f64,
    pub spectral_radius: f64,
    /// `Σ_k ‖O^k L‖_∞`, bounding the accumulated perturbation.
    pub perturbation_sum: f64,
    /// `β = 1 + perturbation_sum`.
    pub beta: f64,
    /// `α = 2β`: a spread below this is reached within `predicted_n0` steps.
    pub alpha: f64,
    /// First step with spread below `α`.
    pub n0: Option<usize>,
    /// First `n` with `‖O^n‖_∞ ‖Z_0‖_∞ < 1`.
    pub predicted_n0: usize,
    pub within_predicted: bool,
    pub log_bound: LogBound,
    pub within_log_bound: bool,
    /// Steps at which `Y` is uniform but `Z` is not zero (always zero by definition).
    pub uniform_nonzero_z: usize,
}

fn rational_vec(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()
}

fn deviation(y: &[i64]) -> Vec<BigRational> {
    let mean = BigRational::new(y.iter().sum::<i64>().into(), (y.len() as i64).into());
    rational_vec(y).into_iter().map(|v| v - &mean).collect()
}

fn inf_norm_vec(v: &[BigRational]) -> f64 {
    v.iter().map(|x| rational_to_f64(x).abs()).fold(0.0, f64::max)
}

/// Deviation-from-mean trajectory `Z_i = Y_i - m_i 𝟙` of a fixed point.
///
/// `Z` is computed directly from `Y` and independently by iterating
/// `Z_{i+1} = O Z_i + (b_i/p) L` from `Z_0`; the two must agree exactly.
pub fn z_trajectory(fp: &FixedPoint, log_bound: LogBound) -> Result<ZTrajectoryReport, SpectralError> {
    let p = fp.p.p();
    let traj = AveragingTrajectory::from_fixed_point(fp)?;
    let o = deviation_matrix(p);
    let l = deviation_perturbation(p).as_vector();

    let direct: Vec<Vec<BigRational>> = traj.steps.iter().map(|s| deviation(&s.y.entries)).collect();
    let mut propagated = direct[0].clone();
    for (i, step) in traj.steps.iter().enumerate().skip(1) {
        let prev = &traj.steps[i - 1];
        let shift = ratio(prev.slope, p as i64);
        let one_step: Vec<BigRational> = o
            .mul_vec(&direct[i - 1])
            .into_iter()
            .zip(&l)
            .map(|(a, b)| a + &shift * b)
            .collect();
        propagated = o
            .mul_vec(&propagated)
            .into_iter()
            .zip(&l)
            .map(|(a, b)| a + &shift * b)
            .collect();
        if one_step != direct[i] || propagated != direct[i] {
            return Err(SpectralError::RecurrenceMismatch { step: i });
        }
        debug_assert_eq!(step.y.position, i);
    }
    // The window view must give the same Y_0.
    let y0 = to_averaging(&ShotWindow::initial(fp.p, fp.n, fp.shot_at(0)));
    if y0 != traj.steps[0].y {
        return Err(SpectralError::RecurrenceMismatch { step: 0 });
    }

    let z_norms: Vec<f64> = direct.iter().map(|z| inf_norm_vec(z)).collect();
    let spreads: Vec<i64> = traj.steps.iter().map(|s| s.stats.spread()).collect();
    let initial_spread = spreads[0];
    let p_i = p as i128;
    let initial_spread_ok = p_i * initial_spread as i128 <= (p_i + 1) * fp.n as i128;

    let o_f = o.to_f64();
    let l_f = nalgebra::DVector::from_vec(l.iter().map(rational_to_f64).collect());
    let mut perturbation_sum = 0.0;
    let mut v = l_f.clone();
    for _ in 0..100_000 {
        let norm = v.amax();
        perturbation_sum += norm;
        if norm < 1e-18 {
            break;
        }
        v = &o_f * v;
    }
    // Safety margin for floating-point accumulation.
    perturbation_sum *= 1.0 + 1e-9;
    let beta = 1.0 + perturbation_sum;
    let alpha = 2.0 * beta;

    let z0 = z_norms[0];
    let mut power = DMatrix::<f64>::identity(p as usize, p as usize);
    let mut predicted_n0 = 0;
    while inf_norm(&power) * z0 >= 1.0 - 1e-9 && predicted_n0 < 1_000_000 {
        power = &o_f * power;
        predicted_n0 += 1;
    }

    let n0 = spreads.iter().position(|&s| (s as f64) < alpha);
    let uniform_nonzero_z = traj
        .steps
        .iter()
        .zip(&direct)
        .filter(|(s, z)| s.y.is_uniform() && z.iter().any(|x| !x.is_zero()))
        .count();
    let eig = eigvals_o(p)?;

    Ok(ZTrajectoryReport {
        p,
        n: fp.n,
        initial_spread,
        initial_spread_ok,
        o_inf_norm: o.inf_norm(),
        spectral_radius: eig.spectral_radius,
        perturbation_sum,
        beta,
        alpha,
        within_predicted: n0.is_some_and(|n| n <= predicted_n0),
        within_log_bound: n0.is_some_and(|n| log_bound.admits(fp.n, n)),
        n0,
        predicted_n0,
        log_bound,
        uniform_nonzero_z,
        z_norms,
        spreads,
    })
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Minimum pairwise separation of a list of `(re, im)` pairs.
pub fn separation_of(points: &[(f64, f64)]) -> f64 {
    let z: Vec<Complex64> = points.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    min_separation(&z)
}
