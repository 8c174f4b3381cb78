//! Diagonal heat kernels of the unit interval (0, 1) by eigenfunction series.
//!
//! Neumann: p^N(t, x, x) = 1 + sum_{n>=1} 2 e^{-n^2 pi^2 t} cos^2(n pi x)
//! Dirichlet: p^D(t, x, x) = sum_{n>=1} 2 e^{-n^2 pi^2 t} sin^2(n pi x)
//!
//! Since cos^2 + sin^2 = 1, the two diagonals sum to the x-independent
//! constant C_t = 1 + sum 2 e^{-n^2 pi^2 t}, and their x-derivatives are
//! exact negatives of each other term by term.
//!
//! Truncation is chosen from the Gaussian tail bound
//! 2 sum_{n>K} e^{-n^2 pi^2 t} <= 2 e^{-K^2 pi^2 t} / (1 - e^{-pi^2 t}).
//! Times below 0.01 are rejected: the series is the wrong tool there.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tail-bound target used when choosing truncations adaptively.
pub const TAIL_TOLERANCE: f64 = 1e-14;

/// Smallest time the series evaluators accept.
pub const MIN_TIME: f64 = 0.01;

/// Boundary condition selecting one of the two diagonal kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::domain("time must be positive"));
    }
    if t < MIN_TIME {
        return Err(Error::domain(format!(
            "time {t} below {MIN_TIME}: the eigenfunction series converges too slowly"
        )));
    }
    Ok(())
}

/// Smallest K whose tail bound 2 e^{-K^2 pi^2 t} / (1 - e^{-pi^2 t}) is below `tol`.
pub fn required_truncation(t: f64, tol: f64) -> Result<usize> {
    check_time(t)?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::domain("tolerance must be positive"));
    }
    let denom = 1.0 - (-PI * PI * t).exp();
    let k = ((2.0 / (tol * denom)).ln() / (PI * PI * t)).sqrt().ceil();
    Ok((k as usize).max(1))
}

fn tail_bound(t: f64, k: usize) -> f64 {
    let kf = k as f64;
    2.0 * (-kf * kf * PI * PI * t).exp() / (1.0 - (-PI * PI * t).exp())
}

fn check_truncation(t: f64, k: usize) -> Result<()> {
    check_time(t)?;
    if k < 1 {
        return Err(Error::domain("truncation must be at least 1"));
    }
    if tail_bound(t, k) > TAIL_TOLERANCE {
        return Err(Error::domain(format!(
            "truncation K = {k} leaves a series tail above {TAIL_TOLERANCE} at t = {t}"
        )));
    }
    Ok(())
}

/// Neumann diagonal p^N(t, x, x), truncated at K terms.
pub fn neumann_diag(t: f64, x: f64, k: usize) -> Result<f64> {
    check_truncation(t, k)?;
    let mut sum = 1.0;
    for n in 1..=k {
        let nf = n as f64;
        let c = (nf * PI * x).cos();
        sum += 2.0 * (-nf * nf * PI * PI * t).exp() * c * c;
    }
    Ok(sum)
}

/// Dirichlet diagonal p^D(t, x, x), truncated at K terms.
pub fn dirichlet_diag(t: f64, x: f64, k: usize) -> Result<f64> {
    check_truncation(t, k)?;
    let mut sum = 0.0;
    for n in 1..=k {
        let nf = n as f64;
        let s = (nf * PI * x).sin();
        sum += 2.0 * (-nf * nf * PI * PI * t).exp() * s * s;
    }
    Ok(sum)
}

/// The x-independent sum C_t = p^N + p^D = 1 + sum 2 e^{-n^2 pi^2 t}.
pub fn c_t(t: f64, k: usize) -> Result<f64> {
    check_truncation(t, k)?;
    let mut sum = 1.0;
    for n in 1..=k {
        let nf = n as f64;
        sum += 2.0 * (-nf * nf * PI * PI * t).exp();
    }
    Ok(sum)
}

/// Term-wise analytic x-derivative of the Neumann diagonal:
/// -sum 2 n pi e^{-n^2 pi^2 t} sin(2 n pi x).
pub fn neumann_diag_dx(t: f64, x: f64, k: usize) -> Result<f64> {
    check_truncation(t, k)?;
    let mut sum = 0.0;
    for n in 1..=k {
        let nf = n as f64;
        sum -= 2.0 * nf * PI * (-nf * nf * PI * PI * t).exp() * (2.0 * nf * PI * x).sin();
    }
    Ok(sum)
}

/// Term-wise analytic x-derivative of the Dirichlet diagonal; the exact
/// negative of [`neumann_diag_dx`].
pub fn dirichlet_diag_dx(t: f64, x: f64, k: usize) -> Result<f64> {
    Ok(-neumann_diag_dx(t, x, k)?)
}

/// A truncated series evaluator with a certified tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesKernel {
    t: f64,
    truncation: usize,
    boundary: Boundary,
}

impl SeriesKernel {
    /// Chooses the truncation adaptively from the tail bound.
    pub fn new(t: f64, boundary: Boundary) -> Result<Self> {
        let truncation = required_truncation(t, TAIL_TOLERANCE)?;
        Ok(SeriesKernel {
            t,
            truncation,
            boundary,
        })
    }

    /// Uses an explicit truncation, which must still satisfy the tail bound.
    pub fn with_truncation(t: f64, truncation: usize, boundary: Boundary) -> Result<Self> {
        check_truncation(t, truncation)?;
        Ok(SeriesKernel {
            t,
            truncation,
            boundary,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Diagonal kernel value at x.
    pub fn eval(&self, x: f64) -> f64 {
        match self.boundary {
            Boundary::Neumann => neumann_diag(self.t, x, self.truncation),
            Boundary::Dirichlet => dirichlet_diag(self.t, x, self.truncation),
        }
        .expect("validated at construction")
    }

    /// Analytic x-derivative of the diagonal at x.
    pub fn eval_dx(&self, x: f64) -> f64 {
        match self.boundary {
            Boundary::Neumann => neumann_diag_dx(self.t, x, self.truncation),
            Boundary::Dirichlet => dirichlet_diag_dx(self.t, x, self.truncation),
        }
        .expect("validated at construction")
    }
}

/// Result of checking that the two diagonal derivatives are exact negatives,
/// with a finite-difference cross-check of the analytic formula.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    /// max over the grid of |d/dx p^N + d/dx p^D|
    pub max_identity_dev: f64,
    /// max over the grid of |analytic - central difference|
    pub max_fd_dev: f64,
    pub identity_tolerance: f64,
    pub fd_tolerance: f64,
}

impl DerivativeReport {
    pub fn pass(&self) -> bool {
        self.max_identity_dev <= self.identity_tolerance && self.max_fd_dev <= self.fd_tolerance
    }
}

/// Evaluates both analytic derivatives on an interior grid, asserting they
/// cancel to 1e-12, and cross-checks the Neumann derivative against a central
/// finite difference at step 1e-5 within 1e-6.
pub fn derivative_relation_check(t: f64, grid: &[f64], k: usize) -> Result<DerivativeReport> {
    check_truncation(t, k)?;
    const FD_STEP: f64 = 1e-5;
    let mut max_identity_dev = 0.0f64;
    let mut max_fd_dev = 0.0f64;
    for &x in grid {
        if !x.is_finite() || x <= 0.0 || x >= 1.0 {
            return Err(Error::domain(format!("grid point {x} outside (0, 1)")));
        }
        let dn = neumann_diag_dx(t, x, k)?;
        let dd = dirichlet_diag_dx(t, x, k)?;
        max_identity_dev = max_identity_dev.max((dn + dd).abs());
        let fd =
            (neumann_diag(t, x + FD_STEP, k)? - neumann_diag(t, x - FD_STEP, k)?) / (2.0 * FD_STEP);
        max_fd_dev = max_fd_dev.max((dn - fd).abs());
    }
    Ok(DerivativeReport {
        max_identity_dev,
        max_fd_dev,
        identity_tolerance: 1e-12,
        fd_tolerance: 1e-6,
    })
}
