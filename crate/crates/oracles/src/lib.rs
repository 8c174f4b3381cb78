//! Reference oracles for the besselwalk test suites.
//!
//! Everything in this crate is deliberately independent of the `besselwalk`
//! implementation: kernels are computed by literal path enumeration instead of
//! dynamic programming, special functions by direct series summation, and
//! integrals by adaptive quadrature. Test code compares the production
//! implementations against these slower but transparent routes.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::{BigInt, ToPrimitive, Zero};

/// Modified Bessel function I0 by direct summation of the ascending series
/// sum_k (z^2/4)^k / (k!)^2. All terms are positive, so no cancellation.
pub fn i0_series(z: f64, terms: usize) -> f64 {
    let q = z * z / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..terms {
        term *= q / ((k * k) as f64);
        sum += term;
    }
    sum
}

/// Large-argument asymptotic form e^z / sqrt(2 pi z) * (1 + 1/(8z) + 9/(2!(8z)^2) + ...),
/// truncated at `terms`. Only a cross-check: its attainable accuracy is limited
/// by the optimal-truncation floor of the divergent series.
pub fn i0_asymptotic(z: f64, terms: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..terms {
        let kf = k as f64;
        term *= (2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (8.0 * kf * z);
        sum += term;
    }
    z.exp() / (2.0 * std::f64::consts::PI * z).sqrt() * sum
}

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)] // recursion state
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 50)
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Minimal radial state ceil(d/2) - 1 of the lattice walk.
pub fn min_state(d: i64) -> i64 {
    (d + 1) / 2 - 1
}

/// One-step transition probabilities of the reflected radial walk, written
/// straight from the definitional formulas: a list of (target state, probability).
pub fn step_probs(d: i64, radius: i64, m: i64) -> Vec<(i64, BigRational)> {
    assert!(d >= 3 && m >= min_state(d) && m <= radius);
    if m == radius {
        // reflecting boundary: stay 1/2 + (d-1)/(4N), down 1/2 - (d-1)/(4N)
        vec![
            (m, ratio(2 * m + d - 1, 4 * m)),
            (m - 1, ratio(2 * m - d + 1, 4 * m)),
        ]
    } else if d % 2 == 0 && m == d / 2 - 1 {
        // even-d bottom state: forced up-step
        vec![(m + 1, ratio(1, 1))]
    } else {
        // interior: up 1/2 + (d-1)/(4m), down 1/2 - (d-1)/(4m)
        let up = ratio(2 * m + d - 1, 4 * m);
        let down = ratio(2 * m - d + 1, 4 * m);
        if down.is_zero() {
            vec![(m + 1, up)]
        } else {
            vec![(m + 1, up), (m - 1, down)]
        }
    }
}

/// n-step kernel row p_N(n, m0, .) by exhaustive enumeration of every path of
/// length n, in exact rational arithmetic. Exponential in n; intended for
/// n <= 10 or so.
pub fn kernel_by_enumeration(
    d: i64,
    radius: i64,
    n: u32,
    m0: i64,
) -> BTreeMap<i64, BigRational> {
    let mut out = BTreeMap::new();
    let mut stack: Vec<(i64, u32, BigRational)> = vec![(m0, 0, ratio(1, 1))];
    while let Some((m, k, p)) = stack.pop() {
        if k == n {
            *out.entry(m).or_insert_with(BigRational::zero) += p;
            continue;
        }
        for (m2, q) in step_probs(d, radius, m) {
            stack.push((m2, k + 1, &p * &q));
        }
    }
    out
}

/// Expected number of visits to `y` up to `horizon` steps, starting from `y`,
/// by summing the enumerated diagonal entries. Exponential; small cases only.
pub fn local_time_by_enumeration(d: i64, radius: i64, y: i64, horizon: u32) -> BigRational {
    let mut acc = ratio(1, 1); // the walk starts at y
    for k in 1..=horizon {
        let row = kernel_by_enumeration(d, radius, k, y);
        if let Some(p) = row.get(&y) {
            acc += p.clone();
        }
    }
    acc
}

/// Lossy conversion for comparing exact enumeration results against floating DP.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("rational out of f64 range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_known_i0_values() {
        assert!((i0_series(0.0, 30) - 1.0).abs() < 1e-15);
        assert!((i0_series(1.0, 30) - 1.2660658777520084).abs() < 1e-13);
    }

    #[test]
    fn enumeration_conserves_mass() {
        let row = kernel_by_enumeration(3, 5, 4, 2);
        let total: BigRational = row.values().cloned().sum();
        assert_eq!(total, ratio(1, 1));
    }

    #[test]
    fn simpson_integrates_polynomial() {
        let v = adaptive_simpson(&|x: f64| x * x, 0.0, 1.0, 1e-12);
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }
}
