//! Monte-Carlo simulator of the full d-dimensional lattice walk whose radial
//! part is the chain in [`crate::radial_chain`].
//!
//! The walk lives on points of integer norm. From x it moves to the radial
//! rescalings U(x) = (|x|+1)/|x| x and D(x) = (|x|-1)/|x| x, or to a uniform
//! point of the (d-2)-sphere C(x) = {y : |y| = |x|+1, y - D(x) perpendicular
//! to x}, which has center D(x) and radius 2 sqrt(|x|). Norm changes are
//! always +1, -1, or (at the reflecting radius only) 0, so the radial law can
//! be checked exactly against the DP kernel.
//!
//! Each path derives its own ChaCha stream from (seed, path index), making
//! every aggregate reproducible independently of worker count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::radial_chain::{self, ChainSpec};
use crate::stats::{self, ChiSquareTest};

/// A point of the walk's state space: a real d-vector of integer norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
    norm: f64,
}

impl SpherePoint {
    /// Builds a point, validating that the norm is an integer within 1e-9.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::domain("points need dimension >= 3"));
        }
        let norm = norm_of(&coords);
        let rounded = norm.round();
        if (norm - rounded).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "norm {norm} is not an integer within 1e-9"
            )));
        }
        Ok(SpherePoint {
            coords,
            norm: rounded,
        })
    }

    /// Axis point (m, 0, ..., 0) in dimension d.
    pub fn axis(d: usize, m: u32) -> Result<Self> {
        if d < 3 {
            return Err(Error::domain("points need dimension >= 3"));
        }
        let mut coords = vec![0.0; d];
        coords[0] = m as f64;
        Ok(SpherePoint {
            coords,
            norm: m as f64,
        })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn integer_norm(&self) -> u32 {
        self.norm as u32
    }

    /// Rescales coordinates so the stored norm is hit exactly, preventing
    /// rounding drift from accumulating over long runs.
    fn snapped(coords: Vec<f64>, target: f64) -> SpherePoint {
        let mut coords = coords;
        let n = norm_of(&coords);
        let scale = target / n;
        for c in coords.iter_mut() {
            *c *= scale;
        }
        SpherePoint {
            coords,
            norm: target,
        }
    }
}

fn norm_of(coords: &[f64]) -> f64 {
    coords.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// U(x): x scaled outward to norm |x| + 1.
pub fn up_point(x: &SpherePoint) -> Result<SpherePoint> {
    if x.norm < 1.0 {
        return Err(Error::domain("up_point needs |x| > 0"));
    }
    let target = x.norm + 1.0;
    let scale = target / x.norm;
    SpherePoint::new(x.coords.iter().map(|c| c * scale).collect())
        .map(|p| SpherePoint::snapped(p.coords, target))
}

/// D(x): x scaled inward to norm |x| - 1.
pub fn down_point(x: &SpherePoint) -> Result<SpherePoint> {
    if x.norm <= 1.0 {
        return Err(Error::domain(
            "down_point needs |x| > 1 (down-steps vanish at the minimal states)",
        ));
    }
    let target = x.norm - 1.0;
    let scale = target / x.norm;
    Ok(SpherePoint::snapped(
        x.coords.iter().map(|c| c * scale).collect(),
        target,
    ))
}

/// Uniform sample from C(x), the (d-2)-sphere of radius 2 sqrt(|x|) centered
/// at D(x) in the hyperplane orthogonal to x. A standard Gaussian vector is
/// projected onto the orthogonal complement of x and rescaled; rotation
/// invariance makes the result exactly uniform.
pub fn sample_circle<R: Rng>(x: &SpherePoint, rng: &mut R) -> Result<SpherePoint> {
    if x.dim() < 3 {
        return Err(Error::domain("circle set degenerates for d < 3"));
    }
    if x.norm < 1.0 {
        return Err(Error::domain("sample_circle needs |x| >= 1"));
    }
    let m = x.norm;
    let d = x.dim();
    let center_scale = (m - 1.0) / m;
    let radius = 2.0 * m.sqrt();
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let dot: f64 = g.iter().zip(&x.coords).map(|(a, b)| a * b).sum();
        let proj = dot / (m * m);
        let perp: Vec<f64> = g
            .iter()
            .zip(&x.coords)
            .map(|(a, b)| a - proj * b)
            .collect();
        let perp_norm = norm_of(&perp);
        if perp_norm < 1e-12 {
            continue; // astronomically rare; redraw
        }
        let coords: Vec<f64> = perp
            .iter()
            .zip(&x.coords)
            .map(|(p, c)| center_scale * c + radius / perp_norm * p)
            .collect();
        return Ok(SpherePoint::snapped(coords, m + 1.0));
    }
}

/// Walk configuration: dimension, reflecting radius, run length and budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub d: u32,
    pub radius: u32,
    pub steps: u32,
    pub paths: u64,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(d: u32, radius: u32, steps: u32, paths: u64, seed: u64) -> Result<Self> {
        ChainSpec::reflected(d, radius)?; // validates d and radius
        if paths == 0 {
            return Err(Error::domain("need at least one path"));
        }
        Ok(WalkConfig {
            d,
            radius,
            steps,
            paths,
            seed,
        })
    }

    pub fn chain_spec(&self) -> ChainSpec {
        ChainSpec::reflected(self.d, self.radius).expect("validated at construction")
    }

    fn check_point(&self, x: &SpherePoint) -> Result<()> {
        if x.dim() != self.d as usize {
            return Err(Error::domain("point dimension does not match config"));
        }
        self.chain_spec().check_state(x.integer_norm())
    }
}

/// One step of the reflected walk from `x`.
pub fn step<R: Rng>(x: &SpherePoint, config: &WalkConfig, rng: &mut R) -> Result<SpherePoint> {
    config.check_point(x)?;
    let d = config.d as f64;
    let m = x.norm;
    let u: f64 = rng.random();
    if x.integer_norm() == config.radius {
        let stay = 0.5 + (d - 1.0) / (4.0 * m);
        return if u < stay {
            Ok(x.clone())
        } else {
            down_point(x)
        };
    }
    if config.d.is_multiple_of(2) && x.integer_norm() == config.d / 2 - 1 {
        // forced outward move, split evenly between U(x) and the circle
        return if u < 0.5 {
            up_point(x)
        } else {
            sample_circle(x, rng)
        };
    }
    if u < 0.5 {
        up_point(x)
    } else if u < 1.0 - (d - 1.0) / (4.0 * m) {
        down_point(x)
    } else {
        sample_circle(x, rng)
    }
}

/// RNG stream for one path: identical (seed, index) gives identical draws.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Runs one path for `config.steps` steps and returns the final point.
pub fn simulate_path(config: &WalkConfig, start_norm: u32, path_index: u64) -> Result<SpherePoint> {
    let mut rng = path_rng(config.seed, path_index);
    let mut x = SpherePoint::axis(config.d as usize, start_norm)?;
    config.check_point(&x)?;
    for _ in 0..config.steps {
        x = step(&x, config, &mut rng)?;
    }
    Ok(x)
}

/// Histogram of final integer norms over `config.paths` independent paths,
/// indexed by state (min_state, ..., radius).
pub fn final_norm_histogram(config: &WalkConfig, start_norm: u32) -> Result<Vec<u64>> {
    let spec = config.chain_spec();
    spec.check_state(start_norm)?;
    let min = spec.min_state();
    let counts = (0..config.paths)
        .into_par_iter()
        .map(|i| {
            let x = simulate_path(config, start_norm, i).expect("validated config");
            x.integer_norm() - min
        })
        .fold(
            || vec![0u64; spec.num_states()],
            |mut acc, idx| {
                acc[idx as usize] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; spec.num_states()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(counts)
}

/// One cell of the radial-consistency comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialBin {
    pub state: u32,
    pub expected_prob: f64,
    pub observed: u64,
}

/// Chi-square comparison of simulated |X^N_n| against the exact DP row.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLawReport {
    pub bins: Vec<RadialBin>,
    pub test: ChiSquareTest,
    pub pass: bool,
}

/// Simulates `config.paths` trajectories for `config.steps` steps from the
/// axis point at `start_norm` and tests the empirical law of the final norm
/// against the exact kernel row. Passes when the p-value exceeds 0.001.
pub fn radial_law_check(config: &WalkConfig, start_norm: u32) -> Result<RadialLawReport> {
    let spec = config.chain_spec();
    let expected = radial_chain::kernel_row::<f64>(&spec, config.steps, start_norm)?;
    let observed = final_norm_histogram(config, start_norm)?;
    let probs: Vec<f64> = expected.iter().map(|(_, p)| *p).collect();
    let test = stats::chi_square_gof(&observed, &probs, 5.0)?;
    let bins = expected
        .iter()
        .zip(&observed)
        .map(|((state, p), &o)| RadialBin {
            state,
            expected_prob: *p,
            observed: o,
        })
        .collect();
    let pass = test.p_value > 0.001;
    Ok(RadialLawReport { bins, test, pass })
}

/// Smooth test functions with hard-coded Laplacians, used to probe the
/// generator of the rescaled walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// f(y) = y_1
    Linear,
    /// f(y) = y_1^2
    CoordinateQuadratic,
    /// f(y) = |y|^2
    RadialQuadratic,
    /// f(y) = y_1 y_2
    CrossProduct,
}

impl TestFunction {
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            TestFunction::Linear => y[0],
            TestFunction::CoordinateQuadratic => y[0] * y[0],
            TestFunction::RadialQuadratic => y.iter().map(|c| c * c).sum(),
            TestFunction::CrossProduct => y[0] * y[1],
        }
    }

    pub fn laplacian(&self, d: u32) -> f64 {
        match self {
            TestFunction::Linear => 0.0,
            TestFunction::CoordinateQuadratic => 2.0,
            TestFunction::RadialQuadratic => 2.0 * d as f64,
            TestFunction::CrossProduct => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Linear => "linear",
            TestFunction::CoordinateQuadratic => "coordinate-quadratic",
            TestFunction::RadialQuadratic => "radial-quadratic",
            TestFunction::CrossProduct => "cross-product",
        }
    }
}

/// Outcome of the single-jump generator probe at one interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorReport {
    pub test_point: SpherePoint,
    pub scale: u32,
    pub samples: u64,
    /// 2 N^2 E[f(X_1 / N) - f(x / N)]
    pub estimate: f64,
    /// Laplacian of f at x / N.
    pub target: f64,
    pub stderr: f64,
    /// Deterministic slack C / N added to the 3-sigma band.
    pub slack: f64,
    pub pass: bool,
}

/// Boundary drift constant read off the reflection step of the rescaled walk:
/// c_N = (1/N)(1/2 - (d-1)/(4N)). Positive for every admissible (d, N).
pub fn boundary_constant(d: u32, scale: u32) -> f64 {
    let n = scale as f64;
    (0.5 - (d as f64 - 1.0) / (4.0 * n)) / n
}

/// Slack constant for the generator band. The catalog functions are at most
/// quadratic, so their single-jump expansion carries no third-order term; the
/// C/N allowance is pure cushion.
pub const GENERATOR_SLACK_C: f64 = 0.5;

/// Monte-Carlo estimate of 2 N^2 E^x[f(X_1/N) - f(x/N)] against the Laplacian
/// of f at x/N. The test point must be interior: strictly between the minimal
/// state and the reflecting radius.
pub fn generator_check(
    f: TestFunction,
    x: &SpherePoint,
    scale: u32,
    samples: u64,
    seed: u64,
) -> Result<GeneratorReport> {
    let d = x.dim() as u32;
    let config = WalkConfig::new(d, scale, 1, samples.max(1), seed)?;
    let m = x.integer_norm();
    let spec = config.chain_spec();
    if m <= spec.min_state() || m >= scale {
        return Err(Error::domain(
            "generator probe needs an interior test point (boundary and bottom states carry reflection/O(N^-2) terms)",
        ));
    }
    if samples < 2 {
        return Err(Error::domain("need at least 2 samples"));
    }
    let n = scale as f64;
    let scaled_x: Vec<f64> = x.coords().iter().map(|c| c / n).collect();
    let f_x = f.eval(&scaled_x);
    let factor = 2.0 * n * n;

    // fixed-size blocks with per-block streams keep the sum independent of
    // the number of worker threads
    const BLOCK: u64 = 8192;
    let blocks = samples.div_ceil(BLOCK);
    let partials: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = path_rng(seed, b);
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(samples);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in lo..hi {
                let y = step(x, &config, &mut rng).expect("interior point");
                let scaled_y: Vec<f64> = y.coords().iter().map(|c| c / n).collect();
                let v = factor * (f.eval(&scaled_y) - f_x);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), &(s, q)| (a + s, b + q));
    let (estimate, stderr) = stats::mean_and_stderr(sum, sum_sq, samples);
    let target = f.laplacian(d);
    let slack = GENERATOR_SLACK_C / n;
    let pass = (estimate - target).abs() <= 3.0 * stderr + slack;
    Ok(GeneratorReport {
        test_point: x.clone(),
        scale,
        samples,
        estimate,
        target,
        stderr,
        slack,
        pass,
    })
}
