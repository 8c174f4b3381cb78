//! Exact dynamic-programming engine for the radial walks.
//!
//! The walk lives on integer radii m in {min_state(d), ..., N}. In the
//! interior it steps up with probability 1/2 + (d-1)/(4m) and down with
//! probability 1/2 - (d-1)/(4m); for even d the bottom state m = d/2 - 1
//! forces an up-step; the reflected chain stays at the boundary state N with
//! probability 1/2 + (d-1)/(4N) and steps down otherwise. Transitions are
//! tridiagonal, so one DP step is O(N).
//!
//! Everything is generic over the arithmetic: `f64` for large instances and
//! exact big rationals for ground truth. Comparisons carry a per-arithmetic
//! slack (zero for rationals, 1e-14 for floats).

pub use num::rational::BigRational;

use num::{BigInt, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::stats;

/// Arithmetic used by the DP: implemented for `f64` and [`BigRational`].
pub trait Scalar:
    Clone
    + PartialOrd
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Exact ratio num/den (correctly rounded for `f64`).
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Slack used when checking monotonicity inequalities.
    fn comparison_slack() -> Self;
    fn is_zero_value(&self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn comparison_slack() -> Self {
        1e-14
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("rational out of f64 range")
    }
    fn comparison_slack() -> Self {
        Zero::zero()
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
}

/// Minimal radial state ceil(d/2) - 1 of the lattice state space.
pub fn min_state(d: u32) -> Result<u32> {
    if d < 3 {
        return Err(Error::domain(format!("dimension must be >= 3, got {d}")));
    }
    Ok(d.div_ceil(2) - 1)
}

/// Dimension and reflection radius defining a radial chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSpec {
    d: u32,
    radius: u32,
    reflected: bool,
}

impl ChainSpec {
    /// Chain reflected at radius `radius`.
    pub fn reflected(d: u32, radius: u32) -> Result<Self> {
        let min = min_state(d)?;
        if radius < min + 2 {
            return Err(Error::domain(format!(
                "reflection radius {radius} too small for d = {d} (need >= {})",
                min + 2
            )));
        }
        Ok(ChainSpec {
            d,
            radius,
            reflected: true,
        })
    }

    /// Free chain started at `m0`, truncated at a working radius that is
    /// unreachable within `horizon` steps. Same DP, provably identical law.
    pub fn free(d: u32, m0: u32, horizon: u32) -> Result<Self> {
        let min = min_state(d)?;
        if m0 < min {
            return Err(Error::domain(format!(
                "start state {m0} below minimal state {min}"
            )));
        }
        Ok(ChainSpec {
            d,
            radius: m0 + horizon + 1,
            reflected: false,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    pub fn min_state(&self) -> u32 {
        self.d.div_ceil(2) - 1
    }

    pub fn num_states(&self) -> usize {
        (self.radius - self.min_state() + 1) as usize
    }

    pub fn states(&self) -> impl Iterator<Item = u32> {
        self.min_state()..=self.radius
    }

    pub fn check_state(&self, m: u32) -> Result<()> {
        if m < self.min_state() || m > self.radius {
            return Err(Error::domain(format!(
                "state {m} outside [{}, {}]",
                self.min_state(),
                self.radius
            )));
        }
        Ok(())
    }
}

/// One-step law at a state: probabilities of moving up, down, or staying.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLaw<T> {
    pub up: T,
    pub down: T,
    pub stay: T,
}

/// One-step transition law at state `m`. Each component is the correctly
/// rounded value of its defining ratio; sums are exact in rational mode and
/// within 1e-15 in floating mode.
pub fn step_law<T: Scalar>(spec: &ChainSpec, m: u32) -> Result<StepLaw<T>> {
    spec.check_state(m)?;
    let d = spec.d as i64;
    let mi = m as i64;
    if spec.reflected && m == spec.radius {
        return Ok(StepLaw {
            up: T::zero(),
            down: T::ratio(2 * mi - d + 1, 4 * mi),
            stay: T::ratio(2 * mi + d - 1, 4 * mi),
        });
    }
    if spec.d.is_multiple_of(2) && m == spec.d / 2 - 1 {
        // even-d bottom state: forced up-step
        return Ok(StepLaw {
            up: T::one(),
            down: T::zero(),
            stay: T::zero(),
        });
    }
    Ok(StepLaw {
        up: T::ratio(2 * mi + d - 1, 4 * mi),
        down: T::ratio(2 * mi - d + 1, 4 * mi),
        stay: T::zero(),
    })
}

/// A probability distribution over the chain's states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<T> {
    min_state: u32,
    values: Vec<T>,
}

impl<T: Scalar> ProbVector<T> {
    /// Point mass at `m`.
    pub fn point_mass(spec: &ChainSpec, m: u32) -> Result<Self> {
        spec.check_state(m)?;
        let mut values = vec![T::zero(); spec.num_states()];
        values[(m - spec.min_state()) as usize] = T::one();
        Ok(ProbVector {
            min_state: spec.min_state(),
            values,
        })
    }

    /// Distribution from (state, probability) pairs; mass must be 1.
    pub fn from_pairs(spec: &ChainSpec, pairs: &[(u32, T)]) -> Result<Self> {
        let mut values = vec![T::zero(); spec.num_states()];
        for (m, p) in pairs {
            spec.check_state(*m)?;
            values[(m - spec.min_state()) as usize] = p.clone();
        }
        let v = ProbVector {
            min_state: spec.min_state(),
            values,
        };
        if (v.total_mass().to_f64() - 1.0).abs() > 1e-12 {
            return Err(Error::domain("probabilities do not sum to 1"));
        }
        Ok(v)
    }

    pub fn get(&self, m: u32) -> Option<&T> {
        if m < self.min_state {
            return None;
        }
        self.values.get((m - self.min_state) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &T)> {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.min_state + i as u32, v))
    }

    pub fn total_mass(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc + v.clone())
    }
}

fn evolve_into<T: Scalar>(
    spec: &ChainSpec,
    laws: &[StepLaw<T>],
    src: &[T],
    dst: &mut [T],
) -> Result<()> {
    for v in dst.iter_mut() {
        *v = T::zero();
    }
    let top = src.len() - 1;
    if !spec.reflected && !src[top].is_zero_value() {
        return Err(Error::domain(
            "free-chain working radius reached; enlarge the horizon",
        ));
    }
    for (i, p) in src.iter().enumerate() {
        if p.is_zero_value() {
            continue;
        }
        let law = &laws[i];
        if !law.up.is_zero_value() {
            dst[i + 1] = dst[i + 1].clone() + p.clone() * law.up.clone();
        }
        if !law.down.is_zero_value() {
            dst[i - 1] = dst[i - 1].clone() + p.clone() * law.down.clone();
        }
        if !law.stay.is_zero_value() {
            dst[i] = dst[i].clone() + p.clone() * law.stay.clone();
        }
    }
    Ok(())
}

fn all_laws<T: Scalar>(spec: &ChainSpec) -> Result<Vec<StepLaw<T>>> {
    spec.states().map(|m| step_law(spec, m)).collect()
}

/// One-step pushforward of `dist` under the chain's law; mass is conserved.
pub fn evolve<T: Scalar>(spec: &ChainSpec, dist: &ProbVector<T>) -> Result<ProbVector<T>> {
    if dist.min_state != spec.min_state() || dist.values.len() != spec.num_states() {
        return Err(Error::domain("distribution does not match chain state space"));
    }
    let laws = all_laws::<T>(spec)?;
    let mut out = vec![T::zero(); dist.values.len()];
    evolve_into(spec, &laws, &dist.values, &mut out)?;
    Ok(ProbVector {
        min_state: dist.min_state,
        values: out,
    })
}

/// Kernel row p_N(n, m0, .) as a distribution over states.
pub fn kernel_row<T: Scalar>(spec: &ChainSpec, n: u32, m0: u32) -> Result<ProbVector<T>> {
    spec.check_state(m0)?;
    let laws = all_laws::<T>(spec)?;
    let mut cur = ProbVector::point_mass(spec, m0)?.values;
    let mut next = vec![T::zero(); cur.len()];
    for _ in 0..n {
        evolve_into(spec, &laws, &cur, &mut next)?;
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(ProbVector {
        min_state: spec.min_state(),
        values: cur,
    })
}

/// Loop product at one state, with the interior closed form when it applies.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopEntry<T> {
    pub m: u32,
    /// p(1, m, m+1) * p(1, m+1, m)
    pub product: T,
    /// 1/4 - (d-1)(d-3) / (16 (m^2 + m)), defined for 2m >= d - 1.
    pub closed_form: Option<T>,
}

/// Result of the nondecreasing-loop-property check.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopReport<T> {
    pub entries: Vec<LoopEntry<T>>,
    /// Squared stay probability at the reflecting boundary, if reflected.
    pub reflection_loop: Option<T>,
    /// Loop products are nondecreasing in m.
    pub nondecreasing: bool,
    /// Every loop product is dominated by the reflection loop.
    pub capped: bool,
}

impl<T> LoopReport<T> {
    pub fn pass(&self) -> bool {
        self.nondecreasing && self.capped
    }
}

/// Computes p(1, m, m+1) p(1, m+1, m) for every m < N, plus the boundary loop
/// p_N(1, N, N)^2, and checks that the sequence is nondecreasing and capped by
/// the boundary loop.
pub fn check_loop_property<T: Scalar>(spec: &ChainSpec) -> Result<LoopReport<T>> {
    let d = spec.d as i64;
    let mut entries = Vec::with_capacity(spec.num_states() - 1);
    for m in spec.min_state()..spec.radius {
        let up: StepLaw<T> = step_law(spec, m)?;
        let down_next: StepLaw<T> = step_law(spec, m + 1)?;
        let product = up.up * down_next.down;
        let mi = m as i64;
        let closed_form = if 2 * mi >= d - 1 {
            Some(T::ratio(1, 4) - T::ratio((d - 1) * (d - 3), 16 * (mi * mi + mi)))
        } else {
            None
        };
        entries.push(LoopEntry {
            m,
            product,
            closed_form,
        });
    }
    let reflection_loop = if spec.reflected {
        let boundary: StepLaw<T> = step_law(spec, spec.radius)?;
        Some(boundary.stay.clone() * boundary.stay)
    } else {
        None
    };
    let slack = T::comparison_slack();
    let nondecreasing = entries
        .windows(2)
        .all(|w| w[1].product.clone() + slack.clone() >= w[0].product);
    let capped = match &reflection_loop {
        Some(cap) => entries
            .iter()
            .all(|e| e.product.clone() <= cap.clone() + slack.clone()),
        None => true,
    };
    Ok(LoopReport {
        entries,
        reflection_loop,
        nondecreasing,
        capped,
    })
}

/// A failed adjacent-pair comparison on the kernel diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneViolation {
    pub n: u32,
    pub m: u32,
    pub value: f64,
    pub next_value: f64,
}

/// Outcome of a diagonal-monotonicity scan; empty violations means pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonotoneReport {
    pub steps_checked: u32,
    pub pairs_checked: u64,
    pub violations: Vec<MonotoneViolation>,
}

impl MonotoneReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Simultaneous DP rows from every starting state; yields the kernel diagonal
/// p_N(n, m, m) for all m at successive n in a single sweep.
struct DiagonalScanner<T> {
    laws: Vec<StepLaw<T>>,
    spec: ChainSpec,
    rows: Vec<Vec<T>>,
    scratch: Vec<T>,
}

impl<T: Scalar> DiagonalScanner<T> {
    fn new(spec: &ChainSpec) -> Result<Self> {
        let s = spec.num_states();
        let mut rows = Vec::with_capacity(s);
        for m in spec.states() {
            rows.push(ProbVector::point_mass(spec, m)?.values);
        }
        Ok(DiagonalScanner {
            laws: all_laws(spec)?,
            spec: *spec,
            rows,
            scratch: vec![T::zero(); s],
        })
    }

    fn advance(&mut self) -> Result<()> {
        for row in self.rows.iter_mut() {
            evolve_into(&self.spec, &self.laws, row, &mut self.scratch)?;
            std::mem::swap(row, &mut self.scratch);
        }
        Ok(())
    }

    fn diagonal(&self) -> Vec<T> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| row[i].clone())
            .collect()
    }
}

fn record_diag_violations<T: Scalar>(diag: &[T], n: u32, min: u32, report: &mut MonotoneReport) {
    let slack = T::comparison_slack();
    for (i, w) in diag.windows(2).enumerate() {
        report.pairs_checked += 1;
        if w[0] > w[1].clone() + slack.clone() {
            report.violations.push(MonotoneViolation {
                n,
                m: min + i as u32,
                value: w[0].to_f64(),
                next_value: w[1].to_f64(),
            });
        }
    }
}

/// Kernel diagonal p_N(n, m, m) for every state m.
pub fn diagonal<T: Scalar>(spec: &ChainSpec, n: u32) -> Result<Vec<T>> {
    let mut scanner = DiagonalScanner::<T>::new(spec)?;
    for _ in 0..n {
        scanner.advance()?;
    }
    Ok(scanner.diagonal())
}

/// Checks that the diagonal at step `n` is nondecreasing across consecutive
/// states; returns the diagonal alongside the report.
pub fn check_diagonal_monotone<T: Scalar>(
    spec: &ChainSpec,
    n: u32,
) -> Result<(Vec<T>, MonotoneReport)> {
    let diag = diagonal::<T>(spec, n)?;
    let mut report = MonotoneReport {
        steps_checked: n,
        ..Default::default()
    };
    record_diag_violations(&diag, n, spec.min_state(), &mut report);
    Ok((diag, report))
}

/// Checks the diagonal at every step n = 0, ..., n_max in one sweep.
pub fn check_diagonal_monotone_up_to<T: Scalar>(
    spec: &ChainSpec,
    n_max: u32,
) -> Result<MonotoneReport> {
    let mut scanner = DiagonalScanner::<T>::new(spec)?;
    let mut report = MonotoneReport {
        steps_checked: n_max,
        ..Default::default()
    };
    record_diag_violations(&scanner.diagonal(), 0, spec.min_state(), &mut report);
    for n in 1..=n_max {
        scanner.advance()?;
        record_diag_violations(&scanner.diagonal(), n, spec.min_state(), &mut report);
    }
    Ok(report)
}

/// A failed shifted-kernel comparison p_N(n, m, m') <= p_N(n, m+p, m'+p).
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftViolation {
    pub m: u32,
    pub m_prime: u32,
    pub shift: u32,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of the shifted-kernel check; empty violations means pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShiftReport {
    pub pairs_checked: u64,
    pub violations: Vec<ShiftViolation>,
}

impl ShiftReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For all m' < m, p > 0 with m + p <= N, checks
/// p_N(n, m, m') <= p_N(n, m+p, m'+p).
pub fn check_shift_monotone<T: Scalar>(spec: &ChainSpec, n: u32) -> Result<ShiftReport> {
    let rows: Vec<ProbVector<T>> = spec
        .states()
        .map(|m| kernel_row(spec, n, m))
        .collect::<Result<_>>()?;
    let min = spec.min_state();
    let slack = T::comparison_slack();
    let mut report = ShiftReport::default();
    for m in spec.states() {
        for m_prime in min..m {
            for p in 1..=(spec.radius - m) {
                let lhs = rows[(m - min) as usize].get(m_prime).unwrap();
                let rhs = rows[(m + p - min) as usize].get(m_prime + p).unwrap();
                report.pairs_checked += 1;
                if *lhs > rhs.clone() + slack.clone() {
                    report.violations.push(ShiftViolation {
                        m,
                        m_prime,
                        shift: p,
                        lhs: lhs.to_f64(),
                        rhs: rhs.to_f64(),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Expected number of visits to `y` within `horizon` steps, starting at `y`:
/// the partial sum of the kernel diagonal at y.
pub fn expected_local_time<T: Scalar>(spec: &ChainSpec, y: u32, horizon: u32) -> Result<T> {
    spec.check_state(y)?;
    let laws = all_laws::<T>(spec)?;
    let idx = (y - spec.min_state()) as usize;
    let mut cur = ProbVector::point_mass(spec, y)?.values;
    let mut next = vec![T::zero(); cur.len()];
    let mut acc = T::one(); // k = 0 term: the walk starts at y
    for _ in 1..=horizon {
        evolve_into(spec, &laws, &cur, &mut next)?;
        std::mem::swap(&mut cur, &mut next);
        acc = acc + cur[idx].clone();
    }
    Ok(acc)
}

/// Expected visit counts summary for one starting state.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeReport {
    pub start_state: u32,
    pub horizon: u32,
    pub expected_visits: f64,
}

/// Floating-mode convenience wrapper around [`expected_local_time`].
pub fn local_time_report(spec: &ChainSpec, y: u32, horizon: u32) -> Result<LocalTimeReport> {
    Ok(LocalTimeReport {
        start_state: y,
        horizon,
        expected_visits: expected_local_time::<f64>(spec, y, horizon)?,
    })
}

/// E^y(L_y^horizon) for every state y, in one simultaneous sweep.
pub fn local_time_profile<T: Scalar>(spec: &ChainSpec, horizon: u32) -> Result<Vec<T>> {
    let mut scanner = DiagonalScanner::<T>::new(spec)?;
    let mut acc = scanner.diagonal();
    for _ in 1..=horizon {
        scanner.advance()?;
        for (a, v) in acc.iter_mut().zip(scanner.diagonal()) {
            *a = a.clone() + v;
        }
    }
    Ok(acc)
}

/// One data point of the boundary local-time scaling fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub radius: u32,
    pub horizon: u32,
    pub expected_visits: f64,
}

/// Least-squares fit of log E^N(L_N^{N^2}) against log N.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<ScalingPoint>,
}

/// Fits the growth exponent of the expected boundary local time over one
/// relaxation window, E^N(L_N^{N^2}), across the given radii. Sublinear-in-N^2
/// growth shows as a slope strictly below 2.
pub fn local_time_scaling(d: u32, radii: &[u32]) -> Result<ScalingFit> {
    let mut distinct = radii.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::domain(
            "local-time scaling fit needs at least 3 distinct radii",
        ));
    }
    let mut points = Vec::with_capacity(distinct.len());
    for &radius in &distinct {
        let spec = ChainSpec::reflected(d, radius)?;
        let horizon = radius
            .checked_mul(radius)
            .ok_or_else(|| Error::domain("radius too large for N^2 horizon"))?;
        let lt = expected_local_time::<f64>(&spec, radius, horizon)?;
        points.push(ScalingPoint {
            radius,
            horizon,
            expected_visits: lt,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.radius as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.expected_visits.ln()).collect();
    let (slope, intercept) = stats::linear_fit(&xs, &ys)?;
    Ok(ScalingFit {
        slope,
        intercept,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rat(num: i64, den: i64) -> BigRational {
        <BigRational as Scalar>::ratio(num, den)
    }

    #[test]
    fn min_state_by_parity() {
        assert_eq!(min_state(3).unwrap(), 1);
        assert_eq!(min_state(4).unwrap(), 1);
        assert_eq!(min_state(5).unwrap(), 2);
        assert_eq!(min_state(6).unwrap(), 2);
        assert!(min_state(2).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ChainSpec::reflected(3, 3).is_ok());
        assert!(ChainSpec::reflected(3, 2).is_err());
        assert!(ChainSpec::reflected(2, 10).is_err());
    }

    #[test]
    fn step_law_special_cases() {
        let spec = ChainSpec::reflected(4, 10).unwrap();
        let law: StepLaw<f64> = step_law(&spec, 1).unwrap();
        assert_eq!((law.up, law.down, law.stay), (1.0, 0.0, 0.0));

        let spec = ChainSpec::reflected(3, 10).unwrap();
        let law: StepLaw<f64> = step_law(&spec, 1).unwrap();
        assert_eq!(law.up, 1.0);
        assert_eq!(law.down, 0.0);

        let law: StepLaw<f64> = step_law(&spec, 10).unwrap();
        assert_eq!(law.stay, 0.55);
        assert_eq!(law.down, 0.45);
        assert_eq!(law.up, 0.0);

        let law: StepLaw<f64> = step_law(&spec, 5).unwrap();
        assert_eq!(law.up, 0.6);
        assert_eq!(law.down, 0.4);

        assert!(step_law::<f64>(&spec, 0).is_err());
        assert!(step_law::<f64>(&spec, 11).is_err());
    }

    #[test]
    fn step_law_sums_to_one() {
        for d in 3..=9u32 {
            let spec = ChainSpec::reflected(d, 17).unwrap();
            for m in spec.states() {
                let f: StepLaw<f64> = step_law(&spec, m).unwrap();
                assert!((f.up + f.down + f.stay - 1.0).abs() <= 1e-15, "d={d} m={m}");
                for c in [f.up, f.down, f.stay] {
                    assert!((0.0..=1.0).contains(&c));
                }
                let r: StepLaw<BigRational> = step_law(&spec, m).unwrap();
                assert_eq!(r.up + r.down + r.stay, rat(1, 1));
            }
        }
    }

    #[test]
    fn evolve_from_boundary_and_bottom() {
        let spec = ChainSpec::reflected(3, 5).unwrap();
        let dist = ProbVector::<f64>::point_mass(&spec, 5).unwrap();
        let next = evolve(&spec, &dist).unwrap();
        assert_eq!(*next.get(5).unwrap(), 0.6);
        assert_eq!(*next.get(4).unwrap(), 0.4);

        let spec = ChainSpec::reflected(4, 5).unwrap();
        let dist = ProbVector::<f64>::point_mass(&spec, 1).unwrap();
        let next = evolve(&spec, &dist).unwrap();
        assert_eq!(*next.get(2).unwrap(), 1.0);
        assert_eq!(next.total_mass(), 1.0);
    }

    #[test]
    fn kernel_row_basics() {
        let spec = ChainSpec::reflected(3, 5).unwrap();
        let row = kernel_row::<f64>(&spec, 0, 3).unwrap();
        assert_eq!(*row.get(3).unwrap(), 1.0);
        assert_eq!(row.total_mass(), 1.0);

        // two-step return probability at m0 = 2:
        // up(2) down(3) + down(2) up(1) = 3/4 * 1/3 + 1/4 * 1 = 1/2
        let row = kernel_row::<BigRational>(&spec, 2, 2).unwrap();
        assert_eq!(*row.get(2).unwrap(), rat(1, 2));

        // interior loops are constant for d = 3, so the m0 = 3 return
        // probability is also exactly 1/2 (no boundary contact at n = 2)
        let row = kernel_row::<BigRational>(&spec, 2, 3).unwrap();
        assert_eq!(*row.get(3).unwrap(), rat(1, 2));

        assert!(kernel_row::<f64>(&spec, 2, 0).is_err());
    }

    #[test]
    fn kernel_row_mass_conserved_long_run() {
        let spec = ChainSpec::reflected(3, 10).unwrap();
        let row = kernel_row::<f64>(&spec, 10_000, 5).unwrap();
        assert!((row.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loop_products_d3_constant() {
        let spec = ChainSpec::reflected(3, 50).unwrap();
        let report = check_loop_property::<BigRational>(&spec).unwrap();
        for e in &report.entries {
            assert_eq!(e.product, rat(1, 4), "m = {}", e.m);
            assert_eq!(e.closed_form.as_ref().unwrap(), &rat(1, 4));
        }
        assert!(report.pass());
    }

    #[test]
    fn loop_products_d4_bottom_and_next() {
        let spec = ChainSpec::reflected(4, 10).unwrap();
        let report = check_loop_property::<BigRational>(&spec).unwrap();
        // m = d/2 - 1 = 1: loop = 1/(2d) = 1/8; closed form does not apply
        assert_eq!(report.entries[0].m, 1);
        assert_eq!(report.entries[0].product, rat(1, 8));
        assert!(report.entries[0].closed_form.is_none());
        // m = d/2 = 2: loop = (6d-3)/(4d^2+8d) = 21/96
        assert_eq!(report.entries[1].product, rat(21, 96));
        assert_eq!(
            report.entries[1].closed_form.as_ref().unwrap(),
            &rat(21, 96)
        );
        assert!(report.pass());
    }

    #[test]
    fn loop_products_match_closed_form_f64() {
        for d in 3..=10u32 {
            let spec = ChainSpec::reflected(d, 40).unwrap();
            let report = check_loop_property::<f64>(&spec).unwrap();
            assert!(report.pass(), "d = {d}");
            for e in &report.entries {
                if let Some(cf) = e.closed_form {
                    assert!((e.product - cf).abs() < 1e-15, "d={d} m={}", e.m);
                }
            }
        }
    }

    #[test]
    fn diagonal_monotone_small_case() {
        let spec = ChainSpec::reflected(3, 5).unwrap();
        let (diag, report) = check_diagonal_monotone::<f64>(&spec, 2).unwrap();
        // hand-computed: [1/4, 1/2, 1/2, 1/2, 0.61]
        assert_relative_eq!(diag[0], 0.25, max_relative = 1e-15);
        assert_relative_eq!(diag[1], 0.5, max_relative = 1e-15);
        assert_relative_eq!(diag[3], 0.5, max_relative = 1e-15);
        assert_relative_eq!(diag[4], 0.61, max_relative = 1e-15);
        assert!(report.pass());

        // n = 0: diagonal identically one
        let (diag, report) = check_diagonal_monotone::<f64>(&spec, 0).unwrap();
        assert!(diag.iter().all(|&v| v == 1.0));
        assert!(report.pass());
    }

    #[test]
    fn diagonal_monotone_long_run() {
        let spec = ChainSpec::reflected(4, 20).unwrap();
        let report = check_diagonal_monotone_up_to::<f64>(&spec, 1000).unwrap();
        assert!(report.pass(), "violations: {:?}", report.violations);
        assert_eq!(report.steps_checked, 1000);
    }

    #[test]
    fn shift_monotone_degenerate_and_small() {
        let spec = ChainSpec::reflected(3, 8).unwrap();
        // n = 0: off-diagonal entries are all zero on both sides
        let report = check_shift_monotone::<BigRational>(&spec, 0).unwrap();
        assert!(report.pass());
        // n = 1: reduces to monotonicity of the down-step probability
        let report = check_shift_monotone::<BigRational>(&spec, 1).unwrap();
        assert!(report.pass());
        let report = check_shift_monotone::<BigRational>(&spec, 6).unwrap();
        assert!(report.pass());
        assert!(report.pairs_checked > 0);
    }

    #[test]
    fn free_chain_parity_and_guard() {
        let spec = ChainSpec::free(3, 5, 9).unwrap();
        assert!(!spec.is_reflected());
        for n in [1u32, 3, 5, 7, 9] {
            let row = kernel_row::<f64>(&spec, n, 5).unwrap();
            assert_eq!(*row.get(5).unwrap(), 0.0, "odd n = {n}");
        }
        // beyond the working horizon the truncation must refuse, not leak
        assert!(kernel_row::<f64>(&spec, 100, 5).is_err());
    }

    #[test]
    fn local_time_small_values() {
        let spec = ChainSpec::reflected(3, 5).unwrap();
        assert_eq!(expected_local_time::<f64>(&spec, 2, 0).unwrap(), 1.0);
        // 1 + 0 + 1/2 from the two-step return probability
        assert_eq!(expected_local_time::<BigRational>(&spec, 2, 2).unwrap(), rat(3, 2));
        let report = local_time_report(&spec, 2, 2).unwrap();
        assert_eq!(report.expected_visits, 1.5);
        assert!(report.expected_visits <= report.horizon as f64 + 1.0);
    }

    #[test]
    fn local_time_profile_nondecreasing() {
        let spec = ChainSpec::reflected(3, 16).unwrap();
        let profile = local_time_profile::<f64>(&spec, 256).unwrap();
        for w in profile.windows(2) {
            assert!(w[0] <= w[1] + 1e-14, "profile decreases: {w:?}");
        }
        // profile agrees with per-state computation
        let lt = expected_local_time::<f64>(&spec, 7, 256).unwrap();
        assert_relative_eq!(profile[6], lt, max_relative = 1e-13);
    }

    #[test]
    fn scaling_fit_validates_input() {
        assert!(local_time_scaling(3, &[16, 16, 16]).is_err());
        assert!(local_time_scaling(3, &[16, 32]).is_err());
        let fit = local_time_scaling(3, &[8, 16, 32]).unwrap();
        assert!(fit.slope > 0.5 && fit.slope < 2.0, "slope = {}", fit.slope);
        // higher dimension, same sublinear-in-N^2 behavior
        let fit = local_time_scaling(5, &[16, 32, 64]).unwrap();
        assert!(fit.slope < 1.9, "slope = {}", fit.slope);
    }

    #[test]
    fn rational_and_float_modes_agree() {
        for (d, radius, n) in [(3u32, 30u32, 200u32), (4, 8, 120), (5, 9, 80)] {
            let spec = ChainSpec::reflected(d, radius).unwrap();
            let rf = kernel_row::<f64>(&spec, n, spec.min_state() + 1).unwrap();
            let rr = kernel_row::<BigRational>(&spec, n, spec.min_state() + 1).unwrap();
            for (m, v) in rr.iter() {
                assert!(
                    (Scalar::to_f64(v) - rf.get(m).unwrap()).abs() < 1e-12,
                    "d={d} N={radius} n={n} m={m}"
                );
            }
        }
    }
}
