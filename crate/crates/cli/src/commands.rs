//! Runners mapping each subcommand onto the library and collecting the
//! results into output tables. Each runner reports whether an asserted
//! property was violated (exit code 1) separately from domain errors.

use besselwalk::bessel_diffusion::{self, DiffusionConfig};
use besselwalk::interval_kernels::{self, Boundary};
use besselwalk::radial_chain::{self, BigRational, ChainSpec, Scalar};
use besselwalk::sphere_walk::{self, SpherePoint, TestFunction, WalkConfig};
use besselwalk::Result;

use crate::output::{Cell, Table};

/// Arithmetic selector for the exact-DP commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Float,
    Rational,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Float => "float",
            Mode::Rational => "rational",
        }
    }
}

fn base_table(command: &str, columns: Vec<&'static str>) -> Table {
    let mut t = Table::new(columns);
    t.meta("command", command);
    t.meta("version", env!("CARGO_PKG_VERSION"));
    t
}

pub fn loop_check(d: u32, radius: u32, mode: Mode) -> Result<(Table, bool)> {
    let spec = ChainSpec::reflected(d, radius)?;
    let mut t = base_table("loop-check", vec!["m", "loop_product", "closed_form", "diff"]);
    t.meta("d", d);
    t.meta("N", radius);
    t.meta("mode", mode.name());
    let pass = match mode {
        Mode::Float => {
            let report = radial_chain::check_loop_property::<f64>(&spec)?;
            for e in &report.entries {
                t.row(vec![
                    e.m.into(),
                    e.product.into(),
                    e.closed_form.map(Cell::Float).unwrap_or(Cell::Blank),
                    e.closed_form
                        .map(|cf| Cell::Float(e.product - cf))
                        .unwrap_or(Cell::Blank),
                ]);
            }
            if let Some(cap) = report.reflection_loop {
                t.meta("reflection_loop", crate::output::fmt_f64(cap));
            }
            report.pass()
        }
        Mode::Rational => {
            let report = radial_chain::check_loop_property::<BigRational>(&spec)?;
            for e in &report.entries {
                let p = e.product.to_f64();
                t.row(vec![
                    e.m.into(),
                    p.into(),
                    e.closed_form
                        .as_ref()
                        .map(|cf| Cell::Float(cf.to_f64()))
                        .unwrap_or(Cell::Blank),
                    e.closed_form
                        .as_ref()
                        .map(|cf| Cell::Float((e.product.clone() - cf.clone()).to_f64()))
                        .unwrap_or(Cell::Blank),
                ]);
            }
            if let Some(cap) = &report.reflection_loop {
                t.meta("reflection_loop", crate::output::fmt_f64(cap.to_f64()));
            }
            report.pass()
        }
    };
    t.meta("nondecreasing_and_capped", pass);
    Ok((t, !pass))
}

fn diag_monotone_generic<T: Scalar>(
    spec: &ChainSpec,
    n: u32,
    scan: bool,
    t: &mut Table,
) -> Result<bool> {
    if scan {
        let report = radial_chain::check_diagonal_monotone_up_to::<T>(spec, n)?;
        for v in &report.violations {
            t.row(vec![
                v.n.into(),
                v.m.into(),
                v.value.into(),
                v.next_value.into(),
            ]);
        }
        t.meta("steps_checked", report.steps_checked);
        t.meta("pairs_checked", report.pairs_checked);
        t.meta("violations", report.violations.len());
        Ok(report.pass())
    } else {
        let (diag, report) = radial_chain::check_diagonal_monotone::<T>(spec, n)?;
        for (m, v) in spec.states().zip(&diag) {
            t.row(vec![m.into(), v.to_f64().into()]);
        }
        t.meta("violations", report.violations.len());
        Ok(report.pass())
    }
}

pub fn diag_monotone(d: u32, radius: u32, n: u32, scan: bool, mode: Mode) -> Result<(Table, bool)> {
    let spec = ChainSpec::reflected(d, radius)?;
    let columns = if scan {
        vec!["n", "m", "value", "next_value"]
    } else {
        vec!["m", "diagonal"]
    };
    let mut t = base_table("diag-monotone", columns);
    t.meta("d", d);
    t.meta("N", radius);
    t.meta("n", n);
    t.meta("scan", scan);
    t.meta("mode", mode.name());
    let pass = match mode {
        Mode::Float => diag_monotone_generic::<f64>(&spec, n, scan, &mut t)?,
        Mode::Rational => diag_monotone_generic::<BigRational>(&spec, n, scan, &mut t)?,
    };
    Ok((t, !pass))
}

pub fn shift_monotone(d: u32, radius: u32, n: u32, mode: Mode) -> Result<(Table, bool)> {
    let spec = ChainSpec::reflected(d, radius)?;
    let mut t = base_table(
        "shift-monotone",
        vec!["m", "m_prime", "shift", "lhs", "rhs"],
    );
    t.meta("d", d);
    t.meta("N", radius);
    t.meta("n", n);
    t.meta("mode", mode.name());
    let report = match mode {
        Mode::Float => radial_chain::check_shift_monotone::<f64>(&spec, n)?,
        Mode::Rational => radial_chain::check_shift_monotone::<BigRational>(&spec, n)?,
    };
    for v in &report.violations {
        t.row(vec![
            v.m.into(),
            v.m_prime.into(),
            v.shift.into(),
            v.lhs.into(),
            v.rhs.into(),
        ]);
    }
    t.meta("pairs_checked", report.pairs_checked);
    t.meta("violations", report.violations.len());
    Ok((t, !report.pass()))
}

pub fn kernel_row(d: u32, radius: u32, n: u32, m0: u32, mode: Mode) -> Result<(Table, bool)> {
    let spec = ChainSpec::reflected(d, radius)?;
    let mut t = base_table("kernel-row", vec!["state", "probability"]);
    t.meta("d", d);
    t.meta("N", radius);
    t.meta("n", n);
    t.meta("m0", m0);
    t.meta("mode", mode.name());
    match mode {
        Mode::Float => {
            let row = radial_chain::kernel_row::<f64>(&spec, n, m0)?;
            for (m, p) in row.iter() {
                if *p > 0.0 {
                    t.row(vec![m.into(), (*p).into()]);
                }
            }
        }
        Mode::Rational => {
            let row = radial_chain::kernel_row::<BigRational>(&spec, n, m0)?;
            for (m, p) in row.iter() {
                if !p.is_zero_value() {
                    t.row(vec![m.into(), p.to_f64().into()]);
                }
            }
        }
    }
    Ok((t, false))
}

pub fn local_time(
    d: u32,
    radius: u32,
    horizon: u32,
    y: Option<u32>,
    mode: Mode,
) -> Result<(Table, bool)> {
    let spec = ChainSpec::reflected(d, radius)?;
    let mut t = base_table("local-time", vec!["y", "horizon", "expected_visits"]);
    t.meta("d", d);
    t.meta("N", radius);
    t.meta("horizon", horizon);
    t.meta("mode", mode.name());
    let mut violation = false;
    match y {
        Some(y) => {
            let v = match mode {
                Mode::Float => radial_chain::expected_local_time::<f64>(&spec, y, horizon)?,
                Mode::Rational => {
                    radial_chain::expected_local_time::<BigRational>(&spec, y, horizon)?.to_f64()
                }
            };
            t.row(vec![y.into(), horizon.into(), v.into()]);
        }
        None => {
            // all states, plus the nondecreasing-in-y check
            let profile: Vec<f64> = match mode {
                Mode::Float => radial_chain::local_time_profile::<f64>(&spec, horizon)?,
                Mode::Rational => {
                    let p = radial_chain::local_time_profile::<BigRational>(&spec, horizon)?;
                    // exact comparison before conversion
                    violation = p.windows(2).any(|w| w[0] > w[1]);
                    p.iter().map(|v| v.to_f64()).collect()
                }
            };
            if mode == Mode::Float {
                violation = profile.windows(2).any(|w| w[0] > w[1] + 1e-14);
            }
            for (m, v) in spec.states().zip(&profile) {
                t.row(vec![m.into(), horizon.into(), (*v).into()]);
            }
            t.meta("nondecreasing_in_y", !violation);
        }
    }
    Ok((t, violation))
}

pub fn local_time_scaling(d: u32, radii: &[u32]) -> Result<(Table, bool)> {
    let fit = radial_chain::local_time_scaling(d, radii)?;
    let mut t = base_table(
        "local-time-scaling",
        vec!["N", "horizon", "expected_visits", "fitted_slope"],
    );
    t.meta("d", d);
    t.meta(
        "N_list",
        radii
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    t.meta("slope", crate::output::fmt_f64(fit.slope));
    t.meta("intercept", crate::output::fmt_f64(fit.intercept));
    for p in &fit.points {
        t.row(vec![
            p.radius.into(),
            p.horizon.into(),
            p.expected_visits.into(),
            fit.slope.into(),
        ]);
    }
    Ok((t, false))
}

pub fn sphere_simulate(
    d: u32,
    radius: u32,
    steps: u32,
    paths: u64,
    seed: u64,
    start_norm: u32,
) -> Result<(Table, bool)> {
    let config = WalkConfig::new(d, radius, steps, paths, seed)?;
    let hist = sphere_walk::final_norm_histogram(&config, start_norm)?;
    let spec = config.chain_spec();
    let mut t = base_table("sphere-simulate", vec!["state", "count", "frequency"]);
    t.meta("d", d);
    t.meta("N", radius);
    t.meta("n", steps);
    t.meta("paths", paths);
    t.meta("seed", seed);
    t.meta("start_norm", start_norm);
    for (m, &c) in spec.states().zip(&hist) {
        t.row(vec![m.into(), c.into(), (c as f64 / paths as f64).into()]);
    }
    Ok((t, false))
}

pub fn radial_law_check(
    d: u32,
    radius: u32,
    steps: u32,
    paths: u64,
    seed: u64,
    start_norm: u32,
) -> Result<(Table, bool)> {
    let config = WalkConfig::new(d, radius, steps, paths, seed)?;
    let report = sphere_walk::radial_law_check(&config, start_norm)?;
    let mut t = base_table(
        "radial-law-check",
        vec!["state", "expected_prob", "observed_count", "observed_freq"],
    );
    t.meta("d", d);
    t.meta("N", radius);
    t.meta("n", steps);
    t.meta("paths", paths);
    t.meta("seed", seed);
    t.meta("start_norm", start_norm);
    for b in &report.bins {
        t.row(vec![
            b.state.into(),
            b.expected_prob.into(),
            b.observed.into(),
            (b.observed as f64 / paths as f64).into(),
        ]);
    }
    t.meta("chi_square", crate::output::fmt_f64(report.test.statistic));
    t.meta("dof", report.test.dof);
    t.meta("p_value", crate::output::fmt_f64(report.test.p_value));
    t.meta("pass", report.pass);
    Ok((t, !report.pass))
}

pub fn generator_check(
    function: TestFunction,
    d: u32,
    scale: u32,
    m0: u32,
    samples: u64,
    seed: u64,
) -> Result<(Table, bool)> {
    let x = SpherePoint::axis(d as usize, m0)?;
    let report = sphere_walk::generator_check(function, &x, scale, samples, seed)?;
    let mut t = base_table(
        "generator-check",
        vec!["estimate", "target", "stderr", "slack", "abs_error"],
    );
    t.meta("function", function.name());
    t.meta("d", d);
    t.meta("N", scale);
    t.meta("m0", m0);
    t.meta("samples", samples);
    t.meta("seed", seed);
    t.row(vec![
        report.estimate.into(),
        report.target.into(),
        report.stderr.into(),
        report.slack.into(),
        (report.estimate - report.target).abs().into(),
    ]);
    t.meta("pass", report.pass);
    Ok((t, !report.pass))
}

pub fn free_kernel_2d(t_time: f64, r: f64, rho_grid: &[f64]) -> Result<(Table, bool)> {
    let mut t = base_table("free-kernel-2d", vec!["rho", "density"]);
    t.meta("t", crate::output::fmt_f64(t_time));
    t.meta("r", crate::output::fmt_f64(r));
    for &rho in rho_grid {
        let q = bessel_diffusion::free_kernel_2d(t_time, r, rho)?;
        t.row(vec![rho.into(), q.into()]);
    }
    Ok((t, false))
}

pub fn estimate_diagonal(
    d: u32,
    t_time: f64,
    dt: f64,
    paths: u64,
    epsilon: f64,
    seed: u64,
    grid: &[f64],
) -> Result<(Table, bool)> {
    let config = DiffusionConfig::new(d, t_time, dt, paths, seed)?;
    let est = bessel_diffusion::estimate_diagonal(&config, grid, epsilon)?;
    let mut t = base_table("estimate-diagonal", vec!["r", "density", "stderr"]);
    t.meta("d", d);
    t.meta("t", crate::output::fmt_f64(t_time));
    t.meta("dt", crate::output::fmt_f64(dt));
    t.meta("paths", paths);
    t.meta("epsilon", crate::output::fmt_f64(epsilon));
    t.meta("seed", seed);
    for i in 0..est.r_grid.len() {
        t.row(vec![
            est.r_grid[i].into(),
            est.density[i].into(),
            est.stderr[i].into(),
        ]);
    }
    Ok((t, false))
}

pub fn counterexample_2d(
    t_time: f64,
    dt: f64,
    paths: u64,
    epsilon: f64,
    seed: u64,
) -> Result<(Table, bool)> {
    let report = bessel_diffusion::counterexample_2d(t_time, dt, paths, epsilon, seed)?;
    let mut t = base_table(
        "counterexample-2d",
        vec!["r", "density", "stderr", "closed_form_target"],
    );
    t.meta("d", 2);
    t.meta("t", crate::output::fmt_f64(t_time));
    t.meta("dt", crate::output::fmt_f64(dt));
    t.meta("paths", paths);
    t.meta("epsilon", crate::output::fmt_f64(epsilon));
    t.meta("seed", seed);
    t.row(vec![
        report.r1.into(),
        report.estimate.density[0].into(),
        report.estimate.stderr[0].into(),
        report.target1.into(),
    ]);
    t.row(vec![
        report.r2.into(),
        report.estimate.density[1].into(),
        report.estimate.stderr[1].into(),
        report.target2.into(),
    ]);
    t.meta("margin_sigmas", crate::output::fmt_f64(report.margin_sigmas));
    t.meta(
        "verdict",
        if report.confirmed {
            "non-monotone confirmed"
        } else {
            "not confirmed"
        },
    );
    Ok((t, !report.confirmed))
}

pub fn monotonicity_probe(
    d: u32,
    t_time: f64,
    grid: &[f64],
    dt: f64,
    paths: u64,
    epsilon: f64,
    seed: u64,
) -> Result<(Table, bool)> {
    let report = bessel_diffusion::monotonicity_probe(d, t_time, grid, dt, paths, epsilon, seed)?;
    let mut t = base_table("monotonicity-probe", vec!["r", "density", "stderr"]);
    t.meta("d", d);
    t.meta("t", crate::output::fmt_f64(t_time));
    t.meta("dt", crate::output::fmt_f64(dt));
    t.meta("paths", paths);
    t.meta("epsilon", crate::output::fmt_f64(epsilon));
    t.meta("seed", seed);
    let est = &report.estimate;
    for i in 0..est.r_grid.len() {
        t.row(vec![
            est.r_grid[i].into(),
            est.density[i].into(),
            est.stderr[i].into(),
        ]);
    }
    t.meta("violations", report.violations.len());
    for v in &report.violations {
        t.meta(
            "violation",
            format!(
                "{} > {} by {:.2} sigma",
                v.r_low, v.r_high, v.decrease_sigmas
            ),
        );
    }
    Ok((t, !report.pass()))
}

pub fn interval_kernel(
    t_time: f64,
    boundary: Boundary,
    points: usize,
    truncation: Option<usize>,
) -> Result<(Table, bool)> {
    let kern = match truncation {
        Some(k) => interval_kernels::SeriesKernel::with_truncation(t_time, k, boundary)?,
        None => interval_kernels::SeriesKernel::new(t_time, boundary)?,
    };
    let mut t = base_table("interval-kernel", vec!["x", "value"]);
    t.meta("t", crate::output::fmt_f64(t_time));
    t.meta(
        "boundary",
        match boundary {
            Boundary::Neumann => "neumann",
            Boundary::Dirichlet => "dirichlet",
        },
    );
    t.meta("truncation", kern.truncation());
    for i in 0..points {
        let x = i as f64 / (points - 1) as f64;
        t.row(vec![x.into(), kern.eval(x).into()]);
    }
    Ok((t, false))
}

pub fn interval_identity(t_time: f64, points: usize) -> Result<(Table, bool)> {
    let k = interval_kernels::required_truncation(t_time, interval_kernels::TAIL_TOLERANCE)?;
    let ct = interval_kernels::c_t(t_time, k)?;
    let mut t = base_table(
        "interval-identity",
        vec!["x", "neumann", "dirichlet", "sum_minus_ct", "deriv_sum"],
    );
    t.meta("t", crate::output::fmt_f64(t_time));
    t.meta("points", points);
    t.meta("truncation", k);
    t.meta("c_t", crate::output::fmt_f64(ct));
    let mut max_identity = 0.0f64;
    let mut interior = Vec::new();
    for i in 0..points {
        let x = i as f64 / (points - 1) as f64;
        let pn = interval_kernels::neumann_diag(t_time, x, k)?;
        let pd = interval_kernels::dirichlet_diag(t_time, x, k)?;
        let dev = pn + pd - ct;
        max_identity = max_identity.max(dev.abs());
        let deriv_sum = if x > 0.0 && x < 1.0 {
            interior.push(x);
            Cell::Float(
                interval_kernels::neumann_diag_dx(t_time, x, k)?
                    + interval_kernels::dirichlet_diag_dx(t_time, x, k)?,
            )
        } else {
            Cell::Blank
        };
        t.row(vec![x.into(), pn.into(), pd.into(), dev.into(), deriv_sum]);
    }
    let deriv = interval_kernels::derivative_relation_check(t_time, &interior, k)?;
    t.meta("max_sum_identity_dev", crate::output::fmt_f64(max_identity));
    t.meta(
        "max_deriv_identity_dev",
        crate::output::fmt_f64(deriv.max_identity_dev),
    );
    t.meta("max_deriv_fd_dev", crate::output::fmt_f64(deriv.max_fd_dev));
    let pass = max_identity < 1e-12 && deriv.pass();
    t.meta("pass", pass);
    Ok((t, !pass))
}
