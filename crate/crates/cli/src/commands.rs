use mongelab::characteristics::{equal_area_shock, evolve_front, uniform_seeds, CharError, DEFAULT_SEEDS};
use mongelab::implicit_engine::{make_relation, solve_u, DEFAULT_SCAN};
use mongelab::lambertw::Branch;
use mongelab::model::{Forcing, FunctionHandle, ModelError, PressureSpec, Profile};
use mongelab::series_engine::{
    break_time_closed, break_time_ratio, build_series, eval_series, front_face_position, lambert_front, SeriesError,
};
use mongelab::{extradim, Error};
use rayon::prelude::*;

use crate::config::{RunConfig, Solver};
use crate::table::{Cell, Table};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
struct Sample {
    xi: usize,
    x: f64,
    u: f64,
    /// Position among the roots at this point; 0 is the primary branch.
    branch: usize,
    solver: Solver,
}

fn solver_err(e: impl Into<Error>) -> CliError {
    CliError::Solver(e.into())
}

fn is_exponential(p: &Profile) -> bool {
    matches!(p, Profile::Exponential { .. })
}

fn branch_label(profile: &Profile, branch: usize) -> String {
    match (is_exponential(profile), branch) {
        (true, 0) => "W0".into(),
        (true, 1) => "W-1".into(),
        _ => branch.to_string(),
    }
}

/// `G` in the invariant-pair relation whose `t = 0` slice is the profile.
fn implicit_g(profile: &Profile, pressure: &PressureSpec) -> Result<FunctionHandle, CliError> {
    let Profile::LinearSegment { alpha, beta } = *profile else {
        return Err(solver_err(ModelError::UnsupportedVariant("implicit solver needs segment or exponential data")));
    };
    if beta == 0.0 {
        return Err(solver_err(ModelError::UnsupportedVariant("implicit solver needs a nonzero slope")));
    }
    Ok(match pressure.variant {
        Forcing::LinearInX { k } if k != 0.0 => FunctionHandle::Polynomial {
            coeffs: vec![-k * alpha / beta, -k / beta],
        },
        Forcing::PolyX { .. } => {
            return Err(solver_err(ModelError::UnsupportedVariant("implicit solver for polynomial g")))
        }
        _ => FunctionHandle::Polynomial {
            coeffs: vec![-alpha / beta, 1.0 / beta],
        },
    })
}

fn velocity_scale(cfg: &RunConfig, t: f64) -> f64 {
    let (a, b) = cfg.x_range;
    let umax = cfg.x_grid().iter().map(|&x| cfg.profile.value(x).abs()).fold(0.0, f64::max);
    let g = cfg.pressure.g(a, t).abs().max(cfg.pressure.g(b, t).abs());
    10.0 * (1.0 + umax + g * (1.0 + t.abs()))
}

fn series_samples(cfg: &RunConfig, t: f64, grid: &[f64]) -> Result<Vec<Sample>, CliError> {
    let mut out = Vec::new();
    for (xi, &x) in grid.iter().enumerate() {
        let ts = match build_series(&cfg.profile, &cfg.pressure, x, cfg.order) {
            Ok(ts) => ts,
            Err(SeriesError::Model(ModelError::Kink { .. })) => continue,
            Err(e) => return Err(solver_err(e)),
        };
        let e = eval_series(&ts, t);
        if !e.diverging && e.u.is_finite() {
            out.push(Sample { xi, x, u: e.u, branch: 0, solver: Solver::Series });
        }
    }
    Ok(out)
}

fn implicit_samples(cfg: &RunConfig, t: f64, grid: &[f64]) -> Result<Vec<Sample>, CliError> {
    let mut out = Vec::new();
    if let Profile::Exponential { a, l } = cfg.profile {
        for (xi, &x) in grid.iter().enumerate() {
            for (branch, b) in [Branch::Principal, Branch::Lower].into_iter().enumerate() {
                match lambert_front(a, l, &cfg.pressure, x, t, b) {
                    Ok(u) if u.is_finite() => out.push(Sample { xi, x, u, branch, solver: Solver::Implicit }),
                    Ok(_) | Err(SeriesError::Lambert(_)) => {}
                    Err(e) => return Err(solver_err(e)),
                }
            }
        }
        return Ok(out);
    }
    let rel = make_relation(&cfg.pressure, implicit_g(&cfg.profile, &cfg.pressure)?).map_err(solver_err)?;
    let r = velocity_scale(cfg, t);
    for (xi, &x) in grid.iter().enumerate() {
        match solve_u(&rel, x, t, (-r, r), DEFAULT_SCAN) {
            Ok(roots) => out.extend(roots.into_iter().map(|b| Sample {
                xi,
                x,
                u: b.u,
                branch: b.branch,
                solver: Solver::Implicit,
            })),
            Err(mongelab::ImplicitError::NoRoot) => {}
            Err(e) => return Err(solver_err(e)),
        }
    }
    Ok(out)
}

fn characteristic_samples(cfg: &RunConfig, t: f64, grid: &[f64]) -> Result<Vec<Sample>, CliError> {
    let (a, b) = cfg.x_range;
    let pad = 2.0 + (b - a);
    let seeds = uniform_seeds(a - pad, b + pad, DEFAULT_SEEDS);
    let front = evolve_front(&cfg.profile, &cfg.pressure, t, &seeds).map_err(solver_err)?;
    let mut out = Vec::new();
    for (xi, &x) in grid.iter().enumerate() {
        for (u, branch) in front.values_at(x) {
            out.push(Sample { xi, x, u, branch, solver: Solver::Characteristics });
        }
    }
    Ok(out)
}

fn extradim_samples(cfg: &RunConfig, t: f64, grid: &[f64]) -> Result<Vec<Sample>, CliError> {
    let mut out = Vec::new();
    let n = cfg.order;
    for (xi, &x) in grid.iter().enumerate() {
        let u = match extradim::solve_point(&cfg.profile, &cfg.pressure, x, t, n) {
            Ok(u) => u,
            Err(extradim::ExtraError::Model(ModelError::Kink { .. })) => continue,
            Err(e) => return Err(solver_err(e)),
        };
        // a truncated expansion beyond its radius is not a value of the solution
        let coarse = extradim::solve_point(&cfg.profile, &cfg.pressure, x, t, n - 2).map_err(solver_err)?;
        if u.is_finite() && (u - coarse).abs() <= 1e-6 * (1.0 + u.abs()) {
            out.push(Sample { xi, x, u, branch: 0, solver: Solver::Extradim });
        }
    }
    Ok(out)
}

fn samples_for(cfg: &RunConfig, solver: Solver, t: f64, grid: &[f64]) -> Result<Vec<Sample>, CliError> {
    match solver {
        Solver::Series => series_samples(cfg, t, grid),
        Solver::Implicit => implicit_samples(cfg, t, grid),
        Solver::Characteristics => characteristic_samples(cfg, t, grid),
        Solver::Extradim => extradim_samples(cfg, t, grid),
        Solver::All => unreachable!("expanded by the caller"),
    }
}

fn is_pre_break(cfg: &RunConfig, x: f64, t: f64) -> bool {
    if t <= 0.0 {
        return true;
    }
    match break_time_closed(&cfg.profile, &cfg.pressure, x) {
        Ok(tb) => t < tb,
        Err(SeriesError::NoBreak) => true,
        Err(_) => build_series(&cfg.profile, &cfg.pressure, x, cfg.order)
            .ok()
            .and_then(|ts| break_time_ratio(&ts).ok())
            .is_some_and(|tb| t < tb),
    }
}

/// Thread pool honouring `MONGELAB_THREADS`.
pub fn pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("MONGELAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            b = b.num_threads(n);
        }
    }
    b.build().expect("thread pool")
}

fn evolve_time(cfg: &RunConfig, t: f64, grid: &[f64]) -> Result<Vec<Vec<Cell>>, CliError> {
    let all = cfg.solver == Solver::All;
    let mut samples = Vec::new();
    if all {
        for s in Solver::CONCRETE {
            match samples_for(cfg, s, t, grid) {
                Ok(v) => samples.extend(v),
                // solvers that do not cover this data are left out of the comparison
                Err(CliError::Solver(Error::Model(ModelError::UnsupportedVariant(_))))
                | Err(CliError::Solver(Error::Series(SeriesError::Model(ModelError::UnsupportedVariant(_)))))
                | Err(CliError::Solver(Error::Implicit(mongelab::ImplicitError::Model(ModelError::UnsupportedVariant(_)))))
                | Err(CliError::Solver(Error::Extradim(_))) => {}
                Err(e) => return Err(e),
            }
        }
    } else {
        samples = samples_for(cfg, cfg.solver, t, grid)?;
    }
    let mut discrepancy = vec![None; grid.len()];
    if all {
        for (xi, &x) in grid.iter().enumerate() {
            let primary: Vec<f64> = samples.iter().filter(|s| s.xi == xi && s.branch == 0).map(|s| s.u).collect();
            if primary.len() >= 2 && is_pre_break(cfg, x, t) {
                let lo = primary.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = primary.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                discrepancy[xi] = Some(hi - lo);
            }
        }
    }
    samples.sort_by_key(|s| (s.xi, s.branch, Solver::CONCRETE.iter().position(|c| *c == s.solver)));
    Ok(samples
        .into_iter()
        .map(|s| {
            let mut row = vec![
                t.into(),
                s.x.into(),
                s.u.into(),
                branch_label(&cfg.profile, s.branch).into(),
                s.solver.name().into(),
            ];
            if all {
                row.push(discrepancy[s.xi].into());
            }
            row
        })
        .collect())
}

/// Rows `t,x,u,branch,solver[,discrepancy]`.
pub fn cmd_evolve(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut header = vec!["t", "x", "u", "branch", "solver"];
    if cfg.solver == Solver::All {
        header.push("discrepancy");
    }
    let grid = cfg.x_grid();
    let per_time: Vec<Result<Vec<Vec<Cell>>, CliError>> =
        pool().install(|| cfg.times.par_iter().map(|&t| evolve_time(cfg, t, &grid)).collect());
    let mut table = Table::new(header);
    for rows in per_time {
        for r in rows? {
            table.push(r);
        }
    }
    Ok(table)
}

/// Rows `x,t_break_closed,t_break_ratio,rel_diff`.
pub fn cmd_breaktime(cfg: &RunConfig) -> Result<Table, CliError> {
    let grid = cfg.x_grid();
    let rows: Vec<Result<Vec<Cell>, CliError>> = pool().install(|| {
        grid.par_iter()
            .map(|&x| {
                let closed = match break_time_closed(&cfg.profile, &cfg.pressure, x) {
                    Ok(v) => Some(Ok(v)),
                    Err(SeriesError::NoBreak) => Some(Err(())),
                    Err(SeriesError::Model(ModelError::UnsupportedVariant(_))) => None,
                    Err(e) => return Err(solver_err(e)),
                };
                let ts = build_series(&cfg.profile, &cfg.pressure, x, cfg.order).map_err(solver_err)?;
                let ratio = match break_time_ratio(&ts) {
                    Ok(v) => Some(Ok(v)),
                    Err(SeriesError::NoBreak) => Some(Err(())),
                    Err(SeriesError::InsufficientData { .. }) => None,
                    Err(e) => return Err(solver_err(e)),
                };
                let cell = |v: Option<Result<f64, ()>>| match v {
                    Some(Ok(v)) => Cell::Num(v),
                    Some(Err(())) => Cell::Text("NoBreak".into()),
                    None => Cell::Empty,
                };
                let rel = match (closed, ratio) {
                    (Some(Ok(c)), Some(Ok(r))) => Cell::Num((r - c).abs() / c.abs()),
                    _ => Cell::Empty,
                };
                Ok(vec![x.into(), cell(closed), cell(ratio), rel])
            })
            .collect()
    });
    let mut table = Table::new(vec!["x", "t_break_closed", "t_break_ratio", "rel_diff"]);
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}

/// Rows `t,x_face` for undriven exponential data.
pub fn cmd_front_face(cfg: &RunConfig) -> Result<Table, CliError> {
    let Profile::Exponential { a, l } = cfg.profile else {
        return Err(CliError::Config("front-face needs an exponential profile".into()));
    };
    if cfg.pressure.variant != Forcing::None {
        return Err(CliError::Config("front-face needs g = 0".into()));
    }
    let mut table = Table::new(vec!["t", "x_face"]);
    for &t in &cfg.times {
        let x = match front_face_position(a, l, t) {
            Ok(x) => Cell::Num(x),
            Err(SeriesError::NonPositiveTime { .. }) => Cell::Empty,
            Err(e) => return Err(solver_err(e)),
        };
        table.push(vec![t.into(), x]);
    }
    Ok(table)
}

/// Rows `t,position,u_left,u_right,u_middle,speed_rh,speed_fitted,area_residual`.
pub fn cmd_shock(cfg: &RunConfig) -> Result<Table, CliError> {
    let (a, b) = cfg.x_range;
    let seeds = uniform_seeds(a, b, cfg.n_samples.max(DEFAULT_SEEDS));
    let fits: Vec<Result<Option<mongelab::ShockFit>, CliError>> = pool().install(|| {
        cfg.times
            .par_iter()
            .map(|&t| {
                let front = evolve_front(&cfg.profile, &cfg.pressure, t, &seeds).map_err(solver_err)?;
                match equal_area_shock(&front) {
                    Ok(f) => Ok(Some(f)),
                    Err(CharError::NotMultivalued) => Ok(None),
                    Err(e) => Err(solver_err(e)),
                }
            })
            .collect()
    });
    let fits = fits.into_iter().collect::<Result<Vec<_>, _>>()?;
    let pos = |i: usize| fits[i].map(|f| f.position);
    let mut table = Table::new(vec![
        "t",
        "position",
        "u_left",
        "u_right",
        "u_middle",
        "speed_rh",
        "speed_fitted",
        "area_residual",
    ]);
    let times = &cfg.times;
    for (i, fit) in fits.iter().enumerate() {
        let t = times[i];
        let Some(f) = fit else {
            table.push(vec![t.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
            continue;
        };
        let lo = if i > 0 && pos(i - 1).is_some() { i - 1 } else { i };
        let hi = if i + 1 < fits.len() && pos(i + 1).is_some() { i + 1 } else { i };
        let fitted = (hi > lo).then(|| (pos(hi).unwrap() - pos(lo).unwrap()) / (times[hi] - times[lo]));
        table.push(vec![
            t.into(),
            f.position.into(),
            f.u_left.into(),
            f.u_right.into(),
            f.u_middle.into(),
            (-0.5 * (f.u_left + f.u_right)).into(),
            fitted.into(),
            f.area_residual.into(),
        ]);
    }
    Ok(table)
}
