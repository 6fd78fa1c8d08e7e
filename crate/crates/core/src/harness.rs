//! Executes a [`RunConfig`] and writes its CSV tables.
//!
//! Table layouts:
//!
//! * phase: `t_over_tau,phi_u,phi_g,delta_phi,defined_flag`
//! * trajectory: `t_over_tau,x,y,z`
//! * elements: `t_over_tau,rho00,rho11,rho22,re_rho12,im_rho12`
//! * berry: `delta_over_lambda,n,berry_plus,berry_minus`
//! * correction map: `delta_over_lambda,gamma_over_lambda,p_over_lambda,t_over_tau,phi_u,phi_g,delta_phi,defined_flag`
//!
//! Every file starts with `#` comments holding the crate version and the
//! resolved configuration, which [`RunConfig::from_csv_header`] parses back.
//! Undefined phases are written as `NaN` with `defined_flag = 0`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bloch::{curve_table, BlochCurve};
use crate::config::{Axis, BlochSource, Mode, RunConfig};
use crate::csv::{format_flag, format_number, CsvTable};
use crate::error::{Error, Result};
use crate::lindblad::{default_step, integrate_master, Density3};
use crate::mixed::{correction_sweep, eigen_track, phase_pair, PhasePair};
use crate::model::{berry_phase, Branch, JcParams};
use crate::phase::PhaseSeries;
use crate::unitary::{kinematic_gp, phase_shift_loop, propagate};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable that caps the number of sweep workers.
pub const WORKERS_ENV: &str = "JCGP_WORKERS";

/// One table produced by a run, or the numerical failure that prevented it.
#[derive(Debug)]
pub struct Output {
    pub path: PathBuf,
    pub table: std::result::Result<CsvTable, String>,
    /// Rows whose requested observation is undefined.
    pub undefined_rows: usize,
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub written: Vec<PathBuf>,
    /// Human-readable numerical problems, one per affected file.
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            3
        }
    }
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Computes every table of `config` without touching the file system.
pub fn render(config: &RunConfig) -> Result<Vec<Output>> {
    let header = header_lines(config);
    let mut outputs = match config.mode {
        Mode::Unitary => series_outputs(config, "", unitary_table)?,
        Mode::Lindblad => {
            let mut out = series_outputs(config, "", elements_table)?;
            out.extend(series_outputs(config, "_phase", mixed_phase_table)?);
            out
        }
        Mode::SweepGamma | Mode::SweepDelta => series_outputs(config, "", mixed_phase_table)?,
        Mode::Berry => vec![berry_output(config)?],
        Mode::Bloch => {
            let mut out = Vec::new();
            for source in &config.bloch_sources {
                let suffix = format!("_{}", source.name());
                out.extend(series_outputs(config, &suffix, |c, p| bloch_table(c, p, *source))?);
            }
            out
        }
        Mode::CorrectionMap => vec![correction_map_output(config)?],
    };
    for o in &mut outputs {
        if let Ok(t) = &mut o.table {
            let mut comments = header.clone();
            comments.append(&mut t.comments);
            t.comments = comments;
        }
    }
    Ok(outputs)
}

/// Renders on a pool of `workers` threads (all cores when `None`) and writes
/// the tables. Files whose computation failed are not written; they are
/// listed in [`RunReport::failures`] together with files that contain
/// undefined observations.
pub fn run(config: &RunConfig, workers: Option<usize>) -> Result<RunReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers.or_else(workers_from_env) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Usage(format!("cannot start workers: {e}")))?;
    let outputs = pool.install(|| render(config))?;

    let mut report = RunReport::default();
    for o in outputs {
        match o.table {
            Ok(table) => {
                if let Some(dir) = o.path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                let mut file = std::io::BufWriter::new(fs::File::create(&o.path)?);
                table.write_to(&mut file)?;
                std::io::Write::flush(&mut file)?;
                log::info!("wrote {}", o.path.display());
                if o.undefined_rows > 0 {
                    report.failures.push(format!(
                        "{}: {} undefined observation(s)",
                        o.path.display(),
                        o.undefined_rows
                    ));
                }
                report.written.push(o.path);
            }
            Err(message) => {
                log::error!("{}: {message}", o.path.display());
                report.failures.push(format!("{}: {message}", o.path.display()));
            }
        }
    }
    Ok(report)
}

fn header_lines(config: &RunConfig) -> Vec<String> {
    let mut lines = vec![format!("jcgp {VERSION}")];
    lines.extend(config.to_lines());
    lines
}

fn output_path(config: &RunConfig, suffix: &str) -> PathBuf {
    Path::new(&format!("{}{suffix}.csv", config.output)).to_path_buf()
}

fn value_tag(axis: Axis, value: f64) -> String {
    format!("_{}{value:?}", axis.tag())
}

/// One output per sweep value (or a single one without a sweep), computed in
/// parallel and returned in sweep order.
fn series_outputs<F>(config: &RunConfig, suffix: &str, build: F) -> Result<Vec<Output>>
where
    F: Fn(&RunConfig, &JcParams) -> Result<CsvTable> + Sync,
{
    let points: Vec<(String, Option<(Axis, f64)>)> = match &config.sweep {
        None => vec![(suffix.to_string(), None)],
        Some(s) => s
            .values
            .values()
            .into_iter()
            .map(|v| (format!("{suffix}{}", value_tag(s.axis, v)), Some((s.axis, v))))
            .collect(),
    };
    let params: Vec<JcParams> = points
        .iter()
        .map(|(_, p)| match p {
            None => config.params(),
            Some((axis, v)) => config.params_with(*axis, *v),
        })
        .collect::<Result<_>>()
        .map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
    let tables: Vec<Result<CsvTable>> = params.par_iter().map(|p| build(config, p)).collect();
    Ok(points
        .into_iter()
        .zip(tables)
        .map(|((name, point), table)| Output {
            path: output_path(config, &name),
            table: table
                .map(|mut t| {
                    if let Some((axis, v)) = point {
                        t.comments.push(format!("series {}: {v:?}", axis.key()));
                    }
                    t
                })
                .map_err(|e| e.to_string()),
            undefined_rows: 0,
        })
        .collect())
}

fn t_final(config: &RunConfig, params: &JcParams) -> f64 {
    config.t_final_in_tau * params.period()
}

fn step(config: &RunConfig, params: &JcParams) -> f64 {
    params.period() / config.step_per_tau as f64
}

/// Sample indices written to a table: every `stride`-th one plus the last.
fn strided(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..len).filter(move |k| k % stride == 0 || *k + 1 == len)
}

fn phase_table(tau: f64, stride: usize, unitary: &PhaseSeries, mixed: &PhaseSeries) -> CsvTable {
    let mut table = CsvTable::new(&["t_over_tau", "phi_u", "phi_g", "delta_phi", "defined_flag"]);
    for k in strided(unitary.len(), stride) {
        let (u, g) = (unitary.value(k), mixed.value(k));
        let delta = match (u, g) {
            (Some(u), Some(g)) => g - u,
            _ => f64::NAN,
        };
        table.push_row(vec![
            format_number(unitary.times[k] / tau),
            format_number(u.unwrap_or(f64::NAN)),
            format_number(g.unwrap_or(f64::NAN)),
            format_number(delta),
            format_flag(u.is_some() && g.is_some()).to_string(),
        ]);
    }
    table
}

/// Closed evolution: φg coincides with φu and δφ vanishes.
fn unitary_table(config: &RunConfig, params: &JcParams) -> Result<CsvTable> {
    let closed = params.closed();
    let initial = config.initial_state.state(&closed)?;
    let traj = propagate(&closed, &initial, t_final(config, &closed), step(config, &closed))?;
    let phase = kinematic_gp(&traj);
    Ok(phase_table(closed.period(), config.output_stride, &phase, &phase))
}

fn pair(config: &RunConfig, params: &JcParams) -> Result<PhasePair> {
    let initial = config.initial_state.state(params)?;
    phase_pair(params, &initial, t_final(config, params), config.step_per_tau as f64)
}

fn mixed_phase_table(config: &RunConfig, params: &JcParams) -> Result<CsvTable> {
    let p = pair(config, params)?;
    Ok(phase_table(params.period(), config.output_stride, &p.unitary, &p.mixed))
}

fn elements_table(config: &RunConfig, params: &JcParams) -> Result<CsvTable> {
    let initial = Density3::from_pure(&config.initial_state.state(params)?)?;
    let h = default_step(params, config.step_per_tau as f64);
    let traj = integrate_master(params, &initial, t_final(config, params), h)?;
    let tau = params.period();
    let mut table = CsvTable::new(&["t_over_tau", "rho00", "rho11", "rho22", "re_rho12", "im_rho12"]);
    for k in strided(traj.len(), config.output_stride) {
        let r = &traj.densities[k];
        let c = r.rho12();
        table.push_numbers(&[traj.times[k] / tau, r.rho00(), r.rho11(), r.rho22(), c.re, c.im]);
    }
    Ok(table)
}

/// Trajectory on the Bloch sphere. Berry loops are parametrized by the
/// fraction φ/2π of the phase-shift cycle in the time column.
fn bloch_table(config: &RunConfig, params: &JcParams, source: BlochSource) -> Result<CsvTable> {
    let tau = params.period();
    let curve = match source {
        BlochSource::Unitary => {
            let closed = params.closed();
            let initial = config.initial_state.state(&closed)?;
            let traj = propagate(&closed, &initial, t_final(config, &closed), step(config, &closed))?;
            BlochCurve::from_states(&traj.times, &traj.vectors())
        }
        BlochSource::BerryLoop => {
            let samples = config.step_per_tau as usize;
            let lp = phase_shift_loop(&params.closed(), Branch::Plus, samples)?;
            let times: Vec<f64> = lp.times.iter().map(|phi| phi / std::f64::consts::TAU * tau).collect();
            BlochCurve::from_states(&times, &lp.vectors())
        }
        BlochSource::EigenTrack => {
            let initial = Density3::from_pure(&config.initial_state.state(params)?)?;
            let h = default_step(params, config.step_per_tau as f64);
            let traj = integrate_master(params, &initial, t_final(config, params), h)?;
            let track = eigen_track(&traj);
            BlochCurve::from_states(&track.times, &track.vector_plus)
        }
    };
    let stride = config.output_stride;
    let kept: Vec<usize> = strided(curve.len(), stride).collect();
    let thinned = BlochCurve {
        times: kept.iter().map(|&k| curve.times[k]).collect(),
        points: kept.iter().map(|&k| curve.points[k]).collect(),
    };
    Ok(curve_table(&thinned, tau))
}

fn berry_output(config: &RunConfig) -> Result<Output> {
    let deltas = match &config.sweep {
        None => vec![config.delta_over_lambda],
        Some(s) if s.axis == Axis::Delta => s.values.values(),
        Some(_) => return Err(Error::Config { line: 0, message: "berry mode sweeps delta_over_lambda only".into() }),
    };
    let mut table = CsvTable::new(&["delta_over_lambda", "n", "berry_plus", "berry_minus"]);
    for d in deltas {
        let p = config.params_with(Axis::Delta, d)?;
        table.push_numbers(&[d, config.n as f64, berry_phase(&p, Branch::Plus), berry_phase(&p, Branch::Minus)]);
    }
    Ok(Output { path: output_path(config, ""), table: Ok(table), undefined_rows: 0 })
}

fn correction_map_output(config: &RunConfig) -> Result<Output> {
    let sweep = config.sweep.as_ref().ok_or_else(|| Error::Usage("correction-map needs a sweep".into()))?;
    let secondary = if sweep.secondary.is_empty() {
        vec![match sweep.axis.other() {
            Axis::Gamma => config.gamma_over_lambda,
            Axis::Delta => config.delta_over_lambda,
        }]
    } else {
        sweep.secondary.clone()
    };
    let mut grid = Vec::new();
    for s in &secondary {
        let base = match sweep.axis.other() {
            Axis::Gamma => RunConfig { gamma_over_lambda: *s, ..config.clone() },
            Axis::Delta => RunConfig { delta_over_lambda: *s, ..config.clone() },
        };
        for v in sweep.values.values() {
            grid.push(base.params_with(sweep.axis, v)?);
        }
    }
    let rows = correction_sweep(&grid, &sweep.observe_at, config.step_per_tau as f64);
    let mut table = CsvTable::new(&[
        "delta_over_lambda",
        "gamma_over_lambda",
        "p_over_lambda",
        "t_over_tau",
        "phi_u",
        "phi_g",
        "delta_phi",
        "defined_flag",
    ]);
    let mut undefined = 0;
    for r in &rows {
        let nan_unless = |x: f64| if r.defined { x } else { f64::NAN };
        undefined += usize::from(!r.defined);
        let mut cells: Vec<String> = [
            r.delta_over_lambda,
            r.gamma_over_lambda,
            r.p_over_lambda,
            r.t_over_tau,
            nan_unless(r.phi_u),
            nan_unless(r.phi_g),
            nan_unless(r.delta_phi),
        ]
        .iter()
        .map(|x| format_number(*x))
        .collect();
        cells.push(format_flag(r.defined).to_string());
        table.push_row(cells);
    }
    Ok(Output { path: output_path(config, ""), table: Ok(table), undefined_rows: undefined })
}
