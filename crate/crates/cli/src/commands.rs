//! The four subcommands. Each writes its files into `out` and returns their paths.

use std::path::{Path, PathBuf};

use mehpp_core::pump::phase_signs;
use mehpp_core::{
    critical_coefficient, loop_area, net_flow_metrics, pressure_star, run, stationary_points,
    trace_cycle, MagnetoElasticParams, StationaryKind,
};
use rayon::prelude::*;

use crate::config::{Metric, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{line_plot, num, opt_num, write_file, Series, Table};

/// Gap left below the magnet plane when sampling profiles.
const PROFILE_EDGE: f64 = 1e-3;
/// Upper bound on plotted points per SVG series.
const PLOT_POINTS: usize = 2000;

pub fn cmd_analyze(cfg: &RunConfig, out: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let base = cfg.params()?;
    let n = cfg.analyze.samples;
    let (lo, hi) = (base.z_in_star, base.z1_star - PROFILE_EDGE);
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();

    let models: Vec<MagnetoElasticParams> = match &cfg.analyze.a_values {
        Some(values) => values
            .iter()
            .map(|&a| MagnetoElasticParams {
                a_mo: a,
                a_mi: a,
                ..base
            })
            .collect(),
        None => vec![base],
    };

    let mut profiles = Table::new(&["a_mo", "a_mi", "z_star", "p_star"]);
    let mut stationary = Table::new(&["a_mo", "a_mi", "kind", "z_star", "p_star"]);
    let mut regimes = Table::new(&["a_mo", "a_mi", "stationary_points", "regime"]);
    let mut series = Vec::new();
    for prm in &models {
        prm.validate()?;
        let (a_mo, a_mi) = (num(prm.a_mo), num(prm.a_mi));
        let mut pts = Vec::with_capacity(n);
        for &z in &grid {
            let p = pressure_star(z, prm)?;
            profiles.push_row(&[a_mo.clone(), a_mi.clone(), num(z), num(p)]);
            pts.push((z, p));
        }
        let label = if prm.a_mo == prm.a_mi {
            format!("a = {}", prm.a_mo)
        } else {
            format!("a_mo = {}, a_mi = {}", prm.a_mo, prm.a_mi)
        };
        series.push(Series::new(label, pts));
        let sp = stationary_points(prm);
        for s in &sp {
            let kind = match s.kind {
                StationaryKind::LocalMaximum => "local_maximum",
                StationaryKind::LocalMinimum => "local_minimum",
            };
            stationary.push_row(&[
                a_mo.clone(),
                a_mi.clone(),
                kind.to_string(),
                num(s.z_star),
                num(s.p_star),
            ]);
        }
        let regime = if sp.is_empty() {
            "monotonic"
        } else {
            "hysteretic"
        };
        regimes.push_row(&[a_mo, a_mi, sp.len().to_string(), regime.to_string()]);
    }
    let mut critical = Table::new(&["z1_star", "a_crit"]);
    critical.push_row(&[num(base.z1_star), num(critical_coefficient(base.z1_star))]);

    let mut files = vec![
        write_file(out, "profiles.csv", &profiles.finish())?,
        write_file(out, "stationary_points.csv", &stationary.finish())?,
        write_file(out, "regimes.csv", &regimes.finish())?,
        write_file(out, "critical.csv", &critical.finish())?,
    ];
    if svg {
        let plot = line_plot(
            "Membrane pressure profiles",
            "z*",
            "p*",
            &series,
            Some((-2.0, 2.0)),
        );
        files.push(write_file(out, "profiles.svg", &plot)?);
    }
    Ok(files)
}

pub fn cmd_cycle(cfg: &RunConfig, out: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let prm = cfg.params()?;
    let w = cfg.waveform()?;
    let cycles = cfg.numerics.cycles as usize;
    let trace = trace_cycle(&prm, &w, cycles, cfg.numerics.samples_per_cycle)?;
    let area = loop_area(&trace)?;

    let mut samples = Table::new(&["t", "p_applied", "z_star", "wall_state", "contact_force"]);
    for (t, s) in &trace.samples {
        samples.push_row(&[
            num(*t),
            num(s.p_applied),
            num(s.z_star),
            s.wall.label().to_string(),
            num(s.wall.contact_force().unwrap_or(0.0)),
        ]);
    }
    let mut snaps = Table::new(&["t", "cycle", "p_applied", "z_from", "z_to"]);
    for e in &trace.snap_events {
        // cycle c owns samples (c * n, (c + 1) * n]
        let cycle = e.sample.saturating_sub(1) / trace.samples_per_cycle;
        snaps.push_row(&[
            num(e.t),
            cycle.to_string(),
            num(e.p_applied),
            num(e.z_from),
            num(e.z_to),
        ]);
    }
    let last = trace.cycles().saturating_sub(1);
    let mut summary = Table::new(&["quantity", "value"]);
    summary.push_row(&["loop_area".to_string(), num(area)]);
    summary.push_row(&[
        "snaps_in_last_cycle".to_string(),
        trace.snaps_in_cycle(last).len().to_string(),
    ]);
    summary.push_row(&["periodic".to_string(), trace.is_periodic(1e-9).to_string()]);
    summary.push_row(&["a_mo".to_string(), num(prm.a_mo)]);
    summary.push_row(&["a_mi".to_string(), num(prm.a_mi)]);

    let mut files = vec![
        write_file(out, "cycle_trace.csv", &samples.finish())?,
        write_file(out, "snap_events.csv", &snaps.finish())?,
        write_file(out, "cycle_summary.csv", &summary.finish())?,
    ];
    if svg {
        let path = trace.cycle_path(last).to_vec();
        let plot = line_plot(
            "Deformation path, last cycle",
            "z*",
            "p*",
            &[Series::new("path", path)],
            None,
        );
        files.push(write_file(out, "cycle_loop.svg", &plot)?);
    }
    Ok(files)
}

pub fn cmd_pump(cfg: &RunConfig, out: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let chain = cfg.chain_config()?;
    let w = cfg.waveform()?;
    let result = run(&chain, &w, cfg.duration()?, cfg.numerics.dt)?;
    let metrics = net_flow_metrics(&result.records, result.period)?;
    let n_cells = chain.cells.len();

    let mut header: Vec<String> = [
        "t",
        "p_pneu",
        "inflow",
        "outflow",
        "accumulated_flow",
        "volume_conveyed",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 0..n_cells {
        header.extend([
            format!("z_star_{i}"),
            format!("P_{i}"),
            format!("wall_state_{i}"),
        ]);
    }
    let mut series = Table::new(&header);
    for r in &result.records {
        let mut row = vec![
            num(r.t),
            num(r.p_pneu),
            num(r.inflow),
            num(r.outflow),
            num(r.accumulated_flow),
            num(r.volume_conveyed),
        ];
        for i in 0..n_cells {
            row.extend([
                num(r.openings[i]),
                num(r.cell_pressures[i]),
                r.walls[i].label().to_string(),
            ]);
        }
        series.push_row(&row);
    }

    let mut events = Table::new(&["cycle", "cell", "closure_time", "detach_time"]);
    for (c, cells) in result.events.iter().enumerate() {
        for (i, e) in cells.iter().enumerate() {
            events.push_row(&[
                c.to_string(),
                i.to_string(),
                opt_num(e.closure_time),
                opt_num(e.detach_time),
            ]);
        }
    }

    let last_cycle = result.events.len().saturating_sub(1);
    let signs = phase_signs(&result.records, result.period, last_cycle);
    let mut summary = Table::new(&["quantity", "value"]);
    let mut put = |k: &str, v: String| summary.push_row(&[k.to_string(), v]);
    put("net_volume_per_cycle", num(metrics.net_volume_per_cycle));
    put("stroke_volume", num(result.stroke_volume));
    put("conservation_residual", num(result.conservation_residual()));
    put("max_total_volume", num(result.max_total_volume()));
    put(
        "inflow_negative_in_pressurization",
        signs.inflow_negative_in_pressurization.to_string(),
    );
    put(
        "outflow_negative_in_depressurization",
        signs.outflow_negative_in_depressurization.to_string(),
    );
    put(
        "min_inflow_pressurization",
        num(signs.min_inflow_pressurization),
    );
    put(
        "min_outflow_depressurization",
        num(signs.min_outflow_depressurization),
    );
    for (c, v) in metrics.conveyed_at_cycle_end.iter().enumerate() {
        put(&format!("conveyed_at_end_of_cycle_{c}"), num(*v));
    }

    let mut files = vec![
        write_file(out, "pump_series.csv", &series.finish())?,
        write_file(out, "pump_events.csv", &events.finish())?,
        write_file(out, "pump_metrics.csv", &summary.finish())?,
    ];
    if svg {
        let stride = result.records.len().div_ceil(PLOT_POINTS).max(1);
        let pick = |f: &dyn Fn(&mehpp_core::FlowRecord) -> f64| -> Vec<(f64, f64)> {
            result
                .records
                .iter()
                .step_by(stride)
                .map(|r| (r.t, f(r)))
                .collect()
        };
        let flows = line_plot(
            "Inlet and outlet flow",
            "t",
            "flow rate",
            &[
                Series::new("inflow", pick(&|r| r.inflow)),
                Series::new("outflow", pick(&|r| r.outflow)),
            ],
            None,
        );
        let volumes = line_plot(
            "Accumulated and conveyed volume",
            "t",
            "volume",
            &[
                Series::new("accumulated", pick(&|r| r.accumulated_flow)),
                Series::new("conveyed", pick(&|r| r.volume_conveyed)),
            ],
            None,
        );
        files.push(write_file(out, "pump_flow.svg", &flows)?);
        files.push(write_file(out, "pump_volume.svg", &volumes)?);
    }
    Ok(files)
}

/// Evaluates the selected sweep metric for one configuration.
pub fn evaluate_metric(cfg: &RunConfig, metric: Metric) -> Result<f64> {
    match metric {
        Metric::LoopArea => {
            let trace = trace_cycle(
                &cfg.params()?,
                &cfg.waveform()?,
                cfg.numerics.cycles as usize,
                cfg.numerics.samples_per_cycle,
            )?;
            Ok(loop_area(&trace)?)
        }
        Metric::NetVolumePerCycle => {
            let result = run(
                &cfg.chain_config()?,
                &cfg.waveform()?,
                cfg.duration()?,
                cfg.numerics.dt,
            )?;
            Ok(net_flow_metrics(&result.records, result.period)?.net_volume_per_cycle)
        }
        Metric::ACritMargin => {
            let p = cfg.params()?;
            Ok(critical_coefficient(p.z1_star) - p.a_mo.max(p.a_mi))
        }
    }
}

/// Grid values of point `k`, last axis varying fastest.
fn grid_point(sizes: &[usize], mut k: usize) -> Vec<usize> {
    let mut idx = vec![0; sizes.len()];
    for (slot, &n) in idx.iter_mut().zip(sizes).rev() {
        *slot = k % n;
        k /= n;
    }
    idx
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path, _svg: bool) -> Result<Vec<PathBuf>> {
    let spec = cfg.sweep_spec()?;
    spec.validate()?;
    let total = spec.grid_size();
    let cap = cfg.numerics.sweep_cap;
    if total > cap {
        return Err(CliError::invalid(
            "sweep",
            format!("grid has {total} points, more than the cap of {cap} (numerics.sweep_cap)"),
        ));
    }
    let sizes: Vec<usize> = spec.axes.iter().map(|a| a.values.len()).collect();
    let rows: Vec<Result<(Vec<f64>, f64)>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let values: Vec<f64> = grid_point(&sizes, k)
                .iter()
                .zip(&spec.axes)
                .map(|(&i, axis)| axis.values[i])
                .collect();
            let mut point = cfg.clone();
            for (axis, &v) in spec.axes.iter().zip(&values) {
                point = point.with_override(&axis.name, v)?;
            }
            point.validate()?;
            Ok((values, evaluate_metric(&point, spec.metric)?))
        })
        .collect();

    let mut header: Vec<String> = spec.axes.iter().map(|a| a.name.clone()).collect();
    header.push(spec.metric.name().to_string());
    let mut table = Table::new(&header);
    for row in rows {
        let (values, metric) = row?;
        let mut cells: Vec<String> = values.into_iter().map(num).collect();
        cells.push(num(metric));
        table.push_row(&cells);
    }
    Ok(vec![write_file(out, "sweep.csv", &table.finish())?])
}
