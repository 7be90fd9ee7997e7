//! The `modes`, `state` and `sweep` subcommands.

use std::path::Path;

use pulse_squeeze_core::coherence::occupation_ratio;
use pulse_squeeze_core::export::{matrix_csv, to_json_string, wigner_csv, CsvTable, SpectrumSummary};
use pulse_squeeze_core::pipeline::StateRun;
use pulse_squeeze_core::state::charfn::{CharFunction, CharGrid, OutputChar};
use pulse_squeeze_core::state::wigner::{wigner_from_char, PhaseGrid, WignerGrid};
use pulse_squeeze_core::{ModeSpectrum, TemporalGrid};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Step, SweepPoint};
use crate::error::{CliError, CliResult, Context};
use crate::manifest::{Collector, PointFailure, RunManifest};
use crate::runner::{self, KernelCache};

/// Largest `|β|` sampled for Wigner functions.
pub const MAX_CHAR_EXTENT: f64 = 40.0;

fn axis_names(cfg: &ExperimentConfig) -> Vec<String> {
    match &cfg.sweep {
        Some(s) => s.axes.iter().map(|a| a.param.clone()).collect(),
        None => vec![],
    }
}

fn grid_comment(g: &TemporalGrid) -> String {
    format!("grid t_start={} t_end={} n_points={} (time in units of 1/gamma)", g.t_start(), g.t_end(), g.n_points())
}

fn axes_comments(cfg: &ExperimentConfig) -> CliResult<Vec<String>> {
    let mut out = Vec::new();
    if let Some(s) = &cfg.sweep {
        for a in &s.axes {
            let vals: Vec<String> = a.values()?.iter().map(|v| v.to_string()).collect();
            out.push(format!("axis {} = [{}]", a.param, vals.join(", ")));
        }
    }
    Ok(out)
}

/// The first error when every point failed, so the exit code reflects it.
fn unless_all_failed<T>(mut results: Vec<CliResult<T>>) -> CliResult<Vec<CliResult<T>>> {
    if !results.is_empty() && results.iter().all(Result::is_err) {
        if let Err(e) = results.swap_remove(0) {
            return Err(e);
        }
    }
    Ok(results)
}

fn failure(p: &SweepPoint, e: &CliError) -> PointFailure {
    PointFailure { index: p.index.clone(), coords: p.coords.clone(), error: e.to_string() }
}

#[derive(Serialize)]
struct SpectrumPoint {
    index: Vec<usize>,
    coords: Vec<f64>,
    ratio: Option<f64>,
    #[serde(flatten)]
    spectrum: SpectrumSummary,
}

#[derive(Serialize)]
struct SpectrumFile {
    axes: Vec<String>,
    points: Vec<SpectrumPoint>,
}

fn occupations_row(coords: &[f64], s: &ModeSpectrum, max_vacuum: usize) -> Vec<f64> {
    let mut row = coords.to_vec();
    let nan = f64::NAN;
    row.push(s.seeded.first().map_or(0.0, |o| o.occupation));
    row.push(s.seeded.get(1).map_or(0.0, |o| o.occupation));
    row.push(s.seeded_remainder);
    for i in 0..max_vacuum {
        row.push(s.vacuum.get(i).map_or(0.0, |o| o.occupation));
    }
    let listed: f64 = s.vacuum.iter().take(max_vacuum).map(|o| o.occupation).sum();
    let vac = s.vacuum_total() + s.vacuum_remainder;
    row.push(vac - listed);
    row.push(s.total);
    row.push(s.vacuum.first().map_or(nan, |o| o.occupation / vac));
    row.push(occupation_ratio(s).unwrap_or(nan));
    row
}

fn mode_columns(max_vacuum: usize) -> Vec<String> {
    let mut h = Vec::new();
    for i in 1..=2 {
        h.push(format!("v{i}_re"));
        h.push(format!("v{i}_im"));
    }
    for i in 1..=max_vacuum {
        h.push(format!("w{i}_re"));
        h.push(format!("w{i}_im"));
    }
    h
}

fn push_modes(table: &mut CsvTable, point: f64, s: &ModeSpectrum, grid: &TemporalGrid, max_vacuum: usize) {
    let mut cols: Vec<Option<&[pulse_squeeze_core::C64]>> = Vec::new();
    for i in 0..2 {
        cols.push(s.seeded.get(i).map(|o| o.mode.amplitudes()));
    }
    for i in 0..max_vacuum {
        cols.push(s.vacuum.get(i).map(|o| o.mode.amplitudes()));
    }
    for k in 0..grid.n_points() {
        let mut row = vec![point, grid.point(k)];
        for c in &cols {
            match c {
                Some(v) => row.extend([v[k].re, v[k].im]),
                None => row.extend([0.0, 0.0]),
            }
        }
        table.push(row);
    }
}

/// Occupations per sweep point, mode shapes and the spectrum summary.
pub fn cmd_modes(cfg: &ExperimentConfig, out: &Path, recipe: Option<&str>) -> CliResult<RunManifest> {
    let mut collector = Collector::new(out, "modes", recipe);
    let points = cfg.sweep_points()?;
    let cache = KernelCache::default();
    let results: Vec<CliResult<ModeSpectrum>> = points
        .par_iter()
        .map(|p| {
            let mut c = p.config.clone();
            c.analysis.full_split = true;
            runner::spectrum(&*cache.get(&c)?, &c)
        })
        .collect();
    let results = unless_all_failed(results)?;
    let kmax = cfg.analysis.max_vacuum_modes;
    let names = axis_names(cfg);
    let mut header: Vec<String> = if names.is_empty() { vec!["point".into()] } else { names.clone() };
    header.extend(["seeded_1", "seeded_2", "seeded_remainder"].map(String::from));
    header.extend((1..=kmax).map(|i| format!("vacuum_{i}")));
    header.extend(["vacuum_rest", "total", "vacuum_fraction_1", "ratio"].map(String::from));
    let mut occ = CsvTable::new(header)
        .comment("mean photon numbers of the output temporal modes")
        .comment("ratio = n1/(n1+n2) over seeded modes; vacuum_fraction_1 = m1/sum(m)")
        .comment(grid_comment(&cfg.temporal_grid()?));
    for c in axes_comments(cfg)? {
        occ = occ.comment(c);
    }
    let mut mode_header = vec!["point".to_string(), "t".to_string()];
    mode_header.extend(mode_columns(kmax));
    let mut modes = CsvTable::new(mode_header)
        .comment("temporal mode amplitudes (normalized, int |v|^2 dt = 1); absent modes are zero")
        .comment("point is the row index in occupations.csv");
    let mut summary = SpectrumFile { axes: names, points: Vec::new() };
    for (flat, (p, r)) in points.iter().zip(results).enumerate() {
        match r {
            Ok(s) => {
                let coords = if p.coords.is_empty() { vec![flat as f64] } else { p.coords.clone() };
                occ.push(occupations_row(&coords, &s, kmax));
                push_modes(&mut modes, flat as f64, &s, &p.config.temporal_grid()?, kmax);
                summary.points.push(SpectrumPoint {
                    index: p.index.clone(),
                    coords: p.coords.clone(),
                    ratio: occupation_ratio(&s).ok(),
                    spectrum: SpectrumSummary::from(&s),
                });
            }
            Err(e) if cfg.sweep.is_some() => {
                log::warn!("point {:?} failed: {e}", p.index);
                collector.fail(failure(p, &e));
            }
            Err(e) => return Err(e),
        }
    }
    collector.add("occupations.csv", occ.render());
    collector.add("modes.csv", modes.render());
    collector.add("spectrum.json", to_json_string(&summary)?);
    collector.finish(cfg)
}

/// Characteristic-function grid fine enough for a Wigner function on `out`.
pub fn char_grid_for(out: &PhaseGrid) -> CharGrid {
    let h = (std::f64::consts::PI / (2.0 * std::f64::consts::SQRT_2 * out.extent)).min(0.1);
    let half = (6.0 / h).ceil() as usize;
    CharGrid { extent: half as f64 * h, n_side: 2 * half + 1 }
}

/// Wigner function of the analysed output mode from its exact characteristic function.
pub fn output_wigner(run: &StateRun, cfg: &ExperimentConfig, out: PhaseGrid) -> CliResult<WignerGrid> {
    let input = runner::input_state(cfg)?;
    let source = OutputChar::new(&run.decomposition, &input);
    let chi = CharFunction::sample_auto(&source, char_grid_for(&out), MAX_CHAR_EXTENT).context(|| "characteristic function".into())?;
    Ok(wigner_from_char(&chi, out))
}

#[derive(Serialize)]
struct StateMetricsFile<'a> {
    #[serde(flatten)]
    summary: pulse_squeeze_core::pipeline::StateSummary<'a>,
    spectrum: SpectrumSummary,
}

/// Density matrix, Wigner function and metrics of the base configuration.
pub fn cmd_state(cfg: &ExperimentConfig, out: &Path, recipe: Option<&str>) -> CliResult<RunManifest> {
    let base = cfg.without_sweep();
    let mut collector = Collector::new(out, "state", recipe);
    let k = runner::build_kernels(&base)?;
    let run = runner::state(&k, &base, base.analysis.has(Step::Metrics))?;
    let rho = run.rho.rho();
    let grid = base.temporal_grid()?;
    collector.add(
        "rho_re.csv",
        matrix_csv(rho, false).comment("real part of the output-mode density matrix, Fock basis").comment(grid_comment(&grid)).render(),
    );
    collector.add(
        "rho_im.csv",
        matrix_csv(rho, true).comment("imaginary part of the output-mode density matrix, Fock basis").comment(grid_comment(&grid)).render(),
    );
    if base.analysis.has(Step::Wigner) {
        let w = output_wigner(&run, &base, base.analysis.wigner)?;
        collector.add("wigner.csv", wigner_csv(&w).comment("a = (x + ip)/sqrt(2)").render());
    }
    let file = StateMetricsFile { summary: run.summary(), spectrum: SpectrumSummary::from(&run.spectrum) };
    collector.add("metrics.json", to_json_string(&file)?);
    collector.finish(cfg)
}

/// Per-point values for the sweep heatmaps.
struct SweepValues {
    n1: f64,
    ratio: f64,
    state: Option<(f64, f64, f64)>,
}

/// Heatmaps of `n₁` and the occupation ratio (plus purity, fidelity and gain when metrics are requested).
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, recipe: Option<&str>) -> CliResult<RunManifest> {
    if cfg.sweep.is_none() {
        return Err(CliError::Config("the sweep command needs a [sweep] section with 1 or 2 axes".into()));
    }
    let mut collector = Collector::new(out, "sweep", recipe);
    let points = cfg.sweep_points()?;
    let with_state = cfg.analysis.has(Step::Metrics);
    let cache = KernelCache::default();
    let results: Vec<CliResult<SweepValues>> = points
        .par_iter()
        .map(|p| {
            let k = cache.get(&p.config)?;
            if with_state {
                let run = runner::state(&k, &p.config, true)?;
                let m = &run.metrics;
                Ok(SweepValues {
                    n1: m.n1,
                    ratio: m.ratio.unwrap_or(f64::NAN),
                    state: Some((
                        m.purity.unwrap_or(f64::NAN),
                        m.best_fidelity.unwrap_or(f64::NAN),
                        m.p_gain.unwrap_or(f64::NAN),
                    )),
                })
            } else {
                let s = runner::spectrum(&k, &p.config)?;
                Ok(SweepValues { n1: s.n1(), ratio: occupation_ratio(&s).unwrap_or(f64::NAN), state: None })
            }
        })
        .collect();
    let results = unless_all_failed(results)?;
    let names = axis_names(cfg);
    let table = |value: &str, what: &str| -> CliResult<CsvTable> {
        let mut h = names.clone();
        h.push(value.to_string());
        let mut t = CsvTable::new(h).comment(what.to_string()).comment(grid_comment(&cfg.temporal_grid()?));
        for c in axes_comments(cfg)? {
            t = t.comment(c);
        }
        Ok(t.comment("failed points are NaN; see manifest.json"))
    };
    let mut n1 = table("n1", "mean photon number of the dominant seeded mode")?;
    let mut ratio = table("ratio", "n1/(n1+n2) over the seeded modes")?;
    let mut purity = table("purity", "purity of the state in v1")?;
    let mut fidelity = table("best_fidelity", "best fidelity with the squeezed input")?;
    let mut gain = table("p_gain", "amplitude gain of the amplified quadrature at the best fit")?;
    for (p, r) in points.iter().zip(results) {
        let v = r.unwrap_or_else(|e| {
            log::warn!("point {:?} failed: {e}", p.index);
            collector.fail(failure(p, &e));
            SweepValues { n1: f64::NAN, ratio: f64::NAN, state: with_state.then_some((f64::NAN, f64::NAN, f64::NAN)) }
        });
        let row = |x: f64| p.coords.iter().copied().chain([x]).collect::<Vec<f64>>();
        n1.push(row(v.n1));
        ratio.push(row(v.ratio));
        if let Some((pu, fi, ga)) = v.state {
            purity.push(row(pu));
            fidelity.push(row(fi));
            gain.push(row(ga));
        }
    }
    collector.add("heatmap_n1.csv", n1.render());
    collector.add("heatmap_ratio.csv", ratio.render());
    if with_state {
        collector.add("heatmap_purity.csv", purity.render());
        collector.add("heatmap_fidelity.csv", fidelity.render());
        collector.add("heatmap_gain.csv", gain.render());
    }
    collector.finish(cfg)
}
