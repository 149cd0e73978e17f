use std::cell::OnceCell;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde_json::{json, Value};

use bistab_core::config::RunConfig;
use bistab_core::effres::{effective_resonance, write_curves_csv, EffResCurve};
use bistab_core::fixed_points::{find_roots, region, write_roots_csv, RootRecord, Stability};
use bistab_core::mist::{find_crossings, write_crossings_csv, write_fan_csv};
use bistab_core::ode::Tolerances;
use bistab_core::params::{mhz, to_mhz, SystemParams};
use bistab_core::response::{
    critical_point_divergence, critical_point_scd, critical_summary, level_name, photon_to_amp, punch_out_drive,
    run_map, write_summary_csv, CriticalPointReport, MapMode, MapOptions, ResponseMap,
};
use bistab_core::scd::{integrate_with, landscape, readout, write_landscape_csv, DriveConfig};
use bistab_core::spectrum::{diagonalize_strip, DressedSpectrum};
use bistab_core::svg::heatmap;
use bistab_core::{Error, Result};

use crate::{Command, Level, PointArgs};

/// Target level of the crossing that sets the MIST prediction.
const MIST_TARGET: usize = 7;

pub struct Context {
    pub config: RunConfig,
    pub params: SystemParams,
    pub mode: MapMode,
    pub out: PathBuf,
    spectrum: OnceCell<DressedSpectrum>,
}

impl Context {
    pub fn new(config: RunConfig, mode: MapMode) -> Result<Self> {
        let params = config.system_params();
        params.validate()?;
        let out = PathBuf::from(&config.output_dir);
        std::fs::create_dir_all(&out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
        Ok(Context { config, params, mode, out, spectrum: OnceCell::new() })
    }

    fn spectrum(&self) -> Result<&DressedSpectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = diagonalize_strip(&self.params)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    fn curve(&self, level: Level) -> Result<EffResCurve> {
        effective_resonance(self.spectrum()?, level.0)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> Result<(BufWriter<File>, String)> {
        let path = self.path(name);
        let f = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok((BufWriter::new(f), path.display().to_string()))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<String> {
        let (mut w, path) = self.create(name)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        Ok(path)
    }

    pub fn write_provenance(&self, command: &Command) -> Result<()> {
        let mut text = self.config.provenance();
        text.push_str(&format!("mode = {}\n", serde_json::to_value(self.mode).unwrap_or_default().as_str().unwrap_or("")));
        text.push_str(&format!("command = {command:?}\n"));
        self.write_text("provenance", &text).map(|_| ())
    }

    fn drive(&self, point: &PointArgs) -> DriveConfig {
        let amplitude = match point.photons {
            Some(n) => photon_to_amp(n, &self.params),
            None => self.config.drive_amplitude(),
        };
        DriveConfig::new(amplitude, self.params.omega_r + mhz(point.detuning_mhz)).with_t0(self.config.t0())
    }

    fn window(&self) -> Result<Vec<f64>> {
        Ok(self.config.map_grid()?.detunings.iter().map(|d| self.params.omega_r + d).collect())
    }

    fn first_mist(&self, level: usize) -> Result<Option<f64>> {
        let s = self.spectrum()?;
        Ok(find_crossings(s, level, MIST_TARGET, 1..=s.n_max() - 1)?.first().map(|c| c.n_star))
    }

    fn map(&self, level: Level, mode: MapMode) -> Result<ResponseMap> {
        let opts = MapOptions { mode, t0: self.config.t0(), tol: Tolerances::default() };
        run_map(&self.curve(level)?, &self.config.map_grid()?, &self.params, opts)
    }

    fn critical_report(&self, level: Level) -> Result<(CriticalPointReport, Value)> {
        let mode = match self.mode {
            MapMode::FixedPoint => return Err(Error::Input("critical points need --mode ode or both".into())),
            m => m,
        };
        let map = self.map(level, mode)?;
        let peaks = self.config.peak_options();
        let report = CriticalPointReport::new(level.0, critical_point_scd(&map, &peaks), self.first_mist(level.0)?, peaks);
        let extra = json!({
            "n_c_divergence": critical_point_divergence(&map, &peaks),
            "punch_out": punch_out_drive(&map, &peaks),
            "invalid_cells": map.invalid_count(),
        });
        Ok((report, extra))
    }
}

fn level_json(level: usize) -> Value {
    json!(level_name(level))
}

pub fn dispatch(ctx: &Context, command: &Command) -> Result<Value> {
    match command {
        Command::Spectrum => {
            let s = ctx.spectrum()?;
            let (mut w, file) = ctx.create("spectrum.csv")?;
            s.write_csv(&mut w)?;
            w.flush()?;
            Ok(json!({
                "command": "spectrum",
                "levels": s.levels(),
                "n_max": s.n_max(),
                "label_warnings": s.warnings().len(),
                "files": [file],
            }))
        }
        Command::Fan { levels } => {
            let (mut w, file) = ctx.create("fan.csv")?;
            write_fan_csv(ctx.spectrum()?, levels, &mut w)?;
            w.flush()?;
            Ok(json!({ "command": "fan", "levels": levels, "files": [file] }))
        }
        Command::Crossings { level, target, n_min, n_max } => {
            let s = ctx.spectrum()?;
            let hi = n_max.unwrap_or(s.n_max() - 1);
            let found = find_crossings(s, level.0, *target, *n_min..=hi)?;
            let (mut w, csv) = ctx.create("crossings.csv")?;
            write_crossings_csv(&found, &mut w)?;
            w.flush()?;
            let list = serde_json::to_value(&found).unwrap_or_default();
            let json_file = ctx.write_text("crossings.json", &format!("{list:#}\n"))?;
            Ok(json!({
                "command": "crossings",
                "k": level.0,
                "j": target,
                "n_star": found.first().map(|c| c.n_star),
                "error_bound": found.first().map(|c| c.error_bound),
                "crossings": list,
                "files": [csv, json_file],
            }))
        }
        Command::Effres { levels } => {
            let curves = levels.iter().map(|&l| ctx.curve(l)).collect::<Result<Vec<_>>>()?;
            let (mut w, file) = ctx.create("effres.csv")?;
            write_curves_csv(&curves, &mut w)?;
            w.flush()?;
            let rows: Vec<Value> = curves
                .iter()
                .map(|c| {
                    json!({
                        "level": level_json(c.level()),
                        "chi_rad_per_s": c.chi(),
                        "chi_over_2pi_mhz": to_mhz(c.chi()),
                        "argmin_n": c.argmin(),
                    })
                })
                .collect();
            Ok(json!({ "command": "effres", "curves": rows, "files": [file] }))
        }
        Command::Trajectory { point } => {
            let curve = ctx.curve(point.level)?;
            let drive = ctx.drive(point);
            let traj = integrate_with(&curve, &drive, &ctx.params, Tolerances::default())?;
            let (t, phi) = readout(&traj, &drive, &ctx.params);
            let (mut w, file) = ctx.create("trajectory.csv")?;
            traj.write_csv(&mut w)?;
            w.flush()?;
            let end = traj.terminal();
            Ok(json!({
                "command": "trajectory",
                "level": level_json(point.level.0),
                "drive_rad_per_s": drive.amplitude,
                "omega_m_rad_per_s": drive.omega_m,
                "T": t,
                "phi": phi,
                "terminal": [end.re, end.im],
                "steps": traj.stats.accepted,
                "files": [file],
            }))
        }
        Command::Landscape { point, extent, grid } => {
            let curve = ctx.curve(point.level)?;
            let drive = ctx.drive(point);
            let r = extent * drive.alpha0(&ctx.params);
            let pts = landscape(&curve, &drive, &ctx.params, (-r, r), (-r, r), *grid, *grid)?;
            let (mut w, file) = ctx.create("landscape.csv")?;
            write_landscape_csv(&pts, &mut w)?;
            w.flush()?;
            let roots = find_roots(&curve, drive.amplitude, drive.omega_m, &ctx.params)?;
            Ok(json!({
                "command": "landscape",
                "level": level_json(point.level.0),
                "roots": serde_json::to_value(&roots).unwrap_or_default(),
                "files": [file],
            }))
        }
        Command::Roots { level, detuning_mhz, photons } => {
            let curve = ctx.curve(*level)?;
            let window = ctx.window()?;
            let drives: Vec<f64> = if photons.is_empty() {
                vec![ctx.config.drive_amplitude()]
            } else {
                photons.iter().map(|&n| photon_to_amp(n, &ctx.params)).collect()
            };
            let mut records = Vec::new();
            for &amplitude in &drives {
                for &d in detuning_mhz {
                    let omega_m = ctx.params.omega_r + mhz(d);
                    let roots = find_roots(&curve, amplitude, omega_m, &ctx.params)?;
                    let label = region(&curve, amplitude, omega_m, &ctx.params, &window)?;
                    records.push(RootRecord { amplitude, omega_m, roots, region: Some(label) });
                }
            }
            let (mut w, file) = ctx.create("roots.csv")?;
            write_roots_csv(&records, &mut w)?;
            w.flush()?;
            let points: Vec<Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "drive_rad_per_s": r.amplitude,
                        "detuning_over_2pi_mhz": to_mhz(r.omega_m - ctx.params.omega_r),
                        "root_count": r.roots.len(),
                        "n_star": r.roots.iter().map(|p| p.n_star).collect::<Vec<_>>(),
                        "stable": r.roots.iter().map(|p| p.stability == Stability::Stable).collect::<Vec<_>>(),
                        "region": r.region.map(|g| g.to_string()),
                    })
                })
                .collect();
            Ok(json!({ "command": "roots", "level": level_json(level.0), "points": points, "files": [file] }))
        }
        Command::Map { level, svg } => {
            let map = ctx.map(*level, ctx.mode)?;
            let (mut w, csv) = ctx.create("map.csv")?;
            map.write_csv(&mut w)?;
            w.flush()?;
            let mut files = vec![csv];
            let peaks = ctx.config.peak_options();
            if *svg {
                files.push(ctx.write_text("map.svg", &heatmap(&map, &peaks))?);
            }
            let ode = ctx.mode != MapMode::FixedPoint;
            Ok(json!({
                "command": "map",
                "level": level_json(level.0),
                "drives": map.drive_axis.len(),
                "detunings": map.freq_axis.len(),
                "invalid_cells": map.invalid_count(),
                "n_c_scd": if ode { critical_point_scd(&map, &peaks) } else { None },
                "files": files,
            }))
        }
        Command::Critical { level } => {
            let (report, extra) = ctx.critical_report(*level)?;
            let mut body = serde_json::to_value(&report).unwrap_or_default();
            merge(&mut body, extra);
            let file = ctx.write_text("critical.json", &format!("{body:#}\n"))?;
            merge(&mut body, json!({ "command": "critical", "files": [file] }));
            Ok(body)
        }
        Command::Summary => {
            let reports = (0..3)
                .map(|l| ctx.critical_report(Level(l)).map(|(r, _)| r))
                .collect::<Result<Vec<_>>>()?;
            let rows = critical_summary(&reports)?;
            let table = serde_json::to_value(&rows).unwrap_or_default();
            let json_file = ctx.write_text("summary.json", &format!("{table:#}\n"))?;
            let (mut w, csv) = ctx.create("summary.csv")?;
            write_summary_csv(&rows, &mut w)?;
            w.flush()?;
            Ok(json!({ "command": "summary", "rows": table, "files": [json_file, csv] }))
        }
    }
}

fn merge(into: &mut Value, extra: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, extra) {
        a.extend(b);
    }
}
