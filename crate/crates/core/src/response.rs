//! Drive × frequency response maps and critical photon numbers.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::effres::EffResCurve;
use crate::error::{Error, Result};
use crate::fixed_points::{bistability, find_roots, resolve_row, Bistability, RegionLabel};
use crate::format::sig;
use crate::ode::Tolerances;
use crate::params::{mhz, SystemParams};
use crate::scd::{integrate_endpoint, readout_from_mean, DriveConfig, DEFAULT_T0, HEADROOM};

/// Critical photon numbers measured on the device for `|g>, |e>, |f>`.
pub const EXPERIMENT_CRITICAL: [f64; 3] = [49.0, 61.0, 20.0];

pub fn level_name(level: usize) -> String {
    match level {
        0 => "g".into(),
        1 => "e".into(),
        2 => "f".into(),
        n => n.to_string(),
    }
}

/// Resonant steady-state photon number of the linear cavity, `(𝓔/κ)²`.
pub fn amp_to_photon(amplitude: f64, params: &SystemParams) -> f64 {
    (amplitude / params.damping()).powi(2)
}

pub fn photon_to_amp(photons: f64, params: &SystemParams) -> f64 {
    photons.sqrt() * params.damping()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapMode {
    Ode,
    FixedPoint,
    Both,
}

impl MapMode {
    fn ode(self) -> bool {
        matches!(self, MapMode::Ode | MapMode::Both)
    }

    fn fixed_point(self) -> bool {
        matches!(self, MapMode::FixedPoint | MapMode::Both)
    }
}

/// Drive amplitudes (rad/s) and drive detunings `ω_M - ω_r` (rad/s), both ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct MapGrid {
    pub drives: Vec<f64>,
    pub detunings: Vec<f64>,
}

impl MapGrid {
    /// Log-spaced photon numbers `[n_lo, n_hi]` and linear detunings `[d_lo, d_hi]` in MHz.
    pub fn photon_log(
        params: &SystemParams,
        photons: (f64, f64, usize),
        detuning_mhz: (f64, f64, usize),
    ) -> Result<Self> {
        let (n_lo, n_hi, n_count) = photons;
        let (d_lo, d_hi, d_count) = detuning_mhz;
        if !(n_lo > 0.0 && n_hi > n_lo) || n_count < 2 || !(d_hi > d_lo) || d_count < 2 {
            return Err(Error::Input("map grid needs 0 < n_min < n_max, d_min < d_max and >= 2 points each".into()));
        }
        let drives = (0..n_count)
            .map(|k| {
                let n = (n_lo.ln() + (n_hi.ln() - n_lo.ln()) * k as f64 / (n_count - 1) as f64).exp();
                photon_to_amp(n, params)
            })
            .collect();
        let detunings = (0..d_count)
            .map(|k| mhz(d_lo + (d_hi - d_lo) * k as f64 / (d_count - 1) as f64))
            .collect();
        Ok(MapGrid { drives, detunings })
    }

    /// 49 drives over `N ∈ [1, 400]` and 161 detunings over `[-30, 10]` MHz.
    pub fn default_window(params: &SystemParams) -> Self {
        Self::photon_log(params, (1.0, 400.0, 49), (-30.0, 10.0, 161)).expect("valid default grid")
    }

    fn validate(&self) -> Result<()> {
        let ascending = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if self.drives.is_empty() || self.detunings.is_empty() {
            return Err(Error::Input("map grid is empty".into()));
        }
        if !ascending(&self.drives) || !ascending(&self.detunings) || self.drives[0] < 0.0 {
            return Err(Error::Input("map axes must be strictly ascending with non-negative drives".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOptions {
    pub mode: MapMode,
    pub t0: f64,
    pub tol: Tolerances,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions { mode: MapMode::Ode, t0: DEFAULT_T0, tol: Tolerances::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cell {
    pub transmission: Option<f64>,
    pub phase: Option<f64>,
    pub root_count: Option<usize>,
    pub region: Option<RegionLabel>,
    pub error: Option<Error>,
}

#[derive(Debug, Clone)]
pub struct ResponseMap {
    pub level: usize,
    pub drive_axis: Vec<f64>,
    pub photon_axis: Vec<f64>,
    pub freq_axis: Vec<f64>,
    /// Row-major: `cells[d * freq_axis.len() + f]`.
    pub cells: Vec<Cell>,
    pub params: SystemParams,
    pub options: MapOptions,
}

impl ResponseMap {
    pub fn cell(&self, drive: usize, freq: usize) -> &Cell {
        &self.cells[drive * self.freq_axis.len() + freq]
    }

    pub fn row(&self, drive: usize) -> &[Cell] {
        let w = self.freq_axis.len();
        &self.cells[drive * w..(drive + 1) * w]
    }

    pub fn invalid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    /// Transmission along a drive row; `None` if any cell lacks it.
    pub fn transmission_row(&self, drive: usize) -> Option<Vec<f64>> {
        self.row(drive).iter().map(|c| c.transmission).collect()
    }

    pub fn phase_row(&self, drive: usize) -> Option<Vec<f64>> {
        self.row(drive).iter().map(|c| c.phase).collect()
    }

    /// Mean detuning spacing.
    pub fn freq_step(&self) -> f64 {
        let f = &self.freq_axis;
        if f.len() < 2 {
            return 0.0;
        }
        (f[f.len() - 1] - f[0]) / (f.len() - 1) as f64
    }

    /// Columns `E_rad_per_s,N,delta_Mr_rad_per_s,T,phi,root_count,region`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "E_rad_per_s,N,delta_Mr_rad_per_s,T,phi,root_count,region")?;
        for (d, (&e, &n)) in self.drive_axis.iter().zip(&self.photon_axis).enumerate() {
            for (f, &delta) in self.freq_axis.iter().enumerate() {
                let c = self.cell(d, f);
                let opt = |v: Option<f64>| v.map(sig).unwrap_or_default();
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    sig(e),
                    sig(n),
                    sig(delta),
                    opt(c.transmission),
                    opt(c.phase),
                    c.root_count.map(|v| v.to_string()).unwrap_or_default(),
                    c.region.map(|r| r.to_string()).unwrap_or_default()
                )?;
            }
        }
        Ok(())
    }
}

struct RawCell {
    cell: Cell,
    bistability: Option<Bistability>,
}

fn eval_cell(curve: &EffResCurve, params: &SystemParams, opts: &MapOptions, amplitude: f64, detuning: f64) -> RawCell {
    let mut cell = Cell::default();
    let mut raw = None;
    let omega_m = params.omega_r + detuning;
    if opts.mode.ode() {
        let drive = DriveConfig::new(amplitude, omega_m).with_t0(opts.t0);
        match integrate_endpoint(curve, &drive, params, opts.tol) {
            Ok(ep) => {
                let (t, phi) = readout_from_mean(ep.mean, &drive, params);
                cell.transmission = Some(t);
                cell.phase = Some(phi);
            }
            Err(e) => cell.error = Some(e),
        }
    }
    if opts.mode.fixed_point() {
        match find_roots(curve, amplitude, omega_m, params) {
            Ok(roots) => {
                cell.root_count = Some(roots.len());
                match bistability(&roots) {
                    Ok(b) => raw = Some(b),
                    Err(e) => {
                        cell.error.get_or_insert(e);
                    }
                }
            }
            Err(e) => {
                cell.error.get_or_insert(e);
            }
        }
    }
    RawCell { cell, bistability: raw }
}

/// Evaluates every `(drive, detuning)` cell. Cell failures are recorded in
/// the cell; only malformed grids fail the whole map.
pub fn run_map(curve: &EffResCurve, grid: &MapGrid, params: &SystemParams, opts: MapOptions) -> Result<ResponseMap> {
    grid.validate()?;
    let max_drive = grid.drives[grid.drives.len() - 1];
    if amp_to_photon(max_drive, params) * HEADROOM > curve.n_limit() {
        return Err(Error::Range { n: amp_to_photon(max_drive, params) * HEADROOM, limit: curve.n_limit() });
    }
    let width = grid.detunings.len();
    let total = grid.drives.len() * width;
    let job = |k: usize| eval_cell(curve, params, &opts, grid.drives[k / width], grid.detunings[k % width]);

    #[cfg(feature = "parallel")]
    let raw: Vec<RawCell> = {
        use rayon::prelude::*;
        (0..total).into_par_iter().map(job).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let raw: Vec<RawCell> = (0..total).map(job).collect();

    let mut cells = Vec::with_capacity(total);
    for row in raw.chunks(width) {
        let labels = if opts.mode.fixed_point() {
            resolve_row(&row.iter().map(|c| c.bistability).collect::<Vec<_>>())
        } else {
            vec![None; width]
        };
        for (c, label) in row.iter().zip(labels) {
            let mut cell = c.cell.clone();
            cell.region = label;
            cells.push(cell);
        }
    }

    Ok(ResponseMap {
        level: curve.level(),
        drive_axis: grid.drives.clone(),
        photon_axis: grid.drives.iter().map(|&e| amp_to_photon(e, params)).collect(),
        freq_axis: grid.detunings.clone(),
        cells,
        params: *params,
        options: opts,
    })
}

/// Thresholds of the peak-based critical-point detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakOptions {
    /// Minimum prominence as a fraction of the column's `dφ/df` range.
    pub prominence: f64,
    /// Separation, in frequency-grid steps, that counts as split.
    pub separation_steps: f64,
    /// Consecutive drive samples the split must persist; `None` means every larger drive.
    pub sustain: Option<usize>,
}

impl Default for PeakOptions {
    fn default() -> Self {
        PeakOptions { prominence: 0.05, separation_steps: 2.0, sustain: Some(3) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    /// Parabolically refined position.
    pub freq: f64,
    pub value: f64,
    pub index: usize,
}

/// Unwraps `phi` in place of `2π` jumps.
pub fn unwrap_phase(phi: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phi.len());
    let mut offset = 0.0;
    for (k, &p) in phi.iter().enumerate() {
        if k > 0 {
            let jump = p - phi[k - 1];
            offset -= 2.0 * PI * (jump / (2.0 * PI)).round();
        }
        out.push(p + offset);
    }
    out
}

/// `dφ/df` of the unwrapped phase by central differences (one-sided at the ends).
pub fn phase_gradient(freqs: &[f64], phi: &[f64]) -> Vec<f64> {
    let u = unwrap_phase(phi);
    let n = u.len();
    (0..n)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            (u[b] - u[a]) / (freqs[b] - freqs[a])
        })
        .collect()
}

fn prominence(d: &[f64], k: usize) -> f64 {
    let mut left = d[k];
    for &v in d[..k].iter().rev() {
        if v > d[k] {
            break;
        }
        left = left.min(v);
    }
    let mut right = d[k];
    for &v in &d[k + 1..] {
        if v > d[k] {
            break;
        }
        right = right.min(v);
    }
    d[k] - left.max(right)
}

/// Local maxima of `dφ/df` along one drive row, highest first.
pub fn phase_gradient_peaks(freqs: &[f64], phi: &[f64], rel_prominence: f64) -> Result<Vec<Peak>> {
    if freqs.len() != phi.len() {
        return Err(Error::Input("frequency and phase columns differ in length".into()));
    }
    if freqs.len() < 8 {
        return Err(Error::Input(format!("peak search needs >= 8 samples, got {}", freqs.len())));
    }
    let d = phase_gradient(freqs, phi);
    let (lo, hi) = d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Ok(Vec::new());
    }
    let mut peaks = Vec::new();
    for k in 1..d.len() - 1 {
        if d[k] > d[k - 1] && d[k] >= d[k + 1] && prominence(&d, k) >= rel_prominence * range {
            let (x0, x1, x2) = (freqs[k - 1], freqs[k], freqs[k + 1]);
            let (y0, y1, y2) = (d[k - 1], d[k], d[k + 1]);
            // vertex of the parabola through the three samples
            let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
            let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
            let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
            let (freq, value) = if a < 0.0 {
                let xv = -b / (2.0 * a);
                let c = y1 - a * x1 * x1 - b * x1;
                (xv.clamp(x0, x2), a * xv * xv + b * xv + c)
            } else {
                (x1, y1)
            };
            peaks.push(Peak { freq, value, index: k });
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.index.cmp(&b.index)));
    Ok(peaks)
}

/// First index starting a run of `true` that satisfies the sustain rule.
fn sustained_onset(flags: &[bool], sustain: Option<usize>) -> Option<usize> {
    (0..flags.len()).find(|&r| {
        let need = match sustain {
            None => flags.len() - r,
            Some(k) => k.max(1).min(flags.len() - r),
        };
        flags[r..r + need].iter().all(|&f| f)
    })
}

/// Per-row evidence behind the critical-point detectors.
#[derive(Debug, Clone, Serialize)]
pub struct RowPeaks {
    pub photons: f64,
    pub peaks: Vec<Peak>,
    /// Detuning of the transmission maximum.
    pub f_transmission: Option<f64>,
    /// Detuning of the largest sampled `dφ/df`.
    pub f_gradient: Option<f64>,
}

pub fn row_peaks(map: &ResponseMap, opts: &PeakOptions) -> Vec<RowPeaks> {
    (0..map.drive_axis.len())
        .map(|d| {
            let phi = map.phase_row(d);
            let t = map.transmission_row(d);
            let peaks = phi
                .as_ref()
                .and_then(|p| phase_gradient_peaks(&map.freq_axis, p, opts.prominence).ok())
                .unwrap_or_default();
            let argmax = |v: &[f64]| {
                (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b]).then(b.cmp(&a))).map(|k| map.freq_axis[k])
            };
            RowPeaks {
                photons: map.photon_axis[d],
                peaks,
                f_transmission: t.as_deref().and_then(argmax),
                f_gradient: phi.map(|p| phase_gradient(&map.freq_axis, &p)).as_deref().and_then(argmax),
            }
        })
        .collect()
}

/// Photon number where the two strongest phase-gradient peaks split apart.
pub fn critical_point_scd(map: &ResponseMap, opts: &PeakOptions) -> Option<f64> {
    let limit = opts.separation_steps * map.freq_step();
    let flags: Vec<bool> = row_peaks(map, opts)
        .iter()
        .map(|r| r.peaks.len() >= 2 && (r.peaks[0].freq - r.peaks[1].freq).abs() > limit)
        .collect();
    sustained_onset(&flags, opts.sustain).map(|r| map.photon_axis[r])
}

/// Photon number where the transmission maximum and the steepest phase part ways.
pub fn critical_point_divergence(map: &ResponseMap, opts: &PeakOptions) -> Option<f64> {
    let limit = opts.separation_steps * map.freq_step();
    let flags: Vec<bool> = row_peaks(map, opts)
        .iter()
        .map(|r| match (r.f_transmission, r.f_gradient) {
            (Some(a), Some(b)) => (a - b).abs() > limit,
            _ => false,
        })
        .collect();
    sustained_onset(&flags, opts.sustain).map(|r| map.photon_axis[r])
}

/// Smallest drive whose response is a single peak with its transmission
/// maximum within one linewidth of the bare cavity.
pub fn punch_out_drive(map: &ResponseMap, opts: &PeakOptions) -> Option<f64> {
    let kappa = map.params.damping();
    row_peaks(map, opts)
        .iter()
        .position(|r| r.peaks.len() == 1 && r.f_transmission.is_some_and(|f| f.abs() <= kappa))
        .map(|d| map.photon_axis[d])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointReport {
    pub level: usize,
    pub n_c_scd: Option<f64>,
    pub n_mist: Option<f64>,
    pub n_c_experiment_reference: Option<f64>,
    pub method: PeakOptions,
}

impl CriticalPointReport {
    pub fn new(level: usize, n_c_scd: Option<f64>, n_mist: Option<f64>, method: PeakOptions) -> Self {
        CriticalPointReport {
            level,
            n_c_scd,
            n_mist,
            n_c_experiment_reference: EXPERIMENT_CRITICAL.get(level).copied(),
            method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mechanism {
    Mist,
    Scd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub level: String,
    pub n_c_experiment_reference: Option<f64>,
    pub n_mist: Option<f64>,
    pub n_c_scd: Option<f64>,
    pub min: Option<f64>,
    pub mechanism: Option<Mechanism>,
}

/// Three-way comparison for `|g>, |e>, |f>`; the lower model prediction governs.
pub fn critical_summary(reports: &[CriticalPointReport]) -> Result<Vec<SummaryRow>> {
    (0..3)
        .map(|level| {
            let r = reports
                .iter()
                .find(|r| r.level == level)
                .ok_or_else(|| Error::Input(format!("missing report for level {}", level_name(level))))?;
            let (min, mechanism) = match (r.n_mist, r.n_c_scd) {
                (Some(m), Some(s)) if m <= s => (Some(m), Some(Mechanism::Mist)),
                (Some(_), Some(s)) => (Some(s), Some(Mechanism::Scd)),
                (Some(m), None) => (Some(m), Some(Mechanism::Mist)),
                (None, Some(s)) => (Some(s), Some(Mechanism::Scd)),
                (None, None) => (None, None),
            };
            Ok(SummaryRow {
                level: level_name(level),
                n_c_experiment_reference: r.n_c_experiment_reference,
                n_mist: r.n_mist,
                n_c_scd: r.n_c_scd,
                min,
                mechanism,
            })
        })
        .collect()
}

/// Columns `level,n_c_experiment_reference,n_mist,n_c_scd,min,mechanism`.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut w: W) -> Result<()> {
    writeln!(w, "level,n_c_experiment_reference,n_mist,n_c_scd,min,mechanism")?;
    let opt = |v: Option<f64>| v.map(sig).unwrap_or_default();
    for r in rows {
        let mech = match r.mechanism {
            Some(Mechanism::Mist) => "MIST",
            Some(Mechanism::Scd) => "SCD",
            None => "",
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.level,
            opt(r.n_c_experiment_reference),
            opt(r.n_mist),
            opt(r.n_c_scd),
            opt(r.min),
            mech
        )?;
    }
    Ok(())
}
