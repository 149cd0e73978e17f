//! Flat `key = value` run configuration.
//!
//! Frequencies are written as `value/2π` with an explicit unit suffix on the
//! key (`omega_r_GHz = 5.078`) and converted to rad/s when read through
//! [`RunConfig::system_params`]. The parsed structure keeps the value and unit
//! as written, so [`RunConfig::emit`] reproduces an equivalent file.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::params::{EtaConvention, KappaConvention, Labeling, SystemParams};
use crate::response::{MapGrid, PeakOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FreqUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FreqUnit {
    const ALL: [FreqUnit; 4] = [FreqUnit::Hz, FreqUnit::KHz, FreqUnit::MHz, FreqUnit::GHz];

    pub fn suffix(self) -> &'static str {
        match self {
            FreqUnit::Hz => "Hz",
            FreqUnit::KHz => "kHz",
            FreqUnit::MHz => "MHz",
            FreqUnit::GHz => "GHz",
        }
    }

    pub fn scale(self) -> f64 {
        match self {
            FreqUnit::Hz => 1.0,
            FreqUnit::KHz => 1e3,
            FreqUnit::MHz => 1e6,
            FreqUnit::GHz => 1e9,
        }
    }
}

/// A frequency as written in the file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency {
    pub value: f64,
    pub unit: FreqUnit,
}

impl Frequency {
    pub fn new(value: f64, unit: FreqUnit) -> Self {
        Frequency { value, unit }
    }

    /// `2π · value · unit`.
    pub fn rad_per_s(self) -> f64 {
        TAU * self.value * self.unit.scale()
    }
}

/// How the single-point drive amplitude in the file is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveConvention {
    /// The number is `𝓔/2π`.
    Over2Pi,
    /// The number is `𝓔` itself in rad/s (times the unit).
    RadPerS,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapSpec {
    pub photons_min: f64,
    pub photons_max: f64,
    pub drives: usize,
    pub detuning_min: Frequency,
    pub detuning_max: Frequency,
    pub detunings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub omega_r: Frequency,
    pub omega_q: Frequency,
    pub eta: Frequency,
    pub g: Frequency,
    pub kappa: Frequency,
    pub eta_convention: EtaConvention,
    pub kappa_convention: KappaConvention,
    pub labeling: Labeling,
    pub transmon_levels: usize,
    pub n_max: usize,
    pub drive: Frequency,
    pub drive_convention: DriveConvention,
    pub map: MapSpec,
    pub t0_us: f64,
    pub peak_prominence: f64,
    pub separation_steps: f64,
    /// 0 means the split must persist to the largest drive.
    pub sustain_drives: usize,
    pub output_dir: String,
    /// 0 lets the thread pool decide.
    pub threads: usize,
}

const REQUIRED: [&str; 5] = ["omega_r", "omega_q", "eta", "g", "kappa"];
const FREQ_KEYS: [&str; 8] =
    ["omega_r", "omega_q", "eta", "g", "kappa", "drive", "map_detuning_min", "map_detuning_max"];
const PLAIN_KEYS: [&str; 16] = [
    "preset",
    "eta_convention",
    "kappa_convention",
    "labeling",
    "transmon_levels",
    "n_max",
    "drive_convention",
    "map_photons_min",
    "map_photons_max",
    "map_drives",
    "map_detunings",
    "t0_us",
    "peak_prominence",
    "separation_steps",
    "sustain_drives",
    "output_dir",
];
const THREADS: &str = "threads";

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    unit: Option<FreqUnit>,
    value: String,
}

fn config_err(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config { line, key: key.to_string(), message: message.into() }
}

/// Splits `omega_r_GHz` into `("omega_r", Some(GHz))`.
fn split_key(key: &str) -> Option<(&'static str, Option<FreqUnit>)> {
    for base in FREQ_KEYS {
        for unit in FreqUnit::ALL {
            if key.strip_prefix(base).and_then(|r| r.strip_prefix('_')) == Some(unit.suffix()) {
                return Some((base, Some(unit)));
            }
        }
    }
    PLAIN_KEYS.iter().chain([&THREADS]).find(|k| **k == key).map(|k| (*k, None))
}

fn tokenize(text: &str, line_offset: usize, into: &mut BTreeMap<&'static str, Entry>, allow_override: bool) -> Result<()> {
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1 + line_offset;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, content, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let (base, unit) = split_key(key).ok_or_else(|| {
            let hint = if FREQ_KEYS.contains(&key) { " (frequency keys need a _Hz/_kHz/_MHz/_GHz suffix)" } else { "" };
            config_err(line, key, format!("unknown key{hint}"))
        })?;
        if value.is_empty() {
            return Err(config_err(line, key, "missing value"));
        }
        if let Some(prev) = into.get(base) {
            if !allow_override {
                return Err(config_err(line, key, format!("duplicate of line {}", prev.line)));
            }
        }
        into.insert(base, Entry { line, key: key.to_string(), unit, value: value.to_string() });
    }
    Ok(())
}

fn number(e: &Entry) -> Result<f64> {
    let v: f64 = e.value.parse().map_err(|_| config_err(e.line, &e.key, format!("malformed number `{}`", e.value)))?;
    if !v.is_finite() {
        return Err(config_err(e.line, &e.key, "value must be finite"));
    }
    Ok(v)
}

fn integer(e: &Entry) -> Result<usize> {
    e.value
        .parse()
        .map_err(|_| config_err(e.line, &e.key, format!("expected a non-negative integer, got `{}`", e.value)))
}

fn choice<T: Copy>(e: &Entry, options: &[(&str, T)]) -> Result<T> {
    options.iter().find(|(name, _)| *name == e.value).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        config_err(e.line, &e.key, format!("expected one of {}, got `{}`", names.join("|"), e.value))
    })
}

const ETA_NAMES: [(&str, EtaConvention); 2] =
    [("as_printed", EtaConvention::AsPrinted), ("halved", EtaConvention::Halved)];
const KAPPA_NAMES: [(&str, KappaConvention); 2] =
    [("angular", KappaConvention::Angular), ("ordinary", KappaConvention::Ordinary)];
const LABELING_NAMES: [(&str, Labeling); 2] =
    [("energy_rank", Labeling::EnergyRank), ("max_overlap", Labeling::MaxOverlap)];
const DRIVE_NAMES: [(&str, DriveConvention); 2] =
    [("over_2pi", DriveConvention::Over2Pi), ("rad_per_s", DriveConvention::RadPerS)];

fn name_of<T: PartialEq>(options: &[(&'static str, T)], v: T) -> &'static str {
    options.iter().find(|(_, o)| *o == v).map(|(n, _)| *n).expect("every variant is named")
}

impl RunConfig {
    /// The reference device with the crate's default numerics.
    pub fn paper() -> Self {
        let p = SystemParams::paper();
        RunConfig {
            omega_r: Frequency::new(5.078, FreqUnit::GHz),
            omega_q: Frequency::new(5.795, FreqUnit::GHz),
            eta: Frequency::new(111.0, FreqUnit::MHz),
            g: Frequency::new(55.0, FreqUnit::MHz),
            kappa: Frequency::new(1.3, FreqUnit::MHz),
            eta_convention: p.eta_convention,
            kappa_convention: p.kappa_convention,
            labeling: p.labeling,
            transmon_levels: p.transmon_levels,
            n_max: p.n_max,
            drive: Frequency::new(13.0, FreqUnit::MHz),
            drive_convention: DriveConvention::Over2Pi,
            map: MapSpec {
                photons_min: 1.0,
                photons_max: 400.0,
                drives: 49,
                detuning_min: Frequency::new(-30.0, FreqUnit::MHz),
                detuning_max: Frequency::new(10.0, FreqUnit::MHz),
                detunings: 161,
            },
            t0_us: 1.0,
            peak_prominence: 0.05,
            separation_steps: 2.0,
            sustain_drives: 3,
            output_dir: "out".into(),
            threads: 0,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses `text`, then applies `key = value` overrides, which may replace file keys.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        tokenize(text, 0, &mut entries, false)?;
        let base_lines = text.lines().count();
        for (k, o) in overrides.iter().enumerate() {
            tokenize(o, base_lines + k, &mut entries, true)?;
        }
        Self::from_entries(&entries)
    }

    fn from_entries(entries: &BTreeMap<&'static str, Entry>) -> Result<Self> {
        let preset = match entries.get("preset") {
            Some(e) if e.value == "paper" => true,
            Some(e) => return Err(config_err(e.line, &e.key, format!("unknown preset `{}`", e.value))),
            None => false,
        };
        if !preset {
            let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !entries.contains_key(k)).collect();
            if !missing.is_empty() {
                let listed: Vec<String> = missing.iter().map(|k| format!("{k}_<Hz|kHz|MHz|GHz>")).collect();
                return Err(config_err(0, &missing.join(","), format!("missing required keys: {}", listed.join(", "))));
            }
        }
        let mut c = RunConfig::paper();
        for (&base, e) in entries {
            let freq = || -> Result<Frequency> { Ok(Frequency::new(number(e)?, e.unit.expect("frequency key"))) };
            match base {
                "preset" => {}
                "omega_r" => c.omega_r = freq()?,
                "omega_q" => c.omega_q = freq()?,
                "eta" => c.eta = freq()?,
                "g" => c.g = freq()?,
                "kappa" => c.kappa = freq()?,
                "drive" => c.drive = freq()?,
                "map_detuning_min" => c.map.detuning_min = freq()?,
                "map_detuning_max" => c.map.detuning_max = freq()?,
                "eta_convention" => c.eta_convention = choice(e, &ETA_NAMES)?,
                "kappa_convention" => c.kappa_convention = choice(e, &KAPPA_NAMES)?,
                "labeling" => c.labeling = choice(e, &LABELING_NAMES)?,
                "drive_convention" => c.drive_convention = choice(e, &DRIVE_NAMES)?,
                "transmon_levels" => c.transmon_levels = integer(e)?,
                "n_max" => c.n_max = integer(e)?,
                "map_photons_min" => c.map.photons_min = number(e)?,
                "map_photons_max" => c.map.photons_max = number(e)?,
                "map_drives" => c.map.drives = integer(e)?,
                "map_detunings" => c.map.detunings = integer(e)?,
                "t0_us" => c.t0_us = number(e)?,
                "peak_prominence" => c.peak_prominence = number(e)?,
                "separation_steps" => c.separation_steps = number(e)?,
                "sustain_drives" => c.sustain_drives = integer(e)?,
                "output_dir" => c.output_dir = e.value.clone(),
                "threads" => c.threads = integer(e)?,
                _ => unreachable!("split_key only yields known keys"),
            }
        }
        c.check(entries)?;
        Ok(c)
    }

    fn check(&self, entries: &BTreeMap<&'static str, Entry>) -> Result<()> {
        let at = |base: &str| entries.get(base).map(|e| (e.line, e.key.clone())).unwrap_or((0, base.to_string()));
        let positive = [
            ("omega_r", self.omega_r.value),
            ("omega_q", self.omega_q.value),
            ("kappa", self.kappa.value),
            ("map_photons_min", self.map.photons_min),
            ("t0_us", self.t0_us),
            ("separation_steps", self.separation_steps),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                let (line, key) = at(k);
                return Err(config_err(line, &key, format!("must be > 0, got {v}")));
            }
        }
        for (k, v) in [("eta", self.eta.value), ("g", self.g.value), ("drive", self.drive.value)] {
            if v < 0.0 {
                let (line, key) = at(k);
                return Err(config_err(line, &key, format!("must be >= 0, got {v}")));
            }
        }
        let checks: [(&str, bool, &str); 7] = [
            ("transmon_levels", self.transmon_levels >= 2, "must be at least 2"),
            ("n_max", self.n_max >= 1, "must be at least 1"),
            ("map_photons_max", self.map.photons_max > self.map.photons_min, "must exceed map_photons_min"),
            ("map_drives", self.map.drives >= 2, "must be at least 2"),
            ("map_detunings", self.map.detunings >= 8, "must be at least 8"),
            (
                "map_detuning_max",
                self.map.detuning_max.rad_per_s() > self.map.detuning_min.rad_per_s(),
                "must exceed map_detuning_min",
            ),
            ("peak_prominence", (0.0..1.0).contains(&self.peak_prominence), "must lie in [0, 1)"),
        ];
        for (k, ok, msg) in checks {
            if !ok {
                let (line, key) = at(k);
                return Err(config_err(line, &key, msg));
            }
        }
        Ok(())
    }

    pub fn system_params(&self) -> SystemParams {
        SystemParams {
            omega_r: self.omega_r.rad_per_s(),
            omega_q: self.omega_q.rad_per_s(),
            eta: self.eta.rad_per_s(),
            g: self.g.rad_per_s(),
            kappa: self.kappa.rad_per_s(),
            transmon_levels: self.transmon_levels,
            n_max: self.n_max,
            eta_convention: self.eta_convention,
            kappa_convention: self.kappa_convention,
            labeling: self.labeling,
        }
    }

    /// Drive amplitude 𝓔 in rad/s under the configured convention.
    pub fn drive_amplitude(&self) -> f64 {
        match self.drive_convention {
            DriveConvention::Over2Pi => self.drive.rad_per_s(),
            DriveConvention::RadPerS => self.drive.value * self.drive.unit.scale(),
        }
    }

    pub fn map_grid(&self) -> Result<MapGrid> {
        let to_mhz = |f: Frequency| f.value * f.unit.scale() / 1e6;
        MapGrid::photon_log(
            &self.system_params(),
            (self.map.photons_min, self.map.photons_max, self.map.drives),
            (to_mhz(self.map.detuning_min), to_mhz(self.map.detuning_max), self.map.detunings),
        )
    }

    pub fn t0(&self) -> f64 {
        self.t0_us * 1e-6
    }

    pub fn peak_options(&self) -> PeakOptions {
        PeakOptions {
            prominence: self.peak_prominence,
            separation_steps: self.separation_steps,
            sustain: (self.sustain_drives > 0).then_some(self.sustain_drives),
        }
    }

    /// Config text that parses back to `self`.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let f = |s: &mut String, key: &str, q: Frequency| {
            let _ = writeln!(s, "{key}_{} = {:?}", q.unit.suffix(), q.value);
        };
        f(&mut s, "omega_r", self.omega_r);
        f(&mut s, "omega_q", self.omega_q);
        f(&mut s, "eta", self.eta);
        f(&mut s, "g", self.g);
        f(&mut s, "kappa", self.kappa);
        let _ = writeln!(s, "eta_convention = {}", name_of(&ETA_NAMES, self.eta_convention));
        let _ = writeln!(s, "kappa_convention = {}", name_of(&KAPPA_NAMES, self.kappa_convention));
        let _ = writeln!(s, "labeling = {}", name_of(&LABELING_NAMES, self.labeling));
        let _ = writeln!(s, "transmon_levels = {}", self.transmon_levels);
        let _ = writeln!(s, "n_max = {}", self.n_max);
        f(&mut s, "drive", self.drive);
        let _ = writeln!(s, "drive_convention = {}", name_of(&DRIVE_NAMES, self.drive_convention));
        let _ = writeln!(s, "map_photons_min = {:?}", self.map.photons_min);
        let _ = writeln!(s, "map_photons_max = {:?}", self.map.photons_max);
        let _ = writeln!(s, "map_drives = {}", self.map.drives);
        f(&mut s, "map_detuning_min", self.map.detuning_min);
        f(&mut s, "map_detuning_max", self.map.detuning_max);
        let _ = writeln!(s, "map_detunings = {}", self.map.detunings);
        let _ = writeln!(s, "t0_us = {:?}", self.t0_us);
        let _ = writeln!(s, "peak_prominence = {:?}", self.peak_prominence);
        let _ = writeln!(s, "separation_steps = {:?}", self.separation_steps);
        let _ = writeln!(s, "sustain_drives = {}", self.sustain_drives);
        let _ = writeln!(s, "output_dir = {}", self.output_dir);
        let _ = writeln!(s, "threads = {}", self.threads);
        s
    }

    /// Fully resolved settings with every frequency in rad/s.
    pub fn provenance(&self) -> String {
        let p = self.system_params();
        let mut s = String::from("# resolved configuration, frequencies in rad/s\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("omega_r_rad_per_s", sig(p.omega_r));
        kv("omega_q_rad_per_s", sig(p.omega_q));
        kv("eta_rad_per_s", sig(p.eta));
        kv("g_rad_per_s", sig(p.g));
        kv("kappa_rad_per_s", sig(p.kappa));
        kv("damping_rad_per_s", sig(p.damping()));
        kv("eta_convention", name_of(&ETA_NAMES, p.eta_convention).into());
        kv("kappa_convention", name_of(&KAPPA_NAMES, p.kappa_convention).into());
        kv("labeling", name_of(&LABELING_NAMES, p.labeling).into());
        kv("transmon_levels", p.transmon_levels.to_string());
        kv("n_max", p.n_max.to_string());
        kv("drive_rad_per_s", sig(self.drive_amplitude()));
        kv("drive_convention", name_of(&DRIVE_NAMES, self.drive_convention).into());
        kv("map_photons_min", sig(self.map.photons_min));
        kv("map_photons_max", sig(self.map.photons_max));
        kv("map_drives", self.map.drives.to_string());
        kv("map_detuning_min_rad_per_s", sig(self.map.detuning_min.rad_per_s()));
        kv("map_detuning_max_rad_per_s", sig(self.map.detuning_max.rad_per_s()));
        kv("map_detunings", self.map.detunings.to_string());
        kv("t0_s", sig(self.t0()));
        kv("peak_prominence", sig(self.peak_prominence));
        kv("separation_steps", sig(self.separation_steps));
        kv("sustain_drives", self.sustain_drives.to_string());
        kv("output_dir", self.output_dir.clone());
        kv("threads", self.threads.to_string());
        s
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::paper()
    }
}
