//! Browser bindings: effective-resonance curves, the fan diagram and single
//! phase-space trajectories, each returned as a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use bistab_core::effres::{effective_resonance, EffResCurve};
use bistab_core::fixed_points::{find_roots, Stability};
use bistab_core::mist::{fan_curve, find_crossings};
use bistab_core::ode::Tolerances;
use bistab_core::params::{mhz, to_mhz, SystemParams};
use bistab_core::response::photon_to_amp;
use bistab_core::scd::{integrate_with, readout, DriveConfig};
use bistab_core::spectrum::{diagonalize_strip, DressedSpectrum};

/// Keeps the page responsive: every 4th accepted step is plenty for a plot.
const TRAJECTORY_STRIDE: usize = 4;

#[wasm_bindgen]
pub struct Model {
    params: SystemParams,
    spectrum: DressedSpectrum,
    curves: Vec<EffResCurve>,
}

#[derive(Serialize)]
struct Curve {
    level: usize,
    chi_mhz: f64,
    argmin: usize,
    /// `(ω_i(n) - ω_r)/2π` in MHz for `n = 0, 1, ...`.
    shift_mhz: Vec<f64>,
}

#[derive(Serialize)]
struct Fan {
    levels: Vec<usize>,
    /// `ω̄_k(N)/2π` in GHz per level, `null` where undefined.
    curves: Vec<Vec<Option<f64>>>,
    /// `ω̄_k^{+1}(N)/2π` of `k`.
    lifted: Vec<Option<f64>>,
    crossings: Vec<f64>,
}

#[derive(Serialize)]
struct Root {
    re: f64,
    im: f64,
    stable: bool,
}

#[derive(Serialize)]
struct Portrait {
    t_us: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
    alpha0: f64,
    transmission: f64,
    phase: f64,
    roots: Vec<Root>,
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn to_json(v: &impl Serialize) -> Result<String, String> {
    serde_json::to_string(v).map_err(err)
}

#[wasm_bindgen]
impl Model {
    /// Reference device with coupling, anharmonicity and linewidth given as `value/2π` in MHz.
    #[wasm_bindgen(constructor)]
    pub fn new(g_mhz: f64, eta_mhz: f64, kappa_mhz: f64, transmon_levels: usize, n_max: usize) -> Result<Model, String> {
        let mut params = SystemParams::paper().with_truncation(transmon_levels, n_max).with_coupling(mhz(g_mhz));
        params.eta = mhz(eta_mhz);
        params.kappa = mhz(kappa_mhz);
        params.validate().map_err(err)?;
        let spectrum = diagonalize_strip(&params).map_err(err)?;
        let curves = (0..transmon_levels.min(3))
            .map(|i| effective_resonance(&spectrum, i))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(Model { params, spectrum, curves })
    }

    /// Effective resonances of g, e and f.
    #[wasm_bindgen(js_name = effectiveResonance)]
    pub fn effective_resonance(&self) -> Result<String, String> {
        let curves: Vec<Curve> = self
            .curves
            .iter()
            .map(|c| Curve {
                level: c.level(),
                chi_mhz: to_mhz(c.chi()),
                argmin: c.argmin(),
                shift_mhz: c.samples().iter().map(|w| to_mhz(w - self.params.omega_r)).collect(),
            })
            .collect();
        to_json(&curves)
    }

    /// Fan curves for `k_lo..=k_hi` and the crossings of `|k, N+1>` with `|j, N>`.
    #[wasm_bindgen(js_name = fanDiagram)]
    pub fn fan_diagram(&self, k_lo: usize, k_hi: usize, k: usize, j: usize) -> Result<String, String> {
        let n_max = self.spectrum.n_max();
        let ghz = |w: f64| w / std::f64::consts::TAU / 1e9;
        let sample = |level: usize, extra: bool| -> Result<Vec<Option<f64>>, String> {
            let c = fan_curve(&self.spectrum, level, extra).map_err(err)?;
            Ok((0..n_max).map(|n| c.at(n).map(ghz)).collect())
        };
        let levels: Vec<usize> = (k_lo..=k_hi).collect();
        let curves = levels.iter().map(|&l| sample(l, false)).collect::<Result<Vec<_>, _>>()?;
        let crossings = find_crossings(&self.spectrum, k, j, 1..=n_max - 1)
            .map_err(err)?
            .iter()
            .map(|c| c.n_star)
            .collect();
        to_json(&Fan { levels, curves, lifted: sample(k, true)?, crossings })
    }

    /// Trajectory from vacuum plus the steady states for one drive point.
    #[wasm_bindgen(js_name = phasePortrait)]
    pub fn phase_portrait(&self, level: usize, photons: f64, detuning_mhz: f64, t0_us: f64) -> Result<String, String> {
        let curve = self.curves.get(level).ok_or_else(|| format!("level {level} is not available"))?;
        let drive = DriveConfig::new(photon_to_amp(photons, &self.params), self.params.omega_r + mhz(detuning_mhz))
            .with_t0(t0_us * 1e-6);
        let traj = integrate_with(curve, &drive, &self.params, Tolerances::default()).map_err(err)?;
        let (transmission, phase) = readout(&traj, &drive, &self.params);
        let roots = find_roots(curve, drive.amplitude, drive.omega_m, &self.params)
            .map_err(err)?
            .iter()
            .map(|r| Root { re: r.alpha().re, im: r.alpha().im, stable: r.stability == Stability::Stable })
            .collect();
        let keep = |k: &usize| k.is_multiple_of(TRAJECTORY_STRIDE) || *k + 1 == traj.times.len();
        let idx: Vec<usize> = (0..traj.times.len()).filter(keep).collect();
        to_json(&Portrait {
            t_us: idx.iter().map(|&k| traj.times[k] * 1e6).collect(),
            re: idx.iter().map(|&k| traj.alphas[k].re).collect(),
            im: idx.iter().map(|&k| traj.alphas[k].im).collect(),
            alpha0: drive.alpha0(&self.params),
            transmission,
            phase,
            roots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn model() -> Model {
        Model::new(55.0, 111.0, 1.3, 24, 400).unwrap()
    }

    #[test]
    fn curves_have_negative_shifts() {
        let v: Value = serde_json::from_str(&model().effective_resonance().unwrap()).unwrap();
        let curves = v.as_array().unwrap();
        assert_eq!(curves.len(), 3);
        for c in curves {
            assert!(c["chi_mhz"].as_f64().unwrap() < 0.0);
            assert_eq!(c["shift_mhz"].as_array().unwrap().len(), 400);
        }
    }

    #[test]
    fn fan_reports_crossing() {
        let v: Value = serde_json::from_str(&model().fan_diagram(3, 9, 0, 7).unwrap()).unwrap();
        assert_eq!(v["levels"].as_array().unwrap().len(), 7);
        let n = v["crossings"][0].as_f64().unwrap();
        assert!((n - 66.0).abs() < 17.0, "{n}");
    }

    #[test]
    fn portrait_in_bistable_regime() {
        let m = model();
        let v: Value = serde_json::from_str(&m.phase_portrait(2, (13.0f64 / 1.3).powi(2), -8.2, 1.0).unwrap()).unwrap();
        assert_eq!(v["roots"].as_array().unwrap().len(), 3);
        assert_eq!(v["t_us"].as_array().unwrap().len(), v["re"].as_array().unwrap().len());
        assert!(m.phase_portrait(5, 10.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(Model::new(55.0, 111.0, -1.0, 12, 200).is_err());
    }
}
