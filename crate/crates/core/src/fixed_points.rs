//! Steady states of the driven cavity amplitude and their stability.
//!
//! Setting `dα/dt = 0` with `α = r e^{iθ}` and `n = r²` gives the scalar
//! condition
//!
//! ```text
//! H(n) = n ((ω_i(n) - ω_M)² + κ²/4) - 𝓔²/4 = 0,   0 < n <= (𝓔/κ)²
//! ```
//!
//! which contains both branches `ω_i = ω_M ± (κα₀/2r)√(1 - (r/α₀)²)` at once.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::effres::EffResCurve;
use crate::error::{Error, Result};
use crate::format::sig;
use crate::params::SystemParams;

pub const SCAN_POINTS: usize = 4096;
const LOG_POINTS: usize = 1024;
const SCAN_FLOOR: f64 = 1e-9;
const BISECTION_RTOL: f64 = 1e-10;
/// `|det J| < DEGENERATE_DET · κ²` marks a bifurcation point.
pub const DEGENERATE_DET: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stability {
    Stable,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub n_star: f64,
    pub r: f64,
    pub theta: f64,
    /// Sign of `ω_i(n*) - ω_M`.
    pub detuning_sign: i8,
    pub stability: Stability,
    pub jacobian_det: f64,
    pub jacobian_trace: f64,
}

impl FixedPoint {
    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionLabel {
    /// One stable point, outside the frequency interval between bistable regions.
    S0,
    /// One stable point between two bistable regions at the same drive.
    S1,
    /// Two stable points on the same side of resonance.
    #[serde(rename = "SB_LOW")]
    SbLow,
    /// Two stable points on opposite sides of resonance.
    #[serde(rename = "SB_HIGH")]
    SbHigh,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionLabel::S0 => "S0",
            RegionLabel::S1 => "S1",
            RegionLabel::SbLow => "SB_LOW",
            RegionLabel::SbHigh => "SB_HIGH",
        })
    }
}

/// Region type before the frequency-scan pass that separates S0 from S1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bistability {
    Monostable,
    Low,
    High,
}

/// `H(n)`; zero exactly at steady states.
pub fn residual(curve: &EffResCurve, amplitude: f64, omega_m: f64, params: &SystemParams, n: f64) -> Result<f64> {
    let delta = curve.eval(n)? - omega_m;
    let kappa = params.damping();
    Ok(n * (delta * delta + 0.25 * kappa * kappa) - 0.25 * amplitude * amplitude)
}

/// Scan abscissae on `(0, n_hi]`: logarithmic below one photon, linear above.
pub fn scan_grid(n_hi: f64) -> Vec<f64> {
    let log_space = |lo: f64, hi: f64, count: usize, endpoint: bool| {
        let denom = if endpoint { count - 1 } else { count } as f64;
        let (a, b) = (lo.ln(), hi.ln());
        (0..count).map(move |k| (a + (b - a) * k as f64 / denom).exp())
    };
    if n_hi <= 1.0 {
        let mut g: Vec<f64> = log_space(SCAN_FLOOR * n_hi, n_hi, SCAN_POINTS, true).collect();
        g[SCAN_POINTS - 1] = n_hi;
        return g;
    }
    let lin = SCAN_POINTS - LOG_POINTS;
    let mut g: Vec<f64> = log_space(SCAN_FLOOR, 1.0, LOG_POINTS, false).collect();
    g.extend((0..lin).map(|k| 1.0 + (n_hi - 1.0) * k as f64 / (lin - 1) as f64));
    g[SCAN_POINTS - 1] = n_hi;
    g
}

/// All steady states for drive `amplitude` at `omega_m`, ascending in `n`.
pub fn find_roots(curve: &EffResCurve, amplitude: f64, omega_m: f64, params: &SystemParams) -> Result<Vec<FixedPoint>> {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::Input(format!("root finding needs a positive drive, got {amplitude}")));
    }
    let n_hi = (amplitude / params.damping()).powi(2);
    if n_hi > curve.n_limit() {
        return Err(Error::Range { n: n_hi, limit: curve.n_limit() });
    }
    let h = |n: f64| residual(curve, amplitude, omega_m, params, n);
    let mut grid = scan_grid(n_hi);
    // H > 0 strictly past α₀², so a root sitting on α₀² still brackets
    grid[SCAN_POINTS - 1] = (n_hi * (1.0 + 1e-9)).min(curve.n_limit());
    let values = grid.iter().map(|&n| h(n)).collect::<Result<Vec<_>>>()?;

    let mut roots = Vec::new();
    for k in 0..grid.len() {
        if values[k] == 0.0 {
            roots.push(grid[k]);
        } else if k + 1 < grid.len() && values[k] * values[k + 1] < 0.0 {
            roots.push(bisect(&h, grid[k], grid[k + 1], values[k])?);
        }
    }
    roots.into_iter().map(|n| classify(n, curve, amplitude, omega_m, params)).collect()
}

fn bisect(h: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, h_lo: f64) -> Result<f64> {
    let lo_negative = h_lo < 0.0;
    for _ in 0..200 {
        if hi - lo <= BISECTION_RTOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = h(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Real Jacobian of `(Re α, Im α)` flow at `alpha`.
pub fn jacobian(curve: &EffResCurve, omega_m: f64, params: &SystemParams, alpha: Complex64) -> Result<[[f64; 2]; 2]> {
    let n = alpha.norm_sqr();
    let delta = curve.eval(n)? - omega_m;
    let slope = curve.eval_derivative(n)?;
    let half_kappa = 0.5 * params.damping();
    let (x, y) = (alpha.re, alpha.im);
    Ok([
        [2.0 * slope * x * y - half_kappa, delta + 2.0 * slope * y * y],
        [-delta - 2.0 * slope * x * x, -2.0 * slope * x * y - half_kappa],
    ])
}

/// Completes a steady state at photon number `n_star` with phase and stability.
pub fn classify(n_star: f64, curve: &EffResCurve, amplitude: f64, omega_m: f64, params: &SystemParams) -> Result<FixedPoint> {
    let kappa = params.damping();
    let delta = curve.eval(n_star)? - omega_m;
    let h = residual(curve, amplitude, omega_m, params, n_star)?;
    if h.abs() > 1e-6 * 0.25 * amplitude * amplitude {
        return Err(Error::Input(format!("n = {n_star} is not a steady state (H = {h:e})")));
    }
    let steady = Complex64::new(0.0, -amplitude) / Complex64::new(kappa, 2.0 * delta);
    let r = n_star.sqrt();
    let theta = steady.arg();
    let j = jacobian(curve, omega_m, params, Complex64::from_polar(r, theta))?;
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let trace = j[0][0] + j[1][1];
    if det.abs() < DEGENERATE_DET * kappa * kappa {
        return Err(Error::DegenerateRoot { n_star, det });
    }
    Ok(FixedPoint {
        n_star,
        r,
        theta,
        detuning_sign: if delta > 0.0 { 1 } else if delta < 0.0 { -1 } else { 0 },
        stability: if det > 0.0 { Stability::Stable } else { Stability::Saddle },
        jacobian_det: det,
        jacobian_trace: trace,
    })
}

/// Bistability type of a classified root set.
pub fn bistability(roots: &[FixedPoint]) -> Result<Bistability> {
    match roots.len() {
        1 => Ok(Bistability::Monostable),
        3 => {
            let stable: Vec<&FixedPoint> = roots.iter().filter(|r| r.stability == Stability::Stable).collect();
            if stable.len() != 2 {
                return Err(Error::RootCount(roots.len()));
            }
            Ok(if stable[0].detuning_sign == stable[1].detuning_sign {
                Bistability::Low
            } else {
                Bistability::High
            })
        }
        n => Err(Error::RootCount(n)),
    }
}

/// Final labels of one drive row whose frequencies ascend; `None` entries are
/// boundary or failed points and never count as bistable neighbours.
pub fn resolve_row(raw: &[Option<Bistability>]) -> Vec<Option<RegionLabel>> {
    let is_bistable = |b: &Option<Bistability>| matches!(b, Some(Bistability::Low | Bistability::High));
    let first = raw.iter().position(is_bistable);
    let last = raw.iter().rposition(is_bistable);
    raw.iter()
        .enumerate()
        .map(|(k, b)| {
            b.map(|b| match b {
                Bistability::Low => RegionLabel::SbLow,
                Bistability::High => RegionLabel::SbHigh,
                Bistability::Monostable => match (first, last) {
                    (Some(f), Some(l)) if f < k && k < l => RegionLabel::S1,
                    _ => RegionLabel::S0,
                },
            })
        })
        .collect()
}

/// Region label of `(amplitude, omega_m)`, resolving S0/S1 by scanning `window`.
pub fn region(
    curve: &EffResCurve,
    amplitude: f64,
    omega_m: f64,
    params: &SystemParams,
    window: &[f64],
) -> Result<RegionLabel> {
    let here = bistability(&find_roots(curve, amplitude, omega_m, params)?)?;
    match here {
        Bistability::Low => return Ok(RegionLabel::SbLow),
        Bistability::High => return Ok(RegionLabel::SbHigh),
        Bistability::Monostable => {}
    }
    let mut below = false;
    let mut above = false;
    for &w in window {
        let bistable = find_roots(curve, amplitude, w, params)
            .and_then(|r| bistability(&r))
            .map(|b| b != Bistability::Monostable)
            .unwrap_or(false);
        if bistable {
            below |= w < omega_m;
            above |= w > omega_m;
        }
    }
    Ok(if below && above { RegionLabel::S1 } else { RegionLabel::S0 })
}

/// One evaluated point for [`write_roots_csv`].
#[derive(Debug, Clone)]
pub struct RootRecord {
    pub amplitude: f64,
    pub omega_m: f64,
    pub roots: Vec<FixedPoint>,
    pub region: Option<RegionLabel>,
}

/// Columns `E_rad_per_s,omega_M,root_count,n_star,stability,region`; lists are `;`-separated.
pub fn write_roots_csv<W: Write>(records: &[RootRecord], mut w: W) -> Result<()> {
    writeln!(w, "E_rad_per_s,omega_M,root_count,n_star,stability,region")?;
    for r in records {
        let n: Vec<String> = r.roots.iter().map(|p| sig(p.n_star)).collect();
        let s: Vec<&str> = r
            .roots
            .iter()
            .map(|p| match p.stability {
                Stability::Stable => "STABLE",
                Stability::Saddle => "SADDLE",
            })
            .collect();
        let region = r.region.map(|g| g.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            sig(r.amplitude),
            sig(r.omega_m),
            r.roots.len(),
            n.join(";"),
            s.join(";"),
            region
        )?;
    }
    Ok(())
}
