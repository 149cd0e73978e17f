//! Semiclassical cavity amplitude driven through the effective resonance.
//!
//! In the frame rotating at the drive frequency `ω_M`,
//!
//! ```text
//! dα/dt = -i (ω_i(|α|²) - ω_M) α - i 𝓔/2 - (κ/2) α
//! ```
//!
//! The readout is the time average of `α` over the measurement window.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use num_complex::Complex64;

use crate::effres::EffResCurve;
use crate::error::{Error, Result};
use crate::format::sig;
use crate::ode::{dopri5, OdeError, StepStats, Tolerances};
use crate::params::SystemParams;

/// Measurement window of the reference experiment, seconds.
pub const DEFAULT_T0: f64 = 1e-6;

/// Largest `(𝓔/κ)²` allowed is the table range divided by this factor.
pub const HEADROOM: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    /// Drive amplitude 𝓔, rad/s.
    pub amplitude: f64,
    /// Drive (measurement) angular frequency, rad/s.
    pub omega_m: f64,
    /// Integration window, seconds.
    pub t0: f64,
    pub initial_alpha: Complex64,
}

impl DriveConfig {
    pub fn new(amplitude: f64, omega_m: f64) -> Self {
        DriveConfig { amplitude, omega_m, t0: DEFAULT_T0, initial_alpha: Complex64::new(0.0, 0.0) }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// Linear-cavity steady-state radius `𝓔/κ`.
    pub fn alpha0(&self, params: &SystemParams) -> f64 {
        self.amplitude / params.damping()
    }

    pub fn validate(&self, curve: &EffResCurve, params: &SystemParams) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::Input(format!("drive amplitude must be >= 0, got {}", self.amplitude)));
        }
        if !(self.t0 > 0.0) || !self.t0.is_finite() {
            return Err(Error::Input(format!("integration time must be > 0, got {}", self.t0)));
        }
        let n0 = self.alpha0(params).powi(2);
        let allowed = curve.n_limit() / HEADROOM;
        if n0 > allowed {
            return Err(Error::Range { n: n0 * HEADROOM, limit: curve.n_limit() });
        }
        Ok(())
    }
}

/// `dα/dt` at `alpha`.
pub fn alpha_dot(
    curve: &EffResCurve,
    drive: &DriveConfig,
    params: &SystemParams,
    alpha: Complex64,
) -> Result<Complex64> {
    let delta = curve.eval(alpha.norm_sqr())? - drive.omega_m;
    let kappa = params.damping();
    let i = Complex64::i();
    Ok(-i * delta * alpha - i * (0.5 * drive.amplitude) - 0.5 * kappa * alpha)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub alphas: Vec<Complex64>,
    /// `∫₀^{t0} α dt`.
    pub integral: Complex64,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn terminal(&self) -> Complex64 {
        *self.alphas.last().expect("trajectory has at least the initial point")
    }

    /// Columns `t,re_alpha,im_alpha,n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,re_alpha,im_alpha,n")?;
        for (t, a) in self.times.iter().zip(&self.alphas) {
            writeln!(w, "{},{},{},{}", sig(*t), sig(a.re), sig(a.im), sig(a.norm_sqr()))?;
        }
        Ok(())
    }
}

/// Final amplitude and window-averaged amplitude without storing the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub alpha: Complex64,
    /// `(1/t0) ∫₀^{t0} α dt`.
    pub mean: Complex64,
    pub stats: StepStats,
}

fn run<O: FnMut(f64, &[f64; 4])>(
    curve: &EffResCurve,
    drive: &DriveConfig,
    params: &SystemParams,
    tol: Tolerances,
    observe: O,
) -> Result<([f64; 4], StepStats)> {
    drive.validate(curve, params)?;
    let kappa = params.damping();
    let (e_half, wm, inv_t0) = (0.5 * drive.amplitude, drive.omega_m, 1.0 / drive.t0);
    // state: Re α, Im α, and the running mean (1/t0)∫α dt
    let rhs = |_t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let delta = curve.eval(y[0] * y[0] + y[1] * y[1])? - wm;
        Ok([
            delta * y[1] - 0.5 * kappa * y[0],
            -delta * y[0] - 0.5 * kappa * y[1] - e_half,
            y[0] * inv_t0,
            y[1] * inv_t0,
        ])
    };
    let a0 = drive.initial_alpha;
    dopri5(rhs, 0.0, drive.t0, [a0.re, a0.im, 0.0, 0.0], tol, observe).map_err(|e| match e {
        OdeError::Rhs(e) => e,
        OdeError::StepUnderflow { t, y } => Error::Stiffness { t, re: y[0], im: y[1] },
    })
}

/// Integrates from `drive.initial_alpha` over `[0, drive.t0]`, recording every step.
pub fn integrate(curve: &EffResCurve, drive: &DriveConfig, params: &SystemParams) -> Result<Trajectory> {
    integrate_with(curve, drive, params, Tolerances::default())
}

pub fn integrate_with(
    curve: &EffResCurve,
    drive: &DriveConfig,
    params: &SystemParams,
    tol: Tolerances,
) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut alphas = Vec::new();
    let (y, stats) = run(curve, drive, params, tol, |t, y| {
        times.push(t);
        alphas.push(Complex64::new(y[0], y[1]));
    })?;
    Ok(Trajectory { times, alphas, integral: Complex64::new(y[2], y[3]) * drive.t0, stats })
}

/// Same dynamics as [`integrate_with`], keeping only the end state.
pub fn integrate_endpoint(
    curve: &EffResCurve,
    drive: &DriveConfig,
    params: &SystemParams,
    tol: Tolerances,
) -> Result<Endpoint> {
    let (y, stats) = run(curve, drive, params, tol, |_, _| {})?;
    Ok(Endpoint {
        alpha: Complex64::new(y[0], y[1]),
        mean: Complex64::new(y[2], y[3]),
        stats,
    })
}

/// Normalized transmission and phase of a window average `mean`.
///
/// `T = |mean| κ/𝓔` and `φ = arg(mean) + π/2`, wrapped to `(-π, π]`, so a
/// resonant linear cavity in steady state reads `(1, 0)`.
pub fn readout_from_mean(mean: Complex64, drive: &DriveConfig, params: &SystemParams) -> (f64, f64) {
    if drive.amplitude == 0.0 {
        return (0.0, 0.0);
    }
    let t = mean.norm() * params.damping() / drive.amplitude;
    (t, wrap_phase(mean.arg() + FRAC_PI_2))
}

pub fn readout(traj: &Trajectory, drive: &DriveConfig, params: &SystemParams) -> (f64, f64) {
    readout_from_mean(traj.integral / drive.t0, drive, params)
}

pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p <= -PI {
        p += 2.0 * PI;
    } else if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// One sample of the `log|dα/dt|` landscape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapePoint {
    pub re: f64,
    pub im: f64,
    /// `None` where `|α|²` lies outside the effective-resonance table.
    pub flow: Option<(f64, f64)>,
}

/// `log10|dα/dt|` and `arg(dα/dt)` on a rectangular grid of `α`.
pub fn landscape(
    curve: &EffResCurve,
    drive: &DriveConfig,
    params: &SystemParams,
    re: (f64, f64),
    im: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<Vec<LandscapePoint>> {
    if nx < 2 || ny < 2 {
        return Err(Error::Input("landscape grid needs at least 2 x 2 points".into()));
    }
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        let y = im.0 + (im.1 - im.0) * iy as f64 / (ny - 1) as f64;
        for ix in 0..nx {
            let x = re.0 + (re.1 - re.0) * ix as f64 / (nx - 1) as f64;
            let flow = match alpha_dot(curve, drive, params, Complex64::new(x, y)) {
                Ok(v) => Some((v.norm().log10(), v.arg())),
                Err(Error::Range { .. }) => None,
                Err(e) => return Err(e),
            };
            out.push(LandscapePoint { re: x, im: y, flow });
        }
    }
    Ok(out)
}

/// Columns `re_alpha,im_alpha,log_abs_alpha_dot,angle_alpha_dot`.
pub fn write_landscape_csv<W: Write>(points: &[LandscapePoint], mut w: W) -> Result<()> {
    writeln!(w, "re_alpha,im_alpha,log_abs_alpha_dot,angle_alpha_dot")?;
    for p in points {
        let (l, a) = p.flow.map_or((String::new(), String::new()), |(l, a)| (sig(l), sig(a)));
        writeln!(w, "{},{},{l},{a}", sig(p.re), sig(p.im))?;
    }
    Ok(())
}
