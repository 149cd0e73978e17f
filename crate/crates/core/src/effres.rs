//! Photon-number dependent cavity resonance `ω_i(n) = (E_{i,n+1} - E_{i,n})/ħ`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::interp::Pchip;
use crate::spectrum::DressedSpectrum;

#[derive(Debug, Clone)]
pub struct EffResCurve {
    level: usize,
    omega_r: f64,
    interp: Pchip,
}

/// Effective resonance of transmon level `i`, sampled at `n = 0..n_max-1`.
pub fn effective_resonance(spec: &DressedSpectrum, i: usize) -> Result<EffResCurve> {
    if i >= spec.levels() {
        return Err(Error::Input(format!(
            "level {i} out of range (transmon_levels = {})",
            spec.levels()
        )));
    }
    let m = spec.n_max();
    let energies = (0..=m).map(|n| spec.eigenenergy(i, n)).collect::<Result<Vec<_>>>()?;
    let samples: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let x = (0..samples.len()).map(|n| n as f64).collect();
    EffResCurve::from_samples(i, spec.params().omega_r, x, samples)
}

impl EffResCurve {
    /// Curve through explicit `(n, ω)` samples.
    pub fn from_samples(level: usize, omega_r: f64, n: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if n.first() != Some(&0.0) {
            return Err(Error::Input("effective resonance samples must start at n = 0".into()));
        }
        Ok(EffResCurve { level, omega_r, interp: Pchip::new(n, omega)? })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }

    /// Largest photon number the curve covers.
    pub fn n_limit(&self) -> f64 {
        self.interp.domain().1
    }

    pub fn samples(&self) -> &[f64] {
        self.interp.nodes().1
    }

    fn check(&self, n: f64) -> Result<()> {
        if n.is_nan() || n < 0.0 {
            return Err(Error::Input(format!("photon number must be >= 0, got {n}")));
        }
        if n > self.n_limit() {
            return Err(Error::Range { n, limit: self.n_limit() });
        }
        Ok(())
    }

    pub fn eval(&self, n: f64) -> Result<f64> {
        self.check(n)?;
        Ok(self.interp.eval(n))
    }

    /// `dω_i/dn` in rad/s per photon.
    pub fn eval_derivative(&self, n: f64) -> Result<f64> {
        self.check(n)?;
        Ok(self.interp.derivative(n))
    }

    /// Dispersive shift `ω_i(0) - ω_r`.
    pub fn chi(&self) -> f64 {
        self.samples()[0] - self.omega_r
    }

    /// Integer photon number of the smallest sample.
    pub fn argmin(&self) -> usize {
        let s = self.samples();
        (0..s.len()).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap_or(0)
    }

    /// Columns `i,n,omega_eff_rad_per_s,d_omega_dn`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,n,omega_eff_rad_per_s,d_omega_dn")?;
        write_rows(self, &mut w)
    }
}

fn write_rows<W: Write>(c: &EffResCurve, w: &mut W) -> Result<()> {
    let (xs, ys) = c.interp.nodes();
    for (n, y) in xs.iter().zip(ys) {
        writeln!(w, "{},{},{},{}", c.level, n, sig(*y), sig(c.interp.derivative(*n)))?;
    }
    Ok(())
}

/// Several curves in one table, same columns as [`EffResCurve::write_csv`].
pub fn write_curves_csv<W: Write>(curves: &[EffResCurve], mut w: W) -> Result<()> {
    writeln!(w, "i,n,omega_eff_rad_per_s,d_omega_dn")?;
    for c in curves {
        write_rows(c, &mut w)?;
    }
    Ok(())
}
