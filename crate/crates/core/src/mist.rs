//! Ladder crossings between dressed states of neighbouring excitation strips.
//!
//! `ω̄_k(N) = E_{k,N-k}/ħ - N ω_r` measures how far the dressed level `k`
//! has been pushed away from the bare photon ladder. A drive photon can
//! promote `|k, N-k+1>` into `|j, N-j>` where the two curves meet.

use std::io::Write;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::spectrum::DressedSpectrum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanCurve {
    pub level: usize,
    /// `false`: `|k, N-k>`; `true`: `|k, N-k+1>`.
    pub extra_photon: bool,
    /// `(N, ω̄)` pairs, ascending in `N`, rad/s.
    pub samples: Vec<(usize, f64)>,
    omega_r: f64,
}

impl FanCurve {
    pub fn at(&self, n: usize) -> Option<f64> {
        let first = self.samples.first()?.0;
        self.samples.get(n.checked_sub(first)?).map(|s| s.1)
    }

    /// Samples divided by the bare cavity frequency.
    pub fn over_omega_r(&self) -> Vec<(usize, f64)> {
        self.samples.iter().map(|&(n, w)| (n, w / self.omega_r)).collect()
    }
}

pub fn fan_curve(spec: &DressedSpectrum, k: usize, extra_photon: bool) -> Result<FanCurve> {
    if k >= spec.levels() {
        return Err(Error::Input(format!(
            "level {k} out of range (transmon_levels = {})",
            spec.levels()
        )));
    }
    let omega_r = spec.params().omega_r;
    let extra = usize::from(extra_photon);
    let first = k.saturating_sub(extra);
    let last = spec.n_max() - 1;
    let samples = (first..=last)
        .map(|n| {
            let photons = n + extra - k;
            spec.eigenenergy(k, photons).map(|e| (n, e - omega_r * n as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FanCurve { level: k, extra_photon, samples, omega_r })
}

/// Half-width of the photon-number uncertainty attached to a crossing.
pub fn error_bound(n_star: f64) -> f64 {
    2.0 * n_star.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingResult {
    pub initial_level: usize,
    pub target_level: usize,
    pub n_star: f64,
    pub bracket: (usize, usize),
    pub error_bound: f64,
}

/// Locates every sign change of `ω̄_k^{+1}(N) - ω̄_j(N)` for integer `N` in `n_range`.
pub fn find_crossings(
    spec: &DressedSpectrum,
    k_initial: usize,
    j_target: usize,
    n_range: RangeInclusive<usize>,
) -> Result<Vec<CrossingResult>> {
    if n_range.is_empty() {
        return Err(Error::Input("empty photon range".into()));
    }
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if hi > spec.n_max() - 1 {
        return Err(Error::Input(format!(
            "photon range end {hi} exceeds n_max - 1 = {}",
            spec.n_max() - 1
        )));
    }
    let initial = fan_curve(spec, k_initial, true)?;
    let target = fan_curve(spec, j_target, false)?;
    let diff: Vec<(usize, f64)> = (lo..=hi)
        .filter_map(|n| Some((n, initial.at(n)? - target.at(n)?)))
        .collect();

    let mut out = Vec::new();
    for w in diff.windows(2) {
        let ((n0, d0), (n1, d1)) = (w[0], w[1]);
        if d0 == 0.0 {
            out.push(crossing(k_initial, j_target, n0 as f64, (n0, n0)));
        } else if d0 * d1 < 0.0 {
            let n_star = n0 as f64 + d0 / (d0 - d1);
            out.push(crossing(k_initial, j_target, n_star, (n0, n1)));
        }
    }
    if let Some(&(n, d)) = diff.last() {
        if d == 0.0 {
            out.push(crossing(k_initial, j_target, n as f64, (n, n)));
        }
    }
    out.sort_by(|a, b| a.n_star.total_cmp(&b.n_star));
    Ok(out)
}

fn crossing(k: usize, j: usize, n_star: f64, bracket: (usize, usize)) -> CrossingResult {
    CrossingResult {
        initial_level: k,
        target_level: j,
        n_star,
        bracket,
        error_bound: error_bound(n_star),
    }
}

/// Columns `N`, then `k<k>` and `k<k>_plus1` (both `ω̄/ω_r`) for each level.
pub fn write_fan_csv<W: Write>(spec: &DressedSpectrum, levels: &[usize], mut w: W) -> Result<()> {
    let mut curves = Vec::with_capacity(2 * levels.len());
    let mut header = String::from("N");
    for &k in levels {
        curves.push(fan_curve(spec, k, false)?);
        curves.push(fan_curve(spec, k, true)?);
        header.push_str(&format!(",k{k},k{k}_plus1"));
    }
    writeln!(w, "{header}")?;
    let omega_r = spec.params().omega_r;
    for n in 0..spec.n_max() {
        let mut line = n.to_string();
        for c in &curves {
            line.push(',');
            if let Some(v) = c.at(n) {
                line.push_str(&sig(v / omega_r));
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Columns `k,j,n_star,n_below,n_above,error_bound`.
pub fn write_crossings_csv<W: Write>(crossings: &[CrossingResult], mut w: W) -> Result<()> {
    writeln!(w, "k,j,n_star,n_below,n_above,error_bound")?;
    for c in crossings {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            c.initial_level,
            c.target_level,
            sig(c.n_star),
            c.bracket.0,
            c.bracket.1,
            sig(c.error_bound)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::spectrum::diagonalize_strip;

    fn uncoupled() -> DressedSpectrum {
        diagonalize_strip(&SystemParams::paper().with_truncation(8, 60).with_coupling(0.0)).unwrap()
    }

    #[test]
    fn uncoupled_curves_are_flat() {
        let s = uncoupled();
        let p = *s.params();
        let c = fan_curve(&s, 2, false).unwrap();
        let expect = 2.0 * (p.omega_q - p.omega_r) - 2.0 * p.eta_convention.factor() * p.eta;
        for &(_, w) in &c.samples {
            assert!((w - expect).abs() < 1e-9 * p.omega_r);
        }
        let c = fan_curve(&s, 0, true).unwrap();
        assert_eq!(c.samples[0].0, 0);
        for &(_, w) in &c.samples {
            assert!((w - p.omega_r).abs() < 1e-9 * p.omega_r);
        }
    }

    #[test]
    fn curve_domain() {
        let s = uncoupled();
        let c = fan_curve(&s, 3, false).unwrap();
        assert_eq!(c.samples.first().unwrap().0, 3);
        assert_eq!(c.samples.last().unwrap().0, 59);
        let c = fan_curve(&s, 3, true).unwrap();
        assert_eq!(c.samples.first().unwrap().0, 2);
        assert!(fan_curve(&s, 8, false).is_err());
    }

    #[test]
    fn uncoupled_has_no_crossings() {
        let s = uncoupled();
        for k in 0..3 {
            for j in 3..8 {
                assert!(find_crossings(&s, k, j, 0..=59).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn empty_range_is_error() {
        let s = uncoupled();
        #[allow(clippy::reversed_empty_ranges)]
        let r = find_crossings(&s, 0, 7, 10..=5);
        assert!(matches!(r, Err(Error::Input(_))));
        assert!(find_crossings(&s, 0, 7, 0..=60).is_err());
    }

    #[test]
    fn error_bound_values() {
        assert!((error_bound(66.0) - 16.2).abs() < 0.05);
        assert_eq!(error_bound(0.0), 0.0);
    }

    #[test]
    fn paper_crossing_brackets_are_sign_changes() {
        let s = diagonalize_strip(&SystemParams::paper().with_truncation(24, 200)).unwrap();
        let a = fan_curve(&s, 0, true).unwrap();
        let b = fan_curve(&s, 7, false).unwrap();
        for c in find_crossings(&s, 0, 7, 0..=199).unwrap() {
            let (lo, hi) = c.bracket;
            let d0 = a.at(lo).unwrap() - b.at(lo).unwrap();
            let d1 = a.at(hi).unwrap() - b.at(hi).unwrap();
            assert!(d0 * d1 <= 0.0);
            assert!(c.n_star >= lo as f64 && c.n_star <= hi as f64);
        }
    }
}
