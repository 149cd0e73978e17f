//! Dressed spectrum of the generalized Jaynes–Cummings Hamiltonian.
//!
//! The coupling `g (a†b + a b†)` conserves the total excitation number
//! `N = n + i`, so the Hamiltonian splits into tridiagonal blocks of
//! dimension `min(L, N + 1)`. Each block is diagonalized on its own and every
//! eigenvector is given a bare label `(i, N - i)`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig;
use crate::params::{Labeling, SystemParams};
use crate::tridiag::eigh_tridiagonal;

/// Overlap below which a label assignment is reported as ambiguous.
pub const LABEL_WARNING_OVERLAP: f64 = 0.5;

/// Symmetric tridiagonal block of fixed excitation number.
///
/// Basis element `i` is `|i, n_tot - i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub n_tot: usize,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut m = vec![vec![0.0; d]; d];
        for i in 0..d {
            m[i][i] = self.diag[i];
            if i + 1 < d {
                m[i][i + 1] = self.off[i];
                m[i + 1][i] = self.off[i];
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }
}

/// Builds the excitation block `n_tot`.
pub fn build_block(params: &SystemParams, n_tot: i64) -> Result<Block> {
    if n_tot < 0 {
        return Err(Error::Input(format!("excitation number must be >= 0, got {n_tot}")));
    }
    let n_tot = n_tot as usize;
    let d = params.transmon_levels.min(n_tot + 1);
    let diag = (0..d).map(|i| params.bare_energy(i, n_tot - i)).collect();
    let off = (0..d.saturating_sub(1))
        .map(|i| params.g * (((i + 1) * (n_tot - i)) as f64).sqrt())
        .collect();
    Ok(Block { n_tot, diag, off })
}

/// Ambiguous label: the assigned dressed state has small weight on its bare state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelWarning {
    pub level: usize,
    pub photons: usize,
    pub overlap: f64,
}

/// Table of labeled dressed energies `E[i][n]` (rad/s) for `i < L`, `n <= n_max`.
#[derive(Debug, Clone)]
pub struct DressedSpectrum {
    params: SystemParams,
    energies: Vec<f64>,
    overlaps: Vec<f64>,
    warnings: Vec<LabelWarning>,
}

struct BlockLabels {
    n_tot: usize,
    // (bare level, energy, overlap)
    entries: Vec<(usize, f64, f64)>,
}

fn label_block(params: &SystemParams, n_tot: usize) -> Result<BlockLabels> {
    let block = build_block(params, n_tot as i64)?;
    let d = block.dim();
    let eig = eigh_tridiagonal(&block.diag, &block.off).ok_or(Error::Eigen { block: n_tot })?;

    let assignment: Vec<(usize, usize)> = match params.labeling {
        Labeling::EnergyRank => {
            let mut bare: Vec<usize> = (0..d).collect();
            bare.sort_by(|&a, &b| block.diag[a].total_cmp(&block.diag[b]).then(a.cmp(&b)));
            bare.into_iter().enumerate().map(|(rank, i)| (i, rank)).collect()
        }
        Labeling::MaxOverlap => {
            let mut cand = Vec::with_capacity(d * d);
            for i in 0..d {
                for j in 0..d {
                    cand.push((eig.component(i, j).powi(2), i, j));
                }
            }
            cand.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
            let mut bare_used = vec![false; d];
            let mut dressed_used = vec![false; d];
            let mut out = Vec::with_capacity(d);
            for (_, i, j) in cand {
                if !bare_used[i] && !dressed_used[j] {
                    bare_used[i] = true;
                    dressed_used[j] = true;
                    out.push((i, j));
                }
            }
            out
        }
    };

    let entries = assignment
        .into_iter()
        .map(|(i, j)| (i, eig.values[j], eig.component(i, j).powi(2)))
        .collect();
    Ok(BlockLabels { n_tot, entries })
}

/// Diagonalizes every block needed for `E[i][n]`, `i < L`, `n <= n_max`.
pub fn diagonalize_strip(params: &SystemParams) -> Result<DressedSpectrum> {
    params.validate()?;
    let levels = params.transmon_levels;
    let width = params.n_max + 1;
    let last_block = params.n_max + levels - 1;

    #[cfg(feature = "parallel")]
    let blocks: Vec<Result<BlockLabels>> = {
        use rayon::prelude::*;
        (0..=last_block).into_par_iter().map(|n| label_block(params, n)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let blocks: Vec<Result<BlockLabels>> =
        (0..=last_block).map(|n| label_block(params, n)).collect();

    let mut energies = vec![f64::NAN; levels * width];
    let mut overlaps = vec![f64::NAN; levels * width];
    let mut warnings = Vec::new();
    for block in blocks {
        let block = block?;
        for (i, e, ov) in block.entries {
            let n = block.n_tot - i;
            if n > params.n_max {
                continue;
            }
            energies[i * width + n] = e;
            overlaps[i * width + n] = ov;
            if ov < LABEL_WARNING_OVERLAP {
                warnings.push(LabelWarning { level: i, photons: n, overlap: ov });
            }
        }
    }
    Ok(DressedSpectrum { params: *params, energies, overlaps, warnings })
}

impl DressedSpectrum {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn levels(&self) -> usize {
        self.params.transmon_levels
    }

    pub fn n_max(&self) -> usize {
        self.params.n_max
    }

    fn check(&self, i: usize, n: usize) -> Result<usize> {
        if i >= self.levels() || n > self.n_max() {
            return Err(Error::Input(format!(
                "dressed state ({i}, {n}) outside table (levels {}, n_max {})",
                self.levels(),
                self.n_max()
            )));
        }
        Ok(i * (self.n_max() + 1) + n)
    }

    /// `E_{i,n}/ħ` in rad/s.
    pub fn eigenenergy(&self, i: usize, n: usize) -> Result<f64> {
        self.check(i, n).map(|k| self.energies[k])
    }

    /// `|<i, n | dressed i, n>|²`.
    pub fn overlap(&self, i: usize, n: usize) -> Result<f64> {
        self.check(i, n).map(|k| self.overlaps[k])
    }

    /// Labels whose winning overlap fell below [`LABEL_WARNING_OVERLAP`].
    pub fn warnings(&self) -> &[LabelWarning] {
        &self.warnings
    }

    /// Columns `i,n,energy_rad_per_s,overlap`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,n,energy_rad_per_s,overlap")?;
        for i in 0..self.levels() {
            for n in 0..=self.n_max() {
                let k = i * (self.n_max() + 1) + n;
                writeln!(w, "{i},{n},{},{}", sig(self.energies[k]), sig(self.overlaps[k]))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{mhz, EtaConvention};

    fn small(levels: usize, n_max: usize) -> SystemParams {
        SystemParams::paper().with_truncation(levels, n_max)
    }

    /// Two-level Jaynes–Cummings eigenvalues of block `n_tot >= 1`.
    fn jc_pair(p: &SystemParams, n_tot: usize) -> (f64, f64) {
        let delta = p.detuning();
        let base = n_tot as f64 * p.omega_r + 0.5 * delta;
        let rad = (0.25 * delta * delta + p.g * p.g * n_tot as f64).sqrt();
        (base - rad, base + rad)
    }

    #[test]
    fn vacuum_block() {
        let b = build_block(&SystemParams::paper(), 0).unwrap();
        assert_eq!(b.to_dense(), vec![vec![0.0]]);
    }

    #[test]
    fn single_excitation_block() {
        let p = SystemParams::paper();
        let b = build_block(&p, 1).unwrap();
        assert_eq!(b.to_dense(), vec![vec![p.omega_r, p.g], vec![p.g, p.omega_q]]);
    }

    #[test]
    fn negative_block_rejected() {
        assert!(matches!(build_block(&SystemParams::paper(), -1), Err(Error::Input(_))));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn block_is_symmetric_and_tridiagonal() {
        let p = SystemParams::paper();
        for n in [3, 17, 90] {
            let m = build_block(&p, n).unwrap().to_dense();
            let d = m.len();
            assert_eq!(d, p.transmon_levels.min(n as usize + 1));
            for r in 0..d {
                for c in 0..d {
                    assert_eq!(m[r][c], m[c][r]);
                    if r.abs_diff(c) > 1 {
                        assert_eq!(m[r][c], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn block_trace_conserved() {
        let p = small(12, 60);
        for n in 0..70 {
            let b = build_block(&p, n).unwrap();
            let eig = eigh_tridiagonal(&b.diag, &b.off).unwrap();
            let sum: f64 = eig.values.iter().sum();
            assert!((sum - b.trace()).abs() <= 1e-12 * b.trace().abs().max(1.0));
        }
    }

    #[test]
    fn two_level_matches_closed_form() {
        let p = small(2, 200);
        let s = diagonalize_strip(&p).unwrap();
        assert_eq!(s.eigenenergy(0, 0).unwrap(), 0.0);
        for n in 0..200 {
            // |0, n> lives in block n, |1, n> in block n + 1
            if n >= 1 {
                let (lo, _) = jc_pair(&p, n);
                let e = s.eigenenergy(0, n).unwrap();
                assert!(((e - lo) / lo).abs() < 1e-9, "n={n}");
            }
            let (_, hi) = jc_pair(&p, n + 1);
            let e = s.eigenenergy(1, n).unwrap();
            assert!(((e - hi) / hi).abs() < 1e-9);
        }
    }

    #[test]
    fn dispersive_shift_of_ground_state_two_level() {
        let p = small(2, 4);
        let s = diagonalize_strip(&p).unwrap();
        let chi = s.eigenenergy(0, 1).unwrap() - s.eigenenergy(0, 0).unwrap() - p.omega_r;
        let delta = p.detuning();
        let oracle = 0.5 * delta - (0.25 * delta * delta + p.g * p.g).sqrt();
        assert!((chi - oracle).abs() < 1e-6 * oracle.abs());
        assert!((crate::params::to_mhz(chi) + 4.194).abs() < 1e-3);
    }

    #[test]
    fn uncoupled_spectrum_is_bare() {
        for conv in [EtaConvention::AsPrinted, EtaConvention::Halved] {
            let p = small(8, 30).with_coupling(0.0).with_eta_convention(conv);
            let s = diagonalize_strip(&p).unwrap();
            for i in 0..8 {
                for n in 0..=30 {
                    assert_eq!(s.eigenenergy(i, n).unwrap(), p.bare_energy(i, n));
                    assert_eq!(s.overlap(i, n).unwrap(), 1.0);
                }
            }
            assert!(s.warnings().is_empty());
            let c = conv.factor();
            let expect = 5.0 * p.omega_r + 2.0 * p.omega_q - 2.0 * c * p.eta;
            assert_eq!(s.eigenenergy(2, 5).unwrap(), expect);
        }
    }

    #[test]
    fn ground_dispersive_shift_negative() {
        let s = diagonalize_strip(&small(12, 8)).unwrap();
        let p = s.params();
        let chi = s.eigenenergy(0, 1).unwrap() - s.eigenenergy(0, 0).unwrap() - p.omega_r;
        assert!(chi < 0.0);
    }

    #[test]
    fn labels_are_bijective_per_block() {
        for labeling in [Labeling::EnergyRank, Labeling::MaxOverlap] {
            let p = small(10, 120).with_labeling(labeling);
            let s = diagonalize_strip(&p).unwrap();
            for n_tot in 0..=120 {
                let d = p.transmon_levels.min(n_tot + 1);
                let b = build_block(&p, n_tot as i64).unwrap();
                let mut eig = eigh_tridiagonal(&b.diag, &b.off).unwrap().values;
                let mut got: Vec<f64> =
                    (0..d).map(|i| s.eigenenergy(i, n_tot - i).unwrap()).collect();
                eig.sort_by(f64::total_cmp);
                got.sort_by(f64::total_cmp);
                assert_eq!(eig, got, "block {n_tot}");
            }
            for i in 0..10 {
                for n in 0..=120 {
                    let ov = s.overlap(i, n).unwrap();
                    assert!(ov > 0.0 && ov <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn weak_coupling_converges_monotonically() {
        let base = small(6, 12);
        let bare = diagonalize_strip(&base.with_coupling(0.0)).unwrap();
        let mut prev: Option<Vec<f64>> = None;
        // starts below the near-resonant 6-7 transition so the shift is perturbative
        for k in 4..12 {
            let g = mhz(55.0) * 0.5f64.powi(k);
            let s = diagonalize_strip(&base.with_coupling(g)).unwrap();
            let dev: Vec<f64> = (0..6)
                .flat_map(|i| (0..=12).map(move |n| (i, n)))
                .map(|(i, n)| (s.eigenenergy(i, n).unwrap() - bare.eigenenergy(i, n).unwrap()).abs())
                .collect();
            if let Some(prev) = &prev {
                for (a, b) in dev.iter().zip(prev) {
                    assert!(a <= b, "deviation grew as g shrank: {a} > {b} at g = {g}");
                }
            }
            prev = Some(dev);
        }
    }

    #[test]
    fn out_of_range_lookup() {
        let s = diagonalize_strip(&small(3, 5)).unwrap();
        assert!(s.eigenenergy(3, 0).is_err());
        assert!(s.eigenenergy(0, 6).is_err());
    }

    #[test]
    fn csv_has_all_rows() {
        let s = diagonalize_strip(&small(2, 3)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 4);
        assert!(text.starts_with("i,n,energy_rad_per_s,overlap\n0,0,"));
    }
}
