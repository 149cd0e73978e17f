use std::sync::OnceLock;

use proptest::prelude::*;

use bistab_core::config::{FreqUnit, Frequency, RunConfig};
use bistab_core::effres::{effective_resonance, EffResCurve};
use bistab_core::fixed_points::{find_roots, Stability};
use bistab_core::params::{mhz, SystemParams};
use bistab_core::response::{amp_to_photon, photon_to_amp};
use bistab_core::scd::{alpha_dot, integrate, integrate_endpoint, DriveConfig};
use bistab_core::ode::Tolerances;
use bistab_core::spectrum::diagonalize_strip;

fn curves() -> &'static [EffResCurve] {
    static C: OnceLock<Vec<EffResCurve>> = OnceLock::new();
    C.get_or_init(|| {
        let s = diagonalize_strip(&SystemParams::paper()).unwrap();
        (0..3).map(|i| effective_resonance(&s, i).unwrap()).collect()
    })
}

// N in [1, 400] log-uniform, detuning in [-30, 10] MHz: the default map window
fn map_point() -> impl Strategy<Value = (usize, f64, f64)> {
    (0usize..3, 0.0..400f64.ln(), -30.0..10.0).prop_map(|(i, ln_n, det)| (i, ln_n.exp(), det))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectory_stays_inside_linear_radius((level, n, det) in map_point()) {
        let p = SystemParams::paper();
        let drive = DriveConfig::new(photon_to_amp(n, &p), p.omega_r + mhz(det));
        let traj = integrate(&curves()[level], &drive, &p).unwrap();
        let alpha0 = drive.alpha0(&p);
        let worst = traj.alphas.iter().map(|a| a.norm()).fold(0.0, f64::max);
        prop_assert!(worst <= alpha0 * (1.0 + 1e-6), "max |alpha| = {worst}, alpha0 = {alpha0}");
    }

    #[test]
    fn long_runs_settle_on_a_stable_root((level, n, det) in map_point()) {
        let p = SystemParams::paper();
        let c = &curves()[level];
        let kappa = p.damping();
        let drive = DriveConfig::new(photon_to_amp(n, &p), p.omega_r + mhz(det)).with_t0(5e-6);
        let end = integrate_endpoint(c, &drive, &p, Tolerances::default()).unwrap().alpha;
        let rate = alpha_dot(c, &drive, &p, end).unwrap().norm();
        prop_assert!(rate < 1e-4 * kappa * end.norm() + 1e-6 * kappa, "|dalpha/dt| = {rate}");
        let roots = find_roots(c, drive.amplitude, drive.omega_m, &p).unwrap();
        prop_assert!(roots.len() == 1 || roots.len() == 3);
        let near = roots
            .iter()
            .filter(|r| r.stability == Stability::Stable)
            .any(|r| (r.alpha() - end).norm() <= 1e-3 * drive.alpha0(&p));
        prop_assert!(near);
    }

    #[test]
    fn every_root_has_trace_minus_kappa((level, n, det) in map_point()) {
        let p = SystemParams::paper();
        let roots = find_roots(&curves()[level], photon_to_amp(n, &p), p.omega_r + mhz(det), &p).unwrap();
        for r in roots {
            prop_assert!(((r.jacobian_trace + p.damping()) / p.damping()).abs() < 1e-6);
        }
    }
}

fn unit() -> impl Strategy<Value = FreqUnit> {
    prop_oneof![Just(FreqUnit::Hz), Just(FreqUnit::KHz), Just(FreqUnit::MHz), Just(FreqUnit::GHz)]
}

proptest! {
    #[test]
    fn photon_conversion_inverts(n in 0.0..1e4f64) {
        let p = SystemParams::paper();
        let back = amp_to_photon(photon_to_amp(n, &p), &p);
        prop_assert!((back - n).abs() <= 1e-12 * n.max(1.0));
    }

    #[test]
    fn config_round_trips(
        omega_r in 1e-3..1e3f64,
        u in unit(),
        g in 0.0..1e3f64,
        levels in 2usize..40,
        sustain in 0usize..6,
        prominence in 0.0..0.99f64,
        dir in "[a-z][a-z0-9_/]{0,12}",
    ) {
        let mut c = RunConfig::paper();
        c.omega_r = Frequency::new(omega_r, u);
        c.g = Frequency::new(g, u);
        c.transmon_levels = levels;
        c.sustain_drives = sustain;
        c.peak_prominence = prominence;
        c.output_dir = dir;
        let again = RunConfig::parse(&c.emit()).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.emit(), c.emit());
    }
}
