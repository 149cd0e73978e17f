//! Adaptive Dormand–Prince 5(4) integration of small fixed-size real systems.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError<const D: usize, E> {
    /// The step size fell below the resolvable minimum.
    StepUnderflow { t: f64, y: [f64; D] },
    /// The right-hand side kept failing even for the smallest step.
    Rhs(E),
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn error_norm<const D: usize>(err: &[f64; D], y0: &[f64; D], y1: &[f64; D], tol: Tolerances) -> f64 {
    let mut acc = 0.0;
    for k in 0..D {
        let sc = tol.atol + tol.rtol * y0[k].abs().max(y1[k].abs());
        acc += (err[k] / sc).powi(2);
    }
    (acc / D as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to exactly `t1`, calling `observe` at
/// the start and after every accepted step.
///
/// A failing right-hand side evaluation is handled like a rejected step; the
/// error is only returned once the step cannot shrink any further.
pub fn dopri5<const D: usize, Err, F, O>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: [f64; D],
    tol: Tolerances,
    mut observe: O,
) -> Result<([f64; D], StepStats), OdeError<D, Err>>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D], Err>,
    O: FnMut(f64, &[f64; D]),
{
    let span = t1 - t0;
    let mut stats = StepStats::default();
    let mut y = y0;
    let mut t = t0;
    observe(t, &y);
    if span <= 0.0 {
        return Ok((y, stats));
    }
    let h_min = 16.0 * f64::EPSILON * span.abs().max(t1.abs());

    let mut k1 = f(t, &y).map_err(OdeError::Rhs)?;
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, &y, &k1, span, tol, &mut stats);
    let mut last_err: Option<Err> = None;

    while t < t1 {
        let last_step = t + h >= t1;
        if last_step {
            h = t1 - t;
        }
        match try_step(&mut f, t, h, &y, &k1, &mut stats) {
            Ok((y_new, k7, err)) => {
                let en = error_norm(&err, &y, &y_new, tol);
                if en <= 1.0 {
                    t = if last_step { t1 } else { t + h };
                    y = y_new;
                    k1 = k7;
                    stats.accepted += 1;
                    observe(t, &y);
                    let factor = if en == 0.0 { MAX_FACTOR } else { SAFETY * en.powf(-0.2) };
                    h *= factor.clamp(MIN_FACTOR, MAX_FACTOR);
                    last_err = None;
                } else {
                    stats.rejected += 1;
                    h *= (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                }
            }
            Err(e) => {
                stats.rejected += 1;
                h *= 0.25;
                last_err = Some(e);
            }
        }
        if t < t1 && h < h_min {
            return Err(match last_err {
                Some(e) => OdeError::Rhs(e),
                None => OdeError::StepUnderflow { t, y },
            });
        }
    }
    Ok((y, stats))
}

type StepOut<const D: usize> = ([f64; D], [f64; D], [f64; D]);

fn try_step<const D: usize, Err, F>(
    f: &mut F,
    t: f64,
    h: f64,
    y: &[f64; D],
    k1: &[f64; D],
    stats: &mut StepStats,
) -> Result<StepOut<D>, Err>
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D], Err>,
{
    let mut k = [[0.0; D]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for d in 0..D {
                    ys[d] += h * a * kj[d];
                }
            }
        }
        stats.evaluations += 1;
        k[s] = f(t + C[s] * h, &ys)?;
        if s == 6 {
            // the seventh stage is evaluated at the fifth-order solution
            let mut err = [0.0; D];
            for d in 0..D {
                err[d] = h * (0..7).map(|j| E[j] * k[j][d]).sum::<f64>();
            }
            return Ok((ys, k[6], err));
        }
    }
    unreachable!()
}

fn initial_step<const D: usize, Err, F>(
    f: &mut F,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    span: f64,
    tol: Tolerances,
    stats: &mut StepStats,
) -> f64
where
    F: FnMut(f64, &[f64; D]) -> Result<[f64; D], Err>,
{
    let scaled = |v: &[f64; D]| {
        let s: f64 = (0..D)
            .map(|k| (v[k] / (tol.atol + tol.rtol * y[k].abs())).powi(2))
            .sum();
        (s / D as f64).sqrt()
    };
    let d0 = scaled(y);
    let d1 = scaled(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { (0.01 * d0 / d1).min(span) };
    let mut y1 = *y;
    for d in 0..D {
        y1[d] += h0 * k1[d];
    }
    stats.evaluations += 1;
    let Ok(k2) = f(t + h0, &y1) else {
        return h0;
    };
    let mut diff = [0.0; D];
    for d in 0..D {
        diff[d] = k2[d] - k1[d];
    }
    let d2 = scaled(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let (y, stats) = dopri5(
            |_, y: &[f64; 1]| Ok::<_, ()>([-2.0 * y[0]]),
            0.0,
            3.0,
            [1.0],
            Tolerances { rtol: 1e-10, atol: 1e-12 },
            |_, _| {},
        )
        .unwrap();
        assert!((y[0] - (-6.0f64).exp()).abs() < 1e-10);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn harmonic_oscillator_ends_exactly() {
        let mut last_t = 0.0;
        let (y, _) = dopri5(
            |_, y: &[f64; 2]| Ok::<_, ()>([y[1], -y[0]]),
            0.0,
            10.0,
            [1.0, 0.0],
            Tolerances::default(),
            |t, _| last_t = t,
        )
        .unwrap();
        assert_eq!(last_t, 10.0);
        assert!((y[0] - 10f64.cos()).abs() < 1e-6);
        assert!((y[1] + 10f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn persistent_rhs_failure_is_reported() {
        let r = dopri5(
            |t, y: &[f64; 1]| if t > 0.5 { Err("boom") } else { Ok([y[0]]) },
            0.0,
            1.0,
            [1.0],
            Tolerances::default(),
            |_, _| {},
        );
        assert!(matches!(r, Err(OdeError::Rhs("boom"))));
    }

    #[test]
    fn zero_span() {
        let (y, s) = dopri5(|_, _: &[f64; 1]| Ok::<_, ()>([1.0]), 1.0, 1.0, [3.0], Tolerances::default(), |_, _| {})
            .unwrap();
        assert_eq!(y, [3.0]);
        assert_eq!(s.accepted, 0);
    }
}
