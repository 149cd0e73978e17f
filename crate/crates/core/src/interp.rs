//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes).
//!
//! Between two nodes the interpolant never leaves the interval spanned by
//! the node values, so no extrema are created that the data does not have.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
    // x == 0, 1, 2, ...: segment lookup by truncation
    unit_grid: bool,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Input("pchip needs at least two (x, y) pairs of equal length".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input("pchip abscissae must be strictly increasing".into()));
        }
        let slopes = slopes(&x, &y);
        let unit_grid = x.iter().enumerate().all(|(k, &v)| v == k as f64);
        Ok(Pchip { x, y, slopes, unit_grid })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    fn segment(&self, t: f64) -> usize {
        // index k with x[k] <= t < x[k+1]; last node maps to the last segment
        let last = self.x.len() - 2;
        if self.unit_grid {
            return if t <= 0.0 { 0 } else { (t as usize).min(last) };
        }
        let k = self.x.partition_point(|&v| v <= t);
        k.saturating_sub(1).min(last)
    }

    /// Value at `t`; callers must keep `t` inside [`Pchip::domain`].
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        self.y[k] * h00 + h * self.slopes[k] * h10 + self.y[k + 1] * h01 + h * self.slopes[k + 1] * h11
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        (self.y[k] * d00 + self.y[k + 1] * d01) / h + self.slopes[k] * d10 + self.slopes[k + 1] * d11
    }
}

fn slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }

    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            d[k] = 0.0;
        } else {
            // weighted harmonic mean
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Three-point end slope, clipped to keep the end segment monotone.
fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_at_nodes() {
        let x: Vec<f64> = (0..6).map(f64::from).collect();
        let y = vec![1.0, 3.0, 2.0, 2.0, 7.0, -1.0];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(p.eval(*a), *b);
        }
    }

    #[test]
    fn reproduces_lines() {
        let x: Vec<f64> = vec![0.0, 0.5, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let p = Pchip::new(x, y).unwrap();
        for t in [0.1, 0.7, 1.9, 2.5, 3.0] {
            assert!((p.eval(t) - (2.0 * t - 1.0)).abs() < 1e-14);
            assert!((p.derivative(t) - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn flat_data_flat_interpolant() {
        let p = Pchip::new(vec![0.0, 1.0, 2.0, 3.0], vec![5.0; 4]).unwrap();
        assert_eq!(p.eval(1.37), 5.0);
        assert_eq!(p.derivative(2.2), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Pchip::new(vec![0.0], vec![1.0]).is_err());
        assert!(Pchip::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn stays_within_neighbours(y in prop::collection::vec(-100.0f64..100.0, 3..30), s in 0.0f64..1.0) {
            let x: Vec<f64> = (0..y.len()).map(|v| v as f64).collect();
            let p = Pchip::new(x, y.clone()).unwrap();
            for k in 0..y.len() - 1 {
                let v = p.eval(k as f64 + s);
                let (lo, hi) = (y[k].min(y[k + 1]), y[k].max(y[k + 1]));
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }

        #[test]
        fn derivative_matches_finite_difference(y in prop::collection::vec(-10.0f64..10.0, 4..12), s in 0.05f64..0.95) {
            let x: Vec<f64> = (0..y.len()).map(|v| v as f64).collect();
            let p = Pchip::new(x, y.clone()).unwrap();
            let t = 1.0 + s;
            let h = 1e-6;
            let fd = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
            prop_assert!((fd - p.derivative(t)).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }
}
