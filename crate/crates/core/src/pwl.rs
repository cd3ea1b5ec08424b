//! Continuous piecewise-linear functions with exact antiderivatives and
//! closed-form Fourier coefficients.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Linear interpolation through `(breakpoints[i], values[i])`, zero outside
/// `[breakpoints[0], breakpoints[last]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinearFn {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::precondition(
                "breakpoints and values differ in length",
            ));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::precondition("non-finite breakpoint or value"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::precondition(
                "breakpoints must be strictly increasing",
            ));
        }
        Ok(PiecewiseLinearFn {
            breakpoints,
            values,
        })
    }

    pub fn zero() -> Self {
        PiecewiseLinearFn {
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// `[first, last]` breakpoint, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= x);
        if i == 0 {
            return 0.0;
        }
        let i = i - 1;
        if i + 1 == self.breakpoints.len() {
            return if x == self.breakpoints[i] {
                self.values[i]
            } else {
                0.0
            };
        }
        let (x0, x1) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }

    /// `(x0, x1, y0, y1)` for every linear piece.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| (x[0], x[1], y[0], y[1]))
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn integral(&self) -> f64 {
        self.segments()
            .map(|(x0, x1, y0, y1)| 0.5 * (y0 + y1) * (x1 - x0))
            .sum()
    }

    /// `sup_ξ |∫_{-∞}^ξ f|`, exact: the antiderivative is piecewise quadratic,
    /// so only breakpoints and sign changes of `f` are candidates.
    pub fn running_integral_sup(&self) -> f64 {
        let mut acc = 0.0f64;
        let mut sup = 0.0f64;
        for (x0, x1, y0, y1) in self.segments() {
            let h = x1 - x0;
            if (y0 > 0.0 && y1 < 0.0) || (y0 < 0.0 && y1 > 0.0) {
                let s = y0 / (y0 - y1);
                let peak = acc + 0.5 * y0 * s * h;
                sup = sup.max(peak.abs());
            }
            acc += 0.5 * (y0 + y1) * h;
            sup = sup.max(acc.abs());
        }
        sup
    }

    /// `∫_{-∞}^x f`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (x0, x1, y0, y1) in self.segments() {
            if x <= x0 {
                break;
            }
            if x >= x1 {
                acc += 0.5 * (y0 + y1) * (x1 - x0);
            } else {
                let s = (x - x0) / (x1 - x0);
                acc += (x - x0) * (y0 + 0.5 * (y1 - y0) * s);
                break;
            }
        }
        acc
    }

    /// Fourier coefficient `(1/2π) ∫₀^{2π} f(t) e^{−int} dt` from the exact
    /// per-segment integrals.
    pub fn fourier_coefficient(&self, n: i64) -> Complex64 {
        if n == 0 {
            return Complex64::new(self.integral() / TAU, 0.0);
        }
        let nf = n as f64;
        let i = Complex64::i();
        let e = |t: f64| Complex64::from_polar(1.0, -nf * t);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x0, x1, y0, y1) in self.segments() {
            let slope = (y1 - y0) / (x1 - x0);
            let (e0, e1) = (e(x0), e(x1));
            // ∫ y e^{−int} = [y e^{−int} · i/n] + slope · [e^{−int} / n²]
            acc += (e1 * y1 - e0 * y0) * (i / nf) + (e1 - e0) * (slope / (nf * nf));
        }
        acc / TAU
    }

    /// Concatenates functions with ordered, pairwise disjoint supports.
    pub fn concat_disjoint(parts: &[PiecewiseLinearFn]) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for p in parts.iter().filter(|p| !p.is_empty()) {
            if let (Some(&last), Some(&first)) = (xs.last(), p.breakpoints.first()) {
                if first <= last {
                    return Err(Error::precondition("supports overlap or are out of order"));
                }
            }
            xs.extend_from_slice(&p.breakpoints);
            ys.extend_from_slice(&p.values);
        }
        PiecewiseLinearFn::new(xs, ys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn triangle(w: f64, h: f64) -> PiecewiseLinearFn {
        PiecewiseLinearFn::new(vec![0.0, w / 2.0, w], vec![0.0, h, 0.0]).unwrap()
    }

    #[test]
    fn eval_reproduces_breakpoints_and_vanishes_outside() {
        let f = PiecewiseLinearFn::new(vec![1.0, 2.0, 4.0], vec![3.0, -1.0, 5.0]).unwrap();
        assert_eq!(f.eval(1.0), 3.0);
        assert_eq!(f.eval(2.0), -1.0);
        assert_eq!(f.eval(4.0), 5.0);
        assert_eq!(f.eval(1.5), 1.0);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(4.5), 0.0);
    }

    #[test]
    fn rejects_unsorted() {
        assert!(PiecewiseLinearFn::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(PiecewiseLinearFn::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn running_integral_examples() {
        assert_eq!(PiecewiseLinearFn::zero().running_integral_sup(), 0.0);
        let t = triangle(0.5, -3.0);
        assert!((t.running_integral_sup() - 0.75).abs() < 1e-15);
        // + then − with equal area: peak in the middle, zero at the end
        let f = PiecewiseLinearFn::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, -1.0]).unwrap();
        assert!((f.running_integral_sup() - 0.5).abs() < 1e-15);
        assert!(f.antiderivative(2.0).abs() < 1e-15);
    }

    #[test]
    fn interior_extremum_is_found() {
        let f = PiecewiseLinearFn::new(vec![0.0, 1.0], vec![2.0, -2.0]).unwrap();
        // ∫₀^ξ (2 − 4t) dt peaks at ξ = 1/2 with value 1/2
        assert!((f.running_integral_sup() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_wave_coefficients() {
        // π − |t − π| = π/2 − (4/π) Σ_{odd n} cos(nt)/n²
        let g = PiecewiseLinearFn::new(vec![0.0, PI, 2.0 * PI], vec![0.0, PI, 0.0]).unwrap();
        assert!((g.fourier_coefficient(0).re - PI / 2.0).abs() < 1e-14);
        for n in 1..40i64 {
            let want = if n % 2 == 1 {
                -2.0 / (PI * (n * n) as f64)
            } else {
                0.0
            };
            let got = g.fourier_coefficient(n);
            assert!(
                (got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12,
                "n={n}"
            );
        }
    }

    #[test]
    fn concat_requires_disjoint_order() {
        let a = triangle(1.0, 1.0);
        let b = PiecewiseLinearFn::new(vec![2.0, 3.0], vec![0.0, 0.0]).unwrap();
        let joined =
            PiecewiseLinearFn::concat_disjoint(&[a.clone(), PiecewiseLinearFn::zero(), b.clone()])
                .unwrap();
        assert_eq!(joined.breakpoints().len(), 5);
        assert!(PiecewiseLinearFn::concat_disjoint(&[b, a]).is_err());
    }
}
