//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights on XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// `(kronrod, |kronrod − gauss|, ∫|f|)` on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, f2) = (f(c - dx), f(c + dx));
        k += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Adaptive integral of `f` over `[a, b]` split into `cells` equal pieces.
/// See [`integrate_partition`].
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    cells: usize,
    rel_tol: f64,
    max_depth: u32,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let cells = cells.max(1);
    let width = (b - a) / cells as f64;
    let points: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { b } else { a + width * i as f64 })
        .collect();
    integrate_partition(f, &points, rel_tol, max_depth)
}

/// Adaptive integral of `f` over `[points[0], points[last]]`.
///
/// Starts from the pieces between consecutive `points` and bisects every
/// piece whose Gauss–Kronrod error exceeds its share of
/// `rel_tol · max(|∫f|, 1e-3 ∫|f|)`. Fails once a piece would need more
/// than `max_depth` bisections.
pub fn integrate_partition<F: Fn(f64) -> f64>(
    f: &F,
    points: &[f64],
    rel_tol: f64,
    max_depth: u32,
) -> Result<f64> {
    let mut scale = 0.0;
    let mut pieces: Vec<(f64, f64, f64, f64, u32)> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e, a) = gk15(f, w[0], w[1]);
            scale += a;
            (w[0], w[1], v, e, 0)
        })
        .collect();
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        let tol = rel_tol * total.abs().max(1e-3 * scale);
        if err <= tol {
            return Ok(total);
        }
        let mut next = Vec::with_capacity(pieces.len() * 2);
        let budget = tol / pieces.len() as f64;
        for (lo, hi, v, e, depth) in pieces {
            if e <= budget {
                next.push((lo, hi, v, e, depth));
                continue;
            }
            if depth >= max_depth {
                return Err(Error::Quadrature(format!(
                    "no convergence on [{lo}, {hi}] after {depth} bisections (error {e:e}, tolerance {tol:e})"
                )));
            }
            let mid = 0.5 * (lo + hi);
            let (v1, e1, _) = gk15(f, lo, mid);
            let (v2, e2, _) = gk15(f, mid, hi);
            next.push((lo, mid, v1, e1, depth + 1));
            next.push((mid, hi, v2, e2, depth + 1));
        }
        pieces = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(&|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, 1, 1e-12, 10).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integrand() {
        // ∫₀^π sin(50x) dx = (1 − cos 50π)/50 = 0
        let v = integrate(
            &|x: f64| (50.0 * x).sin(),
            0.0,
            std::f64::consts::PI,
            8,
            1e-10,
            30,
        )
        .unwrap();
        assert!(v.abs() < 1e-9);
        let w = integrate(&|x: f64| (x * x).cos(), 0.0, 10.0, 4, 1e-10, 30).unwrap();
        // Fresnel: ∫₀^10 cos x² dx
        assert!((w - 0.601_125_184_813_445_9).abs() < 1e-8, "{w}");
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(
            &|x: f64| {
                if x < 0.3 {
                    0.0
                } else {
                    1.0 / (x - 0.3).sqrt().max(1e-300)
                }
            },
            0.0,
            1.0,
            1,
            1e-14,
            3,
        );
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
