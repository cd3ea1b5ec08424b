//! Menshov corrector: the layout `q = rν`, `δ = (d−c)/(qν)`, nodes
//! `c_s = c + δνs`, removed pieces `[a_s, c_s]` with `a_s = c_s − δ`, and the
//! piecewise-linear `ψ` that equals `γ` on
//! `E = [a′, b′] ∖ ⋃_{s=2r+1}^{q−2r} [a_s, c_s]`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::equidistribution::MSetSpec;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::pwl::PiecewiseLinearFn;
use crate::quadrature::integrate_partition;
use crate::TWO_PI;

/// `ν` must exceed 8.
pub const MIN_NU: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectorParams {
    pub c: f64,
    pub d: f64,
    pub gamma: f64,
    pub eps: f64,
    pub nu: u32,
    pub r: u64,
}

fn check_common(c: f64, d: f64, gamma: f64, eps: f64, nu: u32) -> Result<()> {
    if nu < MIN_NU {
        return Err(Error::precondition(format!("nu must exceed 8 (got {nu})")));
    }
    if !(0.0 <= c && c < d && d <= TWO_PI) {
        return Err(Error::precondition(format!(
            "[{c}, {d}] is not a proper subinterval of [0, 2π]"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) || !gamma.is_finite() {
        return Err(Error::precondition("eps must be positive and gamma finite"));
    }
    Ok(())
}

/// `4|γ|(d−c)/q < ε`.
fn admissible(c: f64, d: f64, gamma: f64, eps: f64, q: f64) -> bool {
    4.0 * gamma.abs() * (d - c) / q < eps
}

impl CorrectorParams {
    pub fn new(c: f64, d: f64, gamma: f64, eps: f64, nu: u32, r: u64) -> Result<Self> {
        let params = CorrectorParams {
            c,
            d,
            gamma,
            eps,
            nu,
            r,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.c, self.d, self.gamma, self.eps, self.nu)?;
        if self.r == 0 {
            return Err(Error::precondition("r must be positive"));
        }
        if !admissible(self.c, self.d, self.gamma, self.eps, self.q() as f64) {
            return Err(Error::precondition(format!(
                "4|γ|(d−c)/q = {} is not below eps = {}",
                4.0 * self.gamma.abs() * (self.d - self.c) / self.q() as f64,
                self.eps
            )));
        }
        Ok(())
    }

    pub fn q(&self) -> u64 {
        self.r * self.nu as u64
    }
}

/// Smallest `r` with `4|γ|(d−c)/(rν) < ε`; `1` when `γ = 0`.
pub fn choose_r(c: f64, d: f64, gamma: f64, eps: f64, nu: u32) -> Result<u64> {
    check_common(c, d, gamma, eps, nu)?;
    if gamma == 0.0 {
        return Ok(1);
    }
    let nuf = nu as f64;
    let guess = 4.0 * gamma.abs() * (d - c) / (nuf * eps);
    if guess > 1e15 {
        return Err(Error::precondition(format!(
            "eps = {eps} needs r ≈ {guess:e}"
        )));
    }
    let ok = |r: u64| admissible(c, d, gamma, eps, r as f64 * nuf);
    let mut r = (guess.floor() as u64).max(1);
    while !ok(r) {
        r += 1;
    }
    while r > 1 && ok(r - 1) {
        r -= 1;
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectorLayout {
    pub c: f64,
    pub d: f64,
    pub nu: u32,
    pub r: u64,
    pub q: u64,
    pub delta: f64,
    /// `c_0, …, c_q`, with `c_0 = c` and `c_q = d` exactly.
    pub nodes: Vec<f64>,
    pub a_prime: f64,
    pub b_prime: f64,
    /// `[a_s, c_s]` for `s = 2r+1 ..= q−2r`.
    pub removed: Vec<Interval>,
    /// Closed pieces of `E`: `[c_{s−1}, a_s]` for each removed `s`, then the
    /// point `[b′, b′]`.
    pub e: Vec<Interval>,
}

impl CorrectorLayout {
    pub fn window(&self) -> Interval {
        Interval {
            lo: self.a_prime,
            hi: self.b_prime,
        }
    }

    pub fn e_lebesgue(&self) -> f64 {
        self.e.iter().map(Interval::len).sum()
    }

    /// `[a′, b′] ∖ E` as an M-set of `[a′, b′]`: `(ν−4)r` blocks, each
    /// losing its last `1/ν`.
    pub fn removed_mset(&self) -> MSetSpec {
        let nuf = self.nu as f64;
        MSetSpec {
            interval: self.window(),
            n: (self.nu as u64 - 4) * self.r,
            sigma: (nuf - 1.0) / nuf,
            tau: 1.0 / nuf,
        }
    }
}

pub fn layout(params: &CorrectorParams) -> Result<CorrectorLayout> {
    params.validate()?;
    Ok(geometry(params.c, params.d, params.nu, params.r))
}

/// Layout geometry without the admissibility condition on `q`.
pub(crate) fn geometry(c: f64, d: f64, nu: u32, r: u64) -> CorrectorLayout {
    let q = r * nu as u64;
    let qf = q as f64;
    let width = d - c;
    let delta = width / (qf * nu as f64);
    let nodes: Vec<f64> = (0..=q)
        .map(|s| {
            if s == q {
                d
            } else {
                c + width * (s as f64 / qf)
            }
        })
        .collect();
    let first = 2 * r + 1;
    let last = q - 2 * r;
    let removed: Vec<Interval> = (first..=last)
        .map(|s| Interval {
            lo: nodes[s as usize] - delta,
            hi: nodes[s as usize],
        })
        .collect();
    let mut e: Vec<Interval> = (first..=last)
        .map(|s| Interval {
            lo: nodes[s as usize - 1],
            hi: nodes[s as usize] - delta,
        })
        .collect();
    let b_prime = nodes[last as usize];
    e.push(Interval {
        lo: b_prime,
        hi: b_prime,
    });
    CorrectorLayout {
        c,
        d,
        nu,
        r,
        q,
        delta,
        a_prime: nodes[2 * r as usize],
        b_prime,
        nodes,
        removed,
        e,
    }
}

/// The corrector for `layout` and height `γ`.
///
/// `ψ = γ` on `E`; on each removed `[a_s, c_s]` it dips linearly to
/// `−γ(2ν−1)` at the midpoint and back, which zeroes `∫ψ` over every period
/// `[c_{s−1}, c_s]`; it ramps `0 → γ` on `[a′−δ, a′]` and `γ → 0` on
/// `[b′, b′+δ]`, and vanishes elsewhere.
pub fn build_psi(layout: &CorrectorLayout, gamma: f64) -> PiecewiseLinearFn {
    let depth = -gamma * (2.0 * layout.nu as f64 - 1.0);
    let mut xs = Vec::with_capacity(3 * layout.removed.len() + 4);
    let mut ys = Vec::with_capacity(xs.capacity());
    xs.push(layout.a_prime - layout.delta);
    ys.push(0.0);
    xs.push(layout.a_prime);
    ys.push(gamma);
    for gap in &layout.removed {
        xs.extend([gap.lo, gap.midpoint(), gap.hi]);
        ys.extend([gamma, depth, gamma]);
    }
    xs.push(layout.b_prime + layout.delta);
    ys.push(0.0);
    PiecewiseLinearFn::new(xs, ys).expect("layout breakpoints are strictly increasing")
}

/// Outcome of checking the corrector properties on one `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyChecks {
    /// `sup|ψ| ≤ 2ν|γ|`.
    pub bounded: bool,
    /// `ψ = γ` at every sampled point of `E`.
    pub plateau: bool,
    pub running_integral: f64,
    /// `sup_ξ |∫₀^ξ ψ| < ε`.
    pub small_integral: bool,
    /// Support inside `[c, d]`.
    pub supported: bool,
}

impl PropertyChecks {
    pub fn all(&self) -> bool {
        self.bounded && self.plateau && self.small_integral && self.supported
    }
}

pub fn check_properties(
    layout: &CorrectorLayout,
    psi: &PiecewiseLinearFn,
    gamma: f64,
    eps: f64,
    samples_per_piece: usize,
) -> PropertyChecks {
    let bounded = psi.sup_abs() <= 2.0 * layout.nu as f64 * gamma.abs();
    let samples = samples_per_piece.max(2);
    let plateau = layout.e.iter().all(|piece| {
        (0..samples).all(|i| {
            let x = if i + 1 == samples {
                piece.hi
            } else {
                piece.lo + piece.len() * (i as f64 / (samples - 1) as f64)
            };
            psi.eval(x) == gamma
        })
    });
    let running_integral = psi.running_integral_sup();
    let supported = psi
        .support()
        .is_none_or(|(lo, hi)| layout.c <= lo && hi <= layout.d);
    PropertyChecks {
        bounded,
        plateau,
        running_integral,
        small_integral: running_integral < eps,
        supported,
    }
}

/// `sin(j u)/u`, equal to `j` at `u = 0`.
fn dirichlet_kernel(j: f64, u: f64) -> f64 {
    let z = j * u;
    if z.abs() < 1e-4 {
        let z2 = z * z;
        j * (1.0 - z2 / 6.0 + z2 * z2 / 120.0)
    } else {
        z.sin() / u
    }
}

const KERNEL_REL_TOL: f64 = 1e-6;
const KERNEL_MAX_DEPTH: u32 = 40;

/// Quadrature partition for frequency `j`: breakpoints of `ψ`, each piece cut
/// into at least 8 cells per kernel period `2π/j`.
fn kernel_partition(psi: &PiecewiseLinearFn, j: u32) -> Vec<f64> {
    let bps = psi.breakpoints();
    let mut points = Vec::with_capacity(bps.len());
    for w in bps.windows(2) {
        let cells = ((8.0 * (w[1] - w[0]) * j as f64 / TAU).ceil() as usize).max(1);
        for i in 0..cells {
            points.push(w[0] + (w[1] - w[0]) * (i as f64 / cells as f64));
        }
    }
    if let Some(&last) = bps.last() {
        points.push(last);
    }
    points
}

fn kernel_integral_on(psi: &PiecewiseLinearFn, points: &[f64], j: u32, x: f64) -> Result<f64> {
    if points.len() < 2 {
        return Ok(0.0);
    }
    let jf = j as f64;
    integrate_partition(
        &|t| psi.eval(t) * dirichlet_kernel(jf, t - x),
        points,
        KERNEL_REL_TOL,
        KERNEL_MAX_DEPTH,
    )
}

/// `∫ ψ(t) sin(j(t−x))/(t−x) dt`.
pub fn kernel_integral(psi: &PiecewiseLinearFn, j: u32, x: f64) -> Result<f64> {
    kernel_integral_on(psi, &kernel_partition(psi, j), j, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelRow {
    pub j: u32,
    pub x: f64,
    pub integral: f64,
    /// `|integral| / (ν|γ|)`; `None` when `γ = 0`.
    pub bound_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSweep {
    pub sup: f64,
    pub j_at_sup: u32,
    pub x_at_sup: f64,
    /// Empirical constant `sup / (ν|γ|)`; `None` when `γ = 0`.
    pub b_hat: Option<f64>,
    pub rows: Vec<KernelRow>,
}

/// Sup of `|∫ψ(t) sin(j(t−x))/(t−x) dt|` over `j = 1..=j_max` and a uniform
/// grid of `x_grid` points covering `[0, 2π]`.
pub fn kernel_sup(
    psi: &PiecewiseLinearFn,
    nu: u32,
    gamma: f64,
    j_max: u32,
    x_grid: usize,
) -> Result<KernelSweep> {
    if j_max == 0 || x_grid == 0 {
        return Err(Error::precondition(
            "kernel sweep needs j_max >= 1 and x_grid >= 1",
        ));
    }
    let xs: Vec<f64> = (0..x_grid)
        .map(|i| {
            if x_grid == 1 {
                0.0
            } else {
                TWO_PI * i as f64 / (x_grid - 1) as f64
            }
        })
        .collect();
    let scale = nu as f64 * gamma.abs();
    let rows = (1..=j_max)
        .into_par_iter()
        .flat_map_iter(|j| {
            let points = kernel_partition(psi, j);
            xs.iter()
                .map(|&x| {
                    let integral = kernel_integral_on(psi, &points, j, x)?;
                    Ok(KernelRow {
                        j,
                        x,
                        integral,
                        bound_ratio: (scale > 0.0).then(|| integral.abs() / scale),
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .max_by(|a, b| a.integral.abs().total_cmp(&b.integral.abs()))
        .copied()
        .expect("at least one row");
    let sup = best.integral.abs();
    Ok(KernelSweep {
        sup,
        j_at_sup: best.j,
        x_at_sup: best.x,
        b_hat: (scale > 0.0).then(|| sup / scale),
        rows,
    })
}
