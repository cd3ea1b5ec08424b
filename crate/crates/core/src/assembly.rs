//! Claim assembly: equal-cell step functions, the two-scale search for `κ`
//! and per-cell `r`, certification of `μ(E) ≥ (1 − 7/ν) μ([0, 2π])`, a
//! one-round demo of the correction theorem and Fourier partial-sum
//! diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrector::{
    build_psi, check_properties, choose_r, geometry, CorrectorLayout, PropertyChecks, MIN_NU,
};
use crate::equidistribution::{mset_mass, MSetSpec};
use crate::error::{Error, Result};
use crate::fourier::{build_lambda_with, CoefficientTable, LambdaParams, DEFAULT_REFINEMENT};
use crate::interval::Interval;
use crate::measure::Measure;
use crate::pwl::PiecewiseLinearFn;
use crate::TWO_PI;

/// Relative tolerance for matching breakpoints to an equal grid.
const GRID_TOL: f64 = 1e-12;

fn grid_point(cells: usize, i: usize) -> f64 {
    if i == cells {
        TWO_PI
    } else {
        TWO_PI * (i as f64 / cells as f64)
    }
}

/// Step function on `[0, 2π]`: value `values[k]` on cell
/// `[breakpoints[k], breakpoints[k+1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// Value boundary moved by resampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryShift {
    pub from: f64,
    pub to: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResampleReport {
    pub original_cells: usize,
    pub cells: usize,
    /// Every original breakpoint landed on the grid.
    pub aligned: bool,
    pub shifts: Vec<BoundaryShift>,
    pub max_shift: f64,
}

impl StepFunction {
    pub fn new(mut breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.len() != values.len() + 1 {
            return Err(Error::precondition(
                "a step function needs n + 1 breakpoints for n values",
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
        let last = breakpoints.len() - 1;
        if breakpoints[0] != 0.0 || (breakpoints[last] - TWO_PI).abs() > GRID_TOL * TWO_PI {
            return Err(Error::precondition("breakpoints must run from 0 to 2π"));
        }
        breakpoints[last] = TWO_PI;
        Ok(StepFunction {
            breakpoints,
            values,
        })
    }

    pub fn constant(gamma: f64) -> Self {
        StepFunction {
            breakpoints: vec![0.0, TWO_PI],
            values: vec![gamma],
        }
    }

    /// `values.len()` cells of length `2π / values.len()`.
    pub fn equal_cells(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        StepFunction::new((0..=n).map(|i| grid_point(n, i)).collect(), values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn cell(&self, k: usize) -> Interval {
        Interval {
            lo: self.breakpoints[k],
            hi: self.breakpoints[k + 1],
        }
    }

    pub fn is_equal_length(&self) -> bool {
        let n = self.cells();
        self.breakpoints
            .iter()
            .enumerate()
            .all(|(i, &b)| (b - grid_point(n, i)).abs() <= GRID_TOL * TWO_PI)
    }

    /// Value on the cell containing `x` (cells closed on the left); zero
    /// outside `[0, 2π]`.
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=TWO_PI).contains(&x) {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= x);
        self.values[(i.max(1) - 1).min(self.values.len() - 1)]
    }

    /// Resamples onto the coarsest equal grid with at most `cap` cells that
    /// contains every breakpoint, or onto `cap` cells when none does. A cell
    /// straddling a value boundary takes the value on its left end.
    pub fn resample_equal(&self, cap: usize) -> Result<(StepFunction, ResampleReport)> {
        if cap == 0 {
            return Err(Error::precondition("resampling cap must be positive"));
        }
        let tol = GRID_TOL * TWO_PI;
        let interior = &self.breakpoints[1..self.breakpoints.len() - 1];
        let fits = |rho: usize| {
            interior.iter().all(|&b| {
                let i = (b / TWO_PI * rho as f64).round() as usize;
                (grid_point(rho, i) - b).abs() <= tol
            })
        };
        let found = (1..=cap).find(|&rho| fits(rho));
        let rho = found.unwrap_or(cap);
        let mut values = Vec::with_capacity(rho);
        let mut shifts = Vec::new();
        for k in 0..rho {
            let (lo, hi) = (grid_point(rho, k), grid_point(rho, k + 1));
            let inside: Vec<f64> = interior
                .iter()
                .copied()
                .filter(|&b| b > lo + tol && b < hi - tol)
                .collect();
            match inside.first() {
                None => values.push(self.eval(0.5 * (lo + hi))),
                Some(&first) => {
                    values.push(self.eval(0.5 * (lo + first)));
                    shifts.extend(inside.iter().map(|&b| BoundaryShift { from: b, to: hi }));
                }
            }
        }
        let max_shift = shifts.iter().map(|s| s.to - s.from).fold(0.0, f64::max);
        Ok((
            StepFunction::equal_cells(values)?,
            ResampleReport {
                original_cells: self.cells(),
                cells: rho,
                aligned: found.is_some(),
                shifts,
                max_shift,
            },
        ))
    }
}

/// Splits each of the `ρ` equal cells of `phi` into `κ` equal cells.
pub fn subdivide(phi: &StepFunction, kappa: usize) -> Result<StepFunction> {
    if kappa == 0 {
        return Err(Error::precondition("kappa must be positive"));
    }
    if !phi.is_equal_length() {
        return Err(Error::precondition(
            "step function cells are not of equal length; resample first",
        ));
    }
    let values = phi
        .values
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, kappa))
        .collect();
    StepFunction::equal_cells(values)
}

/// Running-integral tolerances `ε_k`, one per cell, `k = 1, 2, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsSchedule {
    /// `ε_k = ε₀ 2^{−k}`.
    Geometric {
        eps0: f64,
    },
    Constant {
        eps: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule::Geometric { eps0: 1.0 }
    }
}

impl EpsSchedule {
    /// `ε_k` for the 1-based cell index `k`.
    pub fn eps(&self, k: usize) -> Result<f64> {
        let e = match self {
            EpsSchedule::Geometric { eps0 } => eps0 * 0.5f64.powi(k.min(i32::MAX as usize) as i32),
            EpsSchedule::Constant { eps } => *eps,
            EpsSchedule::Explicit { values } => {
                *values.get(k.wrapping_sub(1)).ok_or_else(|| {
                    Error::precondition(format!("no eps for cell {k} ({} given)", values.len()))
                })?
            }
        };
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::precondition(format!("eps for cell {k} is {e}")));
        }
        Ok(e)
    }
}

/// Caps and numerical knobs for [`claim_run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchLimits {
    pub kappa_cap: u64,
    pub r_cap: u64,
    /// First horizon of each doubling search, as a count of `κ` or `r`.
    pub start: u64,
    /// Largest equal grid tried when resampling `φ`.
    pub resample_cap: usize,
    pub j_max: u32,
    pub k_max: u32,
    pub refinement: u32,
    /// Points checked per piece of `E` for `ψ = γ`.
    pub plateau_samples: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            kappa_cap: 512,
            r_cap: 512,
            start: 16,
            resample_cap: 4096,
            j_max: 3,
            k_max: 3,
            refinement: DEFAULT_REFINEMENT,
            plateau_samples: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimParams {
    pub nu: u32,
    #[serde(default)]
    pub eps: EpsSchedule,
    #[serde(default)]
    pub limits: SearchLimits,
}

/// One candidate `n = m · count` from `Λ̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchStep {
    pub n: u64,
    pub count: u64,
    pub mass: f64,
}

/// Walk of `Λ̃ ∩ mℕ` until the mass target is met.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SearchTrace {
    pub step: u64,
    pub target: f64,
    pub accepted: Option<u64>,
    pub tried: Vec<SearchStep>,
    pub horizon: u64,
    pub warning: Option<String>,
}

impl SearchTrace {
    fn best(&self) -> Option<u64> {
        self.tried
            .iter()
            .max_by(|a, b| a.mass.total_cmp(&b.mass))
            .map(|s| s.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    /// 1-based cell index.
    pub k: usize,
    pub cell: Interval,
    pub gamma: f64,
    pub eps: f64,
    pub r: u64,
    /// `choose_r` for this cell; `None` when it is out of range.
    pub r_min: Option<u64>,
    /// `[a′, b′]`.
    pub window: Interval,
    pub mu_cell: f64,
    pub mu_window: f64,
    #[serde(rename = "mu_E")]
    pub mu_e: f64,
    /// `(1 − 2/ν) μ([a′, b′])`.
    pub target: f64,
    pub search: SearchTrace,
    pub checks: PropertyChecks,
    pub certified: bool,
    #[serde(skip)]
    pub layout: CorrectorLayout,
    #[serde(skip)]
    pub psi: PiecewiseLinearFn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub nu: u32,
    pub rho: usize,
    pub kappa: u64,
    pub r_per_cell: Vec<u64>,
    #[serde(rename = "mu_E")]
    pub mu_e: f64,
    pub mu_total: f64,
    /// `μ(⋃_k [a_k′, b_k′])`.
    pub mu_union: f64,
    /// `(1 − 7/ν) μ([0, 2π])`.
    pub bound: f64,
    /// `μ(E) ≥ bound`, both searches succeeded and every cell passed its
    /// property checks.
    pub certified: bool,
    pub kappa_search: SearchTrace,
    pub resample: Option<ResampleReport>,
    pub cells: Vec<CellResult>,
}

impl ClaimResult {
    /// Closed pieces of `E`, ordered.
    pub fn e_intervals(&self) -> Vec<Interval> {
        self.cells
            .iter()
            .flat_map(|c| c.layout.e.iter().copied())
            .collect()
    }

    pub fn windows(&self) -> Vec<Interval> {
        self.cells.iter().map(|c| c.window).collect()
    }

    pub fn ratio(&self) -> f64 {
        self.mu_e / self.mu_total
    }
}

fn e_mass(mu: &Measure, layout: &CorrectorLayout) -> Result<f64> {
    layout
        .e
        .iter()
        .map(|piece| mu.interval_mass(piece.lo, piece.hi))
        .sum()
}

/// Walks `Λ̃ ∩ mℕ` over counts `lo ..= cap` with a doubling horizon and
/// returns at the first member whose mass meets `target`.
fn search_lambda<F>(
    table: &mut CoefficientTable<'_>,
    limits: &SearchLimits,
    m: u64,
    lo: u64,
    cap: u64,
    target: f64,
    mut mass_at: F,
) -> Result<SearchTrace>
where
    F: FnMut(u64) -> Result<f64>,
{
    let mut trace = SearchTrace {
        step: m,
        target,
        ..SearchTrace::default()
    };
    if lo > cap {
        return Ok(trace);
    }
    let mut from = lo;
    let mut hi = lo.saturating_add(limits.start.max(1) - 1).min(cap);
    loop {
        let params = LambdaParams {
            k_max: limits.k_max,
            j_max: limits.j_max,
            n_max: m * hi,
            m,
            n_min: m * from,
            refinement: limits.refinement,
            density_floor: 0.5,
        };
        let set = build_lambda_with(table, &params)?;
        trace.horizon = params.n_max;
        if set.warning.is_some() {
            trace.warning = set.warning;
        }
        for &n in &set.members {
            let count = n / m;
            let mass = mass_at(count)?;
            trace.tried.push(SearchStep { n, count, mass });
            if mass >= target {
                trace.accepted = Some(count);
                return Ok(trace);
            }
        }
        if hi >= cap {
            return Ok(trace);
        }
        from = hi + 1;
        hi = hi.saturating_mul(2).min(cap);
    }
}

fn run_cell(
    mu: &Measure,
    phi: &StepFunction,
    k: usize,
    nu: u32,
    eps: &EpsSchedule,
    limits: &SearchLimits,
) -> Result<CellResult> {
    let cell = phi.cell(k);
    let (c, d) = (cell.lo, cell.hi);
    let gamma = phi.values()[k];
    let eps = eps.eps(k + 1)?;
    let r_min = choose_r(c, d, gamma, eps, nu)
        .ok()
        .filter(|&r| r <= limits.r_cap);
    let mu_cell = mu.interval_mass(c, d)?;
    let probe = geometry(c, d, nu, r_min.unwrap_or(1));
    let window = probe.window();
    let mu_window = mu.interval_mass(window.lo, window.hi)?;
    let target = (1.0 - 2.0 / nu as f64) * mu_window;
    let m = nu as u64 - 4;

    let (r, search, found) = match r_min {
        None => (
            limits.r_cap,
            SearchTrace {
                step: m,
                target,
                ..SearchTrace::default()
            },
            false,
        ),
        Some(r_min) if mu_window == 0.0 => (
            r_min,
            SearchTrace {
                step: m,
                target,
                accepted: Some(r_min),
                ..SearchTrace::default()
            },
            true,
        ),
        Some(r_min) => {
            let local = mu.normalize(window)?;
            let mut table = CoefficientTable::new(&local, limits.refinement)?;
            let trace = search_lambda(&mut table, limits, m, r_min, limits.r_cap, target, |r| {
                e_mass(mu, &geometry(c, d, nu, r))
            })?;
            let r = trace.accepted.or(trace.best()).unwrap_or(r_min);
            let found = trace.accepted.is_some();
            (r, trace, found)
        }
    };

    let layout = geometry(c, d, nu, r);
    let psi = build_psi(&layout, gamma);
    let checks = check_properties(&layout, &psi, gamma, eps, limits.plateau_samples);
    let mu_e = e_mass(mu, &layout)?;
    Ok(CellResult {
        k: k + 1,
        cell,
        gamma,
        eps,
        r,
        r_min,
        window: layout.window(),
        mu_cell,
        mu_window: mu.interval_mass(layout.a_prime, layout.b_prime)?,
        mu_e,
        target,
        search,
        checks,
        certified: found && checks.all(),
        layout,
        psi,
    })
}

/// Runs the Claim for `phi` against `mu`.
///
/// Chooses `κ` from `Λ̃ ∩ ρℕ` of `μ` normalized to `[0, 2π]` until the union
/// of the windows `[a_k′, b_k′]` (an M-set with `σ = 2/ν`, `τ = 1 − 4/ν`)
/// carries `(1 − 5/ν) μ([0, 2π])`; then per cell chooses `r ≥ choose_r` from
/// `Λ̃ ∩ (ν−4)ℕ` of `μ` normalized to the window until
/// `μ(E_k) ≥ (1 − 2/ν) μ([a_k′, b_k′])`. Exhausted searches give an
/// uncertified result rather than an error.
pub fn claim_run(phi: &StepFunction, mu: &Measure, params: &ClaimParams) -> Result<ClaimResult> {
    let nu = params.nu;
    let limits = &params.limits;
    if nu < MIN_NU {
        return Err(Error::precondition(format!("nu must exceed 8 (got {nu})")));
    }
    if limits.kappa_cap == 0 || limits.r_cap == 0 {
        return Err(Error::precondition("search caps must be positive"));
    }
    let atoms = mu.atomic_part();
    if let Some(big) = atoms.iter().max_by(|a, b| a.mass.total_cmp(&b.mass)) {
        return Err(Error::AtomicMeasure {
            count: atoms.len(),
            largest: big.mass,
            position: big.position,
        });
    }
    let mu_total = mu.interval_mass(0.0, TWO_PI)?;
    if !(mu_total > 0.0) {
        return Err(Error::precondition("μ([0, 2π]) must be positive"));
    }

    let (phi, resample) = if phi.is_equal_length() {
        (phi.clone(), None)
    } else {
        let (p, report) = phi.resample_equal(limits.resample_cap)?;
        (p, Some(report))
    };
    let rho = phi.cells();
    let nuf = nu as f64;

    let base = mu.normalize(Interval {
        lo: 0.0,
        hi: TWO_PI,
    })?;
    let mut table = CoefficientTable::new(&base, limits.refinement)?;
    let union = |kappa: u64| MSetSpec {
        interval: Interval {
            lo: 0.0,
            hi: TWO_PI,
        },
        n: rho as u64 * kappa,
        sigma: 2.0 / nuf,
        tau: 1.0 - 4.0 / nuf,
    };
    let kappa_search = search_lambda(
        &mut table,
        limits,
        rho as u64,
        1,
        limits.kappa_cap,
        (1.0 - 5.0 / nuf) * mu_total,
        |kappa| mset_mass(mu, &union(kappa)),
    )?;
    let kappa = kappa_search.accepted.or(kappa_search.best()).unwrap_or(1);
    let kappa_found = kappa_search.accepted.is_some();

    let fine = subdivide(&phi, kappa as usize)?;
    let cells = (0..fine.cells())
        .into_par_iter()
        .map(|k| run_cell(mu, &fine, k, nu, &params.eps, limits))
        .collect::<Result<Vec<_>>>()?;

    let mu_e: f64 = cells.iter().map(|c| c.mu_e).sum();
    let mu_union: f64 = cells.iter().map(|c| c.mu_window).sum();
    let bound = (1.0 - 7.0 / nuf) * mu_total;
    let cells_ok = cells.iter().all(|c| c.certified);
    Ok(ClaimResult {
        nu,
        rho,
        kappa,
        r_per_cell: cells.iter().map(|c| c.r).collect(),
        mu_e,
        mu_total,
        mu_union,
        bound,
        certified: mu_e >= bound && cells_ok && kappa_found,
        kappa_search: SearchTrace {
            accepted: kappa_found.then_some(kappa),
            ..kappa_search
        },
        resample,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoParams {
    /// Bound on the exceptional mass.
    pub eps: f64,
    /// Target `sup|f − φ|`.
    pub uniform_gap: f64,
    #[serde(default)]
    pub limits: SearchLimits,
    /// Largest number of cells for `φ`.
    #[serde(default = "default_rho_cap")]
    pub rho_cap: usize,
    /// Samples per cell when measuring `sup|f − φ|`.
    #[serde(default = "default_gap_samples")]
    pub gap_samples: usize,
}

fn default_rho_cap() -> usize {
    1 << 12
}

fn default_gap_samples() -> usize {
    64
}

impl DemoParams {
    pub fn new(eps: f64, uniform_gap: f64) -> Self {
        DemoParams {
            eps,
            uniform_gap,
            limits: SearchLimits::default(),
            rho_cap: default_rho_cap(),
            gap_samples: default_gap_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoResult {
    pub nu: u32,
    pub rho: usize,
    pub eps: f64,
    pub uniform_gap: f64,
    /// Sampled `sup|f − φ|`.
    pub phi_gap: f64,
    pub mu_total: f64,
    /// `Σ_{γ_k ≠ 0} μ(J_k ∖ E_k)`, which bounds `μ({φ ≠ g})`.
    pub exceptional_mass: f64,
    /// `g` vanishes at both ends of every corrector's support.
    pub g_continuous: bool,
    /// `max |f − g|` over the endpoints of the pieces of `E`.
    pub sup_f_minus_g_on_e: f64,
    pub phi: StepFunction,
    pub claim: ClaimResult,
    #[serde(skip)]
    pub g: PiecewiseLinearFn,
}

fn smallest_nu(mu_total: f64, eps: f64) -> u32 {
    let mut nu = ((7.0 * mu_total / eps).floor().min(u32::MAX as f64 - 2.0) as u32 + 1).max(MIN_NU);
    while nu > MIN_NU && 7.0 * mu_total / ((nu - 1) as f64) < eps {
        nu -= 1;
    }
    while 7.0 * mu_total / nu as f64 >= eps {
        nu += 1;
    }
    nu
}

/// Equal-cell `φ` with midpoint values and its sampled gap to `f`.
fn step_approximation(
    f: &(dyn Fn(f64) -> f64 + Sync),
    rho: usize,
    samples: usize,
) -> Result<(StepFunction, f64)> {
    let values: Vec<f64> = (0..rho)
        .map(|k| f(0.5 * (grid_point(rho, k) + grid_point(rho, k + 1))))
        .collect();
    let phi = StepFunction::equal_cells(values)?;
    let samples = samples.max(2);
    let gap = (0..rho)
        .into_par_iter()
        .map(|k| {
            let (lo, hi) = (grid_point(rho, k), grid_point(rho, k + 1));
            (0..samples)
                .map(|s| (f(lo + (hi - lo) * (s as f64 / samples as f64)) - phi.values[k]).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok((phi, gap))
}

/// One Claim round for `f`: builds `φ` with `sup|f − φ| ≤ uniform_gap`, runs
/// [`claim_run`] with the smallest `ν > 8` such that `7 μ([0, 2π]) / ν < ε`
/// and a constant running-integral tolerance `ε`, and returns
/// `g = Σ_k ψ_k`, which is continuous, vanishes at `0` and `2π`, and equals
/// `φ` on `E` and on every cell where `φ = 0`.
pub fn theorem_demo(
    f: &(dyn Fn(f64) -> f64 + Sync),
    mu: &Measure,
    params: &DemoParams,
) -> Result<DemoResult> {
    if !(params.eps > 0.0 && params.uniform_gap > 0.0) {
        return Err(Error::precondition("eps and uniform_gap must be positive"));
    }
    let mu_total = mu.interval_mass(0.0, TWO_PI)?;
    let nu = smallest_nu(mu_total, params.eps);

    let mut rho = 1;
    let (phi, phi_gap) = loop {
        let (phi, gap) = step_approximation(f, rho, params.gap_samples)?;
        if !gap.is_finite() {
            return Err(Error::precondition("f is not finite on [0, 2π]"));
        }
        if gap <= params.uniform_gap {
            break (phi, gap);
        }
        if rho * 2 > params.rho_cap {
            return Err(Error::precondition(format!(
                "sup|f − φ| = {gap} still above {} at {rho} cells",
                params.uniform_gap
            )));
        }
        rho *= 2;
    };

    let claim = claim_run(
        &phi,
        mu,
        &ClaimParams {
            nu,
            eps: EpsSchedule::Constant { eps: params.eps },
            limits: params.limits,
        },
    )?;
    if !claim.certified {
        return Err(Error::Uncertified(format!(
            "μ(E) = {} against bound {} (ν = {nu}, κ = {})",
            claim.mu_e, claim.bound, claim.kappa
        )));
    }

    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    for cell in &claim.cells {
        xs.extend_from_slice(cell.psi.breakpoints());
        ys.extend_from_slice(cell.psi.values());
    }
    xs.push(TWO_PI);
    ys.push(0.0);
    let g = PiecewiseLinearFn::new(xs, ys)?;
    let g_continuous = claim.cells.iter().all(|c| {
        let v = c.psi.values();
        v.first() == Some(&0.0) && v.last() == Some(&0.0) && c.cell.lo < c.psi.breakpoints()[0]
    });
    let exceptional_mass = claim
        .cells
        .iter()
        .filter(|c| c.gamma != 0.0)
        .map(|c| (c.mu_cell - c.mu_e).max(0.0))
        .sum();
    let sup_f_minus_g_on_e = claim
        .e_intervals()
        .par_iter()
        .map(|p| {
            (f(p.lo) - g.eval(p.lo))
                .abs()
                .max((f(p.hi) - g.eval(p.hi)).abs())
        })
        .reduce(|| 0.0, f64::max);

    Ok(DemoResult {
        nu,
        rho,
        eps: params.eps,
        uniform_gap: params.uniform_gap,
        phi_gap,
        mu_total,
        exceptional_mass,
        g_continuous,
        sup_f_minus_g_on_e,
        phi,
        claim,
        g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSumRow {
    pub n: u64,
    /// `max_i |S_N g(x_i) − g(x_i)|` over the grid.
    pub sup_error: f64,
}

/// Sup-norm error of the Fourier partial sums `S_N g` on the grid
/// `x_i = 2π i / grid`, `i < grid`, for each `N` in `n_list`.
pub fn partial_sum_diagnostics(
    g: &PiecewiseLinearFn,
    n_list: &[u64],
    grid: usize,
) -> Result<Vec<PartialSumRow>> {
    if grid == 0 {
        return Err(Error::precondition("grid must be positive"));
    }
    let (g0, g1) = (g.eval(0.0), g.eval(TWO_PI));
    if (g0 - g1).abs() > 1e-12 * (1.0 + g.sup_abs()) {
        return Err(Error::precondition(format!(
            "g(0) = {g0} differs from g(2π) = {g1}"
        )));
    }
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let coeffs: Vec<_> = (0..=n_max as i64)
        .into_par_iter()
        .map(|n| g.fourier_coefficient(n))
        .collect();
    let mut order: Vec<usize> = (0..n_list.len()).collect();
    order.sort_by_key(|&i| n_list[i]);

    let per_point: Vec<Vec<f64>> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let x = TWO_PI * (i as f64 / grid as f64);
            let gx = g.eval(x);
            let mut errs = vec![0.0; n_list.len()];
            let mut s = coeffs[0].re;
            let mut n = 0u64;
            for &idx in &order {
                while n < n_list[idx] {
                    n += 1;
                    let e = num_complex::Complex64::from_polar(1.0, n as f64 * x);
                    s += 2.0 * (coeffs[n as usize] * e).re;
                }
                errs[idx] = (s - gx).abs();
            }
            errs
        })
        .collect();
    Ok(n_list
        .iter()
        .enumerate()
        .map(|(idx, &n)| PartialSumRow {
            n,
            sup_error: per_point.iter().map(|e| e[idx]).fold(0.0, f64::max),
        })
        .collect())
}

/// Least-squares slope of `log sup_error` against `log N` over rows with
/// `N ≥ 1` and a positive error.
pub fn observed_order(rows: &[PartialSumRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= 1 && r.sup_error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.sup_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p.0 / n, b + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), p| {
        (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2))
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equidistribution::mset_intervals;
    use std::f64::consts::PI;

    fn full() -> Interval {
        Interval {
            lo: 0.0,
            hi: TWO_PI,
        }
    }

    fn lebesgue() -> Measure {
        Measure::lebesgue(full(), 1.0).unwrap()
    }

    fn cantor() -> Measure {
        Measure::cantor(full(), 40, 1.0).unwrap()
    }

    fn params(nu: u32) -> ClaimParams {
        ClaimParams {
            nu,
            eps: EpsSchedule::default(),
            limits: SearchLimits::default(),
        }
    }

    #[test]
    fn subdivide_examples() {
        let phi = StepFunction::equal_cells(vec![1.0, -1.0]).unwrap();
        let fine = subdivide(&phi, 3).unwrap();
        assert_eq!(fine.values(), &[1.0, 1.0, 1.0, -1.0, -1.0, -1.0]);
        assert!(fine.is_equal_length());
        assert_eq!(subdivide(&phi, 1).unwrap(), phi);
        let c = subdivide(&StepFunction::constant(2.5), 7).unwrap();
        assert_eq!(c.values(), &[2.5; 7]);
        assert!(subdivide(&phi, 0).is_err());
    }

    #[test]
    fn step_function_validation() {
        assert!(StepFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 3.0, 3.0, TWO_PI], vec![1.0, 2.0, 3.0]).is_err());
        assert!(StepFunction::new(vec![0.0, TWO_PI], vec![]).is_err());
        let f = StepFunction::new(vec![0.0, 1.0, TWO_PI], vec![1.0, 2.0]).unwrap();
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(1.0), 2.0);
        assert_eq!(f.eval(TWO_PI), 2.0);
        assert!(!f.is_equal_length());
        assert!(subdivide(&f, 2).is_err());
    }

    #[test]
    fn resample_aligned_and_unaligned() {
        let f = StepFunction::new(
            vec![0.0, PI / 2.0, 3.0 * PI / 2.0, TWO_PI],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        let (g, report) = f.resample_equal(64).unwrap();
        assert_eq!(g.values(), &[1.0, 2.0, 2.0, 3.0]);
        assert!(report.aligned && report.shifts.is_empty());

        let f = StepFunction::new(vec![0.0, 1.0, TWO_PI], vec![5.0, -5.0]).unwrap();
        let (g, report) = f.resample_equal(8).unwrap();
        assert_eq!(g.cells(), 8);
        assert!(!report.aligned);
        // 1.0 lies in [π/4, π/2]: that cell keeps the left value, the boundary
        // moves to π/2.
        assert_eq!(&g.values()[..3], &[5.0, 5.0, -5.0]);
        assert_eq!(report.shifts.len(), 1);
        assert!((report.max_shift - (PI / 2.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn eps_schedules() {
        let g = EpsSchedule::Geometric { eps0: 1.0 };
        assert_eq!(g.eps(1).unwrap(), 0.5);
        assert_eq!(g.eps(3).unwrap(), 0.125);
        assert!(g.eps(5000).is_err());
        let e = EpsSchedule::Explicit {
            values: vec![0.1, 0.2],
        };
        assert_eq!(e.eps(2).unwrap(), 0.2);
        assert!(e.eps(3).is_err());
    }

    #[test]
    fn smallest_nu_inverts_bound() {
        assert_eq!(smallest_nu(1.0, 1.0), 9);
        // 7/ν < 0.05 ⇔ ν > 140
        assert_eq!(smallest_nu(1.0, 0.05), 141);
        assert_eq!(smallest_nu(TWO_PI, 0.1 * TWO_PI), 71);
    }

    #[test]
    fn claim_rejects_small_nu_and_atoms() {
        let phi = StepFunction::constant(1.0);
        assert!(matches!(
            claim_run(&phi, &lebesgue(), &params(8)),
            Err(Error::Precondition(_))
        ));
        let atomic = Measure::mixture(
            full(),
            vec![
                (1.0, lebesgue()),
                (1.0, Measure::atomic(full(), &[(1.0, 0.5)]).unwrap()),
            ],
        )
        .unwrap();
        assert!(matches!(
            claim_run(&phi, &atomic, &params(16)),
            Err(Error::AtomicMeasure { .. })
        ));
    }

    #[test]
    fn claim_lebesgue_closed_form() {
        let nu = 16u32;
        let nuf = nu as f64;
        let res = claim_run(&StepFunction::constant(1.0), &lebesgue(), &params(nu)).unwrap();
        assert!(res.certified);
        assert_eq!(res.kappa, 1);
        assert_eq!(res.rho, 1);
        // ε_1 = 1/2: smallest r with 4·2π/(16 r) < 1/2 is 4
        assert_eq!(res.r_per_cell, vec![4]);
        let want = TWO_PI * (nuf - 4.0) * (nuf - 1.0) / (nuf * nuf);
        assert!((res.mu_e - want).abs() < 1e-12, "{} vs {want}", res.mu_e);
        assert!(res.ratio() >= 1.0 - 7.0 / nuf);
        assert!((res.mu_union - TWO_PI * (1.0 - 4.0 / nuf)).abs() < 1e-12);
    }

    #[test]
    fn claim_windows_form_union_mset() {
        let phi = StepFunction::equal_cells(vec![1.0, -2.0, 0.5]).unwrap();
        let res = claim_run(&phi, &lebesgue(), &params(12)).unwrap();
        let spec = MSetSpec {
            interval: full(),
            n: res.rho as u64 * res.kappa,
            sigma: 2.0 / 12.0,
            tau: 1.0 - 4.0 / 12.0,
        };
        let want = mset_intervals(&spec).unwrap();
        let got = res.windows();
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a.lo - b.lo).abs() < 1e-12 && (a.hi - b.hi).abs() < 1e-12);
        }
        let sum: f64 = res.cells.iter().map(|c| c.mu_e).sum();
        let direct: f64 = res.e_intervals().iter().map(|p| p.len()).sum();
        assert!((sum - direct).abs() < 1e-12);
        assert!(res.certified);
    }

    #[test]
    fn claim_cantor_constant() {
        let res = claim_run(&StepFunction::constant(1.0), &cantor(), &params(16)).unwrap();
        assert!(
            res.certified,
            "{:?}",
            (res.kappa, &res.r_per_cell, res.mu_e, res.bound)
        );
        assert!(res.mu_e >= 9.0 / 16.0 * res.mu_total);
        for c in &res.cells {
            assert!(c.checks.all());
            assert!(c.r >= c.r_min.unwrap());
            assert!(c.mu_e >= c.target);
        }
    }

    #[test]
    fn demo_of_zero_is_zero() {
        let res = theorem_demo(&|_| 0.0, &lebesgue(), &DemoParams::new(0.1 * TWO_PI, 0.5)).unwrap();
        assert!(res.g.values().iter().all(|&v| v == 0.0));
        assert_eq!(res.exceptional_mass, 0.0);
        assert!(res.g_continuous);
    }

    #[test]
    fn demo_smoothed_step() {
        let f = |x: f64| (4.0 * (x - PI)).tanh();
        let eps = 0.1 * TWO_PI;
        let res = theorem_demo(&f, &lebesgue(), &DemoParams::new(eps, 0.5)).unwrap();
        assert!(res.exceptional_mass < eps);
        assert!(res.g_continuous);
        assert!(res.phi_gap <= 0.5);
        assert!(res.sup_f_minus_g_on_e <= res.phi_gap + 1e-12);
    }

    #[test]
    fn demo_exact_for_step_input() {
        let f = |x: f64| if x < PI { 1.0 } else { -1.0 };
        let eps = 0.1 * TWO_PI;
        let res = theorem_demo(&f, &lebesgue(), &DemoParams::new(eps, 1e-9)).unwrap();
        assert_eq!(res.rho, 2);
        assert_eq!(res.phi_gap, 0.0);
        let agree: f64 = res
            .claim
            .e_intervals()
            .iter()
            .filter(|p| f(p.lo) == res.g.eval(p.lo) && f(p.hi) == res.g.eval(p.hi))
            .map(|p| p.len())
            .sum();
        assert!(agree >= res.mu_total - eps);
    }

    #[test]
    fn partial_sums_of_constant_are_exact() {
        let g = PiecewiseLinearFn::new(vec![0.0, TWO_PI], vec![1.5, 1.5]).unwrap();
        for row in partial_sum_diagnostics(&g, &[0, 1, 8, 64], 128).unwrap() {
            assert!(row.sup_error < 1e-12, "{row:?}");
        }
    }

    #[test]
    fn partial_sums_of_triangle_decay_like_one_over_n() {
        let g = PiecewiseLinearFn::new(vec![0.0, PI, TWO_PI], vec![0.0, PI, 0.0]).unwrap();
        let ns = [8, 16, 32, 64, 128, 256];
        let rows = partial_sum_diagnostics(&g, &ns, 1024).unwrap();
        assert!(rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error));
        let order = observed_order(&rows).unwrap();
        assert!((order + 1.0).abs() < 0.1, "{order}");
        // the error peaks at t = 0 where it equals Σ_{odd n > N} 4/(π n²)
        for row in &rows {
            let tail: f64 = ((row.n + 1)..2_000_000)
                .filter(|n| n % 2 == 1)
                .map(|n| 4.0 / (PI * (n * n) as f64))
                .sum();
            assert!((row.sup_error - tail).abs() < 1e-5, "{row:?} vs {tail}");
        }
    }

    #[test]
    fn partial_sums_need_periodic_input() {
        let g = PiecewiseLinearFn::new(vec![0.0, TWO_PI], vec![0.0, 1.0]).unwrap();
        assert!(partial_sum_diagnostics(&g, &[4], 16).is_err());
    }
}
