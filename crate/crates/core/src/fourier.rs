//! Fourier–Stieltjes coefficients `ν̂(j) = ∫₀¹ e^{−2πijt} dν(t)` of
//! probability measures on `[0, 1]`, their Cesàro averages, and the certified
//! index sets `Λ_{j,k} = {n : |ν̂(nk)| ≤ 1/j}`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Measure;

/// Cells per unit of `|j|` used when callers do not pick a refinement.
pub const DEFAULT_REFINEMENT: u32 = 64;

/// A coefficient together with a rigorous bound on its quadrature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient {
    pub value: Complex64,
    pub error: f64,
}

impl Coefficient {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }

    /// Upper bound on the true modulus.
    pub fn abs_upper(&self) -> f64 {
        self.value.norm() + self.error
    }

    pub fn conj(&self) -> Coefficient {
        Coefficient {
            value: self.value.conj(),
            error: self.error,
        }
    }
}

fn ensure_probability(nu: &Measure) -> Result<()> {
    if nu.is_probability_on_unit() {
        Ok(())
    } else {
        let d = nu.domain();
        Err(Error::NotProbability {
            u: d.lo,
            v: d.hi,
            mass: nu.total_mass(),
        })
    }
}

/// Riemann–Stieltjes approximation of `ν̂(freq)`.
///
/// Atoms contribute exactly. The continuous part is summed with midpoint
/// phases on `refinement · max(1, |freq|)` equal cells; the phase moves by at
/// most `π|freq|/cells` inside a cell, which times the cell's mass gives the
/// reported error bound.
pub fn coefficient(nu: &Measure, freq: i64, refinement: u32) -> Result<Coefficient> {
    ensure_probability(nu)?;
    coefficient_unchecked(nu, freq, refinement)
}

fn coefficient_unchecked(nu: &Measure, freq: i64, refinement: u32) -> Result<Coefficient> {
    if refinement == 0 {
        return Err(Error::precondition("refinement must be positive"));
    }
    let jf = freq as f64;
    let mut value = Complex64::new(0.0, 0.0);
    for atom in nu.atomic_part_with_tolerance(0.0) {
        let turns = (jf * atom.position).rem_euclid(1.0);
        value += Complex64::from_polar(atom.mass, -TAU * turns);
    }

    let cont_mass = nu.continuous_mass();
    let mut error = 0.0;
    if cont_mass > 0.0 {
        let r = refinement as usize;
        let cells = r * freq.unsigned_abs().max(1) as usize;
        let h = 1.0 / cells as f64;
        // Every cell midpoint sits at phase sign(j)·(i + ½)/R turns, so the
        // masses only need to be binned by i mod R.
        let mut bins = vec![0.0f64; r];
        let mut prev = nu.continuous_cdf(0.0);
        for i in 0..cells {
            let next = if i + 1 == cells {
                nu.continuous_cdf(1.0)
            } else {
                nu.continuous_cdf((i + 1) as f64 * h)
            };
            bins[i % r] += next - prev;
            prev = next;
        }
        let sign = if freq < 0 { -1.0 } else { 1.0 };
        for (b, mass) in bins.iter().enumerate() {
            if freq == 0 {
                value += *mass;
            } else {
                let turns = (b as f64 + 0.5) / r as f64;
                value += Complex64::from_polar(*mass, -TAU * sign * turns);
            }
        }
        if freq != 0 {
            error = PI * freq.unsigned_abs() as f64 * h * cont_mass;
        }
    }
    if error > 0.5 {
        return Err(Error::UncertifiedCoefficient { freq, bound: error });
    }
    Ok(Coefficient { value, error })
}

/// Cache of coefficients of one measure at one refinement.
///
/// Population happens through `&mut self` ([`CoefficientTable::ensure`]),
/// which computes all missing frequencies in parallel; lookups take `&self`.
/// Only non-negative frequencies are stored, negative ones are conjugates.
#[derive(Debug)]
pub struct CoefficientTable<'a> {
    measure: &'a Measure,
    refinement: u32,
    entries: BTreeMap<u64, Coefficient>,
}

impl<'a> CoefficientTable<'a> {
    pub fn new(measure: &'a Measure, refinement: u32) -> Result<Self> {
        ensure_probability(measure)?;
        if refinement == 0 {
            return Err(Error::precondition("refinement must be positive"));
        }
        Ok(CoefficientTable {
            measure,
            refinement,
            entries: BTreeMap::new(),
        })
    }

    pub fn refinement(&self) -> u32 {
        self.refinement
    }

    pub fn measure(&self) -> &Measure {
        self.measure
    }

    pub fn ensure<I: IntoIterator<Item = i64>>(&mut self, freqs: I) -> Result<()> {
        let mut missing: Vec<u64> = freqs
            .into_iter()
            .map(|f| f.unsigned_abs())
            .filter(|f| !self.entries.contains_key(f))
            .collect();
        missing.sort_unstable();
        missing.dedup();
        let computed = missing
            .par_iter()
            .map(|&f| {
                coefficient_unchecked(self.measure, f as i64, self.refinement).map(|c| (f, c))
            })
            .collect::<Result<Vec<_>>>()?;
        self.entries.extend(computed);
        Ok(())
    }

    pub fn get(&self, freq: i64) -> Option<Coefficient> {
        let c = self.entries.get(&freq.unsigned_abs())?;
        Some(if freq < 0 { c.conj() } else { *c })
    }

    /// Looks up a frequency, computing it first if needed.
    pub fn fetch(&mut self, freq: i64) -> Result<Coefficient> {
        self.ensure([freq])?;
        Ok(self.get(freq).expect("just populated"))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Running Cesàro averages `(1/(N+1)) Σ_{n=0}^{N} |ν̂(nk)|²` for every
/// `N = 0..=n_max`.
pub fn running_wiener_averages(
    table: &mut CoefficientTable<'_>,
    k: i64,
    n_max: u64,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::precondition("wiener average needs k != 0"));
    }
    table.ensure((0..=n_max).map(|n| n as i64 * k))?;
    let mut acc = 0.0;
    Ok((0..=n_max)
        .map(|n| {
            acc += table.get(n as i64 * k).unwrap().value.norm_sqr();
            acc / (n + 1) as f64
        })
        .collect())
}

/// `(1/(N+1)) Σ_{n=0}^{N} |ν̂(nk)|²`.
pub fn wiener_average(nu: &Measure, k: i64, n: u64, refinement: u32) -> Result<f64> {
    let mut table = CoefficientTable::new(nu, refinement)?;
    let avgs = running_wiener_averages(&mut table, k, n)?;
    Ok(*avgs.last().unwrap())
}

/// One `(j, k)` threshold that contributed to an [`IndexSet`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub j: u32,
    pub k: i64,
    /// Certified members among the scanned candidates.
    pub count: usize,
    /// `count / candidates`.
    pub density: f64,
}

/// A certified finite piece of a subset of ℕ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSet {
    /// Sorted members, all in `[1, horizon]`.
    pub members: Vec<u64>,
    pub horizon: u64,
    /// `|members ∩ [0, horizon]| / (horizon + 1)`.
    pub density: f64,
    /// Members are drawn from `step·ℕ` (`m` in `Λ̃ = Λ ∩ mℕ`).
    pub step: u64,
    /// Number of candidates scanned (multiples of `step` in range).
    pub candidates: usize,
    pub provenance: Vec<Threshold>,
    pub warning: Option<String>,
}

impl IndexSet {
    fn assemble(
        members: Vec<u64>,
        horizon: u64,
        step: u64,
        candidates: usize,
        provenance: Vec<Threshold>,
    ) -> Self {
        let density = members.len() as f64 / (horizon + 1) as f64;
        IndexSet {
            members,
            horizon,
            density,
            step,
            candidates,
            provenance,
            warning: None,
        }
    }

    /// Share of scanned candidates that are members.
    pub fn relative_density(&self) -> f64 {
        if self.candidates == 0 {
            0.0
        } else {
            self.members.len() as f64 / self.candidates as f64
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Density `|members ∩ [0, n]| / (n + 1)` at an intermediate horizon.
    pub fn density_at(&self, n: u64) -> f64 {
        self.members.partition_point(|&m| m <= n) as f64 / (n + 1) as f64
    }
}

fn certified(c: &Coefficient, j: u32) -> bool {
    c.abs_upper() <= 1.0 / j as f64
}

/// `Λ_{j,k} ∩ [1, n_max]`: the `n` whose coefficient `ν̂(nk)` is certified to
/// satisfy `|ν̂(nk)| ≤ 1/j`.
pub fn lambda_jk(nu: &Measure, j: u32, k: i64, n_max: u64, refinement: u32) -> Result<IndexSet> {
    let mut table = CoefficientTable::new(nu, refinement)?;
    lambda_jk_with(&mut table, j, k, n_max)
}

pub fn lambda_jk_with(
    table: &mut CoefficientTable<'_>,
    j: u32,
    k: i64,
    n_max: u64,
) -> Result<IndexSet> {
    if j == 0 || k == 0 {
        return Err(Error::precondition("lambda_jk needs j >= 1 and k != 0"));
    }
    table.ensure((1..=n_max).map(|n| n as i64 * k))?;
    let members: Vec<u64> = (1..=n_max)
        .filter(|&n| certified(&table.get(n as i64 * k).unwrap(), j))
        .collect();
    let count = members.len();
    let candidates = n_max as usize;
    let density = if candidates == 0 {
        0.0
    } else {
        count as f64 / candidates as f64
    };
    Ok(IndexSet::assemble(
        members,
        n_max,
        1,
        candidates,
        vec![Threshold {
            j,
            k,
            count,
            density,
        }],
    ))
}

/// Parameters of [`build_lambda`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaParams {
    /// Largest `|k|`.
    pub k_max: u32,
    /// Largest `j`; thresholds run over `1/1, …, 1/j_max`.
    pub j_max: u32,
    pub n_max: u64,
    /// Members are restricted to multiples of `m`.
    pub m: u64,
    /// Smallest candidate considered.
    pub n_min: u64,
    pub refinement: u32,
    /// Warn when the relative density falls below this.
    pub density_floor: f64,
}

impl Default for LambdaParams {
    fn default() -> Self {
        LambdaParams {
            k_max: 3,
            j_max: 3,
            n_max: 2000,
            m: 1,
            n_min: 1,
            refinement: DEFAULT_REFINEMENT,
            density_floor: 0.5,
        }
    }
}

/// Certified finite-horizon version of `Λ̃ = Λ ∩ mℕ`:
/// `⋂_{j ≤ J, 1 ≤ |k| ≤ K} Λ_{j,k} ∩ mℕ ∩ [n_min, n_max]`.
///
/// Negative `k` are covered by conjugate symmetry `|ν̂(−nk)| = |ν̂(nk)|`, so
/// the provenance lists `k = 1..=K`.
pub fn build_lambda(nu: &Measure, params: &LambdaParams) -> Result<IndexSet> {
    let mut table = CoefficientTable::new(nu, params.refinement)?;
    build_lambda_with(&mut table, params)
}

pub fn build_lambda_with(
    table: &mut CoefficientTable<'_>,
    params: &LambdaParams,
) -> Result<IndexSet> {
    if params.k_max == 0 || params.j_max == 0 || params.m == 0 {
        return Err(Error::precondition("build_lambda needs K, J, m >= 1"));
    }
    let atoms = table.measure().atomic_part();
    if let Some(big) = atoms.iter().max_by(|a, b| a.mass.total_cmp(&b.mass)) {
        return Err(Error::AtomicMeasure {
            count: atoms.len(),
            largest: big.mass,
            position: big.position,
        });
    }
    let first = params.n_min.max(1).div_ceil(params.m) * params.m;
    let candidates: Vec<u64> = (first..=params.n_max).step_by(params.m as usize).collect();
    let ks: Vec<i64> = (1..=params.k_max as i64).collect();
    table.ensure(
        candidates
            .iter()
            .flat_map(|&n| ks.iter().map(move |&k| n as i64 * k)),
    )?;

    let mut provenance = Vec::with_capacity((params.j_max * params.k_max) as usize);
    for j in 1..=params.j_max {
        for &k in &ks {
            let count = candidates
                .iter()
                .filter(|&&n| certified(&table.get(n as i64 * k).unwrap(), j))
                .count();
            let density = if candidates.is_empty() {
                0.0
            } else {
                count as f64 / candidates.len() as f64
            };
            provenance.push(Threshold {
                j,
                k,
                count,
                density,
            });
        }
    }
    // Λ_{j,k} shrinks as j grows, so the intersection over j is the j_max slice.
    let members: Vec<u64> = candidates
        .iter()
        .copied()
        .filter(|&n| {
            ks.iter()
                .all(|&k| certified(&table.get(n as i64 * k).unwrap(), params.j_max))
        })
        .collect();
    let mut set = IndexSet::assemble(
        members,
        params.n_max,
        params.m,
        candidates.len(),
        provenance,
    );
    if set.relative_density() < params.density_floor {
        set.warning = Some(format!(
            "relative density {:.4} below floor {}",
            set.relative_density(),
            params.density_floor
        ));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn unit() -> Interval {
        Interval { lo: 0.0, hi: 1.0 }
    }

    fn lebesgue() -> Measure {
        Measure::lebesgue(unit(), 1.0).unwrap()
    }

    fn cantor(levels: u32) -> Measure {
        Measure::cantor(unit(), levels, 1.0).unwrap()
    }

    /// `ν̂(j) = e^{−πij} ∏_{k=1}^{L} cos(2πj/3^k)` for the level-`L` Cantor
    /// measure (up to the sinc factor of its final linear pieces).
    fn cantor_product(j: i64, levels: u32) -> Complex64 {
        let mut p = 1.0;
        for k in 1..=levels {
            p *= (TAU * j as f64 / 3f64.powi(k as i32)).cos();
        }
        Complex64::from_polar(1.0, -PI * j as f64) * p
    }

    #[test]
    fn lebesgue_orthogonality() {
        let c = coefficient(&lebesgue(), 3, 16).unwrap();
        assert!(c.abs() < 1e-12);
        let c0 = coefficient(&lebesgue(), 0, 16).unwrap();
        assert!((c0.value - 1.0).norm() < 1e-12);
        assert_eq!(c0.error, 0.0);
    }

    #[test]
    fn dirac_is_unimodular() {
        let delta = Measure::atomic(unit(), &[(0.3141, 1.0)]).unwrap();
        for j in [-7, -1, 0, 1, 2, 50, 1234] {
            let c = coefficient(&delta, j, 1).unwrap();
            assert!((c.abs() - 1.0).abs() < 1e-14);
            assert_eq!(c.error, 0.0);
        }
    }

    #[test]
    fn cantor_first_coefficient_matches_product() {
        let got = coefficient(&cantor(40), 1, 10_000_000).unwrap();
        let want = cantor_product(1, 40);
        assert!(
            (got.value - want).norm() < 1e-6,
            "{} vs {}",
            got.value,
            want
        );
        assert!(got.error < 1e-6);
    }

    #[test]
    fn cantor_matches_product_within_bound() {
        let nu = cantor(40);
        for j in [2i64, 3, 5, 9, 10, 27, 100] {
            let c = coefficient(&nu, j, 64).unwrap();
            let want = cantor_product(j, 40);
            assert!((c.value - want).norm() <= c.error, "j={j}");
        }
    }

    #[test]
    fn coefficient_invariants() {
        let mix = Measure::mixture(
            unit(),
            vec![
                (0.5, cantor(40)),
                (0.25, lebesgue()),
                (
                    0.25,
                    Measure::atomic(unit(), &[(0.2, 0.5), (0.7, 0.5)]).unwrap(),
                ),
            ],
        )
        .unwrap();
        for j in 0..40i64 {
            let c = coefficient(&mix, j, 32).unwrap();
            let m = coefficient(&mix, -j, 32).unwrap();
            assert!(c.abs() <= 1.0 + c.error + 1e-12);
            assert!((m.value - c.value.conj()).norm() <= 2.0 * c.error + 1e-12);
        }
        let c0 = coefficient(&mix, 0, 32).unwrap();
        assert!((c0.value - 1.0).norm() <= c0.error + 1e-12);
    }

    #[test]
    fn refinement_too_small_is_uncertified() {
        assert!(matches!(
            coefficient(&cantor(40), 5, 2),
            Err(Error::UncertifiedCoefficient { freq: 5, .. })
        ));
    }

    #[test]
    fn rejects_non_probability() {
        let m = Measure::lebesgue(Interval { lo: 0.0, hi: 2.0 }, 1.0).unwrap();
        assert!(matches!(
            coefficient(&m, 1, 8),
            Err(Error::NotProbability { .. })
        ));
    }

    #[test]
    fn wiener_examples() {
        let delta = Measure::atomic(unit(), &[(0.77, 1.0)]).unwrap();
        assert!((wiener_average(&delta, 1, 300, 8).unwrap() - 1.0).abs() < 1e-12);

        let n = 200;
        let avg = wiener_average(&lebesgue(), 1, n, 8).unwrap();
        assert!((avg - 1.0 / (n + 1) as f64).abs() < 1e-12);
    }

    #[test]
    fn wiener_average_sees_atomic_mass() {
        // two atoms of mass 0.2: the average tends to 0.2² + 0.2².
        let mix = Measure::mixture(
            unit(),
            vec![
                (0.6, cantor(40)),
                (
                    0.4,
                    Measure::atomic(unit(), &[(0.123, 0.5), (0.61, 0.5)]).unwrap(),
                ),
            ],
        )
        .unwrap();
        let atomic: f64 = mix.atomic_part().iter().map(|a| a.mass * a.mass).sum();
        let mut table = CoefficientTable::new(&mix, 32).unwrap();
        let avgs = running_wiener_averages(&mut table, 1, 1500).unwrap();
        let floor = atomic - 0.02;
        for &a in &avgs[500..] {
            assert!(a >= floor);
        }
    }

    #[test]
    fn lambda_examples() {
        let leb = lambda_jk(&lebesgue(), 4, 2, 100, 64).unwrap();
        assert_eq!(leb.members, (1..=100).collect::<Vec<_>>());

        let delta = Measure::atomic(unit(), &[(0.4, 1.0)]).unwrap();
        assert!(lambda_jk(&delta, 2, 1, 100, 8).unwrap().is_empty());

        let lam = build_lambda(
            &lebesgue(),
            &LambdaParams {
                k_max: 5,
                j_max: 5,
                n_max: 300,
                m: 3,
                refinement: 64,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(lam.members, (1..=100).map(|i| 3 * i).collect::<Vec<_>>());
        assert_eq!(lam.relative_density(), 1.0);
        assert!(lam.warning.is_none());

        assert!(matches!(
            build_lambda(&delta, &LambdaParams::default()),
            Err(Error::AtomicMeasure { .. })
        ));
    }

    #[test]
    fn certification_is_monotone_in_refinement() {
        let nu = cantor(40);
        let coarse = lambda_jk(&nu, 3, 1, 300, 16).unwrap();
        let fine = lambda_jk(&nu, 3, 1, 300, 128).unwrap();
        for n in &coarse.members {
            assert!(fine.contains(*n), "{n} lost at higher refinement");
        }
    }

    #[test]
    fn low_density_attaches_warning() {
        let nu = cantor(40);
        let set = build_lambda(
            &nu,
            &LambdaParams {
                n_max: 30,
                refinement: 8,
                density_floor: 1.1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(set.warning.is_some());
    }
}
