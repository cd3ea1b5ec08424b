//! M-sets `A_n = ⋃_k [a + (k+σ)(b−a)/n, a + (k+σ+τ)(b−a)/n]`, their masses,
//! and the circle pushforwards `P_n = ν ∘ F_n⁻¹` of `F_n(x) = e^{2πinx}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::IndexSet;
use crate::interval::{AffineMap, Interval};
use crate::measure::Measure;

/// The data `(I, n, σ, τ)` of an M-set.
///
/// Construction accepts the closed range `σ ≥ 0, σ + τ ≤ 1` because corrector
/// layouts produce blocks touching their right end; [`MSetSpec::is_strict`]
/// reports whether the open hypothesis `σ > 0, σ + τ < 1` holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MSetSpec {
    pub interval: Interval,
    pub n: u64,
    pub sigma: f64,
    pub tau: f64,
}

impl MSetSpec {
    pub fn new(interval: Interval, n: u64, sigma: f64, tau: f64) -> Result<Self> {
        let spec = MSetSpec {
            interval,
            n,
            sigma,
            tau,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::precondition("M-set needs n >= 1"));
        }
        if !(self.sigma >= 0.0 && self.tau > 0.0 && self.sigma + self.tau <= 1.0) {
            return Err(Error::precondition(format!(
                "M-set needs sigma >= 0, tau > 0, sigma + tau <= 1 (got sigma={}, tau={})",
                self.sigma, self.tau
            )));
        }
        if !(self.interval.len() > 0.0) {
            return Err(Error::precondition(
                "M-set interval must have positive length",
            ));
        }
        Ok(())
    }

    pub fn is_strict(&self) -> bool {
        self.sigma > 0.0 && self.sigma + self.tau < 1.0
    }
}

/// The arc `{e^{2πit} : t ∈ [σ, σ+τ]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcSpec {
    pub sigma: f64,
    pub tau: f64,
}

impl ArcSpec {
    pub fn new(sigma: f64, tau: f64) -> Result<Self> {
        if !(sigma >= 0.0 && tau > 0.0 && sigma + tau <= 1.0) {
            return Err(Error::precondition(format!(
                "bad arc sigma={sigma}, tau={tau}"
            )));
        }
        Ok(ArcSpec { sigma, tau })
    }
}

/// The `n` closed intervals of the M-set, in order.
pub fn mset_intervals(spec: &MSetSpec) -> Result<Vec<Interval>> {
    spec.validate()?;
    let map = AffineMap::onto(spec.interval);
    Ok(unit_blocks(spec.n, spec.sigma, spec.tau)
        .map(|(s, t)| Interval {
            lo: map.apply(s),
            hi: map.apply(t),
        })
        .collect())
}

/// `[(k+σ)/n, (k+σ+τ)/n]` for `k = 0..n`, as fractions of the unit interval.
fn unit_blocks(n: u64, sigma: f64, tau: f64) -> impl Iterator<Item = (f64, f64)> {
    let nf = n as f64;
    (0..n).map(move |k| {
        let k = k as f64;
        ((k + sigma) / nf, (k + sigma + tau) / nf)
    })
}

/// `μ(A_n)`.
pub fn mset_mass(mu: &Measure, spec: &MSetSpec) -> Result<f64> {
    spec.validate()?;
    let dom = mu.domain();
    if !dom.contains_interval(&spec.interval) {
        return Err(Error::OutsideDomain {
            lo: spec.interval.lo,
            hi: spec.interval.hi,
            u: dom.lo,
            v: dom.hi,
        });
    }
    let map = AffineMap::onto(spec.interval);
    Ok(unit_blocks(spec.n, spec.sigma, spec.tau)
        .map(|(s, t)| mu.mass_unchecked(map.apply(s), map.apply(t)))
        .sum())
}

/// `P_n(E) = ν(F_n⁻¹(E)) = ν(B_n)` with `B_n = {x : (nx) ∈ [σ, σ+τ]}`.
pub fn pushforward_arc_mass(nu: &Measure, n: u64, arc: &ArcSpec) -> Result<f64> {
    if n == 0 {
        return Err(Error::precondition("pushforward needs n >= 1"));
    }
    if !nu.is_probability_on_unit() {
        let d = nu.domain();
        return Err(Error::NotProbability {
            u: d.lo,
            v: d.hi,
            mass: nu.total_mass(),
        });
    }
    Ok(unit_blocks(n, arc.sigma, arc.tau)
        .map(|(s, t)| nu.mass_unchecked(s, t.min(1.0)))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: u64,
    pub mass: f64,
    pub error: f64,
}

/// `μ(A_n)` against the limit `τ μ(I)` along an index set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub target: f64,
    pub rows: Vec<ScanRow>,
    /// Largest error over the last quarter (by count) of the rows.
    pub tail_sup: f64,
    /// Whether `σ > 0` and `σ + τ < 1`.
    pub strict: bool,
}

pub fn proposition_scan(
    mu: &Measure,
    interval: Interval,
    sigma: f64,
    tau: f64,
    lambda: &IndexSet,
) -> Result<ConvergenceTable> {
    if lambda.is_empty() {
        return Err(Error::EmptyIndexSet(format!(
            "no certified n up to horizon {}",
            lambda.horizon
        )));
    }
    let probe = MSetSpec::new(interval, 1, sigma, tau)?;
    let target = tau * mu.interval_mass(interval.lo, interval.hi)?;
    let rows = lambda
        .members
        .par_iter()
        .map(|&n| {
            let mass = mset_mass(mu, &MSetSpec { n, ..probe })?;
            Ok(ScanRow {
                n,
                mass,
                error: (mass - target).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = rows.len().div_ceil(4);
    let tail_sup = rows[rows.len() - tail..]
        .iter()
        .map(|r| r.error)
        .fold(0.0, f64::max);
    Ok(ConvergenceTable {
        target,
        rows,
        tail_sup,
        strict: probe.is_strict(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    #[test]
    fn interval_examples() {
        let two = mset_intervals(&MSetSpec::new(iv(0.0, 1.0), 2, 0.25, 0.5).unwrap()).unwrap();
        assert_eq!(two, vec![iv(0.125, 0.375), iv(0.625, 0.875)]);

        let one = mset_intervals(&MSetSpec::new(iv(0.0, 1.0), 1, 0.1, 0.8).unwrap()).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].lo - 0.1).abs() < 1e-15 && (one[0].hi - 0.9).abs() < 1e-15);

        let four = mset_intervals(&MSetSpec::new(iv(2.0, 4.0), 4, 0.5, 0.25).unwrap()).unwrap();
        assert_eq!(four[0], iv(2.25, 2.375));
    }

    #[test]
    fn spec_validation() {
        assert!(MSetSpec::new(iv(0.0, 1.0), 0, 0.1, 0.2).is_err());
        assert!(MSetSpec::new(iv(0.0, 1.0), 3, 0.6, 0.5).is_err());
        assert!(MSetSpec::new(iv(0.0, 1.0), 3, 0.1, 0.0).is_err());
        let boundary = MSetSpec::new(iv(0.0, 1.0), 3, 0.0, 1.0).unwrap();
        assert!(!boundary.is_strict());
        assert!(MSetSpec::new(iv(0.0, 1.0), 3, 0.2, 0.3)
            .unwrap()
            .is_strict());
    }

    #[test]
    fn mass_examples() {
        let cantor = Measure::cantor(iv(0.0, 1.0), 40, 1.0).unwrap();
        let m = mset_mass(
            &cantor,
            &MSetSpec::new(iv(0.0, 1.0), 27, 1e-9, 0.5).unwrap(),
        )
        .unwrap();
        // x ↦ 27x mod 1 preserves the Cantor measure, so μ(A_27) = μ_C([σ, σ + 1/2]).
        let oracle = cantor.cdf(1e-9 + 0.5) - cantor.cdf(1e-9);
        assert!((m - oracle).abs() < 1e-9);
        assert!((m - 0.5).abs() < 1e-3);

        let atom = Measure::atomic(iv(0.0, 1.0), &[(0.5, 1.0)]).unwrap();
        assert_eq!(
            mset_mass(&atom, &MSetSpec::new(iv(0.0, 1.0), 1, 0.25, 0.5).unwrap()).unwrap(),
            1.0
        );
    }

    #[test]
    fn pushforward_examples() {
        let leb = Measure::lebesgue(iv(0.0, 1.0), 1.0).unwrap();
        for n in [1, 2, 7, 100] {
            let p = pushforward_arc_mass(&leb, n, &ArcSpec::new(0.3, 0.45).unwrap()).unwrap();
            assert!((p - 0.45).abs() < 1e-12);
        }
        let cantor = Measure::cantor(iv(0.0, 1.0), 40, 1.0).unwrap();
        let arc = ArcSpec::new(0.25, 0.5).unwrap();
        let p1 = pushforward_arc_mass(&cantor, 1, &arc).unwrap();
        assert_eq!(p1, cantor.interval_mass(0.25, 0.75).unwrap());

        let p9 = pushforward_arc_mass(&cantor, 9, &arc).unwrap();
        let direct =
            mset_mass(&cantor, &MSetSpec::new(iv(0.0, 1.0), 9, 0.25, 0.5).unwrap()).unwrap();
        assert!((p9 - direct).abs() < 1e-12);
    }

    #[test]
    fn scan_on_lebesgue_is_exact() {
        let leb = Measure::lebesgue(iv(0.0, TWO_PI), 1.0).unwrap();
        let lambda = crate::fourier::build_lambda(
            &leb.normalize(iv(1.0, 4.0)).unwrap(),
            &crate::fourier::LambdaParams {
                n_max: 200,
                refinement: 64,
                ..Default::default()
            },
        )
        .unwrap();
        let table = proposition_scan(&leb, iv(1.0, 4.0), 0.2, 0.3, &lambda).unwrap();
        assert_eq!(table.rows.len(), 200);
        assert!(table.rows.iter().all(|r| r.error < 1e-12));
    }

    #[test]
    fn scan_rejects_empty_index_set() {
        let leb = Measure::lebesgue(iv(0.0, 1.0), 1.0).unwrap();
        let empty = IndexSet {
            members: vec![],
            horizon: 10,
            density: 0.0,
            step: 1,
            candidates: 10,
            provenance: vec![],
            warning: None,
        };
        assert!(matches!(
            proposition_scan(&leb, iv(0.0, 1.0), 0.2, 0.3, &empty),
            Err(Error::EmptyIndexSet(_))
        ));
    }

    proptest! {
        #[test]
        fn intervals_are_disjoint_and_fill_tau(
            lo in 0.0f64..3.0, len in 0.01f64..3.0, n in 1u64..400,
            sigma in 0.001f64..0.5, frac in 0.01f64..0.99,
        ) {
            let tau = (1.0 - sigma) * frac;
            let spec = MSetSpec::new(iv(lo, lo + len), n, sigma, tau).unwrap();
            let ivs = mset_intervals(&spec).unwrap();
            prop_assert_eq!(ivs.len() as u64, n);
            let total: f64 = ivs.iter().map(|i| i.len()).sum();
            prop_assert!((total - tau * len).abs() <= 1e-12 * (1.0 + lo + len));
            for w in ivs.windows(2) {
                prop_assert!(w[0].hi < w[1].lo);
            }
            prop_assert!(ivs[0].lo >= lo && ivs[ivs.len() - 1].hi <= lo + len);
        }

        #[test]
        fn mass_is_monotone_in_tau(n in 1u64..200, sigma in 0.0f64..0.4, t1 in 0.01f64..0.6, t2 in 0.01f64..0.6) {
            let cantor = Measure::cantor(iv(0.0, 1.0), 40, 1.0).unwrap();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = mset_mass(&cantor, &MSetSpec::new(iv(0.0, 1.0), n, sigma, lo).unwrap()).unwrap();
            let b = mset_mass(&cantor, &MSetSpec::new(iv(0.0, 1.0), n, sigma, hi).unwrap()).unwrap();
            prop_assert!(a <= b + 1e-15);
        }
    }
}
