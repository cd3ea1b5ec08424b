//! Finite positive Borel measures on a closed interval, represented through
//! their cumulative distribution function.
//!
//! Masses follow the closed-interval convention
//! `μ([a, b]) = F(b) − F(a⁻)`, so atoms sitting on an endpoint are counted.

mod spec;

use std::sync::Arc;

use serde::Serialize;

pub use spec::{MeasureKind, MeasureSpec};

use crate::error::{Error, Result};
use crate::interval::{AffineMap, Interval};

/// Jumps at or below `DEFAULT_ATOM_TOLERANCE * total_mass` are not reported
/// as atoms.
pub const DEFAULT_ATOM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

/// An immutable finite measure on `domain`.
#[derive(Debug, Clone)]
pub struct Measure {
    domain: Interval,
    total: f64,
    atoms: Vec<Atom>,
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Lebesgue {
        density: f64,
    },
    Atomic {
        positions: Vec<f64>,
        // prefix[i] = mass of the first i atoms
        prefix: Vec<f64>,
    },
    Cantor {
        levels: u32,
    },
    Table(Table),
    Mixture(Vec<(f64, Measure)>),
    Normalized(Arc<Normalized>),
}

/// Knots of a tabulated CDF: `left[i] = F(x_i⁻)`, `right[i] = F(x_i)`, and
/// `cont[i]` the continuous part accumulated up to `x_i`.
#[derive(Debug, Clone)]
struct Table {
    xs: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    cont: Vec<f64>,
}

#[derive(Debug)]
struct Normalized {
    base: Measure,
    map: AffineMap,
    below: f64,
    below_cont: f64,
    inv_mass: f64,
}

/// Level-`levels` devil's staircase on `[0, 1]`: exact on every removed
/// middle third up to that level, linear inside the surviving intervals.
pub fn cantor_cdf(t: f64, levels: u32) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let mut t = t;
    let mut acc = 0.0;
    let mut weight = 1.0;
    for _ in 0..levels {
        let s = 3.0 * t;
        if s < 1.0 {
            t = s;
        } else if s <= 2.0 {
            return acc + 0.5 * weight;
        } else {
            acc += 0.5 * weight;
            t = s - 2.0;
        }
        weight *= 0.5;
    }
    acc + weight * t
}

impl Measure {
    /// Builds a measure from its declarative spec, validating every invariant.
    pub fn from_spec(spec: &MeasureSpec) -> Result<Measure> {
        let [u, v] = spec.domain;
        if !(u.is_finite() && v.is_finite() && u < v) {
            return Err(Error::measure(format!(
                "domain [{u}, {v}] is not a proper interval"
            )));
        }
        let domain = Interval { lo: u, hi: v };
        match &spec.kind {
            MeasureKind::Lebesgue { scale } => Self::lebesgue(domain, *scale),
            MeasureKind::Atomic { atoms } => {
                let atoms: Vec<(f64, f64)> = atoms.iter().map(|a| (a[0], a[1])).collect();
                Self::atomic(domain, &atoms)
            }
            MeasureKind::Cantor { levels, total } => Self::cantor(domain, *levels, *total),
            MeasureKind::CdfTable { table } => {
                let table: Vec<(f64, f64)> = table.iter().map(|k| (k[0], k[1])).collect();
                Self::cdf_table(domain, &table)
            }
            MeasureKind::Mixture { components } => {
                let built = components
                    .iter()
                    .map(|(w, s)| Ok((*w, Measure::from_spec(s)?)))
                    .collect::<Result<Vec<_>>>()?;
                Self::mixture(domain, built)
            }
        }
    }

    pub fn lebesgue(domain: Interval, scale: f64) -> Result<Measure> {
        if !(scale.is_finite() && scale > 0.0) || domain.len() <= 0.0 {
            return Err(Error::measure(format!(
                "lebesgue scale {scale} must be positive"
            )));
        }
        Ok(Measure {
            domain,
            total: scale * domain.len(),
            atoms: Vec::new(),
            repr: Repr::Lebesgue { density: scale },
        })
    }

    pub fn atomic(domain: Interval, atoms: &[(f64, f64)]) -> Result<Measure> {
        if atoms.is_empty() {
            return Err(Error::measure("atomic measure needs at least one atom"));
        }
        let mut list = Vec::with_capacity(atoms.len());
        for &(position, mass) in atoms {
            if !domain.contains(position) {
                return Err(Error::measure(format!(
                    "atom at {position} lies outside [{}, {}]",
                    domain.lo, domain.hi
                )));
            }
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::measure(format!("atom mass {mass} must be positive")));
            }
            list.push(Atom { position, mass });
        }
        let atoms = merge_atoms(list);
        let positions: Vec<f64> = atoms.iter().map(|a| a.position).collect();
        let mut prefix = Vec::with_capacity(atoms.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for a in &atoms {
            acc += a.mass;
            prefix.push(acc);
        }
        Ok(Measure {
            domain,
            total: acc,
            atoms,
            repr: Repr::Atomic { positions, prefix },
        })
    }

    pub fn cantor(domain: Interval, levels: u32, total: f64) -> Result<Measure> {
        if levels == 0 {
            return Err(Error::measure("cantor measure needs at least one level"));
        }
        if !(total.is_finite() && total > 0.0) || domain.len() <= 0.0 {
            return Err(Error::measure(format!(
                "cantor total {total} must be positive"
            )));
        }
        Ok(Measure {
            domain,
            total,
            atoms: Vec::new(),
            repr: Repr::Cantor { levels },
        })
    }

    pub fn cdf_table(domain: Interval, table: &[(f64, f64)]) -> Result<Measure> {
        if table.len() < 2 {
            return Err(Error::measure("cdf table needs at least two knots"));
        }
        if table[0].0 != domain.lo || table[table.len() - 1].0 != domain.hi {
            return Err(Error::measure(
                "cdf table must start at the domain's left end and stop at its right end",
            ));
        }
        let mut prev = (f64::NEG_INFINITY, 0.0);
        for (i, &(x, f)) in table.iter().enumerate() {
            if !(x.is_finite() && f.is_finite()) {
                return Err(Error::measure(format!(
                    "non-finite cdf table entry at index {i}"
                )));
            }
            if x < prev.0 {
                return Err(Error::measure(format!(
                    "cdf table abscissae decrease at index {i}"
                )));
            }
            if f < prev.1 {
                return Err(Error::measure(format!(
                    "cdf table is non-monotone at index {i}"
                )));
            }
            prev = (x, f);
        }

        let mut xs: Vec<f64> = Vec::new();
        let mut left: Vec<f64> = Vec::new();
        let mut right: Vec<f64> = Vec::new();
        for &(x, f) in table {
            if xs.last() == Some(&x) {
                *right.last_mut().unwrap() = f;
            } else {
                xs.push(x);
                left.push(if xs.len() == 1 { 0.0 } else { f });
                right.push(f);
            }
        }
        if xs.len() < 2 {
            return Err(Error::measure("cdf table must span a proper interval"));
        }
        let total = *right.last().unwrap();
        if total <= 0.0 {
            return Err(Error::measure("cdf table carries no mass"));
        }
        let mut cont = vec![0.0; xs.len()];
        let mut atoms = Vec::new();
        for i in 0..xs.len() {
            if i > 0 {
                cont[i] = cont[i - 1] + (left[i] - right[i - 1]);
            }
            let jump = right[i] - left[i];
            if jump > 0.0 {
                atoms.push(Atom {
                    position: xs[i],
                    mass: jump,
                });
            }
        }
        Ok(Measure {
            domain,
            total,
            atoms,
            repr: Repr::Table(Table {
                xs,
                left,
                right,
                cont,
            }),
        })
    }

    pub fn mixture(domain: Interval, components: Vec<(f64, Measure)>) -> Result<Measure> {
        if components.is_empty() {
            return Err(Error::measure("mixture needs at least one component"));
        }
        let mut total = 0.0;
        let mut atoms = Vec::new();
        for (w, m) in &components {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::measure(format!(
                    "mixture weight {w} must be positive"
                )));
            }
            if !domain.contains_interval(&m.domain) {
                return Err(Error::measure(
                    "mixture component domain exceeds the mixture domain",
                ));
            }
            total += w * m.total;
            atoms.extend(m.atoms.iter().map(|a| Atom {
                position: a.position,
                mass: w * a.mass,
            }));
        }
        Ok(Measure {
            domain,
            total,
            atoms: merge_atoms(atoms),
            repr: Repr::Mixture(components),
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// `F(x) = μ([u, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.domain.lo {
            return 0.0;
        }
        if x >= self.domain.hi {
            return self.total;
        }
        match &self.repr {
            Repr::Lebesgue { density } => density * (x - self.domain.lo),
            Repr::Atomic { positions, prefix } => prefix[positions.partition_point(|&p| p <= x)],
            Repr::Cantor { levels } => self.total * cantor_cdf(self.unit(x), *levels),
            Repr::Table(t) => t.cdf(x),
            Repr::Mixture(parts) => parts.iter().map(|(w, m)| w * m.cdf(x)).sum(),
            Repr::Normalized(n) => ((n.base.cdf(n.map.apply(x)) - n.below) * n.inv_mass).max(0.0),
        }
    }

    /// `F(x⁻) = μ([u, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= self.domain.lo {
            return 0.0;
        }
        if x > self.domain.hi {
            return self.total;
        }
        match &self.repr {
            Repr::Lebesgue { .. } | Repr::Cantor { .. } => self.cdf(x),
            Repr::Atomic { positions, prefix } => prefix[positions.partition_point(|&p| p < x)],
            Repr::Table(t) => t.cdf_left(x),
            Repr::Mixture(parts) => parts.iter().map(|(w, m)| w * m.cdf_left(x)).sum(),
            Repr::Normalized(n) => {
                ((n.base.cdf_left(n.map.apply(x)) - n.below) * n.inv_mass).max(0.0)
            }
        }
    }

    /// CDF of the continuous (atom-free) part, clamped to the domain.
    pub fn continuous_cdf(&self, x: f64) -> f64 {
        let x = x.clamp(self.domain.lo, self.domain.hi);
        match &self.repr {
            Repr::Lebesgue { density } => density * (x - self.domain.lo),
            Repr::Atomic { .. } => 0.0,
            Repr::Cantor { levels } => self.total * cantor_cdf(self.unit(x), *levels),
            Repr::Table(t) => t.continuous(x),
            Repr::Mixture(parts) => parts.iter().map(|(w, m)| w * m.continuous_cdf(x)).sum(),
            Repr::Normalized(n) => {
                (n.base.continuous_cdf(n.map.apply(x)) - n.below_cont) * n.inv_mass
            }
        }
    }

    /// Mass of the continuous part, `μ_c(domain)`.
    pub fn continuous_mass(&self) -> f64 {
        self.continuous_cdf(self.domain.hi) - self.continuous_cdf(self.domain.lo)
    }

    /// `F(x) − F(x⁻)`.
    pub fn jump(&self, x: f64) -> f64 {
        (self.cdf(x) - self.cdf_left(x)).max(0.0)
    }

    /// Closed-interval mass `μ([a, b]) = F(b) − F(a⁻)`.
    ///
    /// Endpoints within a relative `1e-12` of the domain are clamped onto it;
    /// anything further out is an error.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        let slack = 1e-12 * (1.0 + self.domain.lo.abs().max(self.domain.hi.abs()));
        if !(a <= b) || a < self.domain.lo - slack || b > self.domain.hi + slack {
            return Err(Error::OutsideDomain {
                lo: a,
                hi: b,
                u: self.domain.lo,
                v: self.domain.hi,
            });
        }
        let a = a.max(self.domain.lo);
        let b = b.min(self.domain.hi);
        Ok(self.mass_unchecked(a, b))
    }

    pub(crate) fn mass_unchecked(&self, a: f64, b: f64) -> f64 {
        match &self.repr {
            Repr::Normalized(n) => {
                n.base.mass_unchecked(n.map.apply(a), n.map.apply(b)) * n.inv_mass
            }
            _ => (self.cdf(b) - self.cdf_left(a)).max(0.0),
        }
    }

    /// The probability measure `ν(E) = μ(ℓ(E) ∩ I) / μ(I)` on `[0, 1]`, where
    /// `ℓ` maps `[0, 1]` affinely onto `window`.
    pub fn normalize(&self, window: Interval) -> Result<Measure> {
        let mass = self.interval_mass(window.lo, window.hi)?;
        let window = Interval {
            lo: window.lo.max(self.domain.lo),
            hi: window.hi.min(self.domain.hi),
        };
        if !(mass > 0.0) || window.len() <= 0.0 {
            return Err(Error::DegenerateNormalization {
                lo: window.lo,
                hi: window.hi,
            });
        }
        let inv_mass = 1.0 / mass;
        let atoms = self
            .atoms
            .iter()
            .filter(|a| window.contains(a.position))
            .map(|a| Atom {
                position: ((a.position - window.lo) / window.len()).clamp(0.0, 1.0),
                mass: a.mass * inv_mass,
            })
            .collect();
        let normalized = Normalized {
            base: self.clone(),
            map: AffineMap::onto(window),
            below: self.cdf_left(window.lo),
            below_cont: self.continuous_cdf(window.lo),
            inv_mass,
        };
        Ok(Measure {
            domain: Interval { lo: 0.0, hi: 1.0 },
            total: 1.0,
            atoms,
            repr: Repr::Normalized(Arc::new(normalized)),
        })
    }

    /// Atoms whose jump exceeds `DEFAULT_ATOM_TOLERANCE * total_mass`,
    /// sorted by position.
    pub fn atomic_part(&self) -> Vec<Atom> {
        self.atomic_part_with_tolerance(DEFAULT_ATOM_TOLERANCE * self.total)
    }

    pub fn atomic_part_with_tolerance(&self, tolerance: f64) -> Vec<Atom> {
        self.atoms
            .iter()
            .filter(|a| a.mass > tolerance)
            .copied()
            .collect()
    }

    pub fn is_non_atomic(&self) -> bool {
        self.atomic_part().is_empty()
    }

    pub fn is_probability_on_unit(&self) -> bool {
        self.domain.lo == 0.0 && self.domain.hi == 1.0 && (self.total - 1.0).abs() <= 1e-9
    }

    fn unit(&self, x: f64) -> f64 {
        (x - self.domain.lo) / self.domain.len()
    }
}

impl Table {
    fn interp(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (f0, f1) = (self.right[i], self.left[i + 1]);
        f0 + (f1 - f0) * ((x - x0) / (x1 - x0))
    }

    fn cdf(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&k| k <= x);
        if i == 0 {
            return 0.0;
        }
        let i = i - 1;
        if self.xs[i] == x || i + 1 == self.xs.len() {
            self.right[i]
        } else {
            self.interp(i, x)
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let j = self.xs.partition_point(|&k| k < x);
        if j == self.xs.len() {
            return self.right[j - 1];
        }
        if self.xs[j] == x {
            return self.left[j];
        }
        if j == 0 {
            return 0.0;
        }
        self.interp(j - 1, x)
    }

    fn continuous(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&k| k <= x);
        if i == 0 {
            return 0.0;
        }
        let i = i - 1;
        if i + 1 == self.xs.len() {
            return self.cont[i];
        }
        let frac = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.cont[i] + (self.left[i + 1] - self.right[i]) * frac
    }
}

fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match merged.last_mut() {
            Some(last) if last.position == a.position => last.mass += a.mass,
            _ => merged.push(a),
        }
    }
    merged
}
