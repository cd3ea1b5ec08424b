use serde::{Deserialize, Serialize};

/// Declarative description of a measure, mirrored one-to-one by the JSON
/// measure-spec file format.
///
/// ```json
/// {"kind": "cantor", "domain": [0.0, 1.0], "levels": 40, "total": 1.0}
/// {"kind": "mixture", "domain": [0.0, 6.283185307179586],
///  "components": [[0.6, {"kind": "cantor", ...}], [0.4, {"kind": "lebesgue", ...}]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(flatten)]
    pub kind: MeasureKind,
    pub domain: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    /// `scale` times Lebesgue measure.
    Lebesgue { scale: f64 },
    /// Point masses as `[position, mass]` pairs.
    Atomic { atoms: Vec<[f64; 2]> },
    /// Level-`levels` approximation of the Cantor measure stretched over
    /// the domain, with total mass `total`.
    Cantor { levels: u32, total: f64 },
    /// Piecewise-linear CDF through `[x, F]` knots. A repeated `x` encodes a
    /// jump; `F` at the first knot is an atom at the left endpoint.
    CdfTable { table: Vec<[f64; 2]> },
    /// Weighted sum of `[weight, spec]` components.
    Mixture { components: Vec<(f64, MeasureSpec)> },
}

impl MeasureSpec {
    pub fn lebesgue(domain: [f64; 2], scale: f64) -> Self {
        MeasureSpec {
            kind: MeasureKind::Lebesgue { scale },
            domain,
        }
    }

    pub fn atomic(domain: [f64; 2], atoms: &[(f64, f64)]) -> Self {
        MeasureSpec {
            kind: MeasureKind::Atomic {
                atoms: atoms.iter().map(|&(x, m)| [x, m]).collect(),
            },
            domain,
        }
    }

    pub fn cantor(domain: [f64; 2], levels: u32, total: f64) -> Self {
        MeasureSpec {
            kind: MeasureKind::Cantor { levels, total },
            domain,
        }
    }

    pub fn cdf_table(domain: [f64; 2], table: &[(f64, f64)]) -> Self {
        MeasureSpec {
            kind: MeasureKind::CdfTable {
                table: table.iter().map(|&(x, f)| [x, f]).collect(),
            },
            domain,
        }
    }

    pub fn mixture(domain: [f64; 2], components: Vec<(f64, MeasureSpec)>) -> Self {
        MeasureSpec {
            kind: MeasureKind::Mixture { components },
            domain,
        }
    }
}
