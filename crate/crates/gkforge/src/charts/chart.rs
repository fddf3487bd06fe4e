use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GkError, Result};
use crate::expr::{parse, CoordSpec, ExprAst};

/// Block membership of a complex coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Kernel-of-π− block; holomorphic for both structures.
    Z,
    /// Kernel-of-π+ block; holomorphic for J+, antiholomorphic for J−.
    #[serde(rename = "zprime")]
    ZPrime,
    /// σ-leaf position `q`.
    #[serde(rename = "q")]
    LeafQ,
    /// σ-leaf momentum `P` (the `J−` side of the polarization).
    #[serde(rename = "p")]
    LeafP,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coord {
    pub name: String,
    pub role: Role,
    pub re_alias: Option<String>,
    pub im_alias: Option<String>,
}

impl Coord {
    pub fn new(name: &str, role: Role) -> Self {
        Coord {
            name: name.to_string(),
            role,
            re_alias: None,
            im_alias: None,
        }
    }

    pub fn aliased(name: &str, role: Role, re: &str, im: &str) -> Self {
        Coord {
            name: name.to_string(),
            role,
            re_alias: Some(re.to_string()),
            im_alias: Some(im.to_string()),
        }
    }
}

/// Named complex coordinates partitioned into blocks.
///
/// Complex coordinate `k` owns the real variables `2k` (real part) and
/// `2k + 1` (imaginary part).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    name: String,
    coords: Vec<Coord>,
}

impl Chart {
    pub fn new(name: &str, coords: Vec<Coord>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &coords {
            for n in std::iter::once(&c.name)
                .chain(c.re_alias.iter())
                .chain(c.im_alias.iter())
            {
                if !seen.insert(n.clone()) {
                    return Err(GkError::Precondition(format!(
                        "chart `{name}`: identifier `{n}` declared twice"
                    )));
                }
            }
        }
        let chart = Chart {
            name: name.to_string(),
            coords,
        };
        let (q, p) = (chart.block(Role::LeafQ).len(), chart.block(Role::LeafP).len());
        if q != p {
            return Err(GkError::Precondition(format!(
                "chart `{name}`: leaf block needs as many q as P coordinates ({q} vs {p})"
            )));
        }
        Ok(chart)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn complex_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn real_dim(&self) -> usize {
        2 * self.coords.len()
    }

    /// Coordinate indices with the given role, in declaration order.
    pub fn block(&self, role: Role) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, c)| c.role == role)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c.name == name)
    }

    pub fn coord_specs(&self) -> Vec<CoordSpec> {
        self.coords
            .iter()
            .map(|c| CoordSpec {
                name: c.name.clone(),
                re_alias: c.re_alias.clone(),
                im_alias: c.im_alias.clone(),
            })
            .collect()
    }

    /// Parses an expression over this chart's coordinates.
    pub fn parse(&self, text: &str) -> Result<ExprAst> {
        parse(text, &self.coord_specs())
    }

    /// `(re, im)` real-variable indices of every complex coordinate.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.coords.len()).map(|k| (2 * k, 2 * k + 1)).collect()
    }

    /// Standard complex structure; `signs[k] = +1` makes coordinate `k`
    /// holomorphic, `−1` makes its conjugate holomorphic.
    pub fn standard_structure(&self, signs: &[f64]) -> DMatrix<f64> {
        standard_structure(signs)
    }

    /// Signs of `J+` (all coordinates holomorphic).
    pub fn plus_signs(&self) -> Vec<f64> {
        vec![1.0; self.coords.len()]
    }

    /// Signs of `J−` (the z′ block is antiholomorphic).
    pub fn minus_signs(&self) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| if c.role == Role::ZPrime { -1.0 } else { 1.0 })
            .collect()
    }

    /// Complex covector `dw_k` (or `dw̄_k`) in the real basis.
    pub fn dw(&self, k: usize, conj: bool) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.real_dim()];
        v[2 * k] = Complex64::new(1.0, 0.0);
        v[2 * k + 1] = Complex64::new(0.0, if conj { -1.0 } else { 1.0 });
        v
    }

    /// Sub-chart with the coordinates of the given roles, in order.
    pub fn restrict(&self, name: &str, roles: &[Role]) -> Result<Chart> {
        Chart::new(
            name,
            self.coords
                .iter()
                .filter(|c| roles.contains(&c.role))
                .cloned()
                .collect(),
        )
    }
}

/// Block-diagonal standard structure: `J ∂x_k = s_k ∂y_k`.
pub fn standard_structure(signs: &[f64]) -> DMatrix<f64> {
    let n = 2 * signs.len();
    let mut j = DMatrix::zeros(n, n);
    for (k, &s) in signs.iter().enumerate() {
        j[(2 * k + 1, 2 * k)] = s;
        j[(2 * k, 2 * k + 1)] = -s;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_blocks() {
        let c = Chart::new(
            "c",
            vec![
                Coord::new("z", Role::Z),
                Coord::new("zp", Role::ZPrime),
                Coord::new("q", Role::LeafQ),
                Coord::new("P", Role::LeafP),
            ],
        )
        .unwrap();
        assert_eq!(c.real_dim(), 8);
        assert_eq!(c.block(Role::ZPrime), vec![1]);
        assert_eq!(c.minus_signs(), vec![1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn unbalanced_leaf_is_rejected() {
        assert!(Chart::new("c", vec![Coord::new("q", Role::LeafQ)]).is_err());
        assert!(Chart::new(
            "c",
            vec![Coord::new("z", Role::Z), Coord::new("z", Role::ZPrime)]
        )
        .is_err());
    }

    #[test]
    fn standard_structure_squares_to_minus_one_and_dz_is_10() {
        let j = standard_structure(&[1.0, -1.0]);
        let sq = &j * &j + DMatrix::identity(4, 4);
        assert!(sq.iter().all(|x| x.abs() < 1e-15));
        let c = Chart::new("c", vec![Coord::new("z", Role::Z)]).unwrap();
        let dz = c.dw(0, false);
        let j = c.standard_structure(&[1.0]);
        // dz ∘ J = i dz
        for col in 0..2 {
            let lhs: Complex64 = (0..2).map(|a| dz[a] * j[(a, col)]).sum();
            assert!((lhs - Complex64::i() * dz[col]).norm() < 1e-15);
        }
    }
}
