//! Chart-local tensor fields with expression components.

use std::collections::HashMap;
use std::sync::Arc;

use super::chart::Chart;
use super::forms::exterior_d;
use super::tensor::{JetTensor, Tensor};
use crate::error::{GkError, Result};
use crate::expr::{ExprAst, Jet, JetSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Symmetric,
    Antisymmetric,
}

#[derive(Clone, Debug)]
pub enum Component {
    Const(f64),
    Expr(Arc<ExprAst>),
}

/// Evaluation point plus cached component jets.
pub struct PointFrame {
    point: Vec<f64>,
    order: usize,
    space: Arc<JetSpace>,
    cache: HashMap<String, Jet>,
}

impl PointFrame {
    pub fn new(point: &[f64], order: usize) -> Result<Self> {
        Ok(PointFrame {
            point: point.to_vec(),
            order,
            space: JetSpace::new(point.len(), order)?,
            cache: HashMap::new(),
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    /// Jet of an expression's real part, cached by its canonical text.
    pub fn jet(&mut self, e: &ExprAst) -> Result<Jet> {
        let key = e.to_text();
        if let Some(j) = self.cache.get(&key) {
            return Ok(j.clone());
        }
        let j = e.eval_jet_in(&self.space, &self.point, self.order)?;
        self.cache.insert(key, j.clone());
        Ok(j)
    }
}

/// Tensor of valence `(up, down)` over the real coordinates of a chart.
///
/// Components are stored row-major over `up + down` slots, contravariant
/// slots first.
#[derive(Clone, Debug)]
pub struct TensorField {
    chart: Arc<Chart>,
    up: usize,
    down: usize,
    symmetry: Symmetry,
    components: Vec<Component>,
}

impl TensorField {
    pub fn new(
        chart: Arc<Chart>,
        valence: (usize, usize),
        symmetry: Symmetry,
        components: Vec<Component>,
    ) -> Result<Self> {
        let n = chart.real_dim();
        let rank = valence.0 + valence.1;
        let expected = n.pow(rank as u32);
        if components.len() != expected {
            return Err(GkError::Dimension {
                expected,
                got: components.len(),
            });
        }
        if symmetry != Symmetry::None && rank != 2 {
            return Err(GkError::Precondition(format!(
                "symmetry tags apply to rank-2 fields, got rank {rank}"
            )));
        }
        for c in &components {
            if let Component::Expr(e) = c {
                if e.nvars() != n {
                    return Err(GkError::Dimension {
                        expected: n,
                        got: e.nvars(),
                    });
                }
            }
        }
        Ok(TensorField {
            chart,
            up: valence.0,
            down: valence.1,
            symmetry,
            components,
        })
    }

    /// Parses one expression per component over the chart's coordinates.
    pub fn parse(
        chart: Arc<Chart>,
        valence: (usize, usize),
        symmetry: Symmetry,
        texts: &[&str],
    ) -> Result<Self> {
        let comps = texts
            .iter()
            .map(|t| chart.parse(t).map(|e| Component::Expr(Arc::new(e))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(chart, valence, symmetry, comps)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn valence(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Component jets at the frame's point; the symmetry tag is verified.
    pub fn jets(&self, frame: &mut PointFrame) -> Result<JetTensor> {
        let n = self.chart.real_dim();
        if frame.point().len() != n {
            return Err(GkError::Dimension {
                expected: n,
                got: frame.point().len(),
            });
        }
        let order = frame.order();
        let mut es = Vec::with_capacity(self.components.len());
        for c in &self.components {
            es.push(match c {
                Component::Const(v) => Jet::constant(frame.space(), order, *v),
                Component::Expr(e) => frame.jet(e)?,
            });
        }
        let mut it = es.into_iter();
        let t = JetTensor::from_fn(n, self.up + self.down, |_| it.next().expect("shape checked"));
        self.check_symmetry(&t.value())?;
        Ok(t)
    }

    /// Component values at a point.
    pub fn value(&self, point: &[f64]) -> Result<Tensor> {
        let mut frame = PointFrame::new(point, 0)?;
        Ok(self.jets(&mut frame)?.value())
    }

    fn check_symmetry(&self, v: &Tensor) -> Result<()> {
        let sign = match self.symmetry {
            Symmetry::None => return Ok(()),
            Symmetry::Symmetric => 1.0,
            Symmetry::Antisymmetric => -1.0,
        };
        let n = v.dim();
        let scale = v.max_abs().max(1.0);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((v.get(&[i, j]) - sign * v.get(&[j, i])).abs());
            }
        }
        if worst > 1e-12 * scale {
            return Err(GkError::InvalidStructure {
                what: format!("declared {:?} symmetry fails", self.symmetry).to_lowercase(),
                residual: worst,
            });
        }
        Ok(())
    }

    /// `dα` of a `(0,k)` form at the frame's point.
    pub fn exterior_d(&self, frame: &mut PointFrame) -> Result<Tensor> {
        if self.up != 0 {
            return Err(GkError::Precondition(format!(
                "exterior derivative needs a covariant field, got valence ({}, {})",
                self.up, self.down
            )));
        }
        Ok(exterior_d(&self.jets(frame)?)?.value())
    }
}
