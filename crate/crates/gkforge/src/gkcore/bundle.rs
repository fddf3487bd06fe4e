use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::charts::{dc_jets, dc_project, exterior_d, Chart, JetTensor, PointFrame, Tensor, TensorField};
use crate::error::{GkError, Result};

/// Raw fields of a bundle at one point, as jets of order ≥ 2 sharing one space.
#[derive(Clone, Debug)]
pub struct PointFields {
    pub j_plus: JetTensor,
    pub j_minus: JetTensor,
    pub g: JetTensor,
    /// Independently supplied torsion 3-form, order ≥ 1.
    pub h: Option<JetTensor>,
    /// Builder-specific side data (e.g. `Omega`), as values.
    pub extras: BTreeMap<String, Tensor>,
}

/// Anything that can produce `J±`, `g` (and optionally `H`) at a point.
pub trait FieldSource: Send + Sync {
    fn fields(&self, point: &[f64]) -> Result<PointFields>;
}

/// Fields given directly as expression tensors on a chart.
pub struct FieldSet {
    pub j_plus: TensorField,
    pub j_minus: TensorField,
    pub g: TensorField,
    pub h: Option<TensorField>,
}

impl FieldSource for FieldSet {
    fn fields(&self, point: &[f64]) -> Result<PointFields> {
        let mut frame = PointFrame::new(point, 2)?;
        Ok(PointFields {
            j_plus: self.j_plus.jets(&mut frame)?,
            j_minus: self.j_minus.jets(&mut frame)?,
            g: self.g.jets(&mut frame)?,
            h: self.h.as_ref().map(|h| h.jets(&mut frame)).transpose()?,
            extras: BTreeMap::new(),
        })
    }
}

/// `(M, J±, g, H)` on a chart, evaluated lazily per point.
#[derive(Clone)]
pub struct StructureBundle {
    name: String,
    chart: Arc<Chart>,
    source: Arc<dyn FieldSource>,
    scale: f64,
}

impl fmt::Debug for StructureBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StructureBundle")
            .field("name", &self.name)
            .field("chart", &self.chart.name())
            .field("scale", &self.scale)
            .finish()
    }
}

impl StructureBundle {
    pub fn new(name: &str, chart: Arc<Chart>, source: Arc<dyn FieldSource>) -> Self {
        StructureBundle {
            name: name.to_string(),
            chart,
            source,
            scale: 1.0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.real_dim()
    }

    /// The same bundle with `g ↦ λg` (and any supplied `H ↦ λH`).
    pub fn scaled(&self, lambda: f64) -> Self {
        StructureBundle {
            scale: self.scale * lambda,
            ..self.clone()
        }
    }

    pub fn fields(&self, point: &[f64]) -> Result<PointFields> {
        if point.len() != self.dim() {
            return Err(GkError::Dimension {
                expected: self.dim(),
                got: point.len(),
            });
        }
        let mut f = self.source.fields(point)?;
        if f.g.order() < 2 || f.j_plus.order() < 2 || f.j_minus.order() < 2 {
            return Err(GkError::OrderExceeded {
                needed: 2,
                available: f.g.order().min(f.j_plus.order()).min(f.j_minus.order()),
            });
        }
        if self.scale != 1.0 {
            f.g = f.g.scale(self.scale);
            f.h = f.h.map(|h| h.scale(self.scale));
        }
        Ok(f)
    }

    /// Derived geometry at a point; errors carry the point.
    pub fn geometry(&self, point: &[f64]) -> Result<PointGeometry> {
        self.geometry_inner(point)
            .map_err(|e| e.context(format!("{} at {}", self.name, fmt_point(point))))
    }

    fn geometry_inner(&self, point: &[f64]) -> Result<PointGeometry> {
        let f = self.fields(point)?;
        let g_inv = f.g.inverse("metric")?;
        let omega_plus = f.j_plus.transpose().matmul(&f.g);
        let omega_minus = f.j_minus.transpose().matmul(&f.g);
        Ok(PointGeometry {
            point: point.to_vec(),
            j_plus: f.j_plus,
            j_minus: f.j_minus,
            g: f.g,
            g_inv,
            omega_plus,
            omega_minus,
            h_supplied: f.h,
            extras: f.extras,
        })
    }
}

pub(crate) fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Fields and derived tensors at one point. `ω± = J±ᵀg`, i.e. `ω(X,Y) = g(J X, Y)`.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub point: Vec<f64>,
    pub j_plus: JetTensor,
    pub j_minus: JetTensor,
    pub g: JetTensor,
    pub g_inv: JetTensor,
    pub omega_plus: JetTensor,
    pub omega_minus: JetTensor,
    pub h_supplied: Option<JetTensor>,
    pub extras: BTreeMap<String, Tensor>,
}

impl PointGeometry {
    pub fn j(&self, plus: bool) -> &JetTensor {
        if plus {
            &self.j_plus
        } else {
            &self.j_minus
        }
    }

    pub fn omega(&self, plus: bool) -> &JetTensor {
        if plus {
            &self.omega_plus
        } else {
            &self.omega_minus
        }
    }

    /// `π± = (J+ ± J−) g⁻¹`.
    pub fn pi(&self, plus: bool) -> JetTensor {
        let s = if plus {
            self.j_plus.add(&self.j_minus)
        } else {
            self.j_plus.sub(&self.j_minus)
        };
        s.matmul(&self.g_inv)
    }

    /// `[J+, J−]`.
    pub fn commutator(&self) -> JetTensor {
        self.j_plus
            .matmul(&self.j_minus)
            .sub(&self.j_minus.matmul(&self.j_plus))
    }

    /// `σ = [J+, J−] g⁻¹`.
    pub fn sigma(&self) -> JetTensor {
        self.commutator().matmul(&self.g_inv)
    }

    /// `σ± = J± σ`.
    pub fn sigma_pm(&self, plus: bool) -> JetTensor {
        self.j(plus).matmul(&self.sigma())
    }

    /// `Π = J+ J−`.
    pub fn product(&self) -> JetTensor {
        self.j_plus.matmul(&self.j_minus)
    }

    /// `d±ᶜ ω±` by bidegree projection of `dω±`.
    pub fn dc_omega(&self, plus: bool) -> Result<Tensor> {
        let w = self.omega(plus);
        let dw = exterior_d(w)?.value();
        dc_project(&w.value(), &dw, &self.j(plus).matrix())
    }

    /// `d±ᶜ ω±` as jets (order 1), via `dᶜ = −J·d(J·)` on 2-forms.
    pub fn dc_omega_jets(&self, plus: bool) -> Result<JetTensor> {
        dc_jets(self.omega(plus), self.j(plus))
    }

    /// `H = d₊ᶜω₊` by projection.
    pub fn h(&self) -> Result<Tensor> {
        self.dc_omega(true)
    }

    /// `(g⁻¹)³ H`, all slots raised.
    pub fn h_raised(&self, h: &Tensor) -> Tensor {
        let gi = self.g_inv.matrix();
        let n = h.dim();
        let mut cur = h.clone();
        for slot in 0..3 {
            let prev = cur.clone();
            cur = Tensor::from_fn(n, 3, |idx| {
                let mut k = idx.to_vec();
                (0..n)
                    .map(|a| {
                        k[slot] = a;
                        gi[(idx[slot], a)] * prev.get(&k)
                    })
                    .sum()
            });
        }
        cur
    }

    /// `Ω = σ⁻¹` when σ is invertible.
    pub fn omega_sigma(&self) -> Result<Tensor> {
        let s = self.sigma().matrix();
        let cond = crate::charts::condition_number(&s);
        if !(cond < 1e12) {
            return Err(GkError::Degenerate {
                what: "sigma".into(),
                condition: cond,
            });
        }
        let inv = s.try_inverse().ok_or(GkError::Degenerate {
            what: "sigma".into(),
            condition: f64::INFINITY,
        })?;
        Ok(Tensor::from_matrix(&inv))
    }
}
