use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::charts::{Chart, Role};
use crate::error::{GkError, Result};
use crate::expr::{ExprAst, Jet, JetSpace};
use crate::gkcore::{SampleBox, Tolerances};

/// Which construction a potential feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Kahler,
    Commuting,
    Symplectic,
    General,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Case::Kahler => "kahler",
            Case::Commuting => "commuting",
            Case::Symplectic => "symplectic",
            Case::General => "general",
        };
        f.write_str(s)
    }
}

/// A real scalar potential that can be expanded as a Taylor jet.
pub trait Potential: Send + Sync + fmt::Debug {
    fn jet(&self, space: &Arc<JetSpace>, point: &[f64], order: usize) -> Result<Jet>;

    /// Imaginary part of the potential at a point (zero unless it is an
    /// expression that fails to be real).
    fn imag(&self, _point: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
}

/// Potential given by an expression.
#[derive(Clone, Debug)]
pub struct ExprPotential(pub Arc<ExprAst>);

impl Potential for ExprPotential {
    fn jet(&self, space: &Arc<JetSpace>, point: &[f64], order: usize) -> Result<Jet> {
        self.0.eval_jet_in(space, point, order)
    }

    fn imag(&self, point: &[f64]) -> Result<f64> {
        Ok(self.0.eval_complex(point)?.im)
    }
}

/// `Σ wᵢ Kᵢ`.
#[derive(Clone, Debug)]
pub struct SumPotential(pub Vec<(f64, Arc<dyn Potential>)>);

impl Potential for SumPotential {
    fn jet(&self, space: &Arc<JetSpace>, point: &[f64], order: usize) -> Result<Jet> {
        let mut acc = Jet::zero(space, order);
        for (w, p) in &self.0 {
            acc.axpy(*w, &p.jet(space, point, order)?);
        }
        Ok(acc)
    }

    fn imag(&self, point: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (w, p) in &self.0 {
            s += w * p.imag(point)?;
        }
        Ok(s)
    }
}

/// A potential on a chart together with the case tag and sampling setup.
#[derive(Clone, Debug)]
pub struct PotentialScenario {
    pub name: String,
    pub chart: Arc<Chart>,
    pub case: Case,
    pub potential: Arc<dyn Potential>,
    /// Source text of the potential when it came from an expression.
    pub text: Option<String>,
    pub deformation: Option<Deformation>,
    pub sample_box: SampleBox,
    pub samples: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

#[derive(Clone, Debug)]
pub struct Deformation {
    pub phi: Arc<ExprAst>,
    pub t: f64,
}

impl PotentialScenario {
    /// Parses `k` over the chart; default box half-width 0.5, 100 samples.
    pub fn parse(name: &str, chart: Chart, case: Case, k: &str) -> Result<Self> {
        let ast = chart.parse(k)?;
        let dim = chart.real_dim();
        let s = PotentialScenario {
            name: name.to_string(),
            chart: Arc::new(chart),
            case,
            potential: Arc::new(ExprPotential(Arc::new(ast))),
            text: Some(k.to_string()),
            deformation: None,
            sample_box: SampleBox::around_origin(dim, 0.5),
            samples: 100,
            seed: 0,
            tol: Tolerances::default(),
        };
        s.validate_blocks()?;
        Ok(s)
    }

    pub fn with_sampling(mut self, half_width: f64, samples: usize, seed: u64) -> Self {
        self.sample_box.half_width = half_width;
        self.samples = samples;
        self.seed = seed;
        self
    }

    pub fn with_deformation(mut self, phi: &str, t: f64) -> Result<Self> {
        self.deformation = Some(Deformation {
            phi: Arc::new(self.chart.parse(phi)?),
            t,
        });
        Ok(self)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.sample_box.sample(self.samples, self.seed)
    }

    /// Block structure required by the case tag.
    pub fn validate_blocks(&self) -> Result<()> {
        let n = |r| self.chart.block(r).len();
        let (z, zp, q) = (n(Role::Z), n(Role::ZPrime), n(Role::LeafQ));
        let ok = match self.case {
            Case::Kahler => z > 0 && zp == 0 && q == 0,
            Case::Commuting => z > 0 && zp > 0 && q == 0,
            Case::Symplectic => z == 0 && zp == 0 && q > 0,
            Case::General => q > 0 || (z > 0 && zp > 0),
        };
        if !ok {
            let need = match self.case {
                Case::Kahler => "a z block and no z' or leaf block",
                Case::Commuting => "z and z' blocks and no leaf block",
                Case::Symplectic => "a q/P leaf block only",
                Case::General => "a leaf block, or both z and z' blocks",
            };
            return Err(GkError::Precondition(format!(
                "case `{}` needs {need}; chart `{}` has {z} z, {zp} z', {q} leaf pairs",
                self.case,
                self.chart.name()
            )));
        }
        Ok(())
    }

    /// Largest imaginary part of the potential over the sample points.
    pub fn max_imag(&self) -> Result<f64> {
        let mut m = 0.0f64;
        for p in self.points() {
            m = m.max(self.potential.imag(&p)?.abs());
        }
        Ok(m)
    }

    /// Rejects potentials whose lowered imaginary part exceeds 1e-14.
    pub fn validate_real(&self) -> Result<()> {
        let m = self.max_imag()?;
        if m > 1e-14 {
            return Err(GkError::InvalidPotential {
                reason: format!("potential is not real: imaginary part {m:.3e}"),
            });
        }
        Ok(())
    }

    /// The same scenario with a different potential.
    pub fn with_potential(&self, potential: Arc<dyn Potential>, text: Option<String>) -> Self {
        PotentialScenario {
            potential,
            text,
            ..self.clone()
        }
    }
}
