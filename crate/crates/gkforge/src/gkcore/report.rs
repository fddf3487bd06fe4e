use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Per-check tolerances, looked up by exact name, then by dotted prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub default: f64,
    pub by_name: BTreeMap<String, f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let by_name = [
            ("structure", 1e-10),
            ("structure.metric_positive", 0.0),
            ("integrability", 1e-8),
            ("gk", 1e-8),
            ("gk.dc_routes", 1e-10),
            ("gk.h_supplied", 1e-10),
            ("gk.h_formula", 1e-10),
            ("poisson", 1e-8),
            ("poisson.mixed_spread", 1e-6),
            ("bismut", 1e-7),
            ("product", 1e-8),
            ("build", 1e-8),
            ("gluing", 1e-10),
            ("gerbe", 1e-10),
            ("chern", 1e-6),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Tolerances {
            default: 1e-8,
            by_name,
        }
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        let mut key = name;
        loop {
            if let Some(t) = self.by_name.get(key) {
                return *t;
            }
            match key.rfind('.') {
                Some(i) => key = &key[..i],
                None => return self.default,
            }
        }
    }

    /// Replaces every residual tolerance by `t`; sign checks keep their zero bound.
    pub fn with_global(&self, t: f64) -> Tolerances {
        let by_name = self
            .by_name
            .iter()
            .map(|(k, v)| (k.clone(), if *v == 0.0 { 0.0 } else { t }))
            .collect();
        Tolerances {
            default: t,
            by_name,
        }
    }

    pub fn set(&mut self, name: &str, t: f64) {
        self.by_name.insert(name.to_string(), t);
    }
}

/// Convention constants in force for a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub kappa: f64,
    pub kappa_source: String,
    pub schouten_c: Option<f64>,
    pub omega: String,
    pub g_extraction: String,
}

impl Conventions {
    pub fn with_kappa(kappa: f64, source: &str) -> Self {
        Conventions {
            kappa,
            kappa_source: source.to_string(),
            schouten_c: None,
            omega: "omega(X,Y) = g(JX,Y)".into(),
            g_extraction: "g = omega J".into(),
        }
    }
}

impl Default for Conventions {
    fn default() -> Self {
        Self::with_kappa(0.5, "default")
    }
}

/// One named check aggregated over sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub max_abs: f64,
    pub max_rel: f64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckLine {
    /// `pass` is decided on the relative residual `|r| / max(1, scale)`.
    pub fn new(name: &str, max_abs: f64, max_rel: f64, samples: usize, tol: f64) -> Self {
        CheckLine {
            name: name.to_string(),
            max_abs,
            max_rel,
            samples,
            tol,
            pass: max_rel <= tol,
            value: None,
            note: None,
        }
    }

    pub fn with_value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub lines: Vec<CheckLine>,
    pub conventions: Conventions,
}

impl CheckReport {
    pub fn new(conventions: Conventions) -> Self {
        CheckReport {
            lines: Vec::new(),
            conventions,
        }
    }

    pub fn push(&mut self, line: CheckLine) {
        let at = self.lines.partition_point(|l| l.name < line.name);
        if at < self.lines.len() && self.lines[at].name == line.name {
            self.lines[at] = line;
        } else {
            self.lines.insert(at, line);
        }
    }

    pub fn merge(&mut self, other: CheckReport) {
        if other.conventions.schouten_c.is_some() {
            self.conventions.schouten_c = other.conventions.schouten_c;
        }
        for l in other.lines {
            self.push(l);
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckLine> {
        self.lines.iter().find(|l| l.name == name)
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn failures(&self) -> Vec<&CheckLine> {
        self.lines.iter().filter(|l| !l.pass).collect()
    }

    /// Largest absolute residual among lines whose name starts with `prefix`.
    pub fn max_abs(&self, prefix: &str) -> f64 {
        self.lines
            .iter()
            .filter(|l| l.name.starts_with(prefix))
            .map(|l| l.max_abs)
            .fold(0.0, f64::max)
    }
}

/// Running max of per-point residuals for one check.
#[derive(Clone, Debug, Default)]
pub(crate) struct Acc {
    pub max_abs: f64,
    pub max_rel: f64,
    pub samples: usize,
}

impl Acc {
    pub fn add(&mut self, abs: f64, scale: f64) {
        let rel = abs / scale.max(1.0);
        // NaN must not hide as a pass
        self.max_abs = if abs.is_nan() { f64::NAN } else { self.max_abs.max(abs) };
        self.max_rel = if rel.is_nan() || self.max_rel.is_nan() { f64::NAN } else { self.max_rel.max(rel) };
        self.samples += 1;
    }
}

/// Ordered collection of accumulators keyed by check name.
#[derive(Clone, Debug, Default)]
pub(crate) struct Tally {
    pub accs: BTreeMap<String, Acc>,
}

impl Tally {
    pub fn add(&mut self, name: &str, abs: f64, scale: f64) {
        self.accs.entry(name.to_string()).or_default().add(abs, scale);
    }

    pub fn into_lines(self, tol: &Tolerances) -> Vec<CheckLine> {
        self.accs
            .into_iter()
            .map(|(name, a)| {
                let t = tol.get(&name);
                let mut line = CheckLine::new(&name, a.max_abs, a.max_rel, a.samples, t);
                if a.max_rel.is_nan() {
                    line.pass = false;
                }
                line
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_lookup_walks_prefixes() {
        let t = Tolerances::default();
        assert_eq!(t.get("bismut.plus"), 1e-7);
        assert_eq!(t.get("gk.dc_routes"), 1e-10);
        assert_eq!(t.get("nothing.here"), 1e-8);
        let g = t.with_global(1e-3);
        assert_eq!(g.get("bismut.plus"), 1e-3);
        assert_eq!(g.get("structure.metric_positive"), 0.0);
    }

    #[test]
    fn report_lines_stay_sorted_and_nan_fails() {
        let mut r = CheckReport::default();
        r.push(CheckLine::new("b", 0.0, 0.0, 1, 1.0));
        r.push(CheckLine::new("a", 0.0, 0.0, 1, 1.0));
        assert_eq!(r.lines[0].name, "a");
        let mut t = Tally::default();
        t.add("x", f64::NAN, 1.0);
        t.add("x", 0.0, 1.0);
        let lines = t.into_lines(&Tolerances::default());
        assert!(!lines[0].pass);
    }
}
