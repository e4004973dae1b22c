//! Run reports and their text / JSON rendering.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Default, Serialize)]
pub struct ConfigEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sig: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub sp_margin: f64,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub max_violation: f64,
    pub threshold: f64,
    /// Reported but not counted towards the overall result.
    pub informational: bool,
}

impl Check {
    /// Passes when `max_violation <= threshold`.
    pub fn bounded(name: impl Into<String>, max_violation: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            pass: max_violation <= threshold,
            max_violation,
            threshold,
            informational: false,
        }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            pass: true,
            max_violation: value,
            threshold: f64::INFINITY,
            informational: true,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AdmissibleEntry {
    pub label: String,
    /// 1-based, including the fixed last block.
    pub sigma: Vec<usize>,
    pub multipliers: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form_file: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct TermRow {
    pub coefficient: String,
    pub monomial: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: ConfigEcho,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissible: Option<Vec<AdmissibleEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermRow>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        Self {
            command: command.into(),
            config,
            checks: Vec::new(),
            admissible: None,
            caveat: None,
            terms: None,
            notes: Vec::new(),
            pass: true,
            wall_time_s: 0.0,
        }
    }

    pub fn finish(&mut self, wall_time_s: f64) {
        self.pass = self.checks.iter().all(|c| c.informational || c.pass);
        self.wall_time_s = wall_time_s;
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        let c = &self.config;
        let mut cfg = Vec::new();
        for (k, v) in [
            ("source", &c.source),
            ("target", &c.target),
            ("sig", &c.sig),
            ("map", &c.map),
            ("map2", &c.map2),
        ] {
            if let Some(v) = v {
                cfg.push(format!("{k}={v}"));
            }
        }
        if let Some(d) = c.dim {
            cfg.push(format!("dim={d}"));
        }
        if let Some(d) = c.degree {
            cfg.push(format!("degree={d}"));
        }
        cfg.push(format!("samples={}", c.samples));
        cfg.push(format!("seed={}", c.seed));
        cfg.push(format!("tol={:e}", c.tol));
        cfg.push(format!("sp_margin={:e}", c.sp_margin));
        let _ = writeln!(out, "config: {}", cfg.join(" "));
        if let Some(list) = &self.admissible {
            let _ = writeln!(out, "admissible: {}", list.len());
            for a in list {
                let join = |v: Vec<String>| v.join(",");
                let _ = write!(
                    out,
                    "  {} sigma=({}) M=({})",
                    a.label,
                    join(a.sigma.iter().map(ToString::to_string).collect()),
                    join(a.multipliers.iter().map(ToString::to_string).collect())
                );
                if let Some(f) = &a.normal_form_file {
                    let _ = write!(out, " -> {f}");
                }
                out.push('\n');
            }
        }
        if let Some(caveat) = &self.caveat {
            let _ = writeln!(out, "{caveat}");
        }
        if let Some(terms) = &self.terms {
            let _ = writeln!(out, "terms: {}", terms.len());
            for t in terms {
                let _ = writeln!(out, "  {:>20}  {}", t.coefficient, t.monomial);
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        for ch in &self.checks {
            let status = match (ch.informational, ch.pass) {
                (true, _) => "INFO",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            if ch.informational {
                let _ = writeln!(out, "{status} {} value={:.3e}", ch.name, ch.max_violation);
            } else {
                let _ = writeln!(
                    out,
                    "{status} {} max_violation={:.3e} threshold={:.1e}",
                    ch.name, ch.max_violation, ch.threshold
                );
            }
        }
        let _ = writeln!(out, "result: {}", if self.pass { "PASS" } else { "FAIL" });
        let _ = writeln!(out, "wall_time: {:.3}s", self.wall_time_s);
        out
    }
}
