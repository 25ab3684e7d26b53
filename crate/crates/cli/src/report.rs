use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Outcome of one command: echoed parameters, scalar metrics and named
/// pass/fail verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, bool>,
    pub runtime_ms: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            metrics: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            runtime_ms: 0,
            seed,
            data: None,
        }
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(name.to_string(), serde_json::to_value(value).expect("parameters serialise"));
        self
    }

    pub fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    pub fn verdict(&mut self, name: &str, pass: bool) -> &mut Self {
        self.verdicts.insert(name.to_string(), pass);
        self
    }

    /// Non-finite metrics cannot be written as JSON numbers; they are
    /// replaced by a failed verdict naming them.
    pub fn seal(&mut self) {
        let bad: Vec<String> = self.metrics.iter().filter(|(_, v)| !v.is_finite()).map(|(k, _)| k.clone()).collect();
        for k in &bad {
            self.metrics.remove(k);
            self.verdicts.insert(format!("{k}_finite"), false);
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    /// Single JSON object with every key sorted.
    pub fn to_json(&self) -> String {
        // `Value` objects are ordered maps, so converting first sorts nested keys too.
        let v = serde_json::to_value(self).expect("report serialises");
        let mut s = serde_json::to_string_pretty(&v).expect("value serialises");
        s.push('\n');
        s
    }

    /// `name,value` rows, one per metric.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,value\n");
        for (k, v) in &self.metrics {
            s.push_str(&format!("{k},{v:?}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Write to `path`, or standard output for `-`.
pub fn emit(report: &Report, path: &Path, format: Format) -> std::io::Result<()> {
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()
    } else {
        std::fs::write(path, text)
    }
}
