//! Reports: an optional table plus named checks. Rendered as TSV or JSON.
//! Nothing time-dependent goes into the payload; timing is printed to
//! stderr by the caller.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    /// Exact residual when the check is an identity, otherwise empty.
    pub residual: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckLine>,
    pub passed: bool,
    #[serde(skip)]
    header: bool,
}

impl Report {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        Report {
            command: command.into(),
            config,
            columns: Vec::new(),
            rows: Vec::new(),
            checks: Vec::new(),
            passed: true,
            header: true,
        }
    }

    pub fn table(mut self, columns: &[&str]) -> Self {
        self.columns = columns.iter().map(|c| c.to_string()).collect();
        self
    }

    /// TSV output without the header line (single-column value dumps).
    pub fn bare(mut self) -> Self {
        self.header = false;
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn check(
        &mut self,
        name: impl Into<String>,
        passed: bool,
        residual: impl Into<String>,
        detail: impl Into<String>,
    ) {
        self.checks.push(CheckLine { name: name.into(), passed, residual: residual.into(), detail: detail.into() });
    }

    /// Sorts checks by name and settles the overall status.
    pub fn finish(mut self) -> Self {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Tsv => self.render_tsv(),
        }
    }

    fn render_tsv(&self) -> String {
        let mut out = String::new();
        if !self.columns.is_empty() {
            if self.header {
                out.push_str(&self.columns.join("\t"));
                out.push('\n');
            }
            for row in &self.rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        if !self.checks.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str("check\tstatus\tresidual\tdetail\n");
            for c in &self.checks {
                let status = if c.passed { "pass" } else { "FAIL" };
                out.push_str(&format!("{}\t{status}\t{}\t{}\n", c.name, c.residual, c.detail));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_are_sorted_and_status_follows_them() {
        let mut r = Report::new("verify", serde_json::Value::Null);
        r.check("b", true, "0", "");
        r.check("a", false, "1/2", "bad");
        let r = r.finish();
        assert!(!r.passed);
        assert_eq!(r.checks[0].name, "a");
        let tsv = r.render(Format::Tsv);
        assert!(tsv.starts_with("check\tstatus\tresidual\tdetail\na\tFAIL\t1/2\tbad\n"));
    }

    #[test]
    fn bare_table_has_no_header() {
        let mut r = Report::new("derive", serde_json::Value::Null).table(&["value"]).bare();
        r.row(vec!["3".into()]);
        assert_eq!(r.finish().render(Format::Tsv), "3\n");
    }
}
