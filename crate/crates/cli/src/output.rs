//! Report envelope and CSV rendering.
//!
//! Every run emits one JSON document wrapping the resolved configuration
//! and a toolkit version string, so a report is reproducible from its own
//! header. Exact quantities are decimal or `p/q` strings; the only floats
//! are eigenvalues and explicitly labeled ratio fields.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use fqgeom::LinkCheck;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
pub struct Envelope {
    pub toolkit_version: &'static str,
    pub command: String,
    pub config: Value,
    pub result: Value,
}

impl Envelope {
    pub fn new(command: &str, config: Value, result: Value) -> Self {
        Envelope {
            toolkit_version: TOOLKIT_VERSION,
            command: command.to_string(),
            config,
            result,
        }
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }

    /// Writes to the given path, or stdout when absent.
    pub fn emit(&self, out: Option<&Path>) -> std::io::Result<()> {
        let body = self.render();
        match out {
            Some(path) => std::fs::write(path, body),
            None => std::io::stdout().write_all(body.as_bytes()),
        }
    }
}

/// One CSV row per verified link: `cell,lhs,rhs,ratio,pass`.
pub fn links_csv(rows: &[(String, LinkCheck)]) -> String {
    let mut out = String::from("cell,lhs,rhs,ratio,pass\n");
    for (cell, link) in rows {
        let ratio = link
            .ratio_float
            .map(|r| format!("{r:.6}"))
            .unwrap_or_default();
        out.push_str(&format!(
            "{cell}.{},{},{},{ratio},{}\n",
            link.id,
            csv_field(&link.lhs),
            csv_field(&link.rhs),
            link.pass
        ));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
