//! CSV/JSON serialization with fixed numeric formatting.

use serde::Serialize;

use crate::resolve::{Format, RunConfig};
use crate::AppError;

/// 12 significant digits, scientific notation, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// Buffers CSV lines; `finish_json` writes whichever format was requested.
pub struct OutputSink {
    buffer: String,
}

impl OutputSink {
    pub fn create(_cfg: &RunConfig) -> Result<Self, AppError> {
        Ok(Self { buffer: String::new() })
    }

    pub fn csv_header(&mut self, header: &str) {
        self.buffer.push_str(header);
        self.buffer.push('\n');
    }

    pub fn csv_row(&mut self, fields: &[String]) {
        self.buffer.push_str(&fields.join(","));
        self.buffer.push('\n');
    }

    /// Emit the buffered CSV, or the JSON document {config, records}.
    pub fn finish_json<T: Serialize>(&mut self, cfg: &RunConfig, records: &T) -> Result<(), AppError> {
        let text = match cfg.format {
            Format::Csv => std::mem::take(&mut self.buffer),
            Format::Json => {
                #[derive(Serialize)]
                struct Document<'a, T> {
                    config: &'a RunConfig,
                    records: &'a T,
                }
                serde_json::to_string_pretty(&Document { config: cfg, records })
                    .map_err(|e| AppError::Computation(format!("serialization failed: {e}")))?
                    + "\n"
            }
        };
        match &cfg.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| AppError::Computation(format!("cannot write output: {e}")))?,
            None => print!("{text}"),
        }
        Ok(())
    }
}
