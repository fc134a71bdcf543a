use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::{Format, RunConfig};
use crate::CliError;

/// Artifacts produced by one command.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    /// Printed to stdout when `--out` is absent and the format is CSV.
    pub primary_csv: Option<String>,
    /// Printed to stdout when `--out` is absent and the format is JSON.
    pub primary_json: Option<String>,
}

impl Artifacts {
    pub fn csv(mut self, name: &str, body: String) -> Self {
        self.primary_csv.get_or_insert_with(|| body.clone());
        self.files.push((name.to_string(), body));
        self
    }

    pub fn json(mut self, name: &str, value: &impl Serialize) -> Self {
        let body = to_json(value);
        self.primary_json.get_or_insert_with(|| body.clone());
        self.files.push((name.to_string(), body));
        self
    }

    pub fn emit(self, cfg: &RunConfig) -> Result<(), CliError> {
        match &cfg.out {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| CliError::Write(dir.clone(), e))?;
                for (name, body) in self.files {
                    let path: PathBuf = Path::new(dir).join(name);
                    fs::write(&path, body).map_err(|e| CliError::Write(path, e))?;
                }
            }
            None => {
                let body = match cfg.format {
                    Format::Csv => self.primary_csv.or(self.primary_json),
                    Format::Json => self.primary_json.or(self.primary_csv),
                };
                if let Some(body) = body {
                    print!("{body}");
                }
            }
        }
        Ok(())
    }
}

pub fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

/// `x,phase,density,cdf` with phases numbered from 1.
pub fn level_table(xs: &[f64], density: &[Vec<f64>], cdf: &[Vec<f64>]) -> String {
    let mut out = String::from("x,phase,density,cdf\n");
    for ((x, d), f) in xs.iter().zip(density).zip(cdf) {
        for (i, (dv, fv)) in d.iter().zip(f).enumerate() {
            out.push_str(&format!("{x:.16e},{},{dv:.16e},{fv:.16e}\n", i + 1));
        }
    }
    out
}
