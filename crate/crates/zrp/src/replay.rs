//! Re-running a recorded experiment and comparing its tables byte for byte.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::experiment::run_experiment;
use crate::parallel::Workers;
use crate::spec::ExperimentResult;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileComparison {
    pub file: String,
    pub identical: bool,
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub result: ExperimentResult,
    pub files: Vec<FileComparison>,
}

impl Replay {
    pub fn identical(&self) -> bool {
        self.files.iter().all(|f| f.identical)
    }
}

pub fn load_result(path: &Path) -> Result<ExperimentResult> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentResult::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Re-runs the experiment recorded at `result_path` into `out_dir` and
/// compares every curve file with the copy next to `result_path`.
pub fn replay(result_path: &Path, out_dir: &Path, workers: &Workers) -> Result<Replay> {
    let recorded = load_result(result_path)?;
    let original_dir: PathBuf = result_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut spec = recorded.spec.clone();
    spec.out_dir = out_dir.to_path_buf();
    let result = run_experiment(&spec, workers)?;
    let mut files: Vec<String> = recorded.curves.iter().map(|c| c.file.clone()).collect();
    files.sort();
    files.dedup();
    let files = files
        .into_iter()
        .map(|file| {
            let before = std::fs::read(original_dir.join(&file))
                .with_context(|| format!("reading recorded {file}"))?;
            let after =
                std::fs::read(out_dir.join(&file)).with_context(|| format!("reading replayed {file}"))?;
            Ok(FileComparison {
                identical: before == after,
                file,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Replay { result, files })
}
