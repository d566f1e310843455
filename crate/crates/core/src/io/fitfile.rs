//! Fit documents as JSON.

use std::path::Path;

use crate::error::{Error, Result};
use crate::inference::FitResult;

pub fn write_fit(path: &Path, fit: &FitResult) -> Result<()> {
    let text = serde_json::to_string_pretty(fit)?;
    super::write_file(path, &(text + "\n"))
}

pub fn read_fit(path: &Path) -> Result<FitResult> {
    let text = super::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}
