//! JSON files for behaviors, expressions, states and measurements. Every
//! loader re-runs the type's validation.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::compose::ComposedInequality;
use crate::error::{Error, Result};
use crate::expression::BellExpression;
use crate::measurement::{MeasurementDoc, MeasurementSet};
use crate::state::{DensityMatrix, Dims, PureState, C64};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_behavior(path: &Path) -> Result<Behavior> {
    let b: Behavior = read_json(path)?;
    b.validate()?;
    Ok(b)
}

/// Either a plain expression or a composed inequality.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExpressionFile {
    Composed(Box<ComposedInequality>),
    Plain(BellExpression),
}

impl ExpressionFile {
    pub fn expression(&self) -> BellExpression {
        match self {
            ExpressionFile::Composed(c) => c.as_expression(),
            ExpressionFile::Plain(e) => e.clone(),
        }
    }
}

pub fn load_expression(path: &Path) -> Result<ExpressionFile> {
    read_json(path)
}

/// A pure state `{scenario, data}` (`d^n` amplitudes) or a density matrix
/// with the same keys (`d^{2n}` row-major entries).
pub fn load_state(path: &Path) -> Result<DensityMatrix> {
    #[derive(Deserialize)]
    struct Raw {
        scenario: Dims,
        data: Vec<C64>,
    }
    let raw: Raw = read_json(path)?;
    let dims = Dims::new(raw.scenario.n, raw.scenario.d)?;
    let dim = dims.dim();
    if raw.data.len() == dim {
        Ok(PureState::new(dims, raw.data)?.density_matrix())
    } else {
        DensityMatrix::new(dims, raw.data)
    }
}

pub fn load_measurements(path: &Path) -> Result<MeasurementSet> {
    let doc: MeasurementDoc = read_json(path)?;
    MeasurementSet::try_from(doc)
}
