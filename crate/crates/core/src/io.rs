//! JSON file formats: matrices, factor lists and squeezing reports.
//!
//! Matrices are stored as
//! `{"shape": [rows, cols], "data": [[[re, im], ...], ...], "label": ...}`
//! with 15 significant digits per component.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{round_decimals, round_significant, CMatrix6, C64};
use crate::network::PassiveNetwork;
use crate::spectra::SqueezingReport;
use crate::synthesis::{ProductOrder, SynthesisReport, TwoLevelFactor};

pub const MATRIX_DIGITS: usize = 15;
pub const DB_DECIMALS: u32 = 3;

type Entries = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub shape: [usize; 2],
    pub data: Entries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn encode(rows: usize, cols: usize, at: impl Fn(usize, usize) -> C64) -> Entries {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let z = at(i, j);
                    [
                        round_significant(z.re, MATRIX_DIGITS),
                        round_significant(z.im, MATRIX_DIGITS),
                    ]
                })
                .collect()
        })
        .collect()
}

/// Check that `data` really is `rows × cols` and matches `shape`.
fn check_shape(shape: [usize; 2], data: &Entries, expected: (usize, usize)) -> Result<()> {
    let found = (shape[0], shape[1]);
    if found != expected {
        return Err(Error::ShapeMismatch { expected, found });
    }
    if data.len() != expected.0 {
        return Err(Error::ShapeMismatch {
            expected,
            found: (data.len(), data.first().map_or(0, Vec::len)),
        });
    }
    if let Some(row) = data.iter().find(|r| r.len() != expected.1) {
        return Err(Error::ShapeMismatch {
            expected,
            found: (data.len(), row.len()),
        });
    }
    if data.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Format("matrix entries must be finite".into()));
    }
    Ok(())
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix6, label: Option<&str>) -> Self {
        Self {
            shape: [6, 6],
            data: encode(6, 6, |i, j| m[(i, j)]),
            label: label.map(str::to_owned),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix6> {
        check_shape(self.shape, &self.data, (6, 6))?;
        Ok(CMatrix6::from_fn(|i, j| {
            let [re, im] = self.data[i][j];
            C64::new(re, im)
        }))
    }
}

pub fn network_to_json(net: &PassiveNetwork) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixFile::from_matrix(
        net.entries(),
        net.label(),
    ))?)
}

/// Parses a matrix file and validates unitarity (see [`PassiveNetwork::new`]).
pub fn network_from_json(text: &str) -> Result<PassiveNetwork> {
    let file: MatrixFile = serde_json::from_str(text)?;
    let net = PassiveNetwork::new(file.to_matrix()?)?;
    Ok(match file.label {
        Some(label) => net.with_label(label),
        None => net,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorEntry {
    pub i: usize,
    pub j: usize,
    pub block: Entries,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorFile {
    pub order: ProductOrder,
    pub factors: Vec<FactorEntry>,
}

impl FactorFile {
    pub fn from_factors(factors: &[TwoLevelFactor], order: ProductOrder) -> Self {
        let factors = factors
            .iter()
            .map(|f| FactorEntry {
                i: f.i,
                j: f.j,
                block: encode(2, 2, |r, c| f.block[(r, c)]),
                kind: f.kind.name().to_owned(),
                alpha: f.alpha().map(|a| round_significant(a, MATRIX_DIGITS)),
            })
            .collect();
        Self { order, factors }
    }

    /// Rebuild the factors; kinds are recomputed from the blocks.
    pub fn to_factors(&self) -> Result<Vec<TwoLevelFactor>> {
        self.factors
            .iter()
            .map(|e| {
                check_shape(
                    [e.block.len(), e.block.first().map_or(0, Vec::len)],
                    &e.block,
                    (2, 2),
                )?;
                let block = Matrix2::from_fn(|r, c| {
                    let [re, im] = e.block[r][c];
                    C64::new(re, im)
                });
                TwoLevelFactor::new(e.i, e.j, block)
            })
            .collect()
    }
}

pub fn factors_to_json(report: &SynthesisReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(&FactorFile::from_factors(
        &report.factors,
        report.order,
    ))?)
}

pub fn factors_from_json(text: &str) -> Result<(Vec<TwoLevelFactor>, ProductOrder)> {
    let file: FactorFile = serde_json::from_str(text)?;
    Ok((file.to_factors()?, file.order))
}

/// Report with `db` rounded to [`DB_DECIMALS`] places.
pub fn report_to_json(report: &SqueezingReport) -> Result<String> {
    let mut rounded = *report;
    rounded.db = round_decimals(report.db, DB_DECIMALS);
    Ok(serde_json::to_string_pretty(&rounded)?)
}

pub fn report_from_json(text: &str) -> Result<SqueezingReport> {
    Ok(serde_json::from_str(text)?)
}
