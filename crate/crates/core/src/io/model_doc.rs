//! Model documents: JSON with a fixed schema.
//!
//! ```json
//! {
//!   "factors": [
//!     { "id": "volatility", "name": "Requirements volatility", "direction": "+",
//!       "level_count": 3, "level_anchors": ["stable", "some", "frequent", "constant"],
//!       "description": "" }
//!   ],
//!   "direct": [ { "factor_id": "volatility", "min": 0.1, "likely": 0.2, "max": 0.4 } ],
//!   "interactions": [
//!     { "direct_factor_id": "volatility", "indirect_factor_id": "experience",
//!       "sign": 1, "min": 0.0, "likely": 0.1, "max": 0.2 }
//!   ]
//! }
//! ```
//!
//! `level_anchors` and `description` may be omitted; `interactions` too.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_file, write_atomic};
use crate::error::{Error, Result};
use crate::model::{
    validate_model, CausalModel, CostFactor, DirectInfluence, Direction, InteractionInfluence,
    OrdinalScale, Sign, TriangularParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum DirectionDoc {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorDoc {
    id: String,
    name: String,
    direction: DirectionDoc,
    level_count: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    level_anchors: Vec<String>,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectDoc {
    factor_id: String,
    min: f64,
    likely: f64,
    max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InteractionDoc {
    direct_factor_id: String,
    indirect_factor_id: String,
    sign: i8,
    min: f64,
    likely: f64,
    max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    factors: Vec<FactorDoc>,
    direct: Vec<DirectDoc>,
    #[serde(default)]
    interactions: Vec<InteractionDoc>,
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn to_model(doc: ModelDoc, path: &Path) -> Result<CausalModel> {
    let mut factors = Vec::with_capacity(doc.factors.len());
    for f in doc.factors {
        let scale = if f.level_anchors.is_empty() {
            OrdinalScale::with_levels(f.level_count)
        } else if f.level_anchors.len() != f.level_count as usize + 1 {
            return Err(format_error(
                path,
                format!(
                    "factor `{}`: level_count {} needs {} anchors, got {}",
                    f.id,
                    f.level_count,
                    f.level_count + 1,
                    f.level_anchors.len()
                ),
            ));
        } else {
            OrdinalScale::new(f.level_anchors)
        }
        .map_err(|e| format_error(path, format!("factor `{}`: {e}", f.id)))?;
        factors.push(CostFactor {
            id: f.id,
            name: f.name,
            direction: match f.direction {
                DirectionDoc::Positive => Direction::Positive,
                DirectionDoc::Negative => Direction::Negative,
            },
            scale,
            description: f.description,
        });
    }
    let direct = doc
        .direct
        .into_iter()
        .map(|d| DirectInfluence::new(d.factor_id, TriangularParams::new(d.min, d.likely, d.max)))
        .collect();
    let mut interactions = Vec::new();
    for i in doc.interactions {
        let sign = match i.sign {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            other => {
                return Err(format_error(
                    path,
                    format!(
                        "interaction {} x {}: sign must be 1 or -1, got {other}",
                        i.direct_factor_id, i.indirect_factor_id
                    ),
                ))
            }
        };
        interactions.push(InteractionInfluence::new(
            i.direct_factor_id,
            i.indirect_factor_id,
            sign,
            TriangularParams::new(i.min, i.likely, i.max),
        ));
    }
    Ok(CausalModel {
        factors,
        direct,
        interactions,
    })
}

fn to_doc(model: &CausalModel) -> ModelDoc {
    ModelDoc {
        factors: model
            .factors
            .iter()
            .map(|f| FactorDoc {
                id: f.id.clone(),
                name: f.name.clone(),
                direction: match f.direction {
                    Direction::Positive => DirectionDoc::Positive,
                    Direction::Negative => DirectionDoc::Negative,
                },
                level_count: f.scale.level_count(),
                level_anchors: f.scale.anchors().to_vec(),
                description: f.description.clone(),
            })
            .collect(),
        direct: model
            .direct
            .iter()
            .map(|d| DirectDoc {
                factor_id: d.factor_id.clone(),
                min: d.extreme_overhead.min,
                likely: d.extreme_overhead.likely,
                max: d.extreme_overhead.max,
            })
            .collect(),
        interactions: model
            .interactions
            .iter()
            .map(|i| InteractionDoc {
                direct_factor_id: i.direct_factor_id.clone(),
                indirect_factor_id: i.indirect_factor_id.clone(),
                sign: i.sign.as_i8(),
                min: i.extreme_overhead.min,
                likely: i.extreme_overhead.likely,
                max: i.extreme_overhead.max,
            })
            .collect(),
    }
}

/// Parses and validates a model document. `path` only labels errors.
pub fn parse_model(text: &str, path: &Path) -> Result<CausalModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let model = to_model(doc, path)?;
    let violations = validate_model(&model);
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(Error::InvalidModel(violations))
    }
}

pub fn load_model(path: &Path) -> Result<CausalModel> {
    parse_model(&read_file(path)?, path)
}

/// Canonical document text: pretty-printed, every field written, newline
/// terminated.
pub fn model_to_string(model: &CausalModel) -> String {
    let mut text = serde_json::to_string_pretty(&to_doc(model)).expect("model document serializes");
    text.push('\n');
    text
}

pub fn save_model(model: &CausalModel, path: &Path) -> Result<()> {
    write_atomic(path, model_to_string(model).as_bytes())
}
