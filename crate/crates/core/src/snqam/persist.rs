use std::fs;
use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{ModelError, QualityModel};

pub const MODEL_FORMAT_VERSION: u64 = 1;

/// sha256 of the compact JSON body (everything except `checksum`).
pub(super) fn body_checksum(model: &QualityModel) -> String {
    let body = serde_json::to_vec(model).expect("model serializes");
    hex::encode(Sha256::digest(&body))
}

impl QualityModel {
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("model serializes");
        value
            .as_object_mut()
            .expect("model is an object")
            .insert("checksum".into(), Value::String(body_checksum(self)));
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| ModelError::Schema("top level is not an object".into()))?;
        let version = obj
            .get("version")
            .and_then(Value::as_u64)
            .ok_or_else(|| ModelError::Schema("missing integer `version`".into()))?;
        if version != MODEL_FORMAT_VERSION {
            return Err(ModelError::VersionMismatch {
                found: version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let stored = match obj.remove("checksum") {
            Some(Value::String(s)) => s,
            _ => return Err(ModelError::Schema("missing string `checksum`".into())),
        };
        let mut model: QualityModel =
            serde_json::from_value(value).map_err(|e| ModelError::Schema(e.to_string()))?;
        for table in model.facet_percentile_tables.values() {
            if table.quantiles.len() < 2 {
                return Err(ModelError::Schema("facet quantile table too short".into()));
            }
        }
        let computed = body_checksum(&model);
        if computed != stored {
            return Err(ModelError::ChecksumMismatch { stored, computed });
        }
        model.fingerprint = computed;
        Ok(model)
    }
}

pub fn save_model(model: &QualityModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    fs::write(path, model.to_json())?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<QualityModel, ModelError> {
    let text = fs::read_to_string(path)?;
    QualityModel::from_json(&text)
}
