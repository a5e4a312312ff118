//! Bundled field models with their Γ data, loaded from `data/models.json`.

use serde::{Deserialize, Serialize};

use crate::forms::Case;
use crate::symspace::{gamma_index_data, ClassicalPair, ParityMap, Result};

const MODELS_JSON: &str = include_str!("../data/models.json");

/// Version of the bundled data file format.
pub const MODELS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldModel {
    pub name: String,
    pub p: u64,
    pub a: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    /// Γ-class of −1 (biquadratic models only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus_one_bit: Option<u8>,
    /// How y-orbit bits enter Γ-classes (biquadratic models only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_parity: Option<ParityMap>,
}

#[derive(Debug, Clone, Deserialize)]
struct ModelFile {
    version: u32,
    models: Vec<FieldModel>,
}

impl FieldModel {
    /// A pair over this model; unitary for biquadratic models.
    pub fn pair(&self, case: Case, kernel: &[i64], n: usize) -> Result<ClassicalPair> {
        ClassicalPair::from_ints(case, self.p, self.a, self.b, kernel, n)
    }
}

pub fn bundled_models() -> Vec<FieldModel> {
    let file: ModelFile = serde_json::from_str(MODELS_JSON).expect("bundled models parse");
    assert_eq!(file.version, MODELS_VERSION, "bundled models version");
    file.models
}

/// The parity map for a unitary pair: the bundled value when the field is
/// bundled, otherwise recomputed.
pub fn parity_for(pair: &ClassicalPair) -> Result<ParityMap> {
    let f = pair.field();
    let hit = bundled_models()
        .into_iter()
        .find(|m| m.p == pair.prime().get() && m.a == f.a() && m.b == f.b())
        .and_then(|m| m.y_parity);
    match hit {
        Some(p) => Ok(p),
        None => Ok(gamma_index_data(pair)?.y_parity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_values_recompute() {
        for m in bundled_models() {
            match m.b {
                Some(_) => {
                    let pair = m.pair(Case::Unitary, &[], 1).unwrap();
                    let data = gamma_index_data(&pair).unwrap();
                    assert_eq!(Some(data.minus_one_bit), m.minus_one_bit, "{}", m.name);
                    assert_eq!(data.minus_one_bit, data.minus_one_oracle_bit, "{}", m.name);
                    assert_eq!(Some(data.y_parity), m.y_parity, "{}", m.name);
                }
                None => {
                    assert!(m.pair(Case::Orthogonal, &[], 1).is_ok(), "{}", m.name);
                    assert!(m.minus_one_bit.is_none() && m.y_parity.is_none());
                }
            }
        }
    }
}
