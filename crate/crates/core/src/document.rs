//! The JSON document a fitted network is saved as.
//!
//! Edges and models refer to variables by name, so documents stay readable
//! and survive reordering. Everything is re-validated on load.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::{Dag, DagError};
use crate::dataset::DiscretizationMap;
use crate::parameters::{BayesianNetwork, NodeModel, ParamError, Variable};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("variable {0:?} has no model")]
    MissingModel(String),
    #[error("variable {0:?} has more than one model")]
    DuplicateModel(String),
    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub node: String,
    pub model: NodeModel,
}

/// How the network was produced. Informational only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_score: Option<f64>,
    pub library_version: String,
}

impl Provenance {
    pub fn current() -> Self {
        Self {
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub format_version: u32,
    pub variables: Vec<Variable>,
    pub edges: Vec<Edge>,
    pub models: Vec<ModelEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub discretization: Vec<DiscretizationMap>,
    pub provenance: Provenance,
}

impl NetworkDocument {
    pub fn from_network(bn: &BayesianNetwork, provenance: Provenance) -> Self {
        let names = bn.dag().names();
        Self {
            format_version: FORMAT_VERSION,
            variables: bn.variables().to_vec(),
            edges: bn
                .dag()
                .edges()
                .into_iter()
                .map(|(a, b)| Edge {
                    from: names[a].clone(),
                    to: names[b].clone(),
                })
                .collect(),
            models: names
                .iter()
                .zip(bn.models())
                .map(|(node, model)| ModelEntry {
                    node: node.clone(),
                    model: model.clone(),
                })
                .collect(),
            discretization: bn.discretization().to_vec(),
            provenance,
        }
    }

    /// Rebuilds and validates the network.
    pub fn to_network(&self) -> Result<BayesianNetwork, DocumentError> {
        if self.format_version != FORMAT_VERSION {
            return Err(DocumentError::Version(self.format_version));
        }
        let mut index = HashMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            if index.insert(v.name.as_str(), i).is_some() {
                return Err(DocumentError::DuplicateVariable(v.name.clone()));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| DocumentError::UnknownVariable(name.to_string()))
        };
        let edges = self
            .edges
            .iter()
            .map(|e| Ok((lookup(&e.from)?, lookup(&e.to)?)))
            .collect::<Result<Vec<_>, DocumentError>>()?;
        let names = self.variables.iter().map(|v| v.name.clone()).collect();
        let kinds = self.variables.iter().map(|v| v.kind).collect();
        let dag = Dag::from_edges(names, kinds, &edges)?;
        let mut models: Vec<Option<NodeModel>> = vec![None; self.variables.len()];
        for entry in &self.models {
            let i = lookup(&entry.node)?;
            if models[i].replace(entry.model.clone()).is_some() {
                return Err(DocumentError::DuplicateModel(entry.node.clone()));
            }
        }
        let models = models
            .into_iter()
            .zip(&self.variables)
            .map(|(m, v)| m.ok_or_else(|| DocumentError::MissingModel(v.name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BayesianNetwork::from_parts(
            self.variables.clone(),
            dag,
            models,
            self.discretization.clone(),
        )?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    /// Parses and validates a document.
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let doc: Self = serde_json::from_str(text)?;
        doc.to_network()?;
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DocumentError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, Dataset};
    use crate::parameters::{fit_parameters, FitOptions};

    fn network() -> BayesianNetwork {
        let d = Dataset::new(
            vec!["g".into(), "x".into(), "y".into()],
            vec![
                Column::from_labels(&["a", "b", "a", "b", "a", "b", "a", "a"]),
                Column::Continuous(vec![0.1, 1.3, 2.2, 2.9, 4.4, 5.1, 5.8, 7.0]),
                Column::Continuous(vec![0.3, 2.1, 4.5, 5.7, 9.1, 10.4, 11.2, 14.3]),
            ],
        )
        .unwrap();
        let dag = Dag::from_edges(d.names().to_vec(), d.kinds(), &[(0, 2), (1, 2)]).unwrap();
        fit_parameters(&d, &dag, &FitOptions::default()).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let bn = network();
        let doc = NetworkDocument::from_network(&bn, Provenance::current());
        let text = doc.to_json();
        let back = NetworkDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_network().unwrap().models(), bn.models());
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn field_order_does_not_matter() {
        let doc = NetworkDocument::from_network(&network(), Provenance::current());
        let value: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        let obj = value.as_object().unwrap();
        let mut reversed = serde_json::Map::new();
        for (k, v) in obj.iter().rev() {
            reversed.insert(k.clone(), v.clone());
        }
        let text = serde_json::to_string(&serde_json::Value::Object(reversed)).unwrap();
        assert_eq!(NetworkDocument::from_json(&text).unwrap(), doc);
    }

    #[test]
    fn invalid_documents_rejected() {
        let doc = NetworkDocument::from_network(&network(), Provenance::current());

        let mut bad = doc.clone();
        bad.edges.push(Edge {
            from: "y".into(),
            to: "x".into(),
        });
        assert!(bad.to_network().is_err());

        let mut bad = doc.clone();
        bad.edges.push(Edge {
            from: "x".into(),
            to: "g".into(),
        });
        assert!(matches!(bad.to_network(), Err(DocumentError::Dag(_))));

        let mut bad = doc.clone();
        bad.models.pop();
        assert!(matches!(bad.to_network(), Err(DocumentError::MissingModel(_))));

        let mut bad = doc.clone();
        bad.format_version = 99;
        assert!(matches!(bad.to_network(), Err(DocumentError::Version(99))));

        let mut bad = doc.clone();
        bad.edges.push(Edge {
            from: "nope".into(),
            to: "x".into(),
        });
        assert!(matches!(bad.to_network(), Err(DocumentError::UnknownVariable(_))));

        // a model that no longer matches its parents
        let mut bad = doc;
        bad.edges.retain(|e| e.from != "x");
        assert!(matches!(bad.to_network(), Err(DocumentError::Params(_))));

        assert!(NetworkDocument::from_json("{").is_err());
    }
}
