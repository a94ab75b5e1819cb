//! Vendor carrier-activation document. The device publishes it under
//! `vendor/carrier-activation`; the test equipment reads it back over the
//! management plane and applies the steps.

use serde::{Deserialize, Serialize};

use crate::mplane::model::VENDOR_CARRIER_ACTIVATION;
use crate::mplane::{ConfigChange, Datastore, Node};

pub const SHIPPED_DOCUMENT: &str = include_str!("../../data/vendor_carrier_activation.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationStep {
    pub path: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VendorActivation {
    pub vendor: String,
    pub revision: String,
    pub note: String,
    pub steps: Vec<ActivationStep>,
}

impl Default for VendorActivation {
    fn default() -> Self {
        serde_json::from_str(SHIPPED_DOCUMENT).expect("shipped vendor document parses")
    }
}

fn step_key(i: usize) -> String {
    format!("step-{:02}", i + 1)
}

impl VendorActivation {
    pub fn publish(&self, ds: &mut Datastore) {
        let base = VENDOR_CARRIER_ACTIVATION;
        ds.remove(base);
        ds.set_leaf(&format!("{base}/vendor"), self.vendor.clone());
        ds.set_leaf(&format!("{base}/revision"), self.revision.clone());
        for (i, s) in self.steps.iter().enumerate() {
            ds.set_leaf(&format!("{base}/{}/path", step_key(i)), s.path.clone());
            ds.set_leaf(&format!("{base}/{}/value", step_key(i)), s.value.clone());
        }
    }

    /// Rebuilds the step list from a retrieved `vendor/carrier-activation`
    /// subtree. Steps are keyed `step-NN` and applied in key order.
    pub fn from_subtree(node: &Node) -> Option<Vec<ActivationStep>> {
        let mut steps: Vec<(&String, ActivationStep)> = node
            .children()
            .filter(|(k, _)| k.starts_with("step-"))
            .map(|(k, n)| {
                Some((
                    k,
                    ActivationStep {
                        path: n.child("path")?.as_leaf()?.to_string(),
                        value: n.child("value")?.as_leaf()?.to_string(),
                    },
                ))
            })
            .collect::<Option<_>>()?;
        steps.sort_by(|a, b| a.0.cmp(b.0));
        Some(steps.into_iter().map(|(_, s)| s).collect())
    }

    pub fn changes(steps: &[ActivationStep]) -> Vec<ConfigChange> {
        steps
            .iter()
            .map(|s| ConfigChange::new(&s.path, &s.value))
            .collect()
    }
}
