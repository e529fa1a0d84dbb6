use serde::{Deserialize, Serialize};

/// One entry of the append-only event log.
///
/// Field order is fixed (`tx_index`, `name`, `attributes`) and attributes
/// keep their emission order, so serialized logs are byte-comparable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub tx_index: u64,
    pub name: String,
    pub attributes: Vec<(String, String)>,
}

impl Event {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Canonical single-line JSON.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("event serialization is infallible")
    }
}
