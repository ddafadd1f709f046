use serde::{Deserialize, Serialize};

use super::{AtomStructure, Triple};
use crate::error::Result;

/// Text dump of an atom structure: labels, identity, converse pairs and the
/// closed forbidden-triple list sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomStructureDump {
    pub atoms: Vec<String>,
    pub identity: usize,
    pub converse: Vec<[usize; 2]>,
    pub forbidden: Vec<[usize; 3]>,
}

impl From<&AtomStructure> for AtomStructureDump {
    fn from(a: &AtomStructure) -> Self {
        Self {
            atoms: a.labels().to_vec(),
            identity: a.identity(),
            converse: (0..a.atom_count()).map(|x| [x, a.converse(x)]).collect(),
            forbidden: a.forbidden_triples().into_iter().map(|(x, y, z)| [x, y, z]).collect(),
        }
    }
}

impl AtomStructureDump {
    /// JSON with one converse pair and one triple per line, so diffs stay readable.
    pub fn to_text(&self) -> String {
        let mut out = String::from("{\n");
        out.push_str(&format!("  \"atoms\": {},\n", json(&self.atoms)));
        out.push_str(&format!("  \"identity\": {},\n", self.identity));
        out.push_str(&format!("  \"converse\": {},\n", json(&self.converse)));
        out.push_str("  \"forbidden\": [");
        for (k, t) in self.forbidden.iter().enumerate() {
            out.push_str(if k == 0 { "\n    " } else { ",\n    " });
            out.push_str(&json(t));
        }
        out.push_str(if self.forbidden.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_structure(self) -> Result<AtomStructure> {
        let mut converse: Vec<usize> = (0..self.atoms.len()).collect();
        for [a, b] in &self.converse {
            if *a < converse.len() {
                converse[*a] = *b;
            }
        }
        let forbidden: Vec<Triple> = self.forbidden.iter().map(|&[a, b, c]| (a, b, c)).collect();
        AtomStructure::from_forbidden(self.atoms, self.identity, converse, forbidden)
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("dump serializes")
}
