//! JSON circuit files.
//!
//! ```json
//! {
//!   "modes": ["a", "b"],
//!   "inputs": ["a", "b"],
//!   "outputs": ["a", "b"],
//!   "elements": [{ "type": "bs", "modes": ["a", "b"], "r": 0.5 }]
//! }
//! ```
//!
//! Element types: `bs {modes, r}`, `phase {mode, phi}`, `permute {map}`,
//! `inject {mode, photons}`, `detect {mode, expect, model}`. Modes are
//! referenced by label; angles are radians. Unknown fields are rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Circuit, Element, Routing};
use crate::detection::DetectorModel;
use crate::error::{Error, Result};
use crate::fock::ModeRegistry;
use crate::optics::{BeamSplitter, PhaseShift};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    modes: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    elements: Vec<ElementFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ElementFile {
    Bs { modes: [String; 2], r: f64 },
    Phase { mode: String, phi: f64 },
    Permute { map: BTreeMap<String, String> },
    Inject { mode: String, photons: u8 },
    Detect {
        mode: String,
        expect: u8,
        model: DetectorModel,
    },
}

fn lookup(registry: &ModeRegistry, element: Option<usize>, label: &str) -> Result<usize> {
    registry.index_of(label).ok_or_else(|| match element {
        Some(i) => Error::Element {
            element: i,
            message: format!("undeclared mode `{label}`"),
        },
        None => Error::UnknownMode(label.to_string()),
    })
}

fn convert(registry: &ModeRegistry, index: usize, el: ElementFile) -> Result<Element> {
    let at = |e: Error| Error::Element {
        element: index,
        message: e.to_string(),
    };
    let mode = |label: &str| lookup(registry, Some(index), label);
    Ok(match el {
        ElementFile::Bs { modes: [a, b], r } => {
            Element::BeamSplitter(BeamSplitter::new(mode(&a)?, mode(&b)?, r).map_err(at)?)
        }
        ElementFile::Phase { mode: m, phi } => {
            Element::Phase(PhaseShift::new(mode(&m)?, phi).map_err(at)?)
        }
        ElementFile::Permute { map } => {
            let pairs = map
                .iter()
                .map(|(from, to)| Ok((mode(from)?, mode(to)?)))
                .collect::<Result<Vec<_>>>()?;
            Element::Permute(Routing::new(registry.len(), pairs).map_err(at)?)
        }
        ElementFile::Inject { mode: m, photons } => Element::Inject {
            mode: mode(&m)?,
            photons,
        },
        ElementFile::Detect {
            mode: m,
            expect,
            model,
        } => Element::Detect {
            mode: mode(&m)?,
            expect,
            model,
        },
    })
}

/// Parses and validates a circuit file.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let file: CircuitFile = serde_json::from_str(text)?;
    let registry = Arc::new(ModeRegistry::new(file.modes)?);
    let elements = file
        .elements
        .into_iter()
        .enumerate()
        .map(|(i, el)| convert(&registry, i, el))
        .collect::<Result<Vec<_>>>()?;
    let inputs = file
        .inputs
        .iter()
        .map(|l| lookup(&registry, None, l))
        .collect::<Result<Vec<_>>>()?;
    let outputs = file
        .outputs
        .iter()
        .map(|l| lookup(&registry, None, l))
        .collect::<Result<Vec<_>>>()?;
    Circuit::new(registry, elements, inputs, outputs)
}

/// Pretty-printed JSON; mode order and element order are preserved.
pub fn serialize_circuit(circuit: &Circuit) -> String {
    let reg = circuit.registry();
    let label = |i: usize| reg.labels()[i].clone();
    let elements = circuit
        .elements()
        .iter()
        .map(|el| match el {
            Element::BeamSplitter(bs) => ElementFile::Bs {
                modes: [label(bs.mode_a), label(bs.mode_b)],
                r: bs.reflectivity,
            },
            Element::Phase(p) => ElementFile::Phase {
                mode: label(p.mode),
                phi: p.phi,
            },
            Element::Permute(r) => ElementFile::Permute {
                map: r.pairs().iter().map(|&(a, b)| (label(a), label(b))).collect(),
            },
            Element::Inject { mode, photons } => ElementFile::Inject {
                mode: label(*mode),
                photons: *photons,
            },
            Element::Detect {
                mode,
                expect,
                model,
            } => ElementFile::Detect {
                mode: label(*mode),
                expect: *expect,
                model: *model,
            },
        })
        .collect();
    let file = CircuitFile {
        modes: reg.labels().to_vec(),
        inputs: circuit.inputs().iter().map(|&i| label(i)).collect(),
        outputs: circuit.outputs().iter().map(|&i| label(i)).collect(),
        elements,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("circuit files always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_filter_circuit, FilterSpec};

    #[test]
    fn filter_round_trip() {
        let c = build_filter_circuit(&FilterSpec::default()).unwrap();
        let text = serialize_circuit(&c);
        let back = parse_circuit(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(serialize_circuit(&back), text);
    }

    #[test]
    fn undeclared_mode_names_element() {
        let text = r#"{"modes":["p1H"],"inputs":[],"outputs":[],
            "elements":[{"type":"phase","mode":"p1H","phi":0.1},
                        {"type":"phase","mode":"p3H","phi":0.0}]}"#;
        let err = parse_circuit(text).unwrap_err().to_string();
        assert!(err.contains("element 1"), "{err}");
        assert!(err.contains("p3H"), "{err}");
    }

    #[test]
    fn detect_then_split_rejected() {
        let text = r#"{"modes":["a","b"],"inputs":["a"],"outputs":["a"],
            "elements":[{"type":"detect","mode":"b","expect":0,"model":{"kind":"ideal","eta":1.0,"dark":0.0}},
                        {"type":"bs","modes":["a","b"],"r":0.5}]}"#;
        assert!(matches!(
            parse_circuit(text),
            Err(Error::UseAfterDetect { element: 1, .. })
        ));
    }

    #[test]
    fn unknown_element_and_fields() {
        let unknown_type = r#"{"modes":["a"],"inputs":[],"outputs":[],"elements":[{"type":"mirror","mode":"a"}]}"#;
        assert!(matches!(parse_circuit(unknown_type), Err(Error::Json(_))));
        let extra_field = r#"{"modes":["a"],"inputs":[],"outputs":[],"elements":[{"type":"phase","mode":"a","phi":0.0,"gain":2}]}"#;
        assert!(matches!(parse_circuit(extra_field), Err(Error::Json(_))));
        let extra_top = r#"{"modes":["a"],"inputs":[],"outputs":[],"elements":[],"notes":"x"}"#;
        assert!(matches!(parse_circuit(extra_top), Err(Error::Json(_))));
        let bad_number = r#"{"modes":["a"],"inputs":[],"outputs":[],"elements":[{"type":"inject","mode":"a","photons":-1}]}"#;
        assert!(matches!(parse_circuit(bad_number), Err(Error::Json(_))));
    }

    #[test]
    fn invalid_values_name_element() {
        let text = r#"{"modes":["a","b"],"inputs":[],"outputs":[],"elements":[{"type":"bs","modes":["a","b"],"r":1.5}]}"#;
        assert!(matches!(
            parse_circuit(text),
            Err(Error::Element { element: 0, .. })
        ));
        let lossy_ideal = r#"{"modes":["a"],"inputs":[],"outputs":[],
            "elements":[{"type":"detect","mode":"a","expect":0,"model":{"kind":"ideal","eta":0.5,"dark":0.0}}]}"#;
        assert!(matches!(
            parse_circuit(lossy_ideal),
            Err(Error::Element { element: 0, .. })
        ));
    }
}
