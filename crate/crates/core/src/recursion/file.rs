use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Generator, Letter, RecursionSystem, RootPerm, Word};
use crate::error::{Error, Result};

/// One generator record as it appears in a recursion file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    /// 1-based images.
    pub perm: Vec<usize>,
    pub sections: Vec<String>,
}

impl GeneratorSpec {
    pub fn new(name: &str, perm: Vec<usize>, sections: &[&str]) -> Self {
        GeneratorSpec {
            name: name.to_string(),
            perm,
            sections: sections.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub alphabet_size: usize,
    pub generators: Vec<GeneratorSpec>,
}

impl SystemFile {
    pub fn from_system(system: &RecursionSystem) -> Self {
        SystemFile {
            alphabet_size: system.degree(),
            generators: system
                .generators()
                .iter()
                .map(|g| GeneratorSpec {
                    name: g.name.clone(),
                    perm: g.perm.one_based(),
                    sections: g.sections.iter().map(|w| system.format_word(w)).collect(),
                })
                .collect(),
        }
    }
}

pub fn parse_system(text: &str) -> Result<Arc<RecursionSystem>> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    build_system(file.alphabet_size, &file.generators, None)
}

/// Canonical text: pretty JSON with fields in declaration order and a final newline.
pub fn serialize_system(system: &RecursionSystem) -> String {
    let mut text = serde_json::to_string_pretty(&SystemFile::from_system(system))
        .expect("plain data serializes");
    text.push('\n');
    text
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
        && name != "e"
}

pub(crate) fn build_system(
    degree: usize,
    specs: &[GeneratorSpec],
    base: Option<&Arc<RecursionSystem>>,
) -> Result<Arc<RecursionSystem>> {
    if degree < 2 {
        return Err(Error::Parse {
            location: "alphabet_size".into(),
            message: format!("must be at least 2, got {degree}"),
        });
    }
    let offset = base.map_or(0, |b| b.generators().len());
    let mut names: Vec<&str> = base
        .map(|b| b.generators().iter().map(|g| g.name.as_str()).collect())
        .unwrap_or_default();
    for (i, spec) in specs.iter().enumerate() {
        let location = format!("generators[{}].name", i);
        if !valid_name(&spec.name) {
            return Err(Error::Parse {
                location,
                message: format!("invalid generator name {:?}", spec.name),
            });
        }
        if names.contains(&spec.name.as_str()) {
            return Err(Error::Parse {
                location,
                message: format!("duplicate generator name `{}`", spec.name),
            });
        }
        names.push(&spec.name);
    }
    let lookup = |name: &str| names.iter().position(|n| *n == name).map(|i| i as u32);

    let mut generators = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        if spec.perm.len() != degree {
            return Err(Error::Parse {
                location: format!("generators[{i}].perm"),
                message: format!("expected {degree} images, got {}", spec.perm.len()),
            });
        }
        let perm = RootPerm::from_one_based(&spec.perm).ok_or_else(|| Error::NonBijective {
            location: format!("generators[{i}].perm"),
        })?;
        if spec.sections.len() != degree {
            return Err(Error::Parse {
                location: format!("generators[{i}].sections"),
                message: format!("expected {degree} sections, got {}", spec.sections.len()),
            });
        }
        let sections = spec
            .sections
            .iter()
            .enumerate()
            .map(|(j, text)| parse_word(text, &lookup, &format!("generators[{i}].sections[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        generators.push(Generator {
            name: spec.name.clone(),
            perm,
            sections,
        });
    }
    debug_assert!(generators.len() + offset == names.len());
    match base {
        Some(b) => b.extend_with(generators),
        None => RecursionSystem::new(degree, generators),
    }
}

/// Parses `name`, `name^k` (k ≠ 0) tokens separated by whitespace; `e` is the identity.
pub(crate) fn parse_word(
    text: &str,
    lookup: &dyn Fn(&str) -> Option<u32>,
    location: &str,
) -> Result<Word> {
    let mut letters = Vec::new();
    for token in text.split_whitespace() {
        let (name, exponent) = match token.split_once('^') {
            Some((name, exp)) => {
                let k: i64 = exp.parse().map_err(|_| Error::Parse {
                    location: location.to_string(),
                    message: format!("bad exponent in `{token}`"),
                })?;
                if k == 0 {
                    return Err(Error::Parse {
                        location: location.to_string(),
                        message: format!("zero exponent in `{token}`"),
                    });
                }
                (name, k)
            }
            None => (token, 1),
        };
        if name == "e" {
            if exponent != 1 {
                return Err(Error::Parse {
                    location: location.to_string(),
                    message: "the identity `e` takes no exponent".into(),
                });
            }
            continue;
        }
        let index = lookup(name).ok_or_else(|| Error::UnknownGenerator {
            name: name.to_string(),
            location: location.to_string(),
        })?;
        let letter = Letter::new(index, exponent < 0);
        letters.extend(std::iter::repeat_n(letter, exponent.unsigned_abs() as usize));
    }
    if letters.is_empty() && text.split_whitespace().next().is_none() {
        return Err(Error::Parse {
            location: location.to_string(),
            message: "empty word; write `e` for the identity".into(),
        });
    }
    Ok(Word::new(letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRIGORCHUK: &str = r#"{
  "alphabet_size": 2,
  "generators": [
    { "name": "a", "perm": [2, 1], "sections": ["e", "e"] },
    { "name": "b", "perm": [1, 2], "sections": ["a", "c"] },
    { "name": "c", "perm": [1, 2], "sections": ["a", "d"] },
    { "name": "d", "perm": [1, 2], "sections": ["e", "b"] }
  ]
}"#;

    #[test]
    fn parses_and_round_trips() {
        let s = parse_system(GRIGORCHUK).unwrap();
        assert_eq!(s.degree(), 2);
        assert_eq!(s.generators().len(), 4);
        let text = serialize_system(&s);
        let again = parse_system(&text).unwrap();
        assert_eq!(serialize_system(&again), text);
        assert!(text.find("alphabet_size").unwrap() < text.find("generators").unwrap());
    }

    #[test]
    fn adding_machine_file() {
        let s = parse_system(
            r#"{"alphabet_size": 2, "generators": [{"name": "t", "perm": [2, 1], "sections": ["e", "t"]}]}"#,
        )
        .unwrap();
        assert_eq!(s.generators().len(), 1);
        assert_eq!(s.format_word(&s.generators()[0].sections[1]), "t");
    }

    #[test]
    fn rejects_non_bijective_perm() {
        let err = parse_system(
            r#"{"alphabet_size": 2, "generators": [{"name": "a", "perm": [1, 1], "sections": ["e", "e"]}]}"#,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::NonBijective {
                location: "generators[0].perm".into()
            }
        );
    }

    #[test]
    fn rejects_unknown_names_with_location() {
        let err = parse_system(
            r#"{"alphabet_size": 2, "generators": [{"name": "a", "perm": [2, 1], "sections": ["e", "z^-1"]}]}"#,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::UnknownGenerator {
                name: "z".into(),
                location: "generators[0].sections[1]".into()
            }
        );
    }

    #[test]
    fn exponents() {
        let s = parse_system(GRIGORCHUK).unwrap();
        let w = s.parse_word("a^2 b^-3 e c").unwrap();
        assert_eq!(s.format_word(&w), "a^2 b^-3 c");
        assert!(s.parse_word("a^0").is_err());
        assert!(s.parse_word("").is_err());
        assert!(s.parse_word("e").unwrap().is_empty());
    }
}
