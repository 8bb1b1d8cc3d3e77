//! Instance files: one JSON document per file, atoms written as index lists
//! and rationals as `"num/den"` strings.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use setalg::algebra::{AtomUniverse, Element};
use setalg::fragmentation::Fragmentation;
use setalg::kelley::Measure;
use setalg::rational::{parse_rational, to_exact_string, Rational};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// A rational carried through JSON as its exact `"num/den"` text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRational(pub Rational);

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_exact_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text)
            .map(ExactRational)
            .map_err(de::Error::custom)
    }
}

/// Provenance of a generated instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Origin {
    pub generator: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FromMeasure {
    pub from_measure: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitLevels {
    pub depth: u32,
    /// `[atoms, level]` pairs; unlisted elements take the least level of a
    /// listed subset.
    pub levels: Vec<(Vec<u32>, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FragmentationSpec {
    FromMeasure(FromMeasure),
    Explicit(ExplicitLevels),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub atoms: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Vec<ExactRational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fragmentation: Option<FragmentationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
}

impl InstanceFile {
    pub fn new(atoms: u32) -> Self {
        Self {
            version: FORMAT_VERSION,
            atoms,
            sets: Vec::new(),
            measure: None,
            fragmentation: None,
            origin: None,
        }
    }

    /// Parses and checks atom ranges. Syntax errors carry line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        file.check()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("instance serializes");
        out.push('\n');
        out
    }

    fn check(&self) -> Result<(), CliError> {
        if self.version != FORMAT_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported version {}, expected {FORMAT_VERSION}",
                self.version
            )));
        }
        self.universe()?;
        let out_of_range = |list: &[u32]| list.iter().find(|&&a| a >= self.atoms).copied();
        for (i, set) in self.sets.iter().enumerate() {
            if let Some(a) = out_of_range(set) {
                return Err(CliError::Parse(format!(
                    "sets[{i}] mentions atom {a}, but atoms = {}",
                    self.atoms
                )));
            }
        }
        if let Some(w) = &self.measure {
            if w.len() != self.atoms as usize {
                return Err(CliError::Parse(format!(
                    "measure has {} weights for {} atoms",
                    w.len(),
                    self.atoms
                )));
            }
        }
        if let Some(FragmentationSpec::Explicit(ex)) = &self.fragmentation {
            for (i, (set, _)) in ex.levels.iter().enumerate() {
                if let Some(a) = out_of_range(set) {
                    return Err(CliError::Parse(format!(
                        "fragmentation.levels[{i}] mentions atom {a}, but atoms = {}",
                        self.atoms
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn universe(&self) -> Result<AtomUniverse, CliError> {
        AtomUniverse::new(self.atoms).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn family(&self) -> Result<Vec<Element>, CliError> {
        let u = self.universe()?;
        self.sets
            .iter()
            .map(|s| {
                u.from_atoms(s.iter().copied())
                    .map_err(|e| CliError::Parse(e.to_string()))
            })
            .collect()
    }

    pub fn measure(&self) -> Result<Measure, CliError> {
        let w = self
            .measure
            .as_ref()
            .ok_or_else(|| CliError::Usage("the instance has no measure".into()))?;
        Measure::new(self.universe()?, w.iter().map(|r| r.0.clone()).collect())
            .map_err(|e| CliError::Parse(e.to_string()))
    }

    /// Builds the fragmentation without validating it.
    pub fn fragmentation(&self) -> Result<Fragmentation, CliError> {
        match &self.fragmentation {
            None => Err(CliError::Usage("the instance has no fragmentation".into())),
            Some(FragmentationSpec::FromMeasure(FromMeasure {
                from_measure: false,
            })) => Err(CliError::Parse(
                "\"from_measure\": false names no fragmentation".into(),
            )),
            Some(FragmentationSpec::FromMeasure(_)) => {
                Fragmentation::from_measure(&self.measure()?)
                    .map_err(|e| CliError::Parse(e.to_string()))
            }
            Some(FragmentationSpec::Explicit(ex)) => {
                let u = self.universe()?;
                let pairs = ex
                    .levels
                    .iter()
                    .map(|(atoms, level)| Ok((u.from_atoms(atoms.iter().copied())?, *level)))
                    .collect::<Result<Vec<_>, setalg::algebra::AlgebraError>>()
                    .map_err(|e| CliError::Parse(e.to_string()))?;
                Fragmentation::from_assignments(u, ex.depth, &pairs)
                    .map_err(|e| CliError::Parse(e.to_string()))
            }
        }
    }

    pub fn set_measure(&mut self, m: &Measure) {
        self.measure = Some(m.weights().iter().cloned().map(ExactRational).collect());
    }

    /// Stores a fragmentation by its generators.
    pub fn set_fragmentation(&mut self, frag: &Fragmentation) -> Result<(), CliError> {
        let levels = frag
            .generators()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .into_iter()
            .map(|(e, level)| (e.atoms().collect(), level))
            .collect();
        self.fragmentation = Some(FragmentationSpec::Explicit(ExplicitLevels {
            depth: frag.depth(),
            levels,
        }));
        Ok(())
    }
}

pub fn atoms_of(e: &Element) -> Vec<u32> {
    e.atoms().collect()
}
