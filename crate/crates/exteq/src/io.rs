//! JSON artifacts. Every file carries a `format_version`; parse errors
//! name the JSON path of the offending field and its line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{FgaElement, FgaGroup};
use crate::automata::{Fsa, FsaFile};
use crate::extension::{CentralExtension, Coords, ExtElement};
use crate::fpa_ppa::{Fpa, Ppa};
use crate::reduction::{Certificate, EquationSystem};
use crate::words::{Group, Presentation, WordProblem};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{file}: {source}")]
    Read { file: PathBuf, source: std::io::Error },
    #[error("{file}: line {line}, column {column}: at `{path}`: {message}")]
    Schema { file: String, path: String, line: usize, column: usize, message: String },
    #[error("{file}: format_version {found} is not supported (expected {FORMAT_VERSION})")]
    Version { file: String, found: u32 },
    #[error("{file}: at `{path}`: {message}")]
    Invalid { file: String, path: String, message: String },
}

/// Artifacts that carry a format version.
pub trait Versioned {
    fn format_version(&self) -> u32;
}

/// Parses `text`; `file` names the source in errors.
pub fn from_json<T: DeserializeOwned + Versioned>(text: &str, file: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        IoError::Schema { file: file.into(), path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })?;
    if value.format_version() != FORMAT_VERSION {
        return Err(IoError::Version { file: file.into(), found: value.format_version() });
    }
    Ok(value)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

pub fn read<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read { file: path.into(), source })?;
    from_json(&text, &path.display().to_string())
}

pub fn write<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    std::fs::write(path, to_json(value)).map_err(|source| IoError::Read { file: path.into(), source })
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn format_version(&self) -> u32 {
                self.format_version
            }
        })*
    };
}

versioned!(ExtensionFile, EquationsFile, AutomatonFile, FpaArtifact, PpaArtifact, Certificate, CorpusFile);

/// A central extension: presentation of the base, kernel and one lift per
/// relator, with `r = i(lift)` in `E`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub generators: String,
    pub relators: Vec<String>,
    pub kernel: FgaGroup,
    pub relator_lifts: Vec<FgaElement>,
    #[serde(default)]
    pub word_problem: WordProblem,
    /// Hyperbolicity constant as a rational, e.g. `"3/2"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
}

impl ExtensionFile {
    pub fn build(&self, file: &str) -> Result<CentralExtension, IoError> {
        let invalid = |path: &str, message: String| IoError::Invalid { file: file.into(), path: path.into(), message };
        let rels: Vec<&str> = self.relators.iter().map(String::as_str).collect();
        let mut p = Presentation::parse(&self.generators, &rels).map_err(|e| invalid("relators", e.to_string()))?;
        p = p.with_word_problem(self.word_problem);
        if let Some(d) = &self.delta {
            p = p.with_delta(BigRational::from_str(d).map_err(|e| invalid("delta", e.to_string()))?);
        }
        let kernel = FgaGroup::new(self.kernel.rank, self.kernel.torsion.clone())
            .map_err(|e| invalid("kernel", e.to_string()))?;
        for (i, z) in self.relator_lifts.iter().enumerate() {
            if !kernel.contains(z) {
                return Err(invalid(&format!("relator_lifts[{i}]"), format!("{z} is not in {}", kernel.describe())));
            }
        }
        let base = Group::new(p, WordProblem::Auto).map_err(|e| invalid("relators", e.to_string()))?;
        CentralExtension::new(base, kernel, self.relator_lifts.clone()).map_err(|e| invalid("relator_lifts", e.to_string()))
    }

    pub fn of(ext: &CentralExtension, name: Option<String>) -> Self {
        let p = &ext.base.presentation;
        ExtensionFile {
            format_version: FORMAT_VERSION,
            name,
            generators: p.alphabet.generators().iter().collect(),
            relators: p.relators.iter().map(|r| p.alphabet.render(r)).collect(),
            kernel: ext.kernel.clone(),
            relator_lifts: ext.relator_lifts.clone(),
            word_problem: p.word_problem,
            delta: p.delta.as_ref().map(|d| d.to_string()),
        }
    }
}

/// An element of `E`, either spelled as a word in the lifted generators or
/// given in `rho` coordinates as a base word and a kernel element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<FgaElement>,
}

impl ElementSpec {
    pub fn resolve(&self, ext: &CentralExtension, file: &str, path: &str) -> Result<ExtElement, IoError> {
        let invalid = |message: String| IoError::Invalid { file: file.into(), path: path.into(), message };
        let al = &ext.base.presentation.alphabet;
        match (&self.word, &self.g) {
            (Some(w), None) if self.a.is_none() => Ok(ext.evaluate(&al.parse(w).map_err(|e| invalid(e.to_string()))?)),
            (None, Some(g)) => {
                let g = ext.nf(&al.parse(g).map_err(|e| invalid(e.to_string()))?);
                let a = self.a.clone().unwrap_or_else(|| ext.kernel.zero());
                if !ext.kernel.contains(&a) {
                    return Err(invalid(format!("{a} is not in {}", ext.kernel.describe())));
                }
                Ok(ext.element(Coords::Rho, &g, a))
            }
            _ => Err(invalid("give either `word`, or `g` with an optional `a`".into())),
        }
    }
}

/// `{variables, constants: {name: element}, equations: ["x a X b", ...]}`;
/// an upper-case name is the inverse of the lower-case one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationsFile {
    pub format_version: u32,
    pub variables: Vec<String>,
    #[serde(default)]
    pub constants: BTreeMap<String, ElementSpec>,
    pub equations: Vec<String>,
}

impl EquationsFile {
    pub fn build(&self, ext: &CentralExtension, file: &str) -> Result<EquationSystem, IoError> {
        let constants = self
            .constants
            .iter()
            .map(|(n, spec)| Ok((n.clone(), spec.resolve(ext, file, &format!("constants.{n}"))?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        let eqs: Vec<&str> = self.equations.iter().map(String::as_str).collect();
        EquationSystem::parse(self.variables.clone(), constants, &eqs).map_err(|e| IoError::Invalid {
            file: file.into(),
            path: "equations".into(),
            message: e.to_string(),
        })
    }

    /// Constants are written in `rho` coordinates.
    pub fn of(ext: &CentralExtension, sys: &EquationSystem) -> Self {
        let al = &ext.base.presentation.alphabet;
        EquationsFile {
            format_version: FORMAT_VERSION,
            variables: sys.variables.clone(),
            constants: sys
                .constants
                .iter()
                .map(|(n, e)| (n.clone(), ElementSpec { word: None, g: Some(al.render(&e.g)), a: Some(e.a.clone()) }))
                .collect(),
            equations: sys.equations.iter().map(|eq| sys.render_equation(eq)).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub format_version: u32,
    pub automaton: FsaFile,
}

impl AutomatonFile {
    pub fn of(m: &Fsa) -> Self {
        AutomatonFile { format_version: FORMAT_VERSION, automaton: m.clone().into() }
    }

    /// The automaton, completed with a sink state when the transition table
    /// is partial; the flag reports whether that happened.
    pub fn build(&self, file: &str) -> Result<(Fsa, bool), IoError> {
        let f = &self.automaton;
        let partial = f.transitions.len() < f.states * f.alphabet.len();
        let m = Fsa::try_from(f.clone()).map_err(|e| IoError::Invalid {
            file: file.into(),
            path: "automaton".into(),
            message: e.to_string(),
        })?;
        Ok((m, partial))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpaArtifact {
    pub format_version: u32,
    pub fpa: Fpa,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpaArtifact {
    pub format_version: u32,
    pub ppa: Ppa,
}

/// Expected verdict per equation file of a corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusFile {
    pub format_version: u32,
    pub extension: String,
    pub entries: Vec<CorpusEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub equations: String,
    /// `solved` or `unsolvable`.
    pub expected: String,
}
