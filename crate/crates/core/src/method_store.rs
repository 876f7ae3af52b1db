//! Method library: question/solution pairs at every depth, JSON-lines
//! persistence and backend-assisted pair extraction from raw text.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gateway::Gateway;

/// A measurable attribute value with its unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value: f64,
    pub unit: String,
}

impl Measurement {
    pub fn new(value: f64, unit: impl Into<String>) -> Self {
        Self {
            value,
            unit: unit.into(),
        }
    }
}

pub type Measurables = BTreeMap<String, Measurement>;

/// A question paired with the solution that answers it.
///
/// Depth 0 is a direct method; depth `i + 1` methods operate on depth-`i`
/// methods (validation, refinement). `scope` names the set of questions the
/// method covers and drives vertical/horizontal reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Method {
    pub id: String,
    pub question: String,
    pub solution: String,
    pub depth: u32,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub scope: BTreeSet<String>,
    #[serde(
        default,
        skip_serializing_if = "BTreeMap::is_empty",
        deserialize_with = "unique_measurables"
    )]
    pub measurable: Measurables,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub symbolic: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub tags: BTreeSet<String>,
}

impl Method {
    pub fn new(id: impl Into<String>, question: impl Into<String>, solution: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            question: question.into(),
            solution: solution.into(),
            depth: 0,
            scope: BTreeSet::new(),
            measurable: BTreeMap::new(),
            symbolic: BTreeSet::new(),
            tags: BTreeSet::new(),
        }
    }

    /// Builds a depth-0 method whose id is derived from its content.
    pub fn with_content_id(question: impl Into<String>, solution: impl Into<String>) -> Self {
        let question = question.into();
        let solution = solution.into();
        let id = content_id(&question, &solution);
        Self::new(id, question, solution)
    }

    pub fn with_depth(mut self, depth: u32) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_scope<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.scope = labels.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_measurable(mut self, name: impl Into<String>, value: Measurement) -> Self {
        self.measurable.insert(name.into(), value);
        self
    }

    pub fn with_symbolic<I, S>(mut self, tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.symbolic = tokens.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tags.insert(tag.into());
        self
    }

    pub fn is_direct(&self) -> bool {
        self.depth == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::EmptyField {
                id: self.id.clone(),
                field: "id",
            });
        }
        if self.question.trim().is_empty() {
            return Err(Error::EmptyField {
                id: self.id.clone(),
                field: "question",
            });
        }
        if self.solution.trim().is_empty() {
            return Err(Error::EmptyField {
                id: self.id.clone(),
                field: "solution",
            });
        }
        Ok(())
    }
}

/// `m-` followed by the first 12 hex digits of SHA-256(question \n solution).
pub fn content_id(question: &str, solution: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(question.trim().as_bytes());
    hasher.update(b"\n");
    hasher.update(solution.trim().as_bytes());
    let digest = hex::encode(hasher.finalize());
    format!("m-{}", &digest[..12])
}

fn unique_measurables<'de, D>(deserializer: D) -> std::result::Result<Measurables, D::Error>
where
    D: Deserializer<'de>,
{
    struct UniqueKeys;

    impl<'de> Visitor<'de> for UniqueKeys {
        type Value = Measurables;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map of measurable name to {value, unit}")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
            let mut out = BTreeMap::new();
            while let Some((key, value)) = access.next_entry::<String, Measurement>()? {
                if out.contains_key(&key) {
                    return Err(serde::de::Error::custom(format!("duplicate measurable `{key}`")));
                }
                out.insert(key, value);
            }
            Ok(out)
        }
    }

    deserializer.deserialize_map(UniqueKeys)
}

/// Ordered collection of methods with an id index.
///
/// Iteration order is insertion order so every downstream search is
/// deterministic.
#[derive(Debug, Clone, Default)]
pub struct MethodLibrary {
    methods: Vec<Method>,
    index: HashMap<String, usize>,
}

impl PartialEq for MethodLibrary {
    fn eq(&self, other: &Self) -> bool {
        self.methods == other.methods
    }
}

impl MethodLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, method: Method) -> Result<String> {
        method.validate()?;
        if self.index.contains_key(&method.id) {
            return Err(Error::DuplicateId(method.id));
        }
        let id = method.id.clone();
        self.index.insert(id.clone(), self.methods.len());
        self.methods.push(method);
        Ok(id)
    }

    pub fn get(&self, id: &str) -> Option<&Method> {
        self.index.get(id).map(|&i| &self.methods[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Method> {
        self.methods.iter()
    }

    pub fn methods(&self) -> &[Method] {
        &self.methods
    }

    /// Methods of exactly the given depth, in insertion order.
    pub fn at_depth(&self, depth: u32) -> impl Iterator<Item = &Method> {
        self.methods.iter().filter(move |m| m.depth == depth)
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut library = Self::new();
        for (n, line) in reader.lines().enumerate() {
            let line_no = n + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let method: Method = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            library.add(method).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(library)
    }

    pub fn to_writer<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for method in &self.methods {
            serde_json::to_writer(&mut writer, method)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }
}

impl<'a> IntoIterator for &'a MethodLibrary {
    type Item = &'a Method;
    type IntoIter = std::slice::Iter<'a, Method>;

    fn into_iter(self) -> Self::IntoIter {
        self.methods.iter()
    }
}

/// Asks the backend to split `raw_text` into question/solution pairs and
/// parses the `Q:` / `S:` lines of its answer into depth-0 methods.
pub fn separate_pairs(raw_text: &str, gateway: &Gateway) -> Result<Vec<Method>> {
    if raw_text.trim().is_empty() {
        return Err(Error::Precondition("raw text is empty".into()));
    }
    let prompt = gateway.render("pair_separation", &[("content", raw_text)])?;
    let response = gateway.complete(&prompt)?;
    let pairs = parse_pairs(&response)?;

    let mut seen = BTreeSet::new();
    Ok(pairs
        .into_iter()
        .map(|(q, s)| Method::with_content_id(q, s))
        .filter(|m| seen.insert(m.id.clone()))
        .collect())
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Question,
    Solution,
}

fn strip_decoration(line: &str) -> &str {
    let mut s = line.trim();
    loop {
        let before = s;
        s = s.trim_start_matches(['-', '*', '>', '#', '•']).trim_start();
        if let Some(rest) = s.strip_prefix(|c: char| c.is_ascii_digit()) {
            let rest = rest.trim_start_matches(|c: char| c.is_ascii_digit());
            if let Some(rest) = rest.strip_prefix(['.', ')']) {
                s = rest.trim_start();
            }
        }
        if s == before {
            return s;
        }
    }
}

fn field_label(line: &str) -> Option<(Field, &str)> {
    let line = strip_decoration(line);
    let (label, rest) = line.split_once(':')?;
    let label = label.trim().trim_matches('*').trim();
    let rest = rest.trim_start_matches('*').trim();
    match label {
        "Q" | "q" => Some((Field::Question, rest)),
        "S" | "s" => Some((Field::Solution, rest)),
        _ => None,
    }
}

/// Extracts `(question, solution)` pairs from a response. Prose around the
/// pairs is ignored; a solution may continue over following lines until a
/// blank line or the next `Q:`.
pub fn parse_pairs(response: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut question: Option<String> = None;
    let mut solution: Option<String> = None;
    let mut current: Option<Field> = None;

    let mut flush = |q: &mut Option<String>, s: &mut Option<String>| {
        if let (Some(qv), Some(sv)) = (q.take(), s.take()) {
            if !qv.trim().is_empty() && !sv.trim().is_empty() {
                pairs.push((qv.trim().to_string(), sv.trim().to_string()));
            }
        }
    };

    for line in response.lines() {
        match field_label(line) {
            Some((Field::Question, text)) => {
                flush(&mut question, &mut solution);
                question = Some(text.to_string());
                current = Some(Field::Question);
            }
            Some((Field::Solution, text)) => {
                if question.is_some() {
                    solution = Some(text.to_string());
                    current = Some(Field::Solution);
                }
            }
            None if line.trim().is_empty() => {
                if current == Some(Field::Solution) {
                    current = None;
                }
            }
            None => {
                let target = match current {
                    Some(Field::Question) => question.as_mut(),
                    Some(Field::Solution) => solution.as_mut(),
                    None => None,
                };
                if let Some(buf) = target {
                    buf.push(' ');
                    buf.push_str(line.trim());
                }
            }
        }
    }
    flush(&mut question, &mut solution);

    if pairs.is_empty() {
        Err(Error::UnparseableResponse)
    } else {
        Ok(pairs)
    }
}
