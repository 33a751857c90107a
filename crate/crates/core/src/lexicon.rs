//! Concepts, forms, lexicons, encodings, and the need/production estimate.
//!
//! A [`Universe`] holds every concept a listener can recover (existing senses
//! and emerging concepts alike). A [`Lexicon`] is the existing form-concept
//! inventory with frequencies. An [`Encoding`] labels each emerging concept
//! with exactly one form, either an existing form (reuse) or a two-constituent
//! combination of existing forms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Concepts
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub gloss: String,
    pub embedding: Vec<f64>,
    /// Prior weight used when production is estimated by relabeling.
    pub english_need_weight: f64,
}

/// The set of concepts over which listener distributions are normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct Universe {
    concepts: Vec<Concept>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
    dim: usize,
}

impl Universe {
    pub fn new(concepts: Vec<Concept>) -> Result<Self> {
        let dim = concepts.first().map(|c| c.embedding.len()).unwrap_or(0);
        let mut index = HashMap::with_capacity(concepts.len());
        let mut norms = Vec::with_capacity(concepts.len());
        for (i, c) in concepts.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::DuplicateConcept(c.id.clone()));
            }
            if c.embedding.len() != dim {
                return Err(Error::DimensionMismatch {
                    id: c.id.clone(),
                    expected: dim,
                    found: c.embedding.len(),
                });
            }
            if c.embedding.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "embedding for `{}` has non-finite entries",
                    c.id
                )));
            }
            let norm = crate::semantics::norm(&c.embedding);
            if norm == 0.0 {
                return Err(Error::ZeroNorm(Some(c.id.clone())));
            }
            if !(c.english_need_weight >= 0.0) || !c.english_need_weight.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "need weight for `{}` must be a finite non-negative number",
                    c.id
                )));
            }
            norms.push(norm);
        }
        Ok(Universe {
            concepts,
            norms,
            index,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, idx: usize) -> &Concept {
        &self.concepts[idx]
    }

    pub fn norm(&self, idx: usize) -> f64 {
        self.norms[idx]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Concept> {
        self.index_of(id).map(|i| &self.concepts[i])
    }

    pub(crate) fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }
}

#[derive(Deserialize)]
struct ConceptRow {
    id: String,
    #[serde(default)]
    gloss: String,
    need_weight: Option<f64>,
}

#[derive(Deserialize)]
struct EmbeddingRow {
    id: String,
    vec: Vec<f64>,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| Error::parse(path, n + 1, e.to_string()))?;
        out.push((n + 1, row));
    }
    Ok(out)
}

/// Reads the concepts and embeddings JSON-lines files into a validated universe.
pub fn load_universe(concepts_path: &Path, embeddings_path: &Path) -> Result<Universe> {
    let concept_rows: Vec<(usize, ConceptRow)> = read_jsonl(concepts_path)?;
    let embedding_rows: Vec<(usize, EmbeddingRow)> = read_jsonl(embeddings_path)?;

    let mut vectors: HashMap<String, Vec<f64>> = HashMap::with_capacity(embedding_rows.len());
    for (line, row) in embedding_rows {
        if vectors.contains_key(&row.id) {
            return Err(Error::parse(
                embeddings_path,
                line,
                format!("duplicate embedding row for `{}`", row.id),
            ));
        }
        vectors.insert(row.id, row.vec);
    }

    let mut concepts = Vec::with_capacity(concept_rows.len());
    let mut seen = BTreeSet::new();
    for (_, row) in concept_rows {
        if !seen.insert(row.id.clone()) {
            return Err(Error::DuplicateConcept(row.id));
        }
        let embedding = vectors
            .remove(&row.id)
            .ok_or_else(|| Error::MissingEmbedding(row.id.clone()))?;
        concepts.push(Concept {
            id: row.id,
            gloss: row.gloss,
            embedding,
            english_need_weight: row.need_weight.unwrap_or(1.0),
        });
    }
    if let Some(extra) = vectors.keys().min() {
        return Err(Error::UnknownConcept(extra.clone()));
    }
    Universe::new(concepts)
}

/// Writes the two JSON-lines files [`load_universe`] reads.
pub fn write_universe<C: Write, E: Write>(universe: &Universe, mut concepts: C, mut embeddings: E) -> Result<()> {
    let io = |e: std::io::Error| Error::io("<universe>", e);
    for c in universe.concepts() {
        let row = serde_json::json!({ "id": c.id, "gloss": c.gloss, "need_weight": c.english_need_weight });
        writeln!(concepts, "{row}").map_err(io)?;
        let row = serde_json::json!({ "id": c.id, "vec": c.embedding });
        writeln!(embeddings, "{row}").map_err(io)?;
    }
    concepts.flush().map_err(io)?;
    embeddings.flush().map_err(io)
}

// ---------------------------------------------------------------------------
// Forms
// ---------------------------------------------------------------------------

/// How form lengths are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthMode {
    /// Character count of the surface string, separators included.
    #[default]
    Orthographic,
    /// Lengths come from an input column (e.g. phoneme counts).
    Provided,
}

impl FromStr for LengthMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orthographic" => Ok(LengthMode::Orthographic),
            "provided" | "phonemic" => Ok(LengthMode::Provided),
            other => Err(Error::config("length_mode", format!("unknown value `{other}`"))),
        }
    }
}

impl fmt::Display for LengthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LengthMode::Orthographic => "orthographic",
            LengthMode::Provided => "provided",
        })
    }
}

/// Which constituent of a two-part form is the syntactic head.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadPosition {
    #[default]
    Final,
    Initial,
}

impl FromStr for HeadPosition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "final" | "right" => Ok(HeadPosition::Final),
            "initial" | "left" => Ok(HeadPosition::Initial),
            other => Err(Error::config("head_position", format!("unknown value `{other}`"))),
        }
    }
}

impl fmt::Display for HeadPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeadPosition::Final => "final",
            HeadPosition::Initial => "initial",
        })
    }
}

impl HeadPosition {
    /// Splits `[a, b]` into `(modifier, head)`.
    pub fn split<'a>(&self, constituents: &'a [String]) -> Option<(&'a str, &'a str)> {
        match (constituents, self) {
            ([a, b], HeadPosition::Final) => Some((a, b)),
            ([a, b], HeadPosition::Initial) => Some((b, a)),
            _ => None,
        }
    }

    /// Orders `(modifier, head)` into surface order.
    pub fn arrange<T>(&self, modifier: T, head: T) -> (T, T) {
        match self {
            HeadPosition::Final => (modifier, head),
            HeadPosition::Initial => (head, modifier),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Form {
    pub surface: String,
    /// One entry for an atomic form, two for a combination.
    pub constituents: Vec<String>,
    pub length_units: u32,
    pub word_classes: BTreeSet<String>,
}

impl Form {
    /// An atomic form with orthographic length.
    pub fn atomic(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        Form {
            length_units: orthographic_length(&surface),
            constituents: vec![surface.clone()],
            surface,
            word_classes: BTreeSet::new(),
        }
    }

    /// Concatenates two forms with one separator character.
    ///
    /// Orthographic length counts the separator; provided lengths are summed.
    pub fn combine(first: &Form, second: &Form, separator: char, mode: LengthMode) -> Self {
        let surface = format!("{}{}{}", first.surface, separator, second.surface);
        let length_units = match mode {
            LengthMode::Orthographic => orthographic_length(&surface),
            LengthMode::Provided => first.length_units + second.length_units,
        };
        Form {
            surface,
            constituents: vec![first.surface.clone(), second.surface.clone()],
            length_units,
            word_classes: BTreeSet::new(),
        }
    }

    pub fn is_combination(&self) -> bool {
        self.constituents.len() == 2
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

pub fn orthographic_length(surface: &str) -> u32 {
    surface.chars().count() as u32
}

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct LexiconEntry {
    pub form: Form,
    pub concept_id: String,
    pub form_frequency: f64,
    pub sense_frequency: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconSettings {
    pub separator: char,
    pub head_position: HeadPosition,
    pub length_mode: LengthMode,
}

impl Default for LexiconSettings {
    fn default() -> Self {
        LexiconSettings {
            separator: ' ',
            head_position: HeadPosition::Final,
            length_mode: LengthMode::Orthographic,
        }
    }
}

/// A distinct form of the lexicon with its senses.
#[derive(Clone, Debug, PartialEq)]
pub struct LexicalForm {
    pub form: Form,
    pub form_frequency: f64,
    /// `(universe index, sense frequency)` in input order.
    pub senses: Vec<(usize, f64)>,
}

/// Resolved identity of a form's meaning: an existing form of the lexicon,
/// or an ordered pair of existing forms combined additively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormKey {
    Unit(usize),
    Pair(usize, usize),
}

/// A point of the search space shared by the frontier and the random
/// baseline: an existing form, optionally followed by a second one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    pub first: usize,
    pub second: Option<usize>,
}

impl Candidate {
    pub fn single(first: usize) -> Self {
        Candidate { first, second: None }
    }

    pub fn pair(first: usize, second: usize) -> Self {
        Candidate {
            first,
            second: Some(second),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    settings: LexiconSettings,
    forms: Vec<LexicalForm>,
    form_index: HashMap<String, usize>,
    /// Ordered pairs whose concatenated surface is itself a form of the lexicon.
    pair_alias: HashMap<(usize, usize), usize>,
}

impl Lexicon {
    pub fn new(entries: Vec<LexiconEntry>, universe: &Universe, settings: LexiconSettings) -> Result<Self> {
        let mut forms: Vec<LexicalForm> = Vec::new();
        let mut form_index: HashMap<String, usize> = HashMap::new();
        let mut pairs = BTreeSet::new();

        for e in &entries {
            let concept = universe.require(&e.concept_id)?;
            for value in [e.form_frequency, e.sense_frequency] {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(Error::NegativeFrequency {
                        surface: e.form.surface.clone(),
                        concept: e.concept_id.clone(),
                        value,
                    });
                }
            }
            if e.form.length_units == 0 {
                return Err(Error::InconsistentForm {
                    surface: e.form.surface.clone(),
                    message: "length must be at least 1".into(),
                });
            }
            if e.form.constituents.is_empty() || e.form.constituents.len() > 2 {
                return Err(Error::InconsistentForm {
                    surface: e.form.surface.clone(),
                    message: "a form has one or two constituents".into(),
                });
            }
            if !pairs.insert((e.form.surface.clone(), e.concept_id.clone())) {
                return Err(Error::DuplicateEntry {
                    surface: e.form.surface.clone(),
                    concept: e.concept_id.clone(),
                });
            }
            match form_index.get(&e.form.surface) {
                Some(&i) => {
                    let lf = &mut forms[i];
                    if lf.form_frequency != e.form_frequency {
                        return Err(Error::InconsistentForm {
                            surface: e.form.surface.clone(),
                            message: "form_freq differs between rows".into(),
                        });
                    }
                    if lf.form.constituents != e.form.constituents || lf.form.length_units != e.form.length_units {
                        return Err(Error::InconsistentForm {
                            surface: e.form.surface.clone(),
                            message: "constituents or length differ between rows".into(),
                        });
                    }
                    lf.form.word_classes.extend(e.form.word_classes.iter().cloned());
                    lf.senses.push((concept, e.sense_frequency));
                }
                None => {
                    form_index.insert(e.form.surface.clone(), forms.len());
                    forms.push(LexicalForm {
                        form: e.form.clone(),
                        form_frequency: e.form_frequency,
                        senses: vec![(concept, e.sense_frequency)],
                    });
                }
            }
        }

        let mut pair_alias = HashMap::new();
        for (k, lf) in forms.iter().enumerate() {
            let s = &lf.form.surface;
            for (pos, ch) in s.char_indices() {
                if ch != settings.separator {
                    continue;
                }
                let (left, right) = (&s[..pos], &s[pos + ch.len_utf8()..]);
                if let (Some(&i), Some(&j)) = (form_index.get(left), form_index.get(right)) {
                    pair_alias.insert((i, j), k);
                }
            }
        }

        Ok(Lexicon {
            entries,
            settings,
            forms,
            form_index,
            pair_alias,
        })
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn settings(&self) -> LexiconSettings {
        self.settings
    }

    pub fn separator(&self) -> char {
        self.settings.separator
    }

    pub fn head_position(&self) -> HeadPosition {
        self.settings.head_position
    }

    /// Distinct forms, in first-appearance order.
    pub fn forms(&self) -> &[LexicalForm] {
        &self.forms
    }

    pub fn form_count(&self) -> usize {
        self.forms.len()
    }

    pub fn form_index(&self, surface: &str) -> Option<usize> {
        self.form_index.get(surface).copied()
    }

    pub fn form(&self, idx: usize) -> &LexicalForm {
        &self.forms[idx]
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.form_index.contains_key(surface)
    }

    /// Concepts labeled by `surface` in the lexicon.
    pub fn senses_of(&self, surface: &str) -> &[(usize, f64)] {
        self.form_index(surface)
            .map(|i| self.forms[i].senses.as_slice())
            .unwrap_or(&[])
    }

    /// Universe indices of every concept with at least one form.
    pub fn concept_indices(&self) -> BTreeSet<usize> {
        self.forms
            .iter()
            .flat_map(|lf| lf.senses.iter().map(|&(c, _)| c))
            .collect()
    }

    /// Resolves a form to the meaning the listener assigns it: existing
    /// forms by their senses, otherwise two existing constituents.
    pub fn resolve(&self, form: &Form) -> Result<FormKey> {
        if let Some(i) = self.form_index(&form.surface) {
            return Ok(FormKey::Unit(i));
        }
        match form.constituents.as_slice() {
            [a, b] => match (self.form_index(a), self.form_index(b)) {
                (Some(i), Some(j)) => Ok(FormKey::Pair(i, j)),
                _ => Err(Error::UnresolvableForm(form.surface.clone())),
            },
            _ => Err(Error::UnresolvableForm(form.surface.clone())),
        }
    }

    pub fn candidate_key(&self, c: Candidate) -> FormKey {
        match c.second {
            None => FormKey::Unit(c.first),
            Some(j) => match self.pair_alias.get(&(c.first, j)) {
                Some(&k) => FormKey::Unit(k),
                None => FormKey::Pair(c.first, j),
            },
        }
    }

    pub fn candidate_length(&self, c: Candidate) -> u32 {
        let first = &self.forms[c.first].form;
        match c.second {
            None => first.length_units,
            Some(j) => {
                let second = &self.forms[j].form;
                match self.settings.length_mode {
                    LengthMode::Orthographic => first.length_units + 1 + second.length_units,
                    LengthMode::Provided => first.length_units + second.length_units,
                }
            }
        }
    }

    pub fn candidate_surface(&self, c: Candidate) -> String {
        match c.second {
            None => self.forms[c.first].form.surface.clone(),
            Some(j) => format!(
                "{}{}{}",
                self.forms[c.first].form.surface, self.settings.separator, self.forms[j].form.surface
            ),
        }
    }

    pub fn candidate_form(&self, c: Candidate) -> Form {
        match c.second {
            None => self.forms[c.first].form.clone(),
            Some(j) => Form::combine(
                &self.forms[c.first].form,
                &self.forms[j].form,
                self.settings.separator,
                self.settings.length_mode,
            ),
        }
    }

    /// Number of points in the single + ordered-pair search space.
    pub fn candidate_space_size(&self) -> usize {
        let n = self.forms.len();
        n + n * n
    }

    /// Maps `0..candidate_space_size()` onto candidates: singles first, then
    /// pairs in row-major order.
    pub fn candidate_at(&self, index: usize) -> Candidate {
        let n = self.forms.len();
        if index < n {
            Candidate::single(index)
        } else {
            let r = index - n;
            Candidate::pair(r / n, r % n)
        }
    }
}

const LEXICON_HEADER: [&str; 7] = [
    "surface",
    "concept_id",
    "form_freq",
    "sense_freq",
    "word_classes",
    "constituents",
    "length",
];

pub(crate) struct Columns {
    names: HashMap<String, usize>,
}

impl Columns {
    pub(crate) fn new(headers: &csv::StringRecord, path: &Path, required: &[&str]) -> Result<Self> {
        let names: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        for r in required {
            if !names.contains_key(*r) {
                return Err(Error::parse(path, 1, format!("missing column `{r}`")));
            }
        }
        Ok(Columns { names })
    }

    pub(crate) fn get<'r>(&self, record: &'r csv::StringRecord, name: &str) -> Option<&'r str> {
        self.names
            .get(name)
            .and_then(|&i| record.get(i))
            .map(str::trim)
            .filter(|s| !s.is_empty())
    }
}

pub(crate) fn tsv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(path, 0, format!("{other:?}")),
        })
}

pub(crate) fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

pub(crate) fn parse_f64(path: &Path, line: usize, column: &str, raw: Option<&str>) -> Result<f64> {
    raw.ok_or_else(|| Error::parse(path, line, format!("missing `{column}`")))?
        .parse::<f64>()
        .map_err(|e| Error::parse(path, line, format!("`{column}`: {e}")))
}

fn split_constituents(surface: &str, raw: Option<&str>) -> Vec<String> {
    match raw {
        Some(s) => s.split('|').map(|p| p.trim().to_string()).collect(),
        None => vec![surface.to_string()],
    }
}

fn form_length(
    path: &Path,
    line: usize,
    surface: &str,
    raw: Option<&str>,
    mode: LengthMode,
) -> Result<u32> {
    match (mode, raw) {
        (LengthMode::Orthographic, _) => Ok(orthographic_length(surface)),
        (LengthMode::Provided, Some(v)) => v
            .parse::<u32>()
            .map_err(|e| Error::parse(path, line, format!("`length`: {e}"))),
        (LengthMode::Provided, None) => Err(Error::parse(
            path,
            line,
            "length_mode=provided requires a `length` column value",
        )),
    }
}

/// Reads the tab-separated lexicon file.
pub fn load_lexicon(path: &Path, universe: &Universe, settings: LexiconSettings) -> Result<Lexicon> {
    let mut reader = tsv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let cols = Columns::new(&headers, path, &LEXICON_HEADER[..5])?;
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let surface = cols
            .get(&record, "surface")
            .ok_or_else(|| Error::parse(path, line, "empty surface"))?
            .to_string();
        let concept_id = cols
            .get(&record, "concept_id")
            .ok_or_else(|| Error::parse(path, line, "empty concept_id"))?
            .to_string();
        let form_frequency = parse_f64(path, line, "form_freq", cols.get(&record, "form_freq"))?;
        let sense_frequency = parse_f64(path, line, "sense_freq", cols.get(&record, "sense_freq"))?;
        let word_classes = cols
            .get(&record, "word_classes")
            .map(|s| {
                s.split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default();
        let constituents = split_constituents(&surface, cols.get(&record, "constituents"));
        let length_units = form_length(path, line, &surface, cols.get(&record, "length"), settings.length_mode)?;
        entries.push(LexiconEntry {
            form: Form {
                surface,
                constituents,
                length_units,
                word_classes,
            },
            concept_id,
            form_frequency,
            sense_frequency,
        });
    }
    Lexicon::new(entries, universe, settings)
}

/// Writes the lexicon in the same format [`load_lexicon`] reads.
pub fn write_lexicon<W: Write>(lexicon: &Lexicon, out: W) -> Result<()> {
    let mut w = tsv_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("writing lexicon: {e}"));
    w.write_record(LEXICON_HEADER).map_err(io)?;
    for e in lexicon.entries() {
        let classes = e.form.word_classes.iter().cloned().collect::<Vec<_>>().join(",");
        let constituents = e.form.constituents.join("|");
        w.write_record([
            e.form.surface.as_str(),
            e.concept_id.as_str(),
            &format_number(e.form_frequency),
            &format_number(e.sense_frequency),
            &classes,
            &constituents,
            &e.form.length_units.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<lexicon>", e))
}

pub(crate) fn tsv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(out)
}

/// Shortest decimal that round-trips through `f64::from_str`.
pub(crate) fn format_number(x: f64) -> String {
    format!("{x}")
}

// ---------------------------------------------------------------------------
// Encodings
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "R")]
    Reuse,
    #[serde(rename = "C")]
    Combination,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" | "reuse" => Ok(Strategy::Reuse),
            "C" | "c" | "combination" | "compound" => Ok(Strategy::Combination),
            other => Err(Error::InvalidInput(format!("unknown strategy `{other}`"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Reuse => "R",
            Strategy::Combination => "C",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodingItem {
    pub concept_id: String,
    pub form: Form,
    pub strategy: Strategy,
    /// Unnormalized `p(c, w | L')`; see [`Encoding::weights`].
    pub joint_weight: f64,
    /// Frequency of the label in the expanded lexicon, when known.
    pub form_frequency: Option<f64>,
    /// Frequency of this sense of the label, when known.
    pub sense_frequency: Option<f64>,
}

impl EncodingItem {
    pub fn new(concept_id: impl Into<String>, form: Form, strategy: Strategy) -> Self {
        EncodingItem {
            concept_id: concept_id.into(),
            form,
            strategy,
            joint_weight: 1.0,
            form_frequency: None,
            sense_frequency: None,
        }
    }

    /// Same concept, frequencies and weight with a different label.
    pub fn relabeled(&self, form: Form) -> Self {
        let strategy = if form.is_combination() {
            Strategy::Combination
        } else {
            Strategy::Reuse
        };
        EncodingItem {
            form,
            strategy,
            ..self.clone()
        }
    }
}

/// One label per emerging concept.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoding {
    items: Vec<EncodingItem>,
}

impl Encoding {
    pub fn new(items: Vec<EncodingItem>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.concept_id.as_str()) {
                return Err(Error::DuplicateEncodingConcept(item.concept_id.clone()));
            }
            if !(item.joint_weight > 0.0) || !item.joint_weight.is_finite() {
                return Err(Error::InvalidEncodingItem {
                    concept: item.concept_id.clone(),
                    message: "joint weight must be positive".into(),
                });
            }
        }
        Ok(Encoding { items })
    }

    pub fn items(&self) -> &[EncodingItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn concept_ids(&self) -> BTreeSet<&str> {
        self.items.iter().map(|i| i.concept_id.as_str()).collect()
    }

    /// Normalized joint weights in item order.
    pub fn weights(&self) -> Vec<f64> {
        let total: f64 = self.items.iter().map(|i| i.joint_weight).sum();
        self.items.iter().map(|i| i.joint_weight / total).collect()
    }

    /// The need distribution carried by the item weights.
    pub fn need(&self) -> NeedDistribution {
        NeedDistribution::new(
            self.items
                .iter()
                .map(|i| i.concept_id.clone())
                .zip(self.weights())
                .collect(),
        )
    }

    /// Replaces item weights with a fixed need distribution.
    pub fn with_need(mut self, need: &NeedDistribution) -> Result<Self> {
        if need.len() != self.items.len() {
            return Err(Error::ConceptSetMismatch);
        }
        for item in &mut self.items {
            let p = need.get(&item.concept_id).ok_or(Error::ConceptSetMismatch)?;
            if !(p > 0.0) {
                return Err(Error::InvalidEncodingItem {
                    concept: item.concept_id.clone(),
                    message: "need probability must be positive".into(),
                });
            }
            item.joint_weight = p;
        }
        Ok(self)
    }

    /// Keeps every item's concept, frequencies and weight; swaps its label.
    pub fn relabel<F>(&self, mut label: F) -> Result<Self>
    where
        F: FnMut(usize, &EncodingItem) -> Result<Form>,
    {
        let items = self
            .items
            .iter()
            .enumerate()
            .map(|(i, item)| Ok(item.relabeled(label(i, item)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Encoding { items })
    }

    /// Items with the given strategy, weights preserved.
    pub fn filter_strategy(&self, strategy: Strategy) -> Encoding {
        Encoding {
            items: self
                .items
                .iter()
                .filter(|i| i.strategy == strategy)
                .cloned()
                .collect(),
        }
    }

    /// Checks that every label resolves against the lexicon and every concept
    /// exists in the universe. Returns one message per offending item.
    pub fn diagnostics(&self, lexicon: &Lexicon, universe: &Universe) -> Vec<String> {
        let mut out = Vec::new();
        for item in &self.items {
            if universe.index_of(&item.concept_id).is_none() {
                out.push(format!("item `{}`: unknown concept id", item.concept_id));
            }
            for c in &item.form.constituents {
                if !lexicon.contains(c) {
                    out.push(format!(
                        "item `{}`: constituent `{c}` of `{}` is not a form of the lexicon",
                        item.concept_id, item.form.surface
                    ));
                }
            }
            match item.strategy {
                Strategy::Reuse if !lexicon.contains(&item.form.surface) => out.push(format!(
                    "item `{}`: reused form `{}` is not in the lexicon",
                    item.concept_id, item.form.surface
                )),
                Strategy::Combination if item.form.constituents.len() != 2 => out.push(format!(
                    "item `{}`: combination `{}` must have exactly two constituents",
                    item.concept_id, item.form.surface
                )),
                _ => {}
            }
        }
        out
    }

    pub fn validate(&self, lexicon: &Lexicon, universe: &Universe) -> Result<()> {
        match self.diagnostics(lexicon, universe).into_iter().next() {
            None => Ok(()),
            Some(msg) => Err(Error::InvalidInput(msg)),
        }
    }
}

const ENCODING_HEADER: [&str; 7] = [
    "concept_id",
    "surface",
    "constituents",
    "strategy",
    "form_freq",
    "sense_freq",
    "length",
];

/// Reads an encoding file without checking it against a lexicon.
pub fn read_encoding(path: &Path, length_mode: LengthMode) -> Result<Encoding> {
    let mut reader = tsv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let cols = Columns::new(&headers, path, &ENCODING_HEADER[..4])?;
    let mut items = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let concept_id = cols
            .get(&record, "concept_id")
            .ok_or_else(|| Error::parse(path, line, "empty concept_id"))?;
        let surface = cols
            .get(&record, "surface")
            .ok_or_else(|| Error::parse(path, line, "empty surface"))?;
        let strategy: Strategy = cols
            .get(&record, "strategy")
            .ok_or_else(|| Error::parse(path, line, "empty strategy"))?
            .parse()
            .map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        let constituents = split_constituents(surface, cols.get(&record, "constituents"));
        let length_units = form_length(path, line, surface, cols.get(&record, "length"), length_mode)?;
        let optional = |name: &str| -> Result<Option<f64>> {
            cols.get(&record, name)
                .map(|v| parse_f64(path, line, name, Some(v)))
                .transpose()
        };
        let form_frequency = optional("form_freq")?;
        let sense_frequency = optional("sense_freq")?;
        for v in [form_frequency, sense_frequency].into_iter().flatten() {
            if !(v >= 0.0) {
                return Err(Error::parse(path, line, "frequencies must be non-negative"));
            }
        }
        items.push(EncodingItem {
            concept_id: concept_id.to_string(),
            form: Form {
                surface: surface.to_string(),
                constituents,
                length_units,
                word_classes: BTreeSet::new(),
            },
            strategy,
            joint_weight: 1.0,
            form_frequency,
            sense_frequency,
        });
    }
    Encoding::new(items)
}

/// Reads an encoding file and validates it against the universe and lexicon.
pub fn load_encoding(path: &Path, universe: &Universe, lexicon: &Lexicon) -> Result<Encoding> {
    let mut encoding = read_encoding(path, lexicon.settings().length_mode)?;
    encoding.validate(lexicon, universe)?;
    for item in &mut encoding.items {
        if let Some(i) = lexicon.form_index(&item.form.surface) {
            item.form.word_classes = lexicon.form(i).form.word_classes.clone();
        }
    }
    Ok(encoding)
}

pub fn write_encoding<W: Write>(encoding: &Encoding, out: W) -> Result<()> {
    let mut w = tsv_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("writing encoding: {e}"));
    w.write_record(ENCODING_HEADER).map_err(io)?;
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    for item in encoding.items() {
        w.write_record([
            item.concept_id.as_str(),
            item.form.surface.as_str(),
            &item.form.constituents.join("|"),
            &item.strategy.to_string(),
            &opt(item.form_frequency),
            &opt(item.sense_frequency),
            &item.form.length_units.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<encoding>", e))
}

// ---------------------------------------------------------------------------
// Need and production
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeedMode {
    /// `p(c | w, L')` from sense frequencies of the label.
    #[default]
    Corpus,
    /// `p(c | w, L')` as a posterior under the concepts' prior need weights.
    Relabeled,
}

impl FromStr for NeedMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corpus" => Ok(NeedMode::Corpus),
            "relabeled" | "relabelled" | "posterior" => Ok(NeedMode::Relabeled),
            other => Err(Error::config("need_mode", format!("unknown value `{other}`"))),
        }
    }
}

impl fmt::Display for NeedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeedMode::Corpus => "corpus",
            NeedMode::Relabeled => "relabeled",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeedProductionModel {
    pub mode: NeedMode,
    /// Add one to every (rounded) count before normalizing.
    pub smoothing: bool,
}

impl Default for NeedProductionModel {
    fn default() -> Self {
        NeedProductionModel {
            mode: NeedMode::Corpus,
            smoothing: true,
        }
    }
}

impl NeedProductionModel {
    /// A raw count after optional add-one smoothing. Fractional counts are
    /// rounded half-up before the one is added.
    pub fn count(&self, raw: f64) -> f64 {
        if self.smoothing {
            (raw + 0.5).floor() + 1.0
        } else {
            raw
        }
    }
}

/// Probability with which each emerging concept is communicated.
#[derive(Clone, Debug, PartialEq)]
pub struct NeedDistribution {
    entries: Vec<(String, f64)>,
    index: HashMap<String, usize>,
}

impl NeedDistribution {
    /// Weights are rescaled to sum to one when their total is positive.
    pub fn new(mut entries: Vec<(String, f64)>) -> Self {
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if total > 0.0 && total.is_finite() {
            for (_, p) in &mut entries {
                *p /= total;
            }
        }
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.clone(), i))
            .collect();
        NeedDistribution { entries, index }
    }

    /// Uniform need over the given concepts.
    pub fn uniform<S: AsRef<str>>(ids: &[S]) -> Self {
        let p = 1.0 / ids.len() as f64;
        Self::new(ids.iter().map(|s| (s.as_ref().to_string(), p)).collect())
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.index.get(id).map(|&i| self.entries[i].1)
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn concept_ids(&self) -> BTreeSet<&str> {
        self.entries.iter().map(|(id, _)| id.as_str()).collect()
    }
}

/// Normalized `p(c, w | L')` over the items of an encoding.
///
/// The expanded lexicon is the lexicon plus the encoding: a reused label
/// gains the emerging concept as an extra sense. Atomic labels share
/// production by sense frequency (corpus mode) or by prior need weight
/// (relabeled mode); combinations share it uniformly over their senses.
pub fn joint_distribution(
    encoding: &Encoding,
    lexicon: &Lexicon,
    universe: &Universe,
    model: &NeedProductionModel,
) -> Result<Vec<f64>> {
    // Senses each label has in the encoding itself.
    let mut new_senses: HashMap<&str, Vec<&EncodingItem>> = HashMap::new();
    for item in encoding.items() {
        universe.require(&item.concept_id)?;
        new_senses.entry(item.form.surface.as_str()).or_default().push(item);
    }

    let mut raw = Vec::with_capacity(encoding.len());
    for item in encoding.items() {
        let surface = item.form.surface.as_str();
        let existing = lexicon.senses_of(surface);
        let added = &new_senses[surface];

        let form_freq = item
            .form_frequency
            .or_else(|| lexicon.form_index(surface).map(|i| lexicon.form(i).form_frequency))
            .unwrap_or(0.0);
        let p_w = model.count(form_freq);

        let n_senses = existing.len() + added.len();
        let p_c_given_w = if item.form.is_combination() {
            1.0 / n_senses as f64
        } else {
            let score = |concept: usize, sense_freq: f64| match model.mode {
                NeedMode::Corpus => model.count(sense_freq),
                NeedMode::Relabeled => model.count(universe.concept(concept).english_need_weight),
            };
            let own = score(
                universe.require(&item.concept_id)?,
                item.sense_frequency.unwrap_or(0.0),
            );
            let mut total: f64 = existing.iter().map(|&(c, f)| score(c, f)).sum();
            for other in added {
                total += score(
                    universe.require(&other.concept_id)?,
                    other.sense_frequency.unwrap_or(0.0),
                );
            }
            if total > 0.0 {
                own / total
            } else {
                1.0 / n_senses as f64
            }
        };
        raw.push(p_w * p_c_given_w);
    }

    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroWeights);
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Need over the encoding's concepts: joint weights summed over labels.
pub fn need_marginal(
    encoding: &Encoding,
    lexicon: &Lexicon,
    universe: &Universe,
    model: &NeedProductionModel,
) -> Result<NeedDistribution> {
    let joint = joint_distribution(encoding, lexicon, universe, model)?;
    let mut entries: Vec<(String, f64)> = Vec::with_capacity(joint.len());
    let mut pos: HashMap<&str, usize> = HashMap::new();
    for (item, w) in encoding.items().iter().zip(joint) {
        match pos.get(item.concept_id.as_str()) {
            Some(&i) => entries[i].1 += w,
            None => {
                pos.insert(item.concept_id.as_str(), entries.len());
                entries.push((item.concept_id.clone(), w));
            }
        }
    }
    Ok(NeedDistribution::new(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn concept(id: &str, v: &[f64]) -> Concept {
        Concept {
            id: id.into(),
            gloss: String::new(),
            embedding: v.to_vec(),
            english_need_weight: 1.0,
        }
    }

    fn universe() -> Universe {
        Universe::new(vec![
            concept("a", &[1.0, 0.0]),
            concept("b", &[0.0, 1.0]),
            concept("new1", &[1.0, 1.0]),
            concept("new2", &[1.0, -1.0]),
        ])
        .unwrap()
    }

    fn entry(surface: &str, concept: &str, fw: f64, fc: f64) -> LexiconEntry {
        LexiconEntry {
            form: Form::atomic(surface),
            concept_id: concept.into(),
            form_frequency: fw,
            sense_frequency: fc,
        }
    }

    #[test]
    fn universe_rejects_zero_norm() {
        let err = Universe::new(vec![concept("z", &[0.0, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::ZeroNorm(Some(ref id)) if id == "z"));
    }

    #[test]
    fn universe_rejects_dimension_mismatch_and_duplicates() {
        let err = Universe::new(vec![concept("a", &[1.0]), concept("b", &[1.0, 2.0])]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let err = Universe::new(vec![concept("a", &[1.0]), concept("a", &[2.0])]).unwrap_err();
        assert!(matches!(err, Error::DuplicateConcept(_)));
    }

    #[test]
    fn lexicon_accepts_card_entry() {
        let u = Universe::new(vec![concept("card-sense", &[1.0, 0.5])]).unwrap();
        let lex = Lexicon::new(vec![entry("card", "card-sense", 100.0, 40.0)], &u, Default::default()).unwrap();
        assert_eq!(lex.form_count(), 1);
        assert_eq!(lex.senses_of("card"), &[(0, 40.0)]);
    }

    #[test]
    fn lexicon_rejects_unknown_concept_negative_and_duplicates() {
        let u = universe();
        let err = Lexicon::new(vec![entry("x", "nope", 1.0, 1.0)], &u, Default::default()).unwrap_err();
        assert!(matches!(err, Error::UnknownConcept(_)));
        let err = Lexicon::new(vec![entry("x", "a", -1.0, 1.0)], &u, Default::default()).unwrap_err();
        assert!(matches!(err, Error::NegativeFrequency { .. }));
        let err = Lexicon::new(
            vec![entry("x", "a", 1.0, 1.0), entry("x", "a", 1.0, 2.0)],
            &u,
            Default::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateEntry { .. }));
    }

    #[test]
    fn pair_alias_detects_existing_compounds() {
        let u = universe();
        let mut ice_cream = entry("ice cream", "b", 1.0, 1.0);
        ice_cream.form.constituents = vec!["ice".into(), "cream".into()];
        let lex = Lexicon::new(
            vec![entry("ice", "a", 1.0, 1.0), entry("cream", "a", 1.0, 1.0), ice_cream],
            &u,
            Default::default(),
        )
        .unwrap();
        assert_eq!(lex.candidate_key(Candidate::pair(0, 1)), FormKey::Unit(2));
        assert_eq!(lex.candidate_key(Candidate::pair(1, 0)), FormKey::Pair(1, 0));
        assert_eq!(lex.candidate_length(Candidate::pair(0, 1)), 9);
        assert_eq!(lex.candidate_surface(Candidate::pair(1, 0)), "cream ice");
    }

    #[test]
    fn candidate_indexing_covers_singles_then_pairs() {
        let u = universe();
        let lex = Lexicon::new(
            vec![entry("x", "a", 1.0, 1.0), entry("y", "b", 1.0, 1.0), entry("z", "b", 2.0, 1.0)],
            &u,
            Default::default(),
        )
        .unwrap();
        assert_eq!(lex.candidate_space_size(), 12);
        assert_eq!(lex.candidate_at(2), Candidate::single(2));
        assert_eq!(lex.candidate_at(3), Candidate::pair(0, 0));
        assert_eq!(lex.candidate_at(11), Candidate::pair(2, 2));
    }

    fn two_item_encoding(fw1: f64, fw2: f64) -> Encoding {
        let mut a = EncodingItem::new("new1", Form::combine(&Form::atomic("x"), &Form::atomic("y"), ' ', LengthMode::Orthographic), Strategy::Combination);
        a.form_frequency = Some(fw1);
        let mut b = EncodingItem::new("new2", Form::combine(&Form::atomic("y"), &Form::atomic("x"), ' ', LengthMode::Orthographic), Strategy::Combination);
        b.form_frequency = Some(fw2);
        Encoding::new(vec![a, b]).unwrap()
    }

    fn xy_lexicon(u: &Universe) -> Lexicon {
        Lexicon::new(vec![entry("x", "a", 5.0, 5.0), entry("y", "b", 5.0, 5.0)], u, Default::default()).unwrap()
    }

    #[test]
    fn joint_weights_follow_form_frequency_without_smoothing() {
        let u = universe();
        let lex = xy_lexicon(&u);
        let model = NeedProductionModel {
            mode: NeedMode::Corpus,
            smoothing: false,
        };
        let w = joint_distribution(&two_item_encoding(10.0, 30.0), &lex, &u, &model).unwrap();
        assert!((w[0] - 0.25).abs() < 1e-15 && (w[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn single_item_has_unit_weight() {
        let u = universe();
        let lex = xy_lexicon(&u);
        let mut item = EncodingItem::new("new1", Form::atomic("x"), Strategy::Reuse);
        item.sense_frequency = Some(3.0);
        let enc = Encoding::new(vec![item]).unwrap();
        for smoothing in [true, false] {
            let model = NeedProductionModel { mode: NeedMode::Corpus, smoothing };
            assert_eq!(joint_distribution(&enc, &lex, &u, &model).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn smoothing_makes_zero_counts_positive() {
        let u = universe();
        let lex = Lexicon::new(vec![entry("x", "a", 0.0, 0.0)], &u, Default::default()).unwrap();
        let mut item = EncodingItem::new("new1", Form::atomic("x"), Strategy::Reuse);
        item.form_frequency = Some(0.0);
        item.sense_frequency = Some(0.0);
        let other = EncodingItem::new("new2", Form::combine(&Form::atomic("x"), &Form::atomic("x"), ' ', LengthMode::Orthographic), Strategy::Combination);
        let enc = Encoding::new(vec![item, other]).unwrap();
        let w = joint_distribution(&enc, &lex, &u, &NeedProductionModel::default()).unwrap();
        assert!(w.iter().all(|&p| p > 0.0));

        let off = NeedProductionModel { mode: NeedMode::Corpus, smoothing: false };
        assert!(matches!(joint_distribution(&enc, &lex, &u, &off), Err(Error::ZeroWeights)));
    }

    #[test]
    fn reuse_shares_production_with_existing_senses() {
        // x has an existing sense with count 3; the new sense has count 1.
        // Smoothed: existing 4, new 2 -> p(new | x) = 2/6.
        let u = universe();
        let lex = Lexicon::new(vec![entry("x", "a", 9.0, 3.0), entry("y", "b", 9.0, 0.0)], &u, Default::default()).unwrap();
        let mut reuse = EncodingItem::new("new1", Form::atomic("x"), Strategy::Reuse);
        reuse.sense_frequency = Some(1.0);
        let mut comb = EncodingItem::new("new2", Form::combine(&Form::atomic("x"), &Form::atomic("y"), ' ', LengthMode::Orthographic), Strategy::Combination);
        comb.form_frequency = Some(9.0);
        let enc = Encoding::new(vec![reuse, comb]).unwrap();
        let w = joint_distribution(&enc, &lex, &u, &NeedProductionModel::default()).unwrap();
        // raw: 10 * 2/6 and 10 * 1
        let expect0 = (10.0 * 2.0 / 6.0) / (10.0 * 2.0 / 6.0 + 10.0);
        assert!((w[0] - expect0).abs() < 1e-12);
    }

    #[test]
    fn relabeled_mode_uses_prior_need_weights() {
        let mut concepts = vec![concept("a", &[1.0, 0.0]), concept("new1", &[1.0, 1.0])];
        concepts[0].english_need_weight = 3.0;
        concepts[1].english_need_weight = 1.0;
        let u = Universe::new(concepts).unwrap();
        let lex = Lexicon::new(vec![entry("x", "a", 0.0, 0.0)], &u, Default::default()).unwrap();
        let enc = Encoding::new(vec![EncodingItem::new("new1", Form::atomic("x"), Strategy::Reuse)]).unwrap();
        let model = NeedProductionModel { mode: NeedMode::Relabeled, smoothing: true };
        assert_eq!(joint_distribution(&enc, &lex, &u, &model).unwrap(), vec![1.0]);
    }

    #[test]
    fn need_marginal_is_fixed_under_relabeling() {
        let u = universe();
        let lex = xy_lexicon(&u);
        let enc = two_item_encoding(10.0, 30.0);
        let need = need_marginal(&enc, &lex, &u, &NeedProductionModel::default()).unwrap();
        let weighted = enc.with_need(&need).unwrap();
        let swapped = weighted
            .relabel(|i, _| Ok(weighted.items()[1 - i].form.clone()))
            .unwrap();
        assert_eq!(swapped.need(), weighted.need());
        assert_eq!(weighted.need(), need);
    }

    #[test]
    fn encoding_rejects_second_label_for_a_concept() {
        let items = vec![
            EncodingItem::new("new1", Form::atomic("x"), Strategy::Reuse),
            EncodingItem::new("new1", Form::atomic("y"), Strategy::Reuse),
        ];
        assert!(matches!(Encoding::new(items), Err(Error::DuplicateEncodingConcept(_))));
    }

    #[test]
    fn diagnostics_name_missing_constituents() {
        let u = universe();
        let lex = xy_lexicon(&u);
        let enc = Encoding::new(vec![EncodingItem::new(
            "new1",
            Form::combine(&Form::atomic("x"), &Form::atomic("q"), ' ', LengthMode::Orthographic),
            Strategy::Combination,
        )])
        .unwrap();
        let d = enc.diagnostics(&lex, &u);
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("new1") && d[0].contains("`q`"));
    }

    #[test]
    fn combination_length_counts_one_separator() {
        let f = Form::combine(&Form::atomic("birthday"), &Form::atomic("card"), ' ', LengthMode::Orthographic);
        assert_eq!(f.surface, "birthday card");
        assert_eq!(f.length_units, 13);
        assert_eq!(orthographic_length("publicité"), 9);
    }
}
