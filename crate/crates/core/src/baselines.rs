//! Near-synonym and random baseline encodings.
//!
//! A near-synonym baseline swaps each label for a draw from forms close to it
//! in meaning. A random baseline swaps each label for a uniform draw from the
//! same single-or-pair space the frontier searches. Draw `r` of item `c`
//! always comes from the stream `(seed, kind/c, r)`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::CostPoint;
use crate::error::{Error, Result};
use crate::frontier::{loss_of_point, EfficiencyLoss, FrontierResult};
use crate::lexicon::{
    format_number, record_line, tsv_reader, tsv_writer, Candidate, Encoding, EncodingItem, Form, Lexicon, Strategy,
};
use crate::rng;
use crate::semantics::Listener;
use crate::stats::{self, Statistic};

/// Unordered pairs of surfaces that must not replace each other.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AntonymPairs {
    pairs: BTreeSet<(String, String)>,
}

impl AntonymPairs {
    pub fn new<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut out = AntonymPairs::default();
        for (a, b) in pairs {
            out.insert(a.into(), b.into());
        }
        out
    }

    pub fn insert(&mut self, a: String, b: String) {
        if a <= b {
            self.pairs.insert((a, b));
        } else {
            self.pairs.insert((b, a));
        }
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        self.pairs.contains(&(x.to_string(), y.to_string()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Reads a two-column TSV of antonymous surfaces (header `surface_a`, `surface_b`).
pub fn load_antonyms(path: &Path) -> Result<AntonymPairs> {
    let mut reader = tsv_reader(path)?;
    let mut out = AntonymPairs::default();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        match (record.get(0), record.get(1)) {
            (Some(a), Some(b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                out.insert(a.trim().to_string(), b.trim().to_string())
            }
            _ => return Err(Error::parse(path, record_line(&record), "expected two surfaces")),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NearSynonymParams {
    pub k: usize,
    pub antonyms: AntonymPairs,
    /// Head replacements must share a word class with the head.
    pub respect_word_class: bool,
}

impl Default for NearSynonymParams {
    fn default() -> Self {
        NearSynonymParams {
            k: 5,
            antonyms: AntonymPairs::default(),
            respect_word_class: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateSpec {
    pub n_replicates: usize,
    pub seed: u64,
}

impl Default for ReplicateSpec {
    fn default() -> Self {
        ReplicateSpec {
            n_replicates: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    NearSynonym,
    Random,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::NearSynonym => "near-synonym",
            BaselineKind::Random => "random",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "near-synonym" => Ok(BaselineKind::NearSynonym),
            "random" => Ok(BaselineKind::Random),
            other => Err(Error::config("kind", format!("unknown baseline kind `{other}`"))),
        }
    }
}

fn stream_label(kind: BaselineKind, concept_id: &str) -> String {
    format!("{}/{concept_id}", kind.name())
}

fn classes_overlap(a: &BTreeSet<String>, b: &BTreeSet<String>) -> bool {
    a.iter().any(|c| b.contains(c))
}

/// The `k` atomic forms nearest to form `of`, nearest first, ties by surface.
fn neighbors(listener: &Listener<'_>, of: usize, params: &NearSynonymParams, is_head: bool) -> Result<Vec<usize>> {
    let lexicon = listener.lexicon();
    let own = &lexicon.form(of).form;
    let check_class = is_head && params.respect_word_class && !own.word_classes.is_empty();
    let mut ranked = Vec::new();
    for j in 0..lexicon.form_count() {
        let cand = &lexicon.form(j).form;
        if cand.is_combination() || params.antonyms.contains(&own.surface, &cand.surface) {
            continue;
        }
        if check_class && !classes_overlap(&own.word_classes, &cand.word_classes) {
            continue;
        }
        ranked.push((listener.unit_distance(of, j)?, j));
    }
    ranked.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| lexicon.form(a.1).form.surface.cmp(&lexicon.form(b.1).form.surface))
    });
    Ok(ranked.into_iter().take(params.k).map(|(_, j)| j).collect())
}

fn constituent_index(lexicon: &Lexicon, item: &EncodingItem, surface: &str) -> Result<usize> {
    lexicon.form_index(surface).ok_or_else(|| Error::InvalidEncodingItem {
        concept: item.concept_id.clone(),
        message: format!("constituent `{surface}` is not a form of the lexicon"),
    })
}

/// Near-synonym replacements of an item as points of the candidate space:
/// head synonyms alone, then every modifier-synonym + head-synonym
/// combination in the lexicon's head order.
pub fn near_synonym_candidates(
    item: &EncodingItem,
    listener: &Listener<'_>,
    params: &NearSynonymParams,
) -> Result<Vec<Candidate>> {
    if params.k == 0 {
        return Err(Error::config("k", "must be at least 1"));
    }
    let lexicon = listener.lexicon();
    let head_position = lexicon.head_position();
    let (modifier, head) = match (item.strategy, item.form.constituents.len()) {
        (Strategy::Combination, 2) => {
            let (m, h) = head_position
                .split(&item.form.constituents)
                .expect("two constituents split");
            (Some(m), h)
        }
        (Strategy::Combination, _) => {
            return Err(Error::InvalidEncodingItem {
                concept: item.concept_id.clone(),
                message: "combination must have two constituents".into(),
            })
        }
        (Strategy::Reuse, _) => (None, item.form.surface.as_str()),
    };

    let head_syns = neighbors(listener, constituent_index(lexicon, item, head)?, params, true)?;
    let mut out: Vec<Candidate> = head_syns.iter().map(|&h| Candidate::single(h)).collect();
    if let Some(m) = modifier {
        let mod_syns = neighbors(listener, constituent_index(lexicon, item, m)?, params, false)?;
        for &ms in &mod_syns {
            for &hs in &head_syns {
                let (first, second) = head_position.arrange(ms, hs);
                out.push(Candidate::pair(first, second));
            }
        }
    }
    let mut seen = HashSet::new();
    out.retain(|c| seen.insert(lexicon.candidate_surface(*c)));
    if out.is_empty() {
        return Err(Error::EmptyCandidates(item.concept_id.clone()));
    }
    Ok(out)
}

/// [`near_synonym_candidates`] as forms.
pub fn near_synonym_set(item: &EncodingItem, listener: &Listener<'_>, params: &NearSynonymParams) -> Result<Vec<Form>> {
    let lexicon = listener.lexicon();
    Ok(near_synonym_candidates(item, listener, params)?
        .into_iter()
        .map(|c| lexicon.candidate_form(c))
        .collect())
}

/// Near-synonym candidates of every item, in item order.
#[derive(Clone, Debug, PartialEq)]
pub struct NearSynonymSets {
    pub sets: Vec<Vec<Candidate>>,
}

impl NearSynonymSets {
    pub fn build(encoding: &Encoding, listener: &Listener<'_>, params: &NearSynonymParams) -> Result<Self> {
        let sets = encoding
            .items()
            .par_iter()
            .map(|item| near_synonym_candidates(item, listener, params))
            .collect::<Result<Vec<_>>>()?;
        Ok(NearSynonymSets { sets })
    }
}

/// Uniform draw from `0..|F| + |F|²` for one item.
pub fn random_candidate(lexicon: &Lexicon, concept_id: &str, spec: &ReplicateSpec, replicate: u64) -> Result<Candidate> {
    if lexicon.form_count() == 0 {
        return Err(Error::EmptyLexicon);
    }
    let label = stream_label(BaselineKind::Random, concept_id);
    let idx = rng::uniform_index(spec.seed, &label, replicate, lexicon.candidate_space_size());
    Ok(lexicon.candidate_at(idx))
}

fn near_synonym_draw(set: &[Candidate], concept_id: &str, spec: &ReplicateSpec, replicate: u64) -> Candidate {
    let label = stream_label(BaselineKind::NearSynonym, concept_id);
    set[rng::uniform_index(spec.seed, &label, replicate, set.len())]
}

/// The labels of replicate `r`, one candidate per item.
pub fn replicate_labels(
    kind: BaselineKind,
    encoding: &Encoding,
    lexicon: &Lexicon,
    sets: Option<&NearSynonymSets>,
    spec: &ReplicateSpec,
    replicate: u64,
) -> Result<Vec<Candidate>> {
    match kind {
        BaselineKind::Random => encoding
            .items()
            .iter()
            .map(|item| random_candidate(lexicon, &item.concept_id, spec, replicate))
            .collect(),
        BaselineKind::NearSynonym => {
            let sets = sets.ok_or_else(|| Error::InvalidInput("near-synonym sets not built".into()))?;
            if sets.sets.len() != encoding.len() {
                return Err(Error::ConceptSetMismatch);
            }
            encoding
                .items()
                .iter()
                .zip(&sets.sets)
                .map(|(item, set)| {
                    if set.is_empty() {
                        Err(Error::EmptyCandidates(item.concept_id.clone()))
                    } else {
                        Ok(near_synonym_draw(set, &item.concept_id, spec, replicate))
                    }
                })
                .collect()
        }
    }
}

fn relabel(encoding: &Encoding, lexicon: &Lexicon, labels: &[Candidate]) -> Result<Encoding> {
    encoding.relabel(|i, _| Ok(lexicon.candidate_form(labels[i])))
}

/// Each item's label replaced by a uniform draw from its near-synonym set.
pub fn sample_near_synonym_encoding(
    encoding: &Encoding,
    lexicon: &Lexicon,
    sets: &NearSynonymSets,
    spec: &ReplicateSpec,
    replicate: u64,
) -> Result<Encoding> {
    let labels = replicate_labels(BaselineKind::NearSynonym, encoding, lexicon, Some(sets), spec, replicate)?;
    relabel(encoding, lexicon, &labels)
}

/// Each item's label replaced by a uniform draw over singles and ordered pairs.
pub fn sample_random_encoding(
    encoding: &Encoding,
    lexicon: &Lexicon,
    spec: &ReplicateSpec,
    replicate: u64,
) -> Result<Encoding> {
    let labels = replicate_labels(BaselineKind::Random, encoding, lexicon, None, spec, replicate)?;
    relabel(encoding, lexicon, &labels)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineParams {
    pub near_synonym: NearSynonymParams,
    pub replicates: ReplicateSpec,
    pub bootstrap_resamples: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            near_synonym: NearSynonymParams::default(),
            replicates: ReplicateSpec::default(),
            bootstrap_resamples: 1000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplicateRecord {
    pub index: u64,
    pub cost: CostPoint,
    pub loss: EfficiencyLoss,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub kind: BaselineKind,
    pub mean_loss: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineRun {
    pub summary: BaselineSummary,
    pub replicates: Vec<ReplicateRecord>,
    pub sets: Option<NearSynonymSets>,
}

/// Cost under fixed weights of an encoding given as candidates.
fn candidate_cost(listener: &Listener<'_>, concepts: &[usize], weights: &[f64], labels: &[Candidate]) -> Result<CostPoint> {
    let lexicon = listener.lexicon();
    let mut point = CostPoint {
        avg_length: 0.0,
        info_loss: 0.0,
    };
    for ((&c, &w), &label) in concepts.iter().zip(weights).zip(labels) {
        let s = listener.key_surprisal(lexicon.candidate_key(label), c)?;
        point.avg_length += w * f64::from(lexicon.candidate_length(label));
        point.info_loss += w * s;
    }
    Ok(point)
}

/// Generates the replicates of one baseline kind, scores each against the
/// frontier, and summarizes the losses with a bootstrap interval.
pub fn baseline_summary(
    encoding: &Encoding,
    listener: &Listener<'_>,
    frontier: &FrontierResult,
    kind: BaselineKind,
    params: &BaselineParams,
) -> Result<BaselineRun> {
    if params.replicates.n_replicates == 0 {
        return Err(Error::config("replicates", "must be at least 1"));
    }
    let fixed = encoding.clone().with_need(&frontier.need)?;
    let weights = fixed.weights();
    let universe = listener.universe();
    let concepts = fixed
        .items()
        .iter()
        .map(|i| universe.require(&i.concept_id))
        .collect::<Result<Vec<_>>>()?;
    let sets = match kind {
        BaselineKind::NearSynonym => Some(NearSynonymSets::build(encoding, listener, &params.near_synonym)?),
        BaselineKind::Random => None,
    };
    let spec = params.replicates;
    let lexicon = listener.lexicon();
    let replicates = (0..spec.n_replicates as u64)
        .into_par_iter()
        .map(|r| {
            let labels = replicate_labels(kind, encoding, lexicon, sets.as_ref(), &spec, r)?;
            let cost = candidate_cost(listener, &concepts, &weights, &labels)?;
            Ok(ReplicateRecord {
                index: r,
                cost,
                loss: loss_of_point(&cost, frontier),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let losses: Vec<f64> = replicates.iter().map(|r| r.loss.epsilon).collect();
    let (ci_lo, ci_hi) = stats::bootstrap_ci(&losses, Statistic::Mean, params.bootstrap_resamples, spec.seed)?;
    Ok(BaselineRun {
        summary: BaselineSummary {
            kind,
            mean_loss: stats::mean(&losses),
            ci_lo,
            ci_hi,
            n: losses.len(),
        },
        replicates,
        sets,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("writing table: {e}"))
}

/// Summary table: `kind, mean_loss, ci_lo, ci_hi, n`.
pub fn write_summaries<W: Write>(summaries: &[BaselineSummary], out: W) -> Result<()> {
    let mut w = tsv_writer(out);
    w.write_record(["kind", "mean_loss", "ci_lo", "ci_hi", "n"]).map_err(csv_error)?;
    for s in summaries {
        w.write_record([
            s.kind.name(),
            &format_number(s.mean_loss),
            &format_number(s.ci_lo),
            &format_number(s.ci_hi),
            &s.n.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io("<baselines>", e))
}

/// One row per replicate with its loss, cost and `|`-joined labels in item
/// order. Labels are regenerated from the seed rather than stored.
pub fn write_replicates<W: Write>(
    run: &BaselineRun,
    encoding: &Encoding,
    lexicon: &Lexicon,
    spec: &ReplicateSpec,
    out: W,
) -> Result<()> {
    let mut w = tsv_writer(out);
    w.write_record(["replicate", "epsilon", "raw_epsilon", "avg_length", "info_loss", "labels"])
        .map_err(csv_error)?;
    for r in &run.replicates {
        let labels = replicate_labels(run.summary.kind, encoding, lexicon, run.sets.as_ref(), spec, r.index)?;
        let joined = labels
            .iter()
            .map(|c| lexicon.candidate_surface(*c))
            .collect::<Vec<_>>()
            .join("|");
        w.write_record([
            &r.index.to_string(),
            &format_number(r.loss.epsilon),
            &format_number(r.loss.raw_epsilon),
            &format_number(r.cost.avg_length),
            &format_number(r.cost.info_loss),
            &joined,
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io("<replicates>", e))
}
