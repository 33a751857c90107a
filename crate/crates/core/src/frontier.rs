//! Optimal encodings along a grid of tradeoff weights, and the efficiency
//! loss of an encoding against them.
//!
//! With need held fixed, the scalarized cost of an encoding decomposes over
//! its concepts, so each concept is optimized on its own: the label space is
//! every existing form plus every ordered pair of existing forms.

use std::cmp::Ordering;
use std::collections::HashMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costs::{weighted_cost, CostPoint};
use crate::error::{Error, Result};
use crate::lexicon::{Candidate, Encoding, EncodingItem, Form, Lexicon, NeedDistribution, Strategy, Universe};
use crate::semantics::{Listener, ListenerParams};

/// Negative losses down to this magnitude are rounding noise.
pub const LOSS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Best single form, then the best optional second form.
    #[default]
    Greedy,
    /// Every single form and every ordered pair.
    Exhaustive,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(SearchMode::Greedy),
            "exhaustive" => Ok(SearchMode::Exhaustive),
            other => Err(Error::config("search_mode", format!("unknown value `{other}`"))),
        }
    }
}

impl std::fmt::Display for SearchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchMode::Greedy => "greedy",
            SearchMode::Exhaustive => "exhaustive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierParams {
    pub beta_grid: Vec<f64>,
    pub search_mode: SearchMode,
}

impl Default for FrontierParams {
    fn default() -> Self {
        FrontierParams {
            beta_grid: beta_grid(0.0, 10.0, 0.01),
            search_mode: SearchMode::Greedy,
        }
    }
}

impl FrontierParams {
    pub fn validate(&self) -> Result<()> {
        if self.beta_grid.is_empty() {
            return Err(Error::config("beta_grid", "empty grid"));
        }
        if self.beta_grid.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(Error::config("beta_grid", "values must be finite and non-negative"));
        }
        if self.beta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("beta_grid", "grid must be strictly increasing"));
        }
        Ok(())
    }
}

/// `min, min + step, ..., max` with values computed as `min + i * step`.
pub fn beta_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || max < min {
        return vec![min];
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| min + i as f64 * step).collect()
}

/// A scored label for one concept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelChoice {
    pub candidate: Candidate,
    pub length: u32,
    pub surprisal: f64,
}

impl LabelChoice {
    pub fn cost(&self, beta: f64) -> f64 {
        self.surprisal + beta * f64::from(self.length)
    }
}

/// Orders two labels at `beta`: lower cost, then shorter, then the
/// lexicographically smaller surface.
pub fn compare_labels(lexicon: &Lexicon, beta: f64, a: &LabelChoice, b: &LabelChoice) -> Ordering {
    a.cost(beta)
        .total_cmp(&b.cost(beta))
        .then(a.length.cmp(&b.length))
        .then_with(|| {
            if a.candidate == b.candidate {
                Ordering::Equal
            } else {
                lexicon
                    .candidate_surface(a.candidate)
                    .cmp(&lexicon.candidate_surface(b.candidate))
            }
        })
}

/// Label search for a single concept.
pub struct ConceptSearch<'l, 'a> {
    listener: &'l Listener<'a>,
    concept: usize,
    singles: Vec<LabelChoice>,
    pairs: HashMap<usize, Vec<LabelChoice>>,
}

impl<'l, 'a> ConceptSearch<'l, 'a> {
    pub fn new(listener: &'l Listener<'a>, concept: usize) -> Result<Self> {
        let lexicon = listener.lexicon();
        if lexicon.form_count() == 0 {
            return Err(Error::EmptyLexicon);
        }
        let singles = (0..lexicon.form_count())
            .map(|i| Self::score(listener, concept, Candidate::single(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConceptSearch {
            listener,
            concept,
            singles,
            pairs: HashMap::new(),
        })
    }

    fn score(listener: &Listener<'_>, concept: usize, candidate: Candidate) -> Result<LabelChoice> {
        let lexicon = listener.lexicon();
        Ok(LabelChoice {
            candidate,
            length: lexicon.candidate_length(candidate),
            surprisal: listener.key_surprisal(lexicon.candidate_key(candidate), concept)?,
        })
    }

    fn pair_row(&mut self, first: usize) -> Result<&[LabelChoice]> {
        if !self.pairs.contains_key(&first) {
            let row = (0..self.singles.len())
                .map(|j| Self::score(self.listener, self.concept, Candidate::pair(first, j)))
                .collect::<Result<Vec<_>>>()?;
            self.pairs.insert(first, row);
        }
        Ok(&self.pairs[&first])
    }

    fn best<'c>(&self, beta: f64, options: impl Iterator<Item = &'c LabelChoice>) -> LabelChoice {
        let lexicon = self.listener.lexicon();
        *options
            .min_by(|a, b| compare_labels(lexicon, beta, a, b))
            .expect("non-empty candidate set")
    }

    /// Best single form, then the best of keeping it alone or appending
    /// any existing form after it.
    pub fn greedy(&mut self, beta: f64) -> Result<LabelChoice> {
        let first = self.best(beta, self.singles.iter());
        let row = self.pair_row(first.candidate.first)?.to_vec();
        Ok(self.best(beta, std::iter::once(&first).chain(row.iter())))
    }

    /// Global minimizer over singles and ordered pairs.
    pub fn exhaustive(&mut self, beta: f64) -> Result<LabelChoice> {
        for i in 0..self.singles.len() {
            self.pair_row(i)?;
        }
        let best_single = self.best(beta, self.singles.iter());
        let mut best = best_single;
        let lexicon = self.listener.lexicon();
        for i in 0..self.singles.len() {
            let row_best = self.best(beta, self.pairs[&i].iter());
            if compare_labels(lexicon, beta, &row_best, &best) == Ordering::Less {
                best = row_best;
            }
        }
        Ok(best)
    }

    pub fn search(&mut self, beta: f64, mode: SearchMode) -> Result<LabelChoice> {
        match mode {
            SearchMode::Greedy => self.greedy(beta),
            SearchMode::Exhaustive => self.exhaustive(beta),
        }
    }
}

/// Optimal label of one concept at one `beta`.
pub fn optimal_label(
    concept_id: &str,
    lexicon: &Lexicon,
    universe: &Universe,
    params: ListenerParams,
    beta: f64,
    mode: SearchMode,
) -> Result<Form> {
    let listener = Listener::new(universe, lexicon, params)?;
    let concept = universe.require(concept_id)?;
    let choice = ConceptSearch::new(&listener, concept)?.search(beta, mode)?;
    Ok(lexicon.candidate_form(choice.candidate))
}

/// Optimal labels of one concept across the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConceptFrontier {
    pub concept_id: String,
    /// One choice per grid value.
    pub labels: Vec<LabelChoice>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    pub beta: f64,
    pub encoding: Encoding,
    pub cost: CostPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierResult {
    pub points: Vec<FrontierPoint>,
    /// Non-dominated cost points, in grid order, duplicates removed.
    pub pareto_points: Vec<CostPoint>,
    pub per_concept: Vec<ConceptFrontier>,
    pub need: NeedDistribution,
    pub search_mode: SearchMode,
}

impl FrontierResult {
    pub fn betas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.beta).collect()
    }

    /// The frontier of a single concept under need 1.
    pub fn singleton(&self, concept_id: &str, lexicon: &Lexicon) -> Result<FrontierResult> {
        let need = NeedDistribution::new(vec![(concept_id.to_string(), 1.0)]);
        self.restrict(&need, lexicon)
    }

    /// The frontier of a subset of the concepts under a new need. Optimal
    /// labels do not depend on need, so nothing is searched again.
    pub fn restrict(&self, need: &NeedDistribution, lexicon: &Lexicon) -> Result<FrontierResult> {
        let per_concept = need
            .entries()
            .iter()
            .map(|(id, _)| {
                self.per_concept
                    .iter()
                    .find(|c| &c.concept_id == id)
                    .cloned()
                    .ok_or(Error::ConceptSetMismatch)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(&self.betas(), per_concept, need.clone(), lexicon, self.search_mode))
    }
}

/// Indices of points that no other point dominates; exact duplicates keep
/// their first occurrence.
pub fn pareto_filter(points: &[CostPoint]) -> Vec<usize> {
    let mut keep = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let dominated = points.iter().any(|q| q.dominates(p));
        let duplicate = points[..i].iter().any(|q| q == p);
        if !dominated && !duplicate {
            keep.push(i);
        }
    }
    keep
}

fn assemble(
    betas: &[f64],
    per_concept: Vec<ConceptFrontier>,
    need: NeedDistribution,
    lexicon: &Lexicon,
    search_mode: SearchMode,
) -> FrontierResult {
    let mut points = Vec::with_capacity(betas.len());
    for (b, &beta) in betas.iter().enumerate() {
        let mut cost = CostPoint {
            avg_length: 0.0,
            info_loss: 0.0,
        };
        let mut items = Vec::with_capacity(per_concept.len());
        for cf in &per_concept {
            let p = need.get(&cf.concept_id).expect("need covers concept set");
            let choice = &cf.labels[b];
            cost.avg_length += p * f64::from(choice.length);
            cost.info_loss += p * choice.surprisal;
            let form = lexicon.candidate_form(choice.candidate);
            let strategy = if choice.candidate.second.is_some() {
                Strategy::Combination
            } else {
                Strategy::Reuse
            };
            let mut item = EncodingItem::new(cf.concept_id.clone(), form, strategy);
            item.joint_weight = p;
            items.push(item);
        }
        points.push(FrontierPoint {
            beta,
            encoding: Encoding::new(items).expect("one label per concept"),
            cost,
        });
    }
    let costs: Vec<CostPoint> = points.iter().map(|p| p.cost).collect();
    let pareto_points = pareto_filter(&costs).into_iter().map(|i| costs[i]).collect();
    FrontierResult {
        points,
        pareto_points,
        per_concept,
        need,
        search_mode,
    }
}

/// Optimal encodings of the need's concepts for every grid value.
pub fn estimate_frontier(
    need: &NeedDistribution,
    listener: &Listener<'_>,
    params: &FrontierParams,
) -> Result<FrontierResult> {
    params.validate()?;
    if need.is_empty() {
        return Err(Error::InvalidInput("empty concept set".into()));
    }
    let universe = listener.universe();
    let per_concept = need
        .entries()
        .par_iter()
        .map(|(id, _)| {
            let concept = universe.require(id)?;
            let mut search = ConceptSearch::new(listener, concept)?;
            let labels = params
                .beta_grid
                .iter()
                .map(|&beta| search.search(beta, params.search_mode))
                .collect::<Result<Vec<_>>>()?;
            Ok(ConceptFrontier {
                concept_id: id.clone(),
                labels,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(
        &params.beta_grid,
        per_concept,
        need.clone(),
        listener.lexicon(),
        params.search_mode,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyLoss {
    /// Loss clamped at zero.
    pub epsilon: f64,
    pub argmin_beta: f64,
    /// The minimum before clamping.
    pub raw_epsilon: f64,
}

/// `min_beta [cost(beta) - frontier_cost(beta)]` for a known cost point.
pub fn loss_of_point(cost: &CostPoint, frontier: &FrontierResult) -> EfficiencyLoss {
    let mut best = f64::INFINITY;
    let mut argmin = frontier.points.first().map(|p| p.beta).unwrap_or(0.0);
    for p in &frontier.points {
        let gap = cost.scalarized(p.beta) - p.cost.scalarized(p.beta);
        if gap < best {
            best = gap;
            argmin = p.beta;
        }
    }
    if best < -LOSS_TOLERANCE {
        warn!(
            "negative efficiency loss {best:.3e} at beta={argmin}: {:?} search missed an optimum",
            frontier.search_mode
        );
    }
    EfficiencyLoss {
        epsilon: best.max(0.0),
        argmin_beta: argmin,
        raw_epsilon: best,
    }
}

fn check_concepts(encoding: &Encoding, frontier: &FrontierResult) -> Result<()> {
    if encoding.concept_ids() != frontier.need.concept_ids() || encoding.len() != frontier.need.len() {
        return Err(Error::ConceptSetMismatch);
    }
    Ok(())
}

/// Efficiency loss of an encoding, costed under the frontier's need.
pub fn efficiency_loss(
    encoding: &Encoding,
    frontier: &FrontierResult,
    listener: &Listener<'_>,
) -> Result<EfficiencyLoss> {
    check_concepts(encoding, frontier)?;
    let weighted = encoding.clone().with_need(&frontier.need)?;
    Ok(loss_of_point(&weighted_cost(&weighted, listener)?, frontier))
}

/// Loss of every item against its own single-concept frontier.
pub fn item_losses(
    encoding: &Encoding,
    frontier: &FrontierResult,
    listener: &Listener<'_>,
) -> Result<Vec<(String, EfficiencyLoss)>> {
    check_concepts(encoding, frontier)?;
    encoding
        .items()
        .par_iter()
        .map(|item| {
            let single = frontier.singleton(&item.concept_id, listener.lexicon())?;
            let cost = CostPoint {
                avg_length: f64::from(item.form.length_units),
                info_loss: listener.surprisal(&item.form, &item.concept_id)?,
            };
            Ok((item.concept_id.clone(), loss_of_point(&cost, &single)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{Concept, LexiconEntry};

    fn concept(id: &str, v: &[f64]) -> Concept {
        Concept {
            id: id.into(),
            gloss: String::new(),
            embedding: v.to_vec(),
            english_need_weight: 1.0,
        }
    }

    fn entry(surface: &str, concept: &str) -> LexiconEntry {
        LexiconEntry {
            form: Form::atomic(surface),
            concept_id: concept.into(),
            form_frequency: 1.0,
            sense_frequency: 1.0,
        }
    }

    #[test]
    fn default_grid_has_1001_values() {
        let g = beta_grid(0.0, 10.0, 0.01);
        assert_eq!(g.len(), 1001);
        assert_eq!(g[0], 0.0);
        assert!((g[1000] - 10.0).abs() < 1e-12);
        assert!(FrontierParams::default().validate().is_ok());
        let bad = FrontierParams {
            beta_grid: vec![0.0, 0.0],
            search_mode: SearchMode::Greedy,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_form_lexicon_at_zero_beta_matches_brute_force() {
        let u = Universe::new(vec![concept("a", &[1.0, 0.2]), concept("t", &[1.0, 0.0]), concept("o", &[0.0, 1.0])])
            .unwrap();
        let lex = Lexicon::new(vec![entry("a", "a")], &u, Default::default()).unwrap();
        let params = ListenerParams::default();
        let single = crate::costs::item_cost(&Form::atomic("a"), "t", &lex, &u, params, 0.0).unwrap();
        let doubled_form = lex.candidate_form(Candidate::pair(0, 0));
        let doubled = crate::costs::item_cost(&doubled_form, "t", &lex, &u, params, 0.0).unwrap();
        let expect = if doubled < single { "a a" } else { "a" };
        for mode in [SearchMode::Greedy, SearchMode::Exhaustive] {
            let f = optimal_label("t", &lex, &u, params, 0.0, mode).unwrap();
            assert_eq!(f.surface, expect);
        }
    }

    #[test]
    fn large_beta_returns_a_shortest_atomic_form() {
        // Surprisal lies in [0, log2 |C| + gamma * 2 * log2(e)] so a beta whose
        // length penalty for one extra unit exceeds that bound forces the
        // shortest form.
        let u = Universe::new(vec![
            concept("p", &[1.0, 0.0, 0.0]),
            concept("q", &[0.0, 1.0, 0.0]),
            concept("r", &[0.0, 0.0, 1.0]),
            concept("t", &[0.2, 0.9, 0.1]),
        ])
        .unwrap();
        let lex = Lexicon::new(vec![entry("pp", "p"), entry("qqq", "q"), entry("r", "r")], &u, Default::default()).unwrap();
        let params = ListenerParams::default();
        let bound = (u.len() as f64).log2() + params.gamma * 2.0 * std::f64::consts::LOG2_E;
        let beta = bound + 1.0;
        for mode in [SearchMode::Greedy, SearchMode::Exhaustive] {
            assert_eq!(optimal_label("t", &lex, &u, params, beta, mode).unwrap().surface, "r");
        }
    }

    #[test]
    fn empty_lexicon_is_an_error() {
        let u = Universe::new(vec![concept("t", &[1.0])]).unwrap();
        let lex = Lexicon::new(vec![], &u, Default::default()).unwrap();
        assert!(matches!(
            optimal_label("t", &lex, &u, Default::default(), 0.0, SearchMode::Greedy),
            Err(Error::EmptyLexicon)
        ));
    }

    #[test]
    fn pareto_filter_drops_dominated_and_duplicates() {
        let pts = [
            CostPoint { avg_length: 1.0, info_loss: 5.0 },
            CostPoint { avg_length: 2.0, info_loss: 3.0 },
            CostPoint { avg_length: 2.0, info_loss: 4.0 },
            CostPoint { avg_length: 1.0, info_loss: 5.0 },
            CostPoint { avg_length: 3.0, info_loss: 1.0 },
        ];
        assert_eq!(pareto_filter(&pts), vec![0, 1, 4]);
    }

    #[test]
    fn dominated_encoding_loss_is_at_least_the_margin_at_zero_beta() {
        let frontier_cost = CostPoint { avg_length: 2.0, info_loss: 1.0 };
        let u = Universe::new(vec![concept("t", &[1.0])]).unwrap();
        let lex = Lexicon::new(vec![entry("a", "t")], &u, Default::default()).unwrap();
        let item = EncodingItem::new("t", Form::atomic("a"), Strategy::Reuse);
        let frontier = FrontierResult {
            points: [0.0, 0.5, 1.0]
                .iter()
                .map(|&beta| FrontierPoint {
                    beta,
                    encoding: Encoding::new(vec![item.clone()]).unwrap(),
                    cost: frontier_cost,
                })
                .collect(),
            pareto_points: vec![frontier_cost],
            per_concept: vec![],
            need: NeedDistribution::uniform(&["t"]),
            search_mode: SearchMode::Exhaustive,
        };
        let _ = lex;
        let delta = 0.25;
        let worse = CostPoint {
            avg_length: 2.0 + delta,
            info_loss: 1.0 + delta,
        };
        let loss = loss_of_point(&worse, &frontier);
        assert!(loss.epsilon >= delta - 1e-15);
        assert_eq!(loss.argmin_beta, 0.0);
        assert!((loss.epsilon - delta).abs() < 1e-15);
    }

    #[test]
    fn item_loss_matches_grid_brute_force() {
        let u = Universe::new(vec![
            concept("p", &[1.0, 0.1]),
            concept("q", &[0.1, 1.0]),
            concept("r", &[0.7, 0.7]),
            concept("t", &[0.9, 0.5]),
        ])
        .unwrap();
        let lex = Lexicon::new(vec![entry("p", "p"), entry("qq", "q"), entry("rrr", "r")], &u, Default::default()).unwrap();
        let listener = Listener::new(&u, &lex, Default::default()).unwrap();
        let params = FrontierParams {
            beta_grid: beta_grid(0.0, 2.0, 0.1),
            search_mode: SearchMode::Exhaustive,
        };
        let need = NeedDistribution::uniform(&["t"]);
        let frontier = estimate_frontier(&need, &listener, &params).unwrap();
        let attested = Encoding::new(vec![EncodingItem::new("t", Form::atomic("qq"), Strategy::Reuse)]).unwrap();
        let loss = item_losses(&attested, &frontier, &listener).unwrap()[0].1;

        // Brute force: every candidate, every beta, through the public cost path.
        let n = lex.candidate_space_size();
        let mut expect = f64::INFINITY;
        for &beta in &params.beta_grid {
            let att = crate::costs::item_cost(&Form::atomic("qq"), "t", &lex, &u, Default::default(), beta).unwrap();
            let best = (0..n)
                .map(|k| {
                    let f = lex.candidate_form(lex.candidate_at(k));
                    crate::costs::item_cost(&f, "t", &lex, &u, Default::default(), beta).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            expect = expect.min(att - best);
        }
        assert!((loss.raw_epsilon - expect).abs() < 1e-12);
        let whole = efficiency_loss(&attested, &frontier, &listener).unwrap();
        assert!((whole.raw_epsilon - expect).abs() < 1e-12);
    }

    #[test]
    fn concept_set_mismatch_is_rejected() {
        let u = Universe::new(vec![concept("p", &[1.0, 0.0]), concept("t", &[0.5, 0.5])]).unwrap();
        let lex = Lexicon::new(vec![entry("p", "p")], &u, Default::default()).unwrap();
        let listener = Listener::new(&u, &lex, Default::default()).unwrap();
        let params = FrontierParams {
            beta_grid: vec![0.0, 1.0],
            search_mode: SearchMode::Greedy,
        };
        let frontier = estimate_frontier(&NeedDistribution::uniform(&["t"]), &listener, &params).unwrap();
        let other = Encoding::new(vec![EncodingItem::new("p", Form::atomic("p"), Strategy::Reuse)]).unwrap();
        assert!(matches!(
            efficiency_loss(&other, &frontier, &listener),
            Err(Error::ConceptSetMismatch)
        ));
    }
}
