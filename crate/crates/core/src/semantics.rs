//! Prototype listener.
//!
//! A form is read as a category whose prototype is the frequency-weighted
//! mean of its senses; a combination's prototype is the sum of its
//! constituents' prototypes. The listener puts probability
//! `exp(-gamma * d(c, q))` (normalized over the universe) on each concept,
//! with `d` the cosine distance.

use std::f64::consts::LOG2_E;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{Form, FormKey, LexicalForm, Lexicon, Universe};

/// Probabilities are floored here before logs are taken.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// `-log2(PROBABILITY_FLOOR)`, the largest surprisal ever reported.
pub fn max_surprisal() -> f64 {
    -PROBABILITY_FLOOR.log2()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `1 - cos(a, b)`, clamped to `[0, 2]`.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "cosine distance between vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm(None));
    }
    Ok(distance_with_norms(a, na, b, nb))
}

#[inline]
fn distance_with_norms(a: &[f64], na: f64, b: &[f64], nb: f64) -> f64 {
    (1.0 - dot(a, b) / (na * nb)).clamp(0.0, 2.0)
}

/// Softmax of `-gamma * d` with the minimum distance shifted to zero.
pub fn softmax_from_distances(distances: &[f64], gamma: f64) -> Vec<f64> {
    let d_min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let mut p: Vec<f64> = distances.iter().map(|&d| (-gamma * (d - d_min)).exp()).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prototype {
    pub form_surface: String,
    pub vector: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ListenerParams {
    /// Sensitivity of the listener to semantic distance.
    pub gamma: f64,
    /// Add-one smoothing of sense frequencies inside prototypes.
    pub sense_smoothing: bool,
}

impl Default for ListenerParams {
    fn default() -> Self {
        ListenerParams {
            gamma: 10.0,
            sense_smoothing: true,
        }
    }
}

impl ListenerParams {
    pub fn with_gamma(gamma: f64) -> Self {
        ListenerParams {
            gamma,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma >= 0.0 && self.gamma.is_finite() {
            Ok(())
        } else {
            Err(Error::config("gamma", "must be a finite non-negative number"))
        }
    }
}

/// `p(c | w, L)` for each sense of an existing form, in sense order.
pub fn sense_weights(form: &LexicalForm, smoothing: bool) -> Vec<f64> {
    let counts: Vec<f64> = form
        .senses
        .iter()
        .map(|&(_, f)| if smoothing { (f + 0.5).floor() + 1.0 } else { f })
        .collect();
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        counts.iter().map(|c| c / total).collect()
    } else {
        vec![1.0 / counts.len() as f64; counts.len()]
    }
}

/// Universe-wide normalizer of one prototype.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Normalizer {
    q_norm: f64,
    d_min: f64,
    /// `log2(sum_c exp(-gamma * (d_c - d_min)))`.
    log2_sum: f64,
}

/// Listener distributions over a fixed universe and lexicon.
///
/// Prototypes of existing forms and their normalizers are computed once;
/// normalizers of ordered pairs are filled in lazily, one row per first
/// constituent. All cached values are pure functions of their key, so
/// results do not depend on which thread filled a cache slot.
pub struct Listener<'a> {
    universe: &'a Universe,
    lexicon: &'a Lexicon,
    params: ListenerParams,
    unit_vectors: Vec<Vec<f64>>,
    unit_normalizers: Vec<Option<Normalizer>>,
    pair_rows: Vec<OnceLock<Vec<Option<Normalizer>>>>,
}

impl<'a> Listener<'a> {
    pub fn new(universe: &'a Universe, lexicon: &'a Lexicon, params: ListenerParams) -> Result<Self> {
        params.validate()?;
        if universe.is_empty() {
            return Err(Error::InvalidInput("empty universe".into()));
        }
        let unit_vectors: Vec<Vec<f64>> = lexicon
            .forms()
            .iter()
            .map(|lf| {
                let mut v = vec![0.0; universe.dim()];
                for (&(c, _), w) in lf.senses.iter().zip(sense_weights(lf, params.sense_smoothing)) {
                    for (acc, x) in v.iter_mut().zip(&universe.concept(c).embedding) {
                        *acc += w * x;
                    }
                }
                v
            })
            .collect();
        let mut listener = Listener {
            universe,
            lexicon,
            params,
            unit_vectors: Vec::new(),
            unit_normalizers: Vec::new(),
            pair_rows: (0..lexicon.form_count()).map(|_| OnceLock::new()).collect(),
        };
        listener.unit_normalizers = unit_vectors.par_iter().map(|q| listener.normalizer(q)).collect();
        listener.unit_vectors = unit_vectors;
        Ok(listener)
    }

    pub fn universe(&self) -> &'a Universe {
        self.universe
    }

    pub fn lexicon(&self) -> &'a Lexicon {
        self.lexicon
    }

    pub fn params(&self) -> ListenerParams {
        self.params
    }

    fn normalizer(&self, q: &[f64]) -> Option<Normalizer> {
        let q_norm = norm(q);
        if !(q_norm > 0.0) {
            return None;
        }
        let gamma = self.params.gamma;
        let distances: Vec<f64> = (0..self.universe.len())
            .map(|c| self.distance(c, q, q_norm))
            .collect();
        let d_min = distances.iter().copied().fold(f64::INFINITY, f64::min);
        let sum: f64 = distances.iter().map(|&d| (-gamma * (d - d_min)).exp()).sum();
        Some(Normalizer {
            q_norm,
            d_min,
            log2_sum: sum.log2(),
        })
    }

    #[inline]
    fn distance(&self, concept: usize, q: &[f64], q_norm: f64) -> f64 {
        let c = self.universe.concept(concept);
        distance_with_norms(&c.embedding, self.universe.norm(concept), q, q_norm)
    }

    fn pair_vector(&self, i: usize, j: usize) -> Vec<f64> {
        self.unit_vectors[i]
            .iter()
            .zip(&self.unit_vectors[j])
            .map(|(a, b)| a + b)
            .collect()
    }

    fn pair_row(&self, i: usize) -> &[Option<Normalizer>] {
        self.pair_rows[i].get_or_init(|| {
            (0..self.lexicon.form_count())
                .map(|j| self.normalizer(&self.pair_vector(i, j)))
                .collect()
        })
    }

    /// Prototype vector for a resolved form.
    pub fn key_vector(&self, key: FormKey) -> Vec<f64> {
        match key {
            FormKey::Unit(i) => self.unit_vectors[i].clone(),
            FormKey::Pair(i, j) => self.pair_vector(i, j),
        }
    }

    fn key_normalizer(&self, key: FormKey) -> Result<Normalizer> {
        let n = match key {
            FormKey::Unit(i) => self.unit_normalizers[i],
            FormKey::Pair(i, j) => self.pair_row(i)[j],
        };
        n.ok_or_else(|| Error::ZeroNorm(Some(self.key_surface(key))))
    }

    fn key_surface(&self, key: FormKey) -> String {
        match key {
            FormKey::Unit(i) => self.lexicon.form(i).form.surface.clone(),
            FormKey::Pair(i, j) => format!(
                "{}{}{}",
                self.lexicon.form(i).form.surface,
                self.lexicon.separator(),
                self.lexicon.form(j).form.surface
            ),
        }
    }

    /// `-log2` of the listener probability of `concept` given a resolved form.
    pub fn key_surprisal(&self, key: FormKey, concept: usize) -> Result<f64> {
        let n = self.key_normalizer(key)?;
        let d = match key {
            FormKey::Unit(i) => self.distance(concept, &self.unit_vectors[i], n.q_norm),
            FormKey::Pair(i, j) => self.distance(concept, &self.pair_vector(i, j), n.q_norm),
        };
        let bits = self.params.gamma * (d - n.d_min) * LOG2_E + n.log2_sum;
        Ok(bits.min(max_surprisal()))
    }

    /// Full listener distribution for a resolved form, in universe order.
    pub fn key_distribution(&self, key: FormKey) -> Result<Vec<f64>> {
        let n = self.key_normalizer(key)?;
        let q = self.key_vector(key);
        let gamma = self.params.gamma;
        let total = n.log2_sum.exp2();
        Ok((0..self.universe.len())
            .map(|c| (-gamma * (self.distance(c, &q, n.q_norm) - n.d_min)).exp() / total)
            .collect())
    }

    pub fn prototype(&self, form: &Form) -> Result<Prototype> {
        let key = self.lexicon.resolve(form)?;
        let vector = self.key_vector(key);
        Ok(Prototype {
            form_surface: form.surface.clone(),
            vector,
        })
    }

    pub fn distribution(&self, form: &Form) -> Result<Vec<f64>> {
        self.key_distribution(self.lexicon.resolve(form)?)
    }

    /// Surprisal (bits) of `concept_id` for a listener hearing `form`.
    pub fn surprisal(&self, form: &Form, concept_id: &str) -> Result<f64> {
        let concept = self.universe.require(concept_id)?;
        self.key_surprisal(self.lexicon.resolve(form)?, concept)
    }

    /// Cosine distance between the prototypes of two existing forms.
    pub fn unit_distance(&self, i: usize, j: usize) -> Result<f64> {
        cosine_distance(&self.unit_vectors[i], &self.unit_vectors[j])
    }
}

/// Prototype of a form against the lexicon.
pub fn prototype(form: &Form, lexicon: &Lexicon, universe: &Universe, params: ListenerParams) -> Result<Prototype> {
    Listener::new(universe, lexicon, params)?.prototype(form)
}

/// Listener distribution over the universe for a form.
pub fn listener_distribution(
    form: &Form,
    lexicon: &Lexicon,
    universe: &Universe,
    params: ListenerParams,
) -> Result<Vec<f64>> {
    Listener::new(universe, lexicon, params)?.distribution(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{Concept, LengthMode, LexiconEntry};

    fn concept(id: &str, v: &[f64]) -> Concept {
        Concept {
            id: id.into(),
            gloss: String::new(),
            embedding: v.to_vec(),
            english_need_weight: 1.0,
        }
    }

    fn entry(surface: &str, concept: &str, fc: f64) -> LexiconEntry {
        LexiconEntry {
            form: Form::atomic(surface),
            concept_id: concept.into(),
            form_frequency: 1.0,
            sense_frequency: fc,
        }
    }

    fn setup() -> (Universe, Lexicon) {
        let u = Universe::new(vec![
            concept("c1", &[1.0, 0.0]),
            concept("c2", &[0.0, 1.0]),
            concept("c3", &[1.0, 1.0]),
        ])
        .unwrap();
        let lex = Lexicon::new(
            vec![entry("x", "c1", 3.0), entry("y", "c2", 0.0), entry("both", "c1", 5.0), entry("both", "c2", 5.0)],
            &u,
            Default::default(),
        )
        .unwrap();
        (u, lex)
    }

    #[test]
    fn cosine_reference_values() {
        assert_eq!(cosine_distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let d = cosine_distance(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((d - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-15);
        assert!((d - 0.29289).abs() < 1e-5);
        assert!(matches!(cosine_distance(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm(None))));
    }

    #[test]
    fn prototypes_average_senses_and_sum_constituents() {
        let (u, lex) = setup();
        let p = ListenerParams::default();
        assert_eq!(prototype(&Form::atomic("x"), &lex, &u, p).unwrap().vector, vec![1.0, 0.0]);
        assert_eq!(prototype(&Form::atomic("both"), &lex, &u, p).unwrap().vector, vec![0.5, 0.5]);
        let xy = Form::combine(&Form::atomic("x"), &Form::atomic("y"), ' ', LengthMode::Orthographic);
        assert_eq!(prototype(&xy, &lex, &u, p).unwrap().vector, vec![1.0, 1.0]);
        assert!(matches!(
            prototype(&Form::atomic("nope"), &lex, &u, p),
            Err(Error::UnresolvableForm(_))
        ));
    }

    #[test]
    fn gamma_zero_is_uniform() {
        let (u, lex) = setup();
        let d = listener_distribution(&Form::atomic("x"), &lex, &u, ListenerParams::with_gamma(0.0)).unwrap();
        assert_eq!(d, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn hand_softmax_matches() {
        let (u, lex) = setup();
        let d = listener_distribution(&Form::atomic("x"), &lex, &u, ListenerParams::default()).unwrap();
        let raw = [1.0, (-10.0f64).exp(), (-10.0 * (1.0 - 1.0 / 2f64.sqrt())).exp()];
        let z: f64 = raw.iter().sum();
        for (a, b) in d.iter().zip(raw) {
            assert!((a - b / z).abs() < 1e-14);
        }
        let s = Listener::new(&u, &lex, ListenerParams::default())
            .unwrap()
            .surprisal(&Form::atomic("x"), "c1")
            .unwrap();
        assert!((s + (1.0 / z).log2()).abs() < 1e-12);
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let d = [0.1, 0.7, 1.3, 0.2];
        let shifted: Vec<f64> = d.iter().map(|x| x + 0.37).collect();
        let a = softmax_from_distances(&d, 10.0);
        let b = softmax_from_distances(&shifted, 10.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_validation() {
        assert!(ListenerParams::with_gamma(-1.0).validate().is_err());
        assert!(ListenerParams::with_gamma(f64::NAN).validate().is_err());
    }

    #[test]
    fn surprisal_is_clamped_for_extreme_gamma() {
        let (u, lex) = setup();
        let l = Listener::new(&u, &lex, ListenerParams::with_gamma(1e6)).unwrap();
        let s = l.surprisal(&Form::atomic("x"), "c2").unwrap();
        assert!(s.is_finite());
        assert_eq!(s, max_surprisal());
    }

    #[test]
    fn cancelling_constituents_are_reported() {
        let u = Universe::new(vec![concept("p", &[1.0, 0.0]), concept("n", &[-1.0, 0.0])]).unwrap();
        let lex = Lexicon::new(vec![entry("p", "p", 1.0), entry("n", "n", 1.0)], &u, Default::default()).unwrap();
        let l = Listener::new(&u, &lex, ListenerParams::default()).unwrap();
        let pn = Form::combine(&Form::atomic("p"), &Form::atomic("n"), ' ', LengthMode::Orthographic);
        assert!(matches!(l.surprisal(&pn, "p"), Err(Error::ZeroNorm(Some(_)))));
    }
}
