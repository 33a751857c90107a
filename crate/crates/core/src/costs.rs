//! Expected length, expected information loss, and their scalarizations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{joint_distribution, Encoding, Form, Lexicon, NeedProductionModel, Universe};
use crate::semantics::{Listener, ListenerParams};

/// Average length and information loss (bits) of an encoding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPoint {
    pub avg_length: f64,
    pub info_loss: f64,
}

impl CostPoint {
    pub fn scalarized(&self, beta: f64) -> f64 {
        self.info_loss + beta * self.avg_length
    }

    /// No worse in both coordinates and strictly better in one.
    pub fn dominates(&self, other: &CostPoint) -> bool {
        self.avg_length <= other.avg_length
            && self.info_loss <= other.info_loss
            && (self.avg_length < other.avg_length || self.info_loss < other.info_loss)
    }
}

/// Per-item breakdown of an encoding's cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemCost {
    pub concept_id: String,
    pub surface: String,
    pub length: f64,
    pub surprisal: f64,
    pub weight: f64,
}

/// `-log2` of the listener probability of the intended concept.
pub fn surprisal(
    form: &Form,
    concept_id: &str,
    lexicon: &Lexicon,
    universe: &Universe,
    params: ListenerParams,
) -> Result<f64> {
    Listener::new(universe, lexicon, params)?.surprisal(form, concept_id)
}

/// `surprisal + beta * length` for one form-concept pair.
pub fn item_cost(
    form: &Form,
    concept_id: &str,
    lexicon: &Lexicon,
    universe: &Universe,
    params: ListenerParams,
    beta: f64,
) -> Result<f64> {
    let s = surprisal(form, concept_id, lexicon, universe, params)?;
    Ok(s + beta * f64::from(form.length_units))
}

/// Item costs under the encoding's own (normalized) joint weights.
pub fn item_costs(encoding: &Encoding, listener: &Listener<'_>) -> Result<Vec<ItemCost>> {
    let weights = encoding.weights();
    encoding
        .items()
        .par_iter()
        .zip(weights)
        .map(|(item, weight)| {
            Ok(ItemCost {
                concept_id: item.concept_id.clone(),
                surface: item.form.surface.clone(),
                length: f64::from(item.form.length_units),
                surprisal: listener.surprisal(&item.form, &item.concept_id)?,
                weight,
            })
        })
        .collect()
}

/// Weighted sums in item order.
pub fn aggregate(items: &[ItemCost]) -> CostPoint {
    let mut point = CostPoint {
        avg_length: 0.0,
        info_loss: 0.0,
    };
    for it in items {
        point.avg_length += it.weight * it.length;
        point.info_loss += it.weight * it.surprisal;
    }
    point
}

/// Cost of an encoding under the weights its items carry.
pub fn weighted_cost(encoding: &Encoding, listener: &Listener<'_>) -> Result<CostPoint> {
    if encoding.is_empty() {
        return Err(Error::InvalidInput("cannot cost an empty encoding".into()));
    }
    Ok(aggregate(&item_costs(encoding, listener)?))
}

/// Cost of an encoding with weights from the need/production model.
pub fn encoding_cost(
    encoding: &Encoding,
    lexicon: &Lexicon,
    universe: &Universe,
    model: &NeedProductionModel,
    params: ListenerParams,
) -> Result<CostPoint> {
    let joint = joint_distribution(encoding, lexicon, universe, model)?;
    let listener = Listener::new(universe, lexicon, params)?;
    let mut items = item_costs(encoding, &listener)?;
    for (it, w) in items.iter_mut().zip(joint) {
        it.weight = w;
    }
    Ok(aggregate(&items))
}

/// `info_loss + beta * avg_length`.
pub fn scalarized_cost(
    encoding: &Encoding,
    lexicon: &Lexicon,
    universe: &Universe,
    model: &NeedProductionModel,
    params: ListenerParams,
    beta: f64,
) -> Result<f64> {
    Ok(encoding_cost(encoding, lexicon, universe, model, params)?.scalarized(beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{Concept, EncodingItem, LengthMode, LexiconEntry, Strategy};

    fn universe(n: usize) -> Universe {
        Universe::new(
            (0..n)
                .map(|i| Concept {
                    id: format!("c{i}"),
                    gloss: String::new(),
                    embedding: vec![1.0 + i as f64, (i * i) as f64 - 2.0],
                    english_need_weight: 1.0,
                })
                .collect(),
        )
        .unwrap()
    }

    fn lexicon(u: &Universe) -> Lexicon {
        let entries = [("ab", "c0"), ("abcd", "c1")]
            .iter()
            .map(|(s, c)| LexiconEntry {
                form: Form::atomic(*s),
                concept_id: c.to_string(),
                form_frequency: 5.0,
                sense_frequency: 1.0,
            })
            .collect();
        Lexicon::new(entries, u, Default::default()).unwrap()
    }

    fn encoding() -> Encoding {
        let mut a = EncodingItem::new("c2", Form::atomic("ab"), Strategy::Reuse);
        a.form_frequency = Some(7.0);
        let mut b = EncodingItem::new("c3", Form::atomic("abcd"), Strategy::Reuse);
        b.form_frequency = Some(7.0);
        Encoding::new(vec![a, b]).unwrap()
    }

    #[test]
    fn equal_weights_give_arithmetic_mean_length() {
        let u = universe(4);
        let lex = lexicon(&u);
        let cp = encoding_cost(&encoding(), &lex, &u, &Default::default(), Default::default()).unwrap();
        assert_eq!(cp.avg_length, 3.0);
    }

    #[test]
    fn uniform_listener_over_eight_concepts_costs_three_bits() {
        let u = universe(8);
        let lex = lexicon(&u);
        let cp = encoding_cost(&encoding(), &lex, &u, &Default::default(), ListenerParams::with_gamma(0.0)).unwrap();
        assert_eq!(cp.info_loss, 3.0);
        let s = surprisal(&Form::atomic("ab"), "c5", &lex, &u, ListenerParams::with_gamma(0.0)).unwrap();
        assert_eq!(s, 3.0);
    }

    #[test]
    fn single_concept_universe_is_certain() {
        let u = Universe::new(vec![Concept {
            id: "only".into(),
            gloss: String::new(),
            embedding: vec![0.3, 0.4],
            english_need_weight: 1.0,
        }])
        .unwrap();
        let lex = Lexicon::new(
            vec![LexiconEntry {
                form: Form::atomic("w"),
                concept_id: "only".into(),
                form_frequency: 1.0,
                sense_frequency: 1.0,
            }],
            &u,
            Default::default(),
        )
        .unwrap();
        assert_eq!(surprisal(&Form::atomic("w"), "only", &lex, &u, Default::default()).unwrap(), 0.0);
    }

    #[test]
    fn singleton_encoding_cost_is_the_item() {
        let u = universe(5);
        let lex = lexicon(&u);
        let form = Form::combine(&Form::atomic("ab"), &Form::atomic("abcd"), ' ', LengthMode::Orthographic);
        let enc = Encoding::new(vec![EncodingItem::new("c4", form.clone(), Strategy::Combination)]).unwrap();
        let cp = encoding_cost(&enc, &lex, &u, &Default::default(), Default::default()).unwrap();
        let s = surprisal(&form, "c4", &lex, &u, Default::default()).unwrap();
        assert_eq!(cp, CostPoint { avg_length: 7.0, info_loss: s });
        let ic = item_cost(&form, "c4", &lex, &u, Default::default(), 2.0).unwrap();
        assert_eq!(ic, s + 14.0);
    }

    #[test]
    fn scalarization_reference_values() {
        assert_eq!(CostPoint { avg_length: 3.0, info_loss: 2.0 }.scalarized(1.0), 5.0);
        assert_eq!(CostPoint { avg_length: 4.0, info_loss: 1.0 }.scalarized(0.5), 3.0);
        assert_eq!(CostPoint { avg_length: 4.0, info_loss: 1.0 }.scalarized(0.0), 1.0);
    }

    #[test]
    fn dominance_is_strict() {
        let a = CostPoint { avg_length: 1.0, info_loss: 1.0 };
        assert!(!a.dominates(&a));
        assert!(a.dominates(&CostPoint { avg_length: 1.0, info_loss: 2.0 }));
        assert!(!a.dominates(&CostPoint { avg_length: 0.5, info_loss: 2.0 }));
    }
}
