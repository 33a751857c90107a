//! Bundled and generated test data.
//!
//! The toy fixture is a hand-built set of files under `fixtures/toy`. The
//! synthetic fixture is a seeded clustered lexicon whose attested labels are
//! planted close to the frontier: reuse items get the single form that best
//! identifies them, combination items the pair with the best cost at a
//! moderate tradeoff weight.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::frontier::{compare_labels, LabelChoice};
use crate::lexicon::{
    write_encoding, write_lexicon, write_universe, Candidate, Concept, Encoding, EncodingItem, Form, Lexicon,
    LexiconEntry, LexiconSettings, Strategy, Universe,
};
use crate::rng;
use crate::semantics::{Listener, ListenerParams};

/// Directory of the bundled toy fixture (6 emerging concepts, 8 forms).
pub fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("toy")
}

/// Config file of the bundled toy fixture.
pub fn toy_config() -> PathBuf {
    toy_dir().join("toy.conf")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticParams {
    pub clusters: usize,
    pub forms_per_cluster: usize,
    pub reuse_items: usize,
    pub combination_items: usize,
    pub dim: usize,
    /// Spread of senses around their cluster center.
    pub sense_noise: f64,
    /// Spread of emerging concepts around their source meaning.
    pub concept_noise: f64,
    /// Tradeoff weight at which combination labels are planted.
    pub planting_beta: f64,
    pub listener: ListenerParams,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            clusters: 8,
            forms_per_cluster: 5,
            reuse_items: 20,
            combination_items: 20,
            dim: 12,
            sense_noise: 0.35,
            concept_noise: 0.15,
            planting_beta: 0.5,
            listener: ListenerParams::default(),
            seed: 2024,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Synthetic {
    pub universe: Universe,
    pub lexicon: Lexicon,
    /// Reuse items first, then combinations.
    pub encoding: Encoding,
    /// `(child, parent)` edges: senses under cluster nodes, literal items
    /// under their label's sense.
    pub taxonomy: Vec<(String, String)>,
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

fn surface(r: &mut impl Rng, len: usize) -> String {
    (0..len)
        .map(|i| {
            let set = if i % 2 == 0 { CONSONANTS } else { VOWELS };
            set[r.gen_range(0..set.len())] as char
        })
        .collect()
}

fn jitter(r: &mut impl Rng, base: &[f64], spread: f64) -> Vec<f64> {
    base.iter().map(|x| x + r.gen_range(-spread..=spread)).collect()
}

fn concept(id: String, embedding: Vec<f64>) -> Concept {
    Concept {
        id,
        gloss: String::new(),
        embedding,
        english_need_weight: 1.0,
    }
}

fn best_of(lexicon: &Lexicon, beta: f64, options: impl Iterator<Item = LabelChoice>) -> LabelChoice {
    options
        .min_by(|a, b| compare_labels(lexicon, beta, a, b))
        .expect("non-empty options")
}

impl Synthetic {
    pub fn generate(params: &SyntheticParams) -> Result<Self> {
        let n_forms = params.clusters * params.forms_per_cluster;
        if n_forms == 0 || params.dim == 0 || params.clusters < 2 {
            return Err(Error::InvalidInput("synthetic lexicon needs >= 2 clusters, forms and dimensions".into()));
        }
        let mut r = rng::stream(params.seed, "fixture/synthetic", 0);

        let centers: Vec<Vec<f64>> = (0..params.clusters)
            .map(|_| (0..params.dim).map(|_| r.gen_range(-1.0..=1.0)).collect())
            .collect();
        let mut concepts: Vec<Concept> = centers
            .iter()
            .enumerate()
            .map(|(c, v)| concept(format!("cluster{c:02}"), v.clone()))
            .collect();
        let mut taxonomy = Vec::new();

        let mut surfaces = std::collections::BTreeSet::new();
        let mut entries = Vec::with_capacity(n_forms);
        let mut sense_vectors = Vec::with_capacity(n_forms);
        for f in 0..n_forms {
            let cluster = f / params.forms_per_cluster;
            let s = loop {
                let len = r.gen_range(3..=7);
                let s = surface(&mut r, len);
                if surfaces.insert(s.clone()) {
                    break s;
                }
            };
            let id = format!("sense{f:02}");
            let v = jitter(&mut r, &centers[cluster], params.sense_noise);
            sense_vectors.push(v.clone());
            concepts.push(concept(id.clone(), v));
            taxonomy.push((id.clone(), format!("cluster{cluster:02}")));
            let mut form = Form::atomic(s);
            form.word_classes.insert("noun".into());
            let freq = f64::from(r.gen_range(1u32..200));
            entries.push(LexiconEntry {
                form,
                concept_id: id,
                form_frequency: freq,
                sense_frequency: freq,
            });
        }

        // Emerging concepts: reuse items near one sense, combinations
        // between senses of two different clusters.
        let mut sources = Vec::new();
        for i in 0..params.reuse_items {
            let f = r.gen_range(0..n_forms);
            let id = format!("reuse{i:02}");
            concepts.push(concept(id.clone(), jitter(&mut r, &sense_vectors[f], params.concept_noise)));
            sources.push((id, f, None));
        }
        for i in 0..params.combination_items {
            let a = r.gen_range(0..n_forms);
            let b = loop {
                let b = r.gen_range(0..n_forms);
                if b / params.forms_per_cluster != a / params.forms_per_cluster {
                    break b;
                }
            };
            let mid: Vec<f64> = sense_vectors[a]
                .iter()
                .zip(&sense_vectors[b])
                .map(|(x, y)| 0.5 * (x + y))
                .collect();
            let id = format!("combo{i:02}");
            concepts.push(concept(id.clone(), jitter(&mut r, &mid, params.concept_noise)));
            sources.push((id, a, Some(b)));
        }

        let universe = Universe::new(concepts)?;
        let lexicon = Lexicon::new(entries, &universe, LexiconSettings::default())?;
        let listener = Listener::new(&universe, &lexicon, params.listener)?;

        let mut items = Vec::with_capacity(sources.len());
        for (id, _, b) in &sources {
            let c = universe.require(id)?;
            let choice = match b {
                // Lowest surprisal among single forms.
                None => best_of(&lexicon, 0.0, (0..n_forms).map(|i| search_single(&listener, c, i))),
                Some(_) => {
                    let mut best: Option<LabelChoice> = None;
                    for first in 0..n_forms {
                        let row = (0..n_forms).map(|j| search_pair(&listener, c, first, j));
                        let cand = best_of(&lexicon, params.planting_beta, row);
                        best = Some(match best {
                            Some(prev) => best_of(&lexicon, params.planting_beta, [prev, cand].into_iter()),
                            None => cand,
                        });
                    }
                    best.expect("non-empty lexicon")
                }
            };
            let form = lexicon.candidate_form(choice.candidate);
            let strategy = if form.is_combination() {
                Strategy::Combination
            } else {
                Strategy::Reuse
            };
            let mut item = EncodingItem::new(id.clone(), form, strategy);
            item.form_frequency = Some(f64::from(r.gen_range(1u32..50)));
            item.sense_frequency = Some(f64::from(r.gen_range(1u32..20)));
            items.push(item);

            // Half of the items are literal uses of their label's head.
            let head = match choice.candidate.second {
                Some(h) => h,
                None => choice.candidate.first,
            };
            let parent = if r.gen_bool(0.5) {
                lexicon.form(head).senses[0].0
            } else {
                universe.require(&format!("cluster{:02}", r.gen_range(0..params.clusters)))?
            };
            taxonomy.push((id.clone(), universe.concept(parent).id.clone()));
        }
        let encoding = Encoding::new(items)?;
        Ok(Synthetic {
            universe,
            lexicon,
            encoding,
            taxonomy,
        })
    }

    /// Writes `concepts.jsonl`, `embeddings.jsonl`, `lexicon.tsv`,
    /// `encoding.tsv` and `taxonomy.tsv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| -> Result<BufWriter<File>> {
            let p = dir.join(name);
            Ok(BufWriter::new(File::create(&p).map_err(|e| Error::io(&p, e))?))
        };
        write_universe(&self.universe, create("concepts.jsonl")?, create("embeddings.jsonl")?)?;
        write_lexicon(&self.lexicon, create("lexicon.tsv")?)?;
        write_encoding(&self.encoding, create("encoding.tsv")?)?;
        let mut tax = String::from("child_id\tparent_id\n");
        for (c, p) in &self.taxonomy {
            tax.push_str(&format!("{c}\t{p}\n"));
        }
        let p = dir.join("taxonomy.tsv");
        std::fs::write(&p, tax).map_err(|e| Error::io(&p, e))
    }
}

fn search_single(listener: &Listener<'_>, concept: usize, i: usize) -> LabelChoice {
    score(listener, concept, Candidate::single(i))
}

fn search_pair(listener: &Listener<'_>, concept: usize, i: usize, j: usize) -> LabelChoice {
    score(listener, concept, Candidate::pair(i, j))
}

fn score(listener: &Listener<'_>, concept: usize, candidate: Candidate) -> LabelChoice {
    let lexicon = listener.lexicon();
    LabelChoice {
        candidate,
        length: lexicon.candidate_length(candidate),
        surprisal: listener
            .key_surprisal(lexicon.candidate_key(candidate), concept)
            .expect("fixture vectors are non-degenerate"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_seeded() {
        let p = SyntheticParams {
            reuse_items: 4,
            combination_items: 4,
            ..Default::default()
        };
        let a = Synthetic::generate(&p).unwrap();
        let b = Synthetic::generate(&p).unwrap();
        assert_eq!(a.encoding, b.encoding);
        assert_eq!(a.lexicon.form_count(), 40);
        assert_eq!(a.encoding.filter_strategy(Strategy::Reuse).len(), 4);
        assert_eq!(a.encoding.filter_strategy(Strategy::Combination).len(), 4);
        let c = Synthetic::generate(&SyntheticParams { seed: 1, ..p }).unwrap();
        assert_ne!(a.encoding, c.encoding);
    }

    #[test]
    fn toy_fixture_is_bundled() {
        for f in ["concepts.jsonl", "embeddings.jsonl", "lexicon.tsv", "encoding.tsv", "taxonomy.tsv", "toy.conf"] {
            assert!(toy_dir().join(f).is_file(), "{f}");
        }
    }
}
