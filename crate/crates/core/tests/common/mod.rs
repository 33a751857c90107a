//! Random worlds and independent reference implementations for tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use lexeff::lexicon::{
    Concept, Encoding, EncodingItem, Form, Lexicon, LexiconEntry, LexiconSettings, NeedDistribution, Strategy,
    Universe,
};
use lexeff::rng;

pub struct World {
    pub universe: Universe,
    pub lexicon: Lexicon,
    /// Concepts labeled by the encodings under test.
    pub targets: Vec<String>,
    pub need: NeedDistribution,
}

fn random_vector(r: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..=1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-3 {
            return v;
        }
    }
}

/// At most 15 atomic forms, at most 25 concepts, dimension 2 to 8.
pub fn random_world(seed: u64) -> World {
    let mut r = rng::stream(seed, "test/world", 0);
    let dim = r.gen_range(2..=8);
    let n_concepts = r.gen_range(4..=25);
    let n_forms = r.gen_range(1..=15);
    let concepts: Vec<Concept> = (0..n_concepts)
        .map(|i| Concept {
            id: format!("c{i:02}"),
            gloss: String::new(),
            embedding: random_vector(&mut r, dim),
            english_need_weight: 1.0,
        })
        .collect();
    let universe = Universe::new(concepts).unwrap();

    let letters = b"abcdefgh";
    let mut surfaces = std::collections::BTreeSet::new();
    while surfaces.len() < n_forms {
        let len = r.gen_range(1..=5);
        let s: String = (0..len).map(|_| letters[r.gen_range(0..letters.len())] as char).collect();
        surfaces.insert(s);
    }
    let mut entries = Vec::new();
    let mut ids: Vec<usize> = (0..n_concepts).collect();
    for s in &surfaces {
        ids.shuffle(&mut r);
        let n_senses = r.gen_range(1..=3.min(n_concepts));
        let form_frequency = f64::from(r.gen_range(1u32..100));
        for &c in &ids[..n_senses] {
            entries.push(LexiconEntry {
                form: Form::atomic(s.clone()),
                concept_id: format!("c{c:02}"),
                form_frequency,
                sense_frequency: r.gen_range(0.0..20.0),
            });
        }
    }
    let lexicon = Lexicon::new(entries, &universe, LexiconSettings::default()).unwrap();

    ids.shuffle(&mut r);
    let n_targets = r.gen_range(1..=8.min(n_concepts));
    let targets: Vec<String> = ids[..n_targets].iter().map(|c| format!("c{c:02}")).collect();
    let need = NeedDistribution::new(
        targets
            .iter()
            .map(|t| (t.clone(), r.gen_range(0.1..1.0)))
            .collect(),
    );
    World {
        universe,
        lexicon,
        targets,
        need,
    }
}

/// A uniformly random single-or-pair label per target concept.
pub fn random_encoding(world: &World, r: &mut impl Rng) -> Encoding {
    let n = world.lexicon.form_count();
    let items = world
        .targets
        .iter()
        .map(|t| {
            let first = world.lexicon.form(r.gen_range(0..n)).form.clone();
            let form = if r.gen_bool(0.5) {
                let second = world.lexicon.form(r.gen_range(0..n)).form.clone();
                Form::combine(&first, &second, ' ', Default::default())
            } else {
                first
            };
            let strategy = if form.is_combination() {
                Strategy::Combination
            } else {
                Strategy::Reuse
            };
            EncodingItem::new(t.clone(), form, strategy)
        })
        .collect();
    Encoding::new(items).unwrap().with_need(&world.need).unwrap()
}

/// Prototype of an atomic surface: add-one smoothed sense shares over the
/// lexicon's raw entries.
pub fn oracle_prototype(world: &World, surface: &str) -> Vec<f64> {
    let mut senses: BTreeMap<&str, f64> = BTreeMap::new();
    for e in world.lexicon.entries().iter().filter(|e| e.form.surface == surface) {
        senses.insert(&e.concept_id, (e.sense_frequency + 0.5).floor() + 1.0);
    }
    let total: f64 = senses.values().sum();
    let mut v = vec![0.0; world.universe.dim()];
    for (id, count) in senses {
        let emb = &world.universe.get(id).unwrap().embedding;
        for (x, e) in v.iter_mut().zip(emb) {
            *x += count / total * e;
        }
    }
    v
}

pub fn oracle_cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

/// Plain softmax over the universe, no shifting.
pub fn oracle_distribution(world: &World, prototype: &[f64], gamma: f64) -> Vec<f64> {
    let weights: Vec<f64> = world
        .universe
        .concepts()
        .iter()
        .map(|c| (-gamma * oracle_cosine_distance(&c.embedding, prototype)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    weights.iter().map(|w| w / z).collect()
}

pub fn oracle_surprisal(world: &World, surfaces: &[&str], concept: &str, gamma: f64) -> f64 {
    let mut q = vec![0.0; world.universe.dim()];
    for s in surfaces {
        for (x, p) in q.iter_mut().zip(oracle_prototype(world, s)) {
            *x += p;
        }
    }
    let p = oracle_distribution(world, &q, gamma);
    -p[world.universe.index_of(concept).unwrap()].max(1e-300).log2()
}

/// One scanned label: surface, length in characters, surprisal.
#[derive(Clone, Debug, PartialEq)]
pub struct Scanned {
    pub surface: String,
    pub length: u32,
    pub surprisal: f64,
}

/// Every single form and ordered pair, scored by `surprisal`.
pub fn scan_all(world: &World, mut surprisal: impl FnMut(&[&str]) -> f64) -> Vec<Scanned> {
    let surfaces: Vec<String> = world.lexicon.forms().iter().map(|f| f.form.surface.clone()).collect();
    let mut out = Vec::new();
    for a in &surfaces {
        out.push(Scanned {
            surface: a.clone(),
            length: a.chars().count() as u32,
            surprisal: surprisal(&[a.as_str()]),
        });
    }
    for a in &surfaces {
        for b in &surfaces {
            out.push(Scanned {
                surface: format!("{a} {b}"),
                length: (a.chars().count() + 1 + b.chars().count()) as u32,
                surprisal: surprisal(&[a.as_str(), b.as_str()]),
            });
        }
    }
    out
}

/// Minimum cost, then shortest, then lexicographically first surface.
pub fn brute_force_best(scanned: &[Scanned], beta: f64) -> &Scanned {
    scanned
        .iter()
        .min_by(|x, y| {
            let cx = x.surprisal + beta * f64::from(x.length);
            let cy = y.surprisal + beta * f64::from(y.length);
            cx.total_cmp(&cy)
                .then(x.length.cmp(&y.length))
                .then_with(|| x.surface.cmp(&y.surface))
        })
        .unwrap()
}

/// Strict ancestors by depth-first search over a parent map.
pub fn dfs_ancestors(parents: &BTreeMap<String, Vec<String>>, node: &str) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut stack: Vec<&str> = parents.get(node).map(|p| p.iter().map(String::as_str).collect()).unwrap_or_default();
    while let Some(n) = stack.pop() {
        if seen.insert(n.to_string()) {
            if let Some(ps) = parents.get(n) {
                stack.extend(ps.iter().map(String::as_str));
            }
        }
    }
    seen.into_iter().collect()
}

/// Random DAG: each node points to up to three lower-numbered nodes.
pub fn random_dag(seed: u64, n: usize) -> Vec<(String, String)> {
    let mut r = rng::stream(seed, "test/dag", 0);
    let mut edges = Vec::new();
    for child in 1..n {
        let k = r.gen_range(0..=3.min(child));
        let mut ps: Vec<usize> = (0..child).collect();
        ps.shuffle(&mut r);
        for &p in &ps[..k] {
            edges.push((format!("n{child:03}"), format!("n{p:03}")));
        }
    }
    edges
}
