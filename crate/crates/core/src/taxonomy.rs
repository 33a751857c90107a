//! Hypernym graph: literalness, compound headedness and taxonomic similarity.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{
    format_number, record_line, tsv_reader, tsv_writer, Columns, Encoding, EncodingItem, Lexicon, Strategy, Universe,
};

/// Directed acyclic child-to-parent graph with precomputed closures.
#[derive(Clone, Debug)]
pub struct TaxonomyGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    /// Strict ancestors, sorted.
    ancestors: Vec<Vec<usize>>,
    depth: Vec<u32>,
    max_depth: u32,
}

impl TaxonomyGraph {
    /// Builds the graph from `(child, parent)` edges. With a universe, every
    /// id must be one of its concepts.
    pub fn new<S: AsRef<str>>(edges: &[(S, S)], universe: Option<&Universe>) -> Result<Self> {
        let mut ids: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |id: &str| -> Result<usize> {
            if let Some(u) = universe {
                u.require(id)?;
            }
            Ok(*index.entry(id.to_string()).or_insert_with(|| {
                ids.push(id.to_string());
                ids.len() - 1
            }))
        };
        let mut pairs = Vec::with_capacity(edges.len());
        for (c, p) in edges {
            pairs.push((intern(c.as_ref())?, intern(p.as_ref())?));
        }
        let n = ids.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (c, p) in pairs {
            if !parents[c].contains(&p) {
                parents[c].push(p);
                children[p].push(c);
            }
        }
        for v in parents.iter_mut().chain(children.iter_mut()) {
            v.sort_unstable();
        }

        let order = topological_order(&ids, &parents)?;
        let mut ancestors: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut depth = vec![1u32; n];
        for &v in &order {
            let mut anc = Vec::new();
            for &p in &parents[v] {
                anc.push(p);
                anc.extend_from_slice(&ancestors[p]);
                depth[v] = depth[v].max(depth[p] + 1);
            }
            anc.sort_unstable();
            anc.dedup();
            ancestors[v] = anc;
        }
        let max_depth = depth.iter().copied().max().unwrap_or(0);
        Ok(TaxonomyGraph {
            ids,
            index,
            parents,
            children,
            ancestors,
            depth,
            max_depth,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    fn node(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }

    pub fn parents(&self, id: &str) -> Result<Vec<&str>> {
        Ok(self.parents[self.node(id)?].iter().map(|&p| self.ids[p].as_str()).collect())
    }

    pub fn roots(&self) -> Vec<&str> {
        (0..self.len())
            .filter(|&v| self.parents[v].is_empty())
            .map(|v| self.ids[v].as_str())
            .collect()
    }

    /// Strict ancestors of a concept; empty for ids outside the graph.
    pub fn ancestors(&self, id: &str) -> Vec<&str> {
        match self.index.get(id) {
            Some(&v) => self.ancestors[v].iter().map(|&a| self.ids[a].as_str()).collect(),
            None => Vec::new(),
        }
    }

    /// Whether `descendant` lies strictly below `ancestor`.
    pub fn is_strict_descendant(&self, descendant: &str, ancestor: &str) -> bool {
        match (self.index.get(descendant), self.index.get(ancestor)) {
            (Some(&d), Some(&a)) => self.ancestors[d].binary_search(&a).is_ok(),
            _ => false,
        }
    }

    /// Root depth is 1; otherwise one more than the deepest parent.
    pub fn depth(&self, id: &str) -> Result<u32> {
        Ok(self.depth[self.node(id)?])
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Deepest common ancestor-or-self, ties broken by id.
    pub fn lowest_common_subsumer(&self, a: &str, b: &str) -> Result<&str> {
        let (x, y) = (self.node(a)?, self.node(b)?);
        let with_self = |v: usize| {
            let mut s = self.ancestors[v].clone();
            s.push(v);
            s
        };
        let ys = with_self(y);
        with_self(x)
            .into_iter()
            .filter(|v| ys.contains(v))
            .max_by(|&p, &q| {
                self.depth[p]
                    .cmp(&self.depth[q])
                    .then_with(|| self.ids[q].cmp(&self.ids[p]))
            })
            .map(|v| self.ids[v].as_str())
            .ok_or_else(|| Error::NoCommonAncestor(a.to_string(), b.to_string()))
    }

    /// Nodes on the shortest path ignoring edge direction (1 for a self-path).
    pub fn path_nodes(&self, a: &str, b: &str) -> Result<u32> {
        let (x, y) = (self.node(a)?, self.node(b)?);
        let mut dist = vec![u32::MAX; self.len()];
        dist[x] = 1;
        let mut queue = VecDeque::from([x]);
        while let Some(v) = queue.pop_front() {
            if v == y {
                return Ok(dist[v]);
            }
            for &w in self.parents[v].iter().chain(&self.children[v]) {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Err(Error::NoCommonAncestor(a.to_string(), b.to_string()))
    }
}

fn topological_order(ids: &[String], parents: &[Vec<usize>]) -> Result<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = ids.len();
    let mut mark = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        // Iterative DFS toward the roots; `path` mirrors the open nodes.
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        let mut path = vec![start];
        mark[start] = Mark::Open;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&p) = parents[v].get(*next) {
                *next += 1;
                match mark[p] {
                    Mark::New => {
                        mark[p] = Mark::Open;
                        stack.push((p, 0));
                        path.push(p);
                    }
                    Mark::Open => {
                        let from = path.iter().position(|&x| x == p).expect("open node on path");
                        let mut cycle: Vec<String> = path[from..].iter().map(|&x| ids[x].clone()).collect();
                        cycle.push(ids[p].clone());
                        return Err(Error::Cycle(cycle));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                order.push(v);
                stack.pop();
                path.pop();
            }
        }
    }
    Ok(order)
}

/// Reads a TSV with columns `child_id`, `parent_id`.
pub fn load_taxonomy(path: &Path, universe: Option<&Universe>) -> Result<TaxonomyGraph> {
    let mut reader = tsv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let cols = Columns::new(&headers, path, &["child_id", "parent_id"])?;
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        match (cols.get(&record, "child_id"), cols.get(&record, "parent_id")) {
            (Some(c), Some(p)) => edges.push((c.to_string(), p.to_string())),
            _ => return Err(Error::parse(path, record_line(&record), "expected child_id and parent_id")),
        }
    }
    TaxonomyGraph::new(&edges, universe)
}

/// `2 depth(lcs) / (depth(a) + depth(b))`.
pub fn wu_palmer(a: &str, b: &str, graph: &TaxonomyGraph) -> Result<f64> {
    let lcs = graph.lowest_common_subsumer(a, b)?;
    let num = 2.0 * f64::from(graph.depth(lcs)?);
    Ok(num / f64::from(graph.depth(a)? + graph.depth(b)?))
}

/// `-log2(len / (2 D))` with `len` the node count of the shortest path and
/// `D` the deepest node's depth.
pub fn leacock_chodorow(a: &str, b: &str, graph: &TaxonomyGraph) -> Result<f64> {
    graph.lowest_common_subsumer(a, b)?;
    let len = f64::from(graph.path_nodes(a, b)?);
    Ok(-(len / (2.0 * f64::from(graph.max_depth()))).log2())
}

fn sense_ids<'u>(surface: &str, lexicon: &Lexicon, universe: &'u Universe) -> Result<Vec<&'u str>> {
    if !lexicon.contains(surface) {
        return Err(Error::UnresolvableForm(surface.to_string()));
    }
    Ok(lexicon
        .senses_of(surface)
        .iter()
        .map(|&(c, _)| universe.concept(c).id.as_str())
        .collect())
}

/// Whether the concept is a proper hyponym of an existing sense of `surface`.
pub fn is_literal(
    concept_id: &str,
    surface: &str,
    lexicon: &Lexicon,
    universe: &Universe,
    graph: &TaxonomyGraph,
) -> Result<bool> {
    Ok(sense_ids(surface, lexicon, universe)?
        .into_iter()
        .any(|s| graph.is_strict_descendant(concept_id, s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompoundClass {
    Endocentric,
    Exocentric,
}

impl fmt::Display for CompoundClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompoundClass::Endocentric => "endocentric",
            CompoundClass::Exocentric => "exocentric",
        })
    }
}

fn head_of<'i>(item: &'i EncodingItem, lexicon: &Lexicon) -> Result<&'i str> {
    lexicon
        .head_position()
        .split(&item.form.constituents)
        .map(|(_, h)| h)
        .ok_or_else(|| Error::InvalidEncodingItem {
            concept: item.concept_id.clone(),
            message: format!("`{}` does not have two constituents", item.form.surface),
        })
}

/// Endocentric when the concept is a literal use of the compound's head.
pub fn classify_compound(
    item: &EncodingItem,
    lexicon: &Lexicon,
    universe: &Universe,
    graph: &TaxonomyGraph,
) -> Result<CompoundClass> {
    let head = head_of(item, lexicon)?;
    Ok(if is_literal(&item.concept_id, head, lexicon, universe, graph)? {
        CompoundClass::Endocentric
    } else {
        CompoundClass::Exocentric
    })
}

/// Replaces every combination with its head word. Combinations whose head is
/// not in the lexicon are dropped and counted; other items are left out.
pub fn augment_reuse_with_heads(encoding: &Encoding, lexicon: &Lexicon) -> Result<(Encoding, usize)> {
    let mut items = Vec::new();
    let mut dropped = 0;
    for item in encoding.items().iter().filter(|i| i.strategy == Strategy::Combination) {
        let head = head_of(item, lexicon)?;
        match lexicon.form_index(head) {
            Some(h) => {
                let mut reused = item.relabeled(lexicon.form(h).form.clone());
                reused.form_frequency = None;
                reused.sense_frequency = None;
                items.push(reused);
            }
            None => dropped += 1,
        }
    }
    Ok((Encoding::new(items)?, dropped))
}

/// Similarities between a concept and one existing sense.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SenseDistance {
    pub sense_id: String,
    pub wu_palmer: f64,
    pub leacock_chodorow: f64,
}

/// Similarities to every sense of `surface` that shares an ancestor with the
/// concept.
pub fn sense_distances(
    concept_id: &str,
    surface: &str,
    lexicon: &Lexicon,
    universe: &Universe,
    graph: &TaxonomyGraph,
) -> Result<Vec<SenseDistance>> {
    if !graph.contains(concept_id) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for sense in sense_ids(surface, lexicon, universe)? {
        if !graph.contains(sense) {
            continue;
        }
        match (wu_palmer(concept_id, sense, graph), leacock_chodorow(concept_id, sense, graph)) {
            (Ok(w), Ok(l)) => out.push(SenseDistance {
                sense_id: sense.to_string(),
                wu_palmer: w,
                leacock_chodorow: l,
            }),
            (Err(Error::NoCommonAncestor(..)), _) | (_, Err(Error::NoCommonAncestor(..))) => {}
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(out)
}

/// Taxonomic profile of one encoding item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemTaxonomy {
    pub item_id: String,
    pub strategy: Strategy,
    /// For combinations, literalness of the head.
    pub literal: bool,
    pub compound_class: Option<CompoundClass>,
    /// Highest similarity over the relevant senses (the head's for combinations).
    pub wup_to_nearest_sense: Option<f64>,
    pub lch_to_nearest_sense: Option<f64>,
}

pub fn classify_item(
    item: &EncodingItem,
    lexicon: &Lexicon,
    universe: &Universe,
    graph: &TaxonomyGraph,
) -> Result<ItemTaxonomy> {
    let (surface, compound_class) = match item.strategy {
        Strategy::Reuse => (item.form.surface.as_str(), None),
        Strategy::Combination => (
            head_of(item, lexicon)?,
            Some(classify_compound(item, lexicon, universe, graph)?),
        ),
    };
    let literal = is_literal(&item.concept_id, surface, lexicon, universe, graph)?;
    let table = sense_distances(&item.concept_id, surface, lexicon, universe, graph)?;
    let best = |f: fn(&SenseDistance) -> f64| table.iter().map(f).reduce(f64::max);
    Ok(ItemTaxonomy {
        item_id: item.concept_id.clone(),
        strategy: item.strategy,
        literal,
        compound_class,
        wup_to_nearest_sense: best(|s| s.wu_palmer),
        lch_to_nearest_sense: best(|s| s.leacock_chodorow),
    })
}

pub fn classify_encoding(
    encoding: &Encoding,
    lexicon: &Lexicon,
    universe: &Universe,
    graph: &TaxonomyGraph,
) -> Result<Vec<ItemTaxonomy>> {
    encoding
        .items()
        .iter()
        .map(|i| classify_item(i, lexicon, universe, graph))
        .collect()
}

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_else(|| "NA".into())
}

/// Columns: `item_id, literal, compound_class, wup_to_nearest_sense, lch_to_nearest_sense`.
pub fn write_item_taxonomy<W: Write>(rows: &[ItemTaxonomy], out: W) -> Result<()> {
    let mut w = tsv_writer(out);
    let err = |e: csv::Error| Error::InvalidInput(format!("writing taxonomy table: {e}"));
    w.write_record([
        "item_id",
        "literal",
        "compound_class",
        "wup_to_nearest_sense",
        "lch_to_nearest_sense",
    ])
    .map_err(err)?;
    for r in rows {
        let class = r.compound_class.map(|c| c.to_string()).unwrap_or_else(|| "NA".into());
        w.write_record([
            r.item_id.as_str(),
            if r.literal { "1" } else { "0" },
            &class,
            &optional(r.wup_to_nearest_sense),
            &optional(r.lch_to_nearest_sense),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<taxonomy>", e))
}
