//! End-to-end analysis: input loading, every stage, and the output bundle.
//!
//! Each stage returns plain tables so the command-line tool can print any of
//! them on its own; [`run_pipeline`] writes all of them plus a manifest.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::baselines::{
    baseline_summary, load_antonyms, write_replicates, AntonymPairs, BaselineKind, BaselineRun,
};
use crate::config::AnalysisConfig;
use crate::costs::{item_costs, weighted_cost, CostPoint};
use crate::error::{Error, Result};
use crate::frontier::{efficiency_loss, estimate_frontier, item_losses, pareto_filter, EfficiencyLoss, FrontierResult};
use crate::lexicon::{
    joint_distribution, load_encoding, load_lexicon, load_universe, read_encoding, Encoding, Lexicon,
    NeedDistribution, Strategy, Universe,
};
use crate::plot::{scatter, Series};
use crate::report::{num, opt_num, Table};
use crate::semantics::Listener;
use crate::stats::{bootstrap_ci, mean, t_test_pooled, Statistic};
use crate::taxonomy::{
    augment_reuse_with_heads, classify_encoding, load_taxonomy, write_item_taxonomy, CompoundClass, ItemTaxonomy,
    TaxonomyGraph,
};

/// A hashed input file as recorded in the manifest.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct InputFile {
    pub role: &'static str,
    /// Path as written in the configuration.
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

/// Everything read from disk, with joint weights attached to the encoding.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub universe: Universe,
    pub lexicon: Lexicon,
    pub encoding: Encoding,
    pub taxonomy: Option<TaxonomyGraph>,
    pub antonyms: AntonymPairs,
    pub files: Vec<InputFile>,
}

fn configured<'c>(config: &'c AnalysisConfig, role: &str) -> Option<&'c Path> {
    match role {
        "concepts" => config.concepts.as_deref(),
        "embeddings" => config.embeddings.as_deref(),
        "lexicon" => config.lexicon.as_deref(),
        "encoding" => config.encoding.as_deref(),
        "taxonomy" => config.taxonomy.as_deref(),
        "antonyms" => config.antonyms.as_deref(),
        _ => None,
    }
}

pub fn load_inputs(config: &AnalysisConfig) -> Result<Inputs> {
    let stage = |e: Error| e.in_stage("load");
    let universe = load_universe(&config.input("concepts")?, &config.input("embeddings")?).map_err(stage)?;
    let lexicon = load_lexicon(&config.input("lexicon")?, &universe, config.lexicon_settings()).map_err(stage)?;
    let encoding = load_encoding(&config.input("encoding")?, &universe, &lexicon).map_err(stage)?;
    let joint = joint_distribution(&encoding, &lexicon, &universe, &config.need_model()).map_err(stage)?;
    let need = NeedDistribution::new(
        encoding
            .items()
            .iter()
            .map(|i| i.concept_id.clone())
            .zip(joint)
            .collect(),
    );
    let encoding = encoding.with_need(&need).map_err(stage)?;
    let taxonomy = match config.taxonomy {
        Some(_) => Some(load_taxonomy(&config.input("taxonomy")?, Some(&universe)).map_err(stage)?),
        None => None,
    };
    let antonyms = match config.antonyms {
        Some(_) => load_antonyms(&config.input("antonyms")?).map_err(stage)?,
        None => AntonymPairs::default(),
    };
    let mut files = Vec::new();
    for role in ["concepts", "embeddings", "lexicon", "encoding", "taxonomy", "antonyms"] {
        if let Some(p) = configured(config, role) {
            files.push(InputFile {
                role,
                path: p.display().to_string(),
                sha256: sha256_file(&config.resolve(p)).map_err(stage)?,
            });
        }
    }
    Ok(Inputs {
        universe,
        lexicon,
        encoding,
        taxonomy,
        antonyms,
        files,
    })
}

/// Schema, graph and resolvability checks; one message per problem.
pub fn validate(config: &AnalysisConfig) -> Vec<String> {
    let mut out = config.validate();
    if !out.is_empty() {
        return out;
    }
    let universe = match load_universe(&config.input("concepts").unwrap(), &config.input("embeddings").unwrap()) {
        Ok(u) => u,
        Err(e) => {
            out.push(e.to_string());
            return out;
        }
    };
    match load_lexicon(&config.input("lexicon").unwrap(), &universe, config.lexicon_settings()) {
        Ok(lexicon) => match read_encoding(&config.input("encoding").unwrap(), config.length_mode) {
            Ok(enc) => {
                out.extend(enc.diagnostics(&lexicon, &universe));
                if out.is_empty() {
                    if let Err(e) = joint_distribution(&enc, &lexicon, &universe, &config.need_model()) {
                        out.push(e.to_string());
                    }
                }
            }
            Err(e) => out.push(e.to_string()),
        },
        Err(e) => out.push(e.to_string()),
    }
    if config.taxonomy.is_some() {
        if let Err(e) = load_taxonomy(&config.input("taxonomy").unwrap(), Some(&universe)) {
            out.push(e.to_string());
        }
    }
    if config.antonyms.is_some() {
        if let Err(e) = load_antonyms(&config.input("antonyms").unwrap()) {
            out.push(e.to_string());
        }
    }
    out
}

/// Subsets of the encoding analyzed separately.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    All,
    Reuse,
    Combination,
}

impl Scope {
    pub fn name(&self) -> &'static str {
        match self {
            Scope::All => "all",
            Scope::Reuse => "reuse",
            Scope::Combination => "combination",
        }
    }
}

/// The whole encoding and its non-empty strategy subsets, weights kept.
pub fn scopes(encoding: &Encoding) -> Vec<(Scope, Encoding)> {
    let mut out = vec![(Scope::All, encoding.clone())];
    for (scope, strategy) in [(Scope::Reuse, Strategy::Reuse), (Scope::Combination, Strategy::Combination)] {
        let sub = encoding.filter_strategy(strategy);
        if !sub.is_empty() {
            out.push((scope, sub));
        }
    }
    out
}

/// `costs.tsv` (per scope) and `cost_items.tsv`.
pub fn cost_tables(inputs: &Inputs, listener: &Listener<'_>) -> Result<(Table, Table)> {
    let stage = |e: Error| e.in_stage("costs");
    let mut scope_table = Table::new(&["scope", "n_items", "avg_length", "info_loss"]);
    for (scope, enc) in scopes(&inputs.encoding) {
        let cp = weighted_cost(&enc, listener).map_err(stage)?;
        scope_table.push(vec![
            scope.name().into(),
            enc.len().to_string(),
            num(cp.avg_length),
            num(cp.info_loss),
        ]);
    }
    let mut items = Table::new(&["concept_id", "surface", "strategy", "length", "surprisal", "weight"]);
    for (ic, item) in item_costs(&inputs.encoding, listener)
        .map_err(stage)?
        .into_iter()
        .zip(inputs.encoding.items())
    {
        items.push(vec![
            ic.concept_id,
            ic.surface,
            item.strategy.to_string(),
            num(ic.length),
            num(ic.surprisal),
            num(ic.weight),
        ]);
    }
    Ok((scope_table, items))
}

/// Frontier of the whole encoding's concept set under its need.
pub fn frontier(inputs: &Inputs, listener: &Listener<'_>, config: &AnalysisConfig) -> Result<FrontierResult> {
    estimate_frontier(&inputs.encoding.need(), listener, &config.frontier_params()).map_err(|e| e.in_stage("frontier"))
}

/// Frontier of each scope, derived from the whole-encoding frontier.
pub fn scope_frontiers(inputs: &Inputs, frontier: &FrontierResult) -> Result<Vec<(Scope, Encoding, FrontierResult)>> {
    scopes(&inputs.encoding)
        .into_iter()
        .map(|(scope, enc)| {
            let f = match scope {
                Scope::All => frontier.clone(),
                _ => frontier.restrict(&enc.need(), &inputs.lexicon)?,
            };
            Ok((scope, enc, f))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("frontier"))
}

/// `frontier.tsv`: every grid point of every scope with a Pareto flag.
pub fn frontier_table(frontiers: &[(Scope, Encoding, FrontierResult)]) -> Table {
    let mut t = Table::new(&["scope", "beta", "avg_length", "info_loss", "pareto"]);
    for (scope, _, f) in frontiers {
        let costs: Vec<CostPoint> = f.points.iter().map(|p| p.cost).collect();
        let keep = pareto_filter(&costs);
        for (i, p) in f.points.iter().enumerate() {
            t.push(vec![
                scope.name().into(),
                num(p.beta),
                num(p.cost.avg_length),
                num(p.cost.info_loss),
                if keep.contains(&i) { "1" } else { "0" }.into(),
            ]);
        }
    }
    t
}

/// Loss of one item against its own frontier, with its length and surprisal.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemLoss {
    pub item_id: String,
    pub strategy: Strategy,
    pub length: f64,
    pub surprisal: f64,
    pub loss: EfficiencyLoss,
}

pub fn scope_losses(frontiers: &[(Scope, Encoding, FrontierResult)], listener: &Listener<'_>) -> Result<Vec<(Scope, EfficiencyLoss)>> {
    frontiers
        .iter()
        .map(|(scope, enc, f)| Ok((*scope, efficiency_loss(enc, f, listener)?)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("loss"))
}

pub fn encoding_item_losses(encoding: &Encoding, frontier: &FrontierResult, lexicon: &Lexicon, listener: &Listener<'_>) -> Result<Vec<ItemLoss>> {
    let sub = frontier.restrict(&encoding.need(), lexicon)?;
    let losses = item_losses(encoding, &sub, listener)?;
    let costs = item_costs(encoding, listener)?;
    Ok(encoding
        .items()
        .iter()
        .zip(losses)
        .zip(costs)
        .map(|((item, (_, loss)), c)| ItemLoss {
            item_id: item.concept_id.clone(),
            strategy: item.strategy,
            length: c.length,
            surprisal: c.surprisal,
            loss,
        })
        .collect())
}

pub fn loss_table(losses: &[(Scope, EfficiencyLoss)]) -> Table {
    let mut t = Table::new(&["scope", "epsilon", "raw_epsilon", "argmin_beta"]);
    for (scope, l) in losses {
        t.push(vec![scope.name().into(), num(l.epsilon), num(l.raw_epsilon), num(l.argmin_beta)]);
    }
    t
}

pub fn item_loss_table(items: &[ItemLoss]) -> Table {
    let mut t = Table::new(&["item_id", "strategy", "length", "surprisal", "epsilon", "raw_epsilon", "argmin_beta"]);
    for i in items {
        t.push(vec![
            i.item_id.clone(),
            i.strategy.to_string(),
            num(i.length),
            num(i.surprisal),
            num(i.loss.epsilon),
            num(i.loss.raw_epsilon),
            num(i.loss.argmin_beta),
        ]);
    }
    t
}

/// Baseline runs of one scope next to its attested loss.
#[derive(Clone, Debug, PartialEq)]
pub struct ScopeBaselines {
    pub scope: Scope,
    pub attested: EfficiencyLoss,
    pub runs: Vec<BaselineRun>,
}

pub fn baselines(
    inputs: &Inputs,
    listener: &Listener<'_>,
    frontiers: &[(Scope, Encoding, FrontierResult)],
    config: &AnalysisConfig,
    kinds: &[BaselineKind],
) -> Result<Vec<ScopeBaselines>> {
    let params = config.baseline_params(inputs.antonyms.clone());
    frontiers
        .iter()
        .map(|(scope, enc, f)| {
            let attested = efficiency_loss(enc, f, listener)?;
            let runs = kinds
                .iter()
                .map(|&k| baseline_summary(enc, listener, f, k, &params))
                .collect::<Result<Vec<_>>>()?;
            Ok(ScopeBaselines {
                scope: *scope,
                attested,
                runs,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("baselines"))
}

/// `baselines.tsv`: attested loss and each baseline's mean and interval.
pub fn baseline_table(results: &[ScopeBaselines]) -> Table {
    let mut t = Table::new(&["scope", "kind", "mean_loss", "ci_lo", "ci_hi", "n"]);
    for r in results {
        let e = num(r.attested.epsilon);
        t.push(vec![r.scope.name().into(), "attested".into(), e.clone(), e.clone(), e, "1".into()]);
        for run in &r.runs {
            let s = &run.summary;
            t.push(vec![
                r.scope.name().into(),
                s.kind.name().into(),
                num(s.mean_loss),
                num(s.ci_lo),
                num(s.ci_hi),
                s.n.to_string(),
            ]);
        }
    }
    t
}

/// Taxonomic profiles of the encoding and of its head-replaced compounds.
#[derive(Clone, Debug, PartialEq)]
pub struct TaxonomyReport {
    pub items: Vec<ItemTaxonomy>,
    pub heads: Vec<ItemTaxonomy>,
    pub head_encoding: Encoding,
    pub dropped: usize,
}

pub fn taxonomy_report(inputs: &Inputs) -> Result<TaxonomyReport> {
    let stage = |e: Error| e.in_stage("taxonomy");
    let graph = inputs
        .taxonomy
        .as_ref()
        .ok_or_else(|| Error::config("taxonomy", "not set").in_stage("taxonomy"))?;
    let items = classify_encoding(&inputs.encoding, &inputs.lexicon, &inputs.universe, graph).map_err(stage)?;
    let (head_encoding, dropped) = augment_reuse_with_heads(&inputs.encoding, &inputs.lexicon).map_err(stage)?;
    let heads = classify_encoding(&head_encoding, &inputs.lexicon, &inputs.universe, graph).map_err(stage)?;
    Ok(TaxonomyReport {
        items,
        heads,
        head_encoding,
        dropped,
    })
}

fn taxonomy_bytes(rows: &[ItemTaxonomy]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_item_taxonomy(rows, &mut buf)?;
    Ok(buf)
}

/// One two-group comparison: means, bootstrap intervals, pooled t-test.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub group_a: String,
    pub group_b: String,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub const COMPARISON_HEADER: [&str; 14] = [
    "comparison",
    "group_a",
    "group_b",
    "n_a",
    "n_b",
    "mean_a",
    "mean_b",
    "ci_a_lo",
    "ci_a_hi",
    "ci_b_lo",
    "ci_b_hi",
    "t",
    "df",
    "p",
];

impl Comparison {
    /// A table row; statistics that cannot be computed are `NA`.
    pub fn row(&self, resamples: usize, seed: u64) -> Vec<String> {
        let m = |x: &[f64]| (!x.is_empty()).then(|| mean(x));
        let ci = |x: &[f64]| bootstrap_ci(x, Statistic::Mean, resamples, seed).ok();
        let (ca, cb) = (ci(&self.a), ci(&self.b));
        let test = t_test_pooled(&self.a, &self.b).ok();
        vec![
            self.name.clone(),
            self.group_a.clone(),
            self.group_b.clone(),
            self.a.len().to_string(),
            self.b.len().to_string(),
            opt_num(m(&self.a)),
            opt_num(m(&self.b)),
            opt_num(ca.map(|c| c.0)),
            opt_num(ca.map(|c| c.1)),
            opt_num(cb.map(|c| c.0)),
            opt_num(cb.map(|c| c.1)),
            opt_num(test.map(|t| t.t)),
            test.map(|t| t.df.to_string()).unwrap_or_else(|| "NA".into()),
            opt_num(test.map(|t| t.p_two_sided)),
        ]
    }
}

pub fn comparison_table(comparisons: &[Comparison], resamples: usize, seed: u64) -> Table {
    let mut t = Table::new(&COMPARISON_HEADER);
    for c in comparisons {
        t.push(c.row(resamples, seed));
    }
    t
}

/// Strategy contrasts always; literalness and headedness with a taxonomy.
pub fn comparisons(
    items: &[ItemLoss],
    taxonomy: Option<(&TaxonomyReport, &[ItemLoss])>,
) -> Vec<Comparison> {
    let pick = |strategy: Strategy, f: fn(&ItemLoss) -> f64| -> Vec<f64> {
        items.iter().filter(|i| i.strategy == strategy).map(f).collect()
    };
    let mut out = vec![
        Comparison {
            name: "strategy_loss".into(),
            group_a: "reuse".into(),
            group_b: "combination".into(),
            a: pick(Strategy::Reuse, |i| i.loss.epsilon),
            b: pick(Strategy::Combination, |i| i.loss.epsilon),
        },
        Comparison {
            name: "strategy_length".into(),
            group_a: "reuse".into(),
            group_b: "combination".into(),
            a: pick(Strategy::Reuse, |i| i.length),
            b: pick(Strategy::Combination, |i| i.length),
        },
    ];
    if let Some((report, head_losses)) = taxonomy {
        let loss_of: HashMap<&str, f64> = items.iter().map(|i| (i.item_id.as_str(), i.loss.epsilon)).collect();
        let head_loss: HashMap<&str, f64> = head_losses.iter().map(|i| (i.item_id.as_str(), i.loss.epsilon)).collect();
        let (mut lit, mut non) = (Vec::new(), Vec::new());
        let reuse_rows = report
            .items
            .iter()
            .filter(|r| r.strategy == Strategy::Reuse)
            .map(|r| (r, loss_of[r.item_id.as_str()]))
            .chain(report.heads.iter().map(|r| (r, head_loss[r.item_id.as_str()])));
        for (row, loss) in reuse_rows {
            if row.literal {
                lit.push(loss);
            } else {
                non.push(loss);
            }
        }
        out.push(Comparison {
            name: "literal_loss".into(),
            group_a: "literal".into(),
            group_b: "non-literal".into(),
            a: lit,
            b: non,
        });
        let (mut endo, mut exo) = (Vec::new(), Vec::new());
        for row in &report.items {
            match row.compound_class {
                Some(CompoundClass::Endocentric) => endo.push(loss_of[row.item_id.as_str()]),
                Some(CompoundClass::Exocentric) => exo.push(loss_of[row.item_id.as_str()]),
                None => {}
            }
        }
        out.push(Comparison {
            name: "compound_class_loss".into(),
            group_a: "endocentric".into(),
            group_b: "exocentric".into(),
            a: endo,
            b: exo,
        });
    }
    out
}

fn frontier_plot(frontiers: &[(Scope, Encoding, FrontierResult)], listener: &Listener<'_>, baselines: &[ScopeBaselines]) -> Result<String> {
    let (_, enc, f) = &frontiers[0];
    let mut series = vec![Series {
        label: "frontier".into(),
        points: f.pareto_points.iter().map(|p| (p.avg_length, p.info_loss)).collect(),
        color: "black",
        line: true,
    }];
    let attested = weighted_cost(&enc.clone().with_need(&f.need)?, listener)?;
    series.push(Series {
        label: "attested".into(),
        points: vec![(attested.avg_length, attested.info_loss)],
        color: "crimson",
        line: false,
    });
    if let Some(b) = baselines.iter().find(|b| b.scope == Scope::All) {
        for (run, color) in b.runs.iter().zip(["steelblue", "gray"]) {
            let xs: Vec<f64> = run.replicates.iter().map(|r| r.cost.avg_length).collect();
            let ys: Vec<f64> = run.replicates.iter().map(|r| r.cost.info_loss).collect();
            series.push(Series {
                label: format!("{} (mean)", run.summary.kind),
                points: vec![(mean(&xs), mean(&ys))],
                color,
                line: false,
            });
        }
    }
    Ok(scatter("Length and information loss", "average length", "information loss (bits)", &series))
}

fn loss_plot(items: &[ItemLoss]) -> String {
    let series: Vec<Series> = [(Strategy::Reuse, "darkorange"), (Strategy::Combination, "teal")]
        .into_iter()
        .map(|(s, color)| Series {
            label: s.to_string(),
            points: items
                .iter()
                .filter(|i| i.strategy == s)
                .map(|i| (i.length, i.loss.epsilon))
                .collect(),
            color,
            line: false,
        })
        .collect();
    scatter("Item-level efficiency loss", "length", "efficiency loss (bits)", &series)
}

/// Runs `f` on a pool capped at `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Files written by [`run_pipeline`], in order.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

fn manifest(config: &AnalysisConfig, inputs: &Inputs, outputs: &BTreeMap<String, String>, dropped: usize) -> Result<String> {
    let mut params = serde_json::to_value(config).map_err(|e| Error::InvalidInput(e.to_string()))?;
    if let Some(obj) = params.as_object_mut() {
        for key in ["concepts", "embeddings", "lexicon", "encoding", "taxonomy", "antonyms", "output", "threads"] {
            obj.remove(key);
        }
    }
    let value = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "parameters": params,
        "inputs": inputs.files,
        "outputs": outputs,
        "dropped_head_items": dropped,
    });
    let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_bundle(config: &AnalysisConfig, staging: &Path) -> Result<Vec<String>> {
    let diags = config.validate();
    if let Some(first) = diags.into_iter().next() {
        return Err(Error::InvalidInput(first).in_stage("validate"));
    }
    if config.taxonomy.is_none() {
        return Err(Error::config("taxonomy", "required by `run`").in_stage("validate"));
    }
    let inputs = load_inputs(config)?;
    let listener = Listener::new(&inputs.universe, &inputs.lexicon, config.listener_params()).map_err(|e| e.in_stage("costs"))?;

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| files.push((name, bytes));

    let (costs, cost_items) = cost_tables(&inputs, &listener)?;
    put("costs.tsv".into(), costs.to_tsv().into_bytes());
    put("cost_items.tsv".into(), cost_items.to_tsv().into_bytes());

    let full = frontier(&inputs, &listener, config)?;
    let frontiers = scope_frontiers(&inputs, &full)?;
    put("frontier.tsv".into(), frontier_table(&frontiers).to_tsv().into_bytes());

    let losses = scope_losses(&frontiers, &listener)?;
    let items = encoding_item_losses(&inputs.encoding, &full, &inputs.lexicon, &listener).map_err(|e| e.in_stage("loss"))?;
    put("loss.tsv".into(), loss_table(&losses).to_tsv().into_bytes());
    put("item_loss.tsv".into(), item_loss_table(&items).to_tsv().into_bytes());

    let kinds = [BaselineKind::NearSynonym, BaselineKind::Random];
    let base = baselines(&inputs, &listener, &frontiers, config, &kinds)?;
    put("baselines.tsv".into(), baseline_table(&base).to_tsv().into_bytes());
    if config.dump_replicates {
        let spec = config.baseline_params(AntonymPairs::default()).replicates;
        for (b, (_, enc, _)) in base.iter().zip(&frontiers) {
            for run in &b.runs {
                let mut buf = Vec::new();
                write_replicates(run, enc, &inputs.lexicon, &spec, &mut buf).map_err(|e| e.in_stage("baselines"))?;
                put(format!("replicates_{}_{}.tsv", b.scope.name(), run.summary.kind), buf);
            }
        }
    }

    let tax = taxonomy_report(&inputs)?;
    put("taxonomy.tsv".into(), taxonomy_bytes(&tax.items).map_err(|e| e.in_stage("taxonomy"))?);
    put("taxonomy_heads.tsv".into(), taxonomy_bytes(&tax.heads).map_err(|e| e.in_stage("taxonomy"))?);

    let head_items = if tax.head_encoding.is_empty() {
        Vec::new()
    } else {
        encoding_item_losses(&tax.head_encoding, &full, &inputs.lexicon, &listener).map_err(|e| e.in_stage("compare"))?
    };
    put("item_loss_heads.tsv".into(), item_loss_table(&head_items).to_tsv().into_bytes());
    let comps = comparisons(&items, Some((&tax, &head_items)));
    put(
        "comparisons.tsv".into(),
        comparison_table(&comps, config.bootstrap_resamples, config.seed).to_tsv().into_bytes(),
    );

    if config.plot {
        let svg = frontier_plot(&frontiers, &listener, &base).map_err(|e| e.in_stage("plot"))?;
        put("frontier.svg".into(), svg.into_bytes());
        put("item_loss.svg".into(), loss_plot(&items).into_bytes());
    }

    let hashes: BTreeMap<String, String> = files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect();
    let manifest = manifest(config, &inputs, &hashes, tax.dropped)?;
    files.push(("manifest.json".into(), manifest.into_bytes()));

    for (name, bytes) in &files {
        let p = staging.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e).in_stage("write"))?;
    }
    Ok(files.into_iter().map(|(name, _)| name).collect())
}

/// Runs every stage and writes the bundle into the output directory. Files
/// are staged next to it and moved into place only when all stages succeed.
pub fn run_pipeline(config: &AnalysisConfig) -> Result<RunOutput> {
    let dir = config.output_dir();
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let staging = dir.with_file_name(format!(".{name}.staging"));
    let _ = fs::remove_dir_all(&staging);
    fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e).in_stage("write"))?;

    let result = with_threads(config.threads, || write_bundle(config, &staging)).and_then(|r| r);
    let files = match result {
        Ok(files) => files,
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }
    };
    let publish = || -> Result<()> {
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for f in &files {
            let target = dir.join(f);
            fs::rename(staging.join(f), &target).map_err(|e| Error::io(&target, e))?;
        }
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))
    };
    publish().map_err(|e| {
        let _ = fs::remove_dir_all(&staging);
        e.in_stage("write")
    })?;
    Ok(RunOutput { dir, files })
}
