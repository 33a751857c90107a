//! `key = value` analysis configuration.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::baselines::{AntonymPairs, BaselineParams, NearSynonymParams, ReplicateSpec};
use crate::error::{Error, Result};
use crate::frontier::{beta_grid, FrontierParams, SearchMode};
use crate::lexicon::{HeadPosition, LengthMode, LexiconSettings, NeedMode, NeedProductionModel};
use crate::semantics::ListenerParams;

/// Every recognized key, in the order [`AnalysisConfig::to_config_string`] writes them.
pub const KEYS: [&str; 25] = [
    "concepts",
    "embeddings",
    "lexicon",
    "encoding",
    "taxonomy",
    "antonyms",
    "gamma",
    "beta_min",
    "beta_max",
    "beta_step",
    "separator",
    "head_position",
    "length_mode",
    "need_mode",
    "smoothing",
    "search_mode",
    "k",
    "respect_word_class",
    "replicates",
    "seed",
    "bootstrap_resamples",
    "output",
    "threads",
    "plot",
    "dump_replicates",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub concepts: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub encoding: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub antonyms: Option<PathBuf>,
    pub gamma: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_step: f64,
    pub separator: char,
    pub head_position: HeadPosition,
    pub length_mode: LengthMode,
    pub need_mode: NeedMode,
    pub smoothing: bool,
    pub search_mode: SearchMode,
    pub k: usize,
    pub respect_word_class: bool,
    pub replicates: usize,
    pub seed: u64,
    pub bootstrap_resamples: usize,
    pub output: PathBuf,
    /// Worker cap; `None` lets the pool decide.
    pub threads: Option<usize>,
    pub plot: bool,
    pub dump_replicates: bool,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            concepts: None,
            embeddings: None,
            lexicon: None,
            encoding: None,
            taxonomy: None,
            antonyms: None,
            gamma: 10.0,
            beta_min: 0.0,
            beta_max: 10.0,
            beta_step: 0.01,
            separator: ' ',
            head_position: HeadPosition::Final,
            length_mode: LengthMode::Orthographic,
            need_mode: NeedMode::Corpus,
            smoothing: true,
            search_mode: SearchMode::Greedy,
            k: 5,
            respect_word_class: true,
            replicates: 100_000,
            seed: 0,
            bootstrap_resamples: 1000,
            output: PathBuf::from("out"),
            threads: None,
            plot: false,
            dump_replicates: false,
            base_dir: PathBuf::from("."),
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("expected a boolean, got `{value}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::config(key, format!("`{value}`: {e}")))
}

fn with_key<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { message, .. } => Error::config(key, message),
        other => Error::config(key, other.to_string()),
    })
}

fn separator_name(c: char) -> String {
    match c {
        ' ' => "space".into(),
        '\t' => "tab".into(),
        c => c.to_string(),
    }
}

impl AnalysisConfig {
    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, if base.as_os_str().is_empty() { PathBuf::from(".") } else { base })
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self> {
        let mut config = AnalysisConfig {
            base_dir,
            ..Default::default()
        };
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("<config>", n + 1, format!("expected key = value, got `{line}`")))?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let path = || Some(PathBuf::from(value));
        match key {
            "concepts" => self.concepts = path(),
            "embeddings" => self.embeddings = path(),
            "lexicon" => self.lexicon = path(),
            "encoding" => self.encoding = path(),
            "taxonomy" => self.taxonomy = path(),
            "antonyms" => self.antonyms = path(),
            "gamma" => self.gamma = parse_num(key, value)?,
            "beta_min" => self.beta_min = parse_num(key, value)?,
            "beta_max" => self.beta_max = parse_num(key, value)?,
            "beta_step" => self.beta_step = parse_num(key, value)?,
            "separator" => {
                self.separator = match value {
                    "space" => ' ',
                    "tab" => '\t',
                    v if v.chars().count() == 1 => v.chars().next().expect("one char"),
                    v => return Err(Error::config(key, format!("expected one character, `space` or `tab`, got `{v}`"))),
                }
            }
            "head_position" => self.head_position = with_key(key, value.parse())?,
            "length_mode" => self.length_mode = with_key(key, value.parse())?,
            "need_mode" => self.need_mode = with_key(key, value.parse())?,
            "smoothing" => self.smoothing = parse_bool(key, value)?,
            "search_mode" => self.search_mode = with_key(key, value.parse())?,
            "k" => self.k = parse_num(key, value)?,
            "respect_word_class" => self.respect_word_class = parse_bool(key, value)?,
            "replicates" => self.replicates = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "bootstrap_resamples" => self.bootstrap_resamples = parse_num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "threads" => {
                self.threads = match value {
                    "auto" | "" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "plot" => self.plot = parse_bool(key, value)?,
            "dump_replicates" => self.dump_replicates = parse_bool(key, value)?,
            other => return Err(Error::UnknownConfigKey(other.to_string())),
        }
        Ok(())
    }

    /// `path` made absolute against the config directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// A required input path, resolved.
    pub fn input(&self, key: &'static str) -> Result<PathBuf> {
        let p = match key {
            "concepts" => &self.concepts,
            "embeddings" => &self.embeddings,
            "lexicon" => &self.lexicon,
            "encoding" => &self.encoding,
            "taxonomy" => &self.taxonomy,
            "antonyms" => &self.antonyms,
            _ => return Err(Error::UnknownConfigKey(key.to_string())),
        };
        p.as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::config(key, "not set"))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    /// Range checks plus existence of every configured input file.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for key in ["concepts", "embeddings", "lexicon", "encoding"] {
            if let Err(e) = self.input(key) {
                out.push(e.to_string());
            }
        }
        for key in ["concepts", "embeddings", "lexicon", "encoding", "taxonomy", "antonyms"] {
            if let Ok(p) = self.input(key) {
                if !p.is_file() {
                    out.push(format!("{key}: file `{}` does not exist", p.display()));
                }
            }
        }
        if let Err(e) = self.listener_params().validate() {
            out.push(e.to_string());
        }
        if let Err(e) = self.frontier_params().validate() {
            out.push(e.to_string());
        }
        if !(self.beta_step > 0.0) || self.beta_max < self.beta_min {
            out.push("beta grid: need beta_step > 0 and beta_max >= beta_min".into());
        }
        if self.k == 0 {
            out.push("k: must be at least 1".into());
        }
        if self.replicates == 0 {
            out.push("replicates: must be at least 1".into());
        }
        if self.bootstrap_resamples == 0 {
            out.push("bootstrap_resamples: must be at least 1".into());
        }
        if self.threads == Some(0) {
            out.push("threads: must be at least 1".into());
        }
        out
    }

    pub fn lexicon_settings(&self) -> LexiconSettings {
        LexiconSettings {
            separator: self.separator,
            head_position: self.head_position,
            length_mode: self.length_mode,
        }
    }

    pub fn listener_params(&self) -> ListenerParams {
        ListenerParams {
            gamma: self.gamma,
            sense_smoothing: self.smoothing,
        }
    }

    pub fn need_model(&self) -> NeedProductionModel {
        NeedProductionModel {
            mode: self.need_mode,
            smoothing: self.smoothing,
        }
    }

    pub fn frontier_params(&self) -> FrontierParams {
        FrontierParams {
            beta_grid: beta_grid(self.beta_min, self.beta_max, self.beta_step),
            search_mode: self.search_mode,
        }
    }

    pub fn baseline_params(&self, antonyms: AntonymPairs) -> BaselineParams {
        BaselineParams {
            near_synonym: NearSynonymParams {
                k: self.k,
                antonyms,
                respect_word_class: self.respect_word_class,
            },
            replicates: ReplicateSpec {
                n_replicates: self.replicates,
                seed: self.seed,
            },
            bootstrap_resamples: self.bootstrap_resamples,
        }
    }

    /// The configuration as `key = value` lines that [`AnalysisConfig::parse`] reads back.
    pub fn to_config_string(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let mut out = String::new();
        for key in KEYS {
            let value = match key {
                "concepts" => path(&self.concepts),
                "embeddings" => path(&self.embeddings),
                "lexicon" => path(&self.lexicon),
                "encoding" => path(&self.encoding),
                "taxonomy" => path(&self.taxonomy),
                "antonyms" => path(&self.antonyms),
                "gamma" => Some(self.gamma.to_string()),
                "beta_min" => Some(self.beta_min.to_string()),
                "beta_max" => Some(self.beta_max.to_string()),
                "beta_step" => Some(self.beta_step.to_string()),
                "separator" => Some(separator_name(self.separator)),
                "head_position" => Some(self.head_position.to_string()),
                "length_mode" => Some(self.length_mode.to_string()),
                "need_mode" => Some(self.need_mode.to_string()),
                "smoothing" => Some(self.smoothing.to_string()),
                "search_mode" => Some(self.search_mode.to_string()),
                "k" => Some(self.k.to_string()),
                "respect_word_class" => Some(self.respect_word_class.to_string()),
                "replicates" => Some(self.replicates.to_string()),
                "seed" => Some(self.seed.to_string()),
                "bootstrap_resamples" => Some(self.bootstrap_resamples.to_string()),
                "output" => Some(self.output.display().to_string()),
                "threads" => Some(self.threads.map_or("auto".into(), |t| t.to_string())),
                "plot" => Some(self.plot.to_string()),
                "dump_replicates" => Some(self.dump_replicates.to_string()),
                _ => unreachable!("every key is listed"),
            };
            if let Some(v) = value {
                out.push_str(&format!("{key} = {v}\n"));
            }
        }
        out
    }
}
