//! Generates a synthetic lexicon, writes it to disk and runs every stage.

use lexeff::config::AnalysisConfig;
use lexeff::fixture::{Synthetic, SyntheticParams};
use lexeff::pipeline::run_pipeline;

fn main() -> lexeff::Result<()> {
    let dir = std::env::temp_dir().join("lexeff-synthetic");
    Synthetic::generate(&SyntheticParams::default())?.write(&dir)?;

    let text = "\
concepts = concepts.jsonl
embeddings = embeddings.jsonl
lexicon = lexicon.tsv
encoding = encoding.tsv
taxonomy = taxonomy.tsv
replicates = 2000
plot = true
output = out
";
    let config = AnalysisConfig::parse(text, dir.clone())?;
    let run = run_pipeline(&config)?;
    for f in &run.files {
        println!("{}", run.dir.join(f).display());
    }
    print!("{}", std::fs::read_to_string(run.dir.join("baselines.tsv")).map_err(|e| lexeff::Error::io(&run.dir, e))?);
    Ok(())
}
