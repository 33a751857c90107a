//! Literal and non-literal reuse, endocentric and exocentric compounds.

use lexeff::config::AnalysisConfig;
use lexeff::pipeline::load_inputs;
use lexeff::taxonomy::{classify_encoding, leacock_chodorow, wu_palmer};

fn main() -> lexeff::Result<()> {
    let config = AnalysisConfig::load(&lexeff::fixture::toy_config())?;
    let inputs = load_inputs(&config)?;
    let graph = inputs.taxonomy.as_ref().expect("toy fixture has a taxonomy");

    for t in classify_encoding(&inputs.encoding, &inputs.lexicon, &inputs.universe, graph)? {
        let class = t.compound_class.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:<16} {}  literal {:<5}  class {:<11}  wup {:.3}",
            t.item_id,
            t.strategy,
            t.literal,
            class,
            t.wup_to_nearest_sense.unwrap_or(f64::NAN)
        );
    }
    println!(
        "card.n ~ bag.n: wu-palmer {:.3}, leacock-chodorow {:.3}",
        wu_palmer("card.n", "bag.n", graph)?,
        leacock_chodorow("card.n", "bag.n", graph)?
    );
    Ok(())
}
