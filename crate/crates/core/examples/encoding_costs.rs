//! Average length and information loss of an attested encoding.

use lexeff::config::AnalysisConfig;
use lexeff::costs::{item_costs, weighted_cost};
use lexeff::pipeline::load_inputs;
use lexeff::semantics::Listener;

fn main() -> lexeff::Result<()> {
    let config = AnalysisConfig::load(&lexeff::fixture::toy_config())?;
    let inputs = load_inputs(&config)?;
    let listener = Listener::new(&inputs.universe, &inputs.lexicon, config.listener_params())?;

    for item in item_costs(&inputs.encoding, &listener)? {
        println!(
            "{:<16} {:<14} length {:>2}  surprisal {:6.3}  weight {:.3}",
            item.concept_id, item.surface, item.length, item.surprisal, item.weight
        );
    }
    let total = weighted_cost(&inputs.encoding, &listener)?;
    println!("average length {:.3}, information loss {:.3} bits", total.avg_length, total.info_loss);
    Ok(())
}
