//! Distance of the attested encoding, and of each item, from the frontier.

use lexeff::config::AnalysisConfig;
use lexeff::frontier::{efficiency_loss, estimate_frontier, item_losses};
use lexeff::pipeline::load_inputs;
use lexeff::semantics::Listener;

fn main() -> lexeff::Result<()> {
    let config = AnalysisConfig::load(&lexeff::fixture::toy_config())?;
    let inputs = load_inputs(&config)?;
    let listener = Listener::new(&inputs.universe, &inputs.lexicon, config.listener_params())?;
    let frontier = estimate_frontier(&inputs.encoding.need(), &listener, &config.frontier_params())?;

    let loss = efficiency_loss(&inputs.encoding, &frontier, &listener)?;
    println!("encoding: epsilon {:.4} at beta {}", loss.epsilon, loss.argmin_beta);
    for (id, l) in item_losses(&inputs.encoding, &frontier, &listener)? {
        println!("  {id:<16} {:.4}", l.epsilon);
    }
    Ok(())
}
