//! Optimal encodings across the tradeoff grid and their Pareto set.

use lexeff::config::AnalysisConfig;
use lexeff::frontier::{estimate_frontier, FrontierParams, SearchMode};
use lexeff::pipeline::load_inputs;
use lexeff::semantics::Listener;

fn main() -> lexeff::Result<()> {
    let config = AnalysisConfig::load(&lexeff::fixture::toy_config())?;
    let inputs = load_inputs(&config)?;
    let listener = Listener::new(&inputs.universe, &inputs.lexicon, config.listener_params())?;
    let params = FrontierParams {
        search_mode: SearchMode::Exhaustive,
        ..Default::default()
    };
    let frontier = estimate_frontier(&inputs.encoding.need(), &listener, &params)?;

    for p in frontier.points.iter().step_by(100) {
        let labels: Vec<&str> = p.encoding.items().iter().map(|i| i.form.surface.as_str()).collect();
        println!(
            "beta {:5.2}: length {:6.3}, loss {:6.3}  [{}]",
            p.beta,
            p.cost.avg_length,
            p.cost.info_loss,
            labels.join(", ")
        );
    }
    println!("{} Pareto-optimal points:", frontier.pareto_points.len());
    for c in &frontier.pareto_points {
        println!("  ({:.3}, {:.3})", c.avg_length, c.info_loss);
    }
    Ok(())
}
