//! Attested loss against near-synonym and random relabelings.

use lexeff::baselines::{baseline_summary, BaselineKind};
use lexeff::config::AnalysisConfig;
use lexeff::frontier::{efficiency_loss, estimate_frontier};
use lexeff::pipeline::load_inputs;
use lexeff::semantics::Listener;

fn main() -> lexeff::Result<()> {
    let mut config = AnalysisConfig::load(&lexeff::fixture::toy_config())?;
    config.replicates = 2000;
    let inputs = load_inputs(&config)?;
    let listener = Listener::new(&inputs.universe, &inputs.lexicon, config.listener_params())?;
    let frontier = estimate_frontier(&inputs.encoding.need(), &listener, &config.frontier_params())?;
    let params = config.baseline_params(inputs.antonyms.clone());

    let attested = efficiency_loss(&inputs.encoding, &frontier, &listener)?;
    println!("attested      {:.3}", attested.epsilon);
    for kind in [BaselineKind::NearSynonym, BaselineKind::Random] {
        let run = baseline_summary(&inputs.encoding, &listener, &frontier, kind, &params)?;
        let s = run.summary;
        println!("{:<13} {:.3}  95% CI [{:.3}, {:.3}]  n = {}", kind.name(), s.mean_loss, s.ci_lo, s.ci_hi, s.n);
    }
    Ok(())
}
