//! Listener distributions for existing forms and a novel compound.

use lexeff::lexicon::{load_lexicon, load_universe, Form, LexiconSettings};
use lexeff::semantics::{Listener, ListenerParams};

fn main() -> lexeff::Result<()> {
    let dir = lexeff::fixture::toy_dir();
    let universe = load_universe(&dir.join("concepts.jsonl"), &dir.join("embeddings.jsonl"))?;
    let lexicon = load_lexicon(&dir.join("lexicon.tsv"), &universe, LexiconSettings::default())?;
    let listener = Listener::new(&universe, &lexicon, ListenerParams::default())?;

    let tea = Form::atomic("tea");
    let bag = Form::atomic("bag");
    let tea_bag = Form::combine(&tea, &bag, ' ', Default::default());
    for form in [&tea, &bag, &tea_bag] {
        let p = listener.distribution(form)?;
        let mut ranked: Vec<(usize, f64)> = p.into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        println!("{form}:");
        for (c, prob) in ranked.iter().take(3) {
            println!("  {:<16} {prob:.4}", universe.concept(*c).id);
        }
        println!("  surprisal of tea_bag: {:.3} bits", listener.surprisal(form, "tea_bag")?);
    }
    Ok(())
}
