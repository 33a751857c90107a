//! Two-group comparison, bootstrap interval and rank correlation.

use lexeff::stats::{bootstrap_ci, correlation, mean, t_test_pooled, CorrelationKind, Statistic};

fn main() -> lexeff::Result<()> {
    let literal = [0.1, 0.0, 0.4, 0.2, 0.3, 0.0, 0.5];
    let figurative = [0.9, 1.4, 0.6, 2.1, 1.1, 0.8];

    let t = t_test_pooled(&literal, &figurative)?;
    println!("t({}) = {:.3}, p = {:.4}", t.df, t.t, t.p_two_sided);
    for (name, x) in [("literal", &literal[..]), ("figurative", &figurative[..])] {
        let (lo, hi) = bootstrap_ci(x, Statistic::Mean, 1000, 0)?;
        println!("{name:<10} mean {:.3}  95% CI [{lo:.3}, {hi:.3}]", mean(x));
    }

    let distance = [0.2, 0.5, 0.4, 0.9, 0.7];
    let loss = [0.1, 0.3, 0.5, 1.2, 0.8];
    println!("spearman {:.3}", correlation(&distance, &loss, CorrelationKind::Spearman)?);
    println!("pearson  {:.3}", correlation(&distance, &loss, CorrelationKind::Pearson)?);
    Ok(())
}
