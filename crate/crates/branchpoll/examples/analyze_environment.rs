//! Classify a random environment: top Lyapunov exponent, the moment
//! function `s(x)`, the tail index kappa, and the Kesten-condition report.
//!
//!     cargo run --release --example analyze_environment

use branchpoll::analysis::{classify, kesten_check, KappaOutcome, McParams};
use branchpoll::env::{
    AmountLaw, CountLaw, EnvironmentDistribution, EnvironmentSample, ImmigrationLaw, OffspringLaw,
};
use branchpoll::StreamKey;

fn main() {
    // Scalar environment: per-parent Poisson offspring with mean a, where a
    // switches between 1/2 and 2 with probabilities 0.6 / 0.4; one unit of
    // final product per particle; Bernoulli(1/2) immigration.
    let atom = |a: f64| {
        EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Poisson(a)],
                product: AmountLaw::Constant(1.0),
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Bernoulli(0.5)],
                product: AmountLaw::Zero,
            },
        )
    };
    let env = EnvironmentDistribution::new(vec![(0.6, atom(0.5)), (0.4, atom(2.0))]).unwrap();

    let mc = McParams { tol: 1e-6, ..McParams::default() };
    let key = StreamKey::new(1);
    let report = classify(&env, &mc, key);

    println!(
        "alpha = {:.6} (95% CI {:.6} .. {:.6})",
        report.alpha.alpha, report.alpha.ci.0, report.alpha.ci.1
    );
    println!("classification: {}", report.classification);
    match &report.kappa {
        KappaOutcome::Finite { kappa, ci } => {
            println!("kappa = {kappa:.6} (bracket {:.6} .. {:.6})", ci.0, ci.1)
        }
        other => println!("kappa: {other:?}"),
    }

    println!("\ns(x) on a grid (closed form for scalar environments):");
    for p in report.s_curve.iter().step_by(2) {
        println!("  s({:>4.1}) = {:.4}", p.x, p.s_best);
    }

    let kappa0 = report.kappa.value().unwrap_or(1.0);
    println!("\nKesten condition report at kappa0 = {kappa0:.4}:");
    for entry in kesten_check(&env, kappa0, 100_000, key.child(9)).entries {
        let status = match entry.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "heuristic",
        };
        println!("  [{status}] {}\n      {}", entry.name, entry.detail);
    }
}
