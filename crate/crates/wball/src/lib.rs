//! Worst-case expectation bounds over transport-metric balls around discrete
//! reference measures.

pub mod ball;
pub mod error;
pub mod expr;
pub mod finiteness;
pub mod instance;
pub mod measure;
pub mod oracle;
pub mod problem;
pub mod report;
pub mod solver;
pub mod space;
pub mod transport;

pub use error::{Error, Result};
pub use finiteness::{
    build_divergence_sequence, certify_growth, DivergenceWitness, GrowthCertificate,
    GrowthVerdict,
};
pub use expr::ObjectiveFn;
pub use instance::{ProblemInstance, SearchBox};
pub use measure::DiscreteMeasure;
pub use problem::{parse_inline_measure, MeasureFile, ProblemFile, SolverSection};
pub use report::{Outputs, Report, REPORT_VERSION};
pub use oracle::{check_sparsity, marginal_of, solve_grid_lp, GridLpSolution, GridPlan, GridSpec};
pub use solver::{
    certify, dual_bound, objective_of, solve_primal, Certification, SolveReport,
    StructuralCandidate,
};
pub use space::{MetricKind, MetricSpec, Point};
pub use transport::{solve_transport, wasserstein, TransportPlan};

/// Guide chapters double as doc-tests: every fenced Rust block in the book
/// compiles and runs with the test suite, so the prose cannot drift from
/// the API it documents.
#[cfg(doctest)]
mod guide {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(ground_space, "../../../book/src/ground-space.md");
    chapter!(
        measures_and_distance,
        "../../../book/src/measures-and-distance.md"
    );
    chapter!(the_ball, "../../../book/src/the-ball.md");
    chapter!(finiteness, "../../../book/src/finiteness.md");
    chapter!(solving, "../../../book/src/solving.md");
    chapter!(grid_oracle, "../../../book/src/grid-oracle.md");
    chapter!(
        expression_language,
        "../../../book/src/expression-language.md"
    );
    chapter!(cli, "../../../book/src/cli.md");
}

/// splitmix64 step used to derive independent per-task RNG streams, so the
/// sampling schedule of one task never shifts another's draws.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
