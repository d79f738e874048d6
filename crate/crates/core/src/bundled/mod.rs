//! Reference systems, relations and golden data shipped with the tool.

pub mod lexer;
pub mod trig;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adequacy::Rational;
use crate::coverage::{build_coverage_map, parse_coverage_matrix, CategoryChoiceSpec, CoverageKind, CoverageMap};
use crate::execution::{OutputParser, Sut};
use crate::model::{AssociationRelation, MetamorphicRelation};
use crate::value::TestInput;

pub use lexer::{seeded_fault_scenario, LexerBuild};
pub use trig::{worked_example_suite, TrigVariant};

/// Statement coverage of t1..t4 over s1..s8.
pub const WORKED_EXAMPLE_MATRIX: &str = include_str!("../../projects/worked-example/statement.csv");
pub const WORKED_EXAMPLE_SUITE: &str = include_str!("../../projects/worked-example/suite.toml");
pub const TREND_CATEGORIES: &str = include_str!("../../projects/trig-trend/categories.toml");
pub const TREND_POOLS: &str = include_str!("../../projects/trig-trend/pools.toml");
pub const PHONE_CATEGORIES: &str = include_str!("../../projects/phone/categories.toml");

/// Per-requirement K values and the degree as printed in the published
/// worked example.
pub const PUBLISHED_KAPPA: [(u64, u64); 8] = [(1, 3), (2, 3), (2, 3), (1, 3), (2, 3), (2, 3), (1, 3), (0, 1)];
pub const PUBLISHED_DEGREE: (u64, u64) = (11, 24);

#[derive(Debug, Clone)]
pub struct GoldenExample {
    pub coverage: CoverageMap,
    pub coop: AssociationRelation,
    pub k: u32,
    /// The degree the definitions give on this data.
    pub expected_degree: Rational,
    pub published_degree: Rational,
    pub published_kappa: Vec<Rational>,
}

pub fn golden_worked_example() -> GoldenExample {
    let coverage =
        parse_coverage_matrix(WORKED_EXAMPLE_MATRIX, CoverageKind::Statement, None).expect("bundled matrix parses");
    GoldenExample {
        coverage,
        coop: worked_example_suite().association(),
        k: 3,
        expected_degree: Rational::new(1, 2),
        published_degree: Rational::new(PUBLISHED_DEGREE.0, PUBLISHED_DEGREE.1),
        published_kappa: PUBLISHED_KAPPA.iter().map(|&(n, d)| Rational::new(n, d)).collect(),
    }
}

/// Built-in SUT by name: `trig`, `trig:<mutant>`, `lexer`, `lexer:faulty`.
pub fn builtin_sut(name: &str) -> Option<(Arc<dyn Sut>, OutputParser)> {
    let (base, variant) = name.split_once(':').unwrap_or((name, ""));
    match base {
        "trig" => {
            let v = if variant.is_empty() {
                TrigVariant::Correct
            } else {
                TrigVariant::from_id(variant).filter(|v| *v != TrigVariant::Correct)?
            };
            Some((Arc::new(trig::TrigSut(v)), OutputParser::Lines))
        }
        "lexer" => {
            let build = match variant {
                "" => LexerBuild::Fixed,
                "faulty" => LexerBuild::Faulty,
                _ => return None,
            };
            Some((Arc::new(lexer::LexerSut(build)), lexer::token_parser()))
        }
        _ => None,
    }
}

/// Pool, relations and IO-CTF coverage of the trend experiment.
#[derive(Debug, Clone)]
pub struct TrendFixture {
    pub pool: Vec<TestInput>,
    pub mrs: Vec<MetamorphicRelation>,
    pub spec: CategoryChoiceSpec,
    pub coverage: CoverageMap,
}

pub fn trend_fixture() -> TrendFixture {
    let spec: CategoryChoiceSpec = toml::from_str(TREND_CATEGORIES).expect("bundled spec parses");
    let (pool, mrs) = crate::suite_file::ingest_pools(TREND_POOLS, &Default::default()).expect("bundled pools parse");
    let coverage = build_coverage_map(&spec, CoverageKind::IoCtf, &pool).expect("bundled pool classifies");
    TrendFixture {
        pool,
        mrs,
        spec,
        coverage,
    }
}

pub const TREND_POOL_SEED: u64 = 20;
const QUADRANTS: [&str; 4] = ["q1", "q2", "q3", "q4"];
const PERIODS: [&str; 3] = ["base", "beyond", "negative"];

/// Three integer angles per (function, quadrant, period) frame.
pub fn generate_trend_pool(seed: u64) -> Vec<TestInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = Vec::new();
    for flag in ["sine", "cosine"] {
        for (q, qname) in QUADRANTS.iter().enumerate() {
            for period in PERIODS {
                for n in 1..=3 {
                    let within = q as i64 * 90 + rng.random_range(0..90);
                    let turns = rng.random_range(1..=2);
                    let angle = match period {
                        "base" => within,
                        "beyond" => within + 360 * turns,
                        _ => within - 360 * turns,
                    };
                    pool.push(trig::angle_input(&format!("{flag}-{qname}-{period}-{n}"), angle, flag));
                }
            }
        }
    }
    pool
}
