use mtadq::bundled::lexer::{fault_group, lexer_adapter, seeded_fault_scenario, truncation_mr, LexerBuild};
use mtadq::execution::{run_mg, run_suite, RunOptions, VerdictStatus};
use mtadq::model::{build_mg, is_eligible};
use mtadq::value::{payload, TestInput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

fn random_source(rng: &mut ChaCha8Rng) -> String {
    let mut parts = Vec::new();
    let n = rng.random_range(2..=6);
    for _ in 0..n {
        let s = match rng.random_range(0..3) {
            0 => {
                let len = rng.random_range(0..5);
                let body: String = (0..len)
                    .map(|_| *b"ab cxyz,9".get(rng.random_range(0..9)).unwrap() as char)
                    .collect();
                format!("\"{body}\"")
            }
            1 => rng.random_range(0..10_000).to_string(),
            _ => String::new(),
        };
        parts.push(s);
    }
    // At least one string so the relation applies.
    if !parts.iter().any(|p| p.starts_with('"')) {
        parts[0] = "\"q\"".into();
    }
    parts.join(",")
}

/// Token texts as a separate scanner sees them; commas and blanks carry no
/// text.
fn expected_texts(line: &str, faulty: bool) -> Vec<String> {
    let pat = if faulty {
        r#""[^"\n]*"|"[^"\n]*\n?|[0-9]+|,|[ \t\r\n]|."#
    } else {
        r#""[^"\n]*"|"[^"\n]*|[0-9]+|,|[ \t\r\n]|."#
    };
    Regex::new(pat)
        .unwrap()
        .find_iter(line)
        .map(|m| m.as_str())
        .filter(|t| *t != "," && !matches!(*t, " " | "\t" | "\r" | "\n"))
        .map(str::to_owned)
        .collect()
}

#[test]
fn random_sources_against_a_scanner_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mr = truncation_mr();
    let mut violations = 0;
    for i in 0..50 {
        let text = random_source(&mut rng);
        let t = TestInput::new(format!("s{i}"), payload([("text", text.as_str())]));
        assert!(is_eligible(&mr, &t), "{text}");
        let mg = build_mg("g", &mr, &[&t], None).unwrap();
        let follow = mg.followups[0]["text"].as_str().unwrap().to_owned();
        let unterminated = follow.matches('"').count() % 2 == 1;
        for build in [LexerBuild::Fixed, LexerBuild::Faulty] {
            let faulty = build == LexerBuild::Faulty;
            let src = expected_texts(&format!("{text}\n"), faulty).concat();
            let fol = expected_texts(&format!("{follow}\n"), faulty).concat();
            let oracle_violated = !src.contains(&fol);
            let v = run_mg(&mg, &mr, &[&t], &lexer_adapter(build));
            assert_eq!(v.is_violated(), oracle_violated, "{build:?} on {text:?}: {}", v.detail);
            if faulty {
                assert_eq!(v.is_violated(), unterminated, "{text:?}");
                violations += usize::from(v.is_violated());
            } else {
                assert_eq!(v.status, VerdictStatus::Satisfied, "{text:?}");
            }
        }
    }
    assert_eq!(violations, 50);
}

#[test]
fn fault_scenario_verdicts() {
    let suite = seeded_fault_scenario();
    assert_eq!(suite.mgs, vec![fault_group()]);
    let fixed = run_suite(&suite, &lexer_adapter(LexerBuild::Fixed), RunOptions::default());
    let faulty = run_suite(&suite, &lexer_adapter(LexerBuild::Faulty), RunOptions::default());
    assert_eq!(fixed[0].status, VerdictStatus::Satisfied);
    assert_eq!(faulty[0].status, VerdictStatus::Violated);
    assert_eq!(fixed[0].source_outputs, vec![vec!["\"abcd\"".to_owned(), "123".to_owned()]]);
}
