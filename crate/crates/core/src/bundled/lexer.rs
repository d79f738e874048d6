//! A small lexer over strings, commas and numbers, with a build variant that
//! lets an unterminated string swallow the line terminator.

use std::sync::Arc;

use crate::condition::Condition;
use crate::execution::{OutputParser, Sut, SutAdapter};
use crate::model::{build_mg, Edit, MetamorphicGroup, MetamorphicRelation, OutputRelation, TestSuite};
use crate::value::{payload, Payload, TestInput, Value};

/// Extracts token texts from the lexer output `kind[,text].` records.
pub const TOKEN_PATTERN: &str = r"(?s)\w+(?:,(.*?))?\.\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LexerBuild {
    Fixed,
    Faulty,
}

impl LexerBuild {
    pub fn id(self) -> &'static str {
        match self {
            LexerBuild::Fixed => "lexer",
            LexerBuild::Faulty => "lexer-quote-fault",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: &'static str,
    pub text: Option<String>,
}

fn token(kind: &'static str, text: impl Into<String>) -> Token {
    Token {
        kind,
        text: Some(text.into()),
    }
}

pub fn tokenize(input: &str, build: LexerBuild) -> Vec<Token> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            ',' => {
                out.push(Token { kind: "comma", text: None });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                out.push(token("numeric", chars[start..i].iter().collect::<String>()));
            }
            '"' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '"' {
                    i += 1;
                    out.push(token("string", chars[start..i].iter().collect::<String>()));
                } else {
                    if build == LexerBuild::Faulty && i < chars.len() {
                        // The terminator check is missing, so the newline
                        // ends up inside the token.
                        i += 1;
                    }
                    out.push(token("error", chars[start..i].iter().collect::<String>()));
                }
            }
            _ => {
                out.push(token("error", c));
                i += 1;
            }
        }
    }
    out
}

/// Renders tokens as `kind[,text].` records, one per line.
pub fn render(tokens: &[Token]) -> String {
    let mut s = String::new();
    for t in tokens {
        s.push_str(t.kind);
        if let Some(text) = &t.text {
            s.push(',');
            s.push_str(text);
        }
        s.push_str(".\n");
    }
    s
}

pub fn lexer_main(stdin: &str, build: LexerBuild) -> String {
    render(&tokenize(stdin, build))
}

pub struct LexerSut(pub LexerBuild);

impl Sut for LexerSut {
    fn execute(&self, p: &Payload) -> Result<String, String> {
        let text = p.get("text").and_then(Value::as_str).ok_or("payload needs a text `text`")?;
        Ok(lexer_main(&format!("{text}\n"), self.0))
    }
}

pub fn token_parser() -> OutputParser {
    OutputParser::Tokens {
        pattern: TOKEN_PATTERN.into(),
        group: 1,
    }
}

pub fn lexer_adapter(build: LexerBuild) -> SutAdapter {
    SutAdapter::in_process(build.id(), Arc::new(LexerSut(build))).with_parser(token_parser())
}

/// Removing the second quotation mark and everything after it yields a
/// follow-up whose token texts form a substring of the source's.
pub fn truncation_mr() -> MetamorphicRelation {
    MetamorphicRelation::template(
        "MR-trunc",
        Condition::Matches {
            field: "text".into(),
            pattern: r#"[^"]*"[^"]*".*"#.into(),
        },
        vec![Edit::TruncateAt {
            field: "text".into(),
            token: "\"".into(),
            occurrence: 2,
            keep_token: false,
        }],
        OutputRelation::Substring,
    )
    .with_class("substring")
}

pub fn fault_input() -> TestInput {
    TestInput::new("s1", payload([("text", r#""abcd",123"#)]))
}

pub fn fault_group() -> MetamorphicGroup {
    build_mg("g1", &truncation_mr(), &[&fault_input()], None).expect("the fault input is eligible")
}

pub fn seeded_fault_scenario() -> TestSuite {
    TestSuite {
        inputs: vec![fault_input()],
        mrs: vec![truncation_mr()],
        mgs: vec![fault_group()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::execution::{run_suite, RunOptions, VerdictStatus};

    #[test]
    fn fixed_lexer_tokens() {
        assert_eq!(
            lexer_main("\"abcd\",123\n", LexerBuild::Fixed),
            "string,\"abcd\".\ncomma.\nnumeric,123.\n"
        );
        assert_eq!(lexer_main("\"abcd\n", LexerBuild::Fixed), "error,\"abcd.\n");
        assert_eq!(lexer_main("\"abcd\n", LexerBuild::Faulty), "error,\"abcd\n.\n");
        assert_eq!(lexer_main("x", LexerBuild::Fixed), "error,x.\n");
    }

    #[test]
    fn builds_agree_on_terminated_strings() {
        let s = "\"ab\" , 12,\"c d\"\n";
        assert_eq!(lexer_main(s, LexerBuild::Fixed), lexer_main(s, LexerBuild::Faulty));
    }

    #[test]
    fn fault_scenario() {
        let suite = seeded_fault_scenario();
        assert_eq!(suite.mgs[0].followups[0]["text"].as_str(), Some("\"abcd"));
        let fixed = run_suite(&suite, &lexer_adapter(LexerBuild::Fixed), RunOptions::default());
        assert_eq!(fixed[0].status, VerdictStatus::Satisfied);
        let faulty = run_suite(&suite, &lexer_adapter(LexerBuild::Faulty), RunOptions::default());
        assert_eq!(faulty[0].status, VerdictStatus::Violated);
        assert_eq!(faulty[0].followup_outputs, vec![vec!["\"abcd\n".to_owned()]]);
    }
}
