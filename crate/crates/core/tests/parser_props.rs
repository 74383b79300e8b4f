mod common;

use alias_census::parser::{parse_alias_statement, render_commands, tokenize_value, ParseError};
use common::gen::{shellish, statement, Outer};
use common::oracle;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn generated_statements_decompose_as_built(s in statement()) {
        common::check_statement(&s).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn parsing_is_idempotent(s in statement()) {
        let first = parse_alias_statement(&s.text).unwrap();
        let again = parse_alias_statement(&s.text).unwrap();
        prop_assert_eq!(&first, &again);
        let commands = &first[0].commands;
        let reparsed = tokenize_value(&render_commands(commands)).unwrap();
        prop_assert_eq!(&reparsed, commands);
    }

    #[test]
    fn sudo_with_arguments_is_never_a_command_name(s in statement()) {
        for def in parse_alias_statement(&s.text).unwrap() {
            for c in &def.commands {
                prop_assert!(c.name != "sudo" || c.arguments.is_empty(), "{:?}", c);
            }
        }
    }

    #[test]
    fn quoted_arguments_are_never_split(s in statement()) {
        let def = &parse_alias_statement(&s.text).unwrap()[0];
        for (got, want) in def.commands.iter().zip(&s.commands) {
            for (a, b) in got.arguments.iter().zip(&want.args) {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn arbitrary_values_agree_with_the_oracle(v in shellish()) {
        let result = tokenize_value(&v);
        match oracle::pieces(&v) {
            None => prop_assert!(matches!(result, Err(ParseError::UnbalancedQuote(_))), "{:?} -> {:?}", v, result),
            Some(_) if oracle::has_empty_command(&v).unwrap() && oracle::normalize(&v).unwrap() != "" => {
                prop_assert!(matches!(result, Err(ParseError::EmptyCommand(_))), "{:?} -> {:?}", v, result)
            }
            Some(_) => {
                let commands = result.map_err(|e| TestCaseError::fail(format!("{v:?}: {e}")))?;
                let (seps, trailing) = oracle::separator_count(&v).unwrap();
                let expected = if oracle::normalize(&v).unwrap().is_empty() { 0 } else { seps + 1 - usize::from(trailing) };
                prop_assert_eq!(commands.len(), expected);
                prop_assert_eq!(render_commands(&commands), oracle::normalize(&v).unwrap());
            }
        }
    }
}

#[test]
fn all_quoting_styles_are_generated() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let mut seen = [false; 3];
    for _ in 0..500 {
        let s = statement().new_tree(&mut runner).unwrap().current();
        let outer = if s.text.contains(&format!("{}=\"", s.name)) {
            Outer::Double
        } else if s.text.contains(&format!("{}='", s.name)) {
            Outer::Single
        } else {
            Outer::Bare
        };
        seen[outer as usize] = true;
    }
    assert_eq!(seen, [true; 3]);
}

#[test]
fn quoted_pipeline_decomposes_into_three_commands() {
    let defs = parse_alias_statement(r#"alias ips="ifconfig | grep 'inet ' | cut -d' ' -f2""#).unwrap();
    let c = &defs[0].commands;
    assert_eq!(c.len(), 3);
    assert_eq!((c[0].name.as_str(), c[0].arguments.len()), ("ifconfig", 0));
    assert_eq!((c[1].name.as_str(), c[1].arguments.as_slice()), ("grep", &["'inet '".to_string()][..]));
    assert_eq!(c[2].arguments, ["-d' '", "-f2"]);
}
