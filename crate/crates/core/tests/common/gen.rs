//! Random alias statements that carry their own expected decomposition.

use alias_census::parser::{ParsedCommand, Separator};
use proptest::prelude::*;
use proptest::sample::select;

pub const SEPARATORS: [Separator; 6] =
    [Separator::Pipe, Separator::PipeErr, Separator::And, Separator::Or, Separator::Background, Separator::Seq];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outer {
    Single,
    Double,
    Bare,
}

#[derive(Debug, Clone)]
pub struct GenCommand {
    pub env: Vec<String>,
    pub sudo: bool,
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct GenStatement {
    pub name: String,
    pub commands: Vec<GenCommand>,
    /// One per command; only the last may be `None`.
    pub separators: Vec<Separator>,
    pub outer: Outer,
    /// The value as the shell sees it after quote removal.
    pub value: String,
    /// The full `alias name=...` line.
    pub text: String,
}

impl GenStatement {
    pub fn expected(&self) -> Vec<ParsedCommand> {
        self.commands
            .iter()
            .zip(&self.separators)
            .map(|(c, &sep)| ParsedCommand {
                env_prefixes: c.env.clone(),
                name: c.name.clone(),
                arguments: c.args.clone(),
                sudo: c.sudo,
                separator_after: sep,
            })
            .collect()
    }

    /// Words separated by one space, operators surrounded by one space.
    pub fn canonical(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        for (c, sep) in self.commands.iter().zip(&self.separators) {
            parts.extend(c.env.iter().map(String::as_str));
            if c.sudo {
                parts.push("sudo");
            }
            parts.push(&c.name);
            parts.extend(c.args.iter().map(String::as_str));
            if *sep != Separator::None {
                parts.push(sep.as_shell());
            }
        }
        parts.join(" ")
    }

    pub fn trailing(&self) -> bool {
        self.separators.last() != Some(&Separator::None)
    }
}

pub fn argument() -> impl Strategy<Value = String> {
    prop_oneof![
        6 => "[A-Za-z0-9_./~:+,=-]{1,8}",
        2 => r#"'[a-z |&;"$()\\<>#*-]{0,8}'"#,
        2 => r#""([a-z |&;'()<>#*-]|\\"|\\\\){0,8}""#,
        1 => "[a-z-]{1,3}'[ a-z|]{0,3}'",
        1 => r"[a-z]{1,3}\\[ |;&][a-z]{0,3}",
        1 => r"\$\([a-z]{1,4}( [a-z|;&]{1,4}){0,2}\)",
        1 => r"`[a-z]{1,4}( [a-z|;]{1,3}){0,2}`",
        1 => r"\$\{[a-z]{1,4}\}",
    ]
}

fn command() -> impl Strategy<Value = GenCommand> {
    (
        prop::collection::vec("[A-Z_][A-Z0-9_]{0,4}=[a-z0-9/:.]{0,5}", 0..=2),
        prop::bool::weighted(0.25),
        "[a-z][a-z0-9_.-]{0,7}".prop_filter("sudo is a prefix, not a name", |n| n != "sudo"),
        prop::collection::vec(argument(), 0..=4),
    )
        .prop_map(|(env, sudo, name, args)| GenCommand { env, sudo, name, args })
}

fn quote_value(value: &str, outer: Outer) -> String {
    let bare_ok = !value.is_empty()
        && value.chars().all(|c| c.is_ascii_alphanumeric() || "_./~:+,-".contains(c));
    match outer {
        Outer::Bare if bare_ok => value.to_string(),
        Outer::Double => {
            let mut s = String::from("\"");
            for c in value.chars() {
                if matches!(c, '"' | '\\' | '$' | '`') {
                    s.push('\\');
                }
                s.push(c);
            }
            s.push('"');
            s
        }
        _ => format!("'{}'", value.replace('\'', r"'\''")),
    }
}

pub fn statement() -> impl Strategy<Value = GenStatement> {
    (
        "[A-Za-z_][A-Za-z0-9_.:+-]{0,8}",
        prop::collection::vec((command(), select(SEPARATORS.to_vec())), 1..=5),
        prop_oneof![3 => Just(Separator::None), 1 => Just(Separator::Seq), 1 => Just(Separator::Background)],
        select(vec![Outer::Single, Outer::Double, Outer::Bare]),
        prop::collection::vec("[ \t]{1,3}", 24),
        prop::collection::vec("[ \t]{0,2}", 24),
    )
        .prop_map(|(name, parts, last, outer, gaps, tight)| {
            let n = parts.len();
            let (commands, mut separators): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
            separators[n - 1] = last;
            let mut gi = 0;
            let mut gap = |wide: bool| {
                gi += 1;
                if wide { gaps[gi % gaps.len()].clone() } else { tight[gi % tight.len()].clone() }
            };
            let mut value = gap(false);
            for (c, sep) in commands.iter().zip(&separators) {
                let words = c.env.iter().chain(c.sudo.then(|| "sudo".to_string()).iter()).chain([&c.name]).chain(&c.args).cloned().collect::<Vec<_>>();
                for (i, w) in words.iter().enumerate() {
                    if i > 0 {
                        value.push_str(&gap(true));
                    }
                    value.push_str(w);
                }
                if *sep != Separator::None {
                    value.push_str(&gap(false));
                    value.push_str(sep.as_shell());
                    value.push_str(&gap(false));
                }
            }
            value.push_str(&gap(false));
            let text = format!("alias {name}={}", quote_value(&value, outer));
            GenStatement { name, commands, separators, outer, value, text }
        })
}

/// Short strings over the characters that matter to word and operator
/// splitting.
pub fn shellish() -> impl Strategy<Value = String> {
    r#"[ab \t'"\\|&;]{0,16}"#
}
