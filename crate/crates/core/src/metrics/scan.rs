//! Token-level counters shared by the product metrics.

use std::collections::BTreeSet;

use crate::java::lexer::{is_keyword, Token, TokenKind};
use crate::java::parser::is_type_token;

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

const NON_CALL_KEYWORDS: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "synchronized",
    "return",
    "throw",
    "new",
    "super",
    "this",
    "assert",
    "try",
];

/// For each token, whether it is an angle bracket or wildcard belonging to a
/// generic type argument list rather than a comparison or conditional.
pub fn generic_marks(tokens: &[Token]) -> Vec<bool> {
    let mut marks = vec![false; tokens.len()];
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].is("<") && !marks[i] {
            let prev_ok =
                i > 0 && (tokens[i - 1].kind == TokenKind::Ident || tokens[i - 1].is(".") || tokens[i - 1].is("@"));
            if prev_ok {
                if let Some(end) = close_generic(tokens, i) {
                    for m in marks.iter_mut().take(end + 1).skip(i) {
                        *m = true;
                    }
                    i = end + 1;
                    continue;
                }
            }
        }
        i += 1;
    }
    // Only brackets and wildcards carry the mark.
    for (m, t) in marks.iter_mut().zip(tokens) {
        if !(t.is("<") || t.is(">") || t.is("?")) {
            *m = false;
        }
    }
    marks
}

fn close_generic(tokens: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate().skip(open) {
        if t.is("<") {
            depth += 1;
        } else if t.is(">") {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        } else if !is_type_token(t) {
            return None;
        }
    }
    None
}

/// Syntactic counts over a token slice.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Scan {
    /// if/for/while/do/case/catch/&&/||/? occurrences.
    pub branches: usize,
    pub loops: usize,
    pub comparisons: usize,
    pub string_literals: usize,
    pub returns: usize,
    pub invocations: usize,
    pub invoked: BTreeSet<String>,
    pub identifiers: BTreeSet<String>,
    /// Deepest brace nesting, counting the first `{` as level 0.
    pub max_nesting: usize,
    pub local_vars: usize,
}

pub fn scan(tokens: &[Token]) -> Scan {
    let generic = generic_marks(tokens);
    let mut s = Scan::default();
    let mut depth = 0usize;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        match t.text.as_str() {
            "{" => {
                depth += 1;
                s.max_nesting = s.max_nesting.max(depth - 1);
            }
            "}" => depth = depth.saturating_sub(1),
            "if" | "case" | "catch" | "&&" | "||" | "do" => s.branches += 1,
            "for" | "while" => {
                s.branches += 1;
                s.loops += 1;
            }
            "?" if !generic[i] => s.branches += 1,
            "return" => s.returns += 1,
            "==" | "!=" | "<=" | ">=" => s.comparisons += 1,
            "<" if !generic[i] => s.comparisons += 1,
            ">" if !generic[i] => {
                // `>>`, `>>>` and `>>=` are shifts, not comparisons.
                let mut j = i + 1;
                while j < tokens.len() && (tokens[j].is(">") || tokens[j].is(">=")) && !generic[j] {
                    j += 1;
                }
                if j == i + 1 {
                    s.comparisons += 1;
                } else {
                    i = j;
                    continue;
                }
            }
            _ => {}
        }
        if t.kind == TokenKind::Str {
            s.string_literals += 1;
        }
        if t.is_ident() {
            s.identifiers.insert(t.text.clone());
            let call = tokens.get(i + 1).is_some_and(|n| n.is("("));
            let after_new = i > 0 && tokens[i - 1].is("new");
            let annotation = i > 0 && tokens[i - 1].is("@");
            if call && !after_new && !annotation && !NON_CALL_KEYWORDS.contains(&t.text.as_str()) {
                s.invocations += 1;
                s.invoked.insert(t.text.clone());
            }
        }
        if is_statement_start(tokens, i) {
            s.local_vars += local_declarators(tokens, i);
        }
        i += 1;
    }
    s
}

fn is_statement_start(tokens: &[Token], i: usize) -> bool {
    if i == 0 {
        return false;
    }
    let prev = &tokens[i - 1];
    if prev.is("{") || prev.is(";") || prev.is("}") {
        return true;
    }
    prev.is("(") && i >= 2 && (tokens[i - 2].is("for") || tokens[i - 2].is("try"))
}

/// Number of variables declared by a local declaration starting at `i`, or 0.
fn local_declarators(tokens: &[Token], mut i: usize) -> usize {
    while i < tokens.len() && (tokens[i].is("final") || tokens[i].is("@")) {
        if tokens[i].is("@") {
            i += 2;
        } else {
            i += 1;
        }
    }
    let Some(first) = tokens.get(i) else { return 0 };
    let type_start = first.is_ident() || PRIMITIVES.contains(&first.text.as_str());
    if !type_start {
        return 0;
    }
    i += 1;
    loop {
        match tokens.get(i) {
            Some(t) if t.is(".") && tokens.get(i + 1).is_some_and(Token::is_ident) => i += 2,
            Some(t) if t.is("<") => match close_generic(tokens, i) {
                Some(end) => i = end + 1,
                None => return 0,
            },
            Some(t) if t.is("[") && tokens.get(i + 1).is_some_and(|n| n.is("]")) => i += 2,
            _ => break,
        }
    }
    let Some(name) = tokens.get(i) else { return 0 };
    if !name.is_ident() {
        return 0;
    }
    match tokens.get(i + 1).map(|t| t.text.as_str()) {
        Some("=" | ";" | "," | ":" | "[") => {}
        _ => return 0,
    }
    // Further declarators: `, name` followed by `=`, `,` or `;`, at depth 0.
    let mut count = 1;
    let mut depth = 0i32;
    let mut j = i + 1;
    while j < tokens.len() {
        let t = &tokens[j];
        match t.text.as_str() {
            "(" | "{" | "[" => depth += 1,
            ")" | "}" | "]" => {
                if depth == 0 {
                    break;
                }
                depth -= 1;
            }
            ";" | ":" if depth == 0 => break,
            "," if depth == 0 => {
                let named = tokens.get(j + 1).is_some_and(Token::is_ident)
                    && tokens.get(j + 2).is_some_and(|n| n.is("=") || n.is(",") || n.is(";"));
                if named {
                    count += 1;
                }
            }
            _ => {}
        }
        j += 1;
    }
    count
}

/// Identifier tokens that look like type names: an uppercase first letter and
/// at least one lowercase letter (so `T` and `MAX_SIZE` are excluded).
pub fn type_like_names(tokens: &[Token]) -> BTreeSet<String> {
    tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Ident && !is_keyword(&t.text))
        .filter(|t| {
            let mut chars = t.text.chars();
            chars.next().is_some_and(|c| c.is_ascii_uppercase()) && t.text.chars().any(|c| c.is_ascii_lowercase())
        })
        .map(|t| t.text.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::java::tokenize;

    fn scan_src(src: &str) -> Scan {
        scan(&tokenize(src).unwrap())
    }

    #[test]
    fn generics_are_not_comparisons() {
        let s = scan_src("{ Map<String, List<Integer>> m = new HashMap<>(); if (a < b && c > d) {} x = y >> 2; }");
        assert_eq!(s.comparisons, 2);
        assert_eq!(s.branches, 2);
    }

    #[test]
    fn wildcard_is_not_a_conditional() {
        let s = scan_src("{ List<? extends T> l = f() ? a : b; }");
        assert_eq!(s.branches, 1);
    }

    #[test]
    fn loops_and_nesting() {
        let s = scan_src("{ for (int i = 0; i < n; i++) { while (x) { } } do { } while (y); }");
        assert_eq!(s.loops, 3);
        assert_eq!(s.max_nesting, 2);
        assert_eq!(s.comparisons, 1);
    }

    #[test]
    fn invocations_and_locals() {
        let s = scan_src(
            "{ final List<String> a = new ArrayList<>(); int x = 1, y, z = 2; a.add(\"s\"); foo(bar()); x = 3; for (String s : a) { } }",
        );
        assert_eq!(s.invocations, 3);
        assert_eq!(s.invoked.iter().cloned().collect::<Vec<_>>(), vec!["add", "bar", "foo"]);
        assert_eq!(s.local_vars, 5);
        assert_eq!(s.string_literals, 1);
    }
}
