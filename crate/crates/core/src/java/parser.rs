//! Declaration-level Java parser.
//!
//! Recognizes type declarations (class, interface, enum, record, annotation
//! type), their fields, methods and constructors, and nested types. Method
//! bodies, initializer blocks and field initializers are skipped by brace
//! matching, so anonymous and local classes stay inside their enclosing
//! member.

use std::fmt;

use super::lexer::{tokenize, LexError, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Class,
    Interface,
    Enum,
    Record,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: String,
    pub modifiers: Vec<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub ty: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    pub modifiers: Vec<String>,
    pub return_type: Option<String>,
    pub params: Vec<Param>,
    pub is_constructor: bool,
    pub has_body: bool,
    pub start_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub kind: TypeKind,
    pub modifiers: Vec<String>,
    pub extends: Vec<String>,
    pub implements: Vec<String>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub types: Vec<TypeDecl>,
    pub start_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Lex(LexError),
    Unbalanced { line: usize },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Lex(e) => write!(f, "{e}"),
            ParseError::Unbalanced { line } => write!(f, "line {line}: unbalanced delimiters"),
        }
    }
}

impl std::error::Error for ParseError {}

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
];

/// Parse a compilation unit into its top-level type declarations.
pub fn parse_compilation_unit(src: &str) -> Result<Vec<TypeDecl>, ParseError> {
    let tokens = tokenize(src).map_err(ParseError::Lex)?;
    check_balance(&tokens)?;
    let mut p = Parser { toks: &tokens, pos: 0 };
    Ok(p.compilation_unit())
}

fn check_balance(tokens: &[Token]) -> Result<(), ParseError> {
    let mut stack: Vec<(&str, usize)> = Vec::new();
    for t in tokens {
        match t.text.as_str() {
            "{" | "(" | "[" => stack.push((t.text.as_str(), t.line)),
            "}" | ")" | "]" => {
                let want = match t.text.as_str() {
                    "}" => "{",
                    ")" => "(",
                    _ => "[",
                };
                match stack.pop() {
                    Some((open, _)) if open == want => {}
                    _ => return Err(ParseError::Unbalanced { line: t.line }),
                }
            }
            _ => {}
        }
    }
    match stack.last() {
        Some(&(_, line)) => Err(ParseError::Unbalanced { line }),
        None => Ok(()),
    }
}

/// Join type tokens into a canonical string: words separated by a space only
/// where two words meet (`? extends T`), punctuation glued.
pub fn join_type(tokens: &[Token]) -> String {
    let mut out = String::new();
    let mut prev_word = false;
    for t in tokens {
        let word = t.is_word() || t.text == "?";
        if word && prev_word {
            out.push(' ');
        }
        out.push_str(&t.text);
        prev_word = word;
    }
    out
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + offset)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn line_before(&self, idx: usize) -> usize {
        self.toks[idx.min(self.toks.len() - 1)].line
    }

    /// Index of the delimiter closing the one at `open`.
    fn matching(&self, open: usize) -> usize {
        let (o, c) = match self.toks[open].text.as_str() {
            "{" => ("{", "}"),
            "(" => ("(", ")"),
            "[" => ("[", "]"),
            _ => return open,
        };
        let mut depth = 0usize;
        for (i, t) in self.toks.iter().enumerate().skip(open) {
            if t.is(o) {
                depth += 1;
            } else if t.is(c) {
                depth -= 1;
                if depth == 0 {
                    return i;
                }
            }
        }
        self.toks.len() - 1
    }

    /// Index just past a `<...>` group starting at `open`, or `open` if the
    /// group does not close.
    fn skip_angles(&self, open: usize) -> usize {
        let mut depth = 0usize;
        let mut i = open;
        while i < self.toks.len() {
            let t = &self.toks[i];
            if t.is("<") {
                depth += 1;
            } else if t.is(">") {
                depth -= 1;
                if depth == 0 {
                    return i + 1;
                }
            } else if t.is("(") || t.is("[") {
                i = self.matching(i);
            } else if t.is(";") || t.is("{") || t.is("}") {
                return open;
            }
            i += 1;
        }
        open
    }

    fn compilation_unit(&mut self) -> Vec<TypeDecl> {
        let mut types = Vec::new();
        while let Some(t) = self.peek() {
            if t.is("package") || t.is("import") {
                self.skip_past(";");
                continue;
            }
            if t.is(";") {
                self.pos += 1;
                continue;
            }
            let start = self.pos;
            let modifiers = self.modifiers();
            if self.type_keyword().is_some() {
                if let Some(ty) = self.type_decl(start, modifiers) {
                    types.push(ty);
                }
                continue;
            }
            // Anything else at top level (module declarations, stray tokens).
            match self.peek() {
                Some(t) if t.is("{") => self.pos = self.matching(self.pos) + 1,
                Some(_) => self.pos = self.pos.max(start) + 1,
                None => break,
            }
        }
        types
    }

    fn skip_past(&mut self, text: &str) {
        while let Some(t) = self.peek() {
            self.pos += 1;
            if t.is(text) {
                return;
            }
        }
    }

    /// Consume annotations and modifier keywords.
    fn modifiers(&mut self) -> Vec<String> {
        let mut mods = Vec::new();
        while let Some(t) = self.peek() {
            if t.is("@") && !self.peek_at(1).is_some_and(|n| n.is("interface")) {
                self.pos += 1;
                // Qualified annotation name.
                while self.peek().is_some_and(|t| t.is_word()) {
                    self.pos += 1;
                    if self.at(".") {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if self.at("(") {
                    self.pos = self.matching(self.pos) + 1;
                }
                continue;
            }
            if t.is("non")
                && self.peek_at(1).is_some_and(|n| n.is("-"))
                && self.peek_at(2).is_some_and(|n| n.is("sealed"))
            {
                mods.push("non-sealed".to_owned());
                self.pos += 3;
                continue;
            }
            let contextual_sealed = t.is("sealed") && self.peek_at(1).is_some_and(|n| n.is_word() || n.is("@"));
            if MODIFIERS.contains(&t.text.as_str()) && (!t.is("sealed") || contextual_sealed) {
                mods.push(t.text.clone());
                self.pos += 1;
                continue;
            }
            break;
        }
        mods
    }

    fn type_keyword(&self) -> Option<TypeKind> {
        let t = self.peek()?;
        match t.text.as_str() {
            "class" => Some(TypeKind::Class),
            "interface" => Some(TypeKind::Interface),
            "enum" => Some(TypeKind::Enum),
            "@" if self.peek_at(1).is_some_and(|n| n.is("interface")) => Some(TypeKind::Annotation),
            "record"
                if self.peek_at(1).is_some_and(Token::is_ident)
                    && self.peek_at(2).is_some_and(|n| n.is("(") || n.is("<")) =>
            {
                Some(TypeKind::Record)
            }
            _ => None,
        }
    }

    fn type_decl(&mut self, start: usize, modifiers: Vec<String>) -> Option<TypeDecl> {
        let kind = self.type_keyword()?;
        self.pos += if kind == TypeKind::Annotation { 2 } else { 1 };
        let name = match self.peek() {
            Some(t) if t.is_word() => t.text.clone(),
            _ => return None,
        };
        self.pos += 1;

        let mut extends = Vec::new();
        let mut implements = Vec::new();
        let mut fields = Vec::new();
        let mut clause: Option<&str> = None;
        let mut current: Vec<Token> = Vec::new();
        let flush = |clause: Option<&str>,
                     current: &mut Vec<Token>,
                     extends: &mut Vec<String>,
                     implements: &mut Vec<String>| {
            if current.is_empty() {
                return;
            }
            let ty = join_type(current);
            match clause {
                Some("extends") => extends.push(ty),
                Some("implements") => implements.push(ty),
                _ => {}
            }
            current.clear();
        };
        while let Some(t) = self.peek() {
            if t.is("{") {
                break;
            }
            if t.is(";") || t.is("}") {
                return None;
            }
            if t.is("<") && current.is_empty() && clause.is_none() {
                self.pos = self.skip_angles(self.pos).max(self.pos + 1);
                continue;
            }
            if t.is("(") && kind == TypeKind::Record && clause.is_none() {
                let close = self.matching(self.pos);
                for p in self.params(self.pos + 1, close) {
                    fields.push(FieldDecl {
                        name: p.name,
                        ty: p.ty,
                        modifiers: vec!["private".into(), "final".into()],
                        line: t.line,
                    });
                }
                self.pos = close + 1;
                continue;
            }
            if t.is("extends") || t.is("implements") || t.is("permits") {
                flush(clause, &mut current, &mut extends, &mut implements);
                clause = Some(if t.is("extends") {
                    "extends"
                } else if t.is("implements") {
                    "implements"
                } else {
                    "permits"
                });
                self.pos += 1;
                continue;
            }
            if t.is("<") {
                let end = self.skip_angles(self.pos).max(self.pos + 1);
                current.extend_from_slice(&self.toks[self.pos..end]);
                self.pos = end;
                continue;
            }
            if t.is(",") {
                flush(clause, &mut current, &mut extends, &mut implements);
                self.pos += 1;
                continue;
            }
            if t.is("@") {
                self.modifiers();
                continue;
            }
            current.push(t.clone());
            self.pos += 1;
        }
        flush(clause, &mut current, &mut extends, &mut implements);
        let open = self.pos;
        if open >= self.toks.len() {
            return None;
        }
        let close = self.matching(open);

        let mut decl = TypeDecl {
            name,
            kind,
            modifiers,
            extends,
            implements,
            fields,
            methods: Vec::new(),
            types: Vec::new(),
            start_line: self.toks[start].line,
            end_line: self.toks[close].line,
        };
        self.pos = open + 1;
        if kind == TypeKind::Enum {
            self.enum_constants(close);
        }
        self.members(close, &mut decl);
        self.pos = close + 1;
        Some(decl)
    }

    fn enum_constants(&mut self, close: usize) {
        while self.pos < close {
            let t = &self.toks[self.pos];
            if t.is(";") {
                self.pos += 1;
                return;
            }
            if t.is("(") || t.is("{") {
                self.pos = self.matching(self.pos) + 1;
                continue;
            }
            if t.is("@") {
                self.modifiers();
                continue;
            }
            self.pos += 1;
        }
    }

    fn members(&mut self, close: usize, decl: &mut TypeDecl) {
        while self.pos < close {
            if self.at(";") {
                self.pos += 1;
                continue;
            }
            let start = self.pos;
            let modifiers = self.modifiers();
            if self.pos >= close {
                break;
            }
            if self.type_keyword().is_some() {
                match self.type_decl(start, modifiers) {
                    Some(t) => decl.types.push(t),
                    None => self.recover(close),
                }
                continue;
            }
            if self.at("{") {
                // Initializer block.
                self.pos = self.matching(self.pos) + 1;
                continue;
            }
            let body_start = self.pos;
            if self.at("<") {
                self.pos = self.skip_angles(self.pos).max(self.pos + 1);
            }
            let sig_start = self.pos;
            // Scan to the token that decides what kind of member this is.
            let mut i = self.pos;
            while i < close {
                let t = &self.toks[i];
                if t.is("(") || t.is("=") || t.is(";") || t.is("{") || t.is(",") {
                    break;
                }
                if t.is("<") {
                    i = self.skip_angles(i).max(i + 1);
                    continue;
                }
                if t.is("[") {
                    i = self.matching(i) + 1;
                    continue;
                }
                i += 1;
            }
            if i >= close {
                self.pos = close;
                break;
            }
            let decider = &self.toks[i];
            if decider.is("(") {
                self.method(start, sig_start, i, close, modifiers, decl);
            } else if decider.is("{") {
                // Compact canonical constructor of a record: `Name {`.
                let words = &self.toks[sig_start..i];
                if decl.kind == TypeKind::Record && words.len() == 1 && words[0].is(&decl.name) {
                    let end = self.matching(i);
                    decl.methods.push(MethodDecl {
                        name: decl.name.clone(),
                        modifiers,
                        return_type: None,
                        params: Vec::new(),
                        is_constructor: true,
                        has_body: true,
                        start_line: self.toks[start].line,
                        end_line: self.toks[end].line,
                    });
                    self.pos = end + 1;
                } else {
                    self.pos = self.matching(i) + 1;
                }
            } else {
                self.field(start, body_start, i, close, modifiers, decl);
            }
        }
    }

    fn recover(&mut self, close: usize) {
        while self.pos < close {
            let t = &self.toks[self.pos];
            if t.is(";") {
                self.pos += 1;
                return;
            }
            if t.is("{") {
                self.pos = self.matching(self.pos) + 1;
                return;
            }
            self.pos += 1;
        }
    }

    fn method(
        &mut self,
        start: usize,
        sig_start: usize,
        open_paren: usize,
        close: usize,
        modifiers: Vec<String>,
        decl: &mut TypeDecl,
    ) {
        let name_idx = open_paren.checked_sub(1).filter(|&n| n >= sig_start);
        let Some(name_idx) = name_idx.filter(|&n| self.toks[n].is_word()) else {
            self.pos = open_paren;
            self.recover(close);
            return;
        };
        let name = self.toks[name_idx].text.clone();
        let is_constructor = name_idx == sig_start;
        let return_type = (!is_constructor).then(|| join_type(&self.toks[sig_start..name_idx]));
        let close_paren = self.matching(open_paren);
        let params = self.params(open_paren + 1, close_paren);

        // Tail: array dims, throws clause, annotation default value.
        let mut i = close_paren + 1;
        let mut has_body = false;
        let mut in_default = false;
        let mut end = close_paren;
        while i < close {
            let t = &self.toks[i];
            if t.is("default") {
                in_default = true;
            }
            if t.is("{") && !in_default {
                has_body = true;
                end = self.matching(i);
                break;
            }
            if t.is(";") {
                end = i;
                break;
            }
            if t.is("(") || t.is("[") || t.is("{") {
                i = self.matching(i) + 1;
                continue;
            }
            i += 1;
        }
        decl.methods.push(MethodDecl {
            name,
            modifiers,
            return_type,
            params,
            is_constructor,
            has_body,
            start_line: self.toks[start].line,
            end_line: self.line_before(end),
        });
        self.pos = end + 1;
    }

    /// Formal parameters between `from` (after `(`) and `to` (the `)`).
    fn params(&self, from: usize, to: usize) -> Vec<Param> {
        let mut out = Vec::new();
        let mut seg_start = from;
        let mut i = from;
        let mut angle = 0i32;
        while i <= to {
            let t = &self.toks[i];
            if i == to || (t.is(",") && angle == 0) {
                if let Some(p) = self.param(&self.toks[seg_start..i]) {
                    out.push(p);
                }
                seg_start = i + 1;
            } else if t.is("<") {
                angle += 1;
            } else if t.is(">") {
                angle -= 1;
            } else if t.is("(") {
                i = self.matching(i);
            }
            i += 1;
        }
        out
    }

    fn param(&self, toks: &[Token]) -> Option<Param> {
        let mut kept: Vec<Token> = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let t = &toks[i];
            if t.is("@") {
                i += 2;
                while i + 1 < toks.len() && toks[i].is(".") && toks[i + 1].is_word() {
                    i += 2;
                }
                if i < toks.len() && toks[i].is("(") {
                    let mut depth = 0;
                    while i < toks.len() {
                        if toks[i].is("(") {
                            depth += 1;
                        } else if toks[i].is(")") {
                            depth -= 1;
                            if depth == 0 {
                                i += 1;
                                break;
                            }
                        }
                        i += 1;
                    }
                }
                continue;
            }
            if t.is("final") {
                i += 1;
                continue;
            }
            kept.push(t.clone());
            i += 1;
        }
        // Trailing C-style dims belong to the type: `int a[]`.
        let mut dims = 0;
        while kept.len() >= 2 && kept[kept.len() - 1].is("]") && kept[kept.len() - 2].is("[") {
            kept.truncate(kept.len() - 2);
            dims += 1;
        }
        let name_tok = kept.pop()?;
        if !name_tok.is_word() || kept.is_empty() || name_tok.is("this") {
            return None;
        }
        let mut ty = join_type(&kept);
        for _ in 0..dims {
            ty.push_str("[]");
        }
        Some(Param {
            ty,
            name: name_tok.text,
        })
    }

    fn field(
        &mut self,
        start: usize,
        sig_start: usize,
        decider: usize,
        close: usize,
        modifiers: Vec<String>,
        decl: &mut TypeDecl,
    ) {
        // Find the end `;` at depth zero.
        let mut end = decider;
        while end < close {
            let t = &self.toks[end];
            if t.is(";") {
                break;
            }
            if t.is("{") || t.is("(") || t.is("[") {
                end = self.matching(end) + 1;
                continue;
            }
            end += 1;
        }
        // First declarator name sits right before the decider (modulo dims).
        let mut name_idx = decider;
        while name_idx > sig_start {
            name_idx -= 1;
            if self.toks[name_idx].is_word() {
                break;
            }
        }
        if name_idx > sig_start && self.toks[name_idx].is_word() {
            let ty = join_type(&self.toks[sig_start..name_idx]);
            let line = self.toks[start].line;
            decl.fields.push(FieldDecl {
                name: self.toks[name_idx].text.clone(),
                ty: ty.clone(),
                modifiers: modifiers.clone(),
                line,
            });
            // Further declarators: `, name` followed by `=`, `,`, `;` or `[`.
            let mut i = decider;
            while i < end {
                let t = &self.toks[i];
                if t.is("{") || t.is("(") || t.is("[") {
                    i = self.matching(i) + 1;
                    continue;
                }
                if t.is(",")
                    && self.toks.get(i + 1).is_some_and(Token::is_ident)
                    && self
                        .toks
                        .get(i + 2)
                        .is_some_and(|n| n.is("=") || n.is(",") || n.is(";") || n.is("["))
                {
                    decl.fields.push(FieldDecl {
                        name: self.toks[i + 1].text.clone(),
                        ty: ty.clone(),
                        modifiers: modifiers.clone(),
                        line,
                    });
                }
                i += 1;
            }
        }
        self.pos = end + 1;
    }
}

/// Whether a token sequence contains only tokens that can appear inside a
/// generic type argument list.
pub(crate) fn is_type_token(t: &Token) -> bool {
    t.kind == TokenKind::Ident || matches!(t.text.as_str(), "." | "," | "?" | "&" | "[" | "]" | "<" | ">" | "@")
}
