//! Java tokenizer: enough lexical fidelity to find declarations and count
//! syntactic metric tokens. Comments and whitespace are dropped.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Ident && !is_keyword(&self.text)
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Ident
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub message: &'static str,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for LexError {}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

const OPERATORS: &[&str] = &[
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "<<",
];

/// Tokenize Java source. `>` is always a single token so nested generic
/// closers (`>>`) need no special casing.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let n = chars.len();

    while i < n {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && i + 1 < n && chars[i + 1] == '/' {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && i + 1 < n && chars[i + 1] == '*' {
            let start = line;
            i += 2;
            loop {
                if i + 1 >= n {
                    return Err(LexError {
                        line: start,
                        message: "unterminated block comment",
                    });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    i += 2;
                    break;
                }
                if chars[i] == '\n' {
                    line += 1;
                }
                i += 1;
            }
            continue;
        }
        let start_line = line;
        if c == '"' {
            let begin = i;
            if i + 2 < n && chars[i + 1] == '"' && chars[i + 2] == '"' {
                i += 3;
                loop {
                    if i + 2 >= n {
                        return Err(LexError {
                            line: start_line,
                            message: "unterminated text block",
                        });
                    }
                    if chars[i] == '\\' {
                        i += 2;
                        continue;
                    }
                    if chars[i] == '"' && chars[i + 1] == '"' && chars[i + 2] == '"' {
                        i += 3;
                        break;
                    }
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    i += 1;
                }
            } else {
                i += 1;
                loop {
                    if i >= n || chars[i] == '\n' {
                        return Err(LexError {
                            line: start_line,
                            message: "unterminated string literal",
                        });
                    }
                    if chars[i] == '\\' {
                        i += 2;
                        continue;
                    }
                    if chars[i] == '"' {
                        i += 1;
                        break;
                    }
                    i += 1;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Str,
                text: chars[begin..i.min(n)].iter().collect(),
                line: start_line,
            });
            continue;
        }
        if c == '\'' {
            let begin = i;
            i += 1;
            loop {
                if i >= n || chars[i] == '\n' {
                    return Err(LexError {
                        line: start_line,
                        message: "unterminated character literal",
                    });
                }
                if chars[i] == '\\' {
                    i += 2;
                    continue;
                }
                if chars[i] == '\'' {
                    i += 1;
                    break;
                }
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Char,
                text: chars[begin..i.min(n)].iter().collect(),
                line: start_line,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && i + 1 < n && chars[i + 1].is_ascii_digit()) {
            let begin = i;
            let hex = c == '0' && i + 1 < n && matches!(chars[i + 1], 'x' | 'X');
            while i < n {
                let d = chars[i];
                let exponent_sign = (d == '+' || d == '-')
                    && i > begin
                    && if hex {
                        matches!(chars[i - 1], 'p' | 'P')
                    } else {
                        matches!(chars[i - 1], 'e' | 'E')
                    };
                if d.is_ascii_alphanumeric() || d == '_' || d == '.' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                text: chars[begin..i].iter().collect(),
                line: start_line,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let begin = i;
            while i < n && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident,
                text: chars[begin..i].iter().collect(),
                line: start_line,
            });
            continue;
        }
        let op = OPERATORS.iter().find(|op| {
            let len = op.chars().count();
            i + len <= n && op.chars().zip(&chars[i..i + len]).all(|(a, &b)| a == b)
        });
        let text = match op {
            Some(op) => op.to_string(),
            None => c.to_string(),
        };
        i += text.chars().count();
        tokens.push(Token {
            kind: TokenKind::Punct,
            text,
            line: start_line,
        });
    }
    Ok(tokens)
}
