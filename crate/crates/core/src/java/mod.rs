//! Java source front end: tokenizer and declaration-level parser.

pub mod lexer;
pub mod parser;

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse_compilation_unit, FieldDecl, MethodDecl, Param, ParseError, TypeDecl, TypeKind};
