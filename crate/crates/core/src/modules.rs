//! Class and method modules extracted from source snapshots.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::java::{parse_compilation_unit, FieldDecl, ParseError, TypeDecl, TypeKind};
use crate::repo::{CommitId, FileSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Class,
    Method,
}

impl ModuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModuleKind::Class => "class",
            ModuleKind::Method => "method",
        }
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModuleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "class" => Ok(ModuleKind::Class),
            "method" => Ok(ModuleKind::Method),
            other => Err(format!("unknown module kind `{other}`")),
        }
    }
}

/// Identity of a class or method module.
///
/// Encoded as `kind:path:qualified_class[#method(paramtypes)]`, e.g.
/// `method:src/A.java:A.Inner#run(int,String)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModuleId {
    pub kind: ModuleKind,
    pub file_path: String,
    pub qualified_class: String,
    pub method_name: Option<String>,
    pub param_types: Option<Vec<String>>,
}

impl ModuleId {
    pub fn class(file_path: impl Into<String>, qualified_class: impl Into<String>) -> Self {
        ModuleId {
            kind: ModuleKind::Class,
            file_path: file_path.into(),
            qualified_class: qualified_class.into(),
            method_name: None,
            param_types: None,
        }
    }

    pub fn method(
        file_path: impl Into<String>,
        qualified_class: impl Into<String>,
        name: impl Into<String>,
        param_types: Vec<String>,
    ) -> Self {
        ModuleId {
            kind: ModuleKind::Method,
            file_path: file_path.into(),
            qualified_class: qualified_class.into(),
            method_name: Some(name.into()),
            param_types: Some(param_types),
        }
    }

    /// The class module owning this method (or the class itself).
    pub fn owner(&self) -> ModuleId {
        ModuleId::class(self.file_path.clone(), self.qualified_class.clone())
    }

    pub fn simple_class_name(&self) -> &str {
        self.qualified_class.rsplit('.').next().unwrap_or(&self.qualified_class)
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.kind, self.file_path, self.qualified_class)?;
        if let (Some(name), Some(params)) = (&self.method_name, &self.param_types) {
            write!(f, "#{}({})", name, params.join(","))?;
        }
        Ok(())
    }
}

impl PartialOrd for ModuleId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by the encoded string form.
impl Ord for ModuleId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl FromStr for ModuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| format!("malformed module id `{s}`"))?;
        let kind: ModuleKind = kind.parse()?;
        let (path, tail) = rest
            .rsplit_once(':')
            .ok_or_else(|| format!("malformed module id `{s}`"))?;
        match kind {
            ModuleKind::Class => Ok(ModuleId::class(path, tail)),
            ModuleKind::Method => {
                let (class, sig) = tail
                    .split_once('#')
                    .ok_or_else(|| format!("method id without `#`: `{s}`"))?;
                let open = sig.find('(').ok_or_else(|| format!("method id without `(`: `{s}`"))?;
                let params = sig[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| format!("method id without `)`: `{s}`"))?;
                Ok(ModuleId::method(path, class, &sig[..open], split_params(params)))
            }
        }
    }
}

/// Split an encoded parameter list on commas outside `<...>`.
fn split_params(params: &str) -> Vec<String> {
    if params.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in params.chars() {
        match ch {
            '<' => depth += 1,
            '>' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeInfo {
    pub kind: TypeKind,
    pub modifiers: Vec<String>,
    pub extends: Vec<String>,
    pub implements: Vec<String>,
    pub fields: Vec<FieldDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodInfo {
    pub modifiers: Vec<String>,
    pub return_type: Option<String>,
    pub param_names: Vec<String>,
    pub is_constructor: bool,
    pub has_body: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Type(TypeInfo),
    Method(MethodInfo),
}

/// An extracted module: identity, source segment and declaration details.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleDef {
    pub id: ModuleId,
    pub body: Vec<String>,
    /// Inclusive 1-based line span in the file.
    pub span: (usize, usize),
    pub decl: Decl,
}

impl ModuleDef {
    pub fn kind(&self) -> ModuleKind {
        self.id.kind
    }

    pub fn method_info(&self) -> Option<&MethodInfo> {
        match &self.decl {
            Decl::Method(m) => Some(m),
            Decl::Type(_) => None,
        }
    }

    pub fn type_info(&self) -> Option<&TypeInfo> {
        match &self.decl {
            Decl::Type(t) => Some(t),
            Decl::Method(_) => None,
        }
    }
}

/// Physical lines of the module's code segment.
pub fn module_loc(def: &ModuleDef) -> usize {
    def.span.1 - def.span.0 + 1
}

/// A file that could not be parsed and was left out of a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractWarning {
    pub path: String,
    pub commit: Option<CommitId>,
    pub message: String,
}

/// One class module per type declaration (nested types included) and one
/// method module per method or constructor.
pub fn extract_modules(snapshot: &FileSnapshot) -> Result<Vec<ModuleDef>, ExtractWarning> {
    extract_from_lines(&snapshot.path, &snapshot.content).map_err(|e| ExtractWarning {
        path: snapshot.path.clone(),
        commit: Some(snapshot.commit.clone()),
        message: e.to_string(),
    })
}

/// [`extract_modules`] over raw lines, for callers without a commit.
pub fn extract_from_lines(path: &str, lines: &[String]) -> Result<Vec<ModuleDef>, ParseError> {
    let src = lines.join("\n");
    let types = parse_compilation_unit(&src)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for t in &types {
        push_type(path, lines, t, None, &mut out, &mut seen);
    }
    Ok(out)
}

fn segment(lines: &[String], start: usize, end: usize) -> Vec<String> {
    let end = end.min(lines.len());
    let start = start.clamp(1, end.max(1));
    lines[start - 1..end].to_vec()
}

fn push_type(
    path: &str,
    lines: &[String],
    t: &TypeDecl,
    outer: Option<&str>,
    out: &mut Vec<ModuleDef>,
    seen: &mut HashSet<ModuleId>,
) {
    let qualified = match outer {
        Some(o) => format!("{o}.{}", t.name),
        None => t.name.clone(),
    };
    let id = ModuleId::class(path, qualified.clone());
    if seen.insert(id.clone()) {
        out.push(ModuleDef {
            id,
            body: segment(lines, t.start_line, t.end_line),
            span: (t.start_line, t.end_line),
            decl: Decl::Type(TypeInfo {
                kind: t.kind,
                modifiers: t.modifiers.clone(),
                extends: t.extends.clone(),
                implements: t.implements.clone(),
                fields: t.fields.clone(),
            }),
        });
    } else {
        warn!("{path}: duplicate type `{qualified}` ignored");
        return;
    }
    for m in &t.methods {
        let id = ModuleId::method(
            path,
            qualified.clone(),
            m.name.clone(),
            m.params.iter().map(|p| p.ty.clone()).collect(),
        );
        if !seen.insert(id.clone()) {
            warn!("{path}: duplicate method `{id}` ignored");
            continue;
        }
        out.push(ModuleDef {
            id,
            body: segment(lines, m.start_line, m.end_line),
            span: (m.start_line, m.end_line),
            decl: Decl::Method(MethodInfo {
                modifiers: m.modifiers.clone(),
                return_type: m.return_type.clone(),
                param_names: m.params.iter().map(|p| p.name.clone()).collect(),
                is_constructor: m.is_constructor,
                has_body: m.has_body,
            }),
        });
    }
    for nested in &t.types {
        push_type(path, lines, nested, Some(&qualified), out, seen);
    }
}

#[derive(Serialize)]
struct ModuleRecord<'a> {
    id: String,
    kind: ModuleKind,
    file_path: &'a str,
    qualified_class: &'a str,
    method_name: Option<&'a str>,
    param_types: Option<&'a [String]>,
    start_line: usize,
    end_line: usize,
    loc: usize,
}

/// Debug dump: one JSON object per module per line, bodies omitted.
pub fn write_modules_jsonl<W: Write>(mut w: W, defs: &[ModuleDef]) -> std::io::Result<()> {
    for d in defs {
        let rec = ModuleRecord {
            id: d.id.to_string(),
            kind: d.id.kind,
            file_path: &d.id.file_path,
            qualified_class: &d.id.qualified_class,
            method_name: d.id.method_name.as_deref(),
            param_types: d.id.param_types.as_deref(),
            start_line: d.span.0,
            end_line: d.span.1,
            loc: module_loc(d),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
