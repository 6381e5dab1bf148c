use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::java::{tokenize, Token};
use crate::modules::{module_loc, ModuleDef, ModuleId, ModuleKind};

use super::scan::{scan, type_like_names, Scan};
use super::{ProductMetricVector, CLASS_METRICS, METHOD_METRICS};

fn lex_body(def: &ModuleDef) -> Vec<Token> {
    tokenize(&def.body.join("\n")).unwrap_or_default()
}

/// Index of the method body's opening brace, or the token count for methods
/// without a body.
fn method_body_start(def: &ModuleDef, tokens: &[Token]) -> usize {
    let name = def.id.method_name.as_deref().unwrap_or_default();
    let Some(open) = tokens.iter().enumerate().position(|(i, t)| {
        t.is(name)
            && tokens.get(i + 1).is_some_and(|n| n.is("("))
            && (i == 0 || !(tokens[i - 1].is("@") || tokens[i - 1].is(".")))
    }) else {
        return tokens.len();
    };
    let mut depth = 0usize;
    let mut i = open + 1;
    while i < tokens.len() {
        match tokens[i].text.as_str() {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            _ => {}
        }
        i += 1;
    }
    tokens[i..]
        .iter()
        .position(|t| t.is("{") || t.is(";"))
        .map(|p| i + p)
        .filter(|&p| tokens[p].is("{"))
        .unwrap_or(tokens.len())
}

/// Tokens from the class's opening brace onward.
fn class_body_start(tokens: &[Token]) -> usize {
    let header = tokens
        .iter()
        .position(|t| matches!(t.text.as_str(), "class" | "interface" | "enum" | "record"))
        .unwrap_or(0);
    tokens[header..]
        .iter()
        .position(|t| t.is("{"))
        .map_or(tokens.len(), |p| header + p)
}

pub fn method_product_metrics(def: &ModuleDef) -> ProductMetricVector {
    let tokens = lex_body(def);
    let body = &tokens[method_body_start(def, &tokens)..];
    let s = scan(body);
    let params = def.method_info().map_or(0, |m| m.param_names.len());
    let values = [
        module_loc(def) as f64,
        (1 + s.branches) as f64,
        params as f64,
        s.max_nesting as f64,
        s.local_vars as f64,
        s.invocations as f64,
        s.loops as f64,
        s.comparisons as f64,
        s.returns as f64,
        s.string_literals as f64,
        s.identifiers.len() as f64,
        s.invoked.len() as f64,
    ];
    debug_assert_eq!(values.len(), METHOD_METRICS.len());
    ProductMetricVector {
        kind: ModuleKind::Method,
        values: values.to_vec(),
    }
}

fn base_name(ty: &str) -> &str {
    let raw = ty.split('<').next().unwrap_or(ty).trim();
    raw.rsplit('.').next().unwrap_or(raw)
}

/// Lookup structure over one snapshot for the context-dependent class
/// metrics (DIT, NOC, WMC, LCOM).
pub struct SnapshotIndex<'a> {
    /// Simple name to the lexicographically first class declaring it.
    by_name: HashMap<&'a str, &'a ModuleDef>,
    children: HashMap<&'a str, usize>,
    methods: HashMap<ModuleId, Vec<&'a ModuleDef>>,
}

impl<'a> SnapshotIndex<'a> {
    pub fn new(defs: &'a [ModuleDef]) -> Self {
        let mut classes: Vec<&ModuleDef> = defs.iter().filter(|d| d.kind() == ModuleKind::Class).collect();
        classes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut by_name = HashMap::new();
        let mut children = HashMap::new();
        for c in &classes {
            by_name.entry(c.id.simple_class_name()).or_insert(*c);
            if let Some(parent) = c.type_info().and_then(|t| t.extends.first()) {
                *children.entry(base_name(parent)).or_insert(0) += 1;
            }
        }
        let mut methods: HashMap<ModuleId, Vec<&ModuleDef>> = HashMap::new();
        for d in defs.iter().filter(|d| d.kind() == ModuleKind::Method) {
            methods.entry(d.id.owner()).or_default().push(d);
        }
        SnapshotIndex {
            by_name,
            children,
            methods,
        }
    }

    fn dit(&self, def: &ModuleDef) -> usize {
        let mut depth = 0;
        let mut seen = BTreeSet::new();
        let mut cur = def;
        seen.insert(&cur.id);
        while let Some(parent) = cur.type_info().and_then(|t| t.extends.first()) {
            let Some(next) = self.by_name.get(base_name(parent)) else {
                break;
            };
            if !seen.insert(&next.id) {
                break;
            }
            depth += 1;
            cur = next;
        }
        depth
    }
}

/// Class metrics against a snapshot context (all modules at the release).
pub fn class_product_metrics(def: &ModuleDef, context: &[ModuleDef]) -> ProductMetricVector {
    class_product_metrics_indexed(def, &SnapshotIndex::new(context))
}

pub fn class_product_metrics_indexed(def: &ModuleDef, index: &SnapshotIndex<'_>) -> ProductMetricVector {
    let info = def.type_info().cloned().unwrap_or_else(|| crate::modules::TypeInfo {
        kind: crate::java::TypeKind::Class,
        modifiers: Vec::new(),
        extends: Vec::new(),
        implements: Vec::new(),
        fields: Vec::new(),
    });
    let tokens = lex_body(def);
    let body = &tokens[class_body_start(&tokens)..];
    let s: Scan = scan(body);
    let methods: &[&ModuleDef] = index.methods.get(&def.id).map_or(&[], Vec::as_slice);
    let name = def.id.simple_class_name();

    let wmc: usize = methods
        .iter()
        .map(|m| method_product_metrics(m).values[1] as usize)
        .sum();
    let mut cbo = type_like_names(&tokens);
    cbo.remove(name);

    let field_names: BTreeSet<&str> = info.fields.iter().map(|f| f.name.as_str()).collect();
    let uses: Vec<BTreeSet<&str>> = methods
        .iter()
        .map(|m| {
            let toks = lex_body(m);
            let body = &toks[method_body_start(m, &toks)..];
            body.iter()
                .enumerate()
                .filter(|&(i, _)| i == 0 || !body[i - 1].is(".") || (i > 1 && body[i - 2].is("this")))
                .filter_map(|(_, t)| field_names.get(t.text.as_str()).copied())
                .collect()
        })
        .collect();
    let (mut p, mut q) = (0i64, 0i64);
    for i in 0..uses.len() {
        for j in i + 1..uses.len() {
            if uses[i].is_disjoint(&uses[j]) {
                p += 1;
            } else {
                q += 1;
            }
        }
    }

    let has = |mods: &[String], m: &str| mods.iter().any(|x| x == m);
    let method_mods = methods.iter().filter_map(|m| m.method_info()).map(|m| &m.modifiers);
    let static_members = info.fields.iter().filter(|f| has(&f.modifiers, "static")).count()
        + method_mods.clone().filter(|m| has(m, "static")).count();
    let public_members = info.fields.iter().filter(|f| has(&f.modifiers, "public")).count()
        + method_mods.filter(|m| has(m, "public")).count();

    let values = [
        module_loc(def) as f64,
        methods.len() as f64,
        info.fields.len() as f64,
        wmc as f64,
        index.dit(def) as f64,
        index.children.get(name).copied().unwrap_or(0) as f64,
        cbo.len() as f64,
        s.invoked.len() as f64,
        (p - q).max(0) as f64,
        s.max_nesting as f64,
        static_members as f64,
        public_members as f64,
        s.string_literals as f64,
        s.loops as f64,
        s.comparisons as f64,
    ];
    debug_assert_eq!(values.len(), CLASS_METRICS.len());
    ProductMetricVector {
        kind: ModuleKind::Class,
        values: values.to_vec(),
    }
}

/// Product metrics for every module of a snapshot, keyed by identity.
pub fn snapshot_product_metrics(defs: &[ModuleDef]) -> BTreeMap<ModuleId, ProductMetricVector> {
    let index = SnapshotIndex::new(defs);
    defs.iter()
        .map(|d| {
            let v = match d.kind() {
                ModuleKind::Class => class_product_metrics_indexed(d, &index),
                ModuleKind::Method => method_product_metrics(d),
            };
            (d.id.clone(), v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::extract_from_lines;

    const SRC: &str = r#"package p;

import java.util.List;

public class Shape extends Base implements Comparable<Shape> {
    private int width;
    private static final String NAME = "shape";
    public List<String> tags;

    public Shape(int width) {
        this.width = width;
    }

    public int area(int h) {
        if (h < 0 && width > 0) {
            return 0;
        }
        for (int i = 0; i < h; i++) {
            log("step");
        }
        return width * h;
    }

    static void log(String msg) {
        System.out.println(msg);
    }

    public int compareTo(Shape o) {
        return width == o.width ? 0 : 1;
    }
}

class Base {
}

class Square extends Shape {
    Square() { super(1); }
}
"#;

    fn defs() -> Vec<ModuleDef> {
        let lines: Vec<String> = SRC.lines().map(String::from).collect();
        extract_from_lines("p/Shape.java", &lines).unwrap()
    }

    fn get<'a>(defs: &'a [ModuleDef], id: &str) -> &'a ModuleDef {
        defs.iter().find(|d| d.id.to_string() == id).unwrap()
    }

    fn metric(v: &ProductMetricVector, name: &str) -> f64 {
        v.get(name).unwrap()
    }

    #[test]
    fn method_metrics_by_hand() {
        let defs = defs();
        let area = method_product_metrics(get(&defs, "method:p/Shape.java:Shape#area(int)"));
        assert_eq!(metric(&area, "loc"), 9.0);
        // if, &&, for
        assert_eq!(metric(&area, "cc"), 4.0);
        assert_eq!(metric(&area, "params"), 1.0);
        assert_eq!(metric(&area, "max_nesting"), 1.0);
        assert_eq!(metric(&area, "local_vars"), 1.0);
        assert_eq!(metric(&area, "invocations"), 1.0);
        assert_eq!(metric(&area, "loops"), 1.0);
        assert_eq!(metric(&area, "comparisons"), 3.0);
        assert_eq!(metric(&area, "returns"), 2.0);
        assert_eq!(metric(&area, "string_literals"), 1.0);
        // h, width, i, log
        assert_eq!(metric(&area, "unique_identifiers"), 4.0);
        assert_eq!(metric(&area, "fan_out"), 1.0);

        let cmp = method_product_metrics(get(&defs, "method:p/Shape.java:Shape#compareTo(Shape)"));
        assert_eq!(metric(&cmp, "cc"), 2.0);
        assert_eq!(metric(&cmp, "comparisons"), 1.0);
    }

    #[test]
    fn straight_line_method_has_cc_one() {
        let defs = defs();
        let ctor = method_product_metrics(get(&defs, "method:p/Shape.java:Shape#Shape(int)"));
        assert_eq!(metric(&ctor, "cc"), 1.0);
        assert_eq!(metric(&ctor, "loc"), 3.0);
    }

    #[test]
    fn class_metrics_by_hand() {
        let defs = defs();
        let index = SnapshotIndex::new(&defs);
        let shape = class_product_metrics_indexed(get(&defs, "class:p/Shape.java:Shape"), &index);
        assert_eq!(metric(&shape, "loc"), 27.0);
        assert_eq!(metric(&shape, "nom"), 4.0);
        assert_eq!(metric(&shape, "nof"), 3.0);
        // 1 + 4 + 1 + 2
        assert_eq!(metric(&shape, "wmc"), 8.0);
        assert_eq!(metric(&shape, "dit"), 1.0);
        assert_eq!(metric(&shape, "noc"), 1.0);
        // Base, Comparable, String, List, System
        assert_eq!(metric(&shape, "cbo"), 5.0);
        // Shape, area, log, println, compareTo
        assert_eq!(metric(&shape, "rfc"), 5.0);
        assert_eq!(metric(&shape, "max_nesting"), 2.0);
        // uses: ctor {width}, area {width}, log {}, compareTo {width}: P=3, Q=3
        assert_eq!(metric(&shape, "lcom"), 0.0);
        assert_eq!(metric(&shape, "static_members"), 2.0);
        assert_eq!(metric(&shape, "public_members"), 4.0);
        assert_eq!(metric(&shape, "string_literals"), 2.0);

        let square = class_product_metrics_indexed(get(&defs, "class:p/Shape.java:Square"), &index);
        assert_eq!(metric(&square, "dit"), 2.0);
        let base = class_product_metrics_indexed(get(&defs, "class:p/Shape.java:Base"), &index);
        assert_eq!(metric(&base, "dit"), 0.0);
        assert_eq!(metric(&base, "nom"), 0.0);
        assert_eq!(metric(&base, "loc"), 2.0);
    }

    #[test]
    fn wmc_is_sum_of_method_cc() {
        let defs = defs();
        let all = snapshot_product_metrics(&defs);
        for class in defs.iter().filter(|d| d.kind() == ModuleKind::Class) {
            let sum: f64 = defs
                .iter()
                .filter(|m| m.kind() == ModuleKind::Method && m.id.owner() == class.id)
                .map(|m| all[&m.id].values[1])
                .sum();
            assert_eq!(all[&class.id].values[3], sum);
        }
    }
}
