//! A scripted synthetic Git repository with a ground-truth ledger.
//!
//! The script edits a structured model of a small Java project, renders it,
//! and commits through the git CLI. Every rendered line carries an identity,
//! so change counts and churn come from the script itself: a module changes
//! when its line identities change, and churn counts the lines that did not
//! survive on either side. Each edit is checked to keep that count equal to a
//! minimal line diff (no reordering, and the replaced lines never reappear
//! as text on the other side).
//!
//! History: 30 first-parent commits on `main`, tags `v1.0`, `v1.1`, `v2.0`,
//! plus one side-branch commit merged with `--no-ff`. The script includes a
//! method rename, a class rename, a whitespace-only edit, an A->B->A edit,
//! a method deletion, a non-Java commit and a merge.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::error::{Error, Result};
use crate::modules::ModuleId;
use crate::repo::CommitId;

pub const TAGS: [&str; 3] = ["v1.0", "v1.1", "v2.0"];

/// Method edited A->B->A inside the first release pair and nowhere else in it.
pub const REVERTED_METHOD: &str = "method:src/main/java/demo/Alpha.java:Alpha#run(int)";

/// Method renamed inside the first release pair (its identity at `v1.0`).
pub const RENAMED_METHOD: &str = "method:src/main/java/demo/Gamma.java:Gamma#second()";

/// Method given a whitespace-only edit (and one more edit) in the first release pair.
pub const WHITESPACE_METHOD: &str = "method:src/main/java/demo/Beta.java:Beta#compute(int)";

const BASE_TIME: i64 = 1_577_836_800; // 2020-01-01T00:00:00Z
const STEP: i64 = 3 * 86_400;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Line {
    uid: u64,
    text: String,
}

#[derive(Debug, Clone)]
struct MethodModel {
    key: String,
    name: String,
    params: Vec<(String, String)>,
    ret: Option<String>,
    depth: usize,
    /// Signature, statements, closing brace.
    lines: Vec<Line>,
    trail: Line,
}

#[derive(Debug, Clone)]
enum Member {
    Method(MethodModel),
    Class(ClassModel),
}

#[derive(Debug, Clone)]
struct ClassModel {
    key: String,
    name: String,
    modifiers: String,
    depth: usize,
    header: Line,
    fields: Vec<Line>,
    gap: Line,
    members: Vec<Member>,
    close: Line,
    trail: Line,
}

impl ClassModel {
    fn lines(&self) -> Vec<Line> {
        let mut out = vec![self.header.clone()];
        out.extend(self.fields.iter().cloned());
        out.push(self.gap.clone());
        for m in &self.members {
            match m {
                Member::Method(m) => {
                    out.extend(m.lines.iter().cloned());
                    out.push(m.trail.clone());
                }
                Member::Class(c) => {
                    out.extend(c.lines());
                    out.push(c.trail.clone());
                }
            }
        }
        out.push(self.close.clone());
        out
    }
}

#[derive(Debug, Clone)]
struct FileModel {
    path: String,
    classes: Vec<ClassModel>,
}

fn indent(depth: usize) -> String {
    " ".repeat(4 * depth)
}

type Snapshot = BTreeMap<String, (ModuleId, Vec<Line>)>;

/// Ground truth for one module alive at release `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModuleTruth {
    pub loc: usize,
    /// Commits in `(r, r']` that changed the module.
    pub changes: usize,
    pub delta_release: usize,
    pub delta_commit: usize,
    /// Changes made by commits up to and including `r`, after birth.
    pub prior_changes: usize,
    pub prior_churn: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseTruth {
    pub r_tag: String,
    pub rprime_tag: String,
    /// First-parent commits `r ..= r'`.
    pub commits: usize,
    pub modules: BTreeMap<ModuleId, ModuleTruth>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub path: PathBuf,
    /// First-parent chain of `main`, oldest first.
    pub chain: Vec<CommitId>,
    /// Commits reachable only through the merge's second parent.
    pub side_commits: Vec<CommitId>,
    pub releases: Vec<ReleaseTruth>,
}

/// Churn between two line-identity sequences, validated against what a
/// minimal line diff would report.
fn identity_churn(a: &[Line], b: &[Line]) -> Result<usize> {
    let in_a: HashMap<u64, usize> = a.iter().enumerate().map(|(i, l)| (l.uid, i)).collect();
    let survivors: Vec<usize> = b.iter().filter_map(|l| in_a.get(&l.uid).copied()).collect();
    if survivors.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidData("fixture edit reorders lines".into()));
    }
    let in_b: BTreeSet<u64> = b.iter().map(|l| l.uid).collect();
    let deleted: Vec<&Line> = a.iter().filter(|l| !in_b.contains(&l.uid)).collect();
    let inserted: Vec<&Line> = b.iter().filter(|l| !in_a.contains_key(&l.uid)).collect();
    let texts = |ls: &[Line]| ls.iter().map(|l| l.text.clone()).collect::<BTreeSet<_>>();
    let (ta, tb) = (texts(a), texts(b));
    let clean = deleted.iter().all(|l| !tb.contains(&l.text)) || inserted.iter().all(|l| !ta.contains(&l.text));
    if !clean {
        return Err(Error::InvalidData("fixture edit is ambiguous for a line diff".into()));
    }
    Ok(deleted.len() + inserted.len())
}

struct Builder {
    dir: PathBuf,
    files: Vec<FileModel>,
    others: BTreeMap<String, String>,
    next_uid: u64,
    next_stmt: u64,
    commits: usize,
    chain: Vec<CommitId>,
    side_commits: Vec<CommitId>,
    snapshots: Vec<Snapshot>,
}

const AUTHORS: [(&str, &str); 3] = [
    ("Alice", "alice@example.com"),
    ("Bob", "bob@example.com"),
    ("Carol", "carol@example.com"),
];

impl Builder {
    fn line(&mut self, text: String) -> Line {
        self.next_uid += 1;
        Line {
            uid: self.next_uid,
            text,
        }
    }

    fn stmt(&mut self, depth: usize) -> Line {
        self.next_stmt += 1;
        let n = self.next_stmt;
        let body = match n % 4 {
            0 => format!("int v{n} = {n};"),
            1 => format!("total += {n};"),
            2 => format!("if (total > {n}) total = {n};"),
            _ => format!("for (int i = 0; i < {n}; i++) total += i;"),
        };
        self.line(format!("{}{body}", indent(depth)))
    }

    fn signature(m: &MethodModel) -> String {
        let params: Vec<String> = m.params.iter().map(|(t, n)| format!("{t} {n}")).collect();
        let ret = m.ret.as_ref().map(|r| format!("{r} ")).unwrap_or_default();
        format!("{}public {ret}{}({}) {{", indent(m.depth), m.name, params.join(", "))
    }

    fn method(
        &mut self,
        key: &str,
        ret: Option<&str>,
        name: &str,
        params: &[(&str, &str)],
        stmts: usize,
        depth: usize,
    ) -> MethodModel {
        let mut m = MethodModel {
            key: key.into(),
            name: name.into(),
            params: params.iter().map(|(t, n)| (t.to_string(), n.to_string())).collect(),
            ret: ret.map(String::from),
            depth,
            lines: Vec::new(),
            trail: Line {
                uid: 0,
                text: String::new(),
            },
        };
        let sig = self.line(Self::signature(&m));
        m.lines.push(sig);
        for _ in 0..stmts {
            let s = self.stmt(depth + 1);
            m.lines.push(s);
        }
        let close = self.line(format!("{}}}", indent(depth)));
        m.lines.push(close);
        m.trail = self.line(String::new());
        m
    }

    fn class(
        &mut self,
        key: &str,
        modifiers: &str,
        name: &str,
        depth: usize,
        fields: &[&str],
        members: Vec<Member>,
    ) -> ClassModel {
        let header = self.line(format!("{}{modifiers}class {name} {{", indent(depth)));
        let fields = fields
            .iter()
            .map(|f| self.line(format!("{}{f}", indent(depth + 1))))
            .collect();
        ClassModel {
            key: key.into(),
            name: name.into(),
            modifiers: modifiers.into(),
            depth,
            header,
            fields,
            gap: self.line(String::new()),
            members,
            close: self.line(format!("{}}}", indent(depth))),
            trail: self.line(String::new()),
        }
    }

    fn find_method<'a>(members: &'a mut [Member], key: &str) -> Option<&'a mut MethodModel> {
        for m in members {
            match m {
                Member::Method(m) if m.key == key => return Some(m),
                Member::Class(c) => {
                    if let Some(found) = Self::find_method(&mut c.members, key) {
                        return Some(found);
                    }
                }
                _ => {}
            }
        }
        None
    }

    fn find_class<'a>(classes: &'a mut [ClassModel], key: &str) -> Option<&'a mut ClassModel> {
        for c in classes {
            if c.key == key {
                return Some(c);
            }
            for m in &mut c.members {
                if let Member::Class(inner) = m {
                    if let Some(found) = Self::find_class(std::slice::from_mut(inner), key) {
                        return Some(found);
                    }
                }
            }
        }
        None
    }

    fn method_mut(&mut self, key: &str) -> &mut MethodModel {
        self.files
            .iter_mut()
            .flat_map(|f| f.classes.iter_mut())
            .find_map(|c| Self::find_method(&mut c.members, key))
            .unwrap_or_else(|| panic!("fixture script names unknown method {key}"))
    }

    fn class_mut(&mut self, key: &str) -> &mut ClassModel {
        self.files
            .iter_mut()
            .find_map(|f| Self::find_class(&mut f.classes, key))
            .unwrap_or_else(|| panic!("fixture script names unknown class {key}"))
    }

    fn add_stmt(&mut self, key: &str) -> Line {
        let depth = self.method_mut(key).depth;
        let s = self.stmt(depth + 1);
        self.push_line(key, s.clone());
        s
    }

    fn push_line(&mut self, key: &str, line: Line) {
        let m = self.method_mut(key);
        let at = m.lines.len() - 1;
        m.lines.insert(at, line);
    }

    /// Replace statement `idx`, returning the old line.
    fn replace_stmt(&mut self, key: &str, idx: usize) -> Line {
        let depth = self.method_mut(key).depth;
        let s = self.stmt(depth + 1);
        std::mem::replace(&mut self.method_mut(key).lines[1 + idx], s)
    }

    fn restore_stmt(&mut self, key: &str, idx: usize, line: Line) {
        self.method_mut(key).lines[1 + idx] = line;
    }

    fn remove_stmt(&mut self, key: &str, idx: usize) {
        self.method_mut(key).lines.remove(1 + idx);
    }

    fn whitespace_edit(&mut self, key: &str, idx: usize) {
        let text = format!("{}  ", self.method_mut(key).lines[1 + idx].text);
        let line = self.line(text);
        self.method_mut(key).lines[1 + idx] = line;
    }

    fn rename_method(&mut self, key: &str, name: &str) {
        let m = self.method_mut(key);
        m.name = name.into();
        let text = Self::signature(m);
        let line = self.line(text);
        self.method_mut(key).lines[0] = line;
    }

    fn rename_class(&mut self, key: &str, name: &str) {
        let c = self.class_mut(key);
        c.name = name.into();
        let text = format!("{}{}class {name} {{", indent(c.depth), c.modifiers);
        let line = self.line(text);
        self.class_mut(key).header = line;
    }

    fn add_method(&mut self, class_key: &str, m: MethodModel) {
        self.class_mut(class_key).members.push(Member::Method(m));
    }

    fn remove_method(&mut self, class_key: &str, key: &str) {
        self.class_mut(class_key)
            .members
            .retain(|m| !matches!(m, Member::Method(m) if m.key == key));
    }

    fn render(f: &FileModel) -> String {
        let mut out = String::from("package demo;\n\n");
        for (i, c) in f.classes.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for l in c.lines() {
                out.push_str(&l.text);
                out.push('\n');
            }
        }
        out
    }

    fn write_tree(&self) -> Result<()> {
        for f in &self.files {
            let path = self.dir.join(&f.path);
            fs::create_dir_all(path.parent().expect("file has a parent"))?;
            fs::write(path, Self::render(f))?;
        }
        for (p, text) in &self.others {
            fs::write(self.dir.join(p), text)?;
        }
        Ok(())
    }

    fn verify_tree(&self) -> Result<()> {
        for f in &self.files {
            if fs::read_to_string(self.dir.join(&f.path))? != Self::render(f) {
                return Err(Error::InvalidData(format!("fixture tree diverged at {}", f.path)));
            }
        }
        Ok(())
    }

    fn snapshot(&self) -> Snapshot {
        fn walk(path: &str, outer: Option<&str>, c: &ClassModel, out: &mut Snapshot) {
            let q = match outer {
                Some(o) => format!("{o}.{}", c.name),
                None => c.name.clone(),
            };
            out.insert(c.key.clone(), (ModuleId::class(path, q.clone()), c.lines()));
            for m in &c.members {
                match m {
                    Member::Method(m) => {
                        let types = m.params.iter().map(|(t, _)| t.clone()).collect();
                        out.insert(
                            m.key.clone(),
                            (
                                ModuleId::method(path, q.clone(), m.name.clone(), types),
                                m.lines.clone(),
                            ),
                        );
                    }
                    Member::Class(inner) => walk(path, Some(&q), inner, out),
                }
            }
        }
        let mut out = Snapshot::new();
        for f in &self.files {
            for c in &f.classes {
                walk(&f.path, None, c, &mut out);
            }
        }
        out
    }

    fn git(&self, args: &[&str], time: Option<i64>) -> Result<String> {
        let mut cmd = Command::new("git");
        cmd.arg("-C")
            .arg(&self.dir)
            .args([
                "-c",
                "commit.gpgsign=false",
                "-c",
                "tag.gpgsign=false",
                "-c",
                "core.autocrlf=false",
            ])
            .args(args)
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("GIT_CONFIG_GLOBAL", "/dev/null");
        if let Some(t) = time {
            let (name, email) = AUTHORS[self.commits % AUTHORS.len()];
            let date = format!("@{t} +0000");
            cmd.env("GIT_AUTHOR_NAME", name)
                .env("GIT_AUTHOR_EMAIL", email)
                .env("GIT_COMMITTER_NAME", name)
                .env("GIT_COMMITTER_EMAIL", email)
                .env("GIT_AUTHOR_DATE", &date)
                .env("GIT_COMMITTER_DATE", &date);
        }
        let out = cmd.output()?;
        if !out.status.success() {
            return Err(Error::Git {
                command: args.join(" "),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        Ok(String::from_utf8_lossy(&out.stdout).trim().to_string())
    }

    fn head(&self) -> Result<CommitId> {
        CommitId::new(self.git(&["rev-parse", "HEAD"], None)?)
    }

    fn raw_commit(&mut self, msg: &str) -> Result<CommitId> {
        self.write_tree()?;
        self.git(&["add", "-A"], None)?;
        let t = BASE_TIME + STEP * self.commits as i64;
        self.git(&["commit", "-q", "--allow-empty", "-m", msg], Some(t))?;
        self.commits += 1;
        self.head()
    }

    /// Commit on `main`, recording the model state for the ledger.
    fn commit(&mut self, msg: &str) -> Result<()> {
        let c = self.raw_commit(msg)?;
        self.chain.push(c);
        self.snapshots.push(self.snapshot());
        Ok(())
    }

    fn tag(&self, name: &str) -> Result<()> {
        self.git(&["tag", name], None).map(|_| ())
    }
}

fn initial_model(b: &mut Builder) {
    let ctor = b.method("Alpha#Alpha", None, "Alpha", &[("int", "count")], 0, 1);
    let run = b.method("Alpha#run", Some("int"), "run", &[("int", "a")], 3, 1);
    let helper = b.method("Alpha#helper", Some("void"), "helper", &[], 2, 1);
    let size = b.method(
        "Alpha#size",
        Some("int"),
        "size",
        &[("String", "s"), ("int", "n")],
        3,
        1,
    );
    let mut alpha = b.class(
        "Alpha",
        "public ",
        "Alpha",
        0,
        &["private int count;", "private String name;", "private int total;"],
        vec![],
    );
    alpha.members = vec![
        Member::Method(ctor),
        Member::Method(run),
        Member::Method(helper),
        Member::Method(size),
    ];
    // The constructor body assigns the field.
    if let Member::Method(m) = &mut alpha.members[0] {
        let l = b.line("        this.count = count;".into());
        let at = m.lines.len() - 1;
        m.lines.insert(at, l);
    }

    let compute = b.method("Beta#compute", Some("int"), "compute", &[("int", "x")], 3, 1);
    let reset = b.method("Beta#reset", Some("void"), "reset", &[], 2, 1);
    let go = b.method("Beta.Inner#go", Some("void"), "go", &[], 2, 2);
    let inner = b.class(
        "Beta.Inner",
        "static ",
        "Inner",
        1,
        &["int total;"],
        vec![Member::Method(go)],
    );
    let beta = b.class(
        "Beta",
        "public ",
        "Beta",
        0,
        &["private int total;"],
        vec![Member::Method(compute), Member::Method(reset), Member::Class(inner)],
    );

    let first = b.method("Gamma#first", Some("void"), "first", &[], 3, 1);
    let second = b.method("Gamma#second", Some("void"), "second", &[], 3, 1);
    let gamma = b.class(
        "Gamma",
        "public ",
        "Gamma",
        0,
        &["int total;"],
        vec![Member::Method(first), Member::Method(second)],
    );

    b.files = vec![
        FileModel {
            path: "src/main/java/demo/Alpha.java".into(),
            classes: vec![alpha],
        },
        FileModel {
            path: "src/main/java/demo/Beta.java".into(),
            classes: vec![beta],
        },
        FileModel {
            path: "src/main/java/demo/Gamma.java".into(),
            classes: vec![gamma],
        },
    ];
    b.others.insert("README.md".into(), "demo\n".into());
}

fn run_script(b: &mut Builder) -> Result<()> {
    initial_model(b);
    b.commit("Initial import")?;
    b.add_stmt("Alpha#run");
    b.commit("Extend run")?;
    b.replace_stmt("Beta#compute", 1);
    b.commit("Fix compute")?;
    b.others.insert("README.md".into(), "demo\n\nusage notes\n".into());
    b.commit("Docs")?;
    b.add_stmt("Alpha#helper");
    b.add_stmt("Alpha#size");
    b.commit("Touch helper and size")?;
    b.replace_stmt("Gamma#first", 0);
    b.commit("Fix first")?;
    b.add_stmt("Beta.Inner#go");
    b.commit("Extend go")?;
    b.replace_stmt("Alpha#run", 2);
    b.commit("Fix run")?;
    b.add_stmt("Beta#reset");
    b.commit("Extend reset")?;
    b.tag(TAGS[0])?;

    // First release pair.
    let original = b.replace_stmt("Alpha#run", 0);
    b.commit("Try a new run step")?;
    b.restore_stmt("Alpha#run", 0, original);
    b.commit("Revert run step")?;
    b.whitespace_edit("Beta#compute", 0);
    b.commit("Reformat compute")?;
    b.rename_method("Gamma#second", "secondRenamed");
    b.commit("Rename second")?;
    let extra = b.method("Alpha#extra", Some("int"), "extra", &[("int", "k")], 3, 1);
    b.add_method("Alpha", extra);
    b.commit("Add extra")?;

    let before_side = b.files.clone();
    b.git(&["checkout", "-q", "-b", "side"], None)?;
    let side_line = b.add_stmt("Beta#reset");
    let side = b.raw_commit("Side: extend reset")?;
    b.side_commits.push(side);
    b.files = before_side;
    b.git(&["checkout", "-q", "main"], None)?;
    b.add_stmt("Gamma#first");
    b.commit("Extend first")?;
    b.push_line("Beta#reset", side_line);
    let t = BASE_TIME + STEP * b.commits as i64;
    b.git(&["merge", "-q", "--no-ff", "-m", "Merge side", "side"], Some(t))?;
    b.commits += 1;
    b.verify_tree()?;
    let merge = b.head()?;
    b.chain.push(merge);
    b.snapshots.push(b.snapshot());

    b.remove_method("Beta.Inner", "Beta.Inner#go");
    b.commit("Drop go")?;
    b.replace_stmt("Alpha#size", 1);
    b.commit("Fix size")?;
    b.add_stmt("Beta#compute");
    b.commit("Extend compute")?;
    b.tag(TAGS[1])?;

    // Second release pair.
    b.rename_class("Gamma", "Delta");
    b.commit("Rename Gamma to Delta")?;
    b.add_stmt("Gamma#first");
    b.commit("Extend first")?;
    b.add_stmt("Alpha#extra");
    b.commit("Extend extra")?;
    b.others
        .insert("README.md".into(), "demo\n\nusage notes\nmore notes\n".into());
    b.commit("Docs")?;
    b.remove_stmt("Beta#compute", 2);
    b.commit("Trim compute")?;
    b.replace_stmt("Alpha#helper", 0);
    b.commit("Rework helper")?;
    b.replace_stmt("Alpha#helper", 0);
    b.commit("Rework helper again")?;
    let eps = b.method("Epsilon#eps", Some("void"), "eps", &[], 2, 1);
    let epsilon = b.class("Epsilon", "public ", "Epsilon", 0, &[], vec![Member::Method(eps)]);
    b.files.push(FileModel {
        path: "src/main/java/demo/Epsilon.java".into(),
        classes: vec![epsilon],
    });
    b.commit("Add Epsilon")?;
    b.add_stmt("Epsilon#eps");
    b.commit("Extend eps")?;
    b.add_stmt("Alpha#run");
    b.commit("Extend run")?;
    b.add_stmt("Gamma#second");
    b.commit("Extend secondRenamed")?;
    b.tag(TAGS[2])?;
    Ok(())
}

fn ledger(snapshots: &[Snapshot], idx_r: usize, idx_rp: usize) -> Result<BTreeMap<ModuleId, ModuleTruth>> {
    // (changed, churn) of `key` made by commit `i`.
    let step = |key: &str, i: usize| -> Result<Option<usize>> {
        let Some((_, prev)) = snapshots[i - 1].get(key) else {
            return Ok(None);
        };
        match snapshots[i].get(key) {
            None => Ok(Some(prev.len())),
            Some((_, cur)) if cur != prev => Ok(Some(identity_churn(prev, cur)?)),
            Some(_) => Ok(None),
        }
    };
    let mut out = BTreeMap::new();
    for (key, (id, lines)) in &snapshots[idx_r] {
        let mut t = ModuleTruth {
            loc: lines.len(),
            ..ModuleTruth::default()
        };
        for i in 1..=idx_r {
            if let Some(c) = step(key, i)? {
                t.prior_changes += 1;
                t.prior_churn += c;
            }
        }
        for i in idx_r + 1..=idx_rp {
            if let Some(c) = step(key, i)? {
                t.changes += 1;
                t.delta_commit += c;
            }
        }
        let end = snapshots[idx_rp].get(key).map_or(&[][..], |(_, l)| l.as_slice());
        t.delta_release = identity_churn(lines, end)?;
        out.insert(id.clone(), t);
    }
    Ok(out)
}

/// Build the fixture repository in `dir` (created if missing, must be empty).
pub fn build_fixture(dir: &Path) -> Result<Fixture> {
    fs::create_dir_all(dir)?;
    if fs::read_dir(dir)?.next().is_some() {
        return Err(Error::InvalidData(format!("{} is not empty", dir.display())));
    }
    let mut b = Builder {
        dir: dir.to_path_buf(),
        files: Vec::new(),
        others: BTreeMap::new(),
        next_uid: 0,
        next_stmt: 0,
        commits: 0,
        chain: Vec::new(),
        side_commits: Vec::new(),
        snapshots: Vec::new(),
    };
    b.git(&["init", "-q", "-b", "main"], None)?;
    run_script(&mut b)?;

    let tag_idx: Vec<usize> = TAGS
        .iter()
        .map(|t| {
            let c = CommitId::new(b.git(&["rev-parse", &format!("{t}^{{commit}}")], None)?)?;
            b.chain
                .iter()
                .position(|x| *x == c)
                .ok_or_else(|| Error::InvalidData(format!("tag {t} is off the main chain")))
        })
        .collect::<Result<_>>()?;
    let releases = tag_idx
        .windows(2)
        .zip(TAGS.windows(2))
        .map(|(w, t)| {
            Ok(ReleaseTruth {
                r_tag: t[0].into(),
                rprime_tag: t[1].into(),
                commits: w[1] - w[0] + 1,
                modules: ledger(&b.snapshots, w[0], w[1])?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Fixture {
        path: dir.to_path_buf(),
        chain: b.chain,
        side_commits: b.side_commits,
        releases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(uid: u64, text: &str) -> Line {
        Line { uid, text: text.into() }
    }

    #[test]
    fn identity_churn_counts_non_survivors() {
        let a = [l(1, "a"), l(2, "b"), l(3, "c")];
        let b = [l(1, "a"), l(4, "x"), l(3, "c"), l(5, "y")];
        assert_eq!(identity_churn(&a, &b).unwrap(), 3);
        assert_eq!(identity_churn(&a, &[]).unwrap(), 3);
    }

    #[test]
    fn ambiguous_edits_are_rejected() {
        // `b` is deleted while another `b` is inserted: a diff would keep it.
        let a = [l(1, "a"), l(2, "b")];
        let b = [l(3, "b"), l(1, "a")];
        assert!(identity_churn(&a, &b).is_err());
    }
}
