//! Line-oriented text formats for languages, instances, operations and
//! fractional operations.
//!
//! ```text
//! # language file
//! domain 2
//! relation xor 2
//! default 0
//! 0 0 : 1
//! 1 1 : 1
//!
//! # instance file
//! language xor.lang
//! vars 3
//! constraint xor x0 x1
//!
//! # operation file
//! domain 2
//! op min 2
//! 0 0 : 0
//! 0 1 : 0
//! 1 0 : 0
//! 1 1 : 1
//! fpol 2
//! weight 1/2 op min
//! weight 1/2 op max
//! ```
//!
//! `#` starts a comment; blank lines are ignored. Values are integers,
//! `p/q` or `inf`. Variables are written `x0 … x{n-1}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::path::Path;
use std::sync::Arc;

use num_rational::BigRational;

use crate::algebra::fractional::FractionalOperation;
use crate::algebra::operation::Operation;
use crate::error::{Error, Result};
use crate::model::{Domain, Instance, Language, WeightedRelation, MAX_ARITY};
use crate::rational::{format_rational, parse_rational, ExtRational};
use crate::tuples::{all_tuples, checked_pow, index_to_tuple, tuple_index};

/// Relation names with this prefix are reserved for internal padding.
pub const RESERVED_PREFIX: &str = "__";

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 1, words))
    })
}

fn parse_usize(line: usize, word: &str, what: &str) -> Result<usize> {
    word.parse::<usize>()
        .map_err(|_| Error::parse(line, format!("malformed {what} `{word}`")))
}

fn parse_value(line: usize, word: &str) -> Result<ExtRational> {
    word.parse::<ExtRational>().map_err(|m| Error::parse(line, m))
}

fn parse_label(line: usize, word: &str, d: usize) -> Result<usize> {
    let x = parse_usize(line, word, "label")?;
    if x >= d {
        return Err(Error::parse(
            line,
            format!("label {x} out of range for domain of size {d}"),
        ));
    }
    Ok(x)
}

fn check_name(line: usize, name: &str) -> Result<()> {
    if name.starts_with(RESERVED_PREFIX) {
        return Err(Error::parse(
            line,
            format!("relation names starting with `{RESERVED_PREFIX}` are reserved"),
        ));
    }
    Ok(())
}

/// Splits `a b c : v` into label words and the value word.
fn split_entry<'a>(line: usize, words: &[&'a str]) -> Result<(Vec<&'a str>, &'a str)> {
    match words.iter().position(|w| *w == ":") {
        Some(p) if p + 2 == words.len() => Ok((words[..p].to_vec(), words[p + 1])),
        _ => Err(Error::parse(line, "expected `<labels> : <value>`")),
    }
}

fn parse_domain_header(line: usize, words: &[&str]) -> Result<Domain> {
    if words.len() != 2 || words[0] != "domain" {
        return Err(Error::parse(line, "expected `domain <d>` header"));
    }
    let d = parse_usize(line, words[1], "domain size")?;
    if d < 2 {
        return Err(Error::parse(line, "domain must have at least two labels"));
    }
    Domain::new(d).map_err(|e| Error::parse(line, e.to_string()))
}

struct PendingRelation {
    line: usize,
    name: String,
    arity: usize,
    default: Option<ExtRational>,
    entries: BTreeMap<u64, ExtRational>,
}

impl PendingRelation {
    fn finish(self, d: usize) -> Result<WeightedRelation> {
        let default = self
            .default
            .ok_or_else(|| Error::parse(self.line, format!("relation `{}` lacks a `default` line", self.name)))?;
        let arity = self.arity;
        WeightedRelation::from_entries(
            self.name,
            d,
            arity,
            default,
            self.entries
                .into_iter()
                .map(|(i, v)| (index_to_tuple(i, d, arity), v)),
        )
        .map_err(|e| Error::parse(self.line, e.to_string()))
    }
}

pub fn parse_language(text: &str) -> Result<Language> {
    let mut it = lines(text);
    let (l0, header) = it
        .next()
        .ok_or_else(|| Error::parse(1, "empty language file"))?;
    let domain = parse_domain_header(l0, &header)?;
    let d = domain.size();
    let mut lang = Language::new(domain);
    let mut pending: Option<PendingRelation> = None;
    for (line, words) in it {
        match words[0] {
            "relation" => {
                if let Some(p) = pending.take() {
                    let rel = p.finish(d)?;
                    lang.push(rel).map_err(|e| Error::parse(line, e.to_string()))?;
                }
                if words.len() != 3 {
                    return Err(Error::parse(line, "expected `relation <name> <arity>`"));
                }
                check_name(line, words[1])?;
                let arity = parse_usize(line, words[2], "arity")?;
                if arity == 0 || arity > MAX_ARITY || checked_pow(d, arity).is_none() {
                    return Err(Error::parse(line, format!("arity {arity} exceeds the cap")));
                }
                pending = Some(PendingRelation {
                    line,
                    name: words[1].to_string(),
                    arity,
                    default: None,
                    entries: BTreeMap::new(),
                });
            }
            "default" => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| Error::parse(line, "`default` outside a relation block"))?;
                if words.len() != 2 || p.default.is_some() || !p.entries.is_empty() {
                    return Err(Error::parse(
                        line,
                        "expected a single `default <value>` right after the relation header",
                    ));
                }
                p.default = Some(parse_value(line, words[1])?);
            }
            _ => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| Error::parse(line, format!("unexpected `{}`", words[0])))?;
                if p.default.is_none() {
                    return Err(Error::parse(line, "tuple listed before the `default` line"));
                }
                let (labels, value) = split_entry(line, &words)?;
                if labels.len() != p.arity {
                    return Err(Error::parse(
                        line,
                        format!(
                            "arity mismatch: relation `{}` has arity {}, tuple has {} labels",
                            p.name,
                            p.arity,
                            labels.len()
                        ),
                    ));
                }
                let tuple = labels
                    .iter()
                    .map(|w| parse_label(line, w, d))
                    .collect::<Result<Vec<_>>>()?;
                let value = parse_value(line, value)?;
                if p.entries.insert(tuple_index(&tuple, d), value).is_some() {
                    return Err(Error::parse(line, "duplicate tuple"));
                }
            }
        }
    }
    if let Some(p) = pending.take() {
        let rel = p.finish(d)?;
        let line = text.lines().count();
        lang.push(rel).map_err(|e| Error::parse(line, e.to_string()))?;
    }
    Ok(lang)
}

/// The most frequent value of a dense table, ties towards the smaller value.
fn canonical_default(rel: &WeightedRelation) -> ExtRational {
    if let Some(d) = rel.sparse_default() {
        return d.clone();
    }
    let mut counts: BTreeMap<ExtRational, usize> = BTreeMap::new();
    for v in rel.dense_values().expect("dense table") {
        *counts.entry(v).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    counts
        .into_iter()
        .find(|(_, c)| *c == best)
        .map(|(v, _)| v)
        .unwrap_or(ExtRational::Infinity)
}

pub fn serialize_relation(out: &mut String, rel: &WeightedRelation) {
    let default = canonical_default(rel);
    let _ = writeln!(out, "relation {} {}", rel.name(), rel.arity());
    let _ = writeln!(out, "default {default}");
    for (i, v) in rel.entries_except(&default) {
        let t = index_to_tuple(i, rel.domain(), rel.arity());
        let labels: Vec<String> = t.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{} : {v}", labels.join(" "));
    }
}

/// Canonical text: relations in declaration order, each with its most
/// frequent value as default and the remaining tuples in lexicographic order.
pub fn serialize_language(lang: &Language) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "domain {}", lang.domain_size());
    for rel in lang.relations() {
        out.push('\n');
        serialize_relation(&mut out, rel);
    }
    out
}

fn parse_variable(line: usize, word: &str, n: usize) -> Result<usize> {
    let idx = word
        .strip_prefix('x')
        .ok_or_else(|| Error::parse(line, format!("malformed variable `{word}`")))?;
    let v = parse_usize(line, idx, "variable index")?;
    if v >= n {
        return Err(Error::parse(
            line,
            format!("variable {word} out of range for {n} variables"),
        ));
    }
    Ok(v)
}

/// Parses an instance. `resolve` maps the `language` line's path to a
/// language.
pub fn parse_instance(
    text: &str,
    mut resolve: impl FnMut(&str) -> Result<Arc<Language>>,
) -> Result<Instance> {
    let mut language: Option<(Arc<Language>, String)> = None;
    let mut instance: Option<Instance> = None;
    for (line, words) in lines(text) {
        match words[0] {
            "language" => {
                if words.len() != 2 || language.is_some() {
                    return Err(Error::parse(line, "expected one `language <path>` line"));
                }
                let lang = resolve(words[1]).map_err(|e| match e {
                    Error::Parse { .. } | Error::Io(_) => e,
                    other => Error::parse(line, other.to_string()),
                })?;
                language = Some((lang, words[1].to_string()));
            }
            "vars" => {
                let (lang, path) = language
                    .clone()
                    .ok_or_else(|| Error::parse(line, "`vars` before `language`"))?;
                if words.len() != 2 || instance.is_some() {
                    return Err(Error::parse(line, "expected one `vars <n>` line"));
                }
                let n = parse_usize(line, words[1], "variable count")?;
                instance = Some(Instance::new(lang, n).with_path(path));
            }
            "constraint" => {
                let inst = instance
                    .as_mut()
                    .ok_or_else(|| Error::parse(line, "`constraint` before `vars`"))?;
                if words.len() < 2 {
                    return Err(Error::parse(line, "expected `constraint <name> <vars…>`"));
                }
                let rel = inst
                    .language()
                    .lookup(words[1])
                    .ok_or_else(|| Error::parse(line, format!("unknown relation `{}`", words[1])))?;
                let arity = inst.language().relation(rel).arity();
                if words.len() - 2 != arity {
                    return Err(Error::parse(
                        line,
                        format!(
                            "arity mismatch: `{}` has arity {arity}, got {} variables",
                            words[1],
                            words.len() - 2
                        ),
                    ));
                }
                let n = inst.num_vars();
                let scope = words[2..]
                    .iter()
                    .map(|w| parse_variable(line, w, n))
                    .collect::<Result<Vec<_>>>()?;
                inst.add(rel, scope).map_err(|e| Error::parse(line, e.to_string()))?;
            }
            other => return Err(Error::parse(line, format!("unexpected `{other}`"))),
        }
    }
    instance.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing `vars` line"))
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "language {}", inst.language_path().unwrap_or("language.lang"));
    let _ = writeln!(out, "vars {}", inst.num_vars());
    for c in inst.constraints() {
        let _ = write!(out, "constraint {}", inst.relation_of(c).name());
        for v in &c.scope {
            let _ = write!(out, " x{v}");
        }
        out.push('\n');
    }
    out
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_language(path: &Path) -> Result<Language> {
    parse_language(&read_file(path)?)
}

/// Loads an instance file, resolving its `language` path relative to the
/// instance file's directory.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = read_file(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_instance(&text, |rel| Ok(Arc::new(load_language(&base.join(rel))?)))
}

/// Contents of an operation file.
#[derive(Clone, Debug, Default)]
pub struct OperationFile {
    pub domain: usize,
    pub operations: Vec<(String, Operation)>,
    pub fractional: Vec<FractionalOperation>,
}

impl OperationFile {
    pub fn operation(&self, name: &str) -> Option<&Operation> {
        self.operations
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, op)| op)
    }
}

/// Built-in operation names usable in `weight` lines without a definition.
pub fn builtin_operation(name: &str, d: usize, arity: usize) -> Option<Operation> {
    let op = match name {
        "min" => Operation::min(d),
        "max" => Operation::max(d),
        "majority" => Operation::majority(d),
        "minority" => Operation::minority(d),
        "id" => Operation::identity(d),
        _ => {
            let i = name.strip_prefix("proj")?.parse::<usize>().ok()?;
            Operation::projection(d, arity, i).ok()?
        }
    };
    (op.arity() == arity).then_some(op)
}

pub fn parse_operations(text: &str) -> Result<OperationFile> {
    let mut it = lines(text);
    let (l0, header) = it
        .next()
        .ok_or_else(|| Error::parse(1, "empty operation file"))?;
    let d = parse_domain_header(l0, &header)?.size();
    let mut file = OperationFile {
        domain: d,
        ..Default::default()
    };
    enum Block {
        None,
        Op {
            line: usize,
            name: String,
            arity: usize,
            table: HashMap<u64, usize>,
        },
        Fpol {
            line: usize,
            arity: usize,
            weights: Vec<(String, BigRational, usize)>,
        },
    }
    let mut block = Block::None;
    let finish = |block: Block, file: &mut OperationFile| -> Result<()> {
        match block {
            Block::None => Ok(()),
            Block::Op {
                line,
                name,
                arity,
                table,
            } => {
                let size = checked_pow(d, arity).unwrap_or(u64::MAX);
                if table.len() as u64 != size {
                    return Err(Error::parse(
                        line,
                        format!("operation `{name}` lists {} of {size} tuples", table.len()),
                    ));
                }
                let values = (0..size).map(|i| table[&i]).collect();
                let op = Operation::from_table(d, arity, values)
                    .map_err(|e| Error::parse(line, e.to_string()))?;
                file.operations.push((name, op));
                Ok(())
            }
            Block::Fpol {
                line,
                arity,
                weights,
            } => {
                let mut pairs = Vec::new();
                for (name, w, wl) in weights {
                    let op = match file.operation(&name) {
                        Some(op) => op.clone(),
                        None => builtin_operation(&name, d, arity).ok_or_else(|| {
                            Error::parse(wl, format!("unknown operation `{name}`"))
                        })?,
                    };
                    if op.arity() != arity {
                        return Err(Error::parse(wl, format!("operation `{name}` has arity {}", op.arity())));
                    }
                    pairs.push((op, w));
                }
                let f = FractionalOperation::new(pairs)
                    .map_err(|e| Error::parse(line, e.to_string()))?;
                file.fractional.push(f);
                Ok(())
            }
        }
    };
    for (line, words) in it {
        match words[0] {
            "op" => {
                finish(std::mem::replace(&mut block, Block::None), &mut file)?;
                if words.len() != 3 {
                    return Err(Error::parse(line, "expected `op <name> <arity>`"));
                }
                let arity = parse_usize(line, words[2], "arity")?;
                if arity == 0 || checked_pow(d, arity).is_none_or(|s| s > 1 << 20) {
                    return Err(Error::parse(line, format!("arity {arity} exceeds the cap")));
                }
                block = Block::Op {
                    line,
                    name: words[1].to_string(),
                    arity,
                    table: HashMap::new(),
                };
            }
            "fpol" => {
                finish(std::mem::replace(&mut block, Block::None), &mut file)?;
                if words.len() != 2 {
                    return Err(Error::parse(line, "expected `fpol <arity>`"));
                }
                block = Block::Fpol {
                    line,
                    arity: parse_usize(line, words[1], "arity")?,
                    weights: Vec::new(),
                };
            }
            "weight" => {
                let Block::Fpol { weights, .. } = &mut block else {
                    return Err(Error::parse(line, "`weight` outside an fpol block"));
                };
                if words.len() != 4 || words[2] != "op" {
                    return Err(Error::parse(line, "expected `weight <p/q> op <name>`"));
                }
                let w = parse_rational(words[1])
                    .ok_or_else(|| Error::parse(line, format!("malformed rational `{}`", words[1])))?;
                weights.push((words[3].to_string(), w, line));
            }
            _ => {
                let Block::Op { arity, table, .. } = &mut block else {
                    return Err(Error::parse(line, format!("unexpected `{}`", words[0])));
                };
                let (labels, value) = split_entry(line, &words)?;
                if labels.len() != *arity {
                    return Err(Error::parse(
                        line,
                        format!("arity mismatch: expected {arity} arguments, got {}", labels.len()),
                    ));
                }
                let args = labels
                    .iter()
                    .map(|w| parse_label(line, w, d))
                    .collect::<Result<Vec<_>>>()?;
                let v = parse_label(line, value, d)?;
                if table.insert(tuple_index(&args, d), v).is_some() {
                    return Err(Error::parse(line, "duplicate argument tuple"));
                }
            }
        }
    }
    finish(block, &mut file)?;
    Ok(file)
}

pub fn serialize_operation(out: &mut String, name: &str, op: &Operation) {
    let _ = writeln!(out, "op {name} {}", op.arity());
    for (t, v) in all_tuples(op.domain(), op.arity()).zip(op.table()) {
        let labels: Vec<String> = t.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{} : {v}", labels.join(" "));
    }
}

/// Writes the support operations as `<prefix><i>` blocks followed by the
/// `fpol` block.
pub fn serialize_fractional(out: &mut String, prefix: &str, omega: &FractionalOperation) {
    let names: Vec<String> = (0..omega.weights().len())
        .map(|i| format!("{prefix}{i}"))
        .collect();
    for ((op, _), name) in omega.weights().iter().zip(&names) {
        serialize_operation(out, name, op);
    }
    let _ = writeln!(out, "fpol {}", omega.arity());
    for ((_, w), name) in omega.weights().iter().zip(&names) {
        let _ = writeln!(out, "weight {} op {name}", format_rational(w));
    }
}

pub fn load_operations(path: &Path) -> Result<OperationFile> {
    parse_operations(&read_file(path)?)
}
