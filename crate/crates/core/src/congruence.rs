//! Canonical forms for structural congruence, replication unfolding excluded.
//!
//! Within each prefix-delimited static region the normal form (a) drops nil
//! parallel components, nil-scoped authorizations and, in untyped mode,
//! restrictions of unused names, (b) hoists restrictions to the region top
//! and orders them, (c) merges and orders maximal authorization chains, and
//! (d) flattens parallel compositions into an ordered multiset. Canonical
//! alpha-renaming interleaves with the structural pass to a fixpoint, so two
//! processes related by the congruence axioms (minus the replication axiom)
//! print identically.

use std::collections::BTreeSet;

use crate::ast::{free_names, refresh_binders, Name, Process, SymbolTag};
use crate::parser::print_process;
use crate::typecheck::AuthType;

/// Untyped congruence admits `(νa)0 ≡ 0` (and hence dropping restrictions of
/// unused names); the typed congruence omits that axiom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Untyped,
    Typed,
}

/// A normalized process with its stable serialization. Two canonical forms
/// are equal exactly when their serializations are byte-equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    process: Process,
    repr: String,
}

impl CanonicalForm {
    pub fn process(&self) -> &Process {
        &self.process
    }

    pub fn repr(&self) -> &str {
        &self.repr
    }

    pub fn into_process(self) -> Process {
        self.process
    }
}

impl PartialOrd for CanonicalForm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonicalForm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.repr.cmp(&other.repr)
    }
}

struct ResHeader {
    binder: Name,
    tag: Option<SymbolTag>,
    ann: Option<AuthType>,
}

impl ResHeader {
    fn sort_key(&self) -> String {
        let probe = Process::Res {
            binder: self.binder.clone(),
            tag: self.tag.clone(),
            ann: self.ann.clone(),
            body: Box::new(Process::Nil),
        };
        print_process(&probe)
    }

    fn ann_names(&self) -> BTreeSet<Name> {
        self.ann.as_ref().map(|t| t.names()).unwrap_or_default()
    }
}

/// Hoist every restriction of the region to the front; leaves get their
/// continuations normalized recursively (a continuation opens a new region).
fn collect_region(p: &Process, mode: Mode) -> (Vec<ResHeader>, Process) {
    match p {
        Process::Par(l, r) => {
            let (mut bl, tl) = collect_region(l, mode);
            let (br, tr) = collect_region(r, mode);
            bl.extend(br);
            (bl, Process::par(tl, tr))
        }
        Process::Auth(a, body) => {
            let (bs, t) = collect_region(body, mode);
            (bs, Process::auth(a.clone(), t))
        }
        Process::Res {
            binder,
            tag,
            ann,
            body,
        } => {
            let (mut bs, t) = collect_region(body, mode);
            bs.insert(
                0,
                ResHeader {
                    binder: binder.clone(),
                    tag: tag.clone(),
                    ann: ann.clone(),
                },
            );
            (bs, t)
        }
        Process::Nil => (Vec::new(), Process::Nil),
        Process::Out {
            subject,
            object,
            cont,
        } => (
            Vec::new(),
            Process::out(subject.clone(), object.clone(), normalize(cont, mode)),
        ),
        Process::In {
            subject,
            binder,
            cont,
        } => (
            Vec::new(),
            Process::input(subject.clone(), binder.clone(), normalize(cont, mode)),
        ),
        Process::DelegOut {
            subject,
            object,
            cont,
        } => (
            Vec::new(),
            Process::deleg_out(subject.clone(), object.clone(), normalize(cont, mode)),
        ),
        Process::DelegIn {
            subject,
            object,
            cont,
        } => (
            Vec::new(),
            Process::deleg_in(subject.clone(), object.clone(), normalize(cont, mode)),
        ),
        Process::RepIn {
            subject,
            binder,
            cont,
        } => (
            Vec::new(),
            Process::rep_in(subject.clone(), binder.clone(), normalize(cont, mode)),
        ),
    }
}

fn flatten_par(t: Process, items: &mut Vec<Process>) {
    match t {
        Process::Par(l, r) => {
            flatten_par(*l, items);
            flatten_par(*r, items);
        }
        other => items.push(other),
    }
}

fn peel_auths(mut t: Process, names: &mut Vec<Name>) -> Process {
    while let Process::Auth(a, body) = t {
        names.push(a);
        t = *body;
    }
    t
}

fn norm_item(t: Process) -> Process {
    match t {
        Process::Nil => Process::Nil,
        Process::Auth(a, body) => {
            let inner = norm_tree(*body);
            if inner == Process::Nil {
                return Process::Nil;
            }
            let mut names = vec![a];
            let core = peel_auths(inner, &mut names);
            if core == Process::Nil {
                return Process::Nil;
            }
            names.sort();
            names
                .into_iter()
                .rev()
                .fold(core, |acc, n| Process::auth(n, acc))
        }
        leaf => leaf,
    }
}

fn norm_tree(t: Process) -> Process {
    let mut raw = Vec::new();
    flatten_par(t, &mut raw);
    let mut items: Vec<(String, Process)> = raw
        .into_iter()
        .map(norm_item)
        .filter(|p| p != &Process::Nil)
        .map(|p| (print_process(&p), p))
        .collect();
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let mut it = items.into_iter().map(|(_, p)| p);
    match it.next() {
        None => Process::Nil,
        Some(first) => it.fold(first, Process::par),
    }
}

/// Keep a binder when the body (or a kept deeper annotation) mentions it.
fn prune_binders(binders: Vec<ResHeader>, tree: &Process) -> Vec<ResHeader> {
    let mut needed = free_names(tree);
    let mut kept_rev: Vec<ResHeader> = Vec::new();
    for b in binders.into_iter().rev() {
        if needed.contains(&b.binder) {
            needed.extend(b.ann_names());
            kept_rev.push(b);
        }
    }
    kept_rev.reverse();
    kept_rev
}

/// Order binders by their printed header, outermost first, while keeping a
/// binder after any other binder its annotation mentions.
fn sort_binders(binders: Vec<ResHeader>) -> Vec<ResHeader> {
    let names: BTreeSet<Name> = binders.iter().map(|b| b.binder.clone()).collect();
    let mut remaining: Vec<ResHeader> = binders;
    let mut out: Vec<ResHeader> = Vec::new();
    let mut placed: BTreeSet<Name> = BTreeSet::new();
    while !remaining.is_empty() {
        let mut pick: Option<usize> = None;
        let mut pick_key = String::new();
        for (i, b) in remaining.iter().enumerate() {
            let deps_ok = b
                .ann_names()
                .iter()
                .all(|n| !names.contains(n) || placed.contains(n) || *n == b.binder);
            if !deps_ok {
                continue;
            }
            let key = b.sort_key();
            if pick.is_none() || key < pick_key {
                pick = Some(i);
                pick_key = key;
            }
        }
        // annotation cycles cannot be ordered; fall back to given order
        let i = pick.unwrap_or(0);
        let b = remaining.remove(i);
        placed.insert(b.binder.clone());
        out.push(b);
    }
    out
}

fn normalize(p: &Process, mode: Mode) -> Process {
    let (binders, tree) = collect_region(p, mode);
    let tree = norm_tree(tree);
    let binders = match mode {
        Mode::Untyped => prune_binders(binders, &tree),
        Mode::Typed => binders,
    };
    let binders = sort_binders(binders);
    binders.into_iter().rev().fold(tree, |acc, b| Process::Res {
        binder: b.binder,
        tag: b.tag,
        ann: b.ann,
        body: Box::new(acc),
    })
}

fn canonical_binder(counter: &mut usize, avoid: &BTreeSet<Name>) -> Name {
    loop {
        let cand = Name::new(format!("x{}", *counter));
        *counter += 1;
        if !avoid.contains(&cand) {
            return cand;
        }
    }
}

fn canonical_alpha(p: &Process) -> Process {
    use std::collections::BTreeMap;
    fn go(
        p: &Process,
        env: &BTreeMap<Name, Name>,
        counter: &mut usize,
        avoid: &BTreeSet<Name>,
    ) -> Process {
        let ren = |n: &Name, env: &BTreeMap<Name, Name>| -> Name {
            env.get(n).cloned().unwrap_or_else(|| n.clone())
        };
        match p {
            Process::Nil => Process::Nil,
            Process::Par(l, r) => {
                let l = go(l, env, counter, avoid);
                let r = go(r, env, counter, avoid);
                Process::par(l, r)
            }
            Process::Auth(a, body) => {
                Process::auth(ren(a, env), go(body, env, counter, avoid))
            }
            Process::Out {
                subject,
                object,
                cont,
            } => Process::out(
                ren(subject, env),
                ren(object, env),
                go(cont, env, counter, avoid),
            ),
            Process::DelegOut {
                subject,
                object,
                cont,
            } => Process::deleg_out(
                ren(subject, env),
                ren(object, env),
                go(cont, env, counter, avoid),
            ),
            Process::DelegIn {
                subject,
                object,
                cont,
            } => Process::deleg_in(
                ren(subject, env),
                ren(object, env),
                go(cont, env, counter, avoid),
            ),
            Process::Res {
                binder,
                tag,
                ann,
                body,
            } => {
                let ann = ann.as_ref().map(|t| {
                    let mut out = t.clone();
                    for (from, to) in env.iter() {
                        out = rename_type(&out, to, from);
                    }
                    out
                });
                let fresh = canonical_binder(counter, avoid);
                let mut env2 = env.clone();
                env2.insert(binder.clone(), fresh.clone());
                Process::Res {
                    binder: fresh,
                    tag: tag.clone(),
                    ann,
                    body: Box::new(go(body, &env2, counter, avoid)),
                }
            }
            Process::In {
                subject,
                binder,
                cont,
            } => {
                let subject = ren(subject, env);
                let fresh = canonical_binder(counter, avoid);
                let mut env2 = env.clone();
                env2.insert(binder.clone(), fresh.clone());
                Process::In {
                    subject,
                    binder: fresh,
                    cont: Box::new(go(cont, &env2, counter, avoid)),
                }
            }
            Process::RepIn {
                subject,
                binder,
                cont,
            } => {
                let subject = ren(subject, env);
                let fresh = canonical_binder(counter, avoid);
                let mut env2 = env.clone();
                env2.insert(binder.clone(), fresh.clone());
                Process::RepIn {
                    subject,
                    binder: fresh,
                    cont: Box::new(go(cont, &env2, counter, avoid)),
                }
            }
        }
    }
    let avoid = free_names(p);
    go(p, &BTreeMap::new(), &mut 0, &avoid)
}

fn rename_type(t: &AuthType, to: &Name, from: &Name) -> AuthType {
    use crate::typecheck::{OmegaElem, OmegaSet};
    match t {
        AuthType::Ground => AuthType::Ground,
        AuthType::Chan(omega, carried) => {
            let omega = match omega {
                OmegaSet::Nu => OmegaSet::Nu,
                OmegaSet::Set(elems) => OmegaSet::Set(
                    elems
                        .iter()
                        .map(|e| match e {
                            OmegaElem::Name(n) if n == from => OmegaElem::Name(to.clone()),
                            other => other.clone(),
                        })
                        .collect(),
                ),
            };
            AuthType::Chan(omega, Box::new(rename_type(carried, to, from)))
        }
    }
}

const MAX_ROUNDS: usize = 16;

/// Compute the canonical form of `p` under the given congruence mode.
pub fn canonicalize(p: &Process, mode: Mode) -> CanonicalForm {
    let mut cur = canonical_alpha(&refresh_binders(p, &BTreeSet::new()));
    let mut seen: Vec<(String, Process)> = Vec::new();
    let mut prev: Option<String> = None;
    for _ in 0..MAX_ROUNDS {
        let a = canonical_alpha(&normalize(&cur, mode));
        let repr = print_process(&a);
        if prev.as_deref() == Some(repr.as_str()) {
            return CanonicalForm { process: a, repr };
        }
        if let Some(pos) = seen.iter().position(|(r, _)| r == &repr) {
            let mut best = (repr, a);
            for (r, q) in &seen[pos..] {
                if *r < best.0 {
                    best = (r.clone(), q.clone());
                }
            }
            return CanonicalForm {
                process: best.1,
                repr: best.0,
            };
        }
        seen.push((repr.clone(), a.clone()));
        prev = Some(repr);
        cur = a;
    }
    let best = seen
        .into_iter()
        .min_by(|a, b| a.0.cmp(&b.0))
        .expect("at least one round ran");
    CanonicalForm {
        process: best.1,
        repr: best.0,
    }
}

/// Structural congruence on the replication-free fragment: equality of
/// canonical forms.
pub fn congruent(p: &Process, q: &Process, mode: Mode) -> bool {
    canonicalize(p, mode).repr == canonicalize(q, mode).repr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Process as P;
    use crate::parser::parse_process;

    fn pp(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    #[test]
    fn auth_swap() {
        let p = pp("[a] [b] c!d.0");
        let q = pp("[b] [a] c!d.0");
        assert!(congruent(&p, &q, Mode::Untyped));
        assert!(congruent(&p, &q, Mode::Typed));
    }

    #[test]
    fn auth_inact_and_par_inact() {
        let p = pp("[a] 0 | 0");
        assert_eq!(canonicalize(&p, Mode::Untyped).repr(), "0");
    }

    #[test]
    fn res_extrusion() {
        let p = pp("c!d.0 | new a. a!b.0");
        let q = pp("new a. (c!d.0 | a!b.0)");
        assert!(congruent(&p, &q, Mode::Untyped));
    }

    #[test]
    fn no_auth_distribution_over_par() {
        let p = pp("[a] (a!b.0 | a?x.0)");
        let q = pp("[a] a!b.0 | [a] a?x.0");
        assert!(!congruent(&p, &q, Mode::Untyped));
    }

    #[test]
    fn auth_placement_matters() {
        let p = pp("a!b.0 | [a] 0");
        let q = pp("[a] (a!b.0 | 0)");
        assert!(!congruent(&p, &q, Mode::Untyped));
        // but the orphan auth over nil evaporates on the left
        assert!(congruent(&p, &pp("a!b.0"), Mode::Untyped));
    }

    #[test]
    fn alpha_variants() {
        let p = pp("a?x.x!b.0");
        let q = pp("a?y.y!b.0");
        assert!(congruent(&p, &q, Mode::Untyped));
        assert!(congruent(&p, &q, Mode::Typed));
    }

    #[test]
    fn res_inact_untyped_only() {
        let p = pp("new a:#r. 0");
        assert!(congruent(&p, &P::Nil, Mode::Untyped));
        assert!(!congruent(&p, &P::Nil, Mode::Typed));
    }

    #[test]
    fn par_multiset_ordering() {
        let p = pp("(a!a.0 | b!b.0) | c!c.0");
        let q = pp("c!c.0 | (b!b.0 | a!a.0)");
        assert!(congruent(&p, &q, Mode::Untyped));
    }

    #[test]
    fn canonicalize_idempotent_smoke() {
        for s in [
            "[a] (new b. (b!a.0 | 0) | [c] 0)",
            "new a. new b. (a?x.x!b.0 | [b] [a] 0)",
            "!a?x.(x!b.0 | new c. c!x.0)",
        ] {
            let c1 = canonicalize(&pp(s), Mode::Untyped);
            let c2 = canonicalize(c1.process(), Mode::Untyped);
            assert_eq!(c1.repr(), c2.repr(), "input {s}");
        }
    }
}
