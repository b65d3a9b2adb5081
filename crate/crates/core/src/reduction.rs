//! Static contexts, the `drift` operation, reduction, and authorization
//! errors.
//!
//! A synchronization between two prefixes is possible exactly when `drift`
//! can remove, from the static context above them, one authorization per
//! required use — always the authorizations nearest to each prefix. The
//! removed scopes reappear confined over the two continuations. When `drift`
//! is undefined for some redex the process is an error.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{
    all_names, refresh_binders, substitute, Name, NameMultiset, Process, SymbolTag,
};
use crate::congruence::{canonicalize, Mode};
use crate::parser::print_process;
use crate::typecheck::AuthType;

/// One layer of a static context, stored outermost first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CtxLayer {
    Auth(Name),
    Par { other: Process, hole_left: bool },
}

/// A one-hole static context (`Par` and `Auth` layers only).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OneHoleCtx {
    pub layers: Vec<CtxLayer>,
}

impl OneHoleCtx {
    pub fn new(layers: Vec<CtxLayer>) -> OneHoleCtx {
        OneHoleCtx { layers }
    }

    pub fn fill(&self, hole: Process) -> Process {
        self.layers.iter().rev().fold(hole, |acc, layer| match layer {
            CtxLayer::Auth(a) => Process::auth(a.clone(), acc),
            CtxLayer::Par { other, hole_left } => {
                if *hole_left {
                    Process::par(acc, other.clone())
                } else {
                    Process::par(other.clone(), acc)
                }
            }
        })
    }
}

/// A two-hole static context: shared layers above the split, then one
/// one-hole context per side of the splitting parallel node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoHoleCtx {
    pub shared: Vec<CtxLayer>,
    pub first: OneHoleCtx,
    pub second: OneHoleCtx,
    /// Whether the first hole is in the left branch of the split.
    pub first_left: bool,
}

impl TwoHoleCtx {
    pub fn fill(&self, p1: Process, p2: Process) -> Process {
        let (l, r) = if self.first_left {
            (self.first.fill(p1), self.second.fill(p2))
        } else {
            (self.second.fill(p2), self.first.fill(p1))
        };
        let split = Process::par(l, r);
        self.shared.iter().rev().fold(split, |acc, layer| match layer {
            CtxLayer::Auth(a) => Process::auth(a.clone(), acc),
            CtxLayer::Par { other, hole_left } => {
                if *hole_left {
                    Process::par(acc, other.clone())
                } else {
                    Process::par(other.clone(), acc)
                }
            }
        })
    }
}

/// Scan a layer list from the hole outward, removing the nearest scope for
/// each requested occurrence. Returns the kept layers plus the undischarged
/// residue.
fn drift_segment(layers: &[CtxLayer], need: &mut NameMultiset) -> Vec<CtxLayer> {
    let mut kept_rev: Vec<CtxLayer> = Vec::new();
    for layer in layers.iter().rev() {
        match layer {
            CtxLayer::Auth(a) if need.contains(a) => {
                *need = need.remove_one(a);
            }
            other => kept_rev.push(other.clone()),
        }
    }
    kept_rev.reverse();
    kept_rev
}

/// `drift` on a one-hole context: remove one authorization, nearest to the
/// hole, per occurrence in `remove`. `None` when the context does not carry
/// them all.
pub fn drift1(ctx: &OneHoleCtx, remove: &NameMultiset) -> Option<OneHoleCtx> {
    drift1_residual(ctx, remove).ok()
}

pub fn drift1_residual(
    ctx: &OneHoleCtx,
    remove: &NameMultiset,
) -> Result<OneHoleCtx, NameMultiset> {
    let mut need = remove.clone();
    let layers = drift_segment(&ctx.layers, &mut need);
    if need.is_empty() {
        Ok(OneHoleCtx { layers })
    } else {
        Err(need)
    }
}

/// `drift` on a two-hole context. Below the split each hole discharges its
/// own list; shared scopes above the split may discharge either.
pub fn drift2(
    ctx: &TwoHoleCtx,
    remove1: &NameMultiset,
    remove2: &NameMultiset,
) -> Option<TwoHoleCtx> {
    drift2_residual(ctx, remove1, remove2).ok()
}

pub fn drift2_residual(
    ctx: &TwoHoleCtx,
    remove1: &NameMultiset,
    remove2: &NameMultiset,
) -> Result<TwoHoleCtx, NameMultiset> {
    let mut need1 = remove1.clone();
    let mut need2 = remove2.clone();
    let first = OneHoleCtx {
        layers: drift_segment(&ctx.first.layers, &mut need1),
    };
    let second = OneHoleCtx {
        layers: drift_segment(&ctx.second.layers, &mut need2),
    };
    let mut shared_rev: Vec<CtxLayer> = Vec::new();
    for layer in ctx.shared.iter().rev() {
        match layer {
            CtxLayer::Auth(a) if need1.contains(a) => {
                need1 = need1.remove_one(a);
            }
            CtxLayer::Auth(a) if need2.contains(a) => {
                need2 = need2.remove_one(a);
            }
            other => shared_rev.push(other.clone()),
        }
    }
    let residual = need1.sum(&need2);
    if residual.is_empty() {
        shared_rev.reverse();
        Ok(TwoHoleCtx {
            shared: shared_rev,
            first,
            second,
            first_left: ctx.first_left,
        })
    } else {
        Err(residual)
    }
}

/// A hoisted restriction binder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResBinder {
    pub name: Name,
    pub tag: Option<SymbolTag>,
    pub ann: Option<AuthType>,
}

pub fn wrap_restrictions(binders: &[ResBinder], inner: Process) -> Process {
    binders.iter().rev().fold(inner, |acc, b| Process::Res {
        binder: b.name.clone(),
        tag: b.tag.clone(),
        ann: b.ann.clone(),
        body: Box::new(acc),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RedexKind {
    Comm,
    Deleg,
}

/// A pair of complementary prefixes in a prepared process, with the static
/// context that separates them.
#[derive(Clone, Debug)]
pub struct Redex {
    pub kind: RedexKind,
    /// The prepared process this redex lives in: restrictions hoisted, and,
    /// when the input side is a replicated input, one unfolded copy.
    pub prepared: Process,
    pub restrictions: Vec<ResBinder>,
    pub sites: TwoHoleCtx,
    pub subject: Name,
    /// Sent name (`Comm`) or delegated authorization (`Deleg`).
    pub object: Name,
    pub out_cont: Process,
    /// Input placeholder (`Comm` only).
    pub in_binder: Option<Name>,
    pub in_cont: Process,
    /// Whether the input side came from unfolding a replicated input.
    pub from_replication: bool,
}

impl Redex {
    /// The removal lists handed to `drift`.
    pub fn removal_lists(&self) -> (NameMultiset, NameMultiset) {
        match self.kind {
            RedexKind::Comm => (
                NameMultiset::singleton(self.subject.clone()),
                NameMultiset::singleton(self.subject.clone()),
            ),
            RedexKind::Deleg => {
                let mut first = NameMultiset::singleton(self.subject.clone());
                first.add(self.object.clone(), 1);
                (first, NameMultiset::singleton(self.subject.clone()))
            }
        }
    }

    /// The two filled continuations of the reduction rules.
    pub fn confined_continuations(&self) -> (Process, Process) {
        match self.kind {
            RedexKind::Comm => {
                let x = self.in_binder.as_ref().expect("comm redex has a binder");
                (
                    Process::auth(self.subject.clone(), self.out_cont.clone()),
                    Process::auth(
                        self.subject.clone(),
                        substitute(&self.in_cont, &self.object, x),
                    ),
                )
            }
            RedexKind::Deleg => (
                Process::auth(self.subject.clone(), self.out_cont.clone()),
                Process::auth(
                    self.subject.clone(),
                    Process::auth(self.object.clone(), self.in_cont.clone()),
                ),
            ),
        }
    }

    pub fn out_prefix_text(&self) -> String {
        match self.kind {
            RedexKind::Comm => format!("{}!{}", self.subject, self.object),
            RedexKind::Deleg => format!("{}<{}>", self.subject, self.object),
        }
    }

    pub fn in_prefix_text(&self) -> String {
        match self.kind {
            RedexKind::Comm => format!(
                "{}?{}",
                self.subject,
                self.in_binder.as_ref().expect("comm redex has a binder")
            ),
            RedexKind::Deleg => format!("{}({})", self.subject, self.object),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    L,
    R,
    A,
}

fn hoist_region(p: &Process) -> (Vec<ResBinder>, Process) {
    match p {
        Process::Par(l, r) => {
            let (mut bl, tl) = hoist_region(l);
            let (br, tr) = hoist_region(r);
            bl.extend(br);
            (bl, Process::par(tl, tr))
        }
        Process::Auth(a, body) => {
            let (bs, t) = hoist_region(body);
            (bs, Process::auth(a.clone(), t))
        }
        Process::Res {
            binder,
            tag,
            ann,
            body,
        } => {
            let (mut bs, t) = hoist_region(body);
            bs.insert(
                0,
                ResBinder {
                    name: binder.clone(),
                    tag: tag.clone(),
                    ann: ann.clone(),
                },
            );
            (bs, t)
        }
        leaf => (Vec::new(), leaf.clone()),
    }
}

fn collect_leaves(p: &Process, pos: &mut Vec<Step>, out: &mut Vec<(Vec<Step>, Process)>) {
    match p {
        Process::Nil => {}
        Process::Par(l, r) => {
            pos.push(Step::L);
            collect_leaves(l, pos, out);
            pos.pop();
            pos.push(Step::R);
            collect_leaves(r, pos, out);
            pos.pop();
        }
        Process::Auth(_, body) => {
            pos.push(Step::A);
            collect_leaves(body, pos, out);
            pos.pop();
        }
        Process::Res { .. } => unreachable!("restrictions are hoisted before leaf collection"),
        leaf => out.push((pos.clone(), leaf.clone())),
    }
}

fn replace_at(p: &Process, pos: &[Step], replacement: Process) -> Process {
    match pos.split_first() {
        None => replacement,
        Some((step, rest)) => match (p, step) {
            (Process::Par(l, r), Step::L) => {
                Process::par(replace_at(l, rest, replacement), (**r).clone())
            }
            (Process::Par(l, r), Step::R) => {
                Process::par((**l).clone(), replace_at(r, rest, replacement))
            }
            (Process::Auth(a, body), Step::A) => {
                Process::auth(a.clone(), replace_at(body, rest, replacement))
            }
            _ => unreachable!("position does not match skeleton"),
        },
    }
}

fn build_one_hole(subtree: &Process, pos: &[Step]) -> OneHoleCtx {
    let mut layers = Vec::new();
    let mut node = subtree;
    for step in pos {
        match (node, step) {
            (Process::Auth(a, body), Step::A) => {
                layers.push(CtxLayer::Auth(a.clone()));
                node = body;
            }
            (Process::Par(l, r), Step::L) => {
                layers.push(CtxLayer::Par {
                    other: (**r).clone(),
                    hole_left: true,
                });
                node = l;
            }
            (Process::Par(l, r), Step::R) => {
                layers.push(CtxLayer::Par {
                    other: (**l).clone(),
                    hole_left: false,
                });
                node = r;
            }
            _ => unreachable!("position does not match skeleton"),
        }
    }
    OneHoleCtx { layers }
}

fn build_two_hole(skel: &Process, pos1: &[Step], pos2: &[Step]) -> TwoHoleCtx {
    let k = pos1
        .iter()
        .zip(pos2.iter())
        .take_while(|(a, b)| a == b)
        .count();
    let mut shared = Vec::new();
    let mut node = skel;
    for step in &pos1[..k] {
        match (node, step) {
            (Process::Auth(a, body), Step::A) => {
                shared.push(CtxLayer::Auth(a.clone()));
                node = body;
            }
            (Process::Par(l, r), Step::L) => {
                shared.push(CtxLayer::Par {
                    other: (**r).clone(),
                    hole_left: true,
                });
                node = l;
            }
            (Process::Par(l, r), Step::R) => {
                shared.push(CtxLayer::Par {
                    other: (**l).clone(),
                    hole_left: false,
                });
                node = r;
            }
            _ => unreachable!("position does not match skeleton"),
        }
    }
    let Process::Par(l, r) = node else {
        unreachable!("two prefix sites always diverge at a parallel node");
    };
    match (pos1[k], pos2[k]) {
        (Step::L, Step::R) => TwoHoleCtx {
            shared,
            first: build_one_hole(l, &pos1[k + 1..]),
            second: build_one_hole(r, &pos2[k + 1..]),
            first_left: true,
        },
        (Step::R, Step::L) => TwoHoleCtx {
            shared,
            first: build_one_hole(r, &pos1[k + 1..]),
            second: build_one_hole(l, &pos2[k + 1..]),
            first_left: false,
        },
        _ => unreachable!("sites diverge at a parallel node"),
    }
}

/// Enumerate every complementary prefix pair of `p`, after hoisting the
/// restrictions of the top static region and unfolding, per redex, the one
/// replicated input involved.
pub fn enumerate_redexes(p: &Process) -> Vec<Redex> {
    let freshened = refresh_binders(p, &BTreeSet::new());
    let (restrictions, skeleton) = hoist_region(&freshened);

    let mut leaves = Vec::new();
    collect_leaves(&skeleton, &mut Vec::new(), &mut leaves);

    let mut outs: Vec<(Vec<Step>, Name, Name, Process)> = Vec::new();
    let mut deleg_outs: Vec<(Vec<Step>, Name, Name, Process)> = Vec::new();
    let mut ins: Vec<(Vec<Step>, Name, Name, Process)> = Vec::new();
    let mut deleg_ins: Vec<(Vec<Step>, Name, Name, Process)> = Vec::new();
    let mut reps: Vec<(Vec<Step>, Name, Name, Process)> = Vec::new();
    for (pos, leaf) in &leaves {
        match leaf {
            Process::Out {
                subject,
                object,
                cont,
            } => outs.push((pos.clone(), subject.clone(), object.clone(), (**cont).clone())),
            Process::DelegOut {
                subject,
                object,
                cont,
            } => deleg_outs.push((pos.clone(), subject.clone(), object.clone(), (**cont).clone())),
            Process::In {
                subject,
                binder,
                cont,
            } => ins.push((pos.clone(), subject.clone(), binder.clone(), (**cont).clone())),
            Process::DelegIn {
                subject,
                object,
                cont,
            } => deleg_ins.push((pos.clone(), subject.clone(), object.clone(), (**cont).clone())),
            Process::RepIn {
                subject,
                binder,
                cont,
            } => reps.push((pos.clone(), subject.clone(), binder.clone(), (**cont).clone())),
            _ => {}
        }
    }

    let mut redexes = Vec::new();

    for (out_pos, a, b, out_cont) in &outs {
        for (in_pos, a2, x, in_cont) in &ins {
            if a != a2 {
                continue;
            }
            let sites = build_two_hole(&skeleton, out_pos, in_pos);
            redexes.push(Redex {
                kind: RedexKind::Comm,
                prepared: wrap_restrictions(&restrictions, skeleton.clone()),
                restrictions: restrictions.clone(),
                sites,
                subject: a.clone(),
                object: b.clone(),
                out_cont: out_cont.clone(),
                in_binder: Some(x.clone()),
                in_cont: in_cont.clone(),
                from_replication: false,
            });
        }
        for (rep_pos, a2, x, cont) in &reps {
            if a != a2 {
                continue;
            }
            // one on-demand unfolding: !a?x.P  ~>  !a?x.P | [a] a?x'.P'
            let mut avoid = all_names(&skeleton);
            avoid.extend(restrictions.iter().map(|r| r.name.clone()));
            let copy = refresh_binders(
                &Process::auth(
                    a2.clone(),
                    Process::In {
                        subject: a2.clone(),
                        binder: x.clone(),
                        cont: Box::new(cont.clone()),
                    },
                ),
                &avoid,
            );
            let Process::Auth(_, copy_in) = &copy else {
                unreachable!()
            };
            let (copy_binder, copy_cont) = match copy_in.as_ref() {
                Process::In { binder, cont, .. } => (binder.clone(), (**cont).clone()),
                _ => unreachable!(),
            };
            let rep_node = Process::RepIn {
                subject: a2.clone(),
                binder: x.clone(),
                cont: Box::new(cont.clone()),
            };
            let unfolded = replace_at(&skeleton, rep_pos, Process::par(rep_node, copy));
            let mut in_pos = rep_pos.clone();
            in_pos.push(Step::R);
            in_pos.push(Step::A);
            let sites = build_two_hole(&unfolded, out_pos, &in_pos);
            redexes.push(Redex {
                kind: RedexKind::Comm,
                prepared: wrap_restrictions(&restrictions, unfolded),
                restrictions: restrictions.clone(),
                sites,
                subject: a.clone(),
                object: b.clone(),
                out_cont: out_cont.clone(),
                in_binder: Some(copy_binder),
                in_cont: copy_cont,
                from_replication: true,
            });
        }
    }

    for (out_pos, a, b, out_cont) in &deleg_outs {
        for (in_pos, a2, b2, in_cont) in &deleg_ins {
            if a != a2 || b != b2 {
                continue;
            }
            let sites = build_two_hole(&skeleton, out_pos, in_pos);
            redexes.push(Redex {
                kind: RedexKind::Deleg,
                prepared: wrap_restrictions(&restrictions, skeleton.clone()),
                restrictions: restrictions.clone(),
                sites,
                subject: a.clone(),
                object: b.clone(),
                out_cont: out_cont.clone(),
                in_binder: None,
                in_cont: in_cont.clone(),
                from_replication: false,
            });
        }
    }

    redexes
}

/// One-step reducts, deduplicated up to structural congruence in `mode`.
pub fn reduce_in(p: &Process, mode: Mode) -> Vec<Process> {
    let mut out: Vec<Process> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for redex in enumerate_redexes(p) {
        let (rm1, rm2) = redex.removal_lists();
        if let Some(ctx) = drift2(&redex.sites, &rm1, &rm2) {
            let (h1, h2) = redex.confined_continuations();
            let result = wrap_restrictions(&redex.restrictions, ctx.fill(h1, h2));
            if seen.insert(canonicalize(&result, mode).repr().to_string()) {
                out.push(result);
            }
        }
    }
    out
}

/// One-step reducts under the untyped congruence.
pub fn reduce(p: &Process) -> Vec<Process> {
    reduce_in(p, Mode::Untyped)
}

/// A redex whose `drift` is undefined.
#[derive(Clone, Debug)]
pub struct ErrorWitness {
    pub kind: RedexKind,
    pub subject: Name,
    pub object: Name,
    /// Authorizations the context failed to provide.
    pub missing: NameMultiset,
    pub out_prefix: String,
    pub in_prefix: String,
    pub prepared: Process,
}

impl fmt::Display for ErrorWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pair ({}, {}) lacks {} in {}",
            self.out_prefix,
            self.in_prefix,
            self.missing,
            print_process(&self.prepared)
        )
    }
}

/// Every redex stuck for lack of authorizations.
pub fn error_witnesses(p: &Process) -> Vec<ErrorWitness> {
    let mut out = Vec::new();
    for redex in enumerate_redexes(p) {
        let (rm1, rm2) = redex.removal_lists();
        if let Err(missing) = drift2_residual(&redex.sites, &rm1, &rm2) {
            out.push(ErrorWitness {
                kind: redex.kind,
                subject: redex.subject.clone(),
                object: redex.object.clone(),
                missing,
                out_prefix: redex.out_prefix_text(),
                in_prefix: redex.in_prefix_text(),
                prepared: redex.prepared.clone(),
            });
        }
    }
    out
}

/// Is `p` an error: some complementary pair of prefixes whose `drift` is
/// undefined?
pub fn is_error(p: &Process) -> Option<ErrorWitness> {
    error_witnesses(p).into_iter().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::congruent;
    use crate::parser::parse_process;

    fn pp(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    fn ms(pairs: &[(&str, u32)]) -> NameMultiset {
        NameMultiset::from_counts(pairs.iter().map(|(n, k)| (*n, *k)))
    }

    fn auth(n: &str) -> CtxLayer {
        CtxLayer::Auth(Name::new(n))
    }

    #[test]
    fn drift1_paper_examples() {
        // drift([a]., a) = .
        let c = OneHoleCtx::new(vec![auth("a")]);
        assert_eq!(drift1(&c, &ms(&[("a", 1)])), Some(OneHoleCtx::default()));

        // drift([a]([a]. | R), a) = [a](. | R): the inner scope goes
        let r = pp("r?z.0");
        let c = OneHoleCtx::new(vec![
            auth("a"),
            CtxLayer::Par {
                other: r.clone(),
                hole_left: true,
            },
            auth("a"),
        ]);
        let expect = OneHoleCtx::new(vec![
            auth("a"),
            CtxLayer::Par {
                other: r,
                hole_left: true,
            },
        ]);
        assert_eq!(drift1(&c, &ms(&[("a", 1)])), Some(expect));

        // drift(., a) undefined
        assert_eq!(drift1(&OneHoleCtx::default(), &ms(&[("a", 1)])), None);

        // drift([a][b]., {a,b}) = .
        let c = OneHoleCtx::new(vec![auth("a"), auth("b")]);
        assert_eq!(
            drift1(&c, &ms(&[("a", 1), ("b", 1)])),
            Some(OneHoleCtx::default())
        );

        // drift([a]., {a,b}) undefined
        let c = OneHoleCtx::new(vec![auth("a")]);
        assert_eq!(drift1(&c, &ms(&[("a", 1), ("b", 1)])), None);

        // drift([a]. | [b]0, {a,b}) undefined: the sibling scope is out of reach
        let c = OneHoleCtx::new(vec![
            CtxLayer::Par {
                other: pp("[b] 0"),
                hole_left: true,
            },
            auth("a"),
        ]);
        assert_eq!(drift1(&c, &ms(&[("a", 1), ("b", 1)])), None);
    }

    #[test]
    fn drift2_paper_examples() {
        let hole = OneHoleCtx::default;
        // [b][a][a](.1|.2) with {a,b};{a} -> .1|.2
        let c = TwoHoleCtx {
            shared: vec![auth("b"), auth("a"), auth("a")],
            first: hole(),
            second: hole(),
            first_left: true,
        };
        let d = drift2(&c, &ms(&[("a", 1), ("b", 1)]), &ms(&[("a", 1)])).unwrap();
        assert!(d.shared.is_empty() && d.first.layers.is_empty() && d.second.layers.is_empty());

        // [b][a](.1 | [a].2) with {a,b};{a} -> .1|.2
        let c = TwoHoleCtx {
            shared: vec![auth("b"), auth("a")],
            first: hole(),
            second: OneHoleCtx::new(vec![auth("a")]),
            first_left: true,
        };
        let d = drift2(&c, &ms(&[("a", 1), ("b", 1)]), &ms(&[("a", 1)])).unwrap();
        assert!(d.shared.is_empty() && d.first.layers.is_empty() && d.second.layers.is_empty());

        // [a][b].1 | [a].2 with {a,b};{a} -> .1|.2
        let c = TwoHoleCtx {
            shared: vec![],
            first: OneHoleCtx::new(vec![auth("a"), auth("b")]),
            second: OneHoleCtx::new(vec![auth("a")]),
            first_left: true,
        };
        let d = drift2(&c, &ms(&[("a", 1), ("b", 1)]), &ms(&[("a", 1)])).unwrap();
        assert!(d.shared.is_empty() && d.first.layers.is_empty() && d.second.layers.is_empty());

        // [b](.1 | [a][a].2) with {a,b};{a} undefined
        let c = TwoHoleCtx {
            shared: vec![auth("b")],
            first: hole(),
            second: OneHoleCtx::new(vec![auth("a"), auth("a")]),
            first_left: true,
        };
        assert_eq!(drift2(&c, &ms(&[("a", 1), ("b", 1)]), &ms(&[("a", 1)])), None);
    }

    #[test]
    fn sec21_worked_reduction() {
        // [a]([a](Q | a!b.R1) | a?x.R2) -> (Q | [a]R1) | [a]R2{b/x}
        let p = pp("[a] ([a] (q?z.0 | a!b.r1?z.0) | a?x.x!e.0)");
        let results = reduce(&p);
        assert_eq!(results.len(), 1);
        let expect = pp("(q?z.0 | [a] r1?z.0) | [a] b!e.0");
        assert!(congruent(&results[0], &expect, Mode::Untyped));
    }

    #[test]
    fn delegation_transfer() {
        let p = pp("[license][auth] auth<license>.ub!done.0 | [auth] auth(license).lc!done.0");
        let results = reduce(&p);
        assert_eq!(results.len(), 1);
        let expect = pp("[auth] ub!done.0 | [auth] [license] lc!done.0");
        assert!(congruent(&results[0], &expect, Mode::Untyped));
    }

    #[test]
    fn unauthorized_receiver_is_stuck_error() {
        let p = pp("[a] a!b.p1?z.0 | a?x.p2?z.0");
        assert!(reduce(&p).is_empty());
        let w = is_error(&p).expect("error");
        assert_eq!(w.missing, ms(&[("a", 1)]));
    }

    #[test]
    fn deleg_error_shapes() {
        // kinds differ: no redex at all
        let p = pp("[a] a!b.0 | [a] a(b).0");
        assert!(is_error(&p).is_none());
        assert!(reduce(&p).is_empty());

        // delegator lacks [b]
        let p = pp("[a] a<b>.0 | [a] a(b).0");
        let w = is_error(&p).expect("error");
        assert_eq!(w.missing, ms(&[("b", 1)]));

        // one authorization, two claimants
        let p = pp("[a] (a!b.0 | a?x.0)");
        let w = is_error(&p).expect("error");
        assert_eq!(w.missing, ms(&[("a", 1)]));
    }

    #[test]
    fn replication_unfolds_once_per_redex() {
        let p = pp("!a?x.0");
        assert!(enumerate_redexes(&p).is_empty());

        let q = pp("[a] a!b.0 | !a?x.0");
        let rs = enumerate_redexes(&q);
        assert_eq!(rs.len(), 1);
        assert!(rs[0].from_replication);
        let results = reduce(&q);
        assert_eq!(results.len(), 1);
        let expect = pp("[a] 0 | (!a?x.0 | [a] 0)");
        assert!(congruent(&results[0], &expect, Mode::Untyped));
    }

    #[test]
    fn two_inputs_two_redexes() {
        let p = pp("[a] a!b.0 | [a] a?x.0 | a?y.0");
        let rs = enumerate_redexes(&p);
        assert_eq!(rs.len(), 2);
        // only the authorized partner can fire
        assert_eq!(reduce(&p).len(), 1);
        assert!(is_error(&p).is_some());
    }

    #[test]
    fn restriction_hoisting_enables_cross_scope_redexes() {
        let p = pp("new b. ([a] a!b.0) | [a] a?x.x?t.0");
        let results = reduce(&p);
        assert_eq!(results.len(), 1);
        let expect = pp("new b. ([a] 0 | [a] b?t.0)");
        assert!(congruent(&results[0], &expect, Mode::Untyped));
    }
}
