//! Reversible program IR and interpreter.
//!
//! A [`RevProgram`] is a finite tree of primitives, sequences, explicit
//! inverses, and the compute-copy-uncompute combinator [`ccu`]. Loop
//! bounds are fixed when a program is built, so inversion is purely
//! syntactic: running a program backward is running [`invert`] of it
//! forward.
//!
//! [`ccu`]: RevProgram::ccu
//! [`invert`]: RevProgram::invert

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::arena::{Arena, CellId, Primitive, ResourceReport};
use crate::error::{Result, RevError};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Node {
    Prim(Primitive),
    Seq(Vec<RevProgram>),
    Inverse(Box<RevProgram>),
    /// Runs compute, then copy, then the inverse of compute. The copy
    /// leg accumulates the computed values into cells compute never
    /// touches, so the uncompute leg sees exactly the state compute
    /// left and erases all of compute's intermediate writes.
    Ccu {
        compute: Box<RevProgram>,
        copy: Box<RevProgram>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevProgram {
    node: Node,
    label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl RevProgram {
    pub fn prim(p: Primitive) -> RevProgram {
        RevProgram {
            node: Node::Prim(p),
            label: None,
        }
    }

    pub fn seq(children: Vec<RevProgram>) -> RevProgram {
        RevProgram {
            node: Node::Seq(children),
            label: None,
        }
    }

    pub fn empty() -> RevProgram {
        RevProgram::seq(Vec::new())
    }

    /// Wraps a program so that executing the wrapper runs `p` backward.
    pub fn inverse(p: RevProgram) -> RevProgram {
        RevProgram {
            node: Node::Inverse(Box::new(p)),
            label: None,
        }
    }

    /// Builds a compute-copy-uncompute node.
    ///
    /// Rejected at construction: a copy leg containing anything but
    /// accumulating (Add*/Sub*) primitives, and a copy leg writing any
    /// cell the compute leg touches. Both would let the copy disturb
    /// state the uncompute leg relies on.
    pub fn ccu(compute: RevProgram, copy: RevProgram) -> Result<RevProgram> {
        if let Some(prim) = copy.first_non_accumulating() {
            return Err(RevError::CopyNotAdditive(prim.to_string()));
        }
        let touched = compute.touched();
        if let Some(cell) = copy.writes().iter().find(|c| touched.contains(c)) {
            return Err(RevError::CopyOverlap(format!(
                "copy writes {cell}, which the compute leg touches"
            )));
        }
        Ok(RevProgram {
            node: Node::Ccu {
                compute: Box::new(compute),
                copy: Box::new(copy),
            },
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> RevProgram {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Syntactic inverse: sequences reverse with inverted children,
    /// primitives flip to their paired kind, `Inverse(p)` unwraps to
    /// `p`, and `Ccu(c, k)` becomes `Ccu(c, invert(k))` (the uncompute
    /// scaffolding is self-inverse; only the copy direction flips).
    pub fn invert(&self) -> RevProgram {
        let node = match &self.node {
            Node::Prim(p) => Node::Prim(p.inverse()),
            Node::Seq(children) => {
                Node::Seq(children.iter().rev().map(RevProgram::invert).collect())
            }
            Node::Inverse(p) => return (**p).clone(),
            Node::Ccu { compute, copy } => Node::Ccu {
                compute: compute.clone(),
                copy: Box::new(copy.invert()),
            },
        };
        RevProgram {
            node,
            label: self.label.clone(),
        }
    }

    /// Primitive steps one forward run executes.
    pub fn forward_ops(&self) -> u64 {
        match &self.node {
            Node::Prim(_) => 1,
            Node::Seq(children) => children.iter().map(RevProgram::forward_ops).sum(),
            Node::Inverse(p) => p.forward_ops(),
            Node::Ccu { compute, copy } => 2 * compute.forward_ops() + copy.forward_ops(),
        }
    }

    /// Every cell written anywhere in the tree, including legs whose
    /// effect is later undone.
    pub fn writes(&self) -> BTreeSet<CellId> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, false);
        out
    }

    /// Every cell read or written anywhere in the tree.
    pub fn touched(&self) -> BTreeSet<CellId> {
        let mut out = BTreeSet::new();
        self.collect(&mut out, true);
        out
    }

    fn collect(&self, out: &mut BTreeSet<CellId>, include_reads: bool) {
        match &self.node {
            Node::Prim(p) => {
                out.extend(p.writes());
                if include_reads {
                    out.extend(p.reads());
                }
            }
            Node::Seq(children) => {
                for c in children {
                    c.collect(out, include_reads);
                }
            }
            Node::Inverse(p) => p.collect(out, include_reads),
            Node::Ccu { compute, copy } => {
                compute.collect(out, include_reads);
                copy.collect(out, include_reads);
            }
        }
    }

    fn first_non_accumulating(&self) -> Option<&Primitive> {
        match &self.node {
            Node::Prim(p) => (!p.is_accumulating()).then_some(p),
            Node::Seq(children) => children.iter().find_map(RevProgram::first_non_accumulating),
            Node::Inverse(p) => p.first_non_accumulating(),
            Node::Ccu { compute, copy } => compute
                .first_non_accumulating()
                .or_else(|| copy.first_non_accumulating()),
        }
    }

    /// Debug listing: one primitive per line, indented by tree depth,
    /// with block headers for labeled sequences, inverses, and ccu legs.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let header = |out: &mut String, kw: &str, label: &Option<String>| match label {
            Some(l) => writeln!(out, "{pad}{kw} \"{l}\" {{").unwrap(),
            None => writeln!(out, "{pad}{kw} {{").unwrap(),
        };
        match &self.node {
            Node::Prim(p) => {
                writeln!(out, "{pad}{p}").unwrap();
            }
            Node::Seq(children) => {
                // an unlabeled sequence is a transparent container
                if self.label.is_none() {
                    for c in children {
                        c.render_into(out, depth);
                    }
                } else {
                    header(out, "seq", &self.label);
                    for c in children {
                        c.render_into(out, depth + 1);
                    }
                    writeln!(out, "{pad}}}").unwrap();
                }
            }
            Node::Inverse(p) => {
                header(out, "inverse", &self.label);
                p.render_into(out, depth + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
            Node::Ccu { compute, copy } => {
                header(out, "ccu", &self.label);
                writeln!(out, "{pad}  compute {{").unwrap();
                compute.render_into(out, depth + 2);
                writeln!(out, "{pad}  }}").unwrap();
                writeln!(out, "{pad}  copy {{").unwrap();
                copy.render_into(out, depth + 2);
                writeln!(out, "{pad}  }}").unwrap();
                writeln!(out, "{pad}}}").unwrap();
            }
        }
    }
}

/// Executes a program against an arena and reports the resources the
/// run used. `Backward` is exactly a forward run of the inverted
/// program. Errors abort without rollback and carry the failing node's
/// path (e.g. `3/compute/0`) plus the nearest enclosing label.
pub fn run(arena: &mut Arena, prog: &RevProgram, direction: Direction) -> Result<ResourceReport> {
    let inverted;
    let effective = match direction {
        Direction::Forward => prog,
        Direction::Backward => {
            inverted = prog.invert();
            &inverted
        }
    };
    let meter = arena.begin_meter();
    let outcome = Interp {
        arena,
        path: Vec::new(),
        labels: Vec::new(),
    }
    .exec(effective);
    let report = arena.end_meter(meter);
    outcome.map(|()| report)
}

struct Interp<'a> {
    arena: &'a mut Arena,
    path: Vec<String>,
    labels: Vec<String>,
}

impl Interp<'_> {
    fn exec(&mut self, prog: &RevProgram) -> Result<()> {
        if let Some(l) = prog.label() {
            self.labels.push(l.to_string());
        }
        let result = self.exec_node(&prog.node);
        if prog.label().is_some() && result.is_ok() {
            self.labels.pop();
        }
        result
    }

    fn exec_node(&mut self, node: &Node) -> Result<()> {
        match node {
            Node::Prim(p) => self.arena.step(p).map_err(|e| self.annotate(e)),
            Node::Seq(children) => {
                for (i, child) in children.iter().enumerate() {
                    self.scoped(i.to_string(), |s| s.exec(child))?;
                }
                Ok(())
            }
            Node::Inverse(p) => {
                let inv = p.invert();
                self.scoped("inv".to_string(), |s| s.exec(&inv))
            }
            Node::Ccu { compute, copy } => {
                let written: Vec<CellId> = compute.writes().into_iter().collect();
                let before: Vec<Rational> = written
                    .iter()
                    .map(|&c| self.arena.value(c))
                    .collect::<Result<_>>()
                    .map_err(|e| self.annotate(e))?;
                self.scoped("compute".to_string(), |s| s.exec(compute))?;
                self.scoped("copy".to_string(), |s| s.exec(copy))?;
                let uncompute = compute.invert();
                self.scoped("uncompute".to_string(), |s| s.exec(&uncompute))?;
                let mismatched = written
                    .iter()
                    .zip(&before)
                    .filter(|&(&c, old)| self.arena.read(c).map(|now| now != old).unwrap_or(true))
                    .count();
                self.arena.note_garbage(mismatched);
                Ok(())
            }
        }
    }

    fn scoped(&mut self, seg: String, f: impl FnOnce(&mut Self) -> Result<()>) -> Result<()> {
        self.path.push(seg);
        let result = f(self);
        if result.is_ok() {
            self.path.pop();
        }
        result
    }

    fn annotate(&self, source: RevError) -> RevError {
        if matches!(source, RevError::Program { .. }) {
            return source;
        }
        let path = if self.path.is_empty() {
            ".".to_string()
        } else {
            self.path.join("/")
        };
        RevError::Program {
            path,
            label: self.labels.last().cloned(),
            source: Box::new(source),
        }
    }
}

/// Reports from a forward-then-backward pair over the same program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrip {
    pub forward: ResourceReport,
    pub backward: ResourceReport,
}

/// Runs `prog` forward then backward and verifies every cell is
/// restored bit-exactly. A surviving difference is reported as a
/// [`RevError::GarbageLeak`] on the first offending cell.
pub fn verify_roundtrip(arena: &mut Arena, prog: &RevProgram) -> Result<RoundTrip> {
    let snap = arena.snapshot();
    let forward = run(arena, prog, Direction::Forward)?;
    let backward = run(arena, prog, Direction::Backward)?;
    if let Some(&cell) = snap.diff(arena).first() {
        let value = arena.value(cell).unwrap_or_else(|_| Rational::zero());
        return Err(RevError::GarbageLeak { cell, value });
    }
    Ok(RoundTrip { forward, backward })
}
