//! Reversible cell store.
//!
//! All engine state lives in an [`Arena`] of rational-valued cells
//! addressed by [`CellId`] handles. The only way to change a cell is
//! [`Arena::step`] with one of the eleven [`Primitive`] operations, each
//! of which is a bijection on the store (given fixed operand cells), so
//! any sequence of steps can be undone by replaying the inverses in
//! reverse order.
//!
//! The arena also keeps the resource meters. Metering is observational:
//! opening or closing a window never changes execution. Windows nest;
//! every alloc, free, step, and garbage note is folded into all open
//! windows.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RevError};
use crate::rational::Rational;

/// Handle to one cell. Plain slot index; freed indices are recycled, so
/// a handle must not be used after the cell it names is freed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId(pub(crate) usize);

impl CellId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// The invertible step set.
///
/// Each variant comes paired with its inverse (`AddConst`/`SubConst`,
/// `Scale`/`Unscale`, ...); `Swap` is its own inverse. Destinations may
/// not alias source operands, otherwise the step would not be a
/// bijection (`x += x * y` loses information when `y = -1`). The two
/// sources of `AddMul`/`AddDiv` may coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    /// dst += k
    AddConst { dst: CellId, k: Rational },
    /// dst -= k
    SubConst { dst: CellId, k: Rational },
    /// dst += k * src
    AddScaled { dst: CellId, src: CellId, k: Rational },
    /// dst -= k * src
    SubScaled { dst: CellId, src: CellId, k: Rational },
    /// dst += a * b
    AddMul { dst: CellId, a: CellId, b: CellId },
    /// dst -= a * b
    SubMul { dst: CellId, a: CellId, b: CellId },
    /// dst += num / den; den must be nonzero
    AddDiv { dst: CellId, num: CellId, den: CellId },
    /// dst -= num / den; den must be nonzero
    SubDiv { dst: CellId, num: CellId, den: CellId },
    /// dst *= by; by must be nonzero
    Scale { dst: CellId, by: CellId },
    /// dst /= by; by must be nonzero
    Unscale { dst: CellId, by: CellId },
    /// exchange a and b
    Swap { a: CellId, b: CellId },
}

impl Primitive {
    pub fn inverse(&self) -> Primitive {
        use Primitive::*;
        match self.clone() {
            AddConst { dst, k } => SubConst { dst, k },
            SubConst { dst, k } => AddConst { dst, k },
            AddScaled { dst, src, k } => SubScaled { dst, src, k },
            SubScaled { dst, src, k } => AddScaled { dst, src, k },
            AddMul { dst, a, b } => SubMul { dst, a, b },
            SubMul { dst, a, b } => AddMul { dst, a, b },
            AddDiv { dst, num, den } => SubDiv { dst, num, den },
            SubDiv { dst, num, den } => AddDiv { dst, num, den },
            Scale { dst, by } => Unscale { dst, by },
            Unscale { dst, by } => Scale { dst, by },
            Swap { a, b } => Swap { a, b },
        }
    }

    /// Cells the step writes.
    pub fn writes(&self) -> Vec<CellId> {
        use Primitive::*;
        match *self {
            AddConst { dst, .. } | SubConst { dst, .. } => vec![dst],
            AddScaled { dst, .. } | SubScaled { dst, .. } => vec![dst],
            AddMul { dst, .. } | SubMul { dst, .. } => vec![dst],
            AddDiv { dst, .. } | SubDiv { dst, .. } => vec![dst],
            Scale { dst, .. } | Unscale { dst, .. } => vec![dst],
            Swap { a, b } => vec![a, b],
        }
    }

    /// Cells the step reads without writing.
    pub fn reads(&self) -> Vec<CellId> {
        use Primitive::*;
        match *self {
            AddConst { .. } | SubConst { .. } => vec![],
            AddScaled { src, .. } | SubScaled { src, .. } => vec![src],
            AddMul { a, b, .. } | SubMul { a, b, .. } => vec![a, b],
            AddDiv { num, den, .. } | SubDiv { num, den, .. } => vec![num, den],
            Scale { by, .. } | Unscale { by, .. } => vec![by],
            Swap { .. } => vec![],
        }
    }

    pub fn touched(&self) -> Vec<CellId> {
        let mut all = self.writes();
        all.extend(self.reads());
        all
    }

    /// True for the `dst op= f(sources, k)` family whose effect on `dst`
    /// is adding or subtracting a quantity independent of `dst`. These
    /// are the only steps allowed in a copy leg: they commute with the
    /// uncompute of the values they read.
    pub fn is_accumulating(&self) -> bool {
        use Primitive::*;
        !matches!(self, Scale { .. } | Unscale { .. } | Swap { .. })
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Primitive::*;
        match self {
            AddConst { dst, k } => write!(f, "ADDCONST {dst} += {k}"),
            SubConst { dst, k } => write!(f, "SUBCONST {dst} -= {k}"),
            AddScaled { dst, src, k } => write!(f, "ADDSCALED {dst} += {k} * {src}"),
            SubScaled { dst, src, k } => write!(f, "SUBSCALED {dst} -= {k} * {src}"),
            AddMul { dst, a, b } => write!(f, "ADDMUL {dst} += {a} * {b}"),
            SubMul { dst, a, b } => write!(f, "SUBMUL {dst} -= {a} * {b}"),
            AddDiv { dst, num, den } => write!(f, "ADDDIV {dst} += {num} / {den}"),
            SubDiv { dst, num, den } => write!(f, "SUBDIV {dst} -= {num} / {den}"),
            Scale { dst, by } => write!(f, "SCALE {dst} *= {by}"),
            Unscale { dst, by } => write!(f, "UNSCALE {dst} /= {by}"),
            Swap { a, b } => write!(f, "SWAP {a} <-> {b}"),
        }
    }
}

/// Resource usage observed by one meter window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    /// Primitive steps executed inside the window.
    pub primitive_ops: u64,
    /// Maximum number of simultaneously live cells.
    pub peak_live_cells: usize,
    /// Cells still live when the window closed.
    pub persistent_cells: usize,
    /// `peak_live_cells - persistent_cells`: scratch the computation
    /// needed beyond what it kept.
    pub transient_peak: usize,
    /// Restore mismatches detected by compute-copy-uncompute checks.
    /// Zero for a correctly reversible run.
    pub garbage_cells: usize,
    /// Largest numerator/denominator bit-width produced in the window.
    pub max_bits: u64,
}

/// Ticket returned by [`Arena::begin_meter`]. Windows close in LIFO
/// order.
#[must_use]
#[derive(Debug)]
pub struct MeterHandle {
    start_ops: u64,
    depth: usize,
}

/// Copy of all live cell values, used for round-trip verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    cells: Vec<(CellId, Rational)>,
}

impl Snapshot {
    /// Cells whose value changed, vanished, or appeared since the
    /// snapshot was taken. Empty means the state is fully restored.
    pub fn diff(&self, arena: &Arena) -> Vec<CellId> {
        let mut changed = Vec::new();
        let mut snap = self.cells.iter().peekable();
        for (idx, slot) in arena.slots.iter().enumerate() {
            let id = CellId(idx);
            let recorded = match snap.peek() {
                Some((c, v)) if *c == id => {
                    snap.next();
                    Some(v)
                }
                _ => None,
            };
            match (recorded, slot) {
                (Some(v), Some(now)) if v == now => {}
                (None, None) => {}
                _ => changed.push(id),
            }
        }
        changed
    }
}

#[derive(Debug, Default)]
pub struct Arena {
    slots: Vec<Option<Rational>>,
    free_list: Vec<usize>,
    live_count: usize,
    peak_live: usize,
    op_count: u64,
    max_bits: u64,
    bit_limit: Option<u64>,
    window_peaks: Vec<usize>,
    window_bits: Vec<u64>,
    window_garbage: Vec<usize>,
}

impl Arena {
    pub fn new() -> Arena {
        Arena::default()
    }

    pub fn with_bit_limit(limit: u64) -> Arena {
        Arena {
            bit_limit: Some(limit),
            ..Arena::default()
        }
    }

    pub fn set_bit_limit(&mut self, limit: Option<u64>) {
        self.bit_limit = limit;
    }

    pub fn bit_limit(&self) -> Option<u64> {
        self.bit_limit
    }

    /// Allocates a fresh zero-valued cell. The handle never aliases a
    /// cell that is currently live.
    pub fn alloc(&mut self) -> CellId {
        let idx = match self.free_list.pop() {
            Some(idx) => {
                self.slots[idx] = Some(Rational::zero());
                idx
            }
            None => {
                self.slots.push(Some(Rational::zero()));
                self.slots.len() - 1
            }
        };
        self.live_count += 1;
        let live = self.live_count;
        self.peak_live = self.peak_live.max(live);
        for w in &mut self.window_peaks {
            *w = (*w).max(live);
        }
        CellId(idx)
    }

    pub fn alloc_n(&mut self, n: usize) -> Vec<CellId> {
        (0..n).map(|_| self.alloc()).collect()
    }

    /// Releases a cell. The cell must hold zero: a reversible
    /// computation that wants to drop a value has to uncompute it first,
    /// and freeing anything else is a garbage leak.
    pub fn free(&mut self, id: CellId) -> Result<()> {
        let value = self.read(id)?;
        if !value.is_zero() {
            return Err(RevError::GarbageLeak {
                cell: id,
                value: value.clone(),
            });
        }
        self.slots[id.0] = None;
        self.free_list.push(id.0);
        self.live_count -= 1;
        Ok(())
    }

    pub fn free_all(&mut self, ids: &[CellId]) -> Result<()> {
        for &id in ids {
            self.free(id)?;
        }
        Ok(())
    }

    pub fn is_live(&self, id: CellId) -> bool {
        self.slots.get(id.0).is_some_and(|s| s.is_some())
    }

    pub fn read(&self, id: CellId) -> Result<&Rational> {
        self.slots
            .get(id.0)
            .and_then(|s| s.as_ref())
            .ok_or(RevError::InvalidCell(id))
    }

    pub fn value(&self, id: CellId) -> Result<Rational> {
        self.read(id).cloned()
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }

    pub fn peak_live(&self) -> usize {
        self.peak_live
    }

    pub fn op_count(&self) -> u64 {
        self.op_count
    }

    pub fn max_bits(&self) -> u64 {
        self.max_bits
    }

    /// Executes one primitive. On error nothing is mutated and nothing
    /// is counted; the checks run in a fixed order: liveness, aliasing,
    /// zero divisor/multiplier, bit budget.
    pub fn step(&mut self, prim: &Primitive) -> Result<()> {
        use Primitive::*;
        for id in prim.touched() {
            self.read(id)?;
        }
        let writes = prim.writes();
        if let Some(src) = prim.reads().into_iter().find(|s| writes.contains(s)) {
            return Err(RevError::AliasViolation { dst: writes[0], src });
        }

        let new = match prim {
            AddConst { dst, k } => Some((*dst, self.read(*dst)? + k)),
            SubConst { dst, k } => Some((*dst, self.read(*dst)? - k)),
            AddScaled { dst, src, k } => {
                let scaled = k * self.read(*src)?;
                Some((*dst, self.read(*dst)? + &scaled))
            }
            SubScaled { dst, src, k } => {
                let scaled = k * self.read(*src)?;
                Some((*dst, self.read(*dst)? - &scaled))
            }
            AddMul { dst, a, b } => {
                let prod = self.read(*a)? * self.read(*b)?;
                Some((*dst, self.read(*dst)? + &prod))
            }
            SubMul { dst, a, b } => {
                let prod = self.read(*a)? * self.read(*b)?;
                Some((*dst, self.read(*dst)? - &prod))
            }
            AddDiv { dst, num, den } => {
                let d = self.read(*den)?;
                if d.is_zero() {
                    return Err(RevError::DivideByZero { divisor: *den });
                }
                let quot = self.read(*num)? / d;
                Some((*dst, self.read(*dst)? + &quot))
            }
            SubDiv { dst, num, den } => {
                let d = self.read(*den)?;
                if d.is_zero() {
                    return Err(RevError::DivideByZero { divisor: *den });
                }
                let quot = self.read(*num)? / d;
                Some((*dst, self.read(*dst)? - &quot))
            }
            Scale { dst, by } => {
                let factor = self.read(*by)?;
                if factor.is_zero() {
                    return Err(RevError::NonInvertible { multiplier: *by });
                }
                Some((*dst, self.read(*dst)? * factor))
            }
            Unscale { dst, by } => {
                let factor = self.read(*by)?;
                if factor.is_zero() {
                    return Err(RevError::NonInvertible { multiplier: *by });
                }
                Some((*dst, self.read(*dst)? / factor))
            }
            Swap { .. } => None,
        };

        match new {
            Some((dst, value)) => {
                let bits = value.bits();
                if let Some(limit) = self.bit_limit {
                    if bits > limit {
                        return Err(RevError::BitLimitExceeded {
                            limit,
                            observed: bits,
                        });
                    }
                }
                debug_assert!(value.is_canonical());
                self.note_bits(bits);
                self.slots[dst.0] = Some(value);
            }
            None => {
                let Swap { a, b } = prim else { unreachable!() };
                if a != b {
                    self.slots.swap(a.0, b.0);
                }
                let bits = self.read(*a)?.bits().max(self.read(*b)?.bits());
                self.note_bits(bits);
            }
        }
        self.op_count += 1;
        Ok(())
    }

    fn note_bits(&mut self, bits: u64) {
        self.max_bits = self.max_bits.max(bits);
        for w in &mut self.window_bits {
            *w = (*w).max(bits);
        }
    }

    /// Records restore mismatches found by a compute-copy-uncompute
    /// check. Called by the program interpreter.
    pub(crate) fn note_garbage(&mut self, cells: usize) {
        for w in &mut self.window_garbage {
            *w += cells;
        }
    }

    pub fn begin_meter(&mut self) -> MeterHandle {
        self.window_peaks.push(self.live_count);
        self.window_bits.push(0);
        self.window_garbage.push(0);
        MeterHandle {
            start_ops: self.op_count,
            depth: self.window_peaks.len(),
        }
    }

    pub fn end_meter(&mut self, handle: MeterHandle) -> ResourceReport {
        assert_eq!(
            handle.depth,
            self.window_peaks.len(),
            "meter windows must close in LIFO order"
        );
        let peak_live_cells = self.window_peaks.pop().unwrap();
        let max_bits = self.window_bits.pop().unwrap();
        let garbage_cells = self.window_garbage.pop().unwrap();
        let persistent_cells = self.live_count;
        ResourceReport {
            primitive_ops: self.op_count - handle.start_ops,
            peak_live_cells,
            persistent_cells,
            transient_peak: peak_live_cells - persistent_cells,
            garbage_cells,
            max_bits,
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            cells: self
                .slots
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.as_ref().map(|v| (CellId(i), v.clone())))
                .collect(),
        }
    }
}
