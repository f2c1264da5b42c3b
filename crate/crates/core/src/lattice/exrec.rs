//! Extended-rectangle assembly on the line.
//!
//! Every logical qubit owns a region of three blocks. Error correction is
//! pass-through: the data block trades places with a freshly encoded
//! ancilla, so after each extraction it sits one block further along.

use super::builders::*;
use super::circuit::*;
use crate::census::{Gadget, PerKind};

/// Duration of each gadget's exRec in memory exRecs.
pub fn depth_ratio(g: Gadget) -> usize {
    match g {
        Gadget::Memory | Gadget::Swap => 1,
        Gadget::TGate => 5,
        Gadget::Readout => 2,
    }
}

/// Scheduling state of one three-block region.
#[derive(Clone, Debug)]
struct Region {
    base: u32,
    data_slot: usize,
    /// First layer at which each slot may hold a new ancilla.
    free: [usize; 3],
    /// Slots that must not be used as ancilla.
    blocked: [bool; 3],
    data_ready: usize,
    block: Option<u16>,
}

impl Region {
    fn new(base: u32, data_slot: usize, block: Option<u16>) -> Self {
        let mut free = [0; 3];
        free[data_slot] = usize::MAX;
        Region {
            base,
            data_slot,
            free,
            blocked: [false; 3],
            data_ready: 0,
            block,
        }
    }

    fn col(&self, slot: usize) -> u32 {
        self.base + BLOCK * slot as u32
    }

    /// One extraction with whichever neighbouring slot allows the earliest start.
    fn extract(&mut self, c: &mut Circuit, kind: SyndromeKind) -> Result<(), LayoutError> {
        let lead = ancilla_lead(kind);
        let s = [self.data_slot.wrapping_sub(1), self.data_slot + 1]
            .into_iter()
            .filter(|&s| s < 3 && !self.blocked[s] && self.free[s] != usize::MAX)
            .min_by_key(|&s| self.data_ready.max(self.free[s] + lead))
            .ok_or_else(|| LayoutError::Violation("no ancilla slot next to the data".into()))?;
        let t = place_extraction(
            c,
            kind,
            self.block,
            self.col(self.data_slot),
            self.col(s),
            self.data_ready,
            self.free[s],
        )?;
        self.free[self.data_slot] = t.ancilla_done;
        self.free[s] = usize::MAX;
        self.data_slot = s;
        self.data_ready = t.data_ready;
        Ok(())
    }

    fn ec(&mut self, c: &mut Circuit) -> Result<(), LayoutError> {
        self.extract(c, SyndromeKind::X)?;
        self.extract(c, SyndromeKind::Z)
    }
}

fn region_circuit(regions: &[(u16, usize)]) -> (Circuit, Vec<Region>) {
    let mut c = Circuit::empty(Granularity::Logical, 3 * BLOCK * regions.len() as u32);
    let n = regions.len() as u16;
    for (i, &(data, slot)) in regions.iter().enumerate() {
        let base = 3 * BLOCK * i as u32;
        c.label_line(
            data,
            BlockKind::Data,
            base + BLOCK * slot as u32..base + BLOCK * (slot as u32 + 1),
        );
    }
    let mut next = n;
    let mut rs = Vec::new();
    for (i, &(data, slot)) in regions.iter().enumerate() {
        let base = 3 * BLOCK * i as u32;
        for s in (0..3).filter(|&s| s != slot) {
            c.label_line(
                next,
                BlockKind::Ancilla,
                base + BLOCK * s as u32..base + BLOCK * (s as u32 + 1),
            );
            next += 1;
        }
        rs.push(Region::new(base, slot, Some(data)));
    }
    (c, rs)
}

fn leading(c: &mut Circuit, rs: &mut [Region]) -> Result<usize, LayoutError> {
    for r in rs.iter_mut() {
        r.ec(c)?;
    }
    Ok(rs.iter().map(|r| r.data_ready).max().unwrap())
}

fn transversal(c: &mut Circuit, t: usize, col: u32, kind: OpKind) -> Result<(), LayoutError> {
    for i in 0..BLOCK {
        c.put(t, Operation::one(kind, Site::line(col + i)))?;
    }
    Ok(())
}

fn memory() -> Result<Circuit, LayoutError> {
    let (mut c, mut rs) = region_circuit(&[(0, 0)]);
    let g = leading(&mut c, &mut rs)?;
    let r = &mut rs[0];
    transversal(&mut c, g, r.col(r.data_slot), OpKind::Identity)?;
    r.data_ready = g + 1;
    r.ec(&mut c)?;
    Ok(c)
}

fn swap() -> Result<Circuit, LayoutError> {
    // The second region is mirrored so the data blocks meet in the middle.
    let (mut c, mut rs) = region_circuit(&[(0, 0), (1, 2)]);
    let g = leading(&mut c, &mut rs)?;
    let (left, right) = (rs[0].col(rs[0].data_slot), rs[1].col(rs[1].data_slot));
    if right != left + BLOCK {
        return Err(LayoutError::Violation(
            "data blocks are not adjacent".into(),
        ));
    }
    let len = place_pass(&mut c, g, left, PassGate::Exchange)?;
    let (b0, b1) = (rs[0].block, rs[1].block);
    rs[0].block = b1;
    rs[1].block = b0;
    for r in rs.iter_mut() {
        r.data_ready = g + len;
        r.ec(&mut c)?;
    }
    Ok(c)
}

fn readout() -> Result<Circuit, LayoutError> {
    let (mut c, mut rs) = region_circuit(&[(0, 0)]);
    let g = leading(&mut c, &mut rs)?;
    let r = &mut rs[0];
    let col = r.col(r.data_slot);
    let recs = c.put_measurements(g, &(col..col + BLOCK).collect::<Vec<_>>())?;
    c.readouts.push(ReadoutMark {
        data_block: 0,
        records: recs.try_into().unwrap(),
    });
    transversal(&mut c, g + 1, col, OpKind::PrepZero)?;
    r.data_ready = g + 2;
    // Measuring the X stabilizers of |0...0> leaves |0_L>.
    r.extract(&mut c, SyndromeKind::X)?;
    c.extractions.last_mut().unwrap().fresh = true;
    r.ec(&mut c)?;
    Ok(c)
}

/// The T gadget with the largest location count: two cat-state
/// measurements of the conjugated X on the magic-state block, error
/// correction of that block, teleportation into the data and the
/// classically controlled S and X.
fn t_skeleton() -> Result<Circuit, LayoutError> {
    let (mut c, mut rs) = region_circuit(&[(0, 0)]);
    let g = leading(&mut c, &mut rs)?;
    let d = &mut rs[0];
    debug_assert_eq!(d.data_slot, 2);
    let mut free = d.free;
    let col = |s: usize| BLOCK * s as u32;
    // Magic-state block starts as |+_L> in slot 1.
    let mut sa = 1usize;
    let t_a = g.max(free[sa]);
    c.place(&build_encode(), t_a, col(sa))?;
    transversal(&mut c, t_a + ENCODE_DEPTH, col(sa), OpKind::H)?;
    let mut a_ready = t_a + ENCODE_DEPTH + 1;
    free[sa] = usize::MAX;
    for _ in 0..2 {
        let sc = 1 - sa;
        let cat = build_cat_prep();
        let p = a_ready.max(free[sc] + cat.depth());
        c.place(&cat, p - cat.depth(), col(sc))?;
        let len = place_pass(
            &mut c,
            p,
            col(0),
            PassGate::ConjugatedCnot {
                control_left: sc < sa,
            },
        )?;
        let m = build_cat_measure();
        let base = c.place(&m, p + len, col(sa))?;
        let fix = p + len + m.depth();
        for i in 0..BLOCK {
            c.put(
                fix,
                Operation::controlled(ControlledGate::Z, Site::line(col(sc) + i), base + 3),
            )?;
        }
        free[sa] = fix;
        free[sc] = usize::MAX;
        sa = sc;
        a_ready = fix + 1;
    }
    let mut a = Region {
        base: 0,
        data_slot: sa,
        free,
        blocked: [false, false, true],
        data_ready: a_ready,
        block: None,
    };
    a.ec(&mut c)?;
    if a.data_slot != 1 {
        return Err(LayoutError::Violation(
            "magic-state block ended away from the data".into(),
        ));
    }
    let p = a.data_ready.max(g);
    let len = place_pass(
        &mut c,
        p,
        col(1),
        PassGate::Cnot {
            control_left: false,
        },
    )?;
    let recs = c.put_measurements(p + len, &(col(2)..col(2) + BLOCK).collect::<Vec<_>>())?;
    transversal_controlled(&mut c, p + len + 1, col(1), ControlledGate::S, recs[0])?;
    transversal_controlled(&mut c, p + len + 2, col(1), ControlledGate::X, recs[0])?;
    let mut free = a.free;
    free[1] = usize::MAX;
    free[2] = p + len + 1;
    let mut r = Region {
        base: 0,
        data_slot: 1,
        free,
        blocked: [false; 3],
        data_ready: p + len + 3,
        block: Some(0),
    };
    r.ec(&mut c)?;
    Ok(c)
}

fn transversal_controlled(
    c: &mut Circuit,
    t: usize,
    col: u32,
    g: ControlledGate,
    rec: u32,
) -> Result<(), LayoutError> {
    for i in 0..BLOCK {
        c.put(t, Operation::controlled(g, Site::line(col + i), rec))?;
    }
    Ok(())
}

/// The exRec of `g` at logical granularity without synchronisation padding.
pub fn natural_exrec(g: Gadget) -> Result<Circuit, LayoutError> {
    match g {
        Gadget::Memory => memory(),
        Gadget::Swap => swap(),
        Gadget::Readout => readout(),
        Gadget::TGate => t_skeleton(),
    }
}

/// Idle layers each gadget needs so durations keep the fixed ratios; `(gate-time, readout-time)` per gadget.
pub fn synchronization_padding(durations: &PerKind<(usize, usize)>) -> PerKind<(usize, usize)> {
    let unit = |f: fn(&(usize, usize)) -> usize| {
        Gadget::ALL
            .iter()
            .map(|&g| f(&durations[g]).div_ceil(depth_ratio(g)))
            .max()
            .unwrap()
    };
    let (ub, ul) = (unit(|d| d.0), unit(|d| d.1));
    PerKind::from_fn(|g| {
        let r = depth_ratio(g);
        (r * ub - durations[g].0, r * ul - durations[g].1)
    })
}

/// All four exRecs at the requested granularity, padded at the end so
/// their durations are `D`, `D`, `5D` and `2D`. At logical
/// granularity every layer counts as one time step.
pub fn synchronized_exrecs(granularity: Granularity) -> Result<PerKind<Circuit>, LayoutError> {
    let mut cs = Vec::new();
    for g in Gadget::ALL {
        let c = natural_exrec(g)?;
        cs.push(match granularity {
            Granularity::Logical => c,
            Granularity::Physical => c.lower(),
        });
    }
    let mut circuits = PerKind::from_fn(|g| cs[g.index()].clone());
    let durations = PerKind::from_fn(|g| {
        let c = &circuits[g];
        match granularity {
            Granularity::Logical => (c.depth(), 0),
            Granularity::Physical => c.duration(),
        }
    });
    let pad = synchronization_padding(&durations);
    for g in Gadget::ALL {
        circuits[g].pad(pad[g].0, pad[g].1);
    }
    Ok(circuits)
}

/// The synchronised exRec of `g` at logical granularity.
pub fn assemble_exrec(g: Gadget) -> Result<Circuit, LayoutError> {
    Ok(synchronized_exrecs(Granularity::Logical)?[g].clone())
}
