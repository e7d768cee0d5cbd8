//! Fused K1-K6 pass over one rectangular block of output cells.
//!
//! The block stages committed state with a `halo`-wide border (ghost values
//! where the border leaves the domain), predicts `U*` on the block plus a
//! one-cell ring, then corrects the block itself. Tiles and decomposed bands
//! are both blocks; they differ only in size and in where the staged rows
//! come from.

use super::{BlockStats, Fault, Stage, StateView, StepInputs};
use crate::grid::Edge;
use crate::scheme::{predictor_cell_bc, CellVec, SweepDirection};
use crate::timestep::{cell_dt_limit, cell_is_legal};

/// Half-open output rectangle in global cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Region {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl Region {
    pub fn width(&self) -> usize {
        self.i1 - self.i0
    }
    pub fn height(&self) -> usize {
        self.j1 - self.j0
    }
    pub fn cells(&self) -> usize {
        self.width() * self.height()
    }
}

#[derive(Default)]
pub(crate) struct BlockScratch {
    stage: Vec<CellVec>,
    star: Vec<CellVec>,
}

/// Local rectangular buffer indexed by signed global coordinates.
struct Frame {
    gi0: isize,
    gj0: isize,
    w: usize,
}

impl Frame {
    #[inline]
    fn at(&self, gi: isize, gj: isize) -> usize {
        (gj - self.gj0) as usize * self.w + (gi - self.gi0) as usize
    }
}

/// Which ghost, if any, sits at `(gi, gj)`: the edge and the adjacent interior cell.
#[inline]
fn ghost_site(gi: isize, gj: isize, nx: isize, ny: isize) -> Option<(Edge, usize, usize)> {
    let in_x = (0..nx).contains(&gi);
    let in_y = (0..ny).contains(&gj);
    match (in_x, in_y) {
        (false, true) if gi == -1 => Some((Edge::West, 0, gj as usize)),
        (false, true) if gi == nx => Some((Edge::East, (nx - 1) as usize, gj as usize)),
        (true, false) if gj == -1 => Some((Edge::South, gi as usize, 0)),
        (true, false) if gj == ny => Some((Edge::North, gi as usize, (ny - 1) as usize)),
        _ => None,
    }
}

/// Runs the fused step for `region`, writing its new cells row-major into `out`.
pub(crate) fn advance_block(
    inp: &StepInputs,
    view: StateView,
    region: Region,
    halo: usize,
    scratch: &mut BlockScratch,
    out: &mut [CellVec],
) -> Result<BlockStats, Fault> {
    debug_assert_eq!(out.len(), region.cells());
    let nx = inp.spec.nx as isize;
    let ny = inp.spec.ny as isize;
    let idx = |i: usize, j: usize| j * inp.spec.nx + i;
    let mut clamped = false;

    // K1: stage committed state plus halo.
    let h = halo as isize;
    let stage = Frame { gi0: region.i0 as isize - h, gj0: region.j0 as isize - h, w: region.width() + 2 * halo };
    let stage_h = region.height() + 2 * halo;
    scratch.stage.clear();
    scratch.stage.resize(stage.w * stage_h, CellVec::NAN);
    for b in 0..stage_h as isize {
        let gj = stage.gj0 + b;
        for a in 0..stage.w as isize {
            let gi = stage.gi0 + a;
            let slot = stage.at(gi, gj);
            if (0..nx).contains(&gi) && (0..ny).contains(&gj) {
                scratch.stage[slot] = view.cell(gi as usize, gj as usize);
            } else if let Some((edge, ii, jj)) = ghost_site(gi, gj, nx, ny) {
                let (g, c) = inp.ghost(edge, view.cell(ii, jj), idx(ii, jj));
                scratch.stage[slot] = g;
                clamped |= c;
            }
        }
    }
    let staged = &scratch.stage;

    // K2: predictor on the block and a one-cell ring. With a one-cell halo
    // the ring cannot be predicted and keeps the committed value.
    let star = Frame { gi0: region.i0 as isize - 1, gj0: region.j0 as isize - 1, w: region.width() + 2 };
    let star_h = region.height() + 2;
    scratch.star.clear();
    scratch.star.resize(star.w * star_h, CellVec::NAN);
    let (ox, oy) = match inp.dir {
        SweepDirection::Forward => (1isize, 1isize),
        SweepDirection::Backward => (-1, -1),
    };
    for b in 0..star_h as isize {
        let gj = star.gj0 + b;
        if !(0..ny).contains(&gj) {
            continue;
        }
        for a in 0..star.w as isize {
            let gi = star.gi0 + a;
            if !(0..nx).contains(&gi) {
                continue;
            }
            let in_block = (region.i0 as isize..region.i1 as isize).contains(&gi)
                && (region.j0 as isize..region.j1 as isize).contains(&gj);
            let k = idx(gi as usize, gj as usize);
            let slot = star.at(gi, gj);
            if in_block || halo >= 2 {
                let r = predictor_cell_bc(
                    &inp.ctx,
                    staged[stage.at(gi, gj)],
                    staged[stage.at(gi + ox, gj)],
                    staged[stage.at(gi, gj + oy)],
                    inp.slope(k),
                    inp.dir,
                    inp.predictor_faces(gi as usize, gj as usize),
                );
                match r {
                    Ok(v) => scratch.star[slot] = v,
                    Err(e) => return Err(Fault { stage: Stage::Predictor, k, detail: Some(e) }),
                }
            } else {
                scratch.star[slot] = staged[stage.at(gi, gj)];
            }
        }
    }

    // K3: ghosts of U* where the ring leaves the domain.
    for b in 0..star_h as isize {
        let gj = star.gj0 + b;
        for a in 0..star.w as isize {
            let gi = star.gi0 + a;
            if let Some((edge, ii, jj)) = ghost_site(gi, gj, nx, ny) {
                let interior = scratch.star[star.at(ii as isize, jj as isize)];
                let (g, c) = inp.ghost(edge, interior, idx(ii, jj));
                scratch.star[star.at(gi, gj)] = g;
                clamped |= c;
            }
        }
    }
    let pred = &scratch.star;

    // K4: corrector (plus smoothing) on the block.
    for gj in region.j0..region.j1 {
        let gjs = gj as isize;
        for gi in region.i0..region.i1 {
            let gis = gi as isize;
            let k = idx(gi, gj);
            let old = staged[stage.at(gis, gjs)];
            let ring = [
                staged[stage.at(gis + 1, gjs)],
                staged[stage.at(gis - 1, gjs)],
                staged[stage.at(gis, gjs + 1)],
                staged[stage.at(gis, gjs - 1)],
            ];
            let r = inp.finish_cell(
                k,
                old,
                pred[star.at(gis, gjs)],
                pred[star.at(gis - ox, gjs)],
                pred[star.at(gis, gjs - oy)],
                ring,
            );
            match r {
                Ok(v) => out[(gj - region.j0) * region.width() + gi - region.i0] = v,
                Err(e) => return Err(Fault { stage: Stage::Corrector, k, detail: Some(e) }),
            }
        }
    }

    // K5: guard, first offender in row-major order.
    for (n, c) in out.iter().enumerate() {
        if !cell_is_legal(*c, inp.ctx.h_min) {
            let (a, b) = (n % region.width(), n / region.width());
            return Err(Fault { stage: Stage::Guard, k: idx(region.i0 + a, region.j0 + b), detail: None });
        }
    }

    // K6: local CFL limit.
    let mut dt_limit = f64::INFINITY;
    for (n, c) in out.iter().enumerate() {
        match cell_dt_limit(*c, &inp.spec, &inp.ctx.physics, inp.ctx.h_min) {
            Some(l) => dt_limit = dt_limit.min(l),
            None => {
                let (a, b) = (n % region.width(), n / region.width());
                return Err(Fault { stage: Stage::WaveSpeed, k: idx(region.i0 + a, region.j0 + b), detail: None });
            }
        }
    }

    Ok(BlockStats { clamped, dt_limit })
}
