//! Tiled executor. Each tile models one GPU thread block: its staging buffer
//! plays the part of shared memory, and the halo ring is re-copied (and its
//! predictor values recomputed) by every tile that borders it.

use std::time::Instant;

use rayon::prelude::*;

use super::block::{advance_block, BlockScratch, Region};
use super::{reduce_results, BlockStats, Fault, KernelTimes, StateView, StepInputs};
use super::{COMMITTED_HALO, MIN_TILE, PREDICTOR_HALO};
use crate::grid::FieldSet;
use crate::scheme::CellVec;

/// Buffer sizes for one tile of the fused predictor/corrector pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGeometry {
    pub tile: usize,
    /// Side of the staged committed block.
    pub staged: usize,
    /// Side of the block of predictor values.
    pub predicted: usize,
    /// Side of the block of corrector outputs.
    pub output: usize,
}

/// Halo geometry for a square tile of side `tile`.
pub fn tile_halo_extent(tile: usize) -> Result<TileGeometry, String> {
    if tile < MIN_TILE || tile < 2 * COMMITTED_HALO {
        return Err(format!(
            "tile side {tile} smaller than minimum {} (twice the halo width {COMMITTED_HALO})",
            MIN_TILE.max(2 * COMMITTED_HALO)
        ));
    }
    Ok(TileGeometry {
        tile,
        staged: tile + 2 * COMMITTED_HALO,
        predicted: tile + 2 * PREDICTOR_HALO,
        output: tile,
    })
}

/// Splits `region` into `tile`-sided tiles in row-major order; edge tiles are truncated.
pub(crate) fn tiles_of(region: Region, tile: usize) -> Vec<Region> {
    let mut tiles = Vec::new();
    let mut j0 = region.j0;
    while j0 < region.j1 {
        let j1 = (j0 + tile).min(region.j1);
        let mut i0 = region.i0;
        while i0 < region.i1 {
            let i1 = (i0 + tile).min(region.i1);
            tiles.push(Region { i0, i1, j0, j1 });
            i0 = i1;
        }
        j0 = j1;
    }
    tiles
}

/// Corrector outputs of each tile, plus the reduced statistics or first fault.
pub(crate) type TileOutputs = (Vec<(Region, Vec<CellVec>)>, Result<BlockStats, Fault>);

/// Runs every tile of `region` and returns the outputs alongside each tile.
pub(crate) fn run_tiles(
    inp: &StepInputs,
    view: StateView,
    region: Region,
    tile: usize,
    halo: usize,
) -> TileOutputs {
    let tiles = tiles_of(region, tile);
    let results: Vec<_> = tiles
        .into_par_iter()
        .map_init(BlockScratch::default, |scratch, t| {
            let mut buf = vec![CellVec::default(); t.cells()];
            let r = advance_block(inp, view, t, halo, scratch, &mut buf);
            (t, buf, r)
        })
        .collect();
    let mut outputs = Vec::with_capacity(results.len());
    let mut stats = Vec::with_capacity(results.len());
    for (t, buf, r) in results {
        outputs.push((t, buf));
        stats.push(r);
    }
    (outputs, reduce_results(stats))
}

pub(crate) fn scatter(out: &mut FieldSet, region: Region, cells: &[CellVec]) {
    let nx = out.spec.nx;
    let w = region.width();
    for (b, row) in cells.chunks(w).enumerate() {
        let base = (region.j0 + b) * nx + region.i0;
        for (a, c) in row.iter().enumerate() {
            out.h[base + a] = c.h;
            out.qx[base + a] = c.qx;
            out.qy[base + a] = c.qy;
        }
    }
}

pub(crate) fn step_tiled(
    inp: &StepInputs,
    view: StateView,
    tile: usize,
    halo: usize,
    out: &mut FieldSet,
    times: &mut KernelTimes,
) -> Result<BlockStats, Fault> {
    let started = Instant::now();
    let full = Region { i0: 0, i1: inp.spec.nx, j0: 0, j1: inp.spec.ny };
    let (outputs, stats) = run_tiles(inp, view, full, tile, halo);
    times.add("tile_pass", started.elapsed());
    let stats = stats?;
    let started = Instant::now();
    for (t, cells) in &outputs {
        scatter(out, *t, cells);
    }
    times.add("commit", started.elapsed());
    Ok(stats)
}
