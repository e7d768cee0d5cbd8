//! Scanline decomposition.
//!
//! The grid is cut into contiguous row bands, one per worker. Once per step
//! each worker receives copies of the committed rows within the halo width
//! above and below its band. It then runs the whole step on its band,
//! recomputing the predictor on the neighbouring rows itself instead of
//! synchronising with its neighbours mid-step.

use std::time::Instant;

use rayon::prelude::*;

use super::block::{advance_block, BlockScratch, Region};
use super::tiled::{run_tiles, scatter, TileOutputs};
use super::{reduce_results, BlockStats, Fault, InnerKind, KernelTimes, StateView, StepInputs};
use super::{COMMITTED_HALO, PREDICTOR_HALO};
use crate::grid::FieldSet;
use crate::scheme::CellVec;

/// Half-open row range `[start, end)` owned by one worker.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Band {
    pub start: usize,
    pub end: usize,
}

impl Band {
    pub fn rows(&self) -> usize {
        self.end - self.start
    }
}

/// Splits `ny` rows into `workers` contiguous bands whose sizes differ by at
/// most one, larger bands first.
pub fn partition_scanlines(ny: usize, workers: usize) -> Result<Vec<Band>, String> {
    if workers == 0 {
        return Err("worker count must be at least 1".into());
    }
    if workers > ny {
        return Err(format!("{workers} workers cannot split {ny} rows"));
    }
    let base = ny / workers;
    let extra = ny % workers;
    let mut start = 0;
    Ok((0..workers)
        .map(|w| {
            let end = start + base + usize::from(w < extra);
            let band = Band { start, end };
            start = end;
            band
        })
        .collect())
}

/// Bands must be tall enough that a worker's halo never reaches past its
/// immediate neighbours.
pub(crate) fn validate_bands(ny: usize, workers: usize) -> Result<Vec<Band>, String> {
    let bands = partition_scanlines(ny, workers)?;
    let min_rows = 2 * COMMITTED_HALO;
    if let Some(b) = bands.iter().find(|b| b.rows() < min_rows) {
        return Err(format!(
            "{workers} workers over {ny} rows gives a {}-row band; bands need at least {min_rows} rows",
            b.rows()
        ));
    }
    Ok(bands)
}

/// Traffic of one halo exchange.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HaloExchange {
    /// Committed values copied from other workers' rows (3 fields per cell).
    pub values: usize,
    /// Predictor rows each worker recomputes for rows it does not own, summed.
    pub redundant_predictor_rows: usize,
}

/// A worker's private copy of its band plus halo rows.
#[derive(Debug, Clone, Default)]
pub struct ExtendedBand {
    pub band: Band,
    /// First global row held in the buffers.
    pub row0: usize,
    pub h: Vec<f64>,
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
}

impl ExtendedBand {
    pub(crate) fn view(&self, nx: usize) -> StateView<'_> {
        StateView { nx, row0: self.row0, h: &self.h, qx: &self.qx, qy: &self.qy }
    }
}

/// Fills each worker's extended band from the committed state: its own rows
/// plus up to `halo` rows from each neighbour.
pub(crate) fn exchange_into(bufs: &mut Vec<ExtendedBand>, bands: &[Band], fs: &FieldSet, halo: usize) -> HaloExchange {
    let nx = fs.spec.nx;
    let ny = fs.spec.ny;
    bufs.resize_with(bands.len(), ExtendedBand::default);
    let mut traffic = HaloExchange::default();
    for (buf, band) in bufs.iter_mut().zip(bands) {
        let lo = band.start.saturating_sub(halo);
        let hi = (band.end + halo).min(ny);
        let range = lo * nx..hi * nx;
        buf.band = *band;
        buf.row0 = lo;
        buf.h.clear();
        buf.h.extend_from_slice(&fs.h[range.clone()]);
        buf.qx.clear();
        buf.qx.extend_from_slice(&fs.qx[range.clone()]);
        buf.qy.clear();
        buf.qy.extend_from_slice(&fs.qy[range]);
        let halo_rows = (band.start - lo) + (hi - band.end);
        traffic.values += halo_rows * nx * 3;
        if halo > PREDICTOR_HALO {
            traffic.redundant_predictor_rows +=
                usize::from(band.start > 0) * PREDICTOR_HALO + usize::from(band.end < ny) * PREDICTOR_HALO;
        }
    }
    traffic
}

/// Builds every worker's extended band for the committed state `fs`.
pub fn exchange_halo_rows(bands: &[Band], fs: &FieldSet) -> (Vec<ExtendedBand>, HaloExchange) {
    let mut bufs = Vec::new();
    let traffic = exchange_into(&mut bufs, bands, fs, COMMITTED_HALO);
    (bufs, traffic)
}

#[derive(Default)]
pub(crate) struct DecomposedScratch {
    bands: Vec<Band>,
    bufs: Vec<ExtendedBand>,
    pub last_exchange: HaloExchange,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn step_decomposed(
    inp: &StepInputs,
    fs: &FieldSet,
    workers: usize,
    inner: InnerKind,
    halo: usize,
    scratch: &mut DecomposedScratch,
    out: &mut FieldSet,
    times: &mut KernelTimes,
) -> Result<BlockStats, Fault> {
    let nx = inp.spec.nx;
    if scratch.bands.len() != workers {
        scratch.bands = validate_bands(inp.spec.ny, workers).expect("validated at construction");
    }

    let started = Instant::now();
    scratch.last_exchange = exchange_into(&mut scratch.bufs, &scratch.bands, fs, halo);
    times.add("halo_exchange", started.elapsed());

    let started = Instant::now();
    let results: Vec<TileOutputs> = scratch
        .bufs
        .par_iter()
        .map(|ext| {
            let view = ext.view(nx);
            let region = Region { i0: 0, i1: nx, j0: ext.band.start, j1: ext.band.end };
            match inner {
                InnerKind::Naive => {
                    let mut block = BlockScratch::default();
                    let mut cells = vec![CellVec::default(); region.cells()];
                    let r = advance_block(inp, view, region, halo, &mut block, &mut cells);
                    (vec![(region, cells)], r)
                }
                InnerKind::Tiled { tile } => run_tiles(inp, view, region, tile, halo),
            }
        })
        .collect();
    times.add("worker_pass", started.elapsed());

    let started = Instant::now();
    let mut stats = Vec::with_capacity(results.len());
    let mut pieces = Vec::new();
    for (outputs, r) in results {
        stats.push(r);
        pieces.push(outputs);
    }
    let stats = reduce_results(stats)?;
    for outputs in &pieces {
        for (region, cells) in outputs {
            scatter(out, *region, cells);
        }
    }
    times.add("commit", started.elapsed());
    Ok(stats)
}
