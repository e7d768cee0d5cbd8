//! Full-grid executor: every kernel sweeps the whole ghost-padded grid
//! before the next one starts.

use std::time::Instant;

use rayon::prelude::*;

use super::{earliest, BlockStats, Fault, Kernel, KernelTimes, Stage, StepInputs, StepPlan};
use crate::grid::{Edge, FieldSet};
use crate::scheme::{predictor_cell_bc, CellVec, SweepDirection};
use crate::timestep::{cell_dt_limit, cell_is_legal};

/// Padded `(nx + 2) x (ny + 2)` buffers for `U^n` and `U*`.
#[derive(Default)]
pub(crate) struct NaiveScratch {
    committed: Vec<CellVec>,
    star: Vec<CellVec>,
}

struct Padded {
    pw: usize,
}

impl Padded {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        (j + 1) * self.pw + i + 1
    }
}

fn fill_ghosts(inp: &StepInputs, buf: &mut [CellVec], pad: &Padded) -> bool {
    let (nx, ny) = (inp.spec.nx, inp.spec.ny);
    let mut clamped = false;
    for j in 0..ny {
        let k_w = j * nx;
        let k_e = j * nx + nx - 1;
        let (gw, cw) = inp.ghost(Edge::West, buf[pad.at(0, j)], k_w);
        let (ge, ce) = inp.ghost(Edge::East, buf[pad.at(nx - 1, j)], k_e);
        buf[pad.at(0, j) - 1] = gw;
        buf[pad.at(nx - 1, j) + 1] = ge;
        clamped |= cw | ce;
    }
    for i in 0..nx {
        let k_s = i;
        let k_n = (ny - 1) * nx + i;
        let (gs, cs) = inp.ghost(Edge::South, buf[pad.at(i, 0)], k_s);
        let (gn, cn) = inp.ghost(Edge::North, buf[pad.at(i, ny - 1)], k_n);
        buf[pad.at(i, 0) - pad.pw] = gs;
        buf[pad.at(i, ny - 1) + pad.pw] = gn;
        clamped |= cs | cn;
    }
    clamped
}

pub(crate) fn step_naive(
    inp: &StepInputs,
    plan: &StepPlan,
    fs: &FieldSet,
    out: &mut FieldSet,
    scratch: &mut NaiveScratch,
    times: &mut KernelTimes,
) -> Result<BlockStats, Fault> {
    let (nx, ny) = (inp.spec.nx, inp.spec.ny);
    let pad = Padded { pw: nx + 2 };
    let len = (nx + 2) * (ny + 2);
    if scratch.committed.len() != len {
        scratch.committed = vec![CellVec::NAN; len];
        scratch.star = vec![CellVec::NAN; len];
    }
    let NaiveScratch { committed, star } = scratch;
    let mut stats = BlockStats::identity();
    let pw = pad.pw;
    let (sx, sy): (isize, isize) = match inp.dir {
        SweepDirection::Forward => (1, pw as isize),
        SweepDirection::Backward => (-1, -(pw as isize)),
    };

    for &kernel in plan.kernels() {
        let started = Instant::now();
        match kernel {
            Kernel::GhostFillCommitted => {
                committed[pw..pw * (ny + 1)].par_chunks_mut(pw).enumerate().for_each(|(j, row)| {
                    for i in 0..nx {
                        row[i + 1] = fs.cell(j * nx + i);
                    }
                });
                stats.clamped |= fill_ghosts(inp, committed, &pad);
            }
            Kernel::Predictor => {
                let src: &[CellVec] = committed;
                let fault = star[pw..pw * (ny + 1)]
                    .par_chunks_mut(pw)
                    .enumerate()
                    .map(|(j, row)| {
                        for i in 0..nx {
                            let p = pad.at(i, j);
                            let k = j * nx + i;
                            let r = predictor_cell_bc(
                                &inp.ctx,
                                src[p],
                                src[(p as isize + sx) as usize],
                                src[(p as isize + sy) as usize],
                                inp.slope(k),
                                inp.dir,
                                inp.predictor_faces(i, j),
                            );
                            match r {
                                Ok(v) => row[i + 1] = v,
                                Err(e) => return Some(Fault { stage: Stage::Predictor, k, detail: Some(e) }),
                            }
                        }
                        None
                    })
                    .reduce(|| None, earliest);
                if let Some(f) = fault {
                    return Err(f);
                }
            }
            Kernel::GhostFillPredicted => {
                stats.clamped |= fill_ghosts(inp, star, &pad);
            }
            Kernel::Corrector => {
                let old: &[CellVec] = committed;
                let pred: &[CellVec] = star;
                let fault = out
                    .h
                    .par_chunks_mut(nx)
                    .zip(out.qx.par_chunks_mut(nx))
                    .zip(out.qy.par_chunks_mut(nx))
                    .enumerate()
                    .map(|(j, ((oh, oqx), oqy))| {
                        for i in 0..nx {
                            let p = pad.at(i, j);
                            let k = j * nx + i;
                            let ring = [old[p + 1], old[p - 1], old[p + pw], old[p - pw]];
                            let r = inp.finish_cell(
                                k,
                                old[p],
                                pred[p],
                                pred[(p as isize - sx) as usize],
                                pred[(p as isize - sy) as usize],
                                ring,
                            );
                            match r {
                                Ok(v) => {
                                    oh[i] = v.h;
                                    oqx[i] = v.qx;
                                    oqy[i] = v.qy;
                                }
                                Err(e) => return Some(Fault { stage: Stage::Corrector, k, detail: Some(e) }),
                            }
                        }
                        None
                    })
                    .reduce(|| None, earliest);
                if let Some(f) = fault {
                    return Err(f);
                }
            }
            Kernel::StabilityGuard => {
                let h_min = inp.ctx.h_min;
                let next: &FieldSet = out;
                let first = (0..ny)
                    .into_par_iter()
                    .filter_map(|j| (j * nx..(j + 1) * nx).find(|&k| !cell_is_legal(next.cell(k), h_min)))
                    .min();
                if let Some(k) = first {
                    return Err(Fault { stage: Stage::Guard, k, detail: None });
                }
            }
            Kernel::WaveSpeedReduction => {
                let next: &FieldSet = out;
                let r = (0..ny)
                    .into_par_iter()
                    .map(|j| {
                        let mut best = f64::INFINITY;
                        for k in j * nx..(j + 1) * nx {
                            match cell_dt_limit(next.cell(k), &inp.spec, &inp.ctx.physics, inp.ctx.h_min) {
                                Some(l) => best = best.min(l),
                                None => return Err(Fault { stage: Stage::WaveSpeed, k, detail: None }),
                            }
                        }
                        Ok(BlockStats { clamped: false, dt_limit: best })
                    })
                    .collect::<Vec<_>>();
                stats = stats.merge(super::reduce_results(r)?);
            }
        }
        times.add(kernel.name(), started.elapsed());
    }
    Ok(stats)
}
