//! Support degree and covered area.
//!
//! Areas are estimated on a raster: a cell counts as covered when its centre
//! lies in some sensing disk. Rows are rasterised independently and only
//! integer cell counts are summed, so the result does not depend on the
//! executor.

use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::par::Exec;
use crate::topology::{Field, Position};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("support degree needs k >= 1")]
    ZeroK,
    #[error("resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("initial covered area is zero; loss is undefined")]
    NoInitialCoverage,
}

/// `(1/k) * Σ_{v∈Γ_u} (d_u − |Γ_u ∩ Γ_v|)`.
pub fn support_degree(g: &Graph, u: NodeId, k: usize) -> Result<f64, CoverageError> {
    if k == 0 {
        return Err(CoverageError::ZeroK);
    }
    let du = g.degree(u);
    let mine = g.neighbors(u);
    let total: usize = mine
        .iter()
        .map(|&v| du - common_count(mine, g.neighbors(v)))
        .sum();
    Ok(total as f64 / k as f64)
}

/// Size of the intersection of two sorted lists.
pub(crate) fn common_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

pub fn default_resolution(field: Field) -> f64 {
    field.width / 2000.0
}

/// Raster of covered cells over a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMask {
    nx: usize,
    ny: usize,
    words: usize,
    bits: Vec<u64>,
    cell_w: u64,
    cell_h: u64,
}

impl CoverageMask {
    pub fn rasterize(
        positions: &[Position],
        sensing_range: f64,
        field: Field,
        resolution: f64,
        exec: Exec,
    ) -> Result<Self, CoverageError> {
        if !(resolution > 0.0) {
            return Err(CoverageError::BadResolution(resolution));
        }
        let nx = ((field.width / resolution).round() as usize).max(1);
        let ny = ((field.height / resolution).round() as usize).max(1);
        let (dx, dy) = (field.width / nx as f64, field.height / ny as f64);
        let words = nx.div_ceil(64);
        let r2 = sensing_range * sensing_range;
        let rows = exec.map_range(ny, |j| {
            let yc = (j as f64 + 0.5) * dy;
            let mut row = vec![0u64; words];
            for p in positions {
                let h = r2 - (p.y - yc) * (p.y - yc);
                if h < 0.0 {
                    continue;
                }
                let half = h.sqrt();
                // cells whose centre (i + 0.5) * dx lies in [x - half, x + half]
                let lo = ((p.x - half) / dx - 0.5).ceil().max(0.0);
                let hi = ((p.x + half) / dx - 0.5).floor().min(nx as f64 - 1.0);
                if lo > hi {
                    continue;
                }
                set_range(&mut row, lo as usize, hi as usize);
            }
            row
        });
        Ok(CoverageMask {
            nx,
            ny,
            words,
            bits: rows.concat(),
            cell_w: dx.to_bits(),
            cell_h: dy.to_bits(),
        })
    }

    fn cell_area(&self) -> f64 {
        f64::from_bits(self.cell_w) * f64::from_bits(self.cell_h)
    }

    pub fn covered_cells(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn area(&self) -> f64 {
        self.covered_cells() as f64 * self.cell_area()
    }

    pub fn intersection_area(&self, other: &CoverageMask) -> f64 {
        assert_eq!((self.nx, self.ny, self.words), (other.nx, other.ny, other.words));
        let cells: u64 = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum();
        cells as f64 * self.cell_area()
    }
}

fn set_range(row: &mut [u64], lo: usize, hi: usize) {
    for (w, word) in row.iter_mut().enumerate().take(hi / 64 + 1).skip(lo / 64) {
        let start = if w == lo / 64 { lo % 64 } else { 0 };
        let end = if w == hi / 64 { hi % 64 } else { 63 };
        let width = end - start + 1;
        let mask = if width == 64 { u64::MAX } else { ((1u64 << width) - 1) << start };
        *word |= mask;
    }
}

/// Area of the union of sensing disks clipped to the field.
pub fn covered_area(
    positions: &[Position],
    sensing_range: f64,
    field: Field,
    resolution: f64,
) -> Result<f64, CoverageError> {
    Ok(CoverageMask::rasterize(positions, sensing_range, field, resolution, Exec::default())?.area())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub initial_area: f64,
    pub current_area: f64,
    /// Share of the initially covered region that is no longer covered.
    pub primary_loss_pct: f64,
    /// Net change of covered area; negative when new ground is covered.
    pub general_loss_pct: f64,
    pub resolution: f64,
}

pub fn coverage_losses(
    before: &[Position],
    after: &[Position],
    field: Field,
    sensing_range: f64,
    resolution: f64,
) -> Result<CoverageReport, CoverageError> {
    let exec = Exec::default();
    let a = CoverageMask::rasterize(before, sensing_range, field, resolution, exec)?;
    let b = CoverageMask::rasterize(after, sensing_range, field, resolution, exec)?;
    let initial = a.area();
    if initial == 0.0 {
        return Err(CoverageError::NoInitialCoverage);
    }
    let current = b.area();
    let kept = a.intersection_area(&b);
    Ok(CoverageReport {
        initial_area: initial,
        current_area: current,
        primary_loss_pct: (1.0 - kept / initial) * 100.0,
        general_loss_pct: (1.0 - current / initial) * 100.0,
        resolution,
    })
}
