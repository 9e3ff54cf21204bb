use super::disk::{Disk, DiskConfig};
use super::montecarlo::{mc_volume, AreaEstimate, SetOp};
use super::region::intersect_disks;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Largest configuration handled by exact inclusion–exclusion.
pub const MAX_EXACT_UNION: usize = 12;

/// Sample count and stream for the Monte Carlo union fallback.
#[derive(Debug, Clone, Copy)]
pub struct UnionOptions {
    pub max_exact: usize,
    pub samples: usize,
    pub stream: RandomStream,
}

impl Default for UnionOptions {
    fn default() -> Self {
        Self { max_exact: MAX_EXACT_UNION, samples: 1_000_000, stream: RandomStream::new(0, 0) }
    }
}

/// Area of the union of the disks of a 2D configuration.
pub fn union_area_2d(config: &DiskConfig) -> Result<AreaEstimate> {
    union_area_2d_with(config, &UnionOptions::default())
}

pub fn union_area_2d_with(config: &DiskConfig, opts: &UnionOptions) -> Result<AreaEstimate> {
    if config.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: config.dim() });
    }
    if config.len() > opts.max_exact {
        return Ok(mc_volume(config, SetOp::Union, opts.samples, opts.stream));
    }
    let disks = config.disks_2d()?;
    let mut total = 0.0;
    let mut chosen = Vec::with_capacity(disks.len());
    include_exclude(&disks, 0, &mut chosen, &mut total);
    Ok(AreaEstimate::exact(total))
}

// Depth-first over subsets in index order; a subset with zero-area
// intersection prunes all of its supersets.
fn include_exclude(disks: &[Disk], from: usize, chosen: &mut Vec<(usize, Disk)>, total: &mut f64) {
    for i in from..disks.len() {
        chosen.push((i, disks[i]));
        let area = intersect_disks(chosen).area();
        if area > 0.0 {
            let sign = if chosen.len() % 2 == 1 { 1.0 } else { -1.0 };
            *total += sign * area;
            include_exclude(disks, i + 1, chosen, total);
        }
        chosen.pop();
    }
}
