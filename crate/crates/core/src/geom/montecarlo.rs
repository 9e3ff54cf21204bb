use rayon::prelude::*;
use serde::Serialize;

use super::disk::DiskConfig;
use super::sampling::uniform_box_sample;
use crate::rng::RandomStream;

/// Samples per independent child stream. Fixed so that results do not
/// depend on how chunks are spread over threads.
pub const CHUNK_SAMPLES: usize = 1 << 16;

/// A measured area or volume with its standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaEstimate {
    pub value: f64,
    pub std_error: f64,
    pub exact: bool,
}

impl AreaEstimate {
    pub const fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0, exact: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Intersection,
    Union,
}

/// Hit-or-miss estimate of the volume of the intersection or union of the
/// balls of `config`, sampling uniformly over a bounding box.
pub fn mc_volume(config: &DiskConfig, op: SetOp, samples: usize, stream: RandomStream) -> AreaEstimate {
    let (lo, hi) = match op {
        SetOp::Union => config.bounding_box(),
        SetOp::Intersection => {
            let dim = config.dim();
            let mut lo = vec![f64::NEG_INFINITY; dim];
            let mut hi = vec![f64::INFINITY; dim];
            for (c, &r) in config.centers().iter().zip(config.radii()) {
                for (k, &x) in c.coords().iter().enumerate() {
                    lo[k] = lo[k].max(x - r);
                    hi[k] = hi[k].min(x + r);
                }
            }
            if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                return AreaEstimate::exact(0.0);
            }
            (lo, hi)
        }
    };
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    if samples == 0 {
        return AreaEstimate { value: f64::NAN, std_error: f64::INFINITY, exact: false };
    }

    let chunks = samples.div_ceil(CHUNK_SAMPLES);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SAMPLES.min(samples - c * CHUNK_SAMPLES);
            let mut rng = stream.child(c as u64).rng();
            let mut x = vec![0.0; lo.len()];
            let mut hits = 0u64;
            for _ in 0..count {
                uniform_box_sample(&lo, &hi, &mut x, &mut rng);
                let inside = match op {
                    SetOp::Intersection => config.contains_in_all(&x, 0.0),
                    SetOp::Union => config.contains_in_any(&x),
                };
                hits += inside as u64;
            }
            hits
        })
        .sum();
    let f = hits as f64 / samples as f64;
    AreaEstimate {
        value: f * box_volume,
        std_error: box_volume * (f * (1.0 - f) / samples as f64).sqrt(),
        exact: false,
    }
}
