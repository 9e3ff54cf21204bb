//! Numerical checks of the Kneser–Poulsen inequalities.
//!
//! If `q` is an expansion of `p` (no pairwise center distance decreases),
//! then the union of the balls around `q` is at least as large as the one
//! around `p` and the intersection is at most as large. In the plane this
//! is checked with exact areas; in higher dimensions with Monte Carlo
//! volumes and a 4σ band.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{
    intersection_area_2d, mc_volume, uniform_sphere_sample, union_area_2d, DiskConfig, SetOp,
    VectorN,
};
use crate::rng::RandomStream;

/// Slack for comparing exact planar areas.
pub const AREA_SLACK: f64 = 1e-9;
/// Width of the statistical band, in standard errors.
pub const SIGMA_BAND: f64 = 4.0;

/// Two configurations with the same number of balls and the same radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigPair {
    pub p: DiskConfig,
    pub q: DiskConfig,
}

impl ConfigPair {
    pub fn new(p: DiskConfig, q: DiskConfig) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::LengthMismatch(format!("{} vs {} balls", p.len(), q.len())));
        }
        if p.dim() != q.dim() {
            return Err(Error::LengthMismatch(format!("dimension {} vs {}", p.dim(), q.dim())));
        }
        if p.radii() != q.radii() {
            return Err(Error::LengthMismatch("radii differ".into()));
        }
        Ok(Self { p, q })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionCheck {
    pub holds: bool,
    /// Index pair with the largest shrinkage, when the check fails.
    pub witness: Option<(usize, usize)>,
}

/// Whether every pairwise distance in `q` is at least the one in `p`
/// minus `slack`.
pub fn is_expansion(pair: &ConfigPair, slack: f64) -> ExpansionCheck {
    let (p, q) = (pair.p.centers(), pair.q.centers());
    let mut worst: Option<((usize, usize), f64)> = None;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let shrink = p[i].distance(&p[j]) - q[i].distance(&q[j]);
            if shrink > slack && worst.is_none_or(|(_, w)| shrink > w) {
                worst = Some(((i, j), shrink));
            }
        }
    }
    ExpansionCheck { holds: worst.is_none(), witness: worst.map(|(ij, _)| ij) }
}

fn centroid(config: &DiskConfig) -> VectorN {
    let n = config.len() as f64;
    let sum = config
        .centers()
        .iter()
        .skip(1)
        .fold(config.centers()[0].clone(), |acc, c| &acc + c);
    sum.scale(1.0 / n)
}

/// `p = c + λ(q − c)` about the centroid `c` of `q`.
pub fn contract_by_scaling(q: &DiskConfig, lambda: f64) -> Result<ConfigPair> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    let c = centroid(q);
    let centers = q
        .centers()
        .iter()
        .map(|x| c.add_scaled(&(x - &c), lambda))
        .collect();
    ConfigPair::new(DiskConfig::new(centers, q.radii().to_vec())?, q.clone())
}

/// Orthogonal projection of every center onto the line through the
/// centroid along `axis`.
pub fn contract_by_projection(q: &DiskConfig, axis: &VectorN) -> Result<ConfigPair> {
    if axis.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), found: axis.dim() });
    }
    if !axis.is_unit(1e-12) {
        return Err(Error::InvalidArgument(format!("axis has norm {}", axis.norm())));
    }
    let c = centroid(q);
    let centers = q
        .centers()
        .iter()
        .map(|x| c.add_scaled(axis, (x - &c).dot(axis)))
        .collect();
    ConfigPair::new(DiskConfig::new(centers, q.radii().to_vec())?, q.clone())
}

/// Exact planar areas of both intersections and both unions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpReport2d {
    pub intersection_p: f64,
    pub intersection_q: f64,
    pub union_p: f64,
    pub union_q: f64,
    pub intersection_ok: bool,
    pub union_ok: bool,
}

fn require_expansion(pair: &ConfigPair) -> Result<()> {
    match is_expansion(pair, 1e-12).witness {
        Some((i, j)) => Err(Error::NotAnExpansion(i, j)),
        None => Ok(()),
    }
}

/// Checks both planar inequalities for an expansion pair.
pub fn verify_kp_2d(pair: &ConfigPair) -> Result<KpReport2d> {
    if pair.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: pair.dim() });
    }
    require_expansion(pair)?;
    let (intersection_p, _) = intersection_area_2d(&pair.p)?;
    let (intersection_q, _) = intersection_area_2d(&pair.q)?;
    let union_p = union_area_2d(&pair.p)?.value;
    let union_q = union_area_2d(&pair.q)?.value;
    Ok(KpReport2d {
        intersection_p,
        intersection_q,
        union_p,
        union_q,
        intersection_ok: intersection_p >= intersection_q - AREA_SLACK,
        union_ok: union_p <= union_q + AREA_SLACK,
    })
}

/// Monte Carlo volumes with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpReportMc {
    pub intersection_p: f64,
    pub intersection_q: f64,
    pub union_p: f64,
    pub union_q: f64,
    pub intersection_se: f64,
    pub union_se: f64,
    pub intersection_ok: bool,
    pub union_ok: bool,
}

/// Checks both inequalities in any dimension with independent Monte Carlo
/// estimates; a flag fails only outside the 4σ band of the difference.
pub fn verify_kp_mc(pair: &ConfigPair, samples: usize, stream: RandomStream) -> Result<KpReportMc> {
    require_expansion(pair)?;
    let ip = mc_volume(&pair.p, SetOp::Intersection, samples, stream.child(0));
    let iq = mc_volume(&pair.q, SetOp::Intersection, samples, stream.child(1));
    let up = mc_volume(&pair.p, SetOp::Union, samples, stream.child(2));
    let uq = mc_volume(&pair.q, SetOp::Union, samples, stream.child(3));
    let intersection_se = ip.std_error.hypot(iq.std_error);
    let union_se = up.std_error.hypot(uq.std_error);
    Ok(KpReportMc {
        intersection_p: ip.value,
        intersection_q: iq.value,
        union_p: up.value,
        union_q: uq.value,
        intersection_se,
        union_se,
        intersection_ok: ip.value >= iq.value - SIGMA_BAND * intersection_se,
        union_ok: up.value <= uq.value + SIGMA_BAND * union_se,
    })
}

/// Collinear motion from a straightened chain with gaps `l_j` to a line
/// configuration with gaps `L_j ≥ l_j`; gap `j` at time τ is
/// `τ L_j + (1 − τ) l_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StretchMotion {
    chain_lengths: Vec<f64>,
    target_lengths: Vec<f64>,
    dim: usize,
}

impl StretchMotion {
    /// Rounding up to this much above the target is clamped.
    pub const LENGTH_TOL: f64 = 1e-12;

    pub fn new(chain_lengths: Vec<f64>, target_lengths: Vec<f64>, dim: usize) -> Result<Self> {
        if chain_lengths.len() != target_lengths.len() {
            return Err(Error::InvalidLengths(format!(
                "{} chain gaps vs {} targets",
                chain_lengths.len(),
                target_lengths.len()
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let mut chain = chain_lengths;
        for (j, (l, big_l)) in chain.iter_mut().zip(&target_lengths).enumerate() {
            if !(l.is_finite() && big_l.is_finite() && *l >= 0.0) {
                return Err(Error::InvalidLengths(format!("gap {j} is not a finite length")));
            }
            if *l > big_l + Self::LENGTH_TOL {
                return Err(Error::InvalidLengths(format!("gap {j}: chain {l} exceeds target {big_l}")));
            }
            *l = l.min(*big_l);
        }
        Ok(Self { chain_lengths: chain, target_lengths, dim })
    }

    /// Gaps of the chain through `points` visited at `times`.
    pub fn from_chain(points: &[VectorN], times: &[f64]) -> Result<Self> {
        if points.len() != times.len() || points.is_empty() {
            return Err(Error::InvalidLengths("need one time per chain point".into()));
        }
        let chain = points.windows(2).map(|w| w[0].distance(&w[1])).collect();
        let target = times.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        Self::new(chain, target, points[0].dim())
    }

    pub fn chain_lengths(&self) -> &[f64] {
        &self.chain_lengths
    }

    pub fn target_lengths(&self) -> &[f64] {
        &self.target_lengths
    }

    /// Number of points in the configuration.
    pub fn len(&self) -> usize {
        self.chain_lengths.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Positions along the first axis at time `tau`.
    pub fn positions(&self, tau: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidTau(tau));
        }
        let mut x = 0.0;
        let mut out = Vec::with_capacity(self.len());
        out.push(0.0);
        for (l, big_l) in self.chain_lengths.iter().zip(&self.target_lengths) {
            x += tau * big_l + (1.0 - tau) * l;
            out.push(x);
        }
        Ok(out)
    }
}

/// The configuration `r(τ)` as points of R^dim on the first axis.
pub fn stretch_motion_eval(motion: &StretchMotion, tau: f64) -> Result<Vec<VectorN>> {
    Ok(motion
        .positions(tau)?
        .into_iter()
        .map(|x| VectorN::basis(motion.dim, 0).scale(x))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotionCheck {
    pub holds: bool,
    /// `(i, j, step)`: distance between points i and j dropped between grid
    /// steps `step` and `step + 1`.
    pub witness: Option<(usize, usize, usize)>,
}

/// Whether every pairwise distance is nondecreasing (within 1e-12) along a
/// uniform grid of `grid` values of τ.
pub fn verify_motion_expansive(motion: &StretchMotion, grid: usize) -> Result<MotionCheck> {
    if grid < 2 {
        return Err(Error::InvalidArgument(format!("grid of {grid} points")));
    }
    let configs: Vec<Vec<VectorN>> = (0..grid)
        .map(|k| stretch_motion_eval(motion, k as f64 / (grid - 1) as f64))
        .collect::<Result<_>>()?;
    for (step, w) in configs.windows(2).enumerate() {
        let (before, after) = (&w[0], &w[1]);
        for i in 0..before.len() {
            for j in i + 1..before.len() {
                if after[i].distance(&after[j]) < before[i].distance(&before[j]) - 1e-12 {
                    return Ok(MotionCheck { holds: false, witness: Some((i, j, step)) });
                }
            }
        }
    }
    Ok(MotionCheck { holds: true, witness: None })
}

/// Contraction generator used in campaigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Scaling,
    Projection,
    /// Alternates by record index.
    Both,
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaling" => Ok(Self::Scaling),
            "projection" => Ok(Self::Projection),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidArgument(format!("unknown generator {other:?}"))),
        }
    }
}

/// Campaign parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignConfig {
    pub size: usize,
    pub max_balls: usize,
    pub dim: usize,
    pub generator: Generator,
    pub seed: u64,
    pub radius_range: (f64, f64),
    /// Samples per Monte Carlo volume (dim ≠ 2 only).
    pub samples: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            size: 1000,
            max_balls: 6,
            dim: 2,
            generator: Generator::Both,
            seed: 0,
            radius_range: (0.5, 1.5),
            samples: 200_000,
        }
    }
}

/// One line of the campaign report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignRecord {
    pub seed: u64,
    pub index: usize,
    pub generator: Generator,
    #[serde(rename = "N")]
    pub n: usize,
    pub dim: usize,
    pub intersection_p: f64,
    pub intersection_q: f64,
    pub union_p: f64,
    pub union_q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intersection_se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub union_se: Option<f64>,
    pub exact: bool,
    pub intersection_ok: bool,
    pub union_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(usize, usize)>,
}

impl CampaignRecord {
    pub fn passed(&self) -> bool {
        self.intersection_ok && self.union_ok && self.witness.is_none()
    }
}

/// Random expansion pair number `index` of a campaign.
pub fn campaign_pair(cfg: &CampaignConfig, index: usize) -> Result<(Generator, ConfigPair)> {
    let mut rng = RandomStream::new(cfg.seed, index as u64).rng();
    let n = rng.random_range(1..=cfg.max_balls.max(1));
    let (r_lo, r_hi) = cfg.radius_range;
    let centers = (0..n)
        .map(|_| VectorN::new((0..cfg.dim).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let radii = (0..n).map(|_| rng.random_range(r_lo..=r_hi)).collect();
    let q = DiskConfig::new(centers, radii)?;
    let generator = match cfg.generator {
        Generator::Both if index.is_multiple_of(2) => Generator::Scaling,
        Generator::Both => Generator::Projection,
        g => g,
    };
    let pair = match generator {
        Generator::Scaling => {
            let lambda = 1.0 - rng.random::<f64>();
            contract_by_scaling(&q, lambda)?
        }
        _ => contract_by_projection(&q, &uniform_sphere_sample(cfg.dim, &mut rng))?,
    };
    Ok((generator, pair))
}

fn campaign_record(cfg: &CampaignConfig, index: usize) -> Result<CampaignRecord> {
    let (generator, pair) = campaign_pair(cfg, index)?;
    let check = is_expansion(&pair, 1e-12);
    let mut record = CampaignRecord {
        seed: cfg.seed,
        index,
        generator,
        n: pair.len(),
        dim: cfg.dim,
        intersection_p: f64::NAN,
        intersection_q: f64::NAN,
        union_p: f64::NAN,
        union_q: f64::NAN,
        intersection_se: None,
        union_se: None,
        exact: cfg.dim == 2,
        intersection_ok: false,
        union_ok: false,
        witness: check.witness,
    };
    if !check.holds {
        return Ok(record);
    }
    if cfg.dim == 2 {
        let r = verify_kp_2d(&pair)?;
        record.intersection_p = r.intersection_p;
        record.intersection_q = r.intersection_q;
        record.union_p = r.union_p;
        record.union_q = r.union_q;
        record.intersection_ok = r.intersection_ok;
        record.union_ok = r.union_ok;
    } else {
        let stream = RandomStream::new(cfg.seed, index as u64).child(1);
        let r = verify_kp_mc(&pair, cfg.samples, stream)?;
        record.intersection_p = r.intersection_p;
        record.intersection_q = r.intersection_q;
        record.union_p = r.union_p;
        record.union_q = r.union_q;
        record.intersection_se = Some(r.intersection_se);
        record.union_se = Some(r.union_se);
        record.intersection_ok = r.intersection_ok;
        record.union_ok = r.union_ok;
    }
    Ok(record)
}

/// Runs a seeded campaign; records come back in index order.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<CampaignRecord>> {
    if cfg.dim == 0 {
        return Err(Error::InvalidDimension(0));
    }
    (0..cfg.size)
        .into_par_iter()
        .map(|i| campaign_record(cfg, i))
        .collect()
}
