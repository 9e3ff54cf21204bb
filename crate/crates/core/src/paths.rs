//! Unit-speed paths starting at the origin.
//!
//! Every path continues along a straight ray once its described portion is
//! used up, except for a circular arc without a length, which loops forever.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{DiskConfig, Point2, VectorN};

const UNIT_TOL: f64 = 1e-9;

/// JSON form of a path, tagged by `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathSpec {
    Line {
        direction: VectorN,
    },
    Polychain {
        segment_lengths: Vec<f64>,
        directions: Vec<VectorN>,
    },
    Arc {
        curvature: f64,
        #[serde(default)]
        length: Option<f64>,
    },
}

/// An arc-length parametrised curve with `γ(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathSpec", into = "PathSpec")]
pub enum UnitSpeedPath {
    Line {
        direction: VectorN,
    },
    PolyChain {
        segment_lengths: Vec<f64>,
        directions: Vec<VectorN>,
        /// Arc length at the start of each segment, plus the total.
        breakpoints: Vec<f64>,
        /// Position at each breakpoint.
        joints: Vec<VectorN>,
    },
    /// Planar arc of signed curvature leaving the origin along e₁, turning
    /// left for positive curvature. `length: None` keeps circling.
    Arc { curvature: f64, length: Option<f64> },
}

/// A straight piece `start + s·direction` for `s ∈ [0, length]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPiece {
    pub start_time: f64,
    pub start: VectorN,
    pub direction: VectorN,
    pub length: f64,
}

impl UnitSpeedPath {
    pub fn line(direction: VectorN) -> Result<Self> {
        if !direction.is_unit(UNIT_TOL) {
            return Err(Error::InvalidPath(format!(
                "line direction has norm {}",
                direction.norm()
            )));
        }
        Ok(Self::Line { direction })
    }

    /// Straight line along the first axis of R^dim.
    pub fn axis_line(dim: usize) -> Self {
        Self::Line { direction: VectorN::basis(dim, 0) }
    }

    pub fn polychain(segment_lengths: Vec<f64>, directions: Vec<VectorN>) -> Result<Self> {
        if segment_lengths.is_empty() || segment_lengths.len() != directions.len() {
            return Err(Error::InvalidPath(format!(
                "{} segment lengths for {} directions",
                segment_lengths.len(),
                directions.len()
            )));
        }
        if let Some(l) = segment_lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidPath(format!("segment length {l} is not positive")));
        }
        let dim = directions[0].dim();
        for d in &directions {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d.dim() });
            }
            if !d.is_unit(UNIT_TOL) {
                return Err(Error::InvalidPath(format!("direction has norm {}", d.norm())));
            }
        }
        let mut breakpoints = Vec::with_capacity(segment_lengths.len() + 1);
        let mut joints = Vec::with_capacity(segment_lengths.len() + 1);
        let mut t = 0.0;
        let mut p = VectorN::zeros(dim);
        for (l, d) in segment_lengths.iter().zip(&directions) {
            breakpoints.push(t);
            joints.push(p.clone());
            t += l;
            p = p.add_scaled(d, *l);
        }
        breakpoints.push(t);
        joints.push(p);
        Ok(Self::PolyChain { segment_lengths, directions, breakpoints, joints })
    }

    /// Planar chain from a heading of 0 and successive turn angles; the
    /// number of segments is `turns.len() + 1`.
    pub fn planar_chain(segment_length: f64, turns: &[f64]) -> Result<Self> {
        let mut heading = 0.0;
        let mut directions = vec![VectorN::from_xy(1.0, 0.0)];
        for &turn in turns {
            heading += turn;
            directions.push(VectorN::from(Point2::polar(1.0, heading)));
        }
        Self::polychain(vec![segment_length; turns.len() + 1], directions)
    }

    pub fn arc(curvature: f64, length: Option<f64>) -> Result<Self> {
        if !curvature.is_finite() {
            return Err(Error::InvalidPath("curvature must be finite".into()));
        }
        if let Some(l) = length {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidPath(format!("arc length {l} is invalid")));
            }
        }
        Ok(Self::Arc { curvature, length })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Line { direction } => direction.dim(),
            Self::PolyChain { directions, .. } => directions[0].dim(),
            Self::Arc { .. } => 2,
        }
    }

    /// Position at arc length `t`.
    pub fn eval(&self, t: f64) -> Result<VectorN> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(match self {
            Self::Line { direction } => direction.scale(t),
            Self::PolyChain { directions, breakpoints, joints, .. } => {
                let last = directions.len() - 1;
                // first segment whose end is at or past t
                let j = breakpoints[1..].partition_point(|&b| b < t).min(last);
                joints[j].add_scaled(&directions[j], t - breakpoints[j])
            }
            Self::Arc { curvature, length } => VectorN::from(arc_point(*curvature, *length, t)),
        })
    }

    /// Straight pieces in time order, ending with an unbounded ray. `None`
    /// for curved paths.
    pub fn linear_pieces(&self) -> Option<Vec<LinearPiece>> {
        match self {
            Self::Line { direction } => Some(vec![LinearPiece {
                start_time: 0.0,
                start: VectorN::zeros(direction.dim()),
                direction: direction.clone(),
                length: f64::INFINITY,
            }]),
            Self::PolyChain { directions, breakpoints, joints, segment_lengths } => {
                let last = directions.len() - 1;
                Some(
                    (0..directions.len())
                        .map(|j| LinearPiece {
                            start_time: breakpoints[j],
                            start: joints[j].clone(),
                            direction: directions[j].clone(),
                            length: if j == last { f64::INFINITY } else { segment_lengths[j] },
                        })
                        .collect(),
                )
            }
            Self::Arc { curvature, .. } if *curvature == 0.0 => {
                Some(Self::axis_line(2).linear_pieces().unwrap())
            }
            Self::Arc { .. } => None,
        }
    }
}

fn arc_point(curvature: f64, length: Option<f64>, t: f64) -> Point2 {
    let on_arc = |s: f64| {
        if curvature == 0.0 {
            Point2::new(s, 0.0)
        } else {
            let a = curvature * s;
            let half = (0.5 * a).sin();
            Point2::new(a.sin() / curvature, 2.0 * half * half / curvature)
        }
    };
    match length {
        Some(l) if t > l => on_arc(l) + Point2::polar(t - l, curvature * l),
        _ => on_arc(t),
    }
}

impl TryFrom<PathSpec> for UnitSpeedPath {
    type Error = Error;

    fn try_from(spec: PathSpec) -> Result<Self> {
        match spec {
            PathSpec::Line { direction } => Self::line(direction),
            PathSpec::Polychain { segment_lengths, directions } => {
                Self::polychain(segment_lengths, directions)
            }
            PathSpec::Arc { curvature, length } => Self::arc(curvature, length),
        }
    }
}

impl From<UnitSpeedPath> for PathSpec {
    fn from(path: UnitSpeedPath) -> Self {
        match path {
            UnitSpeedPath::Line { direction } => PathSpec::Line { direction },
            UnitSpeedPath::PolyChain { segment_lengths, directions, .. } => {
                PathSpec::Polychain { segment_lengths, directions }
            }
            UnitSpeedPath::Arc { curvature, length } => PathSpec::Arc { curvature, length },
        }
    }
}

/// Times `0 = t_0 < t_1 < … < t_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    times: Vec<f64>,
}

impl Partition {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::InvalidPartition("must start at 0".into()));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPartition("times must be finite and strictly increasing".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `{0, h, 2h, …, t}`; the last step may be shorter than `h`.
pub fn uniform_partition(t: f64, h: f64) -> Result<Partition> {
    if !(h > 0.0 && t.is_finite() && h <= t) {
        return Err(Error::InvalidSpacing { t, h });
    }
    let mut times = Vec::with_capacity((t / h).ceil() as usize + 1);
    let mut i = 0u64;
    loop {
        let s = i as f64 * h;
        if s >= t - 1e-12 * t {
            break;
        }
        times.push(s);
        i += 1;
    }
    times.push(t);
    Partition::new(times)
}

/// Unit disks centered at `−γ(t_i)`, in partition order.
pub fn centers_for_partition(path: &UnitSpeedPath, partition: &Partition) -> Result<DiskConfig> {
    let centers = partition
        .times()
        .iter()
        .map(|&t| path.eval(t).map(|p| -&p))
        .collect::<Result<Vec<_>>>()?;
    DiskConfig::unit(centers)
}
