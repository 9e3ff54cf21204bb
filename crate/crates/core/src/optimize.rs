//! Derivative-free minimisation of the expected escape time over planar
//! chains parametrised by their turn angles.
//!
//! Turn angles always describe a unit-speed path, and all-zero angles give
//! the straight line, so the search space contains the expected optimum.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::escape::{mean_escape_quadrature, QuadratureSettings};
use crate::paths::UnitSpeedPath;
use crate::rng::RandomStream;

/// Turn angles of a planar chain of equal segments, followed by a straight
/// terminal ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainParams {
    pub angles: Vec<f64>,
    pub segment_length: f64,
}

impl ChainParams {
    pub fn new(angles: Vec<f64>, segment_length: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidArgument("need at least one joint".into()));
        }
        if !(segment_length.is_finite() && segment_length > 0.0) {
            return Err(Error::InvalidArgument(format!("segment length {segment_length}")));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("non-finite angle".into()));
        }
        Ok(Self { angles, segment_length })
    }

    pub fn zeros(k: usize, segment_length: f64) -> Result<Self> {
        Self::new(vec![0.0; k], segment_length)
    }

    pub fn k(&self) -> usize {
        self.angles.len()
    }

    pub fn path(&self) -> Result<UnitSpeedPath> {
        UnitSpeedPath::planar_chain(self.segment_length, &self.angles)
    }

    pub fn max_abs_angle(&self) -> f64 {
        self.angles.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

/// Quadrature settings shared by every objective call of a run, plus the
/// penalty per unit of area still enclosed at the time cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveSettings {
    pub quadrature: QuadratureSettings,
    pub truncation_penalty: f64,
}

impl Default for ObjectiveSettings {
    fn default() -> Self {
        Self { quadrature: QuadratureSettings::default(), truncation_penalty: 8.0 }
    }
}

/// Grid estimate of `J` for the chain, penalised if it does not escape.
pub fn objective(params: &ChainParams, settings: &ObjectiveSettings) -> Result<f64> {
    let est = mean_escape_quadrature(&params.path()?, &settings.quadrature)?;
    Ok(if est.truncated {
        est.value + settings.truncation_penalty * est.final_area()
    } else {
        est.value
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    Zero,
    Given(Vec<f64>),
    /// Uniform in `[-half_width, half_width]^k`.
    Random { seed: u64, half_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    /// Stop once the largest vertex distance falls below this.
    pub diameter_tol: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            diameter_tol: 1e-4,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub angles: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationTrace {
    /// Every objective evaluation in order.
    pub iterations: Vec<Evaluation>,
    pub best: ChainParams,
    pub best_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl OptimizationTrace {
    /// Best value seen after each evaluation.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.iterations
            .iter()
            .scan(f64::INFINITY, |best, e| {
                *best = best.min(e.value);
                Some(*best)
            })
            .collect()
    }

    /// `iteration,J,angle_0,…` CSV.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let k = self.best.k();
        let header: Vec<String> = (0..k).map(|i| format!("angle_{i}")).collect();
        writeln!(out, "iteration,J,{}", header.join(","))?;
        for (i, e) in self.iterations.iter().enumerate() {
            let angles: Vec<String> = e.angles.iter().map(|a| a.to_string()).collect();
            writeln!(out, "{i},{},{}", e.value, angles.join(","))?;
        }
        Ok(())
    }
}

/// A new best must beat the old one by more than this, so rounding noise
/// between near-identical chains does not move the incumbent.
const IMPROVEMENT_TOL: f64 = 1e-12;

struct Counter<'a> {
    segment_length: f64,
    settings: &'a ObjectiveSettings,
    budget: usize,
    log: Vec<Evaluation>,
    best: Option<(Vec<f64>, f64)>,
}

impl Counter<'_> {
    fn exhausted(&self) -> bool {
        self.log.len() >= self.budget
    }

    fn eval(&mut self, angles: &[f64]) -> Result<f64> {
        let params = ChainParams::new(angles.to_vec(), self.segment_length)?;
        let value = objective(&params, self.settings)?;
        self.log.push(Evaluation { angles: angles.to_vec(), value });
        let improves = match &self.best {
            None => true,
            Some((_, b)) => value < b - IMPROVEMENT_TOL,
        };
        if improves {
            self.best = Some((angles.to_vec(), value));
        }
        Ok(value)
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, (a, _)) in simplex.iter().enumerate() {
        for (b, _) in &simplex[i + 1..] {
            let dist = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
    }
    d
}

fn affine(base: &[f64], toward: &[f64], t: f64) -> Vec<f64> {
    base.iter().zip(toward).map(|(b, x)| b + t * (x - b)).collect()
}

/// Nelder–Mead over the `k` turn angles with at most `budget` objective
/// evaluations (the starting point is always evaluated).
pub fn minimize(
    k: usize,
    segment_length: f64,
    init: &InitialGuess,
    budget: usize,
    settings: &ObjectiveSettings,
    nm: &NelderMeadOptions,
) -> Result<OptimizationTrace> {
    let start = match init {
        InitialGuess::Zero => vec![0.0; k],
        InitialGuess::Given(v) if v.len() == k => v.clone(),
        InitialGuess::Given(v) => {
            return Err(Error::DimensionMismatch { expected: k, found: v.len() });
        }
        InitialGuess::Random { seed, half_width } => {
            let mut rng = RandomStream::new(*seed, 0).rng();
            (0..k).map(|_| rng.random_range(-half_width..=*half_width)).collect()
        }
    };
    ChainParams::new(start.clone(), segment_length)?;

    let mut f = Counter { segment_length, settings, budget: budget.max(1), log: Vec::new(), best: None };
    let mut converged = false;
    let f0 = f.eval(&start)?;
    let mut simplex = vec![(start.clone(), f0)];
    for i in 0..k {
        if f.exhausted() {
            break;
        }
        let mut x = start.clone();
        x[i] += nm.initial_step;
        let v = f.eval(&x)?;
        simplex.push((x, v));
    }

    if simplex.len() == k + 1 {
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if diameter(&simplex) < nm.diameter_tol {
                converged = true;
                break;
            }
            if f.exhausted() {
                break;
            }
            let worst = simplex[k].clone();
            let centroid: Vec<f64> = (0..k)
                .map(|d| simplex[..k].iter().map(|(x, _)| x[d]).sum::<f64>() / k as f64)
                .collect();
            let xr = affine(&centroid, &worst.0, -nm.reflection);
            let fr = f.eval(&xr)?;

            if fr < simplex[0].1 {
                if f.exhausted() {
                    simplex[k] = (xr, fr);
                    continue;
                }
                let xe = affine(&centroid, &xr, nm.expansion);
                let fe = f.eval(&xe)?;
                simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[k - 1].1 {
                simplex[k] = (xr, fr);
                continue;
            }
            if f.exhausted() {
                if fr < worst.1 {
                    simplex[k] = (xr, fr);
                }
                continue;
            }
            let (xc, fc, accept) = if fr < worst.1 {
                let xc = affine(&centroid, &xr, nm.contraction);
                let fc = f.eval(&xc)?;
                let ok = fc <= fr;
                (xc, fc, ok)
            } else {
                let xc = affine(&centroid, &worst.0, nm.contraction);
                let fc = f.eval(&xc)?;
                let ok = fc < worst.1;
                (xc, fc, ok)
            };
            if accept {
                simplex[k] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                if f.exhausted() {
                    break;
                }
                let x = affine(&best, &vertex.0, nm.shrink);
                let v = f.eval(&x)?;
                *vertex = (x, v);
            }
        }
    }

    let (best_angles, best_value) = f.best.clone().expect("start point was evaluated");
    Ok(OptimizationTrace {
        evaluations: f.log.len(),
        iterations: f.log,
        best: ChainParams::new(best_angles, segment_length)?,
        best_value,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const J_LINE: f64 = 8.0 / (3.0 * PI);

    fn coarse() -> ObjectiveSettings {
        ObjectiveSettings {
            quadrature: QuadratureSettings { h: 0.005, t_cap: 16.0, area_floor: 1e-10 },
            truncation_penalty: 8.0,
        }
    }

    #[test]
    fn objective_at_line_and_turn() {
        let s = coarse();
        let zero = objective(&ChainParams::zeros(1, 1.0).unwrap(), &s).unwrap();
        assert!(zero >= J_LINE && zero - J_LINE < 5e-3);
        let turned = objective(&ChainParams::new(vec![PI / 2.0], 1.0).unwrap(), &s).unwrap();
        assert!(turned > zero);
    }

    #[test]
    fn objective_is_even() {
        let s = coarse();
        for angles in [vec![0.3, -0.7], vec![1.2, 0.4], vec![-0.1, 0.0]] {
            let a = objective(&ChainParams::new(angles.clone(), 0.5).unwrap(), &s).unwrap();
            let neg: Vec<f64> = angles.iter().map(|x| -x).collect();
            let b = objective(&ChainParams::new(neg, 0.5).unwrap(), &s).unwrap();
            assert!((a - b).abs() <= 1e-9, "{angles:?}: {a} vs {b}");
        }
    }

    #[test]
    fn trapped_chain_is_penalised() {
        // a square of side 0.25 repeated is impossible with one terminal ray,
        // so use a tight spiral of many right turns and a short cap
        let s = ObjectiveSettings {
            quadrature: QuadratureSettings { h: 0.01, t_cap: 0.5, area_floor: 1e-10 },
            truncation_penalty: 8.0,
        };
        let params = ChainParams::new(vec![PI / 2.0; 3], 0.1).unwrap();
        let est = mean_escape_quadrature(&params.path().unwrap(), &s.quadrature).unwrap();
        assert!(est.truncated);
        let v = objective(&params, &s).unwrap();
        assert!((v - (est.value + 8.0 * est.final_area())).abs() < 1e-15);
    }

    #[test]
    fn zero_start_stays_at_line() {
        let s = coarse();
        let trace = minimize(2, 0.5, &InitialGuess::Zero, 200, &s, &NelderMeadOptions::default()).unwrap();
        assert_eq!(trace.best.angles, vec![0.0, 0.0]);
        assert_eq!(trace.best_value, trace.iterations[0].value);
        assert!(trace.converged);
    }

    #[test]
    fn budget_limits() {
        let s = coarse();
        let nm = NelderMeadOptions::default();
        let t = minimize(2, 0.5, &InitialGuess::Given(vec![0.3, 0.2]), 0, &s, &nm).unwrap();
        assert_eq!(t.evaluations, 1);
        assert!(!t.converged);
        let t = minimize(2, 0.5, &InitialGuess::Given(vec![0.3, 0.2]), 7, &s, &nm).unwrap();
        assert!(t.evaluations <= 7);
        assert!(minimize(2, 0.5, &InitialGuess::Given(vec![0.3]), 7, &s, &nm).is_err());
    }

    #[test]
    fn best_so_far_is_monotone_and_certified() {
        let s = coarse();
        let t = minimize(
            2,
            0.5,
            &InitialGuess::Random { seed: 4, half_width: 0.5 },
            120,
            &s,
            &NelderMeadOptions::default(),
        )
        .unwrap();
        let best = t.best_so_far();
        assert!(best.windows(2).all(|w| w[1] <= w[0]));
        assert!(t.iterations.iter().all(|e| e.value >= J_LINE - 1e-6));
        assert!((t.best_value - best.last().unwrap()).abs() <= IMPROVEMENT_TOL);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("iteration,J,angle_0,angle_1\n"));
        assert_eq!(text.lines().count(), t.evaluations + 1);
    }
}
