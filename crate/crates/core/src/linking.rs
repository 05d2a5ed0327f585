//! Gauss linking numbers of closed space curves and the Chern–Simons phase.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

pub const MIN_CURVE_SAMPLES: usize = 16;
/// Largest pre-rounding distance from an integer accepted by [`gauss_linking`].
pub const LINKING_ROUND_TOLERANCE: f64 = 0.05;
/// Minimum sample distance between curves, relative to the larger diameter.
pub const SEPARATION_FRACTION: f64 = 1e-3;
pub const HOPF_SAMPLES: usize = 512;

/// A closed polygonal curve; the closing segment runs from the last sample
/// back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceCurve {
    points: Vec<Vector3<f64>>,
}

impl SpaceCurve {
    /// Accepts samples with or without a repeated endpoint.
    pub fn new(mut points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(Error::NonFinite("curve sample"));
        }
        let diameter = diameter_of(&points);
        if points.len() > 1 {
            let gap = (points[0] - points[points.len() - 1]).norm();
            if gap <= 1e-10 * diameter {
                points.pop();
            }
        }
        if points.len() < MIN_CURVE_SAMPLES {
            return Err(Error::TooFewSamples {
                min: MIN_CURVE_SAMPLES,
                got: points.len(),
            });
        }
        let n = points.len();
        for i in 0..n {
            if (points[(i + 1) % n] - points[i]).norm() == 0.0 {
                return Err(Error::Degenerate("consecutive duplicate curve samples"));
            }
        }
        Ok(Self { points })
    }

    /// Circle `c + r (cos t e1 + sin t e2)`, `t` increasing.
    pub fn circle(center: Vector3<f64>, e1: Vector3<f64>, e2: Vector3<f64>, radius: f64, n: usize) -> Result<Self> {
        ensure_finite(radius, "radius")?;
        if radius <= 0.0 {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        let (u, v) = (e1.normalize(), e2.normalize());
        Self::new(
            (0..n)
                .map(|k| {
                    let t = TAU * k as f64 / n as f64;
                    center + radius * (t.cos() * u + t.sin() * v)
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        diameter_of(&self.points)
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }

    pub fn translated(&self, by: Vector3<f64>) -> Self {
        Self {
            points: self.points.iter().map(|p| p + by).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self.points.iter().map(|p| p * factor).collect(),
        }
    }

    /// Segment midpoints and displacement vectors.
    fn segments(&self) -> Vec<(Vector3<f64>, Vector3<f64>)> {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                (0.5 * (a + b), b - a)
            })
            .collect()
    }
}

fn diameter_of(points: &[Vector3<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// Pre-rounding Gauss double integral over segment midpoints.
pub fn gauss_integral(c1: &SpaceCurve, c2: &SpaceCurve) -> Result<f64> {
    let scale = c1.diameter().max(c2.diameter());
    let mut closest = f64::INFINITY;
    for a in c1.points() {
        for b in c2.points() {
            closest = closest.min((a - b).norm());
        }
    }
    if closest <= SEPARATION_FRACTION * scale {
        return Err(Error::NearIntersection { distance: closest });
    }
    let (s1, s2) = (c1.segments(), c2.segments());
    let partial: Vec<f64> = s1
        .par_iter()
        .map(|(m1, d1)| {
            s2.iter()
                .map(|(m2, d2)| {
                    let r = m1 - m2;
                    d1.cross(d2).dot(&r) / r.norm().powi(3)
                })
                .sum()
        })
        .collect();
    Ok(partial.iter().sum::<f64>() / (4.0 * PI))
}

/// Gauss linking number, rounded.
pub fn gauss_linking(c1: &SpaceCurve, c2: &SpaceCurve) -> Result<i64> {
    let value = gauss_integral(c1, c2)?;
    let rounded = value.round();
    let deviation = (value - rounded).abs();
    if deviation > LINKING_ROUND_TOLERANCE {
        return Err(Error::NonConvergentQuadrature { value, deviation });
    }
    Ok(rounded as i64)
}

/// Circle of radius `r` in the xy-plane about the origin, and one in the
/// xz-plane about `(r, 0, 0)`, oriented to link with number +1.
pub fn hopf_pair(radius: f64, samples: usize) -> Result<(SpaceCurve, SpaceCurve)> {
    let a = SpaceCurve::circle(Vector3::zeros(), Vector3::x(), Vector3::y(), radius, samples)?;
    let b = SpaceCurve::circle(Vector3::new(radius, 0.0, 0.0), Vector3::x(), -Vector3::z(), radius, samples)?;
    Ok((a, b))
}

/// Pairwise linking numbers and declared self-linking numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkData {
    lk: Vec<Vec<i64>>,
    slk: Vec<i64>,
}

impl LinkData {
    pub fn new(lk: Vec<Vec<i64>>, slk: Vec<i64>) -> Result<Self> {
        let n = lk.len();
        if slk.len() != n {
            return Err(Error::DimensionMismatch(n, slk.len()));
        }
        for row in &lk {
            if row.len() != n {
                return Err(Error::DimensionMismatch(n, row.len()));
            }
        }
        for i in 0..n {
            for j in 0..i {
                if lk[i][j] != lk[j][i] {
                    return Err(Error::InvalidParameter(format!("linking matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { lk, slk })
    }

    /// Two curves with the given linking number and no self-linking.
    pub fn pair(lk: i64) -> Self {
        Self {
            lk: vec![vec![0, lk], vec![lk, 0]],
            slk: vec![0, 0],
        }
    }

    /// Pairwise Gauss linking numbers of `curves`, self-linking 0.
    pub fn from_curves(curves: &[SpaceCurve]) -> Result<Self> {
        let n = curves.len();
        let mut lk = vec![vec![0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let l = gauss_linking(&curves[i], &curves[j])?;
                lk[i][j] = l;
                lk[j][i] = l;
            }
        }
        Ok(Self { lk, slk: vec![0; n] })
    }

    pub fn with_self_linking(mut self, slk: Vec<i64>) -> Result<Self> {
        if slk.len() != self.slk.len() {
            return Err(Error::DimensionMismatch(self.slk.len(), slk.len()));
        }
        self.slk = slk;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.slk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slk.is_empty()
    }

    pub fn lk(&self, i: usize, j: usize) -> i64 {
        self.lk[i][j]
    }

    pub fn slk(&self, i: usize) -> i64 {
        self.slk[i]
    }
}

/// `(4π/k) Σ_{i<j} q_i q_j Lk_ij + (2π/k) Σ_i q_i² SLk_i`, reduced to `[0, 2π)`.
pub fn cs_phase(charges: &[f64], link: &LinkData, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroLevel);
    }
    if charges.len() != link.len() {
        return Err(Error::DimensionMismatch(link.len(), charges.len()));
    }
    for &q in charges {
        ensure_finite(q, "charge")?;
    }
    let k = f64::from(k);
    let mut phase = 0.0;
    for i in 0..charges.len() {
        for j in i + 1..charges.len() {
            phase += 4.0 * PI / k * charges[i] * charges[j] * link.lk(i, j) as f64;
        }
        phase += TAU / k * charges[i] * charges[i] * link.slk(i) as f64;
    }
    Ok(phase.rem_euclid(TAU))
}
