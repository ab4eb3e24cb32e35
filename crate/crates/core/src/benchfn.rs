//! Closed-form benchmark functions, their metadata, and seeded optimum shifts
//! for functions whose optimum sits somewhere an optimizer could guess.
//!
//! All functions are maximized. Classical minimization problems are stored
//! negated, so their ids carry a `neg_` prefix.

use std::collections::BTreeSet;
use std::f64::consts::{E, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fraction of a dimension's width a bias shift may move the optimum by.
pub const SHIFT_FRACTION: f64 = 0.1;

/// Shifts are multiples of 1 / SHIFT_GRID, so moving a dyadic optimum
/// location and moving it back is exact in floating point.
const SHIFT_GRID: f64 = (1u64 << 20) as f64;

/// Tolerance for the stored optimum value.
pub const OPTIMUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("point has {found} coordinates, function {function} expects {expected}")]
    DimensionMismatch {
        function: String,
        expected: usize,
        found: usize,
    },
    #[error("coordinate {dim} = {value} lies outside [{lo}, {hi}] for {function}")]
    DomainViolation {
        function: String,
        dim: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("coordinate {dim} = {value} must be an integer for {function}")]
    IntegralityViolation {
        function: String,
        dim: usize,
        value: f64,
    },
    #[error("function {0} has no predictable optimum to shift")]
    NotApplicable(String),
    #[error("unknown function id {0}")]
    UnknownFunction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Oscillatory,
    Discrete,
    MixedInteger,
    Boring,
    Nonsmooth,
    Unimodal,
    Multimodal,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Oscillatory,
        Property::Discrete,
        Property::MixedInteger,
        Property::Boring,
        Property::Nonsmooth,
        Property::Unimodal,
        Property::Multimodal,
    ];
}

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Interval { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Domain(pub Vec<Interval>);

impl Domain {
    pub fn new(bounds: &[(f64, f64)]) -> Self {
        Domain(bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect())
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Domain(vec![Interval::new(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.0.iter().zip(x).all(|(i, &v)| i.contains(v))
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.0.iter().map(Interval::midpoint).collect()
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        self.0
            .iter()
            .zip(x)
            .map(|(i, &v)| v.clamp(i.lo, i.hi))
            .collect()
    }

    /// Uniform point, one independent draw per dimension.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.0
            .iter()
            .map(|i| i.lo + rng.random::<f64>() * i.width())
            .collect()
    }
}

/// Objective formula on an in-domain point.
pub type Formula = fn(&[f64]) -> f64;

/// Seeded translation of a function's argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTransform {
    pub shift: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone)]
pub struct BenchmarkFunction {
    pub id: String,
    pub dim: usize,
    pub domain: Domain,
    pub integer_dims: BTreeSet<usize>,
    pub properties: BTreeSet<Property>,
    pub known_optimum_value: Option<f64>,
    pub known_optimum_location: Option<Vec<f64>>,
    pub predictable_optimum: bool,
    /// Upper bound on the number of distinct values, for discrete functions.
    pub discrete_image_bound: Option<usize>,
    formula: Formula,
    offset: Option<Vec<f64>>,
}

impl fmt::Debug for BenchmarkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkFunction")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("integer_dims", &self.integer_dims)
            .field("properties", &self.properties)
            .field("known_optimum_value", &self.known_optimum_value)
            .field("known_optimum_location", &self.known_optimum_location)
            .field("predictable_optimum", &self.predictable_optimum)
            .field("offset", &self.offset)
            .finish()
    }
}

/// Serialized catalog entry, as listed by `bench catalog` and in archive manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub dim: usize,
    pub domain: Domain,
    pub integer_dims: Vec<usize>,
    pub properties: Vec<Property>,
    pub known_optimum_value: Option<f64>,
    pub predictable_optimum: bool,
}

fn is_integral(v: f64) -> bool {
    v.fract() == 0.0
}

impl BenchmarkFunction {
    fn new(id: &str, domain: Domain, properties: &[Property], formula: Formula) -> Self {
        BenchmarkFunction {
            id: id.to_string(),
            dim: domain.dim(),
            domain,
            integer_dims: BTreeSet::new(),
            properties: properties.iter().copied().collect(),
            known_optimum_value: None,
            known_optimum_location: None,
            predictable_optimum: false,
            discrete_image_bound: None,
            formula,
            offset: None,
        }
    }

    fn integer_dims(mut self, dims: &[usize]) -> Self {
        self.integer_dims = dims.iter().copied().collect();
        self.properties.insert(Property::MixedInteger);
        self
    }

    fn optimum(mut self, location: Vec<f64>, value: f64) -> Self {
        self.known_optimum_value = Some(value);
        self.known_optimum_location = Some(location);
        self.predictable_optimum = self.location_is_predictable();
        self
    }

    fn discrete_bound(mut self, bound: usize) -> Self {
        self.discrete_image_bound = Some(bound);
        self
    }

    fn location_is_predictable(&self) -> bool {
        match &self.known_optimum_location {
            Some(loc) => {
                let mid = self.domain.midpoint();
                let at_mid = loc.iter().zip(&mid).all(|(a, b)| (a - b).abs() < 1e-12);
                at_mid || loc.iter().all(|&v| is_integral(v))
            }
            None => false,
        }
    }

    pub fn has(&self, property: Property) -> bool {
        self.properties.contains(&property)
    }

    /// Accumulated shift from [`apply_bias_shift`], if any.
    pub fn offset(&self) -> Option<&[f64]> {
        self.offset.as_deref()
    }

    /// Checks that `x` is a valid argument: right length, inside the box,
    /// integral on integer dimensions.
    pub fn check_point(&self, x: &[f64]) -> Result<(), BenchError> {
        if x.len() != self.dim {
            return Err(BenchError::DimensionMismatch {
                function: self.id.clone(),
                expected: self.dim,
                found: x.len(),
            });
        }
        for (dim, (interval, &value)) in self.domain.0.iter().zip(x).enumerate() {
            if !interval.contains(value) {
                return Err(BenchError::DomainViolation {
                    function: self.id.clone(),
                    dim,
                    value,
                    lo: interval.lo,
                    hi: interval.hi,
                });
            }
            if self.integer_dims.contains(&dim) && !is_integral(value) {
                return Err(BenchError::IntegralityViolation {
                    function: self.id.clone(),
                    dim,
                    value,
                });
            }
        }
        Ok(())
    }

    /// Evaluates the function at `x`, optionally under an extra shift.
    ///
    /// With a shift the formula sees `x - shift`, clamped back into the
    /// original box so the function stays defined on the whole domain.
    pub fn evaluate(&self, x: &[f64], transform: Option<&BiasTransform>) -> Result<f64, BenchError> {
        self.check_point(x)?;
        let extra = transform.map(|t| t.shift.as_slice());
        if self.offset.is_none() && extra.is_none() {
            return Ok((self.formula)(x));
        }
        let moved: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let a = self.offset.as_ref().map_or(0.0, |o| o[i]);
                let b = extra.map_or(0.0, |s| s[i]);
                v - a - b
            })
            .collect();
        Ok((self.formula)(&self.domain.clamp(&moved)))
    }

    pub fn to_entry(&self) -> CatalogEntry {
        CatalogEntry {
            id: self.id.clone(),
            dim: self.dim,
            domain: self.domain.clone(),
            integer_dims: self.integer_dims.iter().copied().collect(),
            properties: self.properties.iter().copied().collect(),
            known_optimum_value: self.known_optimum_value,
            predictable_optimum: self.predictable_optimum,
        }
    }
}

/// Rounds integer dimensions half away from zero. Continuous ones are kept.
pub fn round_integer_dims(x: &[f64], integer_dims: &BTreeSet<usize>) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| if integer_dims.contains(&i) { v.round() } else { v })
        .collect()
}

fn shift_is_degenerate(f: &BenchmarkFunction, new_location: &[f64]) -> bool {
    let mid = f.domain.midpoint();
    let at_mid = new_location
        .iter()
        .zip(&mid)
        .all(|(a, b)| (a - b).abs() < 1e-12);
    let continuous_dims: Vec<usize> = (0..f.dim).filter(|i| !f.integer_dims.contains(i)).collect();
    let all_integral = continuous_dims.iter().all(|&i| is_integral(new_location[i]));
    at_mid || all_integral
}

/// Moves the optimum of a predictable function by a seeded offset of up to
/// [`SHIFT_FRACTION`] of each dimension's width.
///
/// Offsets that would put the optimum on or outside the boundary are redrawn
/// per coordinate, and whole draws that land back on the midpoint or on
/// integer coordinates are redrawn as well. Integer dimensions are shifted by
/// whole numbers so the optimum stays feasible.
pub fn apply_bias_shift(
    f: &BenchmarkFunction,
    seed: u64,
) -> Result<(BenchmarkFunction, BiasTransform), BenchError> {
    if !f.predictable_optimum {
        return Err(BenchError::NotApplicable(f.id.clone()));
    }
    let location = f
        .known_optimum_location
        .as_ref()
        .ok_or_else(|| BenchError::NotApplicable(f.id.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (shift, new_location) = loop {
        let mut shift = Vec::with_capacity(f.dim);
        for (i, interval) in f.domain.0.iter().enumerate() {
            let reach = SHIFT_FRACTION * interval.width();
            let s = loop {
                let mut s = (rng.random_range(-reach..=reach) * SHIFT_GRID).round() / SHIFT_GRID;
                if f.integer_dims.contains(&i) {
                    s = s.round();
                    if s == 0.0 {
                        break s;
                    }
                }
                let moved = location[i] + s;
                if moved > interval.lo && moved < interval.hi {
                    break s;
                }
                if f.integer_dims.contains(&i) && interval.contains(moved) {
                    break s;
                }
            };
            shift.push(s);
        }
        let new_location: Vec<f64> = location.iter().zip(&shift).map(|(l, s)| l + s).collect();
        if !shift_is_degenerate(f, &new_location) {
            break (shift, new_location);
        }
    };

    let mut shifted = f.clone();
    let total = match &f.offset {
        Some(o) => o.iter().zip(&shift).map(|(a, b)| a + b).collect(),
        None => shift.clone(),
    };
    shifted.offset = Some(total);
    shifted.known_optimum_location = Some(new_location);
    shifted.predictable_optimum = false;
    Ok((shifted, BiasTransform { shift, seed }))
}

mod formulas {
    use super::*;

    pub fn neg_sphere(x: &[f64]) -> f64 {
        -x.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn neg_rosenbrock(x: &[f64]) -> f64 {
        -x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum::<f64>()
    }

    pub fn neg_ackley(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sq = (x.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let cos = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
        -(-20.0 * (-0.2 * sq).exp() - cos.exp() + 20.0 + E)
    }

    pub fn neg_rastrigin(x: &[f64]) -> f64 {
        -(10.0 * x.len() as f64
            + x.iter()
                .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                .sum::<f64>())
    }

    pub fn neg_griewank(x: &[f64]) -> f64 {
        let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
        let prod: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
            .product();
        -(1.0 + sum - prod)
    }

    pub fn neg_styblinski_tang(x: &[f64]) -> f64 {
        -0.5 * x
            .iter()
            .map(|v| v.powi(4) - 16.0 * v * v + 5.0 * v)
            .sum::<f64>()
    }

    pub fn neg_booth(x: &[f64]) -> f64 {
        -((x[0] + 2.0 * x[1] - 7.0).powi(2) + (2.0 * x[0] + x[1] - 5.0).powi(2))
    }

    pub fn neg_matyas(x: &[f64]) -> f64 {
        -(0.26 * (x[0] * x[0] + x[1] * x[1]) - 0.48 * x[0] * x[1])
    }

    pub fn neg_three_hump_camel(x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        -(2.0 * a * a - 1.05 * a.powi(4) + a.powi(6) / 6.0 + a * b + b * b)
    }

    pub fn neg_levy(x: &[f64]) -> f64 {
        let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
        let n = w.len();
        let head = (PI * w[0]).sin().powi(2);
        let mid: f64 = w[..n - 1]
            .iter()
            .map(|wi| (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2)))
            .sum();
        let tail = (w[n - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[n - 1]).sin().powi(2));
        -(head + mid + tail)
    }

    pub fn neg_zakharov(x: &[f64]) -> f64 {
        let sq: f64 = x.iter().map(|v| v * v).sum();
        let lin: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| 0.5 * (i + 1) as f64 * v)
            .sum();
        -(sq + lin.powi(2) + lin.powi(4))
    }

    pub fn neg_beale(x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        -((1.5 - a + a * b).powi(2)
            + (2.25 - a + a * b * b).powi(2)
            + (2.625 - a + a * b.powi(3)).powi(2))
    }

    /// Product of two cosine ripples under a shallow bowl; peak 1 at (0.3, 0.7).
    pub fn cosine_ripple(x: &[f64]) -> f64 {
        let (u, v) = (x[0] - 0.3, x[1] - 0.7);
        (6.0 * PI * u).cos() * (6.0 * PI * v).cos() - (u * u + v * v)
    }

    /// Sum of damped cosines; peak 3 at (0.62, 0.15, 0.41).
    pub fn damped_cosines(x: &[f64]) -> f64 {
        const CENTER: [f64; 3] = [0.62, 0.15, 0.41];
        x.iter()
            .zip(CENTER)
            .map(|(v, c)| {
                let d = v - c;
                (10.0 * PI * d).cos() * (-4.0 * d * d).exp()
            })
            .sum()
    }

    pub fn neg_step(x: &[f64]) -> f64 {
        -x.iter().map(|v| (v.abs() + 0.5).floor().powi(2)).sum::<f64>()
    }

    /// Quadratic bowl quantized to steps of 0.1.
    pub fn quantized_bowl(x: &[f64]) -> f64 {
        let q = (x[0] - 0.35).powi(2) + (x[1] - 0.6).powi(2);
        -(10.0 * q).round() / 10.0
    }

    /// Integer x0 in [0, 10], continuous x1.
    pub fn mixed_int_bowl(x: &[f64]) -> f64 {
        -((x[0] - 3.0).powi(2) + (x[1] - 0.4).powi(2))
    }

    /// Integer x0 in [-5, 5], continuous x1 and x2 in [0, 1].
    pub fn mixed_int_ripple(x: &[f64]) -> f64 {
        let u = x[1] - 0.2;
        let v = x[2] - 0.85;
        -0.5 * (x[0] + 1.0).abs() + (6.0 * PI * u).cos() * (-u * u).exp() - v.abs()
    }

    fn basin(x: &[f64], center: &[f64], radius: f64) -> f64 {
        let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
        (1.0 - d2 / (radius * radius)).max(0.0)
    }

    /// Flat zero except for a radius-0.1 basin around (0.72, 0.31).
    pub fn boring_basin_2d(x: &[f64]) -> f64 {
        basin(x, &[0.72, 0.31], 0.1)
    }

    /// Flat zero except for a radius-0.2 basin around (0.23, 0.61, 0.78).
    pub fn boring_basin_3d(x: &[f64]) -> f64 {
        basin(x, &[0.23, 0.61, 0.78], 0.2)
    }

    pub fn neg_abs_sum(x: &[f64]) -> f64 {
        -x.iter().map(|v| (v - 0.5).abs()).sum::<f64>()
    }

    pub fn neg_bukin6(x: &[f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        -(100.0 * (b - 0.01 * a * a).abs().sqrt() + 0.01 * (a + 10.0).abs())
    }
}

/// Minimizer of x^4 - 16x^2 + 5x on [-5, 5], the real root of
/// 4x^3 - 32x + 5 = 0 near -2.9, by the trigonometric cubic formula.
fn styblinski_tang_argmin() -> f64 {
    // x^3 + p x + q = 0 with p = -8, q = 5/4
    let p: f64 = -8.0;
    let q: f64 = 1.25;
    let r = 2.0 * (-p / 3.0).sqrt();
    let phi = (3.0 * q / (p * r)).acos() / 3.0;
    // roots: r cos(phi - 2 pi k / 3); the smallest one is k = 1
    let roots = [0, 1, 2].map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos());
    roots.into_iter().fold(f64::INFINITY, f64::min)
}

/// The benchmark suite. Ids are stable; order is part of the contract for
/// campaign defaults.
pub fn catalog() -> Vec<BenchmarkFunction> {
    use formulas::*;
    use Property::*;

    let st = styblinski_tang_argmin();
    let st_peak = neg_styblinski_tang(&[st, st]);

    vec![
        BenchmarkFunction::new("neg_sphere_2d", Domain::cube(2, -5.0, 5.0), &[Unimodal], neg_sphere)
            .optimum(vec![0.0; 2], 0.0),
        BenchmarkFunction::new("neg_sphere_5d", Domain::cube(5, -5.0, 5.0), &[Unimodal], neg_sphere)
            .optimum(vec![0.0; 5], 0.0),
        BenchmarkFunction::new(
            "neg_rosenbrock_2d",
            Domain::cube(2, -2.0, 2.0),
            &[Unimodal],
            neg_rosenbrock,
        )
        .optimum(vec![1.0, 1.0], 0.0),
        BenchmarkFunction::new("neg_ackley_2d", Domain::cube(2, -5.0, 5.0), &[Multimodal], neg_ackley)
            .optimum(vec![0.0; 2], 0.0),
        BenchmarkFunction::new(
            "neg_rastrigin_2d",
            Domain::cube(2, -5.12, 5.12),
            &[Multimodal, Oscillatory],
            neg_rastrigin,
        )
        .optimum(vec![0.0; 2], 0.0),
        BenchmarkFunction::new(
            "neg_griewank_2d",
            Domain::cube(2, -10.0, 10.0),
            &[Multimodal, Oscillatory],
            neg_griewank,
        )
        .optimum(vec![0.0; 2], 0.0),
        BenchmarkFunction::new(
            "neg_styblinski_tang_2d",
            Domain::cube(2, -5.0, 5.0),
            &[Multimodal],
            neg_styblinski_tang,
        )
        .optimum(vec![st; 2], st_peak),
        BenchmarkFunction::new("neg_booth_2d", Domain::cube(2, -10.0, 10.0), &[Unimodal], neg_booth)
            .optimum(vec![1.0, 3.0], 0.0),
        BenchmarkFunction::new("neg_matyas_2d", Domain::cube(2, -10.0, 10.0), &[Unimodal], neg_matyas)
            .optimum(vec![0.0; 2], 0.0),
        BenchmarkFunction::new(
            "neg_three_hump_camel_2d",
            Domain::cube(2, -5.0, 5.0),
            &[Multimodal],
            neg_three_hump_camel,
        )
        .optimum(vec![0.0; 2], 0.0),
        BenchmarkFunction::new("neg_levy_2d", Domain::cube(2, -10.0, 10.0), &[Multimodal], neg_levy)
            .optimum(vec![1.0, 1.0], 0.0),
        BenchmarkFunction::new(
            "neg_zakharov_3d",
            Domain::cube(3, -5.0, 10.0),
            &[Unimodal],
            neg_zakharov,
        )
        .optimum(vec![0.0; 3], 0.0),
        BenchmarkFunction::new("neg_beale_2d", Domain::cube(2, -4.5, 4.5), &[Unimodal], neg_beale)
            .optimum(vec![3.0, 0.5], 0.0),
        BenchmarkFunction::new(
            "cosine_ripple_2d",
            Domain::cube(2, 0.0, 1.0),
            &[Oscillatory, Multimodal],
            cosine_ripple,
        )
        .optimum(vec![0.3, 0.7], 1.0),
        BenchmarkFunction::new(
            "damped_cosines_3d",
            Domain::cube(3, 0.0, 1.0),
            &[Oscillatory, Multimodal],
            damped_cosines,
        )
        .optimum(vec![0.62, 0.15, 0.41], 3.0),
        BenchmarkFunction::new(
            "neg_step_2d",
            Domain::cube(2, -5.0, 5.0),
            &[Discrete, Nonsmooth, Unimodal],
            neg_step,
        )
        .optimum(vec![0.0; 2], 0.0)
        .discrete_bound(36),
        BenchmarkFunction::new(
            "quantized_bowl_2d",
            Domain::cube(2, 0.0, 1.0),
            &[Discrete, Nonsmooth, Unimodal],
            quantized_bowl,
        )
        .optimum(vec![0.35, 0.6], 0.0)
        .discrete_bound(9),
        BenchmarkFunction::new(
            "mixed_int_bowl_2d",
            Domain::new(&[(0.0, 10.0), (-2.0, 2.0)]),
            &[Unimodal],
            mixed_int_bowl,
        )
        .integer_dims(&[0])
        .optimum(vec![3.0, 0.4], 0.0),
        BenchmarkFunction::new(
            "mixed_int_ripple_3d",
            Domain::new(&[(-5.0, 5.0), (0.0, 1.0), (0.0, 1.0)]),
            &[Multimodal, Oscillatory, Nonsmooth],
            mixed_int_ripple,
        )
        .integer_dims(&[0])
        .optimum(vec![-1.0, 0.2, 0.85], 1.0),
        BenchmarkFunction::new(
            "boring_basin_2d",
            Domain::cube(2, 0.0, 1.0),
            &[Boring, Nonsmooth, Unimodal],
            boring_basin_2d,
        )
        .optimum(vec![0.72, 0.31], 1.0),
        BenchmarkFunction::new(
            "boring_basin_3d",
            Domain::cube(3, 0.0, 1.0),
            &[Boring, Nonsmooth, Unimodal],
            boring_basin_3d,
        )
        .optimum(vec![0.23, 0.61, 0.78], 1.0),
        BenchmarkFunction::new(
            "neg_abs_sum_3d",
            Domain::cube(3, -1.0, 2.0),
            &[Nonsmooth, Unimodal],
            neg_abs_sum,
        )
        .optimum(vec![0.5; 3], 0.0),
        BenchmarkFunction::new(
            "neg_bukin6_2d",
            Domain::new(&[(-15.0, -5.0), (-3.0, 3.0)]),
            &[Nonsmooth, Multimodal],
            neg_bukin6,
        )
        .optimum(vec![-10.0, 1.0], 0.0),
    ]
}

/// Looks up one catalog function by id.
pub fn find(id: &str) -> Result<BenchmarkFunction, BenchError> {
    catalog()
        .into_iter()
        .find(|f| f.id == id)
        .ok_or_else(|| BenchError::UnknownFunction(id.to_string()))
}

/// Catalog as the JSON document used by docs and the dashboard index.
pub fn catalog_json() -> serde_json::Value {
    let entries: Vec<CatalogEntry> = catalog().iter().map(BenchmarkFunction::to_entry).collect();
    serde_json::to_value(entries).expect("catalog entries serialize")
}

/// Functions without nonsmooth, discrete, boring or integer structure.
pub fn is_smooth(f: &BenchmarkFunction) -> bool {
    ![
        Property::Nonsmooth,
        Property::Discrete,
        Property::Boring,
        Property::MixedInteger,
    ]
    .iter()
    .any(|p| f.has(*p))
}
