//! Exact rational Lebesgue exponents and the exponent geometry used by the
//! interpolation argument for the multilinear Young inequality.
//!
//! Nothing in this module touches floating point except the explicit
//! [`Exponent::to_f64`] conversion used by the numerical layers.
//!
//! Regime boundaries follow the two-part statement of the strong/weak
//! multilinear Young inequality verbatim: case (a) is `1 < p < r'` (open),
//! case (b) is `r'/(1+r') <= p <= 1` (closed). The earlier Guliyev–Nazirova
//! range `r'/(1+r') <= p < r'` overlaps both; the classifier does not try to
//! reconcile the two and reports only the (a)/(b) split.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExponentError {
    #[error("exponent must be positive, got {0}")]
    NonPositive(String),
    #[error("exponent {0} is below 1")]
    BelowOne(Exponent),
    #[error("1/p + 1/r - 1 = {0} is negative; q would exceed infinity")]
    YoungOverflow(Rational64),
    #[error("r must satisfy 1 < r <= inf, got {0}")]
    BadR(Exponent),
    #[error("r = inf has no V vertices; use the W vertex set")]
    InfiniteR,
    #[error("m must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },
    #[error("q = {q} lies outside [1, r] for r = {r}")]
    QOutOfRange { q: Exponent, r: Exponent },
    #[error("coordinate {0} is outside [0, 1]")]
    CoordinateOutOfRange(Rational64),
    #[error("point sums to {got}, expected hyperplane sum {expected}")]
    OffHyperplane {
        got: Rational64,
        expected: Rational64,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("exact hull membership is only supported for m <= 4, got {0}")]
    HullTooLarge(usize),
    #[error("cannot parse exponent {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ExponentError>;

/// A Lebesgue exponent: a positive exact rational or infinity.
///
/// The value is stored reduced; `None` is infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    value: Option<Rational64>,
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent { value: None };

    pub fn new(numerator: i64, denominator: i64) -> Result<Self> {
        if denominator == 0 {
            return Err(ExponentError::NonPositive(format!("{numerator}/0")));
        }
        Self::from_rational(Rational64::new(numerator, denominator))
    }

    pub fn integer(k: i64) -> Result<Self> {
        Self::new(k, 1)
    }

    pub fn from_rational(r: Rational64) -> Result<Self> {
        if !r.is_positive() {
            return Err(ExponentError::NonPositive(r.to_string()));
        }
        Ok(Exponent { value: Some(r) })
    }

    /// Builds `p` from `1/p`; a zero reciprocal is infinity.
    pub fn from_reciprocal(recip: Rational64) -> Result<Self> {
        if recip.is_zero() {
            Ok(Self::INFINITY)
        } else {
            Self::from_rational(recip.recip())
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_none()
    }

    /// The finite value, or `None` for infinity.
    pub fn value(&self) -> Option<Rational64> {
        self.value
    }

    pub fn numerator(&self) -> Option<i64> {
        self.value.map(|v| *v.numer())
    }

    pub fn denominator(&self) -> Option<i64> {
        self.value.map(|v| *v.denom())
    }

    /// `1/p`, with `1/inf = 0`.
    pub fn reciprocal(&self) -> Rational64 {
        match self.value {
            Some(v) => v.recip(),
            None => Rational64::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self.value {
            Some(v) => *v.numer() as f64 / *v.denom() as f64,
            None => f64::INFINITY,
        }
    }

    pub fn is_at_least_one(&self) -> bool {
        self.value.map_or(true, |v| v >= Rational64::one())
    }

    fn require_at_least_one(self) -> Result<Self> {
        if self.is_at_least_one() {
            Ok(self)
        } else {
            Err(ExponentError::BelowOne(self))
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        // p <= q iff 1/p >= 1/q, which also handles infinity.
        other.reciprocal().cmp(&self.reciprocal())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            Some(v) if v.is_integer() => write!(f, "{}", v.numer()),
            Some(v) => write!(f, "{}/{}", v.numer(), v.denom()),
            None => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exponent({self})")
    }
}

impl FromStr for Exponent {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞" | "Inf" | "INF") {
            return Ok(Self::INFINITY);
        }
        let r = parse_rational(t).ok_or_else(|| ExponentError::Parse(s.to_string()))?;
        Self::from_rational(r)
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `"a/b"` or `"a"` into a reduced rational.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Rational64::new(n, d))
        }
        None => s.parse::<i64>().ok().map(Rational64::from_integer),
    }
}

/// Formats a rational as `"num/den"`, always with an explicit denominator.
pub fn format_rational(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Dual exponent `p' = p/(p-1)`, with `1' = inf` and `inf' = 1`.
pub fn dual(p: Exponent) -> Result<Exponent> {
    let p = p.require_at_least_one()?;
    // 1/p' = 1 - 1/p
    Exponent::from_reciprocal(Rational64::one() - p.reciprocal())
}

/// The Hölder exponent `p` with `1/p = sum 1/p_j`.
pub fn holder_exponent(ps: &[Exponent]) -> Result<Exponent> {
    let mut sum = Rational64::zero();
    for &p in ps {
        sum += p.require_at_least_one()?.reciprocal();
    }
    Exponent::from_reciprocal(sum)
}

/// The Young output exponent `q` with `1/q + 1 = 1/p + 1/r`.
pub fn young_exponent(p: Exponent, r: Exponent) -> Result<Exponent> {
    let recip = p.reciprocal() + r.reciprocal() - Rational64::one();
    if recip.is_negative() {
        return Err(ExponentError::YoungOverflow(recip));
    }
    Exponent::from_reciprocal(recip)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `1 < p < r'`: weak-type norm on `g`.
    CaseA,
    /// `r'/(1+r') <= p <= 1`: strong norm on `g`.
    CaseB,
    OutOfRange,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::CaseA => "CASE_A",
            Regime::CaseB => "CASE_B",
            Regime::OutOfRange => "OUT_OF_RANGE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub tag: Regime,
    /// Young output exponent; absent when `1/p + 1/r < 1`.
    pub q: Option<Exponent>,
}

pub fn classify_regime(p: Exponent, r: Exponent) -> Result<RegimeLabel> {
    if r.reciprocal() >= Rational64::one() {
        return Err(ExponentError::BadR(r));
    }
    let r_dual = dual(r)?;
    let q = young_exponent(p, r).ok();
    let one = Exponent::integer(1)?;

    let case_a = !r.is_infinite() && p > one && p < r_dual;
    // r'/(1+r') <= p  <=>  1/p <= 1 + 1/r'
    let lower_ok = p.reciprocal() <= Rational64::one() + r_dual.reciprocal();
    let case_b = lower_ok && p <= one;

    let tag = if case_a {
        Regime::CaseA
    } else if case_b {
        Regime::CaseB
    } else {
        Regime::OutOfRange
    };
    Ok(RegimeLabel { tag, q })
}

/// A point `(1/p_1, ..., 1/p_m)` of reciprocal exponents in `[0,1]^m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReciprocalPoint {
    coords: Vec<Rational64>,
}

impl ReciprocalPoint {
    pub fn new(coords: Vec<Rational64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(ExponentError::DimensionTooSmall {
                min: 2,
                got: coords.len(),
            });
        }
        for c in &coords {
            if c.is_negative() || *c > Rational64::one() {
                return Err(ExponentError::CoordinateOutOfRange(*c));
            }
        }
        Ok(ReciprocalPoint { coords })
    }

    pub fn from_exponents(ps: &[Exponent]) -> Result<Self> {
        Self::new(ps.iter().map(Exponent::reciprocal).collect())
    }

    pub fn coords(&self) -> &[Rational64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn sum(&self) -> Rational64 {
        self.coords.iter().copied().sum()
    }

    pub fn to_exponents(&self) -> Vec<Exponent> {
        self.coords
            .iter()
            .map(|&c| Exponent::from_reciprocal(c).expect("coordinate in [0,1]"))
            .collect()
    }

    /// Coordinates as `"num/den"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(format_rational).collect()
    }

    fn axpy(a: Rational64, x: &Self, b: Rational64, y: &Self) -> Vec<Rational64> {
        x.coords
            .iter()
            .zip(&y.coords)
            .map(|(&xi, &yi)| a * xi + b * yi)
            .collect()
    }
}

fn two_entry_point(
    m: usize,
    a: usize,
    va: Rational64,
    b: usize,
    vb: Rational64,
) -> ReciprocalPoint {
    let mut coords = vec![Rational64::zero(); m];
    coords[a] = va;
    coords[b] = vb;
    ReciprocalPoint { coords }
}

/// The `m(m-1)` vertices of `[0,1]^m ∩ {sum x = 1 + 1/r'}`: one coordinate 1,
/// another `1/r'`, the rest 0. Ordered by (position of 1, position of 1/r').
pub fn vertices_v(m: usize, r: Exponent) -> Result<Vec<ReciprocalPoint>> {
    if m < 3 {
        return Err(ExponentError::DimensionTooSmall { min: 3, got: m });
    }
    if r.is_infinite() {
        return Err(ExponentError::InfiniteR);
    }
    if r.reciprocal() >= Rational64::one() {
        return Err(ExponentError::BadR(r));
    }
    let s = dual(r)?.reciprocal();
    let mut out = Vec::with_capacity(m * (m - 1));
    for a in 0..m {
        for b in 0..m {
            if a != b {
                out.push(two_entry_point(m, a, Rational64::one(), b, s));
            }
        }
    }
    Ok(out)
}

/// The `m(m-1)/2` vertices with exactly two coordinates equal to 1 (the `r = inf` case).
pub fn vertices_w(m: usize) -> Result<Vec<ReciprocalPoint>> {
    if m < 3 {
        return Err(ExponentError::DimensionTooSmall { min: 3, got: m });
    }
    let one = Rational64::one();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in a + 1..m {
            out.push(two_entry_point(m, a, one, b, one));
        }
    }
    Ok(out)
}

/// The standard basis points of `R^m`.
pub fn vertices_u(m: usize) -> Result<Vec<ReciprocalPoint>> {
    if m < 2 {
        return Err(ExponentError::DimensionTooSmall { min: 2, got: m });
    }
    Ok((0..m)
        .map(|j| {
            let mut coords = vec![Rational64::zero(); m];
            coords[j] = Rational64::one();
            ReciprocalPoint { coords }
        })
        .collect())
}

/// The vertex set used at the `q = 1` endpoint: `V` for finite `r`, `W` for `r = inf`.
pub fn endpoint_vertices(m: usize, r: Exponent) -> Result<Vec<ReciprocalPoint>> {
    if r.is_infinite() {
        vertices_w(m)
    } else {
        vertices_v(m, r)
    }
}

/// `θ = r'(1/q - 1/r)`, the weight placed on the `q = 1` endpoint.
pub fn interpolation_parameter(q: Exponent, r: Exponent) -> Result<Rational64> {
    if r.reciprocal() >= Rational64::one() {
        return Err(ExponentError::BadR(r));
    }
    if !q.is_at_least_one() || q > r {
        return Err(ExponentError::QOutOfRange { q, r });
    }
    let r_dual = dual(r)?;
    let diff = q.reciprocal() - r.reciprocal();
    Ok(match r_dual.value() {
        Some(rd) => rd * diff,
        // r' = inf only when r = 1, excluded above
        None => unreachable!("r > 1 has a finite dual"),
    })
}

/// Vertices of the slice `[0,1]^m ∩ {sum x = s}`.
///
/// Every vertex of a cube slice lies on a cube edge, so it has at most one
/// coordinate outside `{0, 1}`.
pub fn slice_vertices(m: usize, s: Rational64) -> Vec<ReciprocalPoint> {
    let mut out = Vec::new();
    if s.is_negative() || s > Rational64::from_integer(m as i64) {
        return out;
    }
    for mask in 0u64..(1u64 << m) {
        let ones = mask.count_ones() as i64;
        let frac = s - Rational64::from_integer(ones);
        if frac.is_zero() {
            // a cube vertex on the hyperplane
            let coords = (0..m)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        Rational64::one()
                    } else {
                        Rational64::zero()
                    }
                })
                .collect();
            out.push(ReciprocalPoint { coords });
        } else if frac.is_positive() && frac < Rational64::one() {
            for free in 0..m {
                if mask >> free & 1 == 1 {
                    continue;
                }
                let coords = (0..m)
                    .map(|i| {
                        if i == free {
                            frac
                        } else if mask >> i & 1 == 1 {
                            Rational64::one()
                        } else {
                            Rational64::zero()
                        }
                    })
                    .collect();
                out.push(ReciprocalPoint { coords });
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// True when `point` is a vertex of the cube slice through it.
pub fn is_slice_vertex(point: &ReciprocalPoint) -> bool {
    point
        .coords
        .iter()
        .filter(|c| !c.is_zero() && !c.is_one())
        .count()
        <= 1
}

/// Certifies that a vertex `Z` of the slice `sum x = 1/q + 1/r'` equals
/// `(1-θ) U_j + θ V_i` (or `W_i` when `r = inf`), returning `(j, i)`.
///
/// Returns `Ok(None)` when the point is not a slice vertex, or when no pair
/// reproduces it exactly.
pub fn hull_decompose(
    point: &ReciprocalPoint,
    q: Exponent,
    r: Exponent,
) -> Result<Option<(usize, usize)>> {
    let theta = interpolation_parameter(q, r)?;
    let r_dual = dual(r)?;
    let expected = q.reciprocal() + r_dual.reciprocal();
    let got = point.sum();
    if got != expected {
        return Err(ExponentError::OffHyperplane { got, expected });
    }
    if !is_slice_vertex(point) {
        return Ok(None);
    }
    let m = point.dim();
    let us = vertices_u(m)?;
    let vs = endpoint_vertices(m, r)?;
    let one_minus = Rational64::one() - theta;
    for (j, u) in us.iter().enumerate() {
        for (i, v) in vs.iter().enumerate() {
            if ReciprocalPoint::axpy(one_minus, u, theta, v) == point.coords {
                return Ok(Some((j, i)));
            }
        }
    }
    Ok(None)
}

/// Recombines `(1-θ) U_j + θ V_i` for a decomposition returned by [`hull_decompose`].
pub fn recombine(
    m: usize,
    q: Exponent,
    r: Exponent,
    j: usize,
    i: usize,
) -> Result<ReciprocalPoint> {
    let theta = interpolation_parameter(q, r)?;
    let us = vertices_u(m)?;
    let vs = endpoint_vertices(m, r)?;
    let coords = ReciprocalPoint::axpy(Rational64::one() - theta, &us[j], theta, &vs[i]);
    Ok(ReciprocalPoint { coords })
}

/// Exact convex-hull membership for `m <= 4`.
///
/// By Carathéodory a point of the hull lies in the hull of an affinely
/// independent subset of at most `m + 1` generators; each subset is tested
/// by solving the barycentric system in rational arithmetic.
pub fn hull_contains(point: &ReciprocalPoint, generators: &[ReciprocalPoint]) -> Result<bool> {
    let m = point.dim();
    if m > 4 {
        return Err(ExponentError::HullTooLarge(m));
    }
    if let Some(g) = generators.iter().find(|g| g.dim() != m) {
        return Err(ExponentError::DimensionMismatch(m, g.dim()));
    }
    let max_k = (m + 1).min(generators.len());
    for k in 1..=max_k {
        let mut found = false;
        for_each_subset(generators.len(), k, &mut |idx| {
            if !found && barycentric_feasible(point, generators, idx) {
                found = true;
            }
        });
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Solves `sum λ_t g_t = point, sum λ_t = 1` and checks `λ >= 0`.
fn barycentric_feasible(point: &ReciprocalPoint, gens: &[ReciprocalPoint], idx: &[usize]) -> bool {
    let m = point.dim();
    let k = idx.len();
    // (m + 1) x (k + 1) augmented system
    let mut a: Vec<Vec<Rational64>> = (0..=m)
        .map(|row| {
            let mut r: Vec<Rational64> = idx
                .iter()
                .map(|&t| {
                    if row < m {
                        gens[t].coords[row]
                    } else {
                        Rational64::one()
                    }
                })
                .collect();
            r.push(if row < m {
                point.coords[row]
            } else {
                Rational64::one()
            });
            r
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..k {
        let Some(p) = (row..a.len()).find(|&i| !a[i][col].is_zero()) else {
            // dependent generators; a smaller subset covers this case
            return false;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for c in col..=k {
            a[row][c] *= inv;
        }
        for i in 0..a.len() {
            if i != row && !a[i][col].is_zero() {
                let factor = a[i][col];
                for c in col..=k {
                    let v = a[row][c];
                    a[i][c] -= factor * v;
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
    }
    // consistency of the remaining rows
    if a[row..].iter().any(|r| !r[k].is_zero()) {
        return false;
    }
    a[..k].iter().all(|r| !r[k].is_negative())
}
