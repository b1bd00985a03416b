//! Signed distance from the origin to the convex hull of 6D wrench
//! primitives — the grasp stability margin.
//!
//! The signed margin is `min_{|u|=1} max_w w·u`: positive when the origin is
//! interior (force closure, value = distance to the hull boundary), negative
//! when the origin is outside (value = minus the distance to the hull).
//!
//! Two routes are provided. [`signed_hull_margin`] evaluates the support
//! function over quasi-uniform sampled directions and locally refines the
//! best one; since it minimizes over a subset of directions it never
//! underestimates. [`exact_hull_margin`] enumerates candidate facets through
//! all 6-point subsets and, for an exterior origin, runs Wolfe's min-norm
//! point algorithm; it is exact for full-dimensional hulls and reserved for
//! small primitive sets.

use nalgebra::{DMatrix, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::Wrench;

/// Combinatorial bound on the exact oracle.
pub const MAX_EXACT_PRIMITIVES: usize = 40;

#[derive(Debug, Error)]
pub enum MarginError {
    #[error("exact margin supports up to {MAX_EXACT_PRIMITIVES} primitives, got {0}")]
    TooManyPrimitives(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginMethod {
    Sampled,
    Exact,
}

/// The grasp stability result: a signed origin-to-hull margin and its
/// clamped nonnegative value as reported by the metric.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StabilityMargin {
    pub signed_margin: f64,
    pub gs_value: f64,
    pub method: MarginMethod,
    /// Set when the primitives do not span all six wrench dimensions, in
    /// which case the hull has no interior and the margin is reported as 0.
    pub degenerate: bool,
}

impl StabilityMargin {
    fn new(signed_margin: f64, method: MarginMethod, degenerate: bool) -> Self {
        Self {
            signed_margin,
            gs_value: signed_margin.max(0.0),
            method,
            degenerate,
        }
    }
}

/// Support-sampled signed margin with local refinement.
///
/// Every evaluated direction yields an upper bound on the true margin, so
/// the minimum over evaluated directions never underestimates it; the
/// refinement (facet snapping plus subgradient descent from the best
/// sampled directions) closes the remaining gap.
pub fn signed_hull_margin(
    primitives: &[Wrench],
    directions: usize,
    refine_steps: usize,
    seed: u64,
) -> StabilityMargin {
    assert!(!primitives.is_empty(), "need at least one primitive");
    let points = dedup_points(primitives);
    let signed = signed_margin_points(&points, directions, refine_steps, seed);
    StabilityMargin::new(signed, MarginMethod::Sampled, false)
}

/// Exact signed margin by facet enumeration over all 6-point subsets, with
/// Wolfe's min-norm point algorithm for an exterior origin.
pub fn exact_hull_margin(primitives: &[Wrench]) -> Result<StabilityMargin, MarginError> {
    if primitives.len() > MAX_EXACT_PRIMITIVES {
        return Err(MarginError::TooManyPrimitives(primitives.len()));
    }
    assert!(!primitives.is_empty(), "need at least one primitive");
    let points = dedup_points(primitives);
    Ok(exact_margin_points(&points))
}

fn dedup_points(primitives: &[Wrench]) -> Vec<Vector6<f64>> {
    let mut points: Vec<Vector6<f64>> = Vec::with_capacity(primitives.len());
    for w in primitives {
        let v = w.to_vector6();
        if !points.contains(&v) {
            points.push(v);
        }
    }
    points
}

// ---------------------------------------------------------------------------
// sampled path

/// Directions kept as refinement starts.
const REFINE_STARTS: usize = 16;

pub(crate) fn signed_margin_points(
    points: &[Vector6<f64>],
    directions: usize,
    refine_steps: usize,
    seed: u64,
) -> f64 {
    // sample, keeping a handful of well-separated starts for refinement:
    // the support function restricted to the sphere has one local minimum
    // per facet, so a single descent from the best sample can land in the
    // wrong basin
    let mut starts: Vec<(f64, Vector6<f64>)> = Vec::with_capacity(REFINE_STARTS + 1);
    let consider = |h: f64, u: Vector6<f64>, starts: &mut Vec<(f64, Vector6<f64>)>| {
        if let Some(slot) = starts.iter_mut().find(|(_, v)| v.dot(&u) >= 0.98) {
            if h < slot.0 {
                *slot = (h, u);
            }
            return;
        }
        starts.push((h, u));
        starts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        starts.truncate(REFINE_STARTS);
    };

    let fallback = Vector6::repeat(1.0) / 6.0_f64.sqrt();
    consider(support(points, &fallback), fallback, &mut starts);
    let mut sampler = DirectionSampler::new(seed);
    for _ in 0..directions {
        let u = sampler.next_direction();
        consider(support(points, &u), u, &mut starts);
    }

    let scale = 1.0 + points.iter().map(|p| p.norm()).fold(0.0, f64::max);

    // when the origin is outside the hull, the direction away from the
    // min-norm point is optimal; the support evaluation keeps this honest
    // even if the min-norm solve were off
    let (x, dist) = min_norm_point(points);
    if dist > 1e-5 * scale {
        let u = -x / dist;
        consider(support(points, &u), u, &mut starts);
    }

    let passes_per_start = (refine_steps / REFINE_STARTS).max(10);
    let mut best_h = f64::INFINITY;
    let mut best_u = fallback;
    for &(h0, u0) in &starts {
        let (mut h, mut u) = local_refine(points, u0, h0, passes_per_start, scale);
        let walked = facet_walk(points, &u, h, 4);
        if walked.0 < h {
            h = walked.0;
            u = walked.1;
        }
        if h < best_h {
            best_h = h;
            best_u = u;
        }
    }

    // longer walk from the overall best, then snap to a fixed point
    let walked = facet_walk(points, &best_u, best_h, 16);
    if walked.0 < best_h {
        best_h = walked.0;
        best_u = walked.1;
    }
    for _ in 0..20 {
        let Some(snapped) = facet_snap(points, &best_u) else {
            break;
        };
        let h = support(points, &snapped);
        if h < best_h {
            best_h = h;
            best_u = snapped;
        } else {
            break;
        }
    }
    best_h
}

/// Greedy descent over candidate support planes: starting from the six
/// strongest support points of `u`, repeatedly swaps one member for the
/// outside point whose plane normal scores the lowest support value. Every
/// candidate is evaluated against all points, so the walk can only tighten
/// the margin estimate.
fn facet_walk(
    points: &[Vector6<f64>],
    u0: &Vector6<f64>,
    h0: f64,
    hops: usize,
) -> (f64, Vector6<f64>) {
    let n = points.len();
    if n < 7 {
        return (h0, *u0);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[b].dot(u0).partial_cmp(&points[a].dot(u0)).unwrap());
    let mut set: [usize; 6] = order[..6].try_into().unwrap();
    let mut best_h = h0;
    let mut best_u = *u0;
    for _ in 0..hops {
        let mut best_swap: Option<(usize, usize, f64, Vector6<f64>)> = None;
        for pos in 0..6 {
            for j in 0..n {
                if set.contains(&j) {
                    continue;
                }
                let mut candidate = set;
                candidate[pos] = j;
                let Some((normal, _)) = hyperplane_through(points, &candidate) else {
                    continue;
                };
                for dir in [normal, -normal] {
                    let h = support(points, &dir);
                    if h < best_h && best_swap.as_ref().is_none_or(|s| h < s.2) {
                        best_swap = Some((pos, j, h, dir));
                    }
                }
            }
        }
        let Some((pos, j, h, dir)) = best_swap else {
            break;
        };
        set[pos] = j;
        best_h = h;
        best_u = dir;
    }
    (best_h, best_u)
}

/// Local descent of the support function on the sphere from one start.
///
/// The support function is a max of linear functions, so its Riemannian
/// subdifferential at `u` is the convex hull of the tangentially projected
/// active points; the steepest descent direction is minus its min-norm
/// element, which moves cleanly through facet-intersection ridges where
/// single-coordinate moves stall. A facet snap runs each pass so the
/// iterate lands exactly on a facet normal once it is close.
fn local_refine(
    points: &[Vector6<f64>],
    mut u: Vector6<f64>,
    mut h: f64,
    passes: usize,
    scale: f64,
) -> (f64, Vector6<f64>) {
    let mut step = 0.25;
    for _ in 0..passes {
        let mut improved = false;
        if let Some(snapped) = facet_snap(points, &u) {
            let hs = support(points, &snapped);
            if hs < h {
                h = hs;
                u = snapped;
                improved = true;
            }
        }

        let active_tol = 1e-7 * scale;
        let tangentials: Vec<Vector6<f64>> = points
            .iter()
            .filter(|w| w.dot(&u) >= h - active_tol)
            .map(|w| w - w.dot(&u) * u)
            .collect();
        let (g, g_norm) = min_norm_point(&tangentials);
        if g_norm > 1e-12 * scale {
            let dir = -g / g_norm;
            let mut s = step;
            for _ in 0..24 {
                let v = (u + s * dir).normalize();
                let hv = support(points, &v);
                if hv < h - 0.1 * s * g_norm {
                    u = v;
                    h = hv;
                    step = (2.0 * s).min(0.5);
                    improved = true;
                    break;
                }
                s *= 0.5;
            }
        }

        if !improved {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    (h, u)
}

fn support(points: &[Vector6<f64>], u: &Vector6<f64>) -> f64 {
    points
        .iter()
        .map(|p| p.dot(u))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Fits the hyperplane through the six strongest support points of `u` and
/// returns its outward normal. Near a facet-optimal direction this lands on
/// the facet normal exactly.
fn facet_snap(points: &[Vector6<f64>], u: &Vector6<f64>) -> Option<Vector6<f64>> {
    if points.len() < 6 {
        return None;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].dot(u).partial_cmp(&points[a].dot(u)).unwrap());
    let idx: [usize; 6] = order[..6].try_into().unwrap();
    let (normal, _) = hyperplane_through(points, &idx)?;
    Some(if normal.dot(u) >= 0.0 {
        normal
    } else {
        -normal
    })
}

/// Quasi-uniform directions on the 5-sphere: a rank-6 Kronecker sequence
/// (generalized golden ratio) pushed through Box-Muller pairs, normalized.
struct DirectionSampler {
    state: [f64; 6],
    alpha: [f64; 6],
}

impl DirectionSampler {
    fn new(seed: u64) -> Self {
        // unique positive root of x^7 = x + 1
        let mut phi = 1.1_f64;
        for _ in 0..64 {
            let p6 = phi.powi(6);
            phi -= (p6 * phi - phi - 1.0) / (7.0 * p6 - 1.0);
        }
        let mut alpha = [0.0; 6];
        let mut a = 1.0;
        for slot in &mut alpha {
            a /= phi;
            *slot = a;
        }
        let mut sm = seed;
        let mut state = [0.0; 6];
        for slot in &mut state {
            *slot = (splitmix64(&mut sm) >> 11) as f64 / (1u64 << 53) as f64;
        }
        Self { state, alpha }
    }

    fn next_direction(&mut self) -> Vector6<f64> {
        for (s, a) in self.state.iter_mut().zip(&self.alpha) {
            *s = (*s + a).fract();
        }
        let mut z = [0.0; 6];
        for k in 0..3 {
            let u1 = self.state[2 * k].max(1e-12);
            let u2 = self.state[2 * k + 1];
            let r = (-2.0 * u1.ln()).sqrt();
            let t = 2.0 * std::f64::consts::PI * u2;
            z[2 * k] = r * t.cos();
            z[2 * k + 1] = r * t.sin();
        }
        let v = Vector6::from_row_slice(&z);
        let norm = v.norm();
        if norm < 1e-9 {
            Vector6::repeat(1.0) / 6.0_f64.sqrt()
        } else {
            v / norm
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// exact path

pub(crate) struct ExactOutcome {
    pub signed: f64,
    pub degenerate: bool,
}

pub(crate) fn exact_margin_points(points: &[Vector6<f64>]) -> StabilityMargin {
    let outcome = exact_outcome(points);
    StabilityMargin::new(
        if outcome.degenerate {
            0.0
        } else {
            outcome.signed
        },
        MarginMethod::Exact,
        outcome.degenerate,
    )
}

fn exact_outcome(points: &[Vector6<f64>]) -> ExactOutcome {
    let scale = 1.0 + points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;

    if points.len() < 7 || affine_rank(points, tol) < 6 {
        return ExactOutcome {
            signed: 0.0,
            degenerate: true,
        };
    }

    let mut min_facet = f64::INFINITY;
    let mut any_facet = false;
    for idx in combinations(points.len()) {
        let Some((normal, offset)) = hyperplane_through(points, &idx) else {
            continue;
        };
        let mut smin = f64::INFINITY;
        let mut smax = f64::NEG_INFINITY;
        for p in points {
            let s = normal.dot(p) - offset;
            smin = smin.min(s);
            smax = smax.max(s);
        }
        // a facet has every point on one closed side; orient it as n·x <= d
        let d = if smax <= tol {
            offset
        } else if smin >= -tol {
            -offset
        } else {
            continue;
        };
        any_facet = true;
        min_facet = min_facet.min(d);
    }

    if !any_facet {
        return ExactOutcome {
            signed: 0.0,
            degenerate: true,
        };
    }
    let signed = if min_facet >= 0.0 {
        min_facet
    } else {
        -min_norm_point(points).1
    };
    ExactOutcome {
        signed,
        degenerate: false,
    }
}

fn affine_rank(points: &[Vector6<f64>], tol: f64) -> usize {
    let mean = points.iter().sum::<Vector6<f64>>() / points.len() as f64;
    let m = DMatrix::from_fn(points.len(), 6, |r, c| points[r][c] - mean[c]);
    let sv = m.singular_values();
    sv.iter().filter(|&&s| s > tol).count()
}

/// Ascending 6-subsets of `0..n`.
fn combinations(n: usize) -> impl Iterator<Item = [usize; 6]> {
    let mut idx = [0, 1, 2, 3, 4, 5];
    let mut done = n < 6;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let current = idx;
        // advance lexicographically
        let mut k = 5usize;
        loop {
            if idx[k] < n - (6 - k) {
                idx[k] += 1;
                for j in k + 1..6 {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if k == 0 {
                done = true;
                break;
            }
            k -= 1;
        }
        Some(current)
    })
}

/// Hyperplane `n·x = d` (with unit normal) through six affinely independent
/// points; `None` when the points are affinely dependent.
#[allow(clippy::needless_range_loop)]
fn hyperplane_through(points: &[Vector6<f64>], idx: &[usize; 6]) -> Option<(Vector6<f64>, f64)> {
    // null space of the 6x7 system [p_j | -1]·[n; d] = 0
    let mut m = [[0.0f64; 7]; 6];
    let mut max_abs = 1.0f64;
    for (r, &i) in idx.iter().enumerate() {
        for c in 0..6 {
            m[r][c] = points[i][c];
            max_abs = max_abs.max(m[r][c].abs());
        }
        m[r][6] = -1.0;
    }
    let tol = 1e-12 * max_abs;

    let mut pivot_cols = [usize::MAX; 6];
    let mut rank = 0;
    for col in 0..7 {
        if rank == 6 {
            break;
        }
        let best =
            (rank..6).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[best][col].abs() <= tol {
            continue;
        }
        m.swap(rank, best);
        for r in 0..6 {
            if r != rank {
                let f = m[r][col] / m[rank][col];
                if f != 0.0 {
                    for c in col..7 {
                        m[r][c] -= f * m[rank][c];
                    }
                    m[r][col] = 0.0;
                }
            }
        }
        pivot_cols[rank] = col;
        rank += 1;
    }
    if rank < 6 {
        return None;
    }
    let free = (0..7).find(|c| !pivot_cols.contains(c)).unwrap();
    let mut v = [0.0f64; 7];
    v[free] = 1.0;
    for r in 0..6 {
        let pc = pivot_cols[r];
        v[pc] = -m[r][free] / m[r][pc];
    }
    let normal = Vector6::from_row_slice(&v[..6]);
    let norm = normal.norm();
    if norm < 1e-9 {
        return None;
    }
    Some((normal / norm, v[6] / norm))
}

/// Wolfe's min-norm point algorithm over the convex hull of `points`.
/// Returns the closest hull point to the origin and its norm.
pub(crate) fn min_norm_point(points: &[Vector6<f64>]) -> (Vector6<f64>, f64) {
    let scale2 = points
        .iter()
        .map(|p| p.norm_squared())
        .fold(0.0, f64::max)
        .max(1.0);
    let tol = 1e-12 * scale2;

    let start = (0..points.len())
        .min_by(|&a, &b| {
            points[a]
                .norm_squared()
                .partial_cmp(&points[b].norm_squared())
                .unwrap()
        })
        .unwrap();
    let mut corral = vec![start];
    let mut lambda = vec![1.0f64];
    let mut x = points[start];

    for _ in 0..400 {
        let (j, val) = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, x.dot(p)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if val >= x.norm_squared() - tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);

        loop {
            let Some(alpha) = affine_min_norm(points, &corral) else {
                corral.pop();
                lambda.pop();
                break;
            };
            if alpha.iter().all(|&a| a >= -1e-12) {
                lambda = alpha.iter().map(|&a| a.max(0.0)).collect();
                break;
            }
            // step from lambda toward alpha until the first coefficient dies
            let mut theta = 1.0f64;
            for (&l, &a) in lambda.iter().zip(&alpha) {
                if a < 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, &a) in lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            let mut k = 0;
            let mut removed = false;
            while k < corral.len() {
                if lambda[k] <= 1e-14 && corral.len() > 1 {
                    corral.remove(k);
                    lambda.remove(k);
                    removed = true;
                } else {
                    k += 1;
                }
            }
            if !removed {
                // numerical stall; accept the projected coefficients
                lambda = lambda.iter().map(|l| l.max(0.0)).collect();
                break;
            }
        }
        let total: f64 = lambda.iter().sum();
        x = Vector6::zeros();
        for (&i, &l) in corral.iter().zip(&lambda) {
            x += points[i] * (l / total);
        }
    }
    (x, x.norm())
}

/// Minimum-norm point of the affine hull of the corral: solves the KKT
/// system [G 1; 1ᵀ 0][α; ν] = [0; 1] with G the Gram matrix.
#[allow(clippy::needless_range_loop)]
fn affine_min_norm(points: &[Vector6<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let n = k + 1;
    let mut a = vec![vec![0.0f64; n + 1]; n];
    for (r, &i) in corral.iter().enumerate() {
        for (c, &j) in corral.iter().enumerate() {
            a[r][c] = points[i].dot(&points[j]);
        }
        a[r][k] = 1.0;
        a[r][n] = 0.0;
    }
    for c in 0..k {
        a[k][c] = 1.0;
    }
    a[k][n] = 1.0;

    for col in 0..n {
        let piv =
            (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c2 in col..=n {
                        a[r][c2] -= f * a[col][c2];
                    }
                }
            }
        }
    }
    Some((0..k).map(|r| a[r][n] / a[r][r]).collect())
}
