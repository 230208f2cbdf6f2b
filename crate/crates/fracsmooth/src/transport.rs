//! Dual Lipschitz norms of signed measures: Kantorovich and
//! Kantorovich–Rubinshtein.
//!
//! For a signed measure `omega` on R^k,
//!
//! ```text
//! kantorovich(omega) = sup { int phi d(omega) : Lip(phi) <= 1 }          (omega(R^k) = 0)
//! kr(omega)          = sup { int phi d(omega) : Lip(phi) <= 1, |phi| <= 1 }
//! ```
//!
//! Both are computed exactly on atomic measures:
//!
//! * dimension 1, Kantorovich: the closed form `sum |W_i| * gap_i` over the
//!   sorted atoms, where `W_i` is the running signed mass;
//! * dimension 1, KR: a chain linear program — on a line the pairwise
//!   Lipschitz constraints reduce to adjacent ones, and the maximum is found
//!   by dynamic programming over concave piecewise-linear value functions;
//! * dimension >= 2: the equivalent minimum-cost transportation problem
//!   (successive shortest paths with node potentials).  For KR the ground
//!   cost is `min(|x - y|, 2)` and any mass imbalance is absorbed by a
//!   virtual node at price 1, which is the flow formulation dual to the
//!   bounded-Lipschitz constraint set.
//!
//! Supports larger than the exact-solver budget are coarsened by snapping
//! atoms to a grid; the induced error is at most the snap radius times the
//! total absolute mass and is recorded in the report.

use std::collections::HashMap;

use crate::measures::{DistanceReport, EmpiricalMeasure};
use crate::{Error, Result};

/// Largest support the exact flow solver accepts before coarsening kicks in.
pub const DEFAULT_SUPPORT_LIMIT: usize = 2000;

/// Options for the dual-norm solvers.
#[derive(Debug, Clone, Copy)]
pub struct TransportOptions {
    /// Supports above this size are grid-coarsened (or rejected).
    pub support_limit: usize,
    /// When false, oversized supports return [`Error::SupportTooLarge`]
    /// instead of being coarsened.
    pub coarsen: bool,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            support_limit: DEFAULT_SUPPORT_LIMIT,
            coarsen: true,
        }
    }
}

// ---------------------------------------------------------------------------
// Concave piecewise-linear value functions for the 1-d chain LP.
// ---------------------------------------------------------------------------

/// A concave piecewise-linear function on a closed interval, stored as
/// breakpoints with strictly increasing abscissae.
#[derive(Debug, Clone)]
struct ConcavePwl {
    pts: Vec<(f64, f64)>,
}

impl ConcavePwl {
    fn constant(lo: f64, hi: f64, value: f64) -> Self {
        ConcavePwl {
            pts: vec![(lo, value), (hi, value)],
        }
    }

    fn add_linear(&mut self, slope: f64) {
        for p in &mut self.pts {
            p.1 += slope * p.0;
        }
    }

    fn max_value(&self) -> f64 {
        self.pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    fn eval(&self, x: f64) -> f64 {
        let pts = &self.pts;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        if x >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let j = pts.partition_point(|p| p.0 < x);
        let (x0, y0) = pts[j - 1];
        let (x1, y1) = pts[j];
        if x1 == x0 {
            return y0.max(y1);
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// `W(x) = max { V(x') : |x' - x| <= g }`: for a concave function this
    /// widens the top into a plateau and shifts the two monotone branches
    /// outward by `g`.
    fn window_max(&self, g: f64) -> Self {
        if g <= 0.0 {
            return self.clone();
        }
        let vmax = self.max_value();
        let il = self.pts.iter().position(|p| p.1 == vmax).unwrap();
        let ir = self.pts.iter().rposition(|p| p.1 == vmax).unwrap();
        let mut pts = Vec::with_capacity(self.pts.len() + 2);
        for p in &self.pts[..=il] {
            pts.push((p.0 - g, p.1));
        }
        pts.push((self.pts[ir].0 + g, vmax));
        for p in &self.pts[ir + 1..] {
            pts.push((p.0 + g, p.1));
        }
        ConcavePwl { pts }
    }

    /// Restricts the domain to `[lo, hi]`, interpolating the endpoints.
    fn clip(&self, lo: f64, hi: f64) -> Self {
        let mut pts = vec![(lo, self.eval(lo))];
        pts.extend(self.pts.iter().copied().filter(|p| p.0 > lo && p.0 < hi));
        pts.push((hi, self.eval(hi)));
        ConcavePwl { pts }
    }

    /// Midpoint of the maximizing plateau.
    fn argmax(&self) -> f64 {
        let vmax = self.max_value();
        let il = self.pts.iter().position(|p| p.1 == vmax).unwrap();
        let ir = self.pts.iter().rposition(|p| p.1 == vmax).unwrap();
        0.5 * (self.pts[il].0 + self.pts[ir].0)
    }
}

/// Maximizes `sum_j masses[j] * phi_j` subject to `|phi_j| <= bound` and
/// `|phi_{j+1} - phi_j| <= gaps[j]`.
///
/// The value function in `phi_j` stays concave piecewise-linear through the
/// recursion, so each step is a window maximum, a clip, and a linear add.
/// Breakpoints accumulate along the chain, so this is quadratic in the worst
/// case; production paths use the `O(n log n)` flow dual ([`kr_1d_flow`]) and
/// keep this direct route as an independent oracle in the tests.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn chain_lp_max(masses: &[f64], gaps: &[f64], bound: f64) -> f64 {
    assert_eq!(
        gaps.len() + 1,
        masses.len(),
        "chain LP needs one gap per adjacent pair"
    );
    assert!(bound > 0.0 && bound.is_finite());
    let mut v = ConcavePwl::constant(-bound, bound, 0.0);
    v.add_linear(masses[0]);
    for (i, &g) in gaps.iter().enumerate() {
        v = v.window_max(g).clip(-bound, bound);
        v.add_linear(masses[i + 1]);
    }
    v.max_value()
}

/// Like [`chain_lp_max`] but also recovers one maximizing `phi` vector.
///
/// Keeps every intermediate value function, so memory is quadratic in the
/// chain length; intended for grids of at most a few thousand nodes.
pub(crate) fn chain_lp_solve(masses: &[f64], gaps: &[f64], bound: f64) -> (f64, Vec<f64>) {
    assert_eq!(
        gaps.len() + 1,
        masses.len(),
        "chain LP needs one gap per adjacent pair"
    );
    assert!(bound > 0.0 && bound.is_finite());
    let n = masses.len();
    let mut states: Vec<ConcavePwl> = Vec::with_capacity(n);
    let mut v = ConcavePwl::constant(-bound, bound, 0.0);
    v.add_linear(masses[0]);
    states.push(v.clone());
    for (i, &g) in gaps.iter().enumerate() {
        v = v.window_max(g).clip(-bound, bound);
        v.add_linear(masses[i + 1]);
        states.push(v.clone());
    }
    let value = v.max_value();
    // Backtrack: the last node maximizes the final state; each earlier node
    // maximizes its own state within reach of its successor.  Concavity makes
    // the restricted argmax a clamp of the global one.
    let mut phi = vec![0.0; n];
    phi[n - 1] = states[n - 1].argmax();
    for j in (0..n - 1).rev() {
        let lo = (phi[j + 1] - gaps[j]).max(-bound);
        let hi = (phi[j + 1] + gaps[j]).min(bound);
        phi[j] = states[j].argmax().clamp(lo, hi);
    }
    (value, phi)
}

// ---------------------------------------------------------------------------
// One-dimensional closed forms.
// ---------------------------------------------------------------------------

fn sorted_coalesced(atoms: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = atoms.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for (x, w) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

/// Exact 1-d Kantorovich norm of a balanced atomic measure: the running
/// signed mass integrated between consecutive atoms.
pub fn w1_1d(atoms: &[(f64, f64)]) -> f64 {
    let sorted = sorted_coalesced(atoms);
    let mut cum = 0.0;
    let mut value = 0.0;
    for pair in sorted.windows(2) {
        cum += pair[0].1;
        value += cum.abs() * (pair[1].0 - pair[0].0);
    }
    value
}

/// Exact 1-d KR norm of an atomic measure.
///
/// Solved through the flow dual (see [`kr_1d_flow`]), which runs in
/// `O(n log n)`; the direct chain-LP route ([`chain_lp_max`] with box 1) is
/// kept as an independent small-instance oracle in the tests.
fn kr_1d(atoms: &[(f64, f64)]) -> f64 {
    let sorted = sorted_coalesced(atoms);
    if sorted.len() == 1 {
        return sorted[0].1.abs();
    }
    kr_1d_flow(&sorted)
}

// ---------------------------------------------------------------------------
// The flow dual of the 1-d KR norm, solved by slope trick.
// ---------------------------------------------------------------------------

// Order-preserving bijection from finite f64 to u64, so BTreeMap can index
// breakpoints by position.
fn ord_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1u64 << 63)
    }
}

fn key_pos(k: u64) -> f64 {
    if k >> 63 == 1 {
        f64::from_bits(k & !(1u64 << 63))
    } else {
        f64::from_bits(!k)
    }
}

/// A convex piecewise-linear function
///
/// ```text
/// f(d) = min_value + sum_{(l,w) in left} w * max(0, l - d)
///                  + sum_{(r,w) in right} w * max(0, d - r)
/// ```
///
/// with every `left` key at most every `right` key (the minimizing plateau
/// sits between them).  Supports the two operations of the slope trick:
/// adding `w * |d - a|` and clipping the outer slopes to [-1, 1] (the
/// inf-convolution with `|.|`, which preserves the minimum).
struct SlopeFn {
    left: std::collections::BTreeMap<u64, f64>,
    right: std::collections::BTreeMap<u64, f64>,
    left_weight: f64,
    right_weight: f64,
    min_value: f64,
}

impl SlopeFn {
    /// Starts as `f(d) = |d|`.
    fn abs_at_zero() -> Self {
        let mut left = std::collections::BTreeMap::new();
        let mut right = std::collections::BTreeMap::new();
        left.insert(ord_key(0.0), 1.0);
        right.insert(ord_key(0.0), 1.0);
        SlopeFn {
            left,
            right,
            left_weight: 1.0,
            right_weight: 1.0,
            min_value: 0.0,
        }
    }

    /// `f += w * |d - a|`.
    fn add_abs(&mut self, a: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        let ka = ord_key(a);
        *self.left.entry(ka).or_insert(0.0) += w;
        self.left_weight += w;
        *self.right.entry(ka).or_insert(0.0) += w;
        self.right_weight += w;
        // Restore the plateau invariant by swapping overlapping weight
        // between the innermost breakpoints; the minimum rises by the moved
        // weight times the overlap width.
        loop {
            let (lk, lw) = match self.left.iter().next_back() {
                Some((k, v)) => (*k, *v),
                None => break,
            };
            let (rk, rw) = match self.right.iter().next() {
                Some((k, v)) => (*k, *v),
                None => break,
            };
            if lk <= rk {
                break;
            }
            let t = lw.min(rw);
            self.min_value += t * (key_pos(lk) - key_pos(rk));
            if lw - t <= 0.0 {
                self.left.remove(&lk);
            } else {
                self.left.insert(lk, lw - t);
            }
            if rw - t <= 0.0 {
                self.right.remove(&rk);
            } else {
                self.right.insert(rk, rw - t);
            }
            *self.left.entry(rk).or_insert(0.0) += t;
            *self.right.entry(lk).or_insert(0.0) += t;
        }
    }

    /// Inf-convolution with `|.|`: clips the outermost slopes to [-1, 1]
    /// by trimming breakpoint weight from the outside in.  The minimum and
    /// the plateau are unchanged.
    fn clip_unit_slopes(&mut self) {
        while self.left_weight > 1.0 {
            let (k, w) = {
                let (k, v) = self.left.iter().next().expect("positive weight");
                (*k, *v)
            };
            let excess = self.left_weight - 1.0;
            if w <= excess {
                self.left.remove(&k);
                self.left_weight -= w;
            } else {
                self.left.insert(k, w - excess);
                self.left_weight = 1.0;
            }
        }
        while self.right_weight > 1.0 {
            let (k, w) = {
                let (k, v) = self.right.iter().next_back().expect("positive weight");
                (*k, *v)
            };
            let excess = self.right_weight - 1.0;
            if w <= excess {
                self.right.remove(&k);
                self.right_weight -= w;
            } else {
                self.right.insert(k, w - excess);
                self.right_weight = 1.0;
            }
        }
    }

    fn eval(&self, a: f64) -> f64 {
        let ka = ord_key(a);
        let mut v = self.min_value;
        for (k, w) in self
            .left
            .range((std::ops::Bound::Excluded(ka), std::ops::Bound::Unbounded))
        {
            v += w * (key_pos(*k) - a);
        }
        for (k, w) in self.right.range(..ka) {
            v += w * (a - key_pos(*k));
        }
        v
    }
}

/// Exact 1-d KR norm through the LP dual of the chain program: route mass
/// along the line at cost `gap` per unit per step, or create/destroy it at
/// unit price (the dual of the box `|phi| <= 1`).  With `M_j` the running
/// mass and `D_j` the cumulative disposal, the cost is
///
/// ```text
/// min_D  sum_{j<n-1} gap_j * |M_j - D_j| + sum_j |D_j - D_{j-1}|,
///        D_{-1} = 0,  D_{n-1} = M_{n-1},
/// ```
///
/// a chain of weighted absolute deviations solved in `O(n log n)` by the
/// slope trick: the value function in `D_j` stays convex piecewise-linear;
/// each data term adds one breakpoint and each chain step clips the outer
/// slopes to [-1, 1].
fn kr_1d_flow(sorted: &[(f64, f64)]) -> f64 {
    let n = sorted.len();
    debug_assert!(n >= 2);
    let mut f = SlopeFn::abs_at_zero();
    let mut prefix = 0.0;
    for j in 0..n - 1 {
        if j > 0 {
            f.clip_unit_slopes();
        }
        prefix += sorted[j].1;
        f.add_abs(prefix, sorted[j + 1].0 - sorted[j].0);
    }
    f.clip_unit_slopes();
    prefix += sorted[n - 1].1;
    f.eval(prefix)
}

// ---------------------------------------------------------------------------
// Grid coarsening.
// ---------------------------------------------------------------------------

/// Snaps atoms to cell centers of a grid with about `target` cells, merging
/// weights.  Returns the coarsened measure and the worst-case norm error
/// (snap radius times total absolute mass; Lipschitz test functions move by
/// at most the snap distance per unit mass).
pub(crate) fn coarsen(omega: &EmpiricalMeasure, target: usize) -> Result<(EmpiricalMeasure, f64)> {
    let dim = omega.dim();
    let cells_per_dim = ((target.max(1) as f64).powf(1.0 / dim as f64).floor() as i64).max(1);
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in omega.points() {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let widths: Vec<f64> = (0..dim)
        .map(|d| ((hi[d] - lo[d]) / cells_per_dim as f64).max(1e-12))
        .collect();
    let mut cells: HashMap<Vec<i64>, f64> = HashMap::new();
    for (i, p) in omega.points().enumerate() {
        let key: Vec<i64> = (0..dim)
            .map(|d| (((p[d] - lo[d]) / widths[d]).floor() as i64).min(cells_per_dim - 1))
            .collect();
        *cells.entry(key).or_insert(0.0) += omega.weight(i);
    }
    let mut keys: Vec<Vec<i64>> = cells.keys().cloned().collect();
    keys.sort_unstable();
    let mut coords = Vec::with_capacity(keys.len() * dim);
    let mut weights = Vec::with_capacity(keys.len());
    for key in keys {
        let w = cells[&key];
        for d in 0..dim {
            coords.push(lo[d] + (key[d] as f64 + 0.5) * widths[d]);
        }
        weights.push(w);
    }
    let radius = 0.5 * widths.iter().map(|w| w * w).sum::<f64>().sqrt();
    let error = radius * omega.total_abs_mass();
    Ok((EmpiricalMeasure::new(dim, coords, weights)?, error))
}

// ---------------------------------------------------------------------------
// Minimum-cost transportation (successive shortest paths with potentials).
// ---------------------------------------------------------------------------

/// Solves the transportation problem between positive and negative atoms.
///
/// `cap = Some(c)` caps the ground cost at `c` and lets a virtual node absorb
/// any mass imbalance at price `c / 2` (the KR configuration: cap 2, box 1).
/// `cap = None` is the plain Kantorovich cost and requires balanced masses.
fn min_cost_transport(
    dim: usize,
    src_pos: &[f64],
    src_mass: &[f64],
    snk_pos: &[f64],
    snk_mass: &[f64],
    cap: Option<f64>,
) -> Result<f64> {
    let total_src: f64 = src_mass.iter().sum();
    let total_snk: f64 = snk_mass.iter().sum();
    let imbalance = total_src - total_snk;
    let scale = (total_src + total_snk).max(1e-300);
    let eps = 1e-13 * scale;

    // Virtual teleport node on the deficient side.
    let teleport_price = cap.map(|c| 0.5 * c);
    let (virtual_snk, virtual_src) = if imbalance > eps {
        (true, false)
    } else if imbalance < -eps {
        (false, true)
    } else {
        (false, false)
    };
    if (virtual_snk || virtual_src) && teleport_price.is_none() {
        return Err(Error::MassNotBalanced { total: imbalance });
    }

    let ns = src_mass.len() + virtual_src as usize;
    let nt = snk_mass.len() + virtual_snk as usize;
    if ns == 0 || nt == 0 {
        return Ok(0.0);
    }
    let euclid = |i: usize, j: usize| -> f64 {
        let a = &src_pos[i * dim..(i + 1) * dim];
        let b = &snk_pos[j * dim..(j + 1) * dim];
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        d2.sqrt()
    };
    let cost = |i: usize, j: usize| -> f64 {
        if i >= src_mass.len() || j >= snk_mass.len() {
            return teleport_price.unwrap_or(f64::INFINITY);
        }
        match cap {
            Some(c) => euclid(i, j).min(c),
            None => euclid(i, j),
        }
    };

    let mut supply: Vec<f64> = src_mass.to_vec();
    if virtual_src {
        supply.push(-imbalance);
    }
    let mut demand: Vec<f64> = snk_mass.to_vec();
    if virtual_snk {
        demand.push(imbalance);
    }
    let mut remaining: f64 = demand.iter().sum();

    let n = ns + nt;
    let mut pi = vec![0.0; n];
    let mut flow: Vec<HashMap<usize, f64>> = vec![HashMap::new(); ns];
    let mut back: Vec<Vec<usize>> = vec![Vec::new(); nt];

    let max_iters = 20 * n + 100;
    let mut iters = 0;
    while remaining > eps {
        iters += 1;
        if iters > max_iters {
            return Err(Error::LpInfeasible(format!(
                "transport solver exceeded {max_iters} augmentations"
            )));
        }
        // Multi-source Dijkstra on reduced costs.
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut visited = vec![false; n];
        for (i, &s) in supply.iter().enumerate() {
            if s > eps {
                dist[i] = 0.0;
            }
        }
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..n {
                if !visited[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            visited[u] = true;
            if u < ns {
                for j in 0..nt {
                    let v = ns + j;
                    if visited[v] {
                        continue;
                    }
                    let rc = (cost(u, j) + pi[u] - pi[v]).max(0.0);
                    if dist[u] + rc < dist[v] {
                        dist[v] = dist[u] + rc;
                        parent[v] = u;
                    }
                }
            } else {
                let j = u - ns;
                for &i in &back[j] {
                    if visited[i] {
                        continue;
                    }
                    let f = flow[i].get(&j).copied().unwrap_or(0.0);
                    if f <= eps {
                        continue;
                    }
                    let rc = (-cost(i, j) + pi[u] - pi[i]).max(0.0);
                    if dist[u] + rc < dist[i] {
                        dist[i] = dist[u] + rc;
                        parent[i] = u;
                    }
                }
            }
        }
        // Cheapest reachable sink with open demand.
        let mut target = usize::MAX;
        let mut best = f64::INFINITY;
        for (j, &d) in demand.iter().enumerate() {
            if d > eps && dist[ns + j] < best {
                best = dist[ns + j];
                target = j;
            }
        }
        if target == usize::MAX {
            return Err(Error::LpInfeasible(
                "transport solver found no augmenting path".into(),
            ));
        }
        let dt = dist[ns + target];
        for v in 0..n {
            pi[v] += if dist[v].is_finite() { dist[v].min(dt) } else { dt };
        }
        // Trace the augmenting path and find the bottleneck.
        let mut path = Vec::new();
        let mut v = ns + target;
        while parent[v] != usize::MAX {
            path.push((parent[v], v));
            v = parent[v];
        }
        let start = v;
        let mut delta = supply[start].min(demand[target]);
        for &(a, b) in &path {
            if a >= ns {
                // Backward arc: sink a feeds source b by returning flow.
                delta = delta.min(flow[b].get(&(a - ns)).copied().unwrap_or(0.0));
            }
        }
        if !(delta > 0.0) {
            return Err(Error::LpInfeasible(
                "transport solver stalled on a zero bottleneck".into(),
            ));
        }
        for &(a, b) in &path {
            if a < ns {
                let j = b - ns;
                let entry = flow[a].entry(j).or_insert(0.0);
                if *entry == 0.0 {
                    back[j].push(a);
                }
                *entry += delta;
            } else {
                let j = a - ns;
                *flow[b].get_mut(&j).unwrap() -= delta;
            }
        }
        supply[start] -= delta;
        demand[target] -= delta;
        remaining -= delta;
    }

    let mut value = 0.0;
    for (i, edges) in flow.iter().enumerate() {
        let mut keys: Vec<usize> = edges.keys().copied().collect();
        keys.sort_unstable();
        for j in keys {
            value += edges[&j] * cost(i, j);
        }
    }
    Ok(value)
}

/// Splits a signed measure into positive and negative atom arrays, dropping
/// negligible weights.
fn split_signed(omega: &EmpiricalMeasure) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let threshold = 1e-15 * omega.total_abs_mass();
    let mut src_pos = Vec::new();
    let mut src_mass = Vec::new();
    let mut snk_pos = Vec::new();
    let mut snk_mass = Vec::new();
    for (i, p) in omega.points().enumerate() {
        let w = omega.weight(i);
        if w > threshold {
            src_pos.extend_from_slice(p);
            src_mass.push(w);
        } else if w < -threshold {
            snk_pos.extend_from_slice(p);
            snk_mass.push(-w);
        }
    }
    (src_pos, src_mass, snk_pos, snk_mass)
}

fn prepared(
    omega: &EmpiricalMeasure,
    opts: &TransportOptions,
) -> Result<(EmpiricalMeasure, f64)> {
    if omega.len() <= opts.support_limit {
        return Ok((omega.clone(), 0.0));
    }
    if !opts.coarsen {
        return Err(Error::SupportTooLarge {
            size: omega.len(),
            limit: opts.support_limit,
        });
    }
    coarsen(omega, opts.support_limit)
}

/// KR norm of a signed measure (default options).
pub fn kr_norm(omega: &EmpiricalMeasure) -> Result<DistanceReport> {
    kr_norm_with(omega, &TransportOptions::default())
}

/// KR norm of a signed measure with explicit solver options.
pub fn kr_norm_with(omega: &EmpiricalMeasure, opts: &TransportOptions) -> Result<DistanceReport> {
    let (measure, coarsening_error) = prepared(omega, opts)?;
    let value = if measure.dim() == 1 {
        let atoms = measure.project(&[1.0])?;
        kr_1d(&atoms)
    } else {
        let (src_pos, src_mass, snk_pos, snk_mass) = split_signed(&measure);
        min_cost_transport(
            measure.dim(),
            &src_pos,
            &src_mass,
            &snk_pos,
            &snk_mass,
            Some(2.0),
        )?
    };
    Ok(DistanceReport {
        metric: "kr".into(),
        value,
        resolution_error: 0.0,
        noise_floor: 0.0,
        coarsening_error,
        error: coarsening_error,
        support: measure.len(),
    })
}

/// Kantorovich norm of a balanced signed measure (default options).
pub fn kantorovich_norm(omega: &EmpiricalMeasure) -> Result<DistanceReport> {
    kantorovich_norm_with(omega, &TransportOptions::default())
}

/// Kantorovich norm with explicit solver options.  Unbalanced measures are
/// rejected: the supremum over unbounded Lipschitz functions is infinite.
pub fn kantorovich_norm_with(
    omega: &EmpiricalMeasure,
    opts: &TransportOptions,
) -> Result<DistanceReport> {
    let total = omega.total_mass();
    if total.abs() > 1e-9 * omega.total_abs_mass().max(1e-300) {
        return Err(Error::MassNotBalanced { total });
    }
    if omega.dim() == 1 {
        // The closed form is linear-time after sorting: no coarsening needed.
        let atoms = omega.project(&[1.0])?;
        return Ok(DistanceReport {
            metric: "kantorovich".into(),
            value: w1_1d(&atoms),
            resolution_error: 0.0,
            noise_floor: 0.0,
            coarsening_error: 0.0,
            error: 0.0,
            support: omega.len(),
        });
    }
    let (measure, coarsening_error) = prepared(omega, opts)?;
    let (src_pos, mut src_mass, snk_pos, mut snk_mass) = split_signed(&measure);
    // Remove the residual float imbalance (<= 1e-9 relative) by rescaling;
    // the value shift is below the coarsening error.
    let ts: f64 = src_mass.iter().sum();
    let tk: f64 = snk_mass.iter().sum();
    if ts > 0.0 && tk > 0.0 {
        let mean = 0.5 * (ts + tk);
        for w in &mut src_mass {
            *w *= mean / ts;
        }
        for w in &mut snk_mass {
            *w *= mean / tk;
        }
    }
    let value = min_cost_transport(measure.dim(), &src_pos, &src_mass, &snk_pos, &snk_mass, None)?;
    Ok(DistanceReport {
        metric: "kantorovich".into(),
        value,
        resolution_error: 0.0,
        noise_floor: 0.0,
        coarsening_error,
        error: coarsening_error,
        support: measure.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

    fn two_point(h: f64, dim: usize) -> EmpiricalMeasure {
        let mut coords = vec![0.0; dim];
        let mut shifted = vec![0.0; dim];
        shifted[0] = h;
        coords.extend_from_slice(&shifted);
        EmpiricalMeasure::new(dim, coords, vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn kr_two_point_oracle() {
        // kr(delta_0 - delta_h) = min(|h|, 2): full transport below the cap,
        // teleporting both atoms above it.
        for &h in &[0.25, 0.5, 1.0, 1.9, 2.0, 3.0, 10.0] {
            for dim in 1..=3 {
                let omega = two_point(h, dim);
                let report = kr_norm(&omega).unwrap();
                assert!(
                    (report.value - h.min(2.0)).abs() < 1e-10,
                    "kr two-point at h={h} dim={dim}: {}",
                    report.value
                );
            }
        }
    }

    #[test]
    fn kantorovich_two_point_oracle() {
        for &h in &[0.25, 1.0, 3.0, 10.0] {
            for dim in 1..=3 {
                let omega = two_point(h, dim);
                let report = kantorovich_norm(&omega).unwrap();
                assert!(
                    (report.value - h).abs() < 1e-10,
                    "kantorovich two-point at h={h} dim={dim}: {}",
                    report.value
                );
            }
        }
    }

    #[test]
    fn kantorovich_rejects_unbalanced() {
        let omega = EmpiricalMeasure::new(1, vec![0.0, 1.0], vec![1.0, -0.5]).unwrap();
        assert!(matches!(
            kantorovich_norm(&omega),
            Err(Error::MassNotBalanced { .. })
        ));
    }

    fn random_balanced(dim: usize, pairs: usize, seed: u64) -> EmpiricalMeasure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for _ in 0..2 * pairs {
            for _ in 0..dim {
                coords.push(rng.gen_range(-3.0..3.0));
            }
        }
        for i in 0..2 * pairs {
            weights.push(if i % 2 == 0 { 1.0 } else { -1.0 } / pairs as f64);
        }
        EmpiricalMeasure::new(dim, coords, weights).unwrap()
    }

    #[test]
    fn kr_never_exceeds_kantorovich_or_mass() {
        // The KR test class is a subset of the Kantorovich class, and |phi|<=1
        // bounds the integral by the total absolute mass.
        for seed in 0..10 {
            for dim in 1..=2 {
                let omega = random_balanced(dim, 12, seed);
                let kr = kr_norm(&omega).unwrap().value;
                let k = kantorovich_norm(&omega).unwrap().value;
                assert!(kr <= k + 1e-10, "kr {kr} > kantorovich {k}");
                assert!(kr <= omega.total_abs_mass() + 1e-10);
            }
        }
    }

    #[test]
    fn flow_solver_matches_chain_lp_in_1d() {
        // The 1-d KR value is computed by two independent engines: the chain
        // dynamic program and the capped-cost flow solver.
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let n = rng.gen_range(2..40);
            let atoms: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(-1.0..1.0f64)))
                .collect();
            let dp = kr_1d(&atoms);
            let coords: Vec<f64> = atoms.iter().map(|a| a.0).collect();
            let weights: Vec<f64> = atoms.iter().map(|a| a.1).collect();
            let omega = EmpiricalMeasure::new(1, coords, weights).unwrap();
            let (sp, sm, kp, km) = split_signed(&omega);
            let flow = min_cost_transport(1, &sp, &sm, &kp, &km, Some(2.0)).unwrap();
            assert!(
                (dp - flow).abs() < 1e-9 * (1.0 + dp.abs()),
                "seed {seed}: chain LP {dp} vs flow {flow}"
            );
        }
    }

    #[test]
    fn chain_lp_solve_recovers_a_feasible_maximizer() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
            let n = rng.gen_range(2..60);
            let masses: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gaps: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.01..0.5)).collect();
            let bound = rng.gen_range(0.05..2.0);
            let value = chain_lp_max(&masses, &gaps, bound);
            let (value2, phi) = chain_lp_solve(&masses, &gaps, bound);
            assert!((value - value2).abs() <= 1e-9 * (1.0 + value.abs()));
            let attained: f64 = masses.iter().zip(&phi).map(|(m, p)| m * p).sum();
            assert!(
                (attained - value).abs() <= 1e-9 * (1.0 + value.abs()),
                "seed {seed}: feasible point attains {attained}, DP value {value}"
            );
            for (j, p) in phi.iter().enumerate() {
                assert!(p.abs() <= bound + 1e-12, "node {j} violates the box");
            }
            for (j, pair) in phi.windows(2).enumerate() {
                assert!(
                    (pair[1] - pair[0]).abs() <= gaps[j] + 1e-12,
                    "gap {j} violates the slope constraint"
                );
            }
        }
    }

    #[test]
    fn kr_flow_matches_chain_lp_on_random_instances() {
        // Two independent algorithms for the same LP: the breakpoint DP over
        // test functions and the slope-trick flow dual must agree exactly.
        for seed in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xF10 + seed);
            let n = rng.gen_range(2..80);
            let spread = *[0.05, 1.0, 20.0].iter().nth((seed % 3) as usize).unwrap();
            let mut atoms: Vec<(f64, f64)> = (0..n)
                .map(|_| {
                    (
                        rng.gen_range(-spread..spread),
                        rng.gen_range(-1.0f64..1.0),
                    )
                })
                .collect();
            if seed % 2 == 0 {
                // Balance half the instances so both signed and net-mass
                // regimes are covered.
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                let share = total / n as f64;
                for a in &mut atoms {
                    a.1 -= share;
                }
            }
            let sorted = sorted_coalesced(&atoms);
            let masses: Vec<f64> = sorted.iter().map(|a| a.1).collect();
            let gaps: Vec<f64> = sorted.windows(2).map(|p| p[1].0 - p[0].0).collect();
            let chain = chain_lp_max(&masses, &gaps, 1.0);
            let flow = kr_1d_flow(&sorted);
            assert!(
                (chain - flow).abs() <= 1e-9 * (1.0 + chain.abs()),
                "seed {seed}: chain LP {chain} vs flow dual {flow}"
            );
        }
    }

    #[test]
    fn flow_solver_matches_closed_form_kantorovich_in_1d() {
        for seed in 0..20 {
            let omega = random_balanced(1, 15, 200 + seed);
            let atoms = omega.project(&[1.0]).unwrap();
            let closed = w1_1d(&atoms);
            let (sp, sm, kp, km) = split_signed(&omega);
            let flow = min_cost_transport(1, &sp, &sm, &kp, &km, None).unwrap();
            assert!(
                (closed - flow).abs() < 1e-9 * (1.0 + closed.abs()),
                "seed {seed}: closed form {closed} vs flow {flow}"
            );
        }
    }

    #[test]
    fn kr_is_symmetric_under_negation() {
        for seed in 0..5 {
            let omega = random_balanced(2, 10, 300 + seed);
            let flipped = EmpiricalMeasure::new(
                2,
                omega.points().flatten().copied().collect(),
                (0..omega.len()).map(|i| -omega.weight(i)).collect(),
            )
            .unwrap();
            let a = kr_norm(&omega).unwrap().value;
            let b = kr_norm(&flipped).unwrap().value;
            assert!((a - b).abs() < 1e-10, "kr(omega) {a} != kr(-omega) {b}");
        }
    }

    #[test]
    fn coarsening_respects_its_error_bound() {
        let omega = random_balanced(1, 400, 7);
        let exact = kr_norm_with(
            &omega,
            &TransportOptions {
                support_limit: 10_000,
                coarsen: false,
            },
        )
        .unwrap();
        let coarse = kr_norm_with(
            &omega,
            &TransportOptions {
                support_limit: 64,
                coarsen: true,
            },
        )
        .unwrap();
        assert!(coarse.coarsening_error > 0.0);
        assert!(
            (coarse.value - exact.value).abs() <= coarse.coarsening_error,
            "coarse {} vs exact {} with bound {}",
            coarse.value,
            exact.value,
            coarse.coarsening_error
        );
    }

    #[test]
    fn oversized_support_errors_without_coarsening() {
        let omega = random_balanced(2, 50, 8);
        let err = kr_norm_with(
            &omega,
            &TransportOptions {
                support_limit: 10,
                coarsen: false,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::SupportTooLarge { size: 100, limit: 10 }));
    }

    #[test]
    fn transport_is_deterministic() {
        let omega = random_balanced(2, 30, 9);
        let a = kr_norm(&omega).unwrap().value;
        let b = kr_norm(&omega).unwrap().value;
        assert_eq!(a.to_bits(), b.to_bits());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chain_lp_with_huge_box_matches_kantorovich(
            xs in prop::collection::vec(-50.0f64..50.0, 2..32usize)
        ) {
            // With the box constraint slack, the chain LP is the plain
            // 1-d Kantorovich norm (for balanced weights).
            let n = xs.len() & !1usize;
            if n >= 2 {
                let atoms: Vec<(f64, f64)> = xs[..n]
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (x, if i % 2 == 0 { 1.0 } else { -1.0 }))
                    .collect();
                let sorted = sorted_coalesced(&atoms);
                let masses: Vec<f64> = sorted.iter().map(|a| a.1).collect();
                let gaps: Vec<f64> = sorted.windows(2).map(|p| p[1].0 - p[0].0).collect();
                let lp = if sorted.len() == 1 {
                    0.0
                } else {
                    chain_lp_max(&masses, &gaps, 1e6)
                };
                let closed = w1_1d(&atoms);
                prop_assert!(
                    (lp - closed).abs() < 1e-6 * (1.0 + closed.abs()),
                    "chain {} vs closed {}", lp, closed
                );
            }
        }

        #[test]
        fn kr_is_subadditive(
            seed in 0u64..1000,
        ) {
            let a = random_balanced(2, 6, seed);
            let b = random_balanced(2, 6, seed + 5000);
            let mut coords: Vec<f64> = a.points().flatten().copied().collect();
            coords.extend(b.points().flatten().copied());
            let mut weights: Vec<f64> = (0..a.len()).map(|i| a.weight(i)).collect();
            weights.extend((0..b.len()).map(|i| b.weight(i)));
            let sum = EmpiricalMeasure::new(2, coords, weights).unwrap();
            let ka = kr_norm(&a).unwrap().value;
            let kb = kr_norm(&b).unwrap().value;
            let ks = kr_norm(&sum).unwrap().value;
            prop_assert!(ks <= ka + kb + 1e-9, "kr {} > {} + {}", ks, ka, kb);
        }
    }
}
