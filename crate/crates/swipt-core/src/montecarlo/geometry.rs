//! Poisson network realizations and weighted nearest-BS association.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// Largest expected number of BSs in the sampling disk of a default window.
pub const MAX_WINDOW_BS: f64 = 20_000.0;
/// Target share of the mean interference coming from beyond the window.
pub const TAIL_TARGET: f64 = 0.005;
/// Minimum expected number of BSs per tier inside the window.
pub const MIN_BS_PER_TIER: f64 = 10.0;

/// Sampling geometry around the typical user at the origin.
///
/// BSs are drawn in a disk of radius `radius + 2 margin` and users in a disk
/// of radius `radius + margin`. Only BSs within `radius` transmit, so every
/// one of them sees all the users that could belong to its cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub radius: f64,
    pub margin: f64,
    /// Estimated share of the mean interference lost beyond `radius`.
    pub tail_fraction: f64,
}

impl Window {
    pub fn bs_radius(&self) -> f64 {
        self.radius + 2.0 * self.margin
    }

    pub fn user_radius(&self) -> f64 {
        self.radius + self.margin
    }

    /// Default window: the largest of `20/√(πλ_Σ)`, the radius leaving less
    /// than 0.5% of the interference outside, and the radius holding ten BSs
    /// of the sparsest tier. The tail criterion is dropped in favor of
    /// [`MAX_WINDOW_BS`] when it would need more points, which happens for
    /// `α` close to 2; the lost share is then reported in `tail_fraction`.
    pub fn for_network(net: &NetworkConfig) -> Result<Window> {
        net.validate()?;
        let r0 = nearest_scale(net);
        let alpha = net.alpha();
        let margin = margin(net);
        let tail_radius = r0 * TAIL_TARGET.powf(-1.0 / (alpha - 2.0));
        let total: f64 = net.tiers.iter().map(|t| t.intensity).sum();
        let cap = (MAX_WINDOW_BS / (PI * total)).sqrt() - 2.0 * margin;
        let radius = (20.0 * r0).max(tail_radius.min(cap)).max(count_radius(net));
        Window::with_margin(net, radius, margin)
    }

    /// Window of the given radius with the default margin.
    pub fn with_radius(net: &NetworkConfig, radius: f64) -> Result<Window> {
        net.validate()?;
        Window::with_margin(net, radius, margin(net))
    }

    fn with_margin(net: &NetworkConfig, radius: f64, margin: f64) -> Result<Window> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("simulation.window_radius_m", "must be positive"));
        }
        for (m, t) in net.tiers.iter().enumerate() {
            let expected = t.intensity * PI * radius * radius;
            if expected < MIN_BS_PER_TIER {
                return Err(Error::invalid(
                    "simulation.window_radius_m",
                    format!("{radius} m holds {expected:.2} tier-{} BSs on average, fewer than {MIN_BS_PER_TIER}", m + 1),
                ));
            }
        }
        let tail_fraction = (nearest_scale(net) / radius).powf(net.alpha() - 2.0).min(1.0);
        Ok(Window {
            radius,
            margin,
            tail_fraction,
        })
    }
}

/// `1/√(πλ_Σ)`, the scale of the association distance.
fn nearest_scale(net: &NetworkConfig) -> f64 {
    1.0 / (PI * net.lambda_sigma()).sqrt()
}

fn count_radius(net: &NetworkConfig) -> f64 {
    net.tiers
        .iter()
        .map(|t| (MIN_BS_PER_TIER / (PI * t.intensity)).sqrt())
        .fold(0.0, f64::max)
}

/// Distance beyond which a point belongs to a given cell with probability
/// below `e^{-25}`: `5 √(max_m w_m^{2/α} / (πλ_Σ))`.
fn margin(net: &NetworkConfig) -> f64 {
    let wmax = (0..net.tiers.len()).map(|m| net.weight_factor(m)).fold(0.0, f64::max);
    5.0 * (wmax / (PI * net.lambda_sigma())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseStation {
    pub pos: [f64; 2],
    pub tier: usize,
}

/// One draw of the BS and user processes with the association map.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub window: Window,
    /// Ordered by tier, then by draw order.
    pub bs: Vec<BaseStation>,
    /// `users[0]` is the typical user at the origin.
    pub users: Vec<[f64; 2]>,
    /// Serving BS of each user.
    pub association: Vec<u32>,
    /// Number of users associated with each BS.
    pub user_counts: Vec<u32>,
    /// The user each non-void BS schedules in the uplink. The typical user's
    /// BS schedules the typical user; every other BS picks uniformly.
    pub scheduled: Vec<Option<u32>>,
}

impl NetworkRealization {
    pub fn is_void(&self, b: usize) -> bool {
        self.user_counts[b] == 0
    }

    /// The typical user's BS.
    pub fn serving(&self) -> usize {
        self.association[0] as usize
    }

    /// BSs within the transmitting radius.
    pub fn active_region(&self, b: usize) -> bool {
        norm2(self.bs[b].pos) <= self.window.radius * self.window.radius
    }
}

pub(crate) fn norm2(p: [f64; 2]) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

pub(crate) fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// Uniform point in the disk of radius `r`, by rejection from the square.
pub(crate) fn uniform_in_disk(rng: &mut ChaCha8Rng, r: f64) -> [f64; 2] {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        if x * x + y * y <= 1.0 {
            return [x * r, y * r];
        }
    }
}

pub(crate) fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::Simulation(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as usize)
}

/// Draws `Poisson(λπr²)` points uniformly in the disk of radius `r`.
pub(crate) fn poisson_disk(rng: &mut ChaCha8Rng, intensity: f64, r: f64) -> Result<Vec<[f64; 2]>> {
    let n = poisson_count(rng, intensity * PI * r * r)?;
    Ok((0..n).map(|_| uniform_in_disk(rng, r)).collect())
}

/// Bucket grid over the points of one tier for nearest-neighbor queries.
pub(crate) struct TierGrid {
    lo: f64,
    cell: f64,
    side: usize,
    starts: Vec<u32>,
    items: Vec<u32>,
    /// Global BS indices and positions, in `items` order.
    points: Vec<[f64; 2]>,
}

impl TierGrid {
    /// `members` are global BS indices with their positions, inside the
    /// square `[-half, half]²`.
    pub(crate) fn new(members: &[(u32, [f64; 2])], half: f64, intensity: f64) -> TierGrid {
        let cell = (2.0 / intensity).sqrt().max(2.0 * half / 1024.0);
        let side = ((2.0 * half / cell).ceil() as usize).max(1);
        let lo = -half;
        let key = |p: [f64; 2]| {
            let cx = (((p[0] - lo) / cell) as usize).min(side - 1);
            let cy = (((p[1] - lo) / cell) as usize).min(side - 1);
            cy * side + cx
        };
        let mut counts = vec![0u32; side * side + 1];
        for &(_, p) in members {
            counts[key(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; members.len()];
        let mut points = vec![[0.0; 2]; members.len()];
        for &(idx, p) in members {
            let k = key(p);
            let slot = fill[k] as usize;
            items[slot] = idx;
            points[slot] = p;
            fill[k] += 1;
        }
        TierGrid {
            lo,
            cell,
            side,
            starts: counts,
            items,
            points,
        }
    }

    fn cell_min_d2(&self, p: [f64; 2], x: isize, y: isize) -> f64 {
        let gap = |v: f64, c: isize| {
            let c0 = self.lo + c as f64 * self.cell;
            (c0 - v).max(v - c0 - self.cell).max(0.0)
        };
        let (dx, dy) = (gap(p[0], x), gap(p[1], y));
        dx * dx + dy * dy
    }

    /// Distance from `p` to the points not covered by the block of cells
    /// within `k` of `(cx, cy)`; infinite where the block reaches the grid
    /// edge.
    fn clearance(&self, p: [f64; 2], cx: isize, cy: isize, k: isize) -> f64 {
        let side = self.side as isize;
        let edge = |v: f64, c: isize| {
            let lo = if c - k <= 0 { f64::INFINITY } else { v - (self.lo + (c - k) as f64 * self.cell) };
            let hi = if c + k >= side - 1 {
                f64::INFINITY
            } else {
                self.lo + (c + k + 1) as f64 * self.cell - v
            };
            lo.min(hi)
        };
        edge(p[0], cx).min(edge(p[1], cy))
    }

    /// Nearest member to `p` with squared distance at most `bound`, as
    /// (global index, squared distance); ties go to the lower index.
    pub(crate) fn nearest_within(&self, p: [f64; 2], mut bound: f64) -> Option<(u32, f64)> {
        if self.items.is_empty() {
            return None;
        }
        let side = self.side as isize;
        // Truncation is floor here: points left of the grid clamp to 0 anyway.
        let cx = (((p[0] - self.lo) / self.cell) as isize).clamp(0, side - 1);
        let cy = (((p[1] - self.lo) / self.cell) as isize).clamp(0, side - 1);
        let mut best: Option<(u32, f64)> = None;
        for ring in 0..side {
            if ring > 0 {
                let c = self.clearance(p, cx, cy, ring - 1);
                if c.is_infinite() || c * c > bound {
                    break;
                }
            }
            let (x0, x1, y0, y1) = (cx - ring, cx + ring, cy - ring, cy + ring);
            for y in y0.max(0)..=y1.min(side - 1) {
                let gy = {
                    let c0 = self.lo + y as f64 * self.cell;
                    (c0 - p[1]).max(p[1] - c0 - self.cell).max(0.0)
                };
                if gy * gy > bound {
                    continue;
                }
                let full_row = y == y0 || y == y1;
                let mut x = x0.max(0);
                while x <= x1.min(side - 1) {
                    if self.cell_min_d2(p, x, y) <= bound {
                        let k = (y * side + x) as usize;
                        for slot in self.starts[k] as usize..self.starts[k + 1] as usize {
                            let d = dist2(p, self.points[slot]);
                            let idx = self.items[slot];
                            let better = match best {
                                None => d <= bound,
                                Some((bi, bd)) => d < bd || (d == bd && idx < bi),
                            };
                            if better {
                                best = Some((idx, d));
                                bound = d;
                            }
                        }
                    }
                    // Interior rows only touch the two edge columns.
                    x = if full_row || x == x1 { x + 1 } else { x1 };
                }
            }
        }
        best
    }

    /// Appends every member within distance `r` of `c`.
    fn collect_within(&self, c: [f64; 2], r: f64, factor: f64, out: &mut Vec<Candidate>) {
        if self.items.is_empty() {
            return;
        }
        let side = self.side as isize;
        let cell_of = |v: f64| (((v - self.lo) / self.cell).floor() as isize).clamp(0, side - 1);
        let r2 = r * r;
        for y in cell_of(c[1] - r)..=cell_of(c[1] + r) {
            for x in cell_of(c[0] - r)..=cell_of(c[0] + r) {
                if self.cell_min_d2(c, x, y) > r2 {
                    continue;
                }
                let k = (y * side + x) as usize;
                for slot in self.starts[k] as usize..self.starts[k + 1] as usize {
                    if dist2(c, self.points[slot]) <= r2 {
                        out.push(Candidate {
                            pos: self.points[slot],
                            inv_factor: 1.0 / factor,
                            idx: self.items[slot],
                        });
                    }
                }
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn nearest(&self, p: [f64; 2]) -> Option<(u32, f64)> {
        self.nearest_within(p, f64::INFINITY)
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    pos: [f64; 2],
    inv_factor: f64,
    idx: u32,
}

/// Users per square of the candidate-list pass.
const USERS_PER_SQUARE: f64 = 8.0;
/// Below this many users, each is associated by its own grid search.
const CANDIDATE_PASS_MIN_USERS: usize = 2000;

/// Per-tier grids with the association scaling `w_m^{-2/α}`.
pub(crate) struct Associator {
    /// Densest tiers (in the association metric) first, so that the bound
    /// tightens early.
    order: Vec<usize>,
    grids: Vec<TierGrid>,
    factor: Vec<f64>,
}

impl Associator {
    pub(crate) fn new(net: &NetworkConfig, bs: &[BaseStation], half: f64) -> Associator {
        let grids = (0..net.tiers.len())
            .map(|m| {
                let members: Vec<(u32, [f64; 2])> = bs
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| b.tier == m)
                    .map(|(i, b)| (i as u32, b.pos))
                    .collect();
                TierGrid::new(&members, half, net.tiers[m].intensity)
            })
            .collect();
        let factor: Vec<f64> = (0..net.tiers.len()).map(|m| net.weight_factor(m)).collect();
        let mut order: Vec<usize> = (0..net.tiers.len()).collect();
        let weight = |m: usize| factor[m] * net.tiers[m].intensity;
        order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)).then(a.cmp(&b)));
        Associator { order, grids, factor }
    }

    /// BS maximizing `w_m |x - b|^{-α}`; ties go to the lower (tier, index).
    pub(crate) fn associate(&self, p: [f64; 2]) -> Option<u32> {
        let mut best: Option<(u32, f64)> = None;
        for &m in &self.order {
            let bound = best.map_or(f64::INFINITY, |(_, v)| v * self.factor[m]);
            if let Some((idx, d)) = self.grids[m].nearest_within(p, bound) {
                let v = d / self.factor[m];
                // Global indices are ordered by tier, so comparing them
                // compares (tier, index).
                if best.is_none_or(|(bi, bv)| v < bv || (v == bv && idx < bi)) {
                    best = Some((idx, v));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Associates every user in the disk of radius `half`.
    ///
    /// Large batches are bucketed into squares. For each square a bound `U`
    /// on the winning scaled distance follows from the nearest BS of each
    /// tier to its center, and only BSs that can get below `U` somewhere in
    /// the square are compared. The result equals per-user association.
    pub(crate) fn associate_all(&self, users: &[[f64; 2]], half: f64) -> Vec<u32> {
        if users.len() < CANDIDATE_PASS_MIN_USERS {
            return users.iter().map(|&p| self.associate(p).expect("at least one BS")).collect();
        }
        // The disk covers π/4 of the bounding square.
        let squares = users.len() as f64 / USERS_PER_SQUARE * 4.0 / std::f64::consts::PI;
        let side = (squares.sqrt().ceil() as usize).max(1);
        let s = 2.0 * half / side as f64;
        let key = |p: [f64; 2]| {
            let x = (((p[0] + half) / s) as usize).min(side - 1);
            let y = (((p[1] + half) / s) as usize).min(side - 1);
            y * side + x
        };
        let mut starts = vec![0usize; side * side + 1];
        for &p in users {
            starts[key(p) + 1] += 1;
        }
        for i in 1..starts.len() {
            starts[i] += starts[i - 1];
        }
        let mut fill = starts.clone();
        let mut order = vec![0u32; users.len()];
        for (u, &p) in users.iter().enumerate() {
            let k = key(p);
            order[fill[k]] = u as u32;
            fill[k] += 1;
        }
        let h = s * std::f64::consts::FRAC_1_SQRT_2;
        let mut out = vec![0u32; users.len()];
        let mut cand: Vec<Candidate> = Vec::new();
        for k in 0..side * side {
            let (a, b) = (starts[k], starts[k + 1]);
            if a == b {
                continue;
            }
            let c = [-half + ((k % side) as f64 + 0.5) * s, -half + ((k / side) as f64 + 0.5) * s];
            let mut bound = f64::INFINITY;
            for (m, grid) in self.grids.iter().enumerate() {
                if let Some((_, d)) = grid.nearest_within(c, f64::INFINITY) {
                    let r = d.sqrt() + h;
                    bound = bound.min(r * r / self.factor[m]);
                }
            }
            cand.clear();
            for (m, grid) in self.grids.iter().enumerate() {
                grid.collect_within(c, (bound * self.factor[m]).sqrt() + h, self.factor[m], &mut cand);
            }
            for &u in &order[a..b] {
                let p = users[u as usize];
                let mut best = (u32::MAX, f64::INFINITY);
                for cd in &cand {
                    let v = dist2(p, cd.pos) * cd.inv_factor;
                    if v < best.1 || (v == best.1 && cd.idx < best.0) {
                        best = (cd.idx, v);
                    }
                }
                out[u as usize] = best.0;
            }
        }
        out
    }
}

/// Draws BSs in each tier, then users, and associates every user.
pub fn sample_realization(net: &NetworkConfig, window: &Window, rng: &mut ChaCha8Rng) -> Result<NetworkRealization> {
    sample_with_extra_bs(net, window, window.user_radius(), window.bs_radius(), None, rng)
}

/// As [`sample_realization`] with explicit user and BS radii, optionally
/// adding a BS of the given tier at the origin in place of the typical user
/// (the Palm view of a BS). That BS is the first of its tier.
pub(crate) fn sample_with_extra_bs(
    net: &NetworkConfig,
    window: &Window,
    user_radius: f64,
    rb: f64,
    origin_bs: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<NetworkRealization> {
    let mut bs = Vec::new();
    for (m, t) in net.tiers.iter().enumerate() {
        if origin_bs == Some(m) {
            bs.push(BaseStation { pos: [0.0, 0.0], tier: m });
        }
        for pos in poisson_disk(rng, t.intensity, rb)? {
            bs.push(BaseStation { pos, tier: m });
        }
    }
    if bs.is_empty() {
        return Err(Error::Simulation("no base station in the window".into()));
    }
    let assoc = Associator::new(net, &bs, rb);
    let mut users = Vec::new();
    if origin_bs.is_none() {
        users.push([0.0, 0.0]);
    }
    users.extend(poisson_disk(rng, net.user_intensity, user_radius)?);
    let association = assoc.associate_all(&users, user_radius);
    let mut user_counts = vec![0u32; bs.len()];
    let mut scheduled: Vec<Option<u32>> = vec![None; bs.len()];
    for (u, &b) in association.iter().enumerate() {
        let b = b as usize;
        user_counts[b] += 1;
        // Reservoir choice of one user per BS.
        if rng.random_range(0..user_counts[b]) == 0 {
            scheduled[b] = Some(u as u32);
        }
    }
    if origin_bs.is_none() {
        scheduled[association[0] as usize] = Some(0);
    }
    Ok(NetworkRealization {
        window: *window,
        bs,
        users,
        association,
        user_counts,
        scheduled,
    })
}
