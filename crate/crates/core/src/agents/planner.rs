//! Threat-avoiding route planning on a circle visibility graph.
//!
//! Threats are disks the jet must stay outside of. Nodes are the start, the
//! candidate goals, and points on a slightly inflated polygon around each
//! disk; two nodes are connected when the straight segment between them
//! keeps clear of every disk. Dijkstra then gives the shortest route to the
//! nearest reachable goal.

use crate::geometry::{point_segment_distance, Vec2};

/// Polygon vertices per threat disk.
const RING_NODES: usize = 48;
/// Inflation of the polygon beyond the disk, as a fraction of the radius.
const RING_PAD: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threat {
    pub center: Vec2,
    pub radius: f64,
}

impl Threat {
    pub fn contains(&self, p: Vec2) -> bool {
        self.center.dist(p) <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Points to fly through in order; the last one is the chosen goal.
    pub waypoints: Vec<Vec2>,
    pub length: f64,
}

fn segment_clear(a: Vec2, b: Vec2, threats: &[Threat]) -> bool {
    threats
        .iter()
        .all(|t| point_segment_distance(t.center, a, b) > t.radius)
}

/// Waypoints that take `start` radially out of every disk containing it.
pub fn escape_path(start: Vec2, threats: &[Threat]) -> Vec<Vec2> {
    let mut path = Vec::new();
    let mut p = start;
    for _ in 0..threats.len().max(1) * 2 {
        let Some(t) = threats
            .iter()
            .filter(|t| t.contains(p))
            .max_by(|a, b| (a.radius - a.center.dist(p)).total_cmp(&(b.radius - b.center.dist(p))))
        else {
            break;
        };
        let dir = p - t.center;
        let dir = if dir.norm() < 1e-9 { Vec2::new(-1.0, 0.0) } else { dir * (1.0 / dir.norm()) };
        p = t.center + dir * (t.radius * (1.0 + 2.0 * RING_PAD));
        path.push(p);
    }
    path
}

/// Shortest threat-free route from `start` to any of `goals`.
///
/// A start inside a threat disk is first moved out radially. Goals inside a
/// disk are never selected. Returns `None` when no goal is reachable.
pub fn plan_route(start: Vec2, goals: &[Vec2], threats: &[Threat]) -> Option<Route> {
    let escape = escape_path(start, threats);
    let origin = escape.last().copied().unwrap_or(start);
    if threats.iter().any(|t| t.contains(origin)) {
        return None;
    }
    let mut nodes = vec![origin];
    let goal_lo = nodes.len();
    nodes.extend(goals.iter().copied().filter(|g| !threats.iter().any(|t| t.contains(*g))));
    let goal_hi = nodes.len();
    if goal_lo == goal_hi {
        return None;
    }
    let ring_scale = (1.0 + RING_PAD) / (std::f64::consts::PI / RING_NODES as f64).cos();
    for t in threats {
        for k in 0..RING_NODES {
            let theta = std::f64::consts::TAU * k as f64 / RING_NODES as f64;
            let p = t.center + Vec2::from_polar(t.radius * ring_scale, theta);
            if !threats.iter().any(|o| o.contains(p)) {
                nodes.push(p);
            }
        }
    }

    let n = nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    while let Some(u) = (0..n)
        .filter(|&i| !done[i] && dist[i].is_finite())
        .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
    {
        done[u] = true;
        if (goal_lo..goal_hi).contains(&u) {
            let mut waypoints = Vec::new();
            let mut at = u;
            while at != 0 {
                waypoints.push(nodes[at]);
                at = prev[at];
            }
            waypoints.push(origin);
            waypoints.reverse();
            // origin duplicates the last escape point (or the start)
            waypoints.remove(0);
            let mut full = escape.clone();
            full.extend(waypoints);
            let length = std::iter::once(start)
                .chain(full.iter().copied())
                .collect::<Vec<_>>()
                .windows(2)
                .map(|w| w[0].dist(w[1]))
                .sum();
            return Some(Route { waypoints: full, length });
        }
        for v in 0..n {
            if done[v] {
                continue;
            }
            let d = dist[u] + nodes[u].dist(nodes[v]);
            if d < dist[v] && segment_clear(nodes[u], nodes[v], threats) {
                dist[v] = d;
                prev[v] = u;
            }
        }
    }
    None
}
