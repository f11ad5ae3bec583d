//! Brute-force reference implementations on plain `Vec<f64>` tables.
//!
//! Nothing here calls into the library's belief code: every operator is the
//! textbook double loop over all `2^n x 2^n` subset pairs.
#![allow(dead_code, clippy::needless_range_loop)]

pub const N_MAP: usize = 5;
pub const F: usize = 1 << 0;
pub const C: usize = 1 << 1;
pub const N: usize = 1 << 2;
pub const S: usize = 1 << 3;
pub const V: usize = 1 << 4;
pub const OMEGA: usize = 0b11111;
pub const OCC: usize = C | N | S | V;

pub type Table = Vec<f64>;

pub fn vacuous(n: usize) -> Table {
    let mut m = vec![0.0; 1 << n];
    m[(1 << n) - 1] = 1.0;
    m
}

pub fn from_pairs(n: usize, pairs: &[(usize, f64)]) -> Table {
    let mut m = vec![0.0; 1 << n];
    for &(a, w) in pairs {
        m[a] += w;
    }
    m
}

pub fn conjunctive(m1: &[f64], m2: &[f64]) -> Table {
    let size = m1.len();
    let mut out = vec![0.0; size];
    for a in 0..size {
        for b in 0..size {
            out[a & b] += m1[a] * m2[b];
        }
    }
    out
}

pub fn disjunctive(m1: &[f64], m2: &[f64]) -> Table {
    let size = m1.len();
    let mut out = vec![0.0; size];
    for a in 0..size {
        for b in 0..size {
            out[a | b] += m1[a] * m2[b];
        }
    }
    out
}

pub fn dempster(m1: &[f64], m2: &[f64]) -> Table {
    let mut out = conjunctive(m1, m2);
    let k = out[0];
    out[0] = 0.0;
    for w in out.iter_mut().skip(1) {
        *w /= 1.0 - k;
    }
    out
}

/// `(k_fo, k_of, k_res)` of the conjunctive combination of `prev` and `obs`.
pub fn conflict_split(prev: &[f64], obs: &[f64]) -> (f64, f64, f64) {
    let (mut fo, mut of, mut res) = (0.0, 0.0, 0.0);
    for a in 0..prev.len() {
        for b in 0..obs.len() {
            if a & b != 0 {
                continue;
            }
            let w = prev[a] * obs[b];
            if a == F && b != 0 && b & !OCC == 0 {
                fo += w;
            } else if b == F && a != 0 && a & !OCC == 0 {
                of += w;
            } else {
                res += w;
            }
        }
    }
    (fo, of, res)
}

pub fn yager_modified(prev: &[f64], obs: &[f64]) -> Table {
    let mut out = conjunctive(prev, obs);
    let (fo, of, res) = conflict_split(prev, obs);
    out[0] = 0.0;
    out[V] += fo;
    out[OMEGA] += of + res;
    out
}

/// Disjunctive combination with one elementary mass per block:
/// `m(block) = rate`, `m(empty) = 1 - rate`.
pub fn contextual_discount(m: &[f64], blocks: &[usize], rates: &[f64]) -> Table {
    let mut out = m.to_vec();
    for (&block, &rate) in blocks.iter().zip(rates) {
        let mut e = vec![0.0; m.len()];
        e[0] = 1.0 - rate;
        e[block] += rate;
        out = disjunctive(&out, &e);
    }
    out
}

pub const MOBILITY_BLOCKS: [usize; 3] = [C | N, S | V, F];

/// Moves a `zeta` share of every focal set containing V to the same set
/// without V; `{V}` itself goes to `{S}`.
pub fn mobility_specialize(m: &[f64], zeta: f64) -> Table {
    let mut out = vec![0.0; m.len()];
    for a in 0..m.len() {
        if a & V == 0 {
            out[a] += m[a];
        } else {
            let target = if a == V { S } else { a & !V };
            out[a] += (1.0 - zeta) * m[a];
            out[target] += zeta * m[a];
        }
    }
    out
}

/// Scan frame `{F, O}` (bits 0, 1) onto the map frame.
pub fn refine_scan(m_sg: &[f64]) -> Table {
    let mut out = vec![0.0; 1 << N_MAP];
    for a in 0..m_sg.len() {
        let mut image = 0;
        if a & 1 != 0 {
            image |= F;
        }
        if a & 2 != 0 {
            image |= OCC;
        }
        out[image] += m_sg[a];
    }
    out
}

pub fn pignistic(m: &[f64], n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n];
    for a in 1..m.len() {
        let card = (a as u32).count_ones() as f64;
        for (x, px) in p.iter_mut().enumerate() {
            if a & (1 << x) != 0 {
                *px += m[a] / card;
            }
        }
    }
    p
}

/// Index of the unique largest entry, `None` on a tie within `tol`.
pub fn argmax(p: &[f64], tol: f64) -> Option<usize> {
    let best = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<usize> = (0..p.len()).filter(|&i| best - p[i] <= tol).collect();
    (winners.len() == 1).then(|| winners[0])
}

pub struct CellParams {
    pub delta_inc: f64,
    pub delta_dec: f64,
    pub gamma_o: f64,
    pub gamma_empty: f64,
    pub alphas: [f64; 3],
    pub use_prior: bool,
}

impl Default for CellParams {
    fn default() -> Self {
        Self {
            delta_inc: 0.2,
            delta_dec: 0.4,
            gamma_o: 0.6,
            gamma_empty: 0.1,
            alphas: [0.05, 0.4, 0.3],
            use_prior: true,
        }
    }
}

/// One map-cell update: returns the new mass and counter.
pub fn fuse_cell(prev: &[f64], zeta: f64, m_sg: &[f64], m_pg: &[f64], p: &CellParams) -> (Table, f64) {
    let refined = refine_scan(m_sg);
    let obs = if p.use_prior { dempster(&refined, m_pg) } else { refined };
    let (fo, of, _) = conflict_split(prev, &obs);
    let occupied: f64 = (1..prev.len()).filter(|a| a & !OCC == 0).map(|a| prev[a]).sum();
    let dynamic = fo + of;
    let zeta = if occupied >= p.gamma_o && dynamic <= p.gamma_empty {
        (zeta + p.delta_inc).min(1.0)
    } else if dynamic > p.gamma_empty {
        (zeta - p.delta_dec).max(0.0)
    } else {
        zeta
    };
    let specialized = mobility_specialize(prev, zeta);
    let discounted = contextual_discount(&specialized, &MOBILITY_BLOCKS, &p.alphas);
    (yager_modified(&discounted, &obs), zeta)
}

pub fn simple_support(n: usize, focal: usize, weight: f64) -> Table {
    let mut m = vec![0.0; 1 << n];
    m[focal] += weight;
    m[(1 << n) - 1] += 1.0 - weight;
    m
}

/// Winding number of a closed polygon around `(x, y)`; nonzero means inside.
pub fn winding_number(poly: &[[f64; 2]], x: f64, y: f64) -> i32 {
    let mut wn = 0;
    for k in 0..poly.len() {
        let [x0, y0] = poly[k];
        let [x1, y1] = poly[(k + 1) % poly.len()];
        let cross = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0);
        if y0 <= y {
            if y1 > y && cross > 0.0 {
                wn += 1;
            }
        } else if y1 <= y && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Cells visited by a segment, found by sampling it every `step` metres.
pub fn supersample_cells(
    origin: [f64; 2],
    resolution: f64,
    size: [usize; 2],
    from: [f64; 2],
    to: [f64; 2],
    step: f64,
) -> Vec<(usize, usize)> {
    let len = ((to[0] - from[0]).powi(2) + (to[1] - from[1]).powi(2)).sqrt();
    let samples = (len / step).ceil() as usize;
    let mut out: Vec<(usize, usize)> = Vec::new();
    for s in 0..=samples {
        let u = if samples == 0 { 0.0 } else { s as f64 / samples as f64 };
        let x = from[0] + u * (to[0] - from[0]);
        let y = from[1] + u * (to[1] - from[1]);
        let i = ((x - origin[0]) / resolution).floor();
        let j = ((y - origin[1]) / resolution).floor();
        if i < 0.0 || j < 0.0 || i >= size[0] as f64 || j >= size[1] as f64 {
            continue;
        }
        let cell = (i as usize, j as usize);
        if !out.contains(&cell) {
            out.push(cell);
        }
    }
    out
}

/// Distance along a ray to the nearest of `segments`, by direct solve
/// against each one.
pub fn nearest_intersection(origin: [f64; 2], dir: [f64; 2], segments: &[([f64; 2], [f64; 2])]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &(p, q) in segments {
        let e = [q[0] - p[0], q[1] - p[1]];
        let denom = dir[0] * e[1] - dir[1] * e[0];
        if denom.abs() < 1e-15 {
            continue;
        }
        let w = [p[0] - origin[0], p[1] - origin[1]];
        let t = (w[0] * e[1] - w[1] * e[0]) / denom;
        let u = (w[0] * dir[1] - w[1] * dir[0]) / denom;
        if t >= 0.0 && (0.0..=1.0).contains(&u) && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    }
    best
}
