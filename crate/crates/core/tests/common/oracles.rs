//! Independent reference implementations used by the tests.
#![allow(dead_code)]

use geoa3::classifier::ClassifierModel;
use geoa3::{Point3, PointCloud};

pub fn d2(a: Point3, b: Point3) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}

/// Sort every other point by (distance, index) and keep the first k.
pub fn knn(points: &[Point3], k: usize) -> Vec<Vec<usize>> {
    (0..points.len())
        .map(|i| {
            let mut all: Vec<(f64, usize)> = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| (d2(points[i], points[j]), j))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            all.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

fn nearest_d2(p: Point3, set: &[Point3]) -> f64 {
    set.iter().map(|&q| d2(p, q)).fold(f64::INFINITY, f64::min)
}

pub fn chamfer(a: &[Point3], b: &[Point3]) -> f64 {
    let fwd: f64 = a.iter().map(|&p| nearest_d2(p, b)).sum();
    let bwd: f64 = b.iter().map(|&q| nearest_d2(q, a)).sum();
    fwd / a.len() as f64 + bwd / b.len() as f64
}

pub fn hausdorff(a: &[Point3], b: &[Point3]) -> f64 {
    a.iter()
        .map(|&p| nearest_d2(p, b))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Farthest point sampling recomputing every set distance from scratch.
pub fn fps(points: &[Point3], m: usize) -> Vec<usize> {
    let n = points.len() as f64;
    let mut c = [0.0; 3];
    for p in points {
        for i in 0..3 {
            c[i] += p[i];
        }
    }
    let c = c.map(|v| v / n);
    let first_max = |score: &dyn Fn(usize) -> f64, cand: &[usize]| {
        let mut best = cand[0];
        for &i in &cand[1..] {
            if score(i) > score(best) {
                best = i;
            }
        }
        best
    };
    let all: Vec<usize> = (0..points.len()).collect();
    let mut chosen = vec![first_max(&|i| d2(points[i], c), &all)];
    while chosen.len() < m {
        let rest: Vec<usize> = all
            .iter()
            .copied()
            .filter(|i| !chosen.contains(i))
            .collect();
        let score = |i: usize| {
            chosen
                .iter()
                .map(|&s| d2(points[i], points[s]))
                .fold(f64::INFINITY, f64::min)
        };
        chosen.push(first_max(&score, &rest));
    }
    chosen.sort_unstable();
    chosen
}

/// Eigenvalues of a symmetric 3x3 matrix, descending, from the
/// characteristic polynomial (trigonometric roots polished by bisection).
pub fn sym_eigenvalues(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.total_cmp(x));
        return d;
    }
    let tr = a[0][0] + a[1][1] + a[2][2];
    let q = tr / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let b = |i: usize, j: usize| (a[i][j] - if i == j { q } else { 0.0 }) / p;
    let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let phi = (det_b / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let third = 2.0 * std::f64::consts::PI / 3.0;
    let mut roots = [
        q + 2.0 * p * phi.cos(),
        q + 2.0 * p * (phi + third).cos(),
        q + 2.0 * p * (phi + 2.0 * third).cos(),
    ];
    let charpoly = |l: f64| {
        let m = |i: usize, j: usize| a[i][j] - if i == j { l } else { 0.0 };
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    };
    let scale = p.max(q.abs());
    for r in roots.iter_mut() {
        let (mut lo, mut hi) = (*r - 1e-6 * scale, *r + 1e-6 * scale);
        let (flo, fhi) = (charpoly(lo), charpoly(hi));
        if flo.signum() == fhi.signum() || flo == 0.0 || fhi == 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if charpoly(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        *r = 0.5 * (lo + hi);
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    roots
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Unit vector spanning the null space of `a - l I`, for a simple eigenvalue.
pub fn null_vector(a: [[f64; 3]; 3], l: f64) -> Point3 {
    let m: Vec<Point3> = (0..3)
        .map(|i| [0, 1, 2].map(|j| a[i][j] - if i == j { l } else { 0.0 }))
        .collect();
    let cands = [cross(m[0], m[1]), cross(m[0], m[2]), cross(m[1], m[2])];
    let best = cands
        .into_iter()
        .max_by(|x, y| d2(*x, [0.0; 3]).total_cmp(&d2(*y, [0.0; 3])))
        .unwrap();
    let len = d2(best, [0.0; 3]).sqrt();
    best.map(|v| v / len)
}

/// Regularity straight from its definition.
pub fn regularity(points: &[Point3], k: usize) -> f64 {
    let nbrs = knn(points, k);
    let mut worst: f64 = 0.0;
    for (i, nb) in nbrs.iter().enumerate() {
        let p = points[i];
        let mut cov = [[0.0; 3]; 3];
        for &j in nb {
            let d = [0, 1, 2].map(|c| points[j][c] - p[c]);
            for r in 0..3 {
                for c in 0..3 {
                    cov[r][c] += d[r] * d[c];
                }
            }
        }
        let l = sym_eigenvalues(cov);
        let n = null_vector(cov, l[2]);
        let mean = nb
            .iter()
            .map(|&j| ((0..3).map(|c| (points[j][c] - p[c]) * n[c]).sum::<f64>()).abs())
            .sum::<f64>()
            / k as f64;
        worst = worst.max(mean);
    }
    worst
}

/// The classifier written out with plain loops, caching per-point features
/// so a single moved point costs one row of work.
pub struct NaiveNet {
    layers: Vec<(Vec<Vec<f64>>, Vec<f64>)>,
    head: Vec<(Vec<Vec<f64>>, Vec<f64>)>,
}

fn affine(x: &[f64], w: &[Vec<f64>], b: &[f64], relu: bool) -> Vec<f64> {
    let mut out = b.to_vec();
    for (xi, row) in x.iter().zip(w) {
        for (o, wij) in out.iter_mut().zip(row) {
            *o += xi * wij;
        }
    }
    if relu {
        out.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    out
}

impl NaiveNet {
    pub fn new(model: &ClassifierModel) -> Self {
        let conv = |d: &geoa3::classifier::Dense| {
            let w = d.weight.rows().into_iter().map(|r| r.to_vec()).collect();
            (w, d.bias.to_vec())
        };
        Self {
            layers: model.point_layers.iter().map(conv).collect(),
            head: model.head_layers.iter().map(conv).collect(),
        }
    }

    pub fn features(&self, p: Point3) -> Vec<f64> {
        let mut x = p.to_vec();
        for (w, b) in &self.layers {
            x = affine(&x, w, b, true);
        }
        x
    }

    /// Which units of each per-point layer are active at `p`.
    pub fn masks(&self, p: Point3) -> Vec<Vec<bool>> {
        let mut x = p.to_vec();
        let mut out = Vec::new();
        for (w, b) in &self.layers {
            let z = affine(&x, w, b, false);
            out.push(z.iter().map(|&v| v > 0.0).collect());
            x = affine(&x, w, b, true);
        }
        out
    }

    /// Per-point features with the given activation pattern.
    pub fn features_masked(&self, p: Point3, masks: &[Vec<bool>]) -> Vec<f64> {
        let mut x = p.to_vec();
        for ((w, b), m) in self.layers.iter().zip(masks) {
            x = affine(&x, w, b, false);
            for (v, &on) in x.iter_mut().zip(m) {
                if !on {
                    *v = 0.0;
                }
            }
        }
        x
    }

    pub fn logits_from_features(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        let mut pooled = rows[0].clone();
        for r in &rows[1..] {
            for (m, v) in pooled.iter_mut().zip(r) {
                *m = m.max(*v);
            }
        }
        let h = affine(&pooled, &self.head[0].0, &self.head[0].1, true);
        affine(&h, &self.head[1].0, &self.head[1].1, false)
    }

    pub fn logits(&self, points: &[Point3]) -> Vec<f64> {
        let rows: Vec<Vec<f64>> = points.iter().map(|&p| self.features(p)).collect();
        self.logits_from_features(&rows)
    }
}

pub fn log_softmax(logits: &[f64], c: usize) -> f64 {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
    logits[c] - lse
}

/// Central differences of `f` over every coordinate of `points`.
pub fn fd_gradient(
    points: &[Point3],
    h: f64,
    mut f: impl FnMut(usize, &[Point3]) -> f64,
) -> Vec<Point3> {
    let mut x = points.to_vec();
    let mut g = vec![[0.0; 3]; points.len()];
    for i in 0..points.len() {
        for c in 0..3 {
            let orig = x[i][c];
            x[i][c] = orig + h;
            let fp = f(i, &x);
            x[i][c] = orig - h;
            let fm = f(i, &x);
            x[i][c] = orig;
            g[i][c] = (fp - fm) / (2.0 * h);
        }
    }
    g
}

/// Central differences of a classifier-based scalar `loss(logits)` with
/// every ReLU mask and max-pool winner held at its value for `points`.
/// Only the moved point's features are recomputed.
pub fn fd_logit_loss(
    net: &NaiveNet,
    points: &[Point3],
    h: f64,
    loss: impl Fn(&[f64]) -> f64,
) -> Vec<Point3> {
    let masks: Vec<Vec<Vec<bool>>> = points.iter().map(|&p| net.masks(p)).collect();
    let rows: Vec<Vec<f64>> = points.iter().map(|&p| net.features(p)).collect();
    let width = rows[0].len();
    let mut winner = vec![0usize; width];
    for (r, row) in rows.iter().enumerate().skip(1) {
        for f in 0..width {
            if row[f] > rows[winner[f]][f] {
                winner[f] = r;
            }
        }
    }
    let pooled: Vec<f64> = (0..width).map(|f| rows[winner[f]][f]).collect();
    let hidden_pre = affine(&pooled, &net.head[0].0, &net.head[0].1, false);
    let hidden_mask: Vec<bool> = hidden_pre.iter().map(|&v| v > 0.0).collect();

    let eval = |i: usize, p: Point3| {
        let row = net.features_masked(p, &masks[i]);
        let mut pool = pooled.clone();
        for f in 0..width {
            if winner[f] == i {
                pool[f] = row[f];
            }
        }
        let mut hid = affine(&pool, &net.head[0].0, &net.head[0].1, false);
        for (v, &m) in hid.iter_mut().zip(&hidden_mask) {
            if !m {
                *v = 0.0;
            }
        }
        loss(&affine(&hid, &net.head[1].0, &net.head[1].1, false))
    };
    let mut g = vec![[0.0; 3]; points.len()];
    for i in 0..points.len() {
        for c in 0..3 {
            let mut p = points[i];
            p[c] += h;
            let fp = eval(i, p);
            p[c] -= 2.0 * h;
            let fm = eval(i, p);
            g[i][c] = (fp - fm) / (2.0 * h);
        }
    }
    g
}

/// `‖a - b‖ / ‖b‖` over all coordinates, with `b` the reference.
pub fn rel_err(a: &[Point3], b: &[Point3]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += d2(*x, *y);
        den += d2(*y, [0.0; 3]);
    }
    if den == 0.0 {
        return num.sqrt();
    }
    (num / den).sqrt()
}

pub fn cloud(points: Vec<Point3>) -> PointCloud {
    PointCloud::new(points).unwrap()
}

/// Curvature consistency evaluated directly, with the neighbor lists, the
/// nearest-benign assignment and the sign of every neighbor cosine held
/// fixed. `signs[i][m]` belongs to the m-th neighbor of point i.
pub struct FrozenCurvature {
    pub nbrs: Vec<Vec<usize>>,
    pub anchor: Vec<usize>,
    pub normals: Vec<Point3>,
    pub kappa: Vec<f64>,
    pub signs: Vec<Vec<f64>>,
    pub k: usize,
}

impl FrozenCurvature {
    pub fn new(
        points: &[Point3],
        nbrs: Vec<Vec<usize>>,
        anchor: Vec<usize>,
        normals: Vec<Point3>,
        kappa: Vec<f64>,
        k: usize,
    ) -> Self {
        let signs = nbrs
            .iter()
            .enumerate()
            .map(|(i, nb)| {
                let n = normals[anchor[i]];
                nb.iter()
                    .map(|&j| {
                        let dot: f64 = (0..3).map(|c| (points[j][c] - points[i][c]) * n[c]).sum();
                        if dot > 0.0 {
                            1.0
                        } else if dot < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            nbrs,
            anchor,
            normals,
            kappa,
            signs,
            k,
        }
    }

    pub fn value(&self, points: &[Point3]) -> f64 {
        let mut total = 0.0;
        for (i, nb) in self.nbrs.iter().enumerate() {
            let n = self.normals[self.anchor[i]];
            let mut kappa = 0.0;
            for (m, &j) in nb.iter().enumerate() {
                let d = [0, 1, 2].map(|c| points[j][c] - points[i][c]);
                let len = d2(d, [0.0; 3]).sqrt();
                if len > 0.0 {
                    kappa += self.signs[i][m] * (d[0] * n[0] + d[1] * n[1] + d[2] * n[2]) / len;
                }
            }
            let r = kappa / self.k as f64 - self.kappa[self.anchor[i]];
            total += r * r;
        }
        total / points.len() as f64
    }
}
