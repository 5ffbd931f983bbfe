//! Property checks shared by the quick tests and the acceptance run.
#![allow(dead_code)]

use geoa3::attack::{adv_objective, sample_jitter, AttackConfig, AttackMode, ObjectiveCache};
use geoa3::classifier::{loss_targeted, loss_untargeted, ClassifierModel};
use geoa3::geom::{curvature, eigh3, fps, knn, local_frames, regularity, SymMat3};
use geoa3::losses::{
    chamfer, chamfer_with, curvature_consistency, geo_loss, hausdorff, hausdorff_with,
    BenignGeometry, Correspondence, GeoWeights,
};
use geoa3::{Point3, PointCloud};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::oracles::{self, cloud, fd_gradient, fd_logit_loss, rel_err, NaiveNet};

fn uniform_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
    (0..n)
        .map(|_| [0, 1, 2].map(|_| rng.random_range(-1.0..1.0)))
        .collect()
}

/// kNN, Chamfer, Hausdorff and FPS against brute force on `count` clouds.
pub fn oracle_equivalence(count: usize, rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..count {
        let n = rng.random_range(2..=256);
        let mut pts = uniform_points(rng, n);
        // some exact duplicates exercise the index tie-break
        if n > 4 && case % 3 == 0 {
            pts[n - 1] = pts[0];
            pts[n - 2] = pts[1];
        }
        let c = cloud(pts.clone());
        let k = rng.random_range(1..n.min(17));
        let got = knn(&c, k).map_err(|e| e.to_string())?;
        let want = oracles::knn(&pts, k);
        for (i, w) in want.iter().enumerate() {
            if got.neighbors(i) != w.as_slice() {
                return Err(format!("case {case}: knn row {i} differs"));
            }
        }

        let m = rng.random_range(1..=n);
        let sel = fps(&c, m).map_err(|e| e.to_string())?;
        let want: Vec<Point3> = oracles::fps(&pts, m).into_iter().map(|i| pts[i]).collect();
        if sel.points() != want.as_slice() {
            return Err(format!("case {case}: fps({m}) differs"));
        }

        let (na, nb) = (rng.random_range(1..=256), rng.random_range(1..=256));
        let a = uniform_points(rng, na);
        let b = uniform_points(rng, nb);
        let (ca, cb) = (cloud(a.clone()), cloud(b.clone()));
        let ch = chamfer(&ca, &cb).map_err(|e| e.to_string())?.value;
        if ch != oracles::chamfer(&a, &b) {
            return Err(format!(
                "case {case}: chamfer {ch} vs {}",
                oracles::chamfer(&a, &b)
            ));
        }
        let hd = hausdorff(&ca, &cb).map_err(|e| e.to_string())?.value;
        if hd != oracles::hausdorff(&a, &b) {
            return Err(format!(
                "case {case}: hausdorff {hd} vs {}",
                oracles::hausdorff(&a, &b)
            ));
        }
    }
    Ok(())
}

pub const GRADIENT_NAMES: [&str; 7] = [
    "chamfer",
    "hausdorff",
    "curvature",
    "geo",
    "mis_targeted",
    "mis_untargeted",
    "adv",
];

/// Largest norm-wise relative error between analytic and central-difference
/// gradients for each loss in [`GRADIENT_NAMES`], over `count` instances.
pub fn gradient_errors(count: usize, h: f64, rng: &mut ChaCha8Rng) -> [f64; 7] {
    let n = 128;
    let k = 16;
    let noise = Normal::new(0.0, 0.03).unwrap();
    let mut worst = [0.0f64; 7];
    for case in 0..count {
        let benign_pts = uniform_points(rng, n);
        let adv_pts: Vec<Point3> = benign_pts
            .iter()
            .map(|p| p.map(|v| v + noise.sample(rng)))
            .collect();
        let classes = 8;
        let y = rng.random_range(0..classes);
        let benign = cloud(benign_pts).with_label(y);
        let adv = cloud(adv_pts.clone());
        let corr = Correspondence::compute(&adv, &benign).unwrap();
        let geom = BenignGeometry::new(&benign, k).unwrap();
        let nbr = knn(&adv, k).unwrap();
        let w = GeoWeights::default();
        let at = |x: &[Point3]| PointCloud::new(x.to_vec()).unwrap();

        let mut record = |slot: usize, analytic: &[Point3], numeric: &[Point3]| {
            worst[slot] = worst[slot].max(rel_err(analytic, numeric));
        };

        let g = chamfer_with(&adv, &benign, &corr).unwrap().gradient;
        let fd = fd_gradient(&adv_pts, h, |_, x| {
            chamfer_with(&at(x), &benign, &corr).unwrap().value
        });
        record(0, &g, &fd);

        let g = hausdorff_with(&adv, &benign, &corr).unwrap().gradient;
        let fd = fd_gradient(&adv_pts, h, |_, x| {
            hausdorff_with(&at(x), &benign, &corr).unwrap().value
        });
        record(1, &g, &fd);

        let frozen = oracles::FrozenCurvature::new(
            &adv_pts,
            (0..n).map(|i| nbr.neighbors(i).to_vec()).collect(),
            corr.fwd.clone(),
            geom.frames.frames.iter().map(|f| f.normal).collect(),
            geom.curvature.clone(),
            k,
        );
        let lv = curvature_consistency(&adv, &geom, &nbr, &corr).unwrap();
        let ov = frozen.value(&adv_pts);
        if (lv.value - ov).abs() > 1e-12 * (1.0 + ov.abs()) {
            record(2, &[[1.0; 3]], &[[0.0; 3]]);
        }
        let fd = fd_gradient(&adv_pts, h, |_, x| frozen.value(x));
        record(2, &lv.gradient, &fd);

        let g = geo_loss(&adv, &benign, &geom, &nbr, &corr, w)
            .unwrap()
            .gradient;
        let fd_geo = fd_gradient(&adv_pts, h, |_, x| {
            let c = at(x);
            chamfer_with(&c, &benign, &corr).unwrap().value
                + w.lambda1 * hausdorff_with(&c, &benign, &corr).unwrap().value
                + w.lambda2 * frozen.value(x)
        });
        record(3, &g, &fd_geo);

        let model = ClassifierModel::new(classes, case as u64);
        let net = NaiveNet::new(&model);
        let target = (y + rng.random_range(1..classes)) % classes;
        let logits = model.forward(&adv).unwrap();

        let (_, dl) = loss_targeted(&logits, target).unwrap();
        let g = model.logit_grad(&adv, &dl).unwrap().input_gradient;
        let fd_mis = fd_logit_loss(&net, &adv_pts, h, |l| -oracles::log_softmax(l, target));
        record(4, &g, &fd_mis);

        let (_, dl) = loss_untargeted(&logits, y).unwrap();
        let g = model.logit_grad(&adv, &dl).unwrap().input_gradient;
        let fd = fd_logit_loss(&net, &adv_pts, h, |l| oracles::log_softmax(l, y));
        record(5, &g, &fd);

        let beta = rng.random_range(1.0..100.0);
        let cfg = AttackConfig {
            mode: AttackMode::Targeted { target },
            k,
            ..Default::default()
        };
        let cache = ObjectiveCache {
            benign_geom: geom.clone(),
            adv_nbr: nbr.clone(),
            corr: corr.clone(),
        };
        let g = adv_objective(&model, &adv, &benign, &cache, &cfg, beta)
            .unwrap()
            .gradient;
        let fd: Vec<Point3> = fd_mis
            .iter()
            .zip(&fd_geo)
            .map(|(m, r)| [0, 1, 2].map(|c| m[c] + beta * r[c]))
            .collect();
        record(6, &g, &fd);
    }
    worst
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    // normalized random quaternion
    let n = Normal::new(0.0, 1.0).unwrap();
    let mut q = [0.0f64; 4].map(|_| n.sample(rng));
    let len = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.iter_mut().for_each(|v| *v /= len);
    let [w, x, y, z] = q;
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
        ],
        [
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
        ],
        [
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn apply(r: &[[f64; 3]; 3], t: Point3, p: Point3) -> Point3 {
    [0, 1, 2].map(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2] + t[i])
}

fn curvature_of(c: &PointCloud, k: usize) -> Vec<f64> {
    let nbr = knn(c, k).unwrap();
    let frames = local_frames(c, &nbr);
    curvature(c, &nbr, &frames)
}

/// Curvature range, planar zeros and rigid-motion invariance.
pub fn curvature_invariants(count: usize, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let k = 16;
    for case in 0..count {
        let n = rng.random_range(64..=256);
        let c = cloud(uniform_points(rng, n));
        let kappa = curvature_of(&c, k);
        if let Some(v) = kappa.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(format!("case {case}: kappa {v} out of range"));
        }

        let planar = cloud(
            uniform_points(rng, n)
                .into_iter()
                .map(|p| [p[0], p[1], 0.0])
                .collect(),
        );
        let pk = curvature_of(&planar, k);
        let pr = regularity(&planar, k).unwrap();
        if pk.iter().any(|&v| v != 0.0) || pr != 0.0 {
            return Err(format!(
                "case {case}: planar cloud has kappa/R {:?}/{pr}",
                pk.iter().copied().fold(0.0, f64::max)
            ));
        }

        let rot = random_rotation(rng);
        let t = [0, 1, 2].map(|_| rng.random_range(-5.0..5.0));
        let moved = cloud(c.points().iter().map(|&p| apply(&rot, t, p)).collect());
        let mk = curvature_of(&moved, k);
        let dk = kappa
            .iter()
            .zip(&mk)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let dr = (regularity(&c, k).unwrap() - regularity(&moved, k).unwrap()).abs();
        if dk > 1e-9 || dr > 1e-9 {
            return Err(format!(
                "case {case}: rigid motion changed kappa by {dk:e}, R by {dr:e}"
            ));
        }
    }
    Ok(())
}

/// Residual, orthonormality and oracle eigenvalue agreement of `eigh3`.
/// Returns the largest residual seen.
pub fn eigh3_residuals(count: usize, rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for case in 0..count {
        let mut v = [0.0f64; 6].map(|_| rng.random_range(-1.0..1.0));
        if case % 10 == 0 {
            // repeated eigenvalues
            v = [v[0], 0.0, 0.0, v[0], 0.0, v[5]];
        }
        let m = SymMat3 {
            xx: v[0],
            xy: v[1],
            xz: v[2],
            yy: v[3],
            yz: v[4],
            zz: v[5],
        };
        let (vals, vecs) = eigh3(&m);
        let want = oracles::sym_eigenvalues(m.to_array());
        for (l, e) in vals.iter().zip(&vecs) {
            let av = m.mul_vec(*e);
            let r = (0..3)
                .map(|c| (av[c] - l * e[c]).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        for a in 0..3 {
            for b in 0..3 {
                let d: f64 = (0..3).map(|c| vecs[a][c] * vecs[b][c]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                if (d - expect).abs() > 1e-10 {
                    return Err(format!("case {case}: eigenvectors not orthonormal"));
                }
            }
            if (vals[a] - want[a]).abs() > 1e-9 {
                return Err(format!(
                    "case {case}: eigenvalue {} vs oracle {}",
                    vals[a], want[a]
                ));
            }
        }
    }
    Ok(worst)
}

/// Jitter orthogonality to normals plus per-axis variance against σ².
/// Returns (max |<j, n>|, variance z-scores along the two tangents).
pub fn jitter_statistics(samples: usize, sigma: f64, rng: &mut ChaCha8Rng) -> (f64, [f64; 2]) {
    let mut pts = Vec::new();
    let normal = Normal::new(0.0, 1.0).unwrap();
    while pts.len() < 1000 {
        let p = [0, 1, 2].map(|_| normal.sample(rng));
        let len = oracles::d2(p, [0.0; 3]).sqrt();
        pts.push(p.map(|v| v / len));
    }
    let c = cloud(pts);
    let frames = local_frames(&c, &knn(&c, 16).unwrap());
    let mut max_dot: f64 = 0.0;
    let mut sums = [0.0f64; 2];
    let mut total = 0usize;
    while total < samples {
        let j = sample_jitter(&frames, sigma, rng);
        for (o, f) in j.offsets.iter().zip(&frames.frames) {
            if total == samples {
                break;
            }
            let dot = |a: Point3, b: Point3| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            max_dot = max_dot.max(dot(*o, f.normal).abs());
            sums[0] += dot(*o, f.tangent1).powi(2);
            sums[1] += dot(*o, f.tangent2).powi(2);
            total += 1;
        }
    }
    let var2 = sigma * sigma;
    let se = var2 * (2.0 / total as f64).sqrt();
    let z = sums.map(|s| (s / total as f64 - var2) / se);
    (max_dot, z)
}

pub fn regularity_oracle_gap(rng: &mut ChaCha8Rng) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let pts: Vec<Point3> = (0..1024)
        .map(|_| {
            let p = [0, 1, 2].map(|_| normal.sample(rng));
            let len = oracles::d2(p, [0.0; 3]).sqrt();
            p.map(|v| v / len)
        })
        .collect();
    let got = regularity(&cloud(pts.clone()), 16).unwrap();
    (got - oracles::regularity(&pts, 16)).abs()
}
