//! Procedural dataset of analytic shapes.
//!
//! Each class is a closed surface sampled uniformly by area, then
//! augmented (anisotropic scaling, rotation about the vertical axis,
//! bounded coordinate noise) and normalized into the unit ball. Every
//! sample draws from its own RNG stream keyed by (seed, split, class,
//! index), so train and test never share a stream and any subset can be
//! regenerated independently.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::mesh::sample_mesh_surface_with;
use crate::geom::{normalize_unit_ball, vec3, Point3, PointCloud, TriangleMesh};
use crate::io::{read_json, read_xyz, write_json, write_xyz, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Box,
    Cylinder,
    Cone,
    Torus,
    Ellipsoid,
    Pyramid,
    Capsule,
}

impl Shape {
    pub const ALL: [Shape; 8] = [
        Shape::Sphere,
        Shape::Box,
        Shape::Cylinder,
        Shape::Cone,
        Shape::Torus,
        Shape::Ellipsoid,
        Shape::Pyramid,
        Shape::Capsule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Sphere => "sphere",
            Shape::Box => "box",
            Shape::Cylinder => "cylinder",
            Shape::Cone => "cone",
            Shape::Torus => "torus",
            Shape::Ellipsoid => "ellipsoid",
            Shape::Pyramid => "pyramid",
            Shape::Capsule => "capsule",
        }
    }

    pub fn from_name(name: &str) -> Option<Shape> {
        Shape::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub classes: Vec<Shape>,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub points: usize,
    /// Per-axis scale factors are drawn uniformly from this range.
    pub scale_range: (f64, f64),
    /// Random rotation about the z axis.
    pub rotate: bool,
    /// Bound of the uniform per-coordinate noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            classes: Shape::ALL.to_vec(),
            train_per_class: 250,
            test_per_class: 50,
            points: 1024,
            scale_range: (0.7, 1.3),
            rotate: true,
            noise: 0.005,
            seed: 0,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if self.classes.len() < 2 {
            return bad("need at least two classes");
        }
        for (i, c) in self.classes.iter().enumerate() {
            if self.classes[..i].contains(c) {
                return bad("duplicate class");
            }
        }
        if self.points < 64 {
            return bad("need at least 64 points per cloud");
        }
        let (lo, hi) = self.scale_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("scale range must satisfy 0 < lo <= hi");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be finite and non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub class_names: Vec<String>,
    pub train: Vec<PointCloud>,
    pub test: Vec<PointCloud>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sample_seed(seed: u64, split: Split, class: usize, index: usize) -> u64 {
    let split_tag = match split {
        Split::Train => 1u64,
        Split::Test => 2u64,
    };
    mix(mix(mix(seed) ^ split_tag) ^ ((class as u64) << 32 | index as u64))
}

fn unit_sphere<R: Rng>(rng: &mut R) -> Point3 {
    loop {
        let v: Point3 = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n = vec3::norm(v);
        if n > 1e-12 {
            return vec3::scale(v, 1.0 / n);
        }
    }
}

fn disk<R: Rng>(rng: &mut R, radius: f64, z: f64) -> Point3 {
    let r = radius * rng.random::<f64>().sqrt();
    let (s, c) = rng.random_range(0.0..TAU).sin_cos();
    [r * c, r * s, z]
}

fn cube_mesh() -> TriangleMesh {
    let mut vertices = Vec::new();
    for i in 0..8 {
        let b = |bit: usize| if i >> bit & 1 == 1 { 1.0 } else { -1.0 };
        vertices.push([b(0), b(1), b(2)]);
    }
    let quads = [
        [0, 1, 3, 2],
        [4, 6, 7, 5],
        [0, 4, 5, 1],
        [2, 3, 7, 6],
        [0, 2, 6, 4],
        [1, 5, 7, 3],
    ];
    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriangleMesh { vertices, faces }
}

fn pyramid_mesh() -> TriangleMesh {
    let h = 0.8;
    TriangleMesh {
        vertices: vec![
            [-h, -h, -0.6],
            [h, -h, -0.6],
            [h, h, -0.6],
            [-h, h, -0.6],
            [0.0, 0.0, 0.9],
        ],
        faces: vec![
            [0, 2, 1],
            [0, 3, 2],
            [0, 1, 4],
            [1, 2, 4],
            [2, 3, 4],
            [3, 0, 4],
        ],
    }
}

/// Raw surface samples of a shape before augmentation.
pub fn sample_shape<R: Rng>(shape: Shape, n: usize, rng: &mut R) -> Vec<Point3> {
    match shape {
        Shape::Sphere => (0..n).map(|_| unit_sphere(rng)).collect(),
        Shape::Box => mesh_points(&cube_mesh(), n, rng),
        Shape::Pyramid => mesh_points(&pyramid_mesh(), n, rng),
        Shape::Cylinder => {
            let (r, h) = (0.6, 0.8);
            let side = TAU * r * 2.0 * h;
            let cap = PI * r * r;
            (0..n)
                .map(|_| {
                    let u = rng.random::<f64>() * (side + 2.0 * cap);
                    if u < side {
                        let (s, c) = rng.random_range(0.0..TAU).sin_cos();
                        [r * c, r * s, rng.random_range(-h..h)]
                    } else if u < side + cap {
                        disk(rng, r, h)
                    } else {
                        disk(rng, r, -h)
                    }
                })
                .collect()
        }
        Shape::Cone => {
            let (r, z0, z1): (f64, f64, f64) = (0.8, -0.6, 0.9);
            let slant = (r * r + (z1 - z0) * (z1 - z0)).sqrt();
            let lateral = PI * r * slant;
            let base = PI * r * r;
            (0..n)
                .map(|_| {
                    if rng.random::<f64>() * (lateral + base) < lateral {
                        // distance from apex grows like sqrt(u) for uniform area
                        let t = rng.random::<f64>().sqrt();
                        let (s, c) = rng.random_range(0.0..TAU).sin_cos();
                        [t * r * c, t * r * s, z1 + t * (z0 - z1)]
                    } else {
                        disk(rng, r, z0)
                    }
                })
                .collect()
        }
        Shape::Torus => {
            let (big, small) = (0.75, 0.3);
            (0..n)
                .map(|_| loop {
                    let u = rng.random_range(0.0..TAU);
                    let v = rng.random_range(0.0..TAU);
                    let w = (big + small * v.cos()) / (big + small);
                    if rng.random::<f64>() < w {
                        let ring = big + small * v.cos();
                        break [ring * u.cos(), ring * u.sin(), small * v.sin()];
                    }
                })
                .collect()
        }
        Shape::Ellipsoid => {
            let axes = [1.0, 0.5, 0.25];
            let min_axis = 0.25;
            (0..n)
                .map(|_| loop {
                    let s = unit_sphere(rng);
                    // local area stretch relative to its maximum
                    let g = [s[0] / axes[0], s[1] / axes[1], s[2] / axes[2]];
                    let w = vec3::norm(g) * min_axis;
                    if rng.random::<f64>() < w {
                        break [s[0] * axes[0], s[1] * axes[1], s[2] * axes[2]];
                    }
                })
                .collect()
        }
        Shape::Capsule => {
            let (r, h) = (0.45, 0.6);
            let side = TAU * r * 2.0 * h;
            let caps = 4.0 * PI * r * r;
            (0..n)
                .map(|_| {
                    if rng.random::<f64>() * (side + caps) < side {
                        let (s, c) = rng.random_range(0.0..TAU).sin_cos();
                        [r * c, r * s, rng.random_range(-h..h)]
                    } else {
                        let p = unit_sphere(rng);
                        let shift = if p[2] >= 0.0 { h } else { -h };
                        [r * p[0], r * p[1], r * p[2] + shift]
                    }
                })
                .collect()
        }
    }
}

fn mesh_points<R: Rng>(mesh: &TriangleMesh, n: usize, rng: &mut R) -> Vec<Point3> {
    sample_mesh_surface_with(mesh, n, rng)
        .expect("built-in meshes have area")
        .into_points()
}

/// One augmented, normalized, labeled sample.
pub fn generate_sample(spec: &DatasetSpec, split: Split, class: usize, index: usize) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(spec.seed, split, class, index));
    let raw = sample_shape(spec.classes[class], spec.points, &mut rng);
    let (lo, hi) = spec.scale_range;
    let mut scale = [1.0; 3];
    for s in &mut scale {
        *s = if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        };
    }
    let (sin, cos) = if spec.rotate {
        rng.random_range(0.0..TAU).sin_cos()
    } else {
        (0.0, 1.0)
    };
    let points = raw
        .into_iter()
        .map(|p| {
            let p = [p[0] * scale[0], p[1] * scale[1], p[2] * scale[2]];
            let mut q = [cos * p[0] - sin * p[1], sin * p[0] + cos * p[1], p[2]];
            if spec.noise > 0.0 {
                for v in &mut q {
                    *v += rng.random_range(-spec.noise..=spec.noise);
                }
            }
            q
        })
        .collect();
    let cloud = PointCloud::new(points).expect("finite samples");
    normalize_unit_ball(&cloud).with_label(class)
}

/// Builds the full train/test corpus, class-major order.
pub fn gen_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let split = |which: Split, per_class: usize| -> Vec<PointCloud> {
        (0..spec.classes.len())
            .flat_map(|c| (0..per_class).map(move |i| (c, i)))
            .map(|(c, i)| generate_sample(spec, which, c, i))
            .collect()
    };
    Ok(Dataset {
        class_names: spec.classes.iter().map(|s| s.name().to_string()).collect(),
        train: split(Split::Train, spec.train_per_class),
        test: split(Split::Test, spec.test_per_class),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: PathBuf,
    pub label: usize,
}

/// `manifest.json` of a dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub spec: DatasetSpec,
    pub classes: Vec<String>,
    pub train: Vec<ManifestEntry>,
    pub test: Vec<ManifestEntry>,
}

pub const MANIFEST: &str = "manifest.json";

/// Writes `train/NNNNN.xyz`, `test/NNNNN.xyz` and the manifest.
pub fn write_dataset(dir: &Path, spec: &DatasetSpec, data: &Dataset) -> Result<()> {
    let entries = |name: &str, clouds: &[PointCloud]| -> Result<Vec<ManifestEntry>> {
        let sub = dir.join(name);
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        clouds
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let file = PathBuf::from(name).join(format!("{i:05}.xyz"));
                write_xyz(c, dir.join(&file))?;
                Ok(ManifestEntry {
                    file,
                    label: c.label.expect("generated clouds are labeled"),
                })
            })
            .collect()
    };
    let train = entries("train", &data.train)?;
    let test = entries("test", &data.test)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        spec: spec.clone(),
        classes: data.class_names.clone(),
        train,
        test,
    };
    write_json(&dir.join(MANIFEST), &manifest)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidSpec(format!(
            "manifest schema version {} is not supported",
            manifest.schema_version
        )));
    }
    let load = |entries: &[ManifestEntry]| -> Result<Vec<PointCloud>> {
        entries
            .iter()
            .map(|e| Ok(read_xyz(dir.join(&e.file))?.with_label(e.label)))
            .collect()
    };
    Ok(Dataset {
        class_names: manifest.classes.clone(),
        train: load(&manifest.train)?,
        test: load(&manifest.test)?,
    })
}
