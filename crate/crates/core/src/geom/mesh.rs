use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{vec3, Point3, PointCloud};
use crate::error::{Error, Result};

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn triangle_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        0.5 * vec3::norm(vec3::cross(vec3::sub(b, a), vec3::sub(c, a)))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.triangle_area(f)).sum()
    }
}

/// Samples `n` points uniformly by area over the mesh surface, seeded.
pub fn sample_mesh_surface(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_mesh_surface_with(mesh, n, &mut rng)
}

pub(crate) fn sample_mesh_surface_with<R: Rng + ?Sized>(
    mesh: &TriangleMesh,
    n: usize,
    rng: &mut R,
) -> Result<PointCloud> {
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += mesh.triangle_area(f);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::EmptyMesh);
    }
    let last = cumulative.len() - 1;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        let mut f = cumulative.partition_point(|&c| c <= u).min(last);
        // skip zero-area faces that share a cumulative value with their successor
        while mesh.triangle_area(f) == 0.0 && f < last {
            f += 1;
        }
        let [a, b, c] = mesh.faces[f].map(|i| mesh.vertices[i]);
        let s = rng.random::<f64>().sqrt();
        let r = rng.random::<f64>();
        let (wa, wb, wc) = (1.0 - s, s * (1.0 - r), s * r);
        points.push([
            wa * a[0] + wb * b[0] + wc * c[0],
            wa * a[1] + wb * b[1] + wc * c[1],
            wa * a[2] + wb * b[2] + wc * c[2],
        ]);
    }
    PointCloud::new(points)
}
