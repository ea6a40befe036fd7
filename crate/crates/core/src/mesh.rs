//! Triangle meshes of surfaces of revolution in `R^3` (the n = 2 case) and
//! OBJ export.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::Write;

use crate::error::{Error, Result};
use crate::polyline::{is_closed, Point};

/// Profile points with `r` at or below this are collapsed to a pole vertex.
const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices.
    pub faces: Vec<[usize; 3]>,
}

/// Resample a polyline to `count` segments of equal arc length. A closed
/// input stays closed (last point repeats the first).
pub fn resample_by_arclength(points: &[Point], count: usize) -> Result<Vec<Point>> {
    if points.len() < 2 || count == 0 {
        return Err(Error::InvalidConfig(format!(
            "cannot resample {} points into {count} segments",
            points.len()
        )));
    }
    let mut cumulative = Vec::with_capacity(points.len());
    let mut total = 0.0;
    cumulative.push(0.0);
    for w in points.windows(2) {
        total += w[0].dist(w[1]);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::Domain("polyline has zero length".into()));
    }
    let mut out = Vec::with_capacity(count + 1);
    let mut seg = 0;
    for k in 0..count {
        let target = total * k as f64 / count as f64;
        while seg + 2 < cumulative.len() && cumulative[seg + 1] <= target {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let t = if len > 0.0 {
            (target - cumulative[seg]) / len
        } else {
            0.0
        };
        let (a, b) = (points[seg], points[seg + 1]);
        out.push(Point::new(a.x + t * (b.x - a.x), a.r + t * (b.r - a.r)));
    }
    out.push(if is_closed(points) {
        out[0]
    } else {
        points[points.len() - 1]
    });
    Ok(out)
}

/// Revolve a profile polyline about the x-axis into a triangle mesh with
/// vertices `(x, r cos φ, r sin φ)`, `φ = 2πj/angular`.
///
/// Closed profiles give a torus. Open profiles whose end points lie on the
/// axis are capped by pole vertices. Triangles are wound so their normals
/// agree with `N = (-r', x' α)` for the profile's direction of travel.
pub fn revolve(points: &[Point], angular: usize) -> Result<Mesh> {
    if angular < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 angular segments (got {angular})"
        )));
    }
    if points.len() < 2 {
        return Err(Error::InvalidConfig(
            "profile needs at least two points".into(),
        ));
    }
    let closed = is_closed(points);
    let profile = if closed {
        &points[..points.len() - 1]
    } else {
        points
    };
    if let Some(p) = profile
        .iter()
        .find(|p| p.r < -POLE_EPS || !p.r.is_finite() || !p.x.is_finite())
    {
        return Err(Error::Domain(format!(
            "profile point ({}, {}) is off the upper half plane",
            p.x, p.r
        )));
    }

    let mut vertices = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(profile.len());
    for p in profile {
        if p.r <= POLE_EPS {
            let id = vertices.len();
            vertices.push([p.x, 0.0, 0.0]);
            rings.push(vec![id; angular]);
        } else {
            let start = vertices.len();
            for j in 0..angular {
                let (sin, cos) = (TAU * j as f64 / angular as f64).sin_cos();
                vertices.push([p.x, p.r * cos, p.r * sin]);
            }
            rings.push((start..start + angular).collect());
        }
    }

    let rows = if closed {
        profile.len()
    } else {
        profile.len() - 1
    };
    let mut faces = Vec::with_capacity(2 * rows * angular);
    for i in 0..rows {
        let (here, next) = (&rings[i], &rings[(i + 1) % profile.len()]);
        for j in 0..angular {
            let jn = (j + 1) % angular;
            for tri in [[here[j], here[jn], next[jn]], [here[j], next[jn], next[j]]] {
                if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                    faces.push(tri);
                }
            }
        }
    }
    Ok(Mesh { vertices, faces })
}

impl Mesh {
    fn directed_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                *edges.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn edge_count(&self) -> usize {
        let mut undirected: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]))))
            .collect();
        undirected.sort_unstable();
        undirected.dedup();
        undirected.len()
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.faces.len() as i64
    }

    /// Every edge is shared by exactly two faces that traverse it in
    /// opposite directions.
    pub fn is_watertight(&self) -> bool {
        let edges = self.directed_edges();
        edges
            .iter()
            .all(|(&(a, b), &count)| count == 1 && edges.get(&(b, a)) == Some(&1))
    }

    pub fn face_normal(&self, face: usize) -> [f64; 3] {
        let [a, b, c] = self.faces[face].map(|i| self.vertices[i]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    }

    /// OBJ text: `v x y z` lines with 17 significant digits, then `f i j k`
    /// with 1-based indices.
    pub fn write_obj<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
        }
        for f in &self.faces {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(center_r: f64, radius: f64, m: usize) -> Vec<Point> {
        (0..=m)
            .map(|i| {
                let t = TAU * (i % m) as f64 / m as f64 - PI / 2.0;
                Point::new(radius * t.cos(), center_r + radius * t.sin())
            })
            .collect()
    }

    fn half_circle(a: f64, m: usize) -> Vec<Point> {
        (0..=m)
            .map(|i| {
                let t = PI * i as f64 / m as f64;
                Point::new(a * t.cos(), a * t.sin())
            })
            .collect()
    }

    #[test]
    fn closed_profile_gives_torus() {
        let mesh = revolve(&circle(2.0, 1.0, 40), 24).unwrap();
        assert_eq!(mesh.vertices.len(), 40 * 24);
        assert_eq!(mesh.faces.len(), 2 * 40 * 24);
        assert!(mesh.is_watertight());
        assert_eq!(mesh.euler_characteristic(), 0);
    }

    #[test]
    fn axis_capped_profile_gives_sphere() {
        let mesh = revolve(&half_circle(2f64.sqrt(), 30), 16).unwrap();
        assert_eq!(mesh.vertices.len(), 29 * 16 + 2);
        assert!(mesh.is_watertight());
        assert_eq!(mesh.euler_characteristic(), 2);
    }

    #[test]
    fn open_profile_off_axis_has_boundary() {
        let segment = vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)];
        let mesh = revolve(&segment, 8).unwrap();
        assert!(!mesh.is_watertight());
    }

    #[test]
    fn face_normals_follow_profile_normal() {
        // Counter-clockwise circle: N = (-r', x') points into the disc.
        let pts = circle(3.0, 1.0, 64);
        let mesh = revolve(&pts, 32).unwrap();
        for (f, face) in mesh.faces.iter().enumerate().step_by(37) {
            let normal = mesh.face_normal(f);
            let centroid: [f64; 3] =
                [0, 1, 2].map(|k| face.iter().map(|&v| mesh.vertices[v][k]).sum::<f64>() / 3.0);
            let radial = centroid[1].hypot(centroid[2]);
            // vector from the centroid toward the tube's core circle
            let to_core = [
                -centroid[0],
                centroid[1] * (3.0 / radial - 1.0),
                centroid[2] * (3.0 / radial - 1.0),
            ];
            let dot: f64 = (0..3).map(|k| normal[k] * to_core[k]).sum();
            assert!(dot > 0.0, "face {f}");
        }
    }

    #[test]
    fn resampling_preserves_closure_and_spacing() {
        let pts = circle(2.0, 1.0, 1000);
        let out = resample_by_arclength(&pts, 100).unwrap();
        assert_eq!(out.len(), 101);
        assert_eq!(out[0], out[100]);
        let lens: Vec<f64> = out.windows(2).map(|w| w[0].dist(w[1])).collect();
        let (lo, hi) = lens
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
        assert!(hi - lo < 1e-4);
        let open = resample_by_arclength(&half_circle(1.0, 50), 10).unwrap();
        assert_eq!(open.len(), 11);
        assert_eq!(open[10], Point::new(-1.0, 1.0 * PI.sin()));
    }

    #[test]
    fn obj_output_is_one_based() {
        let mesh = revolve(&circle(2.0, 1.0, 4), 3).unwrap();
        let mut buf = Vec::new();
        mesh.write_obj(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 12);
        let max_index = text
            .lines()
            .filter(|l| l.starts_with("f "))
            .flat_map(|l| {
                l[2..]
                    .split(' ')
                    .map(|t| t.parse::<usize>().unwrap())
                    .collect::<Vec<_>>()
            })
            .max()
            .unwrap();
        assert_eq!(max_index, 12);
        assert!(!text.contains("f 0 "));
    }
}
