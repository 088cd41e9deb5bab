//! Mesh families: periodic squares, periodic hexagons, periodic Lloyd-relaxed
//! Voronoi tessellations and icosahedral geodesic spheres.

use std::collections::HashMap;

use delaunator::{triangulate, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::builder::{assemble, RawMesh};
use super::geometry::{planar_circumcenter, planar_triangle_area, spherical_circumcenter, tangent_basis, V3};
use super::{Domain, Mesh};
use crate::error::{Error, Result};

pub const LLOYD_ITERATIONS: usize = 10;
pub const DEFAULT_ICOSAHEDRAL_LEVEL_CAP: u32 = 6;

fn check_length(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

pub fn build_square_mesh(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidParameter(format!(
            "square mesh needs nx, ny >= 3, got {nx} x {ny}"
        )));
    }
    check_length("Lx", lx)?;
    check_length("Ly", ly)?;
    let dx = lx / nx as f64;
    let dy = ly / ny as f64;
    let vid = |a: usize, b: usize| (b % ny) * nx + (a % nx);
    let vertex_positions = (0..ny)
        .flat_map(|b| (0..nx).map(move |a| V3::new(a as f64 * dx, b as f64 * dy, 0.0)))
        .collect();
    let mut cell_centers = Vec::with_capacity(nx * ny);
    let mut rings = Vec::with_capacity(nx * ny);
    for b in 0..ny {
        for a in 0..nx {
            cell_centers.push(V3::new((a as f64 + 0.5) * dx, (b as f64 + 0.5) * dy, 0.0));
            let corner = |da: usize, db: usize| {
                (
                    vid(a + da, b + db),
                    V3::new((a + da) as f64 * dx, (b + db) as f64 * dy, 0.0),
                )
            };
            rings.push(vec![corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)]);
        }
    }
    assemble(RawMesh {
        label: format!("square {nx}x{ny} {lx}x{ly}"),
        domain: Domain::Periodic {
            period_a: [lx, 0.0],
            period_b: [0.0, ly],
        },
        cell_centers,
        vertex_positions,
        rings,
    })
}

/// Triangle of a periodic point set: point ids with lattice shifts.
type PeriodicTriangle = [(usize, (i64, i64)); 3];

fn lattice_vec(a: &V3, b: &V3, s: (i64, i64)) -> V3 {
    a * s.0 as f64 + b * s.1 as f64
}

/// Voronoi tessellation dual to a periodic triangulation of `points`.
/// Each triangle becomes a vertex at its circumcenter.
fn periodic_voronoi(
    label: String,
    points: &[V3],
    triangles: &[PeriodicTriangle],
    pa: V3,
    pb: V3,
) -> Result<RawMesh> {
    let n = points.len();
    let mut vertex_positions = Vec::with_capacity(triangles.len());
    let mut around: Vec<Vec<(usize, V3)>> = vec![Vec::new(); n];
    for (t, tri) in triangles.iter().enumerate() {
        let p: Vec<V3> = tri
            .iter()
            .map(|&(i, s)| points[i] + lattice_vec(&pa, &pb, s))
            .collect();
        if planar_triangle_area(&p[0], &p[1], &p[2]) <= 0.0 {
            return Err(Error::DegenerateMesh(format!("triangle {t} is not counterclockwise")));
        }
        let c = planar_circumcenter(&p[0], &p[1], &p[2]);
        vertex_positions.push(c);
        for &(i, s) in tri {
            around[i].push((t, c - lattice_vec(&pa, &pb, s)));
        }
    }
    let rings = around
        .into_iter()
        .enumerate()
        .map(|(i, mut ring)| {
            let x = points[i];
            ring.sort_by(|a, b| {
                let ta = (a.1.y - x.y).atan2(a.1.x - x.x);
                let tb = (b.1.y - x.y).atan2(b.1.x - x.x);
                ta.total_cmp(&tb)
            });
            ring
        })
        .collect();
    Ok(RawMesh {
        label,
        domain: Domain::Periodic {
            period_a: [pa.x, pa.y],
            period_b: [pb.x, pb.y],
        },
        cell_centers: points.to_vec(),
        vertex_positions,
        rings,
    })
}

/// Periodic hexagonal mesh: `n x n` hexagons on a rhombus with side `l`.
pub fn build_hex_mesh(n: usize, l: f64) -> Result<Mesh> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("hex mesh needs n >= 3, got {n}")));
    }
    check_length("L", l)?;
    let d = l / n as f64;
    let a1 = V3::new(d, 0.0, 0.0);
    let a2 = V3::new(0.5 * d, 0.5 * 3f64.sqrt() * d, 0.0);
    let pa = a1 * n as f64;
    let pb = a2 * n as f64;
    let points: Vec<V3> = (0..n)
        .flat_map(|b| (0..n).map(move |a| a1 * a as f64 + a2 * b as f64))
        .collect();
    let site = |a: usize, b: usize| -> (usize, (i64, i64)) {
        ((b % n) * n + (a % n), ((a / n) as i64, (b / n) as i64))
    };
    let mut triangles = Vec::with_capacity(2 * n * n);
    for b in 0..n {
        for a in 0..n {
            triangles.push([site(a, b), site(a + 1, b), site(a, b + 1)]);
            triangles.push([site(a + 1, b), site(a + 1, b + 1), site(a, b + 1)]);
        }
    }
    let raw = periodic_voronoi(format!("hex {n} {l}"), &points, &triangles, pa, pb)?;
    assemble(raw)
}

fn wrap_unit(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Periodic Delaunay triangulation of points in `[0, lx) x [0, ly)`.
fn periodic_delaunay(points: &[V3], lx: f64, ly: f64) -> Result<Vec<PeriodicTriangle>> {
    let n = points.len();
    let mut copies = Vec::with_capacity(9 * n);
    let mut origin = Vec::with_capacity(9 * n);
    for sb in -1i64..=1 {
        for sa in -1i64..=1 {
            for (i, p) in points.iter().enumerate() {
                copies.push(Point {
                    x: p.x + sa as f64 * lx,
                    y: p.y + sb as f64 * ly,
                });
                origin.push((i, (sa, sb)));
            }
        }
    }
    let tri = triangulate(&copies);
    let mut out = Vec::with_capacity(2 * n);
    for t in tri.triangles.chunks_exact(3) {
        let p: Vec<V3> = t.iter().map(|&k| V3::new(copies[k].x, copies[k].y, 0.0)).collect();
        let c = planar_circumcenter(&p[0], &p[1], &p[2]);
        let (u, w) = (c.x / lx, c.y / ly);
        if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&w) {
            continue;
        }
        // Delaunator emits clockwise triangles in a y-up frame.
        let mut entry = [origin[t[0]], origin[t[1]], origin[t[2]]];
        if planar_triangle_area(&p[0], &p[1], &p[2]) < 0.0 {
            entry.swap(1, 2);
        }
        out.push(entry);
    }
    if out.len() != 2 * n {
        return Err(Error::DegenerateMesh(format!(
            "periodic triangulation has {} triangles, expected {}",
            out.len(),
            2 * n
        )));
    }
    Ok(out)
}

/// Periodic Voronoi mesh from `n_seeds` uniformly drawn generators relaxed by
/// a fixed number of Lloyd iterations.
pub fn build_voronoi_mesh(n_seeds: usize, lx: f64, ly: f64, seed: u64) -> Result<Mesh> {
    if n_seeds < 9 {
        return Err(Error::InvalidParameter(format!(
            "voronoi mesh needs at least 9 seeds, got {n_seeds}"
        )));
    }
    check_length("Lx", lx)?;
    check_length("Ly", ly)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<V3> = (0..n_seeds)
        .map(|_| V3::new(rng.random::<f64>() * lx, rng.random::<f64>() * ly, 0.0))
        .collect();
    let pa = V3::new(lx, 0.0, 0.0);
    let pb = V3::new(0.0, ly, 0.0);
    let label = format!("voronoi {n_seeds} {lx}x{ly} seed {seed}");
    for _ in 0..LLOYD_ITERATIONS {
        let tris = periodic_delaunay(&points, lx, ly)?;
        let raw = periodic_voronoi(label.clone(), &points, &tris, pa, pb)?;
        points = raw
            .rings
            .iter()
            .map(|ring| {
                let c = polygon_centroid(ring.iter().map(|(_, p)| *p));
                V3::new(wrap_unit(c.x / lx) * lx, wrap_unit(c.y / ly) * ly, 0.0)
            })
            .collect();
    }
    let tris = periodic_delaunay(&points, lx, ly)?;
    let raw = periodic_voronoi(label, &points, &tris, pa, pb)?;
    if let Some((i, r)) = raw.rings.iter().enumerate().find(|(_, r)| r.len() < 3) {
        return Err(Error::DegenerateMesh(format!("cell {i} has {} edges", r.len())));
    }
    assemble(raw)
}

fn polygon_centroid(points: impl Iterator<Item = V3>) -> V3 {
    let pts: Vec<V3> = points.collect();
    let m = pts.len();
    let mut area = 0.0;
    let mut c = V3::zeros();
    for k in 0..m {
        let p = pts[k];
        let q = pts[(k + 1) % m];
        let cross = p.x * q.y - q.x * p.y;
        area += cross;
        c += (p + q) * cross;
    }
    c / (3.0 * area)
}

pub fn build_icosahedral_mesh(level: u32, radius: f64) -> Result<Mesh> {
    build_icosahedral_mesh_capped(level, radius, DEFAULT_ICOSAHEDRAL_LEVEL_CAP)
}

/// Spherical hexagonal-pentagonal Voronoi mesh from a recursively bisected
/// icosahedron with `10 * 4^level + 2` cells.
pub fn build_icosahedral_mesh_capped(level: u32, radius: f64, cap: u32) -> Result<Mesh> {
    if level > cap {
        return Err(Error::InvalidParameter(format!(
            "icosahedral level {level} exceeds cap {cap}"
        )));
    }
    check_length("radius", radius)?;
    let (points, faces) = subdivided_icosahedron(level);
    let mut vertex_positions = Vec::with_capacity(faces.len());
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
    for (t, f) in faces.iter().enumerate() {
        vertex_positions.push(spherical_circumcenter(&points[f[0]], &points[f[1]], &points[f[2]]));
        for &i in f {
            around[i].push(t);
        }
    }
    let rings = around
        .into_iter()
        .enumerate()
        .map(|(i, ts)| {
            let x = points[i];
            let (e1, e2) = tangent_basis(&x);
            let mut ring: Vec<(f64, usize, V3)> = ts
                .into_iter()
                .map(|t| {
                    let p = vertex_positions[t];
                    let d = p - x;
                    (d.dot(&e2).atan2(d.dot(&e1)), t, p)
                })
                .collect();
            ring.sort_by(|a, b| a.0.total_cmp(&b.0));
            ring.into_iter().map(|(_, t, p)| (t, p)).collect()
        })
        .collect();
    assemble(RawMesh {
        label: format!("icosahedral {level} {radius}"),
        domain: Domain::Sphere { radius },
        cell_centers: points,
        vertex_positions,
        rings,
    })
}

fn subdivided_icosahedron(level: u32) -> (Vec<V3>, Vec<[usize; 3]>) {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut points: Vec<V3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| V3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, points: &mut Vec<V3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                points.push((points[a] + points[b]).normalize());
                points.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * faces.len());
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut points);
            let bc = midpoint(b, c, &mut points);
            let ca = midpoint(c, a, &mut points);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    (points, faces)
}
