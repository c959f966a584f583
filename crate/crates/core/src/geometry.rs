//! Integration domains: smooth boundary meshes (sphere, ellipsoid), uniform
//! interior volume grids, a Koch-snowflake prism with an exact inside test,
//! and empirical boundary estimators (box-counting d-summability slope and
//! local Marcinkiewicz exponents).
//!
//! Meshes and grids are plain sample clouds with weights; the transform layer
//! consumes them as-is. Dimension estimates are reported as estimates — the
//! slope of a least-squares fit, never a certified Hausdorff dimension.

use crate::error::{Error, Result};
use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::sync::Arc;

/// Membership test shared by domains, grids, and fractal prisms.
pub type InsideFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// One boundary panel: quadrature point, outward unit normal, surface weight.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Panel {
    #[serde(rename = "p")]
    pub point: Vec<f64>,
    #[serde(rename = "n")]
    pub normal: Vec<f64>,
    #[serde(rename = "w")]
    pub weight: f64,
}

/// Boundary quadrature rule: a cloud of weighted panels with unit normals.
#[derive(Clone)]
pub struct BoundaryMesh {
    pub dim: u32,
    pub panels: Vec<Panel>,
    /// Characteristic panel spacing (max linear panel size); the transform
    /// layer derives its near-boundary guard band from this.
    pub spacing: f64,
    pub descriptor: String,
    /// Membership test for the enclosed domain, when one is known.
    pub inside: Option<InsideFn>,
}

impl BoundaryMesh {
    pub fn total_area(&self) -> f64 {
        self.panels.iter().map(|p| p.weight).sum()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.panels.iter().map(|p| p.point.clone()).collect()
    }

    /// One panel per line: {"p":[...],"n":[...],"w":...}.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for p in &self.panels {
            serde_json::to_writer(&mut w, p)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R, descriptor: &str) -> Result<Self> {
        let mut panels = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            panels.push(serde_json::from_str::<Panel>(&line)?);
        }
        if panels.is_empty() {
            return Err(Error::Parse("no panels in stream".into()));
        }
        let dim = panels[0].point.len() as u32;
        let spacing = panels.iter().map(|p| p.weight).fold(0.0, f64::max);
        let spacing = spacing.powf(1.0 / (dim as f64 - 1.0));
        Ok(BoundaryMesh {
            dim,
            panels,
            spacing,
            descriptor: descriptor.into(),
            inside: None,
        })
    }
}

impl std::fmt::Debug for BoundaryMesh {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryMesh")
            .field("dim", &self.dim)
            .field("panels", &self.panels.len())
            .field("spacing", &self.spacing)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

/// One volume cell: center point and volume weight.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Cell {
    #[serde(rename = "p")]
    pub point: Vec<f64>,
    #[serde(rename = "w")]
    pub weight: f64,
}

/// Uniform interior quadrature rule over a domain.
#[derive(Clone)]
pub struct VolumeGrid {
    pub dim: u32,
    pub cells: Vec<Cell>,
    /// Cartesian cell edge length.
    pub h: f64,
    pub descriptor: String,
    /// Membership test for the underlying domain, when one is known. The
    /// transform layer uses it to clip singular-patch quadrature nodes near
    /// the domain boundary.
    pub inside: Option<InsideFn>,
}

impl VolumeGrid {
    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.weight).sum()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.cells {
            serde_json::to_writer(&mut w, c)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R, h: f64, descriptor: &str) -> Result<Self> {
        let mut cells = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            cells.push(serde_json::from_str::<Cell>(&line)?);
        }
        if cells.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let dim = cells[0].point.len() as u32;
        Ok(VolumeGrid {
            dim,
            cells,
            h,
            descriptor: descriptor.into(),
            inside: None,
        })
    }
}

impl std::fmt::Debug for VolumeGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VolumeGrid")
            .field("dim", &self.dim)
            .field("cells", &self.cells.len())
            .field("h", &self.h)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

/// A bounded open set given by a membership test and a bounding box.
#[derive(Clone)]
pub struct Domain {
    pub dim: u32,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub descriptor: String,
    pub inside: InsideFn,
}

impl Domain {
    pub fn ball(dim: u32, radius: f64) -> Result<Domain> {
        if radius <= 0.0 {
            return Err(Error::InvalidParam("ball radius must be positive".into()));
        }
        Ok(Domain {
            dim,
            lo: vec![-radius; dim as usize],
            hi: vec![radius; dim as usize],
            descriptor: format!("ball(m={dim}, r={radius})"),
            inside: Arc::new(move |x: &[f64]| {
                x.iter().map(|v| v * v).sum::<f64>() < radius * radius
            }),
        })
    }

    pub fn ellipsoid(semi_axes: &[f64]) -> Result<Domain> {
        if semi_axes.iter().any(|&a| a <= 0.0) {
            return Err(Error::InvalidParam("semi-axes must be positive".into()));
        }
        let a = semi_axes.to_vec();
        let dim = a.len() as u32;
        Ok(Domain {
            dim,
            lo: a.iter().map(|v| -v).collect(),
            hi: a.clone(),
            descriptor: format!("ellipsoid({a:?})"),
            inside: Arc::new(move |x: &[f64]| {
                x.iter().zip(&a).map(|(v, ai)| (v / ai) * (v / ai)).sum::<f64>() < 1.0
            }),
        })
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }
}

impl std::fmt::Debug for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Domain")
            .field("dim", &self.dim)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

// ---------------------------------------------------------------------------
// Sphere and ellipsoid meshes
// ---------------------------------------------------------------------------

/// Sphere of the given radius in R^dim. For dim = 3 a subdivided icosahedron
/// (panel count 20·4^level, exact solid-angle weights); for dim ≥ 4 a
/// midpoint product rule in hyperspherical angles.
pub fn mesh_sphere(dim: u32, radius: f64, level: u32) -> Result<BoundaryMesh> {
    if radius <= 0.0 {
        return Err(Error::InvalidParam("sphere radius must be positive".into()));
    }
    if dim < 3 {
        return Err(Error::UnsupportedDimension {
            dim,
            reason: "boundary meshes need m >= 3",
        });
    }
    let mut mesh = if dim == 3 {
        icosphere(radius, level)
    } else {
        hypersphere_product_mesh(dim, radius, level)
    };
    mesh.inside = Some(Domain::ball(dim, radius)?.inside);
    mesh.descriptor = format!("sphere(m={dim}, r={radius}, level={level})");
    Ok(mesh)
}

/// Ellipsoid boundary in R^3 via the mapped icosphere. Weights are flat
/// triangle areas of the mapped facets (first-order accurate).
pub fn mesh_ellipsoid(semi_axes: &[f64; 3], level: u32) -> Result<BoundaryMesh> {
    if semi_axes.iter().any(|&a| a <= 0.0) {
        return Err(Error::InvalidParam("semi-axes must be positive".into()));
    }
    let (verts, faces) = subdivided_icosahedron(level);
    let a = *semi_axes;
    let map = |v: &[f64; 3]| [a[0] * v[0], a[1] * v[1], a[2] * v[2]];
    let mut panels = Vec::with_capacity(faces.len());
    let mut spacing: f64 = 0.0;
    for f in &faces {
        let (p0, p1, p2) = (map(&verts[f[0]]), map(&verts[f[1]]), map(&verts[f[2]]));
        let e1 = sub3(&p1, &p0);
        let e2 = sub3(&p2, &p0);
        let cr = cross3(&e1, &e2);
        let area = 0.5 * norm3(&cr);
        let mut c = [
            (p0[0] + p1[0] + p2[0]) / 3.0,
            (p0[1] + p1[1] + p2[1]) / 3.0,
            (p0[2] + p1[2] + p2[2]) / 3.0,
        ];
        // project the centroid back onto the ellipsoid
        let s = (0..3).map(|i| (c[i] / a[i]).powi(2)).sum::<f64>().sqrt();
        for v in &mut c {
            *v /= s;
        }
        let mut n = [c[0] / (a[0] * a[0]), c[1] / (a[1] * a[1]), c[2] / (a[2] * a[2])];
        let nn = norm3(&n);
        for v in &mut n {
            *v /= nn;
        }
        spacing = spacing.max(norm3(&e1)).max(norm3(&e2));
        panels.push(Panel {
            point: c.to_vec(),
            normal: n.to_vec(),
            weight: area,
        });
    }
    Ok(BoundaryMesh {
        dim: 3,
        panels,
        spacing,
        descriptor: format!("ellipsoid({semi_axes:?}, level={level})"),
        inside: Some(Domain::ellipsoid(semi_axes)?.inside),
    })
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Unit-sphere triangulation: icosahedron subdivided `level` times, all
/// vertices normalized, faces oriented outward.
fn subdivided_icosahedron(level: u32) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw: [[f64; 3]; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut verts: Vec<[f64; 3]> = raw
        .iter()
        .map(|v| {
            let n = norm3(v);
            [v[0] / n, v[1] / n, v[2] / n]
        })
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
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |i: usize, j: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (i.min(j), i.max(j));
            *midpoint.entry(key).or_insert_with(|| {
                let a = verts[i];
                let b = verts[j];
                let mut m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
                let n = norm3(&m);
                for v in &mut m {
                    *v /= n;
                }
                verts.push(m);
                verts.len() - 1
            })
        };
        for f in &faces {
            let ab = mid(f[0], f[1], &mut verts);
            let bc = mid(f[1], f[2], &mut verts);
            let ca = mid(f[2], f[0], &mut verts);
            next.push([f[0], ab, ca]);
            next.push([f[1], bc, ab]);
            next.push([f[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    // enforce outward orientation regardless of the seed table's winding
    for f in &mut faces {
        let c = cross3(&sub3(&verts[f[1]], &verts[f[0]]), &sub3(&verts[f[2]], &verts[f[0]]));
        if dot3(&c, &verts[f[0]]) < 0.0 {
            f.swap(1, 2);
        }
    }
    (verts, faces)
}

/// Solid angle of a spherical triangle on the unit sphere (Van Oosterom).
fn solid_angle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let det = dot3(a, &cross3(b, c));
    let denom = 1.0 + dot3(a, b) + dot3(b, c) + dot3(c, a);
    2.0 * det.atan2(denom)
}

fn icosphere(radius: f64, level: u32) -> BoundaryMesh {
    let (verts, faces) = subdivided_icosahedron(level);
    let mut panels = Vec::with_capacity(faces.len());
    let mut spacing: f64 = 0.0;
    for f in &faces {
        let (a, b, c) = (verts[f[0]], verts[f[1]], verts[f[2]]);
        let omega = solid_angle(&a, &b, &c).abs();
        let mut p = [a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]];
        let n = norm3(&p);
        for v in &mut p {
            *v /= n;
        }
        spacing = spacing
            .max(radius * norm3(&sub3(&b, &a)))
            .max(radius * norm3(&sub3(&c, &b)));
        panels.push(Panel {
            point: vec![radius * p[0], radius * p[1], radius * p[2]],
            normal: p.to_vec(),
            weight: omega * radius * radius,
        });
    }
    BoundaryMesh {
        dim: 3,
        panels,
        spacing,
        descriptor: String::new(),
        inside: None,
    }
}

/// Midpoint product rule on S^{m-1} in hyperspherical angles
/// θ_1..θ_{m-2} ∈ [0,π], θ_{m-1} ∈ [0,2π), with the sin-power measure.
fn hypersphere_product_mesh(dim: u32, radius: f64, level: u32) -> BoundaryMesh {
    let m = dim as usize;
    let n_polar = 6usize << level;
    let n_azim = 2 * n_polar;
    let mut counts = vec![n_polar; m - 2];
    counts.push(n_azim);
    let steps: Vec<f64> = counts
        .iter()
        .enumerate()
        .map(|(i, &n)| if i < m - 2 { std::f64::consts::PI / n as f64 } else { 2.0 * std::f64::consts::PI / n as f64 })
        .collect();
    let mut panels = Vec::new();
    let mut index = vec![0usize; m - 1];
    loop {
        let angles: Vec<f64> = index
            .iter()
            .zip(&steps)
            .map(|(&i, &dt)| (i as f64 + 0.5) * dt)
            .collect();
        let mut point = vec![0.0; m];
        let mut sin_prod = 1.0;
        for j in 0..m - 1 {
            point[j] = radius * sin_prod * angles[j].cos();
            sin_prod *= angles[j].sin();
        }
        point[m - 1] = radius * sin_prod;
        let mut measure = radius.powi(dim as i32 - 1);
        for j in 0..m - 2 {
            measure *= angles[j].sin().powi((m - 2 - j) as i32);
        }
        let weight = measure * steps.iter().product::<f64>();
        let normal: Vec<f64> = point.iter().map(|v| v / radius).collect();
        panels.push(Panel { point, normal, weight });
        // odometer increment
        let mut k = 0;
        loop {
            index[k] += 1;
            if index[k] < counts[k] {
                break;
            }
            index[k] = 0;
            k += 1;
            if k == m - 1 {
                return BoundaryMesh {
                    dim,
                    panels,
                    spacing: radius * std::f64::consts::PI / n_polar as f64,
                    descriptor: String::new(),
                    inside: None,
                };
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Volume grids
// ---------------------------------------------------------------------------

/// Uniform Cartesian grid over the domain's bounding box, keeping cells whose
/// centers pass the inside test; each kept cell has weight h^m.
pub fn grid_domain(domain: &Domain, h: f64) -> Result<VolumeGrid> {
    if h <= 0.0 {
        return Err(Error::InvalidParam("cell size must be positive".into()));
    }
    if h > domain.diameter() {
        return Err(Error::InvalidParam(format!(
            "cell size {h} exceeds domain diameter {}",
            domain.diameter()
        )));
    }
    let m = domain.dim as usize;
    let counts: Vec<usize> = (0..m)
        .map(|i| ((domain.hi[i] - domain.lo[i]) / h).ceil() as usize)
        .collect();
    let weight = h.powi(m as i32);
    let mut cells = Vec::new();
    let mut index = vec![0usize; m];
    'outer: loop {
        let point: Vec<f64> = (0..m)
            .map(|i| domain.lo[i] + (index[i] as f64 + 0.5) * h)
            .collect();
        if (domain.inside)(&point) {
            cells.push(Cell { point, weight });
        }
        let mut k = 0;
        loop {
            index[k] += 1;
            if index[k] < counts[k] {
                break;
            }
            index[k] = 0;
            k += 1;
            if k == m {
                break 'outer;
            }
        }
    }
    Ok(VolumeGrid {
        dim: domain.dim,
        cells,
        h,
        descriptor: format!("{} / h={h}", domain.descriptor),
        inside: Some(domain.inside.clone()),
    })
}

// ---------------------------------------------------------------------------
// Koch prism
// ---------------------------------------------------------------------------

/// Koch-snowflake cross-section (side 1) extruded along x_3 over [0,1],
/// closed with flat caps. Depth 0 is the triangular prism.
#[derive(Clone)]
pub struct FractalDomain {
    pub depth: u32,
    /// Cross-section prefractal polygon, counterclockwise.
    pub polygon: Vec<[f64; 2]>,
    /// Lateral + cap boundary sample cloud with area weights.
    pub mesh: BoundaryMesh,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl FractalDomain {
    pub fn domain(&self) -> Domain {
        let polygon = Arc::new(self.polygon.clone());
        Domain {
            dim: 3,
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            descriptor: format!("koch-prism(depth={})", self.depth),
            inside: Arc::new(move |x: &[f64]| {
                x[2] > 0.0 && x[2] < 1.0 && point_in_polygon(&polygon, x[0], x[1])
            }),
        }
    }

    pub fn cross_section_perimeter(&self) -> f64 {
        let n = self.polygon.len();
        (0..n)
            .map(|i| {
                let a = self.polygon[i];
                let b = self.polygon[(i + 1) % n];
                ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
            })
            .sum()
    }

    /// Sample points of the lateral (extruded prefractal) boundary only.
    pub fn lateral_points(&self) -> Vec<Vec<f64>> {
        self.mesh
            .panels
            .iter()
            .filter(|p| p.normal[2] == 0.0)
            .map(|p| p.point.clone())
            .collect()
    }
}

impl std::fmt::Debug for FractalDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FractalDomain")
            .field("depth", &self.depth)
            .field("polygon_vertices", &self.polygon.len())
            .field("boundary_samples", &self.mesh.panels.len())
            .finish()
    }
}

/// Even-odd ray casting along +x.
fn point_in_polygon(poly: &[[f64; 2]], x: f64, y: f64) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (poly[i][0], poly[i][1]);
        let (xj, yj) = (poly[j][0], poly[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn koch_refine(poly: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(4 * n);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let d = [(b[0] - a[0]) / 3.0, (b[1] - a[1]) / 3.0];
        let p1 = [a[0] + d[0], a[1] + d[1]];
        let p3 = [a[0] + 2.0 * d[0], a[1] + 2.0 * d[1]];
        // bump on the right of travel = outward for a counterclockwise polygon
        let (c, s) = (0.5, -(3f64.sqrt()) / 2.0);
        let p2 = [p1[0] + c * d[0] - s * d[1], p1[1] + s * d[0] + c * d[1]];
        out.push(a);
        out.push(p1);
        out.push(p2);
        out.push(p3);
    }
    out
}

pub fn build_koch_prism(depth: u32) -> Result<FractalDomain> {
    if depth > 6 {
        return Err(Error::InvalidParam(
            "koch prism depth capped at 6 (sample count grows as 4^depth)".into(),
        ));
    }
    let h = 3f64.sqrt() / 2.0;
    let mut polygon: Vec<[f64; 2]> = vec![[0.0, 0.0], [1.0, 0.0], [0.5, h]];
    for _ in 0..depth {
        polygon = koch_refine(&polygon);
    }

    // in-edge sample spacing: a third of the edge length (so covering counts
    // at the edge scale see the full polygon, not just midpoints), floored at
    // 1/27 for shallow prefractals; height sampling matches, capped by a
    // total sample budget
    let edge = 3f64.powi(-(depth as i32));
    let s0 = (edge / 3.0).min(1.0 / 27.0);
    let sub_edge = (edge / s0).round().max(1.0) as usize;
    let n_edges = polygon.len();
    let budget = 300_000usize;
    let n_height = ((1.0 / s0).round() as usize)
        .min((budget / (n_edges * sub_edge)).max(1))
        .max(1);
    let target = s0.max(1.0 / n_height as f64);

    let mut panels = Vec::new();
    let n = polygon.len();
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let nrm = [d[1] / len, -d[0] / len]; // outward for CCW
        let piece = len / sub_edge as f64;
        for s in 0..sub_edge {
            let t = (s as f64 + 0.5) / sub_edge as f64;
            let px = a[0] + t * d[0];
            let py = a[1] + t * d[1];
            for k in 0..n_height {
                let z = (k as f64 + 0.5) / n_height as f64;
                panels.push(Panel {
                    point: vec![px, py, z],
                    normal: vec![nrm[0], nrm[1], 0.0],
                    weight: piece / n_height as f64,
                });
            }
        }
    }

    // flat caps at z = 0 and z = 1, sampled on a grid clipped by the polygon
    let (mut lo2, mut hi2) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in &polygon {
        for i in 0..2 {
            lo2[i] = lo2[i].min(p[i]);
            hi2[i] = hi2[i].max(p[i]);
        }
    }
    let g = target;
    let nx = ((hi2[0] - lo2[0]) / g).ceil() as usize;
    let ny = ((hi2[1] - lo2[1]) / g).ceil() as usize;
    for iy in 0..ny {
        for ix in 0..nx {
            let x = lo2[0] + (ix as f64 + 0.5) * g;
            let y = lo2[1] + (iy as f64 + 0.5) * g;
            if point_in_polygon(&polygon, x, y) {
                for (z, nz) in [(0.0, -1.0), (1.0, 1.0)] {
                    panels.push(Panel {
                        point: vec![x, y, z],
                        normal: vec![0.0, 0.0, nz],
                        weight: g * g,
                    });
                }
            }
        }
    }

    let polygon_arc = Arc::new(polygon.clone());
    let mesh = BoundaryMesh {
        dim: 3,
        panels,
        spacing: target,
        descriptor: format!("koch-prism-boundary(depth={depth})"),
        inside: Some(Arc::new(move |x: &[f64]| {
            x[2] > 0.0 && x[2] < 1.0 && point_in_polygon(&polygon_arc, x[0], x[1])
        })),
    };
    Ok(FractalDomain {
        depth,
        polygon,
        mesh,
        lo: vec![lo2[0], lo2[1], 0.0],
        hi: vec![hi2[0], hi2[1], 1.0],
    })
}

// ---------------------------------------------------------------------------
// Box-counting d-summability
// ---------------------------------------------------------------------------

/// Box-counting estimate of the upper Minkowski dimension of a sample cloud,
/// with a Riemann-sum surrogate for the d-summability integral
/// ∫₀¹ N(τ) τ^{d−1} dτ.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DSummabilityReport {
    /// Radii, descending.
    pub taus: Vec<f64>,
    /// Covering counts N(τ), averaged over grid offsets.
    pub counts: Vec<f64>,
    /// Slope s of the fit N(τ) ≈ A·τ^{-s}·(1 + b·τ) over the scaling window.
    pub slope: f64,
    /// Fitted finite-size coefficient b (the "rind" of partially filled
    /// boxes at scales comparable to the cloud's extent).
    pub rind: f64,
    /// Number of (τ, N) pairs inside the fit window.
    pub fit_points: usize,
}

impl DSummabilityReport {
    /// Empirical verdict: the boundary is d-summable when d exceeds the
    /// estimated box-count slope.
    pub fn summable(&self, d: f64) -> bool {
        d > self.slope
    }

    /// Riemann-sum surrogate of ∫₀¹ N(τ) τ^{d−1} dτ on the sampled radii.
    pub fn riemann_sum(&self, d: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.taus.len() {
            let upper = if i == 0 { 1.0f64.min(2.0 * self.taus[0]) } else { self.taus[i - 1] };
            let dt = upper - self.taus[i];
            if dt > 0.0 {
                total += self.counts[i] * self.taus[i].powf(d - 1.0) * dt;
            }
        }
        total
    }
}

/// Count occupied boxes of edge `tau`, averaged over a few fixed grid
/// offsets to smooth alignment artifacts.
fn box_count(points: &[Vec<f64>], tau: f64) -> f64 {
    const OFFSETS: [[f64; 3]; 5] = [
        [0.0, 0.0, 0.0],
        [0.25, 0.5, 0.75],
        [0.5, 0.25, 0.5],
        [0.75, 0.75, 0.25],
        [0.37, 0.11, 0.63],
    ];
    let mut total = 0usize;
    for off in &OFFSETS {
        let mut occupied: HashSet<Vec<i64>> = HashSet::new();
        for p in points {
            occupied.insert(
                p.iter()
                    .enumerate()
                    .map(|(i, &v)| ((v + off[i % 3] * tau) / tau).floor() as i64)
                    .collect(),
            );
        }
        total += occupied.len();
    }
    total as f64 / OFFSETS.len() as f64
}

/// Box-counting slope of a boundary sample cloud over the given radii.
///
/// The fit ignores saturated scales: boxes so large that fewer than 8 remain,
/// and boxes so small that the count stops growing (τ below sample spacing).
pub fn estimate_d_summability(points: &[Vec<f64>], tau_grid: &[f64]) -> Result<DSummabilityReport> {
    if points.len() < 16 {
        return Err(Error::Precondition(format!(
            "too few boundary samples ({}) for covering counts",
            points.len()
        )));
    }
    let mut taus: Vec<f64> = tau_grid.to_vec();
    if taus.iter().any(|&t| t <= 0.0) {
        return Err(Error::InvalidParam("radii must be positive".into()));
    }
    taus.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let span = taus.first().unwrap() / taus.last().unwrap();
    if span < 99.0 {
        return Err(Error::Precondition(format!(
            "radius grid must span at least two decades (got ratio {span:.1})"
        )));
    }
    let counts: Vec<f64> = taus.iter().map(|&t| box_count(points, t)).collect();
    // scaling window: enough boxes to matter, not yet saturated by the
    // finite sample count
    let saturation = points.len() as f64 / 4.0;
    let mut win_t = Vec::new();
    let mut win_n = Vec::new();
    for (&t, &n) in taus.iter().zip(&counts) {
        if n >= 32.0 && n <= saturation {
            win_t.push(t);
            win_n.push(n);
        }
    }
    if win_t.len() < 3 {
        return Err(Error::Precondition(
            "fewer than 3 radii in the scaling window; refine the sample cloud or widen the grid"
                .into(),
        ));
    }
    // fit N(τ) = A·τ^{-s}·(1 + b·τ): the (1 + b·τ) factor absorbs the rind
    // of partially filled boxes at scales near the cloud extent, which would
    // otherwise deflate the slope on short scaling ranges. b is scanned on a
    // grid; for each b the remaining fit is linear in log-log.
    let xs: Vec<f64> = win_t.iter().map(|&t| (1.0 / t).ln()).collect();
    let mut best = (f64::MAX, 0.0, 0.0);
    for bi in 0..=60 {
        let b = bi as f64 * 0.05;
        let ys: Vec<f64> = win_t
            .iter()
            .zip(&win_n)
            .map(|(&t, &n)| n.ln() - (1.0 + b * t).ln())
            .collect();
        let s = least_squares_slope(&xs, &ys);
        let n = xs.len() as f64;
        let a = ys.iter().sum::<f64>() / n - s * xs.iter().sum::<f64>() / n;
        let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a - s * x).powi(2)).sum();
        if sse < best.0 {
            best = (sse, s, b);
        }
    }
    Ok(DSummabilityReport {
        taus,
        counts,
        slope: best.1,
        rind: best.2,
        fit_points: xs.len(),
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Log-spaced radii from `hi` down to `lo`.
pub fn log_tau_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (hi.ln(), lo.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

// ---------------------------------------------------------------------------
// Marcinkiewicz exponent
// ---------------------------------------------------------------------------

/// Dyadic distance stratum around the boundary: measure of
/// {x ∈ B(x0,r) ∩ side : dist(x,∂Ω) ∈ (r·2^{-k-1}, r·2^{-k}]}.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Stratum {
    pub k: u32,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

/// Growth diagnostics for one exponent p: partial Riemann sums of
/// ∫ dist^{-p} with dyadic cutoffs, per side.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PLadderRow {
    pub p: f64,
    pub sums_plus: Vec<f64>,
    pub sums_minus: Vec<f64>,
    pub bounded_plus: bool,
    pub bounded_minus: bool,
}

/// Local Marcinkiewicz-exponent estimate at a boundary point.
///
/// The headline numbers `m_plus`/`m_minus` come from the decay rate of the
/// dyadic strata measures (μ_k ∝ 2^{-k·t} makes ∫ dist^{-p} finite exactly
/// for p < t); the p-ladder table gives the direct integral diagnostics.
/// Strata measures are corrected for the spherical cross-section profile of
/// the sampling ball, which would otherwise bias the deepest stratum.
#[derive(Clone, Debug, serde::Serialize)]
pub struct MarcinkiewiczReport {
    pub x0: Vec<f64>,
    pub r: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub strata: Vec<Stratum>,
    pub p_ladder: Vec<PLadderRow>,
    /// Nearest-neighbor spacing of the boundary cloud near x0; distance
    /// values are only trusted above this.
    pub boundary_spacing: f64,
}

impl MarcinkiewiczReport {
    /// Contribution of this base point to m*(∂Ω) = inf over x0 of max(m⁺, m⁻).
    pub fn m_star_contribution(&self) -> f64 {
        self.m_plus.max(self.m_minus)
    }
}

/// Aggregate m*(∂Ω) over sampled base points.
pub fn marcinkiewicz_star(reports: &[MarcinkiewiczReport]) -> f64 {
    reports
        .iter()
        .map(|r| r.m_star_contribution())
        .fold(f64::INFINITY, f64::min)
}

/// Uniform spatial hash for nearest-boundary-sample distances.
struct PointHash {
    cell: f64,
    map: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<Vec<f64>>,
}

impl PointHash {
    fn new(points: Vec<Vec<f64>>, cell: f64) -> Self {
        let mut map: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let key: Vec<i64> = p.iter().map(|&v| (v / cell).floor() as i64).collect();
            map.entry(key).or_default().push(i);
        }
        PointHash { cell, map, points }
    }

    /// Distance to the nearest stored point. Searches expanding Chebyshev
    /// rings; exact once the proven lower bound of the next ring exceeds the
    /// best distance found.
    fn nearest_dist(&self, x: &[f64]) -> f64 {
        let m = x.len();
        let base: Vec<i64> = x.iter().map(|&v| (v / self.cell).floor() as i64).collect();
        let mut best = f64::INFINITY;
        let mut ring = 0i64;
        loop {
            let lower = (ring - 1).max(0) as f64 * self.cell;
            if best <= lower {
                return best;
            }
            let mut key = vec![0i64; m];
            let mut found_any = false;
            visit_ring(&base, ring, 0, &mut key, &mut |k| {
                if let Some(ids) = self.map.get(k) {
                    found_any = true;
                    for &i in ids {
                        let d = dist(&self.points[i], x);
                        if d < best {
                            best = d;
                        }
                    }
                }
            });
            let _ = found_any;
            ring += 1;
            if ring > 1_000 {
                return best; // cloud far away; caller treats as "no boundary near"
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Visit all integer keys at Chebyshev distance exactly `ring` from `base`.
fn visit_ring(base: &[i64], ring: i64, axis: usize, key: &mut Vec<i64>, f: &mut impl FnMut(&Vec<i64>)) {
    if axis == base.len() {
        if key.iter().zip(base).map(|(k, b)| (k - b).abs()).max().unwrap_or(0) == ring {
            f(key);
        }
        return;
    }
    for d in -ring..=ring {
        key[axis] = base[axis] + d;
        visit_ring(base, ring, axis + 1, key, f);
    }
}

/// Estimate the local Marcinkiewicz exponents at boundary point `x0`.
///
/// Grid-samples the ball B(x0, r), splits samples by the domain's inside
/// test, measures dyadic distance strata against the boundary cloud, and
/// fits the stratum decay rate per side. `p_grid` drives the direct
/// integral ladder reported alongside.
pub fn estimate_marcinkiewicz(
    domain: &Domain,
    boundary: &[Vec<f64>],
    x0: &[f64],
    p_grid: &[f64],
    r: f64,
) -> Result<MarcinkiewiczReport> {
    let m = domain.dim as usize;
    if x0.len() != m {
        return Err(Error::DimMismatch {
            left: x0.len() as u32,
            right: domain.dim,
        });
    }
    if r <= 0.0 {
        return Err(Error::InvalidParam("radius must be positive".into()));
    }
    if boundary.is_empty() {
        return Err(Error::Precondition("empty boundary cloud".into()));
    }
    // keep only boundary samples that can matter for distances inside B(x0, r)
    let near: Vec<Vec<f64>> = boundary
        .iter()
        .filter(|p| dist(p, x0) < 1.5 * r)
        .cloned()
        .collect();
    if near.is_empty() {
        return Err(Error::Precondition(
            "x0 is not near the boundary cloud".into(),
        ));
    }
    // local sample spacing: median nearest-neighbor gap on a subset
    let hash = PointHash::new(near.clone(), r / 3.0);
    let mut gaps: Vec<f64> = near
        .iter()
        .step_by((near.len() / 64).max(1))
        .map(|p| {
            near.iter()
                .map(|q| dist(p, q))
                .filter(|&d| d > 0.0)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let boundary_spacing = gaps[gaps.len() / 2];
    let d0 = near.iter().map(|p| dist(p, x0)).fold(f64::INFINITY, f64::min);
    if d0 > (0.05 * r).max(2.0 * boundary_spacing) {
        return Err(Error::Precondition(format!(
            "x0 is {d0:.3e} from the nearest boundary sample (radius {r:.3e}); pick a boundary point"
        )));
    }

    const K_MAX: u32 = 3; // strata k = 1..=3, widths r/4 down to r/16
    let g = r / 48.0;
    let cell_w = g.powi(m as i32);
    let counts_per_axis = (2.0 * r / g).ceil() as usize;

    let mut mu = vec![[0.0f64; 2]; (K_MAX + 1) as usize];
    let deltas: Vec<f64> = (1..=4).map(|c| r * 0.5f64.powi(c)).collect(); // cutoff ladder
    let mut sums = vec![vec![[0.0f64; 2]; deltas.len()]; p_grid.len()];

    let mut index = vec![0usize; m];
    'outer: loop {
        let x: Vec<f64> = (0..m)
            .map(|i| x0[i] - r + (index[i] as f64 + 0.5) * g)
            .collect();
        let rho = dist(&x, x0);
        if rho < r {
            let side = if (domain.inside)(&x) { 0 } else { 1 };
            // the nearest sample sits up to ~spacing/2 sideways from the true
            // foot point, so the raw nearest-sample distance overestimates
            // dist(x, ∂Ω); remove that quantization in quadrature
            let d_raw = hash.nearest_dist(&x);
            let d = (d_raw * d_raw - 0.25 * boundary_spacing * boundary_spacing)
                .max(0.0)
                .sqrt();
            if d > 0.0 {
                // stratum index: d in (r 2^{-k-1}, r 2^{-k}]
                let kf = (r / d).log2().ceil() - 1.0;
                if kf >= 1.0 && kf <= K_MAX as f64 {
                    // flat-boundary profile of the sampling ball: the slab at
                    // depth t meets B(x0,r) in a cross-section of relative
                    // measure (1 - (t/r)^2)^{(m-1)/2}; divide it out so deep
                    // strata are comparable to shallow ones
                    let corr = (1.0 - (d / r) * (d / r)).max(1e-12).powf((m as f64 - 1.0) / 2.0);
                    mu[kf as usize][side] += cell_w / corr;
                }
                for (pi, &p) in p_grid.iter().enumerate() {
                    let val = d.powf(-p) * cell_w;
                    for (ci, &dc) in deltas.iter().enumerate() {
                        if d > dc {
                            sums[pi][ci][side] += val;
                        }
                    }
                }
            }
        }
        let mut k = 0;
        loop {
            index[k] += 1;
            if index[k] < counts_per_axis {
                break;
            }
            index[k] = 0;
            k += 1;
            if k == m {
                break 'outer;
            }
        }
    }

    let strata: Vec<Stratum> = (1..=K_MAX)
        .map(|k| Stratum {
            k,
            mu_plus: mu[k as usize][0],
            mu_minus: mu[k as usize][1],
        })
        .collect();
    let fit_side = |side: usize| -> Result<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 1..=K_MAX {
            let v = mu[k as usize][side];
            if v > 0.0 {
                xs.push(k as f64);
                ys.push(v.log2());
            }
        }
        if xs.len() < 2 {
            return Err(Error::Precondition(format!(
                "degenerate side {} of the boundary at x0 (empty strata)",
                if side == 0 { "Ω⁺" } else { "Ω⁻" }
            )));
        }
        Ok(-least_squares_slope(&xs, &ys))
    };
    let m_plus = fit_side(0)?;
    let m_minus = fit_side(1)?;

    let p_ladder: Vec<PLadderRow> = p_grid
        .iter()
        .enumerate()
        .map(|(pi, &p)| {
            let col = |side: usize| -> Vec<f64> { sums[pi].iter().map(|s| s[side]).collect() };
            let bounded = |s: &[f64]| {
                let n = s.len();
                let last = s[n - 1] - s[n - 2];
                let prev = s[n - 2] - s[n - 3];
                last <= prev.max(1e-300)
            };
            let sp = col(0);
            let sm = col(1);
            PLadderRow {
                p,
                bounded_plus: bounded(&sp),
                bounded_minus: bounded(&sm),
                sums_plus: sp,
                sums_minus: sm,
            }
        })
        .collect();

    Ok(MarcinkiewiczReport {
        x0: x0.to_vec(),
        r,
        m_plus,
        m_minus,
        strata,
        p_ladder,
        boundary_spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn sphere_mesh_area_and_normals() {
        let mesh = mesh_sphere(3, 1.0, 4).unwrap();
        assert_eq!(mesh.panels.len(), 20 * 4usize.pow(4));
        let area = mesh.total_area();
        assert!((area - 4.0 * PI).abs() / (4.0 * PI) < 5e-3, "area = {area}");
        for p in &mesh.panels {
            let nn: f64 = p.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((nn - 1.0).abs() < 1e-12);
            for i in 0..3 {
                assert!((p.point[i] - p.normal[i]).abs() < 1e-12);
            }
            assert!(p.weight > 0.0);
        }
        // refinement quadruples the panel count
        let coarse = mesh_sphere(3, 1.0, 3).unwrap();
        assert_eq!(mesh.panels.len(), 4 * coarse.panels.len());
    }

    #[test]
    fn mesh_area_errors_converge() {
        // sphere weights are exact solid angles at every level
        let mesh = mesh_sphere(3, 2.0, 2).unwrap();
        assert!((mesh.total_area() - 16.0 * PI).abs() < 1e-10);
        // flat-facet ellipsoid areas converge monotonically (round case has a
        // known area to compare against)
        let mut prev = f64::INFINITY;
        for level in 1..=4 {
            let mesh = mesh_ellipsoid(&[1.0, 1.0, 1.0], level).unwrap();
            let err = (mesh.total_area() - 4.0 * PI).abs();
            assert!(err < prev, "level {level}: {err} !< {prev}");
            prev = err;
        }
    }

    #[test]
    fn sphere_mesh_m4_area() {
        let mesh = mesh_sphere(4, 1.0, 1).unwrap();
        // |S^3| = 2π²
        let area = mesh.total_area();
        assert!((area - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 5e-3, "area = {area}");
    }

    #[test]
    fn convex_meshes_are_outward_oriented() {
        for mesh in [
            mesh_sphere(3, 1.5, 2).unwrap(),
            mesh_ellipsoid(&[1.0, 2.0, 0.5], 2).unwrap(),
        ] {
            let n = mesh.panels.len() as f64;
            let mut centroid = vec![0.0; 3];
            for p in &mesh.panels {
                for i in 0..3 {
                    centroid[i] += p.point[i] / n;
                }
            }
            for p in &mesh.panels {
                let dot: f64 = (0..3).map(|i| (p.point[i] - centroid[i]) * p.normal[i]).sum();
                assert!(dot > 0.0);
            }
        }
    }

    #[test]
    fn ellipsoid_mesh_matches_sphere_when_round() {
        let e = mesh_ellipsoid(&[1.0, 1.0, 1.0], 3).unwrap();
        let area = e.total_area();
        assert!((area - 4.0 * PI).abs() / (4.0 * PI) < 1e-2, "area = {area}");
    }

    #[test]
    fn rejects_bad_mesh_parameters() {
        assert!(mesh_sphere(3, 0.0, 2).is_err());
        assert!(mesh_sphere(2, 1.0, 2).is_err());
        assert!(mesh_ellipsoid(&[1.0, -1.0, 1.0], 2).is_err());
    }

    #[test]
    fn ball_grid_volume() {
        let ball = Domain::ball(3, 1.0).unwrap();
        let grid = grid_domain(&ball, 0.05).unwrap();
        let vol = grid.total_volume();
        let exact = 4.0 * PI / 3.0;
        assert!((vol - exact).abs() / exact < 1e-2, "vol = {vol}");
        // halving h roughly octuples the cell count
        let fine = grid_domain(&ball, 0.025).unwrap();
        let ratio = fine.cells.len() as f64 / grid.cells.len() as f64;
        assert!((ratio - 8.0).abs() < 0.5, "ratio = {ratio}");
    }

    #[test]
    fn empty_domain_gives_empty_grid() {
        let empty = Domain {
            dim: 3,
            lo: vec![0.0; 3],
            hi: vec![1.0; 3],
            descriptor: "empty".into(),
            inside: Arc::new(|_| false),
        };
        let grid = grid_domain(&empty, 0.25).unwrap();
        assert!(grid.cells.is_empty());
        assert!(grid_domain(&empty, 10.0).is_err());
    }

    #[test]
    fn koch_prism_perimeter_recursion() {
        for depth in 0..=4 {
            let prism = build_koch_prism(depth).unwrap();
            let expect = 3.0 * (4f64 / 3.0).powi(depth as i32);
            let got = prism.cross_section_perimeter();
            assert!((got - expect).abs() < 1e-10, "depth {depth}: {got} vs {expect}");
            assert_eq!(prism.polygon.len(), 3 * 4usize.pow(depth));
        }
        assert!(build_koch_prism(7).is_err());
    }

    #[test]
    fn koch_prism_inside_test() {
        let prism = build_koch_prism(2).unwrap();
        let dom = prism.domain();
        assert!((dom.inside)(&[0.5, 0.3, 0.5]));
        assert!(!(dom.inside)(&[0.5, 0.3, 1.5]));
        assert!(!(dom.inside)(&[5.0, 0.3, 0.5]));
        // lateral weights sum to perimeter × height
        let lateral: f64 = prism
            .mesh
            .panels
            .iter()
            .filter(|p| p.normal[2] == 0.0)
            .map(|p| p.weight)
            .sum();
        assert!((lateral - prism.cross_section_perimeter()).abs() < 1e-10);
    }

    #[test]
    fn koch_lateral_box_count_slope() {
        let prism = build_koch_prism(4).unwrap();
        let pts = prism.lateral_points();
        let taus = log_tau_grid(0.0123, 1.3, 16);
        let rep = estimate_d_summability(&pts, &taus).unwrap();
        let expect = 1.0 + 4f64.ln() / 3f64.ln();
        assert!(
            (rep.slope - expect).abs() < 0.1,
            "slope = {}, expect {expect}",
            rep.slope
        );
        assert!(rep.summable(expect + 0.2));
        assert!(!rep.summable(expect - 0.2));
    }

    #[test]
    fn smooth_surfaces_have_slope_two() {
        let sphere = mesh_sphere(3, 1.0, 5).unwrap();
        let taus = log_tau_grid(0.03, 3.0, 14);
        let rep = estimate_d_summability(&sphere.points(), &taus).unwrap();
        assert!((rep.slope - 2.0).abs() < 0.1, "sphere slope = {}", rep.slope);

        // planar square patch in R^3
        let mut patch = Vec::new();
        let n = 160;
        for i in 0..n {
            for j in 0..n {
                patch.push(vec![i as f64 / n as f64, j as f64 / n as f64, 0.25]);
            }
        }
        let taus = log_tau_grid(0.012, 1.3, 14);
        let rep = estimate_d_summability(&patch, &taus).unwrap();
        assert!((rep.slope - 2.0).abs() < 0.1, "patch slope = {}", rep.slope);
    }

    #[test]
    fn box_counts_monotone_and_riemann_sum_behaves() {
        let sphere = mesh_sphere(3, 1.0, 4).unwrap();
        let taus = log_tau_grid(0.03, 3.0, 12);
        let rep = estimate_d_summability(&sphere.points(), &taus).unwrap();
        for w in rep.counts.windows(2) {
            assert!(w[1] >= w[0], "N(τ) must grow as τ shrinks");
        }
        // larger d damps the integrand near 0, so the surrogate shrinks
        assert!(rep.riemann_sum(2.9) < rep.riemann_sum(2.2));
    }

    #[test]
    fn d_summability_preconditions() {
        let pts = vec![vec![0.0; 3]; 4];
        assert!(estimate_d_summability(&pts, &log_tau_grid(0.01, 2.0, 10)).is_err());
        let sphere = mesh_sphere(3, 1.0, 3).unwrap();
        // grid spanning less than two decades is refused
        assert!(estimate_d_summability(&sphere.points(), &log_tau_grid(0.5, 1.0, 10)).is_err());
    }

    #[test]
    fn marcinkiewicz_smooth_boundary_is_one() {
        let sphere = mesh_sphere(3, 1.0, 6).unwrap();
        let ball = Domain::ball(3, 1.0).unwrap();
        let rep = estimate_marcinkiewicz(
            &ball,
            &sphere.points(),
            &[1.0, 0.0, 0.0],
            &[0.5, 0.9, 1.1],
            0.125,
        )
        .unwrap();
        assert!((rep.m_plus - 1.0).abs() < 0.1, "m+ = {}", rep.m_plus);
        assert!((rep.m_minus - 1.0).abs() < 0.1, "m- = {}", rep.m_minus);
        assert!((rep.m_star_contribution() - 1.0).abs() < 0.1);
        // direct integral ladder: p = 0.5 clearly bounded on both sides
        let row = &rep.p_ladder[0];
        assert!(row.bounded_plus && row.bounded_minus);
    }

    #[test]
    fn marcinkiewicz_rejects_off_boundary_base_point() {
        let sphere = mesh_sphere(3, 1.0, 3).unwrap();
        let ball = Domain::ball(3, 1.0).unwrap();
        let err = estimate_marcinkiewicz(&ball, &sphere.points(), &[0.0, 0.0, 0.0], &[0.9], 0.4);
        assert!(err.is_err());
    }

    #[test]
    fn mesh_and_grid_jsonl_round_trip() {
        let mesh = mesh_sphere(3, 1.0, 1).unwrap();
        let mut buf = Vec::new();
        mesh.write_jsonl(&mut buf).unwrap();
        let back = BoundaryMesh::read_jsonl(std::io::BufReader::new(&buf[..]), "sphere").unwrap();
        assert_eq!(back.panels.len(), mesh.panels.len());
        assert!((back.total_area() - mesh.total_area()).abs() < 1e-12);

        let grid = grid_domain(&Domain::ball(3, 1.0).unwrap(), 0.2).unwrap();
        let mut buf = Vec::new();
        grid.write_jsonl(&mut buf).unwrap();
        let back = VolumeGrid::read_jsonl(std::io::BufReader::new(&buf[..]), 0.2, "ball").unwrap();
        assert!((back.total_volume() - grid.total_volume()).abs() < 1e-12);
    }
}
