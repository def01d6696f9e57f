//! Static SVG diagrams: spherical polygons with their lights, planar
//! polygons with their normal fans, and circle patterns on `S^2`.

use std::fmt::Write;

use illumination_core::io::CirclesFile;
use illumination_core::koebe::CircleOnSphere;
use illumination_core::planar;
use illumination_core::{DirectionSet, EuclideanPolytope, IlluminationWitness, SphericalPolytope};
use nalgebra::{Vector2, Vector3};

use crate::output::invalid;

const SIZE: f64 = 400.0;
const RADIUS: f64 = 180.0;
const COLORS: [&str; 4] = ["#d62728", "#2ca02c", "#1f77b4", "#9467bd"];

struct Svg {
    body: String,
}

impl Svg {
    fn new(width: f64, seed: u64, title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{SIZE}" viewBox="0 0 {width} {SIZE}">"#
        );
        let _ = writeln!(body, "<!-- illum: {title}, seed {seed} -->");
        let _ = writeln!(body, r#"<rect width="{width}" height="{SIZE}" fill="white"/>"#);
        Self { body }
    }

    fn polyline(&mut self, pts: &[Vector2<f64>], style: &str) {
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", p.x, p.y)).collect();
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
    }

    fn polygon(&mut self, pts: &[Vector2<f64>], style: &str) {
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", p.x, p.y)).collect();
        let _ = writeln!(self.body, r#"<polygon points="{}" {style}/>"#, coords.join(" "));
    }

    fn circle(&mut self, c: Vector2<f64>, r: f64, style: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{:.2}" cy="{:.2}" r="{r:.2}" {style}/>"#, c.x, c.y);
    }

    fn line(&mut self, a: Vector2<f64>, b: Vector2<f64>, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#,
            a.x, a.y, b.x, b.y
        );
    }

    fn text(&mut self, at: Vector2<f64>, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif">{s}</text>"#, at.x, at.y);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

/// Disk coordinates `(x, y) ∈ [-1, 1]^2` to canvas coordinates, centered at
/// `cx`.
fn canvas(p: Vector2<f64>, cx: f64) -> Vector2<f64> {
    Vector2::new(cx + RADIUS * p.x, SIZE / 2.0 - RADIUS * p.y)
}

fn frame(h: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let k = h.iamin();
    let e = Vector3::ith(k, 1.0);
    let u = (e - h * h.dot(&e)).normalize();
    (u, h.cross(&u))
}

fn to3(v: &[f64]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

/// Orthographic view of an `S^2` polygon from the witness normal (or the
/// body's center): the greatsphere is the rim of the disk and the lights
/// sit on it.
pub fn spherical_svg(p: &SphericalPolytope, w: Option<&IlluminationWitness>, seed: u64) -> anyhow::Result<String> {
    if p.dim() != 2 {
        return Err(invalid("spherical diagrams need a polygon on S^2"));
    }
    let h = to3(&w.map_or_else(|| p.center().to_vec(), |w| w.normal.to_vec()));
    let (u, v) = frame(&h);
    let view = |x: &Vector3<f64>| canvas(Vector2::new(x.dot(&u), x.dot(&v)), SIZE / 2.0);
    let verts: Vec<Vector3<f64>> = p.vertices().iter().map(|x| to3(&x.to_vec())).collect();

    let mut svg = Svg::new(SIZE, seed, "spherical polygon");
    svg.circle(canvas(Vector2::zeros(), SIZE / 2.0), RADIUS, r##"fill="#f4f4f4" stroke="#444" stroke-dasharray="6 4""##);
    let mut boundary = Vec::new();
    let cycle = polygon_cycle(&verts, &h, &u, &v);
    for k in 0..cycle.len() {
        let (a, b) = (verts[cycle[k]], verts[cycle[(k + 1) % cycle.len()]]);
        for s in 0..32 {
            let t = s as f64 / 32.0;
            boundary.push(view(&(a * (1.0 - t) + b * t).normalize()));
        }
    }
    svg.polygon(&boundary, r##"fill="#c6dbef" stroke="#08519c" stroke-width="2""##);
    for (i, x) in verts.iter().enumerate() {
        let at = view(x);
        svg.circle(at, 3.5, r#"fill="black""#);
        svg.text(at + Vector2::new(5.0, -5.0), &format!("v{i}"));
    }
    if let Some(w) = w {
        for (i, l) in w.lights.iter().enumerate() {
            let at = view(&to3(&l.to_vec()));
            svg.circle(at, 6.0, &format!(r#"fill="{}" stroke="black""#, COLORS[i % COLORS.len()]));
            svg.text(at + Vector2::new(8.0, 4.0), &format!("L{i}"));
        }
    }
    Ok(svg.finish())
}

/// Vertex order around the polygon, counterclockwise in the view.
fn polygon_cycle(verts: &[Vector3<f64>], h: &Vector3<f64>, u: &Vector3<f64>, v: &Vector3<f64>) -> Vec<usize> {
    let pts: Vec<Vector2<f64>> = verts
        .iter()
        .map(|x| {
            let s = x.dot(h).max(1e-12);
            Vector2::new(x.dot(u) / s, x.dot(v) / s)
        })
        .collect();
    planar::order_ccw(&pts)
}

/// A planar polygon on the left and its normal fan on the right, with the
/// directions overlaid on both.
pub fn polygon_svg(p: &EuclideanPolytope, dirs: Option<&DirectionSet>, seed: u64) -> anyhow::Result<String> {
    if p.dim() != 2 {
        return Err(invalid("polygon diagrams need d = 2"));
    }
    let pts: Vec<Vector2<f64>> = p.vertices().iter().map(|x| Vector2::new(x[0], x[1])).collect();
    let order = planar::order_ccw(&pts);
    let polygon: Vec<Vector2<f64>> = order.iter().map(|&i| pts[i]).collect();
    let c = polygon.iter().sum::<Vector2<f64>>() / polygon.len() as f64;
    let extent = polygon.iter().map(|x| (x - c).amax()).fold(f64::MIN_POSITIVE, f64::max);
    let left = |x: &Vector2<f64>| canvas((x - c) / extent * 0.9, SIZE / 2.0);

    let mut svg = Svg::new(2.0 * SIZE, seed, "polygon and normal fan");
    svg.polygon(&polygon.iter().map(left).collect::<Vec<_>>(), r##"fill="#c6dbef" stroke="#08519c" stroke-width="2""##);
    for (k, &i) in order.iter().enumerate() {
        let at = left(&polygon[k]);
        svg.circle(at, 3.5, r#"fill="black""#);
        svg.text(at + Vector2::new(5.0, -5.0), &format!("v{i}"));
    }

    let fan = |x: Vector2<f64>| canvas(x, 1.5 * SIZE);
    svg.circle(fan(Vector2::zeros()), RADIUS, r##"fill="none" stroke="#999""##);
    for n in planar::edge_normals(&polygon) {
        svg.line(fan(Vector2::zeros()), fan(n), r##"stroke="#08519c" stroke-width="1.5""##);
    }
    if let Some(dirs) = dirs {
        for (i, d) in dirs.vectors().iter().enumerate() {
            let d = Vector2::new(d[0], d[1]);
            let style = format!(r#"stroke="{}" stroke-width="3""#, COLORS[i % COLORS.len()]);
            svg.line(fan(Vector2::zeros()), fan(d * 0.8), &style);
            svg.text(fan(d * 0.85), &format!("u{i}"));
            let from = left(&(c - d * extent * 0.8));
            svg.line(from, left(&(c - d * extent * 0.4)), &style);
        }
    }
    Ok(svg.finish())
}

/// Orthographic view from `+z` of face circles (blue) and vertex circles
/// (red); arcs on the far hemisphere are dashed.
pub fn circles_svg(circles: &CirclesFile, seed: u64) -> String {
    let mut svg = Svg::new(SIZE, seed, "circle pattern");
    svg.circle(canvas(Vector2::zeros(), SIZE / 2.0), RADIUS, r##"fill="#fafafa" stroke="#444""##);
    for (family, color) in [(&circles.face_circles, "#1f77b4"), (&circles.vertex_circles, "#d62728")] {
        for c in family.iter() {
            draw_circle(&mut svg, c, color);
        }
    }
    svg.finish()
}

fn draw_circle(svg: &mut Svg, c: &CircleOnSphere, color: &str) {
    let (u, v) = frame(&c.normal);
    let r = (1.0 - c.offset * c.offset).max(0.0).sqrt();
    let samples: Vec<Vector3<f64>> = (0..=120)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 120.0;
            c.normal * c.offset + (u * t.cos() + v * t.sin()) * r
        })
        .collect();
    let mut run: Vec<Vector2<f64>> = Vec::new();
    let mut front = samples[0].z >= 0.0;
    let flush = |svg: &mut Svg, run: &mut Vec<Vector2<f64>>, front: bool| {
        if run.len() > 1 {
            let style = if front {
                format!(r#"stroke="{color}" stroke-width="1.5""#)
            } else {
                format!(r#"stroke="{color}" stroke-opacity="0.35" stroke-dasharray="3 3""#)
            };
            svg.polyline(run, &style);
        }
        run.clear();
    };
    for x in &samples {
        let at = canvas(Vector2::new(x.x, x.y), SIZE / 2.0);
        if (x.z >= 0.0) != front {
            run.push(at);
            flush(svg, &mut run, front);
            front = !front;
        }
        run.push(at);
    }
    flush(svg, &mut run, front);
}
