use std::fmt::Write;

use periodlab::criterion::{metric_graph, Vertex};
use periodlab::geometry::hyperbolic_inflate;
use periodlab::{DomainSpec, Hole, Point};

const SIZE: f64 = 800.0;

fn px(p: Point) -> (f64, f64) {
    let scale = SIZE / 2.2;
    ((p.x + 1.1) * scale, (1.1 - p.y) * scale)
}

fn circle(out: &mut String, center: Point, radius: f64, style: &str) {
    let (x, y) = px(center);
    let r = radius * SIZE / 2.2;
    let _ = writeln!(
        out,
        r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r:.3}" {style}/>"#
    );
}

fn line(out: &mut String, a: Point, b: Point, style: &str) {
    let ((x1, y1), (x2, y2)) = (px(a), px(b));
    let _ = writeln!(
        out,
        r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" {style}/>"#
    );
}

/// Unit circle, holes, the hyperbolic 1-neighborhoods of disk holes and the
/// edges of the metric graph at `s`.
pub fn render(d: &DomainSpec, s: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    circle(
        &mut out,
        Point::ORIGIN,
        1.0,
        r##"fill="none" stroke="#000" stroke-width="1.5""##,
    );
    for h in &d.holes {
        if let Hole::Disk { center, radius } = h {
            if let Ok(Hole::Disk { center, radius }) = hyperbolic_inflate(*center, *radius, 1.0) {
                circle(
                    &mut out,
                    center,
                    radius,
                    r##"fill="#4a90d9" fill-opacity="0.08" stroke="#4a90d9" stroke-dasharray="4 3""##,
                );
            }
        }
    }
    if let Ok(g) = metric_graph(d, s) {
        let at = |v: Vertex, toward: Point| match v {
            Vertex::Hole(j) => d.holes[j].anchor(),
            Vertex::Outer => {
                let n = toward.norm();
                if n > 0.0 {
                    toward * (1.0 / n)
                } else {
                    Point::new(1.0, 0.0)
                }
            }
        };
        for &(a, b) in &g.edges {
            let (pa, pb) = match (a, b) {
                (Vertex::Outer, other) | (other, Vertex::Outer) => {
                    let p = at(other, Point::ORIGIN);
                    (p, at(Vertex::Outer, p))
                }
                _ => (at(a, Point::ORIGIN), at(b, Point::ORIGIN)),
            };
            line(&mut out, pa, pb, r##"stroke="#d0021b" stroke-width="1""##);
        }
    }
    for h in &d.holes {
        match h {
            Hole::Disk { center, radius } => circle(&mut out, *center, *radius, r##"fill="#333""##),
            Hole::Polygon { vertices } => {
                let pts: Vec<String> = vertices
                    .iter()
                    .map(|v| {
                        let (x, y) = px(*v);
                        format!("{x:.3},{y:.3}")
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r##"<polygon points="{}" fill="#333"/>"##,
                    pts.join(" ")
                );
            }
        }
    }
    out.push_str("</svg>");
    out
}
