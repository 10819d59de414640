//! Deterministic SVG figures: exact polygon drawings of planar Newton
//! polytopes (with the lattice grid and labelled edge lengths) and a fixed
//! isometric wireframe for the 3-dimensional simplices.
//!
//! Output bytes depend only on the input: element order is fixed and all
//! coordinates are formatted with a fixed precision.

use std::fmt;
use std::fmt::Write as _;

use crate::lattice::{affine_length, newton_polytope, LatticeError};
use crate::markov::MarkovTriple;
use crate::potentials::{distinguished_triangle, vianna, PotentialError, PotentialRecord};

#[derive(Debug)]
pub enum RenderError {
    UnsupportedDim { dim: usize },
    Potential(PotentialError),
    Lattice(LatticeError),
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::UnsupportedDim { dim } => {
                write!(f, "rendering supports dimensions 2 and 3, got {dim}")
            }
            RenderError::Potential(e) => write!(f, "{e}"),
            RenderError::Lattice(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RenderError {}

impl From<PotentialError> for RenderError {
    fn from(e: PotentialError) -> Self {
        RenderError::Potential(e)
    }
}

impl From<LatticeError> for RenderError {
    fn from(e: LatticeError) -> Self {
        RenderError::Lattice(e)
    }
}

/// Render the Newton polytope of the potential for `t` at dimension 2 or 3.
pub fn render_triple(t: &MarkovTriple, n: usize) -> Result<String, RenderError> {
    if n != 2 && n != 3 {
        return Err(RenderError::UnsupportedDim { dim: n });
    }
    let record = vianna(t, n)?;
    render_record(&record)
}

/// Render an already-constructed record (dimension 2 or 3).
pub fn render_record(record: &PotentialRecord) -> Result<String, RenderError> {
    match record.dim {
        2 => polygon_svg(record),
        3 => wireframe_svg(record),
        dim => Err(RenderError::UnsupportedDim { dim }),
    }
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn polygon_svg(record: &PotentialRecord) -> Result<String, RenderError> {
    let polytope = newton_polytope(&record.poly)?;
    let verts = polytope.vertices();
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (0i64, 0i64, 0i64, 0i64);
    for v in verts {
        min_x = min_x.min(v[0]);
        max_x = max_x.max(v[0]);
        min_y = min_y.min(v[1]);
        max_y = max_y.max(v[1]);
    }
    min_x -= 1;
    min_y -= 1;
    max_x += 1;
    max_y += 1;
    let scale = 40.0;
    let width = (max_x - min_x) as f64 * scale;
    let height = (max_y - min_y) as f64 * scale;
    let px = |x: i64| (x - min_x) as f64 * scale;
    let py = |y: i64| (max_y - y) as f64 * scale; // svg y grows downward

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt2(width),
        fmt2(height),
        fmt2(width),
        fmt2(height)
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    // Lattice grid.
    for x in min_x..=max_x {
        let _ = writeln!(
            svg,
            r##"<line x1="{0}" y1="0" x2="{0}" y2="{1}" stroke="#dddddd" stroke-width="1"/>"##,
            fmt2(px(x)),
            fmt2(height)
        );
    }
    for y in min_y..=max_y {
        let _ = writeln!(
            svg,
            r##"<line x1="0" y1="{0}" x2="{1}" y2="{0}" stroke="#dddddd" stroke-width="1"/>"##,
            fmt2(py(y)),
            fmt2(width)
        );
    }
    // The polygon, walked along its edges.
    let ring = polygon_ring(&polytope);
    let path: Vec<String> = ring
        .iter()
        .map(|&i| format!("{},{}", fmt2(px(verts[i][0])), fmt2(py(verts[i][1]))))
        .collect();
    let _ = writeln!(
        svg,
        r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.5" stroke="#3182bd" stroke-width="2"/>"##,
        path.join(" ")
    );
    // Origin marker.
    let _ = writeln!(
        svg,
        r##"<circle cx="{}" cy="{}" r="4" fill="#d62728"/>"##,
        fmt2(px(0)),
        fmt2(py(0))
    );
    // Vertices and coordinates.
    for v in verts {
        let _ = writeln!(
            svg,
            r##"<circle cx="{}" cy="{}" r="3" fill="#08306b"/>"##,
            fmt2(px(v[0])),
            fmt2(py(v[1]))
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-size="12" fill="#08306b">({},{})</text>"##,
            fmt2(px(v[0]) + 5.0),
            fmt2(py(v[1]) - 5.0),
            v[0],
            v[1]
        );
    }
    // Edge lengths at midpoints.
    for k in 0..ring.len() {
        let a = &verts[ring[k]];
        let b = &verts[ring[(k + 1) % ring.len()]];
        let len = affine_length(a, b)?;
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-size="14" font-weight="bold" fill="#d62728">{}</text>"##,
            fmt2((px(a[0]) + px(b[0])) / 2.0 + 6.0),
            fmt2((py(a[1]) + py(b[1])) / 2.0 - 6.0),
            len
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="8" y="16" font-size="14" fill="#000000">Newton polytope of W{} in dimension 2</text>"##,
        record.triple.sorted()
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Ring order of a polygon's vertices (indices into `vertices()`).
fn polygon_ring(p: &crate::lattice::LatticePolytope) -> Vec<usize> {
    // Follow the edge graph from the first vertex.
    let mut ring = vec![0usize];
    let mut prev = usize::MAX;
    loop {
        let current = *ring.last().expect("ring is nonempty");
        let next = p
            .edges()
            .iter()
            .filter_map(|&(a, b)| {
                if a == current {
                    Some(b)
                } else if b == current {
                    Some(a)
                } else {
                    None
                }
            })
            .find(|&v| v != prev);
        match next {
            Some(v) if v != ring[0] => {
                prev = current;
                ring.push(v);
            }
            _ => break,
        }
    }
    ring
}

fn wireframe_svg(record: &PotentialRecord) -> Result<String, RenderError> {
    let polytope = newton_polytope(&record.poly)?;
    let tri = distinguished_triangle(&record.poly)?;
    let verts = polytope.vertices();
    // Fixed isometric projection.
    let sq3h = 0.866_025_403_784_438_6;
    let proj = |v: &[i64]| -> (f64, f64) {
        let (x, y, z) = (v[0] as f64, v[1] as f64, v[2] as f64);
        ((y - x) * sq3h, (x + y) * 0.5 - z)
    };
    let scale = 48.0;
    let margin = 60.0;
    let projected: Vec<(f64, f64)> = verts.iter().map(|v| proj(v)).collect();
    let min_u = projected.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max_u = projected.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let min_v = projected.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max_v = projected.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let width = (max_u - min_u) * scale + 2.0 * margin;
    let height = (max_v - min_v) * scale + 2.0 * margin;
    let place = |p: (f64, f64)| -> (f64, f64) {
        ((p.0 - min_u) * scale + margin, (max_v - p.1) * scale + margin)
    };

    let tri_ids: Vec<usize> = tri
        .vertices()
        .iter()
        .map(|v| {
            verts
                .iter()
                .position(|w| w == v)
                .expect("triangle vertices are polytope vertices")
        })
        .collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt2(width),
        fmt2(height),
        fmt2(width),
        fmt2(height)
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for &(a, b) in polytope.edges() {
        let (x1, y1) = place(projected[a]);
        let (x2, y2) = place(projected[b]);
        let on_triangle = tri_ids.contains(&a) && tri_ids.contains(&b);
        let (stroke, width_px) = if on_triangle {
            ("#d62728", "2.5")
        } else {
            ("#3182bd", "1.5")
        };
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{width_px}"/>"##,
            fmt2(x1),
            fmt2(y1),
            fmt2(x2),
            fmt2(y2)
        );
        if on_triangle {
            let len = affine_length(&verts[a], &verts[b])?;
            let _ = writeln!(
                svg,
                r##"<text x="{}" y="{}" font-size="14" font-weight="bold" fill="#d62728">{}</text>"##,
                fmt2((x1 + x2) / 2.0 + 6.0),
                fmt2((y1 + y2) / 2.0 - 6.0),
                len
            );
        }
    }
    for (i, &(u, v)) in projected.iter().enumerate() {
        let (x, y) = place((u, v));
        let _ = writeln!(svg, r##"<circle cx="{}" cy="{}" r="3.5" fill="#08306b"/>"##, fmt2(x), fmt2(y));
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-size="12" fill="#08306b">({},{},{})</text>"##,
            fmt2(x + 6.0),
            fmt2(y - 6.0),
            verts[i][0],
            verts[i][1],
            verts[i][2]
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="8" y="16" font-size="14" fill="#000000">Newton polytope of W{} in dimension 3</text>"##,
        record.triple.sorted()
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(a: u64, b: u64, c: u64) -> MarkovTriple {
        MarkovTriple::from_u64(a, b, c).unwrap()
    }

    #[test]
    fn planar_drawing_labels_the_markov_lengths() {
        let svg = render_triple(&triple(1, 1, 2), 2).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(">2</text>"), "the length-2 edge must be labelled");
        assert!(svg.contains("(1,1,2)"));
        // Deterministic bytes.
        assert_eq!(svg, render_triple(&triple(1, 1, 2), 2).unwrap());
    }

    #[test]
    fn wireframe_for_the_standard_simplex() {
        let svg = render_triple(&triple(1, 1, 1), 3).unwrap();
        assert!(svg.starts_with("<svg"));
        // 4 vertices and 6 edges of the tetrahedron.
        assert_eq!(svg.matches("<circle").count(), 4);
        assert_eq!(svg.matches("<line").count(), 6);
    }

    #[test]
    fn high_dimensions_are_rejected() {
        assert!(matches!(
            render_triple(&triple(1, 1, 1), 5),
            Err(RenderError::UnsupportedDim { dim: 5 })
        ));
    }
}
