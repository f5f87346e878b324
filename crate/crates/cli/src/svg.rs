//! Static Poincare-disk rendering: the unit circle, the Bolza octagon with
//! geodesic sides, and horocycle orbit traces. Output bytes are a pure
//! function of the inputs (fixed-precision coordinates, no timestamps).

use std::fmt::Write;

use horolab::psl2::{GroupElement, PointH2};

/// Upper half-plane to unit disk: `z -> (z - i)/(z + i)`.
pub fn disk(z: &PointH2) -> (f64, f64) {
    let den = z.x * z.x + (z.y + 1.0) * (z.y + 1.0);
    ((z.x * z.x + z.y * z.y - 1.0) / den, -2.0 * z.x / den)
}

fn fmt_pt(out: &mut String, (x, y): (f64, f64)) {
    // SVG y points down; flip to keep the mathematical orientation.
    let _ = write!(out, "{:.6},{:.6} ", x, -y);
}

/// Sample the hyperbolic geodesic between two disk points as a polyline.
/// The geodesic is the arc of the circle through both points orthogonal to
/// the unit circle; pairs on a diameter degenerate to the straight chord.
fn geodesic_points(p: (f64, f64), q: (f64, f64), segments: usize) -> Vec<(f64, f64)> {
    let (px, py) = p;
    let (qx, qy) = q;
    // Solve 2 <o, p> = 1 + |p|^2 and 2 <o, q> = 1 + |q|^2 for the center o.
    let (a11, a12, b1) = (2.0 * px, 2.0 * py, 1.0 + px * px + py * py);
    let (a21, a22, b2) = (2.0 * qx, 2.0 * qy, 1.0 + qx * qx + qy * qy);
    let det = a11 * a22 - a12 * a21;
    let mut pts = Vec::with_capacity(segments + 1);
    if det.abs() < 1e-9 {
        for i in 0..=segments {
            let t = i as f64 / segments as f64;
            pts.push((px + t * (qx - px), py + t * (qy - py)));
        }
        return pts;
    }
    let ox = (b1 * a22 - b2 * a12) / det;
    let oy = (a11 * b2 - a21 * b1) / det;
    let r = (ox * ox + oy * oy - 1.0).max(0.0).sqrt();
    let a0 = (py - oy).atan2(px - ox);
    let a1 = (qy - oy).atan2(qx - ox);
    // shortest way around
    let mut sweep = a1 - a0;
    if sweep > std::f64::consts::PI {
        sweep -= 2.0 * std::f64::consts::PI;
    } else if sweep < -std::f64::consts::PI {
        sweep += 2.0 * std::f64::consts::PI;
    }
    for i in 0..=segments {
        let ang = a0 + sweep * i as f64 / segments as f64;
        pts.push((ox + r * ang.cos(), oy + r * ang.sin()));
    }
    pts
}

pub struct PlotSpec<'a> {
    /// Orbit traces: one polyline `t -> g b_t i` per element.
    pub orbit_reps: &'a [GroupElement],
    pub t_max: f64,
    pub samples_per_orbit: usize,
    pub octagon_vertices: &'a [(f64, f64)],
}

const PALETTE: [&str; 6] = [
    "#1965b0", "#dc050c", "#4eb265", "#f7a600", "#882e72", "#777777",
];

pub fn render(spec: &PlotSpec) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<!-- schema_version: 1 -->\n");
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"720\" \
         viewBox=\"-1.1 -1.1 2.2 2.2\">\n",
    );
    out.push_str("  <rect x=\"-1.1\" y=\"-1.1\" width=\"2.2\" height=\"2.2\" fill=\"white\"/>\n");
    out.push_str(
        "  <circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" \
         stroke-width=\"0.006\"/>\n",
    );

    // Octagon: geodesic sides plus vertex dots.
    if spec.octagon_vertices.len() > 1 {
        out.push_str(
            "  <polyline fill=\"none\" stroke=\"#444444\" stroke-width=\"0.004\" points=\"",
        );
        let n = spec.octagon_vertices.len();
        for i in 0..n {
            let p = spec.octagon_vertices[i];
            let q = spec.octagon_vertices[(i + 1) % n];
            for pt in geodesic_points(p, q, 48) {
                fmt_pt(&mut out, pt);
            }
        }
        out.push_str("\"/>\n");
        for &(x, y) in spec.octagon_vertices {
            let _ = writeln!(
                out,
                "  <circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"0.012\" fill=\"#444444\"/>",
                x, -y
            );
        }
    }

    render_orbits(spec, &mut out);
    out.push_str("</svg>\n");
    out
}

fn render_orbits(spec: &PlotSpec, out: &mut String) {
    for (idx, rep) in spec.orbit_reps.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let _ = write!(
            out,
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"0.005\" points=\""
        );
        let n = spec.samples_per_orbit.max(2);
        for j in 0..n {
            let t = -spec.t_max + 2.0 * spec.t_max * j as f64 / (n - 1) as f64;
            let z = rep.compose(&GroupElement::horocycle(t)).mobius(&PointH2::I);
            fmt_pt(out, disk(&z));
        }
        out.push_str("\"/>\n");
    }
}
