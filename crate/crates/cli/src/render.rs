//! Ground-plane SVG: buildings in gray, one color per agent, fly-over
//! spans in red, optional partition shading underneath.

use std::fmt::Write;

use urban_coverage::{Environment, GroundGrid, Trajectory};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#bcbd22", "#7f7f7f", "#393b79",
];
const FLY_OVER: &str = "#d62728";
const WIDTH_PX: f64 = 800.0;

pub struct Labels<'a> {
    pub grid: GroundGrid,
    pub labels: &'a [usize],
}

pub fn render_svg(env: &Environment, paths: &[Trajectory], partition: Option<Labels<'_>>) -> String {
    let [l1, l2] = env.extent;
    let s = WIDTH_PX / l1;
    let (w, h) = (l1 * s, l2 * s);
    // Ground y points up; SVG y points down.
    let x = |v: f64| v * s;
    let y = |v: f64| h - v * s;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white" stroke="black"/>"#);
    if let Some(p) = partition {
        let g = p.grid;
        for (idx, &l) in p.labels.iter().enumerate() {
            let (i, j) = (idx % g.nx, idx / g.nx);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.15"/>"#,
                x(i as f64 * g.dx),
                y((j + 1) as f64 * g.dy),
                g.dx * s,
                g.dy * s,
                PALETTE[l % PALETTE.len()]
            );
        }
    }
    let top = env.tallest().unwrap_or(1.0).max(1e-9);
    for b in &env.buildings {
        let g = (200.0 - 110.0 * (b.height / top)).round();
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})" stroke="dimgray"/>"#,
            x(b.x_min),
            y(b.y_max),
            (b.x_max - b.x_min) * s,
            (b.y_max - b.y_min) * s,
        );
    }
    for tr in paths {
        let color = PALETTE[tr.agent_id % PALETTE.len()];
        for w in tr.samples().windows(2) {
            let (a, b) = (w[0].pos, w[1].pos);
            if a.ground() == b.ground() {
                continue;
            }
            let c = if w[0].observing && w[1].observing { color } else { FLY_OVER };
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}" stroke-width="1"/>"#,
                x(a.x),
                y(a.y),
                x(b.x),
                y(b.y)
            );
        }
        if let Some(end) = tr.last() {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x(end.pos.x),
                y(end.pos.y)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use urban_coverage::{Building, Point3, Rect};

    #[test]
    fn fly_over_spans_are_red() {
        let env = Environment::with_default_ceiling(
            [10.0, 10.0],
            vec![Building::new(Rect::new(4.0, 4.0, 6.0, 6.0), 5.0)],
            2.0,
            1.0,
        )
        .unwrap();
        let tr = Trajectory::from_points(
            0,
            2.0,
            vec![
                (0.0, Point3::new(1.0, 5.0, 2.0)),
                (1.0, Point3::new(3.0, 5.0, 2.0)),
                (2.0, Point3::new(7.0, 5.0, 6.0)),
            ],
        )
        .unwrap();
        let svg = render_svg(&env, &[tr], None);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches(FLY_OVER).count(), 1);
        assert_eq!(svg.matches(PALETTE[0]).count(), 2);
        assert!(svg.contains("rgb(90,90,90)"));
    }
}
