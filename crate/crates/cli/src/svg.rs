//! Heatmaps of `log10 |K|` over `(|x|, |y|)` at one angle, as plain SVG.

use std::fmt::Write;

use waveop::wave_kernel::KernelGrid;

const CELL: f64 = 9.0;
const MARGIN: f64 = 60.0;
const BAR: f64 = 14.0;

// a short perceptual ramp, dark to light
const STOPS: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let k = STOPS
        .iter()
        .position(|s| s.0 >= t)
        .unwrap_or(STOPS.len() - 1)
        .max(1);
    let (t0, c0) = STOPS[k - 1];
    let (t1, c1) = STOPS[k];
    let u = (t - t0) / (t1 - t0);
    let mix = |i: usize| (c0[i] as f64 + u * (c1[i] as f64 - c0[i] as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

/// One heatmap for angle index `angle`; `|x|` runs left to right, `|y|`
/// bottom to top, both on the grid's log radii.
pub fn heatmap(grid: &KernelGrid, angle: usize, title: &str, config_hash: &str) -> String {
    let radii = grid.meta.spec.radius_nodes();
    let angles = grid.meta.spec.angle_nodes();
    let (n, na) = (radii.len(), angles.len());
    let logs: Vec<f64> = (0..n * n)
        .map(|k| grid.samples[k * na + angle].k.norm().max(1e-300).log10())
        .collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);

    let side = CELL * n as f64;
    let width = 2.0 * MARGIN + side + 3.0 * BAR + 40.0;
    let height = 2.0 * MARGIN + side;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<!-- config-sha256 {config_hash} -->");
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.0}" font-size="13">{title}, theta = {:.3}</text>"#,
        MARGIN - 20.0,
        angles[angle]
    );
    for i in 0..n {
        for j in 0..n {
            let x = MARGIN + CELL * i as f64;
            let y = MARGIN + side - CELL * (j + 1) as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                color((logs[i * n + j] - lo) / span)
            );
        }
    }
    // ticks at roughly every decade of the radius grid
    let step = (n / 6).max(1);
    for k in (0..n).step_by(step) {
        let c = CELL * (k as f64 + 0.5);
        let label = format!("{:.3}", radii[k]);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
            MARGIN + c,
            MARGIN + side + 15.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#,
            MARGIN - 5.0,
            MARGIN + side - c + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">|x|</text>"#,
        MARGIN + side / 2.0,
        MARGIN + side + 35.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.1}" transform="rotate(-90 15 {:.1})" text-anchor="middle">|y|</text>"#,
        MARGIN + side / 2.0,
        MARGIN + side / 2.0
    );
    // colour bar
    let bx = MARGIN + side + BAR;
    let segments = 32;
    for k in 0..segments {
        let h = side / segments as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{bx:.1}" y="{:.1}" width="{BAR}" height="{:.2}" fill="{}"/>"#,
            MARGIN + side - h * (k + 1) as f64,
            h + 0.5,
            color((k as f64 + 0.5) / segments as f64)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">{hi:.2}</text>"#,
        bx + BAR + 4.0,
        MARGIN + 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">{lo:.2}</text>"#,
        bx + BAR + 4.0,
        MARGIN + side
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">log10|K|</text>"#,
        bx + BAR / 2.0,
        MARGIN - 6.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use waveop::wave_kernel::GridSpec;
    use waveop::Complex64;

    #[test]
    fn colour_ramp_endpoints() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
        assert_eq!(color(-3.0), color(0.0));
    }

    #[test]
    fn one_rect_per_cell() {
        let spec = GridSpec {
            r_min: 1.0,
            r_max: 10.0,
            radii: 5,
            angles: 2,
        };
        let g = KernelGrid::tabulate("t", &spec, |a, b, _| Complex64::new(a / b, 0.0));
        let svg = heatmap(&g, 1, "model", "abc");
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("config-sha256 abc"));
        assert_eq!(svg.matches("<rect").count(), 25 + 32);
    }
}
