use std::fmt::Write as _;

use hqc_core::SweepRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Minimal line chart of `f_mean` against `x`: axes, one polyline with a
/// point per row, and a circle on every resonant row.
pub fn render_svg(rows: &[SweepRow], x_label: &str) -> String {
    let (x_min, x_max) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.x), hi.max(r.x)));
    let span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x_min) / span * (WIDTH - 2.0 * MARGIN);
    let py = |f: f64| HEIGHT - MARGIN - f.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(svg, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for (value, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let y = py(value);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{label}</text>"#,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(svg, r#"<text x="{x0}" y="{}" font-size="12">{x_min:.4}</text>"#, y0 + 18.0);
    let _ = writeln!(svg, r#"<text x="{x1}" y="{}" font-size="12" text-anchor="end">{x_max:.4}</text>"#, y0 + 18.0);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" font-size="13" transform="rotate(-90 14 {})" text-anchor="middle">f</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    let points: Vec<String> = rows.iter().map(|r| format!("{:.2},{:.2}", px(r.x), py(r.f_mean))).collect();
    let _ =
        writeln!(svg, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, points.join(" "));
    for r in rows.iter().filter(|r| r.resonant) {
        let _ = writeln!(
            svg,
            r#"<circle class="resonance" cx="{:.2}" cy="{:.2}" r="4" fill="crimson"/>"#,
            px(r.x),
            py(r.f_mean)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(x: f64, f: f64, resonant: bool) -> SweepRow {
        SweepRow {
            x,
            f_mean: f,
            f_min: f,
            f_max: f,
            f_std: 0.0,
            gamma_measured_mean: 0.0,
            gamma_ideal: 0.0,
            overlap_mean: 1.0,
            measured_mean_control: 0.0,
            resonant,
            nearest_n: 0,
            seed_base: 0,
            realizations: 1,
            steps: 0,
            max_unitarity_defect: 0.0,
        }
    }

    #[test]
    fn polyline_has_one_point_per_row() {
        let rows: Vec<SweepRow> = (0..7).map(|i| row(i as f64, 0.1 * i as f64, i == 3)).collect();
        let svg = render_svg(&rows, "x");
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let points = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        assert_eq!(points.split(' ').count(), 7);
        assert_eq!(svg.matches("class=\"resonance\"").count(), 1);
    }

    #[test]
    fn single_point_does_not_divide_by_zero() {
        let svg = render_svg(&[row(2.0, 0.5, false)], "T");
        assert!(!svg.contains("NaN"));
    }
}
