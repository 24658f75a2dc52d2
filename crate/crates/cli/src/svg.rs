//! SVG chart emission: openness polyline, the three horizontal threshold
//! lines, shaded detected intervals, and a dashed normalized-EAR overlay
//! when the EAR path ran.

use std::fmt::Write as _;

use blinklab_core::detector::{BlinkEvent, CombinedSeries, DetectorConfig};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 52.0;
const MARGIN_RIGHT: f64 = 96.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 42.0;
/// Top of the value axis; normalized EAR may exceed 1 and is clamped here.
const Y_MAX: f64 = 1.1;

pub fn render_chart(
    series: &CombinedSeries,
    events: &[BlinkEvent],
    config: &DetectorConfig,
    ear_baseline: Option<f64>,
) -> String {
    let (first, last) = match (series.frames.first(), series.frames.last()) {
        (Some(a), Some(b)) => (a.frame_index, b.frame_index),
        _ => (0, 1),
    };
    let span = (last.saturating_sub(first)).max(1) as f64;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |frame: u64| MARGIN_LEFT + (frame - first) as f64 / span * plot_w;
    let y = |value: f64| MARGIN_TOP + (Y_MAX - value.clamp(0.0, Y_MAX)) / Y_MAX * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN_LEFT}" y="13" font-size="12">{}</text>"#,
        escape(&series.video_id)
    );

    // Shaded detected intervals sit under everything else.
    for event in events {
        let x0 = x(event.start_frame);
        let w = (x(event.end_frame) - x0).max(1.0);
        let _ = writeln!(
            svg,
            r##"<rect class="event" x="{x0:.1}" y="{MARGIN_TOP}" width="{w:.1}" height="{plot_h:.1}" fill="#e8806f" fill-opacity="0.30"/>"##
        );
    }

    // Axes and ticks.
    let x_axis_y = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{MARGIN_LEFT}" y1="{x_axis_y:.1}" x2="{:.1}" y2="{x_axis_y:.1}" stroke="black"/>"#,
        MARGIN_LEFT + plot_w
    );
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{x_axis_y:.1}" stroke="black"/>"#
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let ty = y(tick);
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{:.1}" y1="{ty:.1}" x2="{MARGIN_LEFT}" y2="{ty:.1}" stroke="black"/>"#,
            MARGIN_LEFT - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{tick}</text>"#,
            MARGIN_LEFT - 7.0,
            ty + 3.5
        );
    }
    for frame in [first, first + (last - first) / 2, last] {
        let tx = x(frame);
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{tx:.1}" y1="{x_axis_y:.1}" x2="{tx:.1}" y2="{:.1}" stroke="black"/>"#,
            x_axis_y + 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{tx:.1}" y="{:.1}" text-anchor="middle">{frame}</text>"#,
            x_axis_y + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">frame</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    );

    // The three blink thresholds.
    let thresholds = [
        (config.complete_threshold, "complete", "#c0392b"),
        (config.start_threshold, "start", "#e67e22"),
        (config.end_threshold, "end", "#2980b9"),
    ];
    for (value, label, color) in thresholds {
        let ty = y(value);
        let _ = writeln!(
            svg,
            r#"<line class="threshold-line" x1="{MARGIN_LEFT}" y1="{ty:.1}" x2="{:.1}" y2="{ty:.1}" stroke="{color}" stroke-dasharray="7 4"/>"#,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{label} {value}</text>"#,
            MARGIN_LEFT + plot_w + 5.0,
            ty + 3.5
        );
    }

    // One polyline per contiguous segment.
    for segment in series.segments() {
        let points: String = segment
            .iter()
            .map(|f| format!("{:.1},{:.1}", x(f.frame_index), y(f.openness)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            svg,
            r##"<polyline class="openness" points="{points}" fill="none" stroke="#1f63a8" stroke-width="1.5"/>"##
        );
    }
    if let Some(baseline) = ear_baseline {
        for segment in series.segments() {
            let points: String = segment
                .iter()
                .map(|f| format!("{:.1},{:.1}", x(f.frame_index), y(f.ear / baseline)))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(
                svg,
                r##"<polyline class="ear" points="{points}" fill="none" stroke="#1e8e4f" stroke-width="1.2" stroke-dasharray="5 4"/>"##
            );
        }
        let legend_y = MARGIN_TOP + 12.0;
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{legend_y:.1}" fill="#1e8e4f">EAR / {baseline:.3} (normalized)</text>"##,
            MARGIN_LEFT + 8.0
        );
    }

    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
