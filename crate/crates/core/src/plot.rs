//! Static SVG figures: scree plot and stacked contribution bars.
//!
//! Every bar carries `data-*` attributes with its underlying value so tests
//! and downstream tools can read the figure back without rasterizing it.

use std::fmt::Write;

use crate::contribution::ContributionReport;
use crate::pca::PcaResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const LEGEND_WIDTH: f64 = 180.0;

pub const PLOT_HEIGHT: f64 = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, width: f64, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{HEIGHT:.0}" viewBox="0 0 {width:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text class="title" x="{:.3}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        width / 2.0,
        escape(title)
    )
    .unwrap();
}

/// Y axis for a 0-100 % scale with gridlines every 25 %.
fn percent_axis(out: &mut String, plot_right: f64, label: &str) {
    let bottom = MARGIN_TOP + PLOT_HEIGHT;
    for tick in [0, 25, 50, 75, 100] {
        let y = bottom - PLOT_HEIGHT * f64::from(tick) / 100.0;
        writeln!(
            out,
            r##"<line x1="{MARGIN_LEFT:.3}" y1="{y:.3}" x2="{plot_right:.3}" y2="{y:.3}" stroke="#dddddd"/>"##
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{tick}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<line x1="{MARGIN_LEFT:.3}" y1="{MARGIN_TOP:.3}" x2="{MARGIN_LEFT:.3}" y2="{bottom:.3}" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<line x1="{MARGIN_LEFT:.3}" y1="{bottom:.3}" x2="{plot_right:.3}" y2="{bottom:.3}" stroke="black"/>"#
    )
    .unwrap();
    let mid = MARGIN_TOP + PLOT_HEIGHT / 2.0;
    writeln!(
        out,
        r#"<text class="y-label" x="20" y="{mid:.3}" text-anchor="middle" transform="rotate(-90 20 {mid:.3})">{}</text>"#,
        escape(label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text class="x-label" x="{:.3}" y="{:.3}" text-anchor="middle">Principal component</text>"#,
        (MARGIN_LEFT + plot_right) / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
}

fn slot(plot_width: f64, count: usize, index: usize) -> (f64, f64) {
    let step = plot_width / count as f64;
    let bar = step * 0.7;
    (MARGIN_LEFT + step * index as f64 + (step - bar) / 2.0, bar)
}

/// Bar chart of explained variance per component, annotated to 1 decimal.
pub fn render_scree(pca: &PcaResult) -> String {
    let mut out = String::new();
    header(&mut out, WIDTH, "Variance explained by principal component");
    let plot_right = WIDTH - MARGIN_RIGHT;
    percent_axis(&mut out, plot_right, "Explained variance (%)");

    let bottom = MARGIN_TOP + PLOT_HEIGHT;
    let names = pca.component_names();
    let count = names.len();
    for (k, (name, ratio)) in names.iter().zip(pca.explained_ratio()).enumerate() {
        let pct = 100.0 * ratio;
        let (x, w) = slot(plot_right - MARGIN_LEFT, count, k);
        let h = PLOT_HEIGHT * ratio;
        writeln!(
            out,
            r##"<rect class="bar" data-component="{name}" data-value="{pct:.6}" x="{x:.3}" y="{:.3}" width="{w:.3}" height="{h:.3}" fill="#4e79a7"/>"##,
            bottom - h
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="bar-label" x="{:.3}" y="{:.3}" text-anchor="middle">{pct:.1}</text>"#,
            x + w / 2.0,
            bottom - h - 5.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text class="tick" x="{:.3}" y="{:.3}" text-anchor="middle">{name}</text>"#,
            x + w / 2.0,
            bottom + 18.0
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// One stacked bar per component; segment heights are the cluster shares.
pub fn render_contributions(report: &ContributionReport) -> String {
    let width = WIDTH + LEGEND_WIDTH;
    let mut out = String::new();
    header(&mut out, width, "Cluster contribution to each principal component");
    let plot_right = WIDTH - MARGIN_RIGHT;
    percent_axis(&mut out, plot_right, "Share of absolute loadings (%)");

    let bottom = MARGIN_TOP + PLOT_HEIGHT;
    let count = report.component_ids.len();
    for (j, component) in report.component_ids.iter().enumerate() {
        let (x, w) = slot(plot_right - MARGIN_LEFT, count, j);
        let mut top = bottom;
        for (k, id) in report.cluster_ids.iter().enumerate() {
            let share = report.p_matrix[k][j];
            let h = PLOT_HEIGHT * share;
            top -= h;
            writeln!(
                out,
                r#"<rect class="segment" data-component="{component}" data-cluster="{id}" data-value="{share:.6}" x="{x:.3}" y="{top:.3}" width="{w:.3}" height="{h:.3}" fill="{}"/>"#,
                PALETTE[k % PALETTE.len()]
            )
            .unwrap();
            if h >= 14.0 {
                writeln!(
                    out,
                    r#"<text class="segment-label" x="{:.3}" y="{:.3}" text-anchor="middle" fill="white">{:.1}</text>"#,
                    x + w / 2.0,
                    top + h / 2.0 + 4.0,
                    100.0 * share
                )
                .unwrap();
            }
        }
        writeln!(
            out,
            r#"<text class="tick" x="{:.3}" y="{:.3}" text-anchor="middle">{component}</text>"#,
            x + w / 2.0,
            bottom + 18.0
        )
        .unwrap();
    }

    let legend_x = WIDTH;
    for (k, (id, members)) in report.cluster_ids.iter().zip(&report.members).enumerate() {
        let y = MARGIN_TOP + 22.0 * k as f64;
        writeln!(
            out,
            r#"<rect class="legend" data-cluster="{id}" x="{legend_x:.3}" y="{y:.3}" width="14" height="14" fill="{}"/>"#,
            PALETTE[k % PALETTE.len()]
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}">Cluster {id}: {}</text>"#,
            legend_x + 20.0,
            y + 11.0,
            escape(&members.join(", "))
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\">"), "a&lt;b &amp; &quot;c&quot;&gt;");
    }

    #[test]
    fn single_cluster_bars_are_full() {
        let report = ContributionReport {
            cluster_ids: vec![1],
            members: vec![vec!["x".into(), "y".into()]],
            component_ids: vec!["PC1".into(), "PC2".into()],
            s_matrix: vec![vec![1.2, 1.4]],
            p_matrix: vec![vec![1.0, 1.0]],
            explained_ratio: vec![0.6, 0.4],
        };
        let svg = render_contributions(&report);
        let full = format!(r#"height="{PLOT_HEIGHT:.3}""#);
        assert_eq!(svg.matches(&full).count(), 2);
        assert!(svg.contains("Cluster 1: x, y"));
    }
}
