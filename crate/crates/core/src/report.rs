//! Beat-to-beat SVG: the LV area curve with ED/ES markers, per-cycle EF
//! annotations and a header carrying the average EF and phenotype.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::cycles::{AreaSeries, CardiacCycle};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 50.0;

struct Frame {
    n: usize,
    lo: f64,
    hi: f64,
}

impl Frame {
    fn x(&self, i: usize) -> f64 {
        let span = (self.n.max(2) - 1) as f64;
        LEFT + (WIDTH - LEFT - RIGHT) * i as f64 / span
    }

    fn y(&self, v: f64) -> f64 {
        let span = if self.hi > self.lo { self.hi - self.lo } else { 1.0 };
        TOP + (HEIGHT - TOP - BOTTOM) * (1.0 - (v - self.lo) / span)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the SVG document. Output depends only on the arguments.
pub fn render_beat_to_beat_svg(
    series: &AreaSeries,
    cycles: &[CardiacCycle],
    per_cycle_efs: &[f64],
    ef_all: f64,
    phenotype: &str,
) -> String {
    let areas = &series.areas;
    let (lo, hi) = areas
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let pad = ((hi - lo) * 0.08).max(1.0);
    let fr = Frame { n: areas.len(), lo: lo - pad, hi: hi + pad };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="24" font-size="16" font-weight="bold">{} | average EF {:.2}% | {}</text>"#,
        escape(&series.video_id),
        ef_all,
        escape(phenotype)
    );
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="44" font-size="12">cycles: {} | ED ▲ | ES ▼</text>"#,
        cycles.len()
    );

    // axes
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    let ticks = 5;
    for t in 0..=ticks {
        let i = (areas.len().saturating_sub(1)) * t / ticks;
        let x = fr.x(i);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{i}</text>"#,
            y1 + 16.0
        );
        let v = fr.lo + (fr.hi - fr.lo) * t as f64 / ticks as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{v:.0}</text>"#,
            x0 - 6.0,
            fr.y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">frame</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">LV area (px²)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    // area curve
    let mut path = String::new();
    for (i, &a) in areas.iter().enumerate() {
        let _ = write!(path, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, fr.x(i), fr.y(a));
    }
    let _ = writeln!(s, r#"<path d="{path}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#);

    for (k, c) in cycles.iter().enumerate() {
        let (ex, ey) = (fr.x(c.ed_frame), fr.y(areas[c.ed_frame]));
        let (sx, sy) = (fr.x(c.es_frame), fr.y(areas[c.es_frame]));
        let _ = writeln!(
            s,
            r#"<path class="ed" d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z" fill="crimson"/>"#,
            ex,
            ey - 7.0,
            ex - 6.0,
            ey + 4.0,
            ex + 6.0,
            ey + 4.0
        );
        let _ = writeln!(
            s,
            r#"<path class="es" d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z" fill="darkgreen"/>"#,
            sx,
            sy + 7.0,
            sx - 6.0,
            sy - 4.0,
            sx + 6.0,
            sy - 4.0
        );
        if let Some(ef) = per_cycle_efs.get(k) {
            let _ = writeln!(
                s,
                r#"<text class="cycle-ef" x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">EF {ef:.2}%</text>"#,
                (ex + sx) / 2.0,
                TOP - 4.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_beat_to_beat_svg(
    series: &AreaSeries,
    cycles: &[CardiacCycle],
    per_cycle_efs: &[f64],
    ef_all: f64,
    phenotype: &str,
    out_path: impl AsRef<Path>,
) -> io::Result<()> {
    if series.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "empty area series"));
    }
    std::fs::write(out_path, render_beat_to_beat_svg(series, cycles, per_cycle_efs, ef_all, phenotype))
}
