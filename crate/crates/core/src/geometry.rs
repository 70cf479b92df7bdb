//! LV geometry: tracings to polygons to masks, and per-frame features.
//!
//! Rasterization samples pixel centres `(x + 0.5, y + 0.5)` under the
//! even-odd rule with half-open edge crossings, so a polygon always maps to
//! the same mask bit for bit.
//!
//! Width and height are the peak-to-peak extents of the foreground pixel
//! coordinates along the principal axes of their covariance: height along
//! the major axis, width along the minor one. With equal eigenvalues the
//! image y axis is taken as the height direction.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Split, TraceFrame};
use crate::mask::Mask;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),
    #[error("vertex ({x}, {y}) outside {width}x{height} frame")]
    OutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },
    #[error("mask dimensions differ: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Self {
        Self::new(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Closed edge list `(v[i], v[i+1 mod n])`.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges()
            .map(|(a, b)| (b.x - a.x).hypot(b.y - a.y))
            .sum()
    }
}

/// Features of one frame's LV mask, in pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LvFrameFeatures {
    pub frame_index: usize,
    pub area: f64,
    pub width: f64,
    pub height: f64,
}

/// Builds the LV outline of a tracing.
///
/// Each chord endpoint is assigned to a side by its signed distance to the
/// long axis. Chords are ordered by the projection of their midpoints on the
/// axis; the ring walks the left side from the axis start to its end and
/// returns along the right side.
pub fn polygon_from_trace(trace: &TraceFrame) -> Result<Polygon, GeometryError> {
    let axis = trace
        .long_axis()
        .ok_or_else(|| GeometryError::DegenerateTrace("no segments".into()))?;
    let chords = trace.chords();
    if chords.is_empty() {
        return Err(GeometryError::DegenerateTrace("no chords".into()));
    }
    let dir = axis.end.sub(axis.start);
    if dir.x == 0.0 && dir.y == 0.0 {
        return Err(GeometryError::DegenerateTrace("zero-length long axis".into()));
    }

    let mut sided: Vec<(f64, Point, Point)> = chords
        .iter()
        .map(|c| {
            let s1 = dir.cross(c.start.sub(axis.start));
            let s2 = dir.cross(c.end.sub(axis.start));
            let (left, right) = if s1 >= s2 { (c.start, c.end) } else { (c.end, c.start) };
            let mid = Point::new((c.start.x + c.end.x) / 2.0, (c.start.y + c.end.y) / 2.0);
            (dir.dot(mid.sub(axis.start)), left, right)
        })
        .collect();
    sided.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut ring: Vec<Point> = sided.iter().map(|s| s.1).collect();
    ring.extend(sided.iter().rev().map(|s| s.2));
    ring.dedup();
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }

    if ring.len() < 3 {
        return Err(GeometryError::DegenerateTrace(format!(
            "{} distinct vertices",
            ring.len()
        )));
    }
    let origin = ring[0];
    let scale = ring
        .iter()
        .map(|p| p.sub(origin).dot(p.sub(origin)))
        .fold(0.0, f64::max);
    let spread = ring[1..]
        .iter()
        .map(|p| p.sub(origin))
        .find(|d| d.dot(*d) > 0.0)
        .map(|d1| {
            ring.iter()
                .map(|p| d1.cross(p.sub(origin)).abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0);
    if spread <= 1e-12 * scale {
        return Err(GeometryError::DegenerateTrace(
            "chord endpoints are collinear".into(),
        ));
    }
    Ok(Polygon::new(ring))
}

/// Absolute shoelace area. Degenerate inputs give 0.
pub fn shoelace_area(poly: &Polygon) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let twice: f64 = poly.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum();
    twice.abs() / 2.0
}

/// Scanline fill of `poly` into a `width` x `height` mask.
pub fn rasterize_polygon(
    poly: &Polygon,
    width: usize,
    height: usize,
) -> Result<Mask, GeometryError> {
    for v in &poly.vertices {
        let inside = v.x >= 0.0 && v.y >= 0.0 && v.x < width as f64 && v.y < height as f64;
        if !inside {
            return Err(GeometryError::OutOfBounds {
                x: v.x,
                y: v.y,
                width,
                height,
            });
        }
    }
    let mut mask = Mask::new(width, height);
    if poly.len() < 3 {
        return Ok(mask);
    }
    let mut crossings = Vec::new();
    for y in 0..height {
        let yc = y as f64 + 0.5;
        crossings.clear();
        for (a, b) in poly.edges() {
            if (a.y <= yc) != (b.y <= yc) {
                crossings.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for span in crossings.chunks_exact(2) {
            // pixel x is inside when span[0] <= x + 0.5 < span[1]
            let start = (span[0] - 0.5).ceil().max(0.0) as usize;
            let end = ((span[1] - 0.5).ceil().max(0.0) as usize).min(width);
            for x in start..end {
                mask.set(x, y, true);
            }
        }
    }
    Ok(mask)
}

/// Area, width and height of a mask's foreground.
pub fn extract_features(mask: &Mask, frame_index: usize) -> LvFrameFeatures {
    let n = mask.count();
    if n == 0 {
        return LvFrameFeatures {
            frame_index,
            ..Default::default()
        };
    }
    let nf = n as f64;
    let (sx, sy) = mask
        .foreground()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x as f64, sy + y as f64));
    let (mx, my) = (sx / nf, sy / nf);
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for (x, y) in mask.foreground() {
        let (dx, dy) = (x as f64 - mx, y as f64 - my);
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    let major = principal_direction(cxx / nf, cyy / nf, cxy / nf);
    let minor = Point::new(-major.y, major.x);

    let extent = |axis: Point| {
        let (lo, hi) = mask.foreground().fold((f64::MAX, f64::MIN), |(lo, hi), (x, y)| {
            let p = axis.dot(Point::new(x as f64, y as f64));
            (lo.min(p), hi.max(p))
        });
        hi - lo
    };
    LvFrameFeatures {
        frame_index,
        area: nf,
        width: extent(minor),
        height: extent(major),
    }
}

/// Unit eigenvector of the largest eigenvalue of `[[cxx, cxy], [cxy, cyy]]`.
fn principal_direction(cxx: f64, cyy: f64, cxy: f64) -> Point {
    let half_diff = (cxx - cyy) / 2.0;
    let disc = half_diff.hypot(cxy);
    if disc <= 1e-12 * (cxx + cyy) {
        return Point::new(0.0, 1.0);
    }
    if cxy == 0.0 {
        return if cxx > cyy {
            Point::new(1.0, 0.0)
        } else {
            Point::new(0.0, 1.0)
        };
    }
    let theta = 0.5 * (2.0 * cxy).atan2(cxx - cyy);
    Point::new(theta.cos(), theta.sin())
}

/// Ground-truth LV length: the Euclidean length of the long axis.
pub fn trace_length(trace: &TraceFrame) -> f64 {
    trace.long_axis().map_or(0.0, |s| s.length())
}

/// Dice similarity `2|a∩b| / (|a|+|b|)`; two empty masks score 1.
pub fn dice(a: &Mask, b: &Mask) -> Result<f64, GeometryError> {
    if a.dims() != b.dims() {
        return Err(GeometryError::DimensionMismatch(a.dims(), b.dims()));
    }
    let (mut inter, mut total) = (0usize, 0usize);
    for (&pa, &pb) in a.pixels().iter().zip(b.pixels()) {
        inter += usize::from(pa && pb);
        total += usize::from(pa) + usize::from(pb);
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / total as f64)
}

/// One row of the features CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub video_id: String,
    pub features: LvFrameFeatures,
    pub length: Option<f64>,
    pub split: Option<Split>,
}

/// Writes `video_id,frame_index,area,width,height` plus `length` and
/// `split` columns when any row carries them.
pub fn write_features_csv<W: Write>(rows: &[FeatureRow], out: W) -> csv::Result<()> {
    let with_length = rows.iter().any(|r| r.length.is_some());
    let with_split = rows.iter().any(|r| r.split.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["video_id", "frame_index", "area", "width", "height"];
    if with_length {
        header.push("length");
    }
    if with_split {
        header.push("split");
    }
    w.write_record(&header)?;
    for r in rows {
        let f = &r.features;
        let mut rec = vec![
            r.video_id.clone(),
            f.frame_index.to_string(),
            f.area.to_string(),
            f.width.to_string(),
            f.height.to_string(),
        ];
        if with_length {
            rec.push(r.length.map(|l| l.to_string()).unwrap_or_default());
        }
        if with_split {
            rec.push(r.split.map(|s| s.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features_csv<R: Read>(input: R) -> Result<Vec<FeatureRow>, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| col(name).ok_or_else(|| format!("missing column `{name}`"));
    let (vid, fi, area, width, height) = (
        require("video_id")?,
        require("frame_index")?,
        require("area")?,
        require("width")?,
        require("height")?,
    );
    let (length, split) = (col("length"), col("split"));

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64, String> {
            rec[i]
                .parse()
                .map_err(|_| format!("line {line}: cannot parse `{}`", &rec[i]))
        };
        let optional = |i: Option<usize>| i.map(|i| &rec[i]).filter(|s| !s.is_empty());
        rows.push(FeatureRow {
            video_id: rec[vid].to_string(),
            features: LvFrameFeatures {
                frame_index: rec[fi]
                    .parse()
                    .map_err(|_| format!("line {line}: bad frame_index `{}`", &rec[fi]))?,
                area: num(area)?,
                width: num(width)?,
                height: num(height)?,
            },
            length: optional(length)
                .map(|s| s.parse().map_err(|_| format!("line {line}: bad length `{s}`")))
                .transpose()?,
            split: optional(split)
                .map(|s| s.parse().map_err(|e| format!("line {line}: {e}")))
                .transpose()?,
        });
    }
    Ok(rows)
}
