//! Dataset ingestion: FileList-style manifests, VolumeTracings-style
//! coordinate files and per-frame PGM mask directories.
//!
//! CSV dialect is plain: comma separated, header row, no quoting. A field
//! containing a comma shows up as a row with too many columns and is
//! rejected.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::mask::Mask;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("tracing group {video} frame {frame} has no chords")]
    EmptyGroup { video: String, frame: usize },
    #[error("missing mask frame {0}")]
    MissingFrame(usize),
    #[error("frame {index} is {found_width}x{found_height}, expected {width}x{height}")]
    DimensionMismatch {
        index: usize,
        width: usize,
        height: usize,
        found_width: usize,
        found_height: usize,
    },
    #[error("{path}: not a binary PGM ({reason})")]
    NotPgm { path: PathBuf, reason: String },
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TRAIN" => Ok(Split::Train),
            "VAL" => Ok(Split::Val),
            "TEST" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "TRAIN",
            Split::Val => "VAL",
            Split::Test => "TEST",
        })
    }
}

/// One manifest row: the expert labels and frame geometry of a video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub file_name: String,
    pub ef_label: f64,
    pub esv_label: f64,
    pub edv_label: f64,
    pub frame_height: usize,
    pub frame_width: usize,
    pub fps: f64,
    pub n_frames: usize,
    pub split: Split,
}

impl VideoRecord {
    fn validate(&self) -> Result<(), String> {
        if self.n_frames < 1 {
            return Err("NumberOfFrames must be >= 1".into());
        }
        if !(self.ef_label > 0.0 && self.ef_label < 100.0) {
            return Err(format!("EF {} outside (0, 100)", self.ef_label));
        }
        if !(self.esv_label < self.edv_label) {
            return Err(format!(
                "ESV {} not below EDV {}",
                self.esv_label, self.edv_label
            ));
        }
        if self.frame_height == 0 || self.frame_width == 0 {
            return Err("frame dimensions must be positive".into());
        }
        Ok(())
    }
}

const MANIFEST_COLUMNS: [&str; 9] = [
    "FileName",
    "EF",
    "ESV",
    "EDV",
    "FrameHeight",
    "FrameWidth",
    "FPS",
    "NumberOfFrames",
    "Split",
];

const TRACING_COLUMNS: [&str; 6] = ["FileName", "X1", "Y1", "X2", "Y2", "Frame"];

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn column_indices<const N: usize>(
    headers: &csv::StringRecord,
    names: [&str; N],
) -> Result<[usize; N]> {
    let mut out = [0; N];
    for (slot, name) in out.iter_mut().zip(names) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
    }
    Ok(out)
}

fn csv_error(err: csv::Error) -> IngestError {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io {
            path: PathBuf::new(),
            source,
        },
        kind => IngestError::MalformedRow {
            line,
            reason: format!("{kind:?}"),
        },
    }
}

fn field<T: FromStr>(record: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(idx).unwrap_or("");
    raw.parse().map_err(|_| IngestError::MalformedRow {
        line,
        reason: format!("{name}: cannot parse `{raw}`"),
    })
}

/// Parses a FileList-style manifest from any reader.
pub fn read_manifest<R: Read>(reader: R) -> Result<Vec<VideoRecord>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let idx = column_indices(&headers, MANIFEST_COLUMNS)?;
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let split = row
            .get(idx[8])
            .unwrap_or("")
            .parse::<Split>()
            .map_err(|reason| IngestError::MalformedRow { line, reason })?;
        let record = VideoRecord {
            file_name: row.get(idx[0]).unwrap_or("").to_string(),
            ef_label: field(&row, idx[1], "EF")?,
            esv_label: field(&row, idx[2], "ESV")?,
            edv_label: field(&row, idx[3], "EDV")?,
            frame_height: field(&row, idx[4], "FrameHeight")?,
            frame_width: field(&row, idx[5], "FrameWidth")?,
            fps: field(&row, idx[6], "FPS")?,
            n_frames: field(&row, idx[7], "NumberOfFrames")?,
            split,
        };
        record
            .validate()
            .map_err(|reason| IngestError::MalformedRow { line, reason })?;
        records.push(record);
    }
    Ok(records)
}

pub fn parse_manifest(path: impl AsRef<Path>) -> Result<Vec<VideoRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    read_manifest(file)
}

/// Writes records in the same column layout [`read_manifest`] accepts.
pub fn write_manifest<W: Write>(records: &[VideoRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", MANIFEST_COLUMNS.join(","))?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.file_name,
            r.ef_label,
            r.esv_label,
            r.edv_label,
            r.frame_height,
            r.frame_width,
            r.fps,
            r.n_frames,
            r.split
        )?;
    }
    Ok(())
}

pub fn serialize_manifest(records: &[VideoRecord]) -> String {
    let mut buf = Vec::new();
    write_manifest(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("manifest is utf-8")
}

/// A traced line segment in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
}

impl Segment {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self {
            start: Point::new(x1, y1),
            end: Point::new(x2, y2),
        }
    }

    pub fn length(&self) -> f64 {
        (self.end.x - self.start.x).hypot(self.end.y - self.start.y)
    }
}

/// The expert tracing of one labeled frame. The first segment is the LV
/// long axis, the rest are chords across the cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFrame {
    pub file_name: String,
    pub frame_index: usize,
    pub segments: Vec<Segment>,
}

impl TraceFrame {
    pub fn long_axis(&self) -> Option<&Segment> {
        self.segments.first()
    }

    pub fn chords(&self) -> &[Segment] {
        self.segments.get(1..).unwrap_or(&[])
    }
}

/// Video id of a file name: the name with any extension removed
/// (`0X1A.avi` -> `0X1A`).
pub fn video_id(file_name: &str) -> &str {
    match file_name.rfind('.') {
        Some(dot) if dot > 0 => &file_name[..dot],
        _ => file_name,
    }
}

/// Parses VolumeTracings-style rows, grouped per contiguous
/// `(FileName, Frame)` run. Keys are video ids (extension stripped).
pub fn read_tracings<R: Read>(reader: R) -> Result<BTreeMap<String, Vec<TraceFrame>>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let idx = column_indices(&headers, TRACING_COLUMNS)?;

    let mut groups: Vec<(TraceFrame, u64)> = Vec::new();
    let mut seen: HashMap<(String, usize), u64> = HashMap::new();
    for row in rdr.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let file_name = row.get(idx[0]).unwrap_or("").to_string();
        let frame: usize = field(&row, idx[5], "Frame")?;
        let segment = Segment::new(
            field(&row, idx[1], "X1")?,
            field(&row, idx[2], "Y1")?,
            field(&row, idx[3], "X2")?,
            field(&row, idx[4], "Y2")?,
        );
        if let Some((current, _)) = groups.last_mut() {
            if current.file_name == file_name && current.frame_index == frame {
                current.segments.push(segment);
                continue;
            }
        }
        let key = (file_name.clone(), frame);
        if let Some(first) = seen.get(&key) {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!(
                    "rows for {file_name} frame {frame} are not contiguous (group began on line {first})"
                ),
            });
        }
        seen.insert(key, line);
        groups.push((
            TraceFrame {
                file_name,
                frame_index: frame,
                segments: vec![segment],
            },
            line,
        ));
    }

    let mut out: BTreeMap<String, Vec<TraceFrame>> = BTreeMap::new();
    for (trace, _) in groups {
        if trace.segments.len() < 2 {
            return Err(IngestError::EmptyGroup {
                video: trace.file_name,
                frame: trace.frame_index,
            });
        }
        out.entry(video_id(&trace.file_name).to_string())
            .or_default()
            .push(trace);
    }
    Ok(out)
}

pub fn parse_tracings(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<TraceFrame>>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    read_tracings(file)
}

/// Ordered per-frame binary masks of one video, all the same size.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSequence {
    pub video_id: String,
    width: usize,
    height: usize,
    frames: Vec<Mask>,
}

impl MaskSequence {
    pub fn new(video_id: impl Into<String>, frames: Vec<Mask>) -> Result<Self> {
        let first = frames.first().ok_or(IngestError::MissingFrame(0))?;
        let (width, height) = first.dims();
        for (index, frame) in frames.iter().enumerate() {
            if frame.dims() != (width, height) {
                return Err(IngestError::DimensionMismatch {
                    index,
                    width,
                    height,
                    found_width: frame.width(),
                    found_height: frame.height(),
                });
            }
        }
        Ok(Self {
            video_id: video_id.into(),
            width,
            height,
            frames,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frames(&self) -> &[Mask] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.pgm")
}

fn parse_frame_file_name(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".pgm")?;
    if digits.len() < 5 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Encodes a mask as binary PGM (P5, maxval 255, LV = 255).
pub fn encode_pgm(mask: &Mask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.pixels().iter().map(|&p| if p { 255u8 } else { 0 }));
    out
}

/// Decodes a binary PGM; pixels at or above 128 are foreground.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Mask> {
    let not_pgm = |reason: &str| IngestError::NotPgm {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        // whitespace and comments between header tokens
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(not_pgm("truncated header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| not_pgm("bad header"))?);
    }
    if tokens[0] != "P5" {
        return Err(not_pgm("magic is not P5"));
    }
    let parse = |t: &str| t.parse::<usize>().map_err(|_| not_pgm("bad header number"));
    let (width, height, maxval) = (parse(tokens[1])?, parse(tokens[2])?, parse(tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(not_pgm("maxval must be in 1..=255"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() < width * height {
        return Err(not_pgm("raster shorter than width * height"));
    }
    let pixels = raster[..width * height].iter().map(|&v| v >= 128).collect();
    Ok(Mask::from_pixels(width, height, pixels).expect("length checked"))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_pgm(&bytes, path)
}

pub fn write_pgm(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(mask)).map_err(io_err(path))
}

/// True when `dir` holds at least one `frame_NNNNN.pgm` file.
pub fn is_mask_sequence_dir(dir: impl AsRef<Path>) -> bool {
    fs::read_dir(dir).is_ok_and(|entries| {
        entries.flatten().any(|e| {
            e.file_name()
                .to_str()
                .and_then(parse_frame_file_name)
                .is_some()
        })
    })
}

/// Reads `frame_00000.pgm ..` from `dir`. The video id is the directory name.
pub fn read_mask_sequence(dir: impl AsRef<Path>) -> Result<MaskSequence> {
    let dir = dir.as_ref();
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        if let Some(index) = entry.file_name().to_str().and_then(parse_frame_file_name) {
            files.insert(index, entry.path());
        }
    }
    let n = files.keys().next_back().map_or(0, |&last| last + 1);
    let mut frames = Vec::with_capacity(n);
    for index in 0..n.max(1) {
        let path = files.get(&index).ok_or(IngestError::MissingFrame(index))?;
        frames.push(read_pgm(path)?);
    }
    let video_id = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    MaskSequence::new(video_id, frames)
}

pub fn write_mask_sequence(seq: &MaskSequence, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (index, frame) in seq.frames().iter().enumerate() {
        write_pgm(frame, dir.join(frame_file_name(index)))?;
    }
    Ok(())
}
