//! Text manifests that tie frames and event files together.
//!
//! Frame manifest, one frame per line:
//!
//! ```text
//! <frame.pgm> <t_microseconds>
//! ```
//!
//! Pair manifest, one training interval per line:
//!
//! ```text
//! <f0.pgm> <t0> <f1.pgm> <t1> <events>
//! ```
//!
//! `<events>` is an EVT1 or text event file; it is sliced to `[t0, t1)`, so
//! several lines may share one recording. Relative paths resolve against the
//! manifest's directory. Blank lines and `#` comments are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use evkit_core::{EventStream, Frame, TrainingPair};

use super::pgm::frame_from_pgm;
use super::text::ZeroPolarity;
use super::{load_events, read_file};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameEntry {
    pub path: PathBuf,
    pub t: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairEntry {
    pub f0: PathBuf,
    pub t0: u64,
    pub f1: PathBuf,
    pub t1: u64,
    pub events: PathBuf,
}

fn manifest_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn parse_time(s: &str, line: usize) -> Result<u64> {
    s.parse().map_err(|_| Error::Malformed {
        line,
        message: format!("bad timestamp {s:?}"),
    })
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn parse_frame_manifest(text: &str, base: &Path) -> Result<Vec<FrameEntry>> {
    manifest_lines(text)
        .map(|(line, f)| {
            if f.len() != 2 {
                return Err(Error::Malformed {
                    line,
                    message: "expected `<frame> <t>`".into(),
                });
            }
            Ok(FrameEntry {
                path: resolve(base, f[0]),
                t: parse_time(f[1], line)?,
            })
        })
        .collect()
}

pub fn parse_pairs_manifest(text: &str, base: &Path) -> Result<Vec<PairEntry>> {
    manifest_lines(text)
        .map(|(line, f)| {
            if f.len() != 5 {
                return Err(Error::Malformed {
                    line,
                    message: "expected `<f0> <t0> <f1> <t1> <events>`".into(),
                });
            }
            Ok(PairEntry {
                f0: resolve(base, f[0]),
                t0: parse_time(f[1], line)?,
                f1: resolve(base, f[2]),
                t1: parse_time(f[3], line)?,
                events: resolve(base, f[4]),
            })
        })
        .collect()
}

fn manifest_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?).map_err(|_| Error::Malformed {
        line: 0,
        message: format!("{}: not UTF-8", path.display()),
    })
}

pub fn load_frame(path: &Path, t: u64) -> Result<Frame> {
    frame_from_pgm(&read_file(path)?, t)
}

/// Frames listed in a frame manifest, in file order.
pub fn load_frames(manifest: &Path) -> Result<Vec<Frame>> {
    let entries = parse_frame_manifest(&read_text(manifest)?, manifest_dir(manifest))?;
    entries.iter().map(|e| load_frame(&e.path, e.t)).collect()
}

/// Training pairs listed in a pair manifest.
pub fn load_pairs(manifest: &Path, zero: ZeroPolarity) -> Result<Vec<TrainingPair>> {
    let entries = parse_pairs_manifest(&read_text(manifest)?, manifest_dir(manifest))?;
    let mut streams: HashMap<PathBuf, EventStream> = HashMap::new();
    entries
        .iter()
        .map(|e| {
            let f0 = load_frame(&e.f0, e.t0)?;
            let f1 = load_frame(&e.f1, e.t1)?;
            if !streams.contains_key(&e.events) {
                let s = load_events(&e.events, Some(f0.dims()), zero)?;
                streams.insert(e.events.clone(), s);
            }
            let stream = streams[&e.events].slice_by_time(e.t0, e.t1)?;
            Ok(TrainingPair::new(f0, f1, stream)?)
        })
        .collect()
}

pub fn format_frame_manifest(entries: &[FrameEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(out, "{} {}", e.path.display(), e.t);
    }
    out
}

pub fn format_pairs_manifest(entries: &[PairEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            e.f0.display(),
            e.t0,
            e.f1.display(),
            e.t1,
            e.events.display()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_frames_relative_to_base() {
        let m = parse_frame_manifest("# frames\na.pgm 0\n\n/abs/b.pgm 100\n", Path::new("/data")).unwrap();
        assert_eq!(m[0].path, PathBuf::from("/data/a.pgm"));
        assert_eq!(m[1].path, PathBuf::from("/abs/b.pgm"));
        assert_eq!(m[1].t, 100);
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_frame_manifest("a.pgm\n", Path::new(".")),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_pairs_manifest("a 0 b x e\n", Path::new(".")),
            Err(Error::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn pairs_format_round_trip() {
        let e = PairEntry {
            f0: "a.pgm".into(),
            t0: 0,
            f1: "b.pgm".into(),
            t1: 50,
            events: "ev.evt1".into(),
        };
        let text = format_pairs_manifest(std::slice::from_ref(&e));
        assert_eq!(parse_pairs_manifest(&text, Path::new("")).unwrap(), vec![e]);
    }
}
