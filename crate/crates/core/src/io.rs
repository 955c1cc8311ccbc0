//! Walk text format and the binary sample-frame format.
//!
//! Text: a header line `n=<edges> r=<radius>` followed by `n + 1` lines of
//! `x y z`. Floats use Rust's shortest round-trip representation.
//!
//! Binary frame, all little-endian: `n: u32`, `r: f64`, `index: u64`, then
//! `(n + 1) * 3` `f64` coordinates.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::geom::{Vec3, Walk};

/// Refuse frames claiming more edges than this; such headers are corrupt.
pub const MAX_FRAME_EDGES: u32 = 10_000_000;

pub fn write_walk_text<W: Write>(out: &mut W, walk: &Walk, r: f64) -> io::Result<()> {
    writeln!(out, "n={} r={}", walk.n(), r)?;
    for v in walk.vertices() {
        writeln!(out, "{} {} {}", v.x, v.y, v.z)?;
    }
    Ok(())
}

pub fn walk_to_text(walk: &Walk, r: f64) -> String {
    let mut buf = Vec::new();
    write_walk_text(&mut buf, walk, r).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(usize, f64)> {
    let mut n = None;
    let mut r = None;
    for tok in line.split_whitespace() {
        match tok.split_once('=') {
            Some(("n", v)) => {
                n = Some(
                    v.parse::<usize>()
                        .map_err(|e| parse_err(line_no, format!("bad n: {e}")))?,
                )
            }
            Some(("r", v)) => {
                r = Some(
                    v.parse::<f64>()
                        .map_err(|e| parse_err(line_no, format!("bad r: {e}")))?,
                )
            }
            _ => return Err(parse_err(line_no, format!("unexpected token {tok:?}"))),
        }
    }
    match (n, r) {
        (Some(n), Some(r)) => Ok((n, r)),
        _ => Err(parse_err(line_no, "header must be `n=<edges> r=<radius>`")),
    }
}

/// Parses one or more concatenated text walks.
pub fn parse_walks_text(text: &str) -> Result<Vec<(Walk, f64)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut out = Vec::new();
    while let Some((line_no, header)) = lines.next() {
        let (n, r) = parse_header(line_no, header)?;
        let mut vertices = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| parse_err(line_no, format!("expected {} vertex lines", n + 1)))?;
            let coords: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| parse_err(ln, e.to_string())))
                .collect::<Result<_>>()?;
            if coords.len() != 3 {
                return Err(parse_err(ln, "expected three coordinates"));
            }
            vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
        }
        out.push((Walk::new(vertices)?, r));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub r: f64,
    pub index: u64,
    pub walk: Walk,
}

pub fn frame_len(n: usize) -> usize {
    4 + 8 + 8 + (n + 1) * 24
}

pub fn write_frame<W: Write>(out: &mut W, walk: &Walk, r: f64, index: u64) -> io::Result<()> {
    let mut buf = Vec::with_capacity(frame_len(walk.n()));
    buf.extend_from_slice(&(walk.n() as u32).to_le_bytes());
    buf.extend_from_slice(&r.to_le_bytes());
    buf.extend_from_slice(&index.to_le_bytes());
    for v in walk.vertices() {
        for c in v.to_array() {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    out.write_all(&buf)
}

/// Outcome of decoding one frame.
#[derive(Debug)]
pub enum FrameRead {
    Frame(Frame),
    /// Frame was fully read but does not hold a valid walk; reading may continue.
    Corrupt(String),
    /// Stream ended or became unreadable; nothing further can be decoded.
    Truncated(String),
}

/// Sequential frame decoder.
pub struct FrameReader<R> {
    inner: R,
    done: bool,
}

impl<R: Read> FrameReader<R> {
    pub fn new(inner: R) -> Self {
        FrameReader { inner, done: false }
    }
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => break,
            Ok(k) => got += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(got)
}

impl<R: Read> Iterator for FrameReader<R> {
    type Item = FrameRead;

    fn next(&mut self) -> Option<FrameRead> {
        if self.done {
            return None;
        }
        let mut head = [0u8; 20];
        let got = match read_full(&mut self.inner, &mut head) {
            Ok(g) => g,
            Err(e) => {
                self.done = true;
                return Some(FrameRead::Truncated(e.to_string()));
            }
        };
        if got == 0 {
            self.done = true;
            return None;
        }
        if got < head.len() {
            self.done = true;
            return Some(FrameRead::Truncated("partial frame header".into()));
        }
        let n = u32::from_le_bytes(head[0..4].try_into().unwrap());
        let r = f64::from_le_bytes(head[4..12].try_into().unwrap());
        let index = u64::from_le_bytes(head[12..20].try_into().unwrap());
        if !(2..=MAX_FRAME_EDGES).contains(&n) {
            self.done = true;
            return Some(FrameRead::Truncated(format!("implausible edge count {n}")));
        }
        let mut body = vec![0u8; (n as usize + 1) * 24];
        match read_full(&mut self.inner, &mut body) {
            Ok(g) if g == body.len() => {}
            Ok(_) => {
                self.done = true;
                return Some(FrameRead::Truncated("partial frame body".into()));
            }
            Err(e) => {
                self.done = true;
                return Some(FrameRead::Truncated(e.to_string()));
            }
        }
        let vertices: Vec<Vec3> = body
            .chunks_exact(24)
            .map(|c| {
                let f = |k: usize| f64::from_le_bytes(c[k * 8..k * 8 + 8].try_into().unwrap());
                Vec3::new(f(0), f(1), f(2))
            })
            .collect();
        if !(r >= 0.0 && r.is_finite()) {
            return Some(FrameRead::Corrupt(format!("frame {index}: bad radius {r}")));
        }
        match Walk::new(vertices) {
            Ok(walk) => Some(FrameRead::Frame(Frame { r, index, walk })),
            Err(e) => Some(FrameRead::Corrupt(format!("frame {index}: {e}"))),
        }
    }
}
