//! Conversion of binary sample frames to the text walk format.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{read_frames, sample_files};
use crate::error::{Error, Result};
use crate::io::write_walk_text;

/// Writes every frame under `input` (a sample directory or one `.bin` file)
/// to `out` as concatenated text walks. Returns `(walks, corrupt frames)`.
pub fn export_text(input: &Path, out: &Path) -> Result<(u64, u64)> {
    let paths: Vec<_> = if input.is_dir() {
        sample_files(input)?.into_iter().map(|f| f.path).collect()
    } else if input.is_file() {
        vec![input.to_path_buf()]
    } else {
        return Err(Error::io(input, std::io::ErrorKind::NotFound.into()));
    };
    let file = fs::File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    let (mut walks, mut corrupt) = (0, 0);
    for p in paths {
        let (frames, bad) = read_frames(&p)?;
        corrupt += bad;
        for f in frames {
            write_walk_text(&mut w, &f.walk, f.r).map_err(|e| Error::io(out, e))?;
            walks += 1;
        }
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok((walks, corrupt))
}
