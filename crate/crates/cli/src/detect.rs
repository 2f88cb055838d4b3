use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use landing_core::imaging::pgm::load_pgm;
use landing_core::imaging::GrayImage;
use landing_core::vision::{detect_sequence, PipelineConfig};

use crate::error::{CliError, CliResult};
use crate::render::FrameRow;

/// A frame that could not be used, with the reason.
#[derive(Debug)]
pub struct SkippedFrame {
    pub path: PathBuf,
    pub error: CliError,
}

#[derive(Debug, Default)]
pub struct DetectReport {
    pub rows: Vec<FrameRow>,
    pub skipped: Vec<SkippedFrame>,
}

/// PGM files of `dir` in name order.
pub fn list_frames(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Runs the detector on consecutive pairs of readable frames. Row
/// `frame_index` is the position of the later frame of the pair in the
/// sorted listing. Unreadable frames are reported and skipped.
pub fn cmd_detect(dir: &Path, pipeline: &PipelineConfig) -> CliResult<DetectReport> {
    pipeline.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut report = DetectReport::default();
    let mut frames: Vec<(usize, PathBuf)> = Vec::new();
    let mut images: Vec<GrayImage> = Vec::new();
    for (k, path) in list_frames(dir)?.into_iter().enumerate() {
        match load_pgm(&path) {
            Ok(img) => {
                frames.push((k, path));
                images.push(img);
            }
            Err(e) => report.skipped.push(SkippedFrame {
                error: CliError::file(&path, e),
                path,
            }),
        }
    }
    for (pair, res) in detect_sequence(&images, pipeline).into_iter().enumerate() {
        let (k, path) = &frames[pair + 1];
        match res {
            Ok(obs) => report.rows.push(FrameRow::new(*k, &obs)),
            Err(e) => report.skipped.push(SkippedFrame {
                path: path.clone(),
                error: CliError::file(path, e),
            }),
        }
    }
    Ok(report)
}

/// Writes `frame_index,found,dx,dy` rows.
pub fn write_frame_rows<W: Write>(w: W, rows: &[FrameRow]) -> Result<(), csv::Error> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    writer.write_record(["frame_index", "found", "dx", "dy"])?;
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}
