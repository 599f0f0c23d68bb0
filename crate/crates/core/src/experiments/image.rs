use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::coupling::lattice4_adjacency;
use crate::error::{param_err, Error, Result};
use crate::model::{ModelParams, SpinConfiguration};
use crate::sampler::{mh_sample, MhConfig};
use crate::vb::{bbvi_fit, BbviConfig, FitResult};

/// Binary image; `+1` is black and `-1` white, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageGrid {
    rows: usize,
    cols: usize,
    pixels: Vec<i8>,
}

impl ImageGrid {
    pub fn new(rows: usize, cols: usize, pixels: Vec<i8>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(param_err(format!("image must be at least 2x2, got {rows}x{cols}")));
        }
        if pixels.len() != rows * cols {
            return Err(param_err(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        if let Some(p) = pixels.iter().find(|&&p| p != 1 && p != -1) {
            return Err(param_err(format!("pixel value {p} is not +1 or -1")));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn from_spins(rows: usize, cols: usize, x: &SpinConfiguration) -> Result<Self> {
        Self::new(rows, cols, x.spins().to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[i8] {
        &self.pixels
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.pixels[r * self.cols + c]
    }

    /// Flattened row-major spins, matching the vertex order of the lattice.
    pub fn to_spins(&self) -> SpinConfiguration {
        SpinConfiguration::new(self.pixels.clone()).expect("pixels are validated")
    }

    /// Average pixel value in `[-1, 1]`.
    pub fn mean(&self) -> f64 {
        self.pixels.iter().map(|&p| f64::from(p)).sum::<f64>() / self.pixels.len() as f64
    }

    /// Plain PBM (`P1`), one image row per line, `1` for black.
    pub fn write_pbm<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "P1")?;
        writeln!(out, "{} {}", self.cols, self.rows)?;
        for row in self.pixels.chunks(self.cols) {
            let line: Vec<&str> = row.iter().map(|&p| if p == 1 { "1" } else { "0" }).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    /// Reads a plain PBM (`P1`) image. Comments start with `#`; pixel digits
    /// may or may not be separated by whitespace.
    pub fn read_pbm<R: BufRead>(input: R) -> Result<Self> {
        let mut header: Vec<String> = Vec::new();
        let mut pixels = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("");
            let parse = |msg: String| Error::Parse { line: idx + 1, msg };
            for tok in content.split_whitespace() {
                if header.len() < 3 {
                    header.push(tok.to_string());
                    if header.len() == 1 && header[0] != "P1" {
                        return Err(parse(format!("expected magic P1, got {tok:?}")));
                    }
                    continue;
                }
                for ch in tok.chars() {
                    match ch {
                        '1' => pixels.push(1),
                        '0' => pixels.push(-1),
                        _ => return Err(parse(format!("invalid pixel {ch:?}"))),
                    }
                }
            }
        }
        if header.len() < 3 {
            return Err(Error::Parse {
                line: 0,
                msg: "truncated PBM header".into(),
            });
        }
        let dim = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: 0,
                msg: format!("bad dimension {s:?}: {e}"),
            })
        };
        let cols = dim(&header[1])?;
        let rows = dim(&header[2])?;
        Self::new(rows, cols, pixels)
    }
}

/// Output of [`reconstruct_image`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub image: ImageGrid,
    pub theta_hat: ModelParams,
    pub fit: FitResult,
}

/// Fits `(beta, B)` to an image viewed as one configuration on the
/// four-neighbour lattice, then draws a new image from the fitted model.
pub fn reconstruct_image(img: &ImageGrid, fit: &BbviConfig, sampler: &MhConfig) -> Result<Reconstruction> {
    let a = lattice4_adjacency(img.rows, img.cols)?;
    let x = img.to_spins();
    let result = bbvi_fit(&a, &x, fit)?;
    let theta_hat = result.theta_hat.mc;
    let regenerated = mh_sample(&theta_hat, &a, sampler)?;
    Ok(Reconstruction {
        image: ImageGrid::from_spins(img.rows, img.cols, &regenerated)?,
        theta_hat,
        fit: result,
    })
}
