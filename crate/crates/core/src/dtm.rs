//! ESRI ASCII grid reader and bilinear height interpolation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Behaviour for queries outside the sampled extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtentPolicy {
    /// Use the nearest edge sample.
    #[default]
    Clamp,
    Error,
}

/// Behaviour when a NODATA sample enters an interpolation stencil.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodataPolicy {
    #[default]
    Error,
    Fill(f64),
}

/// Regular height raster. Samples are stored row-major from south to north.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub ncols: usize,
    pub nrows: usize,
    /// Coordinates of the south-west sample.
    pub x0: f64,
    pub y0: f64,
    pub cellsize: f64,
    pub nodata: Option<f64>,
    pub data: Vec<f64>,
    pub extent: ExtentPolicy,
    pub nodata_policy: NodataPolicy,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Reads an ESRI ASCII grid file.
pub fn dtm_load(path: &Path) -> Result<Raster> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_esri_ascii(&text)
}

/// Parses the text of an ESRI ASCII grid.
pub fn parse_esri_ascii(text: &str) -> Result<Raster> {
    let mut ncols = None;
    let mut nrows = None;
    let mut xll: Option<(f64, bool)> = None;
    let mut yll: Option<(f64, bool)> = None;
    let mut cellsize = None;
    let mut nodata = None;
    let mut values = Vec::new();
    let mut header_done = false;
    let mut last_line = 0;

    for (li, line) in text.lines().enumerate() {
        let lineno = li + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let first = trimmed.split_whitespace().next().unwrap_or("");
        if !header_done && first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            let mut it = trimmed.split_whitespace();
            let key = it.next().unwrap_or("").to_ascii_lowercase();
            let col = line.find(|c: char| !c.is_whitespace()).unwrap_or(0) + key.len() + 2;
            let raw = it
                .next()
                .ok_or_else(|| parse_err(lineno, col, format!("missing value for `{key}`")))?;
            let num: f64 = raw
                .parse()
                .map_err(|_| parse_err(lineno, col, format!("invalid number `{raw}` for `{key}`")))?;
            let as_count = |v: f64| -> Result<usize> {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(parse_err(lineno, col, format!("`{key}` must be a positive integer")))
                }
            };
            match key.as_str() {
                "ncols" => ncols = Some(as_count(num)?),
                "nrows" => nrows = Some(as_count(num)?),
                "xllcorner" => xll = Some((num, false)),
                "xllcenter" => xll = Some((num, true)),
                "yllcorner" => yll = Some((num, false)),
                "yllcenter" => yll = Some((num, true)),
                "cellsize" => {
                    if num <= 0.0 {
                        return Err(parse_err(lineno, col, "`cellsize` must be positive"));
                    }
                    cellsize = Some(num)
                }
                "nodata_value" => nodata = Some(num),
                _ => return Err(parse_err(lineno, 1, format!("unknown header key `{key}`"))),
            }
            continue;
        }
        header_done = true;
        let mut offset = 0;
        for tok in line.split_whitespace() {
            let pos = line[offset..].find(tok).map(|p| p + offset).unwrap_or(offset);
            offset = pos + tok.len();
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, pos + 1, format!("invalid sample `{tok}`")))?;
            values.push(v);
        }
    }

    let missing = |k: &str| parse_err(1, 1, format!("missing header key `{k}`"));
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let (xv, xc) = xll.ok_or_else(|| missing("xllcorner"))?;
    let (yv, yc) = yll.ok_or_else(|| missing("yllcorner"))?;
    let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
    if values.len() != ncols * nrows {
        return Err(parse_err(
            last_line,
            1,
            format!("expected {} samples, found {}", ncols * nrows, values.len()),
        ));
    }
    // File rows run north to south; store south to north.
    let mut data = Vec::with_capacity(values.len());
    for r in (0..nrows).rev() {
        data.extend_from_slice(&values[r * ncols..(r + 1) * ncols]);
    }
    let half = 0.5 * cellsize;
    Ok(Raster {
        ncols,
        nrows,
        x0: if xc { xv } else { xv + half },
        y0: if yc { yv } else { yv + half },
        cellsize,
        nodata,
        data,
        extent: ExtentPolicy::default(),
        nodata_policy: NodataPolicy::default(),
    })
}

impl Raster {
    /// Sample at column `c` (west to east) and row `r` (south to north).
    pub fn sample(&self, c: usize, r: usize) -> Result<f64> {
        let v = self.data[r * self.ncols + c];
        if self.nodata == Some(v) {
            return match self.nodata_policy {
                NodataPolicy::Error => Err(Error::NoData { col: c, row: r }),
                NodataPolicy::Fill(f) => Ok(f),
            };
        }
        Ok(v)
    }

    fn locate(&self, x: f64, n: usize, x0: f64) -> (usize, f64) {
        let t = (x - x0) / self.cellsize;
        if n == 1 {
            return (0, 0.0);
        }
        let t = t.clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        (i, t - i as f64)
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        let tol = 1e-9 * self.cellsize;
        let x1 = self.x0 + (self.ncols - 1) as f64 * self.cellsize;
        let y1 = self.y0 + (self.nrows - 1) as f64 * self.cellsize;
        x >= self.x0 - tol && x <= x1 + tol && y >= self.y0 - tol && y <= y1 + tol
    }

    /// Bilinear interpolation of the height at `(x, y)`.
    pub fn bilinear(&self, x: f64, y: f64) -> Result<f64> {
        if self.extent == ExtentPolicy::Error && !self.inside(x, y) {
            return Err(Error::OutOfExtent { x, y });
        }
        let (i, fx) = self.locate(x, self.ncols, self.x0);
        let (j, fy) = self.locate(y, self.nrows, self.y0);
        let i1 = (i + 1).min(self.ncols - 1);
        let j1 = (j + 1).min(self.nrows - 1);
        let s00 = self.sample(i, j)?;
        let s10 = if fx > 0.0 { self.sample(i1, j)? } else { 0.0 };
        let s01 = if fy > 0.0 { self.sample(i, j1)? } else { 0.0 };
        let s11 = if fx > 0.0 && fy > 0.0 { self.sample(i1, j1)? } else { 0.0 };
        Ok((1.0 - fx) * (1.0 - fy) * s00 + fx * (1.0 - fy) * s10 + (1.0 - fx) * fy * s01 + fx * fy * s11)
    }
}

/// Free-function form of [`Raster::bilinear`].
pub fn bilinear(raster: &Raster, x: f64, y: f64) -> Result<f64> {
    raster.bilinear(x, y)
}
