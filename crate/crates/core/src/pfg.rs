//! Portable float grid (PFG) files.
//!
//! A PFG file is one ASCII header line followed by little-endian `f64`
//! samples, interleaved (re, im) for complex data, axis 0 fastest:
//!
//! ```text
//! PFG <n> <d_1 .. d_n> <h_1 .. h_n> <o_1 .. o_n> real|complex [key=value ..]
//! ```
//!
//! Images use their grid directly. Sinograms are stored as a 2-D grid with
//! offsets along axis 0 and directions along axis 1, followed by
//! `sinogram dim=<2|3> dirs=<circle|fibonacci> support=<angular set>`, where
//! the angular set is its config text with spaces removed.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::geometry::AngularSet;
use crate::transform::{DirectionKind, DirectionSet, Grid, Image, OffsetGrid, Sample, Sinogram};
use crate::{Error, Result};

struct Header {
    dims: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    complex: bool,
    extra: HashMap<String, String>,
    tags: Vec<String>,
}

fn write_header<W: Write>(w: &mut W, dims: &[usize], spacing: &[f64], origin: &[f64], complex: bool, extra: &str) -> Result<()> {
    let mut t = vec!["PFG".to_string(), dims.len().to_string()];
    t.extend(dims.iter().map(|d| d.to_string()));
    t.extend(spacing.iter().map(|v| format!("{v:?}")));
    t.extend(origin.iter().map(|v| format!("{v:?}")));
    t.push(if complex { "complex" } else { "real" }.into());
    if !extra.is_empty() {
        t.push(extra.into());
    }
    writeln!(w, "{}", t.join(" "))?;
    Ok(())
}

fn write_values<T: Sample, W: Write>(w: &mut W, values: &[T]) -> Result<()> {
    for v in values {
        let c = v.to_complex();
        w.write_all(&c.re.to_le_bytes())?;
        if T::COMPLEX {
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_header<R: BufRead>(r: &mut R) -> Result<Header> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let mut tok = line.split_whitespace();
    let bad = |m: &str| Error::Format(format!("PFG header: {m}"));
    if tok.next() != Some("PFG") {
        return Err(bad("missing magic `PFG`"));
    }
    let n: usize = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("missing dimension"))?;
    if !(1..=3).contains(&n) {
        return Err(bad(&format!("unsupported dimension {n}")));
    }
    let mut take = |what: &str| -> Result<Vec<String>> {
        (0..n).map(|_| tok.next().map(str::to_string).ok_or_else(|| bad(&format!("missing {what}")))).collect()
    };
    let dims = take("sizes")?
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| bad(&format!("bad size `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let parse_f = |v: Vec<String>| -> Result<Vec<f64>> {
        v.iter().map(|t| t.parse::<f64>().map_err(|_| bad(&format!("bad number `{t}`")))).collect()
    };
    let spacing = parse_f(take("spacing")?)?;
    let origin = parse_f(take("origin")?)?;
    let complex = match tok.next() {
        Some("real") => false,
        Some("complex") => true,
        other => return Err(bad(&format!("expected real|complex, found {other:?}"))),
    };
    let mut extra = HashMap::new();
    let mut tags = Vec::new();
    for t in tok {
        match t.split_once('=') {
            Some((k, v)) => {
                extra.insert(k.to_string(), v.to_string());
            }
            None => tags.push(t.to_string()),
        }
    }
    Ok(Header { dims, spacing, origin, complex, extra, tags })
}

fn read_values<R: Read>(r: &mut R, count: usize, complex: bool) -> Result<Vec<Complex64>> {
    let per = if complex { 2 } else { 1 };
    let mut buf = vec![0u8; count * per * 8];
    r.read_exact(&mut buf).map_err(|e| Error::Format(format!("PFG payload shorter than {count} samples: {e}")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("PFG payload has trailing bytes".into()));
    }
    let f = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    Ok((0..count).map(|k| if complex { Complex64::new(f(2 * k), f(2 * k + 1)) } else { Complex64::new(f(k), 0.0) }).collect())
}

fn narrow<T: Sample>(values: Vec<Complex64>, complex: bool) -> Result<Vec<T>> {
    if complex && !T::COMPLEX {
        return Err(Error::Format("complex PFG data where real data was expected".into()));
    }
    Ok(values.into_iter().map(T::from_complex).collect())
}

pub fn write_image<T: Sample, W: Write>(img: &Image<T>, mut w: W) -> Result<()> {
    let g = &img.grid;
    write_header(&mut w, g.dims(), g.spacing(), g.origin(), T::COMPLEX, "")?;
    write_values(&mut w, &img.values)
}

/// Reads an image; real files load into complex images, the converse is an
/// error.
pub fn read_image<T: Sample, R: BufRead>(mut r: R) -> Result<Image<T>> {
    let h = read_header(&mut r)?;
    if h.tags.iter().any(|t| t == "sinogram") {
        return Err(Error::Format("file holds a sinogram, not an image".into()));
    }
    let grid = Grid::new(&h.dims, &h.spacing, &h.origin)?;
    let values = read_values(&mut r, grid.len(), h.complex)?;
    Image::from_values(&grid, narrow(values, h.complex)?)
}

pub fn write_sinogram<T: Sample, W: Write>(g: &Sinogram<T>, mut w: W) -> Result<()> {
    let n = g.directions.len();
    let (dirs, ddir) = match g.directions.kind() {
        DirectionKind::UniformCircle => ("circle", TAU / n as f64),
        DirectionKind::FibonacciSphere => ("fibonacci", 4.0 * PI / n as f64),
        DirectionKind::Custom => return Err(Error::Unsupported("PFG sinograms need circle or Fibonacci directions".into())),
    };
    let support: String = g.support.to_config_string().chars().filter(|c| !c.is_whitespace()).collect();
    let extra = format!("sinogram dim={} dirs={dirs} support={support}", g.dim());
    let o = &g.offsets;
    write_header(&mut w, &[o.count, n], &[o.spacing, ddir], &[o.start, 0.0], T::COMPLEX, &extra)?;
    write_values(&mut w, &g.values)
}

pub fn read_sinogram<T: Sample, R: BufRead>(mut r: R) -> Result<Sinogram<T>> {
    let h = read_header(&mut r)?;
    if !h.tags.iter().any(|t| t == "sinogram") || h.dims.len() != 2 {
        return Err(Error::Format("file does not hold a sinogram".into()));
    }
    let get = |k: &str| h.extra.get(k).ok_or_else(|| Error::Format(format!("sinogram header lacks `{k}=`")));
    let dim: usize = get("dim")?.parse().map_err(|_| Error::Format("bad `dim=`".into()))?;
    let n = h.dims[1];
    let directions = match get("dirs")?.as_str() {
        "circle" => DirectionSet::uniform_circle(n)?,
        "fibonacci" => DirectionSet::fibonacci_sphere(n)?,
        other => return Err(Error::Format(format!("unknown direction family `{other}`"))),
    };
    if directions.dim() != dim {
        return Err(Error::Format("direction family does not match `dim=`".into()));
    }
    let support = AngularSet::from_config_str(get("support")?)?;
    let offsets = OffsetGrid::new(h.dims[0], h.spacing[0], h.origin[0])?;
    let values = read_values(&mut r, n * h.dims[0], h.complex)?;
    Sinogram::from_values(&directions, &offsets, support, narrow(values, h.complex)?)
}

pub fn save_image<T: Sample>(img: &Image<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_image(img, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_image<T: Sample>(path: &Path) -> Result<Image<T>> {
    read_image(BufReader::new(File::open(path)?))
}

pub fn save_sinogram<T: Sample>(g: &Sinogram<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sinogram(g, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_sinogram<T: Sample>(path: &Path) -> Result<Sinogram<T>> {
    read_sinogram(BufReader::new(File::open(path)?))
}
