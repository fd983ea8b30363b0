use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args};
use dicom_annot::spatial::{AffineMapper, PixelSpacing, PlaneGeometry, DEFAULT_TOLERANCE};

use crate::error::{input, io, usage, CliResult};

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("direction").required(true).args(["to_ref", "to_pixel"])))]
pub struct Coords {
    /// Plane description with `position`, `orientation` and `spacing` lines.
    #[arg(long)]
    geometry: PathBuf,
    /// Zero-based pixel center as COLUMN,ROW.
    #[arg(long, value_name = "C,R", allow_hyphen_values = true)]
    to_ref: Option<String>,
    /// Reference point in mm as X,Y,Z.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    to_pixel: Option<String>,
    /// Largest accepted distance from the plane, in mm.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

fn numbers(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c == '\\' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| format!("{what}: {s:?} is not a number"))
        })
        .collect()
}

fn fixed<const N: usize>(text: &str, what: &str) -> Result<[f64; N], String> {
    let v = numbers(text, what)?;
    let n = v.len();
    v.try_into()
        .map_err(|_| format!("{what} needs {N} values, got {n}"))
}

/// Reads `key: values` (or `key = values`) lines; `#` starts a comment.
/// Spacing is row spacing then column spacing, as in PixelSpacing.
pub fn parse_geometry(text: &str) -> Result<PlaneGeometry, String> {
    let (mut position, mut orientation, mut spacing) = (None, None, None);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once([':', '='])
            .ok_or_else(|| format!("line {}: expected key: values", i + 1))?;
        match key.trim().to_ascii_lowercase().as_str() {
            "position" | "imagepositionpatient" => position = Some(fixed::<3>(value, "position")?),
            "orientation" | "imageorientationpatient" => {
                orientation = Some(fixed::<6>(value, "orientation")?)
            }
            "spacing" | "pixelspacing" => spacing = Some(fixed::<2>(value, "spacing")?),
            other => return Err(format!("line {}: unknown key {other:?}", i + 1)),
        }
    }
    let [row, column] = spacing.ok_or("missing spacing")?;
    PlaneGeometry::new(
        position.ok_or("missing position")?,
        orientation.ok_or("missing orientation")?,
        PixelSpacing { row, column },
    )
    .map_err(|e| e.to_string())
}

fn load(path: &Path) -> CliResult<AffineMapper> {
    let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
    let g = parse_geometry(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    AffineMapper::from_geometry(&g).map_err(input)
}

pub fn run(a: &Coords) -> CliResult<()> {
    let mapper = load(&a.geometry)?;
    if let Some(p) = &a.to_ref {
        let [c, r] = fixed::<2>(p, "--to-ref").map_err(usage)?;
        let [x, y, z] = mapper.pixel_to_reference([c, r]);
        println!("{x},{y},{z}");
    } else if let Some(p) = &a.to_pixel {
        let point = fixed::<3>(p, "--to-pixel").map_err(usage)?;
        let [c, r] = mapper
            .reference_to_pixel(point, a.tolerance)
            .map_err(input)?;
        println!("{c},{r}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_file() {
        let g = parse_geometry(
            "# axial\nposition: -100 -100 2.5\nImageOrientationPatient = 1\\0\\0\\0\\1\\0\nspacing: 0.5, 0.7\n",
        )
        .unwrap();
        assert_eq!(g.position, [-100.0, -100.0, 2.5]);
        assert_eq!(
            g.spacing,
            PixelSpacing {
                row: 0.5,
                column: 0.7
            }
        );
        assert!(parse_geometry("position: 0 0 0\n").is_err());
        assert!(parse_geometry("position: 0 0\norientation: 1 0 0 0 1 0\nspacing: 1 1").is_err());
        assert!(parse_geometry("depth: 3").is_err());
    }
}
