use std::path::PathBuf;

use clap::{ArgGroup, Args, ValueEnum};
use dicom_annot::common::{AlgorithmIdentification, TrackingIdentifier};
use dicom_annot::dataset::DataSet;
use dicom_annot::geometry::image_geometry;
use dicom_annot::seg::{
    create_seg, label_map, open_seg, segment_pixels, AlgorithmType, FractionalType, SegMeta,
    SegmentDescription, Segmentation, SegmentationType, SourceFrameRef,
};
use ndarray::Array3;

use crate::error::{input, usage, CliResult};
use crate::pgm::Pgm;
use crate::spec::parse_code;
use crate::{read_bytes, read_dicom, write_bytes, write_dicom};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgorithmKind {
    Manual,
    Semiautomatic,
    Automatic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FractionalKind {
    Probability,
    Occupancy,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("encoding").required(true).args(["binary", "fractional"])))]
pub struct MkSeg {
    /// Source images, in the frame order of the mask.
    #[arg(long, num_args = 1.., required = true)]
    source: Vec<PathBuf>,
    /// P5 PGM whose height is frames x rows: one band per source frame.
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    label: String,
    /// Segmented property category, e.g. SCT:MorphologicallyAbnormalStructure.
    #[arg(long)]
    category: String,
    /// Segmented property type, e.g. SCT:Nodule.
    #[arg(long = "type")]
    property_type: String,
    /// Mask samples are 0 or 1.
    #[arg(long)]
    binary: bool,
    /// Mask samples are probabilities scaled by the PGM maxval.
    #[arg(long)]
    fractional: bool,
    #[arg(long, value_enum, default_value_t = FractionalKind::Probability)]
    fractional_type: FractionalKind,
    /// Leave out frames where the segment is empty.
    #[arg(long)]
    omit_empty: bool,
    #[arg(long, value_enum, default_value_t = AlgorithmKind::Manual)]
    algorithm_type: AlgorithmKind,
    #[arg(long, requires = "algorithm_version")]
    algorithm_name: Option<String>,
    #[arg(long, requires = "algorithm_name")]
    algorithm_version: Option<String>,
    /// Anatomic region code.
    #[arg(long)]
    site: Option<String>,
    #[arg(long)]
    tracking_id: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ParseSeg {
    file: PathBuf,
    /// 1-based source frame; all source frames are stacked when omitted.
    #[arg(long)]
    frame: Option<usize>,
    /// Write one segment's pixels (fractional values scaled to 255)
    /// instead of the label map.
    #[arg(long)]
    segment: Option<u16>,
    /// Source images fixing the frame order; otherwise the referenced
    /// instances in the order the segmentation lists them.
    #[arg(long, num_args = 1..)]
    source: Vec<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
}

fn total_frames(sources: &[DataSet]) -> CliResult<(usize, usize, usize)> {
    let mut frames = 0;
    let mut dims = None;
    for s in sources {
        let g = image_geometry(s).map_err(input)?;
        frames += g.frames.len();
        dims.get_or_insert((g.rows, g.columns));
    }
    let (rows, columns) = dims.unwrap_or((0, 0));
    Ok((frames, rows, columns))
}

pub fn mk_seg(a: &MkSeg) -> CliResult<()> {
    let sources = a
        .source
        .iter()
        .map(|p| read_dicom(p))
        .collect::<CliResult<Vec<_>>>()?;
    let (frames, rows, columns) = total_frames(&sources)?;
    let pgm = Pgm::parse(&read_bytes(&a.mask)?)
        .map_err(|e| input(format!("{}: {e}", a.mask.display())))?;
    if pgm.width != columns || pgm.height != frames * rows {
        return Err(input(format!(
            "mask is {}x{}; {frames} source frame(s) of {rows} rows x {columns} columns need {columns}x{}",
            pgm.width,
            pgm.height,
            frames * rows
        )));
    }
    let seg_type = if a.binary {
        if let Some(&v) = pgm.data.iter().find(|&&v| v > 1) {
            return Err(input(format!("binary mask sample {v} is not 0 or 1")));
        }
        SegmentationType::Binary
    } else {
        let kind = match a.fractional_type {
            FractionalKind::Probability => FractionalType::Probability,
            FractionalKind::Occupancy => FractionalType::Occupancy,
        };
        SegmentationType::fractional(kind, 255).map_err(input)?
    };
    let scale = if a.binary { 1.0 } else { f32::from(pgm.maxval) };
    let mask = Array3::from_shape_vec(
        (frames, rows, columns),
        pgm.data.iter().map(|&v| f32::from(v) / scale).collect(),
    )
    .map_err(input)?;

    let algorithm_type = match a.algorithm_type {
        AlgorithmKind::Manual => AlgorithmType::Manual,
        AlgorithmKind::Semiautomatic => AlgorithmType::Semiautomatic,
        AlgorithmKind::Automatic => AlgorithmType::Automatic,
    };
    let mut d = SegmentDescription::new(
        1,
        a.label.clone(),
        parse_code(&a.category).map_err(usage)?,
        parse_code(&a.property_type).map_err(usage)?,
        algorithm_type,
    );
    if let (Some(n), Some(v)) = (&a.algorithm_name, &a.algorithm_version) {
        d = d.with_algorithm(AlgorithmIdentification::new(n, v).map_err(usage)?);
    }
    if let Some(site) = &a.site {
        d.anatomic_site = Some(parse_code(site).map_err(usage)?);
    }
    if let Some(id) = &a.tracking_id {
        d = d.with_tracking(TrackingIdentifier::generate(Some(id.clone())));
    }
    let meta = SegMeta {
        manufacturer: "dicom-annot".into(),
        ..SegMeta::default()
    };
    let seg = create_seg(&sources, &[mask], &[d], seg_type, a.omit_empty, &meta).map_err(input)?;
    write_dicom(&a.output, &seg)
}

/// Source frames in mask order.
fn source_frames(seg: &Segmentation, sources: &[DataSet]) -> CliResult<Vec<SourceFrameRef>> {
    if !sources.is_empty() {
        let mut out = Vec::new();
        for s in sources {
            let g = image_geometry(s).map_err(input)?;
            out.extend(
                g.frames
                    .iter()
                    .map(|f| SourceFrameRef::new(g.sop_instance_uid.clone(), f.frame_number)),
            );
        }
        return Ok(out);
    }
    Ok(seg
        .referenced_instances
        .iter()
        .flat_map(|r| {
            let last = seg
                .frames
                .iter()
                .filter_map(|f| f.source.as_ref())
                .filter(|s| s.sop_instance_uid == r.sop_instance_uid)
                .map(|s| s.frame_number)
                .max()
                .unwrap_or(1);
            (1..=last).map(|n| SourceFrameRef::new(r.sop_instance_uid.clone(), n))
        })
        .collect())
}

pub fn parse_seg(a: &ParseSeg) -> CliResult<()> {
    let ds = read_dicom(&a.file)?;
    let seg = open_seg(&ds).map_err(input)?;
    let sources = a
        .source
        .iter()
        .map(|p| read_dicom(p))
        .collect::<CliResult<Vec<_>>>()?;
    let mut frames = source_frames(&seg, &sources)?;
    if let Some(n) = a.frame {
        let count = frames.len();
        let f = n
            .checked_sub(1)
            .filter(|&i| i < count)
            .ok_or_else(|| usage(format!("frame {n} out of range 1..={count}")))?;
        frames = vec![frames.swap_remove(f)];
    }
    let mut data = Vec::with_capacity(frames.len() * seg.rows * seg.columns);
    match a.segment {
        Some(n) => {
            let px = segment_pixels(&seg, n, &frames).map_err(input)?;
            data.extend(px.iter().map(|&v| (v * 255.0).round() as u8));
            if seg.seg_type == SegmentationType::Binary {
                data.iter_mut().for_each(|v| *v = u8::from(*v != 0));
            }
        }
        None => {
            for f in &frames {
                let map = label_map(&seg, f, None).map_err(input)?;
                for &v in map.iter() {
                    data.push(
                        u8::try_from(v)
                            .map_err(|_| input(format!("segment number {v} exceeds 255")))?,
                    );
                }
            }
        }
    }
    write_bytes(
        &a.output,
        &Pgm::new(seg.columns, frames.len() * seg.rows, data).encode(),
    )
}
