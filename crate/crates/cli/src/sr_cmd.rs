use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, ValueEnum};
use dicom_annot::coding::CodedConcept;
use dicom_annot::common::{AlgorithmIdentification, TrackingIdentifier};
use dicom_annot::roi::{bounding_boxes, connected_components, threshold, Connectivity};
use dicom_annot::seg::{open_seg, segment_pixels};
use dicom_annot::sr::*;
use dicom_annot::uid::generate_uid;
use ndarray::Axis;

use crate::error::{input, usage, CliResult};
use crate::spec::{self, parse_code};
use crate::{read_dicom, write_dicom};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Comprehensive,
    Comprehensive3d,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConnectivityArg {
    #[value(name = "4")]
    Four,
    #[value(name = "8")]
    Eight,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["spec", "from_seg"])))]
pub struct MkSr {
    /// Annotation spec (TOML).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Derive one planar bounding-box group per connected region of each
    /// segmentation frame.
    #[arg(long)]
    from_seg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Kind::Comprehensive3d)]
    kind: Kind,
    /// Foreground threshold on segment values (inclusive).
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = ConnectivityArg::Eight)]
    connectivity: ConnectivityArg,
    /// Procedure reported, for --from-seg.
    #[arg(long, default_value = "SCT:ImagingProcedure")]
    procedure: String,
    #[arg(short, long)]
    output: PathBuf,
}

fn kind(k: Kind) -> SrDocumentKind {
    match k {
        Kind::Comprehensive => SrDocumentKind::Comprehensive,
        Kind::Comprehensive3d => SrDocumentKind::Comprehensive3d,
    }
}

fn meta(series_description: Option<String>) -> SrDocumentMeta {
    SrDocumentMeta {
        manufacturer: "dicom-annot".into(),
        series_description,
        ..SrDocumentMeta::default()
    }
}

pub fn mk_sr(a: &MkSr) -> CliResult<()> {
    let doc = match (&a.spec, &a.from_seg) {
        (Some(path), _) => from_spec(path, kind(a.kind))?,
        (None, Some(path)) => from_seg(path, a)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    write_dicom(&a.output, &doc)
}

fn from_spec(path: &Path, kind: SrDocumentKind) -> CliResult<dicom_annot::dataset::DataSet> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::io(path, e))?;
    let spec = spec::parse(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let evidence = spec
        .evidence_paths(base)
        .iter()
        .map(|p| read_dicom(p))
        .collect::<CliResult<Vec<_>>>()?;
    let tree = spec
        .build(&evidence)
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    create_sr(
        kind,
        &evidence,
        &tree,
        &meta(spec.series_description.clone()),
    )
    .map_err(input)
}

fn from_seg(path: &Path, a: &MkSr) -> CliResult<dicom_annot::dataset::DataSet> {
    if a.kind != Kind::Comprehensive3d {
        return Err(usage(
            "--from-seg writes SCOORD3D regions and needs --kind comprehensive3d",
        ));
    }
    let ds = read_dicom(path)?;
    let seg = open_seg(&ds).map_err(input)?;
    let for_uid = seg
        .frame_of_reference_uid
        .clone()
        .ok_or_else(|| input("segmentation has no FrameOfReferenceUID"))?;
    let connectivity = match a.connectivity {
        ConnectivityArg::Four => Connectivity::Four,
        ConnectivityArg::Eight => Connectivity::Eight,
    };
    let mut groups = Vec::new();
    for record in &seg.frames {
        let Some(source) = &record.source else {
            continue;
        };
        let pixels = segment_pixels(&seg, record.segment_number, std::slice::from_ref(source))
            .map_err(input)?;
        let mask = threshold(pixels.index_axis(Axis(0), 0), a.threshold).map_err(usage)?;
        let components = connected_components(&mask, connectivity);
        if components.count == 0 {
            continue;
        }
        let mapper = seg.geometry.mapper(record.number).map_err(input)?;
        let description = seg
            .description(record.segment_number)
            .expect("open_seg checks frame segments");
        for b in bounding_boxes(&components) {
            let points = b
                .to_reference_polygon(&mapper)
                .into_iter()
                .map(|p| p.map(|v| v as f32))
                .collect();
            let region = Scoord3d::new(GraphicType3D::Polygon, points, &for_uid).map_err(input)?;
            let label = format!("{} {}", description.label, groups.len() + 1);
            let mut content = GroupContent::new(
                TrackingIdentifier::generate(Some(label)),
                description.property_type.clone(),
            );
            content.finding_sites = description.anatomic_site.iter().cloned().collect();
            let group =
                build_planar_roi_group(&content, &[Region::Reference(region)]).map_err(input)?;
            groups.push(group);
        }
    }
    if groups.is_empty() {
        return Err(input(format!(
            "no region reaches threshold {} in {}",
            a.threshold,
            path.display()
        )));
    }
    let mut device = DeviceObserver::new(generate_uid());
    device.name = Some("dicom-annot".into());
    device.algorithm = Some(
        AlgorithmIdentification::new("roi-extract", env!("CARGO_PKG_VERSION"))
            .and_then(|alg| alg.with_parameters(vec![format!("threshold={}", a.threshold)]))
            .map_err(input)?,
    );
    let tree = build_measurement_report(
        &ObserverContext::Device(device),
        &parse_code(&a.procedure).map_err(usage)?,
        groups,
    )
    .map_err(input)?;
    create_sr(SrDocumentKind::Comprehensive3d, &[ds], &tree, &meta(None)).map_err(input)
}

fn concept(c: &CodedConcept) -> String {
    format!("{} ({} {})", c.meaning(), c.scheme(), c.value())
}

fn image_summary(r: &ImageReference) -> String {
    let mut s = r.sop_instance_uid.clone();
    if !r.frame_numbers.is_empty() {
        let frames: Vec<String> = r.frame_numbers.iter().map(u32::to_string).collect();
        let _ = write!(s, " frames {}", frames.join(","));
    }
    if let Some(n) = r.segment_number {
        let _ = write!(s, " segment {n}");
    }
    s
}

fn summary(item: &ContentItem) -> String {
    match &item.value {
        ContentValue::Container { .. } => match &item.template {
            Some(t) => format!("[TID {t}]"),
            None => String::new(),
        },
        ContentValue::Code(c) => format!("= {}", concept(c)),
        ContentValue::Num(n) => format!("= {} {}", n.value.as_str(), n.unit.value()),
        ContentValue::Text(t)
        | ContentValue::UidRef(t)
        | ContentValue::PName(t)
        | ContentValue::DateTime(t) => format!("= {t}"),
        ContentValue::Image(r) | ContentValue::Composite(r) => format!("= {}", image_summary(r)),
        ContentValue::Scoord(s) => format!("= {} {} points", s.graphic_type, s.points.len()),
        ContentValue::Scoord3d(s) => format!(
            "= {} {} points in {}",
            s.graphic_type,
            s.points.len(),
            s.frame_of_reference_uid
        ),
    }
}

fn dump_item(item: &ContentItem, depth: usize, out: &mut String) {
    let _ = write!(out, "{}", "  ".repeat(depth));
    if let Some(r) = item.relationship {
        let _ = write!(out, "{r} ");
    }
    let name = if item.name.meaning().is_empty() {
        item.name.value()
    } else {
        item.name.meaning()
    };
    let _ = writeln!(out, "{} {} {}", item.value_type(), name, summary(item)).map(|_| ());
    for c in &item.children {
        dump_item(c, depth + 1, out);
    }
}

pub fn dump(path: &Path) -> CliResult<()> {
    let ds = read_dicom(path)?;
    let doc = open_sr(&ds).map_err(input)?;
    let mut out = String::new();
    dump_item(&doc.content, 0, &mut out);
    print!("{}", out.replace(" \n", "\n"));
    Ok(())
}
