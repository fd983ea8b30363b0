use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dicom_annot::dataset::{read_part10, write_part10, DataSet, FileMeta};
use dicom_annot::sr::{measurement_groups, open_sr, GroupFilter, GroupKind, RegionGeometry};
use dicom_annot::synthetic::{ct_series, SyntheticStudy};
use dicom_annot_web::{stub_serve, InstanceStore};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dicom-annot"));
    c.env_remove("DICOMWEB_TOKEN");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_dicom(path: &Path, ds: &DataSet) {
    std::fs::write(path, write_part10(&FileMeta::for_dataset(ds), ds).unwrap()).unwrap();
}

fn read_dicom(path: &Path) -> DataSet {
    read_part10(&std::fs::read(path).unwrap()).unwrap().1
}

fn pgm(width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

/// Three 8x8 CT slices written to `dir`.
fn sources(dir: &Path) -> Vec<PathBuf> {
    ct_series(&SyntheticStudy::new("CLI-1"), 3, 8, 8, 0.5, 2.0)
        .iter()
        .enumerate()
        .map(|(i, ds)| {
            let p = dir.join(format!("ct{i}.dcm"));
            write_dicom(&p, ds);
            p
        })
        .collect()
}

fn mk_seg(dir: &Path, srcs: &[PathBuf], mask: &[u8], extra: &[&str]) -> (PathBuf, Output) {
    let mask_path = dir.join("mask.pgm");
    std::fs::write(&mask_path, pgm(8, 8 * srcs.len(), mask)).unwrap();
    let out = dir.join("seg.dcm");
    let mut args = vec!["mk-seg", "--source"];
    args.extend(srcs.iter().map(|p| s(p)));
    args.extend([
        "--mask",
        s(&mask_path),
        "--label",
        "nodule",
        "--category",
        "SCT:MorphologicallyAbnormalStructure",
        "--type",
        "SCT:Nodule",
        "-o",
        s(&out),
    ]);
    args.extend(extra);
    let o = run(&args);
    (out, o)
}

fn two_nodule_mask() -> Vec<u8> {
    let mut m = vec![0u8; 8 * 8 * 3];
    for (r, c) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        m[8 * 8 + r * 8 + c] = 1;
    }
    for (r, c) in [(5, 5), (5, 6), (6, 6)] {
        m[8 * 8 + r * 8 + c] = 1;
    }
    m
}

#[test]
fn mk_seg_output_validates_and_parses_back_exactly() {
    let dir = TempDir::new().unwrap();
    let srcs = sources(dir.path());
    let mask = two_nodule_mask();
    for extra in [&["--binary"][..], &["--binary", "--omit-empty"][..]] {
        let (seg, o) = mk_seg(dir.path(), &srcs, &mask, extra);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let v = run(&["validate", s(&seg)]);
        assert_eq!(code(&v), 0, "{}", stdout(&v));
        let back = dir.path().join("back.pgm");
        let p = run(&["parse-seg", s(&seg), "-o", s(&back)]);
        assert_eq!(code(&p), 0, "{}", stderr(&p));
        assert_eq!(std::fs::read(&back).unwrap(), pgm(8, 24, &mask));
        let one = run(&["parse-seg", s(&seg), "--frame", "2", "-o", s(&back)]);
        assert_eq!(code(&one), 0);
        assert_eq!(std::fs::read(&back).unwrap(), pgm(8, 8, &mask[64..128]));
    }
}

#[test]
fn fractional_mask_round_trips_within_one_step() {
    let dir = TempDir::new().unwrap();
    let srcs = sources(dir.path());
    let mask: Vec<u8> = (0..192).map(|i| (i * 7 % 256) as u8).collect();
    let (seg, o) = mk_seg(dir.path(), &srcs, &mask, &["--fractional"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run(&["validate", s(&seg)])), 0);
    let back = dir.path().join("p.pgm");
    let p = run(&["parse-seg", s(&seg), "--segment", "1", "-o", s(&back)]);
    assert_eq!(code(&p), 0, "{}", stderr(&p));
    assert_eq!(std::fs::read(&back).unwrap(), pgm(8, 24, &mask));
    let label = run(&["parse-seg", s(&seg), "-o", s(&back)]);
    assert_eq!(code(&label), 1);
}

#[test]
fn bad_masks_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let srcs = sources(dir.path());
    let mut mask = vec![0u8; 192];
    mask[3] = 255;
    let (_, o) = mk_seg(dir.path(), &srcs, &mask, &["--binary"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("ERROR input: "), "{}", stderr(&o));
    let (_, o) = mk_seg(dir.path(), &srcs[..2], &[0u8; 192][..128], &["--binary"]);
    assert_eq!(code(&o), 0);
    let (_, o) = mk_seg(dir.path(), &srcs, &[0u8; 192], &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn from_seg_gives_one_planar_group_per_nodule() {
    let dir = TempDir::new().unwrap();
    let srcs = sources(dir.path());
    let (seg, o) = mk_seg(dir.path(), &srcs, &two_nodule_mask(), &["--binary"]);
    assert_eq!(code(&o), 0);
    let sr = dir.path().join("sr.dcm");
    let o = run(&["mk-sr", "--from-seg", s(&seg), "-o", s(&sr)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run(&["validate", s(&sr)])), 0);
    let doc = open_sr(&read_dicom(&sr)).unwrap();
    let groups = measurement_groups(&doc, &GroupFilter::default());
    assert_eq!(groups.len(), 2);
    for g in &groups {
        assert_eq!(g.kind, GroupKind::Planar);
        match &g.regions[..] {
            [RegionGeometry::Reference { points, .. }] => {
                assert_eq!(points.len(), 5);
                assert_eq!(points[0], points[4]);
            }
            other => panic!("{other:?}"),
        }
    }
    let o = run(&[
        "mk-sr",
        "--from-seg",
        s(&seg),
        "--kind",
        "comprehensive",
        "-o",
        s(&sr),
    ]);
    assert_eq!(code(&o), 2);
}

const SPEC: &str = r#"
evidence = ["ct0.dcm", "ct1.dcm"]
procedure = "SCT:ComputedTomography"

[observer]
type = "person"
name = "Doe^Jane"

[[groups]]
kind = "planar"
tracking_id = "nodule 1"
finding = "SCT:Nodule"
finding_sites = ["SCT:Lung"]
image = 2
polygon = [[1, 1], [4, 1], [4, 4], [1, 1]]

[[groups.measurements]]
code = "SCT:Diameter"
value = "4.2"
unit = "mm"

[[groups.evaluations]]
code = "SCT:Morphology"
value = "SCT:Nodule"

[[groups]]
kind = "image"
finding = "SCT:Neoplasm"
images = [1, 2]

[[groups.measurements]]
code = "SCT:Volume"
value = 12.5
unit = "mm3"
"#;

#[test]
fn spec_report_dumps_diameter_in_mm() {
    let dir = TempDir::new().unwrap();
    sources(dir.path());
    let spec = dir.path().join("report.toml");
    std::fs::write(&spec, SPEC).unwrap();
    let sr = dir.path().join("sr.dcm");
    for kind in ["comprehensive", "comprehensive3d"] {
        let o = run(&["mk-sr", "--spec", s(&spec), "--kind", kind, "-o", s(&sr)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert_eq!(code(&run(&["validate", s(&sr)])), 0);
    }
    let dump = stdout(&run(&["dump-sr", s(&sr)]));
    let line = dump.lines().find(|l| l.contains("Diameter")).unwrap();
    assert!(
        line.trim_start()
            .starts_with("CONTAINS NUM Diameter = 4.2 mm"),
        "{line}"
    );
    assert!(dump.contains("NUM Volume = 12.5 mm3"), "{dump}");
    assert!(
        dump.contains("SCOORD Image Region = POLYLINE 4 points"),
        "{dump}"
    );
}

#[test]
fn spec_errors() {
    let dir = TempDir::new().unwrap();
    sources(dir.path());
    let spec = dir.path().join("report.toml");
    let sr = dir.path().join("sr.dcm");
    let three_d = SPEC.replace(
        "[[1, 1], [4, 1], [4, 4], [1, 1]]",
        "[[1, 1, 0], [4, 1, 0], [4, 4, 0], [1, 1, 0]]",
    );
    std::fs::write(&spec, &three_d).unwrap();
    let o = run(&[
        "mk-sr",
        "--spec",
        s(&spec),
        "--kind",
        "comprehensive",
        "-o",
        s(&sr),
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let o = run(&[
        "mk-sr",
        "--spec",
        s(&spec),
        "--kind",
        "comprehensive3d",
        "-o",
        s(&sr),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    std::fs::write(
        &spec,
        SPEC.replace(
            "SCT:Nodule\"\nfinding_sites",
            "SCT:Unheard\"\nfinding_sites",
        ),
    )
    .unwrap();
    let o = run(&["mk-sr", "--spec", s(&spec), "-o", s(&sr)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Unheard"), "{}", stderr(&o));

    std::fs::write(&spec, SPEC.replace("ct1.dcm", "missing.dcm")).unwrap();
    assert_eq!(code(&run(&["mk-sr", "--spec", s(&spec), "-o", s(&sr)])), 3);
}

#[test]
fn validate_reports_problems_with_exit_codes() {
    let dir = TempDir::new().unwrap();
    let junk = dir.path().join("junk.dcm");
    std::fs::write(&junk, b"not dicom").unwrap();
    let o = run(&["validate", s(&junk)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("ERROR validation: "));
    let o = run(&["validate", s(&dir.path().join("absent.dcm"))]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).starts_with("ERROR io: "));

    let srcs = sources(dir.path());
    let (seg, _) = mk_seg(dir.path(), &srcs, &two_nodule_mask(), &["--binary"]);
    let mut ds = read_dicom(&seg);
    ds.remove(dicom_annot::dataset::tags::PATIENT_ID);
    write_dicom(&seg, &ds);
    let o = run(&["validate", s(&seg)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("PatientID"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_2() {
    let o = run(&["mk-sr", "-o", "x.dcm"]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).lines().any(|l| l.starts_with("ERROR usage: ")),
        "{}",
        stderr(&o)
    );
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn coordinates_both_ways() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    std::fs::write(
        &g,
        "position: -100 -50 20\norientation: 1 0 0 0 1 0\nspacing: 0.5 0.25\n",
    )
    .unwrap();
    let o = run(&["coords", "--geometry", s(&g), "--to-ref", "4,2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "-99,-49,20");
    let o = run(&["coords", "--geometry", s(&g), "--to-pixel", "-99,-49,20"]);
    assert_eq!(stdout(&o).trim(), "4,2");
    let o = run(&["coords", "--geometry", s(&g), "--to-pixel", "-99,-49,21"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("off the image plane"));
    let o = run(&["coords", "--geometry", s(&g), "--to-pixel", "1,2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn web_commands_against_the_stub() {
    let dir = TempDir::new().unwrap();
    let srcs = sources(dir.path());
    let (seg, _) = mk_seg(dir.path(), &srcs, &two_nodule_mask(), &["--binary"]);
    let server = stub_serve(InstanceStore::new(), 0).unwrap();
    let url = server.url();

    let mut args = vec!["store", "--url", &url, s(&seg)];
    args.extend(srcs.iter().map(|p| s(p)));
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);

    let o = run(&["search", "--url", &url, "-q", "Modality=SEG"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let records: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 1);

    let ds = read_dicom(&seg);
    let uid = |t| ds.string(t).unwrap().to_string();
    use dicom_annot::dataset::tags;
    let out = dir.path().join("r.dcm");
    let (study, series, sop) = (
        uid(tags::STUDY_INSTANCE_UID),
        uid(tags::SERIES_INSTANCE_UID),
        uid(tags::SOP_INSTANCE_UID),
    );
    let o = run(&[
        "retrieve",
        "--url",
        &url,
        "--study",
        &study,
        "--series",
        &series,
        "--sop",
        &sop,
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&seg).unwrap());

    let o = run(&[
        "retrieve",
        "--url",
        &url,
        "--study",
        &study,
        "--series",
        &series,
        "--sop",
        "1.2.3",
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 4);
    assert!(
        stderr(&o).starts_with("ERROR network: not found"),
        "{}",
        stderr(&o)
    );
    server.stop();

    let o = run(&["search", "--url", &url, "--timeout", "2"]);
    assert_eq!(code(&o), 4);
}
