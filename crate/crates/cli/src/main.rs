use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dicom_annot::dataset::{read_part10, write_part10, DataSet, FileMeta};

mod coords;
mod error;
mod pgm;
mod seg_cmd;
mod spec;
mod sr_cmd;
mod web_cmd;

use error::{fail, io, Category, CliResult};

/// Create, inspect and exchange DICOM Segmentation and Structured Report
/// annotations.
#[derive(Debug, Parser)]
#[command(name = "dicom-annot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a Part 10 file and its SEG or SR module requirements.
    Validate { file: PathBuf },
    /// Print the content tree of a structured report.
    DumpSr { file: PathBuf },
    /// Encode a PGM mask over source images as a Segmentation.
    MkSeg(seg_cmd::MkSeg),
    /// Decode a Segmentation into a PGM label map.
    ParseSeg(seg_cmd::ParseSeg),
    /// Build a measurement report from an annotation spec or a segmentation.
    MkSr(sr_cmd::MkSr),
    /// Convert between pixel and reference coordinates of an image plane.
    Coords(coords::Coords),
    /// Write synthetic source images for trying the other commands.
    Synth(Synth),
    /// Store Part 10 files in a DICOMweb archive (STOW-RS).
    Store(web_cmd::Store),
    /// Retrieve one instance from a DICOMweb archive (WADO-RS).
    Retrieve(web_cmd::Retrieve),
    /// Search a DICOMweb archive (QIDO-RS).
    Search(web_cmd::Search),
    /// Run the in-memory stub archive.
    Serve(web_cmd::Serve),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthKind {
    Ct,
    Slide,
}

#[derive(Debug, Args)]
struct Synth {
    #[arg(value_enum)]
    kind: SynthKind,
    /// Output directory.
    #[arg(short, long)]
    output: PathBuf,
    /// CT slices, or slide tiles across and down.
    #[arg(long, default_value_t = 3)]
    count: usize,
    /// Rows per image; also the square tile size of a slide.
    #[arg(long, default_value_t = 64)]
    rows: u16,
    #[arg(long, default_value_t = 64)]
    columns: u16,
    /// Pixel spacing in mm.
    #[arg(long, default_value_t = 0.7)]
    spacing: f64,
    #[arg(long, default_value = "SYNTH-001")]
    patient_id: String,
}

pub(crate) fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| io(path, e))
}

pub(crate) fn read_dicom(path: &Path) -> CliResult<DataSet> {
    let bytes = read_bytes(path)?;
    read_part10(&bytes)
        .map(|(_, ds)| ds)
        .map_err(|e| fail(Category::Input, format!("{}: {e}", path.display())))
}

pub(crate) fn write_dicom(path: &Path, ds: &DataSet) -> CliResult<()> {
    let bytes = write_part10(&FileMeta::for_dataset(ds), ds).map_err(|e| {
        fail(
            Category::Input,
            format!("cannot encode {}: {e}", path.display()),
        )
    })?;
    write_bytes(path, &bytes)
}

fn validate(file: &Path) -> CliResult<()> {
    let bytes = read_bytes(file)?;
    let ds = read_part10(&bytes)
        .map_err(|e| fail(Category::Validation, format!("{}: {e}", file.display())))?
        .1;
    let issues = dicom_annot::validate::validate(&ds);
    for i in &issues {
        println!("{i}");
    }
    if issues.is_empty() {
        println!("{}: OK", file.display());
        Ok(())
    } else {
        Err(fail(
            Category::Validation,
            format!("{}: {} issue(s)", file.display(), issues.len()),
        ))
    }
}

fn synth(s: &Synth) -> CliResult<()> {
    use dicom_annot::synthetic::{ct_series, slide_image, SyntheticStudy};
    std::fs::create_dir_all(&s.output).map_err(|e| io(&s.output, e))?;
    let study = SyntheticStudy::new(&s.patient_id);
    let images = match s.kind {
        SynthKind::Ct => ct_series(&study, s.count, s.rows, s.columns, s.spacing, s.spacing),
        SynthKind::Slide => {
            let tiles = u16::try_from(s.count).map_err(|_| error::usage("too many tiles"))?;
            vec![slide_image(&study, s.rows, tiles, tiles, s.spacing)]
        }
    };
    for (i, ds) in images.iter().enumerate() {
        let path = s
            .output
            .join(format!("{}{:03}.dcm", kind_prefix(s.kind), i + 1));
        write_dicom(&path, ds)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn kind_prefix(kind: SynthKind) -> &'static str {
    match kind {
        SynthKind::Ct => "ct",
        SynthKind::Slide => "slide",
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate { file } => validate(&file),
        Command::DumpSr { file } => sr_cmd::dump(&file),
        Command::MkSeg(a) => seg_cmd::mk_seg(&a),
        Command::ParseSeg(a) => seg_cmd::parse_seg(&a),
        Command::MkSr(a) => sr_cmd::mk_sr(&a),
        Command::Coords(a) => coords::run(&a),
        Command::Synth(a) => synth(&a),
        Command::Store(a) => web_cmd::store(&a),
        Command::Retrieve(a) => web_cmd::retrieve(&a),
        Command::Search(a) => web_cmd::search(&a),
        Command::Serve(a) => web_cmd::serve(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(|l| l.trim().trim_start_matches("error: "))
                .collect();
            eprint!("{rendered}");
            eprintln!("{}", error::usage(first.join(" ")));
            return ExitCode::from(Category::Usage.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.category.exit_code() as u8)
        }
    }
}
