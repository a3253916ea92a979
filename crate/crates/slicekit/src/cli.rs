//! Command-line front end: info, slice, lint, preview, breakeven.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 validation or lint
//! failure.

use crate::estimator::{break_even, estimate_plan, CostModel, Estimate};
use crate::gcode::{emit, lint, parse_gcode, Severity};
use crate::mesh_io::{
    fits_build_volume, mesh_bounds, normalize_placement, parse_stl, validate_mesh, TriangleMesh,
};
use crate::profile::ProfileFile;
use crate::slicer::slice_all;
use crate::svg::{cost_curve_svg, layer_svg};
use crate::toolpath::plan_all;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

/// Environment variable naming the default profile directory.
pub const PROFILE_DIR_ENV: &str = "SLICEKIT_PROFILE_DIR";

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;

#[derive(Parser)]
#[command(name = "slicekit", version, about = "STL slicing and G-code toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Report mesh statistics, bounds, and build-volume fit.
    Info {
        stl_path: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Slice a mesh to G-code and print a build estimate.
    Slice {
        stl_path: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Output G-code path (defaults to the input with .gcode).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Material density override in g/cm^3 (e.g. 1.24 for PLA).
        #[arg(long)]
        density: Option<f64>,
        /// Print the estimate as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Lint a G-code file against machine and profile limits.
    Lint {
        gcode_path: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Print diagnostics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write per-layer SVG previews of contours and toolpaths.
    Preview {
        stl_path: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Output directory for SVG files.
        #[arg(long, short, default_value = "preview")]
        output: PathBuf,
        /// Layer index range `A..B` (inclusive); defaults to all layers.
        #[arg(long)]
        layers: Option<String>,
    },
    /// Tabulate printing versus traditional manufacturing cost.
    Breakeven {
        /// Traditional manufacturing setup cost.
        #[arg(long)]
        setup: f64,
        /// Traditional per-unit cost.
        #[arg(long = "unit-traditional")]
        unit_traditional: f64,
        /// 3D printing per-unit cost.
        #[arg(long = "unit-print")]
        unit_print: f64,
        #[arg(long = "max-units", default_value_t = 300)]
        max_units: u64,
        /// Write the cost-curve SVG here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the full table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

enum CliError {
    Io(String),
    Validation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Validation(m) => m,
        }
    }
}

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Info { stl_path, profile } => cmd_info(&stl_path, profile.as_deref()),
        Command::Slice {
            stl_path,
            profile,
            output,
            density,
            json,
        } => cmd_slice(
            &stl_path,
            profile.as_deref(),
            output.as_deref(),
            density,
            json,
        ),
        Command::Lint {
            gcode_path,
            profile,
            json,
        } => cmd_lint(&gcode_path, profile.as_deref(), json),
        Command::Preview {
            stl_path,
            profile,
            output,
            layers,
        } => cmd_preview(&stl_path, profile.as_deref(), &output, layers.as_deref()),
        Command::Breakeven {
            setup,
            unit_traditional,
            unit_print,
            max_units,
            output,
            csv,
        } => cmd_breakeven(
            setup,
            unit_traditional,
            unit_print,
            max_units,
            output.as_deref(),
            csv.as_deref(),
        ),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn resolve_profile(path: Option<&Path>) -> Result<ProfileFile, CliError> {
    let Some(path) = path else {
        return Ok(ProfileFile::default());
    };
    let candidate = if path.exists() {
        path.to_path_buf()
    } else if let Ok(dir) = std::env::var(PROFILE_DIR_ENV) {
        let fallback = Path::new(&dir).join(path);
        if fallback.exists() {
            fallback
        } else {
            path.to_path_buf()
        }
    } else {
        path.to_path_buf()
    };
    ProfileFile::load(&candidate).map_err(|e| CliError::Io(format!("profile: {e}")))
}

fn load_mesh(path: &Path) -> Result<TriangleMesh, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_stl(&bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_info(stl_path: &Path, profile: Option<&Path>) -> Result<u8, CliError> {
    let profile = resolve_profile(profile)?;
    let mesh = load_mesh(stl_path)?;
    let report = validate_mesh(&mesh);
    let e = report.bounds.extents();
    println!("triangles:            {}", report.triangle_count);
    println!("watertight:           {}", report.is_watertight);
    println!("non-manifold edges:   {}", report.non_manifold_edge_count);
    println!("boundary edges:       {}", report.boundary_edge_count);
    println!("degenerate dropped:   {}", report.degenerate_triangle_count);
    println!("dimension (mm):       {:.2} x {:.2} x {:.2}", e.x, e.y, e.z);
    let fits = fits_build_volume(&report.bounds, &profile.machine);
    let (bx, by, bz) = profile.machine.build_volume;
    if fits {
        println!("build volume:         fits {bx:.0}x{by:.0}x{bz:.0}");
    } else {
        println!("build volume:         does not fit {bx:.0}x{by:.0}x{bz:.0}");
    }
    if !fits || !report.is_watertight {
        return Ok(EXIT_VALIDATION);
    }
    Ok(EXIT_OK)
}

fn print_estimate(estimate: &Estimate, extents: (f64, f64, f64)) {
    println!(
        "Dimension (mm):       {:.1} x {:.1} x {:.1}",
        extents.0, extents.1, extents.2
    );
    println!("Material Usage (gm):  {:.2}", estimate.mass_grams);
    println!("Built Time (min):     {:.1}", estimate.build_time_minutes());
    println!("Filament (mm):        {:.1}", estimate.filament_length_mm);
    println!("Volume (mm^3):        {:.1}", estimate.extruded_volume_mm3);
}

fn slice_pipeline(
    stl_path: &Path,
    profile: &ProfileFile,
) -> Result<
    (
        TriangleMesh,
        crate::slicer::LayerStack,
        crate::toolpath::ToolpathPlan,
    ),
    CliError,
> {
    profile
        .validate()
        .map_err(|e| CliError::Validation(format!("profile: {e}")))?;
    let mesh = load_mesh(stl_path)?;
    let mesh = normalize_placement(&mesh, &profile.machine)
        .map_err(|e| CliError::Validation(format!("placement: {e}")))?;
    let bounds = mesh_bounds(&mesh).map_err(|e| CliError::Validation(format!("bounds: {e}")))?;
    if !fits_build_volume(&bounds, &profile.machine) {
        let e = bounds.extents();
        let (bx, by, bz) = profile.machine.build_volume;
        return Err(CliError::Validation(format!(
            "part {:.1}x{:.1}x{:.1} mm does not fit build volume {bx:.0}x{by:.0}x{bz:.0} mm",
            e.x, e.y, e.z
        )));
    }
    let report = validate_mesh(&mesh);
    if !report.is_watertight {
        eprintln!(
            "warning: mesh is not watertight ({} boundary, {} non-manifold edges); open contours may occur",
            report.boundary_edge_count, report.non_manifold_edge_count
        );
    }
    let stack = slice_all(&mesh, profile.process.layer_height, &profile.machine)
        .map_err(|e| CliError::Validation(format!("slicing: {e}")))?;
    let open: usize = stack.layers.iter().map(|l| l.open_contours).sum();
    if open > 0 {
        eprintln!("warning: {open} open contours dropped during stitching");
    }
    let plan = plan_all(&stack, &profile.process, &profile.machine)
        .map_err(|e| CliError::Validation(format!("toolpath: {e}")))?;
    if plan.collapsed_layers > 0 {
        eprintln!(
            "warning: {} layers vanished under perimeter offsetting",
            plan.collapsed_layers
        );
    }
    Ok((mesh, stack, plan))
}

fn cmd_slice(
    stl_path: &Path,
    profile: Option<&Path>,
    output: Option<&Path>,
    density: Option<f64>,
    json: bool,
) -> Result<u8, CliError> {
    let profile = resolve_profile(profile)?;
    // The flag takes the familiar g/cm^3; estimates run on g/mm^3.
    let density = match density {
        Some(d) if d > 0.0 => d / 1000.0,
        Some(d) => return Err(CliError::Io(format!("density must be positive, got {d}"))),
        None => profile.material.density,
    };
    let (mesh, _stack, plan) = slice_pipeline(stl_path, &profile)?;
    let program = emit(&plan, &profile.process, &profile.machine)
        .map_err(|e| CliError::Validation(format!("emission: {e}")))?;
    let out_path = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| stl_path.with_extension("gcode"));
    write_file(&out_path, &program)?;
    let estimate = estimate_plan(&plan, &profile.process, &profile.machine, density);
    let extents = mesh_bounds(&mesh)
        .map(|b| {
            let e = b.extents();
            (e.x, e.y, e.z)
        })
        .unwrap_or((0.0, 0.0, 0.0));
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&estimate).expect("estimate serializes")
        );
    } else {
        println!("wrote {}", out_path.display());
        print_estimate(&estimate, extents);
    }
    Ok(EXIT_OK)
}

fn cmd_lint(gcode_path: &Path, profile: Option<&Path>, json: bool) -> Result<u8, CliError> {
    let profile = resolve_profile(profile)?;
    let text = std::fs::read_to_string(gcode_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", gcode_path.display())))?;
    let program =
        parse_gcode(&text).map_err(|e| CliError::Io(format!("{}: {e}", gcode_path.display())))?;
    for w in &program.warnings {
        eprintln!("warning: {w}");
    }
    let diags = lint(&program, &profile);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&diags).expect("diagnostics serialize")
        );
    } else {
        for d in &diags {
            println!("{d}");
        }
        println!(
            "{} error(s), {} warning(s)",
            diags
                .iter()
                .filter(|d| d.severity == Severity::Error)
                .count(),
            diags
                .iter()
                .filter(|d| d.severity == Severity::Warning)
                .count()
        );
    }
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Ok(EXIT_VALIDATION);
    }
    Ok(EXIT_OK)
}

fn cmd_preview(
    stl_path: &Path,
    profile: Option<&Path>,
    out_dir: &Path,
    layers: Option<&str>,
) -> Result<u8, CliError> {
    let profile = resolve_profile(profile)?;
    let (_, stack, plan) = slice_pipeline(stl_path, &profile)?;
    let total = stack.layers.len();
    let (lo, hi) = match layers {
        None => (0, total - 1),
        Some(spec) => parse_layer_range(spec)?,
    };
    if lo > hi || hi >= total {
        return Err(CliError::Validation(format!(
            "layer range {lo}..{hi} out of bounds (0..{})",
            total - 1
        )));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let bed = (
        profile.machine.build_volume.0,
        profile.machine.build_volume.1,
    );
    for idx in lo..=hi {
        let layer = &stack.layers[idx];
        let range = plan.layers[idx].move_range;
        let svg = layer_svg(layer, &plan.moves[range.0..range.1], bed);
        let path = out_dir.join(format!("layer_{idx:04}.svg"));
        write_file(&path, &svg)?;
    }
    println!("wrote {} SVG file(s) to {}", hi - lo + 1, out_dir.display());
    Ok(EXIT_OK)
}

fn parse_layer_range(spec: &str) -> Result<(usize, usize), CliError> {
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| CliError::Validation(format!("bad layer range `{spec}`")))
    };
    if let Some((a, b)) = spec.split_once("..") {
        Ok((parse(a)?, parse(b)?))
    } else {
        let v = parse(spec)?;
        Ok((v, v))
    }
}

fn cmd_breakeven(
    setup: f64,
    unit_traditional: f64,
    unit_print: f64,
    max_units: u64,
    output: Option<&Path>,
    csv: Option<&Path>,
) -> Result<u8, CliError> {
    if setup < 0.0 || unit_traditional < 0.0 || unit_print < 0.0 {
        return Err(CliError::Io("costs must be non-negative".into()));
    }
    if max_units < 1 {
        return Err(CliError::Io("max-units must be at least 1".into()));
    }
    let model = CostModel {
        printer_unit_cost: unit_print,
        traditional_setup_cost: setup,
        traditional_unit_cost: unit_traditional,
    };
    let table = break_even(&model, max_units);
    println!("{:>8} {:>14} {:>14}", "units", "printing", "traditional");
    let step = (max_units as usize / 20).max(1);
    for row in table.rows.iter().step_by(step) {
        println!(
            "{:>8} {:>14.2} {:>14.2}",
            row.units, row.printing_cost, row.traditional_cost
        );
    }
    match table.crossover {
        Some(n) => println!("break-even at {n} unit(s)"),
        None => println!("no break-even within {max_units} unit(s)"),
    }
    if let Some(path) = csv {
        write_file(path, &table.to_csv())?;
    }
    if let Some(path) = output {
        write_file(path, &cost_curve_svg(&table))?;
    }
    Ok(EXIT_OK)
}
