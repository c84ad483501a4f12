use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nrsel::boundary::{build_boundary_atlas, BoundaryAtlas, Degenerate, SplitDegree};
use nrsel::continuity::classify_continuity;
use nrsel::linalg::CVector;
use nrsel::oracle::{compare_resolutions, openness_probe};
use nrsel::selection::{select_with_atlas, SelectionField};
use nrsel::{ComplexMatrix, ToleranceConfig, C64};
use rayon::prelude::*;

use crate::error::{exit, CliError, CliResult};
use crate::json::{fmt_f64, to_csv, to_json, write_file};
use crate::matrix_file::MatrixFile;
use crate::output::*;

/// Largest `|‖g‖ − 1|` accepted for a stored vector.
pub const NORM_TOL: f64 = 1e-10;
/// Jump between grid neighbours treated as a discontinuity when it does
/// not shrink at the finer spacing.
pub const JUMP_FLOOR: f64 = 0.25;

#[derive(Debug, Parser)]
#[command(name = "nrsel", version, about = "Numerical range boundaries and continuous inverse selections")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Seed for randomized steps.
    #[arg(long, global = true, env = "NRSEL_SEED")]
    pub seed: Option<u64>,
    /// Number of intervals of the theta grid.
    #[arg(long, global = true)]
    pub theta_grid: Option<usize>,
    #[arg(long, global = true)]
    pub tol_eig_residual: Option<f64>,
    #[arg(long, global = true)]
    pub tol_crossing: Option<f64>,
    #[arg(long, global = true)]
    pub tol_identical: Option<f64>,
    #[arg(long, global = true, alias = "selection-residual")]
    pub tol_selection_residual: Option<f64>,
    #[arg(long, global = true)]
    pub tol_path_zero: Option<f64>,
}

impl GlobalOpts {
    pub fn config(&self) -> CliResult<ToleranceConfig> {
        let mut c = ToleranceConfig::default();
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(g) = self.theta_grid {
            c.grid_size = g;
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut c.eig_residual, self.tol_eig_residual);
        set(&mut c.crossing_tol, self.tol_crossing);
        set(&mut c.identical_tol, self.tol_identical);
        set(&mut c.selection_residual, self.tol_selection_residual);
        set(&mut c.path_zero, self.tol_path_zero);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Boundary atlas as JSON, boundary samples as CSV.
    Boundary {
        matrix: PathBuf,
        /// Theta grid size (overrides --theta-grid).
        #[arg(long)]
        grid: Option<usize>,
        /// JSON output path; the CSV goes next to it with extension `csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strong and weak continuity failures of the inverse map.
    Classify {
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuous selection evaluated on a square grid.
    Select {
        matrix: PathBuf,
        /// Points per side of the query grid.
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// Radius of the disks excised around weak failures.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the two-resolution continuity audit.
        #[arg(long)]
        no_audit: bool,
    },
    /// Re-checks a selection file against its matrix.
    Verify {
        matrix: PathBuf,
        selection: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip rebuilding the field for the continuity audit.
        #[arg(long)]
        no_audit: bool,
    },
    /// Empirical openness of the inverse map at a boundary point.
    Probe {
        matrix: PathBuf,
        /// Boundary point as `re,im`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: C64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<C64, String> {
    let (re, im) = s.split_once(',').ok_or("expected `re,im`")?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let z = C64::new(p(re)?, p(im)?);
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err("point must be finite".into())
    }
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { exit::INPUT } else { exit::OK };
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "nrsel: {e}");
            e.code
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let mut cfg = cli.global.config()?;
    match &cli.command {
        Command::Boundary { matrix, grid, out } => {
            if let Some(g) = grid {
                cfg.grid_size = *g;
                cfg.validate()?;
            }
            cmd_boundary(matrix, &cfg, out.as_deref(), stdout, stderr)
        }
        Command::Classify { matrix, out } => cmd_classify(matrix, &cfg, out.as_deref(), stdout),
        Command::Select {
            matrix,
            grid,
            epsilon,
            out,
            no_audit,
        } => cmd_select(matrix, &cfg, *grid, *epsilon, !no_audit, out.as_deref(), stdout, stderr),
        Command::Verify {
            matrix,
            selection,
            out,
            no_audit,
        } => cmd_verify(matrix, selection, &cfg, !no_audit, out.as_deref(), stdout, stderr),
        Command::Probe { matrix, point, out } => cmd_probe(matrix, &cfg, *point, out.as_deref(), stdout),
    }
}

fn emit(out: Option<&Path>, json: &[u8], csv: Option<&[u8]>, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => {
            write_file(p, json)?;
            if let Some(c) = csv {
                write_file(&p.with_extension("csv"), c)?;
            }
        }
        None => stdout.write_all(json)?,
    }
    Ok(())
}

fn load(path: &Path) -> CliResult<(MatrixFile, ComplexMatrix)> {
    let f = MatrixFile::load(path)?;
    let a = f.matrix()?;
    Ok((f, a))
}

fn unresolved(atlas: &BoundaryAtlas) -> Option<f64> {
    atlas
        .exceptional
        .iter()
        .find(|e| e.involves_max && e.split_degree == SplitDegree::Unresolved)
        .map(|e| e.theta)
}

pub fn cmd_boundary(
    path: &Path,
    cfg: &ToleranceConfig,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<i32> {
    let (file, a) = load(path)?;
    let atlas = build_boundary_atlas(&a, cfg)?;
    let json = to_json(&AtlasView::new(&file, &atlas))?;
    let header: Vec<String> = ["theta", "re", "im", "arc_id", "arc_kind"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = atlas
        .boundary_samples()
        .iter()
        .map(|s| {
            let kind = atlas.arcs.get(s.arc).map_or(atlas.degenerate_kind(), |a| a.kind());
            vec![fmt_f64(s.theta), fmt_f64(s.z.re), fmt_f64(s.z.im), s.arc.to_string(), kind.to_string()]
        })
        .collect();
    emit(out, &json, Some(&to_csv(&header, &rows)), stdout)?;
    if let Some(theta) = unresolved(&atlas) {
        writeln!(stderr, "nrsel: split degree at theta = {} could not be resolved", fmt_f64(theta))?;
        return Ok(exit::UNRESOLVED);
    }
    Ok(exit::OK)
}

pub fn cmd_classify(path: &Path, cfg: &ToleranceConfig, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<i32> {
    let (file, a) = load(path)?;
    let atlas = build_boundary_atlas(&a, cfg)?;
    let report = classify_continuity(&atlas)?;
    emit(out, &to_json(&ClassifyView::new(&file, &report))?, None, stdout)?;
    Ok(exit::OK)
}

/// Query points `(i, j, z)`: an `m × m` lattice over the bounding box of
/// the boundary, or `m` points along a degenerate segment.
pub fn query_grid(field: &SelectionField, m: usize) -> Vec<(i64, i64, C64)> {
    let atlas = field.atlas();
    match &atlas.degenerate {
        Degenerate::Point { z } => vec![(0, 0, *z)],
        Degenerate::Segment { a, b } => {
            let k = m.max(2);
            (0..k)
                .map(|i| (i as i64, 0, *b + (*a - *b) * (i as f64 / (k - 1) as f64)))
                .collect()
        }
        Degenerate::Full => {
            let pts = atlas.boundary_samples();
            let (mut lo, mut hi) = (pts[0].z, pts[0].z);
            for p in &pts {
                lo = C64::new(lo.re.min(p.z.re), lo.im.min(p.z.im));
                hi = C64::new(hi.re.max(p.z.re), hi.im.max(p.z.im));
            }
            let k = m.max(2);
            let step = |d: f64| d / (k - 1) as f64;
            let (hx, hy) = (step(hi.re - lo.re), step(hi.im - lo.im));
            let mut out = Vec::with_capacity(k * k);
            for i in 0..k {
                for j in 0..k {
                    out.push((i as i64, j as i64, lo + C64::new(i as f64 * hx, j as f64 * hy)));
                }
            }
            out
        }
    }
}

pub fn evaluate_grid(field: &SelectionField, m: usize) -> (Vec<GridPoint>, usize) {
    let a = field.matrix();
    let res: Vec<Option<GridPoint>> = query_grid(field, m)
        .into_par_iter()
        .map(|(i, j, z)| {
            if !field.in_domain(z) {
                return None;
            }
            let g = field.evaluate(z).ok()?;
            Some(GridPoint {
                i,
                j,
                z: pair(z),
                residual: (a.quad(&g) - z).norm(),
                g: components(&g),
            })
        })
        .collect();
    let skipped = res.iter().filter(|p| p.is_none()).count();
    (res.into_iter().flatten().collect(), skipped)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_select(
    path: &Path,
    cfg: &ToleranceConfig,
    grid: usize,
    epsilon: Option<f64>,
    audit: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<i32> {
    if grid == 0 {
        return Err(CliError::input("--grid must be positive"));
    }
    if let Some(e) = epsilon {
        if !(e.is_finite() && e > 0.0) {
            return Err(CliError::input("--epsilon must be positive"));
        }
    }
    let (file, a) = load(path)?;
    let atlas = build_boundary_atlas(&a, cfg)?;
    let field = select_with_atlas(&atlas, epsilon)?;
    let (points, skipped) = evaluate_grid(&field, grid);
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let max_norm_deviation = points.iter().map(|p| (norm(&p.g) - 1.0).abs()).fold(0.0, f64::max);
    let audit = audit.then(|| AuditView::from(&compare_resolutions(&field)));
    let (z0, _) = field.base();
    let sel = SelectionFile {
        matrix: file,
        config: *cfg,
        strategy: field.strategy().as_str().to_string(),
        epsilon: if field.bridges().is_empty() { None } else { epsilon },
        grid,
        base: pair(z0),
        excised: field
            .excised()
            .into_iter()
            .map(|(c, r)| Excised { center: pair(c), radius: r })
            .collect(),
        summary: SelectionSummary {
            points: points.len(),
            skipped,
            max_residual,
            max_norm_deviation,
            tolerance: field.tolerance(),
            audit,
        },
        points,
    };
    let n = sel.matrix.n;
    let mut header: Vec<String> = vec!["re".into(), "im".into()];
    for k in 0..n {
        header.push(format!("g{k}_re"));
        header.push(format!("g{k}_im"));
    }
    header.push("residual".into());
    let rows: Vec<Vec<String>> = sel
        .points
        .iter()
        .map(|p| {
            let mut r = vec![fmt_f64(p.z[0]), fmt_f64(p.z[1])];
            r.extend(p.g.iter().map(|&v| fmt_f64(v)));
            r.push(fmt_f64(p.residual));
            r
        })
        .collect();
    emit(out, &to_json(&sel)?, Some(&to_csv(&header, &rows)), stdout)?;
    if skipped > 0 {
        writeln!(stderr, "nrsel: skipped {skipped} grid points outside the domain")?;
    }
    Ok(exit::OK)
}

fn norm(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn vector(g: &[f64]) -> CVector {
    CVector::from_iterator(g.len() / 2, g.chunks(2).map(|c| C64::new(c[0], c[1])))
}

fn meets_disk(p: C64, q: C64, disks: &[Excised]) -> bool {
    disks.iter().any(|d| {
        let c = C64::new(d.center[0], d.center[1]);
        let e = q - p;
        let s = if e.norm_sqr() > 0.0 {
            (((c - p) * e.conj()).re / e.norm_sqr()).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (p + e * s - c).norm() < d.radius
    })
}

/// Largest jump between stored neighbours `stride` apart in either index.
pub fn grid_jump(sel: &SelectionFile, stride: i64) -> f64 {
    let at: std::collections::HashMap<(i64, i64), &GridPoint> = sel.points.iter().map(|p| ((p.i, p.j), p)).collect();
    let mut worst: f64 = 0.0;
    for p in &sel.points {
        for (di, dj) in [(stride, 0), (0, stride)] {
            if let Some(q) = at.get(&(p.i + di, p.j + dj)) {
                let (zp, zq) = (C64::new(p.z[0], p.z[1]), C64::new(q.z[0], q.z[1]));
                if meets_disk(zp, zq, &sel.excised) {
                    continue;
                }
                worst = worst.max((vector(&p.g) - vector(&q.g)).norm());
            }
        }
    }
    worst
}

pub fn cmd_verify(
    matrix: &Path,
    selection: &Path,
    cfg: &ToleranceConfig,
    audit: bool,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<i32> {
    let (file, a) = load(matrix)?;
    let text = std::fs::read_to_string(selection).map_err(|e| CliError::input(format!("{}: {e}", selection.display())))?;
    let sel: SelectionFile =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", selection.display())))?;
    if sel.matrix.n != file.n || sel.matrix.entries != file.entries {
        return Err(CliError::verification("selection file was computed for a different matrix"));
    }
    let tol = cfg.selection_residual * a.scale();
    let mut max_residual: f64 = 0.0;
    let mut max_norm_deviation: f64 = 0.0;
    let mut worst: Option<(f64, Offender)> = None;
    for p in &sel.points {
        if p.g.len() != 2 * file.n {
            return Err(CliError::verification(format!("grid point ({}, {}) has a vector of the wrong length", p.i, p.j)));
        }
        let z = C64::new(p.z[0], p.z[1]);
        let g = vector(&p.g);
        let residual = (a.quad(&g) - z).norm();
        let dev = (g.norm() - 1.0).abs();
        max_residual = max_residual.max(residual);
        max_norm_deviation = max_norm_deviation.max(dev);
        let badness = (residual / tol).max(dev / NORM_TOL);
        if worst.as_ref().is_none_or(|w| badness > w.0) {
            worst = Some((
                badness,
                Offender {
                    i: p.i,
                    j: p.j,
                    z: p.z,
                    residual,
                    norm_deviation: dev,
                },
            ));
        }
    }
    let grid_jump_fine = grid_jump(&sel, 1);
    let grid_jump_coarse = grid_jump(&sel, 2);
    let jump_ok = grid_jump_fine <= JUMP_FLOOR || grid_jump_fine <= 0.9 * grid_jump_coarse;
    let audit = if audit {
        let field = select_with_atlas(&build_boundary_atlas(&a, cfg)?, sel.epsilon)?;
        Some(AuditView::from(&compare_resolutions(&field)))
    } else {
        None
    };
    let values_ok = max_residual <= tol && max_norm_deviation <= NORM_TOL;
    let passed = values_ok && jump_ok && audit.as_ref().is_none_or(|a| a.passed);
    let view = VerifyView {
        matrix: (&file).into(),
        points: sel.points.len(),
        tolerance: tol,
        max_residual,
        max_norm_deviation,
        worst: worst.map(|w| w.1),
        grid_jump: grid_jump_fine,
        grid_jump_coarse,
        audit,
        passed,
    };
    emit(out, &to_json(&view)?, None, stdout)?;
    if passed {
        return Ok(exit::OK);
    }
    if !values_ok {
        let w = view.worst.as_ref().expect("points exist when a check fails");
        writeln!(
            stderr,
            "nrsel: grid point ({}, {}) at z = ({}, {}) has residual {} and norm deviation {} (tolerance {})",
            w.i,
            w.j,
            fmt_f64(w.z[0]),
            fmt_f64(w.z[1]),
            fmt_f64(w.residual),
            fmt_f64(w.norm_deviation),
            fmt_f64(tol)
        )?;
    } else if !jump_ok {
        writeln!(stderr, "nrsel: neighbouring vectors jump by {} and the jump does not shrink with spacing", fmt_f64(grid_jump_fine))?;
    } else {
        writeln!(stderr, "nrsel: continuity audit of the rebuilt field failed")?;
    }
    Ok(exit::VERIFICATION)
}

pub fn cmd_probe(
    path: &Path,
    cfg: &ToleranceConfig,
    point: C64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<i32> {
    let (file, a) = load(path)?;
    let probe = openness_probe(&a, point, cfg.seed)?;
    emit(out, &to_json(&ProbeView::new(&file, &probe))?, None, stdout)?;
    Ok(exit::OK)
}
