use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use gifs_core::attractor::{
    box_counts, default_dual_window, default_seeds, dual_iterate, iterate_cover, write_boxcount_csv, write_points_csv,
    POINT_BUDGET,
};
use gifs_core::dimension::{dimension_report, DimOptions, Method};
use gifs_core::gifs::{fixture, parse_spec, FIXTURE_NAMES};
use gifs_core::mixed_space::{Ball, Interval};
use gifs_core::render::{
    emit_dot, figure_covers, fit_range, render_cover, render_figure, ImageSpec, Rgb, DARK_GRAY, LIGHT_GRAY,
};
use gifs_core::verify::{run_all, run_criterion, VerifyOptions};
use gifs_core::{Error, GifsGraph, PadicNumber, ProductBox};

#[derive(Parser)]
#[command(name = "gifs", version, about = "Dimensions and pictures of graph-directed IFS in ℝ^r × ℂ^s × ℚ_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Built-in system: main, boundary-full or boundary
    #[arg(long, conflicts_with = "file")]
    fixture: Option<String>,
    /// JSON system description
    file: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> anyhow::Result<GifsGraph> {
        match (&self.fixture, &self.file) {
            (Some(name), _) => Ok(fixture(name)?),
            (None, Some(path)) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok(parse_spec(&text)?)
            }
            (None, None) => {
                bail!(Error::InvalidArgument(format!("give a system file or --fixture ({})", FIXTURE_NAMES.join(", "))))
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Affinity dimensions and Hausdorff bounds
    Dim {
        #[command(flatten)]
        source: Source,
        /// closed, spectral or partial
        #[arg(long, default_value = "closed")]
        method: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Largest path length of the spectral solver
        #[arg(long, default_value_t = 64)]
        lmax: usize,
        /// Path length of the partial-sum probe
        #[arg(long, default_value_t = 60)]
        len: usize,
        /// Assume the disjointness needed for the lower bound
        #[arg(long)]
        assert_disjoint: bool,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box cover of the attractor as CSV
    Attract {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box counts `m,count,slope` of the whole attractor
    Boxcount {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 9)]
        depth: usize,
        /// Inclusive range `a..b`
        #[arg(long, default_value = "4..9")]
        resolution: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binary PPM picture of the attractor in ℝ × ℚ_p
    Render {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 800)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graphviz DOT of the system graph
    Graph {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Translation sets of the dual iteration as CSV
    Dual {
        #[command(flatten)]
        source: Source,
        /// `lo,hi[,v]`: real range and least p-adic valuation
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long, default_value_t = POINT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks
    Verify {
        /// Run only these criteria (1 to 10)
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Residue of the 2-adic root taken as λ
        #[arg(long, default_value_t = 0)]
        lambda_residue: u32,
    },
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => write_file(path, bytes),
        None => Ok(io::stdout().write_all(bytes)?),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn parse_range(s: &str) -> anyhow::Result<std::ops::RangeInclusive<u32>> {
    let bad = || Error::InvalidArgument(format!("bad resolution range `{s}` (expected a..b)"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
    if a > b {
        bail!(bad());
    }
    Ok(a..=b)
}

fn parse_window(g: &GifsGraph, s: &str) -> anyhow::Result<ProductBox> {
    let bad = || Error::InvalidArgument(format!("bad window `{s}` (expected lo,hi[,v])"));
    let parts: Vec<f64> = s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let (lo, hi, v) = match parts[..] {
        [lo, hi] => (lo, hi, -1.0),
        [lo, hi, v] if v.fract() == 0.0 => (lo, hi, v),
        _ => bail!(bad()),
    };
    let mut w = default_dual_window(g)?;
    w.reals = vec![Interval::new(lo, hi)?; w.reals.len()];
    w.balls = g.signature().primes.iter().map(|&p| Ball::new(&PadicNumber::zero(p, 0), v as i64)).collect();
    Ok(w)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Dim { source, method, tol, lmax, len, assert_disjoint, json, out } => {
            let g = source.load()?;
            let method: Method = method.parse()?;
            let opts = DimOptions { tol, l_max: lmax, partial_len: len, assert_disjoint };
            let report = dimension_report(&g, method, &opts)?;
            let text = if json { serde_json::to_string_pretty(&report.to_json())? + "\n" } else { report.to_table() };
            emit(&out, text.as_bytes())?;
        }
        Command::Attract { source, depth, out } => {
            let g = source.load()?;
            let cover = iterate_cover(&g, &default_seeds(&g), depth)?;
            for k in &cover.invariance_violations {
                eprintln!("warning: edge {k} does not map its seed box into the source seed");
            }
            let mut buf = Vec::new();
            cover.write_csv(&mut buf, &g)?;
            emit(&out, &buf)?;
        }
        Command::Boxcount { source, depth, resolution, out } => {
            let g = source.load()?;
            let range = parse_range(&resolution)?;
            let cover = iterate_cover(&g, &default_seeds(&g), depth)?;
            let all: Vec<ProductBox> = cover.all().cloned().collect();
            let mut buf = Vec::new();
            write_boxcount_csv(&mut buf, &box_counts(&all, range)?)?;
            emit(&out, &buf)?;
        }
        Command::Render { source, depth, width, height, out } => {
            let bytes = if source.fixture.as_deref() == Some("main") {
                render_figure(&figure_covers(depth)?, width, height)?
            } else {
                let g = source.load()?;
                let cover = iterate_cover(&g, &default_seeds(&g), depth)?;
                let (x0, x1) = fit_range(cover.all()).ok_or_else(|| Error::InvalidArgument("empty cover".into()))?;
                let base = g.signature().primes.first().copied().unwrap_or(2) as u64;
                let spec = ImageSpec::new(width, height, x0, x1, base)?;
                let palette: [Rgb; 2] = [DARK_GRAY, LIGHT_GRAY];
                let layers: Vec<(&[ProductBox], Rgb)> =
                    cover.boxes.iter().enumerate().map(|(i, b)| (b.as_slice(), palette[i % 2])).collect();
                render_cover(&layers, &spec)?
            };
            write_file(&out, &bytes)?;
        }
        Command::Graph { source, out } => {
            let g = source.load()?;
            emit(&out, emit_dot(&g).as_bytes())?;
        }
        Command::Dual { source, window, max_iter, budget, out } => {
            let g = source.load()?;
            let w = match window {
                Some(s) => parse_window(&g, &s)?,
                None => default_dual_window(&g)?,
            };
            let pts = dual_iterate(&g, &w, max_iter, budget)?;
            if !pts.stable {
                eprintln!("warning: no fixed point after {} iterations", pts.iterations);
            }
            let mut buf = Vec::new();
            write_points_csv(&mut buf, &pts)?;
            emit(&out, &buf)?;
        }
        Command::Verify { criteria, seed, lambda_residue } => {
            let opts = VerifyOptions { seed, lambda_residue };
            let results = if criteria.is_empty() {
                run_all(&opts)
            } else {
                criteria.iter().map(|&id| run_criterion(id, &opts)).collect::<Result<_, _>>()?
            };
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} passed, {failed} failed", results.len() - failed);
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let hypothesis = e.downcast_ref::<Error>().is_some_and(Error::is_hypothesis_violation);
            ExitCode::from(if hypothesis { 2 } else { 1 })
        }
    }
}
