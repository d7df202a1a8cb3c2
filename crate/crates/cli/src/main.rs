mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crsf::error::Category;
use crsf::graph::PlanarEmbedding;
use crsf::laplacian::natural_variant;
use crsf::lerw::{
    left_passage_one_hole, two_hole_extraction, two_hole_oracle, two_hole_twisted_mass,
    BoundaryPair,
};
use crsf::oracle::{enumerate_monotone_configs, weighted_sum, weighted_sum_sl2};
use crsf::sampler::Kernel;
use crsf::surface::{
    annulus_spectrum, lattice_path_pgf, monotone_coefficients, torus_coefficients,
};
use crsf::{BundleLaplacian, Connection, Error, LineConnection, Result, Tolerances, Variant, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use input::Input;
use report::{Report, Table};

#[derive(Parser)]
#[command(
    name = "crsf",
    version,
    about = "Bundle Laplacians, cycle-rooted spanning forests and their measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Override a numerical tolerance, e.g. `--tol condition=1e10`. Repeatable.
    #[arg(long = "tol", value_name = "KEY=VALUE", value_parser = parse_tol, global = true)]
    tol: Vec<(String, f64)>,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Source {
    /// Preset graph: cycle:N, path:N, cylinder:MxN, torus:MxN, grid:RxC, chain:K.
    #[arg(long, conflicts_with = "file")]
    preset: Option<String>,
    /// Graph file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Transports {
    /// Monodromy on the preset's generators, in order (`a+bi`). Repeatable.
    #[arg(long, value_parser = input::complex, allow_hyphen_values = true)]
    mono: Vec<C64>,
    /// Laplacian variant; the default depends on the input.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    Weighted,
    Directed,
    Dirichlet,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Standard => Variant::Standard,
            VariantArg::Weighted => Variant::Weighted,
            VariantArg::Directed => Variant::Directed,
            VariantArg::Dirichlet => Variant::Dirichlet,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Determinant (or Q-determinant) of the bundle Laplacian.
    Det {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        transports: Transports,
        /// Also sum over CRSFs by enumeration.
        #[arg(long)]
        oracle: bool,
    },
    /// Exact samples from the CRSF measure of a unitary line connection.
    Sample {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        transports: Transports,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Seed of the random unitary connection used when the input has none.
        #[arg(long, default_value_t = 0)]
        conn_seed: u64,
    },
    /// Multipliers and cycle-count law on an annulus preset.
    Annulus {
        #[command(flatten)]
        source: Source,
        /// Laplacian variant; the default depends on the input.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Homology-class coefficients of the scaling limit on the square torus.
    Torus {
        #[arg(long, default_value_t = 6)]
        j_max: i64,
        #[arg(long, default_value_t = 8)]
        l_max: usize,
        /// Only report `C_jkm / ΣC` for `j,k,m`.
        #[arg(long, value_name = "J,K,M", value_parser = input::class, allow_hyphen_values = true)]
        probability: Option<(i64, i64, usize)>,
    },
    /// Monotone lattice paths on directed tori.
    Lattice {
        /// Homology counts on the `MxN` directed torus.
        #[arg(long, value_name = "MxN")]
        torus: Option<String>,
        /// Compare the counts with exhaustive enumeration.
        #[arg(long)]
        oracle: bool,
        /// Law of the number of diagonal cycles on the `N x N` torus.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Left-passage probabilities of the loop-erased walk around one or two faces.
    Lerw {
        #[command(flatten)]
        source: Source,
        /// Boundary vertex where the walk starts (default 0).
        #[arg(long)]
        z1: Option<usize>,
        /// Boundary vertex where the walk stops (default n − 1).
        #[arg(long)]
        z2: Option<usize>,
        /// A point inside the face, `x,y`. Give once or twice.
        #[arg(long = "face", value_name = "X,Y", value_parser = input::point, allow_hyphen_values = true, required = true)]
        faces: Vec<(f64, f64)>,
        /// Parameter scale for the two-face extraction.
        #[arg(long, default_value_t = 1e-3)]
        u: f64,
        /// Compare with path enumeration over spanning trees.
        #[arg(long)]
        oracle: bool,
    },
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v: f64 = v
        .parse()
        .map_err(|_| format!("cannot read `{v}` as a number"))?;
    Ok((k.trim().to_string(), v))
}

fn tolerances(overrides: &[(String, f64)]) -> Result<Tolerances> {
    let mut tol = Tolerances::DEFAULT;
    for (k, v) in overrides {
        tol.set(k, *v)?;
    }
    Ok(tol)
}

fn load(source: &Source) -> Result<Input> {
    input::load(source.preset.as_deref(), source.file.as_deref())
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Standard => "standard",
        Variant::Weighted => "weighted",
        Variant::Directed => "directed",
        Variant::Dirichlet => "dirichlet",
    }
}

/// The connection from the file, or the trivial one twisted by `--mono` along
/// the preset's generators.
fn connection(inp: &Input, mono: &[C64]) -> Result<Option<Connection>> {
    if mono.is_empty() {
        return Ok(inp.connection.clone());
    }
    if inp.connection.is_some() {
        return Err(Error::Invalid(
            "--mono cannot be combined with transports from the file".into(),
        ));
    }
    let gens = inp
        .preset
        .as_ref()
        .map(|p| p.generators.as_slice())
        .unwrap_or(&[]);
    if mono.len() > gens.len() {
        return Err(Error::Invalid(format!(
            "{} has {} generators, got {} --mono values",
            inp.label,
            gens.len(),
            mono.len()
        )));
    }
    let mut conn = LineConnection::trivial(inp.graph.m());
    for (gen, &z) in gens.iter().zip(mono) {
        conn.multiply_darts(&gen.darts, z);
    }
    Ok(Some(Connection::Line(conn)))
}

fn header(r: &mut Report, inp: &Input) {
    r.set("input", inp.label.as_str());
    r.set("vertices", inp.graph.n());
    r.set("edges", inp.graph.m());
}

fn cmd_det(source: &Source, t: &Transports, oracle: bool, tol: Tolerances) -> Result<Report> {
    let inp = load(source)?;
    let g = &inp.graph;
    let variant = t.variant.map_or_else(|| natural_variant(g), Variant::from);
    let conn = connection(&inp, &t.mono)?
        .unwrap_or_else(|| Connection::Line(LineConnection::trivial(g.m())));
    let mut r = Report::new("det");
    header(&mut r, &inp);
    r.set("variant", variant_name(variant));
    let (det, sum) = match &conn {
        Connection::Line(c) => {
            r.set("bundle", "line");
            let det = BundleLaplacian::line_with(g, c, variant, tol)?.det()?;
            (
                det,
                if oracle {
                    Some(weighted_sum(g, c, variant)?)
                } else {
                    None
                },
            )
        }
        Connection::Sl2(c) => {
            r.set("bundle", "sl2");
            let det = BundleLaplacian::sl2_with(g, c, variant, tol)?.det()?;
            (
                det,
                if oracle {
                    Some(weighted_sum_sl2(g, c, variant)?)
                } else {
                    None
                },
            )
        }
    };
    r.set("det", det);
    if let Some(s) = sum {
        r.set("oracle", s);
        r.set(
            "relative_error",
            (det - s).norm() / det.norm().max(f64::MIN_POSITIVE),
        );
    }
    Ok(r)
}

fn cmd_sample(
    source: &Source,
    t: &Transports,
    seed: u64,
    count: usize,
    conn_seed: u64,
    tol: Tolerances,
) -> Result<Report> {
    let inp = load(source)?;
    let g = &inp.graph;
    let variant = t.variant.map_or(Variant::Weighted, Variant::from);
    let mut r = Report::new("sample");
    header(&mut r, &inp);
    r.set("variant", variant_name(variant));
    let conn = match connection(&inp, &t.mono)? {
        Some(Connection::Line(c)) => {
            r.set("connection", "given");
            c
        }
        Some(Connection::Sl2(_)) => {
            return Err(Error::Invalid("sampling needs a line connection".into()))
        }
        None => {
            r.set("connection", format!("random unitary, seed {conn_seed}"));
            LineConnection::random_unitary(g.m(), &mut ChaCha8Rng::seed_from_u64(conn_seed))
        }
    };
    let kernel = Kernel::new(&BundleLaplacian::line_with(g, &conn, variant, tol)?)?;
    r.set("seed", seed as i64);
    r.set("count", count);
    let mut table = Table::new(
        "samples",
        &["index", "seed", "cycles", "edges", "monodromy_args"],
    );
    for (i, s) in kernel.sample_many(seed, count)?.iter().enumerate() {
        let edges: Vec<String> = s.crsf.edges.iter().map(|e| e.to_string()).collect();
        let args: Vec<f64> = s.monodromies.iter().map(|w| w.arg()).collect();
        table.row(vec![
            i.into(),
            (s.seed as i64).into(),
            s.crsf.cycles.len().into(),
            edges.join(",").into(),
            args.into(),
        ]);
    }
    r.table(table);
    Ok(r)
}

fn cmd_annulus(source: &Source, variant: Option<VariantArg>, tol: Tolerances) -> Result<Report> {
    let inp = load(source)?;
    let preset = inp
        .preset
        .as_ref()
        .ok_or_else(|| Error::Invalid("annulus needs a cylinder or chain preset".into()))?;
    let capacity = preset
        .winding_capacity()
        .ok_or_else(|| Error::Invalid(format!("{} has no known winding capacity", inp.label)))?;
    let variant = variant.map_or_else(|| natural_variant(&inp.graph), Variant::from);
    let s = annulus_spectrum(
        &inp.graph,
        &preset.generators[0].darts,
        capacity,
        variant,
        tol,
    )?;
    let mut r = Report::new("annulus");
    header(&mut r, &inp);
    r.set("capacity", capacity);
    r.set("multipliers", s.multipliers.clone());
    r.set("extra_cycle_probabilities", s.extra_cycle_probabilities());
    r.set("single_cycle_probability", s.single_cycle_probability());
    r.set("reciprocity_defect", s.reciprocity_defect());
    let (d0, d1) = s.double_root_defect();
    r.set("p_at_1", d0);
    r.set("dp_at_1", d1);
    r.set("p_residual", s.p_residual);
    r.set("q_residual", s.q_residual);
    let mut t = Table::new("cycle_count", &["cycles", "interpolated", "bernoulli"]);
    for (k, (a, b)) in s
        .cycle_count_pgf()
        .iter()
        .zip(s.bernoulli_pgf())
        .enumerate()
    {
        t.row(vec![k.into(), (*a).into(), b.into()]);
    }
    r.table(t);
    Ok(r)
}

fn cmd_torus(j_max: i64, l_max: usize, probability: Option<(i64, i64, usize)>) -> Result<Report> {
    if j_max < 1 || l_max < 1 {
        return Err(Error::Invalid(
            "--j-max and --l-max must be positive".into(),
        ));
    }
    let t = torus_coefficients(j_max, l_max);
    let mut r = Report::new("torus");
    r.set("j_max", j_max);
    r.set("l_max", l_max);
    r.set("tail_bound", t.tail_bound);
    r.set("total", t.total());
    match probability {
        Some((j, k, m)) => {
            r.set("class", format!("{j},{k},{m}"));
            r.set("probability", t.probability(j, k, m));
        }
        None => {
            let mut table = Table::new("coefficients", &["j", "k", "m", "c", "probability"]);
            for (&(j, k, m), &c) in &t.coefficients {
                table.row(vec![
                    j.into(),
                    k.into(),
                    m.into(),
                    c.into(),
                    (c / t.total()).into(),
                ]);
            }
            r.table(table);
        }
    }
    Ok(r)
}

fn cmd_lattice(torus: Option<&str>, oracle: bool, n: Option<usize>) -> Result<Report> {
    if torus.is_none() && n.is_none() {
        return Err(Error::Invalid("give --torus MxN, --n N or both".into()));
    }
    let mut r = Report::new("lattice");
    if let Some(spec) = torus {
        let (m, k) = spec
            .split_once('x')
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
            .ok_or_else(|| Error::Invalid(format!("cannot read torus size `{spec}`")))?;
        let c = monotone_coefficients(m, k)?;
        r.set("torus", spec);
        r.set("rounding", c.rounding);
        r.set("residual", c.residual);
        if oracle {
            r.set(
                "oracle_match",
                c.counts == enumerate_monotone_configs(m, k)?,
            );
        }
        let mut t = Table::new("counts", &["j", "k", "count"]);
        for (&(a, b), &v) in &c.counts {
            t.row(vec![a.into(), b.into(), (v as i64).into()]);
        }
        r.table(t);
    }
    if let Some(n) = n {
        let l = lattice_path_pgf(n)?;
        r.set("n", n);
        r.set("mean", l.mean);
        r.set("variance", l.variance);
        r.set("asymptotic_mean", l.asymptotic_mean());
        r.set("asymptotic_variance", l.asymptotic_variance());
        r.set("limit_mean", l.limit_mean);
        r.set("limit_variance", l.limit_variance);
        let mut t = Table::new("pgf", &["cycles", "probability", "exact_series"]);
        for (k, p) in l.pgf.iter().enumerate() {
            let e = l.exact_series.get(k).copied().unwrap_or(0.0);
            // the law has a thin tail; stop once both columns are negligible
            if k > 0 && p.abs() < 1e-15 && e.abs() < 1e-15 {
                break;
            }
            t.row(vec![k.into(), (*p).into(), e.into()]);
        }
        r.table(t);
    }
    Ok(r)
}

fn cmd_lerw(
    source: &Source,
    z1: Option<usize>,
    z2: Option<usize>,
    points: &[(f64, f64)],
    u: f64,
    oracle: bool,
) -> Result<Report> {
    let inp = load(source)?;
    let g = &inp.graph;
    let (z1, z2) = (z1.unwrap_or(0), z2.unwrap_or(g.n().saturating_sub(1)));
    let emb = PlanarEmbedding::new(g)?;
    let faces = points
        .iter()
        .map(|&(x, y)| {
            emb.locate(g, (x, y))
                .ok_or_else(|| Error::Invalid(format!("no bounded face contains ({x}, {y})")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = Report::new("lerw");
    header(&mut r, &inp);
    r.set("z1", z1);
    r.set("z2", z2);
    match *faces.as_slice() {
        [f] => {
            let rep = left_passage_one_hole(g, z1, z2, f)?;
            r.set("face", f);
            r.set("probability_left", rep.probability());
            r.set("limit_route", rep.limit_route);
            r.set("current_route", rep.current_route);
            r.set("route_gap", rep.route_gap());
            r.set("eps", rep.eps.to_vec());
            if oracle {
                let want = BoundaryPair::new(g, z1, z2)?.oracle_left(f)?;
                r.set("oracle", want);
                r.set("error", (rep.probability() - want).abs());
            }
        }
        [f1, f2] => {
            let rep = two_hole_extraction(g, z1, z2, f1, f2, u)?;
            r.set("faces", format!("{f1},{f2}"));
            let names = ["p_ll", "p_lr", "p_rl", "p_rr"];
            for (name, p) in names.iter().zip(rep.probabilities) {
                r.set(name, p);
            }
            r.set("residual", rep.residual);
            r.set("condition", rep.condition);
            r.set("route_gap", rep.route_gap);
            r.set("u", rep.u.to_vec());
            if oracle {
                let want = two_hole_oracle(g, z1, z2, f1, f2)?;
                r.set("oracle", want.to_vec());
                let err = rep
                    .probabilities
                    .iter()
                    .zip(want)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                r.set("error", err);
                r.set("twisted_mass", two_hole_twisted_mass(g, z1, z2, f1, f2)?);
            }
        }
        _ => return Err(Error::Invalid("give one or two --face points".into())),
    }
    Ok(r)
}

fn run(cli: &Cli) -> Result<Report> {
    let tol = tolerances(&cli.tol)?;
    match &cli.command {
        Command::Det {
            source,
            transports,
            oracle,
        } => cmd_det(source, transports, *oracle, tol),
        Command::Sample {
            source,
            transports,
            seed,
            count,
            conn_seed,
        } => cmd_sample(source, transports, *seed, *count, *conn_seed, tol),
        Command::Annulus { source, variant } => cmd_annulus(source, *variant, tol),
        Command::Torus {
            j_max,
            l_max,
            probability,
        } => cmd_torus(*j_max, *l_max, *probability),
        Command::Lattice { torus, oracle, n } => cmd_lattice(torus.as_deref(), *oracle, *n),
        Command::Lerw {
            source,
            z1,
            z2,
            faces,
            u,
            oracle,
        } => cmd_lerw(source, *z1, *z2, faces, *u, *oracle),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        Category::Numeric => 1,
        Category::Input => 2,
        Category::Guard => 3,
    }
}

/// Caps the global pool from `CRSF_THREADS`.
fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("CRSF_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::Invalid(format!(
                "CRSF_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Invalid(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let text = if cli.json {
        report.json()
    } else {
        report.text()
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            // a closed pipe (`crsf ... | head`) is not an error
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: cannot write output: {e}");
                    return ExitCode::from(2);
                }
                _ => {}
            }
        }
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;
    use report::Cell;

    #[test]
    fn tolerance_flag_parses() {
        assert_eq!(
            parse_tol("condition=1e10").unwrap(),
            ("condition".to_string(), 1e10)
        );
        assert!(parse_tol("condition").is_err());
        assert!(tolerances(&[("nope".into(), 1.0)]).is_err());
    }

    #[test]
    fn categories_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Numerical("x".into())), 1);
        assert_eq!(exit_code(&Error::Invalid("x".into())), 2);
        assert_eq!(
            exit_code(&Error::Guard {
                what: "x",
                count: 2.0,
                limit: 1.0
            }),
            3
        );
    }

    #[test]
    fn cells_from_reports() {
        let mut r = Report::new("t");
        r.set("v", Cell::Int(3));
        assert!(r.text().contains("v: 3"));
    }
}
