//! Command-line front end.

use crate::backlund::{backlund_potential, invariance_check, GridSpinor};
use crate::bloch::{fermi_slice, kernel_at};
use crate::config::{load_config, RunConfig};
use crate::family::{wbound_of_tau, ClassSource};
use crate::fermi::{
    circle_path, handle_table, trace_branch, willmore_from_handles, willmore_pairing, willmore_residue_fit,
    weak_singularity_report,
};
use crate::lattice::{
    case_for, reduce_to_fundamental, tau_sublattice_map, ConformalClass, HalfPeriodClass, Lattice,
};
use crate::potential::FourierPotential;
use crate::sing::{blowup_polynomials, grouped_table};
use crate::table::{write_table, Cell};
use crate::verify::{run_each, table_form, DEFAULT_SEED};
use crate::weierstrass::{
    conformality_residual, immersion_from_spinor, orbit_slopes, solve_periodicity_combination, willmore_quadrature,
};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "fermilab", version, about = "Fermi curves, Willmore energies and minimizer families")]
pub struct Cli {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV and mesh artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub cutoff: Option<i64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues y-p of the truncated operator at given x-p values.
    FermiSlice {
        #[arg(long, value_parser = parse_complex, num_args = 1.., value_delimiter = ',', allow_hyphen_values = true)]
        xp: Vec<Complex64>,
    },
    /// Follows one sheet around a circle in the x-p plane.
    FermiTrace {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        center: Option<Complex64>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        seed_yp: Option<Complex64>,
    },
    /// Handle moduli for every first-order coupling of the potential.
    Handles,
    /// First integral by several routes.
    Willmore {
        #[arg(long, value_delimiter = ',', default_value = "pairing,residue,handles")]
        methods: Vec<String>,
    },
    /// Lower bound over half-period classes at a conformal class.
    Minbound {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Option<Complex64>,
    },
    /// Singularity sets grouped by Willmore contribution.
    Singtable {
        #[arg(long, default_value_t = 5)]
        max: i64,
    },
    /// Modular reduction and the sublattice map.
    Tau {
        #[command(subcommand)]
        action: TauAction,
    },
    /// Bäcklund transform of an eta-pair potential by the kernel spinor at `k`.
    Backlund,
    /// Weierstrass immersion from a kernel combination, written as a point mesh.
    Immersion,
    /// Runs the acceptance suite.
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum TauAction {
    Reduce {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
    },
    Sublattice {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Complex64,
        /// Half-period class as `r1,r2`.
        #[arg(long, default_value = "1,1")]
        class: String,
    },
}

/// Parses `a+bi`, `bi`, `a`, `i`, `-i` and exponent forms such as `1e-3-2i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {s:?}");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re.is_empty() { 0.0 } else { re.parse::<f64>().map_err(|_| bad())? };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

/// `3.333333i`, `0.5+1.25i`, `-2`.
pub fn format_complex(z: Complex64) -> String {
    let f = |v: f64| {
        let s = format!("{v:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".to_string()
        } else {
            s.to_string()
        }
    };
    let (re, im) = (f(z.re), f(z.im));
    match (re.as_str(), im.as_str()) {
        (r, "0") => r.to_string(),
        ("0", i) => format!("{i}i"),
        (r, i) if i.starts_with('-') => format!("{r}{i}i"),
        (r, i) => format!("{r}+{i}i"),
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl CliError {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        CliError { kind, message: message.to_string() }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind, "message": self.message }).to_string()
    }
}

macro_rules! fail {
    ($kind:literal) => {
        |e| CliError::new($kind, e)
    };
}

struct Ctx {
    cfg: Option<RunConfig>,
    out: PathBuf,
    cutoff: Option<i64>,
    seed: Option<u64>,
    tol: Option<f64>,
}

impl Ctx {
    fn cfg(&self) -> Result<&RunConfig, CliError> {
        self.cfg.as_ref().ok_or_else(|| CliError::new("usage", "this command needs --config"))
    }

    fn lattice(&self) -> Result<Lattice, CliError> {
        match &self.cfg {
            Some(c) => c.lattice().map_err(fail!("config")),
            None => Ok(Lattice::square()),
        }
    }

    fn potential(&self) -> Result<FourierPotential, CliError> {
        self.cfg()?.potential().map_err(fail!("config"))
    }

    fn cutoff(&self) -> i64 {
        self.cutoff.or(self.cfg.as_ref().map(|c| c.cutoff)).unwrap_or(4)
    }

    fn seed(&self) -> u64 {
        self.seed.or(self.cfg.as_ref().map(|c| c.seed)).unwrap_or(DEFAULT_SEED)
    }

    fn tol(&self) -> f64 {
        self.tol.or(self.cfg.as_ref().map(|c| c.tol)).unwrap_or(1e-10)
    }

    fn grid(&self) -> usize {
        self.cfg.as_ref().map(|c| c.grid).unwrap_or(64)
    }

    fn artifact(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out).map_err(fail!("io"))?;
        Ok(self.out.join(name))
    }

    fn table(&self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<PathBuf, CliError> {
        let path = self.artifact(name)?;
        write_table(header, rows, &path).map_err(fail!("io"))?;
        Ok(path)
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("FERMILAB_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::new("env", format!("FERMILAB_THREADS={v:?} is not a count")))?;
        // a second build in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    Ok(())
}

/// Runs one invocation and returns the process exit code; errors go to stderr as JSON.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            eprintln!("{}", CliError::new("usage", e.to_string().trim_end()).to_json());
            return 2;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            1
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    configure_threads()?;
    let cfg = cli.config.as_deref().map(load_config).transpose().map_err(fail!("config"))?;
    let ctx = Ctx { cfg, out: cli.out, cutoff: cli.cutoff, seed: cli.seed, tol: cli.tol };
    if let Some(t) = ctx.tol {
        if !(t > 0.0) {
            return Err(CliError::new("usage", "--tol must be positive"));
        }
    }
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(fail!("io"));
    match cli.command {
        Command::FermiSlice { xp } => {
            let pot = ctx.potential()?;
            let lat = ctx.lattice()?;
            let xs: Vec<Complex64> = if xp.is_empty() {
                ctx.cfg()?.xp.iter().map(|p| Complex64::new(p[0], p[1])).collect()
            } else {
                xp
            };
            if xs.is_empty() {
                return Err(CliError::new("usage", "no x-p values (use --xp or the config's xp list)"));
            }
            let mut rows = Vec::new();
            for x in &xs {
                let vals = fermi_slice(&pot, &lat, *x, ctx.cutoff()).map_err(fail!("bloch"))?;
                for (i, e) in vals.iter().enumerate() {
                    rows.push(vec![
                        Cell::Complex(*x),
                        Cell::from(i),
                        Cell::from(e.block),
                        Cell::Int(e.free_label.0),
                        Cell::Int(e.free_label.1),
                        Cell::Int(e.free_label.2 as i64),
                        Cell::Complex(e.yp),
                    ]);
                }
            }
            let header = ["xp_re", "xp_im", "index", "block", "n1", "n2", "sign", "yp_re", "yp_im"];
            let path = ctx.table("fermi_slice.csv", &header, &rows)?;
            w(out, format!("{} eigenvalues at {} slices -> {}", rows.len(), xs.len(), path.display()))?;
        }
        Command::FermiTrace { center, radius, steps, seed_yp } => {
            let pot = ctx.potential()?;
            let lat = ctx.lattice()?;
            let tc = ctx.cfg()?.trace.clone();
            let center = center.or(tc.as_ref().map(|t| Complex64::new(t.center[0], t.center[1])));
            let radius = radius.or(tc.as_ref().map(|t| t.radius));
            let steps = steps.or(tc.as_ref().map(|t| t.steps)).unwrap_or(96);
            let seed_yp = seed_yp.or(tc.as_ref().map(|t| Complex64::new(t.seed_yp[0], t.seed_yp[1])));
            let (Some(center), Some(radius), Some(seed_yp)) = (center, radius, seed_yp) else {
                return Err(CliError::new("usage", "fermi-trace needs center, radius and seed-yp"));
            };
            let path = circle_path(center, radius, steps);
            let br = trace_branch(&pot, &lat, &path, seed_yp, ctx.cutoff()).map_err(fail!("fermi"))?;
            let rows: Vec<Vec<Cell>> = (0..br.xp.len())
                .map(|i| {
                    vec![
                        Cell::from(i),
                        Cell::Complex(br.xp[i]),
                        Cell::Complex(br.yp[i]),
                        Cell::Real(br.match_distance[i]),
                        Cell::Real(br.local_gap[i]),
                    ]
                })
                .collect();
            let header = ["step", "xp_re", "xp_im", "yp_re", "yp_im", "match_distance", "local_gap"];
            let p = ctx.table("fermi_trace.csv", &header, &rows)?;
            let closed = br.endpoint_mismatch() < ctx.tol().max(1e-8);
            w(
                out,
                format!(
                    "block {}, endpoint mismatch {:.3e}, {} -> {}",
                    br.block,
                    br.endpoint_mismatch(),
                    if closed { "closed" } else { "sheet changed" },
                    p.display()
                ),
            )?;
        }
        Command::Handles => {
            let pot = ctx.potential()?;
            let lat = ctx.lattice()?;
            let hs = handle_table(&pot, &lat, ctx.cutoff()).map_err(fail!("fermi"))?;
            let rows: Vec<Vec<Cell>> = hs
                .iter()
                .map(|h| {
                    vec![
                        Cell::Int(h.kappa.0),
                        Cell::Int(h.kappa.1),
                        Cell::Complex(h.branch_points[0]),
                        Cell::Complex(h.branch_points[1]),
                        Cell::Complex(h.t_value),
                        Cell::Int(h.orientation as i64),
                        Cell::Real(h.refinement_change),
                    ]
                })
                .collect();
            let header = ["n1", "n2", "bp0_re", "bp0_im", "bp1_re", "bp1_im", "t_re", "t_im", "orientation", "refinement"];
            let p = ctx.table("handles.csv", &header, &rows)?;
            let total = willmore_from_handles(&hs, &lat);
            w(out, format!("{} handles, 4 vol sum t = {} -> {}", hs.len(), format_complex(total), p.display()))?;
        }
        Command::Willmore { methods } => {
            let pot = ctx.potential()?;
            let lat = ctx.lattice()?;
            let mut rows = Vec::new();
            for m in &methods {
                let v = match m.as_str() {
                    "pairing" => willmore_pairing(&pot, &lat),
                    "residue" => {
                        let range = ctx.cfg()?.fit_range.map(|r| (r[0], r[1]));
                        willmore_residue_fit(&pot, &lat, ctx.cutoff(), range).map_err(fail!("fermi"))?.willmore
                    }
                    "handles" => {
                        let hs = handle_table(&pot, &lat, ctx.cutoff()).map_err(fail!("fermi"))?;
                        willmore_from_handles(&hs, &lat)
                    }
                    other => return Err(CliError::new("usage", format!("unknown method {other:?}"))),
                };
                w(out, format!("{m} {}", crate::table::format_g(v.re)))?;
                rows.push(vec![Cell::from(m.as_str()), Cell::Complex(v)]);
            }
            ctx.table("willmore.csv", &["method", "w_re", "w_im"], &rows)?;
        }
        Command::Minbound { tau } => {
            let tau = tau.or(ctx.cfg.as_ref().and_then(|c| c.tau())).unwrap_or(Complex64::i());
            let cc = ConformalClass::new(tau).map_err(fail!("lattice"))?;
            let b = wbound_of_tau(cc).map_err(fail!("family"))?;
            let mut rows = Vec::new();
            for cb in &b.classes {
                let src = match cb.source {
                    ClassSource::Genus0 { c } => format!("genus0 c={}", crate::table::format_g(c)),
                    ClassSource::Genus1 { t, s, .. } => {
                        format!("genus1 t={} s={}", crate::table::format_g(t), crate::table::format_g(s))
                    }
                    ClassSource::Genus2 => "genus2".to_string(),
                };
                let value = cb.willmore.map(Cell::Real).unwrap_or(Cell::from(""));
                w(
                    out,
                    format!(
                        "class ({},{}) case {} tau' = {} {src} W = {}",
                        cb.class.r1,
                        cb.class.r2,
                        cb.case,
                        format_complex(cb.tau_prime),
                        cb.willmore.map(crate::table::format_g).unwrap_or_else(|| "-".into())
                    ),
                )?;
                rows.push(vec![
                    Cell::Int(cb.class.r1 as i64),
                    Cell::Int(cb.class.r2 as i64),
                    Cell::from(cb.case),
                    Cell::Complex(cb.tau_prime),
                    Cell::from(src),
                    value,
                ]);
            }
            w(out, format!("w_min = {}", crate::table::format_g(b.w_min)))?;
            let header = ["r1", "r2", "case", "tau_prime_re", "tau_prime_im", "source", "willmore"];
            ctx.table("minbound.csv", &header, &rows)?;
        }
        Command::Singtable { max } => {
            if max < 1 {
                return Err(CliError::new("usage", "--max must be at least 1"));
            }
            let mut rows = Vec::new();
            for (mult, m, sets) in grouped_table(max) {
                let forms: Vec<String> = sets.iter().map(table_form).collect();
                w(out, format!("{:>3}pi m={m}: {}", 4 * mult, forms.join(" | ")))?;
                for (s, f) in sets.iter().zip(forms) {
                    let b = blowup_polynomials(s).map_err(fail!("sing"))?;
                    let join = |v: Vec<i64>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                    rows.push(vec![
                        Cell::Int(4 * mult),
                        Cell::from(m),
                        Cell::from(f),
                        Cell::from(join(b.p_i64())),
                        Cell::from(join(b.q_i64())),
                    ]);
                }
            }
            ctx.table("singtable.csv", &["w_sing_over_pi", "m", "set", "p", "q"], &rows)?;
        }
        Command::Tau { action } => match action {
            TauAction::Reduce { tau } => {
                let cc = ConformalClass::new(tau).map_err(fail!("lattice"))?;
                let (r, word) = reduce_to_fundamental(cc);
                w(out, format_complex(r.tau))?;
                w(out, format!("word {}", word.describe()))?;
                let m = word.matrix;
                w(out, format!("matrix [[{}, {}], [{}, {}]]", m[0], m[1], m[2], m[3]))?;
            }
            TauAction::Sublattice { tau, class } => {
                let parts: Vec<i64> = class
                    .split(',')
                    .map(|p| p.trim().parse::<i64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::new("usage", format!("class {class:?} is not r1,r2")))?;
                if parts.len() != 2 {
                    return Err(CliError::new("usage", format!("class {class:?} is not r1,r2")));
                }
                let c = HalfPeriodClass::new(parts[0], parts[1]);
                let cc = ConformalClass::new(tau).map_err(fail!("lattice"))?;
                let (r, _) = reduce_to_fundamental(cc);
                let case = case_for(r.tau, c)
                    .ok_or_else(|| CliError::new("lattice", "no case of the table applies to this class"))?;
                let img = tau_sublattice_map(r, c, case).map_err(fail!("lattice"))?;
                w(
                    out,
                    format!(
                        "case {} tau' = {} genus {:?} corresponds ({},{})",
                        case.label(),
                        format_complex(img.tau_prime.tau),
                        img.genus,
                        img.corresponds.r1,
                        img.corresponds.r2
                    ),
                )?;
            }
        },
        Command::Backlund => {
            let pot = ctx.potential()?;
            let lat = ctx.lattice()?;
            let cfg = ctx.cfg()?;
            let k = cfg.momentum().ok_or_else(|| CliError::new("usage", "backlund needs the generator momentum k"))?;
            let ks = kernel_at(&pot, &lat, k, ctx.cutoff()).map_err(fail!("bloch"))?;
            let first = ks.spinors.first().ok_or_else(|| CliError::new("bloch", "k is not on the Fermi curve"))?;
            let chi = GridSpinor::from_kernel(&lat, first, ctx.grid()).map_err(fail!("backlund"))?;
            let bp = backlund_potential(&pot, &chi, ctx.cutoff()).map_err(fail!("backlund"))?;
            let rows: Vec<Vec<Cell>> = bp
                .potential
                .v_coeffs()
                .iter()
                .map(|(n, c)| vec![Cell::Int(n.0), Cell::Int(n.1), Cell::Complex(*c)])
                .collect();
            let p = ctx.table("backlund.csv", &["n1", "n2", "re", "im"], &rows)?;
            let xs: Vec<Complex64> = if cfg.xp.is_empty() {
                (0..8).map(|j| Complex64::new(0.1 + 0.11 * j as f64, 0.02)).collect()
            } else {
                cfg.xp.iter().map(|p| Complex64::new(p[0], p[1])).collect()
            };
            let radius = cfg.radius.unwrap_or(2.0);
            let rep = invariance_check(&pot, &bp.potential, &lat, &xs, ctx.cutoff(), radius).map_err(fail!("backlund"))?;
            w(
                out,
                format!(
                    "{} coefficients, tail {:.2e}, kernel residual {:.2e}; slice distance {:.3e} {} -> {}",
                    rows.len(),
                    bp.tail_mass,
                    bp.kernel_residual,
                    rep.max_distance,
                    if rep.pass { "invariant" } else { "NOT invariant" },
                    p.display()
                ),
            )?;
            if !rep.pass {
                return Ok(3);
            }
        }
        Command::Immersion => {
            let pot = ctx.potential()?;
            let lat = ctx.lattice()?;
            let cfg = ctx.cfg()?;
            let half = Complex64::new(0.5, 0.0);
            let k = cfg.momentum().unwrap_or([half, half]);
            let ks = kernel_at(&pot, &lat, k, ctx.cutoff()).map_err(fail!("bloch"))?;
            let slopes = match lattice_class(&lat, k) {
                Some(c) if !c.is_zero() && ks.dim() == 4 => {
                    let rep = weak_singularity_report(&pot, &lat, c, ctx.cutoff().min(6)).map_err(fail!("fermi"))?;
                    orbit_slopes(&rep)
                }
                _ => Vec::new(),
            };
            let sol = solve_periodicity_combination(&ks.spinors, &lat, &slopes, ctx.seed()).map_err(fail!("weierstrass"))?;
            let resid = sol.integrals.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if resid > ctx.tol() {
                return Err(CliError::new("weierstrass", format!("periodicity residual {resid:.3e} above --tol")));
            }
            let grid = immersion_from_spinor(&sol.spinor, &lat, ctx.grid()).map_err(fail!("weierstrass"))?;
            let q = willmore_quadrature(&grid).map_err(fail!("weierstrass"))?;
            let conf = conformality_residual(&grid);
            let mesh = ctx.artifact("mesh.txt")?;
            let file = std::fs::File::create(&mesh).map_err(fail!("io"))?;
            grid.write_mesh(std::io::BufWriter::new(file)).map_err(fail!("io"))?;
            let pairing = willmore_pairing(&pot, &lat).re;
            let rows = vec![
                vec![Cell::from("kernel_dim"), Cell::from(ks.dim())],
                vec![Cell::from("periodicity_residual"), Cell::Real(resid)],
                vec![Cell::from("conformality_residual"), Cell::Real(conf)],
                vec![Cell::from("willmore_quadrature"), Cell::Real(q.integral)],
                vec![Cell::from("willmore_pairing"), Cell::Real(pairing)],
                vec![Cell::from("area"), Cell::Real(q.area)],
                vec![Cell::from("grid"), Cell::from(grid.n)],
            ];
            ctx.table("immersion.csv", &["quantity", "value"], &rows)?;
            w(
                out,
                format!(
                    "kernel dim {}, residual {:.2e}, conformality {:.2e}, W = {} (pairing {}) -> {}",
                    ks.dim(),
                    resid,
                    conf,
                    crate::table::format_g(q.integral),
                    crate::table::format_g(pairing),
                    mesh.display()
                ),
            )?;
        }
        Command::Verify => {
            let mut io_err = None;
            let results = run_each(ctx.seed(), |c| {
                if let Err(e) = writeln!(out, "{}", c.line()) {
                    io_err = Some(e);
                }
            });
            if let Some(e) = io_err {
                return Err(CliError::new("io", e));
            }
            let failed = results.iter().filter(|c| !c.pass).count();
            w(out, format!("{} passed, {failed} failed", results.len() - failed))?;
            return Ok(if failed == 0 { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// Half-period class of a real momentum in `½Λ*`, if it is one.
fn lattice_class(lat: &Lattice, k: [Complex64; 2]) -> Option<HalfPeriodClass> {
    if k.iter().any(|c| c.im.abs() > 1e-12) {
        return None;
    }
    let (a, b) = lat.quasi_momenta(k);
    let r = [2.0 * a.re, 2.0 * b.re];
    if r.iter().any(|v| (v - v.round()).abs() > 1e-9) {
        return None;
    }
    Some(HalfPeriodClass::new(r[0].round() as i64, r[1].round() as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parser_forms() {
        let c = Complex64::new;
        assert_eq!(parse_complex("5+0.3i").unwrap(), c(5.0, 0.3));
        assert_eq!(parse_complex("3i").unwrap(), c(0.0, 3.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("1e-3-2i").unwrap(), c(1e-3, -2.0));
        assert_eq!(parse_complex(" -0.5 + 1.5e1i ").unwrap(), c(-0.5, 15.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(Complex64::new(0.0, 10.0 / 3.0)), "3.333333i");
        assert_eq!(format_complex(Complex64::new(0.5, -1.25)), "0.5-1.25i");
        assert_eq!(format_complex(Complex64::new(-2.0, 0.0)), "-2");
    }
}
