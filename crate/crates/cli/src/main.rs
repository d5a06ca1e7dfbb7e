use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use wiggle_core::builder::{load_map, measure_constants, measure_growth, growth_csv, BuildState};
use wiggle_core::covers::{hypothesis_check, minimal_covers, Quadruple};
use wiggle_core::dynamics::{continuum_cover, render, Address, Window};
use wiggle_core::kernel::{build_map, MapKernel};
use wiggle_core::projection::build_projection;
use wiggle_core::tract::{build_boundary, spine};
use wiggle_core::verify::{check_oracle, check_roundtrip, verify_all};
use wiggle_core::{Config, Error, LogPolar, Result, WiggleSpec};

#[derive(Parser)]
#[command(name = "wiggle", version, about = "Wiggle tracts, their half-plane maps and the dynamics of phi")]
struct Cli {
    /// JSON configuration file; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "WIGGLE_OUT")]
    out: Option<PathBuf>,
    /// Gauss nodes per quadrature piece.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Truncation abscissa for boundary dumps.
    #[arg(long, global = true)]
    xmax: Option<f64>,
    /// Largest acceptable eps_map.
    #[arg(long, global = true)]
    eps_target: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tract specs and boundaries.
    #[command(subcommand)]
    Tract(TractCmd),
    /// The conformal map F.
    #[command(subcommand)]
    Map(MapCmd),
    /// The projection phi.
    #[command(subcommand)]
    Phi(PhiCmd),
    /// Minimal covers U_n(Q).
    #[command(subcommand)]
    Un(UnCmd),
    /// Crookedness of minimal covers.
    #[command(subcommand)]
    Crooked(CrookedCmd),
    /// The inductive wiggle builder.
    #[command(subcommand)]
    Build(BuildCmd),
    /// Covers of Julia continua.
    #[command(subcommand)]
    Julia(JuliaCmd),
    /// Sampled checks of the map-level estimates.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Args, Clone)]
struct SpecArg {
    /// Spec file ({"r": [..], "R": [..]}) or inline "r:R,r:R"; straight strip when absent.
    #[arg(long, default_value = "")]
    spec: String,
}

#[derive(Args, Clone)]
struct QuadArg {
    /// Quadruple "A,B,C,D".
    #[arg(long)]
    q: String,
    /// Iterate.
    #[arg(long, default_value_t = 1)]
    n: usize,
}

#[derive(Subcommand)]
enum TractCmd {
    /// Validate and write spec.json.
    Build(SpecArg),
    /// Write the boundary chains as CSV.
    Plot(SpecArg),
    /// Report the first violated constraint.
    Validate(SpecArg),
}

#[derive(Subcommand)]
enum MapCmd {
    /// Build the kernel and write its cache file.
    Build(SpecArg),
    /// F(z), or F^{-1}(w) with --inverse.
    Eval {
        #[command(flatten)]
        spec: SpecArg,
        /// Point "x,y".
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long)]
        inverse: bool,
    },
    /// Round trip, and oracle agreement for the straight strip.
    Selftest(SpecArg),
}

#[derive(Subcommand)]
enum PhiCmd {
    /// CSV of (t, phi(t), err) on a log grid.
    Sample(SpecArg),
    /// Monotone pieces and turning points as JSON.
    Pieces(SpecArg),
}

#[derive(Subcommand)]
enum UnCmd {
    /// Write the family U_n(Q) as JSON.
    Enumerate {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        q: QuadArg,
    },
}

#[derive(Subcommand)]
enum CrookedCmd {
    /// Count crooked intervals of U_n(Q); with --hypothesis search n.
    Check {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        q: QuadArg,
        #[arg(long)]
        hypothesis: bool,
    },
}

#[derive(Subcommand)]
enum BuildCmd {
    /// Run the configured stages from the straight strip.
    Run {
        /// Builder settings file (overrides the config's build section).
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long)]
        stages: Option<usize>,
    },
}

#[derive(Subcommand)]
enum JuliaCmd {
    /// Render covers of depth 0..=depth as PPM, plus a JSON dump.
    Render {
        #[command(flatten)]
        spec: SpecArg,
        /// "prefix;tail", e.g. "1,0;0".
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        address: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// "x0,x1,y0,y1,width,height".
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Every check on the given specs (straight strip when none).
    All {
        #[arg(long = "spec")]
        specs: Vec<String>,
        /// Also run the closeness scan.
        #[arg(long)]
        closeness: bool,
    },
}

fn parse_spec(text: &str) -> Result<WiggleSpec> {
    let t = text.trim();
    if t.is_empty() || t == "straight" {
        return Ok(WiggleSpec::straight());
    }
    let spec = if Path::new(t).is_file() {
        serde_json::from_str(&std::fs::read_to_string(t)?)?
    } else {
        let mut r = Vec::new();
        let mut big_r = Vec::new();
        for pair in t.split(',') {
            let (a, b) = pair.split_once(':').ok_or_else(|| Error::Spec(format!("expected r:R, got {pair:?}")))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Spec(format!("{s:?}: {e}")));
            r.push(num(a)?);
            big_r.push(num(b)?);
        }
        WiggleSpec::new(r, big_r)
    };
    Ok(spec)
}

fn parse_quad(text: &str) -> Result<Quadruple> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Spec(format!("quadruple entry {s:?}: {e}"))))
        .collect::<Result<_>>()?;
    if v.len() != 4 {
        return Err(Error::Spec(format!("a quadruple has four entries, got {text:?}")));
    }
    Quadruple::new(v[0], v[1], v[2], v[3])
}

fn parse_point(text: &str) -> Result<C64> {
    let (a, b) = text.split_once(',').ok_or_else(|| Error::Spec(format!("expected x,y, got {text:?}")))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Spec(format!("{s:?}: {e}")));
    Ok(C64::new(num(a)?, num(b)?))
}

struct Ctx {
    cfg: Config,
}

impl Ctx {
    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.cfg.out_dir)?;
        let p = self.cfg.out_dir.join(name);
        std::fs::write(&p, bytes)?;
        println!("wrote {}", p.display());
        Ok(p)
    }

    fn write_json<T: Serialize>(&self, name: &str, v: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn kernel(&self, spec: &WiggleSpec) -> Result<MapKernel> {
        build_map(spec, &self.cfg.build.kernel)
    }

    fn x_max(&self, spec: &WiggleSpec) -> f64 {
        self.cfg.x_max.unwrap_or(spec.last_right() + 20.0)
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(o) = cli.out {
        cfg.out_dir = o;
    }
    if let Some(n) = cli.resolution {
        cfg.build.kernel.resolution.quad_nodes = n;
    }
    if let Some(e) = cli.eps_target {
        cfg.build.kernel.eps_target = e;
    }
    if cli.xmax.is_some() {
        cfg.x_max = cli.xmax;
    }
    let ctx = Ctx { cfg };
    match cli.cmd {
        Cmd::Tract(TractCmd::Build(s)) => {
            let spec = parse_spec(&s.spec)?.checked()?;
            ctx.write_json("spec.json", &spec)?;
        }
        Cmd::Tract(TractCmd::Plot(s)) => {
            let spec = parse_spec(&s.spec)?;
            let x = ctx.x_max(&spec);
            let b = build_boundary(&spec, x)?;
            ctx.write("boundary.csv", b.to_csv().as_bytes())?;
            let sp = spine(&spec, x);
            let mut csv = String::from("x,y\n");
            for z in &sp.vertices {
                csv.push_str(&format!("{},{}\n", z.re, z.im));
            }
            ctx.write("spine.csv", csv.as_bytes())?;
        }
        Cmd::Tract(TractCmd::Validate(s)) => {
            let spec = parse_spec(&s.spec)?;
            match spec.validate() {
                Ok(()) => println!("ok: N = {}", spec.n()),
                Err(v) => {
                    println!("violation at wiggle {}: {}", v.index, v.inequality);
                    return Err(Error::Spec(v.inequality));
                }
            }
        }
        Cmd::Map(MapCmd::Build(s)) => {
            let k = ctx.kernel(&parse_spec(&s.spec)?)?;
            println!("{} eps_map {:.3e}", k.fingerprint(), k.eps_map);
            ctx.write_json("kernel.json", &k.to_cache())?;
        }
        Cmd::Map(MapCmd::Eval { spec, at, inverse }) => {
            let k = ctx.kernel(&parse_spec(&spec.spec)?)?;
            let p = parse_point(&at)?;
            let out = if inverse {
                let z = k.eval_inverse(LogPolar::from_complex(p));
                serde_json::json!({ "w": [p.re, p.im], "z": [z.re, z.im], "eps_map": k.eps_map })
            } else {
                let w = k.eval_forward(p)?;
                let d = k.derivative_modulus(p).ok();
                serde_json::json!({
                    "z": [p.re, p.im], "lambda": w.lambda, "theta": w.theta,
                    "log_abs_derivative": d.map(|d| d.log_abs), "eps_map": k.eps_map,
                })
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Cmd::Map(MapCmd::Selftest(s)) => {
            let k = ctx.kernel(&parse_spec(&s.spec)?)?;
            let mut checks = vec![check_roundtrip(&k, ctx.cfg.verify.boundary_gap)];
            if k.spec.n() == 0 {
                checks.push(check_oracle(&k));
            }
            for c in &checks {
                println!("{:10} {} worst slack {:.3e}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.worst_slack);
            }
            ctx.write_json("selftest.json", &checks)?;
            if checks.iter().any(|c| !c.pass) {
                return Err(Error::Resolution { what: "selftest failed".into(), achieved: k.eps_map });
            }
        }
        Cmd::Phi(PhiCmd::Sample(s)) => {
            let k = Arc::new(ctx.kernel(&parse_spec(&s.spec)?)?);
            let u_hi = k.u_tail() + 2.0;
            let m = build_projection(k, f64::INFINITY)?;
            let mut csv = String::from("t,phi,err\n");
            for (t, v, e) in m.samples(u_hi, ctx.cfg.phi_samples) {
                csv.push_str(&format!("{t},{v},{e}\n"));
            }
            ctx.write("phi.csv", csv.as_bytes())?;
        }
        Cmd::Phi(PhiCmd::Pieces(s)) => {
            let m = load_map(&parse_spec(&s.spec)?, &ctx.cfg.build.kernel)?;
            println!("{} piece(s), v* = {}", m.pieces.len(), m.v_star);
            let out = serde_json::json!({
                "pieces": m.pieces, "breaks": m.breaks, "v_star": m.v_star,
                "eps_phi": m.eps_phi, "tol_root": m.tol_root,
            });
            ctx.write_json("pieces.json", &out)?;
        }
        Cmd::Un(UnCmd::Enumerate { spec, q }) => {
            let m = load_map(&parse_spec(&spec.spec)?, &ctx.cfg.build.kernel)?;
            let fam = minimal_covers(&m, &parse_quad(&q.q)?, q.n)?;
            println!("{} interval(s), {} crooked", fam.len(), fam.crooked_count());
            ctx.write_json("family.json", &fam.to_json())?;
        }
        Cmd::Crooked(CrookedCmd::Check { spec, q, hypothesis }) => {
            let m = load_map(&parse_spec(&spec.spec)?, &ctx.cfg.build.kernel)?;
            let quad = parse_quad(&q.q)?;
            if hypothesis {
                let out = hypothesis_check(&m, &quad, 0, q.n)?;
                for (n, c, t) in &out.counts {
                    println!("n = {n}: {c} of {t} crooked");
                }
                match out.n_star {
                    Some(n) => println!("all crooked at n* = {n}, margin {:.3e}", out.min_margin),
                    None => println!("no n <= {} with every interval crooked", q.n),
                }
                ctx.write_json("hypothesis.json", &out)?;
            } else {
                let fam = minimal_covers(&m, &quad, q.n)?;
                println!("{} of {} crooked", fam.crooked_count(), fam.len());
            }
        }
        Cmd::Build(BuildCmd::Run { script, stages }) => {
            let mut bc = match script {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                None => ctx.cfg.build.clone(),
            };
            if let Some(s) = stages {
                bc.stages = s;
            }
            let mut st = BuildState::new(bc)?;
            println!("nu0 = {:.4}, C = {:.4}, K = {}", st.nu0, st.growth_c, st.k);
            let res = st.run();
            for s in &st.stages {
                println!("stage {}: {} (rho -> {:.3})", s.q, s.note, s.rho);
            }
            ctx.write_json("spec.json", &st.spec)?;
            let certs: Vec<serde_json::Value> = st
                .certificates
                .iter()
                .map(|c| {
                    let mut v = serde_json::to_value(c)?;
                    v["family"] = c.family.to_json();
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            ctx.write_json("certificates.json", &certs)?;
            ctx.write_json("stages.json", &st.stages)?;
            let x1 = st.spec.last_right() + 60.0;
            let rs: Vec<f64> = (0..=((x1 - 10.0) / 2.0) as usize).map(|k| 10.0 + 2.0 * k as f64).collect();
            ctx.write("growth.csv", growth_csv(&measure_growth(st.kernel(), &rs)).as_bytes())?;
            res?;
        }
        Cmd::Julia(JuliaCmd::Render { spec, address, depth, window }) => {
            let k = ctx.kernel(&parse_spec(&spec.spec)?)?;
            let addr = Address::parse(&address, ctx.cfg.cover.s_max)?;
            let win = match window {
                Some(w) => Window::parse(&w)?,
                None => ctx.cfg.window.clone(),
            };
            let covers = (0..=depth)
                .map(|j| continuum_cover(&k, &addr, j, &ctx.cfg.cover))
                .collect::<Result<Vec<_>>>()?;
            for c in &covers {
                println!("depth {}: {} boxes, diam_max {:.3e}", c.depth, c.boxes.len(), c.diam_max);
            }
            ctx.write("julia.ppm", &render(&covers, &win))?;
            let dump: Vec<_> = covers.iter().map(|c| c.to_json()).collect();
            ctx.write_json("cover.json", &dump)?;
        }
        Cmd::Verify(VerifyCmd::All { specs, closeness }) => {
            let specs = if specs.is_empty() { vec![String::new()] } else { specs };
            let kc = &ctx.cfg.build.kernel;
            let maps = specs.iter().map(|s| load_map(&parse_spec(s)?, kc)).collect::<Result<Vec<_>>>()?;
            let (nu0, c) = match (ctx.cfg.build.nu0, ctx.cfg.build.growth_c) {
                (Some(a), Some(b)) => (a, b),
                (a, b) => {
                    let (nu, c) = measure_constants(kc)?;
                    (a.unwrap_or(nu), b.unwrap_or(c))
                }
            };
            let report = verify_all(&maps, nu0, c, &ctx.cfg.verify, closeness.then_some(&ctx.cfg.build))?;
            for s in &report.specs {
                println!("spec r = {:?}, R = {:?}", s.spec.r, s.spec.big_r);
                for ch in &s.checks {
                    println!("  {:20} {}  slack {:.3e}", ch.name, if ch.pass { "PASS" } else { "FAIL" }, ch.worst_slack);
                }
            }
            if let Some(p) = report.closeness_pass {
                println!("closeness {}", if p { "PASS" } else { "FAIL" });
            }
            ctx.write_json("verification.json", &report)?;
            if !report.pass {
                return Err(Error::Resolution { what: "verification failed".into(), achieved: 0.0 });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
