//! `wallcross`: command-line front end to the wall-crossing engine.
//!
//! Exit codes: 0 success; 1 usage, configuration or other error; 2 Method I
//! bound violated; 3 incomplete table input (missing keys listed on stderr);
//! 4 OSV mismatch outside the excluded region; 5 self-test failure.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use wallcross::acceptance::{self, Context};
use wallcross::num::{fmt_rat, parse_rat};
use wallcross::osv::{osv_check, params_for, OsvRegion, TargetBox};
use wallcross::rank0direct::method1;
use wallcross::rank0inductive::method2_with;
use wallcross::rank2::{rank2, Rank2Report};
use wallcross::resolver::{Policy, Rank0Resolver};
use wallcross::walls::{diagram, render_svg};
use wallcross::{ChernData, Error, Rat, Rank0Cache, TableSet};

use config::{hex, parse_strictness, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "wallcross", version, about = "Exact rank 0 and rank 2 DT invariants by wall-crossing")]
struct Cli {
    /// Configuration file (key = value).
    #[arg(long, global = true, env = "WALLCROSS_CONFIG")]
    config: Option<PathBuf>,
    /// Output path: JSON report, or the SVG for `walls`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replace the configured tables by synthetic ones drawn from this seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Method I for a rank 0 class near the Bogomolov-type bound.
    Rank0Direct {
        #[arg(long, allow_hyphen_values = true)]
        class: String,
    },
    /// Method II for a rank 0 class.
    Rank0Inductive {
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        #[arg(long)]
        n: i64,
    },
    /// Rank 2 invariant through the Joyce-Song pair.
    Rank2 {
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        #[arg(long)]
        n: i64,
        #[arg(long)]
        strictness: Option<String>,
    },
    /// Compare both sides of the OSV identity coefficient by coefficient.
    OsvCheck {
        #[arg(long)]
        k: i64,
        #[arg(long, default_value = "1")]
        xi: String,
    },
    /// SVG diagram of the walls of a class in the (b, w) plane.
    Walls {
        #[arg(long, allow_hyphen_values = true)]
        class: String,
    },
    /// Parse a table file and report its windows and entries.
    TableValidate {
        /// Table file; defaults to tables.path of the configuration.
        path: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Comma-separated criterion ids.
        #[arg(long)]
        only: Option<String>,
    },
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BoundViolated(_) => 2,
            Error::IncompleteInput(ref keys) => {
                let list: String = keys.iter().map(|k| format!("\n  {k}")).collect();
                return Fail(3, format!("incomplete input, missing table keys:{list}"));
            }
            _ => 1,
        };
        Fail(code, e.to_string())
    }
}

impl From<String> for Fail {
    fn from(s: String) -> Self {
        Fail(1, s)
    }
}

type Out = Result<(), Fail>;

fn parse_class(s: &str) -> Result<ChernData, Fail> {
    let parts: Vec<Rat> = s
        .split(',')
        .map(|p| parse_rat(p).ok_or_else(|| Fail(1, format!("bad rational {p:?} in --class"))))
        .collect::<Result<_, _>>()?;
    let [r, c, s, d]: [Rat; 4] = parts.try_into().map_err(|_| Fail(1, "--class needs r,c,s,d".into()))?;
    Ok(ChernData::new(r, c, s, d))
}

fn r(x: &Rat) -> Value {
    Value::String(fmt_rat(x))
}

fn class_json(c: &ChernData) -> Value {
    json!([r(&c.r), r(&c.c), r(&c.s), r(&c.d)])
}

/// Writes via a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Fail> {
    let tmp = path.with_extension("tmp~");
    let io = |e: std::io::Error| Fail(1, format!("cannot write {}: {e}", path.display()));
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

struct Env {
    cfg: RunConfig,
    cli_out: Option<PathBuf>,
    seed: Option<u64>,
    verbose: bool,
}

impl Env {
    fn tables(&self) -> Result<TableSet, Fail> {
        Ok(self.cfg.tables(self.seed)?)
    }

    fn report(&self, command: &str, mut body: Value) -> Out {
        let obj = body.as_object_mut().expect("report body is an object");
        obj.insert("command".into(), json!(command));
        obj.insert("config_hash".into(), json!(self.cfg.hash()));
        if let Some(seed) = self.seed {
            obj.insert("seed".into(), json!(seed));
        }
        let text = serde_json::to_string_pretty(&body).expect("serializable") + "\n";
        match &self.cli_out {
            Some(p) => write_atomic(p, text.as_bytes()),
            None if self.verbose => {
                print!("{text}");
                Ok(())
            }
            None => Ok(()),
        }
    }
}

fn rank0_direct(env: &Env, class: &str) -> Out {
    let v = parse_class(class)?;
    let tables = env.tables()?;
    let rep = method1(&v, &tables, &env.cfg.geom)?;
    if rep.vanishing {
        println!("J = 0 (vanishing: Q(v) < 0)");
    } else {
        println!("J = {}", rep.value);
    }
    for t in &rep.terms {
        println!("  term {} : P = {}, I = {} -> {}", t.splitting, t.pt, t.dt1, t.value);
    }
    for d in &rep.diagnostics {
        println!("  note: {d}");
    }
    let terms: Vec<Value> = rep
        .terms
        .iter()
        .map(|t| {
            let sp = &t.splitting;
            json!({
                "k1": sp.k1, "k2": sp.k2,
                "beta1": r(&sp.beta1), "beta2": r(&sp.beta2), "m1": r(&sp.m1), "m2": r(&sp.m2),
                "chi": r(&sp.chi),
                "pt": {"m": r(&-&sp.m1), "deg": r(&sp.beta1), "value": r(&t.pt)},
                "dt1": {"m": r(&sp.m2), "deg": r(&sp.beta2), "value": r(&t.dt1)},
                "value": r(&t.value),
            })
        })
        .collect();
    env.report(
        "rank0-direct",
        json!({"class": class_json(&v), "value": r(&rep.value), "vanishing": rep.vanishing, "terms": terms, "diagnostics": rep.diagnostics}),
    )
}

fn rank0_inductive(env: &Env, class: &str, n: i64) -> Out {
    let v = parse_class(class)?;
    let tables = env.tables()?;
    let g = &env.cfg.geom;
    let cache = Rank0Cache::new();
    let mut res = Rank0Resolver::new(&tables, g, &cache, Policy::InductiveOnly, n);
    res.opts = env.cfg.method2_options()?;
    let rep = method2_with(&v, n, &res.opts, &res.rec, &|c| res.j(c))?;
    res.finish()?;
    println!("J = {}", rep.value);
    println!("  n = {}, chi = {}, prefactor = {}, mu = {}, coefficient = {}", rep.n, rep.chi, rep.prefactor, rep.mu, rep.coefficient);
    println!("  {} decompositions", rep.decompositions.len());
    if env.verbose {
        for d in &rep.decompositions {
            println!("    {d}");
        }
    }
    let ds: Vec<Value> = rep.decompositions.iter().map(|d| json!({"text": d.to_string(), "term": r(&d.term)})).collect();
    let prov: Vec<Value> = res.provenance().iter().map(|(c, val, p)| json!({"class": class_json(c), "value": r(val), "source": format!("{p:?}")})).collect();
    env.report(
        "rank0-inductive",
        json!({
            "class": class_json(&v), "n": n, "value": r(&rep.value), "chi": r(&rep.chi),
            "prefactor": r(&rep.prefactor), "mu": r(&rep.mu), "coefficient": r(&rep.coefficient),
            "decompositions": ds, "rank0_provenance": prov,
        }),
    )
}

fn rank2_json(rep: &Rank2Report) -> Value {
    let pairs = |ts: &[wallcross::rank2::PairTerm]| -> Vec<Value> {
        ts.iter()
            .map(|t| json!({"v1": class_json(&t.v1), "v2": class_json(&t.v2), "coefficient": r(&t.coefficient), "j1": r(&t.j1), "j2": r(&t.j2)}))
            .collect()
    };
    json!({
        "value": r(&rep.value), "k": rep.k, "w": class_json(&rep.w), "w_n": class_json(&rep.w_n), "n": rep.n,
        "chi": r(&rep.chi), "prefactor": r(&rep.prefactor), "mu": r(&rep.mu), "a_tilde": r(&rep.a_tilde),
        "decompositions": rep.decompositions.iter().map(|d| json!({"text": d.to_string(), "term": r(&d.term)})).collect::<Vec<_>>(),
        "js_rank0_terms": pairs(&rep.js_rank0_terms),
        "js_pair_terms": pairs(&rep.js_pair_terms),
        "j_tilt": rep.j_tilt.as_ref().map(r),
        "correction": rep.correction.iter().map(|c| json!({"m1": r(&c.m1), "m2": r(&c.m2), "deg": r(&c.deg), "value": r(&c.value)})).collect::<Vec<_>>(),
        "rank0_provenance": rep.provenance.iter().map(|(c, v, p)| json!({"class": class_json(c), "value": r(v), "source": format!("{p:?}")})).collect::<Vec<_>>(),
    })
}

fn rank2_cmd(env: &Env, class: &str, n: i64, strictness: Option<&str>) -> Out {
    let alpha = parse_class(class)?;
    let tables = env.tables()?;
    let mut opts = env.cfg.rank2_options()?;
    if let Some(s) = strictness {
        opts.strictness = parse_strictness(s).ok_or_else(|| Fail(1, format!("--strictness {s:?}: expected paper or flip")))?;
    }
    let cache = Rank0Cache::new();
    let rep = rank2(&alpha, n, &tables, &env.cfg.geom, &cache, &opts)?;
    println!("J = {}", rep.value);
    println!("  ch1 = {}H, w = {}, n = {}, chi = {}, prefactor = {}, mu = {}", rep.k, rep.w, rep.n, rep.chi, rep.prefactor, rep.mu);
    println!("  A~ = {} from {} decompositions", rep.a_tilde, rep.decompositions.len());
    if let Some(jt) = &rep.j_tilt {
        println!("  tilt invariant = {jt}, {} rank 0 terms, {} pair terms, {} correction terms", rep.js_rank0_terms.len(), rep.js_pair_terms.len(), rep.correction.len());
    }
    env.report("rank2", json!({"class": class_json(&alpha), "report": rank2_json(&rep)}))
}

fn osv_cmd(env: &Env, k: i64, xi: &str) -> Out {
    let cfg = &env.cfg;
    let g = &cfg.geom;
    let xi = parse_rat(xi).ok_or_else(|| Fail(1, format!("bad --xi {xi:?}")))?;
    if k < 1 {
        return Err(Fail(1, "--k must be positive".into()));
    }
    let params = params_for(&xi, g, cfg.int("osv.k_probe")?)?;
    let eps = match cfg.opt_rat("osv.epsilon")? {
        Some(e) => e,
        None => params.epsilon(k)?,
    };
    let mut region = OsvRegion::new(k, eps.clone());
    region.two_sided = cfg.bool("osv.two_sided")?;
    let (br, mr) = (cfg.rat("osv.beta_radius")?, cfg.rat("osv.m_radius")?);
    // around the class of a surface in |kH|
    let b0 = Rat::from_integer((-k * k * g.h3).into()) / Rat::from_integer(2.into());
    let m0 = Rat::from_integer((k * k * k * g.h3).into()) / Rat::from_integer(6.into());
    let bx = TargetBox { beta_lo: &b0 - &br, beta_hi: &b0 + &br, m_lo: &m0 - &mr, m_hi: &m0 + &mr };
    let tables = env.tables()?;
    let cmp = osv_check(&region, &params, &bx, &tables, g)?;
    println!("{:<36} {:>16} {:>16} {:>16}", "monomial", "lhs", "rhs", "diff");
    let mut rows = Vec::new();
    for row in &cmp.rows {
        let diff = &row.lhs - &row.rhs;
        let mark = if row.excluded { "  (excluded)" } else { "" };
        println!("{:<36} {:>16} {:>16} {:>16}{mark}", row.monomial.to_string(), row.lhs.to_string(), row.rhs.to_string(), diff.to_string());
        rows.push(json!({
            "x": r(&row.monomial.xe), "y": r(&row.monomial.ye), "z": r(&row.monomial.ze),
            "lhs": r(&row.lhs), "rhs": r(&row.rhs), "diff": r(&diff), "excluded": row.excluded,
        }));
    }
    println!("mismatches: {}", cmp.mismatches);
    env.report(
        "osv-check",
        json!({
            "k": k, "epsilon": r(&eps), "two_sided": region.two_sided,
            "params": {"xi": r(&params.xi), "mu": r(&params.mu), "delta": r(&params.delta), "kmin": params.kmin},
            "box": {"beta": [r(&bx.beta_lo), r(&bx.beta_hi)], "m": [r(&bx.m_lo), r(&bx.m_hi)]},
            "rows": rows, "mismatches": cmp.mismatches,
        }),
    )?;
    if cmp.mismatches > 0 {
        return Err(Fail(4, format!("{} mismatches outside the excluded region", cmp.mismatches)));
    }
    Ok(())
}

fn walls_cmd(env: &Env, class: &str) -> Out {
    let v = parse_class(class)?;
    let svg = render_svg(&diagram(&v, &env.cfg.geom)?);
    match &env.cli_out {
        Some(p) => write_atomic(p, svg.as_bytes()),
        None => {
            std::io::stdout().write_all(svg.as_bytes()).map_err(|e| Fail(1, e.to_string()))?;
            Ok(())
        }
    }
}

fn table_validate(env: &Env, path: Option<&Path>) -> Out {
    let path = path.map(Path::to_path_buf).or_else(|| env.cfg.tables_path()).ok_or_else(|| Fail(1, "no table file given and tables.path unset".into()))?;
    let t = TableSet::load(&path).map_err(|e| Fail(1, format!("{}: {e}", path.display())))?;
    let canonical = t.save();
    use sha2::Digest;
    let digest = hex(&sha2::Sha256::digest(canonical.as_bytes()));
    for tab in [&t.pt, &t.dt1] {
        let windows: Vec<String> = tab.windows.iter().map(|w| format!("deg {}..{} m {}..{}", w.deg_min, w.deg_max, w.m_min, w.m_max)).collect();
        println!("{}: {} entries, windows [{}]", tab.kind, tab.entries.len(), windows.join("; "));
    }
    println!("ok, canonical sha256 {digest}");
    env.report("table-validate", json!({"path": path.display().to_string(), "pt_entries": t.pt.entries.len(), "dt1_entries": t.dt1.entries.len(), "canonical_sha256": digest}))
}

fn selftest(env: &Env, only: Option<&str>) -> Out {
    let tables = match env.cfg.tables(None) {
        Ok(t) => t,
        Err(e) => return Err(Fail(5, format!("A1 FAIL: cannot load tables: {e}"))),
    };
    let ctx = Context { geom: env.cfg.geom.clone(), tables };
    let ids: Vec<String> = match only {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => acceptance::ids().iter().map(|s| s.to_string()).collect(),
    };
    let mut failed = Vec::new();
    for id in &ids {
        let o = acceptance::run(id, &ctx).ok_or_else(|| Fail(1, format!("unknown criterion {id}")))?;
        if env.verbose {
            println!("{o}");
        } else {
            println!("{:<4} {} {}: {}", o.id, if o.pass { "PASS" } else { "FAIL" }, o.title, o.detail);
        }
        if !o.pass {
            failed.push(o.id);
        }
    }
    if !failed.is_empty() {
        return Err(Fail(5, format!("failing criteria: {}", failed.join(", "))));
    }
    println!("all {} criteria pass", ids.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::defaults()),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let env = Env { cfg, cli_out: cli.out.clone(), seed: cli.seed, verbose: cli.verbose };
    let res = match &cli.cmd {
        Cmd::Rank0Direct { class } => rank0_direct(&env, class),
        Cmd::Rank0Inductive { class, n } => rank0_inductive(&env, class, *n),
        Cmd::Rank2 { class, n, strictness } => rank2_cmd(&env, class, *n, strictness.as_deref()),
        Cmd::OsvCheck { k, xi } => osv_cmd(&env, *k, xi),
        Cmd::Walls { class } => walls_cmd(&env, class),
        Cmd::TableValidate { path } => table_validate(&env, path.as_deref()),
        Cmd::Selftest { only } => selftest(&env, only.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
