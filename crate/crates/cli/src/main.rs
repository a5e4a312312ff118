//! `galdist`: JSON front end to galdist-core.
//!
//! Every command prints one JSON object with `command` and `version` keys.
//! Malformed input exits with status 2, domain errors with status 1.

mod selftest;

use std::fmt::Display;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use galdist_core::distinction::{self, Chi, CuspidalDatum, DecideOptions, GlProduct};
use galdist_core::forms::{self, DiagForm};
use galdist_core::invgraph::{self, RestrictedRoots, Vertex};
use galdist_core::localfield::{hilbert_rat, Prime, QuadExtension, SquareClass};
use galdist_core::numfield::{parse_rational, MatrixJson, RationalJson};
use galdist_core::prasad::{self, GroupDescriptor};
use galdist_core::symspace::{self, ClassicalPair, ParityMap, XComponent, XOrbitInvariant};
use galdist_core::weyl::{self, Composition, SignedInvolution, SignedPerm};
use galdist_core::{Case, QMatrix};
use num_rational::Rational64;
use serde::Deserialize;
use serde_json::{json, Map, Value};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "galdist", version, about = "Exact computations for distinction on p-adic Galois symmetric pairs")]
struct Cli {
    /// Output format; only JSON is supported.
    #[arg(long, global = true, default_value = "json")]
    output: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Hilbert symbol (a, b)_p.
    Hilbert {
        #[arg(short, allow_hyphen_values = true)]
        a: String,
        #[arg(short, allow_hyphen_values = true)]
        b: String,
        #[arg(short)]
        p: u64,
    },
    /// Invariants of a diagonal form or a symmetric Gram matrix.
    FormInvariants {
        #[arg(long, value_enum, default_value = "orthogonal")]
        case: CaseArg,
        #[arg(long)]
        p: u64,
        /// Comma-separated diagonal entries.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        entries: Vec<String>,
        /// Gram matrix as JSON rows (or @file).
        #[arg(long)]
        gram: Option<String>,
        /// Symplectic rank.
        #[arg(long)]
        rank: Option<usize>,
        /// d with E = ℚ_p(√d), unitary case.
        #[arg(long, allow_hyphen_values = true)]
        ext: Option<i64>,
    },
    /// Number of form classes, or of orbits in X for a pair.
    OrbitCount {
        #[arg(long, value_enum)]
        case: Option<CaseArg>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<u64>,
        /// Determinant class (orthogonal case).
        #[arg(long, allow_hyphen_values = true)]
        disc: Option<String>,
        /// Pair JSON (or @file); counts orbits in X.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long, value_enum, default_value = "full")]
        component: ComponentArg,
    },
    /// Signed involutions compatible with a composition.
    Involutions {
        #[command(flatten)]
        comp: CompArgs,
        /// Keep only involutions with o(𝔠) even.
        #[arg(long)]
        circ: bool,
        /// Pair JSON (or @file); restricts to admissible involutions.
        #[arg(long)]
        pair: Option<String>,
    },
    /// The Weyl representative t_w, and x_w when y bits and z are given.
    BuildTw {
        #[arg(long)]
        pair: String,
        #[command(flatten)]
        comp: CompArgs,
        /// Signed permutation JSON {"rho": [...], "c": [...]}, 1-based.
        #[arg(long)]
        w: String,
        #[arg(long, value_delimiter = ',')]
        y_bits: Option<Vec<u8>>,
        /// Orbit invariant of z (JSON).
        #[arg(long)]
        z: Option<String>,
    },
    /// Descent in the graph of involutions.
    Descend {
        #[arg(long)]
        pair: String,
        #[command(flatten)]
        comp: CompArgs,
        #[arg(long)]
        w: String,
    },
    /// Membership of λ in the cone D(c), and the recursion across an edge.
    Cone {
        #[arg(long)]
        pair: String,
        #[command(flatten)]
        comp: CompArgs,
        #[arg(long)]
        w: String,
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        lambda: Vec<String>,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        c: String,
        /// 1-based simple root index for the recursion identity.
        #[arg(long)]
        edge: Option<usize>,
    },
    /// Decides distinction of an induced representation from symbolic data.
    Distinguish {
        #[arg(long)]
        pair: Option<String>,
        #[command(flatten)]
        comp: CompArgs,
        /// Cuspidal datum JSON (or @file).
        #[arg(long)]
        datum: Option<String>,
        /// Target orbit invariant JSON.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, value_enum)]
        y_parity: Option<ParityArg>,
        /// GL product JSON (or @file) for the palindromic check.
        #[arg(long)]
        gl: Option<String>,
        #[arg(long, value_enum, default_value = "trivial")]
        chi: ChiArg,
    },
    /// Prasad's character and the opposition group.
    PrasadChar {
        /// Group descriptor JSON, e.g. {"family":"SO","m":5}.
        #[arg(long)]
        group: String,
        /// Extension JSON {"p": 3, "d": -1}.
        #[arg(long)]
        ext: String,
    },
    /// Spinor norm of an orthogonal matrix: JSON {"p", "gram", "g"} (or @file).
    SpinorNorm {
        #[arg(long)]
        matrix: String,
    },
    /// Runs the oracle suites; depth from GALDIST_SELFTEST_DEPTH.
    Selftest,
}

#[derive(Args)]
struct CompArgs {
    #[arg(long, value_delimiter = ',')]
    parts: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    r: usize,
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<i8>,
}

impl CompArgs {
    fn composition(&self) -> Result<Composition, CliError> {
        let mut c = Composition::new(self.parts.clone(), self.r).map_err(domain("weyl"))?;
        if let Some(s) = self.sign {
            c = c.with_sign(s);
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Symplectic,
    Orthogonal,
    Unitary,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Case {
        match c {
            CaseArg::Symplectic => Case::Symplectic,
            CaseArg::Orthogonal => Case::Orthogonal,
            CaseArg::Unitary => Case::Unitary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ComponentArg {
    Full,
    Sx,
    Complement,
}

impl From<ComponentArg> for XComponent {
    fn from(c: ComponentArg) -> XComponent {
        match c {
            ComponentArg::Full => XComponent::Full,
            ComponentArg::Sx => XComponent::Sx,
            ComponentArg::Complement => XComponent::Complement,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Iso,
    Trivial,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChiArg {
    Trivial,
    Eta,
}

#[derive(Debug)]
enum CliError {
    Malformed(String),
    Domain { kind: &'static str, message: String },
}

fn domain<E: Display>(kind: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Domain { kind, message: e.to_string() }
}

fn malformed<E: Display>(what: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Malformed(format!("{what}: {e}"))
}

/// Parses a JSON argument, reading `@path` arguments from disk.
fn json_arg<T: for<'de> Deserialize<'de>>(what: &'static str, raw: &str) -> Result<T, CliError> {
    let text = match raw.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(malformed(what))?,
        None => raw.to_string(),
    };
    serde_json::from_str(&text).map_err(malformed(what))
}

fn rational_arg(what: &'static str, raw: &str) -> Result<num_rational::BigRational, CliError> {
    parse_rational(raw).map_err(malformed(what))
}

fn prime_arg(p: u64) -> Result<Prime, CliError> {
    Prime::new(p).map_err(malformed("p"))
}

fn required<T>(what: &'static str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Malformed(format!("missing --{what}")))
}

fn pair_arg(raw: &str) -> Result<ClassicalPair, CliError> {
    let spec: symspace::PairSpec = json_arg("pair", raw)?;
    ClassicalPair::try_from(spec).map_err(domain("symspace"))
}

fn involution_arg(raw: &str) -> Result<SignedInvolution, CliError> {
    let w: SignedPerm = json_arg("w", raw)?;
    SignedInvolution::new(w).map_err(domain("weyl"))
}

#[derive(Deserialize)]
struct ExtSpec {
    p: u64,
    d: i64,
}

#[derive(Deserialize)]
struct SpinorInput {
    p: u64,
    gram: Vec<Vec<RationalJson>>,
    g: Vec<Vec<RationalJson>>,
}

fn qmatrix(what: &'static str, rows: &[Vec<RationalJson>]) -> Result<QMatrix, CliError> {
    let n = rows.len();
    let mut parsed = Vec::with_capacity(n);
    for r in rows {
        if r.len() != n {
            return Err(CliError::Malformed(format!("{what} must be square")));
        }
        parsed.push(r.iter().map(|x| x.parse()).collect::<Result<Vec<_>, _>>().map_err(malformed(what))?);
    }
    Ok(QMatrix::from_rows(parsed, &num_rational::BigRational::from_integer(0.into())))
}

fn run(cmd: &Command) -> Result<Value, CliError> {
    match cmd {
        Command::Hilbert { a, b, p } => {
            let p = prime_arg(*p)?;
            let s = hilbert_rat(&rational_arg("a", a)?, &rational_arg("b", b)?, p).map_err(domain("localfield"))?;
            Ok(json!({ "symbol": s }))
        }
        Command::FormInvariants { case, p, entries, gram, rank, ext } => {
            let prime = prime_arg(*p)?;
            let inv = match (Case::from(*case), gram) {
                (Case::Orthogonal, Some(g)) => {
                    let rows: Vec<Vec<RationalJson>> = json_arg("gram", g)?;
                    let m = qmatrix("gram", &rows)?;
                    forms::gram_invariants(&m, prime).map_err(domain("forms"))?
                }
                (Case::Orthogonal, None) => {
                    let e = entries.iter().map(|x| rational_arg("entries", x)).collect::<Result<Vec<_>, _>>()?;
                    forms::invariants(&DiagForm::orthogonal(prime, e).map_err(domain("forms"))?).map_err(domain("forms"))?
                }
                (Case::Unitary, _) => {
                    let d = required("ext", *ext)?;
                    let e = QuadExtension::from_int(d, prime).map_err(domain("localfield"))?;
                    let v = entries.iter().map(|x| rational_arg("entries", x)).collect::<Result<Vec<_>, _>>()?;
                    forms::invariants(&DiagForm::unitary(e, v).map_err(domain("forms"))?).map_err(domain("forms"))?
                }
                (Case::Symplectic, _) => {
                    let r = rank.unwrap_or(entries.len());
                    forms::invariants(&DiagForm::symplectic(prime, r).map_err(domain("forms"))?).map_err(domain("forms"))?
                }
            };
            Ok(json!({ "invariants": inv }))
        }
        Command::OrbitCount { case, n, p, disc, pair, component } => {
            if let Some(raw) = pair {
                let pair = pair_arg(raw)?;
                let c = XComponent::from(*component);
                let count = symspace::orbit_count_x(&pair, c).map_err(domain("symspace"))?;
                let invs = symspace::orbit_invariants(&pair, c).map_err(domain("symspace"))?;
                return Ok(json!({ "count": count, "orbits": invs }));
            }
            let case = Case::from(required("case", *case)?);
            let n = required("n", *n)?;
            let count = match (case, disc, p) {
                (Case::Orthogonal, Some(d), Some(p)) => {
                    let prime = prime_arg(*p)?;
                    let class = SquareClass::reduce(&rational_arg("disc", d)?, prime).map_err(domain("localfield"))?;
                    forms::orbit_count(case, n, Some(&class)).map_err(domain("forms"))?
                }
                (Case::Orthogonal, None, Some(p)) => forms::orbit_count_total(n, prime_arg(*p)?),
                _ => forms::orbit_count(case, n, None).map_err(domain("forms"))?,
            };
            Ok(json!({ "count": count }))
        }
        Command::Involutions { comp, circ, pair } => {
            let c = comp.composition()?;
            let list: Vec<Value> = match pair {
                Some(raw) => {
                    let pair = pair_arg(raw)?;
                    c.validate(&pair).map_err(domain("weyl"))?;
                    weyl::admissible_involutions(&pair, &c)
                        .into_iter()
                        .filter(|w| !*circ || (0..w.k()).all(|i| !w.in_c(i) || w.rho()[i] == i))
                        .map(|w| {
                            let count = weyl::admissible_orbit_count(&c, &w, &pair).map_err(domain("weyl"))?;
                            Ok(involution_json(&c, &w, Some(count)))
                        })
                        .collect::<Result<_, CliError>>()?
                }
                None => weyl::enumerate_involutions(&c, *circ).iter().map(|w| involution_json(&c, w, None)).collect(),
            };
            Ok(json!({ "count": list.len(), "involutions": list }))
        }
        Command::BuildTw { pair, comp, w, y_bits, z } => {
            let pair = pair_arg(pair)?;
            let c = comp.composition()?;
            let w = involution_arg(w)?;
            let t = weyl::build_tw(&c, &w, &pair).map_err(domain("weyl"))?;
            let mut out = json!({ "t_w": MatrixJson::from_matrix(pair.field(), &t) });
            if let Some(z) = z {
                let z: XOrbitInvariant = json_arg("z", z)?;
                let bits = y_bits.clone().unwrap_or_default();
                let xw = weyl::build_xw(&c, &w, &bits, &z, &pair).map_err(domain("weyl"))?;
                out["x_w"] = json!(MatrixJson::from_matrix(pair.field(), &xw.x));
                out["orbit"] = json!(xw.predicted);
            }
            Ok(out)
        }
        Command::Descend { pair, comp, w } => {
            let pair = pair_arg(pair)?;
            let v = Vertex { comp: comp.composition()?, w: involution_arg(w)? };
            let d = invgraph::descend(&pair, &v).map_err(domain("invgraph"))?;
            Ok(json!({ "descent": d, "steps": d.path.len() }))
        }
        Command::Cone { pair, comp, w, lambda, c, edge } => {
            let pair = pair_arg(pair)?;
            let v = Vertex { comp: comp.composition()?, w: involution_arg(w)? };
            v.comp.validate(&pair).map_err(domain("weyl"))?;
            let lam = lambda
                .iter()
                .map(|x| x.parse::<Rational64>().map_err(malformed("lambda")))
                .collect::<Result<Vec<_>, _>>()?;
            let c: Rational64 = c.parse().map_err(malformed("c"))?;
            let roots = RestrictedRoots::for_pair(&pair, &v.comp);
            let contains = invgraph::cone_contains(&v.theta(), &roots, &lam, c).map_err(domain("invgraph"))?;
            let mut out = json!({ "contains": contains });
            if let Some(i) = edge {
                if *i == 0 || *i > v.comp.k() {
                    return Err(CliError::Malformed(format!("edge {i} out of range")));
                }
                let is_edge = invgraph::is_edge(&v.theta(), &roots.simple()[i - 1]).map_err(domain("invgraph"))?;
                let (lhs, rhs) = invgraph::cone_recursion_sides(&v, &roots, i - 1, &lam, c).map_err(domain("invgraph"))?;
                out["recursion"] = json!({ "is_edge": is_edge, "lhs": lhs, "rhs": rhs, "agree": lhs == rhs });
            }
            Ok(out)
        }
        Command::Distinguish { pair, comp, datum, target, y_parity, gl, chi } => {
            if let Some(raw) = gl {
                let product: GlProduct = json_arg("gl", raw)?;
                let chi = match chi {
                    ChiArg::Trivial => Chi::Trivial,
                    ChiArg::Eta => Chi::Eta,
                };
                let d = distinction::gl_product_check(&product, chi).map_err(domain("distinction"))?;
                return Ok(json!({ "gl": d }));
            }
            let pair = pair_arg(&required("pair", pair.clone())?)?;
            let c = comp.composition()?;
            let datum: CuspidalDatum = json_arg("datum", &required("datum", datum.clone())?)?;
            let target: XOrbitInvariant = json_arg("target", &required("target", target.clone())?)?;
            let options = DecideOptions {
                y_parity: y_parity.map(|p| match p {
                    ParityArg::Iso => ParityMap::Iso,
                    ParityArg::Trivial => ParityMap::Trivial,
                }),
            };
            let v = distinction::decide(&pair, &c, &datum, &target, &options).map_err(domain("distinction"))?;
            Ok(json!({ "verdict": v }))
        }
        Command::PrasadChar { group, ext } => {
            let y: GroupDescriptor = json_arg("group", group)?;
            let e: ExtSpec = json_arg("ext", ext)?;
            let e = QuadExtension::from_int(e.d, prime_arg(e.p)?).map_err(domain("localfield"))?;
            prasad_row(&y, &e).map_err(domain("prasad"))
        }
        Command::SpinorNorm { matrix } => {
            let input: SpinorInput = json_arg("matrix", matrix)?;
            let prime = prime_arg(input.p)?;
            let gram = qmatrix("gram", &input.gram)?;
            let g = qmatrix("g", &input.g)?;
            let class = prasad::spinor_norm(&g, &gram, prime).map_err(domain("prasad"))?;
            let refl = prasad::reflection_decomposition(&g, &gram).map_err(domain("prasad"))?;
            Ok(json!({ "class": class, "representative": class.representative().to_string(), "reflections": refl.len() }))
        }
        Command::Selftest => {
            let depth = std::env::var("GALDIST_SELFTEST_DEPTH")
                .ok()
                .map(|s| s.parse::<usize>().map_err(malformed("GALDIST_SELFTEST_DEPTH")))
                .transpose()?
                .unwrap_or(1)
                .max(1);
            let report = selftest::run(depth);
            let failed: usize = report.iter().map(|s| s.failures).sum();
            Ok(json!({ "depth": depth, "suites": report, "failures": failed, "passed": failed == 0 }))
        }
    }
}

fn involution_json(c: &Composition, w: &SignedInvolution, count: Option<usize>) -> Value {
    let fixed: Vec<usize> = w.fixed_in_c().iter().map(|i| i + 1).collect();
    let mut v = json!({ "w": w, "fixed_in_c": fixed, "odd_count": w.odd_count(&c.parts) });
    if let Some(n) = count {
        v["orbit_count"] = json!(n);
    }
    v
}

/// The table row for a group: character, its reduction and Y^op.
pub(crate) fn prasad_row(y: &GroupDescriptor, e: &QuadExtension) -> Result<Value, prasad::PrasadError> {
    let chi = prasad::prasad_character(y, e)?;
    let op = prasad::opposition_group(y, e)?;
    Ok(json!({
        "group": y,
        "character": chi,
        "symbol": chi.symbol(),
        "trivial": chi.is_trivial(),
        "reduced": chi.reduced(),
        "opposition": op,
    }))
}

fn envelope(name: &str, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), json!(name));
    m.insert("version".into(), json!(VERSION));
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Hilbert { .. } => "hilbert",
        Command::FormInvariants { .. } => "form-invariants",
        Command::OrbitCount { .. } => "orbit-count",
        Command::Involutions { .. } => "involutions",
        Command::BuildTw { .. } => "build-tw",
        Command::Descend { .. } => "descend",
        Command::Cone { .. } => "cone",
        Command::Distinguish { .. } => "distinguish",
        Command::PrasadChar { .. } => "prasad-char",
        Command::SpinorNorm { .. } => "spinor-norm",
        Command::Selftest => "selftest",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let OutputFormat::Json = cli.output;
    let name = command_name(&cli.command);
    let (body, code) = match run(&cli.command) {
        Ok(v) if v.get("passed") == Some(&Value::Bool(false)) => (v, 1),
        Ok(v) => (v, 0),
        Err(CliError::Malformed(message)) => (json!({ "error": { "kind": "malformed_input", "message": message } }), 2),
        Err(CliError::Domain { kind, message }) => (json!({ "error": { "kind": kind, "message": message } }), 1),
    };
    println!("{}", serde_json::to_string_pretty(&envelope(name, body)).expect("JSON output"));
    ExitCode::from(code)
}
