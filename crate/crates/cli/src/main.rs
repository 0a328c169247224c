//! `redform`: batch front end for the redform library.
//!
//! Exit codes: 0 definitive success, 1 definitive negative verdict,
//! 2 inconclusive within the search bounds, 3 input or usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use redform::arith::{MatRF, Rat, RatFn};
use redform::constr::{constr_group, constr_lie, parse_construction_list, Construction};
use redform::diffsys::{gauge, pullback, DiffSystem};
use redform::io::{self, DEFAULT_VAR};
use redform::katz::{
    annihilates_invariants, check_nabla_stable_span, commutant, eigenring, stabilizer_of_invariant,
    stable_subspace_criterion, EndBasis,
};
use redform::reduction::{
    is_reduced, normalize_at, reduce_by_diagonalization, verify_reduction_matrix, wei_norman,
    LieBasis,
};
use redform::series::fundamental_series;
use redform::solutions::{check_semi_invariant, harvest_invariants, rational_solutions, Caps};
use redform::Error;

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "redform",
    version,
    about = "Exact reduced-form tools for linear differential systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// System file: {"var": "x", "n": 2, "A": [["0", "1"], ["x", "1/(2*x)"]]}
    #[arg(long, global = true)]
    system: Option<PathBuf>,
    /// Gauge matrix file
    #[arg(long = "P", global = true)]
    p: Option<PathBuf>,
    /// A single construction, e.g. "ext(2,base)"
    #[arg(long, global = true)]
    constr: Option<String>,
    /// Semicolon-separated constructions
    #[arg(long, global = true)]
    constrs: Option<String>,
    /// List of matrices (Lie basis or End basis)
    #[arg(long, global = true)]
    basis: Option<PathBuf>,
    /// List of {"constr", "vector"} entries spanning stable lines
    #[arg(long, global = true)]
    lines: Option<PathBuf>,
    /// Matrix spanning a stable line in End
    #[arg(long, global = true)]
    semiinv: Option<PathBuf>,
    /// Vector file
    #[arg(long, global = true)]
    vector: Option<PathBuf>,
    /// List of {"constr", "vector"} invariants
    #[arg(long, global = true)]
    invariants: Option<PathBuf>,
    /// List of constant vectors spanning a subspace
    #[arg(long, global = true)]
    subspace: Option<PathBuf>,
    /// Size of the base module when it cannot be inferred
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Numerator degree cap for rational solutions
    #[arg(long, global = true, default_value_t = redform::solutions::DEFAULT_NUM_DEG)]
    num_deg: usize,
    /// Denominator override for rational solutions, e.g. "x^8"
    #[arg(long, global = true)]
    den: Option<String>,
    /// Denominator exponent used at poles of order two or more
    #[arg(long, global = true, default_value_t = redform::solutions::DEFAULT_POLE_CAP)]
    pole_cap: usize,
    /// Series truncation order
    #[arg(long, global = true, default_value_t = redform::series::DEFAULT_ORDER)]
    order: usize,
    /// Expansion or evaluation point
    #[arg(long, global = true, default_value = "1")]
    x0: String,
    /// Pullback order m in x = t^m
    #[arg(long, global = true, default_value_t = 1)]
    pullback: usize,
    /// Replace P by P·P(x0)⁻¹ before verifying
    #[arg(long, global = true)]
    normalize: bool,
    /// Write the JSON result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Apply P[A] = P⁻¹AP − P⁻¹∂P
    Gauge,
    /// Pull back along x = t^m
    Pullback,
    /// Matrix of a construction (Lie level, and group level with --P)
    Constr,
    /// Normalized fundamental series at x0
    Series,
    /// Rational solutions of the system or of a construction
    Ratsols,
    /// Check that a vector spans a stable line
    SemiinvCheck,
    /// Rational invariants of several constructions
    Harvest,
    /// Horizontal endomorphisms
    Eigenring,
    /// Decompose A over a constant Lie basis
    WeiNorman,
    /// Reduced-form criteria
    CheckReduced,
    /// Check v(x) = Constr(P)·v(x0) for supplied invariants
    VerifyReduction,
    /// Reduce by diagonalizing a semi-invariant endomorphism
    Reduce,
    /// Stability and annihilation checks for an End basis
    KatzCheck,
    /// Constant matrices commuting with a Lie basis
    Commutant,
    /// Matrices annihilating an invariant vector
    StabilizerOfInvariant,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn payload(&self) -> Value {
        let (reason, message) = match self {
            Failure::Lib(e) => (e.reason(), e.to_string()),
            Failure::Io(m) => ("io_error", m.clone()),
            Failure::Usage(m) => ("usage_error", m.clone()),
        };
        json!({ "error": { "reason": reason, "message": message } })
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(
                Error::NotSplit(_)
                | Error::NotSemiInvariant
                | Error::DefectiveEigenstructure
                | Error::NotStable
                | Error::NotReduced,
            ) => EXIT_NEGATIVE,
            _ => EXIT_INPUT,
        }
    }
}

type Outcome = Result<(Value, u8), Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(io::parse_json(&text)?)
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    v.as_ref()
        .ok_or_else(|| Failure::Usage(format!("this command requires --{flag}")))
}

impl Cli {
    fn system(&self) -> Result<DiffSystem, Failure> {
        Ok(io::system_from_json(&read_json(need(
            &self.system,
            "system",
        )?)?)?)
    }

    /// The system, pulled back when `--pullback` exceeds 1.
    fn working_system(&self) -> Result<DiffSystem, Failure> {
        let sys = self.system()?;
        Ok(if self.pullback > 1 {
            pullback(&sys, self.pullback, "t")
        } else {
            sys
        })
    }

    fn construction(&self) -> Result<Construction, Failure> {
        Ok(need(&self.constr, "constr")?.parse()?)
    }

    fn constructions(&self) -> Result<Vec<Construction>, Failure> {
        match &self.constrs {
            Some(s) => Ok(parse_construction_list(s)?),
            None => Ok(Vec::new()),
        }
    }

    fn x0(&self) -> Result<Rat, Failure> {
        Ok(redform::arith::parse_rat(&self.x0)?)
    }

    fn caps(&self, var: &str) -> Result<Caps, Failure> {
        let den_override = match &self.den {
            None => None,
            Some(s) => {
                let d = RatFn::parse(s, var)?;
                if !d.is_polynomial() || d.num().degree().is_none() {
                    return Err(
                        Error::InvalidInput("--den must be a nonzero polynomial".into()).into(),
                    );
                }
                Some(d.num().clone())
            }
        };
        Ok(Caps {
            num_deg: self.num_deg,
            pole_cap: self.pole_cap,
            den_override,
        })
    }

    fn matrix(&self, path: &Option<PathBuf>, flag: &str, var: &str) -> Result<MatRF, Failure> {
        Ok(io::matrix_from_json(&read_json(need(path, flag)?)?, var)?)
    }

    fn vector(&self, var: &str) -> Result<Vec<RatFn>, Failure> {
        Ok(io::vector_from_json(
            &read_json(need(&self.vector, "vector")?)?,
            var,
        )?)
    }

    fn tagged(
        &self,
        path: &Option<PathBuf>,
        var: &str,
    ) -> Result<Vec<(Construction, Vec<RatFn>)>, Failure> {
        match path {
            Some(p) => Ok(io::tagged_vectors_from_json(&read_json(p)?, var)?),
            None => Ok(Vec::new()),
        }
    }

    fn lie_basis(&self, var: &str, n: usize) -> Result<LieBasis, Failure> {
        Ok(io::lie_basis_from_json(
            &read_json(need(&self.basis, "basis")?)?,
            var,
            n,
        )?)
    }
}

fn complete_code(complete: bool) -> u8 {
    if complete {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    }
}

fn verdict_code(ok: bool) -> u8 {
    if ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

fn run(cli: &Cli) -> Outcome {
    match cli.command {
        Command::Gauge => {
            let sys = cli.working_system()?;
            let p = cli.matrix(&cli.p, "P", sys.var())?;
            Ok((io::system_to_json(&gauge(&sys, &p)?), EXIT_OK))
        }
        Command::Pullback => Ok((io::system_to_json(&cli.working_system()?), EXIT_OK)),
        Command::Constr => {
            let sys = cli.working_system()?;
            let c = cli.construction()?;
            let var = sys.var().to_string();
            let n = sys.dim();
            let mut out = json!({
                "constr": c.to_string(),
                "dim": c.dim(n)?,
                "basis_labels": c.basis_labels(n)?.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "lie": io::matrix_to_json(&constr_lie(&c, sys.matrix())?, &var),
            });
            if cli.p.is_some() {
                let p = cli.matrix(&cli.p, "P", &var)?;
                out["group"] = io::matrix_to_json(&constr_group(&c, &p)?, &var);
            }
            Ok((out, EXIT_OK))
        }
        Command::Series => {
            let sys = cli.working_system()?;
            let u = fundamental_series(&sys, &cli.x0()?, cli.order)?;
            Ok((io::series_to_json(&u), EXIT_OK))
        }
        Command::Ratsols => {
            let sys = cli.working_system()?;
            let target = match &cli.constr {
                Some(s) => DiffSystem::new(sys.var(), constr_lie(&s.parse()?, sys.matrix())?)?,
                None => sys,
            };
            let space = rational_solutions(&target, &cli.caps(target.var())?);
            Ok((
                io::solution_space_to_json(&space, target.var()),
                complete_code(space.complete),
            ))
        }
        Command::SemiinvCheck => {
            let sys = cli.working_system()?;
            let c = cli.construction()?;
            let v = cli.vector(sys.var())?;
            let rate = check_semi_invariant(&sys, &c, &v)?;
            let out = json!({
                "constr": c.to_string(),
                "semi_invariant": rate.is_some(),
                "rate": rate.as_ref().map(|f| io::ratfn_to_json(f, sys.var())),
            });
            Ok((out, verdict_code(rate.is_some())))
        }
        Command::Harvest => {
            let sys = cli.working_system()?;
            let cs = cli.constructions()?;
            if cs.is_empty() {
                return Err(Failure::Usage("harvest requires --constrs".into()));
            }
            let var = sys.var().to_string();
            let results = harvest_invariants(&sys, &cs, &cli.caps(&var)?);
            let mut complete = true;
            let mut failed = None;
            let items: Vec<Value> = results
                .iter()
                .map(|(c, r)| match r {
                    Ok(s) => {
                        complete &= s.complete;
                        json!({ "constr": c.to_string(), "solutions": io::solution_space_to_json(s, &var) })
                    }
                    Err(e) => {
                        failed.get_or_insert(e.clone());
                        json!({ "constr": c.to_string(), "error": io::error_to_json(e) })
                    }
                })
                .collect();
            if let Some(e) = failed {
                return Err(e.into());
            }
            Ok((json!({ "harvest": items }), complete_code(complete)))
        }
        Command::Eigenring => {
            let sys = cli.working_system()?;
            let e = eigenring(&sys, &cli.caps(sys.var())?);
            Ok((
                io::eigenring_to_json(&e, sys.var()),
                complete_code(e.space.complete),
            ))
        }
        Command::WeiNorman => {
            let sys = cli.working_system()?;
            let basis = cli.lie_basis(sys.var(), sys.dim())?;
            let f = wei_norman(&sys, &basis);
            let out = json!({
                "decomposable": f.is_some(),
                "coefficients": f.as_ref().map(|f| io::vector_to_json(f, sys.var())),
            });
            Ok((out, verdict_code(f.is_some())))
        }
        Command::CheckReduced => {
            let sys = cli.working_system()?;
            let var = sys.var().to_string();
            let basis = match cli.basis {
                Some(_) => Some(cli.lie_basis(&var, sys.dim())?),
                None => None,
            };
            let lines = cli.tagged(&cli.lines, &var)?;
            let report = is_reduced(
                &sys,
                basis.as_ref(),
                &cli.constructions()?,
                &lines,
                &cli.caps(&var)?,
            );
            let code = match report.verdict() {
                Some(true) => EXIT_OK,
                Some(false) => EXIT_NEGATIVE,
                None => EXIT_INCONCLUSIVE,
            };
            Ok((io::reduced_report_to_json(&report, &var), code))
        }
        Command::VerifyReduction => {
            let sys = cli.working_system()?;
            let var = sys.var().to_string();
            let x0 = cli.x0()?;
            let mut p = cli.matrix(&cli.p, "P", &var)?;
            if cli.normalize {
                p = normalize_at(&p, &x0)?;
            }
            let invs = cli.tagged(&cli.invariants, &var)?;
            let holds = verify_reduction_matrix(&sys, &p, &x0, &invs)?;
            let out = json!({
                "holds": holds,
                "x0": io::rat_to_json(&x0),
                "P": io::matrix_to_json(&p, &var),
                "invariants_checked": invs.len(),
            });
            Ok((out, verdict_code(holds)))
        }
        Command::Reduce => {
            let sys = cli.system()?;
            let n = cli.matrix(&cli.semiinv, "semiinv", sys.var())?;
            let var = if cli.pullback > 1 { "t" } else { sys.var() };
            let cert = reduce_by_diagonalization(&sys, &n, cli.pullback, var)?;
            Ok((io::certificate_to_json(&cert), EXIT_OK))
        }
        Command::KatzCheck => {
            let sys = cli.working_system()?;
            let var = sys.var().to_string();
            let n = sys.dim();
            let elements = io::matrices_from_json(&read_json(need(&cli.basis, "basis")?)?, &var)?;
            let basis = EndBasis::new(n, elements.clone())?;
            let stability = check_nabla_stable_span(&sys, &basis)?;
            let invs = cli.tagged(&cli.invariants, &var)?;
            let ann = annihilates_invariants(&elements, &invs)?;
            let all_annihilated = ann.iter().all(|a| a.annihilated());
            let mut out = json!({
                "bracket_closed": basis.bracket_closed(),
                "nabla_stability": io::stability_to_json(&stability, &var),
                "annihilation": io::annihilation_to_json(&ann, &var),
            });
            let mut ok = stability.stable && all_annihilated;
            if let Some(path) = &cli.subspace {
                let c = cli.construction()?;
                let ws = io::rat_vectors_from_json(&read_json(path)?)?;
                let lie = LieBasis::new(
                    n,
                    elements
                        .iter()
                        .map(|e| {
                            e.as_constant().ok_or_else(|| {
                                Error::InvalidInput(
                                    "subspace criterion needs a constant basis".into(),
                                )
                            })
                        })
                        .collect::<Result<_, _>>()?,
                )?;
                let crit = stable_subspace_criterion(&sys, &lie, &c, &ws)?;
                ok &= crit.consistent();
                out["subspace"] = io::subspace_criterion_to_json(&crit);
            }
            Ok((out, verdict_code(ok)))
        }
        Command::Commutant => {
            let n = match (&cli.n, &cli.system) {
                (Some(n), _) => *n,
                (None, Some(_)) => cli.system()?.dim(),
                (None, None) => 0,
            };
            let basis = cli.lie_basis(DEFAULT_VAR, n)?;
            if basis.n() == 0 {
                return Err(Failure::Usage("an empty basis requires --n".into()));
            }
            let c = commutant(&basis);
            let out = json!({
                "dim": c.len(),
                "basis": c.iter().map(io::rat_matrix_to_json).collect::<Vec<_>>(),
            });
            Ok((out, EXIT_OK))
        }
        Command::StabilizerOfInvariant => {
            let c = cli.construction()?;
            let var = match &cli.system {
                Some(_) => cli.system()?.var().to_string(),
                None => DEFAULT_VAR.to_string(),
            };
            let v = cli.vector(&var)?;
            let st = stabilizer_of_invariant(&c, &v, cli.n)?;
            let out = json!({
                "constr": c.to_string(),
                "dim": st.len(),
                "basis": st.iter().map(|m| io::matrix_to_json(m, &var)).collect::<Vec<_>>(),
            });
            Ok((out, EXIT_OK))
        }
    }
}

fn emit(cli_out: Option<&Path>, v: &Value) -> Result<(), Failure> {
    let text = io::to_pretty(v);
    match cli_out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                e.exit();
            }
            let f = Failure::Usage(e.to_string().trim().to_string());
            print!("{}", io::to_pretty(&f.payload()));
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let (value, code) = match run(&cli) {
        Ok(r) => r,
        Err(f) => (f.payload(), f.exit_code()),
    };
    if let Err(f) = emit(cli.out.as_deref(), &value) {
        print!("{}", io::to_pretty(&f.payload()));
        return ExitCode::from(EXIT_INPUT);
    }
    ExitCode::from(code)
}
