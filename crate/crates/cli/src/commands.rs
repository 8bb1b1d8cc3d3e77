use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use setalg::fragmentation::{self, Fragmentation, GradedCheck, GradedWitness};
use setalg::kalton_roberts::{self, KrError, SdrResult};
use setalg::kelley::{self, check_measure_axioms, KelleyError};
use setalg::rational::ratio;

use crate::campaigns::{self, CampaignReport};
use crate::gen::{self, FragmentationStyle};
use crate::instance::{FragmentationSpec, FromMeasure, InstanceFile, Origin};
use crate::report::{element, elements, exact, exact_list, RunReport};
use crate::CliError;

/// Largest universe whose full submeasure table is printed.
pub const TABLE_PRINT_LIMIT: u32 = 12;

#[derive(Debug, Parser)]
#[command(
    name = "setalg",
    version,
    about = "Exact computations on finite Boolean algebras"
)]
pub struct Cli {
    /// Instance file (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Families to sample before giving up.
    #[arg(long, global = true, default_value_t = 1000)]
    pub max_attempts: u64,
    /// Number of instances in a campaign.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Add wall-clock time to the report (makes the bytes run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Intersection number of the instance's set family.
    Kappa,
    /// Operations on the instance's fragmentation.
    Frag {
        #[arg(value_enum)]
        action: FragAction,
    },
    /// Search for a family of three-point sets with the small-union property.
    Kr {
        /// Number of sets.
        #[arg(long, default_value_t = 100)]
        m: u64,
        /// Antichain bound K.
        #[arg(long = "antichain", short = 'K', default_value_t = 1)]
        big_k: u64,
    },
    /// Distinct representatives for the instance's sets, or a random campaign.
    Hall {
        #[arg(long)]
        campaign: bool,
    },
    /// Write a random instance file.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 4)]
        atoms: u32,
        /// Sets in a generated family.
        #[arg(long, default_value_t = 4)]
        sets: usize,
        /// How a generated fragmentation is built.
        #[arg(long, value_enum, default_value_t = StyleArg::Measure)]
        style: StyleArg,
    },
    /// Run a verification campaign.
    Verify {
        #[arg(value_enum)]
        campaign: Campaign,
        /// Number of sets, for kr-badrate.
        #[arg(long, default_value_t = 100)]
        m: u64,
        /// Antichain bound K, for kr-badrate.
        #[arg(long = "antichain", short = 'K', default_value_t = 1)]
        big_k: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FragAction {
    Validate,
    Graded,
    Bounds,
    Submeasure,
    ToMeasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Measure,
    Fragmentation,
    Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    Measure,
    MaxOfTwo,
    Coarsened,
}

impl From<StyleArg> for FragmentationStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Measure => FragmentationStyle::Measure,
            StyleArg::MaxOfTwo => FragmentationStyle::MaxOfTwo,
            StyleArg::Coarsened => FragmentationStyle::Coarsened,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Campaign {
    Duality,
    Thm41,
    SubmeasureAxioms,
    KrBadrate,
    Hall,
    VerifyFamily,
}

impl Campaign {
    pub fn default_count(self) -> usize {
        match self {
            Campaign::Duality => 200,
            Campaign::Thm41 => 100,
            Campaign::SubmeasureAxioms => 50,
            Campaign::KrBadrate => 1000,
            Campaign::Hall | Campaign::VerifyFamily => 500,
        }
    }
}

/// What a command prints and how the process should exit.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub exit_code: i32,
}

impl Output {
    fn report(mut r: RunReport, started: Instant, timing: bool) -> Self {
        if timing {
            r.timing_ms = Some(started.elapsed().as_millis() as u64);
        }
        let exit_code = if r.is_ok() { 0 } else { 1 };
        Self {
            text: r.to_json(),
            exit_code,
        }
    }
}

struct Input {
    bytes: Vec<u8>,
    file: InstanceFile,
}

fn read_input(cli: &Cli) -> Result<Input, CliError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --input".into()))?;
    let bytes = std::fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse(e.to_string()))?;
    let file = InstanceFile::parse(text)?;
    Ok(Input { bytes, file })
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let started = Instant::now();
    let report = match &cli.command {
        Command::Kappa => kappa(cli)?,
        Command::Frag { action } => frag(cli, *action)?,
        Command::Kr { m, big_k } => kr(cli, *m, *big_k)?,
        Command::Hall { campaign } => hall(cli, *campaign)?,
        Command::Gen {
            kind,
            atoms,
            sets,
            style,
        } => {
            let file = generate(*kind, *atoms, *sets, (*style).into(), cli.seed)?;
            return Ok(Output {
                text: file.to_json(),
                exit_code: 0,
            });
        }
        Command::Verify { campaign, m, big_k } => verify(cli, *campaign, *m, *big_k)?,
    };
    Ok(Output::report(report, started, cli.timing))
}

fn kappa(cli: &Cli) -> Result<RunReport, CliError> {
    let input = read_input(cli)?;
    let family = input.file.family()?;
    let k = kelley::intersection_number(&family).map_err(|e| match e {
        KelleyError::EmptyFamily | KelleyError::ZeroMember => CliError::Parse(e.to_string()),
        other => CliError::Usage(other.to_string()),
    })?;
    let result = json!({
        "kappa": exact(&k.kappa),
        "family": elements(&k.family),
        "set_weights": exact_list(&k.set_weights),
        "kelley_measure": exact_list(k.kelley_measure.weights()),
        "witness_sequence": k.witness_sequence.as_deref().map(elements),
        "witness_length": k.witness_length.to_string(),
        "witness_capped": k.witness_capped(),
    });
    Ok(RunReport::new(
        "kappa",
        Some(&input.bytes),
        cli.seed,
        true,
        result,
    ))
}

fn graded_witness(w: &GradedWitness) -> Value {
    json!({"level": w.level, "a": element(&w.a), "b": element(&w.b), "message": w.to_string()})
}

fn frag(cli: &Cli, action: FragAction) -> Result<RunReport, CliError> {
    let input = read_input(cli)?;
    let frag = input.file.fragmentation()?;
    let name = format!(
        "frag {}",
        action.to_possible_value().expect("named").get_name()
    );
    let done = |ok: bool, result: Value| {
        RunReport::new(name.clone(), Some(&input.bytes), cli.seed, ok, result)
    };
    if action == FragAction::Validate {
        let report = fragmentation::validate(&frag);
        let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Ok(done(
            report.is_valid(),
            json!({"valid": report.is_valid(), "depth": frag.depth(), "violations": violations}),
        ));
    }
    if let Err(e) = frag.ensure_valid() {
        return Ok(done(
            false,
            json!({"refused": "invalid fragmentation", "reason": e.to_string()}),
        ));
    }
    let usage = |e: fragmentation::FragmentationError| CliError::Usage(e.to_string());
    Ok(match action {
        FragAction::Validate => unreachable!("handled above"),
        FragAction::Graded => match fragmentation::is_graded(&frag).map_err(usage)? {
            GradedCheck::Graded => done(true, json!({"graded": true, "witness": null})),
            GradedCheck::NotGraded(w) => done(
                false,
                json!({"graded": false, "witness": graded_witness(&w)}),
            ),
        },
        FragAction::Bounds => {
            let k = fragmentation::antichain_bounds(&frag).map_err(usage)?;
            done(true, json!({"depth": frag.depth(), "antichain_bounds": k}))
        }
        FragAction::Submeasure => submeasure(&frag, done)?,
        FragAction::ToMeasure => {
            let m = kelley::measure_from_fragmentation(&frag)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let table = m
                .value_table()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let violation = check_measure_axioms(frag.universe(), &table, true)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            done(
                violation.is_none(),
                json!({
                    "measure": exact_list(m.weights()),
                    "strictly_positive": m.is_strictly_positive(),
                    "axioms_hold": violation.is_none(),
                    "violation": violation.map(|v| format!("{v:?}")),
                }),
            )
        }
    })
}

fn submeasure(
    frag: &Fragmentation,
    done: impl Fn(bool, Value) -> RunReport,
) -> Result<RunReport, CliError> {
    match fragmentation::balcar_jech_submeasure(frag) {
        Err(fragmentation::FragmentationError::NotGraded(w)) => Ok(done(
            false,
            json!({"refused": "fragmentation is not graded", "witness": graded_witness(&w)}),
        )),
        Err(e) => Err(CliError::Usage(e.to_string())),
        Ok(table) => {
            let violation = table.check_axioms();
            let u = table.universe();
            let listing = (u.atom_count() <= TABLE_PRINT_LIMIT).then(|| {
                table
                    .entries()
                    .map(|(e, v)| json!({"element": element(&e), "value": exact(&v)}))
                    .collect::<Vec<_>>()
            });
            Ok(done(
                violation.is_none(),
                json!({
                    "atoms": u.atom_count(),
                    "unit": exact(&table.value(&u.one())),
                    "axioms_hold": violation.is_none(),
                    "violation": violation.map(|v| format!("{v:?}")),
                    "table": listing,
                }),
            ))
        }
    }
}

fn kr(cli: &Cli, m: u64, big_k: u64) -> Result<RunReport, CliError> {
    let params =
        kalton_roberts::choose_params(m, big_k).map_err(|e| CliError::Usage(e.to_string()))?;
    let pi = kalton_roberts::pi_bound(params.m, params.p, params.k)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let checks: serde_json::Map<String, Value> = params
        .checks()
        .into_iter()
        .map(|(name, ok)| (name.to_string(), json!(ok)))
        .collect();
    let mut result = json!({
        "m": m, "K": big_k, "k": params.k, "p": params.p,
        "parameter_checks": checks,
        "pi": exact(&pi.value),
        "pi_below_one": pi.below_one,
        "pi_below_one_thousandth": pi.value < ratio(1, 1000),
        "pi_below_geometric": pi.below_geometric,
        "hypothesis": pi.hypothesis,
        "max_attempts": cli.max_attempts,
    });
    let ok = match kalton_roberts::kr_search(&params, cli.seed, cli.max_attempts) {
        Ok(found) => {
            result["attempts"] = json!(found.attempts);
            result["sets"] = json!(found.family.sets());
            true
        }
        Err(KrError::AttemptsExhausted { attempts, .. }) => {
            result["attempts"] = json!(attempts);
            result["error"] = json!("no good family within the attempt limit");
            false
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    Ok(RunReport::new("kr", None, cli.seed, ok, result))
}

fn hall(cli: &Cli, campaign: bool) -> Result<RunReport, CliError> {
    if campaign {
        let count = cli.count.unwrap_or(Campaign::Hall.default_count());
        return Ok(campaign_report(
            "hall --campaign",
            cli.seed,
            campaigns::hall(count, cli.seed),
        ));
    }
    let input = read_input(cli)?;
    let result = match kalton_roberts::hall_sdr(&input.file.sets) {
        SdrResult::Representatives(reps) => json!({"sdr": reps, "violator": null}),
        SdrResult::HallViolation { indices, union } => {
            json!({"sdr": null, "violator": {"indices": indices, "union": union}})
        }
    };
    Ok(RunReport::new(
        "hall",
        Some(&input.bytes),
        cli.seed,
        true,
        result,
    ))
}

/// Builds a random instance file from `seed`.
pub fn generate(
    kind: GenKind,
    atoms: u32,
    sets: usize,
    style: FragmentationStyle,
    seed: u64,
) -> Result<InstanceFile, CliError> {
    let universe =
        setalg::algebra::AtomUniverse::new(atoms).map_err(|e| CliError::Usage(e.to_string()))?;
    if kind != GenKind::Family && !universe.is_enumerable() {
        return Err(CliError::Usage(format!(
            "{atoms} atoms is above the enumeration limit of {}",
            setalg::algebra::ENUMERATION_LIMIT
        )));
    }
    let mut rng = gen::rng(seed);
    let mut file = InstanceFile::new(atoms);
    let generator = match kind {
        GenKind::Measure => {
            file.set_measure(&gen::random_measure(&mut rng, universe));
            "measure".to_string()
        }
        GenKind::Family => {
            if sets == 0 {
                return Err(CliError::Usage("--sets must be at least 1".into()));
            }
            file.sets = gen::random_family(&mut rng, universe, sets)
                .iter()
                .map(|e| e.atoms().collect())
                .collect();
            "family".to_string()
        }
        GenKind::Fragmentation if style == FragmentationStyle::Measure => {
            file.set_measure(&gen::random_measure(&mut rng, universe));
            file.fragmentation = Some(FragmentationSpec::FromMeasure(FromMeasure {
                from_measure: true,
            }));
            "fragmentation/measure".to_string()
        }
        GenKind::Fragmentation => {
            let frag = gen::random_graded_fragmentation(&mut rng, universe, style);
            file.set_fragmentation(&frag)?;
            format!("fragmentation/{}", style.name())
        }
    };
    file.origin = Some(Origin { generator, seed });
    Ok(file)
}

fn campaign_report(command: &str, seed: u64, c: CampaignReport) -> RunReport {
    let ok = c.pass;
    RunReport::new(
        command,
        None,
        seed,
        ok,
        serde_json::to_value(c).expect("campaign serializes"),
    )
}

fn verify(cli: &Cli, campaign: Campaign, m: u64, big_k: u64) -> Result<RunReport, CliError> {
    let count = cli.count.unwrap_or(campaign.default_count());
    let seed = cli.seed;
    let name = format!(
        "verify {}",
        campaign.to_possible_value().expect("named").get_name()
    );
    let c = match campaign {
        Campaign::Duality => campaigns::duality(count, seed),
        Campaign::Thm41 => campaigns::thm41(count, seed),
        Campaign::SubmeasureAxioms => campaigns::submeasure_axioms(count, seed),
        Campaign::KrBadrate => {
            let params = kalton_roberts::choose_params(m, big_k)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            if cli.max_attempts == 0 {
                return Err(CliError::Usage("--max-attempts must be at least 1".into()));
            }
            campaigns::kr_badrate(count, seed, params, cli.max_attempts)
        }
        Campaign::Hall => campaigns::hall(count, seed),
        Campaign::VerifyFamily => campaigns::verify_family(count, seed),
    };
    Ok(campaign_report(&name, seed, c))
}
