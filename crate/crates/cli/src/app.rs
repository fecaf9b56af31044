use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plurality_core::characterizations::characterized_pne;
use plurality_core::decision::{
    decide, gen_comparison_example, gen_lazy_poa, gen_rc_vs_rv, gen_shared_top_example,
    gen_truth_poa, poa_additive, DecisionQuery, Problem,
};
use plurality_core::game::outcome_of;
use plurality_core::hardness::{bcbs_to_msi, msi_to_election};
use plurality_core::{
    enumerate_pne, lottery, Ballot, BallotVector, CandidateId, DecisionError, Election, GameError,
    GameSpec, PrincipledProfile, Setting, TieRule, TrivialPolicy, DEFAULT_BUDGET,
};
use serde_json::json;

use crate::document::{default_names, BcbsDocument, DocumentError, ElectionDocument, Loaded, MsiDocument};
use crate::report::{self, BudgetStatus, Report};

/// Process exit codes.
pub mod exit_code {
    /// Success, or a yes answer.
    pub const YES: i32 = 0;
    pub const NO: i32 = 1;
    /// The budget ran out before an answer was found.
    pub const UNKNOWN: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const BAD_INPUT: i32 = 65;
    pub const IO: i32 = 74;
}

#[derive(Parser)]
#[command(name = "plurality", version, about = "Equilibria of Plurality voting games with lazy or truth-biased voters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truthful scores, winning sets, lottery, and every equilibrium.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Answer exist-ne, tie-ne or single-ne. Exit code 0 = yes, 1 = no, 2 = unknown.
    Decide {
        file: PathBuf,
        problem: ProblemArg,
        /// Candidate name for tie-ne and single-ne.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Additive price of anarchy.
    Poa {
        file: PathBuf,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Write one of the built-in example elections.
    Gen {
        name: GenName,
        /// Number of voters for lazy-poa and truth-poa.
        n: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transform an instance file: MSI to election, or bipartite graph to MSI.
    Reduce {
        kind: ReduceKind,
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Scores and winner lottery of one ballot vector.
    Lottery {
        file: PathBuf,
        /// Comma-separated candidate names, `-` for abstention. Defaults to truthful voting.
        #[arg(long)]
        ballots: Option<String>,
        #[arg(long = "tie", value_enum, default_value_t = TieArg::Lex)]
        tie: TieArg,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Args, Clone)]
struct GameArgs {
    #[arg(long, value_enum, default_value_t = SettingArg::Lazy)]
    setting: SettingArg,
    #[arg(long = "tie", value_enum, default_value_t = TieArg::Lex)]
    tie: TieArg,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::FullTie)]
    trivial_policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    Lazy,
    Truth,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Lex,
    RandCand,
    RandVoter,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    FullTie,
    Invalid,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
#[allow(clippy::enum_variant_names)]
enum ProblemArg {
    ExistNe,
    TieNe,
    SingleNe,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenName {
    ComparisonExample,
    SharedTop,
    LazyPoa,
    TruthPoa,
    RcVsRv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    MsiToElection,
    BcbsToMsi,
}

impl From<SettingArg> for Setting {
    fn from(s: SettingArg) -> Self {
        match s {
            SettingArg::Lazy => Setting::Lazy,
            SettingArg::Truth => Setting::TruthBiased,
        }
    }
}

impl From<TieArg> for TieRule {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Lex => TieRule::Lex,
            TieArg::RandCand => TieRule::RandCand,
            TieArg::RandVoter => TieRule::RandVoter,
        }
    }
}

impl From<PolicyArg> for TrivialPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::FullTie => TrivialPolicy::FullTie,
            PolicyArg::Invalid => TrivialPolicy::Invalid,
        }
    }
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Self {
        match p {
            ProblemArg::ExistNe => Problem::ExistNe,
            ProblemArg::TieNe => Problem::TieNe,
            ProblemArg::SingleNe => Problem::SingleNe,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Io(String),
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit_code::USAGE } else { exit_code::YES };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            exit_code::USAGE
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            exit_code::BAD_INPUT
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            exit_code::IO
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = read(path)?;
    ElectionDocument::parse(&text)
        .and_then(|d| d.load())
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_out(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(report: &Report, format: Format, start: Instant) {
    match format {
        Format::Table => print!("{}", report.table),
        Format::Machine => println!("{}", report.machine(start.elapsed())),
    }
}

fn game(l: &Loaded, args: &GameArgs) -> GameSpec {
    GameSpec::new(l.election.clone(), args.setting.into(), args.tie.into())
        .with_principled(l.principled.clone())
        .expect("document validation matches candidate counts")
        .with_trivial_policy(args.trivial_policy.into())
}

fn game_query(args: &GameArgs) -> serde_json::Value {
    json!({
        "setting": Setting::from(args.setting).to_string(),
        "tie": TieRule::from(args.tie).to_string(),
        "trivial_policy": match args.trivial_policy { PolicyArg::FullTie => "full-tie", PolicyArg::Invalid => "invalid" },
        "budget": args.budget,
    })
}

fn budget_status(limit: u64, err: Option<&GameError>) -> BudgetStatus {
    match err {
        Some(GameError::BudgetExceeded { required, .. }) => {
            BudgetStatus { limit, exhausted: true, required: Some(required.to_string()) }
        }
        _ => BudgetStatus { limit, exhausted: false, required: None },
    }
}

/// All equilibria with the method used: the exhaustive oracle when the
/// ballot space fits the budget, else the characterizations when they apply.
fn equilibria(g: &GameSpec, budget: u64) -> Result<(Vec<BallotVector>, &'static str), GameError> {
    match enumerate_pne(g, budget) {
        Ok(list) => Ok((list, "oracle")),
        Err(err @ GameError::BudgetExceeded { .. }) => {
            if !g.principled().is_empty() || g.trivial_policy() != TrivialPolicy::FullTie {
                return Err(err);
            }
            let list = characterized_pne(g.election(), g.setting(), g.rule(), budget)?;
            let method = if g.setting() == Setting::Lazy { "poly" } else { "search" };
            Ok((list, method))
        }
        Err(err) => Err(err),
    }
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    let start = Instant::now();
    match command {
        Command::Analyze { file, game: args } => {
            let l = load(&file)?;
            let report = analyze(&l, &args);
            emit(&report, args.format, start);
            Ok(if report.budget.as_ref().is_some_and(|b| b.exhausted) { exit_code::UNKNOWN } else { exit_code::YES })
        }
        Command::Decide { file, problem, target, game: args } => {
            let l = load(&file)?;
            let problem = Problem::from(problem);
            let target = match target {
                Some(name) => Some(
                    l.lookup(&name).ok_or_else(|| Failure::Input(format!("unknown target candidate {name:?}")))?,
                ),
                None => None,
            };
            let q = DecisionQuery::new(problem, args.setting.into(), args.tie.into(), target)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let (report, code) = decide_report(&l, &q, &args);
            emit(&report, args.format, start);
            Ok(code)
        }
        Command::Poa { file, game: args } => {
            let l = load(&file)?;
            let (report, code) = poa_report(&l, &args);
            emit(&report, args.format, start);
            Ok(code)
        }
        Command::Gen { name, n, output } => {
            let doc = generate(name, n)?;
            write_out(output.as_deref(), &doc.to_toml())?;
            Ok(exit_code::YES)
        }
        Command::Reduce { kind, file, output } => {
            let text = read(&file)?;
            let out = match kind {
                ReduceKind::MsiToElection => {
                    let inst = MsiDocument::parse(&text)?.instance()?;
                    let r = msi_to_election(&inst).map_err(|e| Failure::Input(e.to_string()))?;
                    let names = r.candidate_names();
                    let doc = ElectionDocument::from_election(&names, &r.election, &PrincipledProfile::empty(names.len()));
                    format!(
                        "# target {}, s = {}, {} sets after padding, {} deviators needed\n{}",
                        names[r.target.0],
                        r.s,
                        r.instance.num_sets(),
                        r.deviators_needed(),
                        doc.to_toml()
                    )
                }
                ReduceKind::BcbsToMsi => {
                    let g = BcbsDocument::parse(&text)?.instance()?;
                    MsiDocument::from_instance(&bcbs_to_msi(&g)).to_toml()
                }
            };
            write_out(output.as_deref(), &out)?;
            Ok(exit_code::YES)
        }
        Command::Lottery { file, ballots, tie, format } => {
            let l = load(&file)?;
            let b = match ballots {
                Some(s) => parse_ballots(&l, &s)?,
                None => l.election.truthful(),
            };
            let report = lottery_report(&l, &b, tie.into());
            emit(&report, format, start);
            Ok(exit_code::YES)
        }
    }
}

fn generate(name: GenName, n: Option<usize>) -> Result<ElectionDocument, Failure> {
    let need_n = |label: &str| n.ok_or_else(|| Failure::Usage(format!("{label} needs the number of voters")));
    let bad = |e: plurality_core::decision::GeneratorError| Failure::Usage(e.to_string());
    let (e, p): (Election, Option<PrincipledProfile>) = match name {
        GenName::ComparisonExample => (gen_comparison_example(), None),
        GenName::SharedTop => (gen_shared_top_example(), None),
        GenName::LazyPoa => (gen_lazy_poa(need_n("lazy-poa")?).map_err(bad)?, None),
        GenName::TruthPoa => (gen_truth_poa(need_n("truth-poa")?).map_err(bad)?, None),
        GenName::RcVsRv => {
            let (e, p) = gen_rc_vs_rv();
            (e, Some(p))
        }
    };
    let m = e.num_candidates();
    let p = p.unwrap_or_else(|| PrincipledProfile::empty(m));
    Ok(ElectionDocument::from_election(&default_names(m), &e, &p))
}

fn parse_ballots(l: &Loaded, text: &str) -> Result<BallotVector, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != l.election.num_voters() {
        return Err(Failure::Usage(format!(
            "expected {} ballots, found {}",
            l.election.num_voters(),
            parts.len()
        )));
    }
    parts
        .into_iter()
        .map(|p| match p {
            "-" | "⊥" => Ok(Ballot::Abstain),
            name => l
                .lookup(name)
                .map(Ballot::Vote)
                .ok_or_else(|| Failure::Usage(format!("unknown candidate {name:?} in ballots"))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(BallotVector)
}

fn analyze(l: &Loaded, args: &GameArgs) -> Report {
    let g = game(l, args);
    let truthful = l.election.truthful();
    let board = g.board(&truthful);
    let w = board.winners();
    let h = board.runners_up();
    let h2 = board.second_runners_up();
    let truthful_lottery = g.outcome(&truthful).expect("truthful ballots are never all abstentions");

    let mut table = String::new();
    table.push_str(&format!(
        "setting {}, tie {}, {} voters, {} principled\n",
        g.setting(),
        g.rule(),
        l.election.num_voters(),
        l.principled.len()
    ));
    table.push_str(&format!("truthful scores: {}\n", report::scores_line(l, &board)));
    table.push_str(&format!(
        "W = {}  H = {}  H' = {}\n",
        report::set(l, &w),
        report::set(l, &h),
        report::set(l, &h2)
    ));
    table.push_str(&format!("truthful lottery: {}\n", report::lottery_line(l, &truthful_lottery)));

    let mut result = json!({
        "truthful_scores": report::scores_json(l, &board),
        "winners": report::names(l, &w),
        "runners_up": report::names(l, &h),
        "second_runners_up": report::names(l, &h2),
        "truthful_lottery": report::lottery_json(l, &truthful_lottery),
    });
    let (method, status) = match equilibria(&g, args.budget) {
        Ok((list, method)) => {
            table.push_str(&format!("equilibria ({method}): {}\n", list.len()));
            let mut rows = Vec::new();
            for b in &list {
                match outcome_of(&g, b) {
                    Some(out) => {
                        table.push_str(&format!(
                            "  {}  W = {}  lottery {}\n",
                            report::ballots(l, b),
                            report::set(l, &out.winners),
                            report::lottery_line(l, &out.lottery)
                        ));
                        rows.push(json!({
                            "ballots": report::ballots(l, b),
                            "winners": report::names(l, &out.winners),
                            "lottery": report::lottery_json(l, &out.lottery),
                        }));
                    }
                    None => {
                        table.push_str(&format!("  {}  election invalid\n", report::ballots(l, b)));
                        rows.push(json!({ "ballots": report::ballots(l, b), "winners": null, "lottery": null }));
                    }
                }
            }
            result["equilibria"] = json!(rows);
            (Some(method.to_string()), budget_status(args.budget, None))
        }
        Err(err) => {
            table.push_str(&format!("equilibria: not computed, {err}\n"));
            result["equilibria"] = json!(null);
            (None, budget_status(args.budget, Some(&err)))
        }
    };
    Report {
        command: "analyze",
        query: game_query(args),
        result,
        method,
        budget: Some(status),
        table,
    }
}

fn satisfies(g: &GameSpec, problem: Problem, target: Option<CandidateId>, b: &BallotVector) -> bool {
    let w = g.board(b).winners();
    match problem {
        Problem::ExistNe => true,
        Problem::SingleNe => target.is_some_and(|t| w == [t]),
        Problem::TieNe => target.is_some_and(|t| w.len() > 1 && w.contains(&t)),
    }
}

fn decide_report(l: &Loaded, q: &DecisionQuery, args: &GameArgs) -> (Report, i32) {
    let g = game(l, args);
    let mut query = game_query(args);
    query["problem"] = json!(q.problem().name());
    query["target"] = json!(q.target().map(|t| l.name(t)));
    // The fast paths assume the plain game; anything else goes to the oracle.
    let outcome = if l.principled.is_empty() && g.trivial_policy() == TrivialPolicy::FullTie {
        decide(q, &l.election, args.budget).map(|d| (d.answer, d.witness, d.method.to_string()))
    } else {
        enumerate_pne(&g, args.budget)
            .map(|list| {
                let hit = list.into_iter().find(|b| satisfies(&g, q.problem(), q.target(), b));
                (hit.is_some(), hit, "oracle".to_string())
            })
            .map_err(DecisionError::Unknown)
    };
    let (table, result, method, status, code) = match outcome {
        Ok((answer, witness, method)) => {
            let word = if answer { "yes" } else { "no" };
            let mut table = format!("{}: {word} ({method})\n", q.problem());
            if let Some(b) = &witness {
                table.push_str(&format!("witness: {}\n", report::ballots(l, b)));
            }
            let result = json!({
                "answer": word,
                "witness": witness.as_ref().map(|b| report::ballots(l, b)),
            });
            let code = if answer { exit_code::YES } else { exit_code::NO };
            (table, result, Some(method), budget_status(args.budget, None), code)
        }
        Err(DecisionError::Unknown(err)) => {
            let table = format!("{}: unknown, {err}\n", q.problem());
            let result = json!({ "answer": "unknown", "witness": null });
            (table, result, None, budget_status(args.budget, Some(&err)), exit_code::UNKNOWN)
        }
        Err(err) => {
            let table = format!("{}: unknown, {err}\n", q.problem());
            let result = json!({ "answer": "unknown", "witness": null });
            (table, result, None, budget_status(args.budget, None), exit_code::UNKNOWN)
        }
    };
    let report = Report { command: "decide", query, result, method, budget: Some(status), table };
    (report, code)
}

fn poa_report(l: &Loaded, args: &GameArgs) -> (Report, i32) {
    let g = game(l, args);
    let method = if l.principled.is_empty() && g.trivial_policy() == TrivialPolicy::FullTie {
        "characterization"
    } else {
        "oracle"
    };
    match poa_additive(&g, args.budget) {
        Ok(r) => {
            let mut table = format!("additive price of anarchy: {}\n", r.gap);
            table.push_str(&format!("truthful winner score: {}\n", r.truthful_winner_score));
            if r.defined {
                table.push_str(&format!("worst equilibrium winner score: {}\n", r.worst_pne_winner_truthful_score));
            } else {
                table.push_str("no equilibrium exists\n");
            }
            if let Some(b) = &r.witness {
                table.push_str(&format!("witness: {}\n", report::ballots(l, b)));
            }
            let result = json!({
                "gap": r.gap,
                "truthful_winner_score": r.truthful_winner_score,
                "worst_pne_winner_truthful_score": r.worst_pne_winner_truthful_score,
                "defined": r.defined,
                "witness": r.witness.as_ref().map(|b| report::ballots(l, b)),
            });
            let report = Report {
                command: "poa",
                query: game_query(args),
                result,
                method: Some(method.into()),
                budget: Some(budget_status(args.budget, None)),
                table,
            };
            (report, exit_code::YES)
        }
        Err(err) => {
            let report = Report {
                command: "poa",
                query: game_query(args),
                result: json!({ "gap": null }),
                method: None,
                budget: Some(budget_status(args.budget, Some(&err))),
                table: format!("additive price of anarchy: unknown, {err}\n"),
            };
            (report, exit_code::UNKNOWN)
        }
    }
}

fn lottery_report(l: &Loaded, b: &BallotVector, rule: TieRule) -> Report {
    let principled = (!l.principled.is_empty()).then_some(&l.principled);
    let g = GameSpec::new(l.election.clone(), Setting::Lazy, rule)
        .with_principled(l.principled.clone())
        .expect("document validation matches candidate counts");
    let board = g.board(b);
    let p = lottery(&l.election, b, rule, principled);
    let table = format!(
        "ballots {}\nscores: {}\nW = {}\nlottery ({rule}): {}\n",
        report::ballots(l, b),
        report::scores_line(l, &board),
        report::set(l, &board.winners()),
        report::lottery_line(l, &p)
    );
    Report {
        command: "lottery",
        query: json!({ "tie": rule.to_string(), "ballots": report::ballots(l, b) }),
        result: json!({
            "scores": report::scores_json(l, &board),
            "winners": report::names(l, &board.winners()),
            "lottery": report::lottery_json(l, &p),
        }),
        method: None,
        budget: None,
        table,
    }
}
