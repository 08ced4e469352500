//! Command-line front end: table rendering, advice, simulation and the
//! HTTP service.

use std::io::{self, Write};
use std::net::SocketAddr;

use clap::{Args, Parser, Subcommand};
use exactjack::dealer::dealer_dist_q;
use exactjack::expectation::{estimate_ew, expected_win, removal_effects};
use exactjack::{
    parse_card_list, simulate_dealer, simulate_round, ActionEvaluation, CardValue, DealerOutcome, Deck, Hand,
    RemovalTable, Rules, SharedMemo, Solver,
};

use crate::api;
use crate::json;

/// Deepest hit look-ahead the engine supports.
pub const MAX_DEPTH: u8 = 13;

#[derive(Parser, Debug)]
#[command(name = "exactjack", version, about = "Exact blackjack expectations over finite decks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dealer outcome probabilities given no dealer natural, one row per upcard
    DealerTable {
        #[arg(long, value_parser = parse_decks)]
        decks: Deck,
        #[command(flatten)]
        dealer: DealerRule,
        /// Print full precision instead of truncating to 5 digits
        #[arg(long)]
        full: bool,
    },
    /// Expectation of every option for each two-card hand against one upcard
    EvTable {
        #[arg(long, value_parser = parse_decks)]
        decks: Deck,
        #[arg(long, value_parser = parse_card)]
        up: CardValue,
        #[command(flatten)]
        rules: RuleArgs,
        /// Print full precision instead of truncating to 6 digits
        #[arg(long)]
        full: bool,
    },
    /// Expected win of a fresh shoe, in percent
    ExpectedWin {
        #[arg(long, value_parser = parse_decks)]
        decks: Deck,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Change in expected win from removing one card of each value, in percent
    RemovalEffects {
        #[arg(long)]
        decks: u32,
        #[command(flatten)]
        rules: RuleArgs,
    },
    /// Linear estimate of the expected win after cards leave the shoe
    Estimate {
        #[arg(long)]
        decks: u32,
        #[command(flatten)]
        rules: RuleArgs,
        /// Comma-separated card values, e.g. 1,1,5,10
        #[arg(long, value_parser = parse_cards)]
        removed: Cards,
        /// Also compute the exact expected win of the depleted shoe
        #[arg(long)]
        exact: bool,
    },
    /// Evaluate the options for one hand
    Advise {
        /// Unseen cards as JSON, excluding the upcard and the player's cards
        #[arg(long, value_parser = parse_deck_json)]
        deck: Deck,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long, value_parser = parse_card)]
        up: CardValue,
        #[arg(long, value_parser = parse_cards)]
        cards: Cards,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(0..=MAX_DEPTH as i64))]
        depth: u8,
    },
    /// Monte Carlo estimates
    Simulate {
        #[command(subcommand)]
        target: SimTarget,
    },
    /// Run the JSON service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Subcommand, Debug)]
enum SimTarget {
    /// Play out dealer hands from a fixed upcard
    Dealer {
        #[arg(long, value_parser = parse_card)]
        up: CardValue,
        #[command(flatten)]
        shoe: ShoeArgs,
        #[command(flatten)]
        dealer: DealerRule,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Play whole rounds with the engine's decisions
    Round {
        #[command(flatten)]
        shoe: ShoeArgs,
        #[command(flatten)]
        rules: RuleArgs,
        #[arg(long, default_value_t = MAX_DEPTH, value_parser = clap::value_parser!(u8).range(0..=MAX_DEPTH as i64))]
        depth: u8,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug)]
struct DealerRule {
    /// Dealer stands on soft 17 (default)
    #[arg(long, conflicts_with = "h17")]
    s17: bool,
    /// Dealer hits soft 17
    #[arg(long)]
    h17: bool,
}

#[derive(Args, Debug)]
struct RuleArgs {
    /// Split rules as das/rsa/rsp bits (e.g. 101) or a Rules JSON object
    #[arg(long, value_parser = parse_rules, default_value = "111")]
    rules: Rules,
    #[command(flatten)]
    dealer: DealerRule,
}

impl RuleArgs {
    fn resolve(&self) -> Rules {
        match (self.dealer.s17, self.dealer.h17) {
            (true, _) => self.rules.with_h17(false),
            (_, true) => self.rules.with_h17(true),
            _ => self.rules,
        }
    }
}

#[derive(Args, Debug)]
struct ShoeArgs {
    /// Number of decks, or `inf`
    #[arg(long, value_parser = parse_decks, required_unless_present = "deck", conflicts_with = "deck")]
    decks: Option<Deck>,
    /// Explicit shoe as JSON
    #[arg(long, value_parser = parse_deck_json)]
    deck: Option<Deck>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Card list wrapper so clap does not treat it as a repeated argument.
#[derive(Clone, Debug)]
struct Cards(Vec<CardValue>);

fn parse_card(s: &str) -> Result<CardValue, String> {
    let v: u8 = s.trim().parse().map_err(|_| format!("`{s}` is not a card value"))?;
    CardValue::new(v).map_err(|e| e.to_string())
}

fn parse_cards(s: &str) -> Result<Cards, String> {
    parse_card_list(s).map(Cards).map_err(|e| e.to_string())
}

fn parse_decks(s: &str) -> Result<Deck, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Deck::infinite());
    }
    let n: u32 = s.parse().map_err(|_| format!("`{s}` is neither a deck count nor `inf`"))?;
    Deck::new(n).map_err(|e| e.to_string())
}

fn parse_deck_json(s: &str) -> Result<Deck, String> {
    json::parse(s.as_bytes()).map_err(|e| e.to_string())
}

fn parse_rules(s: &str) -> Result<Rules, String> {
    if s.trim_start().starts_with('{') {
        json::parse(s.as_bytes()).map_err(|e| e.to_string())
    } else {
        Rules::from_bits(s).map_err(|e| e.to_string())
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Engine(#[from] exactjack::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Run the command line `args` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the process exit code: 0 on
/// success, 2 on a usage error, 1 when the engine rejects the input.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        // the reader went away, e.g. `| head`
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::DealerTable { decks, dealer, full } => {
            let rules = Rules::default().with_h17(dealer.h17);
            dealer_table(&decks, &rules, full, out)
        }
        Command::EvTable { decks, up, rules, full } => ev_table(&decks, up, &rules.resolve(), full, out),
        Command::ExpectedWin { decks, rules } => {
            let memo = SharedMemo::new();
            let ew = expected_win(&Solver::new(rules.resolve(), &memo), &decks)?.ew;
            writeln!(out, "{}", fixed(100.0 * ew, 4))?;
            Ok(())
        }
        Command::RemovalEffects { decks, rules } => {
            let memo = SharedMemo::new();
            let effects = removal_effects(&Solver::new(rules.resolve(), &memo), &Deck::new(decks)?)?;
            writeln!(out, "card,effect_pct")?;
            for k in CardValue::ALL {
                let cell = effects.get(k).map(|r| fixed(100.0 * r, 3)).unwrap_or_default();
                writeln!(out, "{k},{cell}")?;
            }
            Ok(())
        }
        Command::Estimate { decks, rules, removed, exact } => estimate(decks, &rules.resolve(), &removed.0, exact, out),
        Command::Advise { deck, rules, up, cards, depth } => {
            let memo = SharedMemo::new();
            let solver = Solver::new(rules.resolve(), &memo).with_depth(depth);
            let evaluation = solver.evaluate_hand(&cards.0, up, &deck)?;
            writeln!(out, "{}", to_json(&evaluation))?;
            Ok(())
        }
        Command::Simulate { target } => {
            let report = match target {
                SimTarget::Dealer { up, shoe, dealer, run } => {
                    let deck = match (shoe.deck, shoe.decks) {
                        (Some(deck), _) => deck,
                        (None, Some(decks)) => decks.without(up)?,
                        (None, None) => unreachable!("clap requires a shoe"),
                    };
                    simulate_dealer(up, &deck, &Rules::default().with_h17(dealer.h17), run.n, run.seed)?
                }
                SimTarget::Round { shoe, rules, depth, run } => {
                    let deck = shoe.deck.or(shoe.decks).expect("clap requires a shoe");
                    let memo = SharedMemo::new();
                    let solver = Solver::new(rules.resolve(), &memo).with_depth(depth);
                    simulate_round(&solver, &deck, run.n, run.seed)?
                }
            };
            writeln!(out, "{}", to_json(&report))?;
            Ok(())
        }
        Command::Serve { port, host } => {
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                writeln!(err, "listening on http://{}", listener.local_addr()?)?;
                axum::serve(listener, api::router(api::AppState::default())).await
            })?;
            Ok(())
        }
    }
}

/// Upcard row order of the dealer table: 2 through 10, then the ace.
const UPCARD_ROWS: [u8; 10] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 1];

fn dealer_table(deck: &Deck, rules: &Rules, full: bool, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "up,17,18,19,20,21,bust")?;
    let columns = [17, 18, 19, 20, 21, 23].map(|code| DealerOutcome::from_code(code).expect("valid code"));
    for v in UPCARD_ROWS {
        let up = CardValue::new(v)?;
        let q = dealer_dist_q(up, &deck.without(up)?, rules)?;
        let cells: Vec<String> = columns.iter().map(|&o| cell(q.prob(o), 5, full)).collect();
        writeln!(out, "{up},{}", cells.join(","))?;
    }
    Ok(())
}

fn ev_table(deck: &Deck, up: CardValue, rules: &Rules, full: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let memo = SharedMemo::new();
    let solver = Solver::new(*rules, &memo);
    writeln!(out, "hand,stand,hit,double,split,action")?;
    for a in CardValue::ALL {
        for b in CardValue::ALL.into_iter().filter(|b| *b >= a) {
            let view = deck.without_all(&[up, a, b])?;
            let evaluation = if a.is_natural_with(b) {
                // a natural is paid at once; the table still lists hit and double
                let hand = Hand::from_cards(&[a, b]);
                let hit = solver.ev_hit(hand, up, &view)?;
                let double = solver.ev_double(hand, up, &view)?;
                ActionEvaluation::new(1.5, Some(hit), Some(double), None)
            } else {
                solver.best_action(a, b, up, &view)?
            };
            let opt = |ev: Option<f64>| ev.map(|x| cell(x, 6, full)).unwrap_or_default();
            writeln!(
                out,
                "{a}+{b},{},{},{},{},{}",
                cell(evaluation.ev_stand, 6, full),
                opt(evaluation.ev_hit),
                opt(evaluation.ev_double),
                opt(evaluation.ev_split),
                evaluation.best
            )?;
        }
    }
    Ok(())
}

fn estimate(decks: u32, rules: &Rules, removed: &[CardValue], exact: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let initial = Deck::new(decks)?;
    // one memo per shoe size keeps the working set small
    let columns = (1..=decks)
        .map(|n| {
            let memo = SharedMemo::new();
            Ok((n, removal_effects(&Solver::new(*rules, &memo), &Deck::new(n)?)?))
        })
        .collect::<exactjack::Result<Vec<_>>>()?;
    let base = columns.last().expect("at least one deck").1.base_ew;
    let table = RemovalTable::new(columns)?;
    let est = estimate_ew(&initial, removed, &table, base)?;
    if exact {
        let memo = SharedMemo::new();
        let direct = expected_win(&Solver::new(*rules, &memo), &initial.without_all(removed)?)?.ew;
        writeln!(out, "estimate_pct,exact_pct")?;
        writeln!(out, "{},{}", fixed(100.0 * est, 4), fixed(100.0 * direct, 4))?;
    } else {
        writeln!(out, "estimate_pct")?;
        writeln!(out, "{}", fixed(100.0 * est, 4))?;
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("engine types serialize")
}

/// Table cell: truncated to `digits` decimals, or the shortest exact
/// representation when `full`.
fn cell(x: f64, digits: usize, full: bool) -> String {
    if full {
        format!("{x}")
    } else {
        fixed(truncate(x, digits), digits)
    }
}

/// Truncate toward zero. The nudge keeps values such as 0.13031 that are
/// stored just below their decimal form from losing the last digit.
pub fn truncate(x: f64, digits: usize) -> f64 {
    let scale = 10f64.powi(digits as i32);
    (x * scale + x.signum() * 1e-9).trunc() / scale
}

/// Fixed-point rendering without a negative zero.
pub fn fixed(x: f64, digits: usize) -> String {
    let s = format!("{x:.digits$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}
