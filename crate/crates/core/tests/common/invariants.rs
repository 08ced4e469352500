//! Property checks shared by the proptest suite and the acceptance run.

use exactjack::dealer::{dealer_dist_p, dealer_dist_q};
use exactjack::expectation::expected_win;
use exactjack::{
    simulate_dealer, simulate_round, Action, ActionEvaluation, CardValue, DealerOutcome, Deck, Error, Hand,
    LocalMemo, Rules, SharedMemo, SimReport, Solver,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub fn card() -> impl Strategy<Value = CardValue> {
    (1u8..=10).prop_map(|v| CardValue::new(v).unwrap())
}

pub fn rules() -> impl Strategy<Value = Rules> {
    any::<[bool; 4]>().prop_map(|[h17, das, rsa, rsp]| Rules {
        dealer_hits_soft17: h17,
        das,
        rsa,
        rsp,
    })
}

/// Finite decks with `lo..=hi` cards drawn with standard-shoe weights.
pub fn deck(lo: usize, hi: usize) -> impl Strategy<Value = Deck> {
    prop::collection::vec(0usize..13, lo..=hi).prop_map(|cards| {
        let mut counts = [0u16; 10];
        for c in cards {
            counts[c.min(9)] += 1;
        }
        Deck::from_counts(counts)
    })
}

/// A two-card start that the deck could have produced, with the view deck.
pub fn position(lo: usize, hi: usize) -> impl Strategy<Value = (Deck, CardValue, CardValue, CardValue)> {
    (deck(lo, hi), card(), card(), card()).prop_filter_map("cards not in deck", |(d, up, a, b)| {
        let view = d.without_all(&[up, a, b]).ok()?;
        (!view.is_empty()).then_some((view, up, a, b))
    })
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

/// P and Q card probabilities are distributions; removing the hole-card
/// ace mass can only raise the chance that the next card is an ace.
pub fn card_probabilities_normalized(deck: Deck) -> Result<(), TestCaseError> {
    if deck.is_empty() {
        return Ok(());
    }
    let p: Vec<f64> = CardValue::ALL.iter().map(|&k| deck.prob_p(k).unwrap()).collect();
    let sum: f64 = p.iter().sum();
    check((sum - 1.0).abs() < 1e-12, || format!("P sums to {sum}"))?;
    for up in CardValue::ALL {
        let q = match deck.probs_q(up) {
            Ok(q) => q,
            Err(Error::DegenerateCondition) => continue,
            // the hole card takes the only card
            Err(Error::EmptyDeck) if deck.total() == 1 => continue,
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        let sum: f64 = q.iter().sum();
        check((sum - 1.0).abs() < 1e-12, || format!("Q (up {up}) sums to {sum}"))?;
        check(q.iter().all(|&x| x >= 0.0), || format!("negative Q for up {up}"))?;
        if up == CardValue::TEN && deck.count(CardValue::ACE) > 0 {
            check(q[0] >= p[0], || format!("Q[ace] {} < P[ace] {}", q[0], p[0]))?;
        }
    }
    Ok(())
}

/// Q against enumeration of every (hole card, next card) assignment with
/// a non-natural hole card.
pub fn q_matches_enumeration(deck: Deck, up: CardValue) -> Result<(), TestCaseError> {
    let Some(counts) = deck.counts() else { return Ok(()) };
    let t: f64 = deck.total() as f64;
    if t < 2.0 {
        return Ok(());
    }
    let partner = up.natural_partner();
    let mut joint = [0.0; 10];
    let mut mass = 0.0;
    for h in 0..10 {
        if counts[h] == 0 || partner.map(|p| p.index()) == Some(h) {
            continue;
        }
        let ph = counts[h] as f64 / t;
        mass += ph;
        for k in 0..10 {
            let left = counts[k] - u16::from(k == h);
            joint[k] += ph * left as f64 / (t - 1.0);
        }
    }
    let got = deck.probs_q(up);
    if mass == 0.0 {
        return check(got == Err(Error::DegenerateCondition), || format!("expected degenerate, got {got:?}"));
    }
    let got = got.map_err(|e| TestCaseError::fail(format!("{e}")))?;
    for k in 0..10 {
        let want = joint[k] / mass;
        check((got[k] - want).abs() < 1e-12, || format!("Q[{}] {} vs {}", k + 1, got[k], want))?;
    }
    Ok(())
}

pub fn remove_then_add_restores(deck: Deck, k: CardValue) -> Result<(), TestCaseError> {
    let mut d = deck;
    if d.remove(k).is_err() {
        return check(deck.count(k) == 0, || "remove failed on a present card".into());
    }
    d.add(k);
    check(d == deck, || format!("{d:?} != {deck:?}"))
}

/// Every card sequence of length up to five against the best ace
/// assignment.
pub fn hand_totals_exhaustive() -> Result<(), String> {
    fn walk(cards: &mut Vec<u8>) -> Result<(), String> {
        if !cards.is_empty() {
            let values: Vec<CardValue> = cards.iter().map(|&v| CardValue::new(v).unwrap()).collect();
            let h = Hand::from_cards(&values);
            let hard: u8 = cards.iter().sum();
            let aces = cards.iter().filter(|&&c| c == 1).count() as u8;
            let best = (0..=aces).map(|e| hard + 10 * e).filter(|&s| s <= 21).max();
            let want = match best {
                Some(s) => (s, s != hard),
                None => (hard, false),
            };
            if (h.total(), h.is_soft()) != want {
                return Err(format!("{cards:?}: {h} vs {want:?}"));
            }
            // a lone ace is soft 11
            if cards.len() >= 2 && h.is_soft() && !(12..=21).contains(&h.total()) {
                return Err(format!("{cards:?}: soft {h}"));
            }
        }
        if cards.len() < 5 {
            for v in 1..=10 {
                cards.push(v);
                walk(cards)?;
                cards.pop();
            }
        }
        Ok(())
    }
    walk(&mut Vec::new())
}

pub fn dealer_distributions_valid(deck: Deck, up: CardValue, h17: bool) -> Result<(), TestCaseError> {
    if deck.is_empty() {
        return Ok(());
    }
    let rules = Rules::default().with_h17(h17);
    let p = dealer_dist_p(up, &deck, &rules).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    check((p.sum() - 1.0).abs() < 1e-12, || format!("P sums to {}", p.sum()))?;
    check(p.probs().iter().all(|&x| x >= 0.0), || "negative P".into())?;
    let q = match dealer_dist_q(up, &deck, &rules) {
        Ok(q) => q,
        Err(Error::DegenerateCondition) => return Ok(()),
        Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
    };
    check((q.sum() - 1.0).abs() < 1e-12, || format!("Q sums to {}", q.sum()))?;
    check(q.probs().iter().all(|&x| x >= 0.0), || "negative Q".into())?;
    check(q.prob(DealerOutcome::NATURAL) == 0.0, || "Q has a natural".into())?;
    if up.natural_partner().is_none() {
        check(p.probs() == q.probs(), || format!("P {p:?} != Q {q:?} for up {up}"))?;
    }
    Ok(())
}

fn evaluate(solver: &Solver<'_, LocalMemo>, view: &Deck, up: CardValue, a: CardValue, b: CardValue) -> Result<Option<ActionEvaluation>, TestCaseError> {
    match solver.best_action(a, b, up, view) {
        Ok(e) => Ok(Some(e)),
        Err(Error::DegenerateCondition) => Ok(None),
        Err(Error::InvalidArgument(_)) if a.is_natural_with(b) => Ok(None),
        Err(e) => Err(TestCaseError::fail(format!("{e}"))),
    }
}

pub fn ev_bounds(view: Deck, up: CardValue, a: CardValue, b: CardValue, rules: Rules) -> Result<(), TestCaseError> {
    let memo = LocalMemo::new();
    let solver = Solver::new(rules, &memo);
    let Some(e) = evaluate(&solver, &view, up, a, b)? else { return Ok(()) };
    let within = |x: Option<f64>, lim: f64| x.is_none_or(|x| x.abs() <= lim + 1e-12);
    check(within(Some(e.ev_stand), 1.0), || format!("stand {e:?}"))?;
    check(within(e.ev_hit, 1.0), || format!("hit {e:?}"))?;
    check(within(e.ev_double, 2.0), || format!("double {e:?}"))?;
    check(within(e.ev_split, 4.0), || format!("split {e:?}"))
}

pub fn hit_without_lookahead_is_half_double(view: Deck, up: CardValue, a: CardValue, b: CardValue) -> Result<(), TestCaseError> {
    if !view.can_deal_player() || a.is_natural_with(b) {
        return Ok(());
    }
    let memo = LocalMemo::new();
    let solver = Solver::new(Rules::default(), &memo);
    let hand = Hand::from_cards(&[a, b]);
    let (hit, double) = match (solver.ev_hit_depth(hand, up, &view, 0), solver.ev_double(hand, up, &view)) {
        (Ok(h), Ok(d)) => (h, d),
        (Err(Error::DegenerateCondition), _) => return Ok(()),
        (h, d) => return Err(TestCaseError::fail(format!("{h:?} {d:?}"))),
    };
    check(hit == double / 2.0, || format!("hit {hit} vs double/2 {}", double / 2.0))
}

pub fn hit_monotone_in_depth(view: Deck, up: CardValue, a: CardValue, b: CardValue, h17: bool) -> Result<(), TestCaseError> {
    if !view.can_deal_player() || a.is_natural_with(b) {
        return Ok(());
    }
    let memo = LocalMemo::new();
    let solver = Solver::new(Rules::default().with_h17(h17), &memo);
    let hand = Hand::from_cards(&[a, b]);
    let mut prev = f64::NEG_INFINITY;
    let mut values = Vec::new();
    for rec in 0..=13 {
        let v = match solver.ev_hit_depth(hand, up, &view, rec) {
            Ok(v) => v,
            Err(Error::DegenerateCondition) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        check(v >= prev - 1e-12, || format!("rec {rec}: {v} < {prev}"))?;
        prev = v;
        values.push(v);
    }
    check((values[13] - values[9]).abs() <= 1e-12, || format!("rec 9 {} vs rec 13 {}", values[9], values[13]))
}

/// Holds when cards are plentiful; on a two-card remainder such as
/// {5, 10} against a 6, hitting soft 21 strands the dealer without cards.
pub fn stand_on_21_dominates_hit(view: Deck, up: CardValue, soft: bool) -> Result<(), TestCaseError> {
    if !view.can_deal_player() {
        return Ok(());
    }
    let memo = LocalMemo::new();
    let solver = Solver::new(Rules::default(), &memo);
    let hand = Hand::new(21, soft).unwrap();
    match (solver.ev_stand(hand, up, &view), solver.ev_hit(hand, up, &view)) {
        (Ok(s), Ok(h)) => check(s >= h, || format!("stand {s} < hit {h}")),
        (Err(Error::DegenerateCondition), _) => Ok(()),
        (s, h) => Err(TestCaseError::fail(format!("{s:?} {h:?}"))),
    }
}

/// Ties resolve by the order stand, hit, double, split.
pub fn tie_break_is_fixed(evs: [i8; 4], present: [bool; 3]) -> Result<(), TestCaseError> {
    let v = evs.map(|x| f64::from(x) / 2.0);
    let opt = |i: usize| present[i - 1].then_some(v[i]);
    let e = ActionEvaluation::new(v[0], opt(1), opt(2), opt(3));
    let again = ActionEvaluation::new(v[0], opt(1), opt(2), opt(3));
    check(e.best == again.best, || "non-deterministic best".into())?;
    let order = [Action::Stand, Action::Hit, Action::Double, Action::Split];
    let candidates: Vec<(Action, f64)> = order.iter().enumerate().filter_map(|(i, &a)| (i == 0 || present[i - 1]).then_some((a, v[i]))).collect();
    let max = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let want = candidates.iter().find(|c| c.1 == max).unwrap().0;
    check(e.best == want, || format!("{e:?}, expected {want}"))
}

/// Allowing a rule never lowers a split value or the best value.
pub fn extra_rules_never_hurt(view: Deck, up: CardValue, a: CardValue, base: Rules) -> Result<(), TestCaseError> {
    for flip in 0..3 {
        let mut off = base;
        let mut on = base;
        match flip {
            0 => (off.das, on.das) = (false, true),
            1 => (off.rsa, on.rsa) = (false, true),
            _ => (off.rsp, on.rsp) = (false, true),
        }
        let (m1, m2) = (LocalMemo::new(), LocalMemo::new());
        let (s_off, s_on) = (Solver::new(off, &m1), Solver::new(on, &m2));
        let (Some(e_off), Some(e_on)) = (evaluate(&s_off, &view, up, a, a)?, evaluate(&s_on, &view, up, a, a)?) else {
            return Ok(());
        };
        check(e_on.best_ev() >= e_off.best_ev() - 1e-12, || format!("flip {flip}: {e_on:?} < {e_off:?}"))?;
        if let (Some(x), Some(y)) = (e_on.ev_split, e_off.ev_split) {
            check(x >= y - 1e-12, || format!("flip {flip}: split {x} < {y}"))?;
        }
    }
    Ok(())
}

pub fn expected_win_decomposes(deck: Deck, rules: Rules) -> Result<(), TestCaseError> {
    let memo = SharedMemo::new();
    let solver = Solver::new(rules, &memo);
    let g = expected_win(&solver, &deck).map_err(|e| TestCaseError::fail(format!("{e}")))?;
    let sum: f64 = g.per_upcard.iter().map(|(&d, &w)| deck.prob_p(d).unwrap() * w).sum();
    check((sum - g.ew).abs() < 1e-12, || format!("{sum} vs {}", g.ew))
}

/// Frequencies sum to one and the standard error is the sample deviation
/// over the square root of n; `value` maps an outcome label to the
/// per-trial value.
pub fn report_consistent(r: &SimReport, value: impl Fn(&str) -> f64) -> Result<(), TestCaseError> {
    if r.n == 0 {
        return check(r.freq.is_empty(), || "frequencies without trials".into());
    }
    let total: f64 = r.freq.values().sum();
    check((total - 1.0).abs() < 1e-12, || format!("freq sums to {total}"))?;
    let n = r.n as f64;
    let mean: f64 = r.freq.iter().map(|(l, f)| value(l) * f).sum();
    let second: f64 = r.freq.iter().map(|(l, f)| value(l).powi(2) * f).sum();
    let var = ((second - mean * mean) * n / (n - 1.0)).max(0.0);
    let stderr = (var / n).sqrt();
    check((mean - r.mean).abs() < 1e-9, || format!("mean {} vs {mean}", r.mean))?;
    check((stderr - r.stderr).abs() < 1e-9, || format!("stderr {} vs {stderr}", r.stderr))
}

pub fn simulation_reports_consistent(deck: Deck, up: CardValue, seed: u64) -> Result<(), TestCaseError> {
    if deck.total() < 4 {
        return Ok(());
    }
    let rules = Rules::default();
    if let Ok(r) = simulate_dealer(up, &deck, &rules, 500, seed) {
        report_consistent(&r, |l| f64::from(u8::from(l == "bust")))?;
        check(r == simulate_dealer(up, &deck, &rules, 500, seed).unwrap(), || "dealer run not reproducible".into())?;
    }
    let memo = SharedMemo::new();
    let solver = Solver::new(rules, &memo);
    match simulate_round(&solver, &deck, 300, seed) {
        Ok(r) => report_consistent(&r, |l| l.parse().unwrap()),
        Err(Error::DegenerateCondition) => Ok(()),
        Err(e) => Err(TestCaseError::fail(format!("{e}"))),
    }
}

/// A pair start: the view deck, upcard and pair card.
pub fn pair_position(lo: usize, hi: usize) -> impl Strategy<Value = (Deck, CardValue, CardValue)> {
    (deck(lo, hi), card(), card()).prop_filter_map("cards not in deck", |(d, up, a)| {
        let view = d.without_all(&[up, a, a]).ok()?;
        (!view.is_empty()).then_some((view, up, a))
    })
}

/// One deck with up to twelve random cards removed.
pub fn depleted_deck() -> impl Strategy<Value = Deck> {
    prop::collection::vec(card(), 0..=12).prop_map(|gone| {
        let mut d = Deck::new(1).unwrap();
        for k in gone {
            let _ = d.remove(k);
        }
        d
    })
}

/// Run every property with a fixed seed; returns the failures.
pub fn run_all(cases: u32) -> Vec<String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut failures = Vec::new();
    let mut note = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    macro_rules! prop {
        ($name:literal, $strategy:expr, $f:expr) => {{
            let mut runner = TestRunner::new_with_rng(config.clone(), proptest::test_runner::TestRng::deterministic_rng(config.rng_algorithm));
            note($name, runner.run(&$strategy, $f).map_err(|e| e.to_string()));
        }};
    }
    prop!("card probabilities", deck(0, 40), card_probabilities_normalized);
    prop!("Q enumeration", (deck(0, 8), prop::sample::select(vec![CardValue::ACE, CardValue::TEN])), |(d, up)| q_matches_enumeration(d, up));
    prop!("remove/add", (deck(0, 30), card()), |(d, k)| remove_then_add_restores(d, k));
    note("hand totals", hand_totals_exhaustive());
    prop!("dealer distributions", (deck(1, 30), card(), any::<bool>()), |(d, up, h17)| dealer_distributions_valid(d, up, h17));
    prop!("EV bounds", (position(4, 20), rules()), |((v, up, a, b), r)| ev_bounds(v, up, a, b, r));
    prop!("hit at depth 0", position(4, 20), |(v, up, a, b)| hit_without_lookahead_is_half_double(v, up, a, b));
    prop!("hit monotone in depth", (position(4, 20), any::<bool>()), |((v, up, a, b), h17)| hit_monotone_in_depth(v, up, a, b, h17));
    prop!("stand on 21", (depleted_deck(), card(), any::<bool>()), |(v, up, soft)| stand_on_21_dominates_hit(v, up, soft));
    prop!("tie-break", (any::<[i8; 4]>().prop_map(|e| e.map(|x| x % 3)), any::<[bool; 3]>()), |(e, p)| tie_break_is_fixed(e, p));
    prop!("rule supersets", (pair_position(4, 20), rules()), |((v, up, a), r)| extra_rules_never_hurt(v, up, a, r));
    prop!("expected win decomposition", (deck(4, 14), rules()), |(d, r)| expected_win_decomposes(d, r));
    prop!("simulation reports", (deck(4, 30), card(), any::<u64>()), |(d, up, s)| simulation_reports_consistent(d, up, s));
    failures
}
