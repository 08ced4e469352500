//! Brute-force reference for small shoes.
//!
//! The oracle never uses the engine's measure formulas: the hole card is
//! enumerated explicitly with its posterior given the player's view and
//! "no dealer natural", the player's next card is mixed over that
//! posterior, and the dealer is played out card by card from what is left.

use exactjack::dealer::dealer_dist_p;
use exactjack::expectation::expected_win;
use exactjack::{Action, CardValue, Deck, Error, Rules, SharedMemo, Solver};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub const TOL: f64 = 1e-10;
/// Dealer distributions are compared more tightly.
pub const DEALER_TOL: f64 = 1e-12;

pub type Counts = [u16; 10];

pub fn total(c: &Counts) -> u32 {
    c.iter().map(|&a| a as u32).sum()
}

pub fn minus(c: &Counts, i: usize) -> Counts {
    let mut out = *c;
    out[i] -= 1;
    out
}

/// Card values 1..=10 by index.
fn value(i: usize) -> u8 {
    i as u8 + 1
}

#[derive(Clone, Copy)]
struct H {
    hard: u8,
    ace: bool,
}

impl H {
    fn of(cards: &[usize]) -> H {
        cards.iter().fold(H { hard: 0, ace: false }, |h, &i| h.plus(i))
    }
    fn plus(self, i: usize) -> H {
        H {
            hard: self.hard + value(i),
            ace: self.ace || i == 0,
        }
    }
    fn soft(self) -> bool {
        self.ace && self.hard + 10 <= 21
    }
    fn total(self) -> u8 {
        if self.soft() {
            self.hard + 10
        } else {
            self.hard
        }
    }
}

pub fn partner(up: usize) -> Option<usize> {
    match up {
        0 => Some(9),
        9 => Some(0),
        _ => None,
    }
}

/// Outcome slots: 17..=21 at 0..=4, natural 5, bust 6.
fn dealer_play(h: H, two_cards: bool, shoe: &Counts, h17: bool, w: f64, out: &mut [f64; 7]) {
    let t = h.total();
    if two_cards && t == 21 {
        out[5] += w;
        return;
    }
    if t > 21 {
        out[6] += w;
        return;
    }
    let hits = t < 17 || (h17 && t == 17 && h.soft());
    if !hits {
        out[(t - 17) as usize] += w;
        return;
    }
    let n = total(shoe);
    if n == 0 {
        out[6] += w;
        return;
    }
    for i in 0..10 {
        if shoe[i] > 0 {
            let p = shoe[i] as f64 / n as f64;
            dealer_play(h.plus(i), false, &minus(shoe, i), h17, w * p, out);
        }
    }
}

fn dealer_oracle(up: usize, deck: &Counts, h17: bool) -> [f64; 7] {
    let mut out = [0.0; 7];
    let n = total(deck) as f64;
    for i in 0..10 {
        if deck[i] > 0 {
            let hand = H::of(&[up, i]);
            dealer_play(hand, true, &minus(deck, i), h17, deck[i] as f64 / n, &mut out);
        }
    }
    out
}

struct Oracle {
    up: usize,
    rules: Rules,
}

impl Oracle {
    /// Posterior of the hole card given the view and no dealer natural.
    fn posterior(&self, view: &Counts) -> Option<Vec<(usize, f64)>> {
        let allowed: Vec<usize> = (0..10).filter(|&i| view[i] > 0 && Some(i) != partner(self.up)).collect();
        let mass: f64 = allowed.iter().map(|&i| view[i] as f64).sum();
        (mass > 0.0).then(|| allowed.into_iter().map(|i| (i, view[i] as f64 / mass)).collect())
    }

    fn can_draw(view: &Counts) -> bool {
        total(view) >= 2
    }

    fn next_card(&self, view: &Counts) -> [f64; 10] {
        let mut p = [0.0; 10];
        let rest = (total(view) - 1) as f64;
        for (h, w) in self.posterior(view).unwrap() {
            let shoe = minus(view, h);
            for k in 0..10 {
                p[k] += w * shoe[k] as f64 / rest;
            }
        }
        p
    }

    fn stand(&self, hand: H, view: &Counts) -> f64 {
        if hand.total() > 21 {
            return -1.0;
        }
        let mut ev = 0.0;
        for (h, w) in self.posterior(view).unwrap() {
            let mut out = [0.0; 7];
            let dealer = H::of(&[self.up, h]);
            dealer_play(dealer, false, &minus(view, h), self.rules.dealer_hits_soft17, w, &mut out);
            let mine = hand.total();
            for (slot, &p) in out.iter().enumerate().filter(|(_, &p)| p > 0.0) {
                let sign = match slot {
                    6 => 1.0,
                    5 => unreachable!("natural excluded by the posterior"),
                    s => match mine.cmp(&(17 + s as u8)) {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.0,
                        std::cmp::Ordering::Less => -1.0,
                    },
                };
                ev += p * sign;
            }
        }
        ev
    }

    fn hit(&self, hand: H, view: &Counts) -> f64 {
        let p = self.next_card(view);
        let mut ev = 0.0;
        for (k, &pk) in p.iter().enumerate() {
            if pk == 0.0 {
                continue;
            }
            let next = hand.plus(k);
            let rest = minus(view, k);
            let stand = self.stand(next, &rest);
            ev += pk
                * if next.total() >= 21 || !Self::can_draw(&rest) {
                    stand
                } else {
                    stand.max(self.hit(next, &rest))
                };
        }
        ev
    }

    fn double(&self, hand: H, view: &Counts) -> f64 {
        let p = self.next_card(view);
        (0..10).filter(|&k| p[k] > 0.0).map(|k| 2.0 * p[k] * self.stand(hand.plus(k), &minus(view, k))).sum()
    }

    fn no_split(&self, hand: H, view: &Counts) -> f64 {
        let stand = self.stand(hand, view);
        if hand.total() >= 21 || !Self::can_draw(view) {
            return stand;
        }
        let mut best = stand.max(self.hit(hand, view));
        if self.rules.das {
            best = best.max(self.double(hand, view));
        }
        best
    }

    fn split_aces(&self, view: &Counts, rsa: bool) -> f64 {
        let p = self.next_card(view);
        let mut ev = 0.0;
        for (k, &pk) in p.iter().enumerate() {
            if pk == 0.0 {
                continue;
            }
            let rest = minus(view, k);
            let stand = self.stand(H::of(&[0, k]), &rest);
            ev += pk
                * if rsa && k == 0 && Self::can_draw(&rest) {
                    stand.max(self.split_aces(&rest, false))
                } else {
                    stand
                };
        }
        2.0 * ev
    }

    fn split(&self, card: usize, view: &Counts, rsp: bool) -> f64 {
        let p = self.next_card(view);
        let mut ev = 0.0;
        for (k, &pk) in p.iter().enumerate() {
            if pk == 0.0 {
                continue;
            }
            let rest = minus(view, k);
            let play = self.no_split(H::of(&[card, k]), &rest);
            ev += pk
                * if rsp && k == card && Self::can_draw(&rest) {
                    play.max(self.split(card, &rest, false))
                } else {
                    play
                };
        }
        2.0 * ev
    }

    /// (stand, hit, double, split) for a two-card start.
    fn start(&self, a: usize, b: usize, view: &Counts) -> (f64, Option<f64>, Option<f64>, Option<f64>) {
        let hand = H::of(&[a, b]);
        let stand = self.stand(hand, view);
        if !Self::can_draw(view) {
            return (stand, None, None, None);
        }
        let split = (a == b).then(|| {
            if a == 0 {
                self.split_aces(view, self.rules.rsa)
            } else {
                self.split(a, view, self.rules.rsp)
            }
        });
        (stand, Some(self.hit(hand, view)), Some(self.double(hand, view)), split)
    }

    fn best(&self, a: usize, b: usize, view: &Counts) -> f64 {
        let (s, h, d, p) = self.start(a, b, view);
        [Some(s), h, d, p].into_iter().flatten().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn ew_oracle(deck: &Counts, rules: Rules) -> f64 {
    let n = total(deck) as f64;
    let mut ev = 0.0;
    for u in 0..10 {
        if deck[u] == 0 {
            continue;
        }
        let oracle = Oracle { up: u, rules };
        let d1 = minus(deck, u);
        let w1 = deck[u] as f64 / n;
        for h in 0..10 {
            if d1[h] == 0 {
                continue;
            }
            let d2 = minus(&d1, h);
            let w2 = w1 * d1[h] as f64 / (n - 1.0);
            for a in 0..10 {
                if d2[a] == 0 {
                    continue;
                }
                let d3 = minus(&d2, a);
                let w3 = w2 * d2[a] as f64 / (n - 2.0);
                for b in 0..10 {
                    if d3[b] == 0 {
                        continue;
                    }
                    let w = w3 * d3[b] as f64 / (n - 3.0);
                    let dealer_nat = H::of(&[u, h]).total() == 21;
                    let player_nat = H::of(&[a, b]).total() == 21;
                    ev += w * match (dealer_nat, player_nat) {
                        (true, true) => 0.0,
                        (true, false) => -1.0,
                        (false, true) => 1.5,
                        (false, false) => {
                            let mut view = minus(&d3, b);
                            view[h] += 1;
                            oracle.best(a, b, &view)
                        }
                    };
                }
            }
        }
    }
    ev
}

fn card(i: usize) -> CardValue {
    CardValue::from_index(i)
}

fn close(label: &str, got: f64, want: f64) {
    assert!((got - want).abs() <= TOL, "{label}: engine {got:.15}, oracle {want:.15}");
}

fn random_deck(rng: &mut Xoshiro256PlusPlus, min: u32) -> Counts {
    let t = rng.random_range(min..=8);
    let mut c = [0u16; 10];
    for _ in 0..t {
        c[rng.random_range(0..10)] += 1;
    }
    c
}

fn random_rules(rng: &mut Xoshiro256PlusPlus) -> Rules {
    Rules {
        dealer_hits_soft17: rng.random(),
        das: rng.random(),
        rsa: rng.random(),
        rsp: rng.random(),
    }
}

/// Dealer distributions for every upcard of 250 random shoes, S17 and H17.
pub fn dealer_corpus() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    for case in 0..250 {
        let deck = random_deck(&mut rng, 2);
        let h17 = case % 2 == 1;
        let rules = Rules::default().with_h17(h17);
        for u in (0..10).filter(|&u| deck[u] > 0) {
            let rest = minus(&deck, u);
            let want = dealer_oracle(u, &rest, h17);
            let got = dealer_dist_p(card(u), &Deck::from_counts(rest), &rules).unwrap();
            for (slot, (&g, &w)) in got.probs().iter().zip(&want).enumerate() {
                let label = format!("deck {deck:?} up {} h17 {h17} slot {slot}", u + 1);
                assert!((g - w).abs() <= DEALER_TOL, "{label}: engine {g:.17}, oracle {w:.17}");
            }
        }
    }
}

/// Every action value for every two-card start of 250 random shoes.
pub fn action_corpus() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(12);
    let mut compared = 0usize;
    let mut degenerate = 0usize;
    for _ in 0..250 {
        let deck = random_deck(&mut rng, 4);
        let rules = random_rules(&mut rng);
        let memo = SharedMemo::new();
        let solver = Solver::new(rules, &memo);
        for u in (0..10).filter(|&u| deck[u] > 0) {
            let oracle = Oracle { up: u, rules };
            let d1 = minus(&deck, u);
            for a in (0..10).filter(|&a| d1[a] > 0) {
                let d2 = minus(&d1, a);
                for b in (a..10).filter(|&b| d2[b] > 0) {
                    let view = minus(&d2, b);
                    if total(&view) == 0 || H::of(&[a, b]).total() == 21 {
                        continue;
                    }
                    let deck_view = Deck::from_counts(view);
                    let label = format!("deck {deck:?} rules {} h17 {} up {} hand {}+{}", rules.bits(), rules.dealer_hits_soft17, u + 1, a + 1, b + 1);
                    if oracle.posterior(&view).is_none() {
                        let err = solver.best_action(card(a), card(b), card(u), &deck_view).unwrap_err();
                        assert!(matches!(err, Error::DegenerateCondition), "{label}: {err:?}");
                        degenerate += 1;
                        continue;
                    }
                    let e = solver.best_action(card(a), card(b), card(u), &deck_view).unwrap();
                    let (s, h, d, p) = oracle.start(a, b, &view);
                    close(&format!("{label} stand"), e.ev_stand, s);
                    for (name, got, want) in [("hit", e.ev_hit, h), ("double", e.ev_double, d), ("split", e.ev_split, p)] {
                        assert_eq!(got.is_some(), want.is_some(), "{label} {name} availability");
                        if let (Some(g), Some(w)) = (got, want) {
                            close(&format!("{label} {name}"), g, w);
                        }
                    }
                    close(&format!("{label} best"), e.best_ev(), oracle.best(a, b, &view));
                    if e.best != Action::Stand {
                        assert!(e.ev(e.best).unwrap() > e.ev_stand, "{label}: tie must resolve to stand");
                    }
                    // One more card, then the stand/hit choice of a longer hand.
                    if let Some(c) = (0..10).find(|&c| view[c] > 0 && total(&view) >= 2) {
                        let rest = minus(&view, c);
                        if oracle.posterior(&rest).is_some() {
                            let three = solver.evaluate_hand(&[card(a), card(b), card(c)], card(u), &Deck::from_counts(rest)).unwrap();
                            let hand = H::of(&[a, b, c]);
                            close(&format!("{label}+{} stand", c + 1), three.ev_stand, oracle.stand(hand, &rest));
                            if let Some(g) = three.ev_hit {
                                close(&format!("{label}+{} hit", c + 1), g, oracle.hit(hand, &rest));
                            }
                        }
                    }
                    compared += 1;
                }
            }
        }
    }
    assert!(compared > 5000, "only {compared} positions compared");
    assert!(degenerate > 0, "corpus never exercised a forced dealer natural");
}

/// Whole-game expectation of 220 random shoes.
pub fn expected_win_corpus() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(13);
    for _ in 0..220 {
        let deck = random_deck(&mut rng, 4);
        let rules = random_rules(&mut rng);
        let memo = SharedMemo::new();
        let solver = Solver::new(rules, &memo);
        let got = expected_win(&solver, &Deck::from_counts(deck)).unwrap().ew;
        let want = ew_oracle(&deck, rules);
        close(&format!("deck {deck:?} rules {} h17 {}", rules.bits(), rules.dealer_hits_soft17), got, want);
    }
}

