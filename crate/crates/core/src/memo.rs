//! Memo tables shared by the dealer and player recursions.
//!
//! Values are deterministic functions of their keys, so two threads racing
//! to fill the same entry store identical numbers and entries never change
//! after insertion. [`SharedMemo`] is safe to use from many threads;
//! [`LocalMemo`] is the single-threaded variant without locking.

use std::cell::RefCell;

use dashmap::DashMap;
use rustc_hash::{FxBuildHasher, FxHashMap};

use crate::card::CardValue;
use crate::deck::Deck;
use crate::hand::Hand;

/// Identifies an unconditioned dealer distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DealerKey {
    pub up: CardValue,
    pub deck: Deck,
    pub h17: bool,
}

/// Identifies a hit expectation at a given remaining recursion depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HitKey {
    pub up: CardValue,
    pub hand: Hand,
    pub deck: Deck,
    pub rec: u8,
    pub h17: bool,
}

pub trait Memo {
    fn dealer(&self, key: &DealerKey) -> Option<[f64; 7]>;
    fn store_dealer(&self, key: DealerKey, probs: [f64; 7]);
    fn hit(&self, key: &HitKey) -> Option<f64>;
    fn store_hit(&self, key: HitKey, ev: f64);
}

#[derive(Default)]
pub struct SharedMemo {
    dealer: DashMap<DealerKey, [f64; 7], FxBuildHasher>,
    hit: DashMap<HitKey, f64, FxBuildHasher>,
}

impl SharedMemo {
    pub fn new() -> SharedMemo {
        SharedMemo::default()
    }

    pub fn dealer_entries(&self) -> usize {
        self.dealer.len()
    }

    pub fn hit_entries(&self) -> usize {
        self.hit.len()
    }

    /// Drop cached hit values, keeping dealer distributions.
    pub fn clear_hits(&self) {
        self.hit.clear();
    }
}

impl Memo for SharedMemo {
    #[inline]
    fn dealer(&self, key: &DealerKey) -> Option<[f64; 7]> {
        self.dealer.get(key).map(|v| *v)
    }

    fn store_dealer(&self, key: DealerKey, probs: [f64; 7]) {
        self.dealer.insert(key, probs);
    }

    #[inline]
    fn hit(&self, key: &HitKey) -> Option<f64> {
        self.hit.get(key).map(|v| *v)
    }

    fn store_hit(&self, key: HitKey, ev: f64) {
        self.hit.insert(key, ev);
    }
}

#[derive(Default)]
pub struct LocalMemo {
    dealer: RefCell<FxHashMap<DealerKey, [f64; 7]>>,
    hit: RefCell<FxHashMap<HitKey, f64>>,
}

impl LocalMemo {
    pub fn new() -> LocalMemo {
        LocalMemo::default()
    }
}

impl Memo for LocalMemo {
    #[inline]
    fn dealer(&self, key: &DealerKey) -> Option<[f64; 7]> {
        self.dealer.borrow().get(key).copied()
    }

    fn store_dealer(&self, key: DealerKey, probs: [f64; 7]) {
        self.dealer.borrow_mut().insert(key, probs);
    }

    #[inline]
    fn hit(&self, key: &HitKey) -> Option<f64> {
        self.hit.borrow().get(key).copied()
    }

    fn store_hit(&self, key: HitKey, ev: f64) {
        self.hit.borrow_mut().insert(key, ev);
    }
}
