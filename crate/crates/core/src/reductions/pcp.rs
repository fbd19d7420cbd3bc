//! Post correspondence instances, their ditree encodings, and the quasi-acyclic
//! automaton that accepts an encoding iff it encodes a solution.
//!
//! The automaton is `alarm(A₁ × A₂)`:
//!
//! * `A₁` replays the upper and lower words of every white node, one bit per
//!   round, each node starting when its fuse predecessor emits its last bit. The
//!   root latches a mismatch when the two streams differ in some round.
//! * `A₂` checks the fuses with two signals per white node. Gray side-fuse nodes
//!   forward `σ′₁` one node per round and `σ′₂` one node per `i` rounds. A white
//!   node emits `Σ₁` at round 1 (no predecessor) or when its predecessor emits
//!   `Σ₂`, requires `σ′₁` to reach it in exactly that round, and emits `Σ₂` when
//!   `σ′₂` leaves the last side-fuse node.
//! * The alarm layer enters an absorbing rejecting state at every node that sees
//!   an unexpected neighborhood, and at every node that sees an alarm.
//!
//! Timing convention: a node *emits* a signal in the round its state first
//! carries it, and a neighbor *sees* it in that same round (it reacts one round
//! later). Emission rounds match [`expected_signal_times`] with offset 0.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::automata::{
    product, DistAutomaton, Init, Move, ProductMode, ProductState, StateId, StateSpace, SymbolId,
    TransitionRule,
};
use crate::error::{Error, Result};
use crate::graphs::{Digraph, PointedDigraph};
use crate::runtime::Runner;

/// Label of the root.
pub const ROOT_LABEL: &str = "x";

/// Largest automaton or encoding we are willing to build.
const SIZE_LIMIT: u128 = 1 << 22;

/// Tiles `i ↦ (u_i, v_i)` over `{0, 1}`, indexed by distinct odd primes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcpInstance {
    #[serde(with = "index_keys")]
    pub tiles: BTreeMap<u64, (String, String)>,
}

/// Tile indices as JSON object keys, which are strings.
mod index_keys {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    type Tiles = BTreeMap<u64, (String, String)>;

    pub fn serialize<S: Serializer>(tiles: &Tiles, s: S) -> Result<S::Ok, S::Error> {
        let keyed: BTreeMap<String, &(String, String)> = tiles.iter().map(|(i, t)| (i.to_string(), t)).collect();
        keyed.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Tiles, D::Error> {
        BTreeMap::<String, (String, String)>::deserialize(d)?
            .into_iter()
            .map(|(k, t)| {
                k.parse::<u64>()
                    .map(|i| (i, t))
                    .map_err(|_| D::Error::custom(format!("tile index {k:?} is not a number")))
            })
            .collect()
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

impl PcpInstance {
    pub fn new<S: Into<String>>(tiles: impl IntoIterator<Item = (u64, S, S)>) -> Result<Self> {
        let inst = PcpInstance {
            tiles: tiles
                .into_iter()
                .map(|(i, u, v)| (i, (u.into(), v.into())))
                .collect(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tiles.is_empty() {
            return Err(Error::InvalidInstance("no tiles".into()));
        }
        for (&i, (u, v)) in &self.tiles {
            if i <= 2 || !is_prime(i) {
                return Err(Error::InvalidInstance(format!("index {i} is not an odd prime")));
            }
            for w in [u, v] {
                if w.is_empty() || !w.chars().all(|c| c == '0' || c == '1') {
                    return Err(Error::InvalidInstance(format!(
                        "tile {i} has word {w:?}; words must be nonempty over {{0,1}}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.tiles.keys().copied()
    }

    fn tile(&self, i: u64) -> Result<&(String, String)> {
        self.tiles
            .get(&i)
            .ok_or_else(|| Error::InvalidSequence(format!("unknown index {i}")))
    }

    /// `(u_s, v_s)` for a sequence `s`.
    pub fn concatenations(&self, seq: &[u64]) -> Result<(String, String)> {
        let mut upper = String::new();
        let mut lower = String::new();
        for &i in seq {
            let (u, v) = self.tile(i)?;
            upper.push_str(u);
            lower.push_str(v);
        }
        Ok((upper, lower))
    }
}

pub fn pcp_check_solution(inst: &PcpInstance, seq: &[u64]) -> Result<bool> {
    if seq.is_empty() {
        return Err(Error::InvalidSequence("solutions are nonempty".into()));
    }
    let (u, v) = inst.concatenations(seq)?;
    Ok(u == v)
}

/// Shortest solution of length at most `max_len`, least in index order among
/// those of that length.
pub fn pcp_brute_force(inst: &PcpInstance, max_len: usize) -> Option<Vec<u64>> {
    fn search(
        inst: &PcpInstance,
        seq: &mut Vec<u64>,
        upper: &str,
        lower: &str,
        len: usize,
    ) -> bool {
        if seq.len() == len {
            return upper == lower;
        }
        for (&i, (u, v)) in &inst.tiles {
            let (nu, nl) = (format!("{upper}{u}"), format!("{lower}{v}"));
            // One concatenation must stay a prefix of the other.
            if !(nu.starts_with(&nl) || nl.starts_with(&nu)) {
                continue;
            }
            seq.push(i);
            if search(inst, seq, &nu, &nl, len) {
                return true;
            }
            seq.pop();
        }
        false
    }
    (1..=max_len).find_map(|len| {
        let mut seq = Vec::new();
        search(inst, &mut seq, "", "", len).then_some(seq)
    })
}

/// Emission rounds of `Σ₁` and `Σ₂` for one child of the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalTimes {
    pub sigma1: u128,
    pub sigma2: u128,
}

/// Child `k` emits `Σ₁` at `i₁⋯i_{k-1}` and `Σ₂` at `i₁⋯i_k`.
pub fn expected_signal_times(inst: &PcpInstance, seq: &[u64]) -> Result<Vec<SignalTimes>> {
    let mut product = 1u128;
    seq.iter()
        .map(|&i| {
            inst.tile(i)?;
            let sigma1 = product;
            product = product.saturating_mul(i as u128);
            Ok(SignalTimes {
                sigma1,
                sigma2: product,
            })
        })
        .collect()
}

/// Ditree encoding of `seq` with each fuse listing the prefix in sequence order.
///
/// Node 0 is the root and nodes `1..=n` are its children in sequence order.
pub fn pcp_encode_solution(inst: &PcpInstance, seq: &[u64]) -> Result<PointedDigraph> {
    let orders: Vec<Vec<u64>> = (0..seq.len()).map(|k| seq[..k].to_vec()).collect();
    pcp_encode_solution_with_order(inst, seq, &orders)
}

/// Ditree encoding of `seq` where the fuse of child `k` lists `fuse_orders[k]`
/// from the bottom up; each must be a permutation of `seq[..k]`.
pub fn pcp_encode_solution_with_order(
    inst: &PcpInstance,
    seq: &[u64],
    fuse_orders: &[Vec<u64>],
) -> Result<PointedDigraph> {
    inst.validate()?;
    if seq.is_empty() {
        return Err(Error::InvalidSequence("solutions are nonempty".into()));
    }
    for &i in seq {
        inst.tile(i)?;
    }
    if fuse_orders.len() != seq.len() {
        return Err(Error::InvalidSequence(format!(
            "{} fuse orders for {} children",
            fuse_orders.len(),
            seq.len()
        )));
    }
    for (k, order) in fuse_orders.iter().enumerate() {
        let mut a = order.clone();
        let mut b = seq[..k].to_vec();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::InvalidSequence(format!(
                "fuse {order:?} of child {} is not a permutation of {:?}",
                k + 1,
                &seq[..k]
            )));
        }
    }
    let mut size = 1 + seq.len() as u128;
    for order in fuse_orders {
        let mut p = 1u128;
        for &i in order {
            size = size.saturating_add(1 + p);
            p = p.saturating_mul(i as u128);
        }
        size = size.saturating_add(p);
    }
    if size > SIZE_LIMIT {
        return Err(Error::BudgetExceeded {
            what: "encoding nodes",
            needed: size,
            limit: SIZE_LIMIT,
        });
    }

    let mut labels: Vec<String> = vec![ROOT_LABEL.into()];
    labels.extend(seq.iter().map(|i| i.to_string()));
    let mut edges = Vec::new();
    let add = |labels: &mut Vec<String>, label: String| {
        labels.push(label);
        labels.len() - 1
    };
    for (k, order) in fuse_orders.iter().enumerate() {
        let child = k + 1;
        edges.push((child, 0));
        let mut chain: Vec<(usize, u64)> = order
            .iter()
            .map(|&i| (add(&mut labels, i.to_string()), i))
            .collect();
        chain.push((child, seq[k]));
        for pair in chain.windows(2) {
            edges.push((pair[0].0, pair[1].0));
        }
        let mut p = 1u64;
        for &(node, i) in &chain {
            let mut prev = None;
            for _ in 0..p {
                let g = add(&mut labels, format!("{i}'"));
                if let Some(u) = prev {
                    edges.push((u, g));
                }
                prev = Some(g);
            }
            edges.push((prev.expect("side fuses are nonempty"), node));
            p *= i;
        }
    }
    PointedDigraph::new(Digraph::new(1, vec![edges], labels)?, 0)
}

// ---------------------------------------------------------------------------
// Component automata

/// Position in a word: not started, at bit `j` (1-based), or finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Wait,
    Pos(u32),
    Fin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum A1Root {
    Watch,
    Accept,
    Dead,
}

/// States of the bit-stream automaton. `tile` is a position in index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum A1State {
    Root(A1Root),
    Gray(usize),
    White { tile: usize, upper: Stream, lower: Stream },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fire1 {
    Before,
    Pulse,
    After,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fire2 {
    Idle,
    /// Rounds left before the pulse.
    Count(u32),
    Pulse,
    After,
}

/// Signal output of a white node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Emit {
    Idle,
    /// Emitting `Σ₁`.
    S1,
    Mid,
    /// Emitting the pre-signal `p₂`.
    P2,
    /// Emitting `Σ₂`.
    S2,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum A2Root {
    Start,
    First,
    Loop,
    Accept,
    Reject,
}

/// States of the fuse-checking automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum A2State {
    Root(A2Root),
    Gray { tile: usize, s1: Fire1, s2: Fire2 },
    /// `age` counts rounds, saturating at 2.
    White { tile: usize, age: u8, out: Emit },
    Bad { tile: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Root,
    White(usize),
    Gray(usize),
}

/// Tile data shared by the components.
#[derive(Debug, Clone)]
struct Tiles {
    index: Vec<u64>,
    upper: Vec<Vec<u8>>,
    lower: Vec<Vec<u8>>,
}

impl Tiles {
    fn new(inst: &PcpInstance) -> Self {
        let bits = |w: &str| w.bytes().map(|b| b - b'0').collect();
        Tiles {
            index: inst.indices().collect(),
            upper: inst.tiles.values().map(|(u, _)| bits(u)).collect(),
            lower: inst.tiles.values().map(|(_, v)| bits(v)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.index.len()
    }

    /// Alphabet: the root label, then `i` and `i′` for every index.
    fn alphabet(&self) -> Vec<String> {
        let mut out = vec![ROOT_LABEL.to_owned()];
        for i in &self.index {
            out.push(i.to_string());
            out.push(format!("{i}'"));
        }
        out
    }

    fn kind_of_symbol(&self, s: SymbolId) -> Kind {
        match s.index() {
            0 => Kind::Root,
            n if n % 2 == 1 => Kind::White((n - 1) / 2),
            n => Kind::Gray((n - 2) / 2),
        }
    }
}

/// A transition that depends on the own state and a bitmask of boolean
/// observations of the neighbor set. Successors are enumerated over every
/// observation mask, which over-approximates the reachable ones.
trait Observer: Send + Sync + fmt::Debug {
    fn state_count(&self) -> usize;
    fn state_name(&self, q: StateId) -> String;
    fn is_accepting(&self, q: StateId) -> bool;
    fn observe(&self, q: StateId, neighbors: &[StateId]) -> u32;
    fn observation_bits(&self, q: StateId) -> u32;
    fn advance(&self, q: StateId, observed: u32) -> StateId;
}

#[derive(Debug)]
struct Observed<O> {
    inner: O,
    symbols: usize,
}

impl<O: Observer> TransitionRule for Observed<O> {
    fn state_count(&self) -> usize {
        self.inner.state_count()
    }

    fn state_name(&self, q: StateId) -> String {
        self.inner.state_name(q)
    }

    fn is_accepting(&self, q: StateId) -> bool {
        self.inner.is_accepting(q)
    }

    fn next(&self, _label: SymbolId, current: StateId, neighbors: &[Vec<StateId>]) -> StateId {
        self.inner
            .advance(current, self.inner.observe(current, &neighbors[0]))
    }

    fn moves(&self, current: StateId) -> Option<Vec<Move>> {
        let alone = self.inner.advance(current, self.inner.observe(current, &[]));
        let mut targets: Vec<StateId> = (0..1u32 << self.inner.observation_bits(current))
            .map(|m| self.inner.advance(current, m))
            .collect();
        targets.sort_unstable();
        targets.dedup();
        let mut out = Vec::new();
        for label in (0..self.symbols as u32).map(SymbolId) {
            out.push(Move {
                label,
                nonempty: 0,
                target: alone,
            });
            out.extend(targets.iter().map(|&target| Move {
                label,
                nonempty: 1,
                target,
            }));
        }
        Some(out)
    }
}

#[derive(Debug)]
struct BitStreams {
    tiles: Arc<Tiles>,
    space: StateSpace<A1State>,
}

impl BitStreams {
    fn new(tiles: Arc<Tiles>) -> Self {
        let mut states = vec![
            A1State::Root(A1Root::Watch),
            A1State::Root(A1Root::Accept),
            A1State::Root(A1Root::Dead),
        ];
        let streams = |n: usize| {
            std::iter::once(Stream::Wait)
                .chain((1..=n as u32).map(Stream::Pos))
                .chain(std::iter::once(Stream::Fin))
                .collect::<Vec<_>>()
        };
        for t in 0..tiles.len() {
            states.push(A1State::Gray(t));
            for &upper in &streams(tiles.upper[t].len()) {
                for &lower in &streams(tiles.lower[t].len()) {
                    states.push(A1State::White {
                        tile: t,
                        upper,
                        lower,
                    });
                }
            }
        }
        BitStreams {
            tiles,
            space: StateSpace::new(states),
        }
    }

    fn initial(&self, kind: Kind) -> StateId {
        self.space.id(&match kind {
            Kind::Root => A1State::Root(A1Root::Watch),
            Kind::Gray(t) => A1State::Gray(t),
            Kind::White(t) => A1State::White {
                tile: t,
                upper: Stream::Wait,
                lower: Stream::Wait,
            },
        })
    }

    fn kind(&self, q: StateId) -> Kind {
        match *self.space.get(q) {
            A1State::Root(_) => Kind::Root,
            A1State::Gray(t) => Kind::Gray(t),
            A1State::White { tile, .. } => Kind::White(tile),
        }
    }

    fn bit(word: &[u8], s: Stream) -> Option<u8> {
        match s {
            Stream::Pos(j) => Some(word[j as usize - 1]),
            _ => None,
        }
    }

    fn advance_stream(s: Stream, len: usize, start: bool) -> Stream {
        match s {
            Stream::Wait if start => Stream::Pos(1),
            Stream::Wait => Stream::Wait,
            Stream::Pos(j) if (j as usize) < len => Stream::Pos(j + 1),
            Stream::Pos(_) | Stream::Fin => Stream::Fin,
        }
    }
}

// Observation bits of white nodes.
const W_HAS_WHITE: u32 = 1;
const W_UPPER_LAST: u32 = 2;
const W_LOWER_LAST: u32 = 4;
// Observation bits of the root: bits seen on each stream, and completion.
const R_UPPER0: u32 = 1;
const R_UPPER1: u32 = 2;
const R_LOWER0: u32 = 4;
const R_LOWER1: u32 = 8;
const R_ANY_WHITE: u32 = 16;
const R_ALL_FIN: u32 = 32;

impl Observer for BitStreams {
    fn state_count(&self) -> usize {
        self.space.len()
    }

    fn state_name(&self, q: StateId) -> String {
        let stream = |s: Stream| match s {
            Stream::Wait => "o".to_owned(),
            Stream::Pos(j) => j.to_string(),
            Stream::Fin => "f".to_owned(),
        };
        match *self.space.get(q) {
            A1State::Root(r) => format!("x:{r:?}"),
            A1State::Gray(t) => format!("{}'", self.tiles.index[t]),
            A1State::White { tile, upper, lower } => {
                format!("{}:{}/{}", self.tiles.index[tile], stream(upper), stream(lower))
            }
        }
    }

    fn is_accepting(&self, q: StateId) -> bool {
        *self.space.get(q) == A1State::Root(A1Root::Accept)
    }

    fn observe(&self, q: StateId, neighbors: &[StateId]) -> u32 {
        let mut m = 0;
        match self.space.get(q) {
            A1State::Gray(_) => {}
            A1State::White { .. } => {
                for &p in neighbors {
                    if let A1State::White { tile, upper, lower } = *self.space.get(p) {
                        m |= W_HAS_WHITE;
                        if upper == Stream::Pos(self.tiles.upper[tile].len() as u32) {
                            m |= W_UPPER_LAST;
                        }
                        if lower == Stream::Pos(self.tiles.lower[tile].len() as u32) {
                            m |= W_LOWER_LAST;
                        }
                    }
                }
            }
            A1State::Root(_) => {
                m |= R_ALL_FIN;
                for &p in neighbors {
                    if let A1State::White { tile, upper, lower } = *self.space.get(p) {
                        m |= R_ANY_WHITE;
                        match Self::bit(&self.tiles.upper[tile], upper) {
                            Some(0) => m |= R_UPPER0,
                            Some(_) => m |= R_UPPER1,
                            None => {}
                        }
                        match Self::bit(&self.tiles.lower[tile], lower) {
                            Some(0) => m |= R_LOWER0,
                            Some(_) => m |= R_LOWER1,
                            None => {}
                        }
                        if (upper, lower) != (Stream::Fin, Stream::Fin) {
                            m &= !R_ALL_FIN;
                        }
                    }
                }
            }
        }
        m
    }

    fn observation_bits(&self, q: StateId) -> u32 {
        match self.space.get(q) {
            A1State::Gray(_) => 0,
            A1State::White { .. } => 3,
            A1State::Root(_) => 6,
        }
    }

    fn advance(&self, q: StateId, m: u32) -> StateId {
        let next = match *self.space.get(q) {
            s @ A1State::Gray(_) => s,
            A1State::White { tile, upper, lower } => {
                let alone = m & W_HAS_WHITE == 0;
                A1State::White {
                    tile,
                    upper: Self::advance_stream(
                        upper,
                        self.tiles.upper[tile].len(),
                        alone || m & W_UPPER_LAST != 0,
                    ),
                    lower: Self::advance_stream(
                        lower,
                        self.tiles.lower[tile].len(),
                        alone || m & W_LOWER_LAST != 0,
                    ),
                }
            }
            A1State::Root(A1Root::Watch) => {
                let upper = m & (R_UPPER0 | R_UPPER1);
                let lower = (m & (R_LOWER0 | R_LOWER1)) >> 2;
                if upper != lower || upper == 3 {
                    A1State::Root(A1Root::Dead)
                } else if m & R_ANY_WHITE != 0 && m & R_ALL_FIN != 0 {
                    A1State::Root(A1Root::Accept)
                } else {
                    A1State::Root(A1Root::Watch)
                }
            }
            s @ A1State::Root(_) => s,
        };
        self.space.id(&next)
    }
}

#[derive(Debug)]
struct FuseCheck {
    tiles: Arc<Tiles>,
    space: StateSpace<A2State>,
}

impl FuseCheck {
    fn new(tiles: Arc<Tiles>) -> Self {
        use A2Root::*;
        let mut states: Vec<A2State> = [Start, First, Loop, Accept, Reject]
            .into_iter()
            .map(A2State::Root)
            .collect();
        for t in 0..tiles.len() {
            let i = tiles.index[t] as u32;
            let s2s = std::iter::once(Fire2::Idle)
                .chain((1..i).rev().map(Fire2::Count))
                .chain([Fire2::Pulse, Fire2::After]);
            for s2 in s2s {
                for s1 in [Fire1::Before, Fire1::Pulse, Fire1::After] {
                    states.push(A2State::Gray { tile: t, s1, s2 });
                }
            }
            for age in 0..=2 {
                for out in [Emit::Idle, Emit::S1, Emit::Mid, Emit::P2, Emit::S2, Emit::Done] {
                    states.push(A2State::White { tile: t, age, out });
                }
            }
            states.push(A2State::Bad { tile: t });
        }
        FuseCheck {
            tiles,
            space: StateSpace::new(states),
        }
    }

    fn initial(&self, kind: Kind) -> StateId {
        self.space.id(&match kind {
            Kind::Root => A2State::Root(A2Root::Start),
            Kind::Gray(t) => A2State::Gray {
                tile: t,
                s1: Fire1::Before,
                s2: Fire2::Idle,
            },
            Kind::White(t) => A2State::White {
                tile: t,
                age: 0,
                out: Emit::Idle,
            },
        })
    }
}

// Observation bits of gray nodes.
const G_HAS_GRAY: u32 = 1;
const G_PRED_S1: u32 = 2;
const G_PRED_S2: u32 = 4;
// Observation bits of white nodes.
const V_HAS_WHITE: u32 = 1;
const V_PRED_BAD: u32 = 2;
const V_PRED_P2: u32 = 4;
const V_PRED_S2: u32 = 8;
const V_SIDE_S1: u32 = 16;
const V_SIDE_COUNT2: u32 = 32;
// Observation bits of the root.
const T_S1: u32 = 1;
const T_S2: u32 = 2;
const T_CLASH: u32 = 4;
const T_BAD: u32 = 8;
const T_ALL_DONE: u32 = 16;

impl Observer for FuseCheck {
    fn state_count(&self) -> usize {
        self.space.len()
    }

    fn state_name(&self, q: StateId) -> String {
        match *self.space.get(q) {
            A2State::Root(r) => format!("x:{r:?}"),
            A2State::Gray { tile, s1, s2 } => {
                format!("{}':{s1:?}/{s2:?}", self.tiles.index[tile])
            }
            A2State::White { tile, age, out } => {
                format!("{}:{out:?}@{age}", self.tiles.index[tile])
            }
            A2State::Bad { tile } => format!("{}:bad", self.tiles.index[tile]),
        }
    }

    fn is_accepting(&self, q: StateId) -> bool {
        *self.space.get(q) == A2State::Root(A2Root::Accept)
    }

    fn observe(&self, q: StateId, neighbors: &[StateId]) -> u32 {
        let mut m = 0;
        match self.space.get(q) {
            A2State::Gray { .. } => {
                for &p in neighbors {
                    if let A2State::Gray { s1, s2, .. } = *self.space.get(p) {
                        m |= G_HAS_GRAY;
                        if s1 == Fire1::Pulse {
                            m |= G_PRED_S1;
                        }
                        if s2 == Fire2::Pulse {
                            m |= G_PRED_S2;
                        }
                    }
                }
            }
            A2State::White { .. } | A2State::Bad { .. } => {
                for &p in neighbors {
                    match *self.space.get(p) {
                        A2State::White { out, .. } => {
                            m |= V_HAS_WHITE;
                            if out == Emit::P2 {
                                m |= V_PRED_P2;
                            }
                            if out == Emit::S2 {
                                m |= V_PRED_S2;
                            }
                        }
                        A2State::Bad { .. } => m |= V_HAS_WHITE | V_PRED_BAD,
                        A2State::Gray { s1, s2, .. } => {
                            if s1 == Fire1::Pulse {
                                m |= V_SIDE_S1;
                            }
                            if s2 == Fire2::Count(2) {
                                m |= V_SIDE_COUNT2;
                            }
                        }
                        A2State::Root(_) => {}
                    }
                }
            }
            A2State::Root(_) => {
                let mut s1_types = Vec::new();
                let mut s2_types = Vec::new();
                m |= T_ALL_DONE;
                for &p in neighbors {
                    match *self.space.get(p) {
                        A2State::White { tile, out, .. } => {
                            match out {
                                Emit::S1 => s1_types.push(tile),
                                Emit::S2 => s2_types.push(tile),
                                _ => {}
                            }
                            if !matches!(out, Emit::S2 | Emit::Done) {
                                m &= !T_ALL_DONE;
                            }
                        }
                        A2State::Bad { .. } => m |= T_BAD,
                        _ => {}
                    }
                }
                for (types, bit) in [(&mut s1_types, T_S1), (&mut s2_types, T_S2)] {
                    types.sort_unstable();
                    types.dedup();
                    if !types.is_empty() {
                        m |= bit;
                    }
                    if types.len() > 1 {
                        m |= T_CLASH;
                    }
                }
            }
        }
        m
    }

    fn observation_bits(&self, q: StateId) -> u32 {
        match self.space.get(q) {
            A2State::Gray { .. } => 3,
            A2State::White { .. } => 6,
            A2State::Bad { .. } => 0,
            A2State::Root(_) => 5,
        }
    }

    fn advance(&self, q: StateId, m: u32) -> StateId {
        let next = match *self.space.get(q) {
            A2State::Gray { tile, s1, s2 } => {
                let lit = m & G_HAS_GRAY == 0;
                let s1 = match s1 {
                    Fire1::Before if lit || m & G_PRED_S1 != 0 => Fire1::Pulse,
                    Fire1::Before => Fire1::Before,
                    Fire1::Pulse | Fire1::After => Fire1::After,
                };
                let s2 = match s2 {
                    Fire2::Idle if lit || m & G_PRED_S2 != 0 => {
                        Fire2::Count(self.tiles.index[tile] as u32 - 1)
                    }
                    Fire2::Idle => Fire2::Idle,
                    Fire2::Count(c) if c > 1 => Fire2::Count(c - 1),
                    Fire2::Count(_) => Fire2::Pulse,
                    Fire2::Pulse | Fire2::After => Fire2::After,
                };
                A2State::Gray { tile, s1, s2 }
            }
            A2State::White { tile, age, out } => {
                let has_white = m & V_HAS_WHITE != 0;
                let expected_side = if has_white {
                    m & V_PRED_S2 != 0
                } else {
                    age == 1
                };
                let count2 = m & V_SIDE_COUNT2 != 0;
                let out = if m & V_PRED_BAD != 0 || (m & V_SIDE_S1 != 0) != expected_side {
                    None
                } else {
                    match out {
                        Emit::Idle if count2 => None,
                        Emit::Idle if (!has_white && age == 0) || m & V_PRED_P2 != 0 => Some(Emit::S1),
                        Emit::Idle => Some(Emit::Idle),
                        Emit::S1 | Emit::Mid if count2 => Some(Emit::P2),
                        Emit::S1 | Emit::Mid => Some(Emit::Mid),
                        Emit::P2 => Some(Emit::S2),
                        Emit::S2 | Emit::Done => Some(Emit::Done),
                    }
                };
                match out {
                    Some(out) => A2State::White {
                        tile,
                        age: (age + 1).min(2),
                        out,
                    },
                    None => A2State::Bad { tile },
                }
            }
            s @ A2State::Bad { .. } => s,
            A2State::Root(r) => {
                let (s1, s2) = (m & T_S1 != 0, m & T_S2 != 0);
                let broken = m & (T_CLASH | T_BAD) != 0;
                A2State::Root(match r {
                    A2Root::Start => A2Root::First,
                    A2Root::First if s1 && !s2 && !broken => A2Root::Loop,
                    A2Root::First => A2Root::Reject,
                    A2Root::Loop if broken => A2Root::Reject,
                    A2Root::Loop => match (s1, s2) {
                        (false, false) | (true, true) => A2Root::Loop,
                        (true, false) => A2Root::Reject,
                        (false, true) if m & T_ALL_DONE != 0 => A2Root::Accept,
                        (false, true) => A2Root::Reject,
                    },
                    done => done,
                })
            }
        };
        self.space.id(&next)
    }
}

// ---------------------------------------------------------------------------
// Alarm layer

#[derive(Debug)]
struct Alarm {
    inner: DistAutomaton,
    /// Node kind of every inner state.
    kinds: Vec<Kind>,
}

impl Alarm {
    fn alarm(&self) -> StateId {
        StateId::from(self.kinds.len())
    }

    fn unexpected(&self, own: Kind, neighbors: &[StateId]) -> bool {
        let kinds = neighbors.iter().map(|q| self.kinds[q.index()]);
        match own {
            Kind::Root => kinds.clone().any(|k| !matches!(k, Kind::White(_))),
            Kind::White(t) => {
                let whites = kinds.clone().filter(|k| matches!(k, Kind::White(_))).count();
                let grays = kinds.clone().filter(|k| matches!(k, Kind::Gray(_))).count();
                whites > 1
                    || grays > 1
                    || kinds.clone().any(|k| k == Kind::Root || matches!(k, Kind::Gray(g) if g != t))
            }
            Kind::Gray(t) => neighbors.len() > 1 || kinds.clone().any(|k| k != Kind::Gray(t)),
        }
    }
}

impl TransitionRule for Alarm {
    fn state_count(&self) -> usize {
        self.kinds.len() + 1
    }

    fn state_name(&self, q: StateId) -> String {
        if q == self.alarm() {
            "alarm".into()
        } else {
            self.inner.state_name(q)
        }
    }

    fn is_accepting(&self, q: StateId) -> bool {
        q != self.alarm() && self.inner.is_accepting(q)
    }

    fn next(&self, label: SymbolId, current: StateId, neighbors: &[Vec<StateId>]) -> StateId {
        let alarm = self.alarm();
        let n = &neighbors[0];
        if current == alarm || n.contains(&alarm) || self.unexpected(self.kinds[current.index()], n) {
            alarm
        } else {
            self.inner.next(label, current, neighbors)
        }
    }

    fn moves(&self, current: StateId) -> Option<Vec<Move>> {
        let alarm = self.alarm();
        let to_alarm = |label| Move {
            label,
            nonempty: 1,
            target: alarm,
        };
        let mut out: Vec<Move> = if current == alarm {
            Vec::new()
        } else {
            self.inner
                .moves(current, &crate::budget::Budget::default())
                .ok()?
        };
        out.extend(self.inner.symbols().map(to_alarm));
        out.sort_unstable();
        out.dedup();
        Some(out)
    }
}

/// The compiled automaton with decoders for its states.
#[derive(Debug, Clone)]
pub struct PcpReduction {
    pub automaton: DistAutomaton,
    bits: Arc<Observed<BitStreams>>,
    fuses: Arc<Observed<FuseCheck>>,
    tiles: Arc<Tiles>,
}

impl PcpReduction {
    pub fn new(inst: &PcpInstance) -> Result<Self> {
        inst.validate()?;
        let tiles = Arc::new(Tiles::new(inst));
        let alphabet = tiles.alphabet();
        let symbols = alphabet.len();
        let bits = Arc::new(Observed {
            inner: BitStreams::new(Arc::clone(&tiles)),
            symbols,
        });
        let fuses = Arc::new(Observed {
            inner: FuseCheck::new(Arc::clone(&tiles)),
            symbols,
        });
        let size = (bits.state_count() as u128) * (fuses.state_count() as u128) * 4;
        if size > SIZE_LIMIT {
            return Err(Error::BudgetExceeded {
                what: "reduction states",
                needed: size,
                limit: SIZE_LIMIT,
            });
        }
        let kinds: Vec<Kind> = (0..symbols as u32)
            .map(|s| tiles.kind_of_symbol(SymbolId(s)))
            .collect();
        let a1 = DistAutomaton::from_rule(
            alphabet.clone(),
            1,
            Init::Map(kinds.iter().map(|&k| bits.inner.initial(k)).collect()),
            bits.clone(),
        )?;
        let a2 = DistAutomaton::from_rule(
            alphabet.clone(),
            1,
            Init::Map(kinds.iter().map(|&k| fuses.inner.initial(k)).collect()),
            fuses.clone(),
        )?;
        let inner = product(&a1, &a2, ProductMode::Intersection)?;
        let right = a2.state_count();
        let state_kinds = inner
            .states()
            .map(|q| bits.inner.kind(ProductState::decode(q, right).left))
            .collect();
        let alarm = Alarm {
            inner: inner.clone(),
            kinds: state_kinds,
        };
        let automaton = DistAutomaton::from_rule(alphabet, 1, inner.init().clone(), Arc::new(alarm))?;
        Ok(PcpReduction {
            automaton,
            bits,
            fuses,
            tiles,
        })
    }

    /// Component states, or `None` for the alarm state.
    pub fn decode(&self, q: StateId) -> Option<(A1State, A2State)> {
        if q.index() + 1 >= self.automaton.state_count() {
            return None;
        }
        let s = ProductState::decode(q, self.fuses.state_count());
        Some((*self.bits.inner.space.get(s.left), *self.fuses.inner.space.get(s.right)))
    }

    pub fn is_alarm(&self, q: StateId) -> bool {
        self.decode(q).is_none()
    }

    /// Index of a tile position as used in [`A1State`] and [`A2State`].
    pub fn tile_index(&self, tile: usize) -> u64 {
        self.tiles.index[tile]
    }

    /// First rounds (within `rounds`) in which each child of the point emits
    /// `Σ₁` and `Σ₂`, children in node order.
    pub fn signal_rounds(
        &self,
        pg: &PointedDigraph,
        rounds: usize,
    ) -> Result<Vec<(Option<usize>, Option<usize>)>> {
        let g = pg.graph();
        let children = g.incoming(0, pg.point()).to_vec();
        let mut out = vec![(None, None); children.len()];
        let runner = Runner::new(&self.automaton, g)?;
        for c in runner.configurations().take(rounds + 1) {
            for (slot, &v) in out.iter_mut().zip(&children) {
                if let Some((_, A2State::White { out: emit, .. })) = self.decode(c.states[v]) {
                    if emit == Emit::S1 && slot.0.is_none() {
                        slot.0 = Some(c.round);
                    }
                    if emit == Emit::S2 && slot.1.is_none() {
                        slot.1 = Some(c.round);
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn pcp_to_automaton(inst: &PcpInstance) -> Result<DistAutomaton> {
    Ok(PcpReduction::new(inst)?.automaton)
}
