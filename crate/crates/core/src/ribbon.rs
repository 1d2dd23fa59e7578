//! The ribbon measure `μ = μ₁ * ν`.
//!
//! `θ` doubles a configuration: `θ(w)(2k, 2l) = 0` and the three other cells of
//! the 2×2 block carry `w(k, l)`. Its image `X₁` and the translates `TX₁`, `SX₁`,
//! `TSX₁` are the four cosets; `μ₁` picks one uniformly and pushes Haar through
//! `θ`. `ν` is uniform on the three translates of the period-3 point `u`.
//! A sample `x = y + v` is decoded back into `(coset of y, translate of v)`,
//! which is the state label `ϖ(x)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{exact_probability, sample_haar_with, CylinderEvent, Dyadic};
use crate::lattice::{Geometry, Move, Patch, Position, RowSpan};
use crate::rng::rng_from_seed;
use crate::sigma::sigma_step;

/// One of the four cosets of `X₁`: `y` vanishes where `k ≡ dk` and `l ≡ dl` (mod 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CosetId {
    pub dk: u8,
    pub dl: u8,
}

impl CosetId {
    pub const ALL: [CosetId; 4] = [
        CosetId { dk: 0, dl: 0 },
        CosetId { dk: 1, dl: 0 },
        CosetId { dk: 0, dl: 1 },
        CosetId { dk: 1, dl: 1 },
    ];

    pub fn new(dk: u8, dl: u8) -> Self {
        Self { dk: dk & 1, dl: dl & 1 }
    }

    /// Coset of `T^k S^l y` given the coset of `y`.
    pub fn translate(self, p: Position) -> Self {
        Self::new(self.dk ^ p.k.rem_euclid(2) as u8, self.dl ^ p.l.rem_euclid(2) as u8)
    }

    /// Whether `y` is forced to vanish at `p`.
    pub fn vanishes_at(self, p: Position) -> bool {
        p.k.rem_euclid(2) as u8 == self.dk && p.l.rem_euclid(2) as u8 == self.dl
    }

    fn index(self) -> usize {
        (self.dk + 2 * self.dl) as usize
    }
}

impl fmt::Display for CosetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.dk, self.dl)
    }
}

/// Which translate of `u` the `ν`-component is: 0 for `u`, 1 for `Tu`, 2 for `Su`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NuId(pub u8);

impl NuId {
    pub const ALL: [NuId; 3] = [NuId(0), NuId(1), NuId(2)];

    pub fn new(b: i64) -> Self {
        Self(b.rem_euclid(3) as u8)
    }

    /// `T^k S^l` shifts `u` by `k - l` along the cross direction.
    pub fn translate(self, p: Position) -> Self {
        Self::new(self.0 as i64 + p.cross())
    }

    /// Value of the `ν`-component at `p`.
    pub fn value_at(self, p: Position) -> bool {
        (p.cross() + self.0 as i64).rem_euclid(3) != 0
    }
}

impl fmt::Display for NuId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `ϖ`-value: coset of the `μ₁`-component and translate of the `ν`-component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateLabel {
    pub coset: CosetId,
    pub nu: NuId,
}

impl StateLabel {
    pub fn new(coset: CosetId, nu: NuId) -> Self {
        Self { coset, nu }
    }

    /// The twelve labels, cosets in the order 00, 10, 01, 11, then by `nu`.
    pub fn all() -> impl Iterator<Item = StateLabel> {
        NuId::ALL
            .into_iter()
            .flat_map(|nu| CosetId::ALL.into_iter().map(move |c| StateLabel::new(c, nu)))
    }

    /// Label of `T^k S^l x` given the label of `x`.
    pub fn translate(self, p: Position) -> Self {
        Self::new(self.coset.translate(p), self.nu.translate(p))
    }

    pub fn step(self, mv: Move) -> Self {
        self.translate(Position::ORIGIN.step(mv))
    }

    pub fn index(self) -> usize {
        self.coset.index() + 4 * self.nu.0 as usize
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.coset, self.nu)
    }
}

/// Parses `ab,c`, e.g. `01,2`.
impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected a state like `01,2`, got `{s}`"));
        let (c, n) = s.trim().split_once(',').ok_or_else(bad)?;
        let c = c.trim().as_bytes();
        let bit = |b: u8| match b {
            b'0' => Some(0),
            b'1' => Some(1),
            _ => None,
        };
        if c.len() != 2 {
            return Err(bad());
        }
        let (dk, dl) = (bit(c[0]).ok_or_else(bad)?, bit(c[1]).ok_or_else(bad)?);
        let b: u8 = n.trim().parse().map_err(|_| bad())?;
        if b > 2 {
            return Err(bad());
        }
        Ok(Self::new(CosetId::new(dk, dl), NuId(b)))
    }
}

/// Restriction of `u` (nu 0), `Tu` (nu 1) or `Su` (nu 2) to `target`.
pub fn periodic_point_u(target: &Geometry, shift: NuId) -> Patch {
    Patch::from_fn_unchecked(target.clone(), |p| shift.value_at(p))
}

/// `θ(x)` on the doubled window `{(2k + i, 2l + j) : (k, l) ∈ G, i, j ∈ {0, 1}}`.
pub fn theta_embed(x: &Patch) -> Patch {
    let rows = x.geometry().rows().iter().flat_map(|r| {
        (0..2).map(move |j| RowSpan { l: 2 * r.l + j, k_lo: 2 * r.k_lo, k_hi: 2 * r.k_hi + 1 })
    });
    let g = Geometry::from_rows(rows).expect("doubled rows are valid");
    Patch::from_fn_unchecked(g, |p| theta_value(|q| x.bit(q), p))
}

#[inline]
fn theta_value(w: impl Fn(Position) -> bool, p: Position) -> bool {
    if p.k.rem_euclid(2) == 0 && p.l.rem_euclid(2) == 0 {
        false
    } else {
        w(Position::new(p.k.div_euclid(2), p.l.div_euclid(2)))
    }
}

/// The cells of `w` that `T^dk S^dl θ(w)` reads on `target`, as a window.
fn theta_preimage(target: &Geometry, coset: CosetId) -> Geometry {
    let mut rows: Vec<RowSpan> = Vec::new();
    for r in target.rows() {
        let l = (r.l + coset.dl as i64).div_euclid(2);
        let k_lo = (r.k_lo + coset.dk as i64).div_euclid(2);
        let k_hi = (r.k_hi + coset.dk as i64).div_euclid(2);
        match rows.last_mut() {
            Some(last) if last.l == l => {
                last.k_lo = last.k_lo.min(k_lo);
                last.k_hi = last.k_hi.max(k_hi);
            }
            _ => rows.push(RowSpan { l, k_lo, k_hi }),
        }
    }
    // Rows of a preimage can be disjoint when the target has gaps; the hull keeps them contiguous.
    Geometry::from_rows(rows).expect("preimage rows are valid")
}

/// `T^dk S^dl θ(w)` on `target`, reading `w` from a patch covering the preimage.
fn coset_component(w: &Patch, coset: CosetId, target: &Geometry) -> Patch {
    let d = Position::new(coset.dk as i64, coset.dl as i64);
    Patch::from_fn_unchecked(target.clone(), |p| theta_value(|q| w.bit(q), p + d))
}

fn sample_mu1_inner(target: &Geometry, rng: &mut crate::rng::SimRng) -> (Patch, CosetId) {
    let coset = CosetId::ALL[(rng.next_u32() % 4) as usize];
    let pre = theta_preimage(target, coset);
    let w = sample_haar_with(&pre, rng);
    (coset_component(&w, coset, target), coset)
}

/// A `μ₁`-distributed patch on `target`.
pub fn sample_mu1(target: &Geometry, seed: u64) -> Patch {
    sample_mu1_latent(target, seed).0
}

/// [`sample_mu1`] together with the coset it drew.
pub fn sample_mu1_latent(target: &Geometry, seed: u64) -> (Patch, CosetId) {
    let mut rng = rng_from_seed(seed);
    sample_mu1_inner(target, &mut rng)
}

/// A `μ`-distributed patch on `target`.
pub fn sample_mu(target: &Geometry, seed: u64) -> Patch {
    sample_mu_latent(target, seed).0
}

/// [`sample_mu`] together with the state `(coset, nu)` it drew at the origin.
pub fn sample_mu_latent(target: &Geometry, seed: u64) -> (Patch, StateLabel) {
    let mut rng = rng_from_seed(seed);
    let (y, coset) = sample_mu1_inner(target, &mut rng);
    let nu = NuId(rng.random_range(0..3u8));
    let x = Patch::from_fn_unchecked(target.clone(), |p| y.bit(p) ^ nu.value_at(p));
    (x, StateLabel::new(coset, nu))
}

/// A configuration split as `x = y + v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoding {
    pub state: StateLabel,
    /// The `μ₁`-component; vanishes on the sublattice of `state.coset`.
    pub y: Patch,
    /// The `ν`-component: `u`, `Tu` or `Su` per `state.nu`.
    pub v: Patch,
}

/// Every label `(c, b)` for which `x + v_b` vanishes on the sublattice of `c`.
pub fn decode_candidates(x: &Patch) -> Vec<StateLabel> {
    let mut ok = [true; 12];
    let mut alive = 12;
    for (p, bit) in x.cells() {
        let c = CosetId::new(p.k.rem_euclid(2) as u8, p.l.rem_euclid(2) as u8);
        for nu in NuId::ALL {
            let s = StateLabel::new(c, nu);
            if ok[s.index()] && bit != nu.value_at(p) {
                ok[s.index()] = false;
                alive -= 1;
            }
        }
        if alive == 0 {
            break;
        }
    }
    StateLabel::all().filter(|s| ok[s.index()]).collect()
}

/// Splits `x` into its `μ₁`- and `ν`-components.
///
/// The whole window is used; 12×12 windows or larger are recommended.
pub fn decode(x: &Patch) -> Result<Decoding> {
    let cands = decode_candidates(x);
    match cands.as_slice() {
        [] => Err(Error::NotInSupport),
        [state] => {
            let v = periodic_point_u(x.geometry(), state.nu);
            let y = x.xor(&v).expect("same geometry");
            Ok(Decoding { state: *state, y, v })
        }
        many => Err(Error::Ambiguous(many.len())),
    }
}

/// `ϖ` of `T^k S^l x` for `p = (k, l)` in the window.
pub fn varpi(x: &Patch, p: Position) -> Result<StateLabel> {
    if x.get(p).is_none() {
        return Err(Error::OutOfWindow(p));
    }
    Ok(decode(x)?.state.translate(p))
}

/// The potential `φ`; `None` on the two states it leaves undefined.
pub fn phi(s: StateLabel) -> Option<i8> {
    let c = (s.coset.dk, s.coset.dl);
    match (c, s.nu.0) {
        ((1, 0) | (0, 1), 1) => Some(-2),
        ((0, 0) | (1, 1), 2) => Some(-1),
        ((1, 0) | (0, 1), 0) => Some(0),
        ((0, 0) | (1, 1), 1) => Some(1),
        ((1, 0) | (0, 1), 2) => Some(2),
        _ => None,
    }
}

/// One arrow of the state diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub from: StateLabel,
    pub mv: Move,
    pub to: StateLabel,
    /// `from` admits only this move.
    pub forced: bool,
}

/// The moves σ can take from each state, as shipped.
///
/// Rows: coset, nu, moves allowed (T, S). `(00, 0)` never lies in `Y`.
const MOVE_TABLE: [(u8, u8, u8, bool, bool); 12] = [
    (0, 0, 0, false, false),
    (1, 0, 0, true, false),
    (0, 1, 0, false, true),
    (1, 1, 0, true, true),
    (0, 0, 1, true, true),
    (1, 0, 1, true, false),
    (0, 1, 1, true, false),
    (1, 1, 1, true, true),
    (0, 0, 2, true, true),
    (1, 0, 2, false, true),
    (0, 1, 2, false, true),
    (1, 1, 2, true, true),
];

fn table_edges(allowed: impl Fn(StateLabel) -> (bool, bool)) -> Vec<Transition> {
    let mut out = Vec::new();
    for s in StateLabel::all() {
        let (t, sm) = allowed(s);
        let forced = t != sm;
        if t {
            out.push(Transition { from: s, mv: Move::T, to: s.step(Move::T), forced });
        }
        if sm {
            out.push(Transition { from: s, mv: Move::S, to: s.step(Move::S), forced });
        }
    }
    out
}

/// The state diagram of σ: from `(a, b)`, `T` leads to `(a + 10, b + 1)` and `S`
/// to `(a + 01, b + 2)`; only the moves compatible with `x(0,0) = 1` are listed.
pub fn transition_graph() -> Vec<Transition> {
    table_edges(|s| {
        let row = MOVE_TABLE
            .iter()
            .find(|r| r.0 == s.coset.dk && r.1 == s.coset.dl && r.2 == s.nu.0)
            .expect("all twelve states are tabulated");
        (row.3, row.4)
    })
}

/// Re-derives [`transition_graph`] by enumerating the local patterns of each state.
///
/// For a state `(c, b)` the cells `(0,0), (1,0), (0,1)` of `x = T^c θ(w) + v_b`
/// are computed for every `w` on a small triangle; a move is possible iff some
/// pattern has `x(0,0) = 1` with the matching value of `x(1,0)`.
pub fn derive_transition_table() -> Vec<Transition> {
    let w_window = Geometry::triangle(Position::ORIGIN, 2);
    let bottoms: Vec<Vec<bool>> = (0..8u8).map(|m| (0..3).map(|i| (m >> i) & 1 == 1).collect()).collect();
    let ws: Vec<Patch> = bottoms
        .iter()
        .map(|b| Patch::triangle_from_bottom_row(Position::ORIGIN, b).expect("three bits"))
        .collect();
    debug_assert!(ws.iter().all(|w| w.geometry() == &w_window));
    let cells = Geometry::triangle(Position::ORIGIN, 1);
    table_edges(|s| {
        let mut t = false;
        let mut sm = false;
        for w in &ws {
            let y = coset_component(w, s.coset, &cells);
            let x = |p: Position| y.bit(p) ^ s.nu.value_at(p);
            if x(Position::ORIGIN) {
                if x(Position::new(1, 0)) {
                    t = true;
                } else {
                    sm = true;
                }
            }
        }
        (t, sm)
    })
}

/// One step of a [`DriftReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftStep {
    pub step: usize,
    pub at: Position,
    pub state: StateLabel,
    pub phi: Option<i8>,
    /// Move taken from `at`; `None` on the last recorded step.
    pub mv: Option<Move>,
}

/// Outcome of [`drift_audit`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftReport {
    pub start: Position,
    pub start_state: StateLabel,
    /// Largest `|cross(σⁿ p) - cross(p)|` seen.
    pub max_drift: i64,
    pub steps: Vec<DriftStep>,
    pub violations: Vec<String>,
}

impl DriftReport {
    /// `step,k,l,state,phi,move`, one line per step.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,k,l,state,phi,move\n");
        for st in &self.steps {
            let phi = st.phi.map_or(String::new(), |v| v.to_string());
            let mv = st.mv.map_or(String::new(), |m| m.to_string());
            s.push_str(&format!("{},{},{},\"{}\",{},{}\n", st.step, st.at.k, st.at.l, st.state, phi, mv));
        }
        s
    }
}

/// Follows σ for `nmax` steps from `p`, tracking `ϖ` and the potential `ψ = φ ∘ ϖ`.
///
/// Checked at every step: the edge taken is in [`transition_graph`]; where `ψ`
/// is defined at both ends, `T` raises it by one and `S` lowers it by one; and
/// the position equals `T^((n + Δψ)/2) S^((n - Δψ)/2)` of the first audited
/// point. A start in `(11, 0)` has no `ψ`, so its first step is not audited.
pub fn drift_audit(x: &Patch, p: Position, nmax: usize) -> Result<DriftReport> {
    let base = decode(x)?.state;
    if !x.get(p).ok_or(Error::OutOfWindow(p))? {
        return Err(Error::NotInY(p));
    }
    let graph = transition_graph();
    let start_state = base.translate(p);
    let mut steps = Vec::with_capacity(nmax + 1);
    let mut violations = Vec::new();
    let mut at = p;
    let mut anchor: Option<(usize, Position, i8)> = None;
    let mut max_drift = 0;
    for n in 0..=nmax {
        let state = base.translate(at);
        let psi = phi(state);
        if let Some(v) = psi {
            match anchor {
                None => anchor = Some((n, at, v)),
                Some((n0, p0, v0)) => {
                    let len = (n - n0) as i64;
                    let dpsi = (v - v0) as i64;
                    let expect = Position::new(p0.k + (len + dpsi) / 2, p0.l + (len - dpsi) / 2);
                    if (len + dpsi) % 2 != 0 || expect != at {
                        violations.push(format!("step {n}: at {at}, closed form gives {expect}"));
                    }
                }
            }
        }
        max_drift = max_drift.max((at.cross() - p.cross()).abs());
        let mv = if n < nmax {
            let (mv, next) = sigma_step(x, at)?;
            if !graph.iter().any(|e| e.from == state && e.mv == mv) {
                violations.push(format!("step {n}: move {mv} from {state} is not an edge"));
            }
            if let (Some(a), Some(b)) = (psi, phi(state.step(mv))) {
                let want = if mv == Move::T { 1 } else { -1 };
                if b - a != want {
                    violations.push(format!("step {n}: ψ went {a} -> {b} on {mv}"));
                }
            }
            Some((mv, next))
        } else {
            None
        };
        steps.push(DriftStep { step: n, at, state, phi: psi, mv: mv.map(|m| m.0) });
        if let Some((_, next)) = mv {
            at = next;
        }
    }
    Ok(DriftReport { start: p, start_state, max_drift, steps, violations })
}

/// The event on `w` under which a sample with label `latent` also passes the
/// decoder test for `alt`: `y + v_latent + v_alt` vanishes on the sublattice of
/// `alt`, where `y = T^c θ(w)`. `None` if the event is empty.
fn confusion_event(target: &Geometry, latent: StateLabel, alt: StateLabel) -> Option<CylinderEvent> {
    let d = Position::new(latent.coset.dk as i64, latent.coset.dl as i64);
    let mut cons: Vec<(Position, bool)> = Vec::new();
    for p in target.cells().filter(|&p| alt.coset.vanishes_at(p)) {
        let rhs = latent.nu.value_at(p) ^ alt.nu.value_at(p);
        let q = p + d;
        if q.k.rem_euclid(2) == 0 && q.l.rem_euclid(2) == 0 {
            if rhs {
                return None;
            }
            continue;
        }
        cons.push((Position::new(q.k.div_euclid(2), q.l.div_euclid(2)), rhs));
    }
    cons.sort();
    cons.dedup();
    if cons.windows(2).any(|w| w[0].0 == w[1].0) {
        return None;
    }
    Some(CylinderEvent::new(cons).expect("deduplicated"))
}

/// Exact probability that a `μ`-sample on `target` decodes ambiguously.
///
/// Given the latent label, each other label passes the decoder test on an
/// affine event of the Haar variable `w`; the union is evaluated by
/// inclusion-exclusion with the F₂ oracle. Returns the probability averaged
/// over the twelve latent labels, as a dyadic per label.
pub fn ambiguity_probability(target: &Geometry) -> Result<f64> {
    Ok(ambiguity_by_label(target)?.iter().map(|(_, p)| p.to_f64()).sum::<f64>() / 12.0)
}

/// [`ambiguity_probability`] conditioned on each latent label.
pub fn ambiguity_by_label(target: &Geometry) -> Result<Vec<(StateLabel, Dyadic)>> {
    fn union(events: &[CylinderEvent], acc: Option<&CylinderEvent>, from: usize, sign: i128) -> Result<Dyadic> {
        let mut total = Dyadic::ZERO;
        for i in from..events.len() {
            let joint = match acc {
                None => Some(events[i].clone()),
                Some(a) => a.and(&events[i]),
            };
            let Some(joint) = joint else { continue };
            let p = exact_probability(&joint)?;
            if p.zero {
                continue;
            }
            total = total + Dyadic::new(sign, 0) * p.to_dyadic();
            total = total + union(events, Some(&joint), i + 1, -sign)?;
        }
        Ok(total)
    }
    StateLabel::all()
        .map(|latent| {
            let events: Vec<CylinderEvent> = StateLabel::all()
                .filter(|&alt| alt != latent)
                .filter_map(|alt| confusion_event(target, latent, alt))
                .collect();
            Ok((latent, union(&events, None, 0, 1)?))
        })
        .collect()
}
