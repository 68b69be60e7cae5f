//! The protocol's random draws, behind one trait with two implementations.
//!
//! Every draw reduces to [`RandomSource::choose`]: pick an index either
//! uniformly from `0..n` or from an exact rational weight vector. The helpers in
//! this module (`draw_permutation`, `draw_subset`, ...) are written once on top
//! of `choose`, so a [`Sampler`] and an [`Enumerator`] always see the same
//! branch structure.
//!
//! The enumerator explores every path by replay: it records the choice made at
//! each depth, re-runs the caller from the start, and advances the deepest
//! frame that still has untried options. Each path carries the exact product of
//! its branch weights.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rational::{binomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RandomnessError {
    #[error("permutation length must be at least 1")]
    EmptyPermutation,
    #[error("subset size {size} outside [0:{universe}]")]
    SubsetSize { size: usize, universe: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(Rational),
    #[error("weights must be non-negative and sum to 1 (sum = {0})")]
    InvalidWeights(Rational),
    #[error("weights need a common denominator that fits in 128 bits")]
    DenominatorOverflow,
}

/// Which protocol step a draw belongs to, listed in canonical draw order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DrawKind {
    /// `π`, permutation of the demand sub-packets.
    DemandPermutation,
    /// Non-zero entries of `b` on `S`.
    SideValues,
    /// The pair `(I, J)`.
    Pair,
    /// `R ⊆ S` with `|R| = I`.
    SideSubset,
    /// Order of the `(I-1)`-subsets `R_1, ..., R_I`.
    SubsetOrdering,
    /// `T` among the interference messages with `|T| = J`.
    InterferenceSubset,
    /// Non-zero entries of `c` on `T`.
    InterferenceValues,
    /// `θ`.
    Coin,
    /// `σ`, permutation of the servers.
    ServerPermutation,
}

/// A finite distribution over `0..len` with exact weights sharing one
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedChoice {
    numerators: Vec<u128>,
    denominator: u128,
}

impl WeightedChoice {
    pub fn new(weights: &[Rational]) -> Result<Self, RandomnessError> {
        let sum: Rational = weights.iter().cloned().sum();
        if !sum.is_one() || weights.iter().any(Rational::is_negative) {
            return Err(RandomnessError::InvalidWeights(sum));
        }
        let lcm = weights.iter().fold(BigInt::from(1), |acc, w| acc.lcm(w.denom()));
        let denominator = lcm.to_u128().ok_or(RandomnessError::DenominatorOverflow)?;
        let numerators = weights
            .iter()
            .map(|w| (w.numer() * (&lcm / w.denom())).to_u128().ok_or(RandomnessError::DenominatorOverflow))
            .collect::<Result<_, _>>()?;
        Ok(Self { numerators, denominator })
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn weight(&self, index: usize) -> Weight {
        Weight::new(self.numerators[index], self.denominator)
    }
}

/// How a draw picks its index.
#[derive(Debug, Clone, Copy)]
pub enum Choice<'a> {
    Uniform(usize),
    Weighted(&'a WeightedChoice),
}

/// The protocol's source of randomness.
pub trait RandomSource {
    /// Returns an index in `0..n` for `Uniform(n)` (`n >= 1`), or an index of a
    /// positive-weight entry for `Weighted`.
    fn choose(&mut self, kind: DrawKind, choice: Choice<'_>) -> usize;
}

impl<R: RandomSource + ?Sized> RandomSource for &mut R {
    fn choose(&mut self, kind: DrawKind, choice: Choice<'_>) -> usize {
        (**self).choose(kind, choice)
    }
}

fn uniform_index<R: RandomSource + ?Sized>(rng: &mut R, kind: DrawKind, n: usize) -> usize {
    // single-outcome draws are not recorded
    if n == 1 {
        0
    } else {
        rng.choose(kind, Choice::Uniform(n))
    }
}

/// Uniform permutation of `1..=n`, as the image list `[p(1), ..., p(n)]`.
pub fn draw_permutation<R: RandomSource + ?Sized>(
    rng: &mut R,
    kind: DrawKind,
    n: usize,
) -> Result<Vec<usize>, RandomnessError> {
    if n == 0 {
        return Err(RandomnessError::EmptyPermutation);
    }
    Ok(draw_ordering(rng, kind, (1..=n).collect()))
}

/// Uniform ordering of `items` (Fisher-Yates: one path per ordering).
pub fn draw_ordering<R: RandomSource + ?Sized, T>(rng: &mut R, kind: DrawKind, mut items: Vec<T>) -> Vec<T> {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, kind, i + 1);
        items.swap(i, j);
    }
    items
}

/// Independent uniform values in `[1:n_servers-1]` for each index of `support`.
pub fn draw_nonzero_vector<R: RandomSource + ?Sized>(
    rng: &mut R,
    kind: DrawKind,
    support: &[usize],
    n_servers: usize,
) -> Vec<(usize, u32)> {
    support.iter().map(|&i| (i, uniform_index(rng, kind, n_servers - 1) as u32 + 1)).collect()
}

/// Uniform `size`-subset of `universe`, by unranking a uniform rank in
/// lexicographic order. The result keeps `universe`'s order.
pub fn draw_subset<R: RandomSource + ?Sized>(
    rng: &mut R,
    kind: DrawKind,
    universe: &[usize],
    size: usize,
) -> Result<Vec<usize>, RandomnessError> {
    let n = universe.len();
    if size > n {
        return Err(RandomnessError::SubsetSize { size, universe: n });
    }
    let total = binomial(n as i64, size as i64).to_usize().expect("subset count fits in usize");
    let mut rank = uniform_index(rng, kind, total);
    let mut out = Vec::with_capacity(size);
    let mut need = size;
    for (pos, &item) in universe.iter().enumerate() {
        if need == 0 {
            break;
        }
        // subsets that take `item` next
        let with = binomial((n - pos - 1) as i64, (need - 1) as i64).to_usize().unwrap();
        if rank < with {
            out.push(item);
            need -= 1;
        } else {
            rank -= with;
        }
    }
    Ok(out)
}

/// Index drawn from an exact weight vector.
pub fn draw_weighted<R: RandomSource + ?Sized>(rng: &mut R, kind: DrawKind, weights: &WeightedChoice) -> usize {
    rng.choose(kind, Choice::Weighted(weights))
}

/// `0` with probability `p_zero`, else `1`.
pub fn draw_bernoulli<R: RandomSource + ?Sized>(rng: &mut R, p_zero: &Rational) -> Result<u8, RandomnessError> {
    let coin = bernoulli_weights(p_zero)?;
    Ok(draw_weighted(rng, DrawKind::Coin, &coin) as u8)
}

pub(crate) fn bernoulli_weights(p_zero: &Rational) -> Result<WeightedChoice, RandomnessError> {
    if p_zero.is_negative() || *p_zero > 1 {
        return Err(RandomnessError::Probability(p_zero.clone()));
    }
    WeightedChoice::new(&[p_zero.clone(), Rational::one() - p_zero])
}

/// Seeded sampling mode, backed by ChaCha8.
#[derive(Debug, Clone)]
pub struct Sampler {
    seed: u64,
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// A sampler on an independent ChaCha stream of the same seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl RandomSource for Sampler {
    fn choose(&mut self, _kind: DrawKind, choice: Choice<'_>) -> usize {
        match choice {
            Choice::Uniform(n) => self.rng.random_range(0..n),
            Choice::Weighted(w) => {
                let mut x = self.rng.random_range(0..w.denominator);
                for (i, &num) in w.numerators.iter().enumerate() {
                    if x < num {
                        return i;
                    }
                    x -= num;
                }
                unreachable!("numerators sum to the denominator")
            }
        }
    }
}

/// One draw as seen by a [`Recorder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawRecord {
    pub kind: DrawKind,
    pub arity: usize,
    pub outcome: usize,
}

/// Wraps a source and logs every draw it forwards.
#[derive(Debug)]
pub struct Recorder<S> {
    pub inner: S,
    pub log: Vec<DrawRecord>,
}

impl<S: RandomSource> Recorder<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, log: Vec::new() }
    }
}

impl<S: RandomSource> RandomSource for Recorder<S> {
    fn choose(&mut self, kind: DrawKind, choice: Choice<'_>) -> usize {
        let arity = match choice {
            Choice::Uniform(n) => n,
            Choice::Weighted(w) => w.len(),
        };
        let outcome = self.inner.choose(kind, choice);
        self.log.push(DrawRecord { kind, arity, outcome });
        outcome
    }
}

/// An exact probability with 128-bit numerator and denominator, kept in lowest
/// terms. Used on the enumeration hot path; converts losslessly to
/// [`Rational`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Weight {
    num: u128,
    den: u128,
}

impl Weight {
    pub const ONE: Weight = Weight { num: 1, den: 1 };
    pub const ZERO: Weight = Weight { num: 0, den: 1 };

    pub fn new(num: u128, den: u128) -> Self {
        let g = num.gcd(&den).max(1);
        Self { num: num / g, den: den / g }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn checked_mul(self, rhs: Weight) -> Option<Weight> {
        // cross-reduce first to keep intermediates small
        let g1 = self.num.gcd(&rhs.den).max(1);
        let g2 = rhs.num.gcd(&self.den).max(1);
        let num = (self.num / g1).checked_mul(rhs.num / g2)?;
        let den = (self.den / g2).checked_mul(rhs.den / g1)?;
        Some(Weight { num, den })
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// `None` if `r` is negative or does not fit in 128 bits.
    pub fn from_rational(r: &Rational) -> Option<Weight> {
        Some(Weight { num: r.numer().to_u128()?, den: r.denom().to_u128()? })
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Exact running sum of [`Weight`]s. The denominator is the lcm of everything
/// added so far, so sums of path weights stay in 128 bits whenever the path
/// weights themselves do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MassSum {
    num: u128,
    den: u128,
}

impl Default for MassSum {
    fn default() -> Self {
        Self { num: 0, den: 1 }
    }
}

impl MassSum {
    /// Adds `times * w`. Returns `false` on overflow (the sum is then stale).
    #[must_use]
    pub fn add(&mut self, w: Weight, times: u128) -> bool {
        let Some(wn) = w.num.checked_mul(times) else { return false };
        if w.den == self.den {
            return match self.num.checked_add(wn) {
                Some(n) => {
                    self.num = n;
                    true
                }
                None => false,
            };
        }
        let g = self.den.gcd(&w.den);
        let Some(lcm) = (self.den / g).checked_mul(w.den) else { return false };
        let a = self.num.checked_mul(lcm / self.den);
        let b = wn.checked_mul(lcm / w.den);
        match (a, b) {
            (Some(a), Some(b)) => match a.checked_add(b) {
                Some(n) => {
                    self.num = n;
                    self.den = lcm;
                    true
                }
                None => false,
            },
            _ => false,
        }
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// The sum in lowest terms.
    pub fn reduced(self) -> Weight {
        Weight::new(self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("path weight exceeds 128-bit exact range")]
    WeightOverflow,
    #[error("the enumerated computation made different draws on replay (depth {depth})")]
    Nondeterministic { depth: usize },
}

#[derive(Debug, Clone)]
enum Options {
    Uniform(usize),
    Listed(Vec<(usize, Weight)>),
}

impl Options {
    fn len(&self) -> usize {
        match self {
            Options::Uniform(n) => *n,
            Options::Listed(v) => v.len(),
        }
    }

    fn at(&self, pos: usize) -> (usize, Weight) {
        match self {
            Options::Uniform(n) => (pos, Weight::new(1, *n as u128)),
            Options::Listed(v) => v[pos],
        }
    }
}

#[derive(Debug, Clone)]
struct Frame {
    kind: DrawKind,
    options: Options,
    pos: usize,
    /// weight of the path up to (excluding) this frame
    base: Weight,
    /// weight including the current option
    prefix: Weight,
}

/// Summary of a complete enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationSummary {
    pub paths: u64,
    /// Sum of all path weights; exactly 1 for a well-formed computation.
    pub total: Rational,
}

/// Exhaustive weighted enumeration mode.
///
/// Zero-weight options of a weighted draw are pruned unless their
/// [`DrawKind`] was registered with [`Enumerator::retain_zero_weight`].
#[derive(Debug, Clone, Default)]
pub struct Enumerator {
    frames: Vec<Frame>,
    cursor: usize,
    retain_zero: Vec<DrawKind>,
    overflow: bool,
    diverged: Option<usize>,
}

impl Enumerator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Keep zero-weight options of draws of `kind` as explicit weight-0 paths.
    pub fn retain_zero_weight(mut self, kind: DrawKind) -> Self {
        self.retain_zero.push(kind);
        self
    }

    /// Runs `body` once per path and hands each result to `visit` together with
    /// the path's exact weight.
    pub fn run<T>(
        mut self,
        mut body: impl FnMut(&mut Enumerator) -> T,
        mut visit: impl FnMut(T, Weight),
    ) -> Result<EnumerationSummary, EnumerationError> {
        let mut paths = 0u64;
        let mut total = MassSum::default();
        loop {
            self.cursor = 0;
            let out = body(&mut self);
            if let Some(depth) = self.diverged {
                return Err(EnumerationError::Nondeterministic { depth });
            }
            if self.cursor != self.frames.len() {
                return Err(EnumerationError::Nondeterministic { depth: self.cursor });
            }
            if self.overflow {
                return Err(EnumerationError::WeightOverflow);
            }
            let weight = self.frames.last().map_or(Weight::ONE, |f| f.prefix);
            paths += 1;
            if !total.add(weight, 1) {
                return Err(EnumerationError::WeightOverflow);
            }
            visit(out, weight);
            if !self.advance() {
                return Ok(EnumerationSummary { paths, total: total.to_rational() });
            }
        }
    }

    fn advance(&mut self) -> bool {
        while let Some(frame) = self.frames.last_mut() {
            if frame.pos + 1 < frame.options.len() {
                frame.pos += 1;
                let (_, w) = frame.options.at(frame.pos);
                match frame.base.checked_mul(w) {
                    Some(p) => frame.prefix = p,
                    None => self.overflow = true,
                }
                return true;
            }
            self.frames.pop();
        }
        false
    }
}

impl RandomSource for Enumerator {
    fn choose(&mut self, kind: DrawKind, choice: Choice<'_>) -> usize {
        let depth = self.cursor;
        self.cursor += 1;
        if let Some(frame) = self.frames.get(depth) {
            if frame.kind != kind {
                self.diverged.get_or_insert(depth);
            }
            return frame.options.at(frame.pos).0;
        }
        let options = match choice {
            Choice::Uniform(n) => Options::Uniform(n),
            Choice::Weighted(w) => {
                let keep_zero = self.retain_zero.contains(&kind);
                Options::Listed(
                    (0..w.len()).map(|i| (i, w.weight(i))).filter(|(_, wt)| keep_zero || !wt.is_zero()).collect(),
                )
            }
        };
        let base = self.frames.last().map_or(Weight::ONE, |f| f.prefix);
        let (outcome, w) = options.at(0);
        let prefix = base.checked_mul(w).unwrap_or_else(|| {
            self.overflow = true;
            Weight::ONE
        });
        self.frames.push(Frame { kind, options, pos: 0, base, prefix });
        outcome
    }
}

/// Exact weight of a complete enumeration, for callers that only need the
/// path count and total mass.
pub fn enumerate_all<T>(body: impl FnMut(&mut Enumerator) -> T) -> Result<EnumerationSummary, EnumerationError> {
    Enumerator::new().run(body, |_, _| {})
}
