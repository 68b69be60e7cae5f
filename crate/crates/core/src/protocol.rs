//! Query generation, answer generation and decoding.
//!
//! The user builds `N` query vectors `u_1, ..., u_N`, shuffles them onto the
//! servers with `σ`, and each server returns the sum of the sub-packets its
//! vector names. `u_1` carries no demand sub-packet; `u_{m+1}` carries demand
//! sub-packet `π(m)`. Subtracting `u_1`'s answer and the known side-information
//! terms from `u_{m+1}`'s answer leaves the demand sub-packet.

use alloc::vec::Vec;

use thiserror::Error;

use crate::distributions::{p_theta_zero, PijTable};
use crate::field::{FieldError, Message, SubPacket, Symbol};
use crate::params::SchemeParams;
use crate::query::k_subsets;
use crate::query::{DemandSideInfo, QueryVector};
use crate::randomness::{
    bernoulli_weights, draw_nonzero_vector, draw_ordering, draw_permutation, draw_subset, draw_weighted, DrawKind,
    DrawRecord, RandomSource, RandomnessError, Recorder, Sampler, WeightedChoice,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("expected {expected} answers, got {actual}")]
    AnswerCount { actual: usize, expected: usize },
    #[error("side information message {0} missing")]
    MissingSideInfo(usize),
    #[error("store holds {actual} messages, expected {expected}")]
    StoreSize { actual: usize, expected: usize },
    #[error("message at position {position} carries index {index}")]
    StoreIndex { position: usize, index: usize },
    #[error("query has {actual} entries, expected {expected}")]
    QueryLength { actual: usize, expected: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Randomness(#[from] RandomnessError),
}

/// A server's reply: nothing for the all-zero query, otherwise one sub-packet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Answer {
    Empty,
    Payload(SubPacket),
}

impl Answer {
    pub fn is_empty(&self) -> bool {
        matches!(self, Answer::Empty)
    }
}

/// The `K` messages every server replicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageStore {
    params: SchemeParams,
    messages: Vec<Message>,
}

impl MessageStore {
    /// `messages[i]` must be message `i + 1`.
    pub fn new(params: SchemeParams, messages: Vec<Message>) -> Result<Self, ProtocolError> {
        if messages.len() != params.k() {
            return Err(ProtocolError::StoreSize { actual: messages.len(), expected: params.k() });
        }
        for (position, m) in messages.iter().enumerate() {
            if m.index() != position + 1 {
                return Err(ProtocolError::StoreIndex { position, index: m.index() });
            }
            Message::new(m.index(), m.symbols().to_vec(), &params)?;
        }
        Ok(Self { params, messages })
    }

    /// Uniformly random contents from a ChaCha8 stream seeded with `seed`.
    pub fn random(params: SchemeParams, seed: u64) -> Self {
        use rand::Rng;
        let mut sampler = Sampler::new(seed);
        let rng = sampler.rng();
        let messages = (1..=params.k())
            .map(|index| {
                let symbols = (0..params.l()).map(|_| Symbol(rng.random_range(0..params.q()))).collect();
                Message::new(index, symbols, &params).expect("symbols drawn in range")
            })
            .collect();
        Self { params, messages }
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// Message `index` (1-based).
    pub fn get(&self, index: usize) -> Option<&Message> {
        index.checked_sub(1).and_then(|i| self.messages.get(i))
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }
}

/// Every random choice of one session, from which all query vectors follow.
///
/// Sets are 1-based message indices in ascending order except `ordering`, which
/// lists `R_1, ..., R_I` in drawn order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SessionState {
    ws: DemandSideInfo,
    /// `pi[m - 1] = π(m)`
    pi: Vec<usize>,
    /// `b` restricted to `S`, as `(index, value)`
    b: Vec<(usize, u32)>,
    pair: (usize, usize),
    r: Vec<usize>,
    ordering: Vec<Vec<usize>>,
    t: Vec<usize>,
    /// `c` restricted to `T`
    c: Vec<(usize, u32)>,
    theta: u8,
    /// `sigma[n - 1] = σ(n)`
    sigma: Vec<usize>,
}

impl SessionState {
    pub fn ws(&self) -> &DemandSideInfo {
        &self.ws
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn theta(&self) -> u8 {
        self.theta
    }

    pub fn r(&self) -> &[usize] {
        &self.r
    }

    pub fn t(&self) -> &[usize] {
        &self.t
    }

    pub fn ordering(&self) -> &[Vec<usize>] {
        &self.ordering
    }

    pub fn b(&self, k: usize) -> QueryVector {
        fill(k, self.b.iter().copied())
    }

    pub fn b0(&self, k: usize) -> QueryVector {
        fill(k, self.b_on(&self.r))
    }

    /// `b_m` for `1 <= m <= I`.
    pub fn b_m(&self, m: usize, k: usize) -> QueryVector {
        fill(k, self.b_on(&self.ordering[m - 1]))
    }

    pub fn c(&self, k: usize) -> QueryVector {
        fill(k, self.c.iter().copied())
    }

    fn b_on<'a>(&'a self, set: &'a [usize]) -> impl Iterator<Item = (usize, u32)> + 'a {
        self.b.iter().copied().filter(move |(i, _)| set.contains(i))
    }

    /// Side-information entries of `u_{m+1}` (`m >= 1`), or of `u_1` for `m = 0`.
    fn side_part(&self, m: usize) -> Vec<(usize, u32)> {
        if m == 0 {
            self.b_on(&self.r).collect()
        } else if self.theta == 1 && m <= self.pair.0 {
            self.b_on(&self.ordering[m - 1]).collect()
        } else {
            self.b.clone()
        }
    }

    /// `u_m` for `1 <= m <= N`, before the server permutation.
    pub fn u(&self, m: usize, k: usize) -> QueryVector {
        let mut v = fill(k, self.side_part(m - 1).into_iter().chain(self.c.iter().copied()));
        if m >= 2 {
            v.set(self.ws.demand(), self.pi[m - 2] as u32);
        }
        v
    }

    /// `u_1, ..., u_N`.
    pub fn unpermuted(&self, k: usize) -> Vec<QueryVector> {
        (1..=self.pi.len() + 1).map(|m| self.u(m, k)).collect()
    }

    /// `v_n = u_{σ(n)}` for every server `n`.
    pub fn queries(&self, k: usize) -> Vec<QueryVector> {
        let u = self.unpermuted(k);
        self.sigma.iter().map(|&m| u[m - 1].clone()).collect()
    }

    /// `τ = σ⁻¹`, as `tau[m - 1] = τ(m)`.
    pub fn tau(&self) -> Vec<usize> {
        let mut tau = alloc::vec![0; self.sigma.len()];
        for (n, &m) in self.sigma.iter().enumerate() {
            tau[m - 1] = n + 1;
        }
        tau
    }
}

fn fill(k: usize, entries: impl Iterator<Item = (usize, u32)>) -> QueryVector {
    let mut v = QueryVector::zero(k);
    for (i, x) in entries {
        v.set(i, x);
    }
    v
}

/// Query generation for one parameter tuple, with its pair and coin
/// distributions precomputed.
#[derive(Debug, Clone)]
pub struct QueryGenerator {
    params: SchemeParams,
    pairs: Vec<(usize, usize)>,
    pair_weights: WeightedChoice,
    /// indexed by `I`; index 0 unused
    coins: Vec<WeightedChoice>,
}

impl QueryGenerator {
    pub fn new(params: &SchemeParams) -> Result<Self, ProtocolError> {
        Self::with_table(&PijTable::new(params))
    }

    /// Generator driven by an explicit pair table.
    pub fn with_table(table: &PijTable) -> Result<Self, ProtocolError> {
        let params = *table.params();
        let (pairs, weights): (Vec<_>, Vec<_>) = table.iter().map(|(ij, p)| (ij, p.clone())).unzip();
        let pair_weights = WeightedChoice::new(&weights)?;
        let coins = (0..=params.m())
            .map(|i| {
                let p = p_theta_zero(i, &params).expect("I within [0:M]");
                bernoulli_weights(&p)
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { params, pairs, pair_weights, coins })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// Draws everything except `σ`, which is left as the identity.
    pub fn draw_unpermuted<R: RandomSource + ?Sized>(&self, ws: &DemandSideInfo, rng: &mut R) -> SessionState {
        let n = self.params.n();
        let pi = draw_permutation(rng, DrawKind::DemandPermutation, n - 1).expect("N >= 2");
        let b = draw_nonzero_vector(rng, DrawKind::SideValues, ws.side(), n);
        let pair = self.pairs[draw_weighted(rng, DrawKind::Pair, &self.pair_weights)];
        let (i, j) = pair;
        let r = draw_subset(rng, DrawKind::SideSubset, ws.side(), i).expect("I <= M");
        let ordering =
            if i == 0 { Vec::new() } else { draw_ordering(rng, DrawKind::SubsetOrdering, k_subsets(&r, i - 1)) };
        let interference = ws.interference(&self.params);
        let t = draw_subset(rng, DrawKind::InterferenceSubset, &interference, j).expect("J <= K - M - 1");
        let c = draw_nonzero_vector(rng, DrawKind::InterferenceValues, &t, n);
        // with I = 0 both coin outcomes give the same vectors
        let theta = if i == 0 { 0 } else { draw_weighted(rng, DrawKind::Coin, &self.coins[i]) as u8 };
        SessionState { ws: ws.clone(), pi, b, pair, r, ordering, t, c, theta, sigma: (1..=n).collect() }
    }

    /// Draws `σ` onto a state from [`Self::draw_unpermuted`].
    pub fn permute<R: RandomSource + ?Sized>(&self, mut state: SessionState, rng: &mut R) -> SessionState {
        state.sigma = self.draw_server_permutation(rng);
        state
    }

    /// `σ` alone, as `[σ(1), ..., σ(N)]`.
    pub fn draw_server_permutation<R: RandomSource + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        draw_permutation(rng, DrawKind::ServerPermutation, self.params.n()).expect("N >= 2")
    }

    /// The full session: `(v_1, ..., v_N)` and the state that produced them.
    pub fn generate<R: RandomSource + ?Sized>(
        &self,
        ws: &DemandSideInfo,
        rng: &mut R,
    ) -> (Vec<QueryVector>, SessionState) {
        let state = self.draw_unpermuted(ws, rng);
        let state = self.permute(state, rng);
        (state.queries(self.params.k()), state)
    }
}

/// One-shot query generation.
pub fn generate_queries<R: RandomSource + ?Sized>(
    ws: &DemandSideInfo,
    params: &SchemeParams,
    rng: &mut R,
) -> Result<(Vec<QueryVector>, SessionState), ProtocolError> {
    Ok(QueryGenerator::new(params)?.generate(ws, rng))
}

/// `Σ_i X_{i, v(i)}`, or [`Answer::Empty`] for the all-zero query.
pub fn answer_query(v: &QueryVector, store: &MessageStore) -> Result<Answer, ProtocolError> {
    let p = &store.params;
    if v.len() != p.k() {
        return Err(ProtocolError::QueryLength { actual: v.len(), expected: p.k() });
    }
    if v.is_zero() {
        return Ok(Answer::Empty);
    }
    let field = p.field();
    let len = p.subpacket_len();
    let mut acc = SubPacket::zero(len);
    for (i, &j) in v.entries().iter().enumerate() {
        let j = j as usize;
        if j > p.subpackets() {
            return Err(FieldError::SubPacketIndex { index: j, max: p.subpackets() }.into());
        }
        if let Some(s) = store.messages[i].slice(j, len) {
            field.accumulate(&mut acc, s);
        }
    }
    Ok(Answer::Payload(acc))
}

/// Recovers `X_W` from the answers (in server order), the session state and
/// the side-information messages.
pub fn decode(
    answers: &[Answer],
    state: &SessionState,
    side_info: &[Message],
    params: &SchemeParams,
) -> Result<Message, ProtocolError> {
    let n = params.n();
    if answers.len() != n {
        return Err(ProtocolError::AnswerCount { actual: answers.len(), expected: n });
    }
    let len = params.subpacket_len();
    let field = params.field();
    let known =
        |index: usize| side_info.iter().find(|m| m.index() == index).ok_or(ProtocolError::MissingSideInfo(index));
    for &i in state.ws.side() {
        known(i)?;
    }
    // z[m - 1] = Z_m = Y_{τ(m)}
    let z = state
        .tau()
        .into_iter()
        .map(|server| match &answers[server - 1] {
            Answer::Empty => Ok(SubPacket::zero(len)),
            Answer::Payload(p) if p.len() == len => Ok(p.clone()),
            Answer::Payload(p) => Err(FieldError::LengthMismatch { left: p.len(), right: len }),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut parts = alloc::vec![SubPacket::zero(len); n - 1];
    for m in 1..n {
        let mut x = z[m].clone();
        field.deduct(&mut x, &z[0].0);
        for (i, j) in state.side_part(m) {
            field.deduct(&mut x, known(i)?.slice(j as usize, len).expect("nonzero entry"));
        }
        for (i, j) in state.side_part(0) {
            field.accumulate(&mut x, known(i)?.slice(j as usize, len).expect("nonzero entry"));
        }
        parts[state.pi[m - 1] - 1] = x;
    }
    Ok(Message::from_subpackets(state.ws.demand(), &parts))
}

/// The ordered draws of one session.
pub type RandomTape = Vec<DrawRecord>;

/// Result of [`run_session`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub queries: Vec<QueryVector>,
    pub answers: Vec<Answer>,
    pub state: SessionState,
    pub recovered: Message,
    /// Symbols downloaded: `L / (N - 1)` per non-empty answer.
    pub downloaded_symbols: usize,
    pub tape: RandomTape,
}

/// Generates queries, answers them from `store`, and decodes.
pub fn run_session<R: RandomSource + ?Sized>(
    ws: &DemandSideInfo,
    generator: &QueryGenerator,
    store: &MessageStore,
    rng: &mut R,
) -> Result<SessionOutcome, ProtocolError> {
    let params = generator.params();
    let mut recorder = Recorder::new(rng);
    let (queries, state) = generator.generate(ws, &mut recorder);
    let answers = queries.iter().map(|v| answer_query(v, store)).collect::<Result<Vec<_>, _>>()?;
    let side_info: Vec<Message> = ws.side().iter().map(|&i| store.messages[i - 1].clone()).collect();
    let recovered = decode(&answers, &state, &side_info, params)?;
    let downloaded_symbols = answers.iter().filter(|a| !a.is_empty()).count() * params.subpacket_len();
    Ok(SessionOutcome { queries, answers, state, recovered, downloaded_symbols, tape: recorder.log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::Enumerator;
    use alloc::vec;

    fn params(n: usize, k: usize, m: usize, l: usize) -> SchemeParams {
        SchemeParams::new(n, k, m, l, 2).unwrap()
    }

    /// Every enumerated session for the canonical pair.
    fn sessions(p: &SchemeParams) -> Vec<SessionState> {
        let gen = QueryGenerator::new(p).unwrap();
        let ws = DemandSideInfo::canonical(p);
        let mut out = Vec::new();
        Enumerator::new().run(|e| gen.generate(&ws, e).1, |s, _| out.push(s)).unwrap();
        out
    }

    fn identity(n: usize) -> Vec<usize> {
        (1..=n).collect()
    }

    #[test]
    fn hand_trace_type_zero() {
        let p = params(4, 5, 2, 3);
        let s = sessions(&p)
            .into_iter()
            .find(|s| s.pair == (0, 0) && s.pi == identity(3) && s.sigma == identity(4) && s.b == vec![(2, 1), (3, 1)])
            .unwrap();
        let v: Vec<_> = s.queries(5).into_iter().map(|q| q.0).collect();
        assert_eq!(v, vec![vec![0, 0, 0, 0, 0], vec![1, 1, 1, 0, 0], vec![2, 1, 1, 0, 0], vec![3, 1, 1, 0, 0]]);
    }

    #[test]
    fn hand_trace_forced_coin() {
        let p = params(2, 3, 1, 1);
        let s = sessions(&p).into_iter().find(|s| s.pair == (1, 1) && s.sigma == identity(2)).unwrap();
        assert_eq!(s.theta, 1);
        assert_eq!(s.r, vec![2]);
        assert_eq!(s.ordering, vec![Vec::<usize>::new()]);
        assert_eq!(s.t, vec![3]);
        let v: Vec<_> = s.queries(3).into_iter().map(|q| q.0).collect();
        assert_eq!(v, vec![vec![0, 1, 1], vec![1, 0, 1]]);

        let store = store(&p, &[1, 0, 1]);
        let answers: Vec<_> = s.queries(3).iter().map(|v| answer_query(v, &store).unwrap()).collect();
        assert_eq!(answers, vec![Answer::Payload(sp(&[1])), Answer::Payload(sp(&[0]))]);
        let x = decode(&answers, &s, &store.messages[1..2], &p).unwrap();
        assert_eq!(x.symbols(), &[Symbol(1)]);
    }

    #[test]
    fn hand_trace_type_zero_decode() {
        let p = params(2, 3, 1, 1);
        let s = sessions(&p).into_iter().find(|s| s.pair == (0, 0) && s.sigma == identity(2)).unwrap();
        let store = store(&p, &[1, 0, 0]);
        let answers: Vec<_> = s.queries(3).iter().map(|v| answer_query(v, &store).unwrap()).collect();
        assert_eq!(answers, vec![Answer::Empty, Answer::Payload(sp(&[1]))]);
        assert_eq!(decode(&answers, &s, &store.messages[1..2], &p).unwrap().symbols(), &[Symbol(1)]);
    }

    #[test]
    fn any_type_zero_tape_has_one_zero_query() {
        for p in [params(4, 5, 2, 3), params(3, 4, 1, 2), params(2, 3, 1, 1)] {
            for s in sessions(&p).iter().filter(|s| s.pair == (0, 0)) {
                assert_eq!(s.queries(p.k()).iter().filter(|v| v.is_zero()).count(), 1);
            }
        }
    }

    fn sp(values: &[u32]) -> SubPacket {
        SubPacket(values.iter().map(|&v| Symbol(v)).collect())
    }

    fn store(p: &SchemeParams, bits: &[u32]) -> MessageStore {
        let messages =
            bits.iter().enumerate().map(|(i, &b)| Message::new(i + 1, vec![Symbol(b)], p).unwrap()).collect();
        MessageStore::new(*p, messages).unwrap()
    }

    #[test]
    fn answers() {
        let p = params(2, 3, 1, 1);
        let st = store(&p, &[1, 0, 1]);
        assert_eq!(answer_query(&QueryVector(vec![0, 0, 0]), &st).unwrap(), Answer::Empty);
        assert_eq!(answer_query(&QueryVector(vec![1, 0, 1]), &st).unwrap(), Answer::Payload(sp(&[0])));
        assert_eq!(answer_query(&QueryVector(vec![0, 0, 1]), &st).unwrap(), Answer::Payload(sp(&[1])));
        assert!(answer_query(&QueryVector(vec![1, 0]), &st).is_err());
        let p = params(4, 5, 2, 3);
        let st = MessageStore::random(p, 5);
        let ans = answer_query(&QueryVector(vec![0, 0, 2, 0, 0]), &st).unwrap();
        assert_eq!(ans, Answer::Payload(SubPacket(vec![st.get(3).unwrap().symbols()[1]])));
    }

    #[test]
    fn decode_errors() {
        let p = params(2, 3, 1, 1);
        let s = sessions(&p).remove(0);
        let st = store(&p, &[1, 0, 1]);
        assert_eq!(
            decode(&[Answer::Empty], &s, &st.messages[1..2], &p),
            Err(ProtocolError::AnswerCount { actual: 1, expected: 2 })
        );
        assert_eq!(decode(&[Answer::Empty, Answer::Empty], &s, &[], &p), Err(ProtocolError::MissingSideInfo(2)));
    }

    #[test]
    fn store_validation() {
        let p = params(2, 3, 1, 1);
        let m = |i| Message::new(i, vec![Symbol(0)], &p).unwrap();
        assert!(MessageStore::new(p, vec![m(1), m(2)]).is_err());
        assert!(MessageStore::new(p, vec![m(1), m(3), m(2)]).is_err());
        assert_eq!(MessageStore::random(p, 1), MessageStore::random(p, 1));
    }

    #[test]
    fn exhaustive_structure() {
        for p in [params(4, 5, 2, 3), params(3, 4, 1, 2), params(3, 4, 2, 2), params(2, 3, 1, 1), params(3, 5, 2, 2)] {
            let (n, k, m) = (p.n(), p.k(), p.m());
            for s in sessions(&p) {
                let u = s.unpermuted(k);
                for v in &u {
                    let size = v.support_size();
                    assert!(size == 0 || (m + 1..=k).contains(&size), "{v}");
                }
                let mut sorted = u.clone();
                sorted.sort();
                sorted.dedup();
                assert_eq!(sorted.len(), n, "distinct queries");
                assert_eq!(u.iter().filter(|v| v.is_zero()).count(), usize::from(s.pair == (0, 0)));
                let mut demand: Vec<u32> = u[1..].iter().map(|v| v.at(s.ws.demand())).collect();
                demand.sort();
                assert_eq!(demand, (1..n as u32).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn sessions_recover_and_count_downloads() {
        let p = params(4, 5, 2, 3);
        let gen = QueryGenerator::new(&p).unwrap();
        let st = MessageStore::random(p, 11);
        let ws = DemandSideInfo::new(4, vec![1, 5], &p).unwrap();
        let mut rng = Sampler::new(3);
        for _ in 0..200 {
            let out = run_session(&ws, &gen, &st, &mut rng).unwrap();
            assert_eq!(&out.recovered, st.get(4).unwrap());
            let expected = if out.state.pair == (0, 0) { 3 } else { 4 };
            assert_eq!(out.downloaded_symbols, expected);
            assert_eq!(out.tape.first().unwrap().kind, DrawKind::DemandPermutation);
            assert_eq!(out.tape.last().unwrap().kind, DrawKind::ServerPermutation);
        }
        let p = params(2, 3, 1, 1);
        let gen = QueryGenerator::new(&p).unwrap();
        let st = MessageStore::random(p, 2);
        let ws = DemandSideInfo::canonical(&p);
        let mut rng = Sampler::new(0);
        let mut seen_zero = false;
        for _ in 0..50 {
            let out = run_session(&ws, &gen, &st, &mut rng).unwrap();
            if out.state.pair == (0, 0) {
                assert_eq!(out.downloaded_symbols, 1);
                seen_zero = true;
            }
        }
        assert!(seen_zero);
    }

    #[test]
    fn tape_order_is_canonical() {
        let p = params(4, 6, 2, 3);
        let gen = QueryGenerator::new(&p).unwrap();
        let ws = DemandSideInfo::canonical(&p);
        let mut rng = Sampler::new(8);
        for _ in 0..100 {
            let mut rec = Recorder::new(&mut rng);
            gen.generate(&ws, &mut rec);
            let kinds: Vec<_> = rec.log.iter().map(|d| d.kind).collect();
            assert!(kinds.windows(2).all(|w| w[0] <= w[1]), "{kinds:?}");
        }
    }
}
