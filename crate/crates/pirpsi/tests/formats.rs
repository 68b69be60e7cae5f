use pirpsi::db::{read_store, write_store};
use pirpsi::wire::{decode_answer, decode_query, encode_answer, encode_query, symbol_width};
use pirpsi_core::protocol::answer_query;
use pirpsi_core::{Answer, MessageStore, QueryVector, SchemeParams, SubPacket, Symbol};
use proptest::prelude::*;

const ORDERS: [u32; 10] = [2, 3, 4, 5, 8, 9, 16, 251, 256, 65521];

fn params() -> impl Strategy<Value = SchemeParams> {
    (2usize..=9, 2usize..=9, 1usize..=4, prop::sample::select(&ORDERS[..]))
        .prop_filter_map("valid tuple", |(n, k, t, q)| {
            SchemeParams::new(n, k, 1 + t % (k - 1).min(n - 1), (n - 1) * t, q).ok()
        })
}

fn query(p: SchemeParams) -> impl Strategy<Value = QueryVector> {
    prop::collection::vec(0..p.n() as u32, p.k()).prop_map(QueryVector)
}

proptest! {
    #[test]
    fn store_files_round_trip(p in params(), seed: u64) {
        let store = MessageStore::random(p, seed);
        let text = write_store(&store);
        let back = read_store(&text).unwrap();
        prop_assert_eq!(&back, &store);
        prop_assert_eq!(write_store(&back), text);
    }

    #[test]
    fn queries_round_trip((p, v) in params().prop_flat_map(|p| (Just(p), query(p)))) {
        let bytes = encode_query(&v, &p).unwrap();
        prop_assert_eq!(bytes.len(), 7 + 12 + p.k());
        let w = decode_query(&bytes).unwrap();
        prop_assert_eq!((w.n as usize, w.k as usize, w.q), (p.n(), p.k(), p.q()));
        prop_assert_eq!(encode_query(&w.vector, &p).unwrap(), bytes);
        prop_assert_eq!(w.vector, v);
    }

    #[test]
    fn answers_round_trip((p, v) in params().prop_flat_map(|p| (Just(p), query(p))), seed: u64) {
        let store = MessageStore::random(p, seed);
        let a = answer_query(&v, &store).unwrap();
        let bytes = encode_answer(&a, &p).unwrap();
        let expected_len = if v.is_zero() { 1 } else { 1 + p.subpacket_len() * symbol_width(p.q()) };
        prop_assert_eq!(bytes.len(), expected_len);
        let back = decode_answer(&bytes, &p).unwrap();
        prop_assert_eq!(encode_answer(&back, &p).unwrap(), bytes);
        prop_assert_eq!(back, a);
    }

    #[test]
    fn arbitrary_answer_bytes_never_panic(p in params(), bytes in prop::collection::vec(any::<u8>(), 0..40)) {
        if let Ok(a) = decode_answer(&bytes, &p) {
            prop_assert_eq!(encode_answer(&a, &p).unwrap(), bytes);
        }
    }
}

#[test]
fn payload_symbols_must_fit_the_field() {
    let p = SchemeParams::new(2, 2, 1, 1, 3).unwrap();
    let bad = Answer::Payload(SubPacket(vec![Symbol(3)]));
    assert!(encode_answer(&bad, &p).is_err());
}
