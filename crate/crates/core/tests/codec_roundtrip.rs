//! Wire round-trip and compression invariants over generated messages.

mod common;

use common::*;
use ofh_conformance::codec::{
    bfp_compress, bfp_decompress, decode_cplane, decode_uplane, encode_cplane, encode_uplane,
    ECPRI_HEADER_LEN,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn cplane_round_trips(msg in cplane_message()) {
        let c = ctx();
        let bytes = encode_cplane(&msg, &c).unwrap();
        let mut back = decode_cplane(&bytes, &c).unwrap();
        prop_assert_eq!(back.header.payload_size as usize, bytes.len() - ECPRI_HEADER_LEN);
        back.header.payload_size = 0;
        prop_assert_eq!(&back, &msg);
        prop_assert_eq!(encode_cplane(&back, &c).unwrap(), bytes);
    }

    #[test]
    fn uplane_round_trips(msg in uplane_message()) {
        let c = ctx();
        let bytes = encode_uplane(&msg, &c).unwrap();
        let mut back = decode_uplane(&bytes, &c).unwrap();
        back.header.payload_size = 0;
        prop_assert_eq!(&back, &msg);
    }

    #[test]
    fn truncated_frames_are_rejected(msg in cplane_message(), cut in 1usize..8) {
        let c = ctx();
        let bytes = encode_cplane(&msg, &c).unwrap();
        let short = &bytes[..bytes.len().saturating_sub(cut)];
        prop_assert!(decode_cplane(short, &c).is_err());
    }

    #[test]
    fn bfp_exponent_and_error_bound(block in iq_block()) {
        let b = bfp_compress(&block);
        let e = oracle_exponent(&block);
        prop_assert_eq!(b.exponent, e);
        let back = bfp_decompress(&b);
        for (x, y) in block.iter().zip(&back) {
            for (u, v) in [(x.re, y.re), (x.im, y.im)] {
                let err = (u as i32 - v as i32).abs();
                prop_assert!(err < (1 << e));
            }
        }
    }
}
