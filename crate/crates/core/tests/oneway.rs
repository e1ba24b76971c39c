use std::collections::HashSet;

use lorenz_code::cup::{measure_mect, MectConfig};
use lorenz_code::lorenz::LorenzSetup;
use lorenz_code::oneway::*;
use mpreal::MpReal;
use proptest::prelude::*;

const GOLDEN_DIGEST: &str = include_str!("golden/hash8_zero_key.hex");
const GOLDEN_STATE: &str = include_str!("golden/one_way_base_state.txt");
const GOLDEN_VECTORS: &str = include_str!("golden/hash8_vectors.txt");

#[test]
fn base_state_matches_mpfr_oracle() {
    let input = encode_key(&BaseConfig::default(), &KeyBlock::default()).unwrap();
    let state = one_way(&input).unwrap();
    assert_eq!(state.to_hex_dump(), GOLDEN_STATE);
}

#[test]
fn zero_key_digest_matches_golden_file() {
    let d = hash8(&BaseConfig::default(), &KeyBlock::default()).unwrap();
    assert_eq!(format!("{d}\n"), GOLDEN_DIGEST);
}

#[test]
fn keyed_digests_match_mpfr_oracle() {
    let base = BaseConfig::default();
    for line in GOLDEN_VECTORS.lines().skip(1) {
        let (key, want) = line.split_once(' ').unwrap();
        let d = hash8(&base, &KeyBlock::from_hex(key).unwrap()).unwrap();
        assert_eq!(d.to_string(), want, "key {key}");
    }
}

#[test]
fn repeated_evaluation_is_bit_identical() {
    let base = BaseConfig::default();
    let k = KeyBlock(*b"Lorenz63");
    let first = hash8(&base, &k).unwrap();
    for _ in 0..3 {
        assert_eq!(hash8(&base, &k).unwrap(), first);
    }
}

#[test]
fn each_key_byte_is_injective() {
    let base = BaseConfig::default();
    for pos in 0..8 {
        let mut seen = HashSet::new();
        for v in 0..=255u8 {
            let mut m = [0u8; 8];
            m[pos] = v;
            let input = encode_key(&base, &KeyBlock(m)).unwrap();
            let fields = [
                &input.params.gamma,
                &input.params.sigma,
                &input.params.beta,
                &input.initial.x,
                &input.initial.y,
                &input.initial.z,
                &input.h,
                &input.t,
            ];
            assert!(seen.insert(fields[pos].to_hex_dump()), "byte {pos} value {v}");
        }
        assert_eq!(seen.len(), 256);
    }
}

#[test]
fn every_digest_is_past_the_divergence_time() {
    let t256 = measure_mect(&LorenzSetup::classic(), 256, &MectConfig::default()).unwrap().mect;
    assert!(t256 < 200.0, "MECT(256) = {t256}");
    let base = BaseConfig::default();
    for m8 in [0u8, 1, 128, 255] {
        let input = encode_key(&base, &KeyBlock([255, 255, 255, 255, 255, 255, 255, m8])).unwrap();
        assert!(input.t.to_f64() >= 200.0);
        assert!(input.t.to_f64() > t256);
    }
}

#[test]
fn wide_step_perturbation_is_available() {
    let mut base = BaseConfig::default();
    base.h_perturb_scale = BaseConfig::WIDE_H_PERTURB.parse().unwrap();
    let input = encode_key(&base, &KeyBlock([0, 0, 0, 0, 0, 0, 100, 0])).unwrap();
    assert_eq!(input.h, MpReal::from_decimal("0.01", 256).unwrap().add(
        &MpReal::from_u64(100, 256).unwrap().mul(&MpReal::from_decimal("0.001", 256).unwrap()).unwrap()
    ).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_key_encodes_to_a_valid_input(m in any::<[u8; 8]>()) {
        let input = encode_key(&BaseConfig::default(), &KeyBlock(m)).unwrap();
        prop_assert!(input.t.to_f64() >= 200.0);
        prop_assert!(input.params.gamma.to_f64() >= 28.0);
        let h = input.h.to_f64();
        prop_assert!((0.01..=0.01255 + 1e-12).contains(&h));
    }

    #[test]
    fn key_text_round_trips(m in any::<[u8; 8]>()) {
        let k = KeyBlock(m);
        prop_assert_eq!(KeyBlock::from_hex(&k.to_string()).unwrap(), k);
    }

    #[test]
    fn digest_reflects_sign_and_fraction(v in -1e6f64..1e6, e in -40i64..40) {
        let x = MpReal::from_f64(v, 256).unwrap().mul_2exp(e).unwrap();
        let z = MpReal::zero(256).unwrap();
        let s = lorenz_code::lorenz::State3::new(x.clone(), z.clone(), z).unwrap();
        let d = extract_digest(&s).unwrap();
        prop_assert_eq!(d.bit(0), x.is_negative());
        for i in 1..256 {
            prop_assert_eq!(d.bit(i), !x.is_zero() && x.significand_bit(i as u32));
        }
    }
}
