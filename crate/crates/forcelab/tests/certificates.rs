use forcelab::lab::{recheck_bcd, recheck_sweet, reencode_sweet, sample_sweet_certificates};
use forcelab_core::bcd::{self, Reading};
use forcelab_core::Subalgebra;
use serde_json::{json, Value};

fn blocks(s: &Subalgebra) -> Vec<Vec<usize>> {
    s.blocks().iter().map(|b| b.iter().collect()).collect()
}

#[test]
fn sweet_certificates_round_trip() {
    let certs = sample_sweet_certificates(40, 15, 10, 7).unwrap();
    assert_eq!(certs.len(), 65);
    for c in &certs {
        // one pass canonicalizes the DSL text; after that encoding is stable
        let once = reencode_sweet(c).unwrap();
        assert_eq!(reencode_sweet(&once).unwrap(), once);
        assert_eq!(once["kind"], c["kind"]);
        // the sampled cases pass, and still pass in isolation
        assert!(recheck_sweet(c).unwrap().is_empty(), "{c}");
        assert!(recheck_sweet(&once).unwrap().is_empty(), "{once}");
    }
}

#[test]
fn sweet_certificates_survive_text() {
    for c in sample_sweet_certificates(10, 5, 5, 11).unwrap() {
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(reencode_sweet(&back).unwrap(), reencode_sweet(&c).unwrap());
    }
}

#[test]
fn malformed_sweet_certificates_are_rejected() {
    let mut c = sample_sweet_certificates(1, 0, 0, 3).unwrap().remove(0);
    c["kind"] = json!("nonsense");
    assert!(recheck_sweet(&c).is_err());
    let mut c = sample_sweet_certificates(0, 1, 0, 3).unwrap().remove(0);
    c["f1"] = json!([["no_such_label"]]);
    assert!(recheck_sweet(&c).is_err());
}

#[test]
fn bcd_refutations_recheck() {
    let mut refuting = 0;
    let mut passing = 0;
    for inst in bcd::instances(4) {
        let o = bcd::evaluate(&inst);
        for r in Reading::ALL {
            let cert = json!({
                "reading": r.id(),
                "atoms": inst.atoms(),
                "b": blocks(&inst.b),
                "d": blocks(&inst.d),
                "c0": blocks(&inst.c0),
            });
            let text = serde_json::to_string(&cert).unwrap();
            let again = recheck_bcd(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(again, o.refutes(r));
            if again {
                refuting += 1;
            } else {
                passing += 1;
            }
        }
    }
    // the quotient reading is refuted at four atoms; the others are not
    assert!(refuting > 0 && passing > 0);
}
