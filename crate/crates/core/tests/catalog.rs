use fluxlab::catalog::{self, FieldClaim, Regularity, SymbolProperty};
use fluxlab::morera::{self, MoreraThresholds, SingularSet, Verdict, REMOVABLE_TAU};
use fluxlab::quadrature::{make_green_domain, DomainShape};
use fluxlab::symbol::{classify, DEFAULT_RANK_TOL};

#[test]
fn symbol_facts_match_classification() {
    for entry in catalog::operators() {
        let r = classify(&entry.op, &entry.at, 400, DEFAULT_RANK_TOL).unwrap();
        for f in &entry.facts {
            let got = match f.property {
                SymbolProperty::Elliptic => r.elliptic,
                SymbolProperty::ComplexElliptic => r.complex_elliptic,
                SymbolProperty::ConstantRank => r.constant_rank,
                SymbolProperty::Cancelling => r.cancelling.holds,
                SymbolProperty::Cocancelling => r.cocancelling.holds,
            };
            assert_eq!(got, f.holds, "{} {:?} ({})", entry.id, f.property, f.reason);
        }
    }
}

#[test]
fn enclosed_flux_and_removability_facts() {
    for entry in catalog::fields() {
        let Regularity::Singular { set } = &entry.regularity else { continue };
        let SingularSet::Point { at } = set else { continue };
        for f in &entry.facts {
            let op = catalog::operator(f.operator).unwrap().op;
            match &f.claim {
                FieldClaim::EnclosedFlux { value } => {
                    for (k, shape) in [
                        DomainShape::Ball { center: at.iter().map(|c| c + 0.05).collect(), radius: 0.4 },
                        DomainShape::Box { lo: vec![-0.3; at.len()], hi: vec![0.5; at.len()] },
                    ]
                    .into_iter()
                    .enumerate()
                    {
                        let u = make_green_domain(shape, 40).unwrap();
                        let rec = morera::flux_of(&op, &entry.field, &u).unwrap();
                        let rel = (rec.alpha[0] - value[0]).abs() / value[0];
                        assert!(rel < 1e-6, "{} domain {k}: {} vs {}", entry.id, rec.alpha[0], value[0]);
                    }
                }
                FieldClaim::Removable { holds } => {
                    let eps = [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125];
                    let rep = morera::removable_singularity_probe(&op, &entry.field, set, &eps, 24, REMOVABLE_TAU).unwrap();
                    assert_eq!(rep.removable, *holds, "{}: {rep:?}", entry.id);
                }
                _ => {}
            }
        }
    }
}

#[test]
fn jump_facts_match_morera_verdicts() {
    for entry in catalog::fields() {
        for f in &entry.facts {
            let FieldClaim::WeakSolution { holds } = f.claim else { continue };
            let op = catalog::operator(f.operator).unwrap().op;
            let fams = morera::morera_families(entry.field.domain(), 3, 60, 7, 8).unwrap();
            let v = morera::morera_test(&op, &entry.field, &fams, 2.0, MoreraThresholds::default()).unwrap();
            let accepted = v.verdict != Verdict::Rejected;
            assert_eq!(accepted, holds, "{}: {:?}", entry.id, v.verdict);
        }
    }
}

#[test]
fn every_smooth_pairing_has_exact_image() {
    let pairs = catalog::exact_pairs();
    assert!(pairs.len() >= 20);
    for (op, f) in &pairs {
        let x = vec![0.1; f.n()];
        let v = f.exact_image(&op.op, &x).unwrap().unwrap();
        assert_eq!(v.len(), op.op.dim_f);
    }
}
