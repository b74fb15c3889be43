use std::collections::HashMap;

use fmc::bridge::cbv::{compare_with_reference, random_cbv, CbvAgreement};
use fmc::bridge::lambda::{lambda_beta_eta_eq, random_lambda, LTerm, Pattern};
use fmc::bridge::translate::{close_over_context, fmc_to_lambda, fmc_to_lambda_at, interpret_on, lambda_to_fmc};
use fmc::equivalence::{random_derived, random_instance, DerivedLaw, EqnLaw};
use fmc::gen::{random_typed, rng, GenConfig};
use fmc::parser::print_term;
use fmc::syntax::{compose, Loc};
use fmc::types::{check, Context, SimpleType};
use proptest::prelude::*;

fn round_trips(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let (m, _) = random_lambda(&mut r, 15);
    let t = lambda_to_fmc(&[], &m).map_err(|e| format!("{m}: {e}"))?;
    let d = check(&Context::new(), &t.term, &t.ty).map_err(|e| format!("{m} ↦ {} : {} ({e})", print_term(&t.term), t.ty))?;
    let back = fmc_to_lambda(&d).map_err(|e| format!("{m}: {e}"))?;
    let want = close_over_context(&t.ctx, &m);
    if lambda_beta_eta_eq(&back, &want) {
        Ok(())
    } else {
        Err(format!("{m}: got {back}, expected {want}"))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn faithfulness_round_trip(seed in any::<u64>()) {
        round_trips(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn cbv_encoding_agrees_with_reference(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (t, w) = random_cbv(&mut r, 14, &["c", "d"]);
        if let CbvAgreement::Disagree(why) = compare_with_reference(&t, &w, 2_000) {
            return Err(TestCaseError::fail(format!("{t}: {why}")));
        }
    }
}

#[test]
fn law_instances_translate_to_equal_lambda_terms() {
    let mut r = rng(11);
    let mut instances = Vec::new();
    for law in EqnLaw::ALL {
        instances.extend((0..40).map(|_| random_instance(law, &mut r)));
    }
    for law in DerivedLaw::ALL {
        for _ in 0..20 {
            instances.extend(random_derived(law, &mut r));
        }
    }
    for inst in instances {
        let ctx = Context::new();
        let l = fmc_to_lambda_at(&ctx, &inst.lhs, &inst.ty).unwrap();
        let rr = fmc_to_lambda_at(&ctx, &inst.rhs, &inst.ty).unwrap();
        assert!(lambda_beta_eta_eq(&l, &rr), "{inst}\n  {l}\n  {rr}");
    }
}

fn main_vec(t: &SimpleType, input: bool) -> Vec<SimpleType> {
    let (i, o) = t.as_arrow().expect("arrow");
    (if input { i } else { o }).get(&Loc::Main).to_vec()
}

#[test]
fn sequencing_lemma_image() {
    let mut r = rng(3);
    let cfg = GenConfig { max_size: 10, locs: vec![Loc::Main], consts: true };
    let pool: Vec<_> = (0..400).map(|_| random_typed(&mut r, &cfg)).collect();
    let mut checked = 0;
    for (n, nty, dn) in &pool {
        for (m, mty, dm) in &pool {
            if main_vec(nty, false) != main_vec(mty, true) || checked >= 300 {
                continue;
            }
            let nm = compose(n, m);
            let ty = SimpleType::main_arrow(main_vec(nty, true), main_vec(mty, false));
            let d = check(&Context::new(), &nm, &ty).unwrap();
            let whole = fmc_to_lambda(&d).unwrap();
            // λc. ⟦M⟧(⟦N⟧(c))
            let cs: Vec<_> = (0..main_vec(nty, true).len()).map(|i| fmc::syntax::name(&format!("q{i}"))).collect();
            let items: Vec<LTerm> = cs.iter().map(|c| LTerm::Var(c.clone())).collect();
            let mid = interpret_on(dn, &HashMap::new(), items).unwrap();
            let out = interpret_on(dm, &HashMap::new(), mid).unwrap();
            let pat = if cs.len() == 1 { Pattern::Var(cs[0].clone()) } else { Pattern::Tuple(cs.into_iter().map(Pattern::Var).collect()) };
            let body = if out.len() == 1 { out.into_iter().next().unwrap() } else { LTerm::Tuple(out) };
            let split = LTerm::Lam(pat, std::sync::Arc::new(body));
            assert!(lambda_beta_eta_eq(&whole, &split), "{} ; {}\n  {whole}\n  {split}", print_term(n), print_term(m));
            checked += 1;
        }
    }
    assert!(checked >= 100, "only {checked} composable pairs");
}
