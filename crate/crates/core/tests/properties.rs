use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sect_core::chains::build_sect_chains;
use sect_core::corpus::{generate_synthetic_corpus, Document, SynthSpec};
use sect_core::encoder::Vocab;
use sect_core::eval::{evaluate, EvalOptions};
use sect_core::gru::GruStack;
use sect_core::model::{sec_trace, Model, ModelConfig, ModelKind, Unit, UpperHiddenInit};
use sect_core::train::corpus_categories;
use sect_core::{Category, LabelSet};

fn doc(seed: u64) -> Document {
    generate_synthetic_corpus(&SynthSpec::new(1, 2, seed)).unwrap().remove(0)
}

fn model(kind: ModelKind, d: usize, docs: &[Document], seed: u64) -> Model {
    let cfg = ModelConfig::new(kind, d, &corpus_categories(docs));
    Model::new(cfg, LabelSet::default(), Vocab::from_documents(docs), seed).unwrap()
}

fn vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, len)
}

fn gru_case() -> impl Strategy<Value = (u64, Vec<f64>, Vec<Vec<f64>>)> {
    (1usize..7).prop_flat_map(|d| (any::<u64>(), vector(d), prop::collection::vec(vector(d), 1..8)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chains_ignore_link_and_mention_order(seed in 0u64..10_000, shuffle in any::<u64>()) {
        let d = doc(seed);
        let labels = LabelSet::default();
        let mut shuffled = d.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
        shuffled.tlinks.shuffle(&mut rng);
        shuffled.mentions.shuffle(&mut rng);
        for invert in [false, true] {
            prop_assert_eq!(build_sect_chains(&d, &labels, invert).unwrap(), build_sect_chains(&shuffled, &labels, invert).unwrap());
        }
    }

    #[test]
    fn recurrent_states_never_drop_below_anchor((seed, anchor, targets) in gru_case()) {
        let gru = GruStack::new(anchor.len(), 2, &mut ChaCha8Rng::seed_from_u64(seed));
        let refs: Vec<&[f64]> = targets.iter().map(Vec::as_slice).collect();
        let trace = sec_trace(&gru, &anchor, &refs, UpperHiddenInit::Anchor);
        for state in &trace.states {
            for (r, a) in state.iter().zip(&anchor) {
                prop_assert!(r >= a);
            }
        }
    }

    #[test]
    fn embeddings_have_doubled_width_and_start_from_anchor((seed, anchor, targets) in gru_case()) {
        let d = anchor.len();
        let gru = GruStack::new(d, 2, &mut ChaCha8Rng::seed_from_u64(seed));
        let refs: Vec<&[f64]> = targets.iter().map(Vec::as_slice).collect();
        let trace = sec_trace(&gru, &anchor, &refs, UpperHiddenInit::Anchor);
        prop_assert_eq!(trace.embeddings.len(), targets.len());
        for (t, x) in trace.embeddings.iter().zip(&targets) {
            prop_assert_eq!(t.len(), 2 * d);
            prop_assert_eq!(&t[d..], x.as_slice());
        }
        prop_assert_eq!(&trace.embeddings[0][..d], anchor.as_slice());
    }

    #[test]
    fn later_targets_do_not_affect_earlier_steps((seed, anchor, targets) in gru_case(), noise in vector(6)) {
        prop_assume!(targets.len() >= 2);
        let d = anchor.len();
        let gru = GruStack::new(d, 2, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut mutated = targets.clone();
        let last = mutated.len() - 1;
        for (v, n) in mutated[last].iter_mut().zip(&noise) {
            *v += n;
        }
        let run = |ts: &[Vec<f64>]| {
            let refs: Vec<&[f64]> = ts.iter().map(Vec::as_slice).collect();
            sec_trace(&gru, &anchor, &refs, UpperHiddenInit::Anchor).embeddings
        };
        let a = run(&targets);
        let b = run(&mutated);
        prop_assert_eq!(&a[..last], &b[..last]);
    }
}

fn gradients(model: &Model, batch: &[(&Document, Unit<'_>)]) -> Vec<f64> {
    let mut grads = model.zeros_like();
    model.loss_and_grad(batch, false, None, &mut grads).unwrap();
    grads.tensors().iter().flat_map(|(_, t, _)| t.data.clone()).collect()
}

#[test]
fn batch_gradient_is_sum_of_chain_gradients() {
    let d = doc(3);
    let m = model(ModelKind::Sec, 6, std::slice::from_ref(&d), 1);
    let chains = build_sect_chains(&d, &m.labels, false).unwrap();
    let batch: Vec<(&Document, Unit)> = chains.iter().take(4).map(|c| (&d, Unit::Chain(c))).collect();
    assert_eq!(batch.len(), 4);
    let together = gradients(&m, &batch);
    let mut summed = vec![0.0; together.len()];
    for item in &batch {
        for (s, g) in summed.iter_mut().zip(gradients(&m, std::slice::from_ref(item))) {
            *s += g;
        }
    }
    for (a, b) in together.iter().zip(&summed) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn dct_step_feeds_later_event_links() {
    let d = doc(8);
    let m = model(ModelKind::Sec, 6, std::slice::from_ref(&d), 2);
    let mut without_dct = d.clone();
    without_dct.tlinks.retain(|l| l.category != Category::E2D);
    let e2e_outputs = |doc: &Document| -> BTreeMap<(String, String), Vec<f64>> {
        let mut out = BTreeMap::new();
        for chain in build_sect_chains(doc, &m.labels, false).unwrap() {
            for (t, step) in m.forward_chain(doc, &chain).unwrap().into_iter().zip(&chain.steps) {
                if step.link.category == Category::E2E {
                    out.insert((step.link.source.clone(), step.link.target.clone()), t.values);
                }
            }
        }
        out
    };
    let with = e2e_outputs(&d);
    let without = e2e_outputs(&without_dct);
    assert!(!with.is_empty());
    assert!(with.iter().any(|(k, v)| without[k] != *v));
}

#[test]
fn evaluation_ignores_document_order() {
    let docs = generate_synthetic_corpus(&SynthSpec::new(12, 2, 4)).unwrap();
    for kind in [ModelKind::Sec, ModelKind::Local, ModelKind::Multi] {
        let m = model(kind, 6, &docs, 3);
        let forward: Vec<&Document> = docs.iter().collect();
        let mut reversed = forward.clone();
        reversed.reverse();
        let a = evaluate(&m, &forward, EvalOptions::default(), "test", &[0]).unwrap();
        let b = evaluate(&m, &reversed, EvalOptions::default(), "test", &[0]).unwrap();
        assert_eq!(a, b);
    }
}
