use ner_core::corpus::{tag_violations, Label};
use ner_core::crf::{fit, forward_log_z, marginals, nll_and_gradient, viterbi, CrfModel, Instance, Lattice, TrainConfig};
use ner_core::features::{FeatureIndex, SparseVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_lattice(rng: &mut StdRng, n: usize, l: usize, scale: f64) -> Lattice<f64> {
    let e = (0..n * l).map(|_| rng.random_range(-scale..scale)).collect();
    let t = (0..l * l).map(|_| rng.random_range(-scale..scale)).collect();
    Lattice::from_parts(n, l, e, t)
}

/// Every label path of length `n` over `l` labels, in lexicographic order.
fn all_paths(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| (0..l).map(move |y| [p.clone(), vec![y]].concat())).collect();
    }
    out
}

fn brute_log_z(lat: &Lattice<f64>) -> f64 {
    let scores: Vec<f64> = all_paths(lat.len(), lat.num_labels()).iter().map(|p| lat.path_score(p)).collect();
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
}

#[test]
fn log_z_and_viterbi_match_enumeration() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let l = rng.random_range(1..=4);
        let lat = random_lattice(&mut rng, n, l, 3.0);
        assert!((forward_log_z(&lat) - brute_log_z(&lat)).abs() < 1e-8);
        let paths = all_paths(n, l);
        // first maximum in lexicographic order is the lowest-index tie-break
        let mut best = &paths[0];
        for p in &paths {
            if lat.path_score(p) > lat.path_score(best) {
                best = p;
            }
        }
        let (path, score) = viterbi(&lat);
        assert_eq!(&path, best);
        assert!((score - lat.path_score(best)).abs() < 1e-12);
    }
}

#[test]
fn marginals_match_enumeration_and_normalize() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let l = rng.random_range(1..=4);
        let lat = random_lattice(&mut rng, n, l, 2.0);
        let m = marginals(&lat);
        let log_z = brute_log_z(&lat);
        let mut node = vec![0.0; n * l];
        let mut edge = vec![0.0; n.saturating_sub(1) * l * l];
        for p in all_paths(n, l) {
            let w = (lat.path_score(&p) - log_z).exp();
            for i in 0..n {
                node[i * l + p[i]] += w;
                if i > 0 {
                    edge[(i - 1) * l * l + p[i - 1] * l + p[i]] += w;
                }
            }
        }
        for i in 0..n {
            let total: f64 = (0..l).map(|y| m.node(i, y)).sum();
            assert!((total - 1.0).abs() < 1e-10);
            for y in 0..l {
                assert!((m.node(i, y) - node[i * l + y]).abs() < 1e-10);
            }
        }
        for i in 1..n {
            for p in 0..l {
                let out: f64 = (0..l).map(|c| m.edge(i, p, c)).sum();
                assert!((out - m.node(i - 1, p)).abs() < 1e-10);
                for c in 0..l {
                    assert!((m.edge(i, p, c) - edge[(i - 1) * l * l + p * l + c]).abs() < 1e-10);
                }
            }
            for c in 0..l {
                let inc: f64 = (0..l).map(|p| m.edge(i, p, c)).sum();
                assert!((inc - m.node(i, c)).abs() < 1e-10);
            }
        }
    }
}

fn random_model(rng: &mut StdRng) -> (CrfModel<f64>, Instance<f64>) {
    let labels: Vec<Label> = Label::SCHEME[..rng.random_range(2..=4)].to_vec();
    let features = rng.random_range(1..=5);
    let index = FeatureIndex::from_keys((0..features).map(|f| format!("f{f}")).collect());
    let mut model = CrfModel::zeros(labels.clone(), index, TrainConfig::default());
    let params: Vec<f64> = (0..model.num_parameters()).map(|_| rng.random_range(-1.0..1.0)).collect();
    model.set_parameters(&params);
    let n = rng.random_range(1..=5);
    let xs = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=features);
            SparseVector::from_pairs((0..k).map(|_| (rng.random_range(0..features), rng.random_range(0.5..2.0))).collect())
        })
        .collect();
    let gold = (0..n).map(|_| rng.random_range(0..labels.len())).collect();
    (model, Instance { features: xs, gold })
}

// only guards 0/0 on weights of features absent from the instance
const FLOOR: f64 = 1e-8;

#[test]
fn gradient_matches_central_differences() {
    let mut rng = StdRng::seed_from_u64(13);
    let eps = 1e-5;
    for _ in 0..50 {
        let (mut model, inst) = random_model(&mut rng);
        let (_, grad) = nll_and_gradient(&model, &inst);
        let base = model.parameters();
        for k in 0..base.len() {
            let mut x = base.clone();
            x[k] = base[k] + eps;
            model.set_parameters(&x);
            let up = nll_and_gradient(&model, &inst).0;
            x[k] = base[k] - eps;
            model.set_parameters(&x);
            let down = nll_and_gradient(&model, &inst).0;
            let fd = (up - down) / (2.0 * eps);
            let rel = (grad[k] - fd).abs() / grad[k].abs().max(fd.abs()).max(FLOOR);
            assert!(rel <= 1e-5, "component {k}: analytic {} vs fd {fd}", grad[k]);
        }
        model.set_parameters(&base);
    }
}

#[test]
fn duplicated_instance_doubles_the_objective() {
    let mut rng = StdRng::seed_from_u64(14);
    let config = TrainConfig { l1: 0.0, l2: 0.0, max_iterations: 1, ..TrainConfig::default() };
    for _ in 0..20 {
        let (model, inst) = random_model(&mut rng);
        let (nll, _) = nll_and_gradient(&model, &inst);
        let once = fit(&mut model.clone(), std::slice::from_ref(&inst), &config).unwrap();
        let twice = fit(&mut model.clone(), &[inst.clone(), inst.clone()], &config).unwrap();
        assert!((once.trace[0] - nll).abs() < 1e-12);
        assert!((twice.trace[0] - 2.0 * nll).abs() < 1e-12);
    }
}

#[test]
fn constrained_decoding_never_violates_bio() {
    let mut rng = StdRng::seed_from_u64(15);
    for _ in 0..1000 {
        let n = rng.random_range(1..=12);
        let lat = random_lattice(&mut rng, n, 11, 10.0).with_bio_mask(&Label::SCHEME);
        let (path, _) = viterbi(&lat);
        let tags: Vec<Label> = path.iter().map(|&y| Label::SCHEME[y]).collect();
        assert!(tag_violations(&tags).iter().all(Option::is_none), "{tags:?}");
    }
}
