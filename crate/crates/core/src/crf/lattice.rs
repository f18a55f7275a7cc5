use crate::scalar::log_sum_exp;
use crate::{Label, Scalar};

/// Log-space penalty added to IOB2-illegal transitions and starts during
/// constrained decoding.
pub const BIO_MASK: f64 = -1e4;

/// Unnormalized log scores of a linear chain: `n x L` emissions and an
/// `L x L` transition matrix indexed `[prev][cur]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice<T> {
    n: usize,
    labels: usize,
    emissions: Vec<T>,
    transitions: Vec<T>,
}

impl<T: Scalar> Lattice<T> {
    pub fn zeros(n: usize, labels: usize) -> Self {
        Lattice { n, labels, emissions: vec![T::zero(); n * labels], transitions: vec![T::zero(); labels * labels] }
    }

    /// # Panics
    /// If the buffer sizes do not match `n * labels` and `labels * labels`.
    pub fn from_parts(n: usize, labels: usize, emissions: Vec<T>, transitions: Vec<T>) -> Self {
        assert_eq!(emissions.len(), n * labels, "emission buffer size");
        assert_eq!(transitions.len(), labels * labels, "transition buffer size");
        Lattice { n, labels, emissions, transitions }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_labels(&self) -> usize {
        self.labels
    }

    #[inline]
    pub fn emission(&self, i: usize, y: usize) -> T {
        self.emissions[i * self.labels + y]
    }

    #[inline]
    pub fn emission_mut(&mut self, i: usize, y: usize) -> &mut T {
        &mut self.emissions[i * self.labels + y]
    }

    #[inline]
    pub fn transition(&self, prev: usize, cur: usize) -> T {
        self.transitions[prev * self.labels + cur]
    }

    #[inline]
    pub fn transition_mut(&mut self, prev: usize, cur: usize) -> &mut T {
        &mut self.transitions[prev * self.labels + cur]
    }

    fn emission_row(&self, i: usize) -> &[T] {
        &self.emissions[i * self.labels..(i + 1) * self.labels]
    }

    /// Score of one label path.
    pub fn path_score(&self, path: &[usize]) -> T {
        assert_eq!(path.len(), self.n);
        let mut score = T::zero();
        for (i, &y) in path.iter().enumerate() {
            score += self.emission(i, y);
            if i > 0 {
                score += self.transition(path[i - 1], y);
            }
        }
        score
    }

    /// Copy with IOB2-illegal transitions and `I-` starts penalized by
    /// [`BIO_MASK`]. `labels[y]` names lattice column `y`.
    pub fn with_bio_mask(&self, labels: &[Label]) -> Self {
        assert_eq!(labels.len(), self.labels);
        let mask = T::of(BIO_MASK);
        let mut out = self.clone();
        for (y, label) in labels.iter().enumerate() {
            if !label.may_follow(None) && self.n > 0 {
                *out.emission_mut(0, y) += mask;
            }
            for (p, prev) in labels.iter().enumerate() {
                if !label.may_follow(Some(*prev)) {
                    *out.transition_mut(p, y) += mask;
                }
            }
        }
        out
    }

    /// Forward log-messages `alpha[i][y]`, flattened `n x L`.
    fn forward(&self) -> Vec<T> {
        let l = self.labels;
        let mut alpha = vec![T::zero(); self.n * l];
        alpha[..l].copy_from_slice(self.emission_row(0));
        for i in 1..self.n {
            for y in 0..l {
                let incoming = (0..l).map(|p| alpha[(i - 1) * l + p] + self.transition(p, y));
                alpha[i * l + y] = log_sum_exp(incoming) + self.emission(i, y);
            }
        }
        alpha
    }

    /// Backward log-messages `beta[i][y]`; `beta[n-1][*] = 0`.
    fn backward(&self) -> Vec<T> {
        let l = self.labels;
        let mut beta = vec![T::zero(); self.n * l];
        for i in (0..self.n.saturating_sub(1)).rev() {
            for y in 0..l {
                let outgoing = (0..l).map(|c| self.transition(y, c) + self.emission(i + 1, c) + beta[(i + 1) * l + c]);
                beta[i * l + y] = log_sum_exp(outgoing);
            }
        }
        beta
    }
}

/// Log partition function over all label paths.
///
/// # Panics
/// On an empty lattice.
pub fn forward_log_z<T: Scalar>(lattice: &Lattice<T>) -> T {
    assert!(lattice.n > 0, "lattice must have at least one position");
    let alpha = lattice.forward();
    let l = lattice.labels;
    log_sum_exp(alpha[(lattice.n - 1) * l..].iter().copied())
}

/// Posterior marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals<T> {
    pub log_z: T,
    labels: usize,
    /// `P(y_i = y)`, flattened `n x L`.
    nodes: Vec<T>,
    /// `P(y_{i-1} = p, y_i = c)` for `i >= 1`, flattened `(n-1) x L x L`.
    edges: Vec<T>,
}

impl<T: Scalar> Marginals<T> {
    pub fn node(&self, i: usize, y: usize) -> T {
        self.nodes[i * self.labels + y]
    }

    /// Edge posterior between positions `i - 1` and `i` (`i >= 1`).
    pub fn edge(&self, i: usize, prev: usize, cur: usize) -> T {
        let l = self.labels;
        self.edges[(i - 1) * l * l + prev * l + cur]
    }

    pub fn len(&self) -> usize {
        self.nodes.len() / self.labels.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Forward-backward node and edge posteriors.
pub fn marginals<T: Scalar>(lattice: &Lattice<T>) -> Marginals<T> {
    assert!(lattice.n > 0, "lattice must have at least one position");
    let (n, l) = (lattice.n, lattice.labels);
    let alpha = lattice.forward();
    let beta = lattice.backward();
    let log_z = log_sum_exp(alpha[(n - 1) * l..].iter().copied());
    let nodes = (0..n * l).map(|k| (alpha[k] + beta[k] - log_z).exp()).collect();
    let mut edges = Vec::with_capacity((n - 1) * l * l);
    for i in 1..n {
        for p in 0..l {
            for c in 0..l {
                let s = alpha[(i - 1) * l + p] + lattice.transition(p, c) + lattice.emission(i, c) + beta[i * l + c];
                edges.push((s - log_z).exp());
            }
        }
    }
    Marginals { log_z, labels: l, nodes, edges }
}

/// Highest-scoring path and its score. Ties go to the lowest label index,
/// both at each backpointer and at the final position.
pub fn viterbi<T: Scalar>(lattice: &Lattice<T>) -> (Vec<usize>, T) {
    assert!(lattice.n > 0, "lattice must have at least one position");
    let (n, l) = (lattice.n, lattice.labels);
    let mut score = lattice.emission_row(0).to_vec();
    let mut back = vec![0usize; n * l];
    let mut next = vec![T::zero(); l];
    for i in 1..n {
        for c in 0..l {
            let (mut best, mut arg) = (score[0] + lattice.transition(0, c), 0);
            for (p, &sp) in score.iter().enumerate().skip(1) {
                let s = sp + lattice.transition(p, c);
                if s > best {
                    best = s;
                    arg = p;
                }
            }
            next[c] = best + lattice.emission(i, c);
            back[i * l + c] = arg;
        }
        std::mem::swap(&mut score, &mut next);
    }
    let mut last = 0;
    for y in 1..l {
        if score[y] > score[last] {
            last = y;
        }
    }
    let best = score[last];
    let mut path = vec![0usize; n];
    path[n - 1] = last;
    for i in (1..n).rev() {
        path[i - 1] = back[i * l + path[i]];
    }
    (path, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lattice_log_z() {
        let z1 = forward_log_z(&Lattice::<f64>::zeros(1, 11));
        assert!((z1 - 11f64.ln()).abs() < 1e-12);
        let z2 = forward_log_z(&Lattice::<f64>::zeros(2, 11));
        assert!((z2 - 121f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_lattice_uniform_marginals() {
        let m = marginals(&Lattice::<f64>::zeros(3, 4));
        for i in 0..3 {
            for y in 0..4 {
                assert!((m.node(i, y) - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constrained_zero_lattice_decodes_all_o() {
        let lat = Lattice::<f64>::zeros(5, 11).with_bio_mask(&Label::SCHEME);
        let (path, score) = viterbi(&lat);
        assert_eq!(path, vec![0; 5]);
        assert_eq!(score, 0.0);
    }

    #[test]
    fn viterbi_ties_prefer_low_index() {
        let (path, _) = viterbi(&Lattice::<f64>::zeros(4, 3));
        assert_eq!(path, vec![0; 4]);
    }

    #[test]
    fn shifting_one_position_shifts_log_z() {
        let mut lat = Lattice::<f64>::from_parts(2, 2, vec![0.1, -0.3, 0.7, 0.2], vec![0.5, -0.5, 0.0, 1.0]);
        let z = forward_log_z(&lat);
        let p = viterbi(&lat).0;
        *lat.emission_mut(1, 0) += 3.0;
        *lat.emission_mut(1, 1) += 3.0;
        assert!((forward_log_z(&lat) - z - 3.0).abs() < 1e-12);
        assert_eq!(viterbi(&lat).0, p);
    }

    #[test]
    fn works_in_single_precision() {
        let z = forward_log_z(&Lattice::<f32>::zeros(2, 11));
        assert!((z - 121f32.ln()).abs() < 1e-5);
    }
}
