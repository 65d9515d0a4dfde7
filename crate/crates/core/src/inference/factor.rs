use crate::network::{Cpt, Evidence};

/// Dense nonnegative table over an ordered scope of variables, row-major
/// with the last scope variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(scope.len(), cards.len(), "scope and cardinalities differ in length");
        assert_eq!(values.len(), cards.iter().product::<usize>(), "value count mismatch");
        Self { scope, cards, values }
    }

    pub fn scalar(value: f64) -> Self {
        Self { scope: Vec::new(), cards: Vec::new(), values: vec![value] }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Value at the given states, listed in scope order.
    pub fn value(&self, states: &[usize]) -> f64 {
        self.values[self.flat_index(states)]
    }

    pub fn flat_index(&self, states: &[usize]) -> usize {
        states.iter().zip(&self.cards).fold(0, |acc, (&s, &c)| acc * c + s)
    }

    pub fn normalized(&self) -> Factor {
        let z = self.total();
        Factor {
            values: self.values.iter().map(|v| v / z).collect(),
            ..self.clone()
        }
    }

    /// The CPT of `cpt.owner()` as a factor over parents and owner, with
    /// observed variables fixed and dropped from the scope.
    pub fn from_cpt(cpt: &Cpt, evidence: &Evidence) -> Factor {
        let mut full_scope: Vec<usize> = cpt.parents().to_vec();
        full_scope.push(cpt.owner());
        let card = cpt.cardinality();
        let mut full_cards = cpt.parent_cardinalities().to_vec();
        full_cards.push(card);
        let scope: Vec<usize> = full_scope.iter().copied().filter(|&v| evidence.get(v).is_none()).collect();
        let cards: Vec<usize> = full_scope
            .iter()
            .zip(&full_cards)
            .filter(|(v, _)| evidence.get(**v).is_none())
            .map(|(_, &c)| c)
            .collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut digits = vec![0usize; scope.len()];
        let mut full = vec![0usize; full_scope.len()];
        for _ in 0..size {
            let mut d = 0;
            for (slot, &v) in full.iter_mut().zip(&full_scope) {
                *slot = match evidence.get(v) {
                    Some(s) => s,
                    None => {
                        d += 1;
                        digits[d - 1]
                    }
                };
            }
            let (owner_state, parent_states) = full.split_last().expect("owner is in scope");
            values.push(cpt.prob(cpt.row_index(parent_states), *owner_state));
            increment(&mut digits, &cards);
        }
        Factor { scope, cards, values }
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.scope.iter().zip(&other.cards) {
            if !scope.contains(&v) {
                scope.push(v);
                cards.push(c);
            }
        }
        let sa = strides_in(&scope, &self.scope, &self.cards);
        let sb = strides_in(&scope, &other.scope, &other.cards);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut digits = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            // odometer step with incremental offsets
            for pos in (0..digits.len()).rev() {
                digits[pos] += 1;
                ia += sa[pos];
                ib += sb[pos];
                if digits[pos] < cards[pos] {
                    break;
                }
                ia -= sa[pos] * cards[pos];
                ib -= sb[pos] * cards[pos];
                digits[pos] = 0;
            }
        }
        Factor { scope, cards, values }
    }

    /// Marginalizes `var` out of the factor. A variable outside the scope is a no-op.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.scope.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let inner: usize = self.cards[pos + 1..].iter().product();
        let card = self.cards[pos];
        let outer: usize = self.cards[..pos].iter().product();
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = (o * card + s) * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        Factor { scope, cards, values }
    }

    /// Adds a variable the factor is constant over.
    pub fn broadcast(&self, var: usize, card: usize) -> Factor {
        if self.scope.contains(&var) {
            return self.clone();
        }
        self.product(&Factor { scope: vec![var], cards: vec![card], values: vec![1.0; card] })
    }

    /// Same factor with its scope permuted into `order` (a permutation of the scope).
    pub fn reorder(&self, order: &[usize]) -> Factor {
        assert_eq!(order.len(), self.scope.len(), "reorder needs a permutation of the scope");
        let cards: Vec<usize> = order
            .iter()
            .map(|v| {
                let p = self.scope.iter().position(|s| s == v).expect("variable in scope");
                self.cards[p]
            })
            .collect();
        let src_strides = strides_in(order, &self.scope, &self.cards);
        let size = self.values.len();
        let mut values = Vec::with_capacity(size);
        let mut digits = vec![0usize; order.len()];
        for _ in 0..size {
            let idx: usize = digits.iter().zip(&src_strides).map(|(d, s)| d * s).sum();
            values.push(self.values[idx]);
            increment(&mut digits, &cards);
        }
        Factor { scope: order.to_vec(), cards, values }
    }
}

/// Advances a mixed-radix counter (last digit fastest).
pub(crate) fn increment(digits: &mut [usize], cards: &[usize]) {
    for pos in (0..digits.len()).rev() {
        digits[pos] += 1;
        if digits[pos] < cards[pos] {
            return;
        }
        digits[pos] = 0;
    }
}

/// For each variable of `target`, its stride inside a factor over `scope`
/// (0 when absent).
fn strides_in(target: &[usize], scope: &[usize], cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![0usize; scope.len()];
    let mut acc = 1;
    for i in (0..scope.len()).rev() {
        strides[i] = acc;
        acc *= cards[i];
    }
    target
        .iter()
        .map(|v| scope.iter().position(|s| s == v).map_or(0, |p| strides[p]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_then_sum_out() {
        // f(A) = [0.3, 0.7], g(A,B) = P(B|A)
        let f = Factor::new(vec![0], vec![2], vec![0.3, 0.7]);
        let g = Factor::new(vec![0, 1], vec![2, 2], vec![0.9, 0.1, 0.2, 0.8]);
        let joint = f.product(&g);
        assert_eq!(joint.scope(), &[0, 1]);
        let expected = [0.27, 0.03, 0.14, 0.56];
        for (a, b) in joint.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let pb = joint.sum_out(0);
        assert!((pb.values()[0] - 0.41).abs() < 1e-15);
        assert!((pb.values()[1] - 0.59).abs() < 1e-15);
    }

    #[test]
    fn product_with_disjoint_scope_is_outer_product() {
        let f = Factor::new(vec![3], vec![2], vec![1.0, 2.0]);
        let g = Factor::new(vec![1], vec![3], vec![1.0, 10.0, 100.0]);
        let h = f.product(&g);
        assert_eq!(h.values(), &[1.0, 10.0, 100.0, 2.0, 20.0, 200.0]);
    }

    #[test]
    fn reorder_transposes() {
        let f = Factor::new(vec![0, 1], vec![2, 3], vec![0., 1., 2., 3., 4., 5.]);
        let t = f.reorder(&[1, 0]);
        assert_eq!(t.cardinalities(), &[3, 2]);
        assert_eq!(t.values(), &[0., 3., 1., 4., 2., 5.]);
        assert_eq!(t.reorder(&[0, 1]), f);
    }

    #[test]
    fn broadcast_adds_constant_axis() {
        let f = Factor::new(vec![0], vec![2], vec![0.25, 0.75]);
        let g = f.broadcast(5, 3);
        assert_eq!(g.values().len(), 6);
        assert_eq!(g.value(&[1, 2]), 0.75);
    }
}
