/// A non-negative table over a set of variables, row-major in `vars`
/// order with the first variable varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl Factor {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(vars.len(), cards.len());
        debug_assert_eq!(cards.iter().product::<usize>(), values.len());
        Factor { vars, cards, values }
    }

    pub fn scalar(value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn contains(&self, var: usize) -> bool {
        self.vars.contains(&var)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Pointwise product; the result lists `self`'s variables first.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(c);
            }
        }
        let size: usize = cards.iter().product();
        // Stride of each result axis inside each operand (0 when absent).
        let map = |f: &Factor| -> Vec<usize> {
            let strides = f.strides();
            vars.iter()
                .map(|v| f.vars.iter().position(|x| x == v).map_or(0, |i| strides[i]))
                .collect()
        };
        let sa = map(self);
        let sb = map(other);
        let mut values = Vec::with_capacity(size);
        let mut digits = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for axis in (0..vars.len()).rev() {
                digits[axis] += 1;
                ia += sa[axis];
                ib += sb[axis];
                if digits[axis] < cards[axis] {
                    break;
                }
                ia -= sa[axis] * cards[axis];
                ib -= sb[axis] * cards[axis];
                digits[axis] = 0;
            }
        }
        Factor { vars, cards, values }
    }

    /// Sums `var` out of the factor.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(axis) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let card = self.cards[axis];
        let inner: usize = self.cards[axis + 1..].iter().product();
        let outer: usize = self.cards[..axis].iter().product();
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = (o * card + s) * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(axis);
        cards.remove(axis);
        Factor { vars, cards, values }
    }

    /// Restricts `var` to a single state and drops it from the scope.
    pub fn reduce(&self, var: usize, state: usize) -> Factor {
        let Some(axis) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let card = self.cards[axis];
        let inner: usize = self.cards[axis + 1..].iter().product();
        let outer: usize = self.cards[..axis].iter().product();
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = (o * card + state) * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(axis);
        cards.remove(axis);
        Factor { vars, cards, values }
    }
}
