#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CommitConfusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl CommitConfusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.true_pos += 1,
            (true, false) => self.false_pos += 1,
            (false, false) => self.true_neg += 1,
            (false, true) => self.false_neg += 1,
        }
    }

    fn ratio(a: usize, b: usize) -> f64 {
        if b == 0 {
            0.0
        } else {
            a as f64 / b as f64
        }
    }

    pub fn precision(&self) -> f64 {
        Self::ratio(self.true_pos, self.true_pos + self.false_pos)
    }

    pub fn recall(&self) -> f64 {
        Self::ratio(self.true_pos, self.true_pos + self.false_neg)
    }

    pub fn accuracy(&self) -> f64 {
        Self::ratio(
            self.true_pos + self.true_neg,
            self.true_pos + self.true_neg + self.false_pos + self.false_neg,
        )
    }
}
