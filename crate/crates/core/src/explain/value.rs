use alloc::vec::Vec;

use crate::data::Dataset;
use crate::model::Predictor;

/// Interventional coalition value over a fixed background.
pub(super) struct CoalitionValue<'a, P: ?Sized> {
    model: &'a P,
    background: &'a Dataset,
    x: &'a [f64],
    target: f64,
    buf: Vec<f64>,
}

impl<'a, P: Predictor + ?Sized> CoalitionValue<'a, P> {
    pub fn new(model: &'a P, background: &'a Dataset, x: &'a [f64]) -> Self {
        Self {
            model,
            background,
            x,
            target: model.score(x),
            buf: alloc::vec![0.0; x.len()],
        }
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// Mean score with features where `member(i)` holds taken from the
    /// instance. Rows are accumulated in background order.
    pub fn value(&mut self, member: impl Fn(usize) -> bool) -> f64 {
        let m = self.x.len();
        if (0..m).all(&member) {
            return self.target;
        }
        let mut acc = 0.0;
        for row in self.background.rows() {
            self.buf.copy_from_slice(row);
            for i in 0..m {
                if member(i) {
                    self.buf[i] = self.x[i];
                }
            }
            acc += self.model.score(&self.buf);
        }
        acc / self.background.n_rows() as f64
    }
}
