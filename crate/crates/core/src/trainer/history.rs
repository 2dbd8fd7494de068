use std::fmt::Write;

/// Metrics of one completed epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
    /// Held-out loss, present when validation monitoring is on.
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn push(&mut self, r: EpochRecord) {
        debug_assert_eq!(r.epoch, self.records.len() + 1);
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `epoch,loss,accuracy` CSV with shortest round-trip number formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,accuracy\n");
        for r in &self.records {
            writeln!(out, "{},{:?},{:?}", r.epoch, r.loss, r.accuracy).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut h = TrainHistory::default();
        h.push(EpochRecord {
            epoch: 1,
            loss: 1.25,
            accuracy: 0.5,
            val_loss: None,
        });
        assert_eq!(h.to_csv(), "epoch,loss,accuracy\n1,1.25,0.5\n");
    }
}
