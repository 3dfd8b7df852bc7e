use rayon::prelude::*;

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::layers::Network;

/// Accuracy, mean loss and confusion counts (`confusion[true][predicted]`).
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub samples: usize,
    pub accuracy: f64,
    pub mean_loss: f64,
    pub confusion: Vec<Vec<usize>>,
}

impl Evaluation {
    pub fn correct(&self) -> usize {
        (0..self.confusion.len()).map(|c| self.confusion[c][c]).sum()
    }

    /// Recall per class; `None` for classes absent from the data.
    pub fn per_class_accuracy(&self) -> Vec<Option<f64>> {
        self.confusion
            .iter()
            .enumerate()
            .map(|(c, row)| {
                let total: usize = row.iter().sum();
                (total > 0).then(|| row[c] as f64 / total as f64)
            })
            .collect()
    }
}

/// Argmax-of-power predictions over a dataset. Samples are processed in
/// parallel and reduced in index order.
pub fn evaluate(network: &Network, data: &Dataset) -> Result<Evaluation> {
    let classes = network.classes();
    if data.classes() > classes {
        return Err(Error::shape(format!("at most {classes} classes"), data.classes()));
    }
    let results: Vec<(f64, usize)> = (0..data.len())
        .into_par_iter()
        .map(|i| network.evaluate_sample(data.sample(i), data.label(i)))
        .collect::<Result<_>>()?;
    let mut confusion = vec![vec![0; classes]; classes];
    let mut loss = 0.0;
    for (i, (l, p)) in results.iter().enumerate() {
        loss += l;
        confusion[data.label(i)][*p] += 1;
    }
    let n = data.len();
    let correct: usize = (0..classes).map(|c| confusion[c][c]).sum();
    Ok(Evaluation {
        samples: n,
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        mean_loss: if n == 0 { 0.0 } else { loss / n as f64 },
        confusion,
    })
}
