use super::param::{ParamId, ParameterStore};
use super::tape::{NodeId, Tape};
use crate::error::Result;

const DENOMINATOR_FLOOR: f64 = 1e-4;

/// Per-parameter comparison of analytic and central-difference gradients.
#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub entries: Vec<GradCheckEntry>,
}

#[derive(Clone, Debug)]
pub struct GradCheckEntry {
    pub id: ParamId,
    pub name: String,
    pub elements: usize,
    pub max_relative_error: f64,
    pub max_abs_gradient: f64,
    /// Element with the largest relative error and its two estimates.
    pub worst_index: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
}

impl GradCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.entries.iter().map(|e| e.max_relative_error).fold(0.0, f64::max)
    }
}

/// `|a - n| / max(|a|, |n|, 1e-4)`, so gradients below the floor are
/// compared in absolute terms.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(DENOMINATOR_FLOOR)
}

/// Compares the tape gradient of the scalar built by `graph` with central
/// differences of step `h` for every element of every trainable parameter.
/// Parameter values are restored before returning.
pub fn check_gradients<F>(graph: F, store: &mut ParameterStore, h: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape<'_>) -> Result<NodeId>,
{
    let analytic = {
        let mut tape = Tape::new(store);
        let loss = graph(&mut tape)?;
        tape.backward(loss)?.grads
    };
    let eval = |store: &ParameterStore| -> Result<f64> {
        let mut tape = Tape::new(store);
        let loss = graph(&mut tape)?;
        tape.scalar(loss)
    };
    let ids: Vec<ParamId> = store.ids().filter(|&id| store.get(id).trainable).collect();
    let mut entries = Vec::with_capacity(ids.len());
    for id in ids {
        let mut worst = 0.0f64;
        let mut worst_at = (0, 0.0, 0.0);
        let mut largest = 0.0f64;
        for k in 0..store.get(id).len() {
            let original = store.get(id).values[k];
            store.get_mut(id).values[k] = original + h;
            let plus = eval(store);
            store.get_mut(id).values[k] = original - h;
            let minus = eval(store);
            store.get_mut(id).values[k] = original;
            let numeric = (plus? - minus?) / (2.0 * h);
            let a = analytic.get(id)[k];
            let rel = relative_error(a, numeric);
            if rel > worst || k == 0 {
                worst = worst.max(rel);
                worst_at = (k, a, numeric);
            }
            largest = largest.max(a.abs());
        }
        let p = store.get(id);
        entries.push(GradCheckEntry {
            id,
            name: p.name.clone(),
            elements: p.len(),
            max_relative_error: worst,
            max_abs_gradient: largest,
            worst_index: worst_at.0,
            worst_analytic: worst_at.1,
            worst_numeric: worst_at.2,
        });
    }
    Ok(GradCheckReport { entries })
}
