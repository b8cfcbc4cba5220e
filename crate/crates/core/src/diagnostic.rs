//! Data checks for the conditions under which the interaction matrix is
//! identifiable from one realisation.
//!
//! For an ordered pair `(i, j)`, `i ≠ j`, the sequence must contain an event
//! `τ` of dimension `j` followed by an event `τ+` of dimension `i` such that
//! only dimension-`j` events occur in `[τ, τ+)`. That happens exactly when
//! some event of `j` is immediately followed by an event of `i`, so a single
//! pass over adjacent events suffices. Diagonal entries carry no condition and
//! are reported as satisfied.

use crate::events::EventSequence;
use crate::intensity::IntervalState;
use crate::likelihood::Objective;
use crate::model::HawkesModel;

/// `out[i][j]` tells whether the ordering condition holds for `(i, j)`.
pub fn identifiability_diagnostic(seq: &EventSequence) -> Vec<Vec<bool>> {
    let d = seq.dim();
    let mut out = vec![vec![false; d]; d];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = true;
    }
    for pair in seq.marks().windows(2) {
        let (j, i) = (pair[0], pair[1]);
        out[i][j] = true;
    }
    out
}

/// Like [`identifiability_diagnostic`], additionally requiring the candidate
/// model's intensity of `i` to be positive just before the `j` event `τ`.
pub fn identifiability_diagnostic_with_model(model: &HawkesModel, seq: &EventSequence) -> Vec<Vec<bool>> {
    let d = seq.dim().min(model.dim());
    let mut out = vec![vec![false; d]; d];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = true;
    }
    let mut state = IntervalState::new(model);
    // current run of consecutive events sharing one mark, with a flag per
    // dimension telling whether its intensity was positive before any of them
    let mut run: Option<(usize, Vec<bool>)> = None;
    for (t, mark) in seq.iter() {
        state.advance(model, t, Objective::Exact);
        if let Some((j, positive)) = &run {
            if *j != mark && mark < d && *j < d && positive[mark] {
                out[mark][*j] = true;
            }
        }
        match &mut run {
            Some((j, positive)) if *j == mark => {
                for (p, now) in positive.iter_mut().zip(state.lambda_star()) {
                    *p |= now > 0.0;
                }
            }
            _ => run = Some((mark, state.lambda_star().map(|v| v > 0.0).collect())),
        }
        state.apply_event(model, mark);
    }
    out
}
