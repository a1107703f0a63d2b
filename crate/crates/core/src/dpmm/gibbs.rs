use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{sample_log_weights, DpmmModel, DpmmState, SamplerSettings};
use crate::measure::Point;

/// One full Gibbs scan: every assignment is resampled with `m` auxiliary
/// parameters standing in for the new-cluster option, then every cluster
/// location gets random-walk Metropolis updates.
pub fn gibbs_scan<R: Rng + ?Sized>(state: &mut DpmmState, model: &DpmmModel, settings: &SamplerSettings, rng: &mut R) {
    update_assignments(state, model, settings.aux_params, rng);
    update_locations(state, model, settings, rng);
}

pub(crate) fn update_assignments<R: Rng + ?Sized>(state: &mut DpmmState, model: &DpmmModel, m: usize, rng: &mut R) {
    let log_aux_weight = (model.alpha / m as f64).ln();
    let mut aux: Vec<Point> = Vec::with_capacity(m);
    let mut logw: Vec<f64> = Vec::new();
    for i in 0..model.n() {
        let old = state.assignments[i];
        state.sizes[old] -= 1;
        aux.clear();
        if state.sizes[old] == 0 {
            // A singleton's own location becomes the first auxiliary value.
            aux.push(state.cluster_params[old].clone());
            state.remove_cluster(old);
        }
        while aux.len() < m {
            aux.push(model.base.sample_uniform(rng));
        }

        let k = state.num_clusters();
        logw.clear();
        for c in 0..k {
            logw.push((state.sizes[c] as f64).ln() + model.log_lik(i, state.cluster_params[c].coords()));
        }
        for a in &aux {
            logw.push(log_aux_weight + model.log_lik(i, a.coords()));
        }
        let pick = sample_log_weights(&logw, rng);
        let label = if pick < k { pick } else { state.add_cluster(aux[pick - k].clone()) };
        state.assignments[i] = label;
        state.sizes[label] += 1;
    }
}

pub(crate) fn update_locations<R: Rng + ?Sized>(
    state: &mut DpmmState,
    model: &DpmmModel,
    settings: &SamplerSettings,
    rng: &mut R,
) {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); state.num_clusters()];
    for (i, &z) in state.assignments.iter().enumerate() {
        members[z].push(i);
    }
    for (c, mem) in members.iter().enumerate() {
        let mut current = state.cluster_params[c].coords().to_vec();
        let mut current_ll = model.cluster_log_lik(mem, &current);
        for _ in 0..settings.location_updates {
            let mut proposal: Vec<f64> = current
                .iter()
                .map(|x| {
                    let z: f64 = StandardNormal.sample(rng);
                    x + settings.proposal_sd * z
                })
                .collect();
            // Reflection keeps the proposal symmetric on the box.
            model.base.reflect(&mut proposal);
            let ll = model.cluster_log_lik(mem, &proposal);
            if rng.random::<f64>().ln() < ll - current_ll {
                current = proposal;
                current_ll = ll;
            }
        }
        state.cluster_params[c] = Point::from_vec_unchecked(current);
    }
}
