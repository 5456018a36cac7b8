use crate::scenario::ChannelRealization;

use super::EstimatedParams;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Assignment `perm[i]` = estimated path paired with true path `i`, minimizing
/// the total squared Doppler mismatch, ties broken by squared delay mismatch.
/// Exhaustive over all `L!` assignments.
pub fn match_paths(truth: &ChannelRealization, est: &EstimatedParams) -> Vec<usize> {
    let l = truth.paths.len().min(est.paths.len());
    let mut best: Option<((f64, f64), Vec<usize>)> = None;
    let mut perms = permutations(l);
    perms.sort();
    for perm in perms {
        let mut dop = 0.0;
        let mut del = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            dop += (truth.paths[i].doppler_hz - est.paths[j].doppler_hz).powi(2);
            del += (truth.paths[i].delay - est.paths[j].delay).powi(2);
        }
        let better = match &best {
            None => true,
            Some(((bd, bt), _)) => dop < *bd || (dop == *bd && del < *bt),
        };
        if better {
            best = Some(((dop, del), perm));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

/// Total squared Doppler mismatch of an assignment.
pub fn doppler_cost(truth: &ChannelRealization, est: &EstimatedParams, perm: &[usize]) -> f64 {
    perm.iter()
        .enumerate()
        .map(|(i, &j)| (truth.paths[i].doppler_hz - est.paths[j].doppler_hz).powi(2))
        .sum()
}
