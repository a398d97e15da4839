//! Lower bounds on the cost of completing a partial plan.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::structure::Structure;
use crate::error::SolveError;
use crate::ilp::IlpModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum CoState {
    #[default]
    Free,
    Closed,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SplitterState {
    #[default]
    Free,
    Closed,
    /// Opened and fed from this CO.
    Open { co: usize },
}

/// Decisions fixed so far; `None`/`Free` entries are open.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PartialAssignment {
    /// Splitter of each RU/ONU.
    pub ru: Vec<Option<usize>>,
    pub splitters: Vec<SplitterState>,
    pub cos: Vec<CoState>,
}

impl PartialAssignment {
    pub fn empty(model: &IlpModel) -> Self {
        let l = model.layout;
        PartialAssignment {
            ru: vec![None; l.rus],
            splitters: vec![SplitterState::Free; l.splitters],
            cos: vec![CoState::Free; l.cos],
        }
    }

    fn check(&self, st: &Structure) -> Result<(), SolveError> {
        if self.ru.len() != st.p || self.splitters.len() != st.n || self.cos.len() != st.m {
            return Err(SolveError::Partial("dimensions differ from the model".into()));
        }
        for (j, s) in self.splitters.iter().enumerate() {
            if let SplitterState::Open { co } = s {
                if *co >= st.m || self.cos[*co] == CoState::Closed {
                    return Err(SolveError::Partial(format!("splitter {j} homed to a closed or unknown CO")));
                }
            }
        }
        for (r, a) in self.ru.iter().enumerate() {
            if let Some(j) = a {
                if *j >= st.n || self.splitters[*j] == SplitterState::Closed {
                    return Err(SolveError::Partial(format!("RU/ONU {r} assigned to a closed or unknown splitter")));
                }
            }
        }
        Ok(())
    }
}

/// Bound in cost units, or `None` when some RU/ONU has no usable chain left.
pub(crate) fn combinatorial(st: &Structure, partial: &PartialAssignment) -> Option<i128> {
    let (m, n, p) = (st.m, st.n, st.p);
    let kappa_max = st.cap.iter().copied().max().unwrap_or(0).max(1) as i128;
    let mut co_committed: Vec<bool> = partial.cos.iter().map(|c| *c == CoState::Open).collect();
    let mut total: i128 = 0;
    for (j, s) in partial.splitters.iter().enumerate() {
        if let SplitterState::Open { co } = *s {
            total += st.option_cost[st.option(j, co)];
            co_committed[co] = true;
        }
    }
    for i in 0..m {
        if co_committed[i] {
            total += st.co_cost[i];
        }
    }
    let co_share = |i: usize| {
        if co_committed[i] {
            0
        } else {
            st.co_cost[i] / (st.do_limit[i].max(1) as i128 * kappa_max)
        }
    };
    for r in 0..p {
        let mut best: Option<i128> = None;
        let splitters: Vec<usize> = match partial.ru[r] {
            Some(j) => vec![j],
            None => (0..n).collect(),
        };
        for j in splitters {
            if st.cap[j] == 0 {
                continue;
            }
            let (cos, split_share): (Vec<usize>, bool) = match partial.splitters[j] {
                SplitterState::Closed => continue,
                SplitterState::Open { co } => (vec![co], false),
                SplitterState::Free => (
                    (0..m).filter(|&i| partial.cos[i] != CoState::Closed && st.do_limit[i] > 0).collect(),
                    true,
                ),
            };
            for i in cos {
                if st.admissible[st.option(j, i)].binary_search(&(r as u32)).is_err() {
                    continue;
                }
                let mut c = st.link_cost[j * p + r] + co_share(i);
                if split_share {
                    c += st.option_cost[st.option(j, i)] / st.cap[j] as i128;
                }
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
        total += best?;
    }
    Some(total)
}

/// Admissible bound on every completion of `partial`: committed costs plus,
/// per RU/ONU, its cheapest chain with splitter and CO prices shared out over
/// the most RU/ONUs they could serve. `None` when some RU/ONU can no longer
/// be served.
pub fn lower_bound(model: &IlpModel, partial: &PartialAssignment) -> Result<Option<Decimal>, SolveError> {
    let st = Structure::extract(model)?;
    partial.check(&st)?;
    Ok(combinatorial(&st, partial).map(|u| st.to_decimal(u) + st.constant))
}

/// Lagrangian relaxation of the RU assignment rows (multipliers `lambda`)
/// and of the one-CO-per-splitter rows (multipliers `mu >= 0`). What is left
/// splits per CO: open it or not, then take at most `H` splitters, each with
/// its most profitable RU/ONUs up to capacity.
pub(crate) struct Lagrangian<'a> {
    st: &'a Structure,
    reduced: Vec<(i128, u32)>,
    pub chosen: Vec<Choice>,
    pub cover: Vec<i32>,
    pub used: Vec<i32>,
    /// Per CO: DP choice, parent state, forced and optional splitters.
    picks: Vec<Pick>,
}

type Pick = (Vec<usize>, Vec<usize>, Vec<(i128, usize, Vec<u32>)>, Vec<(i128, usize, Vec<u32>)>);

/// Relaxation value of a node that cannot be completed.
pub(crate) const NO_COVER: i128 = i128::MAX / 4;

#[derive(Debug, Clone)]
pub(crate) struct Choice {
    pub splitter: usize,
    pub co: usize,
    pub w: i128,
}

/// Node view handed to the relaxation.
pub(crate) struct NodeState<'a> {
    pub cos: &'a [CoState],
    pub splitters: &'a [SplitterState],
}

impl<'a> Lagrangian<'a> {
    pub fn new(st: &'a Structure) -> Self {
        Lagrangian {
            st,
            reduced: Vec::with_capacity(st.p),
            chosen: Vec::new(),
            cover: vec![0; st.p],
            used: vec![0; st.n],
            picks: Vec::new(),
        }
    }

    /// Initial multipliers: each RU/ONU's cheapest amortized chain.
    pub fn initial_lambda(&self) -> Vec<i128> {
        let st = self.st;
        let mut lambda = vec![0i128; st.p];
        for (r, l) in lambda.iter_mut().enumerate() {
            let mut best: Option<i128> = None;
            for j in 0..st.n {
                if st.cap[j] == 0 {
                    continue;
                }
                for i in 0..st.m {
                    if st.do_limit[i] == 0 || st.admissible[st.option(j, i)].binary_search(&(r as u32)).is_err() {
                        continue;
                    }
                    let kappa = st.cap[j] as i128;
                    let c = st.link_cost[j * st.p + r]
                        + st.option_cost[st.option(j, i)] / kappa
                        + st.co_cost[i] / (kappa * st.do_limit[i] as i128);
                    best = Some(best.map_or(c, |b| b.min(c)));
                }
            }
            *l = best.unwrap_or(0);
        }
        lambda
    }

    /// Fewest splitters that can serve every RU/ONU given the capacities of
    /// those not closed, or `None` if even all of them fall short.
    fn min_splitters(&self, node: &NodeState<'_>) -> Option<usize> {
        let st = self.st;
        let mut caps: Vec<u32> = (0..st.n)
            .filter(|&j| node.splitters[j] != SplitterState::Closed)
            .map(|j| st.cap[j])
            .collect();
        caps.sort_unstable_by(|a, b| b.cmp(a));
        let mut served = 0usize;
        for (k, c) in caps.iter().enumerate() {
            if served >= st.p {
                return Some(k);
            }
            served += *c as usize;
        }
        (served >= st.p).then_some(caps.len())
    }

    /// Value of the relaxation; fills `chosen`, `cover` and `used`. Besides
    /// the per-CO limits, the splitters taken must number at least
    /// [`Self::min_splitters`]. Returns [`NO_COVER`] when that is impossible.
    pub fn evaluate(&mut self, node: &NodeState<'_>, lambda: &[i128], mu: &[i128]) -> i128 {
        let st = self.st;
        let p = st.p;
        self.chosen.clear();
        self.cover.iter_mut().for_each(|c| *c = 0);
        self.used.iter_mut().for_each(|c| *c = 0);
        let Some(need) = self.min_splitters(node) else {
            return NO_COVER;
        };
        let mut value: i128 = lambda.iter().sum::<i128>() - mu.iter().sum::<i128>();
        // dp[c]: cheapest total over the COs seen so far with c splitters
        // taken, c saturating at `need`.
        let mut dp: Vec<Option<i128>> = vec![None; need + 1];
        dp[0] = Some(0);
        self.picks.clear();
        for i in 0..st.m {
            let mut options: Vec<(i128, usize, Vec<u32>)> = Vec::new();
            let mut forced: Vec<(i128, usize, Vec<u32>)> = Vec::new();
            if node.cos[i] != CoState::Closed && st.do_limit[i] > 0 {
                for j in 0..st.n {
                    let is_forced = match node.splitters[j] {
                        SplitterState::Free => false,
                        SplitterState::Open { co } if co == i => true,
                        _ => continue,
                    };
                    let k = st.option(j, i);
                    if st.cap[j] == 0 || (!is_forced && !st.feeder_ok[i * st.n + j]) {
                        continue;
                    }
                    self.reduced.clear();
                    for &r in &st.admissible[k] {
                        let d = st.link_cost[j * p + r as usize] - lambda[r as usize];
                        if d < 0 {
                            self.reduced.push((d, r));
                        }
                    }
                    let kappa = st.cap[j] as usize;
                    if self.reduced.len() > kappa {
                        self.reduced.select_nth_unstable(kappa - 1);
                        self.reduced.truncate(kappa);
                    }
                    let w = st.option_cost[k] + mu[j] + self.reduced.iter().map(|(d, _)| *d).sum::<i128>();
                    let rus: Vec<u32> = self.reduced.iter().map(|(_, r)| *r).collect();
                    if is_forced {
                        forced.push((w, j, rus));
                    } else {
                        options.push((w, j, rus));
                    }
                }
                options.sort_by_key(|(w, j, _)| (*w, *j));
                options.truncate((st.do_limit[i] as usize).saturating_sub(forced.len()));
            }
            // curve[k]: cost of this CO with k splitters, forced ones first.
            let must_open = node.cos[i] == CoState::Open || !forced.is_empty();
            let mut curve: Vec<Option<i128>> = vec![None; forced.len() + options.len() + 1];
            if !must_open {
                curve[0] = Some(0);
            }
            if node.cos[i] != CoState::Closed && st.do_limit[i] > 0 {
                let mut running = st.co_cost[i] + forced.iter().map(|(w, _, _)| *w).sum::<i128>();
                let f = forced.len();
                curve[f] = Some(curve[f].map_or(running, |c: i128| c.min(running)));
                for (k, (w, _, _)) in options.iter().enumerate() {
                    running += w;
                    curve[f + k + 1] = Some(running);
                }
            }
            let mut next: Vec<Option<i128>> = vec![None; need + 1];
            // Splitters taken here and the state it came from.
            let mut pick = vec![0usize; need + 1];
            let mut from = vec![0usize; need + 1];
            for (c, base) in dp.iter().enumerate() {
                let Some(base) = base else { continue };
                for (k, v) in curve.iter().enumerate() {
                    let Some(v) = v else { continue };
                    let to = (c + k).min(need);
                    let total = base + v;
                    if next[to].is_none_or(|b| total < b) {
                        next[to] = Some(total);
                        pick[to] = k;
                        from[to] = c;
                    }
                }
            }
            self.picks.push((pick, from, forced, options));
            dp = next;
        }
        let Some(best) = dp[need] else {
            return NO_COVER;
        };
        value += best;
        let mut state = need;
        for i in (0..st.m).rev() {
            let (pick, from, forced, options) = &mut self.picks[i];
            let k = pick[state];
            state = from[state];
            let open = k > 0 || node.cos[i] == CoState::Open || !forced.is_empty();
            if !open {
                continue;
            }
            let take = k.saturating_sub(forced.len());
            for (w, j, rus) in forced.drain(..).chain(options.drain(..take)) {
                for &r in &rus {
                    self.cover[r as usize] += 1;
                }
                self.used[j] += 1;
                self.chosen.push(Choice { splitter: j, co: i, w });
            }
        }
        value
    }

    /// Subgradient ascent from the given multipliers. Stops early once the
    /// bound reaches `cutoff`. Returns the best bound with its multipliers.
    pub fn ascend(
        &mut self,
        node: &NodeState<'_>,
        mut lambda: Vec<i128>,
        mut mu: Vec<i128>,
        iterations: usize,
        cutoff: Option<i128>,
    ) -> (i128, Vec<i128>, Vec<i128>) {
        let mut best = self.evaluate(node, &lambda, &mu);
        if best >= NO_COVER {
            return (best, lambda, mu);
        }
        let mut best_lambda = lambda.clone();
        let mut best_mu = mu.clone();
        let mut theta = 1.0f64;
        let mut stale = 0;
        let mut value = best;
        for _ in 0..iterations {
            if cutoff.is_some_and(|c| best >= c) {
                break;
            }
            let norm: i128 = self.cover.iter().map(|&c| ((1 - c) as i128).pow(2)).sum::<i128>()
                + self
                    .used
                    .iter()
                    .zip(&mu)
                    .map(|(&u, &m)| {
                        let g = (u - 1) as i128;
                        if m == 0 && g < 0 { 0 } else { g * g }
                    })
                    .sum::<i128>();
            if norm == 0 {
                break;
            }
            let target = match cutoff {
                Some(c) if c > value => c,
                _ => value + (value.abs() / 50).max(1),
            };
            let step = theta * (target - value) as f64 / norm as f64;
            let mut moved = false;
            for (r, l) in lambda.iter_mut().enumerate() {
                let delta = (step * (1 - self.cover[r]) as f64).round() as i128;
                if delta != 0 {
                    *l += delta;
                    moved = true;
                }
            }
            for (j, m) in mu.iter_mut().enumerate() {
                let delta = (step * (self.used[j] - 1) as f64).round() as i128;
                let next = (*m + delta).max(0);
                if next != *m {
                    *m = next;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            value = self.evaluate(node, &lambda, &mu);
            if value > best {
                best = value;
                best_lambda.clone_from(&lambda);
                best_mu.clone_from(&mu);
                stale = 0;
            } else {
                stale += 1;
                if stale >= 6 {
                    theta /= 2.0;
                    stale = 0;
                    if theta < 1e-3 {
                        break;
                    }
                }
            }
        }
        // Leave the solution of the best multipliers in place for branching.
        self.evaluate(node, &best_lambda, &best_mu);
        (best, best_lambda, best_mu)
    }
}
