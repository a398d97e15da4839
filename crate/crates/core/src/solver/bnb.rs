//! Best-first branch and bound over CO and splitter decisions.
//!
//! COs are fixed first (open or closed), then splitters (closed, or open and
//! homed to one CO). Once every splitter is decided the RU/ONU assignment is
//! a transportation problem solved exactly by min-cost flow. Nodes are
//! bounded by the Lagrangian relaxation, warm-started from the parent's
//! multipliers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::bound::{combinatorial, CoState, Lagrangian, NodeState, PartialAssignment, SplitterState, NO_COVER};
use super::flow;
use super::structure::Structure;

const ROOT_ITERATIONS: usize = 400;
const NODE_ITERATIONS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Solution {
    pub cost: i128,
    /// (ru, splitter)
    pub assignment: Vec<(usize, usize)>,
    /// (splitter, co)
    pub homing: Vec<(usize, usize)>,
}

pub(crate) struct Limits {
    pub deadline: Instant,
    pub node_limit: u64,
    pub gap_tolerance: f64,
    pub workers: usize,
    pub seed: u64,
}

pub(crate) enum Stop {
    Exhausted,
    TimeLimit,
    NodeLimit,
}

pub(crate) struct Outcome {
    pub stop: Stop,
    pub incumbent: Option<Solution>,
    /// Global lower bound in cost units.
    pub bound: Option<i128>,
    pub nodes: u64,
    /// (seconds since start, cost units)
    pub trace: Vec<(f64, i128)>,
}

struct Node {
    bound: i128,
    depth: u32,
    seq: u64,
    cos: Vec<CoState>,
    splitters: Vec<SplitterState>,
    multipliers: Arc<(Vec<i128>, Vec<i128>)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: lowest bound, then deepest, then oldest first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Shared {
    heap: BinaryHeap<Node>,
    active: usize,
    seq: u64,
    nodes: u64,
    incumbent: Option<Solution>,
    trace: Vec<(f64, i128)>,
    stop: Option<Stop>,
    /// Smallest bound among nodes discarded only because of the gap tolerance.
    gap_pruned: Option<i128>,
}

struct Search<'a> {
    st: &'a Structure,
    limits: &'a Limits,
    start: Instant,
    /// Seeded tie-break ranks.
    co_rank: Vec<usize>,
    splitter_rank: Vec<usize>,
    shared: Mutex<Shared>,
    wake: Condvar,
}

fn ranks(len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(rng);
    let mut rank = vec![0; len];
    for (pos, &k) in order.iter().enumerate() {
        rank[k] = pos;
    }
    rank
}

impl Search<'_> {
    fn cutoff(&self, incumbent: Option<i128>) -> Option<i128> {
        incumbent.map(|ub| {
            let slack = (self.limits.gap_tolerance * ub.abs() as f64).floor() as i128;
            ub - slack
        })
    }

    fn incumbent_cost(&self) -> Option<i128> {
        self.shared.lock().expect("search state").incumbent.as_ref().map(|s| s.cost)
    }

    fn offer(&self, solution: Solution) {
        let mut sh = self.shared.lock().expect("search state");
        if sh.incumbent.as_ref().is_none_or(|inc| solution.cost < inc.cost) {
            sh.trace.push((self.start.elapsed().as_secs_f64(), solution.cost));
            sh.incumbent = Some(solution);
        }
    }

    /// Assigns RU/ONUs to the given homed splitters and prices the result,
    /// dropping splitters and COs that end up unused.
    fn complete(&self, open: &[(usize, usize)]) -> Option<Solution> {
        let st = self.st;
        let (_, slots) = flow::assign(st, open)?;
        let mut used = vec![false; open.len()];
        for &s in &slots {
            used[s] = true;
        }
        let mut co_used = vec![false; st.m];
        let mut cost: i128 = 0;
        let mut homing = Vec::new();
        for (s, &(j, i)) in open.iter().enumerate() {
            if used[s] {
                cost += st.option_cost[st.option(j, i)];
                co_used[i] = true;
                homing.push((j, i));
            }
        }
        cost += (0..st.m).filter(|&i| co_used[i]).map(|i| st.co_cost[i]).sum::<i128>();
        let mut assignment = Vec::with_capacity(st.p);
        for (r, &s) in slots.iter().enumerate() {
            let j = open[s].0;
            cost += st.link_cost[j * st.p + r];
            assignment.push((r, j));
        }
        homing.sort_unstable();
        Some(Solution {
            cost,
            assignment,
            homing,
        })
    }

    /// Closes splitters with no usable CO left. Returns false if some
    /// RU/ONU can no longer be served.
    fn propagate(&self, cos: &[CoState], splitters: &mut [SplitterState]) -> bool {
        let st = self.st;
        let mut covered = vec![false; st.p];
        for j in 0..st.n {
            match splitters[j] {
                SplitterState::Closed => {}
                SplitterState::Open { co } => {
                    for &r in &st.admissible[st.option(j, co)] {
                        covered[r as usize] = true;
                    }
                }
                SplitterState::Free => {
                    let mut any = false;
                    for i in 0..st.m {
                        if cos[i] == CoState::Closed || st.do_limit[i] == 0 || st.cap[j] == 0 {
                            continue;
                        }
                        let adm = &st.admissible[st.option(j, i)];
                        if adm.is_empty() {
                            continue;
                        }
                        any = true;
                        for &r in adm {
                            covered[r as usize] = true;
                        }
                    }
                    if !any {
                        splitters[j] = SplitterState::Closed;
                    }
                }
            }
        }
        covered.iter().all(|c| *c)
    }

    fn heuristic(&self, relax: &Lagrangian<'_>, cos: &[CoState], splitters: &[SplitterState]) -> Option<Solution> {
        let st = self.st;
        let mut pick: Vec<Option<(i128, usize)>> = vec![None; st.n];
        for (j, s) in splitters.iter().enumerate() {
            if let SplitterState::Open { co } = s {
                pick[j] = Some((i128::MIN, *co));
            }
        }
        for c in &relax.chosen {
            if pick[c.splitter].is_none_or(|(w, _)| c.w < w) {
                pick[c.splitter] = Some((c.w, c.co));
            }
        }
        let mut load = vec![0u32; st.m];
        let mut picked: Vec<(i128, usize, usize)> =
            pick.iter().enumerate().filter_map(|(j, p)| p.map(|(w, i)| (w, j, i))).collect();
        picked.sort_unstable();
        let mut open = Vec::new();
        let mut taken = vec![false; st.n];
        for (_, j, i) in picked {
            if load[i] < st.do_limit[i] {
                load[i] += 1;
                open.push((j, i));
                taken[j] = true;
            }
        }
        let mut covered = vec![false; st.p];
        for &(j, i) in &open {
            for &r in &st.admissible[st.option(j, i)] {
                covered[r as usize] = true;
            }
        }
        for r in 0..st.p {
            if covered[r] {
                continue;
            }
            let mut best: Option<(i128, usize, usize)> = None;
            for j in (0..st.n).filter(|&j| !taken[j] && splitters[j] == SplitterState::Free && st.cap[j] > 0) {
                for i in 0..st.m {
                    if cos[i] == CoState::Closed || load[i] >= st.do_limit[i] {
                        continue;
                    }
                    if st.admissible[st.option(j, i)].binary_search(&(r as u32)).is_err() {
                        continue;
                    }
                    let c = st.option_cost[st.option(j, i)] + st.link_cost[j * st.p + r];
                    if best.is_none_or(|b| (c, j, i) < b) {
                        best = Some((c, j, i));
                    }
                }
            }
            let (_, j, i) = best?;
            load[i] += 1;
            taken[j] = true;
            open.push((j, i));
            for &q in &st.admissible[st.option(j, i)] {
                covered[q as usize] = true;
            }
        }
        self.complete(&open)
    }

    /// Bounds one node and returns its children.
    fn process(&self, relax: &mut Lagrangian<'_>, node: Node) -> Vec<Node> {
        let st = self.st;
        let mut splitters = node.splitters.clone();
        let cos = node.cos.clone();
        if !self.propagate(&cos, &mut splitters) {
            return Vec::new();
        }
        if splitters.iter().all(|s| *s != SplitterState::Free) {
            let open: Vec<(usize, usize)> = splitters
                .iter()
                .enumerate()
                .filter_map(|(j, s)| match s {
                    SplitterState::Open { co } => Some((j, *co)),
                    _ => None,
                })
                .collect();
            if let Some(sol) = self.complete(&open) {
                self.offer(sol);
            }
            return Vec::new();
        }

        let view = NodeState {
            cos: &cos,
            splitters: &splitters,
        };
        let partial = PartialAssignment {
            ru: vec![None; st.p],
            splitters: splitters.clone(),
            cos: cos.clone(),
        };
        let Some(simple) = combinatorial(st, &partial) else {
            return Vec::new();
        };
        let iterations = if node.depth == 0 { ROOT_ITERATIONS } else { NODE_ITERATIONS };
        let cutoff = self.cutoff(self.incumbent_cost());
        let (lambda, mu) = (node.multipliers.0.clone(), node.multipliers.1.clone());
        let (value, lambda, mu) = relax.ascend(&view, lambda, mu, iterations, cutoff);
        if value >= NO_COVER {
            return Vec::new();
        }
        let bound = value.max(simple).max(node.bound);
        if let Some(sol) = self.heuristic(relax, &cos, &splitters) {
            self.offer(sol);
        }
        let incumbent = self.incumbent_cost();
        if let Some(c) = self.cutoff(incumbent) {
            if bound >= c {
                self.note_gap_prune(bound, incumbent);
                return Vec::new();
            }
        }
        let multipliers = Arc::new((lambda, mu));
        let child = |cos: Vec<CoState>, splitters: Vec<SplitterState>| Node {
            bound,
            depth: node.depth + 1,
            seq: 0,
            cos,
            splitters,
            multipliers: Arc::clone(&multipliers),
        };

        // CO decisions first.
        let mut co_total = vec![0i128; st.m];
        let mut co_open = vec![false; st.m];
        for c in &relax.chosen {
            co_open[c.co] = true;
            co_total[c.co] += c.w;
        }
        let free_cos: Vec<usize> = (0..st.m)
            .filter(|&i| cos[i] == CoState::Free && st.do_limit[i] > 0)
            .filter(|&i| splitters.iter().all(|s| *s != SplitterState::Open { co: i }))
            .collect();
        if let Some(&i) = free_cos.iter().min_by_key(|&&i| {
            let opened = co_open[i];
            (!opened, if opened { co_total[i] } else { 0 }, self.co_rank[i])
        }) {
            let mut open = cos.clone();
            open[i] = CoState::Open;
            let mut closed = cos;
            closed[i] = CoState::Closed;
            let (first, second) = if co_open[i] { (open, closed) } else { (closed, open) };
            return vec![child(first, splitters.clone()), child(second, splitters)];
        }
        // A CO left Free here has no possible use; treat it as closed.

        let mut best_w: Vec<Option<(i128, usize)>> = vec![None; st.n];
        let mut selected = vec![0u32; st.n];
        for c in &relax.chosen {
            if splitters[c.splitter] == SplitterState::Free {
                selected[c.splitter] += 1;
                if best_w[c.splitter].is_none_or(|(w, _)| c.w < w) {
                    best_w[c.splitter] = Some((c.w, c.co));
                }
            }
        }
        let mut load = vec![0u32; st.m];
        for s in &splitters {
            if let SplitterState::Open { co } = s {
                load[*co] += 1;
            }
        }
        let j = (0..st.n)
            .filter(|&j| splitters[j] == SplitterState::Free)
            .min_by_key(|&j| {
                let w = best_w[j].map(|(w, _)| w).unwrap_or(i128::MAX);
                (selected[j] < 2, selected[j] == 0, w, self.splitter_rank[j])
            })
            .expect("a free splitter remains");
        let mut homes: Vec<(i128, usize)> = (0..st.m)
            .filter(|&i| cos[i] == CoState::Open && load[i] < st.do_limit[i])
            .filter(|&i| st.feeder_ok[i * st.n + j] && !st.admissible[st.option(j, i)].is_empty())
            .map(|i| {
                let w = relax
                    .chosen
                    .iter()
                    .find(|c| c.splitter == j && c.co == i)
                    .map(|c| c.w)
                    .unwrap_or(i128::MAX);
                (w, i)
            })
            .collect();
        homes.sort_unstable_by_key(|&(w, i)| (w, self.co_rank[i]));
        let mut children: Vec<Node> = homes
            .into_iter()
            .map(|(_, i)| {
                let mut s = splitters.clone();
                s[j] = SplitterState::Open { co: i };
                child(cos.clone(), s)
            })
            .collect();
        let mut closed = splitters;
        closed[j] = SplitterState::Closed;
        let closed_child = child(cos, closed);
        if selected[j] == 0 {
            children.insert(0, closed_child);
        } else {
            children.push(closed_child);
        }
        children
    }

    fn note_gap_prune(&self, bound: i128, incumbent: Option<i128>) {
        if incumbent.is_some_and(|ub| bound < ub) {
            let mut sh = self.shared.lock().expect("search state");
            sh.gap_pruned = Some(sh.gap_pruned.map_or(bound, |g| g.min(bound)));
        }
    }

    fn worker(&self) {
        let mut relax = Lagrangian::new(self.st);
        loop {
            let node = {
                let mut sh = self.shared.lock().expect("search state");
                loop {
                    if sh.stop.is_some() {
                        return;
                    }
                    if let Some(node) = sh.heap.pop() {
                        let cutoff = self.cutoff(sh.incumbent.as_ref().map(|s| s.cost));
                        if cutoff.is_some_and(|c| node.bound >= c) {
                            let ub = sh.incumbent.as_ref().map(|s| s.cost);
                            if ub.is_some_and(|ub| node.bound < ub) {
                                sh.gap_pruned = Some(sh.gap_pruned.map_or(node.bound, |g| g.min(node.bound)));
                            }
                            continue;
                        }
                        if sh.nodes >= self.limits.node_limit {
                            sh.heap.push(node);
                            sh.stop = Some(Stop::NodeLimit);
                            self.wake.notify_all();
                            return;
                        }
                        if Instant::now() >= self.limits.deadline {
                            sh.heap.push(node);
                            sh.stop = Some(Stop::TimeLimit);
                            self.wake.notify_all();
                            return;
                        }
                        sh.nodes += 1;
                        sh.active += 1;
                        break node;
                    }
                    if sh.active == 0 {
                        sh.stop = Some(Stop::Exhausted);
                        self.wake.notify_all();
                        return;
                    }
                    sh = self.wake.wait(sh).expect("search state");
                }
            };
            let children = self.process(&mut relax, node);
            let mut sh = self.shared.lock().expect("search state");
            for mut c in children {
                c.seq = sh.seq;
                sh.seq += 1;
                sh.heap.push(c);
            }
            sh.active -= 1;
            self.wake.notify_all();
        }
    }
}

pub(crate) fn search(st: &Structure, limits: &Limits) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
    let co_rank = ranks(st.m, &mut rng);
    let splitter_rank = ranks(st.n, &mut rng);
    let relax = Lagrangian::new(st);
    let root = Node {
        bound: i128::MIN,
        depth: 0,
        seq: 0,
        cos: vec![CoState::Free; st.m],
        splitters: vec![SplitterState::Free; st.n],
        multipliers: Arc::new((relax.initial_lambda(), vec![0; st.n])),
    };
    let mut heap = BinaryHeap::new();
    heap.push(root);
    let search = Search {
        st,
        limits,
        start: Instant::now(),
        co_rank,
        splitter_rank,
        shared: Mutex::new(Shared {
            heap,
            active: 0,
            seq: 1,
            nodes: 0,
            incumbent: None,
            trace: Vec::new(),
            stop: None,
            gap_pruned: None,
        }),
        wake: Condvar::new(),
    };
    let workers = limits.workers.max(1);
    if workers == 1 {
        search.worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| search.worker());
            }
        });
    }
    let sh = search.shared.into_inner().expect("search state");
    let ub = sh.incumbent.as_ref().map(|s| s.cost);
    let open_min = sh.heap.iter().map(|n| n.bound).min();
    let bound = [ub, open_min, sh.gap_pruned].into_iter().flatten().min();
    Outcome {
        stop: sh.stop.unwrap_or(Stop::Exhausted),
        incumbent: sh.incumbent,
        bound,
        nodes: sh.nodes,
        trace: sh.trace,
    }
}
