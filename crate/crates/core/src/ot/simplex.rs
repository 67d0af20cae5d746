//! Primal network simplex on the complete bipartite transportation graph.
//!
//! The spanning-tree bookkeeping (parent, thread, successor counts) follows the
//! classic LEMON layout. Entering arcs are chosen by block search, leaving arcs
//! by the strongly-feasible rule, which keeps degenerate pivots from cycling.

use ndarray::Array2;

const NONE: usize = usize::MAX;
const EPSILON: f64 = 2.220446049250313e-15;

const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;

const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;

/// Sparse optimal flow in the original row/column numbering.
#[derive(Debug, Clone)]
pub(crate) struct Flow {
    pub entries: Vec<(usize, usize, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

struct Solver {
    arc_num: usize,
    search_arc_num: usize,
    source: Vec<u32>,
    target: Vec<u32>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    state: Vec<i8>,
    pi: Vec<f64>,

    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,

    block_size: usize,
    next_arc: usize,
}

/// Solves `min <P, C>` over couplings of `a` and `b`. Zero-mass rows and
/// columns are dropped before solving and receive no flow.
pub(crate) fn transport(a: &[f64], b: &[f64], cost: &Array2<f64>, max_iter: usize) -> Flow {
    let rows: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
    let cols: Vec<usize> = (0..b.len()).filter(|&j| b[j] > 0.0).collect();
    let (n1, n2) = (rows.len(), cols.len());

    if n1 == 1 || n2 == 1 {
        let mut entries = Vec::with_capacity(n1.max(n2));
        for &i in &rows {
            for &j in &cols {
                entries.push((i, j, if n1 == 1 { b[j] } else { a[i] }));
            }
        }
        return Flow { entries, iterations: 0, converged: true };
    }

    let supply: Vec<f64> = rows.iter().map(|&i| a[i]).chain(cols.iter().map(|&j| -b[j])).collect();
    let mut arc_cost = Vec::with_capacity(n1 * n2);
    for &i in &rows {
        for &j in &cols {
            arc_cost.push(cost[[i, j]]);
        }
    }
    let mut s = Solver::new(n1, n2, arc_cost, &supply);
    let (iterations, converged) = s.run(max_iter);

    let mut entries = Vec::new();
    for e in 0..s.arc_num {
        if s.flow[e] > 0.0 {
            let i = s.source[e] as usize;
            let j = s.target[e] as usize - n1;
            entries.push((rows[i], cols[j], s.flow[e]));
        }
    }
    Flow { entries, iterations, converged }
}

impl Solver {
    fn new(n1: usize, n2: usize, arc_cost: Vec<f64>, supply: &[f64]) -> Self {
        let node_num = n1 + n2;
        let arc_num = n1 * n2;
        let all_arc_num = arc_num + node_num;
        let all_node_num = node_num + 1;

        let mut source = Vec::with_capacity(all_arc_num);
        let mut target = Vec::with_capacity(all_arc_num);
        for i in 0..n1 {
            for j in 0..n2 {
                source.push(i as u32);
                target.push((n1 + j) as u32);
            }
        }
        source.resize(all_arc_num, 0);
        target.resize(all_arc_num, 0);

        let max_cost = arc_cost.iter().copied().fold(0.0, f64::max);
        let art_cost = (max_cost + 1.0) * node_num as f64;
        let mut cost = arc_cost;
        cost.resize(all_arc_num, 0.0);

        let root = node_num;
        let mut s = Solver {
            arc_num,
            search_arc_num: arc_num,
            source,
            target,
            cost,
            flow: vec![0.0; all_arc_num],
            state: vec![STATE_LOWER; all_arc_num],
            pi: vec![0.0; all_node_num],
            parent: vec![root; all_node_num],
            pred: vec![0; all_node_num],
            thread: vec![0; all_node_num],
            rev_thread: vec![0; all_node_num],
            succ_num: vec![1; all_node_num],
            last_succ: vec![0; all_node_num],
            pred_dir: vec![DIR_UP; all_node_num],
            dirty_revs: Vec::new(),
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
            block_size: ((arc_num as f64).sqrt() as usize).max(10),
            next_arc: 0,
        };

        s.parent[root] = NONE;
        s.pred[root] = NONE;
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = node_num - 1;

        let mut e = arc_num;
        for u in 0..node_num {
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.last_succ[u] = u;
            s.state[e] = STATE_TREE;
            if supply[u] >= 0.0 {
                s.pred_dir[u] = DIR_UP;
                s.source[e] = u as u32;
                s.target[e] = root as u32;
                s.flow[e] = supply[u];
                s.cost[e] = 0.0;
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = art_cost;
                s.source[e] = root as u32;
                s.target[e] = u as u32;
                s.flow[e] = -supply[u];
                s.cost[e] = art_cost;
            }
            e += 1;
        }
        s
    }

    fn run(&mut self, max_iter: usize) -> (usize, bool) {
        let mut iterations = 0;
        while self.find_entering_arc() {
            if iterations == max_iter {
                return (iterations, false);
            }
            iterations += 1;
            self.find_join_node();
            let change = self.find_leaving_arc();
            self.change_flow(change);
            if change {
                self.update_tree_structure();
                self.update_potential();
            }
        }
        (iterations, true)
    }

    #[inline]
    fn reduced_cost(&self, e: usize) -> f64 {
        f64::from(self.state[e])
            * (self.cost[e] + self.pi[self.source[e] as usize] - self.pi[self.target[e] as usize])
    }

    fn is_improving(&self, min: f64) -> bool {
        let e = self.in_arc;
        let scale = self.pi[self.source[e] as usize]
            .abs()
            .max(self.pi[self.target[e] as usize].abs())
            .max(self.cost[e].abs());
        min < -EPSILON * scale
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min = 0.0;
        let mut count = self.block_size;
        let order = (self.next_arc..self.search_arc_num).chain(0..self.next_arc);
        for e in order {
            let c = self.reduced_cost(e);
            if c < min {
                min = c;
                self.in_arc = e;
            }
            count -= 1;
            if count == 0 {
                if min < 0.0 && self.is_improving(min) {
                    self.next_arc = e + 1;
                    if self.next_arc == self.search_arc_num {
                        self.next_arc = 0;
                    }
                    return true;
                }
                count = self.block_size;
            }
        }
        min < 0.0 && self.is_improving(min)
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc] as usize;
        let mut v = self.target[self.in_arc] as usize;
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let (first, second) = if self.state[self.in_arc] == STATE_LOWER {
            (self.source[self.in_arc] as usize, self.target[self.in_arc] as usize)
        } else {
            (self.target[self.in_arc] as usize, self.source[self.in_arc] as usize)
        };
        self.delta = f64::INFINITY;
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            if self.pred_dir[u] == DIR_UP {
                let d = self.flow[self.pred[u]];
                if d < self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            if self.pred_dir[u] == DIR_DOWN {
                let d = self.flow[self.pred[u]];
                if d <= self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 2;
                }
            }
            u = self.parent[u];
        }

        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self, change: bool) {
        if self.delta > 0.0 {
            let val = f64::from(self.state[self.in_arc]) * self.delta;
            self.flow[self.in_arc] += val;
            let mut u = self.source[self.in_arc] as usize;
            while u != self.join {
                self.flow[self.pred[u]] -= f64::from(self.pred_dir[u]) * val;
                u = self.parent[u];
            }
            let mut u = self.target[self.in_arc] as usize;
            while u != self.join {
                self.flow[self.pred[u]] += f64::from(self.pred_dir[u]) * val;
                u = self.parent[u];
            }
        }
        if change {
            self.state[self.in_arc] = STATE_TREE;
            let out = self.pred[self.u_out];
            self.flow[out] = 0.0;
            self.state[out] = STATE_LOWER;
        }
    }

    fn update_tree_structure(&mut self) {
        let old_rev_thread = self.rev_thread[self.u_out];
        let old_succ_num = self.succ_num[self.u_out];
        let old_last_succ = self.last_succ[self.u_out];
        let v_out = self.parent[self.u_out];
        let (u_in, v_in, u_out) = (self.u_in, self.v_in, self.u_out);

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = self.in_arc;
            self.pred_dir[u_in] = if u_in == self.source[self.in_arc] as usize { DIR_UP } else { DIR_DOWN };

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                self.rev_thread[self.thread[u]] = u;
            }

            let mut tmp_sc = 0;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc += self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = self.in_arc;
            self.pred_dir[u_in] = if u_in == self.source[self.in_arc] as usize { DIR_UP } else { DIR_DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[self.join] == v_in { self.join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if self.join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != self.join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != self.join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let sigma = self.pi[self.v_in] - self.pi[self.u_in] - f64::from(self.pred_dir[self.u_in]) * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }
}
