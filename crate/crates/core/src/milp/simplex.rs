//! Bounded dual simplex on a dense tableau, used as a relaxation check inside the
//! exact solver. Results are advisory: every infeasibility it reports is turned
//! into an integer certificate and re-checked exactly by the caller.

const EPS: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

/// `sum(a_ij * z_j) >= b_i` over structural variables with bounds inside `[0, 1]`.
pub(crate) struct DualSimplex {
    m: usize,
    n: usize,
    w: usize,
    /// Tableau `B^-1 [A | -I]`, row-major `m x w`.
    tab: Vec<f64>,
    beta: Vec<f64>,
    /// Reduced costs.
    d: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<usize>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    xb: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    pub pivots: u64,
    since_reset: u64,
}

pub(crate) enum LpOutcome {
    Feasible,
    /// Multipliers `y` (one per row) from the row that cannot be repaired.
    Infeasible(Vec<f64>),
    Unknown,
}

const NONBASIC: usize = usize::MAX;

impl DualSimplex {
    pub fn new(n: usize, rows: Vec<Vec<(usize, f64)>>, b: Vec<f64>, cost: Vec<f64>) -> Self {
        let m = rows.len();
        let w = n + m;
        let mut lp = DualSimplex {
            m,
            n,
            w,
            tab: vec![0.0; m * w],
            beta: vec![0.0; m],
            d: vec![0.0; w],
            basis: vec![0; m],
            basic_row: vec![NONBASIC; w],
            lb: vec![0.0; w],
            ub: vec![f64::INFINITY; w],
            x: vec![0.0; w],
            xb: vec![0.0; m],
            rows,
            b,
            cost,
            pivots: 0,
            since_reset: 0,
        };
        for j in 0..n {
            lp.ub[j] = 1.0;
        }
        lp.reset();
        lp
    }

    pub fn size(&self) -> (usize, usize) {
        (self.m, self.w)
    }

    /// Slack basis: `s_i - a_i z = -b_i`.
    fn reset(&mut self) {
        let (m, n, w) = (self.m, self.n, self.w);
        self.tab.iter_mut().for_each(|t| *t = 0.0);
        for i in 0..m {
            for &(j, a) in &self.rows[i] {
                self.tab[i * w + j] -= a;
            }
            self.tab[i * w + n + i] = 1.0;
            self.beta[i] = -self.b[i];
            self.basis[i] = n + i;
        }
        self.basic_row.iter_mut().for_each(|r| *r = NONBASIC);
        for i in 0..m {
            self.basic_row[n + i] = i;
        }
        self.d.iter_mut().for_each(|d| *d = 0.0);
        self.d[..n].copy_from_slice(&self.cost);
        for j in 0..w {
            if self.basic_row[j] == NONBASIC {
                self.place(j);
            }
        }
        self.since_reset = 0;
    }

    /// Puts a nonbasic variable on the bound its reduced cost prefers.
    fn place(&mut self, j: usize) {
        self.x[j] = if self.lb[j] == self.ub[j] || self.d[j] >= 0.0 || self.ub[j].is_infinite() { self.lb[j] } else { self.ub[j] };
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        if self.lb[j] == lo && self.ub[j] == hi {
            return;
        }
        self.lb[j] = lo;
        self.ub[j] = hi;
        if self.basic_row[j] == NONBASIC {
            self.place(j);
        }
    }

    pub fn set_rhs(&mut self, i: usize, b: f64) {
        let delta = b - self.b[i];
        if delta == 0.0 {
            return;
        }
        self.b[i] = b;
        // B^-1 e_i is minus the tableau column of slack i.
        let w = self.w;
        let col = self.n + i;
        for k in 0..self.m {
            self.beta[k] -= delta * self.tab[k * w + col];
        }
    }

    fn compute_xb(&mut self) {
        let w = self.w;
        for k in 0..self.m {
            let row = &self.tab[k * w..(k + 1) * w];
            let mut v = self.beta[k];
            for j in 0..w {
                if self.x[j] != 0.0 && self.basic_row[j] == NONBASIC {
                    v -= row[j] * self.x[j];
                }
            }
            self.xb[k] = v;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.w;
        let p = self.tab[r * w + q];
        {
            let row = &mut self.tab[r * w..(r + 1) * w];
            for t in row.iter_mut() {
                *t /= p;
            }
            row[q] = 1.0;
        }
        self.beta[r] /= p;
        let pivot_row: Vec<f64> = self.tab[r * w..(r + 1) * w].to_vec();
        let nz: Vec<usize> = (0..w).filter(|&j| pivot_row[j].abs() > 1e-12).collect();
        for k in 0..self.m {
            if k == r {
                continue;
            }
            let f = self.tab[k * w + q];
            if f.abs() <= 1e-12 {
                self.tab[k * w + q] = 0.0;
                continue;
            }
            let row = &mut self.tab[k * w..(k + 1) * w];
            for &j in &nz {
                row[j] -= f * pivot_row[j];
            }
            row[q] = 0.0;
            self.beta[k] -= f * self.beta[r];
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * pivot_row[j];
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.basic_row[leaving] = NONBASIC;
        self.basis[r] = q;
        self.basic_row[q] = r;
        self.pivots += 1;
        self.since_reset += 1;
    }

    pub fn solve(&mut self, max_iter: usize) -> LpOutcome {
        if self.since_reset > 20 * (self.m as u64 + 50) {
            self.reset();
        }
        let w = self.w;
        for _ in 0..max_iter {
            self.compute_xb();
            let mut r = NONBASIC;
            let mut worst = FEAS_TOL;
            for k in 0..self.m {
                let j = self.basis[k];
                let v = (self.lb[j] - self.xb[k]).max(self.xb[k] - self.ub[j]);
                if v > worst {
                    worst = v;
                    r = k;
                }
            }
            if r == NONBASIC {
                return LpOutcome::Feasible;
            }
            let leaving = self.basis[r];
            let up = self.xb[r] < self.lb[leaving];
            let row = &self.tab[r * w..(r + 1) * w];
            let mut best = NONBASIC;
            let mut best_ratio = f64::INFINITY;
            let mut best_abs = 0.0;
            for j in 0..w {
                if self.basic_row[j] != NONBASIC || self.lb[j] == self.ub[j] {
                    continue;
                }
                let t = row[j];
                if t.abs() <= EPS {
                    continue;
                }
                let at_lower = self.x[j] == self.lb[j];
                // The basic value moves by -t per unit increase of x_j.
                let helps = if at_lower { (t < 0.0) == up } else { (t > 0.0) == up };
                if !helps {
                    continue;
                }
                let ratio = self.d[j].abs() / t.abs();
                if ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && t.abs() > best_abs) {
                    best = j;
                    best_ratio = ratio;
                    best_abs = t.abs();
                }
            }
            if best == NONBASIC {
                let y: Vec<f64> = (0..self.m).map(|i| -row[self.n + i]).collect();
                return LpOutcome::Infeasible(y);
            }
            self.pivot(r, best);
            self.x[leaving] = if up { self.lb[leaving] } else { self.ub[leaving] };
        }
        LpOutcome::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_fractional_infeasibility_and_feasibility() {
        // x + y >= 1, -x - y >= -1 (x + y = 1), x - y >= 1 with y in [0,1], x in [0,1].
        let rows = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, -1.0), (1, -1.0)], vec![(0, 1.0), (1, -1.0)]];
        let mut lp = DualSimplex::new(2, rows, vec![1.0, -1.0, 1.0], vec![1.0, 1.0]);
        assert!(matches!(lp.solve(100), LpOutcome::Feasible));
        lp.set_bounds(0, 0.0, 0.0);
        match lp.solve(100) {
            LpOutcome::Infeasible(y) => assert!(y.iter().any(|v| v.abs() > 1e-9)),
            _ => panic!("x = 0 forces y >= 1 and y <= -1"),
        }
        lp.set_bounds(0, 0.0, 1.0);
        assert!(matches!(lp.solve(100), LpOutcome::Feasible));
    }
}
