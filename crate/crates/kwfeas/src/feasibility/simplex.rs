//! Dense phase-one simplex for linear feasibility: find x >= 0 with
//! A x = b. Floating point only; callers treat the answer as a hint
//! and re-verify exactly. Dantzig pricing with a Bland fallback once
//! the objective stalls, so cycling cannot hang the search.

/// Sparse column-major input: each column lists (row, value) pairs.
pub(crate) struct FeasibilityLp {
    pub nrows: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
}

pub(crate) struct LpSolution {
    /// Residual sum of the artificial variables; below
    /// [`residual_accept`] means the system looked feasible.
    pub residual: f64,
    /// Values of the structural variables.
    pub x: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StopReason {
    /// No structural column prices negative after a fresh recompute.
    Optimal,
    /// An improving column exists but every entry is below the pivot
    /// floor; the tableau is too ill-conditioned to continue.
    NoPivot,
    IterationCap,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Optimal => "optimal",
            StopReason::NoPivot => "pivot floor",
            StopReason::IterationCap => "iteration cap",
        })
    }
}

/// Residual bound under which a solve counts as feasible: a feasible
/// system can retain up to the summed perturbation offsets.
pub(crate) fn residual_accept(nrows: usize) -> f64 {
    1e-8 + PERT * (nrows * (nrows + 1)) as f64
}

const EPS: f64 = 1e-11;
const STALL_LIMIT: usize = 600;
/// Entries below this never pivot; tinier pivots blow up the tableau.
const PIVOT_MIN: f64 = 1e-9;
/// A pivot must also not be tiny relative to its column's largest
/// entry, or one division scales the row into the noise floor.
const PIVOT_REL: f64 = 1e-7;
/// Incremental objective-row updates drift; refresh this often.
const REFRESH_EVERY: usize = 128;
/// All-zero right-hand sides make every vertex degenerate and phase
/// one crawls a plateau of zero-length steps. Each row gets a distinct
/// tiny offset so steps have positive length; the residual of a
/// feasible system then lands near the summed offsets instead of zero,
/// and callers must treat the result as a hint at that scale.
const PERT: f64 = 1e-9;

/// Recompute reduced costs from the tableau: the phase-one objective
/// row is minus the sum of the rows whose basic variable is still
/// artificial. Clears the drift the incremental updates accumulate.
fn refresh_z(t: &[f64], basis: &[usize], n: usize, m: usize, width: usize, z: &mut [f64]) {
    z.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..m {
        if basis[i] >= n {
            for j in 0..width {
                z[j] -= t[i * width + j];
            }
        }
    }
    for j in n..n + m {
        z[j] = 0.0;
    }
}

pub(crate) fn solve_feasibility(lp: &FeasibilityLp, max_iters: usize) -> LpSolution {
    let m = lp.nrows;
    let n = lp.cols.len();
    debug_assert_eq!(lp.rhs.len(), m);
    let rhs: Vec<f64> = lp.rhs.iter().enumerate().map(|(i, &b)| b + PERT * (i + 1) as f64).collect();

    // equilibrate columns to max-entry near one with exact powers of
    // two; positive scaling keeps the support of solutions unchanged
    let scale: Vec<f64> = lp
        .cols
        .iter()
        .map(|col| {
            let max = col.iter().fold(0.0f64, |acc, &(_, v)| acc.max(v.abs()));
            if max > 0.0 { (1.0f64).max(max.log2().floor().exp2()).recip() } else { 1.0 }
        })
        .collect();

    // tableau: n structural + m artificial columns + rhs
    let width = n + m + 1;
    let mut t = vec![0.0f64; m * width];
    for (j, col) in lp.cols.iter().enumerate() {
        for &(i, v) in col {
            let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
            t[i * width + j] += sign * v * scale[j];
        }
    }
    for i in 0..m {
        t[i * width + n + i] = 1.0;
        t[i * width + n + m] = rhs[i].abs();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // reduced costs for min(sum of artificials) with artificial basis:
    // z_j = -sum_i t[i][j] for structural j, objective = -sum_i rhs_i
    let mut z = vec![0.0f64; width];
    for i in 0..m {
        for j in 0..width {
            z[j] -= t[i * width + j];
        }
    }
    for j in n..n + m {
        z[j] = 0.0;
    }

    let mut iterations = 0;
    let mut stall = 0usize;
    let mut best_obj = f64::INFINITY;
    let mut stop = StopReason::IterationCap;
    while iterations < max_iters {
        if iterations > 0 && iterations % REFRESH_EVERY == 0 {
            refresh_z(&t, &basis, n, m, width, &mut z);
        }
        let obj = -z[n + m];
        if obj <= EPS {
            stop = StopReason::Optimal;
            break;
        }
        if obj < best_obj - EPS {
            best_obj = obj;
            stall = 0;
        } else {
            stall += 1;
        }
        let bland = stall > STALL_LIMIT;

        // entering column: structural only, artificials never re-enter
        let pick = |z: &[f64]| {
            if bland {
                z.iter().take(n).position(|&zj| zj < -EPS)
            } else {
                let mut enter = None;
                let mut best = -EPS;
                for (j, &zj) in z.iter().enumerate().take(n) {
                    if zj < best {
                        best = zj;
                        enter = Some(j);
                    }
                }
                enter
            }
        };
        let enter = match pick(&z) {
            Some(e) => Some(e),
            None => {
                // never declare optimal off drifted costs
                refresh_z(&t, &basis, n, m, width, &mut z);
                pick(&z)
            }
        };
        let Some(e) = enter else {
            stop = StopReason::Optimal;
            break;
        };

        // ratio test; ties go to the bigger pivot entry for stability,
        // except under Bland where the index rule must stay strict
        let mut colmax = 0.0f64;
        for i in 0..m {
            colmax = colmax.max(t[i * width + e].abs());
        }
        let pivot_floor = PIVOT_MIN.max(PIVOT_REL * colmax);
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + e];
            if a > pivot_floor {
                let ratio = t[i * width + n + m] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        let tied = ratio < lr + EPS;
                        ratio < lr - EPS
                            || (tied && bland && basis[i] < basis[li])
                            || (tied && !bland && a > t[li * width + e])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((l, _)) = leave else {
            stop = StopReason::NoPivot;
            break;
        };

        // pivot on (l, e)
        let piv = t[l * width + e];
        for j in 0..width {
            t[l * width + j] /= piv;
        }
        for i in 0..m {
            if i == l {
                continue;
            }
            let f = t[i * width + e];
            if f != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= f * t[l * width + j];
                }
            }
        }
        let f = z[e];
        if f != 0.0 {
            for j in 0..width {
                z[j] -= f * t[l * width + j];
            }
        }
        basis[l] = e;
        iterations += 1;
    }

    let mut x = vec![0.0f64; n];
    let mut residual = 0.0f64;
    for i in 0..m {
        let v = t[i * width + n + m];
        if basis[i] < n {
            x[basis[i]] = v * scale[basis[i]];
        } else {
            residual += v.abs();
        }
    }
    LpSolution { residual, x, iterations, stop }
}
