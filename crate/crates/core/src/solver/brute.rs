//! Exhaustive enumeration over every (assignment, splitter homing, CO set)
//! point, checking every model row. Slow and independent of the search.

use rust_decimal::Decimal;

use crate::error::SolveError;
use crate::ilp::{IlpModel, Sense, VarKind};

struct Row {
    terms: Vec<(usize, i128)>,
    sense: Sense,
    rhs: i128,
}

impl Row {
    fn holds(&self, values: &[bool]) -> bool {
        let lhs: i128 = self.terms.iter().filter(|(v, _)| values[*v]).map(|(_, c)| *c).sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

fn scaled(d: Decimal, scale: u32) -> Option<i128> {
    let d = d.normalize();
    d.mantissa().checked_mul(10i128.checked_pow(scale.checked_sub(d.scale())?)?)
}

pub(crate) fn estimate(model: &IlpModel) -> f64 {
    let l = model.layout;
    (l.splitters as f64).powi(l.rus as i32) * ((l.cos + 1) as f64).powi(l.splitters as i32) * 2f64.powi(l.cos as i32)
}

/// Best point as a variable vector with its objective, or `None` if no
/// point satisfies every row. Also returns the number of points checked.
pub(crate) fn enumerate(model: &IlpModel) -> Result<(Option<(Vec<bool>, Decimal)>, u64), SolveError> {
    let layout = model.layout;
    let (m, n, p) = (layout.cos, layout.splitters, layout.rus);
    let stage_of = |v: usize| match model.variables[v].kind {
        VarKind::Distribution | VarKind::RuDeployed => 0,
        VarKind::Feeder | VarKind::SplitterOpen => 1,
        VarKind::CoOpen => 2,
    };
    let mut stages: [Vec<Row>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for row in &model.constraints {
        let scale = row
            .terms
            .iter()
            .map(|(_, c)| c.normalize().scale())
            .chain([row.rhs.normalize().scale()])
            .max()
            .unwrap_or(0);
        let overflow = || SolveError::Unsupported(format!("row {} coefficients out of range", row.name));
        let terms = row
            .terms
            .iter()
            .map(|(v, c)| Ok((*v as usize, scaled(*c, scale).ok_or_else(overflow)?)))
            .collect::<Result<Vec<_>, SolveError>>()?;
        let stage = terms.iter().map(|(v, _)| stage_of(*v)).max().unwrap_or(0);
        stages[stage].push(Row {
            terms,
            sense: row.sense,
            rhs: scaled(row.rhs, scale).ok_or_else(overflow)?,
        });
    }

    let mut values = vec![false; layout.n_variables()];
    for r in 0..p {
        values[layout.ru_deployed(r)] = true;
    }
    let mut best: Option<(Vec<bool>, Decimal)> = None;
    let mut checked: u64 = 0;
    let mut assign = vec![0usize; p];
    if n == 0 && p > 0 {
        return Ok((None, 0));
    }
    loop {
        for j in 0..n {
            for r in 0..p {
                values[layout.distribution(j, r)] = assign[r] == j;
            }
        }
        if stages[0].iter().all(|row| row.holds(&values)) {
            // Per splitter: 0 = closed, k = fed from CO k - 1.
            let mut homing = vec![0usize; n];
            loop {
                for j in 0..n {
                    values[layout.splitter_open(j)] = homing[j] > 0;
                    for i in 0..m {
                        values[layout.feeder(i, j)] = homing[j] == i + 1;
                    }
                }
                if stages[1].iter().all(|row| row.holds(&values)) {
                    for mask in 0u64..(1u64 << m) {
                        for i in 0..m {
                            values[layout.co_open(i)] = mask & (1 << i) != 0;
                        }
                        checked += 1;
                        if stages[2].iter().all(|row| row.holds(&values)) {
                            let obj = model.objective_value(&values);
                            if best.as_ref().is_none_or(|(_, b)| obj < *b) {
                                best = Some((values.clone(), obj));
                            }
                        }
                    }
                } else {
                    checked += 1u64 << m;
                }
                if !odometer(&mut homing, m + 1) {
                    break;
                }
            }
        }
        if !odometer(&mut assign, n.max(1)) {
            break;
        }
    }
    Ok((best, checked))
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
