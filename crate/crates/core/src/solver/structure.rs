//! Reads the assignment structure back out of a built model.
//!
//! Costs become integers in units of `10^-scale` dollars so bounds and
//! incumbents compare exactly. Capacities, DO limits and forbidden paths are
//! taken from the rows themselves, so a model with some families removed is
//! handled as the looser problem it describes.

use rust_decimal::Decimal;

use crate::error::SolveError;
use crate::ilp::{Family, IlpModel, LinearConstraint, Sense, VarKind};

/// Largest number of decimal places kept for integer cost units.
const MAX_SCALE: u32 = 18;

#[derive(Debug, Clone)]
pub(crate) struct Structure {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub scale: u32,
    /// `C_i` cost.
    pub co_cost: Vec<i128>,
    /// `S_j + x_ij` cost, `[j * m + i]`.
    pub option_cost: Vec<i128>,
    /// `x_jr` cost, `[j * p + r]`.
    pub link_cost: Vec<i128>,
    /// Objective constant plus every `R_r`.
    pub constant: Decimal,
    pub feeder_ok: Vec<bool>,
    /// RU/ONU ids servable by splitter `j` homed at CO `i`, `[j * m + i]`.
    pub admissible: Vec<Vec<u32>>,
    /// Splitter capacity in RU/ONUs.
    pub cap: Vec<u32>,
    /// Splitters a CO may feed.
    pub do_limit: Vec<u32>,
    /// A row that no point can satisfy.
    pub hopeless: Option<String>,
}

fn to_units(d: Decimal, scale: u32) -> Option<i128> {
    let d = d.normalize();
    let mantissa = d.mantissa();
    let shift = scale.checked_sub(d.scale())?;
    mantissa.checked_mul(10i128.checked_pow(shift)?)
}

fn floor_div(rhs: Decimal, w: Decimal) -> u32 {
    let q = (rhs / w).floor();
    if q < Decimal::ZERO {
        0
    } else {
        u32::try_from(q.mantissa() / 10i128.pow(q.scale())).unwrap_or(u32::MAX)
    }
}

impl Structure {
    pub fn option(&self, j: usize, i: usize) -> usize {
        j * self.m + i
    }

    pub fn to_decimal(&self, units: i128) -> Decimal {
        Decimal::from_i128_with_scale(units, self.scale)
    }

    pub fn extract(model: &IlpModel) -> Result<Structure, SolveError> {
        let layout = model.layout;
        let (m, n, p) = (layout.cos, layout.splitters, layout.rus);
        if model.objective.iter().any(|c| c.is_sign_negative() && !c.is_zero()) {
            return Err(SolveError::Unsupported("negative objective coefficient".into()));
        }
        let scale = model.objective.iter().map(|c| c.normalize().scale()).max().unwrap_or(0);
        if scale > MAX_SCALE {
            return Err(SolveError::Unsupported(format!("objective needs {scale} decimal places")));
        }
        let units = |d: Decimal| {
            to_units(d, scale).ok_or_else(|| SolveError::Unsupported("objective coefficient out of range".into()))
        };
        let mut co_cost = Vec::with_capacity(m);
        for i in 0..m {
            co_cost.push(units(model.objective[layout.co_open(i)])?);
        }
        let mut option_cost = vec![0; n * m];
        let mut link_cost = vec![0; n * p];
        for j in 0..n {
            let s = units(model.objective[layout.splitter_open(j)])?;
            for i in 0..m {
                option_cost[j * m + i] = s + units(model.objective[layout.feeder(i, j)])?;
            }
            for r in 0..p {
                link_cost[j * p + r] = units(model.objective[layout.distribution(j, r)])?;
            }
        }
        let constant = model.objective_constant
            + (0..p).map(|r| model.objective[layout.ru_deployed(r)]).sum::<Decimal>();

        for (family, expected) in [(Family::Eq13, p), (Family::Eq15, n * p), (Family::Eq17, n)] {
            if model.count_rows(family) != expected {
                return Err(SolveError::Unsupported(format!(
                    "expected {expected} {family} rows, found {}",
                    model.count_rows(family)
                )));
            }
        }

        let mut st = Structure {
            m,
            n,
            p,
            scale,
            co_cost,
            option_cost,
            link_cost,
            constant,
            feeder_ok: vec![true; m * n],
            admissible: Vec::new(),
            cap: vec![u32::try_from(p).unwrap_or(u32::MAX); n],
            do_limit: vec![u32::try_from(n).unwrap_or(u32::MAX); m],
            hopeless: None,
        };
        let mut dist_ok = vec![true; n * p];
        let mut triple_ok = vec![true; m * n * p];
        let mut co_tied = vec![false; m];

        for row in &model.constraints {
            match row.tag {
                Family::Eq14 | Family::Eq22 | Family::Eq23 => st.capacity_row(model, row)?,
                Family::Eq18 => {
                    let i = st.do_limit_row(model, row)?;
                    co_tied[i] = true;
                }
                Family::CoLink => {
                    for (v, _) in &row.terms {
                        let id = model.variables[*v as usize];
                        if id.kind == VarKind::CoOpen {
                            co_tied[id.a as usize] = true;
                        }
                    }
                }
                Family::Eq24 | Family::Eq25 | Family::Eq26 => {
                    st.path_row(model, row, &mut dist_ok, &mut triple_ok)?;
                }
                _ => {}
            }
        }
        if let Some(i) = co_tied.iter().position(|t| !t) {
            return Err(SolveError::Unsupported(format!("CO {i} is not tied to its feeders")));
        }

        st.admissible = (0..n * m)
            .map(|k| {
                let (j, i) = (k / m, k % m);
                if !st.feeder_ok[i * n + j] {
                    return Vec::new();
                }
                (0..p)
                    .filter(|&r| dist_ok[j * p + r] && triple_ok[(i * n + j) * p + r])
                    .map(|r| r as u32)
                    .collect()
            })
            .collect();
        Ok(st)
    }

    fn capacity_row(&mut self, model: &IlpModel, row: &LinearConstraint) -> Result<(), SolveError> {
        let unsupported = || SolveError::Unsupported(format!("row {} is not a splitter capacity row", row.name));
        if row.sense != Sense::Le {
            return Err(unsupported());
        }
        let mut splitter = None;
        let mut weight = None;
        for (v, c) in &row.terms {
            let id = model.variables[*v as usize];
            if id.kind != VarKind::Distribution || *splitter.get_or_insert(id.a) != id.a {
                return Err(unsupported());
            }
            if *weight.get_or_insert(*c) != *c {
                return Err(unsupported());
            }
        }
        if row.rhs < Decimal::ZERO {
            self.hopeless.get_or_insert_with(|| row.name.clone());
        }
        if let (Some(j), Some(w)) = (splitter, weight) {
            if w > Decimal::ZERO {
                let j = j as usize;
                self.cap[j] = self.cap[j].min(floor_div(row.rhs, w));
            } else if w < Decimal::ZERO {
                return Err(unsupported());
            }
        }
        Ok(())
    }

    fn do_limit_row(&mut self, model: &IlpModel, row: &LinearConstraint) -> Result<usize, SolveError> {
        let unsupported = || SolveError::Unsupported(format!("row {} is not a DO limit row", row.name));
        if row.sense != Sense::Le || !row.rhs.is_zero() {
            return Err(unsupported());
        }
        let mut co = None;
        let mut limit = None;
        for (v, c) in &row.terms {
            let id = model.variables[*v as usize];
            match id.kind {
                VarKind::Feeder if *c == Decimal::ONE => {
                    if *co.get_or_insert(id.a) != id.a {
                        return Err(unsupported());
                    }
                }
                VarKind::CoOpen if *c <= Decimal::ZERO => {
                    if *co.get_or_insert(id.a) != id.a {
                        return Err(unsupported());
                    }
                    limit = Some(floor_div(-*c, Decimal::ONE));
                }
                _ => return Err(unsupported()),
            }
        }
        let i = co.ok_or_else(unsupported)? as usize;
        self.do_limit[i] = self.do_limit[i].min(limit.unwrap_or(0));
        Ok(i)
    }

    /// Single-link rows forbid a link; two-link rows forbid a path.
    fn path_row(
        &mut self,
        model: &IlpModel,
        row: &LinearConstraint,
        dist_ok: &mut [bool],
        triple_ok: &mut [bool],
    ) -> Result<(), SolveError> {
        let unsupported = || SolveError::Unsupported(format!("row {} is not a path row", row.name));
        if row.sense != Sense::Le || row.terms.iter().any(|(_, c)| *c < Decimal::ZERO) {
            return Err(unsupported());
        }
        if row.rhs < Decimal::ZERO {
            self.hopeless.get_or_insert_with(|| row.name.clone());
        }
        let (n, p) = (self.n, self.p);
        let mut feeder = None;
        let mut dist = None;
        for (v, c) in &row.terms {
            let id = model.variables[*v as usize];
            match id.kind {
                VarKind::Feeder => {
                    if *c > row.rhs {
                        self.feeder_ok[id.a as usize * n + id.b as usize] = false;
                    }
                    feeder = Some((id.a as usize, id.b as usize, *c));
                }
                VarKind::Distribution => {
                    if *c > row.rhs {
                        dist_ok[id.a as usize * p + id.b as usize] = false;
                    }
                    dist = Some((id.a as usize, id.b as usize, *c));
                }
                _ => return Err(unsupported()),
            }
        }
        match (row.terms.len(), feeder, dist) {
            (1, _, _) | (0, _, _) => Ok(()),
            (2, Some((i, j, a)), Some((j2, r, b))) if j == j2 => {
                if a + b > row.rhs {
                    triple_ok[(i * n + j) * p + r] = false;
                }
                Ok(())
            }
            _ => Err(unsupported()),
        }
    }

    /// First RU/ONU without any usable (splitter, CO) pair.
    pub fn stranded_ru(&self) -> Option<usize> {
        let mut covered = vec![false; self.p];
        for j in 0..self.n {
            if self.cap[j] == 0 {
                continue;
            }
            for i in 0..self.m {
                if self.do_limit[i] == 0 {
                    continue;
                }
                for &r in &self.admissible[self.option(j, i)] {
                    covered[r as usize] = true;
                }
            }
        }
        covered.iter().position(|c| !c)
    }
}
