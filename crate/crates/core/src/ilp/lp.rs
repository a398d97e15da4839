//! CPLEX-style LP text export.

use std::fmt::Write as _;
use std::io::Write;

use rust_decimal::Decimal;

use super::IlpModel;
use crate::error::ModelError;

const TERMS_PER_LINE: usize = 6;

fn number(d: Decimal) -> String {
    d.normalize().to_string()
}

fn write_terms(out: &mut String, model: &IlpModel, terms: impl Iterator<Item = (usize, Decimal)>) {
    let mut first = true;
    for (k, (var, coef)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = model.variable_name(var);
        if coef < Decimal::ZERO {
            let _ = write!(out, " - {} {name}", number(-coef));
        } else if first {
            let _ = write!(out, " {} {name}", number(coef));
        } else {
            let _ = write!(out, " + {} {name}", number(coef));
        }
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
}

/// Renders the model as LP text: objective, named rows, binaries.
pub fn lp_string(model: &IlpModel) -> Result<String, ModelError> {
    if model.variables.is_empty() {
        return Err(ModelError::NoVariables);
    }
    let mut out = String::new();
    let _ = writeln!(out, "\\ fronthaul TCO model {}", model.meta.fingerprint);
    let _ = writeln!(
        out,
        "\\ {} variables, {} constraints, ratio {}, horizon {} years",
        model.variables.len(),
        model.constraints.len(),
        model.meta.split_ratio,
        model.meta.params.horizon_years
    );
    out.push_str("Minimize\n obj:");
    write_terms(
        &mut out,
        model,
        model
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, *c)),
    );
    if !model.objective_constant.is_zero() {
        let _ = write!(out, " + {}", number(model.objective_constant));
    }
    out.push_str("\nSubject To\n");
    for row in &model.constraints {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, model, row.terms.iter().map(|(v, c)| (*v as usize, *c)));
        let _ = writeln!(out, " {} {}", row.sense.symbol(), number(row.rhs));
    }
    out.push_str("Binaries\n");
    for chunk in (0..model.variables.len()).collect::<Vec<_>>().chunks(TERMS_PER_LINE * 2) {
        let names: Vec<_> = chunk.iter().map(|&k| model.variable_name(k)).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("End\n");
    Ok(out)
}

pub fn export_lp<W: Write>(model: &IlpModel, sink: &mut W) -> Result<(), ModelError> {
    let text = lp_string(model)?;
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}
