//! Minimal writer for the CPLEX LP text format (binary programs only).

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryProgram {
    pub sense: Sense,
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<Row>,
    pub binaries: Vec<String>,
}

fn push_terms(out: &mut String, terms: &[(f64, String)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, (coef, var)) in terms.iter().enumerate() {
        let (sign, mag) = if *coef < 0.0 { ("-", -coef) } else { ("+", *coef) };
        if i == 0 {
            if sign == "-" {
                out.push_str(" -");
            }
        } else {
            let _ = write!(out, " {sign}");
        }
        if mag == 1.0 {
            let _ = write!(out, " {var}");
        } else {
            let _ = write!(out, " {mag} {var}");
        }
    }
}

impl BinaryProgram {
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Maximize => "Maximize\n",
            Sense::Minimize => "Minimize\n",
        });
        out.push_str(" obj:");
        push_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            let _ = write!(out, " {}:", row.name);
            push_terms(&mut out, &row.terms);
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {rel} {}", row.rhs);
        }
        out.push_str("Binary\n");
        for chunk in self.binaries.chunks(10) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
        out.push_str("End\n");
        out
    }

    pub fn write_lp<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_lp_string().as_bytes())?;
        Ok(())
    }
}
