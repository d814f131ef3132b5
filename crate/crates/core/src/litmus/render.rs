use std::fmt;

use super::{C11Op, IsaOp, Level, LitmusOp, LitmusTest};

impl fmt::Display for C11Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            C11Op::Load { reg, loc, order } => write!(f, "{reg} = load({loc}, {order})"),
            C11Op::Store { loc, value, order } => write!(f, "store({loc}, {value}, {order})"),
        }
    }
}

impl fmt::Display for IsaOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsaOp::Ld { reg, loc } => write!(f, "{reg} = ld {loc}"),
            IsaOp::St { loc, value } => write!(f, "st {loc} = {value}"),
            IsaOp::Fence(k) => write!(f, "{k}"),
        }
    }
}

/// Canonical text form; one operation per line. Parsing the output yields a
/// structurally equal test.
impl<O: LitmusOp + fmt::Display> fmt::Display for LitmusTest<O> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (O::LEVEL, self.arch) {
            (Level::Isa, Some(arch)) => writeln!(f, "isa test {} arch {arch}", self.name)?,
            _ => writeln!(f, "c11 test {}", self.name)?,
        }
        if !self.init.is_empty() {
            f.write_str("init")?;
            for (loc, v) in &self.init {
                write!(f, " {loc}={v}")?;
            }
            writeln!(f)?;
        }
        for t in &self.threads {
            writeln!(f, "thread {} {{", t.id)?;
            for op in &t.ops {
                writeln!(f, "  {op}")?;
            }
            writeln!(f, "}}")?;
        }
        match self.expectation {
            Some(e) => writeln!(f, "{e} {}", self.outcome)?,
            None => writeln!(f, "outcome {}", self.outcome)?,
        }
        for (model, e) in &self.expect {
            writeln!(f, "expect {model} {e}")?;
        }
        Ok(())
    }
}
