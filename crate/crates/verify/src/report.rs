use std::fmt;

/// Outcome of one property suite: how many cases ran and which failed.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    /// The first few counterexamples, verbatim.
    pub examples: Vec<String>,
}

const KEPT: usize = 10;

impl SuiteReport {
    pub fn new(name: impl Into<String>) -> Self {
        SuiteReport {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn case(&mut self) {
        self.cases += 1;
    }

    pub fn fail(&mut self, what: impl Into<String>) {
        self.failures += 1;
        if self.examples.len() < KEPT {
            self.examples.push(what.into());
        }
    }

    /// Records `ok`, with `what` evaluated only on failure.
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.fail(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.cases += other.cases;
        self.failures += other.failures;
        for e in other.examples {
            if self.examples.len() < KEPT {
                self.examples.push(e);
            }
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} cases, {} failures",
            self.name, self.cases, self.failures
        )?;
        for e in &self.examples {
            write!(f, "\n  counterexample: {e}")?;
        }
        Ok(())
    }
}
