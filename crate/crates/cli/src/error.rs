use grpdtopos::frac::FracError;
use grpdtopos::grpd::GroupoidError;
use grpdtopos::logic::LogicError;
use grpdtopos::sheaf::SheafError;
use grpdtopos::weq::WeqError;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Disagreement(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Disagreement(_) => 5,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input-error",
            CliError::Budget(_) => "budget-exceeded",
            CliError::Disagreement(_) => "disagreement",
        }
    }
}

/// A position inside an input document: file name and a JSON path.
#[derive(Debug, Clone)]
pub struct Loc {
    file: String,
    path: String,
}

impl Loc {
    pub fn file(file: &str) -> Self {
        Loc { file: file.to_string(), path: String::new() }
    }

    pub fn at(&self, key: &str) -> Self {
        Loc { file: self.file.clone(), path: format!("{}/{key}", self.path) }
    }

    pub fn idx(&self, i: usize) -> Self {
        self.at(&i.to_string())
    }

    pub fn err(&self, message: String) -> CliError {
        CliError::Input(format!("{self}: {message}"))
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.file)
        } else {
            write!(f, "{}#{}", self.file, self.path)
        }
    }
}

impl From<GroupoidError> for CliError {
    fn from(e: GroupoidError) -> Self {
        match e {
            GroupoidError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<SheafError> for CliError {
    fn from(e: SheafError) -> Self {
        match e {
            SheafError::CapExceeded { .. } => CliError::Budget(e.to_string()),
            SheafError::Groupoid(g) => g.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<WeqError> for CliError {
    fn from(e: WeqError) -> Self {
        match e {
            WeqError::Disagreement { .. } => CliError::Disagreement(e.to_string()),
            WeqError::Groupoid(g) => g.into(),
            WeqError::Sheaf(s) => s.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<LogicError> for CliError {
    fn from(e: LogicError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FracError> for CliError {
    fn from(e: FracError) -> Self {
        match e {
            FracError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            FracError::Weq(w) => w.into(),
            FracError::Groupoid(g) => g.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let d = WeqError::Disagreement { criterion: "quasi-homeo", subgroupoid: "id_a".into() };
        assert_eq!(CliError::from(d).exit_code(), 5);
        assert_eq!(CliError::from(FracError::Weq(WeqError::Groupoid(GroupoidError::BudgetExceeded { budget: 1 }))).exit_code(), 4);
        assert_eq!(CliError::from(SheafError::CapExceeded { cap: 3 }).exit_code(), 4);
        assert_eq!(CliError::from(FracError::BudgetExceeded { arrows: 9, budget: 3 }).exit_code(), 4);
        assert_eq!(CliError::from(LogicError::Unbound("x".into())).exit_code(), 3);
    }
}
