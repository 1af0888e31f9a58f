use std::fmt;

/// Process exit codes.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// An error tagged with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_USAGE, error: error.into() }
    }

    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_INPUT, error: error.into() }
    }

    pub fn numerical(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_NUMERICAL, error: error.into() }
    }

    pub fn context(self, message: impl fmt::Display + Send + Sync + 'static) -> Self {
        Self { code: self.code, error: self.error.context(message) }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<lio::Error> for Failure {
    fn from(e: lio::Error) -> Self {
        use lio::Error::*;
        let code = match e {
            InvalidLoss(_) | InvalidTransmission(_) | InvalidAngle(_) | InvalidStep(_) | InvalidConfig(_)
            | NoPhotons(_) | InvalidSplit { .. } | TooFewPoints(_) | OracleLimit { .. } => EXIT_USAGE,
            WrongLength { .. } | ZeroState | NotNormalized { .. } | PhotonNumberMismatch(..) | DimensionMismatch { .. }
            | StateFile(_) => EXIT_INPUT,
            BinomialOverflow { .. } | NotUnitary(_) | IllConditioned { .. } | NonPositive(..) => EXIT_NUMERICAL,
        };
        Self { code, error: e.into() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::input(e)
    }
}

pub type Outcome<T = ()> = std::result::Result<T, Failure>;
