use chrono::{DateTime, SecondsFormat, Utc};

/// Source of timestamps for transcripts and dataset references. A fixed clock
/// makes transcripts and answers reproducible byte for byte.
#[derive(Debug, Clone, Default)]
pub enum Clock {
    #[default]
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    pub fn now(&self) -> DateTime<Utc> {
        match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        }
    }

    pub fn now_rfc3339(&self) -> String {
        self.now().to_rfc3339_opts(SecondsFormat::Secs, true)
    }

    pub fn fixed_from_str(s: &str) -> Result<Self, chrono::ParseError> {
        Ok(Clock::Fixed(DateTime::parse_from_rfc3339(s)?.with_timezone(&Utc)))
    }
}
