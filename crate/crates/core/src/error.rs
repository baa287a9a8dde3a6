use std::fmt;

/// A numeric argument fell outside the domain of an operation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct DomainError {
    pub name: &'static str,
    pub value: f64,
    pub reason: &'static str,
}

impl DomainError {
    pub fn new(name: &'static str, value: f64, reason: &'static str) -> Self {
        Self { name, value, reason }
    }
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.name, self.value, self.reason)
    }
}
