use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::protocol::{ToolCall, ToolDescriptor, ToolResult};

/// Failure reported by a tool handler. It is surfaced to the model as an
/// error payload, never as a crash.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ToolError {
    pub code: String,
    pub message: String,
}

impl ToolError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self { code: code.into(), message: message.into() }
    }

    pub fn invalid_argument(message: impl Into<String>) -> Self {
        Self::new("invalid_argument", message)
    }

    pub fn to_result(&self) -> ToolResult {
        ToolResult::error(json!({ "error": self.code, "message": self.message }))
    }
}

pub type Args = Map<String, Value>;

pub trait ToolHandler: Send + Sync {
    fn call(&self, args: &Args) -> Result<ToolResult, ToolError>;
}

impl<F> ToolHandler for F
where
    F: Fn(&Args) -> Result<ToolResult, ToolError> + Send + Sync,
{
    fn call(&self, args: &Args) -> Result<ToolResult, ToolError> {
        self(args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvalidParam {
    pub name: String,
    pub expected: String,
}

/// Structured validation failure; serialized into the tool turn so the model
/// can ask the user for what is missing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationError {
    pub tool: String,
    pub missing: Vec<String>,
    pub invalid: Vec<InvalidParam>,
    pub unknown: Vec<String>,
}

impl ValidationError {
    pub fn message(&self) -> String {
        let mut parts = Vec::new();
        if !self.missing.is_empty() {
            parts.push(format!("missing required parameter(s): {}", self.missing.join(", ")));
        }
        if !self.invalid.is_empty() {
            let s: Vec<String> = self.invalid.iter().map(|p| format!("{} (expected {})", p.name, p.expected)).collect();
            parts.push(format!("invalid parameter(s): {}", s.join(", ")));
        }
        if !self.unknown.is_empty() {
            parts.push(format!("unknown parameter(s): {}", self.unknown.join(", ")));
        }
        format!("{}: {}. Ask the user for the missing or invalid values.", self.tool, parts.join("; "))
    }

    pub fn to_result(&self) -> ToolResult {
        ToolResult::error(json!({
            "error": "invalid_arguments",
            "tool": self.tool,
            "missing": self.missing,
            "invalid": self.invalid,
            "unknown": self.unknown,
            "message": self.message(),
        }))
    }
}

/// Checks `args` against a descriptor: required parameters present, types
/// accepted, no unknown names.
pub fn validate_args(d: &ToolDescriptor, args: &Args) -> Result<(), ValidationError> {
    let mut err = ValidationError { tool: d.name.clone(), missing: vec![], invalid: vec![], unknown: vec![] };
    for p in &d.parameters {
        match args.get(&p.name) {
            None | Some(Value::Null) if p.required => err.missing.push(p.name.clone()),
            None | Some(Value::Null) => {}
            Some(v) if !p.ty.accepts(v) => err.invalid.push(InvalidParam { name: p.name.clone(), expected: p.ty.expected() }),
            Some(_) => {}
        }
    }
    err.unknown = args.keys().filter(|k| d.param(k).is_none()).cloned().collect();
    if err.missing.is_empty() && err.invalid.is_empty() && err.unknown.is_empty() {
        Ok(())
    } else {
        Err(err)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("tool `{0}` is already registered")]
    DuplicateName(String),
    #[error("tool `{0}` is not registered")]
    UnknownTool(String),
    #[error("invalid arguments: {}", .0.message())]
    Invalid(ValidationError),
}

#[derive(Clone)]
struct Registered {
    descriptor: ToolDescriptor,
    handler: Arc<dyn ToolHandler>,
}

/// Tools in registration order. Immutable once handed to the orchestrator.
#[derive(Clone, Default)]
pub struct ToolRegistry {
    tools: Vec<Registered>,
    by_name: HashMap<String, usize>,
}

impl ToolRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, descriptor: ToolDescriptor, handler: Arc<dyn ToolHandler>) -> Result<(), RegistryError> {
        if self.by_name.contains_key(&descriptor.name) {
            return Err(RegistryError::DuplicateName(descriptor.name));
        }
        self.by_name.insert(descriptor.name.clone(), self.tools.len());
        self.tools.push(Registered { descriptor, handler });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }

    pub fn descriptors(&self) -> Vec<ToolDescriptor> {
        self.tools.iter().map(|t| t.descriptor.clone()).collect()
    }

    pub fn descriptor(&self, name: &str) -> Option<&ToolDescriptor> {
        self.by_name.get(name).map(|i| &self.tools[*i].descriptor)
    }

    /// Type and required-ness checks only.
    pub fn validate(&self, call: &ToolCall) -> Result<(), RegistryError> {
        let d = self.descriptor(&call.name).ok_or_else(|| RegistryError::UnknownTool(call.name.clone()))?;
        validate_args(d, &call.arguments).map_err(RegistryError::Invalid)
    }

    /// Runs the handler of an already validated call. Handler errors and
    /// panics become error results.
    pub fn execute(&self, call: &ToolCall) -> ToolResult {
        let Some(i) = self.by_name.get(&call.name) else {
            return ToolError::new("unknown_tool", format!("no tool named `{}`", call.name)).to_result();
        };
        let handler = &self.tools[*i].handler;
        match catch_unwind(AssertUnwindSafe(|| handler.call(&call.arguments))) {
            Ok(Ok(result)) => result,
            Ok(Err(e)) => e.to_result(),
            Err(_) => ToolError::new("internal", format!("tool `{}` panicked", call.name)).to_result(),
        }
    }
}
