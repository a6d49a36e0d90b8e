//! Tool-protocol shapes: tool descriptors, tool calls, tool results and the
//! conversation turns that carry them.
//!
//! A [`ToolDescriptor`] serializes to the OpenAI-style function schema:
//!
//! ```json
//! {"type": "function",
//!  "function": {"name": "...", "description": "...",
//!               "parameters": {"type": "object",
//!                              "properties": {"p": {"type": "string", "description": "..."}},
//!                              "required": ["p"]}}}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::chart::ChartSpec;
use crate::source::SourceRef;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamType {
    String,
    Number,
    Integer,
    Boolean,
    Enum(Vec<String>),
    Object,
}

impl ParamType {
    pub fn expected(&self) -> String {
        match self {
            ParamType::String => "string".into(),
            ParamType::Number => "number".into(),
            ParamType::Integer => "integer".into(),
            ParamType::Boolean => "boolean".into(),
            ParamType::Enum(values) => format!("one of [{}]", values.join(", ")),
            ParamType::Object => "object".into(),
        }
    }

    /// Type check only; range semantics belong to the handler.
    pub fn accepts(&self, value: &Value) -> bool {
        match self {
            ParamType::String => value.is_string(),
            ParamType::Number => value.is_number(),
            ParamType::Integer => value.is_i64() || value.is_u64(),
            ParamType::Boolean => value.is_boolean(),
            ParamType::Enum(values) => value.as_str().is_some_and(|s| values.iter().any(|v| v == s)),
            ParamType::Object => value.is_object(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: String,
    pub ty: ParamType,
    pub required: bool,
    pub description: String,
}

impl ParamSpec {
    pub fn required(name: &str, ty: ParamType, description: &str) -> Self {
        Self { name: name.into(), ty, required: true, description: description.into() }
    }

    pub fn optional(name: &str, ty: ParamType, description: &str) -> Self {
        Self { name: name.into(), ty, required: false, description: description.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Value", try_from = "Value")]
pub struct ToolDescriptor {
    pub name: String,
    pub description: String,
    pub parameters: Vec<ParamSpec>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid tool schema: {0}")]
pub struct SchemaError(pub String);

impl ToolDescriptor {
    pub fn new(name: &str, description: &str, parameters: Vec<ParamSpec>) -> Self {
        Self { name: name.into(), description: description.into(), parameters }
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn to_schema(&self) -> Value {
        let mut properties = Map::new();
        for p in &self.parameters {
            let mut prop = match &p.ty {
                ParamType::Enum(values) => json!({"type": "string", "enum": values}),
                other => json!({"type": other.expected()}),
            };
            prop["description"] = Value::String(p.description.clone());
            properties.insert(p.name.clone(), prop);
        }
        let required: Vec<&str> =
            self.parameters.iter().filter(|p| p.required).map(|p| p.name.as_str()).collect();
        json!({
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": required,
                }
            }
        })
    }

    pub fn from_schema(value: &Value) -> Result<Self, SchemaError> {
        let err = |m: &str| SchemaError(m.to_owned());
        let function = value.get("function").ok_or_else(|| err("missing `function`"))?;
        let name = function
            .get("name")
            .and_then(Value::as_str)
            .filter(|n| !n.is_empty())
            .ok_or_else(|| err("missing function name"))?;
        let description = function.get("description").and_then(Value::as_str).unwrap_or_default();
        let params = function.get("parameters");
        let required: Vec<&str> = params
            .and_then(|p| p.get("required"))
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_str).collect())
            .unwrap_or_default();
        let mut parameters = Vec::new();
        if let Some(props) = params.and_then(|p| p.get("properties")).and_then(Value::as_object) {
            for (pname, prop) in props {
                let ty = match (prop.get("type").and_then(Value::as_str), prop.get("enum")) {
                    (_, Some(Value::Array(values))) => ParamType::Enum(
                        values.iter().filter_map(Value::as_str).map(str::to_owned).collect(),
                    ),
                    (Some("string"), _) => ParamType::String,
                    (Some("number"), _) => ParamType::Number,
                    (Some("integer"), _) => ParamType::Integer,
                    (Some("boolean"), _) => ParamType::Boolean,
                    (Some("object"), _) => ParamType::Object,
                    (other, _) => {
                        return Err(SchemaError(format!("parameter `{pname}` has unsupported type {other:?}")))
                    }
                };
                parameters.push(ParamSpec {
                    name: pname.clone(),
                    ty,
                    required: required.contains(&pname.as_str()),
                    description: prop.get("description").and_then(Value::as_str).unwrap_or_default().into(),
                });
            }
        }
        if let Some(missing) = required.iter().find(|r| !parameters.iter().any(|p| p.name == **r)) {
            return Err(SchemaError(format!("required parameter `{missing}` is not declared")));
        }
        Ok(Self { name: name.into(), description: description.into(), parameters })
    }
}

impl From<ToolDescriptor> for Value {
    fn from(d: ToolDescriptor) -> Self {
        d.to_schema()
    }
}

impl TryFrom<Value> for ToolDescriptor {
    type Error = SchemaError;
    fn try_from(v: Value) -> Result<Self, Self::Error> {
        ToolDescriptor::from_schema(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    #[serde(default)]
    pub call_id: String,
    pub name: String,
    #[serde(default)]
    pub arguments: Map<String, Value>,
}

impl ToolCall {
    pub fn new(call_id: &str, name: &str, arguments: Value) -> Self {
        let arguments = match arguments {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Self { call_id: call_id.into(), name: name.into(), arguments }
    }
}

/// Tabular view of a tool result, exported as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        // Writing into a Vec cannot fail.
        w.write_record(&self.columns).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row).expect("in-memory csv");
        }
        w.into_inner().expect("in-memory csv")
    }
}

/// What a tool hands back to the orchestrator: a JSON payload for the model
/// plus machine-checkable references and optional table/chart views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolResult {
    pub ok: bool,
    pub content: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refs: Vec<SourceRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
}

impl ToolResult {
    pub fn ok(content: Value, refs: Vec<SourceRef>) -> Self {
        Self { ok: true, content, refs, table: None, chart: None }
    }

    pub fn error(content: Value) -> Self {
        Self { ok: false, content, refs: Vec::new(), table: None, chart: None }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn with_chart(mut self, chart: ChartSpec) -> Self {
        self.chart = Some(chart);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

// Tool results dominate transcripts anyway, so boxing them saves nothing.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TurnContent {
    Text { text: String },
    ToolCalls { calls: Vec<ToolCall> },
    ToolResult { call_id: String, name: String, result: ToolResult },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationTurn {
    pub role: Role,
    pub content: TurnContent,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refs: Vec<SourceRef>,
}

impl ConversationTurn {
    pub fn system(text: impl Into<String>) -> Self {
        Self { role: Role::System, content: TurnContent::Text { text: text.into() }, refs: Vec::new() }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Self { role: Role::User, content: TurnContent::Text { text: text.into() }, refs: Vec::new() }
    }

    pub fn assistant(text: impl Into<String>, refs: Vec<SourceRef>) -> Self {
        Self { role: Role::Assistant, content: TurnContent::Text { text: text.into() }, refs }
    }

    pub fn tool_calls(calls: Vec<ToolCall>) -> Self {
        Self { role: Role::Assistant, content: TurnContent::ToolCalls { calls }, refs: Vec::new() }
    }

    pub fn tool_result(call: &ToolCall, result: ToolResult) -> Self {
        Self {
            role: Role::Tool,
            content: TurnContent::ToolResult { call_id: call.call_id.clone(), name: call.name.clone(), result },
            refs: Vec::new(),
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.content {
            TurnContent::Text { text } => Some(text),
            _ => None,
        }
    }
}
