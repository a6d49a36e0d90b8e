use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarterOptionId {
    LimpopoLibrary,
    RealtimeAnalysis,
    ExportGenerate,
    NewConversation,
}

impl StarterOptionId {
    pub fn as_str(self) -> &'static str {
        match self {
            StarterOptionId::LimpopoLibrary => "limpopo_library",
            StarterOptionId::RealtimeAnalysis => "realtime_analysis",
            StarterOptionId::ExportGenerate => "export_generate",
            StarterOptionId::NewConversation => "new_conversation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        STARTER_OPTIONS.iter().map(|o| o.id).find(|id| id.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StarterOption {
    pub id: StarterOptionId,
    pub label: &'static str,
    /// System hint recorded before the first message sent with this option.
    pub seed_prompt: &'static str,
}

pub const STARTER_OPTIONS: [StarterOption; 4] = [
    StarterOption {
        id: StarterOptionId::LimpopoLibrary,
        label: "Limpopo Library",
        seed_prompt: "The user is asking about the document library: hydrological model reports, policy papers, \
water governance frameworks and environmental assessments. Answer with search_documents and cite the documents.",
    },
    StarterOption {
        id: StarterOptionId::RealtimeAnalysis,
        label: "Limpopo Real-Time Analysis",
        seed_prompt: "The user wants monitoring data: rainfall, river flow, reservoir storage and environmental-flow \
thresholds. Use the hydrology tools and ask for any station, river, year or month that is missing.",
    },
    StarterOption {
        id: StarterOptionId::ExportGenerate,
        label: "Export/Generate Data",
        seed_prompt: "The user wants structured output to download. Prefer tools that return tables or charts and \
keep the answer short; the user will export it as markdown, csv or json.",
    },
    StarterOption {
        id: StarterOptionId::NewConversation,
        label: "New Conversation",
        seed_prompt: "",
    },
];

pub fn option_hint(id: &str) -> Option<&'static str> {
    StarterOptionId::parse(id).and_then(|id| STARTER_OPTIONS.iter().find(|o| o.id == id)).map(|o| o.seed_prompt)
}
