//! JSON input parsing that reports which field was at fault.

use serde::de::DeserializeOwned;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonError {
    /// Dotted path of the offending field, `None` for the document itself.
    pub field: Option<String>,
    pub message: String,
}

impl std::fmt::Display for JsonError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "field `{field}`: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

pub fn parse<T: DeserializeOwned>(text: &[u8]) -> Result<T, JsonError> {
    let mut de = serde_json::Deserializer::from_slice(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().to_string();
        // `?` marks a position the parser could not name
        let path = path.trim_end_matches(".?");
        let mut field = (path != "." && path != "?").then(|| path.to_string());
        // an unknown key at the top level is reported without a path
        if field.is_none() {
            field = unknown_key(&message).map(str::to_string);
        }
        JsonError { field, message }
    })?;
    de.end().map_err(|e| JsonError {
        field: None,
        message: e.to_string(),
    })?;
    Ok(value)
}

fn unknown_key(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.split('`').next()
}
