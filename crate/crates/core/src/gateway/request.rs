use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::digest::{content_digest, json_digest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagePart {
    media_type: String,
    digest: String,
    bytes: Arc<Vec<u8>>,
}

impl ImagePart {
    pub fn new(bytes: Vec<u8>, media_type: impl Into<String>) -> ImagePart {
        ImagePart {
            media_type: media_type.into(),
            digest: content_digest(&bytes),
            bytes: Arc::new(bytes),
        }
    }

    pub fn png(bytes: Vec<u8>) -> ImagePart {
        ImagePart::new(bytes, "image/png")
    }

    pub fn media_type(&self) -> &str {
        &self.media_type
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Part {
    Text(String),
    Image(ImagePart),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub role: Role,
    pub parts: Vec<Part>,
}

impl Message {
    pub fn system(text: impl Into<String>) -> Message {
        Message {
            role: Role::System,
            parts: vec![Part::Text(text.into())],
        }
    }

    pub fn user(parts: Vec<Part>) -> Message {
        Message { role: Role::User, parts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingParams {
    pub temperature: f32,
    pub max_tokens: u32,
}

impl Default for DecodingParams {
    fn default() -> Self {
        DecodingParams {
            temperature: 0.0,
            max_tokens: 2048,
        }
    }
}

/// A chat request. The digest is computed once at construction from every
/// other field, with images represented by their content digests.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRequest {
    model: String,
    messages: Vec<Message>,
    params: DecodingParams,
    digest: String,
}

impl ModelRequest {
    pub fn new(model: impl Into<String>, messages: Vec<Message>, params: DecodingParams) -> ModelRequest {
        let model = model.into();
        let digest = json_digest(&summarize(&model, &messages, &params));
        ModelRequest {
            model,
            messages,
            params,
            digest,
        }
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn params(&self) -> DecodingParams {
        self.params
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn images(&self) -> impl Iterator<Item = &ImagePart> {
        self.messages.iter().flat_map(|m| m.parts.iter()).filter_map(|p| match p {
            Part::Image(img) => Some(img),
            Part::Text(_) => None,
        })
    }

    /// Concatenated text of all parts, with `<image:DIGEST>` markers where
    /// attachments sit.
    pub fn prompt_text(&self) -> String {
        let mut out = String::new();
        for message in &self.messages {
            out.push_str(&format!("[{}]\n", message.role.as_str()));
            for part in &message.parts {
                match part {
                    Part::Text(t) => out.push_str(t),
                    Part::Image(img) => out.push_str(&format!("<image:{}>", img.digest())),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Byte-free form of the request; hashing it reproduces [`ModelRequest::digest`].
    pub fn summary(&self) -> RequestSummary {
        summarize(&self.model, &self.messages, &self.params)
    }
}

/// The digestable payload of a request, safe to persist in traces and cache files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSummary {
    pub model: String,
    pub messages: Vec<MessageSummary>,
    pub temperature: f32,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageSummary {
    pub role: Role,
    pub parts: Vec<PartSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartSummary {
    Text(String),
    Image { digest: String, media_type: String },
}

impl RequestSummary {
    pub fn digest(&self) -> String {
        json_digest(self)
    }

    pub fn image_digests(&self) -> Vec<&str> {
        self.messages
            .iter()
            .flat_map(|m| m.parts.iter())
            .filter_map(|p| match p {
                PartSummary::Image { digest, .. } => Some(digest.as_str()),
                PartSummary::Text(_) => None,
            })
            .collect()
    }
}

fn summarize(model: &str, messages: &[Message], params: &DecodingParams) -> RequestSummary {
    RequestSummary {
        model: model.to_string(),
        messages: messages
            .iter()
            .map(|m| MessageSummary {
                role: m.role,
                parts: m
                    .parts
                    .iter()
                    .map(|p| match p {
                        Part::Text(t) => PartSummary::Text(t.clone()),
                        Part::Image(img) => PartSummary::Image {
                            digest: img.digest().to_string(),
                            media_type: img.media_type().to_string(),
                        },
                    })
                    .collect(),
            })
            .collect(),
        temperature: params.temperature,
        max_tokens: params.max_tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelRequest {
        ModelRequest::new(
            "m",
            vec![Message::user(vec![Part::Text("hi".into()), Part::Image(ImagePart::png(vec![1, 2, 3]))])],
            DecodingParams::default(),
        )
    }

    #[test]
    fn digest_reproduces_from_summary() {
        let req = base();
        assert_eq!(req.summary().digest(), req.digest());
    }

    #[test]
    fn every_field_changes_the_key() {
        let req = base();
        let text = ModelRequest::new(
            "m",
            vec![Message::user(vec![Part::Text("hi!".into()), Part::Image(ImagePart::png(vec![1, 2, 3]))])],
            DecodingParams::default(),
        );
        let image = ModelRequest::new(
            "m",
            vec![Message::user(vec![Part::Text("hi".into()), Part::Image(ImagePart::png(vec![1, 2, 4]))])],
            DecodingParams::default(),
        );
        let params = ModelRequest::new(
            "m",
            req.messages().to_vec(),
            DecodingParams {
                temperature: 0.5,
                ..DecodingParams::default()
            },
        );
        let max_len = ModelRequest::new(
            "m",
            req.messages().to_vec(),
            DecodingParams {
                max_tokens: 7,
                ..DecodingParams::default()
            },
        );
        let model = ModelRequest::new("other", req.messages().to_vec(), DecodingParams::default());
        let digests = [
            req.digest(),
            text.digest(),
            image.digest(),
            params.digest(),
            max_len.digest(),
            model.digest(),
        ];
        for i in 0..digests.len() {
            for j in i + 1..digests.len() {
                assert_ne!(digests[i], digests[j], "{i} vs {j}");
            }
        }
    }

    #[test]
    fn prompt_text_marks_images() {
        let req = base();
        let text = req.prompt_text();
        assert!(text.contains("hi<image:"));
        assert_eq!(req.images().count(), 1);
    }
}
