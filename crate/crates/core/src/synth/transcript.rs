use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::SynthesisRecord;

/// Line form of a record. The raw response is base64 so that any bytes the
/// model produced survive the JSONL framing unchanged.
#[derive(Serialize, Deserialize)]
struct Line {
    #[serde(flatten)]
    record: SynthesisRecord,
    raw_response_b64: String,
}

/// Append-only JSONL transcript, safe to share between worker threads.
pub struct TranscriptSink {
    file: Mutex<File>,
}

impl TranscriptSink {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, record: &SynthesisRecord) -> std::io::Result<()> {
        let line = Line {
            raw_response_b64: STANDARD.encode(record.raw_response.as_bytes()),
            record: SynthesisRecord {
                raw_response: String::new(),
                ..record.clone()
            },
        };
        let mut text = serde_json::to_string(&line)?;
        text.push('\n');
        let mut f = self.file.lock().expect("transcript lock");
        f.write_all(text.as_bytes())?;
        f.flush()
    }
}

pub fn read_transcript(path: &Path) -> std::io::Result<Vec<SynthesisRecord>> {
    let invalid = |e: String| std::io::Error::new(std::io::ErrorKind::InvalidData, e);
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| invalid(e.to_string()))?;
        let bytes = STANDARD
            .decode(&parsed.raw_response_b64)
            .map_err(|e| invalid(e.to_string()))?;
        let mut record = parsed.record;
        record.raw_response = String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthesize, ConstantBackend, Prompt, PromptKind};

    #[test]
    fn lossless_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("t.jsonl");
        let sink = TranscriptSink::create(&path).unwrap();
        let prompt = Prompt {
            kind: PromptKind::CoarseGrained,
            text: "p".into(),
            source_id: "x".into(),
        };
        let odd = "line\r\n\t\"quoted\" \u{0}\u{1f600} ```json\n{\"Version\":\n";
        let mut records = Vec::new();
        for raw in [odd.to_string(), String::new()] {
            let rec = synthesize(&prompt, &ConstantBackend::new(raw)).unwrap();
            sink.append(&rec).unwrap();
            records.push(rec);
        }
        records.push(synthesize(&prompt, &ConstantBackend::allow_all()).unwrap());
        sink.append(&records[2]).unwrap();
        assert_eq!(read_transcript(&path).unwrap(), records);
    }
}
