//! JSON input schemas and fixed-precision JSON output.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::channel::{channel_from_canonical, PauliTransferMatrix};
use crate::holevo::HolevoEnsemble;
use crate::{Error, Result};

/// Either `{"t": [..], "lambda": [..]}` or `{"matrix": [[..4]; 4]}`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 4]; 4]>,
}

impl ChannelInput {
    pub fn to_channel(&self) -> Result<PauliTransferMatrix> {
        match (self.t, self.lambda, self.matrix) {
            (Some(t), Some(lambda), None) => Ok(channel_from_canonical(t, lambda)),
            (None, None, Some(rows)) => PauliTransferMatrix::from_rows(rows),
            (_, _, Some(_)) => Err(Error::InvalidChannel("give either t/lambda or matrix, not both".into())),
            _ => Err(Error::InvalidChannel("expected both t and lambda, or matrix".into())),
        }
    }
}

impl From<&PauliTransferMatrix> for ChannelInput {
    fn from(ch: &PauliTransferMatrix) -> Self {
        Self { t: None, lambda: None, matrix: Some(ch.rows()) }
    }
}

pub fn parse_channel(text: &str) -> Result<PauliTransferMatrix> {
    let input: ChannelInput = serde_json::from_str(text).map_err(|e| Error::InvalidChannel(e.to_string()))?;
    input.to_channel()
}

/// Parses `{"items": [{"w": [..3], "u0": .., "u": [..3]}, ..]}` without validating it.
pub fn parse_ensemble(text: &str) -> Result<HolevoEnsemble> {
    serde_json::from_str(text).map_err(|e| Error::InvalidEnsemble(e.to_string()))
}

/// Compact JSON with every float written to 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedPrecision;

impl Formatter for FixedPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // adding zero maps −0 to +0
        write!(writer, "{:.16e}", value + 0.0)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedPrecision);
    value.serialize(&mut ser).expect("serializing to a buffer cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
