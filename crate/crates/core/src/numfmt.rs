//! Float formatting shared by every CSV and JSON writer: 17 significant
//! digits, which round-trips any finite `f64` bit-exactly.

use std::io;

use serde::Serialize;

/// Formats a float with 17 significant digits in scientific notation.
/// Non-finite values print as `inf`, `-inf` or `NaN`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// `serde_json` formatter that writes every float with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct SigDigitsFormatter;

impl serde_json::ser::Formatter for SigDigitsFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        // serde_json already maps non-finite floats to null before reaching here
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Serializes `value` as pretty-ish JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}
