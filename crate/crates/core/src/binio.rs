use std::io::{self, Read};

use crate::error::{Error, Result};

pub(crate) fn eof_as_truncated(e: io::Error, what: &str) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        Error::Truncated(what.to_string())
    } else {
        Error::Io(e)
    }
}

pub(crate) fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| eof_as_truncated(e, what))
}

pub(crate) fn read_u8<R: Read>(r: &mut R, what: &str) -> Result<u8> {
    let mut b = [0; 1];
    read_exact(r, &mut b, what)?;
    Ok(b[0])
}

pub(crate) fn read_u16<R: Read>(r: &mut R, what: &str) -> Result<u16> {
    let mut b = [0; 2];
    read_exact(r, &mut b, what)?;
    Ok(u16::from_le_bytes(b))
}

pub(crate) fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

/// u16 length prefix then UTF-8 bytes.
pub(crate) fn read_str<R: Read>(r: &mut R, what: &str) -> Result<String> {
    let len = read_u16(r, what)? as usize;
    let mut buf = vec![0; len];
    read_exact(r, &mut buf, what)?;
    String::from_utf8(buf).map_err(|_| Error::Format(format!("{what} is not UTF-8")))
}

pub(crate) fn str_bytes(s: &str, what: &str) -> Result<Vec<u8>> {
    let len = u16::try_from(s.len()).map_err(|_| Error::Format(format!("{what} longer than 65535 bytes")))?;
    let mut out = len.to_le_bytes().to_vec();
    out.extend_from_slice(s.as_bytes());
    Ok(out)
}

/// Errors unless `r` is exhausted.
pub(crate) fn expect_end<R: Read>(r: &mut R, what: &str) -> Result<()> {
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Format(format!("trailing bytes after {what}")));
    }
    Ok(())
}
