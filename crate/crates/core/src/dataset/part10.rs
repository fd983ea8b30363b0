use std::fmt;

use super::codec::{decode_at, encode_dataset, DecodeError, EncodeError};
use super::{tags, DataSet, Value, VR};

const PREAMBLE_LEN: usize = 128;
const MAGIC: &[u8; 4] = b"DICM";

pub const IMPLEMENTATION_CLASS_UID: &str = "2.25.211355490849604375925485663736412365509";
pub const IMPLEMENTATION_VERSION_NAME: &str = "DICOM_ANNOT_01";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferSyntax {
    ImplicitVrLittleEndian,
    ExplicitVrLittleEndian,
}

impl TransferSyntax {
    pub const IMPLICIT_VR_LITTLE_ENDIAN: &'static str = "1.2.840.10008.1.2";
    pub const EXPLICIT_VR_LITTLE_ENDIAN: &'static str = "1.2.840.10008.1.2.1";

    pub fn from_uid(uid: &str) -> Option<Self> {
        match uid.trim_end_matches('\0') {
            Self::IMPLICIT_VR_LITTLE_ENDIAN => Some(TransferSyntax::ImplicitVrLittleEndian),
            Self::EXPLICIT_VR_LITTLE_ENDIAN => Some(TransferSyntax::ExplicitVrLittleEndian),
            _ => None,
        }
    }

    pub fn uid(self) -> &'static str {
        match self {
            TransferSyntax::ImplicitVrLittleEndian => Self::IMPLICIT_VR_LITTLE_ENDIAN,
            TransferSyntax::ExplicitVrLittleEndian => Self::EXPLICIT_VR_LITTLE_ENDIAN,
        }
    }

    pub fn is_explicit_vr(self) -> bool {
        matches!(self, TransferSyntax::ExplicitVrLittleEndian)
    }

    pub fn is_writable(self) -> bool {
        matches!(self, TransferSyntax::ExplicitVrLittleEndian)
    }
}

impl fmt::Display for TransferSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.uid())
    }
}

/// The group 0002 file meta information.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileMeta {
    pub media_storage_sop_class_uid: String,
    pub media_storage_sop_instance_uid: String,
    pub transfer_syntax_uid: String,
    pub implementation_class_uid: String,
    pub implementation_version_name: String,
}

impl FileMeta {
    /// Meta information for writing `ds` as explicit VR little endian.
    pub fn for_dataset(ds: &DataSet) -> FileMeta {
        FileMeta {
            media_storage_sop_class_uid: ds
                .string(tags::SOP_CLASS_UID)
                .unwrap_or_default()
                .to_string(),
            media_storage_sop_instance_uid: ds
                .string(tags::SOP_INSTANCE_UID)
                .unwrap_or_default()
                .to_string(),
            transfer_syntax_uid: TransferSyntax::EXPLICIT_VR_LITTLE_ENDIAN.to_string(),
            implementation_class_uid: IMPLEMENTATION_CLASS_UID.to_string(),
            implementation_version_name: IMPLEMENTATION_VERSION_NAME.to_string(),
        }
    }

    pub fn transfer_syntax(&self) -> Result<TransferSyntax, Part10Error> {
        TransferSyntax::from_uid(&self.transfer_syntax_uid)
            .ok_or_else(|| Part10Error::UnsupportedSyntax(self.transfer_syntax_uid.clone()))
    }

    fn to_dataset(&self) -> DataSet {
        let mut ds = DataSet::new();
        ds.set_bytes(
            tags::FILE_META_INFORMATION_VERSION,
            VR::OB,
            vec![0x00, 0x01],
        );
        ds.set_uid(
            tags::MEDIA_STORAGE_SOP_CLASS_UID,
            &self.media_storage_sop_class_uid,
        );
        ds.set_uid(
            tags::MEDIA_STORAGE_SOP_INSTANCE_UID,
            &self.media_storage_sop_instance_uid,
        );
        ds.set_uid(tags::TRANSFER_SYNTAX_UID, &self.transfer_syntax_uid);
        ds.set_uid(
            tags::IMPLEMENTATION_CLASS_UID,
            &self.implementation_class_uid,
        );
        if !self.implementation_version_name.is_empty() {
            ds.set_text(
                tags::IMPLEMENTATION_VERSION_NAME,
                VR::SH,
                &self.implementation_version_name,
            );
        }
        ds
    }

    fn from_dataset(ds: &DataSet) -> Result<FileMeta, Part10Error> {
        let required = |tag| {
            ds.string(tag)
                .map(str::to_string)
                .ok_or(Part10Error::MissingMeta(tag))
        };
        Ok(FileMeta {
            media_storage_sop_class_uid: required(tags::MEDIA_STORAGE_SOP_CLASS_UID)?,
            media_storage_sop_instance_uid: required(tags::MEDIA_STORAGE_SOP_INSTANCE_UID)?,
            transfer_syntax_uid: required(tags::TRANSFER_SYNTAX_UID)?,
            implementation_class_uid: required(tags::IMPLEMENTATION_CLASS_UID)?,
            implementation_version_name: ds
                .string(tags::IMPLEMENTATION_VERSION_NAME)
                .unwrap_or_default()
                .to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Part10Error {
    #[error("not a DICOM file: missing \"DICM\" magic at offset 128")]
    NotDicom,
    #[error("unsupported transfer syntax {0}")]
    UnsupportedSyntax(String),
    #[error("transfer syntax {0} can be read but not written")]
    UnsupportedWriteSyntax(String),
    #[error("file meta information lacks {0}")]
    MissingMeta(super::Tag),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Splits a Part 10 stream into its file meta information and data set.
pub fn read_part10(bytes: &[u8]) -> Result<(FileMeta, DataSet), Part10Error> {
    if bytes.len() < PREAMBLE_LEN + MAGIC.len() || &bytes[PREAMBLE_LEN..PREAMBLE_LEN + 4] != MAGIC {
        return Err(Part10Error::NotDicom);
    }
    let body = &bytes[PREAMBLE_LEN + 4..];
    let meta_len = scan_meta_group(body)?;
    let meta_ds = decode_at(
        &body[..meta_len],
        TransferSyntax::ExplicitVrLittleEndian,
        PREAMBLE_LEN + 4,
    )?;
    let meta = FileMeta::from_dataset(&meta_ds)?;
    let syntax = meta.transfer_syntax()?;
    let ds = decode_at(&body[meta_len..], syntax, PREAMBLE_LEN + 4 + meta_len)?;
    Ok((meta, ds))
}

/// Byte length of the leading group 0002 elements, which are always
/// explicit VR little endian.
fn scan_meta_group(body: &[u8]) -> Result<usize, Part10Error> {
    let mut pos = 0;
    while pos + 8 <= body.len() {
        let group = u16::from_le_bytes([body[pos], body[pos + 1]]);
        if group != 0x0002 {
            break;
        }
        let vr = VR::from_bytes([body[pos + 4], body[pos + 5]]);
        let (header, length) = match vr {
            Some(vr) if vr.has_long_length() => {
                if pos + 12 > body.len() {
                    return Err(DecodeError::Truncated {
                        offset: PREAMBLE_LEN + 4 + pos,
                        needed: pos + 12 - body.len(),
                    }
                    .into());
                }
                let l = u32::from_le_bytes([
                    body[pos + 8],
                    body[pos + 9],
                    body[pos + 10],
                    body[pos + 11],
                ]);
                (12, l as usize)
            }
            _ => (
                8,
                usize::from(u16::from_le_bytes([body[pos + 6], body[pos + 7]])),
            ),
        };
        pos += header + length;
    }
    Ok(pos.min(body.len()))
}

/// Writes preamble, magic, file meta group and the data set.
pub fn write_part10(meta: &FileMeta, ds: &DataSet) -> Result<Vec<u8>, Part10Error> {
    let syntax = meta.transfer_syntax()?;
    if !syntax.is_writable() {
        return Err(Part10Error::UnsupportedWriteSyntax(
            syntax.uid().to_string(),
        ));
    }
    let explicit = TransferSyntax::ExplicitVrLittleEndian;
    let meta_body = encode_dataset(&meta.to_dataset(), explicit)?;
    let mut group_length = DataSet::new();
    group_length.put(super::DataElement::new(
        tags::FILE_META_INFORMATION_GROUP_LENGTH,
        VR::UL,
        Value::Int(vec![meta_body.len() as i64]),
    ));

    let mut out = vec![0u8; PREAMBLE_LEN];
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&encode_dataset(&group_length, explicit)?);
    out.extend_from_slice(&meta_body);
    out.extend_from_slice(&encode_dataset(ds, syntax)?);
    Ok(out)
}
