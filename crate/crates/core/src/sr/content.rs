use std::fmt;
use std::str::FromStr;

use crate::coding::{code_sequence, concept_at, CodedConcept};
use crate::dataset::{tags, DataSet, DecimalString, Value, VR};

use super::SrError;

macro_rules! cs_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant,)*
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)*
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = SrError;

            fn from_str(s: &str) -> Result<Self, SrError> {
                match s {
                    $($text => Ok($name::$variant),)*
                    other => Err(SrError::Malformed(format!(
                        concat!("unknown ", stringify!($name), " {:?}"), other
                    ))),
                }
            }
        }
    };
}

cs_enum!(ValueType {
    Container => "CONTAINER",
    Code => "CODE",
    Num => "NUM",
    Text => "TEXT",
    UidRef => "UIDREF",
    PName => "PNAME",
    DateTime => "DATETIME",
    Image => "IMAGE",
    Composite => "COMPOSITE",
    Scoord => "SCOORD",
    Scoord3d => "SCOORD3D",
});

cs_enum!(RelationshipType {
    Contains => "CONTAINS",
    HasObsContext => "HAS OBS CONTEXT",
    HasConceptMod => "HAS CONCEPT MOD",
    HasAcqContext => "HAS ACQ CONTEXT",
    InferredFrom => "INFERRED FROM",
    SelectedFrom => "SELECTED FROM",
    HasProperties => "HAS PROPERTIES",
});

cs_enum!(
    /// Graphic types of SCOORD items, in image pixel coordinates.
    GraphicType2D {
        Point => "POINT",
        Multipoint => "MULTIPOINT",
        Polyline => "POLYLINE",
        Circle => "CIRCLE",
        Ellipse => "ELLIPSE",
    }
);

cs_enum!(
    /// Graphic types of SCOORD3D items, in frame-of-reference millimeters.
    GraphicType3D {
        Point => "POINT",
        Multipoint => "MULTIPOINT",
        Polyline => "POLYLINE",
        Polygon => "POLYGON",
        Ellipse => "ELLIPSE",
        Ellipsoid => "ELLIPSOID",
    }
);

/// Required point count for a graphic type.
enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    fn check(&self, n: usize) -> bool {
        match *self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exactly(k) => write!(f, "exactly {k}"),
            Arity::AtLeast(k) => write!(f, "at least {k}"),
        }
    }
}

impl GraphicType2D {
    fn arity(self) -> Arity {
        match self {
            GraphicType2D::Point => Arity::Exactly(1),
            GraphicType2D::Multipoint => Arity::AtLeast(1),
            GraphicType2D::Polyline => Arity::AtLeast(2),
            GraphicType2D::Circle => Arity::Exactly(2),
            GraphicType2D::Ellipse => Arity::Exactly(4),
        }
    }
}

impl GraphicType3D {
    fn arity(self) -> Arity {
        match self {
            GraphicType3D::Point => Arity::Exactly(1),
            GraphicType3D::Multipoint => Arity::AtLeast(1),
            GraphicType3D::Polyline => Arity::AtLeast(2),
            GraphicType3D::Polygon => Arity::AtLeast(4),
            GraphicType3D::Ellipse => Arity::Exactly(4),
            GraphicType3D::Ellipsoid => Arity::Exactly(6),
        }
    }
}

/// Spatial coordinates in the pixel matrix of one image, as (column, row).
#[derive(Debug, Clone, PartialEq)]
pub struct Scoord {
    pub graphic_type: GraphicType2D,
    pub points: Vec<[f32; 2]>,
}

impl Scoord {
    pub fn new(graphic_type: GraphicType2D, points: Vec<[f32; 2]>) -> Result<Self, SrError> {
        let s = Scoord {
            graphic_type,
            points,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SrError> {
        let arity = self.graphic_type.arity();
        if !arity.check(self.points.len()) {
            return Err(SrError::InvalidGraphic(format!(
                "{} needs {arity} points, got {}",
                self.graphic_type,
                self.points.len()
            )));
        }
        if !self.points.iter().flatten().all(|v| v.is_finite()) {
            return Err(SrError::InvalidGraphic("non-finite coordinate".into()));
        }
        Ok(())
    }

    pub fn flat(&self) -> Vec<f64> {
        self.points
            .iter()
            .flatten()
            .map(|&v| f64::from(v))
            .collect()
    }
}

/// Spatial coordinates in a frame of reference, as (x, y, z) millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scoord3d {
    pub graphic_type: GraphicType3D,
    pub points: Vec<[f32; 3]>,
    pub frame_of_reference_uid: String,
}

impl Scoord3d {
    pub fn new(
        graphic_type: GraphicType3D,
        points: Vec<[f32; 3]>,
        frame_of_reference_uid: impl Into<String>,
    ) -> Result<Self, SrError> {
        let s = Scoord3d {
            graphic_type,
            points,
            frame_of_reference_uid: frame_of_reference_uid.into(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SrError> {
        let arity = self.graphic_type.arity();
        if !arity.check(self.points.len()) {
            return Err(SrError::InvalidGraphic(format!(
                "{} needs {arity} points, got {}",
                self.graphic_type,
                self.points.len()
            )));
        }
        if !self.points.iter().flatten().all(|v| v.is_finite()) {
            return Err(SrError::InvalidGraphic("non-finite coordinate".into()));
        }
        if self.graphic_type == GraphicType3D::Polygon && self.points.first() != self.points.last()
        {
            return Err(SrError::InvalidGraphic(
                "POLYGON must be closed: first point must equal last point".into(),
            ));
        }
        if !crate::uid::is_valid_uid(&self.frame_of_reference_uid) {
            return Err(SrError::InvalidItem(format!(
                "invalid frame of reference UID {:?}",
                self.frame_of_reference_uid
            )));
        }
        Ok(())
    }

    pub fn flat(&self) -> Vec<f64> {
        self.points
            .iter()
            .flatten()
            .map(|&v| f64::from(v))
            .collect()
    }
}

/// A NUM item value: decimal text plus its UCUM unit.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericValue {
    pub value: DecimalString,
    pub unit: CodedConcept,
    pub qualifier: Option<CodedConcept>,
}

impl NumericValue {
    pub fn new(value: DecimalString, unit: CodedConcept) -> Result<Self, SrError> {
        let n = NumericValue {
            value,
            unit,
            qualifier: None,
        };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<(), SrError> {
        if self.unit.scheme() != "UCUM" {
            return Err(SrError::InvalidUnit(self.unit.clone()));
        }
        Ok(())
    }
}

/// Reference to a composite instance, optionally narrowed to frames or a segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageReference {
    pub sop_class_uid: String,
    pub sop_instance_uid: String,
    pub frame_numbers: Vec<u32>,
    pub segment_number: Option<u16>,
}

impl ImageReference {
    pub fn new(sop_class_uid: impl Into<String>, sop_instance_uid: impl Into<String>) -> Self {
        ImageReference {
            sop_class_uid: sop_class_uid.into(),
            sop_instance_uid: sop_instance_uid.into(),
            frame_numbers: Vec::new(),
            segment_number: None,
        }
    }

    /// Reference to the instance described by `ds`.
    pub fn to_instance(ds: &DataSet) -> Result<Self, SrError> {
        let class = ds
            .string(tags::SOP_CLASS_UID)
            .ok_or_else(|| SrError::Malformed("instance lacks SOPClassUID".into()))?;
        let instance = ds
            .string(tags::SOP_INSTANCE_UID)
            .ok_or_else(|| SrError::Malformed("instance lacks SOPInstanceUID".into()))?;
        Ok(ImageReference::new(class, instance))
    }

    pub fn with_frames(mut self, frames: Vec<u32>) -> Self {
        self.frame_numbers = frames;
        self
    }

    pub fn with_segment(mut self, segment: u16) -> Self {
        self.segment_number = Some(segment);
        self
    }

    fn validate(&self) -> Result<(), SrError> {
        for uid in [&self.sop_class_uid, &self.sop_instance_uid] {
            if !crate::uid::is_valid_uid(uid) {
                return Err(SrError::InvalidItem(format!(
                    "invalid referenced UID {uid:?}"
                )));
            }
        }
        if self.frame_numbers.contains(&0) {
            return Err(SrError::InvalidItem("frame numbers start at 1".into()));
        }
        if self.segment_number == Some(0) {
            return Err(SrError::InvalidItem("segment numbers start at 1".into()));
        }
        Ok(())
    }

    fn to_item(&self) -> DataSet {
        let mut ds = DataSet::new();
        ds.set_uid(tags::REFERENCED_SOP_CLASS_UID, &self.sop_class_uid);
        ds.set_uid(tags::REFERENCED_SOP_INSTANCE_UID, &self.sop_instance_uid);
        if !self.frame_numbers.is_empty() {
            ds.set_ints(
                tags::REFERENCED_FRAME_NUMBER,
                VR::IS,
                self.frame_numbers.iter().map(|&f| i64::from(f)).collect(),
            );
        }
        if let Some(segment) = self.segment_number {
            ds.set_int(tags::REFERENCED_SEGMENT_NUMBER, VR::US, i64::from(segment));
        }
        ds
    }

    fn from_item(ds: &DataSet) -> Result<Self, SrError> {
        let uid = |tag| {
            ds.string(tag)
                .map(str::to_string)
                .ok_or_else(|| SrError::Malformed(format!("referenced SOP item lacks {tag}")))
        };
        let frame_numbers = ds
            .ints(tags::REFERENCED_FRAME_NUMBER)
            .unwrap_or_default()
            .iter()
            .map(|&f| {
                u32::try_from(f).map_err(|_| SrError::Malformed(format!("bad frame number {f}")))
            })
            .collect::<Result<_, _>>()?;
        let segment_number = ds
            .int(tags::REFERENCED_SEGMENT_NUMBER)
            .map(|s| {
                u16::try_from(s).map_err(|_| SrError::Malformed(format!("bad segment number {s}")))
            })
            .transpose()?;
        Ok(ImageReference {
            sop_class_uid: uid(tags::REFERENCED_SOP_CLASS_UID)?,
            sop_instance_uid: uid(tags::REFERENCED_SOP_INSTANCE_UID)?,
            frame_numbers,
            segment_number,
        })
    }
}

/// The value carried by a content item, one variant per value type.
#[derive(Debug, Clone, PartialEq)]
pub enum ContentValue {
    Container { continuous: bool },
    Code(CodedConcept),
    Num(NumericValue),
    Text(String),
    UidRef(String),
    PName(String),
    DateTime(String),
    Image(ImageReference),
    Composite(ImageReference),
    Scoord(Scoord),
    Scoord3d(Scoord3d),
}

impl ContentValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            ContentValue::Container { .. } => ValueType::Container,
            ContentValue::Code(_) => ValueType::Code,
            ContentValue::Num(_) => ValueType::Num,
            ContentValue::Text(_) => ValueType::Text,
            ContentValue::UidRef(_) => ValueType::UidRef,
            ContentValue::PName(_) => ValueType::PName,
            ContentValue::DateTime(_) => ValueType::DateTime,
            ContentValue::Image(_) => ValueType::Image,
            ContentValue::Composite(_) => ValueType::Composite,
            ContentValue::Scoord(_) => ValueType::Scoord,
            ContentValue::Scoord3d(_) => ValueType::Scoord3d,
        }
    }

    fn validate(&self) -> Result<(), SrError> {
        match self {
            ContentValue::Num(n) => n.validate(),
            ContentValue::Scoord(s) => s.validate(),
            ContentValue::Scoord3d(s) => s.validate(),
            ContentValue::Image(r) | ContentValue::Composite(r) => r.validate(),
            ContentValue::UidRef(u) if !crate::uid::is_valid_uid(u) => {
                Err(SrError::InvalidItem(format!("invalid UID {u:?}")))
            }
            _ => Ok(()),
        }
    }
}

/// One node of an SR content tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentItem {
    pub name: CodedConcept,
    /// Relationship to the parent; `None` only for the document root.
    pub relationship: Option<RelationshipType>,
    pub value: ContentValue,
    pub children: Vec<ContentItem>,
    /// Template identifier recorded for containers, e.g. `"1500"`.
    pub template: Option<String>,
}

impl ContentItem {
    /// Builds a leaf item after checking the payload invariants.
    pub fn new(
        name: CodedConcept,
        value: ContentValue,
        relationship: Option<RelationshipType>,
    ) -> Result<Self, SrError> {
        value.validate()?;
        Ok(ContentItem {
            name,
            relationship,
            value,
            children: Vec::new(),
            template: None,
        })
    }

    pub fn container(name: CodedConcept, relationship: Option<RelationshipType>) -> Self {
        ContentItem {
            name,
            relationship,
            value: ContentValue::Container { continuous: false },
            children: Vec::new(),
            template: None,
        }
    }

    pub fn code(name: CodedConcept, value: CodedConcept, relationship: RelationshipType) -> Self {
        ContentItem {
            name,
            relationship: Some(relationship),
            value: ContentValue::Code(value),
            children: Vec::new(),
            template: None,
        }
    }

    pub fn text(
        name: CodedConcept,
        value: impl Into<String>,
        relationship: RelationshipType,
    ) -> Self {
        ContentItem {
            name,
            relationship: Some(relationship),
            value: ContentValue::Text(value.into()),
            children: Vec::new(),
            template: None,
        }
    }

    pub fn num(
        name: CodedConcept,
        value: DecimalString,
        unit: CodedConcept,
        relationship: RelationshipType,
    ) -> Result<Self, SrError> {
        ContentItem::new(
            name,
            ContentValue::Num(NumericValue::new(value, unit)?),
            Some(relationship),
        )
    }

    pub fn value_type(&self) -> ValueType {
        self.value.value_type()
    }

    pub fn is_container(&self) -> bool {
        matches!(self.value, ContentValue::Container { .. })
    }

    pub fn with_template(mut self, template: impl Into<String>) -> Self {
        self.template = Some(template.into());
        self
    }

    /// Appends a child; only containers may have CONTAINS children.
    pub fn push(&mut self, child: ContentItem) -> Result<(), SrError> {
        match child.relationship {
            None => {
                return Err(SrError::InvalidItem(format!(
                    "child item {} has no relationship type",
                    child.name
                )))
            }
            Some(RelationshipType::Contains) if !self.is_container() => {
                return Err(SrError::InvalidItem(format!(
                    "{} item {} cannot CONTAIN children",
                    self.value_type(),
                    self.name
                )))
            }
            _ => {}
        }
        self.children.push(child);
        Ok(())
    }

    pub fn with_child(mut self, child: ContentItem) -> Result<Self, SrError> {
        self.push(child)?;
        Ok(self)
    }

    /// Checks every node below (and including) this one.
    pub fn validate_tree(&self, is_root: bool) -> Result<(), SrError> {
        if is_root && self.relationship.is_some() {
            return Err(SrError::InvalidItem(
                "root item must not have a relationship".into(),
            ));
        }
        if is_root && !self.is_container() {
            return Err(SrError::InvalidItem("root item must be a CONTAINER".into()));
        }
        if !is_root && self.relationship.is_none() {
            return Err(SrError::InvalidItem(format!(
                "item {} has no relationship",
                self.name
            )));
        }
        self.value.validate()?;
        for child in &self.children {
            if child.relationship == Some(RelationshipType::Contains) && !self.is_container() {
                return Err(SrError::InvalidItem(format!(
                    "{} item {} cannot CONTAIN children",
                    self.value_type(),
                    self.name
                )));
            }
            child.validate_tree(false)?;
        }
        Ok(())
    }

    /// Number of items strictly below this one.
    pub fn descendant_count(&self) -> usize {
        self.children.iter().map(|c| 1 + c.descendant_count()).sum()
    }

    /// Depth-first, document-order iterator over descendants.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants {
            stack: self.children.iter().rev().collect(),
        }
    }

    /// Items below this one matching every filter set in `filter`.
    pub fn find_items(&self, filter: &ItemFilter) -> Vec<&ContentItem> {
        let accept = |item: &&ContentItem| filter.accepts(item);
        if filter.recursive {
            self.descendants().filter(accept).collect()
        } else {
            self.children.iter().filter(accept).collect()
        }
    }

    /// Writes this item's attributes into `ds`.
    pub fn write_into(&self, ds: &mut DataSet) {
        if let Some(rel) = self.relationship {
            ds.set_text(tags::RELATIONSHIP_TYPE, VR::CS, rel.as_str());
        }
        ds.set_text(tags::VALUE_TYPE, VR::CS, self.value_type().as_str());
        ds.set_sequence(tags::CONCEPT_NAME_CODE_SEQUENCE, code_sequence(&self.name));
        match &self.value {
            ContentValue::Container { continuous } => {
                let c = if *continuous {
                    "CONTINUOUS"
                } else {
                    "SEPARATE"
                };
                ds.set_text(tags::CONTINUITY_OF_CONTENT, VR::CS, c);
                if let Some(template) = &self.template {
                    let mut t = DataSet::new();
                    t.set_text(tags::MAPPING_RESOURCE, VR::CS, "DCMR");
                    t.set_text(tags::TEMPLATE_IDENTIFIER, VR::CS, template);
                    ds.set_sequence(tags::CONTENT_TEMPLATE_SEQUENCE, vec![t]);
                }
            }
            ContentValue::Code(c) => {
                ds.set_sequence(tags::CONCEPT_CODE_SEQUENCE, code_sequence(c));
            }
            ContentValue::Num(n) => {
                let mut mv = DataSet::new();
                mv.set_sequence(
                    tags::MEASUREMENT_UNITS_CODE_SEQUENCE,
                    code_sequence(&n.unit),
                );
                mv.set_decimals(tags::NUMERIC_VALUE, vec![n.value.clone()]);
                ds.set_sequence(tags::MEASURED_VALUE_SEQUENCE, vec![mv]);
                if let Some(q) = &n.qualifier {
                    ds.set_sequence(
                        tags::NUMERIC_VALUE_QUALIFIER_CODE_SEQUENCE,
                        code_sequence(q),
                    );
                }
            }
            ContentValue::Text(s) => {
                ds.set_text(tags::TEXT_VALUE, VR::UT, s);
            }
            ContentValue::UidRef(s) => {
                ds.set_uid(tags::UID, s);
            }
            ContentValue::PName(s) => {
                ds.set_text(tags::PERSON_NAME, VR::PN, s);
            }
            ContentValue::DateTime(s) => {
                ds.set_text(tags::DATE_TIME, VR::DT, s);
            }
            ContentValue::Image(r) | ContentValue::Composite(r) => {
                ds.set_sequence(tags::REFERENCED_SOP_SEQUENCE, vec![r.to_item()]);
            }
            ContentValue::Scoord(s) => {
                ds.set_text(tags::GRAPHIC_TYPE, VR::CS, s.graphic_type.as_str());
                ds.set_floats(tags::GRAPHIC_DATA, VR::FL, s.flat());
            }
            ContentValue::Scoord3d(s) => {
                ds.set_text(tags::GRAPHIC_TYPE, VR::CS, s.graphic_type.as_str());
                ds.set_floats(tags::GRAPHIC_DATA, VR::FL, s.flat());
                ds.set_uid(
                    tags::REFERENCED_FRAME_OF_REFERENCE_UID,
                    &s.frame_of_reference_uid,
                );
            }
        }
        if !self.children.is_empty() {
            let items = self
                .children
                .iter()
                .map(|child| {
                    let mut item = DataSet::new();
                    child.write_into(&mut item);
                    item
                })
                .collect();
            ds.set_sequence(tags::CONTENT_SEQUENCE, items);
        }
    }

    pub fn to_dataset(&self) -> DataSet {
        let mut ds = DataSet::new();
        self.write_into(&mut ds);
        ds
    }

    /// Parses an item (and its subtree) from its data set form.
    pub fn from_dataset(ds: &DataSet) -> Result<Self, SrError> {
        let relationship = ds
            .string(tags::RELATIONSHIP_TYPE)
            .map(RelationshipType::from_str)
            .transpose()?;
        let value_type: ValueType = ds
            .string(tags::VALUE_TYPE)
            .ok_or_else(|| SrError::Malformed("content item lacks ValueType".into()))?
            .parse()?;
        let name = concept_at(ds, tags::CONCEPT_NAME_CODE_SEQUENCE)?
            .ok_or_else(|| SrError::Malformed(format!("{value_type} item lacks a concept name")))?;
        let text = |tag| {
            ds.string(tag)
                .map(str::to_string)
                .ok_or_else(|| SrError::Malformed(format!("{value_type} item {name} lacks {tag}")))
        };
        let mut template = None;
        let value = match value_type {
            ValueType::Container => {
                template = ds
                    .item(tags::CONTENT_TEMPLATE_SEQUENCE)
                    .and_then(|t| t.string(tags::TEMPLATE_IDENTIFIER))
                    .map(str::to_string);
                ContentValue::Container {
                    continuous: ds.string(tags::CONTINUITY_OF_CONTENT) == Some("CONTINUOUS"),
                }
            }
            ValueType::Code => ContentValue::Code(
                concept_at(ds, tags::CONCEPT_CODE_SEQUENCE)?
                    .ok_or_else(|| SrError::Malformed(format!("CODE item {name} lacks a value")))?,
            ),
            ValueType::Num => {
                let mv = ds.item(tags::MEASURED_VALUE_SEQUENCE).ok_or_else(|| {
                    SrError::Malformed(format!("NUM item {name} lacks a measured value"))
                })?;
                let value = mv
                    .decimals(tags::NUMERIC_VALUE)
                    .and_then(|v| v.first())
                    .cloned()
                    .ok_or_else(|| {
                        SrError::Malformed(format!("NUM item {name} lacks NumericValue"))
                    })?;
                let unit = concept_at(mv, tags::MEASUREMENT_UNITS_CODE_SEQUENCE)?
                    .ok_or_else(|| SrError::Malformed(format!("NUM item {name} lacks units")))?;
                let qualifier = concept_at(ds, tags::NUMERIC_VALUE_QUALIFIER_CODE_SEQUENCE)?;
                ContentValue::Num(NumericValue {
                    value,
                    unit,
                    qualifier,
                })
            }
            ValueType::Text => {
                ContentValue::Text(ds.string(tags::TEXT_VALUE).unwrap_or_default().to_string())
            }
            ValueType::UidRef => ContentValue::UidRef(text(tags::UID)?),
            ValueType::PName => {
                ContentValue::PName(ds.string(tags::PERSON_NAME).unwrap_or_default().to_string())
            }
            ValueType::DateTime => ContentValue::DateTime(text(tags::DATE_TIME)?),
            ValueType::Image | ValueType::Composite => {
                let item = ds.item(tags::REFERENCED_SOP_SEQUENCE).ok_or_else(|| {
                    SrError::Malformed(format!("{value_type} item {name} lacks a reference"))
                })?;
                let r = ImageReference::from_item(item)?;
                if value_type == ValueType::Image {
                    ContentValue::Image(r)
                } else {
                    ContentValue::Composite(r)
                }
            }
            ValueType::Scoord => {
                let graphic_type: GraphicType2D = text(tags::GRAPHIC_TYPE)?.parse()?;
                let data = graphic_data(ds, &name)?;
                if data.len() % 2 != 0 {
                    return Err(SrError::InvalidGraphic(format!(
                        "SCOORD item {name} has {} coordinates, not a multiple of 2",
                        data.len()
                    )));
                }
                let points = data.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
                ContentValue::Scoord(Scoord {
                    graphic_type,
                    points,
                })
            }
            ValueType::Scoord3d => {
                let graphic_type: GraphicType3D = text(tags::GRAPHIC_TYPE)?.parse()?;
                let data = graphic_data(ds, &name)?;
                if data.len() % 3 != 0 {
                    return Err(SrError::InvalidGraphic(format!(
                        "SCOORD3D item {name} has {} coordinates, not a multiple of 3",
                        data.len()
                    )));
                }
                let points = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
                ContentValue::Scoord3d(Scoord3d {
                    graphic_type,
                    points,
                    frame_of_reference_uid: text(tags::REFERENCED_FRAME_OF_REFERENCE_UID)?,
                })
            }
        };
        value.validate()?;
        let children = ds
            .sequence(tags::CONTENT_SEQUENCE)
            .unwrap_or_default()
            .iter()
            .map(ContentItem::from_dataset)
            .collect::<Result<_, _>>()?;
        Ok(ContentItem {
            name,
            relationship,
            value,
            children,
            template,
        })
    }
}

fn graphic_data(ds: &DataSet, name: &CodedConcept) -> Result<Vec<f32>, SrError> {
    match ds.get(tags::GRAPHIC_DATA).map(|e| &e.value) {
        Some(Value::Float(v)) => Ok(v.iter().map(|&f| f as f32).collect()),
        Some(Value::Decimal(v)) => Ok(v.iter().map(|d| d.to_f64() as f32).collect()),
        _ => Err(SrError::Malformed(format!(
            "spatial item {name} lacks GraphicData"
        ))),
    }
}

pub struct Descendants<'a> {
    stack: Vec<&'a ContentItem>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a ContentItem;

    fn next(&mut self) -> Option<Self::Item> {
        let item = self.stack.pop()?;
        self.stack.extend(item.children.iter().rev());
        Some(item)
    }
}

/// Criteria for [`ContentItem::find_items`]; unset fields match anything.
#[derive(Debug, Clone, Default)]
pub struct ItemFilter {
    pub name: Option<CodedConcept>,
    pub value_type: Option<ValueType>,
    pub relationship: Option<RelationshipType>,
    pub recursive: bool,
}

impl ItemFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn name(mut self, name: impl Into<CodedConcept>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn value_type(mut self, value_type: ValueType) -> Self {
        self.value_type = Some(value_type);
        self
    }

    pub fn relationship(mut self, relationship: RelationshipType) -> Self {
        self.relationship = Some(relationship);
        self
    }

    pub fn recursive(mut self) -> Self {
        self.recursive = true;
        self
    }

    pub fn accepts(&self, item: &ContentItem) -> bool {
        self.name.as_ref().is_none_or(|n| n.matches(&item.name))
            && self.value_type.is_none_or(|v| v == item.value_type())
            && self
                .relationship
                .is_none_or(|r| Some(r) == item.relationship)
    }
}
