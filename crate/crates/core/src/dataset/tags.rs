//! Tag constants for every standard attribute this crate reads or writes.

use super::{Tag, VR};

macro_rules! dictionary {
    ($($name:ident = ($g:literal, $e:literal) $vr:ident $kw:literal;)*) => {
        $(pub const $name: Tag = Tag::new($g, $e);)*

        /// (tag, VR, keyword) for every constant in this module.
        pub(crate) static ENTRIES: &[(Tag, VR, &str)] = &[
            $(($name, VR::$vr, $kw),)*
        ];
    };
}

dictionary! {
    FILE_META_INFORMATION_GROUP_LENGTH = (0x0002, 0x0000) UL "FileMetaInformationGroupLength";
    FILE_META_INFORMATION_VERSION = (0x0002, 0x0001) OB "FileMetaInformationVersion";
    MEDIA_STORAGE_SOP_CLASS_UID = (0x0002, 0x0002) UI "MediaStorageSOPClassUID";
    MEDIA_STORAGE_SOP_INSTANCE_UID = (0x0002, 0x0003) UI "MediaStorageSOPInstanceUID";
    TRANSFER_SYNTAX_UID = (0x0002, 0x0010) UI "TransferSyntaxUID";
    IMPLEMENTATION_CLASS_UID = (0x0002, 0x0012) UI "ImplementationClassUID";
    IMPLEMENTATION_VERSION_NAME = (0x0002, 0x0013) SH "ImplementationVersionName";

    SPECIFIC_CHARACTER_SET = (0x0008, 0x0005) CS "SpecificCharacterSet";
    IMAGE_TYPE = (0x0008, 0x0008) CS "ImageType";
    INSTANCE_CREATION_DATE = (0x0008, 0x0012) DA "InstanceCreationDate";
    INSTANCE_CREATION_TIME = (0x0008, 0x0013) TM "InstanceCreationTime";
    SOP_CLASS_UID = (0x0008, 0x0016) UI "SOPClassUID";
    SOP_INSTANCE_UID = (0x0008, 0x0018) UI "SOPInstanceUID";
    STUDY_DATE = (0x0008, 0x0020) DA "StudyDate";
    SERIES_DATE = (0x0008, 0x0021) DA "SeriesDate";
    CONTENT_DATE = (0x0008, 0x0023) DA "ContentDate";
    STUDY_TIME = (0x0008, 0x0030) TM "StudyTime";
    SERIES_TIME = (0x0008, 0x0031) TM "SeriesTime";
    CONTENT_TIME = (0x0008, 0x0033) TM "ContentTime";
    ACCESSION_NUMBER = (0x0008, 0x0050) SH "AccessionNumber";
    MODALITY = (0x0008, 0x0060) CS "Modality";
    MODALITIES_IN_STUDY = (0x0008, 0x0061) CS "ModalitiesInStudy";
    MANUFACTURER = (0x0008, 0x0070) LO "Manufacturer";
    INSTITUTION_NAME = (0x0008, 0x0080) LO "InstitutionName";
    REFERRING_PHYSICIAN_NAME = (0x0008, 0x0090) PN "ReferringPhysicianName";
    CODE_VALUE = (0x0008, 0x0100) SH "CodeValue";
    CODING_SCHEME_DESIGNATOR = (0x0008, 0x0102) SH "CodingSchemeDesignator";
    CODING_SCHEME_VERSION = (0x0008, 0x0103) SH "CodingSchemeVersion";
    CODE_MEANING = (0x0008, 0x0104) LO "CodeMeaning";
    MAPPING_RESOURCE = (0x0008, 0x0105) CS "MappingResource";
    LONG_CODE_VALUE = (0x0008, 0x0119) UC "LongCodeValue";
    URN_CODE_VALUE = (0x0008, 0x0120) UR "URNCodeValue";
    STUDY_DESCRIPTION = (0x0008, 0x1030) LO "StudyDescription";
    SERIES_DESCRIPTION = (0x0008, 0x103E) LO "SeriesDescription";
    MANUFACTURER_MODEL_NAME = (0x0008, 0x1090) LO "ManufacturerModelName";
    REFERENCED_PERFORMED_PROCEDURE_STEP_SEQUENCE = (0x0008, 0x1111) SQ "ReferencedPerformedProcedureStepSequence";
    REFERENCED_SERIES_SEQUENCE = (0x0008, 0x1115) SQ "ReferencedSeriesSequence";
    REFERENCED_INSTANCE_SEQUENCE = (0x0008, 0x114A) SQ "ReferencedInstanceSequence";
    REFERENCED_SOP_CLASS_UID = (0x0008, 0x1150) UI "ReferencedSOPClassUID";
    REFERENCED_SOP_INSTANCE_UID = (0x0008, 0x1155) UI "ReferencedSOPInstanceUID";
    REFERENCED_FRAME_NUMBER = (0x0008, 0x1160) IS "ReferencedFrameNumber";
    RETRIEVE_URL = (0x0008, 0x1190) UR "RetrieveURL";
    FAILURE_REASON = (0x0008, 0x1197) US "FailureReason";
    FAILED_SOP_SEQUENCE = (0x0008, 0x1198) SQ "FailedSOPSequence";
    REFERENCED_SOP_SEQUENCE = (0x0008, 0x1199) SQ "ReferencedSOPSequence";
    SOURCE_IMAGE_SEQUENCE = (0x0008, 0x2112) SQ "SourceImageSequence";
    ANATOMIC_REGION_SEQUENCE = (0x0008, 0x2218) SQ "AnatomicRegionSequence";
    DERIVATION_IMAGE_SEQUENCE = (0x0008, 0x9124) SQ "DerivationImageSequence";
    DERIVATION_CODE_SEQUENCE = (0x0008, 0x9215) SQ "DerivationCodeSequence";

    PATIENT_NAME = (0x0010, 0x0010) PN "PatientName";
    PATIENT_ID = (0x0010, 0x0020) LO "PatientID";
    PATIENT_BIRTH_DATE = (0x0010, 0x0030) DA "PatientBirthDate";
    PATIENT_SEX = (0x0010, 0x0040) CS "PatientSex";

    SLICE_THICKNESS = (0x0018, 0x0050) DS "SliceThickness";
    SPACING_BETWEEN_SLICES = (0x0018, 0x0088) DS "SpacingBetweenSlices";
    DEVICE_SERIAL_NUMBER = (0x0018, 0x1000) LO "DeviceSerialNumber";
    SOFTWARE_VERSIONS = (0x0018, 0x1020) LO "SoftwareVersions";

    STUDY_INSTANCE_UID = (0x0020, 0x000D) UI "StudyInstanceUID";
    SERIES_INSTANCE_UID = (0x0020, 0x000E) UI "SeriesInstanceUID";
    STUDY_ID = (0x0020, 0x0010) SH "StudyID";
    SERIES_NUMBER = (0x0020, 0x0011) IS "SeriesNumber";
    INSTANCE_NUMBER = (0x0020, 0x0013) IS "InstanceNumber";
    IMAGE_POSITION_PATIENT = (0x0020, 0x0032) DS "ImagePositionPatient";
    IMAGE_ORIENTATION_PATIENT = (0x0020, 0x0037) DS "ImageOrientationPatient";
    FRAME_OF_REFERENCE_UID = (0x0020, 0x0052) UI "FrameOfReferenceUID";
    POSITION_REFERENCE_INDICATOR = (0x0020, 0x1040) LO "PositionReferenceIndicator";
    NUMBER_OF_STUDY_RELATED_INSTANCES = (0x0020, 0x1208) IS "NumberOfStudyRelatedInstances";
    NUMBER_OF_SERIES_RELATED_INSTANCES = (0x0020, 0x1209) IS "NumberOfSeriesRelatedInstances";
    FRAME_CONTENT_SEQUENCE = (0x0020, 0x9111) SQ "FrameContentSequence";
    PLANE_POSITION_SEQUENCE = (0x0020, 0x9113) SQ "PlanePositionSequence";
    PLANE_ORIENTATION_SEQUENCE = (0x0020, 0x9116) SQ "PlaneOrientationSequence";
    DIMENSION_INDEX_VALUES = (0x0020, 0x9157) UL "DimensionIndexValues";
    DIMENSION_ORGANIZATION_UID = (0x0020, 0x9164) UI "DimensionOrganizationUID";
    DIMENSION_INDEX_POINTER = (0x0020, 0x9165) AT "DimensionIndexPointer";
    FUNCTIONAL_GROUP_POINTER = (0x0020, 0x9167) AT "FunctionalGroupPointer";
    DIMENSION_ORGANIZATION_SEQUENCE = (0x0020, 0x9221) SQ "DimensionOrganizationSequence";
    DIMENSION_INDEX_SEQUENCE = (0x0020, 0x9222) SQ "DimensionIndexSequence";

    SAMPLES_PER_PIXEL = (0x0028, 0x0002) US "SamplesPerPixel";
    PHOTOMETRIC_INTERPRETATION = (0x0028, 0x0004) CS "PhotometricInterpretation";
    NUMBER_OF_FRAMES = (0x0028, 0x0008) IS "NumberOfFrames";
    ROWS = (0x0028, 0x0010) US "Rows";
    COLUMNS = (0x0028, 0x0011) US "Columns";
    PIXEL_SPACING = (0x0028, 0x0030) DS "PixelSpacing";
    BITS_ALLOCATED = (0x0028, 0x0100) US "BitsAllocated";
    BITS_STORED = (0x0028, 0x0101) US "BitsStored";
    HIGH_BIT = (0x0028, 0x0102) US "HighBit";
    PIXEL_REPRESENTATION = (0x0028, 0x0103) US "PixelRepresentation";
    LOSSY_IMAGE_COMPRESSION = (0x0028, 0x2110) CS "LossyImageCompression";
    PIXEL_MEASURES_SEQUENCE = (0x0028, 0x9110) SQ "PixelMeasuresSequence";

    CONTAINER_IDENTIFIER = (0x0040, 0x0512) LO "ContainerIdentifier";
    SPECIMEN_IDENTIFIER = (0x0040, 0x0551) LO "SpecimenIdentifier";
    SPECIMEN_UID = (0x0040, 0x0554) UI "SpecimenUID";
    SPECIMEN_DESCRIPTION_SEQUENCE = (0x0040, 0x0560) SQ "SpecimenDescriptionSequence";
    X_OFFSET_IN_SLIDE_COORDINATE_SYSTEM = (0x0040, 0x072A) DS "XOffsetInSlideCoordinateSystem";
    Y_OFFSET_IN_SLIDE_COORDINATE_SYSTEM = (0x0040, 0x073A) DS "YOffsetInSlideCoordinateSystem";
    Z_OFFSET_IN_SLIDE_COORDINATE_SYSTEM = (0x0040, 0x074A) DS "ZOffsetInSlideCoordinateSystem";
    MEASUREMENT_UNITS_CODE_SEQUENCE = (0x0040, 0x08EA) SQ "MeasurementUnitsCodeSequence";
    RELATIONSHIP_TYPE = (0x0040, 0xA010) CS "RelationshipType";
    VERIFYING_ORGANIZATION = (0x0040, 0xA027) LO "VerifyingOrganization";
    VERIFICATION_DATE_TIME = (0x0040, 0xA030) DT "VerificationDateTime";
    VALUE_TYPE = (0x0040, 0xA040) CS "ValueType";
    CONCEPT_NAME_CODE_SEQUENCE = (0x0040, 0xA043) SQ "ConceptNameCodeSequence";
    CONTINUITY_OF_CONTENT = (0x0040, 0xA050) CS "ContinuityOfContent";
    VERIFYING_OBSERVER_SEQUENCE = (0x0040, 0xA073) SQ "VerifyingObserverSequence";
    VERIFYING_OBSERVER_NAME = (0x0040, 0xA075) PN "VerifyingObserverName";
    VERIFYING_OBSERVER_IDENTIFICATION_CODE_SEQUENCE = (0x0040, 0xA088) SQ "VerifyingObserverIdentificationCodeSequence";
    DATE_TIME = (0x0040, 0xA120) DT "DateTime";
    PERSON_NAME = (0x0040, 0xA123) PN "PersonName";
    UID = (0x0040, 0xA124) UI "UID";
    TEXT_VALUE = (0x0040, 0xA160) UT "TextValue";
    CONCEPT_CODE_SEQUENCE = (0x0040, 0xA168) SQ "ConceptCodeSequence";
    PURPOSE_OF_REFERENCE_CODE_SEQUENCE = (0x0040, 0xA170) SQ "PurposeOfReferenceCodeSequence";
    MEASURED_VALUE_SEQUENCE = (0x0040, 0xA300) SQ "MeasuredValueSequence";
    NUMERIC_VALUE_QUALIFIER_CODE_SEQUENCE = (0x0040, 0xA301) SQ "NumericValueQualifierCodeSequence";
    NUMERIC_VALUE = (0x0040, 0xA30A) DS "NumericValue";
    PREDECESSOR_DOCUMENTS_SEQUENCE = (0x0040, 0xA360) SQ "PredecessorDocumentsSequence";
    PERFORMED_PROCEDURE_CODE_SEQUENCE = (0x0040, 0xA372) SQ "PerformedProcedureCodeSequence";
    CURRENT_REQUESTED_PROCEDURE_EVIDENCE_SEQUENCE = (0x0040, 0xA375) SQ "CurrentRequestedProcedureEvidenceSequence";
    PERTINENT_OTHER_EVIDENCE_SEQUENCE = (0x0040, 0xA385) SQ "PertinentOtherEvidenceSequence";
    COMPLETION_FLAG = (0x0040, 0xA491) CS "CompletionFlag";
    VERIFICATION_FLAG = (0x0040, 0xA493) CS "VerificationFlag";
    CONTENT_TEMPLATE_SEQUENCE = (0x0040, 0xA504) SQ "ContentTemplateSequence";
    CONTENT_SEQUENCE = (0x0040, 0xA730) SQ "ContentSequence";
    TEMPLATE_IDENTIFIER = (0x0040, 0xDB00) CS "TemplateIdentifier";

    TOTAL_PIXEL_MATRIX_COLUMNS = (0x0048, 0x0006) UL "TotalPixelMatrixColumns";
    TOTAL_PIXEL_MATRIX_ROWS = (0x0048, 0x0007) UL "TotalPixelMatrixRows";
    IMAGE_ORIENTATION_SLIDE = (0x0048, 0x0102) DS "ImageOrientationSlide";
    PLANE_POSITION_SLIDE_SEQUENCE = (0x0048, 0x021A) SQ "PlanePositionSlideSequence";
    COLUMN_POSITION_IN_TOTAL_IMAGE_PIXEL_MATRIX = (0x0048, 0x021E) SL "ColumnPositionInTotalImagePixelMatrix";
    ROW_POSITION_IN_TOTAL_IMAGE_PIXEL_MATRIX = (0x0048, 0x021F) SL "RowPositionInTotalImagePixelMatrix";

    SEGMENTATION_TYPE = (0x0062, 0x0001) CS "SegmentationType";
    SEGMENT_SEQUENCE = (0x0062, 0x0002) SQ "SegmentSequence";
    SEGMENTED_PROPERTY_CATEGORY_CODE_SEQUENCE = (0x0062, 0x0003) SQ "SegmentedPropertyCategoryCodeSequence";
    SEGMENT_NUMBER = (0x0062, 0x0004) US "SegmentNumber";
    SEGMENT_LABEL = (0x0062, 0x0005) LO "SegmentLabel";
    SEGMENT_DESCRIPTION = (0x0062, 0x0006) ST "SegmentDescription";
    SEGMENTATION_ALGORITHM_IDENTIFICATION_SEQUENCE = (0x0062, 0x0007) SQ "SegmentationAlgorithmIdentificationSequence";
    SEGMENT_ALGORITHM_TYPE = (0x0062, 0x0008) CS "SegmentAlgorithmType";
    SEGMENT_ALGORITHM_NAME = (0x0062, 0x0009) LO "SegmentAlgorithmName";
    SEGMENT_IDENTIFICATION_SEQUENCE = (0x0062, 0x000A) SQ "SegmentIdentificationSequence";
    REFERENCED_SEGMENT_NUMBER = (0x0062, 0x000B) US "ReferencedSegmentNumber";
    MAXIMUM_FRACTIONAL_VALUE = (0x0062, 0x000E) US "MaximumFractionalValue";
    SEGMENTED_PROPERTY_TYPE_CODE_SEQUENCE = (0x0062, 0x000F) SQ "SegmentedPropertyTypeCodeSequence";
    SEGMENTATION_FRACTIONAL_TYPE = (0x0062, 0x0010) CS "SegmentationFractionalType";
    TRACKING_ID = (0x0062, 0x0020) UT "TrackingID";
    TRACKING_UID = (0x0062, 0x0021) UI "TrackingUID";

    ALGORITHM_FAMILY_CODE_SEQUENCE = (0x0066, 0x002F) SQ "AlgorithmFamilyCodeSequence";
    ALGORITHM_VERSION = (0x0066, 0x0031) LO "AlgorithmVersion";
    ALGORITHM_PARAMETERS = (0x0066, 0x0032) LT "AlgorithmParameters";
    ALGORITHM_NAME = (0x0066, 0x0036) LO "AlgorithmName";

    GRAPHIC_DATA = (0x0070, 0x0022) FL "GraphicData";
    GRAPHIC_TYPE = (0x0070, 0x0023) CS "GraphicType";
    CONTENT_LABEL = (0x0070, 0x0080) CS "ContentLabel";
    CONTENT_DESCRIPTION = (0x0070, 0x0081) LO "ContentDescription";
    CONTENT_CREATOR_NAME = (0x0070, 0x0084) PN "ContentCreatorName";

    REFERENCED_FRAME_OF_REFERENCE_UID = (0x3006, 0x0024) UI "ReferencedFrameOfReferenceUID";

    SHARED_FUNCTIONAL_GROUPS_SEQUENCE = (0x5200, 0x9229) SQ "SharedFunctionalGroupsSequence";
    PER_FRAME_FUNCTIONAL_GROUPS_SEQUENCE = (0x5200, 0x9230) SQ "PerFrameFunctionalGroupsSequence";

    PIXEL_DATA = (0x7FE0, 0x0010) OW "PixelData";
}

// Item and delimitation tags, which carry no VR.
pub const ITEM: Tag = Tag::new(0xFFFE, 0xE000);
pub const ITEM_DELIMITATION: Tag = Tag::new(0xFFFE, 0xE00D);
pub const SEQUENCE_DELIMITATION: Tag = Tag::new(0xFFFE, 0xE0DD);
