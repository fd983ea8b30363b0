use super::{CodedConcept, CodingError};

/// A statically known code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Code {
    pub keyword: &'static str,
    pub value: &'static str,
    pub scheme: &'static str,
    pub meaning: &'static str,
}

impl Code {
    pub fn concept(self) -> CodedConcept {
        CodedConcept::new(self.value, self.scheme, self.meaning)
    }
}

impl PartialEq<Code> for CodedConcept {
    fn eq(&self, other: &Code) -> bool {
        self.value() == other.value && self.scheme() == other.scheme && self.version().is_none()
    }
}

/// Keyword-indexed codes of one coding scheme.
#[derive(Debug)]
pub struct CodeRegistry {
    pub scheme: &'static str,
    pub entries: &'static [Code],
}

impl CodeRegistry {
    /// Finds an entry by keyword first, then by code value.
    pub fn get(&self, key: &str) -> Option<Code> {
        self.entries
            .iter()
            .find(|c| c.keyword == key)
            .or_else(|| self.entries.iter().find(|c| c.value == key))
            .copied()
    }
}

macro_rules! scheme {
    ($module:ident, $scheme:literal, $registry:ident { $($name:ident = $kw:literal, $value:literal, $meaning:literal;)* }) => {
        pub mod $module {
            use super::super::Code;
            $(pub const $name: Code = Code {
                keyword: $kw,
                value: $value,
                scheme: $scheme,
                meaning: $meaning,
            };)*
            pub(crate) static ALL: &[Code] = &[$($name,)*];
        }
        static $registry: super::CodeRegistry = super::CodeRegistry {
            scheme: $scheme,
            entries: $module::ALL,
        };
    };
}

pub mod codes {
    scheme!(dcm, "DCM", DCM_REGISTRY {
        FINDING = "Finding", "121071", "Finding";
        IMAGING_MEASUREMENT_REPORT = "ImagingMeasurementReport", "126000", "Imaging Measurement Report";
        IMAGE_LIBRARY = "ImageLibrary", "111028", "Image Library";
        IMAGE_LIBRARY_GROUP = "ImageLibraryGroup", "126200", "Image Library Group";
        IMAGING_MEASUREMENTS = "ImagingMeasurements", "126010", "Imaging Measurements";
        MEASUREMENT_GROUP = "MeasurementGroup", "125007", "Measurement Group";
        TRACKING_IDENTIFIER = "TrackingIdentifier", "112039", "Tracking Identifier";
        TRACKING_UNIQUE_IDENTIFIER = "TrackingUniqueIdentifier", "112040", "Tracking Unique Identifier";
        IMAGE_REGION = "ImageRegion", "111030", "Image Region";
        VOLUME_SURFACE = "VolumeSurface", "121231", "Volume Surface";
        REFERENCED_SEGMENT = "ReferencedSegment", "121191", "Referenced Segment";
        REFERENCED_SEGMENTATION_FRAME = "ReferencedSegmentationFrame", "121214", "Referenced Segmentation Frame";
        SOURCE_OF_MEASUREMENT = "SourceOfMeasurement", "121112", "Source of Measurement";
        SOURCE_IMAGE = "SourceImage", "121324", "Source Image";
        SOURCE_IMAGE_FOR_SEGMENTATION = "SourceImageForSegmentation", "121233", "Source Image for Segmentation";
        OBSERVER_TYPE = "ObserverType", "121005", "Observer Type";
        PERSON = "Person", "121006", "Person";
        DEVICE = "Device", "121007", "Device";
        PERSON_OBSERVER_NAME = "PersonObserverName", "121008", "Person Observer Name";
        DEVICE_OBSERVER_UID = "DeviceObserverUID", "121012", "Device Observer UID";
        DEVICE_OBSERVER_NAME = "DeviceObserverName", "121013", "Device Observer Name";
        DEVICE_OBSERVER_MANUFACTURER = "DeviceObserverManufacturer", "121014", "Device Observer Manufacturer";
        DEVICE_OBSERVER_MODEL_NAME = "DeviceObserverModelName", "121015", "Device Observer Model Name";
        ALGORITHM_NAME = "AlgorithmName", "111001", "Algorithm Name";
        ALGORITHM_PARAMETERS = "AlgorithmParameters", "111002", "Algorithm Parameters";
        ALGORITHM_VERSION = "AlgorithmVersion", "111003", "Algorithm Version";
        PROCEDURE_REPORTED = "ProcedureReported", "121058", "Procedure reported";
        SEGMENTATION = "Segmentation", "113076", "Segmentation";
        ARTIFICIAL_INTELLIGENCE = "ArtificialIntelligence", "123110", "Artificial Intelligence";
        MANUAL_PROCESSING = "ManualProcessing", "123109", "Manual Processing";
        SOURCE_IMAGE_FOR_PROCESSING = "SourceImageForImageProcessingOperation", "121322", "Source image for image processing operation";
    });

    scheme!(sct, "SCT", SCT_REGISTRY {
        NEOPLASM = "Neoplasm", "108369006", "Neoplasm";
        MORPHOLOGICALLY_ABNORMAL_STRUCTURE = "MorphologicallyAbnormalStructure", "49755003", "Morphologically Abnormal Structure";
        NODULE = "Nodule", "27925004", "Nodule";
        VOLUME = "Volume", "118565006", "Volume";
        DIAMETER = "Diameter", "81827009", "Diameter";
        AREA = "Area", "42798000", "Area";
        LENGTH = "Length", "410668003", "Length";
        LONG_AXIS = "LongAxis", "103339001", "Long Axis";
        SHORT_AXIS = "ShortAxis", "103340004", "Short Axis";
        MORPHOLOGY = "Morphology", "116676008", "Morphology";
        TOPOGRAPHY = "Topography", "116677004", "Topography";
        FINDING_SITE = "FindingSite", "363698007", "Finding Site";
        LUNG = "Lung", "39607008", "Lung";
        RIGHT_LUNG = "RightLung", "3341006", "Right lung";
        LEFT_LUNG = "LeftLung", "44029006", "Left lung";
        TISSUE = "Tissue", "85756007", "Tissue";
        ANATOMICAL_STRUCTURE = "AnatomicalStructure", "91723000", "Anatomical Structure";
        COMPUTED_TOMOGRAPHY = "ComputedTomography", "77477000", "Computed Tomography";
        IMAGING_PROCEDURE = "ImagingProcedure", "363679005", "Imaging procedure";
        UNKNOWN = "Unknown", "261665006", "Unknown";
    });

    scheme!(ucum, "UCUM", UCUM_REGISTRY {
        MILLIMETER = "mm", "mm", "millimeter";
        SQUARE_MILLIMETER = "mm2", "mm2", "square millimeter";
        CUBIC_MILLIMETER = "mm3", "mm3", "cubic millimeter";
        CENTIMETER = "cm", "cm", "centimeter";
        SQUARE_CENTIMETER = "cm2", "cm2", "square centimeter";
        CUBIC_CENTIMETER = "cm3", "cm3", "cubic centimeter";
        MICROMETER = "um", "um", "micrometer";
        PERCENT = "%", "%", "percent";
        NO_UNITS = "1", "1", "no units";
    });

    pub(super) fn registries() -> [&'static super::CodeRegistry; 3] {
        [&DCM_REGISTRY, &SCT_REGISTRY, &UCUM_REGISTRY]
    }
}

/// The built-in registry for a scheme designator.
pub fn registry(scheme: &str) -> Option<&'static CodeRegistry> {
    codes::registries().into_iter().find(|r| r.scheme == scheme)
}

/// Looks up a built-in code by keyword or code value.
pub fn lookup(scheme: &str, key: &str) -> Result<CodedConcept, CodingError> {
    let registry =
        registry(scheme).ok_or_else(|| CodingError::UnknownScheme(scheme.to_string()))?;
    registry
        .get(key)
        .map(Code::concept)
        .ok_or_else(|| CodingError::UnknownCode {
            scheme: scheme.to_string(),
            key: key.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups_by_code_and_keyword() {
        let finding = lookup("DCM", "121071").unwrap();
        assert!(finding.identical(&CodedConcept::new("121071", "DCM", "Finding")));
        assert_eq!(lookup("DCM", "Finding").unwrap(), finding);

        let nodule = lookup("SCT", "27925004").unwrap();
        assert!(nodule.identical(&CodedConcept::new("27925004", "SCT", "Nodule")));

        let mm = lookup("UCUM", "mm").unwrap();
        assert!(mm.identical(&CodedConcept::new("mm", "UCUM", "millimeter")));
    }

    #[test]
    fn unknown_scheme_and_code() {
        assert_eq!(
            lookup("LN", "1234-5"),
            Err(CodingError::UnknownScheme("LN".into()))
        );
        match lookup("SCT", "no-such-code") {
            Err(CodingError::UnknownCode { scheme, .. }) => assert_eq!(scheme, "SCT"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn registry_closure() {
        for reg in codes::registries() {
            let mut keywords = std::collections::HashSet::new();
            for code in reg.entries {
                assert!(
                    keywords.insert(code.keyword),
                    "duplicate keyword {}",
                    code.keyword
                );
                assert_eq!(code.scheme, reg.scheme);
                assert_eq!(
                    lookup(reg.scheme, code.keyword).unwrap().scheme(),
                    reg.scheme
                );
                assert_eq!(lookup(reg.scheme, code.value).unwrap().value(), code.value);
            }
        }
    }

    #[test]
    fn common_codes_present() {
        for (scheme, value) in [
            ("SCT", "108369006"),
            ("SCT", "49755003"),
            ("SCT", "118565006"),
            ("SCT", "81827009"),
            ("SCT", "116676008"),
            ("SCT", "116677004"),
            ("DCM", "126000"),
            ("UCUM", "mm3"),
            ("UCUM", "%"),
        ] {
            assert!(lookup(scheme, value).is_ok(), "{scheme} {value}");
        }
    }
}
