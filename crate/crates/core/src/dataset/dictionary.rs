//! Keyword and VR lookup for the attributes in [`tags`](super::tags).

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{tags, Tag, VR};

struct Index {
    by_tag: HashMap<Tag, (VR, &'static str)>,
    by_keyword: HashMap<&'static str, Tag>,
}

fn index() -> &'static Index {
    static INDEX: OnceLock<Index> = OnceLock::new();
    INDEX.get_or_init(|| {
        let mut by_tag = HashMap::new();
        let mut by_keyword = HashMap::new();
        for &(tag, vr, kw) in tags::ENTRIES {
            by_tag.insert(tag, (vr, kw));
            by_keyword.insert(kw, tag);
        }
        Index { by_tag, by_keyword }
    })
}

/// Default VR of a known attribute; used when decoding implicit VR streams.
pub fn vr_of(tag: Tag) -> Option<VR> {
    if tag.element == 0x0000 {
        return Some(VR::UL);
    }
    index().by_tag.get(&tag).map(|&(vr, _)| vr)
}

pub fn keyword_of(tag: Tag) -> Option<&'static str> {
    index().by_tag.get(&tag).map(|&(_, kw)| kw)
}

pub fn tag_of(keyword: &str) -> Option<Tag> {
    index().by_keyword.get(keyword).copied()
}

/// Resolves either a keyword or a hexadecimal tag string.
pub fn resolve(key: &str) -> Option<Tag> {
    tag_of(key).or_else(|| Tag::parse_hex(key))
}
