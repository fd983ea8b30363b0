use std::fmt;
use std::path::Path;

/// Exit codes: 0 success, 1 validation or invalid input content, 2 usage,
/// 3 I/O, 4 network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Validation,
    Input,
    Usage,
    Io,
    Network,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Validation | Category::Input => 1,
            Category::Usage => 2,
            Category::Io => 3,
            Category::Network => 4,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Category::Validation => "validation",
            Category::Input => "input",
            Category::Usage => "usage",
            Category::Io => "io",
            Category::Network => "network",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub detail: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ERROR {}: {}",
            self.category.as_str(),
            self.detail.replace('\n', " ")
        )
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn fail(category: Category, detail: impl fmt::Display) -> CliError {
    CliError {
        category,
        detail: detail.to_string(),
    }
}

pub fn usage(detail: impl fmt::Display) -> CliError {
    fail(Category::Usage, detail)
}

pub fn input(detail: impl fmt::Display) -> CliError {
    fail(Category::Input, detail)
}

pub fn io(path: &Path, e: impl fmt::Display) -> CliError {
    fail(Category::Io, format!("{}: {e}", path.display()))
}

pub fn network(e: dicom_annot_web::WebError) -> CliError {
    fail(Category::Network, e)
}
