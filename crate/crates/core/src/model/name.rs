use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

/// A process name or process variable.
///
/// Names and variables share one type; the variable mapping decides at each
/// use site which actual process a name refers to. Names containing `/` are
/// reserved for processes created by `spawn`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(text: impl AsRef<str>) -> Self {
        Name(Arc::from(text.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True for names generated by spawning.
    pub fn is_spawned(&self) -> bool {
        self.0.contains('/')
    }

    /// Characters admitted in names by the surface syntax.
    pub fn is_name_char(c: char) -> bool {
        c.is_ascii_alphanumeric() || c == '_' || c == '/'
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Opaque expression text. Compared after whitespace normalisation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<str>);

impl Expr {
    pub fn new(text: impl AsRef<str>) -> Self {
        let normalised = text.as_ref().split_whitespace().collect::<Vec<_>>().join(" ");
        Expr(Arc::from(normalised))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Expr {
    fn from(s: &str) -> Self {
        Expr::new(s)
    }
}

/// Picks `base_k` for the smallest `k` such that `taken` rejects nothing.
pub(crate) fn fresh_variant(base: &Name, taken: impl Fn(&Name) -> bool) -> Name {
    let mut k = 1usize;
    loop {
        let candidate = Name::new(format!("{base}_{k}"));
        if !taken(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_lexicographic() {
        let mut names = vec![Name::from("entry/worker0"), Name::from("client"), Name::from("entry")];
        names.sort();
        assert_eq!(names, vec![Name::from("client"), Name::from("entry"), Name::from("entry/worker0")]);
    }

    #[test]
    fn expressions_normalise_whitespace() {
        assert_eq!(Expr::new("  a   b\n c "), Expr::new("a b c"));
    }

    #[test]
    fn spawned_names_carry_a_slash() {
        assert!(Name::from("entry/worker0").is_spawned());
        assert!(!Name::from("entry").is_spawned());
    }
}
