//! Named variants behind a common trait, selected at runtime.

use crate::error::{Error, Result};

pub trait Named {
    fn name(&self) -> &str;
}

pub struct Registry<T: ?Sized + Named> {
    entries: Vec<Box<T>>,
}

impl<T: ?Sized + Named> Default for Registry<T> {
    fn default() -> Self {
        Registry { entries: Vec::new() }
    }
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Later registrations under an existing name replace the earlier one.
    pub fn register(&mut self, entry: Box<T>) {
        self.entries.retain(|e| e.name() != entry.name());
        self.entries.push(entry);
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownName(format!("{name} (known: {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|b| b.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Named {
        fn greet(&self) -> String;
    }
    struct A(&'static str);
    impl Named for A {
        fn name(&self) -> &str {
            self.0
        }
    }
    impl Greeter for A {
        fn greet(&self) -> String {
            format!("hi from {}", self.0)
        }
    }

    #[test]
    fn lookup_and_replace() {
        let mut r: Registry<dyn Greeter> = Registry::new();
        r.register(Box::new(A("x")));
        r.register(Box::new(A("y")));
        r.register(Box::new(A("x")));
        assert_eq!(r.names(), vec!["y", "x"]);
        assert_eq!(r.get("y").unwrap().greet(), "hi from y");
        assert!(matches!(r.get("z"), Err(Error::UnknownName(_))));
    }
}
