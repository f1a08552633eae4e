//! Compact insertion-ordered map from attribute keys to attributes.
//!
//! An empty map is a null pointer. Entries live in one vector and lookups
//! scan it until the map reaches [`INDEX_FROM`] entries, after which a hash
//! index is kept alongside.

use std::collections::HashMap;
use std::fmt;
use std::ops::Index;

use crate::model::Attribute;

/// Entry count at which a map starts keeping a hash index.
pub const INDEX_FROM: usize = 24;

type Entry = (String, Attribute);

#[derive(Clone, Default)]
struct Inner {
    entries: Vec<Entry>,
    #[allow(clippy::box_collection)]
    index: Option<Box<HashMap<String, usize>>>,
}

impl Inner {
    fn position(&self, key: &str) -> Option<usize> {
        match &self.index {
            Some(index) => index.get(key).copied(),
            None => self.entries.iter().position(|(k, _)| k == key),
        }
    }

    fn build_index(&mut self) {
        let index = self.entries.iter().enumerate().map(|(i, (k, _))| (k.clone(), i)).collect();
        self.index = Some(Box::new(index));
    }
}

/// Ordered attribute map; keys are unique and equality is order sensitive.
#[derive(Clone, Default)]
pub struct AttrMap(Option<Box<Inner>>);

impl AttrMap {
    pub const fn new() -> Self {
        AttrMap(None)
    }

    pub fn with_capacity(n: usize) -> Self {
        if n == 0 {
            return AttrMap(None);
        }
        let mut inner = Inner {
            entries: Vec::with_capacity(n),
            index: None,
        };
        if n >= INDEX_FROM {
            inner.index = Some(Box::default());
        }
        AttrMap(Some(Box::new(inner)))
    }

    fn entries(&self) -> &[Entry] {
        self.0.as_deref().map_or(&[], |i| &i.entries)
    }

    pub fn len(&self) -> usize {
        self.entries().len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries().is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&Attribute> {
        let inner = self.0.as_deref()?;
        inner.position(key).map(|i| &inner.entries[i].1)
    }

    pub fn get_mut(&mut self, key: &str) -> Option<&mut Attribute> {
        let inner = self.0.as_deref_mut()?;
        let i = inner.position(key)?;
        Some(&mut inner.entries[i].1)
    }

    pub fn get_index(&self, i: usize) -> Option<(&String, &Attribute)> {
        self.entries().get(i).map(|(k, a)| (k, a))
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.0.as_deref().is_some_and(|i| i.position(key).is_some())
    }

    /// Inserts `attr` under `key`. An existing key keeps its position and
    /// the old attribute is returned.
    pub fn insert(&mut self, key: String, attr: Attribute) -> Option<Attribute> {
        let inner = self.0.get_or_insert_with(Box::default);
        if let Some(i) = inner.position(&key) {
            return Some(std::mem::replace(&mut inner.entries[i].1, attr));
        }
        let at = inner.entries.len();
        if let Some(index) = &mut inner.index {
            index.insert(key.clone(), at);
        }
        inner.entries.push((key, attr));
        if inner.index.is_none() && inner.entries.len() >= INDEX_FROM {
            inner.build_index();
        }
        None
    }

    pub fn swap_indices(&mut self, a: usize, b: usize) {
        if let Some(inner) = self.0.as_deref_mut() {
            inner.entries.swap(a, b);
            if inner.index.is_some() {
                inner.build_index();
            }
        }
    }

    /// Releases spare capacity.
    pub fn shrink_to_fit(&mut self) {
        if let Some(inner) = self.0.as_deref_mut() {
            inner.entries.shrink_to_fit();
        }
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter(self.entries().iter())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Attribute)> {
        let entries: &mut [Entry] = match self.0.as_deref_mut() {
            Some(inner) => &mut inner.entries,
            None => &mut [],
        };
        entries.iter_mut().map(|(k, a)| (&*k, a))
    }

    pub fn keys(&self) -> impl DoubleEndedIterator<Item = &String> + ExactSizeIterator {
        self.entries().iter().map(|(k, _)| k)
    }

    pub fn values(&self) -> impl DoubleEndedIterator<Item = &Attribute> + ExactSizeIterator {
        self.entries().iter().map(|(_, a)| a)
    }
}

/// Borrowing iterator over `(key, attribute)` pairs in insertion order.
#[derive(Clone)]
pub struct Iter<'a>(std::slice::Iter<'a, Entry>);

impl<'a> Iterator for Iter<'a> {
    type Item = (&'a String, &'a Attribute);

    fn next(&mut self) -> Option<Self::Item> {
        self.0.next().map(|(k, a)| (k, a))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.0.size_hint()
    }
}

impl DoubleEndedIterator for Iter<'_> {
    fn next_back(&mut self) -> Option<Self::Item> {
        self.0.next_back().map(|(k, a)| (k, a))
    }
}

impl ExactSizeIterator for Iter<'_> {}

impl<'a> IntoIterator for &'a AttrMap {
    type Item = (&'a String, &'a Attribute);
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl IntoIterator for AttrMap {
    type Item = Entry;
    type IntoIter = std::vec::IntoIter<Entry>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.map(|i| i.entries).unwrap_or_default().into_iter()
    }
}

impl FromIterator<Entry> for AttrMap {
    fn from_iter<I: IntoIterator<Item = Entry>>(iter: I) -> Self {
        let mut map = AttrMap::new();
        map.extend(iter);
        map
    }
}

impl Extend<Entry> for AttrMap {
    fn extend<I: IntoIterator<Item = Entry>>(&mut self, iter: I) {
        for (k, a) in iter {
            self.insert(k, a);
        }
    }
}

impl<const N: usize> From<[Entry; N]> for AttrMap {
    fn from(entries: [Entry; N]) -> Self {
        entries.into_iter().collect()
    }
}

impl Index<&str> for AttrMap {
    type Output = Attribute;

    fn index(&self, key: &str) -> &Attribute {
        self.get(key).unwrap_or_else(|| panic!("no attribute {key:?}"))
    }
}

impl PartialEq for AttrMap {
    fn eq(&self, other: &Self) -> bool {
        self.entries() == other.entries()
    }
}

impl Eq for AttrMap {}

impl fmt::Debug for AttrMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}
