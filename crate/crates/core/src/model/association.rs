use std::collections::BTreeSet;

use super::group::MetamorphicGroup;

/// Which source inputs were paired with which MRs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssociationRelation {
    pairs: BTreeSet<(String, String)>,
}

impl AssociationRelation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        AssociationRelation {
            pairs: pairs.into_iter().map(|(t, m)| (t.into(), m.into())).collect(),
        }
    }

    /// Returns true if the pair was new.
    pub fn insert(&mut self, input: impl Into<String>, mr: impl Into<String>) -> bool {
        self.pairs.insert((input.into(), mr.into()))
    }

    pub fn contains(&self, input: &str, mr: &str) -> bool {
        self.pairs.contains(&(input.to_owned(), mr.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(t, m)| (t.as_str(), m.as_str()))
    }

    /// MR ids paired with `input`.
    pub fn mrs_of<'a>(&'a self, input: &str) -> impl Iterator<Item = &'a str> + 'a {
        let start = (input.to_owned(), String::new());
        let input = input.to_owned();
        self.pairs
            .range(start..)
            .take_while(move |(t, _)| *t == input)
            .map(|(_, m)| m.as_str())
    }

    pub fn inputs(&self) -> BTreeSet<&str> {
        self.pairs.iter().map(|(t, _)| t.as_str()).collect()
    }

    pub fn mrs(&self) -> BTreeSet<&str> {
        self.pairs.iter().map(|(_, m)| m.as_str()).collect()
    }
}

/// Pairs every source input of every group with the group's MR.
pub fn build_association<'a, I>(mgs: I) -> AssociationRelation
where
    I: IntoIterator<Item = &'a MetamorphicGroup>,
{
    let mut coop = AssociationRelation::new();
    for mg in mgs {
        for s in &mg.sources {
            coop.insert(s.clone(), mg.mr.clone());
        }
    }
    coop
}
